//! Dense tableau, two-phase primal simplex over bounded variables.
//!
//! Every structural variable is shifted to `y = x - lower` so that it lives
//! in `[0, upper - lower]`; nonbasic variables sit at either bound. Rows are
//! turned into equalities with a slack (inequalities) and an artificial
//! variable where no slack can start in the basis. Pivoting uses Dantzig's
//! rule and falls back to Bland's smallest-index rule after a run of
//! degenerate pivots. The final basic solution is recomputed from the
//! original rows with an LU solve so that residuals do not carry the
//! accumulated tableau error.

use super::{LinearProgram, LpOutcome, LpStatus, Relation, Sense};
use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    t: Vec<f64>,
    /// Original (sign-normalized) constraint matrix, row-major.
    a: Vec<f64>,
    rhs: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<ColumnState>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    /// Reduced costs of the current phase objective (maximization).
    d: Vec<f64>,
    barred: Vec<bool>,
    structural: usize,
    first_artificial: usize,
    pivots: usize,
    max_pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.variables.len();
        let m = lp.rows.len();

        let mut slack_of = vec![None; m];
        let mut slacks = 0;
        for (i, row) in lp.rows.iter().enumerate() {
            if row.relation != Relation::Eq {
                slack_of[i] = Some(n + slacks);
                slacks += 1;
            }
        }
        let first_artificial = n + slacks;

        // Shifted right-hand sides, rows flipped to be non-negative.
        let mut dense = vec![vec![0.0; first_artificial]; m];
        let mut rhs = vec![0.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let mut b = row.rhs;
            for &(j, c) in &row.coefficients {
                dense[i][j] += c;
                b -= c * lp.variables[j].lower;
            }
            if let Some(s) = slack_of[i] {
                dense[i][s] = if row.relation == Relation::Le {
                    1.0
                } else {
                    -1.0
                };
            }
            if b < 0.0 {
                b = -b;
                dense[i].iter_mut().for_each(|x| *x = -*x);
            }
            rhs[i] = b;
        }

        let mut basis = Vec::with_capacity(m);
        let mut artificial_rows = Vec::new();
        for i in 0..m {
            match slack_of[i] {
                Some(s) if dense[i][s] > 0.0 => basis.push(s),
                _ => {
                    basis.push(first_artificial + artificial_rows.len());
                    artificial_rows.push(i);
                }
            }
        }
        let cols = first_artificial + artificial_rows.len();

        let mut a = vec![0.0; m * cols];
        for i in 0..m {
            a[i * cols..i * cols + first_artificial].copy_from_slice(&dense[i]);
        }
        for (k, &i) in artificial_rows.iter().enumerate() {
            a[i * cols + first_artificial + k] = 1.0;
        }

        let mut upper = vec![f64::INFINITY; cols];
        for (j, v) in lp.variables.iter().enumerate() {
            upper[j] = v.upper - v.lower;
        }
        let mut state = vec![ColumnState::AtLower; cols];
        for &b in &basis {
            state[b] = ColumnState::Basic;
        }

        let size = m + n;
        Tableau {
            rows: m,
            cols,
            t: a.clone(),
            a,
            beta: rhs.clone(),
            rhs,
            upper,
            state,
            basis,
            d: vec![0.0; cols],
            barred: vec![false; cols],
            structural: n,
            first_artificial,
            pivots: 0,
            max_pivots: 10 * size * size + 100,
        }
    }

    fn has_artificials(&self) -> bool {
        self.cols > self.first_artificial
    }

    /// Sets reduced costs for the maximization objective `c`.
    fn set_objective(&mut self, c: &[f64]) {
        self.d.copy_from_slice(c);
        for i in 0..self.rows {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.barred[j] {
                continue;
            }
            let dir = match self.state[j] {
                ColumnState::AtLower if self.d[j] > OPTIMALITY_TOL => 1.0,
                ColumnState::AtUpper if self.d[j] < -OPTIMALITY_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(k, _)| self.d[j].abs() > self.d[k].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn run_phase(&mut self) -> Result<PhaseEnd> {
        let mut bland = false;
        let mut degenerate = 0;
        loop {
            let Some((j, dir)) = self.choose_entering(bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            if self.pivots >= self.max_pivots {
                return Err(Error::NumericalFailure(self.max_pivots));
            }
            self.pivots += 1;

            // Ratio test: basic i moves by -dir * t[i][j] per unit step.
            let mut leave: Option<(usize, f64, bool)> = None;
            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * alpha;
                let b = self.basis[i];
                let (theta, to_upper) = if delta < 0.0 {
                    (self.beta[i].max(0.0) / -delta, false)
                } else if self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / delta, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((k, best, _)) => {
                        if theta < best - 1e-12 {
                            true
                        } else if theta <= best + 1e-12 {
                            if bland {
                                b < self.basis[k]
                            } else {
                                alpha.abs() > self.t[k * self.cols + j].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, theta, to_upper));
                }
            }

            let flip = self.upper[j];
            let step = match leave {
                Some((_, theta, _)) if theta < flip => theta,
                _ if flip.is_finite() => flip,
                _ => return Ok(PhaseEnd::Unbounded),
            };

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }

            for i in 0..self.rows {
                let alpha = self.t[i * self.cols + j];
                if alpha != 0.0 {
                    self.beta[i] -= dir * alpha * step;
                }
            }

            match leave {
                Some((r, theta, to_upper)) if theta < flip => {
                    let entering_value = if dir > 0.0 {
                        step
                    } else {
                        self.upper[j] - step
                    };
                    let old = self.basis[r];
                    self.state[old] = if to_upper {
                        ColumnState::AtUpper
                    } else {
                        ColumnState::AtLower
                    };
                    self.pivot(r, j);
                    self.beta[r] = entering_value;
                }
                _ => {
                    self.state[j] = if dir > 0.0 {
                        ColumnState::AtUpper
                    } else {
                        ColumnState::AtLower
                    };
                }
            }
        }
    }

    /// Makes column `j` basic in row `r`.
    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        for x in &mut self.t[r * cols..(r + 1) * cols] {
            *x /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before
            .chunks_exact_mut(cols)
            .chain(after.chunks_exact_mut(cols))
        {
            let f = row[j];
            if f != 0.0 {
                for (x, &pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * pr;
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (x, &pr) in self.d.iter_mut().zip(pivot_row.iter()) {
                *x -= f * pr;
            }
            self.d[j] = 0.0;
        }
        self.basis[r] = j;
        self.state[j] = ColumnState::Basic;
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.state[j] {
            ColumnState::AtLower => 0.0,
            ColumnState::AtUpper => self.upper[j],
            ColumnState::Basic => {
                let i = self
                    .basis
                    .iter()
                    .position(|&b| b == j)
                    .expect("basic column");
                self.beta[i]
            }
        }
    }

    fn artificial_sum(&self) -> f64 {
        (self.first_artificial..self.cols)
            .map(|j| self.value_of(j))
            .sum()
    }

    /// Pivots basic artificials (at zero) out of the basis where possible and
    /// bars every artificial column from re-entering.
    fn drop_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let row = &self.t[r * self.cols..r * self.cols + self.first_artificial];
            let candidate = row
                .iter()
                .enumerate()
                .filter(|&(j, x)| self.state[j] != ColumnState::Basic && x.abs() > PIVOT_TOL)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(j, _)| j);
            if let Some(j) = candidate {
                let value = self.value_of(j);
                let old = self.basis[r];
                self.state[old] = ColumnState::AtLower;
                self.pivot(r, j);
                self.beta[r] = value;
            }
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
        for j in self.first_artificial..self.cols {
            self.barred[j] = true;
            self.upper[j] = 0.0;
        }
    }

    /// Recomputes basic values by solving `B x_B = b - N x_N` on the
    /// original rows. Leaves `beta` untouched if the basis looks singular.
    fn refine(&mut self) {
        let m = self.rows;
        if m == 0 {
            return;
        }
        let mut rhs = self.rhs.clone();
        for j in 0..self.cols {
            if self.state[j] == ColumnState::AtUpper {
                let u = self.upper[j];
                for (i, b) in rhs.iter_mut().enumerate() {
                    *b -= self.a[i * self.cols + j] * u;
                }
            }
        }
        let mut mat = vec![0.0; m * m];
        for i in 0..m {
            for (k, &bk) in self.basis.iter().enumerate() {
                mat[i * m + k] = self.a[i * self.cols + bk];
            }
        }
        if let Some(x) = lu_solve(&mut mat, &mut rhs, m) {
            if x.iter().all(|v| v.is_finite()) {
                self.beta = x;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn lu_solve(mat: &mut [f64], rhs: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for k in 0..m {
        let (p, pv) = (k..m)
            .map(|i| (i, mat[i * m + k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if pv < 1e-12 {
            return None;
        }
        if p != k {
            for c in 0..m {
                mat.swap(k * m + c, p * m + c);
            }
            rhs.swap(k, p);
        }
        let diag = mat[k * m + k];
        for i in k + 1..m {
            let f = mat[i * m + k] / diag;
            if f != 0.0 {
                for c in k..m {
                    mat[i * m + c] -= f * mat[k * m + c];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let mut s = rhs[k];
        for c in k + 1..m {
            s -= mat[k * m + c] * x[c];
        }
        x[k] = s / mat[k * m + k];
    }
    Some(x)
}

/// Magnitude of the shifted right-hand sides, which bounds the initial
/// infeasibility phase one has to remove.
fn scale(tab: &Tableau) -> f64 {
    tab.rhs.iter().fold(1.0, |s: f64, b| s.max(b.abs()))
}

/// Runs phase one. Returns the tableau positioned at a feasible basis, or
/// `None` if the program is infeasible.
fn phase_one(lp: &LinearProgram) -> Result<Option<Tableau>> {
    if lp
        .variables
        .iter()
        .any(|v| v.upper < v.lower - FEASIBILITY_TOL * v.lower.abs().max(1.0))
    {
        return Ok(None);
    }
    let mut tab = Tableau::new(lp);
    if false {
        return Ok(None);
    }
    if tab.has_artificials() {
        let mut c = vec![0.0; tab.cols];
        c[tab.first_artificial..].iter_mut().for_each(|x| *x = -1.0);
        tab.set_objective(&c);
        // Phase one is bounded below by zero.
        tab.run_phase()?;
        if tab.artificial_sum() > FEASIBILITY_TOL * scale(&tab) {
            return Ok(None);
        }
        tab.drop_artificials();
    }
    Ok(Some(tab))
}

pub fn is_feasible(lp: &LinearProgram) -> Result<bool> {
    Ok(phase_one(lp)?.is_some())
}

/// Some feasible point, taken from the basis phase one ends on.
pub fn feasible_point(lp: &LinearProgram) -> Result<Option<Vec<f64>>> {
    let Some(tab) = phase_one(lp)? else {
        return Ok(None);
    };
    Ok(Some(point(lp, &tab)))
}

fn point(lp: &LinearProgram, tab: &Tableau) -> Vec<f64> {
    lp.variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v.lower + tab.value_of(j)).clamp(v.lower, v.upper))
        .collect()
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let Some(mut tab) = phase_one(lp)? else {
        return Ok(LpOutcome::infeasible());
    };
    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut c = vec![0.0; tab.cols];
    for &(j, w) in &lp.objective {
        c[j] += sign * w;
    }
    tab.set_objective(&c);
    if let PhaseEnd::Unbounded = tab.run_phase()? {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            value: None,
            values: Vec::new(),
        });
    }
    tab.refine();

    let values = point(lp, &tab);
    debug_assert_eq!(values.len(), tab.structural);
    let value = lp.objective.iter().map(|&(j, w)| w * values[j]).sum();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        value: Some(value),
        values,
    })
}
