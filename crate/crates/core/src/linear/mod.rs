//! Flux linear programs: mass-balance systems, stoichiometric activation and
//! irreducible infeasible subsystems.
//!
//! Each reaction contributes one flux variable bounded by its flux bounds.
//! Each metabolite contributes one balance row, production minus
//! consumption, which must be zero at steady state ([`BalanceMode::Strict`])
//! or only non-negative when accumulation is tolerated
//! ([`BalanceMode::Relaxed`]).

mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MetabolicNetwork, MetaboliteId, ReactionId};

pub use simplex::{FEASIBILITY_TOL, OPTIMALITY_TOL};

/// Default threshold realizing the strict condition `v_t > 0`.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Le => "<=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BalanceMode {
    Strict,
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowLabel {
    /// Mass balance of a metabolite.
    Balance(MetaboliteId),
    /// `v_t >= epsilon` for a target reaction.
    Activation(ReactionId),
    Named(String),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Balance(m) => write!(f, "balance({m})"),
            RowLabel::Activation(r) => write!(f, "active({r})"),
            RowLabel::Named(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: RowLabel,
    /// Sparse `(variable index, coefficient)` pairs.
    pub coefficients: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// How far `x` is from satisfying the row; zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Eq => (lhs - self.rhs).abs(),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Le => (lhs - self.rhs).max(0.0),
        }
    }
}

/// A linear program over bounded variables. Lower bounds must be finite;
/// upper bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<(usize, f64)>,
    pub sense: Sense,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            variables: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        assert!(lower.is_finite(), "lower bounds must be finite");
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    pub fn add_row(
        &mut self,
        label: RowLabel,
        coefficients: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        debug_assert!(coefficients.iter().all(|&(j, _)| j < self.variables.len()));
        self.rows.push(Row {
            label,
            coefficients,
            relation,
            rhs,
        });
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Largest row violation of `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    /// Largest bound violation of `x`.
    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0))
            .fold(0.0, f64::max)
    }

    fn with_rows(&self, keep: &[bool]) -> LinearProgram {
        LinearProgram {
            variables: self.variables.clone(),
            rows: self
                .rows
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(r, _)| r.clone())
                .collect(),
            objective: Vec::new(),
            sense: self.sense,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Objective value, when optimal.
    pub value: Option<f64>,
    /// Variable values in declaration order, when optimal.
    pub values: Vec<f64>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            value: None,
            values: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Values keyed by reaction id; variables whose name is not a valid
    /// reaction id are skipped.
    pub fn assignment(&self, lp: &LinearProgram) -> FluxAssignment {
        FluxAssignment(
            lp.variables
                .iter()
                .zip(&self.values)
                .filter_map(|(v, &x)| ReactionId::new(v.name.clone()).ok().map(|id| (id, x)))
                .collect(),
        )
    }
}

/// Flux value per reaction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FluxAssignment(pub BTreeMap<ReactionId, f64>);

impl FluxAssignment {
    pub fn get(&self, id: &ReactionId) -> f64 {
        self.0.get(id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ReactionId, f64)> {
        self.0.iter().map(|(k, &v)| (k, v))
    }

    /// Entries whose magnitude exceeds `tol`.
    pub fn nonzero(&self, tol: f64) -> impl Iterator<Item = (&ReactionId, f64)> {
        self.iter().filter(move |(_, v)| v.abs() > tol)
    }

    /// Rewrites ids with `rename`, summing entries that collide. Used to
    /// report the fluxes of expanded reversible reactions under their
    /// original id (forward minus reverse).
    pub fn map_ids(&self, mut rename: impl FnMut(&ReactionId) -> (ReactionId, f64)) -> Self {
        let mut out = BTreeMap::new();
        for (id, v) in self.iter() {
            let (new_id, sign) = rename(id);
            *out.entry(new_id).or_insert(0.0) += sign * v;
        }
        FluxAssignment(out)
    }
}

/// Solves `lp` with the two-phase simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    simplex::solve(lp)
}

/// A point satisfying the rows and bounds up to the feasibility tolerance,
/// or `None` when the program is infeasible.
pub fn feasible_point(lp: &LinearProgram) -> Result<Option<Vec<f64>>> {
    simplex::feasible_point(lp)
}

/// Phase-one feasibility test.
pub fn is_feasible(lp: &LinearProgram) -> Result<bool> {
    simplex::is_feasible(lp)
}

/// One flux variable per reaction, one balance row per metabolite, and the
/// objective `maximize sum of target fluxes`.
pub fn build_flux_lp(
    net: &MetabolicNetwork,
    targets: &BTreeSet<ReactionId>,
    mode: BalanceMode,
) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut index = BTreeMap::new();
    for r in net.reactions() {
        debug_assert!(!r.reversible, "expand reversible reactions first");
        let j = lp.add_variable(r.id.as_str(), r.lower_bound, r.upper_bound);
        index.insert(&r.id, j);
    }
    let mut rows: BTreeMap<&MetaboliteId, Vec<(usize, f64)>> =
        net.metabolites().iter().map(|m| (m, Vec::new())).collect();
    for r in net.reactions() {
        let j = index[&r.id];
        for (m, &c) in &r.products {
            rows.get_mut(m).expect("metabolite registered").push((j, c));
        }
        for (m, &c) in &r.reactants {
            rows.get_mut(m)
                .expect("metabolite registered")
                .push((j, -c));
        }
    }
    let relation = match mode {
        BalanceMode::Strict => Relation::Eq,
        BalanceMode::Relaxed => Relation::Ge,
    };
    for (m, coefficients) in rows {
        lp.add_row(RowLabel::Balance(m.clone()), coefficients, relation, 0.0);
    }
    lp.objective = targets
        .iter()
        .filter_map(|t| index.get(t))
        .map(|&j| (j, 1.0))
        .collect();
    lp
}

/// Appends `v_t >= epsilon` for every target. The lower bound of `v_t` is
/// raised as well when the upper bound allows it, so that reported values
/// meet the threshold exactly rather than up to the row tolerance.
pub fn add_activation_rows(lp: &mut LinearProgram, targets: &BTreeSet<ReactionId>, epsilon: f64) {
    for t in targets {
        if let Some(j) = lp.variable_index(t.as_str()) {
            let var = &mut lp.variables[j];
            if epsilon <= var.upper {
                var.lower = var.lower.max(epsilon);
            }
            lp.add_row(
                RowLabel::Activation(t.clone()),
                vec![(j, 1.0)],
                Relation::Ge,
                epsilon,
            );
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub active: bool,
    pub witness: Option<FluxAssignment>,
}

fn targets_reach(values: &[f64], indices: &[usize], epsilon: f64) -> bool {
    indices.iter().all(|&j| values[j] >= epsilon)
}

/// Can all targets carry flux at least `epsilon` in one flux distribution?
///
/// First maximizes the total target flux; if that optimum leaves some target
/// below `epsilon`, the bounds `v_t >= epsilon` are added and the program is
/// solved again.
pub fn stoichiometrically_activated(
    net: &MetabolicNetwork,
    targets: &BTreeSet<ReactionId>,
    mode: BalanceMode,
    epsilon: f64,
) -> Result<Activation> {
    for t in targets {
        if !net.contains_reaction(t) {
            return Err(Error::UnknownReaction(t.clone()));
        }
    }
    let mut lp = build_flux_lp(net, targets, mode);
    let indices: Vec<usize> = lp.objective.iter().map(|&(j, _)| j).collect();
    let first = solve_lp(&lp)?;
    if first.is_optimal() && targets_reach(&first.values, &indices, epsilon) {
        let witness = first.assignment(&lp);
        return Ok(Activation {
            active: true,
            witness: Some(witness),
        });
    }
    if first.status == LpStatus::Infeasible {
        return Ok(Activation {
            active: false,
            witness: None,
        });
    }
    add_activation_rows(&mut lp, targets, epsilon);
    let second = solve_lp(&lp)?;
    match second.status {
        LpStatus::Optimal => Ok(Activation {
            active: true,
            witness: Some(second.assignment(&lp)),
        }),
        LpStatus::Infeasible => Ok(Activation {
            active: false,
            witness: None,
        }),
        LpStatus::Unbounded => {
            lp.objective.clear();
            let third = solve_lp(&lp)?;
            Ok(Activation {
                active: third.is_optimal(),
                witness: third.is_optimal().then(|| third.assignment(&lp)),
            })
        }
    }
}

/// Deletion filter: drop each row in turn and keep it out if the remaining
/// rows are still infeasible. The surviving rows form an irreducible
/// infeasible subsystem. Variable bounds are never dropped.
pub fn extract_iis(lp: &LinearProgram) -> Result<Vec<RowLabel>> {
    let mut keep = vec![true; lp.rows.len()];
    if is_feasible(&lp.with_rows(&keep))? {
        return Err(Error::NotInfeasible);
    }
    for i in 0..keep.len() {
        keep[i] = false;
        if is_feasible(&lp.with_rows(&keep))? {
            keep[i] = true;
        }
    }
    Ok(lp
        .rows
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.label.clone())
        .collect())
}
