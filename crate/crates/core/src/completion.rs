//! Search for cardinality-minimal completions.
//!
//! The decision variables are the reference-only reactions ("units"; a
//! reversible reaction and its two expanded halves form one unit). The
//! search runs in two phases:
//!
//! 1. a depth-first branch-and-bound that finds the optimal size `k`,
//!    branching on the unit closest to firing in the current scope;
//! 2. an include-first walk over the units in id order that lists the
//!    completions of size `k` in lexicographic order.
//!
//! Every node is first checked against a relaxation in which undecided
//! units count as present: reachability for the topological part and flux
//! feasibility for the stoichiometric part. Both relaxations can only
//! over-approximate, so no optimal completion is ever pruned. When the flux
//! relaxation fails late enough in the search, an irreducible infeasible
//! subsystem is extracted and the excluded units touching it are remembered
//! as a no-good.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{
    add_activation_rows, build_flux_lp, extract_iis, feasible_point, is_feasible, solve_lp,
    BalanceMode, FluxAssignment, LinearProgram, LpStatus, DEFAULT_EPSILON,
};
use crate::model::{Completion, Instance, MetabolicNetwork, MetaboliteId, ReactionId};
use crate::topology;
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Topological,
    Strict,
    Relaxed,
    /// Topological and strict at once.
    Hybrid,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [
        Semantics::Topological,
        Semantics::Strict,
        Semantics::Relaxed,
        Semantics::Hybrid,
    ];

    pub fn is_topological(self) -> bool {
        matches!(self, Semantics::Topological | Semantics::Hybrid)
    }

    /// Balance mode of the flux part, if there is one.
    pub fn balance(self) -> Option<BalanceMode> {
        match self {
            Semantics::Topological => None,
            Semantics::Strict | Semantics::Hybrid => Some(BalanceMode::Strict),
            Semantics::Relaxed => Some(BalanceMode::Relaxed),
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Topological => "topological",
            Semantics::Strict => "strict",
            Semantics::Relaxed => "relaxed",
            Semantics::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topo" | "topological" => Ok(Semantics::Topological),
            "strict" => Ok(Semantics::Strict),
            "relaxed" => Ok(Semantics::Relaxed),
            "hybrid" => Ok(Semantics::Hybrid),
            _ => Err(Error::InvalidConfig(format!("unknown semantics `{s}`"))),
        }
    }
}

/// Shared flag that stops a running search at the next node.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Check flux feasibility of the relaxation once this percentage of the
    /// units is decided.
    pub prop_percent: u8,
    /// Extract an infeasible subsystem on flux conflicts once this
    /// percentage of the units is decided.
    pub core_percent: u8,
    /// Maximum number of completions [`enumerate_minimal`] returns.
    pub enumerate_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Minimum flux of an active target.
    pub epsilon_act: f64,
    pub cancel: CancelToken,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            prop_percent: 0,
            core_percent: 100,
            enumerate_limit: None,
            time_limit: None,
            epsilon_act: DEFAULT_EPSILON,
            cancel: CancelToken::default(),
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.prop_percent > 100 || self.core_percent > 100 {
            return Err(Error::InvalidConfig(
                "percentages must lie in 0..=100".into(),
            ));
        }
        if !(self.epsilon_act.is_finite() && self.epsilon_act > 0.0) {
            return Err(Error::InvalidConfig(
                "epsilon must be positive and finite".into(),
            ));
        }
        if self.enumerate_limit == Some(0) {
            return Err(Error::InvalidConfig(
                "enumeration limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The search finished; the reported completions have the minimum size.
    Optimal,
    /// Time ran out after some completion was found; it may not be minimal.
    Suboptimal,
    /// The search finished without finding any completion.
    NoSolution,
    /// Time ran out before any completion was found.
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Suboptimal => "suboptimal",
            Status::NoSolution => "no-solution",
            Status::Timeout => "timeout",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub decisions: u64,
    pub lp_calls: u64,
    pub iis_calls: u64,
    pub conflicts: u64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub completion: Completion,
    /// Flux distribution of the completed network; absent for topological
    /// semantics. Reversible reactions report forward minus reverse flux.
    pub flux: Option<FluxAssignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub semantics: Semantics,
    pub status: Status,
    pub completions: Vec<Solution>,
    pub optimum_size: Option<usize>,
    /// Maximized total flux of the objective reactions in the first
    /// completion (strict and hybrid semantics).
    pub objective_flux: Option<f64>,
    /// The enumeration stopped at the limit or on timeout.
    pub truncated: bool,
    pub stats: SearchStats,
}

/// Reference-only reactions whose reactants are all reachable from the
/// seeds in the union of the draft and the full reference network.
pub fn candidate_reactions(instance: &Instance) -> Result<BTreeSet<ReactionId>> {
    let full = instance.extend(&all_reference_only(instance))?;
    let expanded = full.expand_reversible()?;
    let sc = topology::scope(&expanded, instance.seeds())?;
    Ok(sc
        .firing
        .iter()
        .map(|id| expanded.original_id(id))
        .filter(|id| instance.is_reference_only(id))
        .cloned()
        .collect())
}

fn all_reference_only(instance: &Instance) -> Completion {
    Completion::new(instance.reference_only().map(|r| r.id.clone()))
}

/// The lexicographically least minimum-size completion.
pub fn solve_completion(
    instance: &Instance,
    semantics: Semantics,
    opts: &SearchOptions,
) -> Result<SolveReport> {
    run(instance, semantics, opts, false)
}

/// All minimum-size completions in lexicographic order, up to
/// `opts.enumerate_limit`.
pub fn enumerate_minimal(
    instance: &Instance,
    semantics: Semantics,
    opts: &SearchOptions,
) -> Result<SolveReport> {
    run(instance, semantics, opts, true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub report: SolveReport,
    pub union: Completion,
    /// The union activates the targets under the requested semantics.
    pub verified: bool,
    /// The union activates the targets under hybrid semantics.
    pub hybrid_verified: bool,
}

/// Union of the enumerated minimal completions, verified independently.
pub fn union_of_minimal(
    instance: &Instance,
    semantics: Semantics,
    opts: &SearchOptions,
) -> Result<UnionReport> {
    let report = enumerate_minimal(instance, semantics, opts)?;
    let union = report
        .completions
        .iter()
        .fold(Completion::empty(), |acc, s| acc.union(&s.completion));
    let (verified, hybrid_verified) = if report.completions.is_empty() {
        (false, false)
    } else {
        let v = verify::verify_completion_with(instance, &union, opts.epsilon_act)?;
        (v.satisfies(semantics), v.hybrid)
    };
    Ok(UnionReport {
        report,
        union,
        verified,
        hybrid_verified,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Decision {
    Undecided,
    In,
    Out,
}

/// Stop the walk (time is up or the enumeration is full).
struct Stop;

/// Flux point of a relaxation, indexed like the LP variables.
type Witness = Rc<Vec<f64>>;

/// Flux below this is treated as none when reusing a witness. Reuse only
/// saves work; a wrong call merely skips some pruning.
const WITNESS_ZERO: f64 = 1e-12;

struct Unit {
    id: ReactionId,
    /// Indices into `Engine::reactions`, which equal LP variable indices.
    reactions: Vec<usize>,
}

struct IndexedReaction {
    reactants: Vec<usize>,
    products: Vec<usize>,
    unit: Option<usize>,
}

struct Engine<'a> {
    semantics: Semantics,
    opts: &'a SearchOptions,
    units: Vec<Unit>,
    reactions: Vec<IndexedReaction>,
    metabolite_count: usize,
    seeds: Vec<usize>,
    /// Reactants of the targets.
    goal: Vec<usize>,
    /// Flux program over the union network with activation rows.
    master: Option<LinearProgram>,
    /// Original bounds of every LP variable.
    bounds: Vec<(f64, f64)>,
    nogoods: Vec<Vec<usize>>,
    stats: SearchStats,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<'a> Engine<'a> {
    fn new(
        instance: &Instance,
        expanded: &MetabolicNetwork,
        semantics: Semantics,
        opts: &'a SearchOptions,
        start: Instant,
    ) -> Result<Self> {
        let targets = instance.resolve_targets(expanded)?;
        let met_index: BTreeMap<&MetaboliteId, usize> = expanded
            .metabolites()
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();

        let mut unit_index: BTreeMap<&ReactionId, usize> = BTreeMap::new();
        let mut units = Vec::new();
        for r in instance.reference_only() {
            unit_index.insert(&r.id, units.len());
            units.push(Unit {
                id: r.id.clone(),
                reactions: Vec::new(),
            });
        }

        let mut reactions = Vec::new();
        let mut goal = BTreeSet::new();
        for (j, r) in expanded.reactions().enumerate() {
            let unit = unit_index.get(expanded.original_id(&r.id)).copied();
            if let Some(u) = unit {
                units[u].reactions.push(j);
            }
            if targets.contains(&r.id) {
                goal.extend(r.reactants.keys().map(|m| met_index[m]));
            }
            reactions.push(IndexedReaction {
                reactants: r.reactants.keys().map(|m| met_index[m]).collect(),
                products: r.products.keys().map(|m| met_index[m]).collect(),
                unit,
            });
        }

        let master = semantics.balance().map(|mode| {
            let mut lp = build_flux_lp(expanded, &targets, mode);
            add_activation_rows(&mut lp, &targets, opts.epsilon_act);
            lp.objective.clear();
            lp
        });
        let bounds = master
            .as_ref()
            .map(|lp| lp.variables.iter().map(|v| (v.lower, v.upper)).collect())
            .unwrap_or_default();

        Ok(Self {
            semantics,
            opts,
            units,
            reactions,
            metabolite_count: met_index.len(),
            seeds: instance.seeds().iter().map(|m| met_index[m]).collect(),
            goal: goal.into_iter().collect(),
            master,
            bounds,
            nogoods: Vec::new(),
            stats: SearchStats::default(),
            deadline: opts.time_limit.map(|d| start + d),
            timed_out: false,
        })
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out {
            let late = self.deadline.is_some_and(|d| Instant::now() >= d);
            self.timed_out = late || self.opts.cancel.is_cancelled();
        }
        self.timed_out
    }

    /// Reachable metabolites when the units accepted by `present` are in
    /// the network.
    fn reach(&self, present: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut reached = vec![false; self.metabolite_count];
        let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); self.metabolite_count];
        let mut missing = vec![0usize; self.reactions.len()];
        let mut fire = Vec::new();
        for (j, r) in self.reactions.iter().enumerate() {
            if r.unit.is_some_and(|u| !present(u)) {
                continue;
            }
            missing[j] = r.reactants.len();
            for &m in &r.reactants {
                consumers[m].push(j);
            }
            if r.reactants.is_empty() {
                fire.push(j);
            }
        }
        let mut queue: Vec<usize> = Vec::new();
        for &s in &self.seeds {
            if !reached[s] {
                reached[s] = true;
                queue.push(s);
            }
        }
        loop {
            while let Some(j) = fire.pop() {
                for &p in &self.reactions[j].products {
                    if !reached[p] {
                        reached[p] = true;
                        queue.push(p);
                    }
                }
            }
            let Some(m) = queue.pop() else { break };
            for &j in &consumers[m] {
                missing[j] -= 1;
                if missing[j] == 0 {
                    fire.push(j);
                }
            }
        }
        reached
    }

    fn goal_reached(&self, reached: &[bool]) -> bool {
        self.goal.iter().all(|&m| reached[m])
    }

    /// Copy of the master program with unit variables bounded according to
    /// `bound`.
    fn program(&self, mut bound: impl FnMut(usize, (f64, f64)) -> (f64, f64)) -> LinearProgram {
        let mut lp = self.master.clone().expect("flux semantics");
        for (u, unit) in self.units.iter().enumerate() {
            for &j in &unit.reactions {
                let (lo, hi) = bound(u, self.bounds[j]);
                lp.variables[j].lower = lo;
                lp.variables[j].upper = hi;
            }
        }
        lp
    }

    /// Network of the draft plus the included units, with exact bounds.
    fn exact_program(&self, state: &[Decision]) -> LinearProgram {
        self.program(|u, b| {
            if state[u] == Decision::In {
                b
            } else {
                (0.0, 0.0)
            }
        })
    }

    fn feasible(&mut self, lp: &LinearProgram) -> Result<bool> {
        self.stats.lp_calls += 1;
        is_feasible(lp)
    }

    /// Does the draft plus the included units activate the targets?
    fn satisfies(&mut self, state: &[Decision]) -> Result<bool> {
        if self.semantics.is_topological() {
            let reached = self.reach(|u| state[u] == Decision::In);
            if !self.goal_reached(&reached) {
                return Ok(false);
            }
        }
        if self.master.is_none() {
            return Ok(true);
        }
        let lp = self.exact_program(state);
        self.feasible(&lp)
    }

    /// Can some completion extending the current decisions satisfy the
    /// semantics? Only ever answers `None` when none can; otherwise returns
    /// a flux point of the relaxation when one is known.
    ///
    /// The relaxation depends on the excluded units alone, so a node that
    /// only added an inclusion inherits its parent's verdict, and a point
    /// that puts no flux through the newly excluded units stays valid.
    fn relaxation(
        &mut self,
        state: &[Decision],
        decided: usize,
        inherited: Option<Witness>,
        newly_excluded: Option<usize>,
    ) -> Result<Option<Option<Witness>>> {
        if let Some(u) = newly_excluded {
            let excluded = |v: &usize| state[*v] == Decision::Out;
            if self.nogoods.iter().any(|ng| ng.iter().all(excluded)) {
                self.stats.conflicts += 1;
                return Ok(None);
            }
            if self.semantics.is_topological() {
                let reached = self.reach(|v| state[v] != Decision::Out);
                if !self.goal_reached(&reached) {
                    self.stats.conflicts += 1;
                    return Ok(None);
                }
            }
            let carries_flux = |w: &Witness| {
                self.units
                    .get(u)
                    .is_some_and(|unit| unit.reactions.iter().any(|&j| w[j].abs() > WITNESS_ZERO))
            };
            let inherited = inherited.filter(|w| !carries_flux(w));
            return self.flux_relaxation(state, decided, inherited);
        }
        self.flux_relaxation(state, decided, inherited)
    }

    fn flux_relaxation(
        &mut self,
        state: &[Decision],
        decided: usize,
        inherited: Option<Witness>,
    ) -> Result<Option<Option<Witness>>> {
        if self.master.is_none() || inherited.is_some() {
            return Ok(Some(inherited));
        }
        let total = self.units.len().max(1);
        if decided * 100 < usize::from(self.opts.prop_percent) * total {
            return Ok(Some(None));
        }
        // Included units are relaxed to a zero lower bound as well so that
        // conflicts only depend on the excluded units.
        let lp = self.program(|u, (_, hi)| {
            if state[u] == Decision::Out {
                (0.0, 0.0)
            } else {
                (0.0, hi)
            }
        });
        self.stats.lp_calls += 1;
        if let Some(point) = feasible_point(&lp)? {
            return Ok(Some(Some(Rc::new(point))));
        }
        self.stats.conflicts += 1;
        if decided * 100 >= usize::from(self.opts.core_percent) * total {
            self.learn(&lp, state)?;
        }
        Ok(None)
    }

    fn learn(&mut self, lp: &LinearProgram, state: &[Decision]) -> Result<()> {
        self.stats.iis_calls += 1;
        let core = extract_iis(lp)?;
        let mut vars = BTreeSet::new();
        for row in lp.rows.iter().filter(|r| core.contains(&r.label)) {
            vars.extend(row.coefficients.iter().filter(|c| c.1 != 0.0).map(|c| c.0));
        }
        let nogood: Vec<usize> = (0..self.units.len())
            .filter(|&u| state[u] == Decision::Out)
            .filter(|&u| self.units[u].reactions.iter().any(|j| vars.contains(j)))
            .collect();
        self.nogoods.push(nogood);
        Ok(())
    }

    /// Undecided unit with the fewest reactants missing from the scope of
    /// the draft plus the included units.
    fn branch_unit(&self, state: &[Decision]) -> Option<usize> {
        let reached = self.reach(|u| state[u] == Decision::In);
        (0..self.units.len())
            .filter(|&u| state[u] == Decision::Undecided)
            .min_by_key(|&u| {
                let missing = self.units[u]
                    .reactions
                    .iter()
                    .map(|&j| {
                        self.reactions[j]
                            .reactants
                            .iter()
                            .filter(|&&m| !reached[m])
                            .count()
                    })
                    .min()
                    .unwrap_or(0);
                (missing, u)
            })
    }

    /// Branch-and-bound for the minimum size. `best` holds the smallest
    /// completion found so far.
    #[allow(clippy::too_many_arguments)]
    fn minimize(
        &mut self,
        state: &mut Vec<Decision>,
        included: usize,
        decided: usize,
        last: Option<(usize, Decision)>,
        witness: Option<Witness>,
        best: &mut Option<Vec<usize>>,
    ) -> Result<Result<(), Stop>> {
        if self.out_of_time() {
            return Ok(Err(Stop));
        }
        self.stats.nodes += 1;
        let newly_excluded = match last {
            None => Some(usize::MAX),
            Some((u, Decision::Out)) => Some(u),
            Some(_) => None,
        };
        let Some(witness) = self.relaxation(state, decided, witness, newly_excluded)? else {
            return Ok(Ok(()));
        };
        let changed = !matches!(last, Some((_, Decision::Out)));
        if changed && self.satisfies(state)? {
            *best = Some(
                (0..state.len())
                    .filter(|&u| state[u] == Decision::In)
                    .collect(),
            );
            return Ok(Ok(()));
        }
        if best.as_ref().is_some_and(|b| included + 1 >= b.len()) {
            return Ok(Ok(()));
        }
        let Some(u) = self.branch_unit(state) else {
            return Ok(Ok(()));
        };
        self.stats.decisions += 1;
        state[u] = Decision::In;
        let flow = self.minimize(
            state,
            included + 1,
            decided + 1,
            Some((u, Decision::In)),
            witness.clone(),
            best,
        )?;
        if flow.is_ok() {
            state[u] = Decision::Out;
            let flow = self.minimize(
                state,
                included,
                decided + 1,
                Some((u, Decision::Out)),
                witness,
                best,
            )?;
            state[u] = Decision::Undecided;
            return Ok(flow);
        }
        state[u] = Decision::Undecided;
        Ok(flow)
    }

    /// Completions of exactly `size` units in lexicographic order.
    #[allow(clippy::too_many_arguments)]
    fn list(
        &mut self,
        state: &mut Vec<Decision>,
        next: usize,
        included: usize,
        size: usize,
        limit: usize,
        witness: Option<Witness>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<Result<(), Stop>> {
        if self.out_of_time() {
            return Ok(Err(Stop));
        }
        self.stats.nodes += 1;
        if included + (self.units.len() - next) < size {
            return Ok(Ok(()));
        }
        let newly_excluded = match next.checked_sub(1) {
            None => Some(usize::MAX),
            Some(u) if state[u] == Decision::Out => Some(u),
            Some(_) => None,
        };
        let Some(witness) = self.relaxation(state, next, witness, newly_excluded)? else {
            return Ok(Ok(()));
        };
        if included == size {
            if self.satisfies(state)? {
                out.push(
                    (0..state.len())
                        .filter(|&u| state[u] == Decision::In)
                        .collect(),
                );
                if out.len() >= limit {
                    return Ok(Err(Stop));
                }
            }
            return Ok(Ok(()));
        }
        self.stats.decisions += 1;
        state[next] = Decision::In;
        let mut flow = self.list(
            state,
            next + 1,
            included + 1,
            size,
            limit,
            witness.clone(),
            out,
        )?;
        if flow.is_ok() {
            state[next] = Decision::Out;
            flow = self.list(state, next + 1, included, size, limit, witness, out)?;
        }
        state[next] = Decision::Undecided;
        Ok(flow)
    }

    fn completion(&self, units: &[usize]) -> Completion {
        Completion::new(units.iter().map(|&u| self.units[u].id.clone()))
    }
}

/// Maximizes the objective reactions over the completed network, keeping
/// every target at or above the activation threshold.
fn optimize_flux(
    instance: &Instance,
    completion: &Completion,
    mode: BalanceMode,
    epsilon: f64,
    stats: &mut SearchStats,
) -> Result<(Option<FluxAssignment>, Option<f64>)> {
    let net = instance.extend(completion)?.expand_reversible()?;
    let targets = instance.resolve_targets(&net)?;
    let objective: BTreeSet<ReactionId> = instance
        .objective_reactions()
        .iter()
        .filter_map(|r| net.resolve(r))
        .collect();
    let mut lp = build_flux_lp(&net, &objective, mode);
    add_activation_rows(&mut lp, &targets, epsilon);
    stats.lp_calls += 1;
    let mut out = solve_lp(&lp)?;
    let mut value = out.value;
    if out.status == LpStatus::Unbounded {
        lp.objective.clear();
        stats.lp_calls += 1;
        out = solve_lp(&lp)?;
        value = None;
    }
    if !out.is_optimal() {
        return Ok((None, None));
    }
    let flux = out.assignment(&lp).map_ids(|id| {
        let original = net.original_id(id).clone();
        let sign = if id.as_str().ends_with(crate::model::REV_SUFFIX) {
            -1.0
        } else {
            1.0
        };
        (original, sign)
    });
    Ok((Some(flux), value))
}

fn run(
    instance: &Instance,
    semantics: Semantics,
    opts: &SearchOptions,
    enumerate: bool,
) -> Result<SolveReport> {
    let limit = if enumerate {
        opts.enumerate_limit
    } else {
        Some(1)
    };
    // One past the limit tells whether an enumeration is complete.
    let want = match limit {
        Some(l) if enumerate => l + 1,
        Some(l) => l,
        None => usize::MAX,
    };
    opts.validate()?;
    let start = Instant::now();
    let expanded = instance
        .extend(&all_reference_only(instance))?
        .expand_reversible()?;
    let mut engine = Engine::new(instance, &expanded, semantics, opts, start)?;
    let n = engine.units.len();

    let mut state = vec![Decision::Undecided; n];
    let mut best = None;
    let finished = engine
        .minimize(&mut state, 0, 0, None, None, &mut best)?
        .is_ok();

    let mut truncated = false;
    let (status, chosen) = match (finished, best) {
        (true, None) => (Status::NoSolution, Vec::new()),
        (false, None) => (Status::Timeout, Vec::new()),
        (false, Some(b)) => (Status::Suboptimal, vec![b]),
        (true, Some(b)) => {
            let size = b.len();
            let mut listed = Vec::new();
            let mut state = vec![Decision::Undecided; n];
            // Stopping early at `want` is the expected way out.
            let _ = engine.list(&mut state, 0, 0, size, want, None, &mut listed)?;
            truncated = enumerate && (engine.timed_out || listed.len() == want);
            if let Some(l) = limit {
                listed.truncate(l);
            }
            if listed.is_empty() {
                listed.push(b);
            }
            (Status::Optimal, listed)
        }
    };

    let mut stats = std::mem::take(&mut engine.stats);
    let mut completions = Vec::new();
    let mut objective_flux = None;
    for (i, units) in chosen.iter().enumerate() {
        let completion = engine.completion(units);
        let flux = match semantics.balance() {
            Some(mode) => {
                let (flux, value) =
                    optimize_flux(instance, &completion, mode, opts.epsilon_act, &mut stats)?;
                if i == 0 && semantics != Semantics::Relaxed {
                    objective_flux = value;
                }
                flux
            }
            None => None,
        };
        completions.push(Solution { completion, flux });
    }
    stats.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveReport {
        semantics,
        status,
        optimum_size: (status == Status::Optimal).then(|| chosen[0].len()),
        completions,
        objective_flux,
        truncated,
        stats,
    })
}
