//! Independent checks of completions and a brute-force oracle.
//!
//! Nothing here reuses the search engine: reachability is recomputed by
//! plain round iteration and every flux program is assembled from scratch
//! for the completed network.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion::Semantics;
use crate::error::{Error, Result};
use crate::linear::{
    solve_lp, BalanceMode, FluxAssignment, LinearProgram, LpStatus, Relation, RowLabel, Sense,
    DEFAULT_EPSILON, FEASIBILITY_TOL,
};
use crate::model::{Completion, Instance, MetabolicNetwork, MetaboliteId, ReactionId, REV_SUFFIX};

/// Subsets the brute-force oracle is willing to test.
pub const MAX_SUBSETS: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub topological: bool,
    /// Strict steady state.
    pub stoichiometric: bool,
    pub relaxed: bool,
    pub hybrid: bool,
    /// Flux distribution activating the targets: a strict one when it
    /// exists, otherwise a relaxed one.
    pub witness: Option<FluxAssignment>,
}

impl VerificationReport {
    pub fn satisfies(&self, semantics: Semantics) -> bool {
        match semantics {
            Semantics::Topological => self.topological,
            Semantics::Strict => self.stoichiometric,
            Semantics::Relaxed => self.relaxed,
            Semantics::Hybrid => self.hybrid,
        }
    }
}

pub fn verify_completion(
    instance: &Instance,
    completion: &Completion,
) -> Result<VerificationReport> {
    verify_completion_with(instance, completion, DEFAULT_EPSILON)
}

/// Evaluates all four semantics on the draft extended by `completion`.
pub fn verify_completion_with(
    instance: &Instance,
    completion: &Completion,
    epsilon: f64,
) -> Result<VerificationReport> {
    let net = instance.extend(completion)?.expand_reversible()?;
    let targets = instance.resolve_targets(&net)?;
    let topological = reaches(&net, instance.seeds(), &targets);
    let strict = flux_witness(&net, &targets, BalanceMode::Strict, epsilon)?;
    let stoichiometric = strict.is_some();
    let witness = match strict {
        Some(w) => Some(w),
        None => flux_witness(&net, &targets, BalanceMode::Relaxed, epsilon)?,
    };
    // A strict witness is also a relaxed one.
    let relaxed = witness.is_some();
    Ok(VerificationReport {
        topological,
        stoichiometric,
        relaxed,
        hybrid: topological && stoichiometric,
        witness: witness.map(|w| fold_reversible(&net, w)),
    })
}

/// Does the completed network activate the targets under `semantics`?
pub fn activates(
    instance: &Instance,
    completion: &Completion,
    semantics: Semantics,
    epsilon: f64,
) -> Result<bool> {
    let net = instance.extend(completion)?.expand_reversible()?;
    let targets = instance.resolve_targets(&net)?;
    if matches!(semantics, Semantics::Topological | Semantics::Hybrid)
        && !reaches(&net, instance.seeds(), &targets)
    {
        return Ok(false);
    }
    Ok(match semantics {
        Semantics::Topological => true,
        Semantics::Strict | Semantics::Hybrid => {
            flux_witness(&net, &targets, BalanceMode::Strict, epsilon)?.is_some()
        }
        Semantics::Relaxed => {
            flux_witness(&net, &targets, BalanceMode::Relaxed, epsilon)?.is_some()
        }
    })
}

/// Round iteration: fire every reaction whose reactants are all present
/// until nothing changes, then look at the reactants of each target.
fn reaches(
    net: &MetabolicNetwork,
    seeds: &BTreeSet<MetaboliteId>,
    targets: &BTreeSet<ReactionId>,
) -> bool {
    let mut present = seeds.clone();
    loop {
        let before = present.len();
        for r in net.reactions() {
            if r.reactants.keys().all(|m| present.contains(m)) {
                present.extend(r.products.keys().cloned());
            }
        }
        if present.len() == before {
            break;
        }
    }
    targets
        .iter()
        .filter_map(|t| net.reaction(t))
        .all(|r| r.reactants.keys().all(|m| present.contains(m)))
}

/// A flux distribution with every target at or above `epsilon`, checked
/// against the rows it was built from.
fn flux_witness(
    net: &MetabolicNetwork,
    targets: &BTreeSet<ReactionId>,
    mode: BalanceMode,
    epsilon: f64,
) -> Result<Option<FluxAssignment>> {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let ids: Vec<&ReactionId> = net.reaction_ids().collect();
    for r in net.reactions() {
        let mut lower = r.lower_bound;
        if targets.contains(&r.id) {
            if epsilon > r.upper_bound {
                return Ok(None);
            }
            lower = lower.max(epsilon);
            lp.objective.push((lp.variables.len(), 1.0));
        }
        lp.add_variable(r.id.as_str(), lower, r.upper_bound);
    }
    let relation = match mode {
        BalanceMode::Strict => Relation::Eq,
        BalanceMode::Relaxed => Relation::Ge,
    };
    for m in net.metabolites() {
        let mut row = Vec::new();
        for (j, r) in net.reactions().enumerate() {
            let c = r.products.get(m).copied().unwrap_or(0.0)
                - r.reactants.get(m).copied().unwrap_or(0.0);
            if c != 0.0 {
                row.push((j, c));
            }
        }
        lp.add_row(RowLabel::Balance(m.clone()), row, relation, 0.0);
    }
    let mut out = solve_lp(&lp)?;
    if out.status == LpStatus::Unbounded {
        lp.objective.clear();
        out = solve_lp(&lp)?;
    }
    if !out.is_optimal() {
        return Ok(None);
    }
    let violation = lp
        .max_residual(&out.values)
        .max(lp.max_bound_violation(&out.values));
    if violation > FEASIBILITY_TOL {
        return Err(Error::Inaccurate(violation));
    }
    Ok(Some(FluxAssignment(
        ids.into_iter().cloned().zip(out.values).collect(),
    )))
}

fn fold_reversible(net: &MetabolicNetwork, flux: FluxAssignment) -> FluxAssignment {
    flux.map_ids(|id| {
        let sign = if id.as_str().ends_with(REV_SUFFIX) {
            -1.0
        } else {
            1.0
        };
        (net.original_id(id).clone(), sign)
    })
}

/// All activating subsets of the reference-only reactions of the least
/// activating size, trying sizes `0..=max_size` in turn. Empty when no
/// subset of at most `max_size` reactions activates the targets.
pub fn brute_force_minimal(
    instance: &Instance,
    semantics: Semantics,
    max_size: usize,
) -> Result<Vec<Completion>> {
    let pool: Vec<ReactionId> = instance.reference_only().map(|r| r.id.clone()).collect();
    let n = pool.len();
    let max_size = max_size.min(n);
    let count: u128 = (0..=max_size).map(|k| binomial(n as u128, k as u128)).sum();
    if count > MAX_SUBSETS {
        return Err(Error::PoolTooLarge {
            count,
            limit: MAX_SUBSETS,
        });
    }
    for k in 0..=max_size {
        let subsets: Vec<Completion> = pool
            .iter()
            .cloned()
            .combinations(k)
            .map(Completion::new)
            .collect();
        let verdicts: Vec<bool> = subsets
            .par_iter()
            .map(|c| activates(instance, c, semantics, DEFAULT_EPSILON))
            .collect::<Result<_>>()?;
        let found: Vec<Completion> = subsets
            .into_iter()
            .zip(verdicts)
            .filter(|(_, ok)| *ok)
            .map(|(c, _)| c)
            .collect();
        if !found.is_empty() {
            return Ok(found);
        }
    }
    Ok(Vec::new())
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
