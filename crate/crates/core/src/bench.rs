//! Degradation experiments on synthetic networks.
//!
//! A corpus instance is built in three steps: generate a layered network
//! with some back edges ([`synthetic_network`]), pick targets that are
//! jointly hybrid-active in it ([`pick_targets`]), then remove random
//! reactions until every target has lost its steady-state flux
//! ([`degrade`]). The removed reactions form the reference network.
//!
//! All randomness comes from ChaCha8 seeded with the configured 64-bit
//! seed, so instances are identical on every platform.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion::{union_of_minimal, SearchOptions, Semantics, Status};
use crate::error::{Error, Result};
use crate::linear::{stoichiometrically_activated, BalanceMode, DEFAULT_EPSILON};
use crate::model::{Instance, MetabolicNetwork, MetaboliteId, Reaction, ReactionId};
use crate::topology;
use crate::verify::verify_completion_with;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationConfig {
    /// Share of all reactions to remove at least, in `(0, 1)`.
    pub fraction: f64,
    pub rng_seed: u64,
    pub targets_per_instance: usize,
    pub instances: usize,
}

impl DegradationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.targets_per_instance == 0 || self.instances == 0 {
            return Err(Error::InvalidConfig(
                "targets and instance counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Uptake and export reactions are never removed.
fn is_exchange(r: &Reaction) -> bool {
    r.reactants.is_empty() || r.products.is_empty()
}

fn strictly_active(net: &MetabolicNetwork, target: &ReactionId) -> Result<bool> {
    let single = BTreeSet::from([target.clone()]);
    Ok(stoichiometrically_activated(net, &single, BalanceMode::Strict, DEFAULT_EPSILON)?.active)
}

fn jointly_hybrid(
    net: &MetabolicNetwork,
    seeds: &BTreeSet<MetaboliteId>,
    targets: &BTreeSet<ReactionId>,
) -> Result<bool> {
    let topo = topology::topologically_activated(net, seeds, targets)?;
    if topo.values().any(|a| !a) {
        return Ok(false);
    }
    Ok(stoichiometrically_activated(net, targets, BalanceMode::Strict, DEFAULT_EPSILON)?.active)
}

/// Removes random non-target, non-exchange reactions until at least
/// `⌈fraction·|R|⌉` are gone and no target can carry steady-state flux on
/// its own. Seeds are the boundary compounds of `net`.
pub fn degrade(
    net: &MetabolicNetwork,
    targets: &BTreeSet<ReactionId>,
    cfg: &DegradationConfig,
) -> Result<Instance> {
    cfg.validate()?;
    if let Some(t) = targets.iter().find(|t| !net.contains_reaction(t)) {
        return Err(Error::UnknownReaction(t.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut removable: Vec<&Reaction> = net
        .reactions()
        .filter(|r| !targets.contains(&r.id) && !is_exchange(r))
        .collect();
    removable.shuffle(&mut rng);
    let quota = (cfg.fraction * net.reactions().len() as f64).ceil() as usize;

    let mut removed = BTreeSet::new();
    let mut draft = net.clone();
    let mut order = removable.into_iter();
    loop {
        let done = removed.len() >= quota && {
            let mut any_active = false;
            for t in targets {
                if strictly_active(&draft, t)? {
                    any_active = true;
                    break;
                }
            }
            !any_active
        };
        if done {
            break;
        }
        let Some(r) = order.next() else {
            return Err(Error::CannotDeactivate);
        };
        removed.insert(r.id.clone());
        draft = rebuild(net, |id| !removed.contains(id));
    }
    let reference = rebuild(net, |id| removed.contains(id));
    let mut seeds = net.boundary_compounds();
    seeds.retain(|m| draft.contains_metabolite(m));
    Instance::new(draft, reference, seeds, targets.clone())
}

/// The reactions of `net` accepted by `keep`, with the metabolites they touch.
fn rebuild(net: &MetabolicNetwork, keep: impl Fn(&ReactionId) -> bool) -> MetabolicNetwork {
    let mut out = MetabolicNetwork::new();
    for r in net.reactions().filter(|r| keep(&r.id)) {
        out.add_reaction(r.clone())
            .expect("ids are unique in the source network");
    }
    out
}

fn id<T: std::str::FromStr>(s: String) -> T
where
    T::Err: std::fmt::Debug,
{
    s.parse().expect("generated ids are valid")
}

/// A layered network of about `size` reactions. Uptakes feed the seed
/// compounds of layer 0. Every compound of layers 1 to 5 has one producer
/// fed from the layer before it, a further sixth or so of the reactions
/// add alternative routes (one in ten running back a layer), and about
/// half of the non-seed compounds can be exported. Compounds that are
/// neither exported nor consumed further down are dead ends.
pub fn synthetic_network(
    size: usize,
    rng: &mut impl Rng,
) -> (MetabolicNetwork, BTreeSet<MetaboliteId>) {
    let layers = 5;
    let seeds_n = 4;
    let width = ((size as f64 * 0.85 - seeds_n as f64) / 7.5)
        .floor()
        .max(2.0) as usize;
    let met = |layer: usize, i: usize| -> MetaboliteId {
        if layer == 0 {
            id(format!("S{i}"))
        } else {
            id(format!("M{layer}_{i}"))
        }
    };
    let layer_width = |l: usize| if l == 0 { seeds_n } else { width };
    let coefficient = |rng: &mut dyn rand::RngCore| {
        if rng.random_bool(0.8) {
            1.0
        } else {
            2.0
        }
    };
    let reaction =
        |rng: &mut dyn rand::RngCore, k: usize, src: usize, dst: usize, fixed: Option<usize>| {
            let mut r = Reaction::new(id(format!("R{k:03}"))).bounds(0.0, 1000.0);
            let n_in = if rng.random_bool(0.4) { 2 } else { 1 };
            for _ in 0..n_in {
                let m = met(src, rng.random_range(0..layer_width(src)));
                let c = coefficient(rng);
                r = r.reactant(m, c);
            }
            let mut outs = vec![fixed.unwrap_or_else(|| rng.random_range(0..layer_width(dst)))];
            if rng.random_bool(0.3) {
                outs.push(rng.random_range(0..layer_width(dst)));
            }
            for i in outs {
                let m = met(dst, i);
                if !r.reactants.contains_key(&m) && !r.products.contains_key(&m) {
                    let c = coefficient(rng);
                    r = r.product(m, c);
                }
            }
            r
        };

    let mut net = MetabolicNetwork::new();
    let mut seeds = BTreeSet::new();
    for i in 0..seeds_n {
        let s = met(0, i);
        seeds.insert(s.clone());
        net.add_reaction(
            Reaction::new(id(format!("U{i}")))
                .product(s, 1.0)
                .bounds(0.0, 1000.0),
        )
        .expect("fresh id");
    }
    let mut k = 0;
    for l in 1..=layers {
        for i in 0..width {
            net.add_reaction(reaction(rng, k, l - 1, l, Some(i)))
                .expect("fresh id");
            k += 1;
        }
    }
    let mut exports = Vec::new();
    for l in 1..=layers {
        for i in 0..width {
            if rng.random_bool(0.5) {
                exports.push(met(l, i));
            }
        }
    }
    let extra = size.saturating_sub(net.reactions().len() + exports.len());
    for _ in 0..extra {
        let from = rng.random_range(0..layers);
        let (src, dst) = if from > 0 && rng.random_bool(0.1) {
            (from + 1, from)
        } else {
            (from, from + 1)
        };
        net.add_reaction(reaction(rng, k, src, dst, None))
            .expect("fresh id");
        k += 1;
    }
    for m in exports {
        net.add_reaction(
            Reaction::new(id(format!("EX_{m}")))
                .reactant(m, 1.0)
                .bounds(0.0, 1000.0),
        )
        .expect("fresh id");
    }
    (net, seeds)
}

/// Up to `count` internal reactions, preferring deep ones, that are
/// jointly hybrid-active from `seeds`.
pub fn pick_targets(
    net: &MetabolicNetwork,
    seeds: &BTreeSet<MetaboliteId>,
    count: usize,
    rng: &mut impl Rng,
) -> Result<BTreeSet<ReactionId>> {
    let depth = |r: &Reaction| {
        r.reactants
            .keys()
            .filter_map(|m| m.as_str().strip_prefix('M'))
            .filter_map(|s| s.split('_').next()?.parse::<usize>().ok())
            .max()
            .unwrap_or(0)
    };
    let mut pool: Vec<&Reaction> = net.reactions().filter(|r| !is_exchange(r)).collect();
    pool.shuffle(rng);
    pool.sort_by_key(|r| std::cmp::Reverse(depth(r)));
    let mut chosen = BTreeSet::new();
    for r in pool {
        if chosen.len() == count {
            break;
        }
        chosen.insert(r.id.clone());
        if !jointly_hybrid(net, seeds, &chosen)? {
            chosen.remove(&r.id);
        }
    }
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub id: String,
    pub instance: Instance,
}

/// `cfg.instances` degraded synthetic networks of about `size` reactions.
/// Networks that admit too few targets or cannot be deactivated are
/// redrawn from the same generator.
pub fn synthetic_corpus(size: usize, cfg: &DegradationConfig) -> Result<Vec<BenchInstance>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut out = Vec::with_capacity(cfg.instances);
    let mut attempts = 0;
    while out.len() < cfg.instances {
        attempts += 1;
        if attempts > 50 * cfg.instances {
            return Err(Error::InvalidConfig(
                "could not generate enough instances with active targets".into(),
            ));
        }
        let (net, seeds) = synthetic_network(size, &mut rng);
        let targets = pick_targets(&net, &seeds, cfg.targets_per_instance, &mut rng)?;
        if targets.len() < cfg.targets_per_instance {
            continue;
        }
        let sub = DegradationConfig {
            rng_seed: rng.random(),
            ..cfg.clone()
        };
        match degrade(&net, &targets, &sub) {
            Ok(instance) => out.push(BenchInstance {
                id: format!(
                    "f{:02}-s{}-{:03}",
                    (cfg.fraction * 100.0).round(),
                    cfg.rng_seed,
                    out.len()
                ),
                instance,
            }),
            Err(Error::CannotDeactivate) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// One instance solved under one semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub semantics: Semantics,
    /// Search status, or `error: ...` when the run failed.
    pub status: String,
    pub optimum_size: Option<usize>,
    pub n_solutions: usize,
    pub union_size: usize,
    /// Solutions the verifier accepts under the row's semantics.
    pub verified: usize,
    /// The union of the solutions passes the hybrid check.
    pub hybrid_verified: bool,
    pub lp_calls: u64,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub solution_sizes: Vec<usize>,
    /// Solutions with a steady-state flux through every target.
    #[serde(skip)]
    pub strict_verified: usize,
}

fn run_one(item: &BenchInstance, semantics: Semantics, opts: &SearchOptions) -> BenchRow {
    let mut row = BenchRow {
        instance_id: item.id.clone(),
        semantics,
        status: String::new(),
        optimum_size: None,
        n_solutions: 0,
        union_size: 0,
        verified: 0,
        hybrid_verified: false,
        lp_calls: 0,
        elapsed_ms: 0.0,
        solution_sizes: Vec::new(),
        strict_verified: 0,
    };
    let result = (|| -> Result<()> {
        let u = union_of_minimal(&item.instance, semantics, opts)?;
        row.status = u.report.status.to_string();
        row.optimum_size = u.report.optimum_size;
        row.n_solutions = u.report.completions.len();
        row.union_size = u.union.len();
        row.hybrid_verified = u.hybrid_verified;
        row.lp_calls = u.report.stats.lp_calls;
        row.elapsed_ms = u.report.stats.elapsed_ms;
        for s in &u.report.completions {
            row.solution_sizes.push(s.completion.len());
            let v = verify_completion_with(&item.instance, &s.completion, opts.epsilon_act)?;
            row.verified += usize::from(v.satisfies(semantics));
            row.strict_verified += usize::from(v.stoichiometric);
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    row
}

/// Solves, enumerates, unions and verifies every instance under every
/// semantics on a pool of `workers` threads. Rows come out in input order.
pub fn run_experiment(
    instances: &[BenchInstance],
    semantics: &[Semantics],
    opts: &SearchOptions,
    workers: usize,
) -> Result<StatsTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let jobs: Vec<(&BenchInstance, Semantics)> = instances
        .iter()
        .flat_map(|i| semantics.iter().map(move |&s| (i, s)))
        .collect();
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(item, sem)| run_one(item, sem, opts))
            .collect()
    });
    Ok(StatsTable { rows })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub rows: Vec<BenchRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub semantics: Semantics,
    pub instances: usize,
    /// Instances with at least one solution.
    pub sols: usize,
    /// Instances solved to optimality.
    pub opts: usize,
    pub solutions_per_instance: (usize, f64, usize),
    pub reactions_per_solution: (usize, f64, usize),
    /// Share of solutions the verifier accepts under the row semantics.
    pub verified_pct: f64,
    /// Share of solutions with a steady-state flux through the targets.
    pub strict_pct: f64,
    /// Share of solved instances whose solution union passes the hybrid check.
    pub union_hybrid_pct: f64,
}

fn min_avg_max(xs: &[usize]) -> (usize, f64, usize) {
    if xs.is_empty() {
        return (0, 0.0, 0);
    }
    let sum: usize = xs.iter().sum();
    (
        *xs.iter().min().expect("non-empty"),
        sum as f64 / xs.len() as f64,
        *xs.iter().max().expect("non-empty"),
    )
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl StatsTable {
    /// One summary per semantics, in order of first appearance.
    pub fn summary(&self) -> Vec<Summary> {
        let mut order: Vec<Semantics> = Vec::new();
        for r in &self.rows {
            if !order.contains(&r.semantics) {
                order.push(r.semantics);
            }
        }
        order
            .into_iter()
            .map(|sem| {
                let rows: Vec<&BenchRow> =
                    self.rows.iter().filter(|r| r.semantics == sem).collect();
                let solved: Vec<&&BenchRow> = rows.iter().filter(|r| r.n_solutions > 0).collect();
                let per_instance: Vec<usize> = solved.iter().map(|r| r.n_solutions).collect();
                let sizes: Vec<usize> = rows
                    .iter()
                    .flat_map(|r| r.solution_sizes.iter().copied())
                    .collect();
                let total: usize = per_instance.iter().sum();
                Summary {
                    semantics: sem,
                    instances: rows.len(),
                    sols: solved.len(),
                    opts: rows
                        .iter()
                        .filter(|r| r.status == Status::Optimal.to_string())
                        .count(),
                    solutions_per_instance: min_avg_max(&per_instance),
                    reactions_per_solution: min_avg_max(&sizes),
                    verified_pct: pct(rows.iter().map(|r| r.verified).sum(), total),
                    strict_pct: pct(rows.iter().map(|r| r.strict_verified).sum(), total),
                    union_hybrid_pct: pct(
                        solved.iter().filter(|r| r.hybrid_verified).count(),
                        solved.len(),
                    ),
                }
            })
            .collect()
    }

    pub fn write_csv(&self, out: impl io::Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "instance_id",
                "semantics",
                "status",
                "optimum_size",
                "n_solutions",
                "union_size",
                "verified",
                "hybrid_verified",
                "lp_calls",
                "elapsed_ms",
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned text rendering of [`StatsTable::summary`].
    pub fn render(&self) -> String {
        let header = [
            "semantics",
            "instances",
            "#sols",
            "#opts",
            "sols/inst",
            "rxns/sol",
            "verified",
            "strict",
            "union hybrid",
        ];
        let fmt3 = |(lo, avg, hi): (usize, f64, usize)| format!("{lo}/{avg:.2}/{hi}");
        let body: Vec<Vec<String>> = self
            .summary()
            .into_iter()
            .map(|s| {
                vec![
                    s.semantics.to_string(),
                    s.instances.to_string(),
                    s.sols.to_string(),
                    s.opts.to_string(),
                    fmt3(s.solutions_per_instance),
                    fmt3(s.reactions_per_solution),
                    format!("{:.2}%", s.verified_pct),
                    format!("{:.2}%", s.strict_pct),
                    format!("{:.2}%", s.union_hybrid_pct),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let mut line = |cells: Vec<String>| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(header.iter().map(|s| s.to_string()).collect());
        for r in body {
            line(r);
        }
        out
    }
}
