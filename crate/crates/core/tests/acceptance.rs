//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use fluxfill::bench::{run_experiment, synthetic_corpus, DegradationConfig};
use fluxfill::completion::{
    enumerate_minimal, solve_completion, union_of_minimal, SearchOptions, Semantics, SolveReport,
    Status,
};
use fluxfill::linear::{
    build_flux_lp, stoichiometrically_activated, BalanceMode, FluxAssignment, Relation, RowLabel,
    DEFAULT_EPSILON, FEASIBILITY_TOL,
};
use fluxfill::topology::topologically_activated;
use fluxfill::verify::{brute_force_minimal, verify_completion};
use fluxfill::{Completion, Instance, MetabolicNetwork, MetaboliteId, ReactionId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{load, random_instance, random_pair, InstanceShape};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sets(report: &SolveReport) -> Vec<Completion> {
    report
        .completions
        .iter()
        .map(|s| s.completion.clone())
        .collect()
}

fn completions(lists: &[&[&str]]) -> Vec<Completion> {
    lists
        .iter()
        .map(|l| Completion::new(l.iter().map(|s| s.parse::<ReactionId>().unwrap())))
        .collect()
}

fn golden() -> [(Semantics, usize, Vec<Completion>); 4] {
    [
        (
            Semantics::Topological,
            2,
            completions(&[&["r6", "r7"], &["r6", "r8"]]),
        ),
        (Semantics::Strict, 2, completions(&[&["r6", "r9"]])),
        (Semantics::Relaxed, 1, completions(&[&["r6"]])),
        (
            Semantics::Hybrid,
            3,
            completions(&[&["r6", "r7", "r9"], &["r6", "r8", "r9"]]),
        ),
    ]
}

fn toy_golden_suite() -> Outcome {
    let start = Instant::now();
    let toy = load("toy.lp");
    for (sem, size, want) in golden() {
        let rep =
            enumerate_minimal(&toy, sem, &SearchOptions::default()).map_err(|e| e.to_string())?;
        check(rep.status == Status::Optimal, || {
            format!("{sem}: status {}", rep.status)
        })?;
        check(rep.optimum_size == Some(size), || {
            format!("{sem}: size {:?}, expected {size}", rep.optimum_size)
        })?;
        let got: BTreeSet<_> = sets(&rep).into_iter().collect();
        let want: BTreeSet<_> = want.into_iter().collect();
        check(got == want, || format!("{sem}: got {got:?}"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("4 semantics exact in {elapsed:.2?}"))
}

fn balance_row() -> Outcome {
    let toy = load("toy.lp");
    let lp = build_flux_lp(toy.draft(), toy.targets(), BalanceMode::Strict);
    let c: MetaboliteId = "C".parse().unwrap();
    let row = lp
        .rows
        .iter()
        .find(|r| r.label == RowLabel::Balance(c.clone()))
        .ok_or("no row for C")?;
    let coefficients: BTreeMap<&str, f64> = row
        .coefficients
        .iter()
        .map(|&(j, v)| (lp.variables[j].name.as_str(), v))
        .collect();
    let want = BTreeMap::from([("r2", -1.0), ("r4", 2.0), ("r5", -1.0)]);
    check(
        coefficients == want && row.relation == Relation::Eq && row.rhs == 0.0,
        || format!("row is {coefficients:?} {} {}", row.relation, row.rhs),
    )?;
    Ok("2 v_r4 - v_r2 - v_r5 = 0".into())
}

/// Largest balance violation of `flux` on the network extended by the
/// completion, with reversible reactions carrying their net flux.
fn witness_residual(net: &MetabolicNetwork, flux: &FluxAssignment, mode: BalanceMode) -> f64 {
    let mut worst: f64 = 0.0;
    for m in net.metabolites() {
        let mut s = 0.0;
        for r in net.reactions() {
            let v = flux.get(&r.id);
            s += v
                * (r.products.get(m).copied().unwrap_or(0.0)
                    - r.reactants.get(m).copied().unwrap_or(0.0));
        }
        let violation = match mode {
            BalanceMode::Strict => s.abs(),
            BalanceMode::Relaxed => (-s).max(0.0),
        };
        worst = worst.max(violation);
    }
    for r in net.reactions() {
        let v = flux.get(&r.id);
        let (lo, hi) = if r.reversible {
            (-r.upper_bound, r.upper_bound)
        } else {
            (r.lower_bound, r.upper_bound)
        };
        worst = worst.max(lo - v).max(v - hi);
    }
    worst
}

fn check_witnesses(instance: &Instance, report: &SolveReport) -> Result<usize, String> {
    let Some(mode) = report.semantics.balance() else {
        return Ok(0);
    };
    let mut n = 0;
    for s in &report.completions {
        let net = instance.extend(&s.completion).map_err(|e| e.to_string())?;
        let flux = s.flux.as_ref().ok_or("flux semantics without witness")?;
        let vrep = verify_completion(instance, &s.completion).map_err(|e| e.to_string())?;
        let mut witnesses = vec![(flux.clone(), mode)];
        if let Some(w) = vrep.witness {
            let m = if vrep.stoichiometric {
                BalanceMode::Strict
            } else {
                BalanceMode::Relaxed
            };
            witnesses.push((w, m));
        }
        for (w, m) in witnesses {
            let res = witness_residual(&net, &w, m);
            check(res <= FEASIBILITY_TOL, || {
                format!("residual {res:e} for {}", s.completion)
            })?;
            for t in instance.targets() {
                check(w.get(t) >= DEFAULT_EPSILON, || {
                    format!("target {t} at {} for {}", w.get(t), s.completion)
                })?;
            }
            n += 1;
        }
    }
    Ok(n)
}

fn witness_validity() -> Outcome {
    let mut checked = 0;
    let toy = load("toy.lp");
    for sem in Semantics::ALL {
        let rep =
            enumerate_minimal(&toy, sem, &SearchOptions::default()).map_err(|e| e.to_string())?;
        checked += check_witnesses(&toy, &rep)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = InstanceShape {
        max_reference: 8,
        max_metabolites: 10,
        exotic: false,
    };
    for _ in 0..500 {
        let inst = random_instance(&mut rng, &shape);
        for sem in [Semantics::Strict, Semantics::Relaxed, Semantics::Hybrid] {
            let rep = solve_completion(&inst, sem, &SearchOptions::default())
                .map_err(|e| e.to_string())?;
            checked += check_witnesses(&inst, &rep)?;
        }
    }
    Ok(format!("{checked} witnesses within 1e-9, targets >= 1e-6"))
}

fn active(
    net: &MetabolicNetwork,
    seeds: &BTreeSet<MetaboliteId>,
    targets: &BTreeSet<ReactionId>,
    sem: Semantics,
) -> bool {
    let topo = || {
        topologically_activated(net, seeds, targets)
            .unwrap()
            .values()
            .all(|&a| a)
    };
    let flux = |mode| {
        stoichiometrically_activated(net, targets, mode, DEFAULT_EPSILON)
            .unwrap()
            .active
    };
    match sem {
        Semantics::Topological => topo(),
        Semantics::Strict => flux(BalanceMode::Strict),
        Semantics::Relaxed => flux(BalanceMode::Relaxed),
        Semantics::Hybrid => topo() && flux(BalanceMode::Strict),
    }
}

fn union_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seeds: BTreeSet<MetaboliteId> = ["M0".parse().unwrap(), "M1".parse().unwrap()].into();
    let mut premises = 0;
    for pair in 0..1000 {
        let (g1, g2) = random_pair(&mut rng, 15);
        let union = g1.union(&g2).map_err(|e| e.to_string())?;
        let internal: Vec<&ReactionId> = g1
            .reaction_ids()
            .filter(|r| r.as_str().starts_with('p'))
            .collect();
        let Some(&t) = internal.first() else { continue };
        let targets = BTreeSet::from([t.clone()]);
        for sem in [Semantics::Topological, Semantics::Strict, Semantics::Hybrid] {
            if active(&g1, &seeds, &targets, sem) {
                premises += 1;
                check(active(&union, &seeds, &targets, sem), || {
                    format!("pair {pair}: {sem} activation lost in the union")
                })?;
            }
        }
    }
    check(premises > 0, || "no pair had an active target".into())?;
    Ok(format!(
        "1000 pairs, {premises} active premises, 0 violations"
    ))
}

fn union_counterexamples() -> Outcome {
    let opts = SearchOptions::default();
    let balanced = load("union_balanced.lp");
    let u =
        union_of_minimal(&balanced, Semantics::Topological, &opts).map_err(|e| e.to_string())?;
    let singles = completions(&[&["r2"], &["r3"]]);
    check(sets(&u.report) == singles, || {
        format!("balanced: solutions {:?}", sets(&u.report))
    })?;
    for c in &singles {
        let v = verify_completion(&balanced, c).map_err(|e| e.to_string())?;
        check(!v.stoichiometric, || format!("balanced: {c} passes strict"))?;
    }
    check(u.verified && u.hybrid_verified, || {
        "balanced: union fails hybrid".into()
    })?;

    let unbalanced = load("union_unbalanced.lp");
    let u =
        union_of_minimal(&unbalanced, Semantics::Topological, &opts).map_err(|e| e.to_string())?;
    check(sets(&u.report) == singles, || {
        format!("unbalanced: solutions {:?}", sets(&u.report))
    })?;
    let v = verify_completion(&unbalanced, &u.union).map_err(|e| e.to_string())?;
    check(u.verified && v.topological, || {
        "unbalanced: union not topological".into()
    })?;
    check(!v.stoichiometric && !u.hybrid_verified, || {
        "unbalanced: union passes strict".into()
    })?;
    Ok("balanced union hybrid, unbalanced union fails strict".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shape = InstanceShape {
        max_reference: 10,
        max_metabolites: 12,
        exotic: true,
    };
    let mut solvable = 0;
    for i in 0..200 {
        let inst = random_instance(&mut rng, &shape);
        let n = inst.reference_only().count();
        for sem in Semantics::ALL {
            let rep = enumerate_minimal(&inst, sem, &SearchOptions::default())
                .map_err(|e| e.to_string())?;
            let oracle = brute_force_minimal(&inst, sem, n).map_err(|e| e.to_string())?;
            let got = sets(&rep);
            check(got == oracle, || {
                format!("instance {i} {sem}: search {got:?}, oracle {oracle:?}")
            })?;
            let size = oracle.first().map(Completion::len);
            check(rep.optimum_size == size, || {
                format!("instance {i} {sem}: size mismatch")
            })?;
            solvable += usize::from(size.is_some());
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "800 runs ({solvable} solvable) match in {elapsed:.2?}"
    ))
}

fn knob_neutrality() -> Outcome {
    let toy = load("toy.lp");
    let grid = [0u8, 25, 50, 75, 100];
    for (sem, _, want) in golden() {
        for prop in grid {
            for core in grid {
                let opts = SearchOptions {
                    prop_percent: prop,
                    core_percent: core,
                    ..Default::default()
                };
                let rep = enumerate_minimal(&toy, sem, &opts).map_err(|e| e.to_string())?;
                check(sets(&rep) == want, || {
                    format!("{sem} prop {prop} core {core}: {:?}", sets(&rep))
                })?;
            }
        }
    }
    Ok("25 configurations agree for all 4 semantics".into())
}

fn quality_table() -> Outcome {
    let start = Instant::now();
    let mut corpus = Vec::new();
    for (k, fraction) in [0.1, 0.2, 0.3].into_iter().enumerate() {
        let cfg = DegradationConfig {
            fraction,
            rng_seed: 80 + k as u64,
            targets_per_instance: 2,
            instances: [34, 33, 33][k],
        };
        corpus.extend(synthetic_corpus(100, &cfg).map_err(|e| e.to_string())?);
    }
    let opts = SearchOptions {
        enumerate_limit: Some(200),
        time_limit: Some(Duration::from_secs(20)),
        ..Default::default()
    };
    let workers = std::thread::available_parallelism().map_or(2, |n| n.get());
    let table = run_experiment(
        &corpus,
        &[Semantics::Hybrid, Semantics::Topological],
        &opts,
        workers,
    )
    .map_err(|e| e.to_string())?;
    let errors: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.status.starts_with("error"))
        .collect();
    check(errors.is_empty(), || format!("failed rows: {errors:?}"))?;
    let summary = table.summary();
    let hybrid = &summary[0];
    let topo = &summary[1];
    print!("{}", table.render());
    check(hybrid.sols == corpus.len(), || {
        format!("hybrid solved {} of {}", hybrid.sols, corpus.len())
    })?;
    check(hybrid.verified_pct == 100.0, || {
        format!("hybrid verified {:.2}%", hybrid.verified_pct)
    })?;
    check(topo.union_hybrid_pct < hybrid.union_hybrid_pct, || {
        format!(
            "topological unions {:.2}% vs hybrid {:.2}%",
            topo.union_hybrid_pct, hybrid.union_hybrid_pct
        )
    })?;
    Ok(format!(
        "{} instances: hybrid verified {:.2}%, union hybrid rate hybrid {:.2}% > topological {:.2}% ({:.1?})",
        corpus.len(),
        hybrid.verified_pct,
        hybrid.union_hybrid_pct,
        topo.union_hybrid_pct,
        start.elapsed()
    ))
}

fn flux_example() -> Outcome {
    let toy = load("toy.lp");
    let mut out = Vec::new();
    for sem in [Semantics::Strict, Semantics::Hybrid] {
        let rep =
            solve_completion(&toy, sem, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let v = rep.objective_flux.ok_or("no objective flux")?;
        check((v - 49999.5).abs() <= 1e-3, || format!("{sem}: v_r5 = {v}"))?;
        out.push(format!("{sem} v_r5 = {v}"));
    }
    Ok(out.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("toy golden suite", toy_golden_suite),
        ("mass-balance row", balance_row),
        ("witness validity", witness_validity),
        ("union monotonicity", union_monotonicity),
        ("union counterexamples", union_counterexamples),
        ("oracle equivalence", oracle_equivalence),
        ("knob neutrality", knob_neutrality),
        ("desk-scale quality table", quality_table),
        ("objective flux example", flux_example),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
