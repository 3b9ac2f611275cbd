mod common;

use common::{random_instance, InstanceShape};
use fluxfill::completion::{
    enumerate_minimal, solve_completion, union_of_minimal, SearchOptions, Semantics, Status,
};
use fluxfill::factio::{emit_facts, parse_facts};
use fluxfill::verify::{activates, verify_completion};
use fluxfill::{Completion, Instance};
use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-6;

fn instance(seed: u64, exotic: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(
        &mut rng,
        &InstanceShape {
            max_reference: 8,
            max_metabolites: 8,
            exotic,
        },
    )
}

fn enumerate(inst: &Instance, sem: Semantics, opts: &SearchOptions) -> (Status, Vec<Completion>) {
    let rep = enumerate_minimal(inst, sem, opts).unwrap();
    let sets = rep.completions.into_iter().map(|s| s.completion).collect();
    (rep.status, sets)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facts_round_trip(seed in any::<u64>(), exotic in any::<bool>()) {
        let inst = instance(seed, exotic);
        let text = emit_facts(&inst);
        prop_assert_eq!(parse_facts(&text).unwrap(), inst.clone());
        prop_assert_eq!(emit_facts(&parse_facts(&text).unwrap()), text);
    }

    #[test]
    fn fact_order_is_irrelevant(seed in any::<u64>(), shuffle in any::<u64>()) {
        let inst = instance(seed, true);
        let mut lines: Vec<String> = emit_facts(&inst).lines().map(String::from).collect();
        lines.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(parse_facts(&lines.join("\n")).unwrap(), inst);
    }

    #[test]
    fn completions_are_sound_and_minimal(seed in any::<u64>(), exotic in any::<bool>()) {
        let inst = instance(seed, exotic);
        for sem in Semantics::ALL {
            let (status, sets) = enumerate(&inst, sem, &SearchOptions::default());
            prop_assert!(matches!(status, Status::Optimal | Status::NoSolution));
            for c in &sets {
                prop_assert!(activates(&inst, c, sem, EPS).unwrap(), "{} {}", sem, c);
                let ids: Vec<_> = c.iter().cloned().collect();
                for k in 0..ids.len() {
                    for sub in ids.iter().cloned().combinations(k) {
                        let sub = Completion::new(sub);
                        prop_assert!(!activates(&inst, &sub, sem, EPS).unwrap(), "{} {} < {}", sem, sub, c);
                    }
                }
            }
            prop_assert!(sets.windows(2).all(|w| w[0] < w[1]), "not in lexicographic order");
        }
    }

    #[test]
    fn single_solve_is_first_of_enumeration(seed in any::<u64>()) {
        let inst = instance(seed, true);
        for sem in Semantics::ALL {
            let one = solve_completion(&inst, sem, &SearchOptions::default()).unwrap();
            let (_, all) = enumerate(&inst, sem, &SearchOptions::default());
            prop_assert_eq!(one.completions.first().map(|s| &s.completion), all.first());
        }
    }

    #[test]
    fn hybrid_dominates(seed in any::<u64>(), exotic in any::<bool>()) {
        let inst = instance(seed, exotic);
        let size = |sem| solve_completion(&inst, sem, &SearchOptions::default()).unwrap().optimum_size;
        let hybrid = size(Semantics::Hybrid);
        let strict = size(Semantics::Strict);
        let relaxed = size(Semantics::Relaxed);
        let topo = size(Semantics::Topological);
        if let Some(h) = hybrid {
            prop_assert!(topo.is_some_and(|t| t <= h));
            prop_assert!(strict.is_some_and(|s| s <= h));
        }
        if let Some(s) = strict {
            prop_assert!(relaxed.is_some_and(|r| r <= s));
        }
    }

    #[test]
    fn unions_stay_active(seed in any::<u64>()) {
        let inst = instance(seed, false);
        for sem in Semantics::ALL {
            let u = union_of_minimal(&inst, sem, &SearchOptions::default()).unwrap();
            if !u.report.completions.is_empty() {
                prop_assert!(u.verified, "{} union {}", sem, u.union);
                let v = verify_completion(&inst, &u.union).unwrap();
                prop_assert_eq!(v.hybrid, u.hybrid_verified);
            }
        }
    }

    #[test]
    fn knobs_do_not_change_answers(seed in any::<u64>(), prop in 0u8..=100, core in 0u8..=100) {
        let inst = instance(seed, true);
        let tuned = SearchOptions { prop_percent: prop, core_percent: core, ..SearchOptions::default() };
        for sem in Semantics::ALL {
            prop_assert_eq!(
                enumerate(&inst, sem, &SearchOptions::default()),
                enumerate(&inst, sem, &tuned)
            );
        }
    }
}
