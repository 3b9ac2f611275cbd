//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use fluxfill::factio::parse_facts;
use fluxfill::{Instance, MetabolicNetwork, MetaboliteId, Reaction, ReactionId};
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn load(name: &str) -> Instance {
    parse_facts(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn met(i: usize) -> MetaboliteId {
    MetaboliteId::new(format!("M{i}")).unwrap()
}

pub fn rid(prefix: &str, i: usize) -> ReactionId {
    ReactionId::new(format!("{prefix}{i}")).unwrap()
}

/// A reaction over `M0..M{n_mets}` with one or two reactants (none when
/// `source`) and up to two products.
pub fn random_reaction(
    rng: &mut impl Rng,
    id: ReactionId,
    n_mets: usize,
    source: bool,
) -> Reaction {
    let mut r = Reaction::new(id).bounds(0.0, 10.0);
    let coefficient = |rng: &mut dyn rand::RngCore| if rng.random_bool(0.75) { 1.0 } else { 2.0 };
    if !source {
        for _ in 0..rng.random_range(1..=2) {
            let c = coefficient(rng);
            r = r.reactant(met(rng.random_range(0..n_mets)), c);
        }
    }
    for _ in 0..rng.random_range(usize::from(source)..=2) {
        let m = met(rng.random_range(0..n_mets));
        if !r.reactants.contains_key(&m) {
            let c = coefficient(rng);
            r = r.product(m, c);
        }
    }
    r
}

pub struct InstanceShape {
    pub max_reference: usize,
    pub max_metabolites: usize,
    /// Allow reversible reference reactions and positive lower bounds.
    pub exotic: bool,
}

/// Draft with uptakes for the seeds `M0`, `M1`, a few internal reactions
/// and one or two targets; a reference of up to `max_reference` reactions.
pub fn random_instance(rng: &mut impl Rng, shape: &InstanceShape) -> Instance {
    let n_mets = rng.random_range(4..=shape.max_metabolites);
    let mut draft = MetabolicNetwork::new();
    let seeds: BTreeSet<MetaboliteId> = [met(0), met(1)].into();
    for (i, s) in seeds.iter().enumerate() {
        draft
            .add_reaction(
                Reaction::new(rid("u", i))
                    .product(s.clone(), 1.0)
                    .bounds(0.0, 10.0),
            )
            .unwrap();
    }
    let n_internal = rng.random_range(2..=5);
    for i in 0..n_internal {
        draft
            .add_reaction(random_reaction(rng, rid("d", i), n_mets, false))
            .unwrap();
    }
    let mut targets = BTreeSet::from([rid("d", rng.random_range(0..n_internal))]);
    if rng.random_bool(0.3) {
        targets.insert(rid("d", rng.random_range(0..n_internal)));
    }
    let mut reference = MetabolicNetwork::new();
    for i in 0..rng.random_range(1..=shape.max_reference) {
        let source = rng.random_bool(0.05);
        let mut r = random_reaction(rng, rid("x", i), n_mets, source);
        if shape.exotic && rng.random_bool(0.1) {
            r = r.reversible(true);
        }
        if shape.exotic && rng.random_bool(0.05) {
            r = r.bounds(0.5, 10.0);
        }
        reference.add_reaction(r).unwrap();
    }
    for i in 0..n_mets {
        draft.add_metabolite(met(i));
    }
    Instance::new(draft, reference, seeds, targets).unwrap()
}

/// `count` networks drawn from one pool of reactions (so shared reactions
/// agree) with uptakes for `M0`, `M1` in each.
pub fn random_networks(
    rng: &mut impl Rng,
    max_reactions: usize,
    count: usize,
) -> Vec<MetabolicNetwork> {
    let n_mets = rng.random_range(3..=8);
    let pool: Vec<Reaction> = (0..2 * max_reactions)
        .map(|i| random_reaction(rng, rid("p", i), n_mets, false))
        .collect();
    let pick = |rng: &mut dyn rand::RngCore| {
        let mut net = MetabolicNetwork::new();
        for i in 0..2 {
            net.add_reaction(
                Reaction::new(rid("u", i))
                    .product(met(i), 1.0)
                    .bounds(0.0, 10.0),
            )
            .unwrap();
        }
        for _ in 0..rng.random_range(1..=max_reactions - 2) {
            let r = &pool[rng.random_range(0..pool.len())];
            if !net.contains_reaction(&r.id) {
                net.add_reaction(r.clone()).unwrap();
            }
        }
        for i in 0..n_mets {
            net.add_metabolite(met(i));
        }
        net
    };
    (0..count).map(|_| pick(rng)).collect()
}

pub fn random_pair(
    rng: &mut impl Rng,
    max_reactions: usize,
) -> (MetabolicNetwork, MetabolicNetwork) {
    let mut nets = random_networks(rng, max_reactions, 2);
    let b = nets.pop().unwrap();
    let a = nets.pop().unwrap();
    (a, b)
}
