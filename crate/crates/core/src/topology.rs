//! Reachability closure ("scope") and topological activation.
//!
//! A metabolite is reachable if it is a seed or the product of a reaction
//! whose reactants are all reachable. Reactions are taken in their stored
//! direction; expand reversible reactions first.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MetabolicNetwork, MetaboliteId, ReactionId};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub reachable: BTreeSet<MetaboliteId>,
    /// Reactions whose reactants are all reachable.
    pub firing: BTreeSet<ReactionId>,
}

/// Least fixed point of the reachability rules, computed by a worklist over
/// the number of still-missing reactants of each reaction.
pub fn scope(net: &MetabolicNetwork, seeds: &BTreeSet<MetaboliteId>) -> Result<Scope> {
    if let Some(s) = seeds.iter().find(|s| !net.contains_metabolite(s)) {
        return Err(Error::UnknownMetabolite(s.clone()));
    }

    let reactions: Vec<_> = net.reactions().collect();
    let mut consumers: HashMap<&MetaboliteId, Vec<usize>> = HashMap::new();
    let mut missing = Vec::with_capacity(reactions.len());
    for (i, r) in reactions.iter().enumerate() {
        for m in r.reactants.keys() {
            consumers.entry(m).or_default().push(i);
        }
        missing.push(r.reactants.len());
    }

    let mut out = Scope::default();
    let mut queue: VecDeque<&MetaboliteId> = VecDeque::new();
    let mut fire: Vec<usize> = missing
        .iter()
        .enumerate()
        .filter(|(_, &n)| n == 0)
        .map(|(i, _)| i)
        .collect();
    for s in seeds {
        if out.reachable.insert(s.clone()) {
            queue.push_back(s);
        }
    }

    loop {
        while let Some(i) = fire.pop() {
            let r = reactions[i];
            out.firing.insert(r.id.clone());
            for p in r.products.keys() {
                if out.reachable.insert(p.clone()) {
                    queue.push_back(p);
                }
            }
        }
        let Some(m) = queue.pop_front() else { break };
        for &i in consumers.get(m).map(Vec::as_slice).unwrap_or_default() {
            missing[i] -= 1;
            if missing[i] == 0 {
                fire.push(i);
            }
        }
    }
    Ok(out)
}

/// For each target: are all of its reactants in the scope of `seeds`?
pub fn topologically_activated(
    net: &MetabolicNetwork,
    seeds: &BTreeSet<MetaboliteId>,
    targets: &BTreeSet<ReactionId>,
) -> Result<BTreeMap<ReactionId, bool>> {
    let sc = scope(net, seeds)?;
    targets
        .iter()
        .map(|t| {
            let r = net
                .reaction(t)
                .ok_or_else(|| Error::UnknownReaction(t.clone()))?;
            let active = r.reactants.keys().all(|m| sc.reachable.contains(m));
            Ok((t.clone(), active))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{m, r};
    use crate::model::Reaction;

    fn chain() -> MetabolicNetwork {
        // u: -> A ; a: A -> B ; b: B + C -> D ; c: D -> C (cycle through C)
        let mut n = MetabolicNetwork::new();
        for x in [
            Reaction::new(r("u")).product(m("A"), 1.0),
            Reaction::new(r("a"))
                .reactant(m("A"), 1.0)
                .product(m("B"), 1.0),
            Reaction::new(r("b"))
                .reactant(m("B"), 1.0)
                .reactant(m("C"), 1.0)
                .product(m("D"), 1.0),
            Reaction::new(r("c"))
                .reactant(m("D"), 1.0)
                .product(m("C"), 1.0),
        ] {
            n.add_reaction(x).unwrap();
        }
        n
    }

    #[test]
    fn cycle_needs_external_entry() {
        let n = chain();
        let sc = scope(&n, &BTreeSet::from([m("A")])).unwrap();
        assert_eq!(sc.reachable, BTreeSet::from([m("A"), m("B")]));
        assert_eq!(sc.firing, BTreeSet::from([r("u"), r("a")]));

        let sc = scope(&n, &BTreeSet::from([m("A"), m("C")])).unwrap();
        assert_eq!(sc.reachable.len(), 4);
    }

    #[test]
    fn empty_reactant_reactions_fire_without_seeds() {
        let sc = scope(&chain(), &BTreeSet::new()).unwrap();
        assert!(sc.reachable.contains(&m("B")));
    }

    #[test]
    fn unknown_seed_and_target() {
        let n = chain();
        assert_eq!(
            scope(&n, &BTreeSet::from([m("Z")])),
            Err(Error::UnknownMetabolite(m("Z")))
        );
        assert_eq!(
            topologically_activated(&n, &BTreeSet::new(), &BTreeSet::from([r("zz")])),
            Err(Error::UnknownReaction(r("zz")))
        );
    }

    #[test]
    fn activation_per_target() {
        let n = chain();
        let act = topologically_activated(
            &n,
            &BTreeSet::from([m("A")]),
            &BTreeSet::from([r("a"), r("b"), r("u")]),
        )
        .unwrap();
        assert!(act[&r("a")]);
        assert!(!act[&r("b")]);
        assert!(act[&r("u")]);
    }
}
