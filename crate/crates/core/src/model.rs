//! Stoichiometric metabolic networks and completion problem instances.
//!
//! A network is a directed bipartite graph between reactions and metabolites.
//! Each reaction stores its reactants and products with positive
//! stoichiometric coefficients; the sign convention only appears when the
//! mass-balance rows are built (see [`crate::linear`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Result<Self> {
                let id = id.into();
                if is_valid_id(&id) {
                    Ok(Self(id))
                } else {
                    Err(Error::InvalidId(id))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::new(s)
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;

            fn try_from(s: String) -> Result<Self> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Identifier of a metabolite (compound).
    MetaboliteId
);
id_type!(
    /// Identifier of a reaction.
    ReactionId
);

/// Id suffix of the forward half of an expanded reversible reaction.
pub const FWD_SUFFIX: &str = "__fwd";
/// Id suffix of the reverse half of an expanded reversible reaction.
pub const REV_SUFFIX: &str = "__rev";

/// A reaction with its stoichiometry and flux bounds.
///
/// Coefficients are positive magnitudes. An empty reactant map marks an
/// uptake (boundary) reaction, an empty product map an export reaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub id: ReactionId,
    pub reactants: BTreeMap<MetaboliteId, f64>,
    pub products: BTreeMap<MetaboliteId, f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub reversible: bool,
    pub is_objective: bool,
}

impl Reaction {
    /// An irreversible reaction with no stoichiometry and bounds `0..inf`.
    pub fn new(id: ReactionId) -> Self {
        Self {
            id,
            reactants: BTreeMap::new(),
            products: BTreeMap::new(),
            lower_bound: 0.0,
            upper_bound: f64::INFINITY,
            reversible: false,
            is_objective: false,
        }
    }

    pub fn reactant(mut self, m: MetaboliteId, coefficient: f64) -> Self {
        self.reactants.insert(m, coefficient);
        self
    }

    pub fn product(mut self, m: MetaboliteId, coefficient: f64) -> Self {
        self.products.insert(m, coefficient);
        self
    }

    pub fn bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower_bound = lower;
        self.upper_bound = upper;
        self
    }

    pub fn reversible(mut self, reversible: bool) -> Self {
        self.reversible = reversible;
        self
    }

    pub fn objective(mut self, is_objective: bool) -> Self {
        self.is_objective = is_objective;
        self
    }

    /// All metabolites touched by this reaction.
    pub fn metabolites(&self) -> impl Iterator<Item = &MetaboliteId> {
        self.reactants.keys().chain(self.products.keys())
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidReaction {
            id: self.id.clone(),
            reason,
        };
        for (m, &c) in self.reactants.iter().chain(&self.products) {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid(format!(
                    "coefficient {c} of `{m}` must be positive"
                )));
            }
        }
        if !(self.lower_bound.is_finite() && self.lower_bound >= 0.0) {
            return Err(invalid(format!(
                "lower bound {} must be finite and non-negative",
                self.lower_bound
            )));
        }
        if self.upper_bound.is_nan() || self.upper_bound < self.lower_bound {
            return Err(invalid(format!(
                "bounds {}..{} are empty",
                self.lower_bound, self.upper_bound
            )));
        }
        Ok(())
    }

    /// Same stoichiometry, bounds and direction.
    fn same_definition(&self, other: &Reaction) -> bool {
        self.reactants == other.reactants
            && self.products == other.products
            && self.lower_bound == other.lower_bound
            && self.upper_bound == other.upper_bound
            && self.reversible == other.reversible
    }
}

/// A stoichiometric metabolic network.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetabolicNetwork {
    metabolites: BTreeSet<MetaboliteId>,
    reactions: BTreeMap<ReactionId, Reaction>,
    /// Original id of every reaction created by [`MetabolicNetwork::expand_reversible`].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    origins: BTreeMap<ReactionId, ReactionId>,
}

impl MetabolicNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_metabolite(&mut self, m: MetaboliteId) {
        self.metabolites.insert(m);
    }

    /// Adds a reaction and every metabolite it references.
    pub fn add_reaction(&mut self, reaction: Reaction) -> Result<()> {
        reaction.validate()?;
        if self.reactions.contains_key(&reaction.id) {
            return Err(Error::DuplicateReaction(reaction.id));
        }
        self.metabolites.extend(reaction.metabolites().cloned());
        self.reactions.insert(reaction.id.clone(), reaction);
        Ok(())
    }

    pub fn metabolites(&self) -> &BTreeSet<MetaboliteId> {
        &self.metabolites
    }

    pub fn reactions(&self) -> impl ExactSizeIterator<Item = &Reaction> {
        self.reactions.values()
    }

    pub fn reaction_ids(&self) -> impl ExactSizeIterator<Item = &ReactionId> {
        self.reactions.keys()
    }

    pub fn reaction(&self, id: &ReactionId) -> Option<&Reaction> {
        self.reactions.get(id)
    }

    pub fn contains_reaction(&self, id: &ReactionId) -> bool {
        self.reactions.contains_key(id)
    }

    pub fn contains_metabolite(&self, m: &MetaboliteId) -> bool {
        self.metabolites.contains(m)
    }

    pub fn is_empty(&self) -> bool {
        self.reactions.is_empty() && self.metabolites.is_empty()
    }

    /// Products of reactions without reactants.
    pub fn boundary_compounds(&self) -> BTreeSet<MetaboliteId> {
        self.reactions
            .values()
            .filter(|r| r.reactants.is_empty())
            .flat_map(|r| r.products.keys().cloned())
            .collect()
    }

    /// Component-wise union. A reaction present in both networks must have
    /// the same definition in each; objective markers are merged.
    pub fn union(&self, other: &MetabolicNetwork) -> Result<MetabolicNetwork> {
        let mut out = self.clone();
        out.metabolites.extend(other.metabolites.iter().cloned());
        for (id, r) in &other.reactions {
            match out.reactions.get_mut(id) {
                Some(existing) => {
                    if !existing.same_definition(r) {
                        return Err(Error::InconsistentUnion(id.clone()));
                    }
                    existing.is_objective |= r.is_objective;
                }
                None => {
                    out.reactions.insert(id.clone(), r.clone());
                }
            }
        }
        for (id, origin) in &other.origins {
            out.origins
                .entry(id.clone())
                .or_insert_with(|| origin.clone());
        }
        Ok(out)
    }

    /// Replaces every reversible reaction `r` by the irreversible pair
    /// `r__fwd` (stored direction) and `r__rev` (reactants and products
    /// swapped). Both keep the bounds of `r`.
    pub fn expand_reversible(&self) -> Result<MetabolicNetwork> {
        if self.reactions.values().all(|r| !r.reversible) {
            return Ok(self.clone());
        }
        let mut out = MetabolicNetwork {
            metabolites: self.metabolites.clone(),
            reactions: BTreeMap::new(),
            origins: self.origins.clone(),
        };
        let mut insert = |r: Reaction, origin: Option<&ReactionId>| -> Result<()> {
            if out.reactions.contains_key(&r.id) {
                return Err(Error::IdCollision(r.id));
            }
            if let Some(origin) = origin {
                out.origins.insert(r.id.clone(), origin.clone());
            }
            out.reactions.insert(r.id.clone(), r);
            Ok(())
        };
        for r in self.reactions.values().filter(|r| !r.reversible) {
            insert(r.clone(), None)?;
        }
        for r in self.reactions.values().filter(|r| r.reversible) {
            let origin = self.original_id(&r.id).clone();
            let fwd_id = ReactionId(format!("{}{FWD_SUFFIX}", r.id));
            let rev_id = ReactionId(format!("{}{REV_SUFFIX}", r.id));
            if self.reactions.contains_key(&fwd_id) {
                return Err(Error::IdCollision(fwd_id));
            }
            if self.reactions.contains_key(&rev_id) {
                return Err(Error::IdCollision(rev_id));
            }
            let fwd = Reaction {
                id: fwd_id,
                reversible: false,
                ..r.clone()
            };
            let rev = Reaction {
                id: rev_id,
                reactants: r.products.clone(),
                products: r.reactants.clone(),
                reversible: false,
                ..r.clone()
            };
            insert(fwd, Some(&origin))?;
            insert(rev, Some(&origin))?;
        }
        Ok(out)
    }

    /// The id a reaction had before reversible expansion.
    pub fn original_id<'a>(&'a self, id: &'a ReactionId) -> &'a ReactionId {
        self.origins.get(id).unwrap_or(id)
    }

    /// Maps a pre-expansion reaction id to the reaction representing it in
    /// this network: the id itself, or its forward half after expansion.
    pub fn resolve(&self, id: &ReactionId) -> Option<ReactionId> {
        if self.reactions.contains_key(id) {
            return Some(id.clone());
        }
        let fwd = ReactionId(format!("{id}{FWD_SUFFIX}"));
        self.reactions.contains_key(&fwd).then_some(fwd)
    }
}

/// Origin of an entity in a completion instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Draft,
    Reference,
    Seed,
    Target,
}

impl EntityType {
    pub fn as_char(self) -> char {
        match self {
            EntityType::Draft => 'd',
            EntityType::Reference => 'r',
            EntityType::Seed => 's',
            EntityType::Target => 't',
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "d" => Some(EntityType::Draft),
            "r" => Some(EntityType::Reference),
            "s" => Some(EntityType::Seed),
            "t" => Some(EntityType::Target),
            _ => None,
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    Metabolite(MetaboliteId),
    Reaction(ReactionId),
}

/// A set of reference reactions added to a draft network.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Completion {
    pub chosen: BTreeSet<ReactionId>,
}

impl Completion {
    pub fn new(chosen: impl IntoIterator<Item = ReactionId>) -> Self {
        Self {
            chosen: chosen.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn contains(&self, id: &ReactionId) -> bool {
        self.chosen.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReactionId> {
        self.chosen.iter()
    }

    pub fn union(&self, other: &Completion) -> Completion {
        Completion {
            chosen: self.chosen.union(&other.chosen).cloned().collect(),
        }
    }
}

impl fmt::Display for Completion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.chosen.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// A completion problem: draft network, reference network, seeds and targets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    draft: MetabolicNetwork,
    reference: MetabolicNetwork,
    seeds: BTreeSet<MetaboliteId>,
    targets: BTreeSet<ReactionId>,
}

impl Instance {
    /// Checks that seeds are draft metabolites, every boundary compound is a
    /// seed, and targets are draft reactions.
    pub fn new(
        draft: MetabolicNetwork,
        reference: MetabolicNetwork,
        seeds: BTreeSet<MetaboliteId>,
        targets: BTreeSet<ReactionId>,
    ) -> Result<Self> {
        if let Some(m) = seeds.iter().find(|m| !draft.contains_metabolite(m)) {
            return Err(Error::UnknownMetabolite(m.clone()));
        }
        if let Some(m) = draft
            .boundary_compounds()
            .into_iter()
            .find(|m| !seeds.contains(m))
        {
            return Err(Error::BoundaryNotSeed(m));
        }
        if let Some(t) = targets.iter().find(|t| !draft.contains_reaction(t)) {
            return Err(Error::UnknownReaction(t.clone()));
        }
        Ok(Self {
            draft,
            reference,
            seeds,
            targets,
        })
    }

    pub fn draft(&self) -> &MetabolicNetwork {
        &self.draft
    }

    pub fn reference(&self) -> &MetabolicNetwork {
        &self.reference
    }

    pub fn seeds(&self) -> &BTreeSet<MetaboliteId> {
        &self.seeds
    }

    pub fn targets(&self) -> &BTreeSet<ReactionId> {
        &self.targets
    }

    /// Reference reactions that the draft does not already contain. A
    /// reaction defined in both networks keeps its draft definition.
    pub fn reference_only(&self) -> impl Iterator<Item = &Reaction> {
        self.reference
            .reactions()
            .filter(|r| !self.draft.contains_reaction(&r.id))
    }

    pub fn is_reference_only(&self, id: &ReactionId) -> bool {
        self.reference.contains_reaction(id) && !self.draft.contains_reaction(id)
    }

    /// Reactants of the target reactions.
    pub fn target_compounds(&self) -> BTreeSet<MetaboliteId> {
        self.targets
            .iter()
            .filter_map(|t| self.draft.reaction(t))
            .flat_map(|r| r.reactants.keys().cloned())
            .collect()
    }

    /// Draft reactions whose flux the final optimization maximizes: the
    /// objective-marked ones, or the targets when none is marked.
    pub fn objective_reactions(&self) -> BTreeSet<ReactionId> {
        let marked: BTreeSet<_> = self
            .draft
            .reactions()
            .filter(|r| r.is_objective)
            .map(|r| r.id.clone())
            .collect();
        if marked.is_empty() {
            self.targets.clone()
        } else {
            marked
        }
    }

    /// Classifies every entity. Draft entities are typed target, seed or
    /// draft, in that order of precedence; entities that only occur in the
    /// reference network are typed reference.
    pub fn typing(&self) -> BTreeMap<Entity, EntityType> {
        let target_compounds = self.target_compounds();
        let boundary = self.draft.boundary_compounds();
        let mut out = BTreeMap::new();
        for m in self.draft.metabolites() {
            let ty = if target_compounds.contains(m) {
                EntityType::Target
            } else if self.seeds.contains(m) {
                EntityType::Seed
            } else {
                EntityType::Draft
            };
            out.insert(Entity::Metabolite(m.clone()), ty);
        }
        for r in self.draft.reactions() {
            let ty = if self.targets.contains(&r.id) {
                EntityType::Target
            } else if r.products.keys().any(|m| boundary.contains(m)) {
                EntityType::Seed
            } else {
                EntityType::Draft
            };
            out.insert(Entity::Reaction(r.id.clone()), ty);
        }
        for m in self.reference.metabolites() {
            out.entry(Entity::Metabolite(m.clone()))
                .or_insert(EntityType::Reference);
        }
        for r in self.reference.reactions() {
            out.entry(Entity::Reaction(r.id.clone()))
                .or_insert(EntityType::Reference);
        }
        out
    }

    /// The draft network extended by the chosen reference reactions and the
    /// metabolites they touch.
    pub fn extend(&self, completion: &Completion) -> Result<MetabolicNetwork> {
        let mut net = self.draft.clone();
        for id in completion.iter() {
            if !self.is_reference_only(id) {
                return Err(Error::InvalidCompletion(id.clone()));
            }
            let r = self.reference.reaction(id).expect("checked above");
            net.add_reaction(r.clone())?;
        }
        Ok(net)
    }

    /// Target ids as they appear in a network produced by
    /// [`MetabolicNetwork::expand_reversible`].
    pub fn resolve_targets(&self, expanded: &MetabolicNetwork) -> Result<BTreeSet<ReactionId>> {
        self.targets
            .iter()
            .map(|t| {
                expanded
                    .resolve(t)
                    .ok_or_else(|| Error::UnknownReaction(t.clone()))
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn m(s: &str) -> MetaboliteId {
        MetaboliteId::new(s).unwrap()
    }

    pub fn r(s: &str) -> ReactionId {
        ReactionId::new(s).unwrap()
    }

    fn rxn(id: &str, reactants: &[(&str, f64)], products: &[(&str, f64)]) -> Reaction {
        let mut out = Reaction::new(r(id)).bounds(0.0, 10.0);
        for &(x, c) in reactants {
            out = out.reactant(m(x), c);
        }
        for &(x, c) in products {
            out = out.product(m(x), c);
        }
        out
    }

    fn net(reactions: Vec<Reaction>) -> MetabolicNetwork {
        let mut n = MetabolicNetwork::new();
        for x in reactions {
            n.add_reaction(x).unwrap();
        }
        n
    }

    #[test]
    fn id_validation() {
        assert!(MetaboliteId::new("S1").is_ok());
        assert!(ReactionId::new("r_s1").is_ok());
        assert!(ReactionId::new("_x").is_ok());
        assert_eq!(
            ReactionId::new("1r"),
            Err(Error::InvalidId("1r".to_string()))
        );
        assert!(MetaboliteId::new("").is_err());
        assert!(MetaboliteId::new("a-b").is_err());
    }

    #[test]
    fn reaction_validation() {
        let mut n = MetabolicNetwork::new();
        let bad = rxn("x", &[("A", 0.0)], &[]);
        assert!(matches!(
            n.add_reaction(bad),
            Err(Error::InvalidReaction { .. })
        ));
        let bad = Reaction::new(r("x")).bounds(3.0, 1.0);
        assert!(matches!(
            n.add_reaction(bad),
            Err(Error::InvalidReaction { .. })
        ));
        n.add_reaction(rxn("x", &[], &[("A", 1.0)])).unwrap();
        assert_eq!(
            n.add_reaction(rxn("x", &[], &[])),
            Err(Error::DuplicateReaction(r("x")))
        );
        assert!(n.contains_metabolite(&m("A")));
    }

    #[test]
    fn boundary_compounds_cases() {
        let n = net(vec![
            rxn("u", &[], &[("A", 1.0)]),
            rxn("v", &[("A", 1.0)], &[("B", 1.0)]),
        ]);
        assert_eq!(n.boundary_compounds(), BTreeSet::from([m("A")]));
        let n = net(vec![rxn("v", &[("A", 1.0)], &[("B", 1.0)])]);
        assert!(n.boundary_compounds().is_empty());
    }

    #[test]
    fn union_rules() {
        let g1 = net(vec![rxn("a", &[("X", 1.0)], &[("Y", 1.0)])]);
        let g2 = net(vec![rxn("b", &[("Y", 1.0)], &[("Z", 1.0)])]);
        let u = g1.union(&g2).unwrap();
        assert_eq!(u.reaction_ids().count(), 2);
        assert_eq!(u.metabolites().len(), 3);
        assert_eq!(g1.union(&g1).unwrap(), g1);

        let g3 = net(vec![rxn("a", &[("X", 2.0)], &[("Y", 1.0)])]);
        assert_eq!(g1.union(&g3), Err(Error::InconsistentUnion(r("a"))));
    }

    #[test]
    fn expand_reversible_pairs() {
        let n = net(vec![
            rxn("x", &[("A", 1.0)], &[("B", 2.0)]).reversible(true),
            rxn("y", &[("B", 1.0)], &[]),
        ]);
        let e = n.expand_reversible().unwrap();
        let fwd = e.reaction(&r("x__fwd")).unwrap();
        let rev = e.reaction(&r("x__rev")).unwrap();
        assert_eq!(fwd.reactants, BTreeMap::from([(m("A"), 1.0)]));
        assert_eq!(rev.reactants, BTreeMap::from([(m("B"), 2.0)]));
        assert_eq!(rev.products, BTreeMap::from([(m("A"), 1.0)]));
        assert!(!fwd.reversible && !rev.reversible);
        assert_eq!(e.original_id(&r("x__rev")), &r("x"));
        assert_eq!(e.original_id(&r("y")), &r("y"));
        assert_eq!(e.resolve(&r("x")), Some(r("x__fwd")));
        assert!(!e.contains_reaction(&r("x")));

        let plain = net(vec![rxn("y", &[("B", 1.0)], &[])]);
        assert_eq!(plain.expand_reversible().unwrap(), plain);

        let clash = net(vec![
            rxn("x", &[("A", 1.0)], &[]).reversible(true),
            rxn("x__rev", &[("A", 1.0)], &[]),
        ]);
        assert_eq!(
            clash.expand_reversible(),
            Err(Error::IdCollision(r("x__rev")))
        );
    }

    #[test]
    fn instance_validation() {
        let draft = net(vec![
            rxn("u", &[], &[("A", 1.0)]),
            rxn("t", &[("A", 1.0)], &[]),
        ]);
        let reference = MetabolicNetwork::new();
        let ok = Instance::new(
            draft.clone(),
            reference.clone(),
            BTreeSet::from([m("A")]),
            BTreeSet::from([r("t")]),
        );
        assert!(ok.is_ok());
        assert_eq!(
            Instance::new(
                draft.clone(),
                reference.clone(),
                BTreeSet::new(),
                BTreeSet::new()
            ),
            Err(Error::BoundaryNotSeed(m("A")))
        );
        assert_eq!(
            Instance::new(
                draft.clone(),
                reference.clone(),
                BTreeSet::from([m("A"), m("Q")]),
                BTreeSet::new()
            ),
            Err(Error::UnknownMetabolite(m("Q")))
        );
        assert_eq!(
            Instance::new(
                draft,
                reference,
                BTreeSet::from([m("A")]),
                BTreeSet::from([r("z")])
            ),
            Err(Error::UnknownReaction(r("z")))
        );
    }

    #[test]
    fn extend_checks_membership() {
        let draft = net(vec![rxn("u", &[], &[("A", 1.0)])]);
        let reference = net(vec![
            rxn("u", &[], &[("A", 1.0)]),
            rxn("w", &[("A", 1.0)], &[("N", 1.0)]),
        ]);
        let inst = Instance::new(
            draft.clone(),
            reference,
            BTreeSet::from([m("A")]),
            BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(inst.extend(&Completion::empty()).unwrap(), draft);
        let ext = inst.extend(&Completion::new([r("w")])).unwrap();
        assert!(ext.contains_metabolite(&m("N")));
        assert_eq!(
            inst.extend(&Completion::new([r("u")])),
            Err(Error::InvalidCompletion(r("u")))
        );
        assert_eq!(
            inst.extend(&Completion::new([r("nope")])),
            Err(Error::InvalidCompletion(r("nope")))
        );
        assert_eq!(inst.reference_only().count(), 1);
    }
}
