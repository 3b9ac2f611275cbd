//! Metabolic network completion.
//!
//! Given a draft network, a reference network, seed compounds and target
//! reactions, find the smallest sets of reference reactions that make the
//! targets active. Four activation semantics are supported:
//!
//! * **topological**: every reactant of a target is reachable from the seeds;
//! * **strict** stoichiometric: a steady-state flux distribution carries flux
//!   through every target;
//! * **relaxed** stoichiometric: as strict, but metabolites may accumulate;
//! * **hybrid**: topological and strict at once.
//!
//! ```
//! use fluxfill::{factio, completion::{self, Semantics, SearchOptions}};
//!
//! let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/toy.lp"))?;
//! let instance = factio::parse_facts(&text)?;
//! let report = completion::solve_completion(&instance, Semantics::Relaxed, &SearchOptions::default())?;
//! assert_eq!(report.optimum_size, Some(1));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bench;
pub mod completion;
pub mod error;
pub mod factio;
pub mod linear;
pub mod model;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    Completion, EntityType, Instance, MetabolicNetwork, MetaboliteId, Reaction, ReactionId,
};
