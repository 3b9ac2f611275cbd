//! Runs the Rust listings of the guide in `book/` as doc-tests.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/networks.md")]
pub struct Networks;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/semantics.md")]
pub struct Semantics;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/completion.md")]
pub struct Completion;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
pub struct Verification;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmarks.md")]
pub struct Benchmarks;
