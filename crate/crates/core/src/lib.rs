//! Exact symbolic analysis of oscillation behavior on finitely presented
//! countable compact scattered spaces.
//!
//! Spaces are pattern trees (finite prefixes plus repeated cycles), subsets
//! and functions are exact-rational decorations uniform across repetitions,
//! and every limit quantity — semicontinuous envelopes, oscillations,
//! oscillation-set derivations, Baire-type indices — is computed exactly.
//! On top of the analysis sit checkable certificates for upper bounds on
//! the decomposition norm (the infimum over pointwise-absolutely-summable
//! continuous decompositions), constructive approximation by simple
//! functions supported on differences of closed sets, and generators for
//! the extremal indicator witnesses that separate these classes.
//!
//! Everything is deterministic and oracle-checked: an independent finite
//! expansion of each space recomputes all limit quantities and must agree
//! exactly with the symbolic engine.

pub mod cli;
pub mod corpus;
pub mod decompose;
pub mod dnorm;
pub mod error;
pub mod expand;
pub mod func;
pub mod json;
pub mod oscillation;
pub mod rat;
pub mod space;
pub mod suites;
pub mod witness;

pub use error::Error;
pub use rat::Rat;
