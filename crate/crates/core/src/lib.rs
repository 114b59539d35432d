//! Detection, structural analysis and repair of reasoning shortcuts in
//! constraint-based concept mappings.
//!
//! A [`Problem`] fixes a list of outputs, a concept domain, a constraint set
//! and the intended mapping. Any other valid mapping is a shortcut. The crate
//! enumerates valid mappings ([`enumerate`]), verifies shortcut-freeness
//! ([`verify`]), explains shortcuts through the constraint graph and value
//! symmetries ([`structure`]), repairs constraint sets by pinning
//! ([`repair`]), simulates label-query disambiguation ([`query`]) and ships
//! the hardness reductions with brute-force oracles ([`reductions`]).
//!
//! Batch loops run on rayon when the `parallel` feature is on (the default);
//! see [`par::Execution`].

pub mod asp;
pub mod dsl;
pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod par;
pub mod query;
pub mod reductions;
pub mod repair;
pub mod report;
pub mod structure;
pub mod verify;

pub use dsl::{parse_problem, serialize_problem, DiagnosticKind, ParseOutcome, SourceDiagnostic};
pub use enumerate::{enumerate_valid, SolutionSet, DEFAULT_CAP};
pub use error::{Error, ModelError, Result};
pub use model::{
    apply_transposition, compose_value_permutation, evaluate_constraint, is_valid, Concept,
    ConceptMapping, Constraint, Literal, MappingMode, Problem, ValuePermutation,
};
pub use par::Execution;
pub use verify::{measures, verify, AmbiguityMeasures, VerificationResult, VerificationStatus};
