//! Shortcut verification and the multiplicity / ambiguity measures.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::enumerate::{enumerate_valid_with, SolutionSet};
use crate::error::{Error, Result};
use crate::model::{is_valid, ConceptMapping, MappingMode, Problem};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationStatus {
    IntendedInvalid,
    ShortcutFree,
    ShortcutsFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationResult {
    pub status: VerificationStatus,
    /// Lexicographically ordered; never contains the intended mapping.
    pub shortcuts: Vec<ConceptMapping>,
    pub saturated: bool,
    pub mode: MappingMode,
    pub cap: usize,
}

impl VerificationResult {
    pub fn is_shortcut_free(&self) -> bool {
        self.status == VerificationStatus::ShortcutFree
    }
}

/// Checks the intended mapping, then searches for any other valid mapping.
pub fn verify(p: &Problem, mode: MappingMode, cap: usize) -> Result<VerificationResult> {
    verify_with(p, mode, cap, Execution::default())
}

pub fn verify_with(p: &Problem, mode: MappingMode, cap: usize, exec: Execution) -> Result<VerificationResult> {
    p.validate()?;
    p.check_mode(mode)?;
    if !is_valid(p, p.intended(), mode)? {
        return Ok(VerificationResult {
            status: VerificationStatus::IntendedInvalid,
            shortcuts: Vec::new(),
            saturated: false,
            mode,
            cap,
        });
    }
    let SolutionSet {
        mappings,
        saturated,
        ..
    } = enumerate_valid_with(p, mode, cap, true, exec)?;
    let status = if mappings.is_empty() {
        VerificationStatus::ShortcutFree
    } else {
        VerificationStatus::ShortcutsFound
    };
    Ok(VerificationResult {
        status,
        shortcuts: mappings,
        saturated,
        mode,
        cap,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmbiguityMeasures {
    /// Number of valid mappings minus one.
    pub multiplicity: usize,
    /// Largest pairwise Hamming distance.
    pub ambiguity: usize,
    /// Outputs on which some two valid mappings differ.
    pub disagreement_positions: Vec<usize>,
    pub exact: bool,
}

/// Measures over a full valid set (including the intended mapping).
pub fn measures(solutions: &[ConceptMapping], saturated: bool) -> Result<AmbiguityMeasures> {
    measures_with(solutions, saturated, Execution::default())
}

pub fn measures_with(
    solutions: &[ConceptMapping],
    saturated: bool,
    exec: Execution,
) -> Result<AmbiguityMeasures> {
    let first = solutions.first().ok_or_else(|| {
        Error::InvalidArgument("measures need at least one valid mapping".into())
    })?;
    let width = first.len();
    if solutions.iter().any(|s| s.len() != width) {
        return Err(Error::InvalidArgument("mappings have different lengths".into()));
    }
    let disagreement_positions = disagreement_set(solutions);
    // Pairwise maximum; stop early once every disagreement position is hit.
    let bound = disagreement_positions.len();
    let ambiguity = par::map_range(exec, solutions.len(), |i| {
        let mut best = 0;
        for j in i + 1..solutions.len() {
            best = best.max(solutions[i].hamming(&solutions[j]));
            if best == bound {
                break;
            }
        }
        best
    })
    .into_iter()
    .max()
    .unwrap_or(0);
    Ok(AmbiguityMeasures {
        multiplicity: solutions.len() - 1,
        ambiguity,
        disagreement_positions,
        exact: !saturated,
    })
}

/// Positions where the mappings are not all equal.
pub fn disagreement_set(solutions: &[ConceptMapping]) -> Vec<usize> {
    let Some(first) = solutions.first() else {
        return Vec::new();
    };
    (0..first.len())
        .filter(|&i| {
            let vals: BTreeSet<_> = solutions.iter().map(|s| s.values()[i]).collect();
            vals.len() > 1
        })
        .collect()
}
