//! Shortcut elimination by adding pinning constraints.
//!
//! Both loops alternate verification and pinning: while a shortcut exists,
//! pick one, pick an output where it disagrees with the intended mapping and
//! pin that output to its intended concept. Each pin keeps the intended
//! mapping valid and removes at least the chosen shortcut, so the loop ends
//! after at most `k` pins for `k` initial shortcuts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConceptMapping, Constraint, Literal, MappingMode, Problem};
use crate::par::{self, Execution};
use crate::verify::{verify, VerificationStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairOutcome {
    Repaired,
    Timeout,
    IntendedInvalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairStrategy {
    Greedy,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepairStep {
    /// Shortcuts seen by the verification that started this step.
    pub shortcuts_detected: usize,
    /// False when that verification hit the model cap.
    pub detection_exact: bool,
    pub detected_shortcut: ConceptMapping,
    pub disagreement_set: Vec<usize>,
    pub added_constraint: Constraint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepairTrace {
    pub strategy: RepairStrategy,
    pub iterations: Vec<RepairStep>,
    #[serde(skip)]
    pub final_constraints: Vec<Constraint>,
    pub constraints_added: usize,
    pub verification_calls: usize,
    pub outcome: RepairOutcome,
    /// Every verification in the run was below the cap.
    pub exact: bool,
}

impl RepairTrace {
    /// The pins added, in order.
    pub fn added(&self) -> Vec<&Constraint> {
        self.iterations.iter().map(|s| &s.added_constraint).collect()
    }
}

enum Picker {
    Greedy,
    Random(Box<ChaCha8Rng>),
}

impl Picker {
    fn pick(&mut self, n: usize) -> usize {
        match self {
            Picker::Greedy => 0,
            Picker::Random(rng) => rng.gen_range(0..n),
        }
    }
}

/// Deterministic repair: smallest shortcut, then its first disagreeing output.
pub fn greedy_repair(p: &Problem, mode: MappingMode, max_iterations: usize, cap: usize) -> Result<RepairTrace> {
    repair_loop(p, mode, max_iterations, cap, RepairStrategy::Greedy, Picker::Greedy)
}

/// Same loop, with the shortcut and the position drawn uniformly from a
/// ChaCha8 stream seeded by `seed`.
pub fn random_repair(
    p: &Problem,
    mode: MappingMode,
    max_iterations: usize,
    cap: usize,
    seed: u64,
) -> Result<RepairTrace> {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    repair_loop(p, mode, max_iterations, cap, RepairStrategy::Random, Picker::Random(Box::new(rng)))
}

fn repair_loop(
    p: &Problem,
    mode: MappingMode,
    max_iterations: usize,
    cap: usize,
    strategy: RepairStrategy,
    mut picker: Picker,
) -> Result<RepairTrace> {
    let intended = p.intended().clone();
    let mut current = p.clone();
    let mut iterations = Vec::new();
    let mut calls = 0;
    let mut exact = true;
    let outcome = loop {
        let r = verify(&current, mode, cap)?;
        calls += 1;
        exact &= !r.saturated;
        match r.status {
            VerificationStatus::IntendedInvalid => break RepairOutcome::IntendedInvalid,
            VerificationStatus::ShortcutFree => break RepairOutcome::Repaired,
            VerificationStatus::ShortcutsFound => {}
        }
        if iterations.len() >= max_iterations {
            break RepairOutcome::Timeout;
        }
        let shortcut = r.shortcuts[picker.pick(r.shortcuts.len())].clone();
        let disagreement = shortcut.disagreement(&intended);
        let output = disagreement[picker.pick(disagreement.len())];
        let pin = Constraint::Pin {
            output,
            concept: intended.values()[output],
        };
        current = current.with_constraints([pin.clone()]);
        iterations.push(RepairStep {
            shortcuts_detected: r.shortcuts.len(),
            detection_exact: !r.saturated,
            detected_shortcut: shortcut,
            disagreement_set: disagreement,
            added_constraint: pin,
        });
    };
    Ok(RepairTrace {
        strategy,
        constraints_added: iterations.len(),
        iterations,
        final_constraints: current.constraints().to_vec(),
        verification_calls: calls,
        outcome,
        exact,
    })
}

/// Upper bound on subsets examined by [`minimal_repair_bruteforce`].
pub const MINIMAL_REPAIR_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Index subsets of `0..n` of size `k` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Smallest subset of the pin-set library (at most `budget` members) that
/// makes the problem shortcut-free, as library indices. Ties go to the
/// lexicographically first index set.
pub fn minimal_repair_bruteforce(
    p: &Problem,
    library: &[Vec<Literal>],
    budget: usize,
    mode: MappingMode,
) -> Result<Option<Vec<usize>>> {
    minimal_repair_bruteforce_with(p, library, budget, mode, Execution::default())
}

pub fn minimal_repair_bruteforce_with(
    p: &Problem,
    library: &[Vec<Literal>],
    budget: usize,
    mode: MappingMode,
    exec: Execution,
) -> Result<Option<Vec<usize>>> {
    let budget = budget.min(library.len());
    let required: u128 = (0..=budget).map(|j| binomial(library.len(), j)).sum();
    if required > MINIMAL_REPAIR_LIMIT {
        return Err(Error::ResourceLimit {
            required,
            limit: MINIMAL_REPAIR_LIMIT,
        });
    }
    p.validate()?;
    p.check_mode(mode)?;
    if !crate::model::is_valid(p, p.intended(), mode)? {
        return Err(Error::Precondition("the intended mapping violates the constraints".into()));
    }
    for size in 0..=budget {
        let subsets = combinations(library.len(), size);
        let hit = par::position_first(exec, &subsets, |subset| {
            let q = p.with_constraints(subset.iter().map(|&i| Constraint::PinSet(library[i].clone())));
            crate::enumerate::count_up_to(&q, mode, 1, true) == 0
        });
        if let Some(i) = hit {
            return Ok(Some(subsets[i].clone()));
        }
    }
    Ok(None)
}
