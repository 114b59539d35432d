//! Label-query disambiguation against an oracle that answers with the
//! intended mapping.
//!
//! Each query reveals the intended concept at one output and filters the
//! candidate set to mappings that agree there. Three selection rules:
//!
//! * uncertainty: the output where candidates take the most distinct values;
//! * greedy disambiguation: the output whose revealed answer removes the
//!   most candidates;
//! * random: a uniformly chosen output not yet queried (from all outputs).
//!
//! Ties go to the smallest output index.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Concept, ConceptMapping};
use crate::par::{self, Execution};
use crate::verify::disagreement_set;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryStrategy {
    Uncertainty,
    GreedyDisambiguation,
    Random,
}

impl QueryStrategy {
    pub const ALL: [QueryStrategy; 3] = [
        QueryStrategy::Uncertainty,
        QueryStrategy::GreedyDisambiguation,
        QueryStrategy::Random,
    ];
}

impl fmt::Display for QueryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryStrategy::Uncertainty => "uncertainty",
            QueryStrategy::GreedyDisambiguation => "greedy-disambiguation",
            QueryStrategy::Random => "random",
        })
    }
}

impl FromStr for QueryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" | "uncertainty" => Ok(QueryStrategy::Uncertainty),
            "g" | "greedy" | "greedy-disambiguation" => Ok(QueryStrategy::GreedyDisambiguation),
            "r" | "random" => Ok(QueryStrategy::Random),
            other => Err(Error::InvalidArgument(format!("unknown query strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub position: usize,
    pub answer: Concept,
    pub candidates_before: usize,
    pub candidates_after: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QueryBounds {
    pub lower: usize,
    pub upper: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryTrace {
    pub strategy: QueryStrategy,
    pub queries: Vec<QueryRecord>,
    pub identified: bool,
    pub survivor: Option<ConceptMapping>,
    pub bounds: QueryBounds,
}

impl QueryTrace {
    pub fn positions(&self) -> Vec<usize> {
        self.queries.iter().map(|q| q.position).collect()
    }
}

/// Smallest `q` with `r^q >= count`.
fn ceil_log(count: usize, r: usize) -> usize {
    let mut q = 0;
    let mut reach: u128 = 1;
    while reach < count as u128 {
        reach = reach.saturating_mul(r as u128);
        q += 1;
    }
    q
}

/// Information-theoretic lower bound and the disagreement-set upper bound on
/// the number of label queries.
pub fn query_bounds(solutions: &[ConceptMapping], domain_size: usize) -> Result<QueryBounds> {
    if solutions.is_empty() {
        return Err(Error::InvalidArgument("query bounds need at least one candidate".into()));
    }
    if solutions.len() > 1 && domain_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "concept domain of size {domain_size} cannot separate {} candidates",
            solutions.len()
        )));
    }
    Ok(QueryBounds {
        lower: ceil_log(solutions.len(), domain_size),
        upper: disagreement_set(solutions).len(),
    })
}

/// Runs one strategy until a single candidate remains. The trace's lower
/// bound uses the number of distinct concepts among the candidates as the
/// per-query branching factor.
pub fn run_strategy(
    solutions: &[ConceptMapping],
    intended: &ConceptMapping,
    strategy: QueryStrategy,
    seed: u64,
) -> Result<QueryTrace> {
    if !solutions.contains(intended) {
        return Err(Error::InvalidArgument(
            "the oracle's mapping is not among the candidates".into(),
        ));
    }
    let width = intended.len();
    let domain: BTreeSet<Concept> = solutions.iter().flat_map(|s| s.values().iter().copied()).collect();
    let bounds = query_bounds(solutions, domain.len().max(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<&ConceptMapping> = solutions.iter().collect();
    let mut queried = vec![false; width];
    let mut queries = Vec::new();

    while candidates.len() > 1 {
        let position = match strategy {
            QueryStrategy::Uncertainty => argmax(width, &queried, |n| {
                candidates.iter().map(|c| c.values()[n]).collect::<BTreeSet<_>>().len()
            }),
            QueryStrategy::GreedyDisambiguation => argmax(width, &queried, |n| {
                let truth = intended.values()[n];
                candidates.iter().filter(|c| c.values()[n] != truth).count()
            }),
            QueryStrategy::Random => {
                let open: Vec<usize> = (0..width).filter(|&n| !queried[n]).collect();
                open.choose(&mut rng).copied()
            }
        };
        // With two or more distinct candidates some unqueried output differs.
        let Some(position) = position else { break };
        let answer = intended.values()[position];
        let before = candidates.len();
        candidates.retain(|c| c.values()[position] == answer);
        queried[position] = true;
        queries.push(QueryRecord {
            position,
            answer,
            candidates_before: before,
            candidates_after: candidates.len(),
        });
    }
    Ok(QueryTrace {
        strategy,
        queries,
        identified: candidates.len() == 1,
        survivor: (candidates.len() == 1).then(|| candidates[0].clone()),
        bounds,
    })
}

/// Smallest unqueried index with the largest score.
fn argmax(width: usize, queried: &[bool], score: impl Fn(usize) -> usize) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for n in (0..width).filter(|&n| !queried[n]) {
        let s = score(n);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((n, s));
        }
    }
    best.map(|(n, _)| n)
}

/// Query counts for one strategy over a batch of seeds.
pub fn sweep_seeds(
    solutions: &[ConceptMapping],
    intended: &ConceptMapping,
    strategy: QueryStrategy,
    seeds: std::ops::Range<u64>,
    exec: Execution,
) -> Result<Vec<QueryTrace>> {
    par::map(exec, seeds.collect(), |seed| run_strategy(solutions, intended, strategy, seed))
        .into_iter()
        .collect()
}
