//! Executable hardness reductions and the naive oracles they are checked
//! against.
//!
//! * CNF → problem: alternative valid bijections correspond one-to-one with
//!   satisfying assignments of the formula, so the shortcut multiplicity
//!   equals the model count.
//! * Set cover → minimal repair: pinning sets cover outputs, and the problem
//!   is shortcut-free exactly when every output is pinned.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Concept, ConceptMapping, Constraint, Literal, Problem};
use crate::par::{self, Execution};

/// A literal over variables numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CnfLiteral {
    pub var: usize,
    pub positive: bool,
}

impl CnfLiteral {
    pub fn pos(var: usize) -> Self {
        CnfLiteral { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        CnfLiteral { var, positive: false }
    }

    fn from_dimacs(v: i64) -> Self {
        CnfLiteral {
            var: v.unsigned_abs() as usize,
            positive: v > 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<CnfLiteral>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<CnfLiteral>>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidArgument(format!("clause {} is empty", i + 1)));
            }
            if let Some(l) = c.iter().find(|l| l.var == 0 || l.var > num_vars) {
                return Err(Error::InvalidArgument(format!(
                    "clause {} uses variable {} outside 1..={num_vars}",
                    i + 1,
                    l.var
                )));
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<CnfLiteral>] {
        &self.clauses
    }

    /// `assignment` bit `v-1` is the value of variable `v`.
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|l| ((assignment >> (l.var - 1)) & 1 == 1) == l.positive)
        })
    }
}

/// Reads the DIMACS CNF subset: `c` comments, one `p cnf <vars> <clauses>`
/// header, then zero-terminated clauses (which may span lines).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<CnfLiteral> = Vec::new();
    let bad = |line: usize, message: String| Error::Dimacs { line, message };
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(bad(no, "second problem line".into()));
            }
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| bad(no, format!("bad variable count `{v}`")))?;
                    let c = c.parse().map_err(|_| bad(no, format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(bad(no, "expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(bad(no, "clause before the problem line".into()));
        };
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| bad(no, format!("bad literal `{tok}`")))?;
            if v == 0 {
                if current.is_empty() {
                    return Err(bad(no, "empty clause".into()));
                }
                clauses.push(std::mem::take(&mut current));
            } else if v.unsigned_abs() as usize > vars {
                return Err(bad(no, format!("variable {} exceeds declared {vars}", v.unsigned_abs())));
            } else {
                current.push(CnfLiteral::from_dimacs(v));
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(bad(1, "missing `p cnf` problem line".into()));
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(bad(text.lines().count().max(1), format!("header declares {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses)
}

/// Variable count accepted by [`brute_force_sharp_sat`].
pub const SHARP_SAT_MAX_VARS: usize = 20;

/// Model count by trying every assignment.
pub fn brute_force_sharp_sat(formula: &CnfFormula) -> Result<u64> {
    brute_force_sharp_sat_with(formula, Execution::default())
}

pub fn brute_force_sharp_sat_with(formula: &CnfFormula, exec: Execution) -> Result<u64> {
    if formula.num_vars > SHARP_SAT_MAX_VARS {
        return Err(Error::ResourceLimit {
            required: 1u128 << formula.num_vars,
            limit: 1u128 << SHARP_SAT_MAX_VARS,
        });
    }
    Ok(par::sum_range(exec, 1u64 << formula.num_vars, |a| u64::from(formula.satisfied_by(a))))
}

/// Concept labels of the true and false values of variable slot `v`
/// (zero-based; the extra variable is slot `m`).
pub fn truth_concepts(v: usize) -> (Concept, Concept) {
    (2 * v as Concept, 2 * v as Concept + 1)
}

/// Builds the problem whose bijective shortcuts are the models of
/// `formula ∧ ¬y` for a fresh `y`.
///
/// Outputs `n{i}`/`nb{i}` stand for the literal pair of variable `i`
/// (`ny`/`nby` for `y`); a mapping encodes "variable true" when `n{i}` takes
/// the true concept. The intended mapping is the all-true assignment, which
/// falsifies `¬y`, and the alt clauses exempt it from the clause checks.
pub fn cnf_to_nsl(formula: &CnfFormula) -> Problem {
    let m = formula.num_vars;
    let mut outputs = Vec::with_capacity(2 * (m + 1));
    for v in 1..=m {
        outputs.push(format!("n{v}"));
        outputs.push(format!("nb{v}"));
    }
    outputs.push("ny".to_string());
    outputs.push("nby".to_string());
    let concepts: Vec<Concept> = (0..2 * (m + 1) as Concept).collect();
    // Slot v owns outputs 2v, 2v+1 and concepts 2v (true), 2v+1 (false).
    let intended = ConceptMapping::new(concepts.clone());
    let mut constraints: Vec<Constraint> = (0..=m)
        .map(|v| {
            let (t, f) = truth_concepts(v);
            Constraint::PairDomain {
                a: 2 * v,
                b: 2 * v + 1,
                values: [t, f],
            }
        })
        .collect();
    let literal = |l: &CnfLiteral| -> Literal {
        let slot = l.var - 1;
        let (t, f) = truth_concepts(slot);
        (2 * slot, if l.positive { t } else { f })
    };
    for clause in &formula.clauses {
        constraints.push(Constraint::AltClause(clause.iter().map(literal).collect()));
    }
    let (_, y_false) = truth_concepts(m);
    constraints.push(Constraint::AltClause(vec![(2 * m, y_false)]));
    Problem::new(outputs, concepts, constraints, intended)
        .expect("reduction output is well-formed")
        .with_metadata("reduction", "cnf")
}

/// Reads back the assignment a bijective mapping of [`cnf_to_nsl`] encodes,
/// as a bitmask over the original variables (bit `v-1`), plus the `y` value.
pub fn decode_assignment(m: usize, mapping: &ConceptMapping) -> (u64, bool) {
    let mut bits = 0u64;
    for v in 0..m {
        if mapping.values()[2 * v] == truth_concepts(v).0 {
            bits |= 1 << v;
        }
    }
    (bits, mapping.values()[2 * m] == truth_concepts(m).0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetCoverInstance {
    universe: Vec<String>,
    sets: Vec<Vec<usize>>,
}

impl SetCoverInstance {
    /// `sets` hold indices into `universe`.
    pub fn new(universe: Vec<String>, sets: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(s) = sets.iter().find(|s| s.iter().any(|&e| e >= universe.len())) {
            return Err(Error::InvalidArgument(format!("set {s:?} leaves the universe")));
        }
        let sets = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        Ok(SetCoverInstance { universe, sets })
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

/// Reads `universe <ids>` and `set <ids>` lines; `#` starts a comment.
pub fn parse_setcover(text: &str) -> Result<SetCoverInstance> {
    let mut universe: Option<Vec<String>> = None;
    let mut raw_sets: Vec<(usize, Vec<String>)> = Vec::new();
    let bad = |line: usize, message: String| Error::SetCoverFormat { line, message };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut words = line.split_whitespace();
        match words.next() {
            None => {}
            Some("universe") if universe.is_none() => universe = Some(words.map(String::from).collect()),
            Some("universe") => return Err(bad(i + 1, "universe declared twice".into())),
            Some("set") => raw_sets.push((i + 1, words.map(String::from).collect())),
            Some(other) => return Err(bad(i + 1, format!("unknown directive `{other}`"))),
        }
    }
    let universe = universe.ok_or_else(|| bad(1, "missing `universe` line".into()))?;
    let mut sets = Vec::new();
    for (line, names) in raw_sets {
        let idx = names
            .iter()
            .map(|n| {
                universe
                    .iter()
                    .position(|u| u == n)
                    .ok_or_else(|| bad(line, format!("`{n}` is not in the universe")))
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(idx);
    }
    SetCoverInstance::new(universe, sets)
}

/// Problem with one output per element, concepts `0..n`, no constraints and
/// the identity as intended mapping; the library pins each set's members.
/// The construction is meant for Function mode.
pub fn setcover_to_repair(inst: &SetCoverInstance) -> Result<(Problem, Vec<Vec<Literal>>)> {
    let n = inst.universe.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "the set cover construction needs a universe of at least 2 elements".into(),
        ));
    }
    let outputs = (0..n).map(|i| format!("n{i}")).collect();
    let concepts: Vec<Concept> = (0..n as Concept).collect();
    let p = Problem::new(outputs, concepts.clone(), Vec::new(), ConceptMapping::new(concepts))?
        .with_metadata("reduction", "setcover");
    let library = inst
        .sets
        .iter()
        .map(|s| s.iter().map(|&e| (e, e as Concept)).collect())
        .collect();
    Ok((p, library))
}

/// Set count accepted by [`brute_force_min_cover`].
pub const MIN_COVER_MAX_SETS: usize = 20;

/// Fewest sets covering the universe, or `None` when no cover exists.
pub fn brute_force_min_cover(inst: &SetCoverInstance) -> Result<Option<usize>> {
    let k = inst.sets.len();
    if k > MIN_COVER_MAX_SETS {
        return Err(Error::ResourceLimit {
            required: 1u128 << k,
            limit: 1u128 << MIN_COVER_MAX_SETS,
        });
    }
    let full: u64 = if inst.universe.is_empty() {
        0
    } else {
        (1u64 << inst.universe.len()) - 1
    };
    let masks: Vec<u64> = inst
        .sets
        .iter()
        .map(|s| s.iter().fold(0u64, |m, &e| m | 1 << e))
        .collect();
    let best = (0u32..1 << k)
        .filter(|choice| {
            let covered = (0..k)
                .filter(|i| choice >> i & 1 == 1)
                .fold(0u64, |m, i| m | masks[i]);
            covered == full
        })
        .map(|choice| choice.count_ones() as usize)
        .min();
    Ok(best)
}
