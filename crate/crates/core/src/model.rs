//! Problem tuple, concept mappings, constraint semantics and the two value
//! actions (transposition and permutation composition).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

/// Concept labels are plain integers.
pub type Concept = i64;

/// `(output index, concept)` pair, used by pins, pin sets and alt clauses.
pub type Literal = (usize, Concept);

/// A total function from outputs to concepts, stored as the value vector in
/// the problem's output order. Ordering is lexicographic on that vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ConceptMapping(Vec<Concept>);

impl ConceptMapping {
    pub fn new(values: Vec<Concept>) -> Self {
        ConceptMapping(values)
    }

    pub fn values(&self) -> &[Concept] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Concept> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, output: usize) -> Option<Concept> {
        self.0.get(output).copied()
    }

    /// True when no concept value appears twice.
    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|v| seen.insert(*v))
    }

    /// Output positions where `self` and `other` differ.
    pub fn disagreement(&self, other: &ConceptMapping) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter_map(|(i, (a, b))| (a != b).then_some(i))
            .collect()
    }

    pub fn hamming(&self, other: &ConceptMapping) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<Concept>> for ConceptMapping {
    fn from(values: Vec<Concept>) -> Self {
        ConceptMapping(values)
    }
}

impl fmt::Display for ConceptMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MappingMode {
    /// Any total function N -> S.
    #[default]
    Function,
    /// Each concept used exactly once; requires |N| = |S|.
    Bijection,
}

impl fmt::Display for MappingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingMode::Function => write!(f, "function"),
            MappingMode::Bijection => write!(f, "bijection"),
        }
    }
}

/// The closed set of constraint kinds. Outputs are referenced by their index
/// in [`Problem::outputs`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "args", rename_all = "kebab-case")]
pub enum Constraint {
    /// `sum(coef * phi(output)) = target`. Outputs may repeat.
    WeightedSum { terms: Vec<(usize, i64)>, target: i64 },
    /// `phi(dst) = phi(src) + 1 (mod modulus)`.
    ModSucc { src: usize, dst: usize, modulus: i64 },
    Pin { output: usize, concept: Concept },
    Domain { output: usize, allowed: BTreeSet<Concept> },
    /// Both outputs take values in the two-element set.
    PairDomain { a: usize, b: usize, values: [Concept; 2] },
    Table { outputs: Vec<usize>, allowed: BTreeSet<Vec<Concept>> },
    /// Conjunction of pins.
    PinSet(Vec<Literal>),
    /// Holds when the mapping equals the intended one, or any literal holds.
    AltClause(Vec<Literal>),
}

impl Constraint {
    /// Output indices referenced by the constraint, with repeats, in
    /// declaration order.
    pub fn outputs(&self) -> Vec<usize> {
        match self {
            Constraint::WeightedSum { terms, .. } => terms.iter().map(|(o, _)| *o).collect(),
            Constraint::ModSucc { src, dst, .. } => vec![*src, *dst],
            Constraint::Pin { output, .. } | Constraint::Domain { output, .. } => vec![*output],
            Constraint::PairDomain { a, b, .. } => vec![*a, *b],
            Constraint::Table { outputs, .. } => outputs.clone(),
            Constraint::PinSet(lits) | Constraint::AltClause(lits) => {
                lits.iter().map(|(o, _)| *o).collect()
            }
        }
    }

    /// Sorted, deduplicated output indices.
    pub fn scope(&self) -> Vec<usize> {
        let mut s = self.outputs();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Constraint::WeightedSum { .. } => "sum",
            Constraint::ModSucc { .. } => "modsucc",
            Constraint::Pin { .. } => "pin",
            Constraint::Domain { .. } => "domain",
            Constraint::PairDomain { .. } => "pairdomain",
            Constraint::Table { .. } => "table",
            Constraint::PinSet(_) => "pinset",
            Constraint::AltClause(_) => "altclause",
        }
    }

    /// Checks the per-kind shape invariants.
    pub fn check_shape(&self) -> Result<(), ModelError> {
        match self {
            Constraint::WeightedSum { terms, .. } if terms.is_empty() => {
                Err(ModelError::MalformedConstraint("weighted sum without terms".into()))
            }
            Constraint::ModSucc { modulus, .. } if *modulus < 2 => Err(
                ModelError::MalformedConstraint(format!("modulus {modulus} is below 2")),
            ),
            Constraint::Table { outputs, allowed } => {
                match allowed.iter().find(|t| t.len() != outputs.len()) {
                    Some(t) => Err(ModelError::MalformedConstraint(format!(
                        "table tuple of arity {} for {} outputs",
                        t.len(),
                        outputs.len()
                    ))),
                    None => Ok(()),
                }
            }
            Constraint::AltClause(lits) if lits.is_empty() => {
                Err(ModelError::MalformedConstraint("alt clause without literals".into()))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the constraint on a full value vector. Every referenced
    /// output must be in range; callers check that.
    pub(crate) fn holds(&self, values: &[Concept], intended: &[Concept]) -> bool {
        match self {
            Constraint::WeightedSum { terms, target } => {
                let sum: i128 = terms
                    .iter()
                    .map(|(o, c)| i128::from(*c) * i128::from(values[*o]))
                    .sum();
                sum == i128::from(*target)
            }
            Constraint::ModSucc { src, dst, modulus } => {
                (i128::from(values[*dst]) - i128::from(values[*src]) - 1).rem_euclid(i128::from(*modulus)) == 0
            }
            Constraint::Pin { output, concept } => values[*output] == *concept,
            Constraint::Domain { output, allowed } => allowed.contains(&values[*output]),
            Constraint::PairDomain { a, b, values: pair } => {
                pair.contains(&values[*a]) && pair.contains(&values[*b])
            }
            Constraint::Table { outputs, allowed } => {
                let tuple: Vec<Concept> = outputs.iter().map(|o| values[*o]).collect();
                allowed.contains(&tuple)
            }
            Constraint::PinSet(lits) => lits.iter().all(|(o, c)| values[*o] == *c),
            Constraint::AltClause(lits) => {
                values == intended || lits.iter().any(|(o, c)| values[*o] == *c)
            }
        }
    }
}

/// Truth of `c` under `mapping`, with `intended` used by the alt guard.
pub fn evaluate_constraint(
    c: &Constraint,
    mapping: &ConceptMapping,
    intended: &ConceptMapping,
) -> Result<bool, ModelError> {
    if mapping.len() != intended.len() {
        return Err(ModelError::LengthMismatch {
            expected: intended.len(),
            found: mapping.len(),
        });
    }
    if let Some(o) = c.outputs().into_iter().find(|o| *o >= mapping.len()) {
        return Err(ModelError::UnknownOutput(o));
    }
    Ok(c.holds(mapping.values(), intended.values()))
}

/// The problem tuple `(N, S, C, intended, metadata)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    outputs: Vec<String>,
    concepts: Vec<Concept>,
    constraints: Vec<Constraint>,
    intended: ConceptMapping,
    metadata: BTreeMap<String, String>,
}

impl Problem {
    /// Builds a problem and checks all invariants.
    pub fn new(
        outputs: Vec<String>,
        concepts: Vec<Concept>,
        constraints: Vec<Constraint>,
        intended: ConceptMapping,
    ) -> Result<Self, ModelError> {
        let p = Problem {
            outputs,
            concepts,
            constraints,
            intended,
            metadata: BTreeMap::new(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Assembles a problem without validation; the parser uses this to hand
    /// back a best-effort result alongside diagnostics.
    pub(crate) fn from_parts_unchecked(
        outputs: Vec<String>,
        concepts: Vec<Concept>,
        constraints: Vec<Constraint>,
        intended: ConceptMapping,
        metadata: BTreeMap<String, String>,
    ) -> Self {
        Problem {
            outputs,
            concepts,
            constraints,
            intended,
            metadata,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = BTreeSet::new();
        for n in &self.outputs {
            if !names.insert(n.as_str()) {
                return Err(ModelError::DuplicateOutput(n.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for s in &self.concepts {
            if !seen.insert(*s) {
                return Err(ModelError::DuplicateConcept(*s));
            }
        }
        if self.intended.len() != self.outputs.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.outputs.len(),
                found: self.intended.len(),
            });
        }
        if let Some(v) = self.intended.values().iter().find(|v| !seen.contains(v)) {
            return Err(ModelError::ConceptOutOfDomain(*v));
        }
        for c in &self.constraints {
            c.check_shape()?;
            if let Some(o) = c.outputs().into_iter().find(|o| *o >= self.outputs.len()) {
                return Err(ModelError::UnknownOutput(o));
            }
        }
        Ok(())
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn intended(&self) -> &ConceptMapping {
        &self.intended
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|n| n == name)
    }

    pub fn output_name(&self, index: usize) -> &str {
        &self.outputs[index]
    }

    /// A copy of the problem with `extra` appended to the constraint list.
    pub fn with_constraints(&self, extra: impl IntoIterator<Item = Constraint>) -> Problem {
        let mut p = self.clone();
        p.constraints.extend(extra);
        p
    }

    /// Checks whether Bijection mode is legal for this problem.
    pub fn check_mode(&self, mode: MappingMode) -> Result<(), ModelError> {
        match mode {
            MappingMode::Bijection if self.outputs.len() != self.concepts.len() => {
                Err(ModelError::BijectionSize {
                    outputs: self.outputs.len(),
                    concepts: self.concepts.len(),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Membership in the valid set under `mode`.
pub fn is_valid(p: &Problem, mapping: &ConceptMapping, mode: MappingMode) -> Result<bool, ModelError> {
    if mapping.len() != p.outputs.len() {
        return Err(ModelError::LengthMismatch {
            expected: p.outputs.len(),
            found: mapping.len(),
        });
    }
    for c in &p.constraints {
        if !evaluate_constraint(c, mapping, &p.intended)? {
            return Ok(false);
        }
    }
    Ok(match mode {
        MappingMode::Function => true,
        MappingMode::Bijection => {
            let used: BTreeSet<Concept> = mapping.values().iter().copied().collect();
            let domain: BTreeSet<Concept> = p.concepts.iter().copied().collect();
            mapping.len() == domain.len() && used == domain
        }
    })
}

/// Swaps two concept values everywhere in the mapping.
pub fn apply_transposition(
    mapping: &ConceptMapping,
    a: Concept,
    b: Concept,
) -> Result<ConceptMapping, ModelError> {
    if a == b {
        return Err(ModelError::InvalidArgument(format!(
            "transposition needs two distinct concepts, got {a} twice"
        )));
    }
    Ok(ConceptMapping(
        mapping
            .0
            .iter()
            .map(|&v| match v {
                v if v == a => b,
                v if v == b => a,
                v => v,
            })
            .collect(),
    ))
}

/// A permutation of the concept domain, stored as a total map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ValuePermutation(BTreeMap<Concept, Concept>);

impl ValuePermutation {
    /// Validates that `map` is a bijection on `domain`.
    pub fn new(domain: &[Concept], map: BTreeMap<Concept, Concept>) -> Result<Self, ModelError> {
        let dom: BTreeSet<Concept> = domain.iter().copied().collect();
        let keys: BTreeSet<Concept> = map.keys().copied().collect();
        let image: BTreeSet<Concept> = map.values().copied().collect();
        if keys != dom || image != dom {
            return Err(ModelError::InvalidArgument(
                "value permutation is not a bijection on the concept domain".into(),
            ));
        }
        Ok(ValuePermutation(map))
    }

    pub fn from_pairs(domain: &[Concept], pairs: &[(Concept, Concept)]) -> Result<Self, ModelError> {
        Self::new(domain, pairs.iter().copied().collect())
    }

    pub fn identity(domain: &[Concept]) -> Self {
        ValuePermutation(domain.iter().map(|&s| (s, s)).collect())
    }

    pub fn apply(&self, s: Concept) -> Concept {
        self.0.get(&s).copied().unwrap_or(s)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|(k, v)| k == v)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &ValuePermutation) -> ValuePermutation {
        ValuePermutation(other.0.iter().map(|(&k, &v)| (k, self.apply(v))).collect())
    }

    pub fn inverse(&self) -> ValuePermutation {
        ValuePermutation(self.0.iter().map(|(&k, &v)| (v, k)).collect())
    }

    pub fn as_map(&self) -> &BTreeMap<Concept, Concept> {
        &self.0
    }

    /// Cycle notation over non-fixed points, e.g. `(0 1 2)(3 4)`; `id` for
    /// the identity.
    pub fn cycle_notation(&self) -> String {
        let mut seen = BTreeSet::new();
        let mut out = String::new();
        for &start in self.0.keys() {
            if seen.contains(&start) || self.apply(start) == start {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut cur = self.apply(start);
            while cur != start {
                seen.insert(cur);
                cycle.push(cur);
                cur = self.apply(cur);
            }
            let parts: Vec<String> = cycle.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("({})", parts.join(" ")));
        }
        if out.is_empty() {
            "id".into()
        } else {
            out
        }
    }
}

/// `sigma ∘ mapping`, position-wise.
pub fn compose_value_permutation(
    sigma: &ValuePermutation,
    mapping: &ConceptMapping,
) -> Result<ConceptMapping, ModelError> {
    mapping
        .0
        .iter()
        .map(|v| {
            sigma.0.get(v).copied().ok_or_else(|| {
                ModelError::InvalidArgument(format!("permutation is undefined on concept {v}"))
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ConceptMapping)
}
