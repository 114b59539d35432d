//! Named problem instances with published expectations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;
use crate::model::{Concept, ConceptMapping, Constraint, MappingMode, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureName {
    FourNodeAddition,
    MnistHalf,
    ModuloSuccessor,
    MnistHalfPinned,
    FourNodeRepaired,
}

impl FixtureName {
    pub const ALL: [FixtureName; 5] = [
        FixtureName::FourNodeAddition,
        FixtureName::MnistHalf,
        FixtureName::ModuloSuccessor,
        FixtureName::MnistHalfPinned,
        FixtureName::FourNodeRepaired,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FixtureName::FourNodeAddition => "four-node-addition",
            FixtureName::MnistHalf => "mnist-half",
            FixtureName::ModuloSuccessor => "modulo-successor",
            FixtureName::MnistHalfPinned => "mnist-half-pinned",
            FixtureName::FourNodeRepaired => "four-node-repaired",
        }
    }
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FixtureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FixtureName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fixture `{s}`")))
    }
}

/// Expected shortcut multiplicity for one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub multiplicity: usize,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedFixture {
    pub name: FixtureName,
    pub problem: Problem,
    pub expected: BTreeMap<&'static str, Expectation>,
}

impl NamedFixture {
    pub fn expected_for(&self, mode: MappingMode) -> Option<Expectation> {
        self.expected.get(mode_key(mode)).copied()
    }
}

fn mode_key(mode: MappingMode) -> &'static str {
    match mode {
        MappingMode::Function => "function",
        MappingMode::Bijection => "bijection",
    }
}

pub fn fixture(name: FixtureName) -> NamedFixture {
    let exact = |k| Expectation {
        multiplicity: k,
        exact: true,
    };
    let (problem, expected): (Problem, Vec<(MappingMode, Expectation)>) = match name {
        FixtureName::FourNodeAddition => (four_node_addition(), vec![(MappingMode::Bijection, exact(7))]),
        FixtureName::MnistHalf => (
            mnist_half(),
            vec![(MappingMode::Function, exact(2)), (MappingMode::Bijection, exact(0))],
        ),
        FixtureName::ModuloSuccessor => (modulo_successor(), vec![(MappingMode::Bijection, exact(2))]),
        FixtureName::MnistHalfPinned => (
            mnist_half().with_constraints([Constraint::Pin {
                output: 2,
                concept: 2,
            }]),
            vec![(MappingMode::Function, exact(0)), (MappingMode::Bijection, exact(0))],
        ),
        // Pinning n1 fixes n2 through the sum; the {n0, n3} pair keeps two
        // orders under bijectivity and four pairs summing to 3 otherwise.
        FixtureName::FourNodeRepaired => (
            four_node_addition().with_constraints([Constraint::Pin {
                output: 1,
                concept: 1,
            }]),
            vec![(MappingMode::Function, exact(3)), (MappingMode::Bijection, exact(1))],
        ),
    };
    NamedFixture {
        name,
        problem,
        expected: expected.into_iter().map(|(m, e)| (mode_key(m), e)).collect(),
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

fn sum2(a: usize, b: usize, target: i64) -> Constraint {
    Constraint::WeightedSum {
        terms: vec![(a, 1), (b, 1)],
        target,
    }
}

fn identity(n: usize) -> ConceptMapping {
    ConceptMapping::new((0..n as Concept).collect())
}

/// Four outputs, digits 0..3, `n0 + n3 = 3` and `n1 + n2 = 3`.
pub fn four_node_addition() -> Problem {
    Problem::new(
        names(4),
        (0..4).collect(),
        vec![sum2(0, 3, 3), sum2(1, 2, 3)],
        identity(4),
    )
    .expect("well-formed fixture")
}

/// Five outputs, digits 0..4, four sum constraints.
pub fn mnist_half() -> Problem {
    Problem::new(
        names(5),
        (0..5).collect(),
        vec![sum2(0, 0, 0), sum2(0, 1, 1), sum2(2, 3, 5), sum2(2, 4, 6)],
        identity(5),
    )
    .expect("well-formed fixture")
}

/// Three outputs chained by successor modulo 3.
pub fn modulo_successor() -> Problem {
    let succ = |src, dst| Constraint::ModSucc {
        src,
        dst,
        modulus: 3,
    };
    Problem::new(names(3), (0..3).collect(), vec![succ(0, 1), succ(1, 2)], identity(3))
        .expect("well-formed fixture")
}
