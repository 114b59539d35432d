//! Structural explanations for shortcuts: the constraint graph, the
//! discrimination (single transposition) test and the value-automorphism
//! group of a bijective solution set.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::enumerate::SolutionSet;
use crate::error::{Error, Result};
use crate::model::{
    apply_transposition, compose_value_permutation, Concept, ConceptMapping, MappingMode, Problem,
    ValuePermutation,
};
use crate::par::{self, Execution};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintGraph {
    pub vertices: Vec<String>,
    /// Index pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Each component sorted; components ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }
}

/// Outputs are adjacent when some constraint mentions both.
pub fn constraint_graph(p: &Problem) -> ConstraintGraph {
    let n = p.outputs().len();
    let mut edges = BTreeSet::new();
    for c in p.constraints() {
        let scope = c.scope();
        for (k, &i) in scope.iter().enumerate() {
            for &j in &scope[k + 1..] {
                edges.insert((i, j));
            }
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if slot[r] == usize::MAX {
            slot[r] = components.len();
            components.push(Vec::new());
        }
        components[slot[r]].push(v);
    }
    ConstraintGraph {
        vertices: p.outputs().to_vec(),
        edges: edges.into_iter().collect(),
        components,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranspositionWitness {
    pub mapping: ConceptMapping,
    pub pair: (Concept, Concept),
    pub transposed: ConceptMapping,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscriminationReport {
    pub discriminative: bool,
    pub violating_witness: Option<TranspositionWitness>,
}

/// Looks for a valid mapping whose image under one concept transposition is
/// a different valid mapping. A transposition of two values the mapping does
/// not use leaves it unchanged and is not a witness.
///
/// The witness is the first valid mapping (lexicographically) that has one,
/// paired with its smallest transposed image.
pub fn check_discrimination(p: &Problem, solutions: &SolutionSet) -> Result<DiscriminationReport> {
    if solutions.saturated {
        return Err(Error::Precondition(
            "discrimination needs the complete valid set, but the enumeration hit its cap".into(),
        ));
    }
    let members: HashSet<&ConceptMapping> = solutions.mappings.iter().collect();
    let mut concepts = p.concepts().to_vec();
    concepts.sort_unstable();
    for phi in &solutions.mappings {
        let mut best: Option<TranspositionWitness> = None;
        for (i, &a) in concepts.iter().enumerate() {
            for &b in &concepts[i + 1..] {
                let t = apply_transposition(phi, a, b)?;
                if &t != phi && members.contains(&t) && best.as_ref().is_none_or(|w| t < w.transposed) {
                    best = Some(TranspositionWitness {
                        mapping: phi.clone(),
                        pair: (a, b),
                        transposed: t,
                    });
                }
            }
        }
        if best.is_some() {
            return Ok(DiscriminationReport {
                discriminative: false,
                violating_witness: best,
            });
        }
    }
    Ok(DiscriminationReport {
        discriminative: true,
        violating_witness: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutomorphismWitness {
    pub permutation: ValuePermutation,
    pub cycles: String,
    pub from: ConceptMapping,
    pub to: ConceptMapping,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutomorphismReport {
    /// Sorted; always contains the identity.
    pub elements: Vec<ValuePermutation>,
    pub is_trivial: bool,
    pub is_transitive_on_solutions: bool,
    /// One solution pair per non-identity element.
    pub witnesses: Vec<AutomorphismWitness>,
}

impl AutomorphismReport {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Value permutations mapping the solution set onto itself.
pub fn automorphism_group(solutions: &SolutionSet) -> Result<AutomorphismReport> {
    automorphism_group_with(solutions, Execution::default())
}

pub fn automorphism_group_with(solutions: &SolutionSet, exec: Execution) -> Result<AutomorphismReport> {
    if solutions.saturated {
        return Err(Error::Precondition(
            "automorphisms need the complete valid set, but the enumeration hit its cap".into(),
        ));
    }
    let base = solutions
        .mappings
        .first()
        .ok_or_else(|| Error::Precondition("automorphisms need at least one bijective solution".into()))?;
    let domain: BTreeSet<Concept> = base.values().iter().copied().collect();
    let bijective = |m: &ConceptMapping| {
        m.len() == base.len() && m.is_injective() && m.values().iter().all(|v| domain.contains(v))
    };
    if solutions.mode != MappingMode::Bijection || !solutions.mappings.iter().all(bijective) {
        return Err(Error::Precondition("automorphisms are defined on bijective solution sets only".into()));
    }
    let domain: Vec<Concept> = domain.into_iter().collect();
    let members: HashSet<&ConceptMapping> = solutions.mappings.iter().collect();

    // Any automorphism sends `base` to some solution, and that image fixes
    // the permutation, so these are the only candidates.
    let candidates: Vec<ValuePermutation> = solutions
        .mappings
        .iter()
        .map(|target| {
            let pairs: Vec<(Concept, Concept)> =
                base.values().iter().copied().zip(target.values().iter().copied()).collect();
            ValuePermutation::from_pairs(&domain, &pairs)
        })
        .collect::<std::result::Result<_, _>>()?;
    let keep = par::map(exec, candidates, |sigma| {
        let ok = solutions.mappings.iter().all(|phi| {
            compose_value_permutation(&sigma, phi).is_ok_and(|img| members.contains(&img))
        });
        ok.then_some(sigma)
    });
    let mut elements: Vec<ValuePermutation> = keep.into_iter().flatten().collect();
    elements.sort();

    let set: HashSet<&ValuePermutation> = elements.iter().collect();
    let closed = elements.iter().all(|a| {
        set.contains(&a.inverse()) && elements.iter().all(|b| set.contains(&a.compose(b)))
    });
    if !closed || !elements.iter().any(ValuePermutation::is_identity) {
        return Err(Error::Precondition("automorphism candidates do not form a group".into()));
    }

    let witnesses = elements
        .iter()
        .filter(|s| !s.is_identity())
        .map(|s| {
            Ok(AutomorphismWitness {
                permutation: s.clone(),
                cycles: s.cycle_notation(),
                from: base.clone(),
                to: compose_value_permutation(s, base)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AutomorphismReport {
        is_trivial: elements.len() == 1,
        is_transitive_on_solutions: elements.len() == solutions.mappings.len(),
        elements,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_valid, DEFAULT_CAP};
    use crate::fixtures;
    use crate::model::Constraint;

    fn m(v: &[Concept]) -> ConceptMapping {
        ConceptMapping::new(v.to_vec())
    }

    fn all_bij(p: &Problem) -> SolutionSet {
        enumerate_valid(p, MappingMode::Bijection, DEFAULT_CAP, false).unwrap()
    }

    #[test]
    fn graph_components() {
        let g = constraint_graph(&fixtures::four_node_addition());
        assert_eq!(g.components, vec![vec![0, 3], vec![1, 2]]);
        let g = constraint_graph(&fixtures::mnist_half());
        assert_eq!(g.components, vec![vec![0, 1], vec![2, 3, 4]]);
        let g = constraint_graph(&fixtures::modulo_successor());
        assert_eq!(g.components, vec![vec![0, 1, 2]]);
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn unary_constraints_add_no_edges() {
        let p = Problem::new(
            vec!["a".into(), "b".into()],
            vec![0, 1],
            vec![
                Constraint::Pin { output: 0, concept: 0 },
                Constraint::WeightedSum { terms: vec![(1, 1), (1, 1)], target: 2 },
            ],
            m(&[0, 1]),
        )
        .unwrap();
        let g = constraint_graph(&p);
        assert!(g.edges.is_empty());
        assert_eq!(g.components.len(), 2);
    }

    #[test]
    fn modulo_successor_is_discriminative() {
        let p = fixtures::modulo_successor();
        let r = check_discrimination(&p, &all_bij(&p)).unwrap();
        assert!(r.discriminative);
        assert!(r.violating_witness.is_none());
    }

    #[test]
    fn four_node_is_not_discriminative() {
        let p = fixtures::four_node_addition();
        let r = check_discrimination(&p, &all_bij(&p)).unwrap();
        assert!(!r.discriminative);
        let w = r.violating_witness.unwrap();
        assert_eq!(w.mapping, m(&[0, 1, 2, 3]));
        assert_eq!(w.pair, (1, 2));
        assert_eq!(w.transposed, m(&[0, 2, 1, 3]));
    }

    #[test]
    fn saturated_input_is_refused() {
        let p = fixtures::four_node_addition();
        let set = enumerate_valid(&p, MappingMode::Bijection, 2, false).unwrap();
        assert!(check_discrimination(&p, &set).is_err());
        assert!(automorphism_group(&set).is_err());
    }

    #[test]
    fn modulo_successor_group_is_cyclic_of_order_three() {
        let r = automorphism_group(&all_bij(&fixtures::modulo_successor())).unwrap();
        assert_eq!(r.order(), 3);
        assert!(r.is_transitive_on_solutions);
        let cycles: Vec<String> = r.witnesses.iter().map(|w| w.cycles.clone()).collect();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.contains(&"(0 1 2)".to_string()));
        assert!(cycles.contains(&"(0 2 1)".to_string()));
    }

    #[test]
    fn singleton_group_is_trivial() {
        let r = automorphism_group(&all_bij(&fixtures::mnist_half())).unwrap();
        assert!(r.is_trivial);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn function_mode_rejected() {
        let p = fixtures::mnist_half();
        let set = enumerate_valid(&p, MappingMode::Function, DEFAULT_CAP, false).unwrap();
        assert!(automorphism_group(&set).is_err());
    }
}
