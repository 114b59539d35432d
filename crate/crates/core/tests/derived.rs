mod common;

use std::collections::BTreeSet;

use common::*;
use nsl_core::fixtures::{fixture, four_node_addition, modulo_successor, FixtureName};
use nsl_core::reductions::{
    brute_force_min_cover, brute_force_sharp_sat, cnf_to_nsl, decode_assignment, parse_dimacs,
    setcover_to_repair, CnfFormula, CnfLiteral, SetCoverInstance,
};
use nsl_core::repair::minimal_repair_bruteforce;
use nsl_core::structure::automorphism_group;
use nsl_core::{
    compose_value_permutation, enumerate_valid, is_valid, parse_problem, verify, ConceptMapping,
    DiagnosticKind, Literal, MappingMode, ValuePermutation, VerificationStatus, DEFAULT_CAP,
};

#[test]
fn fixture_expectations_hold() {
    for name in FixtureName::ALL {
        let f = fixture(name);
        for mode in [MappingMode::Function, MappingMode::Bijection] {
            let Some(want) = f.expected_for(mode) else { continue };
            assert!(is_valid(&f.problem, f.problem.intended(), mode).unwrap(), "{name} {mode}");
            let got = enumerate_valid(&f.problem, mode, DEFAULT_CAP, true).unwrap();
            assert_eq!(got.mappings.len(), want.multiplicity, "{name} {mode}");
            assert_eq!(got.mappings, naive_valid(&f.problem, mode).into_iter().filter(|m| m != f.problem.intended()).collect::<Vec<_>>());
            assert!(!got.saturated);
        }
    }
}

#[test]
fn four_node_automorphisms_by_exhaustion() {
    let p = four_node_addition();
    let sols = enumerate_valid(&p, MappingMode::Bijection, DEFAULT_CAP, false).unwrap();
    let members: BTreeSet<_> = sols.mappings.iter().cloned().collect();
    let domain = p.concepts().to_vec();
    let perms = permutations(&domain);
    assert_eq!(perms.len(), 24);
    let mut brute: Vec<String> = perms
        .into_iter()
        .map(|img| ValuePermutation::new(&domain, domain.iter().copied().zip(img).collect()).unwrap())
        .filter(|s| sols.mappings.iter().all(|phi| members.contains(&compose_value_permutation(s, phi).unwrap())))
        .map(|s| s.cycle_notation())
        .collect();
    brute.sort();
    // Every permutation preserving the complement pairs {0,3} and {1,2}:
    // swapping within a pair, or swapping the pairs themselves.
    assert_eq!(
        brute,
        vec!["(0 1 3 2)", "(0 1)(2 3)", "(0 2 3 1)", "(0 2)(1 3)", "(0 3)", "(0 3)(1 2)", "(1 2)", "id"]
    );
    // (0 1)(2 3) sends the intended mapping to a valid one.
    let swap = ValuePermutation::from_pairs(&domain, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
    assert!(members.contains(&compose_value_permutation(&swap, p.intended()).unwrap()));
    let g = automorphism_group(&sols).unwrap();
    let mut got: Vec<String> = g.elements.iter().map(|s| s.cycle_notation()).collect();
    got.sort();
    assert_eq!(got, brute);
    assert_eq!(g.order(), 8);
    assert!(g.is_transitive_on_solutions);
}

#[test]
fn modulo_successor_group_is_cyclic() {
    let sols = enumerate_valid(&modulo_successor(), MappingMode::Bijection, DEFAULT_CAP, false).unwrap();
    let g = automorphism_group(&sols).unwrap();
    assert_eq!(g.order(), 3);
    let sigma = g.elements.iter().find(|s| !s.is_identity()).unwrap();
    assert_eq!(sigma.compose(sigma).compose(sigma), ValuePermutation::identity(&[0, 1, 2]));
    assert!(g.is_transitive_on_solutions);
}

#[test]
fn four_node_minimal_repair_needs_two_pins() {
    let p = four_node_addition();
    let library: Vec<Vec<Literal>> = (0..4).map(|o| vec![(o, o as i64)]).collect();
    let best = minimal_repair_bruteforce(&p, &library, 4, MappingMode::Bijection).unwrap().unwrap();
    assert_eq!(best.len(), 2);
    // No single pin suffices: every output has another valid value.
    for pin in &library {
        let q = p.with_constraints([nsl_core::Constraint::PinSet(pin.clone())]);
        assert!(verify(&q, MappingMode::Bijection, DEFAULT_CAP).unwrap().status == VerificationStatus::ShortcutsFound);
    }
}

fn cnf(m: usize, clauses: &[&[i64]]) -> CnfFormula {
    let clauses = clauses
        .iter()
        .map(|c| c.iter().map(|&v| if v > 0 { CnfLiteral::pos(v as usize) } else { CnfLiteral::neg((-v) as usize) }).collect())
        .collect();
    CnfFormula::new(m, clauses).unwrap()
}

#[test]
fn fixed_counting_cases() {
    for (f, want) in [
        (cnf(2, &[&[1, 2]]), 3),
        (cnf(1, &[&[1], &[-1]]), 0),
        (cnf(1, &[&[1]]), 1),
        (cnf(2, &[]), 4),
    ] {
        assert_eq!(brute_force_sharp_sat(&f).unwrap(), want);
        let v = verify(&cnf_to_nsl(&f), MappingMode::Bijection, DEFAULT_CAP).unwrap();
        assert_eq!(v.shortcuts.len() as u64, want);
        assert_eq!(v.status == VerificationStatus::ShortcutFree, want == 0);
    }
}

#[test]
fn reduction_shortcuts_decode_to_models() {
    let mut r = rng(11);
    for _ in 0..30 {
        let f = random_cnf(&mut r, 4, 5);
        let p = cnf_to_nsl(&f);
        assert!(is_valid(&p, p.intended(), MappingMode::Bijection).unwrap());
        let m = f.num_vars();
        let shortcuts = verify(&p, MappingMode::Bijection, DEFAULT_CAP).unwrap().shortcuts;
        let decoded: BTreeSet<u64> = shortcuts
            .iter()
            .map(|s| {
                let (bits, y) = decode_assignment(m, s);
                assert!(!y);
                bits
            })
            .collect();
        assert_eq!(decoded.len(), shortcuts.len());
        let models: BTreeSet<u64> = (0..1u64 << m).filter(|&a| f.satisfied_by(a)).collect();
        assert_eq!(decoded, models);
    }
}

#[test]
fn dimacs_round_numbers() {
    let f = parse_dimacs("c demo\np cnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
    assert_eq!(f.num_vars(), 3);
    assert_eq!(f.clauses().len(), 2);
    // 8 assignments minus those with (x1=0, x2=1) or (x2=0, x3=0).
    assert_eq!(brute_force_sharp_sat(&f).unwrap(), 4);
}

fn three_element() -> SetCoverInstance {
    SetCoverInstance::new(
        vec!["u1".into(), "u2".into(), "u3".into()],
        vec![vec![0, 1], vec![1, 2], vec![2]],
    )
    .unwrap()
}

#[test]
fn set_cover_fixed_cases() {
    let inst = three_element();
    assert_eq!(brute_force_min_cover(&inst).unwrap(), Some(2));
    let (p, lib) = setcover_to_repair(&inst).unwrap();
    let best = minimal_repair_bruteforce(&p, &lib, lib.len(), MappingMode::Function).unwrap();
    assert_eq!(best, Some(vec![0, 1]));

    let whole = SetCoverInstance::new(vec!["a".into(), "b".into()], vec![vec![0, 1]]).unwrap();
    assert_eq!(brute_force_min_cover(&whole).unwrap(), Some(1));
    let (p, lib) = setcover_to_repair(&whole).unwrap();
    assert_eq!(minimal_repair_bruteforce(&p, &lib, 1, MappingMode::Function).unwrap(), Some(vec![0]));

    let gap = SetCoverInstance::new(vec!["a".into(), "b".into()], vec![vec![0]]).unwrap();
    assert_eq!(brute_force_min_cover(&gap).unwrap(), None);
    let (p, lib) = setcover_to_repair(&gap).unwrap();
    assert_eq!(minimal_repair_bruteforce(&p, &lib, 1, MappingMode::Function).unwrap(), None);

    let empty = SetCoverInstance::new(vec!["a".into(), "b".into()], vec![]).unwrap();
    assert_eq!(brute_force_min_cover(&empty).unwrap(), None);

    let single = SetCoverInstance::new(vec!["a".into()], vec![vec![0]]).unwrap();
    assert!(setcover_to_repair(&single).is_err());
}

#[test]
fn four_node_source_text() {
    let text = "\
outputs n0 n1 n2 n3
concepts 0 1 2 3
intended n0=0 n1=1 n2=2 n3=3
# sums of paired digits
constraint sum n0 + n3 = 3
constraint sum n1 + n2 = 3

";
    let p = parse_problem(text).into_result().unwrap();
    assert_eq!(p, four_node_addition());
    assert_eq!(p.constraints().len(), 2);
    assert_eq!(p.intended(), &ConceptMapping::new(vec![0, 1, 2, 3]));
}

#[test]
fn empty_file_reports_missing_intended() {
    let out = parse_problem("");
    assert!(out.problem.outputs().is_empty());
    assert!(out.problem.concepts().is_empty());
    assert!(out.problem.constraints().is_empty());
    assert_eq!(out.diagnostics.len(), 1);
    assert_eq!(out.diagnostics[0].kind, DiagnosticKind::Syntax);
}

#[test]
fn parser_collects_every_problem() {
    let text = "\
outputs a b
concepts 0 1
intended a=0 b=1 a=1
constraint sum nX = 3
constraint pin a = 7
constraint table ( a b ) { ( 0 ) }
constraint frob a
";
    let kinds: Vec<DiagnosticKind> = parse_problem(text).diagnostics.iter().map(|d| d.kind).collect();
    assert_eq!(
        kinds,
        vec![
            DiagnosticKind::DuplicateDeclaration,
            DiagnosticKind::UndefinedOutput,
            DiagnosticKind::OutOfDomainValue,
            DiagnosticKind::ArityMismatch,
            DiagnosticKind::Syntax,
        ]
    );
}
