#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Write as _;
use std::process::{Command, Stdio};

use nsl_core::reductions::{CnfFormula, CnfLiteral, SetCoverInstance};
use nsl_core::{Concept, ConceptMapping, Constraint, Literal, MappingMode, Problem};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Constraint semantics written out again, independently of the library.
pub fn oracle_holds(c: &Constraint, v: &[Concept], intended: &[Concept]) -> bool {
    match c {
        Constraint::WeightedSum { terms, target } => {
            terms.iter().map(|&(o, k)| k as i128 * v[o] as i128).sum::<i128>() == *target as i128
        }
        Constraint::ModSucc { src, dst, modulus } => {
            let m = *modulus as i128;
            ((v[*src] as i128 + 1) % m + m) % m == ((v[*dst] as i128) % m + m) % m
        }
        Constraint::Pin { output, concept } => v[*output] == *concept,
        Constraint::Domain { output, allowed } => allowed.iter().any(|x| *x == v[*output]),
        Constraint::PairDomain { a, b, values } => {
            (v[*a] == values[0] || v[*a] == values[1]) && (v[*b] == values[0] || v[*b] == values[1])
        }
        Constraint::Table { outputs, allowed } => allowed
            .iter()
            .any(|row| row.iter().zip(outputs).all(|(x, &o)| v[o] == *x)),
        Constraint::PinSet(lits) => lits.iter().all(|&(o, x)| v[o] == x),
        Constraint::AltClause(lits) => v == intended || lits.iter().any(|&(o, x)| v[o] == x),
    }
}

/// Every mapping in `concepts^n` (or every bijection) satisfying all
/// constraints under [`oracle_holds`], sorted. Pure filtering.
pub fn naive_valid(p: &Problem, mode: MappingMode) -> Vec<ConceptMapping> {
    let n = p.outputs().len();
    let k = p.concepts().len();
    let mut out = Vec::new();
    if n > 0 && k == 0 {
        return out;
    }
    let mut idx = vec![0usize; n];
    loop {
        let m = ConceptMapping::new(idx.iter().map(|&i| p.concepts()[i]).collect());
        let shape_ok = mode == MappingMode::Function || m.is_injective();
        let iv = p.intended().values();
        if shape_ok && p.constraints().iter().all(|c| oracle_holds(c, m.values(), iv)) {
            out.push(m);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                out.sort();
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// All permutations of `items`, by Heap's algorithm.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    fn heap<T: Clone>(k: usize, a: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    heap(a.len(), &mut a, &mut out);
    out
}

pub const ALL_KINDS: [&str; 8] = [
    "sum", "modsucc", "pin", "domain", "pairdomain", "table", "pinset", "altclause",
];

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_outputs: usize,
    pub max_concepts: usize,
    /// Upper bound on `|S|^|N|`.
    pub space_limit: u64,
    pub bijective: bool,
    pub max_constraints: usize,
    /// Probability that a generated constraint is built to hold at the
    /// intended mapping.
    pub consistent: f64,
    pub kinds: Vec<&'static str>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_outputs: 5,
            max_concepts: 5,
            space_limit: 100_000,
            bijective: false,
            max_constraints: 4,
            consistent: 0.75,
            kinds: ALL_KINDS.to_vec(),
        }
    }
}

fn pow(k: usize, n: usize) -> u64 {
    (k as u64).saturating_pow(n as u32)
}

pub fn random_problem(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Problem {
    let (n, k) = loop {
        let n = rng.gen_range(1..=cfg.max_outputs);
        let k = if cfg.bijective { n } else { rng.gen_range(1..=cfg.max_concepts) };
        if pow(k, n) <= cfg.space_limit && (!cfg.bijective || k <= cfg.max_concepts) {
            break (n, k);
        }
    };
    let base: Concept = if rng.gen_bool(0.3) { rng.gen_range(-3..=2) } else { 0 };
    let mut pool: Vec<Concept> = (base..base + 2 * k as Concept).collect();
    let concepts: Vec<Concept> = if rng.gen_bool(0.5) {
        (base..base + k as Concept).collect()
    } else {
        pool.shuffle(rng);
        let mut c = pool[..k].to_vec();
        c.sort_unstable();
        c
    };
    let intended: Vec<Concept> = if cfg.bijective {
        let mut c = concepts.clone();
        c.shuffle(rng);
        c
    } else {
        (0..n).map(|_| *concepts.choose(rng).unwrap()).collect()
    };
    let count = rng.gen_range(0..=cfg.max_constraints);
    let constraints = (0..count)
        .map(|_| {
            let kind = *cfg.kinds.choose(rng).unwrap();
            random_constraint(rng, kind, &concepts, &intended, cfg.consistent)
        })
        .collect();
    let outputs = (0..n).map(|i| format!("n{i}")).collect();
    Problem::new(outputs, concepts, constraints, ConceptMapping::new(intended)).unwrap()
}

pub fn random_constraint(
    rng: &mut ChaCha8Rng,
    kind: &str,
    concepts: &[Concept],
    intended: &[Concept],
    consistent: f64,
) -> Constraint {
    let n = intended.len();
    let keep = rng.gen_bool(consistent);
    let any_concept = |rng: &mut ChaCha8Rng| *concepts.choose(rng).unwrap();
    let literals = |rng: &mut ChaCha8Rng, keep: bool, max: usize| -> Vec<Literal> {
        let len = rng.gen_range(1..=max.min(n).max(1));
        (0..len)
            .map(|_| {
                let o = rng.gen_range(0..n);
                (o, if keep { intended[o] } else { *concepts.choose(rng).unwrap() })
            })
            .collect()
    };
    match kind {
        "sum" => {
            let terms: Vec<(usize, i64)> = (0..rng.gen_range(1..=3))
                .map(|_| (rng.gen_range(0..n), rng.gen_range(-2..=3)))
                .collect();
            let at_intended: i64 = terms.iter().map(|(o, c)| c * intended[*o]).sum();
            let target = if keep { at_intended } else { at_intended + rng.gen_range(-3..=3) };
            Constraint::WeightedSum { terms, target }
        }
        "modsucc" => {
            let modulus = rng.gen_range(2..=4);
            let src = rng.gen_range(0..n);
            let dst = rng.gen_range(0..n);
            Constraint::ModSucc { src, dst, modulus }
        }
        "pin" => {
            let output = rng.gen_range(0..n);
            let concept = if keep { intended[output] } else { any_concept(rng) };
            Constraint::Pin { output, concept }
        }
        "domain" => {
            let output = rng.gen_range(0..n);
            let mut allowed: BTreeSet<Concept> =
                (0..rng.gen_range(1..=concepts.len())).map(|_| any_concept(rng)).collect();
            if keep {
                allowed.insert(intended[output]);
            }
            Constraint::Domain { output, allowed }
        }
        "pairdomain" => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let values = if keep {
                [intended[a], intended[b]]
            } else {
                [any_concept(rng), any_concept(rng)]
            };
            Constraint::PairDomain { a, b, values }
        }
        "table" => {
            let width = rng.gen_range(1..=n.min(3));
            let mut outputs: Vec<usize> = (0..n).collect();
            outputs.shuffle(rng);
            outputs.truncate(width);
            let mut allowed: BTreeSet<Vec<Concept>> = (0..rng.gen_range(1..=4))
                .map(|_| (0..width).map(|_| any_concept(rng)).collect())
                .collect();
            if keep {
                allowed.insert(outputs.iter().map(|&o| intended[o]).collect());
            }
            Constraint::Table { outputs, allowed }
        }
        "pinset" => Constraint::PinSet(literals(rng, keep, 2)),
        "altclause" => Constraint::AltClause(literals(rng, false, 3)),
        other => panic!("unknown kind {other}"),
    }
}

pub fn random_cnf(rng: &mut ChaCha8Rng, max_vars: usize, max_clauses: usize) -> CnfFormula {
    let m = rng.gen_range(1..=max_vars);
    let clauses = (0..rng.gen_range(0..=max_clauses))
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| {
                    let var = rng.gen_range(1..=m);
                    if rng.gen_bool(0.5) { CnfLiteral::pos(var) } else { CnfLiteral::neg(var) }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(m, clauses).unwrap()
}

pub fn random_setcover(rng: &mut ChaCha8Rng, max_universe: usize, max_sets: usize) -> SetCoverInstance {
    let n = rng.gen_range(2..=max_universe);
    let universe: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    let sets = (0..rng.gen_range(0..=max_sets))
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    SetCoverInstance::new(universe, sets).unwrap()
}

/// Answer-set solver from `NSL_ASP_SOLVER`, else `clingo` if it runs.
pub fn asp_solver() -> Option<String> {
    if let Ok(path) = std::env::var("NSL_ASP_SOLVER") {
        return Some(path);
    }
    Command::new("clingo")
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .ok()
        .filter(|s| s.success())
        .map(|_| "clingo".to_string())
}

pub fn count_answer_sets(solver: &str, program: &str) -> Result<usize, String> {
    let mut child = Command::new(solver)
        .args(["--models=0", "--quiet=2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(program.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix("Models").and_then(|rest| rest.trim_start_matches([' ', ':']).split_whitespace().next()))
        .map(|n| n.trim_end_matches('+').parse().map_err(|e| format!("{e}")))
        .unwrap_or_else(|| Err(format!("no model count in solver output: {text}")))
}
