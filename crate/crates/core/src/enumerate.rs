//! Backtracking enumeration of valid mappings.
//!
//! Outputs are assigned depth-first in declaration order and concept values
//! are tried in ascending numeric order, so solutions come out in
//! lexicographic order without sorting. Propagation:
//!
//! * unary conditions (pins, domains, pair domains, pin sets and any
//!   constraint touching a single output) prune domains before the search;
//! * a constraint whose outputs are all assigned but one filters that last
//!   output's domain (forward checking);
//! * tables reject assignments whose prefix matches no allowed tuple;
//! * bijection mode tracks the set of used concepts.
//!
//! Alt clauses compare whole mappings and are only checked on complete
//! assignments, as is exclusion of the intended mapping.

use serde::Serialize;

use crate::error::Result;
use crate::model::{Concept, ConceptMapping, Constraint, MappingMode, Problem};
use crate::par::{self, Execution};

/// Model cap used when the caller gives none.
pub const DEFAULT_CAP: usize = 10_000;

/// Enumerated valid mappings plus the truncation flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub mappings: Vec<ConceptMapping>,
    /// More than `cap` valid mappings exist; `mappings` holds the first `cap`.
    pub saturated: bool,
    pub mode: MappingMode,
    pub cap: usize,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        !self.saturated
    }

    pub fn contains(&self, m: &ConceptMapping) -> bool {
        self.mappings.binary_search(m).is_ok()
    }
}

/// All valid mappings in lexicographic order, truncated at `cap`.
pub fn enumerate_valid(
    p: &Problem,
    mode: MappingMode,
    cap: usize,
    exclude_intended: bool,
) -> Result<SolutionSet> {
    enumerate_valid_with(p, mode, cap, exclude_intended, Execution::default())
}

pub fn enumerate_valid_with(
    p: &Problem,
    mode: MappingMode,
    cap: usize,
    exclude_intended: bool,
    exec: Execution,
) -> Result<SolutionSet> {
    if cap == 0 {
        return Err(crate::Error::InvalidArgument("model cap must be at least 1".into()));
    }
    p.validate()?;
    p.check_mode(mode)?;
    let search = Search::compile(p, mode, exclude_intended);
    let limit = cap.saturating_add(1);
    let mut found = search.run(limit, exec);
    let saturated = found.len() > cap;
    found.truncate(cap);
    Ok(SolutionSet {
        mappings: found,
        saturated,
        mode,
        cap,
    })
}

/// Number of valid mappings, stopping once `limit` are found.
pub(crate) fn count_up_to(p: &Problem, mode: MappingMode, limit: usize, exclude_intended: bool) -> usize {
    Search::compile(p, mode, exclude_intended)
        .run(limit, Execution::Sequential)
        .len()
}

type Domains = Vec<Vec<bool>>;

struct Search<'a> {
    constraints: &'a [Constraint],
    intended: &'a [Concept],
    values: Vec<Concept>,
    n: usize,
    bijection: bool,
    exclude_intended: bool,
    scopes: Vec<Vec<usize>>,
    /// Constraints whose last output is at this depth.
    complete_at: Vec<Vec<usize>>,
    /// Constraints touching this depth that still have later outputs.
    watch: Vec<Vec<usize>>,
    alt: Vec<usize>,
    initial: Option<Domains>,
}

struct Sink {
    out: Vec<ConceptMapping>,
    limit: usize,
}

impl Sink {
    fn full(&self) -> bool {
        self.out.len() >= self.limit
    }
}

impl<'a> Search<'a> {
    fn compile(p: &'a Problem, mode: MappingMode, exclude_intended: bool) -> Self {
        let n = p.outputs().len();
        let mut values = p.concepts().to_vec();
        values.sort_unstable();
        let constraints = p.constraints();
        let scopes: Vec<Vec<usize>> = constraints.iter().map(Constraint::scope).collect();

        let mut domains: Domains = vec![vec![true; values.len()]; n];
        let mut feasible = true;
        let mut complete_at = vec![Vec::new(); n];
        let mut watch = vec![Vec::new(); n];
        let mut alt = Vec::new();
        let mut scratch = vec![0; n];

        let restrict = |domains: &mut Domains, output: usize, keep: &dyn Fn(Concept) -> bool| {
            for (vi, slot) in domains[output].iter_mut().enumerate() {
                if *slot && !keep(values[vi]) {
                    *slot = false;
                }
            }
        };

        for (ci, c) in constraints.iter().enumerate() {
            let scope = &scopes[ci];
            match c {
                Constraint::AltClause(_) => alt.push(ci),
                Constraint::Pin { output, concept } => {
                    restrict(&mut domains, *output, &|v| v == *concept)
                }
                Constraint::Domain { output, allowed } => {
                    restrict(&mut domains, *output, &|v| allowed.contains(&v))
                }
                Constraint::PairDomain { a, b, values: pair } => {
                    restrict(&mut domains, *a, &|v| pair.contains(&v));
                    restrict(&mut domains, *b, &|v| pair.contains(&v));
                }
                Constraint::PinSet(lits) => {
                    for &(o, s) in lits {
                        restrict(&mut domains, o, &|v| v == s);
                    }
                }
                _ if scope.is_empty() => {
                    if !c.holds(&scratch, p.intended().values()) {
                        feasible = false;
                    }
                }
                _ if scope.len() == 1 => {
                    let o = scope[0];
                    for vi in 0..values.len() {
                        if domains[o][vi] {
                            scratch[o] = values[vi];
                            if !c.holds(&scratch, p.intended().values()) {
                                domains[o][vi] = false;
                            }
                        }
                    }
                }
                _ => {
                    let last = *scope.last().expect("nonempty scope");
                    complete_at[last].push(ci);
                    for &o in &scope[..scope.len() - 1] {
                        watch[o].push(ci);
                    }
                }
            }
        }
        if domains.iter().any(|d| !d.iter().any(|&x| x)) {
            feasible = false;
        }

        Search {
            constraints,
            intended: p.intended().values(),
            values,
            n,
            bijection: mode == MappingMode::Bijection,
            exclude_intended,
            scopes,
            complete_at,
            watch,
            alt,
            initial: feasible.then_some(domains),
        }
    }

    fn run(&self, limit: usize, exec: Execution) -> Vec<ConceptMapping> {
        let Some(domains) = &self.initial else {
            return Vec::new();
        };
        if self.n == 0 {
            let mut sink = Sink {
                out: Vec::new(),
                limit,
            };
            self.complete(&[], &mut sink);
            return sink.out;
        }
        if !exec.is_parallel() {
            let mut sink = Sink {
                out: Vec::new(),
                limit,
            };
            let mut assign = vec![0; self.n];
            let mut used = vec![false; self.values.len()];
            self.descend(0, &mut assign, domains, &mut used, &mut sink);
            return sink.out;
        }
        let firsts: Vec<usize> = (0..self.values.len()).filter(|&vi| domains[0][vi]).collect();
        let branches = par::map(exec, firsts, |vi| {
            let mut sink = Sink {
                out: Vec::new(),
                limit,
            };
            let mut assign = vec![0; self.n];
            let mut used = vec![false; self.values.len()];
            self.try_value(0, vi, &mut assign, domains, &mut used, &mut sink);
            sink.out
        });
        let mut out = Vec::new();
        for b in branches {
            out.extend(b);
            if out.len() >= limit {
                out.truncate(limit);
                break;
            }
        }
        out
    }

    fn descend(
        &self,
        depth: usize,
        assign: &mut Vec<Concept>,
        domains: &Domains,
        used: &mut Vec<bool>,
        sink: &mut Sink,
    ) {
        for vi in 0..self.values.len() {
            if !domains[depth][vi] {
                continue;
            }
            self.try_value(depth, vi, assign, domains, used, sink);
            if sink.full() {
                return;
            }
        }
    }

    fn try_value(
        &self,
        depth: usize,
        vi: usize,
        assign: &mut Vec<Concept>,
        domains: &Domains,
        used: &mut Vec<bool>,
        sink: &mut Sink,
    ) {
        if self.bijection && used[vi] {
            return;
        }
        assign[depth] = self.values[vi];
        if !self.complete_at[depth]
            .iter()
            .all(|&ci| self.constraints[ci].holds(assign, self.intended))
        {
            return;
        }
        let Some(next) = self.forward(depth, assign, domains) else {
            return;
        };
        if depth + 1 == self.n {
            self.complete(assign, sink);
            return;
        }
        used[vi] = true;
        self.descend(depth + 1, assign, next.as_ref().unwrap_or(domains), used, sink);
        used[vi] = false;
    }

    /// Forward checking after assigning `depth`. `None` means a wipe-out;
    /// `Some(None)` means no domain changed.
    fn forward(&self, depth: usize, assign: &mut [Concept], domains: &Domains) -> Option<Option<Domains>> {
        let mut next: Option<Domains> = None;
        for &ci in &self.watch[depth] {
            let c = &self.constraints[ci];
            let scope = &self.scopes[ci];
            let pending = scope.iter().filter(|&&o| o > depth).count();
            if pending == 1 {
                let u = *scope.last().expect("pending output");
                let doms = next.get_or_insert_with(|| domains.clone());
                let mut any = false;
                for (live, &v) in doms[u].iter_mut().zip(&self.values) {
                    if !*live {
                        continue;
                    }
                    assign[u] = v;
                    if c.holds(assign, self.intended) {
                        any = true;
                    } else {
                        *live = false;
                    }
                }
                if !any {
                    return None;
                }
            } else if let Constraint::Table { outputs, allowed } = c {
                let prefix_ok = allowed.iter().any(|t| {
                    outputs
                        .iter()
                        .zip(t)
                        .all(|(&o, &v)| o > depth || assign[o] == v)
                });
                if !prefix_ok {
                    return None;
                }
            }
        }
        Some(next)
    }

    fn complete(&self, assign: &[Concept], sink: &mut Sink) {
        if !self
            .alt
            .iter()
            .all(|&ci| self.constraints[ci].holds(assign, self.intended))
        {
            return;
        }
        if self.exclude_intended && assign == self.intended {
            return;
        }
        sink.out.push(ConceptMapping::new(assign.to_vec()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn values(set: &SolutionSet) -> Vec<Vec<Concept>> {
        set.mappings.iter().map(|m| m.values().to_vec()).collect()
    }

    #[test]
    fn four_node_bijection_has_eight() {
        let p = fixtures::four_node_addition();
        let set = enumerate_valid(&p, MappingMode::Bijection, DEFAULT_CAP, false).unwrap();
        assert_eq!(set.len(), 8);
        assert!(!set.saturated);
        for want in [[0, 1, 2, 3], [0, 2, 1, 3], [3, 1, 2, 0]] {
            assert!(set.contains(&ConceptMapping::new(want.to_vec())));
        }
    }

    #[test]
    fn modulo_successor_rotations() {
        let p = fixtures::modulo_successor();
        let set = enumerate_valid(&p, MappingMode::Bijection, DEFAULT_CAP, false).unwrap();
        assert_eq!(values(&set), vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
    }

    #[test]
    fn mnist_half_function_shortcuts() {
        let p = fixtures::mnist_half();
        let set = enumerate_valid(&p, MappingMode::Function, DEFAULT_CAP, true).unwrap();
        assert_eq!(values(&set), vec![vec![0, 1, 3, 2, 3], vec![0, 1, 4, 1, 2]]);
    }

    #[test]
    fn cap_truncates_and_flags() {
        let p = fixtures::four_node_addition();
        let set = enumerate_valid(&p, MappingMode::Bijection, 3, false).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.saturated);
        let exact = enumerate_valid(&p, MappingMode::Bijection, 8, false).unwrap();
        assert_eq!(exact.len(), 8);
        assert!(!exact.saturated);
    }

    #[test]
    fn bijection_size_mismatch_is_error() {
        let p = Problem::new(vec!["a".into()], vec![0, 1], vec![], ConceptMapping::new(vec![0])).unwrap();
        assert!(enumerate_valid(&p, MappingMode::Bijection, 10, false).is_err());
        assert!(enumerate_valid(&p, MappingMode::Function, 0, false).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = fixtures::four_node_addition();
        for mode in [MappingMode::Function, MappingMode::Bijection] {
            for cap in [1, 5, 100] {
                let a = enumerate_valid_with(&p, mode, cap, false, Execution::Sequential).unwrap();
                let b = enumerate_valid_with(&p, mode, cap, false, Execution::Parallel).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn empty_problem_has_one_mapping() {
        let p = Problem::new(vec![], vec![], vec![], ConceptMapping::new(vec![])).unwrap();
        let set = enumerate_valid(&p, MappingMode::Bijection, 10, false).unwrap();
        assert_eq!(set.len(), 1);
        let set = enumerate_valid(&p, MappingMode::Bijection, 10, true).unwrap();
        assert!(set.is_empty());
    }
}
