//! Answer-set program export. The program's answer sets are the valid
//! mappings, one `maps_to/2` atom per output, so an external solver run with
//! `--models=0` can cross-check the enumerator's counts.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Concept, Constraint, MappingMode, Problem};

fn term(name: &str) -> String {
    let plain = name.starts_with(|c: char| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("{name:?}")
    }
}

fn var(o: usize) -> String {
    format!("V{o}")
}

/// Body atoms binding `V<o>` for every output in `scope`.
fn bind(p: &Problem, scope: &[usize]) -> Vec<String> {
    scope
        .iter()
        .map(|&o| format!("maps_to({},{})", term(p.output_name(o)), var(o)))
        .collect()
}

fn facts(pred: &str, values: impl IntoIterator<Item = String>) -> String {
    values
        .into_iter()
        .map(|v| format!("{pred}({v})."))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn export_asp(p: &Problem, mode: MappingMode, exclude_intended: bool) -> Result<String> {
    p.validate()?;
    p.check_mode(mode)?;
    if let Some(v) = p.concepts().iter().find(|&&v| v < 0) {
        return Err(Error::UnsupportedExport(format!("negative concept label {v}")));
    }
    let mut out = String::new();
    let mut sorted: Vec<Concept> = p.concepts().to_vec();
    sorted.sort_unstable();
    let contiguous = sorted.windows(2).all(|w| w[1] == w[0] + 1);
    match (sorted.first(), sorted.last()) {
        (Some(lo), Some(hi)) if contiguous => writeln!(out, "val({lo}..{hi}).").unwrap(),
        _ => writeln!(out, "{}", facts("val", sorted.iter().map(|v| v.to_string()))).unwrap(),
    }
    writeln!(out).unwrap();
    writeln!(out, "{}", facts("neural", p.outputs().iter().map(|n| term(n)))).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "concept(V) :- val(V).").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "1 {{ maps_to(N,S) : concept(S) }} 1 :- neural(N).").unwrap();
    if mode == MappingMode::Bijection {
        writeln!(out, "1 {{ maps_to(N,S) : neural(N) }} 1 :- concept(S).").unwrap();
    }
    writeln!(out).unwrap();

    let has_alt = p.constraints().iter().any(|c| matches!(c, Constraint::AltClause(_)));
    for (ci, c) in p.constraints().iter().enumerate() {
        let lines = constraint_rules(p, ci, c);
        for l in lines {
            writeln!(out, "{l}").unwrap();
        }
    }

    let intended_atoms: Vec<String> = p
        .intended()
        .values()
        .iter()
        .enumerate()
        .map(|(o, v)| format!("maps_to({},{v})", term(p.output_name(o))))
        .collect();
    if has_alt {
        writeln!(out).unwrap();
        if intended_atoms.is_empty() {
            writeln!(out, "is_intended.").unwrap();
        } else {
            writeln!(out, "is_intended :- {}.", intended_atoms.join(", ")).unwrap();
        }
        writeln!(out, "alt :- not is_intended.").unwrap();
        for (ci, c) in p.constraints().iter().enumerate() {
            if let Constraint::AltClause(lits) = c {
                let _ = ci;
                let negs: Vec<String> = lits
                    .iter()
                    .map(|(o, v)| format!("not maps_to({},{v})", term(p.output_name(*o))))
                    .collect();
                writeln!(out, ":- alt, {}.", negs.join(", ")).unwrap();
            }
        }
    }
    if exclude_intended {
        writeln!(out).unwrap();
        if intended_atoms.is_empty() {
            writeln!(out, ":- .").unwrap();
        } else {
            writeln!(out, ":- {}.", intended_atoms.join(", ")).unwrap();
        }
    }
    writeln!(out).unwrap();
    writeln!(out, "#show maps_to/2.").unwrap();
    Ok(out)
}

fn constraint_rules(p: &Problem, ci: usize, c: &Constraint) -> Vec<String> {
    let not_in = |o: usize, allowed: &BTreeSet<Concept>| {
        let mut body = bind(p, &[o]);
        body.extend(allowed.iter().map(|v| format!("{} != {v}", var(o))));
        format!(":- {}.", body.join(", "))
    };
    match c {
        Constraint::WeightedSum { terms, target } => {
            let mut body = bind(p, &c.scope());
            let sum: Vec<String> = terms
                .iter()
                .map(|(o, k)| match k {
                    1 => var(*o),
                    k => format!("{k}*{}", var(*o)),
                })
                .collect();
            body.push(format!("{} != {target}", sum.join(" + ")));
            vec![format!(":- {}.", body.join(", "))]
        }
        Constraint::ModSucc { src, dst, modulus } => {
            let mut body = bind(p, &c.scope());
            body.push(format!("{} \\ {modulus} != ({} + 1) \\ {modulus}", var(*dst), var(*src)));
            vec![format!(":- {}.", body.join(", "))]
        }
        Constraint::Pin { output, concept } => {
            vec![format!(":- not maps_to({},{concept}).", term(p.output_name(*output)))]
        }
        Constraint::Domain { output, allowed } => vec![not_in(*output, allowed)],
        Constraint::PairDomain { a, b, values } => {
            let allowed: BTreeSet<Concept> = values.iter().copied().collect();
            let mut rules = vec![not_in(*a, &allowed)];
            if a != b {
                rules.push(not_in(*b, &allowed));
            }
            rules
        }
        Constraint::Table { outputs, allowed } => {
            let pred = format!("table_{ci}");
            let mut rules: Vec<String> = allowed
                .iter()
                .map(|t| {
                    let args: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    format!("{pred}({}).", args.join(","))
                })
                .collect();
            let mut body = bind(p, &c.scope());
            let args: Vec<String> = outputs.iter().map(|&o| var(o)).collect();
            if outputs.is_empty() {
                body.push(format!("not {pred}"));
                if !allowed.is_empty() {
                    rules = vec![format!("{pred}.")];
                }
            } else {
                body.push(format!("not {pred}({})", args.join(",")));
            }
            rules.push(format!(":- {}.", body.join(", ")));
            rules
        }
        Constraint::PinSet(lits) => lits
            .iter()
            .map(|(o, v)| format!(":- not maps_to({},{v}).", term(p.output_name(*o))))
            .collect(),
        // Emitted with the alt guard.
        Constraint::AltClause(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn four_node_shape() {
        let text = export_asp(&fixtures::four_node_addition(), MappingMode::Bijection, true).unwrap();
        assert!(text.starts_with("val(0..3).\n"));
        assert!(text.contains("neural(n0). neural(n1). neural(n2). neural(n3)."));
        assert!(text.contains("1 { maps_to(N,S) : neural(N) } 1 :- concept(S)."));
        assert!(text.contains(":- maps_to(n0,V0), maps_to(n3,V3), V0 + V3 != 3."));
        assert!(text.contains(":- maps_to(n0,0), maps_to(n1,1), maps_to(n2,2), maps_to(n3,3)."));
        assert!(text.trim_end().ends_with("#show maps_to/2."));
    }

    #[test]
    fn function_mode_has_no_bijection_rule() {
        let text = export_asp(&fixtures::mnist_half(), MappingMode::Function, true).unwrap();
        assert!(!text.contains("neural(N) } 1"));
        assert!(text.contains(":- maps_to(n0,V0), 1*V0 != 0.") || text.contains(":- maps_to(n0,V0), V0 + V0 != 0."));
    }

    #[test]
    fn modsucc_rule() {
        let text = export_asp(&fixtures::modulo_successor(), MappingMode::Bijection, false).unwrap();
        assert!(text.contains(":- maps_to(n0,V0), maps_to(n1,V1), V1 \\ 3 != (V0 + 1) \\ 3."));
        assert!(!text.contains(":- maps_to(n0,0), maps_to(n1,1), maps_to(n2,2)."));
    }

    #[test]
    fn negative_concepts_rejected() {
        let p = Problem::new(
            vec!["a".into()],
            vec![-1],
            vec![],
            crate::model::ConceptMapping::new(vec![-1]),
        )
        .unwrap();
        assert!(matches!(export_asp(&p, MappingMode::Function, false), Err(Error::UnsupportedExport(_))));
    }

    #[test]
    fn uppercase_names_are_quoted() {
        assert_eq!(term("n0"), "n0");
        assert_eq!(term("N0"), "\"N0\"");
    }
}
