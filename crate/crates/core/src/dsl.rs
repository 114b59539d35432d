//! The line-oriented `.nsl` problem format.
//!
//! ```text
//! # four outputs, two sums
//! outputs n0 n1 n2 n3
//! concepts 0 1 2 3
//! intended n0=0 n1=1 n2=2 n3=3
//! constraint sum n0 + n3 = 3
//! constraint sum n1 + n2 = 3
//! ```
//!
//! Other constraint forms:
//!
//! ```text
//! constraint sum 2*n0 + -1*n1 = 3
//! constraint modsucc n0 n1 mod 3
//! constraint pin n0 = 1
//! constraint domain n0 { 0, 1 }
//! constraint pairdomain n0 n1 { 0, 1 }
//! constraint table ( n0 n1 ) { ( 0 1 ), ( 1 0 ) }
//! constraint pinset { n0=0 n1=1 }
//! constraint altclause { n0=0 }
//! meta source = free text up to end of line
//! ```
//!
//! Declarations (`outputs`, `concepts`) may appear anywhere in the file.
//! Parsing never stops at the first problem: every malformed line produces
//! one diagnostic and the rest of the file is still read.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::model::{Concept, ConceptMapping, Constraint, Literal, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    Syntax,
    UndefinedOutput,
    DuplicateDeclaration,
    ArityMismatch,
    OutOfDomainValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: DiagnosticKind,
}

impl fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// Best-effort problem plus everything that went wrong while reading it.
#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub problem: Problem,
    pub diagnostics: Vec<SourceDiagnostic>,
}

impl ParseOutcome {
    pub fn into_result(self) -> Result<Problem, Vec<SourceDiagnostic>> {
        if self.diagnostics.is_empty() {
            Ok(self.problem)
        } else {
            Err(self.diagnostics)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

type LineResult<T> = Result<T, (usize, DiagnosticKind, String)>;

fn tokenize(line: &str) -> LineResult<Vec<Token>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<i64>()
                .map_err(|_| (col, DiagnosticKind::Syntax, format!("integer `{text}` out of range")))?;
            out.push(Token {
                tok: Tok::Int(v),
                col,
            });
        } else if "*+={}(),".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err((col, DiagnosticKind::Syntax, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Cursor<'t> {
    toks: &'t [Token],
    pos: usize,
    end_col: usize,
}

impl<'t> Cursor<'t> {
    fn new(toks: &'t [Token], end_col: usize) -> Self {
        Cursor { toks, pos: 0, end_col }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn err<T>(&self, what: &str) -> LineResult<T> {
        let found = match self.peek() {
            None => "end of line".to_string(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Sym(c)) => format!("`{c}`"),
        };
        Err((self.col(), DiagnosticKind::Syntax, format!("expected {what}, found {found}")))
    }

    fn ident(&mut self) -> LineResult<(String, usize)> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let r = (s.clone(), self.col());
                self.pos += 1;
                Ok(r)
            }
            _ => self.err("identifier"),
        }
    }

    fn int(&mut self) -> LineResult<(i64, usize)> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let r = (*v, self.col());
                self.pos += 1;
                Ok(r)
            }
            _ => self.err("integer"),
        }
    }

    fn sym(&mut self, c: char) -> LineResult<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("`{c}`"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> LineResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(&format!("`{kw}`")),
        }
    }

    fn finish(&self) -> LineResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("end of line")
        }
    }
}

struct Scope {
    outputs: HashMap<String, usize>,
    concepts: BTreeSet<Concept>,
}

impl Scope {
    fn output(&self, name: &str, col: usize) -> LineResult<usize> {
        self.outputs.get(name).copied().ok_or_else(|| {
            (col, DiagnosticKind::UndefinedOutput, format!("output `{name}` is not declared"))
        })
    }

    fn concept(&self, v: Concept, col: usize) -> LineResult<Concept> {
        if self.concepts.contains(&v) {
            Ok(v)
        } else {
            Err((col, DiagnosticKind::OutOfDomainValue, format!("{v} is not a declared concept")))
        }
    }

    fn cursor_output(&self, cur: &mut Cursor) -> LineResult<usize> {
        let (name, col) = cur.ident()?;
        self.output(&name, col)
    }

    fn cursor_concept(&self, cur: &mut Cursor) -> LineResult<Concept> {
        let (v, col) = cur.int()?;
        self.concept(v, col)
    }

    /// `name=value`
    fn literal(&self, cur: &mut Cursor) -> LineResult<Literal> {
        let o = self.cursor_output(cur)?;
        cur.sym('=')?;
        let v = self.cursor_concept(cur)?;
        Ok((o, v))
    }

    /// `{ name=value ... }`
    fn literal_block(&self, cur: &mut Cursor) -> LineResult<Vec<Literal>> {
        cur.sym('{')?;
        let mut lits = Vec::new();
        while !cur.eat('}') {
            if cur.at_end() {
                return cur.err("`}`");
            }
            lits.push(self.literal(cur)?);
        }
        Ok(lits)
    }

    /// `{ v, v, ... }`
    fn value_set(&self, cur: &mut Cursor) -> LineResult<Vec<Concept>> {
        cur.sym('{')?;
        let mut vals = Vec::new();
        if cur.eat('}') {
            return Ok(vals);
        }
        loop {
            vals.push(self.cursor_concept(cur)?);
            if cur.eat('}') {
                return Ok(vals);
            }
            cur.sym(',')?;
        }
    }

    fn constraint(&self, cur: &mut Cursor) -> LineResult<Constraint> {
        let (kind, kind_col) = cur.ident()?;
        let c = match kind.as_str() {
            "sum" => {
                let mut terms = Vec::new();
                loop {
                    let coef = if let Some(Tok::Int(v)) = cur.peek() {
                        let v = *v;
                        cur.pos += 1;
                        cur.sym('*')?;
                        v
                    } else {
                        1
                    };
                    terms.push((self.cursor_output(cur)?, coef));
                    if cur.eat('=') {
                        break;
                    }
                    cur.sym('+')?;
                }
                let (target, _) = cur.int()?;
                Constraint::WeightedSum { terms, target }
            }
            "modsucc" => {
                let src = self.cursor_output(cur)?;
                let dst = self.cursor_output(cur)?;
                cur.keyword("mod")?;
                let (modulus, col) = cur.int()?;
                if modulus < 2 {
                    return Err((col, DiagnosticKind::Syntax, "modulus must be at least 2".into()));
                }
                Constraint::ModSucc { src, dst, modulus }
            }
            "pin" => {
                let output = self.cursor_output(cur)?;
                cur.sym('=')?;
                let concept = self.cursor_concept(cur)?;
                Constraint::Pin { output, concept }
            }
            "domain" => {
                let output = self.cursor_output(cur)?;
                let allowed = self.value_set(cur)?.into_iter().collect();
                Constraint::Domain { output, allowed }
            }
            "pairdomain" => {
                let a = self.cursor_output(cur)?;
                let b = self.cursor_output(cur)?;
                let col = cur.col();
                let vals = self.value_set(cur)?;
                let [x, y] = vals[..] else {
                    return Err((
                        col,
                        DiagnosticKind::ArityMismatch,
                        format!("pair domain needs exactly 2 values, got {}", vals.len()),
                    ));
                };
                Constraint::PairDomain { a, b, values: [x, y] }
            }
            "table" => {
                cur.sym('(')?;
                let mut outputs = Vec::new();
                while !cur.eat(')') {
                    outputs.push(self.cursor_output(cur)?);
                }
                cur.sym('{')?;
                let mut allowed = BTreeSet::new();
                if !cur.eat('}') {
                    loop {
                        let col = cur.col();
                        cur.sym('(')?;
                        let mut tuple = Vec::new();
                        while !cur.eat(')') {
                            tuple.push(self.cursor_concept(cur)?);
                        }
                        if tuple.len() != outputs.len() {
                            return Err((
                                col,
                                DiagnosticKind::ArityMismatch,
                                format!("tuple has {} values for {} outputs", tuple.len(), outputs.len()),
                            ));
                        }
                        allowed.insert(tuple);
                        if cur.eat('}') {
                            break;
                        }
                        cur.sym(',')?;
                    }
                }
                Constraint::Table { outputs, allowed }
            }
            "pinset" => Constraint::PinSet(self.literal_block(cur)?),
            "altclause" => {
                let col = cur.col();
                let lits = self.literal_block(cur)?;
                if lits.is_empty() {
                    return Err((col, DiagnosticKind::Syntax, "altclause needs at least one literal".into()));
                }
                Constraint::AltClause(lits)
            }
            other => {
                return Err((kind_col, DiagnosticKind::Syntax, format!("unknown constraint kind `{other}`")))
            }
        };
        cur.finish()?;
        Ok(c)
    }
}

/// Splits off a `meta` line: `meta <key> = <rest of line>`.
fn meta_line(line: &str) -> Option<LineResult<(String, String)>> {
    let trimmed = line.trim_start();
    let rest = trimmed.strip_prefix("meta")?;
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let offset = line.len() - rest.len();
    let Some(eq) = rest.find('=') else {
        return Some(Err((line.chars().count() + 1, DiagnosticKind::Syntax, "expected `=` in meta line".into())));
    };
    let key = rest[..eq].trim();
    let valid = !key.is_empty()
        && key.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid {
        let col = line[..offset].chars().count() + 2;
        return Some(Err((col, DiagnosticKind::Syntax, "expected identifier as meta key".into())));
    }
    Some(Ok((key.to_string(), rest[eq + 1..].trim().to_string())))
}

/// Parses `.nsl` text. Always returns a problem; check `diagnostics`.
pub fn parse_problem(text: &str) -> ParseOutcome {
    let lines: Vec<(usize, &str)> = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .collect();

    let mut diags = Vec::new();
    let mut push = |line: usize, (column, kind, message): (usize, DiagnosticKind, String)| {
        diags.push(SourceDiagnostic {
            line,
            column,
            message,
            kind,
        })
    };

    let mut tokenized: Vec<(usize, Vec<Token>, usize)> = Vec::new();
    let mut metadata = BTreeMap::new();
    for &(no, line) in &lines {
        if let Some(meta) = meta_line(line) {
            match meta {
                Ok((k, v)) => {
                    if let std::collections::btree_map::Entry::Vacant(e) = metadata.entry(k.clone()) {
                        e.insert(v);
                    } else {
                        push(no, (1, DiagnosticKind::DuplicateDeclaration, format!("meta key `{k}` repeated")));
                    }
                }
                Err(e) => push(no, e),
            }
            continue;
        }
        match tokenize(line) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => tokenized.push((no, toks, line.chars().count() + 1)),
            Err(e) => push(no, e),
        }
    }

    // Declarations first so that use may precede them.
    let mut outputs: Vec<String> = Vec::new();
    let mut output_index = HashMap::new();
    let mut concepts: Vec<Concept> = Vec::new();
    let mut concept_set = BTreeSet::new();
    let mut rest = Vec::new();
    for (no, toks, end) in &tokenized {
        let head = match &toks[0].tok {
            Tok::Ident(s) => s.as_str(),
            _ => "",
        };
        let mut cur = Cursor::new(toks, *end);
        match head {
            "outputs" => {
                cur.pos = 1;
                while !cur.at_end() {
                    match cur.ident() {
                        Ok((name, col)) => {
                            if output_index.contains_key(&name) {
                                push(*no, (col, DiagnosticKind::DuplicateDeclaration, format!("output `{name}` declared twice")));
                            } else {
                                output_index.insert(name.clone(), outputs.len());
                                outputs.push(name);
                            }
                        }
                        Err(e) => {
                            push(*no, e);
                            break;
                        }
                    }
                }
            }
            "concepts" => {
                cur.pos = 1;
                while !cur.at_end() {
                    match cur.int() {
                        Ok((v, col)) => {
                            if concept_set.insert(v) {
                                concepts.push(v);
                            } else {
                                push(*no, (col, DiagnosticKind::DuplicateDeclaration, format!("concept {v} declared twice")));
                            }
                        }
                        Err(e) => {
                            push(*no, e);
                            break;
                        }
                    }
                }
            }
            _ => rest.push((*no, toks, *end)),
        }
    }

    let scope = Scope {
        outputs: output_index,
        concepts: concept_set,
    };
    let mut constraints = Vec::new();
    let mut intended: Vec<Option<Concept>> = vec![None; outputs.len()];
    let mut intended_line: Option<usize> = None;
    for (no, toks, end) in rest {
        let mut cur = Cursor::new(toks, end);
        let head = cur.ident();
        let result: LineResult<()> = match head {
            Ok((kw, _)) if kw == "constraint" => scope.constraint(&mut cur).map(|c| constraints.push(c)),
            Ok((kw, _)) if kw == "intended" => {
                intended_line.get_or_insert(no);
                let mut r = Ok(());
                while !cur.at_end() {
                    let (name, col) = match cur.ident() {
                        Ok(x) => x,
                        Err(e) => {
                            r = Err(e);
                            break;
                        }
                    };
                    let step = scope.output(&name, col).and_then(|o| {
                        cur.sym('=')?;
                        let v = scope.cursor_concept(&mut cur)?;
                        if intended[o].is_some() {
                            return Err((col, DiagnosticKind::DuplicateDeclaration, format!("intended value for `{name}` given twice")));
                        }
                        intended[o] = Some(v);
                        Ok(())
                    });
                    if let Err(e) = step {
                        r = Err(e);
                        break;
                    }
                }
                r
            }
            Ok((kw, col)) => Err((col, DiagnosticKind::Syntax, format!("unknown directive `{kw}`"))),
            Err(e) => Err(e),
        };
        if let Err(e) = result {
            push(no, e);
        }
    }

    match intended_line {
        None => push(1, (1, DiagnosticKind::Syntax, "missing `intended` declaration".into())),
        Some(no) => {
            let missing: Vec<&str> = intended
                .iter()
                .zip(&outputs)
                .filter(|(v, _)| v.is_none())
                .map(|(_, n)| n.as_str())
                .collect();
            if !missing.is_empty() {
                push(no, (1, DiagnosticKind::ArityMismatch, format!("no intended value for {}", missing.join(", "))));
            }
        }
    }

    let intended = if intended.iter().all(Option::is_some) {
        ConceptMapping::new(intended.into_iter().flatten().collect())
    } else {
        ConceptMapping::new(Vec::new())
    };
    let problem = Problem::from_parts_unchecked(outputs, concepts, constraints, intended, metadata);
    diags.sort_by_key(|d| (d.line, d.column));
    if diags.is_empty() {
        if let Err(e) = problem.validate() {
            diags.push(SourceDiagnostic {
                line: 1,
                column: 1,
                message: e.to_string(),
                kind: DiagnosticKind::Syntax,
            });
        }
    }
    ParseOutcome {
        problem,
        diagnostics: diags,
    }
}

/// Canonical text form; `parse_problem` reads it back to an equal problem.
pub fn serialize_problem(p: &Problem) -> String {
    let name = |o: usize| p.output_name(o);
    let lit = |(o, v): &Literal| format!("{}={}", name(*o), v);
    let join_ints = |vals: &mut dyn Iterator<Item = &Concept>, sep: &str| {
        vals.map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
    };
    let mut out = String::new();
    for (k, v) in p.metadata() {
        out.push_str(&format!("meta {k} = {v}\n"));
    }
    let line = |head: &str, items: Vec<String>| {
        if items.is_empty() {
            format!("{head}\n")
        } else {
            format!("{head} {}\n", items.join(" "))
        }
    };
    out.push_str(&line("outputs", p.outputs().to_vec()));
    out.push_str(&line("concepts", p.concepts().iter().map(|c| c.to_string()).collect()));
    out.push_str(&line(
        "intended",
        p.intended()
            .values()
            .iter()
            .enumerate()
            .map(|(o, v)| format!("{}={}", name(o), v))
            .collect(),
    ));
    for c in p.constraints() {
        let body = match c {
            Constraint::WeightedSum { terms, target } => {
                let ts: Vec<String> = terms
                    .iter()
                    .map(|(o, coef)| match coef {
                        1 => name(*o).to_string(),
                        k => format!("{k}*{}", name(*o)),
                    })
                    .collect();
                format!("sum {} = {target}", ts.join(" + "))
            }
            Constraint::ModSucc { src, dst, modulus } => {
                format!("modsucc {} {} mod {modulus}", name(*src), name(*dst))
            }
            Constraint::Pin { output, concept } => format!("pin {} = {concept}", name(*output)),
            Constraint::Domain { output, allowed } => {
                format!("domain {} {{ {} }}", name(*output), join_ints(&mut allowed.iter(), ", "))
            }
            Constraint::PairDomain { a, b, values } => {
                format!("pairdomain {} {} {{ {}, {} }}", name(*a), name(*b), values[0], values[1])
            }
            Constraint::Table { outputs, allowed } => {
                let outs: Vec<&str> = outputs.iter().map(|o| name(*o)).collect();
                let tuples: Vec<String> = allowed
                    .iter()
                    .map(|t| format!("( {} )", join_ints(&mut t.iter(), " ")))
                    .collect();
                format!("table ( {} ) {{ {} }}", outs.join(" "), tuples.join(", "))
            }
            Constraint::PinSet(lits) => {
                format!("pinset {{ {} }}", lits.iter().map(lit).collect::<Vec<_>>().join(" "))
            }
            Constraint::AltClause(lits) => {
                format!("altclause {{ {} }}", lits.iter().map(lit).collect::<Vec<_>>().join(" "))
            }
        };
        out.push_str("constraint ");
        out.push_str(&body);
        out.push('\n');
    }
    out
}
