use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use nsl_core::asp::export_asp;
use nsl_core::enumerate::enumerate_valid;
use nsl_core::fixtures::{fixture, FixtureName};
use nsl_core::query::{run_strategy, QueryStrategy};
use nsl_core::reductions::{
    brute_force_min_cover, brute_force_sharp_sat, cnf_to_nsl, parse_dimacs, parse_setcover,
    setcover_to_repair,
};
use nsl_core::repair::{greedy_repair, random_repair, minimal_repair_bruteforce, RepairOutcome};
use nsl_core::report::{Count, Report};
use nsl_core::structure::{automorphism_group, check_discrimination, constraint_graph};
use nsl_core::{
    is_valid, measures, parse_problem, serialize_problem, verify, MappingMode, Problem,
    VerificationStatus, DEFAULT_CAP,
};

const EXIT_OK: u8 = 0;
const EXIT_FOUND: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "nslcheck", version)]
#[command(about = "Find, explain and repair unintended concept mappings of constraint sets")]
struct Cli {
    /// Mapping space: all functions, or bijections onto the concept set.
    #[arg(long, value_enum, global = true, default_value = "bij")]
    mode: ModeArg,

    /// Stop enumerating after this many models; counts beyond it are lower bounds.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,

    /// Plain-text tables instead of JSON.
    #[arg(long, global = true)]
    human: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Fn,
    Bij,
}

impl From<ModeArg> for MappingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fn => MappingMode::Function,
            ModeArg::Bij => MappingMode::Bijection,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RepairArg {
    Greedy,
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List shortcuts (valid mappings other than the intended one).
    Verify { file: PathBuf },
    /// Multiplicity, ambiguity and disagreement set of the valid mappings.
    Measures { file: PathBuf },
    /// Constraint graph and its connected components.
    Graph { file: PathBuf },
    /// Check closure of the valid set under value transpositions.
    Discriminate { file: PathBuf },
    /// Value permutations that map the valid set onto itself.
    Automorphisms { file: PathBuf },
    /// Add pins until the intended mapping is the only valid one.
    Repair {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "greedy")]
        strategy: RepairArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration budget.
        #[arg(long = "T", default_value_t = 100)]
        max_iterations: usize,
    },
    /// Simulate label queries until one candidate remains.
    Queries {
        file: PathBuf,
        /// u (uncertainty), g (greedy disambiguation) or r (random).
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reduce a DIMACS CNF and compare the shortcut count with #SAT.
    ReduceCnf {
        file: PathBuf,
        /// Print the reduced problem instead of the report.
        #[arg(long)]
        emit: bool,
    },
    /// Reduce a set-cover instance and compare minimal repair with minimum cover.
    ReduceSetcover {
        file: PathBuf,
        #[arg(long)]
        emit: bool,
    },
    /// Print an answer-set program whose models are the valid mappings.
    ExportAsp {
        file: PathBuf,
        /// Forbid the intended mapping, so models are exactly the shortcuts.
        #[arg(long)]
        exclude_intended: bool,
    },
    /// Print a built-in problem in the text format.
    Fixture { name: String },
}

struct Output {
    text: String,
    code: u8,
}

type CliResult = Result<Output, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if !out.text.ends_with('\n') {
                println!();
            }
            ExitCode::from(out.code)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(path: &Path) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_problem(&text).into_result().map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
        lines.join("\n")
    })
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(cli: &Cli, report: Report, human: impl FnOnce() -> String, code: u8) -> CliResult {
    let text = if cli.human { human() } else { report.to_json() };
    Ok(Output { text, code })
}

fn run(cli: &Cli) -> CliResult {
    let mode = MappingMode::from(cli.mode);
    let cap = cli.cap;
    let err = |e: nsl_core::Error| e.to_string();
    match &cli.command {
        Command::Verify { file } => {
            let p = load(file)?;
            let r = verify(&p, mode, cap).map_err(err)?;
            let count = Count::new(r.shortcuts.len(), !r.saturated);
            let code = match r.status {
                VerificationStatus::ShortcutFree => EXIT_OK,
                VerificationStatus::ShortcutsFound => EXIT_FOUND,
                VerificationStatus::IntendedInvalid => EXIT_INVALID,
            };
            let report = Report::new(
                "verify",
                Some(&p),
                json!({
                    "mode": mode,
                    "cap": cap,
                    "status": r.status,
                    "shortcut_count": count,
                    "shortcuts": r.shortcuts,
                }),
            )
            .exact("shortcut_count", count.exact);
            emit(cli, report, || {
                let mut s = format!("status     {:?}\nmode       {mode}\nshortcuts  {}\n", r.status, count.render());
                for m in &r.shortcuts {
                    writeln!(s, "  {m}").unwrap();
                }
                s
            }, code)
        }
        Command::Measures { file } => {
            let p = load(file)?;
            if !is_valid(&p, p.intended(), mode).map_err(|e| e.to_string())? {
                let report = Report::new("measures", Some(&p), json!({"mode": mode, "status": VerificationStatus::IntendedInvalid}));
                return emit(cli, report, || "status  IntendedInvalid\n".into(), EXIT_INVALID);
            }
            let sols = enumerate_valid(&p, mode, cap, false).map_err(err)?;
            let m = measures(&sols.mappings, sols.saturated).map_err(err)?;
            let mult = Count::new(m.multiplicity, m.exact);
            let code = if m.multiplicity == 0 { EXIT_OK } else { EXIT_FOUND };
            let names: Vec<&str> = m.disagreement_positions.iter().map(|&i| p.output_name(i)).collect();
            let report = Report::new(
                "measures",
                Some(&p),
                json!({
                    "mode": mode,
                    "cap": cap,
                    "multiplicity": mult,
                    "ambiguity": m.ambiguity,
                    "disagreement_set": names,
                }),
            )
            .exact("multiplicity", m.exact)
            .exact("ambiguity", m.exact)
            .exact("disagreement_set", m.exact);
            emit(cli, report, || {
                format!(
                    "multiplicity      {}\nambiguity         {}{}\ndisagreement set  {{{}}}\n",
                    mult.render(),
                    if m.exact { "" } else { "≥ " },
                    m.ambiguity,
                    names.join(", ")
                )
            }, code)
        }
        Command::Graph { file } => {
            let p = load(file)?;
            let g = constraint_graph(&p);
            let report = Report::new(
                "graph",
                Some(&p),
                json!({"graph": g, "connected": g.is_connected()}),
            );
            emit(cli, report, || {
                let mut s = String::new();
                for &(a, b) in &g.edges {
                    writeln!(s, "{} -- {}", p.output_name(a), p.output_name(b)).unwrap();
                }
                for (i, comp) in g.components.iter().enumerate() {
                    let names: Vec<&str> = comp.iter().map(|&v| p.output_name(v)).collect();
                    writeln!(s, "component {i}: {}", names.join(" ")).unwrap();
                }
                s
            }, EXIT_OK)
        }
        Command::Discriminate { file } => {
            let p = load(file)?;
            let sols = enumerate_valid(&p, mode, cap, false).map_err(err)?;
            let d = check_discrimination(&p, &sols).map_err(err)?;
            let report = Report::new("discriminate", Some(&p), json!({"mode": mode, "report": d}))
                .exact("discriminative", true);
            emit(cli, report, || match &d.violating_witness {
                None => "discriminative  yes\n".into(),
                Some(w) => format!(
                    "discriminative  no\nwitness         {} with ({} {}) -> {}\n",
                    w.mapping, w.pair.0, w.pair.1, w.transposed
                ),
            }, EXIT_OK)
        }
        Command::Automorphisms { file } => {
            let p = load(file)?;
            let sols = enumerate_valid(&p, mode, cap, false).map_err(err)?;
            let g = automorphism_group(&sols).map_err(err)?;
            let cycles: Vec<String> = g.elements.iter().map(|e| e.cycle_notation()).collect();
            let report = Report::new(
                "automorphisms",
                Some(&p),
                json!({
                    "order": g.order(),
                    "elements": cycles,
                    "is_trivial": g.is_trivial,
                    "is_transitive_on_solutions": g.is_transitive_on_solutions,
                    "witnesses": g.witnesses,
                }),
            )
            .exact("order", true);
            emit(cli, report, || {
                format!(
                    "order       {}\nelements    {}\ntransitive  {}\n",
                    g.order(),
                    cycles.join(" "),
                    g.is_transitive_on_solutions
                )
            }, EXIT_OK)
        }
        Command::Repair { file, strategy, seed, max_iterations } => {
            let p = load(file)?;
            let t = match strategy {
                RepairArg::Greedy => greedy_repair(&p, mode, *max_iterations, cap),
                RepairArg::Random => random_repair(&p, mode, *max_iterations, cap, *seed),
            }
            .map_err(err)?;
            let code = match t.outcome {
                RepairOutcome::Repaired => EXIT_OK,
                RepairOutcome::Timeout => EXIT_FOUND,
                RepairOutcome::IntendedInvalid => EXIT_INVALID,
            };
            let repaired = p.with_constraints(t.added().into_iter().cloned());
            let report = Report::new(
                "repair",
                Some(&p),
                json!({
                    "mode": mode,
                    "seed": matches!(strategy, RepairArg::Random).then_some(*seed),
                    "trace": t,
                    "repaired_digest": nsl_core::report::problem_digest(&repaired),
                }),
            )
            .exact("trace", t.exact);
            emit(cli, report, || {
                let mut s = format!("outcome  {:?}\n", t.outcome);
                for (i, step) in t.iterations.iter().enumerate() {
                    let pin = serialize_constraint_line(&p, &step.added_constraint);
                    writeln!(s, "{:>3}  shortcut {}  add {pin}", i + 1, step.detected_shortcut).unwrap();
                }
                writeln!(s, "added {}, verification calls {}", t.constraints_added, t.verification_calls).unwrap();
                s
            }, code)
        }
        Command::Queries { file, strategy, seed } => {
            let p = load(file)?;
            let strategy: QueryStrategy = strategy.parse().map_err(err)?;
            if !is_valid(&p, p.intended(), mode).map_err(|e| e.to_string())? {
                let report = Report::new("queries", Some(&p), json!({"mode": mode, "status": VerificationStatus::IntendedInvalid}));
                return emit(cli, report, || "status  IntendedInvalid\n".into(), EXIT_INVALID);
            }
            let sols = enumerate_valid(&p, mode, cap, false).map_err(err)?;
            if sols.saturated {
                return Err(format!("more than {cap} valid mappings; raise --cap to simulate queries"));
            }
            let t = run_strategy(&sols.mappings, p.intended(), strategy, *seed).map_err(err)?;
            let code = if t.identified { EXIT_OK } else { EXIT_FOUND };
            let report = Report::new("queries", Some(&p), json!({"mode": mode, "seed": seed, "trace": t}))
                .exact("trace", true);
            emit(cli, report, || {
                let mut s = format!("strategy  {}\n", t.strategy);
                for q in &t.queries {
                    writeln!(
                        s,
                        "  {} = {}  {} -> {}",
                        p.output_name(q.position),
                        q.answer,
                        q.candidates_before,
                        q.candidates_after
                    )
                    .unwrap();
                }
                writeln!(s, "queries {}  bounds [{}, {}]", t.queries.len(), t.bounds.lower, t.bounds.upper).unwrap();
                s
            }, code)
        }
        Command::ReduceCnf { file, emit: print_problem } => {
            let formula = parse_dimacs(&read(file)?).map_err(err)?;
            let p = cnf_to_nsl(&formula);
            if *print_problem {
                return Ok(Output { text: serialize_problem(&p), code: EXIT_OK });
            }
            let models = brute_force_sharp_sat(&formula).map_err(err)?;
            let r = verify(&p, MappingMode::Bijection, cap).map_err(err)?;
            let count = Count::new(r.shortcuts.len(), !r.saturated);
            let agree = count.exact && count.value as u64 == models;
            let report = Report::new(
                "reduce-cnf",
                Some(&p),
                json!({
                    "variables": formula.num_vars(),
                    "clauses": formula.clauses().len(),
                    "sharp_sat": models,
                    "shortcut_count": count,
                    "agree": agree,
                }),
            )
            .exact("sharp_sat", true)
            .exact("shortcut_count", count.exact);
            emit(cli, report, || {
                format!("#SAT       {models}\nshortcuts  {}\nagree      {agree}\n", count.render())
            }, if agree { EXIT_OK } else { EXIT_FOUND })
        }
        Command::ReduceSetcover { file, emit: print_problem } => {
            let inst = parse_setcover(&read(file)?).map_err(err)?;
            let (p, library) = setcover_to_repair(&inst).map_err(err)?;
            if *print_problem {
                return Ok(Output { text: serialize_problem(&p), code: EXIT_OK });
            }
            let cover = brute_force_min_cover(&inst).map_err(err)?;
            let repair = minimal_repair_bruteforce(&p, &library, library.len(), MappingMode::Function)
                .map_err(err)?;
            let agree = cover == repair.as_ref().map(Vec::len);
            let report = Report::new(
                "reduce-setcover",
                Some(&p),
                json!({
                    "universe": inst.universe(),
                    "sets": inst.sets().len(),
                    "min_cover": cover,
                    "minimal_repair": repair,
                    "agree": agree,
                }),
            )
            .exact("min_cover", true)
            .exact("minimal_repair", true);
            let show = |x: Option<usize>| x.map_or("infeasible".to_string(), |v| v.to_string());
            emit(cli, report, || {
                format!(
                    "min cover       {}\nminimal repair  {}\nagree           {agree}\n",
                    show(cover),
                    show(repair.as_ref().map(Vec::len))
                )
            }, if agree { EXIT_OK } else { EXIT_FOUND })
        }
        Command::ExportAsp { file, exclude_intended } => {
            let p = load(file)?;
            let text = export_asp(&p, mode, *exclude_intended).map_err(err)?;
            Ok(Output { text, code: EXIT_OK })
        }
        Command::Fixture { name } => {
            let name: FixtureName = name.parse().map_err(err)?;
            Ok(Output { text: serialize_problem(&fixture(name).problem), code: EXIT_OK })
        }
    }
}

/// The `constraint ...` line the text format uses for `c`.
fn serialize_constraint_line(p: &Problem, c: &nsl_core::Constraint) -> String {
    let single = Problem::new(p.outputs().to_vec(), p.concepts().to_vec(), vec![c.clone()], p.intended().clone())
        .map(|q| serialize_problem(&q))
        .unwrap_or_default();
    single
        .lines()
        .find(|l| l.starts_with("constraint "))
        .unwrap_or_default()
        .trim_start_matches("constraint ")
        .to_string()
}
