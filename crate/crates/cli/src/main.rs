//! `picturecalc`: batch front end for diagram arithmetic, the Thompson bridge
//! and the ball verifiers.
//!
//! Exit codes: 0 on success, 1 when a verifier found a counterexample, 2 on
//! bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use picturecalc_core::coeff::{CoefficientSystem, GroupSpec};
use picturecalc_core::embed::{project_to_thompson, psi};
use picturecalc_core::picture::{diagram_from_json, diagram_to_json, enumerate_reduced, length, multiply, reduce, Context, Diagram, Geometry};
use picturecalc_core::presentation::{builtin_from_spec, parse_presentation, SemigroupPresentation, Word};
use picturecalc_core::qmgraph::{ball, condition_plus_check, hyperplanes_report, medians, pins_report, verify_qm_axioms};
use picturecalc_core::thompson::{evaluate_map, NAdic, TreePair};
use serde_json::json;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "picturecalc", version, about = "Diagram groups, picture products and their quasi-median balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Setting {
    /// Builtin presentation, e.g. `thompson` or `higman:3,1`.
    #[arg(long, conflicts_with = "presentation")]
    builtin: Option<String>,
    /// Presentation text such as `<x | x=x.x>`, or a file holding it.
    #[arg(long)]
    presentation: Option<String>,
    /// Baseword; defaults to the builtin's.
    #[arg(long)]
    word: Option<String>,
    /// Coefficient group of a letter: `x=trivial`, `x=cyclic:3`, `x=free:2`.
    #[arg(long = "coeff", value_name = "LETTER=GROUP")]
    coeffs: Vec<String>,
    #[arg(long, default_value = "braided")]
    geometry: Geometry,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a diagram and print its length.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced product of two diagrams.
    Multiply {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Image of a diagram in the picture group over `<x | x=x.x>` with free labels.
    Embed {
        #[command(flatten)]
        setting: Setting,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tree pair of a diagram's image after forgetting labels, with its F/T/V tag.
    Project {
        #[command(flatten)]
        setting: Setting,
        #[arg(long = "in")]
        input: PathBuf,
    },
    #[command(subcommand)]
    Thompson(ThompsonCommand),
    /// Ball around the baseword's identity as JSON or DOT.
    Ball {
        #[command(flatten)]
        setting: Setting,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Axiom, pin, hyperplane and conjugation-condition reports on a ball.
    Verify {
        #[command(flatten)]
        setting: Setting,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Longest word searched by the conjugation check.
        #[arg(long, default_value_t = 3)]
        plus_words: usize,
        /// Largest expansion tried by the conjugation check.
        #[arg(long, default_value_t = 2)]
        plus_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every reduced `(w,w)`-diagram up to a length budget.
    Enumerate {
        #[command(flatten)]
        setting: Setting,
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ThompsonCommand {
    /// Evaluate a tree pair at an n-adic point.
    Eval {
        /// `domain|image@perm=...`
        pair: String,
        /// `k/2^m`, `k/n^m` or `k/d`.
        point: String,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn input<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{what}: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn read_diagram(path: &Path) -> Result<Diagram, CliError> {
    diagram_from_json(&read(path)?).map_err(input(&path.display().to_string()))
}

/// Writes through a sibling temporary file so readers never see a partial file.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(path) => {
            let io = |source| CliError::Io { path: path.display().to_string(), source };
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".tmp");
            fs::write(&tmp, text).map_err(io)?;
            fs::rename(&tmp, path).map_err(io)
        }
    }
}

impl Setting {
    fn presentation(&self) -> Result<Option<(SemigroupPresentation, Option<Word>)>, CliError> {
        if let Some(spec) = &self.builtin {
            let (p, w) = builtin_from_spec(spec).map_err(input("--builtin"))?;
            return Ok(Some((p, Some(w))));
        }
        if let Some(text) = &self.presentation {
            let text = if Path::new(text).is_file() { read(Path::new(text))? } else { text.clone() };
            let p = parse_presentation(text.trim()).map_err(input("--presentation"))?;
            return Ok(Some((p, None)));
        }
        Ok(None)
    }

    fn context(&self) -> Result<(Context, Word), CliError> {
        let (p, default_word) =
            self.presentation()?.ok_or_else(|| CliError::Input("one of --builtin or --presentation is required".into()))?;
        let word = match (&self.word, default_word) {
            (Some(w), _) => p.parse_word(w).map_err(input("--word"))?,
            (None, Some(w)) => w,
            (None, None) => return Err(CliError::Input("--word is required with --presentation".into())),
        };
        let mut assignments = Vec::new();
        for c in &self.coeffs {
            let (letter, spec) = c.split_once('=').ok_or_else(|| CliError::Input(format!("--coeff `{c}`: expected LETTER=GROUP")))?;
            let spec: GroupSpec = spec.parse().map_err(input("--coeff"))?;
            assignments.push((letter.trim().to_string(), spec));
        }
        let coeffs = CoefficientSystem::from_assignments(&p, &assignments).map_err(input("--coeff"))?;
        Ok((Context::new(p, coeffs), word))
    }

    /// A diagram read from a file must live over the presentation given on the command line, if any.
    fn check_matches(&self, d: &Diagram) -> Result<(), CliError> {
        if let Some((p, _)) = self.presentation()? {
            if p != *d.pres() {
                return Err(CliError::Input(format!("diagram is over {}, not {p}", d.pres())));
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Reduce { input: path, out } => {
            let d = reduce(&read_diagram(&path)?);
            emit(out.as_deref(), &diagram_to_json(&d))?;
            if out.is_some() {
                println!("length {}", length(&d));
            } else {
                eprintln!("length {}", length(&d));
            }
        }
        Command::Multiply { left, right, out } => {
            let product = multiply(&read_diagram(&left)?, &read_diagram(&right)?).map_err(input("multiply"))?;
            emit(out.as_deref(), &diagram_to_json(&product))?;
        }
        Command::Embed { setting, input: path, out } => {
            let d = read_diagram(&path)?;
            setting.check_matches(&d)?;
            let img = psi(&d).map_err(input("embed"))?;
            emit(out.as_deref(), &diagram_to_json(&img))?;
        }
        Command::Project { setting, input: path } => {
            let d = read_diagram(&path)?;
            setting.check_matches(&d)?;
            // Diagrams already over the target are projected directly.
            let target = builtin_from_spec("thompson").expect("builtin").0;
            let img = if *d.pres() == target { d } else { psi(&d).map_err(input("embed"))? };
            let (tp, tag) = project_to_thompson(&img).map_err(input("project"))?;
            println!("{tp}");
            println!("{tag}");
        }
        Command::Thompson(ThompsonCommand::Eval { pair, point }) => {
            let tp: TreePair = pair.parse().map_err(input("pair"))?;
            let q: NAdic = point.parse().map_err(input("point"))?;
            let q = NAdic::new(tp.arity(), q.numerator(), q.exponent());
            let y = evaluate_map(&tp, &q).map_err(input("eval"))?;
            println!("{y}");
        }
        Command::Ball { setting, radius, format, out } => {
            let (ctx, w) = setting.context()?;
            let base = ctx.eps_word(&w).map_err(input("--word"))?;
            let g = ball(&base, setting.geometry, radius).map_err(input("ball"))?;
            let text = match format.as_str() {
                "json" => serde_json::to_string_pretty(&g.to_json()).expect("serializable"),
                "dot" => g.to_dot(),
                other => return Err(CliError::Input(format!("--format `{other}`: expected json or dot"))),
            };
            emit(out.as_deref(), &text)?;
        }
        Command::Verify { setting, radius, plus_words, plus_budget, out } => {
            let (ctx, w) = setting.context()?;
            let base = ctx.eps_word(&w).map_err(input("--word"))?;
            let g = ball(&base, setting.geometry, radius).map_err(input("ball"))?;
            let axioms = verify_qm_axioms(&g);
            let median = ctx.coeffs().all_trivial().then(|| medians(&g));
            let pins = pins_report(&g);
            let planes = hyperplanes_report(&g);
            let plus = condition_plus_check(&ctx, &w, plus_words, plus_budget).map_err(input("condition check"))?;
            let pass = axioms.passed()
                && median.as_ref().is_none_or(|m| m.violations.is_empty())
                && pins.passed()
                && planes.passed();
            let report = json!({
                "geometry": setting.geometry.to_string(),
                "radius": radius,
                "all_pass": pass,
                "axioms": axioms,
                "medians": median,
                "pins": pins,
                "hyperplanes": planes,
                "condition_plus": plus,
            });
            emit(out.as_deref(), &serde_json::to_string_pretty(&report).expect("serializable"))?;
            if !pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Enumerate { setting, budget, out } => {
            let (ctx, w) = setting.context()?;
            let list = enumerate_reduced(&ctx, &w, budget, setting.geometry).map_err(input("enumerate"))?;
            let items: Vec<serde_json::Value> = list
                .iter()
                .map(|d| serde_json::from_str(&diagram_to_json(d)).expect("own output parses"))
                .collect();
            emit(out.as_deref(), &serde_json::to_string_pretty(&items).expect("serializable"))?;
            eprintln!("{} diagrams", list.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
