//! Command-line front end: each subcommand reads its inputs, runs one or more
//! pipeline phases and writes machine-readable outputs. Diagnostics go to
//! the error stream only.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use vago_core::experiments::{
    load_geo_fixtures, parse_schedule, run_simulation, Scenario, SimulationConfig,
};
use vago_core::io::{
    read_feedback, read_ontology, read_training, read_updates, serialize_ontology, write_feedback,
    write_trajectory, write_updates, Diagnostic,
};
use vago_core::learning::{learn, LearningParams, UpdateMode};
use vago_core::updater::{apply_updates, assignment_of, describe_updates};
use vago_core::validation::validate_detailed;
use vago_core::{Axiom, Error, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// An inconsistency was found that no adaptor value repairs.
    Unrepairable,
    InputError,
    BudgetExceeded,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Unrepairable => 1,
            ExitStatus::InputError => 2,
            ExitStatus::BudgetExceeded => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vago",
    version,
    about = "Learn vague-concept thresholds from training axioms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check training axioms against an ontology and write feedback JSON.
    Validate {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        training: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn feedback into adaptor updates.
    Learn {
        #[arg(long)]
        feedback: PathBuf,
        #[arg(long)]
        ontology: PathBuf,
        #[command(flatten)]
        learning: LearningArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write updated adaptor values into an ontology.
    Apply {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        updates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate, learn and apply in one go. Feedback and updates are written
    /// next to the output ontology as `<stem>.feedback.json` and
    /// `<stem>.updates.json`.
    Run {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        training: PathBuf,
        #[command(flatten)]
        learning: LearningArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drive a bundled scenario and write its adaptor trajectory as CSV. The
    /// final ontology is written next to the CSV with a `.vago` extension.
    Simulate {
        /// minors, parents or geo.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target changes as `start:value,...`, e.g. `1:18,11:25`.
        #[arg(long)]
        schedule: Option<String>,
        /// Directory of JSON fixtures, one per iteration (geo only).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Individuals generated per iteration.
        #[arg(long)]
        per_iteration: Option<usize>,
        /// Probability of flipping a generated label.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[command(flatten)]
        learning: LearningArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LearningArgs {
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Also pool the evidence of adaptors found correct.
    #[arg(long)]
    pub include_consistent: bool,
    /// `displacement` pools required − current; `absolute` pools the
    /// required values themselves.
    #[arg(long, default_value = "displacement")]
    pub update_mode: String,
}

impl LearningArgs {
    fn params(&self) -> Result<LearningParams, Failure> {
        let params = LearningParams {
            q: self.q,
            b: self.b,
            include_consistent_evidence: self.include_consistent,
            mode: self.update_mode.parse::<UpdateMode>()?,
        };
        params.check()?;
        Ok(params)
    }
}

/// Why a command stopped, with the lines to report.
#[derive(Debug)]
pub struct Failure {
    pub status: ExitStatus,
    pub lines: Vec<String>,
}

impl Failure {
    fn input(line: impl Into<String>) -> Failure {
        Failure {
            status: ExitStatus::InputError,
            lines: vec![line.into()],
        }
    }

    fn in_file(path: &Path, err: Error) -> Failure {
        let line = match &err {
            Error::Decode {
                line,
                column,
                message,
            } => format!("{}:{line}:{column}: error: {message}", path.display()),
            other => format!("{}: error: {other}", path.display()),
        };
        Failure {
            status: status_of(&err),
            lines: vec![line],
        }
    }

    fn diagnostics(diags: Vec<Diagnostic>) -> Failure {
        Failure {
            status: ExitStatus::InputError,
            lines: diags.iter().map(ToString::to_string).collect(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        Failure {
            status: status_of(&err),
            lines: vec![format!("error: {err}")],
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lines.join("\n"))
    }
}

fn status_of(err: &Error) -> ExitStatus {
    match err {
        Error::BudgetExceeded { .. } => ExitStatus::BudgetExceeded,
        _ => ExitStatus::InputError,
    }
}

/// Runs `cli`, reporting diagnostics to `err`.
pub fn execute(cli: &Cli, err: &mut dyn Write) -> ExitStatus {
    let (status, lines) = match dispatch(&cli.command) {
        Ok(Outcome { status, notes }) => (status, notes),
        Err(f) => (f.status, f.lines),
    };
    for line in lines {
        // The error stream is best effort.
        let _ = writeln!(err, "{line}");
    }
    status
}

struct Outcome {
    status: ExitStatus,
    notes: Vec<String>,
}

impl Outcome {
    fn ok(notes: Vec<String>) -> Outcome {
        Outcome {
            status: ExitStatus::Success,
            notes,
        }
    }
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate {
            ontology,
            training,
            out,
        } => {
            let (original, notes) = load_ontology(ontology)?;
            let axioms = load_training(training, &original)?;
            let v =
                validate_detailed(&original, &axioms).map_err(|e| Failure::in_file(training, e))?;
            write_file(out, &write_feedback(&v.feedback))?;
            Ok(Outcome::ok(notes))
        }
        Command::Learn {
            feedback,
            ontology,
            learning,
            out,
        } => {
            let params = learning.params()?;
            let (original, notes) = load_ontology(ontology)?;
            let fos =
                read_feedback(&read_text(feedback)?).map_err(|e| Failure::in_file(feedback, e))?;
            let learned = learn(&fos, &original, &params)?;
            write_file(out, &write_updates(&describe_updates(&original, &learned)?))?;
            Ok(Outcome::ok(notes))
        }
        Command::Apply {
            ontology,
            updates,
            out,
        } => {
            let (original, notes) = load_ontology(ontology)?;
            let list =
                read_updates(&read_text(updates)?).map_err(|e| Failure::in_file(updates, e))?;
            let (updated, _) = apply_updates(&original, &assignment_of(&list))?;
            write_file(out, &serialize_ontology(&updated))?;
            Ok(Outcome::ok(notes))
        }
        Command::Run {
            ontology,
            training,
            learning,
            out,
        } => {
            let params = learning.params()?;
            let (original, mut notes) = load_ontology(ontology)?;
            let axioms = load_training(training, &original)?;
            let v =
                validate_detailed(&original, &axioms).map_err(|e| Failure::in_file(training, e))?;
            let learned = learn(&v.feedback, &original, &params)?;
            let updates = describe_updates(&original, &learned)?;
            let (updated, records) = apply_updates(&original, &learned)?;
            for r in &records {
                info!("{} {} -> {}", r.adaptor, r.old, r.new);
            }
            write_file(&sibling(out, "feedback.json"), &write_feedback(&v.feedback))?;
            write_file(&sibling(out, "updates.json"), &write_updates(&updates))?;
            write_file(out, &serialize_ontology(&updated))?;

            let mut status = ExitStatus::Success;
            for w in &v.unattributed {
                notes.push(format!("error: unrepairable: {w}"));
                status = ExitStatus::Unrepairable;
            }
            for fo in v
                .feedback
                .iter()
                .filter(|fo| !fo.was_correct && fo.required.is_none())
            {
                notes.push(format!(
                    "error: unrepairable: no value of adaptor `{}` restores consistency for `{}`",
                    fo.adaptor,
                    fo.individual.as_deref().unwrap_or("?")
                ));
                status = ExitStatus::Unrepairable;
            }
            Ok(Outcome { status, notes })
        }
        Command::Simulate {
            scenario,
            iterations,
            seed,
            schedule,
            fixtures,
            per_iteration,
            noise,
            learning,
            out,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let mut config = SimulationConfig::new(scenario, *seed);
            config.params = learning.params()?;
            config.noise_rate = *noise;
            if let Some(n) = per_iteration {
                config.per_iteration = *n;
            }
            if let Some(spec) = schedule {
                config.schedule = parse_schedule(spec)?;
            }
            match (scenario, fixtures) {
                (Scenario::Geo, Some(dir)) => {
                    config.fixtures = load_geo_fixtures(dir)?;
                    config.iterations = config.fixtures.len();
                }
                (Scenario::Geo, None) => {
                    return Err(Failure::input("error: the geo scenario needs --fixtures"));
                }
                (_, Some(_)) => {
                    return Err(Failure::input(
                        "error: --fixtures only applies to the geo scenario",
                    ));
                }
                (_, None) => {}
            }
            if let Some(n) = iterations {
                config.iterations = *n;
            }
            let sim = run_simulation(&scenario.ontology(), &config)?;
            let mut csv = Vec::new();
            write_trajectory(&mut csv, &config.rng_label(), &sim.trajectory)?;
            write_bytes(out, &csv)?;
            write_file(
                &out.with_extension("vago"),
                &serialize_ontology(&sim.ontology),
            )?;
            Ok(Outcome::ok(Vec::new()))
        }
    }
}

/// `dir/stem.<suffix>` for an output path `dir/stem.ext`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: error: cannot read file: {e}", path.display())))
}

fn load_ontology(path: &Path) -> Result<(Ontology, Vec<String>), Failure> {
    let parsed = read_ontology(path).map_err(Failure::diagnostics)?;
    let notes = parsed.warnings.iter().map(ToString::to_string).collect();
    Ok((parsed.ontology, notes))
}

fn load_training(path: &Path, original: &Ontology) -> Result<Vec<Axiom>, Failure> {
    read_training(path, original).map_err(Failure::diagnostics)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    write_bytes(path, contents.as_bytes())
}

fn write_bytes(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let cannot = |e: std::io::Error| {
        Failure::input(format!("{}: error: cannot write file: {e}", path.display()))
    };
    let mut w = BufWriter::new(File::create(path).map_err(cannot)?);
    w.write_all(contents).map_err(cannot)?;
    w.flush().map_err(cannot)
}
