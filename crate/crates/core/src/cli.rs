//! Command-line front end. `run` returns the process exit status: 0 on
//! success, 2 on usage errors, 1 on data or estimator errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::betaproc2d::{
    noninformative_estimate, posterior_mean_mass, prior_from_guess, update, BivariateMass,
    PriorGuess,
};
use crate::dabrowska::{dabrowska_estimate, mass_audit, MassAudit, SurvivalSurface};
use crate::exact::{format_significant, to_f64};
use crate::exec::Execution;
use crate::pruittlab::{self, PruittConfig};
use crate::simharness::{run_study_with, ScenarioConfig};
use crate::survdata::{compute_counts, parse_dataset, Dataset, Format, Time};
use crate::univariate::{km, MassCurve};

#[derive(Parser, Debug)]
#[command(
    name = "bivsurv",
    version,
    about = "Bivariate survival estimation from right-censored pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate from a CSV dataset and write JSON.
    Estimate(EstimateArgs),
    /// List rectangle masses of an estimated surface, flagging negative ones.
    Audit(AuditArgs),
    /// Dirichlet-process inconsistency demonstration.
    Pruitt(PruittArgs),
    /// Seeded consistency study from a JSON scenario.
    Study(StudyArgs),
    /// Dabrowska and noninformative surfaces side by side at query points.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Noninformative,
    Bayes,
    Dabrowska,
    KmMarginal,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorKind,
    /// Prior guess JSON (required for, and only valid with, `bayes`).
    #[arg(long)]
    prior: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "dabrowska")]
    estimator: EstimatorKind,
}

#[derive(Args, Debug)]
struct PruittArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "M")]
    m: f64,
    #[arg(long)]
    seed: u64,
    /// Written to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Per-replication CSV.
    #[arg(long)]
    output: PathBuf,
    /// Full JSON report including per-n summaries.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    input: PathBuf,
    /// CSV with header `s,t`.
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

/// JSON written by `estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "kebab-case")]
pub enum EstimateOutput {
    Noninformative { mass: BivariateMass },
    Bayes { mass: BivariateMass },
    Dabrowska { surface: SurvivalSurface },
    KmMarginal { first: MassCurve, second: MassCurve },
}

/// JSON written by `audit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOutput {
    pub estimator: String,
    pub negative_cells: usize,
    pub audit: MassAudit,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

/// Run with the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// `argv[0]` is the program name.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Estimate(a) => estimate(&a),
        Command::Audit(a) => audit(&a),
        Command::Pruitt(a) => pruitt(&a, stdout),
        Command::Study(a) => study(&a),
        Command::Table(a) => table(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(Failure::Data(format!(
            "input not found: {}",
            path.display()
        ))),
        Err(e) => Err(Failure::Data(format!("{}: {e}", path.display()))),
    }
}

fn read_dataset(path: &Path) -> Result<Dataset, Failure> {
    Ok(parse_dataset(open_input(path)?, Format::Csv)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Data(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn noninformative(ds: &Dataset) -> Result<BivariateMass, Failure> {
    Ok(noninformative_estimate(&compute_counts(ds)?)?)
}

fn estimate(a: &EstimateArgs) -> Result<(), Failure> {
    if a.prior.is_some() != (a.estimator == EstimatorKind::Bayes) {
        return Err(Failure::Usage(
            "--prior is required for, and only accepted with, --estimator bayes".into(),
        ));
    }
    let ds = read_dataset(&a.input)?;
    let out = match a.estimator {
        EstimatorKind::Noninformative => EstimateOutput::Noninformative {
            mass: noninformative(&ds)?,
        },
        EstimatorKind::Bayes => {
            let path = a.prior.as_deref().unwrap_or(Path::new(""));
            let guess: PriorGuess = serde_json::from_reader(open_input(path)?)
                .map_err(|e| Failure::Data(format!("prior: {e}")))?;
            let prior = prior_from_guess(&guess)?;
            let ds = Dataset::with_grid(ds.observations, prior.grid.clone()).map_err(|e| {
                Failure::Data(format!("prior grid must contain every observed time: {e}"))
            })?;
            let posterior = update(&prior, &compute_counts(&ds)?)?;
            EstimateOutput::Bayes {
                mass: posterior_mean_mass(&posterior)?,
            }
        }
        EstimatorKind::Dabrowska => EstimateOutput::Dabrowska {
            surface: dabrowska_estimate(&ds)?,
        },
        EstimatorKind::KmMarginal => EstimateOutput::KmMarginal {
            first: km(&ds.first_margin(), &ds.grid)?,
            second: km(&ds.second_margin(), &ds.grid)?,
        },
    };
    write_json(&a.output, &out)
}

fn audit(a: &AuditArgs) -> Result<(), Failure> {
    let ds = read_dataset(&a.input)?;
    let (name, surface) = match a.estimator {
        EstimatorKind::Dabrowska => ("dabrowska", dabrowska_estimate(&ds)?),
        EstimatorKind::Noninformative => (
            "noninformative",
            SurvivalSurface::from_mass(&noninformative(&ds)?),
        ),
        _ => {
            return Err(Failure::Usage(
                "audit supports --estimator dabrowska or noninformative".into(),
            ))
        }
    };
    let audit = mass_audit(&surface);
    write_json(
        &a.output,
        &AuditOutput {
            estimator: name.into(),
            negative_cells: audit.negatives.len(),
            audit,
        },
    )
}

fn pruitt(a: &PruittArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let report = pruittlab::run(&PruittConfig {
        n: a.n,
        m_conc: a.m,
        seed: a.seed,
    })?;
    match &a.output {
        Some(path) => write_json(path, &report),
        None => {
            serde_json::to_writer_pretty(&mut *stdout, &report)
                .map_err(|e| Failure::Data(e.to_string()))?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}

fn study(a: &StudyArgs) -> Result<(), Failure> {
    let cfg: ScenarioConfig = serde_json::from_reader(open_input(&a.config)?)
        .map_err(|e| Failure::Data(format!("config: {e}")))?;
    let mode = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report = run_study_with(&cfg, mode)?;
    report.write_csv(BufWriter::new(File::create(&a.output)?))?;
    if let Some(path) = &a.json {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct Query {
    s: Time,
    t: Time,
}

fn table(a: &TableArgs) -> Result<(), Failure> {
    let ds = read_dataset(&a.input)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_input(&a.queries)?);
    let headers = reader
        .headers()
        .map_err(|e| Failure::Data(format!("queries: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["s", "t"] {
        return Err(Failure::Data("queries: header must be s,t".into()));
    }
    let queries = reader
        .deserialize::<Query>()
        .enumerate()
        .map(|(k, q)| q.map_err(|e| Failure::Data(format!("queries line {}: {e}", k + 2))))
        .collect::<Result<Vec<_>, _>>()?;

    let dab = dabrowska_estimate(&ds)?;
    let non = SurvivalSurface::from_mass(&noninformative(&ds)?);
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&a.output)?));
    let csv_err = |e: csv::Error| Failure::Data(e.to_string());
    w.write_record(["s", "t", "dabrowska", "noninformative"])
        .map_err(csv_err)?;
    for q in &queries {
        w.write_record([
            q.s.to_string(),
            q.t.to_string(),
            format_significant(to_f64(&dab.at(q.s, q.t)), 15),
            format_significant(to_f64(&non.at(q.s, q.t)), 15),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
