//! `longtrack` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use longtrack::evaluation::{self, SequenceReport};
use longtrack::io;
use longtrack::pipeline::{self, TrackerConfig};
use longtrack::simulator::{self, ScenarioSpec};

#[derive(Parser)]
#[command(name = "longtrack", version, about = "Long-term single-object tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scenario into a sequence directory.
    Simulate(SimulateArgs),
    /// Track a sequence directory and write predictions plus a run log.
    Track(TrackArgs),
    /// Score a prediction file against groundtruth.
    Evaluate(EvaluateArgs),
    /// Generate, track and score the standard scenario battery.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario description (TOML).
    #[arg(long, conflicts_with = "standard", required_unless_present = "standard")]
    spec: Option<PathBuf>,
    /// Name of a built-in scenario instead of a file.
    #[arg(long)]
    standard: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrackArgs {
    /// Tracker configuration; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `sequence` from the config.
    #[arg(long)]
    sequence: Option<PathBuf>,
    /// Overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    /// Sequence directory or a bare groundtruth file.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Track(a) => track(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Suite(a) => suite(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// The error chain on one line, skipping causes the outer message already
/// quotes.
fn one_line(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out.replace('\n', " ")
}

fn load_config(path: Option<&Path>) -> Result<TrackerConfig> {
    match path {
        Some(p) => TrackerConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(TrackerConfig::default()),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let spec = match (&a.spec, &a.standard) {
        (Some(p), _) => io::read_scenario(p)?,
        (None, Some(name)) => find_standard(name)?,
        (None, None) => bail!("one of --spec or --standard is required"),
    };
    let seq = simulator::generate(&spec, a.seed)?;
    io::write_sequence(&a.out, &seq)?;
    println!("{}: {} frames written to {}", seq.name, seq.len(), a.out.display());
    Ok(())
}

fn find_standard(name: &str) -> Result<ScenarioSpec> {
    let specs = simulator::standard_specs();
    match specs.iter().find(|s| s.name == name) {
        Some(s) => Ok(s.clone()),
        None => {
            let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
            bail!("unknown scenario `{name}` (known: {})", names.join(", "))
        }
    }
}

fn track(a: TrackArgs) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if a.sequence.is_some() {
        cfg.sequence = a.sequence;
    }
    if a.out.is_some() {
        cfg.output = a.out;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let run = pipeline::run_configured(&cfg)?;
    let present = run.track.records.iter().filter(|r| r.bbox.is_some()).count();
    println!("{} frames tracked, {present} reported present", run.track.len());
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let pred = io::read_predictions(&a.pred)?;
    let (name, attributes, gt) = if a.gt.is_dir() {
        let gt = io::read_groundtruth(&a.gt.join(io::GROUNDTRUTH_FILE))?;
        match io::read_meta(&a.gt) {
            Ok(m) => (m.name, m.attributes, gt),
            Err(_) => (dir_name(&a.gt), Default::default(), gt),
        }
    } else {
        (dir_name(&a.gt), Default::default(), io::read_groundtruth(&a.gt)?)
    };
    let e = evaluation::evaluate(&pred, &gt)?;
    let report = SequenceReport {
        name,
        attributes,
        report: e.report,
    };
    io::write_text(&a.out.join("summary.csv"), &evaluation::summary_csv(&[report]))?;
    io::write_text(&a.out.join("pr_curve.csv"), &evaluation::pr_curve_csv(&e))?;
    io::write_text(&a.out.join("success.csv"), &evaluation::success_curve_csv(&e))?;
    if a.svg {
        let pr = evaluation::curves_svg(
            "precision / recall / F vs confidence threshold",
            &[("precision", &e.precision), ("recall", &e.recall), ("F", &e.f)],
        );
        io::write_text(&a.out.join("pr_curve.svg"), &pr)?;
        let sc = evaluation::curves_svg("success vs overlap threshold", &[("success", &e.success)]);
        io::write_text(&a.out.join("success.svg"), &sc)?;
    }
    let r = e.report;
    println!(
        "F={:.4} (tau={:.4}) Pr={:.4} Re={:.4} AUC={:.4} P@20={:.4}",
        r.f_score, r.best_tau, r.pr_at_best, r.re_at_best, r.success_auc, r.precision_at_20
    );
    Ok(())
}

fn dir_name(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into())
}

fn suite(a: SuiteArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let result = pipeline::run_suite(&cfg, a.seed, Some(&a.out))?;
    print!("{}", result.attribute_csv());
    Ok(())
}
