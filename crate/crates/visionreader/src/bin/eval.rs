use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use visionreader::analysis::{
    field_report_to_csv, join_predictions, parse_predictions, report_by_field,
};
use visionreader::data::load_dataset;
use visionreader::metrics::{evaluate, MetricOptions};

/// Scores a predictions file against gold answers with exact match and
/// token-level F1.
#[derive(Parser)]
#[command(name = "eval", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Join predictions to gold by (image_id, question) and print the
    /// report as JSON.
    Run {
        /// Gold dataset JSONL.
        #[arg(long)]
        gold: PathBuf,
        /// Predictions JSONL ({image_id, question, prediction}).
        #[arg(long)]
        pred: PathBuf,
        /// Per-pair F1 as P·R/(P+R) instead of the harmonic mean.
        #[arg(long)]
        literal_eq9: bool,
        /// Compare without lowercasing / whitespace collapsing.
        #[arg(long)]
        no_normalize: bool,
        /// Also write a per-category CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run_eval(
    gold: PathBuf,
    pred: PathBuf,
    literal_eq9: bool,
    no_normalize: bool,
    csv: Option<PathBuf>,
) -> Result<()> {
    let records =
        load_dataset(&gold).with_context(|| format!("loading gold from {}", gold.display()))?;
    let predictions = parse_predictions(
        &fs::read_to_string(&pred)
            .with_context(|| format!("reading predictions from {}", pred.display()))?,
    )?;
    let pairs = join_predictions(&records, &predictions)?;
    let opts = MetricOptions {
        normalize: !no_normalize,
        literal_eq9,
    };
    let report = evaluate(&pairs, opts)?;
    use std::io::Write;
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&report)?
    );
    if let Some(path) = csv {
        let field_report = report_by_field(&pairs, opts);
        fs::write(&path, field_report_to_csv(&field_report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run {
            gold,
            pred,
            literal_eq9,
            no_normalize,
            csv,
        } => run_eval(gold, pred, literal_eq9, no_normalize, csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("eval: {err:#}");
            ExitCode::FAILURE
        }
    }
}
