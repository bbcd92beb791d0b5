use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use visionreader::analysis::{run, Bucketer, Command, RunSpec};
use visionreader::data::{Category, Split};
use visionreader::fusion::AblationFlags;

/// OCR-VQA pipeline: dataset construction, training, evaluation,
/// ablations, bucket reports, and data-fraction sweeps.
#[derive(Parser)]
#[command(name = "vrk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file (all configs carry "version": 1).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the run seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Categories to keep, comma separated (default: all except genre).
    #[arg(long, value_delimiter = ',')]
    fields: Option<Vec<Category>>,
    /// Output root for run directories (VRK_RUN_DIR overrides the
    /// default `runs/`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct AblationArgs {
    /// Drop object-region features from the fused input.
    #[arg(long)]
    no_object: bool,
    /// Drop OCR features and OCR text from the fused input.
    #[arg(long)]
    no_ocr: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a dataset from metadata (or a synthetic world) per config.
    Build {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train a model; writes checkpoint + training log.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ablation: AblationArgs,
    },
    /// Evaluate a checkpoint on a split, or score a predictions file.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ablation: AblationArgs,
        /// Checkpoint to evaluate (may also come from the config).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Split to decode: train, dev, or test.
        #[arg(long, default_value = "test")]
        split: String,
        /// Gold dataset JSONL (file-mode scoring).
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Predictions JSONL (file-mode scoring).
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Score per-pair F1 as P·R/(P+R) instead of the harmonic mean.
        #[arg(long)]
        literal_eq9: bool,
        /// Compare answers without lowercasing / whitespace collapsing.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Train with an input channel removed; train with ablation flags.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ablation: AblationArgs,
    },
    /// Train once per data fraction on nested train subsets.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Fractions of train images, e.g. 0.25,0.5,0.75,1.0
        #[arg(long, value_delimiter = ',')]
        fractions: Vec<f64>,
    },
    /// Score a predictions file against gold and emit field/bucket tables.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Additionally group by this bucketer: answer_len, question_len,
        /// or ocr_coverage.
        #[arg(long)]
        bucketer: Option<String>,
        #[arg(long)]
        literal_eq9: bool,
        #[arg(long)]
        no_normalize: bool,
    },
}

fn apply_common(spec: &mut RunSpec, common: &CommonArgs) {
    spec.config = common.config.clone();
    spec.seed = common.seed;
    if let Some(fields) = &common.fields {
        spec.field_scope = fields.clone();
    }
    spec.out_root = common.out.clone();
}

fn parse_split(s: &str) -> Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "dev" => Ok(Split::Dev),
        "test" => Ok(Split::Test),
        other => Err(format!("unknown split \"{other}\"")),
    }
}

fn build_spec(cli: Cli) -> Result<RunSpec, String> {
    let spec = match cli.command {
        Cmd::Build { common } => {
            let mut spec = RunSpec::new(Command::Build);
            apply_common(&mut spec, &common);
            spec
        }
        Cmd::Train { common, ablation } => {
            let mut spec = RunSpec::new(Command::Train);
            apply_common(&mut spec, &common);
            spec.ablation = AblationFlags {
                no_object: ablation.no_object,
                no_ocr: ablation.no_ocr,
            };
            spec
        }
        Cmd::Ablate { common, ablation } => {
            let mut spec = RunSpec::new(Command::Ablate);
            apply_common(&mut spec, &common);
            spec.ablation = AblationFlags {
                no_object: ablation.no_object,
                no_ocr: ablation.no_ocr,
            };
            spec
        }
        Cmd::Eval {
            common,
            ablation,
            checkpoint,
            split,
            gold,
            pred,
            literal_eq9,
            no_normalize,
        } => {
            let mut spec = RunSpec::new(Command::Eval);
            apply_common(&mut spec, &common);
            spec.ablation = AblationFlags {
                no_object: ablation.no_object,
                no_ocr: ablation.no_ocr,
            };
            spec.checkpoint = checkpoint;
            spec.eval_split = parse_split(&split)?;
            spec.gold = gold;
            spec.pred = pred;
            spec.literal_eq9 = literal_eq9;
            spec.no_normalize = no_normalize;
            spec
        }
        Cmd::Sweep { common, fractions } => {
            let mut spec = RunSpec::new(Command::Sweep);
            apply_common(&mut spec, &common);
            spec.fractions = Some(fractions);
            spec
        }
        Cmd::Report {
            common,
            gold,
            pred,
            bucketer,
            literal_eq9,
            no_normalize,
        } => {
            let mut spec = RunSpec::new(Command::Report);
            apply_common(&mut spec, &common);
            spec.gold = gold;
            spec.pred = pred;
            spec.bucketer = match bucketer {
                Some(name) => Some(name.parse::<Bucketer>()?),
                None => None,
            };
            spec.literal_eq9 = literal_eq9;
            spec.no_normalize = no_normalize;
            spec
        }
    };
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match build_spec(cli) {
        Ok(spec) => spec,
        Err(message) => {
            eprintln!("vrk: {message}");
            return ExitCode::FAILURE;
        }
    };
    match run(&spec) {
        Ok(summary) => {
            // tolerate a closed pipe (e.g. `vrk ... | head -1`)
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let _ = writeln!(out, "{}", summary.run_dir.display());
            for artifact in &summary.manifest.artifacts {
                let _ = writeln!(out, "  {}  {}", &artifact.sha256[..12], artifact.name);
            }
            print_field_table(&mut out, &summary.run_dir);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("vrk: {err}");
            ExitCode::FAILURE
        }
    }
}

/// Human-readable score table for eval/report runs; percentages live
/// only in this formatting layer, the artifacts stay fractional.
fn print_field_table(out: &mut impl std::io::Write, run_dir: &std::path::Path) {
    let Ok(text) = std::fs::read_to_string(run_dir.join("per_field.json")) else {
        return;
    };
    let Ok(report) = serde_json::from_str::<visionreader::analysis::FieldReport>(&text) else {
        return;
    };
    let _ = writeln!(
        out,
        "\n  {:<12} {:>8} {:>8} {:>6}",
        "field", "EM (%)", "F1 (%)", "n"
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "  {:<12} {:>8.2} {:>8.2} {:>6}",
            row.category.to_string(),
            row.em * 100.0,
            row.f1 * 100.0,
            row.n
        );
    }
}
