use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use visionreader::data::{assign_splits, load_dataset, save_dataset};
use visionreader::forge::{compute_stats, generate_qa, load_metadata, Cleaner, TemplateBank};

/// Dataset construction tools: build a QA corpus from book metadata and
/// report corpus statistics.
#[derive(Parser)]
#[command(name = "forge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Clean metadata, assign per-image splits, and synthesize one QA
    /// record per present field.
    Build {
        /// Book metadata JSONL ({image_id, title, author?, ...}).
        #[arg(long)]
        meta: PathBuf,
        /// Template bank JSONL ({category, text}); bundled bank if omitted.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Train,dev,test fractions summing to 1.
        #[arg(long, value_delimiter = ',', default_value = "0.7,0.15,0.15")]
        ratios: Vec<f64>,
        /// Output dataset JSONL path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print corpus statistics for a dataset as JSON.
    Stats {
        /// Dataset JSONL.
        #[arg(long)]
        data: PathBuf,
        /// Optional metadata JSONL for unique-value counts.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
}

fn build(
    meta: PathBuf,
    templates: Option<PathBuf>,
    seed: u64,
    ratios: Vec<f64>,
    out: PathBuf,
) -> Result<()> {
    let [train, dev, test] = ratios.as_slice() else {
        bail!("--ratios needs exactly three comma-separated fractions");
    };
    let bank = match templates {
        Some(path) => TemplateBank::load(&path)
            .with_context(|| format!("loading templates from {}", path.display()))?,
        None => TemplateBank::bundled(),
    };
    let raw_books = load_metadata(&meta)
        .with_context(|| format!("loading metadata from {}", meta.display()))?;
    let cleaner = Cleaner::default();
    let books: Vec<_> = raw_books.iter().map(|b| cleaner.clean(b)).collect();
    let ids: Vec<String> = books.iter().map(|b| b.image_id.clone()).collect();
    let splits = assign_splits(&ids, (*train, *dev, *test), seed)?;
    let mut records = Vec::new();
    for book in &books {
        records.extend(generate_qa(book, &bank, seed, splits[&book.image_id])?);
    }
    save_dataset(&out, &records)?;
    let stats = compute_stats(&records, &books);
    eprintln!(
        "wrote {} records for {} images to {}",
        records.len(),
        stats.images,
        out.display()
    );
    use std::io::Write;
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&stats)?
    );
    Ok(())
}

fn stats(data: PathBuf, meta: Option<PathBuf>) -> Result<()> {
    let records = load_dataset(&data)?;
    let books = match meta {
        Some(path) => load_metadata(&path)?,
        None => Vec::new(),
    };
    let stats = compute_stats(&records, &books);
    use std::io::Write;
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&stats)?
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Build {
            meta,
            templates,
            seed,
            ratios,
            out,
        } => build(meta, templates, seed, ratios, out),
        Cmd::Stats { data, meta } => stats(data, meta),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("forge: {err:#}");
            ExitCode::FAILURE
        }
    }
}
