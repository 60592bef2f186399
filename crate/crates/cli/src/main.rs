// SPDX-License-Identifier: Apache-2.0

//! `htgnn`: extract graphs, generate a synthetic corpus, train, detect and
//! run leave-one-family-out evaluations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use htgnn_core::gnn::{load_model, loss_history_csv, predict, save_model, GraphInput};
use htgnn_core::hdl::SourceFile;
use htgnn_core::pipeline::{
    extract_graph, ingest, run_experiment, synthesize_corpus, train_on_manifest, write_graphs, ExperimentConfig,
    FoldReport,
};
use htgnn_core::{Dialect, Label};

#[derive(Parser)]
#[command(name = "htgnn", version, about = "Hardware Trojan detection on Verilog data-flow graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph for every manifest entry and write `.htg` files.
    Extract {
        #[arg(long)]
        dialect: Dialect,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded corpus of clean and infected designs in both dialects.
    SynthCorpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        free: usize,
        #[arg(long, default_value_t = 25)]
        infected: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on every design of the configured manifest.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Model checkpoint to write.
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch mean loss as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Classify one design. Exit status: 0 free, 2 infected, 1 error.
    Detect {
        #[arg(long)]
        model: PathBuf,
        /// Verilog files of the design.
        #[arg(required = true)]
        sources: Vec<PathBuf>,
    },
    /// Leave-one-family-out evaluation. The report is rewritten after every fold.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    // usage errors exit 1 so that 2 keeps meaning "infected"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Extract { dialect, manifest, out } => {
            let report = ingest(&manifest, dialect)?;
            for f in &report.failures {
                eprintln!("skipped {}: {}", f.id, f.message);
            }
            write_graphs(&report, &out)?;
            println!("{} graphs written to {}, {} failed", report.graphs.len(), out.display(), report.failures.len());
            if report.graphs.is_empty() && !report.failures.is_empty() {
                bail!("no design could be extracted");
            }
        }
        Command::SynthCorpus { seed, free, infected, out } => {
            if free == 0 || infected == 0 {
                bail!("--free and --infected must both be at least 1");
            }
            synthesize_corpus(seed, free, infected).write(&out)?;
            println!("{} designs written to {}", free + infected, out.display());
        }
        Command::Train { config, out, history } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (model, losses, failures) = train_on_manifest(&cfg)?;
            for f in &failures {
                eprintln!("skipped {}: {}", f.id, f.message);
            }
            write(&out, &save_model(&model))?;
            if let Some(path) = history {
                write(&path, loss_history_csv(&losses).as_bytes())?;
            }
            println!(
                "trained {} epochs, final mean loss {:.6}, model written to {}",
                losses.len(),
                losses.last().copied().unwrap_or(f64::NAN),
                out.display()
            );
        }
        Command::Detect { model, sources } => return detect(&model, &sources),
        Command::Eval { config, report } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut done: Vec<FoldReport> = Vec::new();
            let mut save_error = None;
            let result = run_experiment(&cfg, &mut |fold| {
                eprintln!(
                    "{} repeat {}: precision {:.3} recall {:.3} f {:.3}",
                    fold.family, fold.repeat, fold.metrics.precision, fold.metrics.recall, fold.metrics.f_beta
                );
                done.push(fold.clone());
                let partial = serde_json::json!({ "partial": true, "folds": done });
                if let Err(e) = write(&report, serde_json::to_string_pretty(&partial).expect("json").as_bytes()) {
                    save_error.get_or_insert(e);
                }
            })?;
            if let Some(e) = save_error {
                return Err(e);
            }
            write(&report, result.to_json().as_bytes())?;
            if let Some(a) = result.aggregate {
                println!(
                    "{} folds: mean precision {:.3}, mean recall {:.3}, mean f {:.3}",
                    a.folds, a.mean_precision, a.mean_recall, a.mean_f_beta
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn detect(model: &Path, sources: &[PathBuf]) -> Result<ExitCode> {
    let bytes = std::fs::read(model).with_context(|| format!("reading {}", model.display()))?;
    let params = load_model(&bytes).with_context(|| format!("loading {}", model.display()))?;
    let dialect: Dialect = params.config.dialect;
    let files = sources
        .iter()
        .map(|p| SourceFile::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let graph = extract_graph(&files, dialect)?;
    let input = GraphInput::from_graph(&graph)?;
    let p = predict(&params, &input)?;
    let verdict = serde_json::json!({
        "verdict": p.label,
        "p_infected": p.probs[0],
        "dialect": dialect,
        "nodes": graph.len(),
        "edges": graph.edges.len(),
    });
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(ExitCode::from(if p.label == Label::Infected { 2 } else { 0 }))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
