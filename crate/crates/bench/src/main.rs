use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use fusetrack_bench::dataset::{discover_sequences, load_attributes, load_otb_sequence, write_sequence};
use fusetrack_bench::eval::{evaluate, run_ope, EvalReport};
use fusetrack_bench::report::{emit_report, format_summary, load_reports};
use fusetrack_bench::synth::{parse_synth_spec, synth_sequence};
use fusetrack_bench::{config::load_config, BenchError};
use fusetrack_core::tracker::TrackerConfig;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fusetrack", version, about = "Correlation-filter + color tracker and its evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one OTB-layout sequence and write its report.
    Track {
        seq_dir: PathBuf,
        /// Flat `key = value` tracker configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Evaluate every sequence under a dataset root.
    Bench {
        dataset_root: PathBuf,
        /// Comma-separated sequence names (default: all).
        #[arg(long, value_delimiter = ',')]
        sequences: Option<Vec<String>>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Sequences evaluated concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render a scripted synthetic sequence in OTB layout.
    Synth {
        spec_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the summary of an existing results directory.
    Report { results_dir: PathBuf },
}

fn tracker_config(path: Option<&Path>) -> anyhow::Result<TrackerConfig> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => TrackerConfig::default(),
    })
}

fn evaluate_dir(dir: &Path, config: &TrackerConfig, attributes: Option<&[String]>) -> fusetrack_bench::Result<EvalReport> {
    let mut seq = load_otb_sequence(dir)?;
    if let Some(tags) = attributes {
        seq.attributes = tags.to_vec();
    }
    let run = run_ope(config, &seq)?;
    evaluate(&seq, &run)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Track { seq_dir, config, out } => {
            let config = tracker_config(config.as_deref())?;
            let report = evaluate_dir(&seq_dir, &config, None).with_context(|| format!("tracking {}", seq_dir.display()))?;
            let summary = emit_report(&[report], &out)?;
            print!("{}", format_summary(&summary));
        }
        Command::Bench { dataset_root, sequences, config, out, jobs } => {
            let config = tracker_config(config.as_deref())?;
            let mut dirs = discover_sequences(&dataset_root)?;
            if let Some(names) = &sequences {
                for n in names {
                    if !dirs.iter().any(|d| d.file_name().is_some_and(|f| f == n.as_str())) {
                        bail!("sequence {n:?} not found under {}", dataset_root.display());
                    }
                }
                dirs.retain(|d| d.file_name().and_then(|f| f.to_str()).is_some_and(|f| names.iter().any(|n| n == f)));
            }
            if dirs.is_empty() {
                bail!("no sequences found under {}", dataset_root.display());
            }
            let tags = load_attributes(&dataset_root)?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
            let results: Vec<(PathBuf, Result<EvalReport, BenchError>)> = pool.install(|| {
                dirs.par_iter()
                    .map(|d| {
                        let name = d.file_name().and_then(|f| f.to_str()).unwrap_or_default();
                        let attrs = tags.get(name).map(Vec::as_slice);
                        (d.clone(), evaluate_dir(d, &config, attrs))
                    })
                    .collect()
            });
            let mut reports = Vec::new();
            let mut failures = 0;
            for (dir, r) in results {
                match r {
                    Ok(rep) => reports.push(rep),
                    Err(e) => {
                        failures += 1;
                        eprintln!("error: {}: {e}", dir.display());
                    }
                }
            }
            if !reports.is_empty() {
                let summary = emit_report(&reports, &out)?;
                print!("{}", format_summary(&summary));
            }
            if failures > 0 {
                bail!("{failures} sequence(s) failed");
            }
        }
        Command::Synth { spec_file, out } => {
            let text = std::fs::read_to_string(&spec_file).with_context(|| format!("reading {}", spec_file.display()))?;
            let spec = parse_synth_spec(&text)?;
            let seq = synth_sequence(&spec)?;
            write_sequence(&seq, &out)?;
            println!("wrote {} frames to {}", seq.len(), out.display());
        }
        Command::Report { results_dir } => {
            let reports = load_reports(&results_dir)?;
            if reports.is_empty() {
                bail!("no results found under {}", results_dir.display());
            }
            let summary = emit_report(&reports, &results_dir)?;
            print!("{}", format_summary(&summary));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
