use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthpipe_core::benchmark::{generate_table, to_tsv, BenchmarkSpec};
use synthpipe_core::config::{parse_delimiter, ConfigOverrides, SynthesisMode};
use synthpipe_core::pipeline::{evaluate_files, EvaluateOptions};
use synthpipe_core::{load_config, run_pipeline, PipelineError};

/// Synthetic microdata with k-synthetic anonymity, protected aggregates and evaluation reports.
#[derive(Parser, Debug)]
#[command(name = "synthpipe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full pipeline from a JSON config.
    Run(RunArgs),
    /// Evaluate any synthetic TSV against its sensitive source.
    Evaluate(EvaluateArgs),
    /// Write a seeded synthetic benchmark dataset as TSV.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Reporting threshold k.
    #[arg(long)]
    k: Option<u64>,
    /// Reporting precision p.
    #[arg(long)]
    p: Option<u64>,
    /// Reporting length (maximum combination length).
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    mode: Option<SynthesisMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    delimiter: Option<String>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    sensitive: PathBuf,
    #[arg(long)]
    synthetic: PathBuf,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    len: usize,
    #[arg(long, default_value = "\\t")]
    delimiter: String,
    /// Comma-separated columns whose zero values count as attributes.
    #[arg(long, value_delimiter = ',')]
    sensitive_zeros: Vec<String>,
    /// Where to write the report TSV and SVG files.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 2000)]
    records: usize,
    #[arg(long, default_value_t = 24)]
    columns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn configure_threads() {
    let Ok(value) = std::env::var("SYNTHPIPE_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("cannot configure {n} worker threads: {e}");
            }
        }
        _ => log::warn!("ignoring invalid SYNTHPIPE_THREADS={value:?}"),
    }
}

fn run(args: RunArgs) -> Result<(), PipelineError> {
    let overrides = ConfigOverrides {
        k: args.k,
        p: args.p,
        len: args.len,
        mode: args.mode,
        seed: args.seed,
        input: args.input,
        output_dir: args.output_dir,
        delimiter: args.delimiter,
    };
    let config = load_config(&args.config, &overrides)?;
    let manifest = run_pipeline(&config)?;
    println!(
        "{} sensitive records -> {} synthetic records (synthesis ratio {:.4}, {})",
        manifest.dataset.records,
        manifest.synthetic_records,
        manifest.synthesis_ratio_value,
        manifest.synthesis_ratio
    );
    println!(
        "{} combinations released, {} leaked",
        manifest.released_combinations, manifest.leaked_combinations
    );
    println!("wrote {} files to {}", manifest.files.len() + 1, config.output_dir.display());
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), PipelineError> {
    let mut options = EvaluateOptions::new(args.sensitive, args.synthetic, args.k, args.len);
    options.delimiter = parse_delimiter(&args.delimiter)?;
    options.sensitive_zeros = args.sensitive_zeros;
    options.output_dir = args.output_dir;
    let summary = evaluate_files(&options)?;
    println!("length\tcombos\tleaks");
    for row in &summary.leakage_by_length {
        println!("{}\t{}\t{}", row.length, row.combo_count, row.leak_count);
    }
    println!("synthesis ratio {}", summary.synthesis_ratio);
    println!("total leaked combinations: {}", summary.total_leaks());
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), PipelineError> {
    let spec = BenchmarkSpec::sparse(args.records, args.columns);
    let table = generate_table(&spec, args.seed);
    std::fs::write(&args.output, to_tsv(&table)).map_err(|source| PipelineError::Write {
        path: args.output.clone(),
        source,
    })?;
    println!("wrote {} records x {} columns to {}", args.records, table.header.len(), args.output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Generate(args) => generate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
