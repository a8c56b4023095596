//! `tpot` command line: data generators, single evolution runs, the RF
//! baseline, the multi-arm benchmark harness and pipeline export.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tpot_cli::csvio::load_csv;
use tpot_cli::error::CliError;
use tpot_cli::experiment::{run_experiment, run_rf_baseline, write_generated, write_outputs, ExperimentSpec};
use tpot_cli::runio::{artifact_from_run, export_pipeline, read_run, write_run};
use tpot_core::dataset::stratified_split;
use tpot_core::datagen::{
    generate_hill_valley, simulate_epistatic_dataset, EpistasisSpec, HillValleySpec,
};
use tpot_core::evolve::{evolve_run, GpConfig, SelectionMode};
use tpot_core::rng::{derive_seed, seeded_rng};

#[derive(Parser)]
#[command(name = "tpot", about = "Tree-based pipeline optimization for classification", version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliMode {
    Standard,
    Pareto,
    Random,
}

impl From<CliMode> for SelectionMode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Standard => SelectionMode::Standard,
            CliMode::Pareto => SelectionMode::Pareto,
            CliMode::Random => SelectionMode::RandomSearch,
        }
    }
}

#[derive(Subcommand)]
enum Commands {
    /// Generate a pure-epistasis SNP case/control dataset as CSV (+ metadata sidecar)
    GenEpistasis {
        /// Per-model target heritability in (0, 1)
        #[arg(long)]
        heritability: f64,
        /// Minor allele frequency of the predictive SNPs
        #[arg(long, default_value_t = 0.2)]
        maf: f64,
        /// Total rows (balanced cases/controls)
        #[arg(long)]
        sample_size: usize,
        /// Number of two-locus epistatic models
        #[arg(long, default_value_t = 4)]
        models: usize,
        /// Unassociated SNP columns
        #[arg(long, default_value_t = 92)]
        noise_snps: usize,
        /// Heritability tolerance for table generation
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic hill/valley series dataset as CSV
    GenHillvalley {
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        length: usize,
        /// Additive Gaussian noise standard deviation
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve pipelines against a CSV dataset and write a run artifact
    Evolve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "class")]
        label_col: String,
        #[arg(long, value_enum, default_value = "standard")]
        mode: CliMode,
        #[arg(long, default_value_t = 50)]
        pop: usize,
        #[arg(long, default_value_t = 30)]
        gens: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        budget_millis: u64,
        #[arg(long, default_value_t = 10)]
        max_depth: usize,
        #[arg(long, default_value_t = 20)]
        max_operators: usize,
        /// Run artifact output path (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the 500-tree random-forest control and print holdout accuracy
    BaselineRf {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "class")]
        label_col: String,
        #[arg(long, default_value_t = 500)]
        trees: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a multi-arm benchmark experiment from a spec document
    Bench {
        /// Experiment spec (JSON, version "tpot-exp/1")
        #[arg(long)]
        spec: PathBuf,
        /// Worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Override the spec's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the best pipeline of a run artifact
    Export {
        /// Run artifact produced by `evolve`
        #[arg(long)]
        run: PathBuf,
        /// Output path for the pipeline document (.txt rendering alongside)
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Commands::GenEpistasis {
            heritability,
            maf,
            sample_size,
            models,
            noise_snps,
            tolerance,
            seed,
            out,
        } => {
            let spec = EpistasisSpec {
                heritability_target: heritability,
                maf,
                n_models: models,
                predictive_snps: 2 * models,
                noise_snps,
                sample_size,
                tolerance,
            };
            let mut rng = seeded_rng(seed);
            let (ds, meta) = simulate_epistatic_dataset(&spec, &mut rng)?;
            write_generated(&ds, Some(&meta), &out)?;
            println!(
                "wrote {} rows x {} SNPs to {} (metadata sidecar alongside)",
                ds.n_rows(),
                ds.n_features(),
                out.display()
            );
            Ok(())
        }
        Commands::GenHillvalley { samples, length, noise, seed, out } => {
            let spec = HillValleySpec::new(samples, length, noise);
            let mut rng = seeded_rng(seed);
            let ds = generate_hill_valley(&spec, &mut rng)?;
            write_generated(&ds, None::<&()>, &out)?;
            println!("wrote {} rows x {} points to {}", ds.n_rows(), ds.n_features(), out.display());
            Ok(())
        }
        Commands::Evolve {
            data,
            label_col,
            mode,
            pop,
            gens,
            seed,
            budget_millis,
            max_depth,
            max_operators,
            out,
        } => {
            let loaded = load_csv(&data, &label_col)?;
            let cfg = GpConfig {
                population_size: pop,
                generations: gens,
                selection_mode: mode.into(),
                seed,
                eval_budget_millis: budget_millis,
                max_depth,
                max_operators,
                ..GpConfig::default()
            };
            let run = evolve_run(&cfg, &loaded.dataset)?;
            let fit = run.best.fitness.as_ref().expect("best evaluated");
            let artifact = artifact_from_run(&run, format!("csv:{}", data.display()), &cfg);
            write_run(&artifact, &out)?;
            println!(
                "best pipeline (internal balanced accuracy {:.4}, size {}): {}",
                fit.balanced_accuracy,
                fit.size,
                run.best.pipeline.render()
            );
            println!("run artifact written to {}", out.display());
            Ok(())
        }
        Commands::BaselineRf { data, label_col, trees, seed } => {
            let loaded = load_csv(&data, &label_col)?;
            let split = stratified_split(&loaded.dataset, 0.75, derive_seed(seed, 0))
                .map_err(|e| CliError::Data(e.to_string()))?;
            let (acc, size) = run_rf_baseline(&split.train, &split.test, seed, trees)?;
            println!("baseline random forest ({trees} trees): holdout balanced accuracy {acc:.4}, size {size}");
            Ok(())
        }
        Commands::Bench { spec, workers, out } => {
            let text = std::fs::read_to_string(&spec).map_err(|source| CliError::ReadData {
                path: spec.display().to_string(),
                source,
            })?;
            let mut parsed: ExperimentSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", spec.display())))?;
            if let Some(dir) = out {
                parsed.output_dir = Some(dir);
            }
            let output = if let Some(n) = workers {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| CliError::Run(e.to_string()))?;
                pool.install(|| run_experiment(&parsed))?
            } else {
                run_experiment(&parsed)?
            };
            for s in &output.report.body.summary {
                println!(
                    "{:<14} n={:<3} median acc {:.4} [{:.4}, {:.4}]  mean size {:.2}",
                    s.arm, s.n, s.median_accuracy, s.ci_low, s.ci_high, s.mean_size
                );
            }
            for f in &output.report.body.failures {
                eprintln!("failure: {} replicate {}: {}", f.arm, f.replicate, f.error);
            }
            if let Some(dir) = &parsed.output_dir {
                write_outputs(&output, dir)?;
                println!("report written to {}", dir.join("report.json").display());
            }
            Ok(())
        }
        Commands::Export { run, out } => {
            let artifact = read_run(&run)?;
            let pipeline = export_pipeline(&artifact, &out)?;
            println!("{}", pipeline.render());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success, real parse errors are usage errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
