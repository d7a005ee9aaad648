//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error (parse failure,
//! divergence, failed gradient check). Human-readable progress goes to
//! stderr; machine outputs go only to the paths given by flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pairembed::checkpoint::Checkpoint;
use pairembed::data::{self, SyntheticMode, SyntheticSpec};
use pairembed::eval;
use pairembed::gradcheck;
use pairembed::losses::Margin;
use pairembed::train::{self, TrainConfig};

const GRADCHECK_THRESHOLD: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "pairembed",
    version,
    about = "Train and evaluate pair embeddings with a joint softmax + contrastive objective"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Blobs,
    Textures,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    GenData {
        #[arg(long, value_enum, default_value_t = ModeArg::Blobs)]
        mode: ModeArg,
        #[arg(long, default_value_t = 8)]
        classes: usize,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        /// Feature dimension (blobs only).
        #[arg(long)]
        dim: Option<usize>,
        /// Image side length (textures only).
        #[arg(long)]
        side: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
        #[arg(long, default_value_t = 4.0)]
        separation: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on a dataset CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Key-value config file; command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_model: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a trained model on a dataset CSV.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check all analytic gradients against finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
    },
    /// Train across a λ grid and seed set, writing one CSV row per run.
    SweepLambda {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated λ values, e.g. `0,0.1,0.5,1,2`.
        #[arg(long)]
        lambdas: String,
        /// Comma-separated seeds, e.g. `1,2,3,4,5`.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export per-sample embeddings, optionally with a 2-D PCA projection.
    ExportEmbeddings {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "pca2d")]
        pca2d: bool,
    },
}

enum CliError {
    Usage(String),
    Runtime(pairembed::Error),
}

impl From<pairembed::Error> for CliError {
    fn from(e: pairembed::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            // One-line diagnostic: clap's message up to the usage block.
            let text = e.to_string();
            let diagnostic: Vec<&str> = text
                .lines()
                .take_while(|l| !l.is_empty() && !l.starts_with("Usage:"))
                .map(str::trim)
                .collect();
            eprintln!("{}", diagnostic.join(" "));
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenData {
            mode,
            classes,
            per_class,
            dim,
            side,
            spread,
            separation,
            seed,
            out,
        } => {
            let mode = match mode {
                ModeArg::Blobs => {
                    if side.is_some() {
                        return Err(CliError::Usage("--side applies to textures only".into()));
                    }
                    SyntheticMode::Blobs { dim: dim.unwrap_or(16) }
                }
                ModeArg::Textures => {
                    if dim.is_some() {
                        return Err(CliError::Usage("--dim applies to blobs only".into()));
                    }
                    SyntheticMode::Textures { side: side.unwrap_or(16) }
                }
            };
            let spec = SyntheticSpec {
                mode,
                n_classes: classes,
                per_class,
                spread,
                separation,
                seed,
            };
            let ds = data::gen_synthetic(&spec)?;
            data::save_csv(&ds, &out)?;
            eprintln!(
                "wrote {} samples ({} classes, {} features) to {}",
                ds.len(),
                ds.n_classes(),
                ds.feature_dim(),
                out.display()
            );
            Ok(())
        }

        Command::Train {
            data: data_path,
            config,
            lambda,
            margin,
            lr,
            epochs,
            batch,
            seed,
            out_model,
            log,
        } => {
            let mut cfg = match config {
                Some(path) => TrainConfig::from_file(path)?,
                None => TrainConfig::default(),
            };
            if let Some(v) = lambda {
                cfg.lambda = v;
            }
            if let Some(v) = margin {
                cfg.margin = v;
            }
            if let Some(v) = lr {
                cfg.learning_rate = v;
            }
            if let Some(v) = epochs {
                cfg.epochs = v;
            }
            if let Some(v) = batch {
                cfg.batch_size = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }

            let mut ds = data::load_csv(&data_path)?;
            let mean = data::normalize_mean(&mut ds, &mut [])?;
            eprintln!(
                "training on {} samples, {} classes, lambda {}, seed {}",
                ds.len(),
                ds.n_classes(),
                cfg.lambda,
                cfg.seed
            );
            let (params, train_log) = train::train(&ds, &cfg)?;
            for r in &train_log.epochs {
                eprintln!(
                    "epoch {:>3}/{}: total {:.6} cls {:.6} contrastive {:.6} acc {:.4}",
                    r.epoch, cfg.epochs, r.mean_total, r.mean_cls, r.mean_contrastive,
                    r.train_accuracy
                );
            }
            if let Some(path) = out_model {
                Checkpoint::new(params, mean)?.save(&path)?;
                eprintln!("model written to {}", path.display());
            }
            if let Some(path) = log {
                train_log.write_csv(&path)?;
                eprintln!("log written to {}", path.display());
            }
            Ok(())
        }

        Command::Eval {
            data: data_path,
            model,
            margin,
            out,
        } => {
            let ckpt = Checkpoint::load(&model)?;
            let mut ds = data::load_csv(&data_path)?;
            data::apply_mean(&mut ds, &ckpt.mean)?;
            let m = Margin::new(margin)?;
            let metrics = eval::metrics(&ckpt.params, &ds, m)?;
            eval::write_metrics(&metrics, &out)?;
            eprintln!(
                "accuracy {:.4}, separability {:.4}, metrics written to {}",
                metrics.accuracy,
                metrics.separability,
                out.display()
            );
            Ok(())
        }

        Command::Gradcheck { seed, eps } => {
            let report = gradcheck::check_joint_objective(seed, eps)?;
            println!("max relative gradient error: {:e}", report.max_rel_err);
            if report.max_rel_err < GRADCHECK_THRESHOLD {
                Ok(())
            } else {
                Err(CliError::Runtime(pairembed::Error::Domain(format!(
                    "gradient check failed: {:e} >= {GRADCHECK_THRESHOLD:e} \
                     ({} derivatives checked)",
                    report.max_rel_err, report.n_checked
                ))))
            }
        }

        Command::SweepLambda {
            train: train_path,
            test: test_path,
            config,
            lambdas,
            seeds,
            out,
        } => {
            let lambda_list = parse_list::<f64>(&lambdas, "--lambdas")?;
            let seed_list = parse_list::<u64>(&seeds, "--seeds")?;
            let cfg = match config {
                Some(path) => TrainConfig::from_file(path)?,
                None => TrainConfig::default(),
            };
            let train_ds = data::load_csv(&train_path)?;
            let test_ds = data::load_csv(&test_path)?;
            eprintln!(
                "sweeping {} lambda values x {} seeds",
                lambda_list.len(),
                seed_list.len()
            );
            let rows = eval::lambda_sweep(&train_ds, &test_ds, &cfg, &lambda_list, &seed_list)?;
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "cell lambda {} seed {} failed: {}",
                    r.lambda,
                    r.seed,
                    r.error.as_deref().unwrap_or("")
                );
            }
            eval::write_sweep_csv(&rows, &out)?;
            eprintln!("{} rows written to {}", rows.len(), out.display());
            Ok(())
        }

        Command::ExportEmbeddings {
            data: data_path,
            model,
            out,
            pca2d,
        } => {
            let ckpt = Checkpoint::load(&model)?;
            let mut ds = data::load_csv(&data_path)?;
            data::apply_mean(&mut ds, &ckpt.mean)?;
            eval::export_embeddings(&ckpt.params, &ds, &out, pca2d)?;
            eprintln!(
                "{} embedding rows written to {}",
                ds.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Usage(format!("{flag}: bad value '{s}'")))
        })
        .collect()
}
