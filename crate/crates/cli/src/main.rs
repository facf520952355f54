use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rstboost::boosting::{BoostConfig, ShuffleRule};
use rstboost::encoder::{EncoderConfig, TruncationStrategy};
use rstboost_cli::commands::{self, read_synth_plan, SynthPlan};
use rstboost_cli::{
    CompareOptions, CurveOptions, EvalOptions, HarnessError, ParseOptions, TrainOptions,
};

#[derive(Parser)]
#[command(
    name = "rstboost",
    version,
    about = "Boosted shift-reduce discourse parsing"
)]
struct Cli {
    /// Master seed for data generation and training.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic in-domain train/test and out-of-domain test treebanks.
    Synth {
        /// JSON synth plan; the built-in default is used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a boosted ensemble.
    Train {
        treebank: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// TrainReport destination (default: <out>.report.json).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Parse a treebank or raw-EDU file with a trained model.
    Parse {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of steps to use (default: all).
        #[arg(long)]
        prefix: Option<usize>,
        /// Print the action trace of every document to stdout.
        #[arg(long)]
        trace: bool,
    },
    /// Score predicted trees against gold trees.
    Eval {
        gold: PathBuf,
        pred: PathBuf,
        /// Also write the scores as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Value for the CSV `m` column.
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Score every prefix of a model on one or more treebanks.
    Curve {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        treebanks: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an n-step weak ensemble with one parameter-matched strong learner.
    Compare {
        treebank: PathBuf,
        /// Choose the strong learner's width to match total parameters.
        #[arg(long)]
        match_params: bool,
        /// Held-out treebanks (default: hold out part of the training file).
        #[arg(long = "eval")]
        eval: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelFlags,
    },
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 1e-6)]
    l2: f64,
    #[arg(long, default_value_t = 1.0)]
    init_scale: f64,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 3)]
    patience: usize,
    #[arg(long, default_value_t = 0.1)]
    dev_fraction: f64,
    /// Keep oracle order instead of reshuffling every epoch.
    #[arg(long)]
    no_shuffle: bool,
    #[arg(long, default_value_t = 1024)]
    hash_dim: usize,
    #[arg(long, default_value_t = 8)]
    max_span_tokens: usize,
    /// `nucleus` or `center`.
    #[arg(long, default_value = "nucleus", value_parser = parse_strategy)]
    truncation: TruncationStrategy,
    #[arg(long, default_value_t = 0)]
    hash_seed: u64,
}

fn parse_strategy(s: &str) -> Result<TruncationStrategy, String> {
    match s {
        "nucleus" => Ok(TruncationStrategy::Nucleus),
        "center" => Ok(TruncationStrategy::Center),
        _ => Err(format!("unknown truncation strategy `{s}`")),
    }
}

impl ModelFlags {
    fn configs(&self, seed: u64) -> (BoostConfig, EncoderConfig) {
        let boost = BoostConfig {
            n_steps: self.steps,
            hidden_dim: self.hidden,
            init_scale: self.init_scale,
            learning_rate: self.lr,
            l2_penalty: self.l2,
            batch_size: self.batch_size,
            epochs_max: self.epochs,
            patience: self.patience,
            dev_fraction: self.dev_fraction,
            seed,
            shuffle: if self.no_shuffle {
                ShuffleRule::None
            } else {
                ShuffleRule::PerEpoch
            },
        };
        let encoder = EncoderConfig {
            max_span_tokens: self.max_span_tokens,
            hash_dim: self.hash_dim,
            truncation_strategy: self.truncation,
            hash_seed: self.hash_seed,
        };
        (boost, encoder)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let say = |msg: String| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Synth { config, out } => {
            let plan = match &config {
                Some(p) => read_synth_plan(p)?,
                None => SynthPlan::default(),
            };
            let paths = commands::cmd_synth(&plan, config.as_deref(), cli.seed, &out)?;
            for p in paths {
                say(format!("wrote {}", p.display()));
            }
        }
        Command::Train {
            treebank,
            out,
            report,
            model,
        } => {
            let (boost, encoder) = model.configs(cli.seed);
            let report = commands::cmd_train(&TrainOptions {
                treebank,
                out: out.clone(),
                report,
                boost,
                encoder,
            })?;
            for s in &report.steps {
                say(format!(
                    "step {}: train loss {:.4} -> {:.4}, best epoch {}/{}, {:.2}s",
                    s.step,
                    s.initial_train_loss,
                    s.final_train_loss,
                    s.best_epoch,
                    s.epochs_run,
                    s.seconds
                ));
            }
            say(format!("wrote {}", out.display()));
        }
        Command::Parse {
            model,
            input,
            out,
            prefix,
            trace,
        } => {
            let outcome = commands::cmd_parse(&ParseOptions {
                model,
                input,
                out: out.clone(),
                prefix,
                trace,
            })?;
            if let Some(t) = &outcome.trace {
                print!("{t}");
            }
            say(format!(
                "parsed {} documents with prefix {} into {}",
                outcome.docs,
                outcome.prefix,
                out.display()
            ));
        }
        Command::Eval { gold, pred, out, m } => {
            let (_, csv) = commands::cmd_eval(&EvalOptions {
                gold,
                pred,
                out_csv: out,
                m,
            })?;
            print!("{csv}");
        }
        Command::Curve {
            model,
            treebanks,
            out,
        } => {
            let table = commands::cmd_curve(&CurveOptions {
                model,
                treebanks,
                out,
            })?;
            if !cli.quiet {
                print!("{}", table.to_csv());
                for g in &table.gaps {
                    println!("gap m={}: {:+.4}", g.m, g.gap);
                }
            }
        }
        Command::Compare {
            treebank,
            match_params,
            eval,
            holdout,
            out,
            model,
        } => {
            let (boost, encoder) = model.configs(cli.seed);
            let report = commands::cmd_compare(&CompareOptions {
                treebank,
                eval,
                out: out.clone(),
                match_params,
                holdout_fraction: holdout,
                boost,
                encoder,
            })?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            say(format!(
                "weak {} params, strong {} params (ratio {:.4}); wrote {}",
                report.weak.param_total,
                report.strong.param_total,
                report.param_ratio,
                out.display()
            ));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
