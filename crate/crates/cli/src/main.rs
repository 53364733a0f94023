//! `rfzone`: simulate RFID reads over a zoned floorplan, train a decision
//! tree on (reader IP, antenna, RSSI), and evaluate zone predictions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rfzone_cli::{
    cmd_evaluate, cmd_generate, cmd_pipeline, cmd_train, cmd_weights, CliError, EvalOptions,
    EvalOutcome, Fold, RunConfig, SimOptions, TrainOptions, WeightMode,
};
use rfzone_core::dtree::SplitCriterion;

#[derive(Parser)]
#[command(name = "rfzone", version, about = "RFID zone-inference pipeline")]
struct Cli {
    /// Master seed; every downstream artifact is a pure function of it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SimArgs {
    /// Floorplan document; the bundled 12-zone lab is used when omitted.
    #[arg(long)]
    floorplan: Option<PathBuf>,

    /// Number of acquisition sessions to simulate.
    #[arg(long, default_value_t = SimOptions::default().sessions)]
    sessions: u32,

    /// Reads each tag emits per antenna per session.
    #[arg(long, default_value_t = SimOptions::default().reads_per_tag_per_session)]
    reads_per_tag_per_session: u32,

    /// Power at the reference distance, dBm.
    #[arg(long, default_value_t = SimOptions::default().p0, allow_hyphen_values = true)]
    p0: f64,

    /// Reference distance, meters.
    #[arg(long, default_value_t = SimOptions::default().d0)]
    d0: f64,

    /// Path-loss exponent.
    #[arg(long, default_value_t = SimOptions::default().eta)]
    eta: f64,

    /// Shadowing standard deviation, dB.
    #[arg(long, default_value_t = SimOptions::default().sigma)]
    sigma: f64,
}

impl SimArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            sessions: self.sessions,
            reads_per_tag_per_session: self.reads_per_tag_per_session,
            p0: self.p0,
            d0: self.d0,
            eta: self.eta,
            sigma: self.sigma,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Stratified subsample size taken before splitting.
    #[arg(long, default_value_t = TrainOptions::default().subsample_target)]
    subsample_target: usize,

    /// Fraction of rows the test sessions must reach.
    #[arg(long, default_value_t = TrainOptions::default().test_fraction)]
    test_fraction: f64,

    /// Split criterion: gini or entropy.
    #[arg(long, default_value = "gini", value_parser = parse_criterion)]
    criterion: SplitCriterion,

    /// Maximum tree depth.
    #[arg(long, default_value_t = TrainOptions::default().max_depth)]
    max_depth: u32,

    /// Minimum samples required to split a node.
    #[arg(long, default_value_t = TrainOptions::default().min_samples_split)]
    min_samples_split: usize,

    /// Where class weights come from: pre-subsample, post-subsample or
    /// uniform.
    #[arg(long, default_value = "pre-subsample", value_parser = parse_weight_mode)]
    weight_mode: WeightMode,
}

impl TrainArgs {
    fn options(&self) -> TrainOptions {
        TrainOptions {
            subsample_target: self.subsample_target,
            test_fraction: self.test_fraction,
            criterion: self.criterion,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            weight_mode: self.weight_mode,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Bootstrap resamples for confidence intervals; 0 disables.
    #[arg(long, default_value_t = EvalOptions::default().bootstrap_resamples)]
    bootstrap_resamples: u32,

    /// Confidence level for the bootstrap intervals.
    #[arg(long, default_value_t = EvalOptions::default().ci_level)]
    ci_level: f64,

    /// Cost of confusing two adjacent zones.
    #[arg(long, default_value_t = EvalOptions::default().adjacent_cost)]
    adjacent_cost: f64,

    /// Cost of confusing two non-adjacent zones.
    #[arg(long, default_value_t = EvalOptions::default().non_adjacent_cost)]
    non_adjacent_cost: f64,
}

impl EvalArgs {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            bootstrap_resamples: self.bootstrap_resamples,
            ci_level: self.ci_level,
            adjacent_cost: self.adjacent_cost,
            non_adjacent_cost: self.non_adjacent_cost,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate reads over a floorplan and write them as CSV.
    Generate {
        #[command(flatten)]
        sim: SimArgs,

        /// Output CSV path.
        #[arg(long, default_value = "reads.csv")]
        out: PathBuf,
    },

    /// Label, weight, subsample, split and fit; persist model and manifests.
    Train {
        /// Floorplan document; the bundled 12-zone lab is used when omitted.
        #[arg(long)]
        floorplan: Option<PathBuf>,

        /// Reads CSV to train on.
        #[arg(long)]
        reads: PathBuf,

        #[command(flatten)]
        train: TrainArgs,

        /// Directory for model.json, split.json and weights.csv.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },

    /// Evaluate a persisted model and write the report files.
    Evaluate {
        /// Floorplan document; the bundled 12-zone lab is used when omitted.
        #[arg(long)]
        floorplan: Option<PathBuf>,

        /// Persisted model (model.json).
        #[arg(long)]
        model: PathBuf,

        /// Reads CSV the folds are re-derived from.
        #[arg(long)]
        reads: PathBuf,

        /// Split manifest from training; omit to evaluate the whole file.
        #[arg(long)]
        split: Option<PathBuf>,

        /// Which fold to evaluate (test or train); requires --split.
        #[arg(long, value_parser = parse_fold)]
        fold: Option<Fold>,

        #[command(flatten)]
        eval: EvalArgs,

        /// Directory for the report files.
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
    },

    /// Run generate, train and evaluate from one seed and write a manifest.
    Pipeline {
        #[command(flatten)]
        sim: SimArgs,

        #[command(flatten)]
        train: TrainArgs,

        #[command(flatten)]
        eval: EvalArgs,

        /// Directory for all run artifacts.
        #[arg(long, default_value = "run")]
        out_dir: PathBuf,
    },

    /// Compute the per-zone class-weight table for a reads file.
    Weights {
        /// Floorplan document; the bundled 12-zone lab is used when omitted.
        #[arg(long)]
        floorplan: Option<PathBuf>,

        /// Reads CSV to weigh.
        #[arg(long)]
        reads: PathBuf,

        /// Optional CSV output path for the weight report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_criterion(s: &str) -> Result<SplitCriterion, String> {
    s.parse()
        .map_err(|e: rfzone_core::dtree::TreeError| e.to_string())
}

fn parse_weight_mode(s: &str) -> Result<WeightMode, String> {
    s.parse()
}

fn parse_fold(s: &str) -> Result<Fold, String> {
    s.parse()
}

fn print_eval(outcome: &EvalOutcome) {
    let report = &outcome.report;
    println!("evaluated {} rows ({} fold)", outcome.rows, outcome.fold);
    println!("accuracy:            {:.4}", report.accuracy);
    println!("macro-F1:            {:.4}", report.aggregates.macro_f1);
    println!("micro-F1:            {:.4}", report.aggregates.micro_f1);
    println!("adjacency accuracy:  {:.4}", report.adjacency_accuracy);
    println!("risk:                {:.4}", report.risk);
    for (name, ci) in &report.cis {
        println!(
            "{name} {:.0}% CI: [{:.4}, {:.4}]",
            ci.level * 100.0,
            ci.lower,
            ci.upper
        );
    }
    println!("report files in {}", outcome.out_dir.display());
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { sim, out } => {
            let outcome = cmd_generate(sim.floorplan.as_deref(), &sim.options(), cli.seed, &out)?;
            println!(
                "wrote {} reads to {}",
                outcome.reads,
                outcome.out_path.display()
            );
            println!("reads per zone:");
            for (zone, count) in &outcome.per_zone {
                println!("  {zone}: {count}");
            }
            Ok(())
        }
        Command::Train {
            floorplan,
            reads,
            train,
            out_dir,
        } => {
            let outcome = cmd_train(
                floorplan.as_deref(),
                &reads,
                &train.options(),
                cli.seed,
                &out_dir,
            )?;
            println!(
                "labeled {} rows; subsampled to {}; split {} train / {} test (test sessions {:?})",
                outcome.labeled_rows,
                outcome.subsample_rows,
                outcome.train_rows,
                outcome.test_rows,
                outcome.test_sessions
            );
            println!(
                "tree: depth {}, {} nodes ({} leaves)",
                outcome.stats.depth, outcome.stats.node_count, outcome.stats.leaf_count
            );
            print!("{}", outcome.weights.to_text());
            println!("model: {}", outcome.model_path.display());
            println!("split manifest: {}", outcome.split_path.display());
            println!("weight report: {}", outcome.weights_path.display());
            Ok(())
        }
        Command::Evaluate {
            floorplan,
            model,
            reads,
            split,
            fold,
            eval,
            out_dir,
        } => {
            let outcome = cmd_evaluate(
                &model,
                &reads,
                split.as_deref(),
                floorplan.as_deref(),
                fold,
                &eval.options(),
                cli.seed,
                &out_dir,
            )?;
            print_eval(&outcome);
            Ok(())
        }
        Command::Pipeline {
            sim,
            train,
            eval,
            out_dir,
        } => {
            let config = RunConfig {
                floorplan: sim.floorplan.clone(),
                sim: sim.options(),
                train: train.options(),
                eval: eval.options(),
                seed: cli.seed,
                out_dir,
            };
            let outcome = cmd_pipeline(&config)?;
            print_eval(&outcome.eval);
            println!(
                "manifest with {} artifacts: {}",
                outcome.artifact_count,
                outcome.manifest_path.display()
            );
            Ok(())
        }
        Command::Weights {
            floorplan,
            reads,
            out,
        } => {
            let outcome = cmd_weights(floorplan.as_deref(), &reads, out.as_deref())?;
            print!("{}", outcome.weights.to_text());
            if let Some(path) = outcome.out_path {
                println!("weight report: {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
