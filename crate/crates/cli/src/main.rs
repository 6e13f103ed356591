use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cellsieve_cli::{
    cmd_evaluate, cmd_filter, cmd_synth, run_pipeline, run_shrinkage, Algorithm, DataPaths,
    RunConfig,
};
use cellsieve_core::{FilterConfig, Keep, Lambda, Polarity, SynthConfig, TTestKind};

/// Noise-filtered drug-sensitivity prediction.
#[derive(Parser)]
#[command(name = "cellsieve", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: load, align, filter (PA only), train, evaluate.
    Pipeline(PipelineArgs),
    /// Repeat the pipeline over shrinking training sets and report MAUC.
    Shrinkage(ShrinkageArgs),
    /// Compute per-sample projection degrees only.
    Filter(FilterArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Evaluate an existing score file against clinical labels.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Training expression matrix (`sample_id,<gene>,...`).
    #[arg(long)]
    train_x: PathBuf,
    /// Training responses (`sample_id,value`).
    #[arg(long)]
    train_y: PathBuf,
    /// Test expression matrix.
    #[arg(long)]
    test_x: PathBuf,
    /// Test clinical labels (`sample_id,label`).
    #[arg(long)]
    test_labels: PathBuf,
}

#[derive(Args)]
struct FilterFlags {
    /// Dimension of the projection subspace.
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Keep exactly this many lowest-degree samples.
    #[arg(long, conflicts_with_all = ["keep_frac", "keep_theta"])]
    keep_count: Option<usize>,
    /// Keep this fraction of samples (default 0.75).
    #[arg(long, conflicts_with = "keep_theta")]
    keep_frac: Option<f64>,
    /// Keep samples with degree at most this threshold.
    #[arg(long)]
    keep_theta: Option<f64>,
}

impl FilterFlags {
    fn to_config(&self) -> FilterConfig {
        let keep = if let Some(q) = self.keep_count {
            Keep::Count(q)
        } else if let Some(f) = self.keep_frac {
            Keep::Fraction(f)
        } else if let Some(d) = self.keep_theta {
            Keep::MaxDegree(d)
        } else {
            FilterConfig::default().keep
        };
        FilterConfig { t: self.t, keep }
    }
}

#[derive(Args)]
struct LearnerFlags {
    /// SVR box constraint.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// SVR tube half-width.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Sigmoid kernel scale (default: 1 / number of aligned genes).
    #[arg(long)]
    gamma: Option<f64>,
    /// Sigmoid kernel offset.
    #[arg(long, default_value_t = 0.0)]
    coef0: f64,
    /// Ridge penalty; omitted selects it by leave-one-out error.
    #[arg(long)]
    lambda: Option<f64>,
    /// SVR stopping tolerance on the KKT violation.
    #[arg(long, default_value_t = 1e-3)]
    svr_tol: f64,
}

#[derive(Args)]
struct EvalFlags {
    /// Score direction: lower-sensitive (IC50-like) or higher-sensitive.
    #[arg(long, default_value = "lower-sensitive")]
    polarity: String,
    /// Two-sample t-test flavor: welch or pooled.
    #[arg(long, default_value = "welch")]
    t_test: String,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Algorithm: PA+SVR+L, PA+SVR+S, PA+RR, B+SVR+L, B+SVR+S, or B+RR.
    #[arg(long)]
    algorithm: String,
    #[command(flatten)]
    filter: FilterFlags,
    #[command(flatten)]
    learner: LearnerFlags,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Omit the timing field from report.json.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ShrinkageArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comma-separated non-increasing training-set sizes, e.g. 200,198,196.
    #[arg(long)]
    sizes: String,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    train_x: PathBuf,
    #[command(flatten)]
    filter: FilterFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Training samples.
    #[arg(long)]
    m: usize,
    /// Genes.
    #[arg(long)]
    n: usize,
    /// Test patients.
    #[arg(long)]
    p: usize,
    /// Fraction of training rows corrupted, in [0, 1).
    #[arg(long, default_value_t = 0.2)]
    noise_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    clean_sigma: f64,
    #[arg(long, default_value_t = 5.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predicted scores (`sample_id,value`).
    #[arg(long)]
    scores: PathBuf,
    /// Clinical labels (`sample_id,label`).
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long)]
    out: PathBuf,
}

fn parse_polarity(s: &str) -> Result<Polarity, String> {
    match s {
        "lower-sensitive" => Ok(Polarity::LowerSensitive),
        "higher-sensitive" => Ok(Polarity::HigherSensitive),
        _ => Err(format!(
            "unknown polarity `{}` (expected lower-sensitive or higher-sensitive)",
            s
        )),
    }
}

fn parse_t_test(s: &str) -> Result<TTestKind, String> {
    match s {
        "welch" => Ok(TTestKind::Welch),
        "pooled" => Ok(TTestKind::Pooled),
        _ => Err(format!("unknown t-test `{}` (expected welch or pooled)", s)),
    }
}

fn build_config(args: &PipelineArgs) -> Result<RunConfig, String> {
    let algorithm = Algorithm::parse(&args.algorithm)
        .ok_or_else(|| format!("unknown algorithm `{}`", args.algorithm))?;
    let mut cfg = RunConfig::new(algorithm);
    cfg.filter = args.filter.to_config();
    cfg.learner.c = args.learner.c;
    cfg.learner.epsilon = args.learner.epsilon;
    cfg.learner.gamma = args.learner.gamma;
    cfg.learner.coef0 = args.learner.coef0;
    cfg.learner.lambda = match args.learner.lambda {
        Some(l) => Lambda::Fixed(l),
        None => Lambda::Auto,
    };
    cfg.learner.svr_tol = args.learner.svr_tol;
    cfg.polarity = parse_polarity(&args.eval.polarity)?;
    cfg.t_kind = parse_t_test(&args.eval.t_test)?;
    cfg.seed = args.seed;
    cfg.no_timing = args.no_timing;
    Ok(cfg)
}

fn data_paths(d: &DataArgs) -> DataPaths {
    DataPaths {
        train_x: d.train_x.clone(),
        train_y: d.train_y.clone(),
        test_x: d.test_x.clone(),
        test_labels: d.test_labels.clone(),
    }
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad size `{}` in --sizes", tok))
        })
        .collect()
}

const EXIT_INPUT: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

fn fail(e: cellsieve_core::Error) -> ExitCode {
    eprintln!("error: {}", e);
    if e.is_convergence_failure() {
        ExitCode::from(EXIT_CONVERGENCE)
    } else {
        ExitCode::from(EXIT_INPUT)
    }
}

fn fail_usage(msg: String) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Pipeline(args) => {
            let cfg = match build_config(&args) {
                Ok(c) => c,
                Err(msg) => return fail_usage(msg),
            };
            match run_pipeline(&cfg, &data_paths(&args.data), &args.out) {
                Ok(run) => {
                    if let Some(w) = &run.alignment_warning {
                        eprintln!("warning: {}", w);
                    }
                    println!(
                        "{}: m={} n={} q={} auc={:.6} p={:.3e}",
                        cfg.algorithm.as_str(),
                        run.m,
                        run.n,
                        run.q,
                        run.eval.auc,
                        run.eval.p_value
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Shrinkage(args) => {
            let cfg = match build_config(&args.pipeline) {
                Ok(c) => c,
                Err(msg) => return fail_usage(msg),
            };
            let sizes = match parse_sizes(&args.sizes) {
                Ok(s) => s,
                Err(msg) => return fail_usage(msg),
            };
            match run_shrinkage(&cfg, &data_paths(&args.pipeline.data), &sizes, &args.pipeline.out)
            {
                Ok(summary) => {
                    for (size, run) in summary.sizes.iter().zip(&summary.runs) {
                        println!("size={} auc={:.6}", size, run.eval.auc);
                    }
                    println!("mauc={:.6}", summary.mauc);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Filter(args) => {
            let filter = args.filter.to_config();
            match cmd_filter(&args.train_x, &filter, &args.out) {
                Ok(rows) => {
                    let kept = rows.iter().filter(|r| r.selected).count();
                    println!("degrees written for {} samples, {} selected", rows.len(), kept);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Synth(args) => {
            let cfg = SynthConfig {
                m: args.m,
                n: args.n,
                p: args.p,
                noise_fraction: args.noise_fraction,
                clean_sigma: args.clean_sigma,
                noise_sigma: args.noise_sigma,
                seed: args.seed,
            };
            match cmd_synth(&cfg, &args.out) {
                Ok(()) => {
                    println!(
                        "synthetic dataset written: m={} n={} p={} seed={}",
                        cfg.m, cfg.n, cfg.p, cfg.seed
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Evaluate(args) => {
            let polarity = match parse_polarity(&args.eval.polarity) {
                Ok(p) => p,
                Err(msg) => return fail_usage(msg),
            };
            let t_kind = match parse_t_test(&args.eval.t_test) {
                Ok(k) => k,
                Err(msg) => return fail_usage(msg),
            };
            match cmd_evaluate(&args.scores, &args.labels, polarity, t_kind, &args.out) {
                Ok(eval) => {
                    println!(
                        "auc={:.6} t={:.4} p={:.3e} (n+={} n-={})",
                        eval.auc, eval.t_statistic, eval.p_value, eval.n_sensitive, eval.n_resistant
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
