//! Orchestration for the drug-sensitivity pipeline: load expression and
//! response files, optionally filter noisy training samples by projection
//! angle, train a ridge or ε-SVR model, score the test cohort, and emit
//! reports. Also drives the sample-shrinkage protocol and synthetic data
//! generation.

pub mod json;

use std::path::{Path, PathBuf};
use std::time::Instant;

use cellsieve_core::eval::evaluate;
use cellsieve_core::filter::filter_training_set;
use cellsieve_core::io::{align_genes, load_expression, load_labels, load_responses};
use cellsieve_core::model::fmt_f64;
use cellsieve_core::ridge::train_ridge;
use cellsieve_core::svr::train_svr;
use cellsieve_core::{
    ClinicalLabels, DenseMatrix, Error, EvalReport, ExpressionMatrix, FilterConfig, FilterReport,
    Keep, KernelSpec, Lambda, Polarity, Result, SplitMix64, SynthConfig, TTestKind,
};
use json::Obj;

/// The six algorithm variants: proposed approach (filtered) or baseline,
/// crossed with the three learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    PaSvrL,
    PaSvrS,
    PaRr,
    BSvrL,
    BSvrS,
    BRr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Ridge,
    SvrLinear,
    SvrSigmoid,
}

impl Algorithm {
    pub fn parse(s: &str) -> Option<Algorithm> {
        match s.to_ascii_uppercase().as_str() {
            "PA+SVR+L" => Some(Algorithm::PaSvrL),
            "PA+SVR+S" => Some(Algorithm::PaSvrS),
            "PA+RR" => Some(Algorithm::PaRr),
            "B+SVR+L" => Some(Algorithm::BSvrL),
            "B+SVR+S" => Some(Algorithm::BSvrS),
            "B+RR" => Some(Algorithm::BRr),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::PaSvrL => "PA+SVR+L",
            Algorithm::PaSvrS => "PA+SVR+S",
            Algorithm::PaRr => "PA+RR",
            Algorithm::BSvrL => "B+SVR+L",
            Algorithm::BSvrS => "B+SVR+S",
            Algorithm::BRr => "B+RR",
        }
    }

    /// Whether the noise filter runs before training.
    pub fn filtered(&self) -> bool {
        matches!(self, Algorithm::PaSvrL | Algorithm::PaSvrS | Algorithm::PaRr)
    }

    pub fn learner(&self) -> LearnerKind {
        match self {
            Algorithm::PaSvrL | Algorithm::BSvrL => LearnerKind::SvrLinear,
            Algorithm::PaSvrS | Algorithm::BSvrS => LearnerKind::SvrSigmoid,
            Algorithm::PaRr | Algorithm::BRr => LearnerKind::Ridge,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LearnerParams {
    pub c: f64,
    pub epsilon: f64,
    /// Sigmoid kernel scale; None means 1/n after gene alignment.
    pub gamma: Option<f64>,
    pub coef0: f64,
    pub lambda: Lambda,
    pub svr_tol: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            c: 1.0,
            epsilon: 0.1,
            gamma: None,
            coef0: 0.0,
            lambda: Lambda::Auto,
            svr_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub filter: FilterConfig,
    pub learner: LearnerParams,
    pub polarity: Polarity,
    pub t_kind: TTestKind,
    pub seed: u64,
    /// Suppress the timing field so identical runs are byte-identical.
    pub no_timing: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        RunConfig {
            algorithm,
            filter: FilterConfig::default(),
            learner: LearnerParams::default(),
            polarity: Polarity::LowerSensitive,
            t_kind: TTestKind::Welch,
            seed: 0,
            no_timing: false,
        }
    }
}

/// One row of the per-sample degree table.
#[derive(Debug, Clone)]
pub struct DegreeRow {
    pub sample_id: String,
    pub degree: f64,
    pub selected: bool,
}

/// In-memory result of one pipeline run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub m: usize,
    pub n: usize,
    pub q: usize,
    /// Present only for filtered (PA) algorithms.
    pub degrees: Option<Vec<DegreeRow>>,
    pub test_ids: Vec<String>,
    pub scores: Vec<f64>,
    pub labels: ClinicalLabels,
    pub eval: EvalReport,
    pub alignment_warning: Option<String>,
}

/// Reorders `values` (keyed by `ids`) to follow `wanted`; errors on ids
/// missing from the keyed set.
fn align_by_id<T: Clone>(
    wanted: &[String],
    ids: &[String],
    values: &[T],
    what: &str,
) -> Result<Vec<T>> {
    let index: std::collections::HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    wanted
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|&i| values[i].clone())
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("sample `{}` has no {}", id, what))
                })
        })
        .collect()
}

/// Core pipeline on already-loaded data: align genes, filter (PA only),
/// train, score the test cohort, evaluate.
pub fn run_on_data(
    cfg: &RunConfig,
    train: &ExpressionMatrix,
    responses_ids: &[String],
    responses: &[f64],
    test: &ExpressionMatrix,
    labels: &ClinicalLabels,
) -> Result<RunOutcome> {
    let y = align_by_id(&train.sample_ids, responses_ids, responses, "response")?;
    let outcomes = align_by_id(
        &test.sample_ids,
        &labels.sample_ids,
        &labels.outcomes,
        "clinical label",
    )?;
    let labels = ClinicalLabels::new(test.sample_ids.clone(), outcomes)?;

    let aligned = align_genes(train, test)?;
    let x = &aligned.train.values;
    let n = x.cols();
    let m = x.rows();

    let (xq, yq, degrees) = if cfg.algorithm.filtered() {
        let (xq, yq, report) = filter_training_set(x, &y, &cfg.filter)?;
        let rows = degree_rows(&aligned.train.sample_ids, &report);
        (xq, yq, Some(rows))
    } else {
        (x.clone(), y.clone(), None)
    };
    let q = xq.rows();

    let scores = train_and_score(cfg, &xq, &yq, &aligned.test.values, n)?;
    let eval = evaluate(&scores, &labels, cfg.polarity, cfg.t_kind)?;

    Ok(RunOutcome {
        m,
        n,
        q,
        degrees,
        test_ids: aligned.test.sample_ids.clone(),
        scores,
        labels,
        eval,
        alignment_warning: aligned.warning,
    })
}

fn degree_rows(sample_ids: &[String], report: &FilterReport) -> Vec<DegreeRow> {
    let selected: std::collections::HashSet<usize> = report.selected.iter().cloned().collect();
    sample_ids
        .iter()
        .enumerate()
        .map(|(i, id)| DegreeRow {
            sample_id: id.clone(),
            degree: report.degrees[i],
            selected: selected.contains(&i),
        })
        .collect()
}

fn train_and_score(
    cfg: &RunConfig,
    xq: &DenseMatrix,
    yq: &[f64],
    test: &DenseMatrix,
    n: usize,
) -> Result<Vec<f64>> {
    match cfg.algorithm.learner() {
        LearnerKind::Ridge => {
            let model = train_ridge(xq, yq, cfg.learner.lambda)?;
            model.predict(test)
        }
        LearnerKind::SvrLinear => {
            let model = train_svr(
                xq,
                yq,
                KernelSpec::Linear,
                cfg.learner.c,
                cfg.learner.epsilon,
                cfg.learner.svr_tol,
            )?;
            model.predict(test)
        }
        LearnerKind::SvrSigmoid => {
            let kernel = KernelSpec::Sigmoid {
                gamma: cfg.learner.gamma.unwrap_or(1.0 / n as f64),
                coef0: cfg.learner.coef0,
            };
            let model = train_svr(
                xq,
                yq,
                kernel,
                cfg.learner.c,
                cfg.learner.epsilon,
                cfg.learner.svr_tol,
            )?;
            model.predict(test)
        }
    }
}

/// Writes `content` to `path` atomically: temp file in the same directory,
/// then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::write(&tmp, content).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn polarity_str(p: Polarity) -> &'static str {
    match p {
        Polarity::HigherSensitive => "higher-sensitive",
        Polarity::LowerSensitive => "lower-sensitive",
    }
}

fn t_kind_str(k: TTestKind) -> &'static str {
    match k {
        TTestKind::Welch => "welch",
        TTestKind::Pooled => "pooled",
    }
}

fn config_json(cfg: &RunConfig) -> String {
    let mut keep = Obj::new();
    match cfg.filter.keep {
        Keep::Count(q) => keep.str("kind", "count").int("value", q as u64),
        Keep::Fraction(f) => keep.str("kind", "fraction").num("value", f),
        Keep::MaxDegree(d) => keep.str("kind", "max-degree").num("value", d),
    };
    let mut o = Obj::new();
    o.str("algorithm", cfg.algorithm.as_str())
        .int("t", cfg.filter.t as u64)
        .raw("keep", &keep.finish())
        .num("c", cfg.learner.c)
        .num("epsilon", cfg.learner.epsilon);
    match cfg.learner.gamma {
        Some(g) => o.num("gamma", g),
        None => o.raw("gamma", "null"),
    };
    o.num("coef0", cfg.learner.coef0);
    match cfg.learner.lambda {
        Lambda::Fixed(l) => o.num("lambda", l),
        Lambda::Auto => o.str("lambda", "auto"),
    };
    o.num("svr_tol", cfg.learner.svr_tol)
        .str("polarity", polarity_str(cfg.polarity))
        .str("t_test", t_kind_str(cfg.t_kind))
        .int("seed", cfg.seed);
    o.finish()
}

fn report_json(cfg: &RunConfig, run: &RunOutcome, elapsed: Option<f64>) -> String {
    let mut o = Obj::new();
    o.raw("config", &config_json(cfg))
        .int("m", run.m as u64)
        .int("n", run.n as u64)
        .int("q", run.q as u64);
    if let Some(rows) = &run.degrees {
        let items = rows.iter().map(|r| {
            let mut d = Obj::new();
            d.str("sample_id", &r.sample_id)
                .num("degree", r.degree)
                .bool("selected", r.selected);
            d.finish()
        });
        o.raw("degrees", &json::array(items));
    }
    o.num("auc", run.eval.auc)
        .num("t_statistic", run.eval.t_statistic)
        .num("degrees_of_freedom", run.eval.degrees_of_freedom)
        .num("p_value", run.eval.p_value)
        .int("n_sensitive", run.eval.n_sensitive as u64)
        .int("n_resistant", run.eval.n_resistant as u64);
    let preds = run
        .test_ids
        .iter()
        .zip(&run.scores)
        .zip(&run.labels.outcomes)
        .map(|((id, s), outcome)| {
            let mut p = Obj::new();
            p.str("sample_id", id)
                .num("score", *s)
                .str("label", outcome.as_str());
            p.finish()
        });
    o.raw("predictions", &json::array(preds));
    if let Some(w) = &run.alignment_warning {
        o.str("warning", w);
    }
    if let Some(secs) = elapsed {
        o.num("timing_seconds", secs);
    }
    let mut s = o.finish();
    s.push('\n');
    s
}

fn roc_csv(eval: &EvalReport) -> String {
    let mut s = String::from("threshold,fpr,tpr\n");
    for p in &eval.roc_points {
        let thr = if p.threshold.is_finite() {
            fmt_f64(p.threshold)
        } else {
            p.threshold.to_string()
        };
        s.push_str(&format!("{},{},{}\n", thr, fmt_f64(p.fpr), fmt_f64(p.tpr)));
    }
    s
}

fn predictions_csv(run: &RunOutcome) -> String {
    let mut s = String::from("sample_id,value\n");
    for (id, score) in run.test_ids.iter().zip(&run.scores) {
        s.push_str(&format!("{},{}\n", id, fmt_f64(*score)));
    }
    s
}

fn degrees_csv(rows: &[DegreeRow]) -> String {
    let mut s = String::from("sample_id,degree,selected\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{}\n",
            r.sample_id,
            fmt_f64(r.degree),
            if r.selected { 1 } else { 0 }
        ));
    }
    s
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// File paths for a pipeline run.
#[derive(Debug, Clone)]
pub struct DataPaths {
    pub train_x: PathBuf,
    pub train_y: PathBuf,
    pub test_x: PathBuf,
    pub test_labels: PathBuf,
}

/// Loaded pipeline inputs.
pub struct Dataset {
    pub train: ExpressionMatrix,
    pub response_ids: Vec<String>,
    pub responses: Vec<f64>,
    pub test: ExpressionMatrix,
    pub labels: ClinicalLabels,
}

pub fn load_dataset(paths: &DataPaths) -> Result<Dataset> {
    let train = load_expression(&paths.train_x)?;
    let resp = load_responses(&paths.train_y)?;
    let test = load_expression(&paths.test_x)?;
    let labels = load_labels(&paths.test_labels)?;
    Ok(Dataset {
        train,
        response_ids: resp.sample_ids,
        responses: resp.values,
        test,
        labels,
    })
}

fn write_run_outputs(
    cfg: &RunConfig,
    run: &RunOutcome,
    out_dir: &Path,
    elapsed: Option<f64>,
) -> Result<()> {
    ensure_dir(out_dir)?;
    write_atomic(&out_dir.join("report.json"), &report_json(cfg, run, elapsed))?;
    write_atomic(&out_dir.join("roc.csv"), &roc_csv(&run.eval))?;
    write_atomic(&out_dir.join("predictions.csv"), &predictions_csv(run))?;
    if let Some(rows) = &run.degrees {
        write_atomic(&out_dir.join("degrees.csv"), &degrees_csv(rows))?;
    }
    Ok(())
}

/// End-to-end run: load files, execute the pipeline, write report.json,
/// roc.csv, predictions.csv, and (PA only) degrees.csv into `out_dir`.
pub fn run_pipeline(cfg: &RunConfig, paths: &DataPaths, out_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let data = load_dataset(paths)?;
    let run = run_on_data(
        cfg,
        &data.train,
        &data.response_ids,
        &data.responses,
        &data.test,
        &data.labels,
    )?;
    let elapsed = (!cfg.no_timing).then(|| started.elapsed().as_secs_f64());
    write_run_outputs(cfg, &run, out_dir, elapsed)?;
    Ok(run)
}

fn thread_cap() -> usize {
    if let Ok(s) = std::env::var("CELLSIEVE_THREADS") {
        if let Ok(v) = s.trim().parse::<usize>() {
            return v.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1)
}

/// Shrinkage summary: one row per training-set size plus the mean AUC.
#[derive(Debug, Clone)]
pub struct ShrinkageSummary {
    pub sizes: Vec<usize>,
    pub runs: Vec<RunOutcome>,
    pub mauc: f64,
}

/// Nested seeded shrinkage: each target size drops uniformly random samples
/// from the previous run's training set, then the full pipeline runs on the
/// reduced set. Runs execute in parallel (capped by CELLSIEVE_THREADS); the
/// dropped sets depend only on (seed, sizes).
pub fn run_shrinkage(
    cfg: &RunConfig,
    paths: &DataPaths,
    sizes: &[usize],
    out_dir: &Path,
) -> Result<ShrinkageSummary> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no shrinkage sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(
            "shrinkage sizes must be non-increasing".into(),
        ));
    }
    let started = Instant::now();
    let data = load_dataset(paths)?;
    let m = data.train.values.rows();
    if sizes[0] > m {
        return Err(Error::InvalidArgument(format!(
            "shrinkage size {} exceeds training-set size {}",
            sizes[0], m
        )));
    }

    // Nested index sets, decided up front from the seed alone.
    let mut rng = SplitMix64::new(cfg.seed);
    let mut current: Vec<usize> = (0..m).collect();
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(sizes.len());
    for &size in sizes {
        while current.len() > size {
            let j = rng.next_below(current.len() as u64) as usize;
            current.swap_remove(j);
        }
        let mut sorted = current.clone();
        sorted.sort_unstable();
        subsets.push(sorted);
    }

    ensure_dir(out_dir)?;
    let cap = thread_cap();
    let mut results: Vec<Option<Result<RunOutcome>>> = (0..sizes.len()).map(|_| None).collect();
    let data_ref = &data;
    std::thread::scope(|scope| {
        for chunk in (0..sizes.len()).collect::<Vec<_>>().chunks(cap) {
            let mut handles = Vec::new();
            for &idx in chunk {
                let subset = subsets[idx].clone();
                let cfg = cfg.clone();
                handles.push((
                    idx,
                    scope.spawn(move || -> Result<RunOutcome> {
                        let train = data_ref.train.select_samples(&subset)?;
                        run_on_data(
                            &cfg,
                            &train,
                            &data_ref.response_ids,
                            &data_ref.responses,
                            &data_ref.test,
                            &data_ref.labels,
                        )
                    }),
                ));
            }
            for (idx, h) in handles {
                results[idx] = Some(h.join().expect("shrinkage worker panicked"));
            }
        }
    });

    let mut runs = Vec::with_capacity(sizes.len());
    for r in results {
        runs.push(r.expect("missing shrinkage result")?);
    }
    for (size, run) in sizes.iter().zip(&runs) {
        write_run_outputs(cfg, run, &out_dir.join(format!("size_{}", size)), None)?;
    }

    let aucs: Vec<f64> = runs.iter().map(|r| r.eval.auc).collect();
    let mauc = cellsieve_core::eval::mauc(&aucs)?;

    let mut csv = String::from("size,q,auc,t_statistic,p_value\n");
    for (size, run) in sizes.iter().zip(&runs) {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            size,
            run.q,
            fmt_f64(run.eval.auc),
            fmt_f64(run.eval.t_statistic),
            fmt_f64(run.eval.p_value)
        ));
    }
    csv.push_str(&format!("mauc,,{},,\n", fmt_f64(mauc)));
    write_atomic(&out_dir.join("shrinkage_summary.csv"), &csv)?;

    let rows = sizes.iter().zip(&runs).map(|(size, run)| {
        let mut o = Obj::new();
        o.int("size", *size as u64)
            .int("q", run.q as u64)
            .num("auc", run.eval.auc)
            .num("t_statistic", run.eval.t_statistic)
            .num("p_value", run.eval.p_value);
        o.finish()
    });
    let mut o = Obj::new();
    o.raw("config", &config_json(cfg))
        .raw("runs", &json::array(rows))
        .num("mauc", mauc);
    if !cfg.no_timing {
        o.num("timing_seconds", started.elapsed().as_secs_f64());
    }
    let mut s = o.finish();
    s.push('\n');
    write_atomic(&out_dir.join("shrinkage.json"), &s)?;

    Ok(ShrinkageSummary { sizes: sizes.to_vec(), runs, mauc })
}

/// `filter` subcommand: compute and emit the per-sample degree table only.
pub fn cmd_filter(train_x: &Path, filter: &FilterConfig, out_dir: &Path) -> Result<Vec<DegreeRow>> {
    let train = load_expression(train_x)?;
    let y = vec![0.0; train.values.rows()];
    let (_, _, report) = filter_training_set(&train.values, &y, filter)?;
    let rows = degree_rows(&train.sample_ids, &report);
    ensure_dir(out_dir)?;
    write_atomic(&out_dir.join("degrees.csv"), &degrees_csv(&rows))?;
    Ok(rows)
}

/// `synth` subcommand: generate a seeded synthetic dataset on disk.
pub fn cmd_synth(cfg: &SynthConfig, out_dir: &Path) -> Result<()> {
    let data = cellsieve_core::synth::generate_synthetic(cfg)?;
    cellsieve_core::synth::write_synthetic(&data, out_dir)
}

/// `evaluate` subcommand: score file (`sample_id,value`) + label file →
/// eval.json and roc.csv.
pub fn cmd_evaluate(
    scores_path: &Path,
    labels_path: &Path,
    polarity: Polarity,
    t_kind: TTestKind,
    out_dir: &Path,
) -> Result<EvalReport> {
    let scores = load_responses(scores_path)?;
    let labels = load_labels(labels_path)?;
    let outcomes = align_by_id(
        &scores.sample_ids,
        &labels.sample_ids,
        &labels.outcomes,
        "clinical label",
    )?;
    let labels = ClinicalLabels::new(scores.sample_ids.clone(), outcomes)?;
    let eval = evaluate(&scores.values, &labels, polarity, t_kind)?;

    ensure_dir(out_dir)?;
    let mut o = Obj::new();
    o.num("auc", eval.auc)
        .num("t_statistic", eval.t_statistic)
        .num("degrees_of_freedom", eval.degrees_of_freedom)
        .num("p_value", eval.p_value)
        .int("n_sensitive", eval.n_sensitive as u64)
        .int("n_resistant", eval.n_resistant as u64)
        .str("polarity", polarity_str(polarity))
        .str("t_test", t_kind_str(t_kind));
    let mut s = o.finish();
    s.push('\n');
    write_atomic(&out_dir.join("eval.json"), &s)?;
    write_atomic(&out_dir.join("roc.csv"), &roc_csv(&eval))?;
    Ok(eval)
}
