//! Subcommand implementations.

use std::path::PathBuf;
use std::sync::Arc;

use cfbounds::estimation::pipeline::model_covariance_term;
use cfbounds::ingest::{
    load_campaign_csv, read_score_file, write_scores, CalibrationOrder, CampaignSchema,
    LearnerKind, ScoreModelSpec,
};
use cfbounds::profit::{round_cents, ProfitInputs, ProfitReport};
use cfbounds::simulation::{
    run_benchmark, sensitivity_sweep, BenchmarkProtocol, SamplingLaw, SweepAxis,
};
use cfbounds::{
    run_algorithm_one_detailed, CounterfactualDistribution, CounterfactualQuantity,
    EstimationReport, Interval, SplitSpec,
};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{resolve, CliError, Common, Exec};
use crate::output::{float, provenance, Artifacts};

fn with_pool<T>(exec: &Exec, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = exec.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker threads: {e}")))?;
    pool.install(f)
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn seed_of(seed: Option<u64>) -> u64 {
    seed.expect("resolve fills the seed")
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Number of simulated populations.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    v_min: Option<u32>,
    #[arg(long)]
    v_max: Option<u32>,
    /// Smallest Dirichlet concentration A.
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    /// Sampling law of N: uniform, log-uniform or sqrt-uniform.
    #[arg(long)]
    n_law: Option<String>,
    #[arg(long)]
    v_law: Option<String>,
    #[arg(long)]
    a_law: Option<String>,
    /// Bins over the true value in fig1_strata.csv.
    #[arg(long)]
    strata_bins: Option<usize>,
    /// Bins dropped from fig1_strata.csv when holding fewer runs.
    #[arg(long)]
    min_stratum: Option<usize>,
    /// Bins of the expected-bias histogram in fig2_phi_hist.csv.
    #[arg(long)]
    hist_bins: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    seed: Option<u64>,
    runs: usize,
    n_min: usize,
    n_max: usize,
    v_min: u32,
    v_max: u32,
    a_min: f64,
    a_max: f64,
    n_law: SamplingLaw,
    v_law: SamplingLaw,
    a_law: SamplingLaw,
    strata_bins: usize,
    min_stratum: usize,
    hist_bins: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let p = BenchmarkProtocol::default();
        SimulateConfig {
            seed: None,
            runs: p.runs,
            n_min: p.n_range.0,
            n_max: p.n_range.1,
            v_min: p.v_range.0,
            v_max: p.v_range.1,
            a_min: p.a_range.0,
            a_max: p.a_range.1,
            n_law: p.n_law,
            v_law: p.v_law,
            a_law: p.a_law,
            strata_bins: 10,
            min_stratum: 20,
            hist_bins: 50,
        }
    }
}

const QUANTITY_FIELDS: [&str; 8] = [
    "truth",
    "point",
    "uplift_lower",
    "uplift_upper",
    "frechet_lower",
    "frechet_upper",
    "uplift_midpoint",
    "frechet_midpoint",
];

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (cfg, exec): (SimulateConfig, Exec) = resolve(args.common.config.as_deref(), &args)?;
    let seed = seed_of(cfg.seed);
    let out = exec.out()?.to_path_buf();
    if cfg.strata_bins == 0 || cfg.hist_bins == 0 {
        return Err(CliError::Validation("bin counts must be at least 1".into()));
    }
    let protocol = BenchmarkProtocol {
        runs: cfg.runs,
        n_range: (cfg.n_min, cfg.n_max),
        v_range: (cfg.v_min, cfg.v_max),
        a_range: (cfg.a_min, cfg.a_max),
        n_law: cfg.n_law,
        v_law: cfg.v_law,
        a_law: cfg.a_law,
        seed,
    };
    let report = with_pool(&exec, || Ok(run_benchmark(&protocol)?))?;

    let mut art = Artifacts::new(&out)?;
    let mut header: Vec<String> = [
        "run",
        "n",
        "v",
        "concentration",
        "simplex_alpha",
        "simplex_beta",
        "simplex_gamma",
        "simplex_delta",
        "population_seed",
        "expected_phi",
        "sample_phi",
        "conditional_entropy",
    ]
    .map(String::from)
    .to_vec();
    for q in CounterfactualQuantity::ALL {
        header.extend(QUANTITY_FIELDS.iter().map(|f| format!("{f}_{q}")));
    }
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    art.csv(
        "benchmark_runs.csv",
        &header_ref,
        report.records.iter().map(|r| {
            let mut row = vec![
                r.index.to_string(),
                r.n.to_string(),
                r.v.to_string(),
                float(r.concentration),
            ];
            row.extend(r.simplex.iter().map(|&x| float(x)));
            row.push(r.population_seed.to_string());
            row.extend([r.expected_phi, r.sample_phi, r.conditional_entropy].map(float));
            for k in 0..4 {
                row.extend(
                    [
                        r.truth[k],
                        r.point[k],
                        r.uplift[k].lower,
                        r.uplift[k].upper,
                        r.frechet[k].lower,
                        r.frechet[k].upper,
                        r.uplift_midpoint[k],
                        r.frechet_midpoint[k],
                    ]
                    .map(float),
                );
            }
            row
        }),
    )?;

    let beta = report.summary(CounterfactualQuantity::Beta);
    let mut summary = provenance("simulate", seed, &cfg);
    summary.insert("runs".into(), report.records.len().into());
    summary.insert(
        "beta".into(),
        json!({
            "quantity": "beta",
            "mean_uplift_width": beta.mean_uplift_width,
            "mean_frechet_width": beta.mean_frechet_width,
            "rmse_point": beta.rmse_point,
            "rmse_uplift_midpoint": beta.rmse_uplift_midpoint,
            "rmse_frechet_midpoint": beta.rmse_frechet_midpoint,
        }),
    );
    let per_q: Map<String, Value> = report
        .summaries
        .iter()
        .map(|s| {
            (
                s.quantity.name().to_string(),
                serde_json::to_value(s).expect("serializable"),
            )
        })
        .collect();
    summary.insert("quantities".into(), Value::Object(per_q));
    art.json("summary.json", &summary)?;

    let strata: Vec<Vec<String>> = CounterfactualQuantity::ALL
        .iter()
        .flat_map(|&q| report.strata(q, cfg.strata_bins, cfg.min_stratum))
        .map(|s| {
            let mut row = vec![s.quantity.name().to_string()];
            row.extend([s.bin_lower, s.bin_upper].map(float));
            row.push(s.count.to_string());
            row.extend(
                [
                    s.mean_truth,
                    s.mean_point,
                    s.mean_uplift_lower,
                    s.mean_uplift_upper,
                    s.mean_frechet_lower,
                    s.mean_frechet_upper,
                ]
                .map(float),
            );
            row
        })
        .collect();
    art.csv(
        "fig1_strata.csv",
        &[
            "quantity",
            "bin_lower",
            "bin_upper",
            "count",
            "mean_truth",
            "mean_point",
            "mean_uplift_lower",
            "mean_uplift_upper",
            "mean_frechet_lower",
            "mean_frechet_upper",
        ],
        strata,
    )?;
    art.csv(
        "fig2_phi_hist.csv",
        &["bin_lower", "bin_upper", "count"],
        report
            .phi_histogram(cfg.hist_bins)
            .into_iter()
            .map(|b| vec![float(b.lower), float(b.upper), b.count.to_string()]),
    )?;
    let dir = art.commit("simulate", seed, &cfg)?;

    println!("{} runs, seed {seed}", report.records.len());
    println!("mean uplift-bound width    {}", pct(beta.mean_uplift_width));
    println!(
        "mean Frechet-bound width   {}",
        pct(beta.mean_frechet_width)
    );
    println!("RMSE point estimate        {}", pct(beta.rmse_point));
    println!(
        "RMSE uplift midpoint       {}",
        pct(beta.rmse_uplift_midpoint)
    );
    println!(
        "RMSE Frechet midpoint      {}",
        pct(beta.rmse_frechet_midpoint)
    );
    println!("artifacts in {}", dir.display());
    Ok(())
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Swept parameter: A, N or v.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated grid values (default depends on the axis).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Populations per grid value.
    #[arg(long)]
    replicates: Option<usize>,
    /// Fixed Dirichlet concentration A.
    #[arg(long)]
    concentration: Option<f64>,
    /// Fixed population size N.
    #[arg(long)]
    n: Option<usize>,
    /// Fixed binomial trials v.
    #[arg(long)]
    v: Option<u32>,
    /// Fixed mean distribution as alpha,beta,gamma,delta (rescaled to sum to 1).
    #[arg(long, value_delimiter = ',', num_args = 4)]
    simplex: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    seed: Option<u64>,
    axis: Option<String>,
    grid: Option<Vec<f64>>,
    replicates: usize,
    concentration: Option<f64>,
    n: Option<usize>,
    v: Option<u32>,
    simplex: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: None,
            axis: None,
            grid: None,
            replicates: 30,
            concentration: None,
            n: None,
            v: None,
            simplex: None,
        }
    }
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let (mut cfg, exec): (SweepConfig, Exec) = resolve(args.common.config.as_deref(), &args)?;
    let seed = seed_of(cfg.seed);
    let axis: SweepAxis = cfg
        .axis
        .as_deref()
        .ok_or_else(|| CliError::Usage("--axis is required (A, N or v)".into()))?
        .parse()
        .map_err(|e: cfbounds::Error| CliError::Usage(e.to_string()))?;
    let out = exec.out()?.to_path_buf();

    let mut base = axis.default_base(seed);
    if let Some(a) = cfg.concentration {
        base.concentration = a;
    }
    if let Some(n) = cfg.n {
        base.n = n;
    }
    if let Some(v) = cfg.v {
        base.v = v;
    }
    if let Some(p) = &cfg.simplex {
        let p: [f64; 4] = p
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Usage(format!("simplex needs 4 values, got {}", p.len())))?;
        base.simplex = CounterfactualDistribution::normalized(p)?;
    }
    let grid = cfg.grid.clone().unwrap_or_else(|| axis.default_grid());
    // Record the fully resolved parameters.
    cfg.axis = Some(axis.name().to_string());
    cfg.grid = Some(grid.clone());
    cfg.concentration = Some(base.concentration);
    cfg.n = Some(base.n);
    cfg.v = Some(base.v);
    cfg.simplex = Some(base.simplex.to_array().to_vec());

    let series = with_pool(&exec, || {
        Ok(sensitivity_sweep(axis, &grid, &base, cfg.replicates)?)
    })?;

    let mut art = Artifacts::new(&out)?;
    let name = axis.name();
    art.csv(
        &format!("sweep_{name}.csv"),
        &[
            "value",
            "expected_phi",
            "mean_entropy",
            "sd_entropy",
            "mean_span",
            "sd_span",
            "mean_abs_error",
            "sd_abs_error",
            "mean_error",
            "mean_model_variance",
        ],
        series.points.iter().map(|p| {
            [
                p.value,
                p.expected_phi,
                p.mean_entropy,
                p.sd_entropy,
                p.mean_span,
                p.sd_span,
                p.mean_abs_error,
                p.sd_abs_error,
                p.mean_error,
                p.mean_model_variance,
            ]
            .map(float)
            .to_vec()
        }),
    )?;
    art.csv(
        &format!("sweep_{name}_replicates.csv"),
        &[
            "value",
            "replicate",
            "conditional_entropy",
            "uplift_span",
            "point_error",
            "model_variance",
        ],
        series.points.iter().flat_map(|p| {
            p.replicates.iter().map(move |r| {
                vec![
                    float(p.value),
                    r.replicate.to_string(),
                    float(r.conditional_entropy),
                    float(r.uplift_span),
                    float(r.point_error),
                    float(r.model_variance),
                ]
            })
        }),
    )?;
    let dir = art.commit("sweep", seed, &cfg)?;
    println!(
        "{:>12} {:>10} {:>10} {:>10}",
        name, "entropy", "span", "|error|"
    );
    for p in &series.points {
        println!(
            "{:>12} {:>10.4} {:>10} {:>10}",
            p.value,
            p.mean_entropy,
            pct(p.mean_span),
            pct(p.mean_abs_error)
        );
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Serialize, Deserialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

impl From<Interval<f64>> for Bounds {
    fn from(i: Interval<f64>) -> Self {
        Bounds {
            lower: i.lower,
            upper: i.upper,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct QuantityEntry {
    category: String,
    point: f64,
    uplift: Bounds,
    frechet: Bounds,
}

/// Estimation results as written to `report.json`.
#[derive(Debug, Serialize, Deserialize)]
struct ReportBody {
    n_samples: usize,
    mean_s0: f64,
    mean_s1: f64,
    /// `mean_s0 - mean_s1`.
    uplift: f64,
    uplift_span: f64,
    frechet_span: f64,
    quantities: std::collections::BTreeMap<String, QuantityEntry>,
}

impl From<&EstimationReport<f64>> for ReportBody {
    fn from(r: &EstimationReport<f64>) -> Self {
        ReportBody {
            n_samples: r.point.n_samples,
            mean_s0: r.mean_scores.s0,
            mean_s1: r.mean_scores.s1,
            uplift: r.mean_scores.s0 - r.mean_scores.s1,
            uplift_span: r.uplift_span,
            frechet_span: r.frechet_span,
            quantities: CounterfactualQuantity::ALL
                .iter()
                .map(|&q| {
                    (
                        q.name().to_string(),
                        QuantityEntry {
                            category: q.category().to_string(),
                            point: r.estimate(q),
                            uplift: r.uplift(q).into(),
                            frechet: r.frechet(q).into(),
                        },
                    )
                })
                .collect(),
        }
    }
}

fn table_rows(r: &EstimationReport<f64>) -> Vec<Vec<String>> {
    CounterfactualQuantity::ALL
        .iter()
        .map(|&q| {
            let (u, f) = (r.uplift(q), r.frechet(q));
            let mut row = vec![q.name().to_string(), q.category().to_string()];
            row.extend([r.estimate(q), u.lower, u.upper, f.lower, f.upper].map(float));
            row
        })
        .collect()
}

const TABLE_HEADER: [&str; 7] = [
    "quantity",
    "category",
    "point",
    "uplift_lower",
    "uplift_upper",
    "frechet_lower",
    "frechet_upper",
];

fn print_report(r: &EstimationReport<f64>) {
    println!(
        "{:<8} {:<16} {:>8} {:>20} {:>20}",
        "quantity", "category", "point", "uplift bounds", "Frechet bounds"
    );
    for q in CounterfactualQuantity::ALL {
        let (u, f) = (r.uplift(q), r.frechet(q));
        println!(
            "{:<8} {:<16} {:>8} {:>20} {:>20}",
            q.name(),
            q.category(),
            pct(r.estimate(q)),
            format!("[{}, {}]", pct(u.lower), pct(u.upper)),
            format!("[{}, {}]", pct(f.lower), pct(f.upper)),
        );
    }
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Score file with columns id,s0_hat,s1_hat[,t,y].
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Also write table.csv with one row per quantity.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    table: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    seed: Option<u64>,
    scores: Option<PathBuf>,
    table: bool,
}

pub fn bounds(args: BoundsArgs) -> Result<(), CliError> {
    let (cfg, exec): (BoundsConfig, Exec) = resolve(args.common.config.as_deref(), &args)?;
    let seed = seed_of(cfg.seed);
    let path = cfg
        .scores
        .as_ref()
        .ok_or_else(|| CliError::Usage("a score file is required (--scores)".into()))?;
    let out = exec.out()?.to_path_buf();
    let scores = read_score_file(path)?.score_set()?;
    let report = EstimationReport::from_scores(&scores)?;

    let mut art = Artifacts::new(&out)?;
    let mut body = provenance("bounds", seed, &cfg);
    body.extend(as_map(&ReportBody::from(&report)));
    art.json("report.json", &body)?;
    if cfg.table {
        art.csv("table.csv", &TABLE_HEADER, table_rows(&report))?;
    }
    let dir = art.commit("bounds", seed, &cfg)?;
    print_report(&report);
    println!("artifacts in {}", dir.display());
    Ok(())
}

fn as_map(v: &impl Serialize) -> Map<String, Value> {
    match serde_json::to_value(v).expect("serializable") {
        Value::Object(m) => m,
        _ => unreachable!("structs serialize to objects"),
    }
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Campaign CSV with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    treatment_col: Option<String>,
    #[arg(long)]
    outcome_col: Option<String>,
    /// Column holding row ids (default: 1-based row numbers).
    #[arg(long)]
    id_col: Option<String>,
    /// Comma-separated columns to one-hot encode.
    #[arg(long, value_delimiter = ',')]
    categorical: Option<Vec<String>>,
    /// Comma-separated columns to drop.
    #[arg(long, value_delimiter = ',')]
    ignore: Option<Vec<String>>,
    #[arg(long)]
    delimiter: Option<char>,
    /// Cross-validation folds.
    #[arg(long)]
    folds: Option<usize>,
    /// Use one train/test split with this test share instead of k folds.
    #[arg(long)]
    test_fraction: Option<f64>,
    /// EasyEnsemble members per arm; 0 disables balancing.
    #[arg(long)]
    balancing: Option<usize>,
    /// Undo the undersampling prior shift (true/false).
    #[arg(long)]
    calibration: Option<bool>,
    /// calibrate-then-average or average-then-calibrate.
    #[arg(long)]
    calibration_order: Option<String>,
    /// Ridge penalty on standardized coefficients.
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Bootstrap retrainings for the learner covariance term (20 when given
    /// without a value); 0 skips it.
    #[arg(long, num_args = 0..=1, default_missing_value = "20")]
    bootstrap: Option<usize>,
    /// Use scores from this file instead of training (matched by row id).
    #[arg(long)]
    external_scores: Option<PathBuf>,
    /// Also write table.csv with one row per quantity.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    table: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    seed: Option<u64>,
    input: Option<PathBuf>,
    treatment_col: String,
    outcome_col: String,
    id_col: Option<String>,
    categorical: Vec<String>,
    ignore: Vec<String>,
    delimiter: char,
    folds: usize,
    test_fraction: Option<f64>,
    balancing: usize,
    calibration: bool,
    calibration_order: CalibrationOrder,
    l2: f64,
    max_iter: usize,
    bootstrap: usize,
    external_scores: Option<PathBuf>,
    table: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        let spec = ScoreModelSpec::default();
        EstimateConfig {
            seed: None,
            input: None,
            treatment_col: "t".into(),
            outcome_col: "y".into(),
            id_col: None,
            categorical: Vec::new(),
            ignore: Vec::new(),
            delimiter: ',',
            folds: 5,
            test_fraction: None,
            balancing: spec.balancing.unwrap_or(0),
            calibration: spec.calibration,
            calibration_order: spec.calibration_order,
            l2: spec.l2,
            max_iter: spec.max_iter,
            bootstrap: 0,
            external_scores: None,
            table: false,
        }
    }
}

pub fn estimate(args: EstimateArgs) -> Result<(), CliError> {
    let (cfg, exec): (EstimateConfig, Exec) = resolve(args.common.config.as_deref(), &args)?;
    let seed = seed_of(cfg.seed);
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("a campaign CSV is required (--input)".into()))?;
    let out = exec.out()?.to_path_buf();

    let schema = CampaignSchema {
        treatment_col: cfg.treatment_col.clone(),
        outcome_col: cfg.outcome_col.clone(),
        id_col: cfg.id_col.clone(),
        categorical: cfg.categorical.clone(),
        ignore: cfg.ignore.clone(),
        delimiter: cfg.delimiter,
    };
    let ds = load_campaign_csv(input, &schema)?;
    let external = match &cfg.external_scores {
        Some(p) => Some(Arc::new(read_score_file(p)?)),
        None => None,
    };
    let spec = ScoreModelSpec {
        kind: if external.is_some() {
            LearnerKind::ExternalScores
        } else {
            LearnerKind::TwoModel
        },
        balancing: (cfg.balancing > 0).then_some(cfg.balancing),
        calibration: cfg.calibration,
        calibration_order: cfg.calibration_order,
        l2: cfg.l2,
        max_iter: cfg.max_iter,
        seed,
        external_scores: external,
    };
    let split = match cfg.test_fraction {
        Some(test_fraction) => SplitSpec::Holdout {
            test_fraction,
            seed,
        },
        None => SplitSpec::KFold { k: cfg.folds, seed },
    };
    let (run, cov_term) = with_pool(&exec, || {
        let run = run_algorithm_one_detailed(&ds, &spec, split)?;
        let cov = if cfg.bootstrap > 0 {
            Some(model_covariance_term(
                &ds,
                &spec,
                split,
                cfg.bootstrap,
                seed,
            )?)
        } else {
            None
        };
        Ok((run, cov))
    })?;

    let mut art = Artifacts::new(&out)?;
    let mut body = provenance("estimate", seed, &cfg);
    body.extend(as_map(&ReportBody::from(&run.report)));
    body.insert("rows".into(), ds.len().into());
    body.insert("warnings".into(), run.scored.warnings.clone().into());
    if let Some(c) = cov_term {
        body.insert("model_cov_term".into(), c.into());
    }
    art.json("report.json", &body)?;
    let mut buf = Vec::new();
    write_scores(&mut buf, &run.scored.to_score_file())?;
    art.bytes("oof_scores.csv", &buf)?;
    if cfg.table {
        art.csv("table.csv", &TABLE_HEADER, table_rows(&run.report))?;
    }
    let dir = art.commit("estimate", seed, &cfg)?;
    for w in &run.scored.warnings {
        eprintln!("warning: {w}");
    }
    print_report(&run.report);
    println!("artifacts in {}", dir.display());
    Ok(())
}

// ---------------------------------------------------------------- profit

#[derive(Debug, Args, Serialize)]
pub struct ProfitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// report.json written by `bounds` or `estimate`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Customer value V.
    #[arg(long)]
    value: Option<f64>,
    /// Contact cost C.
    #[arg(long)]
    cost: Option<f64>,
    /// Customers contacted by the campaign.
    #[arg(long)]
    contacted: Option<u64>,
    /// Campaign uplift s0 - s1 (default: from the report).
    #[arg(long, allow_hyphen_values = true)]
    uplift: Option<f64>,
    /// Population size for persuadable counts (default: rows in the report).
    #[arg(long)]
    population: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfitConfig {
    seed: Option<u64>,
    report: Option<PathBuf>,
    value: Option<f64>,
    cost: Option<f64>,
    contacted: Option<u64>,
    uplift: Option<f64>,
    population: Option<u64>,
}

pub fn profit(args: ProfitArgs) -> Result<(), CliError> {
    let (mut cfg, exec): (ProfitConfig, Exec) = resolve(args.common.config.as_deref(), &args)?;
    let seed = seed_of(cfg.seed);
    let missing = |flag: &str| CliError::Usage(format!("--{flag} is required"));
    let path = cfg.report.clone().ok_or_else(|| missing("report"))?;
    let value = cfg.value.ok_or_else(|| missing("value"))?;
    let cost = cfg.cost.ok_or_else(|| missing("cost"))?;
    let contacted = cfg.contacted.ok_or_else(|| missing("contacted"))?;
    let out = exec.out()?.to_path_buf();

    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let body: ReportBody = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!(
            "{} is not an estimation report: {e}",
            path.display()
        ))
    })?;
    let beta = body
        .quantities
        .get("beta")
        .ok_or_else(|| CliError::Validation(format!("{} has no beta entry", path.display())))?;
    let uplift = cfg.uplift.unwrap_or(body.uplift);
    let population = cfg.population.unwrap_or(body.n_samples as u64);
    cfg.uplift = Some(uplift);
    cfg.population = Some(population);

    let inputs = ProfitInputs {
        n_contacted: contacted,
        uplift,
        customer_value: value,
        contact_cost: cost,
        population_size: population,
        beta_interval: Interval::new(
            CounterfactualQuantity::Beta,
            beta.uplift.lower,
            beta.uplift.upper,
        )?,
        beta_point: beta.point,
    };
    let report = ProfitReport::new(inputs)?;

    let mut art = Artifacts::new(&out)?;
    let mut doc = provenance("profit", seed, &cfg);
    doc.insert("realized".into(), report.realized.into());
    doc.insert("realized_cents".into(), round_cents(report.realized).into());
    doc.insert(
        "persuadables".into(),
        serde_json::to_value(report.persuadables).expect("serializable"),
    );
    doc.insert("persuadable_only".into(), report.persuadable_only.into());
    doc.insert(
        "range".into(),
        json!({ "lower": report.range.0, "upper": report.range.1 }),
    );
    art.json("profit.json", &doc)?;
    let dir = art.commit("profit", seed, &cfg)?;

    println!(
        "realized profit             {:.2}",
        round_cents(report.realized)
    );
    println!(
        "persuadables                {} (bounds {} to {})",
        report.persuadables.point, report.persuadables.lower, report.persuadables.upper
    );
    println!(
        "persuadable-only profit     {:.2}",
        round_cents(report.persuadable_only)
    );
    println!(
        "persuadable-only range      {:.2} to {:.2}",
        round_cents(report.range.0),
        round_cents(report.range.1)
    );
    println!("artifacts in {}", dir.display());
    Ok(())
}
