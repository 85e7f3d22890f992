//! Accuracy and CSMF error metrics, and the replicate harness that runs
//! both methods on many simulated datasets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Csmf;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::insilico::{run_gibbs, summarize, GibbsConfig};
use crate::interva::run_interva_with;
use crate::math::{argmax, quantile_sorted, sorted};
use crate::seed::{derive_seed, stream};
use crate::simgen::{make_scenario, ScenarioConfig, SimulatedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Interva,
    Insilicova,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Interva, Method::Insilicova];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Interva => "interva",
            Method::Insilicova => "insilicova",
        })
    }
}

/// Share of deaths whose assigned cause equals the true one.
pub fn individual_accuracy(assigned: &[usize], truth: &[usize]) -> Result<f64> {
    if assigned.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} assignments for {} deaths",
            assigned.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Invalid("no deaths to score".into()));
    }
    let hits = assigned.iter().zip(truth).filter(|(a, t)| a == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Per-cause absolute errors and total-variation distance ½Σ|f̂ − f|.
pub fn csmf_errors(estimate: &Csmf, truth: &Csmf) -> Result<(Vec<f64>, f64)> {
    if estimate.cause_names() != truth.cause_names() {
        return Err(Error::Dimension("CSMFs cover different causes".into()));
    }
    let abs: Vec<f64> = estimate
        .fractions()
        .iter()
        .zip(truth.fractions())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let tv = (0.5 * abs.iter().sum::<f64>()).min(1.0);
    Ok((abs, tv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateResult {
    pub replicate_id: usize,
    pub method: Method,
    pub individual_accuracy: f64,
    pub csmf_abs_errors: Vec<f64>,
    pub csmf_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub replicate_id: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub p95: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let s = sorted(values);
        Some(Self {
            n: s.len(),
            mean: s.iter().sum::<f64>() / s.len() as f64,
            min: s[0],
            q1: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q3: quantile_sorted(&s, 0.75),
            p95: quantile_sorted(&s, 0.95),
            max: s[s.len() - 1],
        })
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

/// Equal-width bins over [0, 1]; 1.0 lands in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn unit(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = ((v * bins as f64).floor() as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub accuracy: Spread,
    pub csmf_tv: Spread,
    pub accuracy_histogram: Histogram,
    pub tv_histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub methods: Vec<MethodSummary>,
    pub replicates_ok: usize,
    pub replicates_failed: usize,
}

impl ComparisonSummary {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }
}

/// Prior guess handed to InterVA in simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervaPrior {
    #[default]
    Uniform,
    /// The distribution the deaths were drawn from.
    Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOptions {
    pub replicates: usize,
    pub interva_prior: IntervaPrior,
    pub histogram_bins: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            replicates: 100,
            interva_prior: IntervaPrior::default(),
            histogram_bins: 20,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ReplicateResult>,
    pub failures: Vec<ReplicateFailure>,
    pub summary: ComparisonSummary,
}

/// Scores both methods on one dataset. CSMF error is measured against the
/// realized cause fractions of the simulated deaths.
pub fn evaluate_replicate(
    replicate_id: usize,
    data: &SimulatedDataset,
    gibbs_cfg: &GibbsConfig,
    interva_prior: IntervaPrior,
) -> Result<[ReplicateResult; 2]> {
    let truth = data.empirical_csmf();
    let causes = data.p_given.cause_names().to_vec();

    let prior = match interva_prior {
        IntervaPrior::Uniform => Csmf::uniform(causes)?,
        IntervaPrior::Truth => data.true_csmf.clone(),
    };
    let iv = run_interva_with(&data.symptoms, &data.p_given, &prior, Execution::Sequential)?;
    // undefined deaths get no cause and count as misses
    let iv_top: Vec<usize> = iv
        .per_death_probs
        .iter()
        .map(|row| row.as_deref().map_or(usize::MAX, argmax))
        .collect();
    let (iv_abs, iv_tv) = csmf_errors(&iv.csmf, &truth)?;

    let chains = run_gibbs(&data.symptoms, &data.p_given, gibbs_cfg)?;
    let post = summarize(&chains, 0.95)?;
    let (is_abs, is_tv) = csmf_errors(&post.csmf_mean, &truth)?;

    Ok([
        ReplicateResult {
            replicate_id,
            method: Method::Interva,
            individual_accuracy: individual_accuracy(&iv_top, &data.true_causes)?,
            csmf_abs_errors: iv_abs,
            csmf_tv: iv_tv,
        },
        ReplicateResult {
            replicate_id,
            method: Method::Insilicova,
            individual_accuracy: individual_accuracy(&post.top_causes(), &data.true_causes)?,
            csmf_abs_errors: is_abs,
            csmf_tv: is_tv,
        },
    ])
}

/// Per-replicate seeds for data and sampler, derived from the scenario seed.
pub fn replicate_seeds(master: u64, replicate_id: usize) -> (u64, u64) {
    (
        derive_seed(master, &[stream::REPLICATE, replicate_id as u64]),
        derive_seed(master, &[stream::GIBBS, replicate_id as u64]),
    )
}

/// Simulates `opts.replicates` datasets and applies both methods to each.
///
/// The scenario's seed is the master seed; `gibbs_cfg.seed` is replaced
/// per replicate. A replicate that fails is reported and left out of
/// the summary for both methods.
pub fn run_comparison(
    cfg: &ScenarioConfig,
    gibbs_cfg: &GibbsConfig,
    opts: &ComparisonOptions,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    gibbs_cfg.validate()?;
    if opts.replicates == 0 {
        return Err(Error::Invalid("need at least one replicate".into()));
    }
    let outcomes = opts.execution.map(opts.replicates, |r| {
        let (data_seed, gibbs_seed) = replicate_seeds(cfg.seed, r);
        let scenario = ScenarioConfig {
            seed: data_seed,
            ..cfg.clone()
        };
        let gibbs = GibbsConfig {
            seed: gibbs_seed,
            ..gibbs_cfg.clone()
        };
        make_scenario(&scenario).and_then(|d| evaluate_replicate(r, &d, &gibbs, opts.interva_prior))
    });

    let mut rows = Vec::with_capacity(2 * opts.replicates);
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(pair) => rows.extend(pair),
            Err(e) => failures.push(ReplicateFailure {
                replicate_id: r,
                error: e.to_string(),
            }),
        }
    }
    let summary = summarize_rows(&rows, failures.len(), opts.histogram_bins)?;
    Ok(ComparisonReport {
        rows,
        failures,
        summary,
    })
}

pub fn summarize_rows(
    rows: &[ReplicateResult],
    failed: usize,
    bins: usize,
) -> Result<ComparisonSummary> {
    let mut methods = Vec::new();
    for m in Method::ALL {
        let acc: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.individual_accuracy)
            .collect();
        let tv: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.csmf_tv)
            .collect();
        let (Some(accuracy), Some(csmf_tv)) = (Spread::of(&acc), Spread::of(&tv)) else {
            continue;
        };
        methods.push(MethodSummary {
            method: m,
            accuracy,
            csmf_tv,
            accuracy_histogram: Histogram::unit(&acc, bins),
            tv_histogram: Histogram::unit(&tv, bins),
        });
    }
    if methods.is_empty() {
        return Err(Error::Numeric("every replicate failed".into()));
    }
    Ok(ComparisonSummary {
        replicates_ok: rows.len() / 2,
        replicates_failed: failed,
        methods,
    })
}
