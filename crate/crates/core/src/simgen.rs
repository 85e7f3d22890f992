//! Synthetic datasets with known causes.
//!
//! A dataset is built in three steps: draw a conditional-probability
//! matrix from the letter-grade values, draw each death's cause from a
//! CSMF, then draw each symptom as Bernoulli(Pr(s | true cause)). Two
//! perturbations stress the methods: squeezing the matrix into a narrow
//! range, and flipping a fraction of reported indicators.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{default_names, CondProbMatrix, Csmf, Indicator, SymptomMatrix};
use crate::error::{Error, Result};
use crate::grade::LetterGrade;
use crate::insilico::sample_csmf;
use crate::math::sample_weighted;
use crate::seed::{rng_for, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fair,
    Rescaled,
    ReportingErrors,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Fair,
        Scenario::Rescaled,
        Scenario::ReportingErrors,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Fair => "fair",
            Scenario::Rescaled => "rescaled",
            Scenario::ReportingErrors => "reporting_errors",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "fair" => Ok(Scenario::Fair),
            "rescaled" => Ok(Scenario::Rescaled),
            "reporting_errors" | "errors" => Ok(Scenario::ReportingErrors),
            other => Err(Error::Invalid(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueCsmf {
    /// Fresh symmetric Dirichlet(1) draw per dataset.
    RandomSimplex,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_deaths: usize,
    pub n_causes: usize,
    pub n_symptoms: usize,
    pub true_csmf: TrueCsmf,
    /// Sampling weight for each letter-grade value, most likely grade first.
    pub grade_weights: Vec<f64>,
    pub rescale_range: (f64, f64),
    pub false_negative_rate: f64,
    pub false_positive_rate: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Fair,
            n_deaths: 800,
            n_causes: 35,
            n_symptoms: 150,
            true_csmf: TrueCsmf::RandomSimplex,
            grade_weights: vec![1.0; LetterGrade::ALL.len()],
            rescale_range: (0.25, 0.75),
            false_negative_rate: 0.15,
            false_positive_rate: 0.10,
            seed: 1,
        }
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} = {v} is outside [0, 1]")))
    }
}

impl ScenarioConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self {
            scenario,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("false_negative_rate", self.false_negative_rate)?;
        check_rate("false_positive_rate", self.false_positive_rate)?;
        let (lo, hi) = self.rescale_range;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Invalid(format!(
                "rescale range ({lo}, {hi}) must satisfy 0 < lo < hi < 1"
            )));
        }
        if self.grade_weights.len() != LetterGrade::ALL.len() {
            return Err(Error::Invalid(format!(
                "grade_weights needs {} entries, got {}",
                LetterGrade::ALL.len(),
                self.grade_weights.len()
            )));
        }
        if self
            .grade_weights
            .iter()
            .any(|w| !(w.is_finite() && *w >= 0.0))
            || self.grade_weights.iter().all(|&w| w == 0.0)
        {
            return Err(Error::Invalid(
                "grade weights must be non-negative and not all zero".into(),
            ));
        }
        if self.n_deaths == 0 || self.n_symptoms == 0 || self.n_causes < 2 {
            return Err(Error::Invalid(
                "need at least 1 death, 1 symptom and 2 causes".into(),
            ));
        }
        if let TrueCsmf::Fixed(f) = &self.true_csmf {
            if f.len() != self.n_causes {
                return Err(Error::Invalid(format!(
                    "true_csmf has {} entries for {} causes",
                    f.len(),
                    self.n_causes
                )));
            }
            Csmf::new(f.clone(), default_names("C", self.n_causes))?;
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep defaults.
    ///
    /// `true_csmf` is `random` or a comma-separated list; `grade_weights` is
    /// `uniform` or 15 comma-separated weights; `rescale_range` is `lo,hi`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, 1, "expected `key = value`"))?;
            let value = value.trim();
            let bad = |what: &str| Error::parse(i + 1, 1, format!("invalid {what}: `{value}`"));
            match key.trim() {
                "scenario" => cfg.scenario = value.parse()?,
                "deaths" | "n_deaths" | "J" => {
                    cfg.n_deaths = value.parse().map_err(|_| bad("deaths"))?
                }
                "causes" | "n_causes" | "N" => {
                    cfg.n_causes = value.parse().map_err(|_| bad("causes"))?
                }
                "symptoms" | "n_symptoms" | "K" => {
                    cfg.n_symptoms = value.parse().map_err(|_| bad("symptoms"))?
                }
                "true_csmf" => {
                    cfg.true_csmf = if value.eq_ignore_ascii_case("random") {
                        TrueCsmf::RandomSimplex
                    } else {
                        TrueCsmf::Fixed(parse_list(value).ok_or_else(|| bad("true_csmf"))?)
                    }
                }
                "grade_weights" => {
                    cfg.grade_weights = if value.eq_ignore_ascii_case("uniform") {
                        vec![1.0; LetterGrade::ALL.len()]
                    } else {
                        parse_list(value).ok_or_else(|| bad("grade_weights"))?
                    }
                }
                "rescale_range" => match parse_list(value).as_deref() {
                    Some(&[lo, hi]) => cfg.rescale_range = (lo, hi),
                    _ => return Err(bad("rescale_range")),
                },
                "false_negative_rate" => {
                    cfg.false_negative_rate = value.parse().map_err(|_| bad("rate"))?
                }
                "false_positive_rate" => {
                    cfg.false_positive_rate = value.parse().map_err(|_| bad("rate"))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                other => return Err(Error::parse(i + 1, 1, format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`ScenarioConfig::parse`].
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let csmf = match &self.true_csmf {
            TrueCsmf::RandomSimplex => "random".to_string(),
            TrueCsmf::Fixed(v) => list(v),
        };
        format!(
            "scenario = {}\ndeaths = {}\ncauses = {}\nsymptoms = {}\ntrue_csmf = {}\n\
             grade_weights = {}\nrescale_range = {},{}\nfalse_negative_rate = {}\n\
             false_positive_rate = {}\nseed = {}\n",
            self.scenario,
            self.n_deaths,
            self.n_causes,
            self.n_symptoms,
            csmf,
            list(&self.grade_weights),
            self.rescale_range.0,
            self.rescale_range.1,
            self.false_negative_rate,
            self.false_positive_rate,
            self.seed
        )
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

/// Relative frequency of each letter-grade value among a matrix's entries.
pub fn grade_weights_from_matrix(p: &CondProbMatrix) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; LetterGrade::ALL.len()];
    for &v in p.entries() {
        let g = LetterGrade::from_value(v).ok_or_else(|| {
            Error::Invalid(format!("matrix value {v} is not a letter-grade value"))
        })?;
        counts[g.rank()] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    Ok(counts.into_iter().map(|c| c / total).collect())
}

/// K×N matrix with entries drawn i.i.d. from the grade values.
pub fn generate_p<R: Rng + ?Sized>(
    n_symptoms: usize,
    n_causes: usize,
    grade_weights: &[f64],
    rng: &mut R,
) -> Result<CondProbMatrix> {
    if grade_weights.len() != LetterGrade::VALUES.len() {
        return Err(Error::Invalid("need one weight per grade".into()));
    }
    let dist = WeightedIndex::new(grade_weights)
        .map_err(|e| Error::Invalid(format!("grade weights: {e}")))?;
    let entries = (0..n_symptoms * n_causes)
        .map(|_| LetterGrade::VALUES[dist.sample(rng)])
        .collect();
    CondProbMatrix::new(
        entries,
        default_names("S", n_symptoms),
        default_names("C", n_causes),
    )
}

/// `n_deaths` i.i.d. cause labels from `csmf`.
pub fn generate_deaths<R: Rng + ?Sized>(n_deaths: usize, csmf: &[f64], rng: &mut R) -> Vec<usize> {
    let total: f64 = csmf.iter().sum();
    (0..n_deaths)
        .map(|_| sample_weighted(csmf, total, rng))
        .collect()
}

/// sⱼₖ ~ Bernoulli(Pr(sₖ | cause of j)).
pub fn generate_symptoms<R: Rng + ?Sized>(
    causes: &[usize],
    p: &CondProbMatrix,
    rng: &mut R,
) -> Result<SymptomMatrix> {
    let k_total = p.n_symptoms();
    let mut entries = Vec::with_capacity(causes.len() * k_total);
    for &c in causes {
        if c >= p.n_causes() {
            return Err(Error::Dimension(format!(
                "cause index {c} for {} causes",
                p.n_causes()
            )));
        }
        for k in 0..k_total {
            entries.push(Indicator::from(rng.random::<f64>() < p.get(k, c)));
        }
    }
    SymptomMatrix::new(
        entries,
        default_names("D", causes.len()),
        p.symptom_names().to_vec(),
    )
}

/// Affine map sending the matrix minimum to `lo` and maximum to `hi`.
pub fn rescale_p(p: &CondProbMatrix, lo: f64, hi: f64) -> Result<CondProbMatrix> {
    if !(lo < hi) {
        return Err(Error::Invalid(format!(
            "rescale range ({lo}, {hi}) is empty"
        )));
    }
    let min = p.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let max = p
        .entries()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::Invalid("cannot rescale a constant matrix".into()));
    }
    let slope = (hi - lo) / (max - min);
    p.map_entries(|v| (lo + (v - min) * slope).clamp(lo, hi))
}

/// Flips each present indicator with probability `fn_rate` and each absent
/// one with probability `fp_rate`. Missing entries are left alone.
pub fn inject_reporting_errors<R: Rng + ?Sized>(
    s: &SymptomMatrix,
    fn_rate: f64,
    fp_rate: f64,
    rng: &mut R,
) -> Result<SymptomMatrix> {
    check_rate("false_negative_rate", fn_rate)?;
    check_rate("false_positive_rate", fp_rate)?;
    Ok(s.map_entries(|v| match v {
        Indicator::Present if rng.random::<f64>() < fn_rate => Indicator::Absent,
        Indicator::Absent if rng.random::<f64>() < fp_rate => Indicator::Present,
        other => other,
    }))
}

#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub symptoms: SymptomMatrix,
    pub true_causes: Vec<usize>,
    /// The distribution causes were drawn from.
    pub true_csmf: Csmf,
    /// Matrix the symptoms were generated with.
    pub p_true: CondProbMatrix,
    /// Matrix handed to the assignment methods.
    pub p_given: CondProbMatrix,
}

impl SimulatedDataset {
    /// Realized cause fractions among the simulated deaths.
    pub fn empirical_csmf(&self) -> Csmf {
        let n = self.p_given.n_causes();
        let mut counts = vec![0.0; n];
        self.true_causes.iter().for_each(|&c| counts[c] += 1.0);
        Csmf::from_weights(counts, self.p_given.cause_names().to_vec()).expect("at least one death")
    }
}

/// Builds one dataset. Each ingredient has its own random stream, so the
/// reporting-error scenario with zero rates reproduces the fair one.
pub fn make_scenario(cfg: &ScenarioConfig) -> Result<SimulatedDataset> {
    cfg.validate()?;
    let mut p_rng = rng_for(cfg.seed, &[stream::COND_PROBS]);
    let p_drawn = generate_p(cfg.n_symptoms, cfg.n_causes, &cfg.grade_weights, &mut p_rng)?;
    let cause_names = p_drawn.cause_names().to_vec();
    let fractions = match &cfg.true_csmf {
        TrueCsmf::Fixed(f) => f.clone(),
        TrueCsmf::RandomSimplex => {
            let mut rng = rng_for(cfg.seed, &[stream::TRUE_CSMF]);
            sample_csmf(&[], &vec![1.0; cfg.n_causes], &mut rng)?
        }
    };
    let true_csmf = Csmf::new(fractions, cause_names)?;
    let true_causes = generate_deaths(
        cfg.n_deaths,
        true_csmf.fractions(),
        &mut rng_for(cfg.seed, &[stream::DEATHS]),
    );

    let p_true = match cfg.scenario {
        Scenario::Rescaled => rescale_p(&p_drawn, cfg.rescale_range.0, cfg.rescale_range.1)?,
        _ => p_drawn,
    };
    let clean = generate_symptoms(
        &true_causes,
        &p_true,
        &mut rng_for(cfg.seed, &[stream::SYMPTOMS]),
    )?;
    let symptoms = match cfg.scenario {
        Scenario::ReportingErrors => inject_reporting_errors(
            &clean,
            cfg.false_negative_rate,
            cfg.false_positive_rate,
            &mut rng_for(cfg.seed, &[stream::REPORTING]),
        )?,
        _ => clean,
    };
    Ok(SimulatedDataset {
        symptoms,
        true_causes,
        true_csmf,
        p_given: p_true.clone(),
        p_true,
    })
}
