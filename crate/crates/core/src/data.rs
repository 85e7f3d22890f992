//! Matrices and vectors shared by both assignment methods.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Tolerance on Σ f = 1 for a CSMF.
pub const SIMPLEX_TOL: f64 = 1e-9;

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

/// K×N matrix of Pr(symptom k | cause n), stored row-major by symptom.
#[derive(Debug, Clone, PartialEq)]
pub struct CondProbMatrix {
    entries: Vec<f64>,
    symptom_names: Vec<String>,
    cause_names: Vec<String>,
}

impl CondProbMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// At least two causes are required. An empty symptom list is allowed
    /// here (a model with no observed indicators); file loading rejects it.
    pub fn new(
        entries: Vec<f64>,
        symptom_names: Vec<String>,
        cause_names: Vec<String>,
    ) -> Result<Self> {
        let k = symptom_names.len();
        let n = cause_names.len();
        if n < 2 {
            return Err(Error::Invalid(format!("need at least 2 causes, got {n}")));
        }
        if entries.len() != k * n {
            return Err(Error::Dimension(format!(
                "{} entries for a {k}x{n} matrix",
                entries.len()
            )));
        }
        check_unique(&symptom_names)?;
        check_unique(&cause_names)?;
        for (i, &v) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    value: v,
                    location: format!(
                        "symptom `{}`, cause `{}`",
                        symptom_names[i / n],
                        cause_names[i % n]
                    ),
                });
            }
        }
        Ok(Self {
            entries,
            symptom_names,
            cause_names,
        })
    }

    pub fn from_rows(
        rows: &[Vec<f64>],
        symptom_names: Vec<String>,
        cause_names: Vec<String>,
    ) -> Result<Self> {
        let n = cause_names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row of length {} for {n} causes",
                bad.len()
            )));
        }
        Self::new(rows.concat(), symptom_names, cause_names)
    }

    /// Matrix with generated names `S001…`, `C01…`.
    pub fn with_default_names(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, default_names("S", k), default_names("C", n))
    }

    pub fn n_symptoms(&self) -> usize {
        self.symptom_names.len()
    }

    pub fn n_causes(&self) -> usize {
        self.cause_names.len()
    }

    #[inline]
    pub fn get(&self, symptom: usize, cause: usize) -> f64 {
        self.entries[symptom * self.n_causes() + cause]
    }

    pub fn row(&self, symptom: usize) -> &[f64] {
        let n = self.n_causes();
        &self.entries[symptom * n..(symptom + 1) * n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn symptom_names(&self) -> &[String] {
        &self.symptom_names
    }

    pub fn cause_names(&self) -> &[String] {
        &self.cause_names
    }

    pub fn symptom_index(&self, name: &str) -> Option<usize> {
        self.symptom_names.iter().position(|s| s == name)
    }

    /// Same names, new entries (which must stay in [0, 1]).
    pub fn map_entries(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.entries.iter().map(|&v| f(v)).collect(),
            self.symptom_names.clone(),
            self.cause_names.clone(),
        )
    }
}

pub(crate) fn default_names(prefix: &str, count: usize) -> Vec<String> {
    let width = count.max(1).to_string().len().max(2);
    (1..=count)
        .map(|i| format!("{prefix}{i:0width$}"))
        .collect()
}

/// One reported sign/symptom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indicator {
    Absent,
    Present,
    Missing,
}

impl Indicator {
    /// Inference reads missing as absent.
    #[inline]
    pub fn is_present(self) -> bool {
        self == Indicator::Present
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Indicator::Absent => "0",
            Indicator::Present => "1",
            Indicator::Missing => ".",
        }
    }
}

impl From<bool> for Indicator {
    fn from(present: bool) -> Self {
        if present {
            Indicator::Present
        } else {
            Indicator::Absent
        }
    }
}

/// J×K matrix of reported indicators, one row per death.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymptomMatrix {
    entries: Vec<Indicator>,
    death_ids: Vec<String>,
    symptom_names: Vec<String>,
}

impl SymptomMatrix {
    pub fn new(
        entries: Vec<Indicator>,
        death_ids: Vec<String>,
        symptom_names: Vec<String>,
    ) -> Result<Self> {
        if death_ids.is_empty() {
            return Err(Error::Invalid("symptom matrix has no deaths".into()));
        }
        if entries.len() != death_ids.len() * symptom_names.len() {
            return Err(Error::Dimension(format!(
                "{} entries for {} deaths x {} symptoms",
                entries.len(),
                death_ids.len(),
                symptom_names.len()
            )));
        }
        check_unique(&death_ids)?;
        check_unique(&symptom_names)?;
        Ok(Self {
            entries,
            death_ids,
            symptom_names,
        })
    }

    /// Binary rows with generated names `D0001…`, `S001…`.
    pub fn from_binary_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("ragged symptom rows".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&v| Indicator::from(v != 0))
            .collect();
        Self::new(
            entries,
            default_names("D", rows.len()),
            default_names("S", k),
        )
    }

    pub fn n_deaths(&self) -> usize {
        self.death_ids.len()
    }

    pub fn n_symptoms(&self) -> usize {
        self.symptom_names.len()
    }

    pub fn row(&self, death: usize) -> &[Indicator] {
        let k = self.n_symptoms();
        &self.entries[death * k..(death + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Indicator]> {
        (0..self.n_deaths()).map(move |j| self.row(j))
    }

    pub fn entries(&self) -> &[Indicator] {
        &self.entries
    }

    pub fn death_ids(&self) -> &[String] {
        &self.death_ids
    }

    pub fn symptom_names(&self) -> &[String] {
        &self.symptom_names
    }

    pub fn missing_count(&self, death: usize) -> usize {
        self.row(death)
            .iter()
            .filter(|&&v| v == Indicator::Missing)
            .count()
    }

    pub fn map_entries(&self, mut f: impl FnMut(Indicator) -> Indicator) -> Self {
        Self {
            entries: self.entries.iter().map(|&v| f(v)).collect(),
            death_ids: self.death_ids.clone(),
            symptom_names: self.symptom_names.clone(),
        }
    }

    /// Checks that columns line up with `p`'s symptoms, name for name.
    pub fn check_compatible(&self, p: &CondProbMatrix) -> Result<()> {
        if self.symptom_names.len() != p.n_symptoms() {
            return Err(Error::Dimension(format!(
                "symptom file has {} columns, matrix has {} symptoms",
                self.symptom_names.len(),
                p.n_symptoms()
            )));
        }
        if let Some((a, b)) = self
            .symptom_names
            .iter()
            .zip(p.symptom_names())
            .find(|(a, b)| a != b)
        {
            return Err(Error::Dimension(format!(
                "symptom column `{a}` does not match matrix symptom `{b}`"
            )));
        }
        Ok(())
    }
}

/// Cause-specific mortality fractions: a point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Csmf {
    fractions: Vec<f64>,
    cause_names: Vec<String>,
}

impl Csmf {
    pub fn new(fractions: Vec<f64>, cause_names: Vec<String>) -> Result<Self> {
        if fractions.len() != cause_names.len() {
            return Err(Error::Dimension(format!(
                "{} fractions for {} causes",
                fractions.len(),
                cause_names.len()
            )));
        }
        if fractions.is_empty() {
            return Err(Error::Invalid("empty CSMF".into()));
        }
        check_unique(&cause_names)?;
        if let Some(&bad) = fractions.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return Err(Error::Invalid(format!(
                "CSMF entry {bad} is negative or not finite"
            )));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Invalid(format!("CSMF sums to {total}, not 1")));
        }
        Ok(Self {
            fractions,
            cause_names,
        })
    }

    /// Rescales non-negative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>, cause_names: Vec<String>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numeric(format!(
                "cannot normalize weights summing to {total}"
            )));
        }
        Self::new(
            weights.into_iter().map(|w| w / total).collect(),
            cause_names,
        )
    }

    pub fn uniform(cause_names: Vec<String>) -> Result<Self> {
        let n = cause_names.len();
        Self::from_weights(vec![1.0; n], cause_names)
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn cause_names(&self) -> &[String] {
        &self.cause_names
    }

    pub fn into_fractions(self) -> Vec<f64> {
        self.fractions
    }

    pub(crate) fn check_causes(&self, p: &CondProbMatrix) -> Result<()> {
        if self.cause_names != p.cause_names() {
            return Err(Error::Dimension(format!(
                "CSMF has {} causes that do not match the matrix's {} causes",
                self.len(),
                p.n_causes()
            )));
        }
        Ok(())
    }
}
