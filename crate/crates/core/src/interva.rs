//! Deterministic InterVA assignment.
//!
//! Each death's propensity for cause n is the prior guess f′ₙ times the
//! product of Pr(s | cₙ) over the symptoms that are *present*; absent and
//! missing symptoms contribute nothing. Propensities are normalized per
//! death and averaged into a CSMF. Everything runs in log space.

use crate::data::{CondProbMatrix, Csmf, Indicator, SymptomMatrix};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::normalize_log_weights;

#[derive(Debug, Clone)]
pub struct IntervaResult {
    /// Normalized cause probabilities; `None` for deaths excluded as undefined.
    pub per_death_probs: Vec<Option<Vec<f64>>>,
    pub csmf: Csmf,
    /// Deaths whose propensity is zero under every cause.
    pub propensity_underflow_flags: Vec<bool>,
}

impl IntervaResult {
    pub fn undefined_count(&self) -> usize {
        self.propensity_underflow_flags
            .iter()
            .filter(|&&f| f)
            .count()
    }

    pub fn included_count(&self) -> usize {
        self.per_death_probs.len() - self.undefined_count()
    }
}

/// Log propensities `ln f′ₙ + Σ_{k present} ln Pr(sₖ | cₙ)` for one death.
pub fn interva_propensities(
    symptoms: &[Indicator],
    p: &CondProbMatrix,
    f_prime: &Csmf,
) -> Result<Vec<f64>> {
    if symptoms.len() != p.n_symptoms() {
        return Err(Error::Dimension(format!(
            "death has {} symptoms, matrix has {}",
            symptoms.len(),
            p.n_symptoms()
        )));
    }
    if f_prime.len() != p.n_causes() {
        return Err(Error::Dimension(format!(
            "prior has {} causes, matrix has {}",
            f_prime.len(),
            p.n_causes()
        )));
    }
    let mut log_prop: Vec<f64> = f_prime.fractions().iter().map(|f| f.ln()).collect();
    for (k, s) in symptoms.iter().enumerate() {
        if s.is_present() {
            for (acc, &pr) in log_prop.iter_mut().zip(p.row(k)) {
                *acc += pr.ln();
            }
        }
    }
    Ok(log_prop)
}

/// Turns log propensities into probabilities. Fails when all are −∞.
pub fn interva_normalize(log_propensities: &[f64]) -> Result<Vec<f64>> {
    normalize_log_weights(log_propensities).ok_or_else(|| Error::UndefinedDeath {
        death: String::from("<unnamed>"),
    })
}

pub fn run_interva(s: &SymptomMatrix, p: &CondProbMatrix, f_prime: &Csmf) -> Result<IntervaResult> {
    run_interva_with(s, p, f_prime, Execution::default())
}

pub fn run_interva_with(
    s: &SymptomMatrix,
    p: &CondProbMatrix,
    f_prime: &Csmf,
    exec: Execution,
) -> Result<IntervaResult> {
    s.check_compatible(p)?;
    f_prime.check_causes(p)?;
    let rows = exec.map(s.n_deaths(), |j| {
        interva_propensities(s.row(j), p, f_prime).map(|lp| normalize_log_weights(&lp))
    });
    let n = p.n_causes();
    let mut totals = vec![0.0; n];
    let mut per_death_probs = Vec::with_capacity(rows.len());
    let mut flags = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row?;
        if let Some(probs) = &row {
            totals.iter_mut().zip(probs).for_each(|(t, v)| *t += v);
        }
        flags.push(row.is_none());
        per_death_probs.push(row);
    }
    let included = flags.iter().filter(|f| !**f).count();
    if included == 0 {
        return Err(Error::NoUsableDeaths);
    }
    let fractions = totals.into_iter().map(|t| t / included as f64).collect();
    // column means of rows summing to 1; renormalize away rounding drift
    let csmf = Csmf::from_weights(fractions, p.cause_names().to_vec())?;
    Ok(IntervaResult {
        per_death_probs,
        csmf,
        propensity_underflow_flags: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> CondProbMatrix {
        CondProbMatrix::with_default_names(&[vec![0.8, 0.2]]).unwrap()
    }

    fn uniform2() -> Csmf {
        Csmf::uniform(p1().cause_names().to_vec()).unwrap()
    }

    #[test]
    fn single_factor_product() {
        let lp = interva_propensities(&[Indicator::Present], &p1(), &uniform2()).unwrap();
        assert!((lp[0] - 0.4f64.ln()).abs() < 1e-15);
        assert!((lp[1] - 0.1f64.ln()).abs() < 1e-15);
        let probs = interva_normalize(&lp).unwrap();
        assert!((probs[0] - 0.8).abs() < 1e-12 && (probs[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn absent_symptoms_give_prior() {
        let p = CondProbMatrix::with_default_names(&[vec![0.3, 0.9], vec![0.1, 0.5]]).unwrap();
        let prior = Csmf::new(vec![0.3, 0.7], p.cause_names().to_vec()).unwrap();
        let lp =
            interva_propensities(&[Indicator::Absent, Indicator::Missing], &p, &prior).unwrap();
        assert_eq!(lp, vec![0.3f64.ln(), 0.7f64.ln()]);
    }

    #[test]
    fn zero_factor_annihilates() {
        // cause columns [0.5, 0.0] and [0.5, 0.5]
        let p = CondProbMatrix::with_default_names(&[vec![0.5, 0.5], vec![0.0, 0.5]]).unwrap();
        let prior = Csmf::uniform(p.cause_names().to_vec()).unwrap();
        let lp =
            interva_propensities(&[Indicator::Present, Indicator::Present], &p, &prior).unwrap();
        assert_eq!(lp[0], f64::NEG_INFINITY);
        assert!(lp[1].is_finite());
    }

    #[test]
    fn normalize_cases() {
        let u = interva_normalize(&[-3.0; 4]).unwrap();
        assert!(u.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        assert_eq!(
            interva_normalize(&[0.0, f64::NEG_INFINITY]).unwrap(),
            vec![1.0, 0.0]
        );
        assert!(matches!(
            interva_normalize(&[f64::NEG_INFINITY; 2]),
            Err(Error::UndefinedDeath { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let err = interva_propensities(&[Indicator::Present; 2], &p1(), &uniform2()).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn identical_deaths_and_pass_through() {
        let s = SymptomMatrix::from_binary_rows(&[vec![1], vec![1]]).unwrap();
        let r = run_interva(&s, &p1(), &uniform2()).unwrap();
        assert!((r.csmf.fractions()[0] - 0.8).abs() < 1e-12);

        let s = SymptomMatrix::from_binary_rows(&[vec![0]]).unwrap();
        let prior = Csmf::new(vec![0.3, 0.7], p1().cause_names().to_vec()).unwrap();
        let r = run_interva(&s, &p1(), &prior).unwrap();
        assert!((r.csmf.fractions()[0] - 0.3).abs() < 1e-15);
        assert!((r.csmf.fractions()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn undefined_deaths_are_excluded() {
        let p = CondProbMatrix::with_default_names(&[vec![0.0, 0.0], vec![0.5, 0.25]]).unwrap();
        let prior = Csmf::uniform(p.cause_names().to_vec()).unwrap();
        let s = SymptomMatrix::from_binary_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let r = run_interva(&s, &p, &prior).unwrap();
        assert_eq!(r.propensity_underflow_flags, vec![true, false]);
        assert_eq!(r.undefined_count(), 1);
        assert!(r.per_death_probs[0].is_none());
        assert!((r.csmf.fractions()[0] - 2.0 / 3.0).abs() < 1e-12);

        let s = SymptomMatrix::from_binary_rows(&[vec![1, 1]]).unwrap();
        assert!(matches!(
            run_interva(&s, &p, &prior),
            Err(Error::NoUsableDeaths)
        ));
    }
}
