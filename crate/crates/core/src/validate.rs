//! Logical-consistency checks on a conditional-probability matrix.
//!
//! Physician-elicited matrices are not drawn from one event space, so
//! entries that should satisfy simple identities often do not. Users
//! supply the identities; this module reports where they fail.

use std::fmt;

use crate::data::CondProbMatrix;
use crate::error::{Error, Result};

/// Default tolerance for `SumEquals`; letter-decoded values are exact decimals.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// Σ Pr(part | c) = Pr(total | c)
    SumEquals { parts: Vec<String>, total: String },
    /// Pr(lesser | c) ≤ Pr(greater | c)
    LessEq { lesser: String, greater: String },
}

impl Constraint {
    fn symptoms(&self) -> Vec<&str> {
        match self {
            Constraint::SumEquals { parts, total } => parts
                .iter()
                .map(String::as_str)
                .chain(std::iter::once(total.as_str()))
                .collect(),
            Constraint::LessEq { lesser, greater } => vec![lesser, greater],
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::SumEquals { parts, total } => {
                write!(f, "SUM {} = {total}", parts.join(" "))
            }
            Constraint::LessEq { lesser, greater } => write!(f, "LEQ {lesser} {greater}"),
        }
    }
}

/// Which cause columns a constraint is checked against.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CauseScope {
    #[default]
    All,
    Only(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    items: Vec<(Constraint, CauseScope)>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        Self {
            items: constraints
                .into_iter()
                .map(|c| (c, CauseScope::All))
                .collect(),
        }
    }

    pub fn push(&mut self, constraint: Constraint, scope: CauseScope) {
        self.items.push((constraint, scope));
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Constraint, CauseScope)> {
        self.items.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint_index: usize,
    pub constraint: Constraint,
    pub cause: String,
    /// (symptom, value) for every symptom the constraint mentions.
    pub observed: Vec<(String, f64)>,
    /// `Σ parts − total` for sums, `lesser − greater` for inequalities.
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let observed: Vec<String> = self
            .observed
            .iter()
            .map(|(s, v)| format!("{s}={v}"))
            .collect();
        write!(
            f,
            "[{}] {} violated for cause {}: {} (residual {})",
            self.constraint_index,
            self.constraint,
            self.cause,
            observed.join(" "),
            self.residual
        )
    }
}

/// Checks every constraint against every in-scope cause column.
pub fn validate_cond_prob_matrix(
    p: &CondProbMatrix,
    constraints: &ConstraintSet,
    tol: f64,
) -> Result<Vec<Violation>> {
    let lookup = |name: &str| {
        p.symptom_index(name)
            .ok_or_else(|| Error::UnknownSymptom(name.to_string()))
    };
    // resolve all names up front so a bad reference fails before any report
    let mut resolved = Vec::with_capacity(constraints.len());
    for (constraint, scope) in constraints.iter() {
        let indices = constraint
            .symptoms()
            .into_iter()
            .map(lookup)
            .collect::<Result<Vec<_>>>()?;
        let causes: Vec<usize> = match scope {
            CauseScope::All => (0..p.n_causes()).collect(),
            CauseScope::Only(names) => names
                .iter()
                .map(|c| {
                    p.cause_names()
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| Error::Invalid(format!("unknown cause `{c}`")))
                })
                .collect::<Result<_>>()?,
        };
        resolved.push((constraint, indices, causes));
    }

    let mut report = Vec::new();
    for (index, (constraint, symptoms, causes)) in resolved.into_iter().enumerate() {
        for n in causes {
            let values: Vec<f64> = symptoms.iter().map(|&k| p.get(k, n)).collect();
            let (last, rest) = values.split_last().expect("constraints name ≥ 2 symptoms");
            let (residual, violated) = match constraint {
                Constraint::SumEquals { .. } => {
                    let r = rest.iter().sum::<f64>() - last;
                    (r, r.abs() > tol)
                }
                Constraint::LessEq { .. } => {
                    let r = rest[0] - last;
                    (r, r > tol)
                }
            };
            if violated {
                report.push(Violation {
                    constraint_index: index,
                    constraint: constraint.clone(),
                    cause: p.cause_names()[n].clone(),
                    observed: symptoms
                        .iter()
                        .map(|&k| p.symptom_names()[k].clone())
                        .zip(values.iter().copied())
                        .collect(),
                    residual,
                });
            }
        }
    }
    Ok(report)
}
