//! Verbal-autopsy cause-of-death assignment.
//!
//! Two methods share one data model: a K×N matrix of physician-graded
//! Pr(symptom | cause) and a J×K matrix of reported symptoms.
//!
//! * [`interva`] scores each death by multiplying the probabilities of its
//!   present symptoms with a prior guess of the CSMF and normalizing.
//! * [`insilico`] treats causes as latent classes and samples the joint
//!   posterior of the CSMF and every death's cause with a Gibbs sampler.
//!
//! [`simgen`] and [`eval`] provide the simulation study used to compare
//! them.

// `!(x >= 0.0)` style checks are how NaN gets rejected alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod eval;
pub mod exec;
pub mod grade;
pub mod insilico;
pub mod interva;
pub mod io;
pub mod math;
pub mod seed;
pub mod simgen;
pub mod validate;

pub use data::{CondProbMatrix, Csmf, Indicator, SymptomMatrix};
pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use grade::{decode_letter, LetterGrade};
