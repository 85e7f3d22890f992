//! Letter grades used by physicians to express Pr(symptom | cause).
//!
//! The grading table repeats most letters three times, so each repeated
//! letter gets a `+`/plain/`-` sub-grade in rank order. `−` (U+2212) is
//! accepted as an alias for `-` when decoding.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterGrade {
    I,
    APlus,
    A,
    AMinus,
    BPlus,
    B,
    BMinus,
    CPlus,
    C,
    CMinus,
    DPlus,
    D,
    DMinus,
    E,
    N,
}

impl LetterGrade {
    /// All grades from most to least likely.
    pub const ALL: [LetterGrade; 15] = [
        LetterGrade::I,
        LetterGrade::APlus,
        LetterGrade::A,
        LetterGrade::AMinus,
        LetterGrade::BPlus,
        LetterGrade::B,
        LetterGrade::BMinus,
        LetterGrade::CPlus,
        LetterGrade::C,
        LetterGrade::CMinus,
        LetterGrade::DPlus,
        LetterGrade::D,
        LetterGrade::DMinus,
        LetterGrade::E,
        LetterGrade::N,
    ];

    /// Probabilities in the same order as [`LetterGrade::ALL`].
    pub const VALUES: [f64; 15] = [
        1.0, 0.8, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005, 0.0001, 0.00001,
        0.0,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn value(self) -> f64 {
        Self::VALUES[self.rank()]
    }

    pub fn label(self) -> &'static str {
        match self {
            LetterGrade::I => "I",
            LetterGrade::APlus => "A+",
            LetterGrade::A => "A",
            LetterGrade::AMinus => "A-",
            LetterGrade::BPlus => "B+",
            LetterGrade::B => "B",
            LetterGrade::BMinus => "B-",
            LetterGrade::CPlus => "C+",
            LetterGrade::C => "C",
            LetterGrade::CMinus => "C-",
            LetterGrade::DPlus => "D+",
            LetterGrade::D => "D",
            LetterGrade::DMinus => "D-",
            LetterGrade::E => "E",
            LetterGrade::N => "N",
        }
    }

    /// Exact inverse of [`LetterGrade::value`]; `None` for values off the scale.
    pub fn from_value(value: f64) -> Option<LetterGrade> {
        Self::VALUES
            .iter()
            .position(|&v| v == value)
            .map(|i| Self::ALL[i])
    }
}

impl fmt::Display for LetterGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LetterGrade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().replace('\u{2212}', "-");
        LetterGrade::ALL
            .iter()
            .copied()
            .find(|g| g.label() == normalized)
            .ok_or_else(|| Error::UnknownGrade(s.to_string()))
    }
}

/// Decodes a grade symbol to its probability.
pub fn decode_letter(label: &str) -> Result<f64> {
    label.parse::<LetterGrade>().map(LetterGrade::value)
}
