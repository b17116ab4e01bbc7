//! Verdicts and per-identity reports.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    #[cfg_attr(feature = "serde", serde(rename = "PASS"))]
    Pass,
    #[cfg_attr(feature = "serde", serde(rename = "FAIL"))]
    Fail,
    #[cfg_attr(feature = "serde", serde(rename = "SKIPPED-HYPOTHESIS"))]
    SkippedHypothesis,
    #[cfg_attr(feature = "serde", serde(rename = "NOT-APPLICABLE"))]
    NotApplicable,
    #[cfg_attr(feature = "serde", serde(rename = "LOW-ACCURACY"))]
    LowAccuracy,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::SkippedHypothesis => "SKIPPED-HYPOTHESIS",
            Verdict::NotApplicable => "NOT-APPLICABLE",
            Verdict::LowAccuracy => "LOW-ACCURACY",
        }
    }

    /// PASS when `residual ≤ tolerance`, FAIL otherwise (including NaN).
    pub fn from_residual(residual: f64, tolerance: f64) -> Self {
        if residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked identity on one geometry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityReport {
    pub id: String,
    /// The identity in formula form.
    pub anchor: String,
    pub geometry: String,
    pub samples: usize,
    /// Absent when the identity was not evaluated.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Numerical values behind an integral identity report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaDetail {
    pub id: String,
    pub geometry: String,
    /// Sublevel `r` of `Ω_r`, absent on a closed manifold.
    pub level: Option<f64>,
    pub q: usize,
    /// Each side of the identity; the first is compared against the others.
    pub sides: Vec<f64>,
    /// Sum of the `|I(q) − I(q/2)|` estimates of the integrals involved.
    pub refinement: f64,
    /// Largest outermost-shell contribution for integrals over the whole manifold.
    pub tail: Option<f64>,
    /// Level the whole-manifold integrals reached.
    pub outer_level: Option<f64>,
    pub note: Option<String>,
}

impl LemmaDetail {
    /// Largest `|sides[0] − sides[k]|`.
    pub fn residual(&self) -> f64 {
        self.sides
            .iter()
            .skip(1)
            .map(|s| (self.sides[0] - s).abs())
            .fold(0.0, nan_max)
    }

    pub fn magnitude(&self) -> f64 {
        self.sides.iter().map(|s| s.abs()).fold(0.0, nan_max)
    }
}

/// `max` that propagates NaN, so a broken evaluation can never pass.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
