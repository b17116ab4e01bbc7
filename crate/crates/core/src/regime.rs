//! Classification regimes of the Bach-like tensor `αU + βV`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    #[cfg_attr(feature = "serde", serde(rename = "V-ONLY"))]
    VOnly,
    #[cfg_attr(feature = "serde", serde(rename = "BACH-LINE"))]
    BachLine,
    #[cfg_attr(feature = "serde", serde(rename = "LAMBDA"))]
    Lambda,
    #[cfg_attr(feature = "serde", serde(rename = "OPEN"))]
    Open,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::VOnly => "V-ONLY",
            Regime::BachLine => "BACH-LINE",
            Regime::Lambda => "LAMBDA",
            Regime::Open => "OPEN",
        }
    }

    pub fn conclusion(self) -> &'static str {
        match self {
            Regime::VOnly | Regime::Lambda => "Einstein or Gaussian soliton",
            Regime::BachLine => {
                "Einstein, or finite quotient of Gaussian ℝ⁴ or round cylinder S³×ℝ"
            }
            Regime::Open => "no classification known (conjectured for pure U)",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeVerdict {
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    pub conclusion: String,
    /// Membership in `Λ = {α ≥ 0, β > α/3} ∪ {α ≤ 0, β < α/3}`.
    pub in_lambda: bool,
}

/// `(α ≥ 0 ∧ β > α/3) ∨ (α ≤ 0 ∧ β < α/3)`, strict inequalities taken literally.
pub fn in_lambda(alpha: f64, beta: f64) -> bool {
    let third = alpha / 3.0;
    (alpha >= 0.0 && beta > third) || (alpha <= 0.0 && beta < third)
}

pub fn classify_regime(alpha: f64, beta: f64) -> RegimeVerdict {
    let lambda = in_lambda(alpha, beta);
    let regime = if alpha == 0.0 && beta == 0.0 {
        Regime::Open
    } else if alpha == 0.0 {
        Regime::VOnly
    } else if beta == alpha / 3.0 {
        Regime::BachLine
    } else if lambda {
        Regime::Lambda
    } else {
        Regime::Open
    };
    RegimeVerdict {
        alpha,
        beta,
        regime,
        conclusion: regime.conclusion().to_string(),
        in_lambda: lambda,
    }
}

/// Axis of a regime lattice: `min + i·step` for `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid axis [{min}, {max}] with step {step}"
            )));
        }
        Ok(Self { min, max, step })
    }

    /// Points up to `max`, allowing rounding slack of a millionth of a step.
    pub fn values(&self) -> Vec<f64> {
        let count = libm::floor((self.max - self.min) / self.step + 1e-6) as usize + 1;
        (0..count)
            .map(|i| self.min + i as f64 * self.step)
            .collect()
    }
}

/// Verdicts over the lattice, `α` outer and `β` inner.
pub fn grid(alpha: GridAxis, beta: GridAxis) -> Vec<RegimeVerdict> {
    let betas = beta.values();
    alpha
        .values()
        .into_iter()
        .flat_map(|a| betas.iter().map(move |&b| classify_regime(a, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_points() {
        assert_eq!(classify_regime(0.5, 1.0 / 6.0).regime, Regime::BachLine);
        let v = classify_regime(0.0, 1.0);
        assert_eq!(v.regime, Regime::VOnly);
        assert!(v.in_lambda);
        assert_eq!(v.conclusion, "Einstein or Gaussian soliton");
        assert_eq!(classify_regime(1.0, 0.0).regime, Regime::Open);
        assert_eq!(classify_regime(1.0, 1.0).regime, Regime::Lambda);
        assert_eq!(classify_regime(0.0, 0.0).regime, Regime::Open);
        assert_eq!(classify_regime(-1.0, -1.0).regime, Regime::Lambda);
        assert_eq!(classify_regime(0.0, -1.0).regime, Regime::VOnly);
    }

    #[test]
    fn grid_size() {
        let axis = GridAxis::new(-1.0, 1.0, 0.25).unwrap();
        assert_eq!(axis.values().len(), 9);
        assert_eq!(grid(axis, axis).len(), 81);
        assert!(GridAxis::new(0.0, 1.0, 0.0).is_err());
    }
}
