//! Tensor-product Gauss–Legendre integration over regions and their boundaries.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sum::PairwiseAccumulator;

use super::region::{
    for_each_face_node, for_each_patch_node, unit_normal, Region, RegionKind, REGULARITY_FLOOR,
};

/// Nodes per axis unless configured otherwise.
pub const DEFAULT_Q: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Measure {
    Volume,
    WeightedVolume,
    Surface,
    WeightedSurface,
}

impl Measure {
    pub fn volume(weighted: bool) -> Self {
        if weighted {
            Measure::WeightedVolume
        } else {
            Measure::Volume
        }
    }

    pub fn surface(weighted: bool) -> Self {
        if weighted {
            Measure::WeightedSurface
        } else {
            Measure::Surface
        }
    }
}

/// A quadrature value with `|I(q) − I(q/2)|` as its refinement estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralResult {
    pub value: f64,
    pub refinement: f64,
    pub q: usize,
    pub measure: Measure,
}

/// A vector of scalar functions integrated against `dV`.
pub trait VolumeIntegrand {
    fn width(&self) -> usize;
    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

/// A vector of scalar functions integrated against `dS`, given the outward unit normal.
pub trait BoundaryIntegrand {
    fn width(&self) -> usize;
    fn eval(&mut self, x: &[f64], normal: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Wraps `FnMut(&[f64]) -> f64` as a one-column volume integrand.
pub struct Scalar<F>(pub F);

impl<F: FnMut(&[f64]) -> f64> VolumeIntegrand for Scalar<F> {
    fn width(&self) -> usize {
        1
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (self.0)(x);
        Ok(())
    }
}

/// Wraps `FnMut(x, ν) -> f64` as a one-column boundary integrand.
pub struct Flux<F>(pub F);

impl<F: FnMut(&[f64], &[f64]) -> f64> BoundaryIntegrand for Flux<F> {
    fn width(&self) -> usize {
        1
    }

    fn eval(&mut self, x: &[f64], normal: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (self.0)(x, normal);
        Ok(())
    }
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "quadrature needs q ≥ 2, got {q}"
        )));
    }
    Ok(())
}

/// `Σ w·|J|·√det g·[e^{−f}]·F(x)` at a single resolution.
pub fn volume_sums(
    region: &Region,
    integrand: &mut impl VolumeIntegrand,
    q: usize,
    weighted: bool,
) -> Result<Vec<f64>> {
    let geometry = region.geometry();
    let n = geometry.dim();
    let m = integrand.width();
    let indicator = region.kind() == RegionKind::Indicator;
    let mut acc = PairwiseAccumulator::new(m);
    let mut row = vec![0.0; m];
    for patch in region.patches() {
        for_each_patch_node(n, &patch, q, |x, w| {
            let needs_f = indicator || weighted;
            let f = if needs_f {
                geometry.potential_value(x)?
            } else {
                0.0
            };
            if indicator && !region.contains(f) {
                return Ok(());
            }
            let g = geometry.metric_values(x);
            let mut measure = w * libm::sqrt(linalg::det(&g, n).max(0.0));
            if weighted {
                measure *= libm::exp(-f);
            }
            integrand.eval(x, &mut row)?;
            row.iter_mut().for_each(|v| *v *= measure);
            acc.push(&row);
            Ok(())
        })?;
    }
    Ok(acc.finish())
}

/// `Σ w·dS·[e^{−f}]·F(x, ν)` at a single resolution; exactly zero without boundary.
pub fn boundary_sums(
    region: &Region,
    integrand: &mut impl BoundaryIntegrand,
    q: usize,
    weighted: bool,
) -> Result<Vec<f64>> {
    let geometry = region.geometry();
    let m = integrand.width();
    let faces = region.faces()?;
    let mut acc = PairwiseAccumulator::new(m);
    let mut row = vec![0.0; m];
    for face in &faces {
        for_each_face_node(geometry, face, q, |x, ds, sign| {
            let (nu, _, norm) = unit_normal(geometry, x, sign)?;
            if norm < REGULARITY_FLOOR {
                return Err(Error::NotRegular {
                    level: region.level().unwrap_or(f64::NAN),
                    min_grad: norm,
                });
            }
            let mut measure = ds;
            if weighted {
                measure *= libm::exp(-geometry.potential_value(x)?);
            }
            integrand.eval(x, &nu, &mut row)?;
            row.iter_mut().for_each(|v| *v *= measure);
            acc.push(&row);
            Ok(())
        })?;
    }
    Ok(acc.finish())
}

fn with_refinement(
    fine: Vec<f64>,
    coarse: Vec<f64>,
    q: usize,
    measure: Measure,
) -> Vec<IntegralResult> {
    fine.iter()
        .zip(&coarse)
        .map(|(&value, &c)| IntegralResult {
            value,
            refinement: (value - c).abs(),
            q,
            measure,
        })
        .collect()
}

/// Volume integrals at `q` nodes per axis, with the `q/2` refinement estimate.
pub fn integrate_region(
    region: &Region,
    integrand: &mut impl VolumeIntegrand,
    q: usize,
    weighted: bool,
) -> Result<Vec<IntegralResult>> {
    check_q(q)?;
    let fine = volume_sums(region, integrand, q, weighted)?;
    let coarse = volume_sums(region, integrand, q / 2, weighted)?;
    Ok(with_refinement(fine, coarse, q, Measure::volume(weighted)))
}

/// Boundary integrals at `q` nodes per axis, with the `q/2` refinement estimate.
pub fn integrate_boundary(
    region: &Region,
    integrand: &mut impl BoundaryIntegrand,
    q: usize,
    weighted: bool,
) -> Result<Vec<IntegralResult>> {
    check_q(q)?;
    let fine = boundary_sums(region, integrand, q, weighted)?;
    let coarse = boundary_sums(region, integrand, q / 2, weighted)?;
    Ok(with_refinement(fine, coarse, q, Measure::surface(weighted)))
}
