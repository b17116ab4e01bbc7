//! Divergence-theorem check with batches of polynomial vector fields.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::geometry::Geometry;
use crate::jets::JetSpace;
use crate::polynomial::{Monomials, Polynomial};

use super::integrate::{boundary_sums, volume_sums, BoundaryIntegrand, VolumeIntegrand};
use super::region::Region;

/// `X = X^i ∂_i` with polynomial components in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    comps: Vec<Polynomial>,
}

impl PolynomialField {
    pub fn new(comps: Vec<Polynomial>) -> Self {
        assert!(!comps.is_empty(), "a vector field needs components");
        assert!(comps
            .iter()
            .all(|c| c.dim() == comps.len() && c.degree() == comps[0].degree()));
        Self { comps }
    }

    pub fn random(rng: &mut impl Rng, dim: usize, degree: usize) -> Self {
        Self::new(
            (0..dim)
                .map(|_| Polynomial::random(rng, dim, degree))
                .collect(),
        )
    }

    /// Makes component `comp` independent of coordinate `axis`.
    pub fn independent_of(mut self, comp: usize, axis: usize) -> Self {
        self.comps[comp] = self.comps[comp].without_axis(axis);
        self
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn degree(&self) -> usize {
        self.comps[0].degree()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.comps
    }

    /// `∂_i X^i`, the coordinate part of the divergence.
    pub fn coordinate_divergence(&self) -> Polynomial {
        let mut d = self.comps[0].derivative(0);
        for (i, c) in self.comps.iter().enumerate().skip(1) {
            d = d.plus(&c.derivative(i));
        }
        d
    }
}

/// `∫_Ω div X dV`, `∫_{∂Ω} ⟨X, ν⟩ dS` and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesResult {
    pub volume: f64,
    pub flux: f64,
    pub residual: f64,
}

impl StokesResult {
    pub fn magnitude(&self) -> f64 {
        self.volume.abs().max(self.flux.abs())
    }

    /// Residual over the larger side, or the raw residual when both vanish.
    pub fn relative(&self) -> f64 {
        let m = self.magnitude();
        if m > 0.0 {
            self.residual / m
        } else {
            self.residual
        }
    }
}

struct Batch<'a> {
    geometry: &'a Geometry,
    fields: &'a [PolynomialField],
    divergences: Vec<Polynomial>,
    monomials: Monomials,
    table: Vec<f64>,
    space: Arc<JetSpace>,
    metric_axes: Vec<usize>,
    key: Option<Vec<u64>>,
    /// `Γ^k_{ki}` at the cached key.
    trace: Vec<f64>,
}

impl<'a> Batch<'a> {
    fn new(geometry: &'a Geometry, fields: &'a [PolynomialField]) -> Self {
        let n = geometry.dim();
        let degree = fields.iter().map(|f| f.degree()).max().unwrap_or(0);
        Self {
            geometry,
            fields,
            divergences: fields.iter().map(|f| f.coordinate_divergence()).collect(),
            monomials: Monomials::new(n, degree),
            table: Vec::new(),
            space: JetSpace::new(n, 1),
            metric_axes: geometry.metric_axes(),
            key: None,
            trace: vec![0.0; n],
        }
    }

    fn christoffel_trace(&mut self, x: &[f64]) -> Result<()> {
        let key: Vec<u64> = self.metric_axes.iter().map(|&a| x[a].to_bits()).collect();
        if self.key.as_ref() == Some(&key) {
            return Ok(());
        }
        let n = self.geometry.dim();
        let metric = self.geometry.metric_in(&self.space, x)?;
        let gamma = metric.christoffel();
        for i in 0..n {
            self.trace[i] = (0..n).map(|k| gamma.value(&[k, k, i])).sum();
        }
        self.key = Some(key);
        Ok(())
    }
}

impl VolumeIntegrand for Batch<'_> {
    fn width(&self) -> usize {
        self.fields.len()
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.christoffel_trace(x)?;
        self.monomials.eval_into(x, &mut self.table);
        for (k, field) in self.fields.iter().enumerate() {
            let mut div = self.divergences[k].eval_with(&self.table);
            for (i, c) in field.components().iter().enumerate() {
                if self.trace[i] != 0.0 {
                    div += self.trace[i] * c.eval_with(&self.table);
                }
            }
            out[k] = div;
        }
        Ok(())
    }
}

impl BoundaryIntegrand for Batch<'_> {
    fn width(&self) -> usize {
        self.fields.len()
    }

    fn eval(&mut self, x: &[f64], normal: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.geometry.dim();
        let g = self.geometry.metric_values(x);
        let nu_low: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g[i * n + j] * normal[j]).sum())
            .collect();
        self.monomials.eval_into(x, &mut self.table);
        for (k, field) in self.fields.iter().enumerate() {
            out[k] = field
                .components()
                .iter()
                .zip(&nu_low)
                .map(|(c, v)| c.eval_with(&self.table) * v)
                .sum();
        }
        Ok(())
    }
}

/// Divergence theorem residuals `|∫_Ω div X dV − ∫_{∂Ω} ⟨X, ν⟩ dS|`, one per field,
/// with `div X = ∂_i X^i + Γ^k_{ki} X^i`.
pub fn stokes_residual(
    region: &Region,
    fields: &[PolynomialField],
    q: usize,
) -> Result<Vec<StokesResult>> {
    let mut batch = Batch::new(region.geometry(), fields);
    let volume = volume_sums(region, &mut batch, q, false)?;
    let flux = boundary_sums(region, &mut batch, q, false)?;
    Ok(volume
        .iter()
        .zip(&flux)
        .map(|(&volume, &flux)| StokesResult {
            volume,
            flux,
            residual: (volume - flux).abs(),
        })
        .collect())
}
