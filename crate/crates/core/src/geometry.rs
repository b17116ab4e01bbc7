//! Example geometries and the seeded random metric generator.
//!
//! Catalog:
//! - `E4`: flat ℝ⁴, no potential;
//! - `GAUSS`: flat ℝ⁴ with `f = |x|²/4`;
//! - `S4`: round sphere of radius √6 in hyperspherical angles, `f ≡ 2`;
//! - `CYL`: `S³(2) × ℝ` in angles `(ψ, θ, φ)` and height `t`, `f = t²/4 + 3/2`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::linalg;
use crate::polynomial::Polynomial;
use crate::tensors::MetricAtPoint;

/// Names accepted by [`Geometry::catalog`].
pub const CATALOG: [&str; 4] = ["E4", "GAUSS", "S4", "CYL"];

/// Default distance kept from chart boundaries when sampling.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Sampling margin of the hyperspherical charts. Fourth-derivative
/// quantities lose about `ε_mach / δ⁸` absolute accuracy at distance `δ`
/// from a pole.
pub const POLE_MARGIN: f64 = 0.3;

/// Half-width of the random metric's coordinate box.
pub const RANDOM_BOX: f64 = 0.5;

const MAX_RESAMPLES: usize = 100;

/// Distance from the singular set of a hyperspherical chart, measured as
/// `sin ψ₀ ⋯ sin ψ_{k−2}`, below which curvature is evaluated in a rotated chart.
pub const RECENTRE_BELOW: f64 = 0.5;

/// A point in a rotated angle chart, see [`Geometry::recentred`].
#[derive(Debug, Clone, PartialEq)]
pub struct Recentred {
    pub point: Vec<f64>,
    /// `∂y^a/∂x^i` at `a·n + i`.
    pub jacobian: Vec<f64>,
}

/// Unit vector with hyperspherical angles `psi`.
fn sphere_point(psi: &[f64], out: &mut [f64]) {
    let k = psi.len();
    let mut s = 1.0;
    for m in 0..k {
        out[m] = s * libm::cos(psi[m]);
        s *= libm::sin(psi[m]);
    }
    out[k] = s;
}

/// `∂u_r/∂ψ_i` at `r·k + i`, as products without division.
fn sphere_tangents(psi: &[f64]) -> Vec<f64> {
    let k = psi.len();
    let mut e = vec![0.0; (k + 1) * k];
    for r in 0..=k {
        // u_r = sin ψ₀ ⋯ sin ψ_{r−1} · cos ψ_r, the cosine absent for r = k.
        for i in 0..k.min(r + 1) {
            let mut p = 1.0;
            for l in 0..r.min(k) {
                p *= if l == i {
                    libm::cos(psi[l])
                } else {
                    libm::sin(psi[l])
                };
            }
            if r < k {
                p *= if r == i {
                    -libm::sin(psi[r])
                } else {
                    libm::cos(psi[r])
                };
            }
            e[r * k + i] = p;
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricModel {
    Flat,
    /// `a² (dψ² + sin²ψ dθ² + sin²ψ sin²θ dφ² + …)` on the n-sphere.
    RoundSphere {
        radius_sq: f64,
    },
    /// Round 3-sphere block of the given squared radius times a line in the last coordinate.
    SphereTimesLine {
        radius_sq: f64,
    },
    /// `δ_ij + ε Q_ij(x)` with symmetric polynomial `Q`, stored row-major.
    Perturbed {
        epsilon: f64,
        q: Vec<Polynomial>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    None,
    Constant(f64),
    /// `|x|²/4`
    HalfRadiusSquared,
    /// `t²/4 + c` in the last coordinate.
    Height {
        offset: f64,
    },
    Polynomial(Polynomial),
}

/// Structural facts used to gate hypothesis-dependent checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Properties {
    /// `Hess f + Rc = ½g` and `R + |∇f|² = f` hold exactly.
    pub soliton: bool,
    /// `Rc = λg` for a constant `λ`.
    pub einstein: bool,
    pub conformally_flat: bool,
    /// Compact without boundary; the chart covers it up to a null set.
    pub closed: bool,
}

/// Parameters of the random metric generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMetricConfig {
    pub seed: u64,
    pub dim: usize,
    pub epsilon: f64,
    pub degree: usize,
    pub with_potential: bool,
}

impl Default for RandomMetricConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            dim: 4,
            epsilon: 0.05,
            degree: 3,
            with_potential: false,
        }
    }
}

/// A coordinate chart with metric and optional potential.
#[derive(Debug, Clone)]
pub struct Geometry {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    metric: MetricModel,
    potential: PotentialModel,
    properties: Properties,
    margin: f64,
    /// Attempts the random generator needed; 1 for catalog entries.
    attempts: usize,
}

impl Geometry {
    pub fn catalog(name: &str) -> Result<Self> {
        let line = 12.0;
        let flat = |potential, soliton| Geometry {
            name: name.to_string(),
            lower: vec![-line; 4],
            upper: vec![line; 4],
            metric: MetricModel::Flat,
            potential,
            properties: Properties {
                soliton,
                einstein: true,
                conformally_flat: true,
                closed: false,
            },
            margin: DEFAULT_MARGIN,
            attempts: 1,
        };
        Ok(match name {
            "E4" => flat(PotentialModel::None, false),
            "GAUSS" => flat(PotentialModel::HalfRadiusSquared, true),
            "S4" => Geometry {
                name: name.to_string(),
                lower: vec![0.0; 4],
                upper: vec![PI, PI, PI, 2.0 * PI],
                metric: MetricModel::RoundSphere { radius_sq: 6.0 },
                potential: PotentialModel::Constant(2.0),
                properties: Properties {
                    soliton: true,
                    einstein: true,
                    conformally_flat: true,
                    closed: true,
                },
                margin: POLE_MARGIN,
                attempts: 1,
            },
            "CYL" => Geometry {
                name: name.to_string(),
                lower: vec![0.0, 0.0, 0.0, -line],
                upper: vec![PI, PI, 2.0 * PI, line],
                metric: MetricModel::SphereTimesLine { radius_sq: 4.0 },
                potential: PotentialModel::Height { offset: 1.5 },
                properties: Properties {
                    soliton: true,
                    einstein: false,
                    conformally_flat: true,
                    closed: false,
                },
                margin: POLE_MARGIN,
                attempts: 1,
            },
            other => return Err(Error::UnknownGeometry(other.to_string())),
        })
    }

    /// `δ + εQ` on `[-½, ½]^n`, resampled until positive definite on the box.
    pub fn random(cfg: &RandomMetricConfig) -> Result<Self> {
        if cfg.dim < 2 {
            return Err(Error::Dimension {
                what: "random metric",
                dim: cfg.dim,
            });
        }
        if !(cfg.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "perturbation amplitude {}",
                cfg.epsilon
            )));
        }
        let n = cfg.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for attempt in 1..=MAX_RESAMPLES {
            let mut q = vec![Polynomial::zero(n, cfg.degree); n * n];
            for i in 0..n {
                for j in i..n {
                    let p = Polynomial::random(&mut rng, n, cfg.degree);
                    q[i * n + j] = p.clone();
                    q[j * n + i] = p;
                }
            }
            let potential = if cfg.with_potential {
                PotentialModel::Polynomial(Polynomial::random(&mut rng, n, 3))
            } else {
                PotentialModel::None
            };
            let geom = Geometry {
                name: "RAND".to_string(),
                lower: vec![-RANDOM_BOX; n],
                upper: vec![RANDOM_BOX; n],
                metric: MetricModel::Perturbed {
                    epsilon: cfg.epsilon,
                    q,
                },
                potential,
                properties: Properties::default(),
                margin: DEFAULT_MARGIN,
                attempts: attempt,
            };
            if geom.certified_positive() {
                return Ok(geom);
            }
        }
        Err(Error::PositiveDefiniteUnattainable {
            attempts: MAX_RESAMPLES,
        })
    }

    /// Gershgorin bound over the whole box, falling back to a lattice of
    /// eigenvalue checks with a 0.1 floor.
    fn certified_positive(&self) -> bool {
        let MetricModel::Perturbed { epsilon, q } = &self.metric else {
            return true;
        };
        let n = self.dim();
        let gershgorin = (0..n).all(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| q[i * n + j].abs_bound(RANDOM_BOX))
                .sum();
            1.0 - epsilon * (q[i * n + i].abs_bound(RANDOM_BOX) + off) > 0.0
        });
        if gershgorin {
            return true;
        }
        let steps = 5usize;
        let mut x = vec![0.0; n];
        for off in 0..steps.pow(n as u32) {
            let mut rest = off;
            for xi in x.iter_mut() {
                *xi = -RANDOM_BOX + 2.0 * RANDOM_BOX * (rest % steps) as f64 / (steps - 1) as f64;
                rest /= steps;
            }
            let g = self.metric_values(&x);
            if linalg::symmetric_eigenvalues(&g, n)[0] < 0.1 {
                return false;
            }
        }
        true
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn metric_model(&self) -> &MetricModel {
        &self.metric
    }

    pub fn potential_model(&self) -> &PotentialModel {
        &self.potential
    }

    pub fn properties(&self) -> Properties {
        self.properties
    }

    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Distance from the chart boundary used by [`Geometry::samples`].
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// Coordinates the metric components depend on.
    pub fn metric_axes(&self) -> Vec<usize> {
        let n = self.dim();
        match &self.metric {
            MetricModel::Flat => Vec::new(),
            MetricModel::RoundSphere { .. } => (0..n - 1).collect(),
            MetricModel::SphereTimesLine { .. } => (0..n.saturating_sub(2)).collect(),
            MetricModel::Perturbed { .. } => (0..n).collect(),
        }
    }

    /// Coordinates the potential depends on.
    pub fn potential_axes(&self) -> Vec<usize> {
        let n = self.dim();
        match &self.potential {
            PotentialModel::None | PotentialModel::Constant(_) => Vec::new(),
            PotentialModel::HalfRadiusSquared | PotentialModel::Polynomial(_) => (0..n).collect(),
            PotentialModel::Height { .. } => vec![n - 1],
        }
    }

    pub fn has_potential(&self) -> bool {
        self.potential != PotentialModel::None
    }

    /// Replaces the potential, clearing the soliton property.
    pub fn with_potential(mut self, potential: PotentialModel) -> Self {
        self.potential = potential;
        self.properties.soliton = false;
        self
    }

    fn check_inside(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape(alloc::format!(
                "point of length {} in dimension {}",
                x.len(),
                self.dim()
            )));
        }
        for (d, &xi) in x.iter().enumerate() {
            if !(xi >= self.lower[d] && xi <= self.upper[d]) {
                return Err(Error::OutsideChart(alloc::format!(
                    "coordinate {d} = {xi} outside [{}, {}] of {}",
                    self.lower[d],
                    self.upper[d],
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Metric, inverse and Christoffel symbols as jets of the given order at `x`.
    pub fn metric_at(&self, x: &[f64], order: usize) -> Result<MetricAtPoint> {
        self.check_inside(x)?;
        let space = JetSpace::new(self.dim(), order);
        self.metric_in(&space, x)
    }

    /// As [`Geometry::metric_at`], reusing an existing jet space.
    pub fn metric_in(&self, space: &Arc<JetSpace>, x: &[f64]) -> Result<MetricAtPoint> {
        let comps = self.metric_jets(space, x)?;
        MetricAtPoint::from_components(x.to_vec().into(), comps)
    }

    /// The `n²` metric component jets at `x`.
    pub fn metric_jets(&self, space: &Arc<JetSpace>, x: &[f64]) -> Result<Vec<Jet>> {
        let n = self.dim();
        let order = space.max_order();
        let diag = |d: Vec<Jet>| -> Vec<Jet> {
            let z = Jet::zero(space, order);
            (0..n * n)
                .map(|o| {
                    if o / n == o % n {
                        d[o / n].clone()
                    } else {
                        z.clone()
                    }
                })
                .collect()
        };
        Ok(match &self.metric {
            MetricModel::Flat => diag(vec![Jet::constant(space, order, 1.0); n]),
            MetricModel::RoundSphere { radius_sq } => {
                let mut d = Vec::with_capacity(n);
                let mut w = Jet::constant(space, order, *radius_sq);
                for i in 0..n {
                    d.push(w.clone());
                    if i + 1 < n {
                        let s = Jet::variable(space, i, x[i])?.sin();
                        w = &w * &(&s * &s);
                    }
                }
                diag(d)
            }
            MetricModel::SphereTimesLine { radius_sq } => {
                let mut d = Vec::with_capacity(n);
                let mut w = Jet::constant(space, order, *radius_sq);
                for i in 0..n - 1 {
                    d.push(w.clone());
                    let s = Jet::variable(space, i, x[i])?.sin();
                    w = &w * &(&s * &s);
                }
                d.push(Jet::constant(space, order, 1.0));
                diag(d)
            }
            MetricModel::Perturbed { epsilon, q } => (0..n * n)
                .map(|o| {
                    let mut j = q[o].to_jet(space, order, x).scale(*epsilon);
                    if o / n == o % n {
                        j = j.add_const(1.0);
                    }
                    j
                })
                .collect(),
        })
    }

    /// Metric components at `x` in plain floating point, row-major.
    pub fn metric_values(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; n * n];
        match &self.metric {
            MetricModel::Flat => (0..n).for_each(|i| g[i * n + i] = 1.0),
            MetricModel::RoundSphere { radius_sq } => {
                let mut w = *radius_sq;
                for i in 0..n {
                    g[i * n + i] = w;
                    w *= libm::sin(x[i]) * libm::sin(x[i]);
                }
            }
            MetricModel::SphereTimesLine { radius_sq } => {
                let mut w = *radius_sq;
                for i in 0..n - 1 {
                    g[i * n + i] = w;
                    w *= libm::sin(x[i]) * libm::sin(x[i]);
                }
                g[n * n - 1] = 1.0;
            }
            MetricModel::Perturbed { epsilon, q } => {
                for (o, gi) in g.iter_mut().enumerate() {
                    *gi = epsilon * q[o].eval(x) + if o / n == o % n { 1.0 } else { 0.0 };
                }
            }
        }
        g
    }

    /// Number of hyperspherical angles leading the coordinates.
    fn sphere_angles(&self) -> usize {
        match &self.metric {
            MetricModel::RoundSphere { .. } => self.dim(),
            MetricModel::SphereTimesLine { .. } => self.dim() - 1,
            MetricModel::Flat | MetricModel::Perturbed { .. } => 0,
        }
    }

    /// The same point in a rotated angle chart when `x` is within
    /// [`RECENTRE_BELOW`] of the chart's singular set.
    ///
    /// The rotation permutes the embedding coordinates of the sphere factor,
    /// so it is an isometry and the metric keeps its coordinate expression.
    /// Coordinates outside the sphere factor are unchanged.
    pub fn recentred(&self, x: &[f64]) -> Option<Recentred> {
        let k = self.sphere_angles();
        if k < 2 {
            return None;
        }
        let n = self.dim();
        let mut u = vec![0.0; k + 1];
        sphere_point(&x[..k], &mut u);
        if libm::hypot(u[k - 1], u[k]) >= RECENTRE_BELOW {
            return None;
        }
        // The two largest embedding coordinates move to the last two slots.
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()).then(a.cmp(&b)));
        let (first, second) = (order[0].min(order[1]), order[0].max(order[1]));
        let mut perm: Vec<usize> = (0..=k).filter(|&i| i != first && i != second).collect();
        perm.push(first);
        perm.push(second);
        let v: Vec<f64> = perm.iter().map(|&i| u[i]).collect();
        let mut y = x.to_vec();
        for m in 0..k - 1 {
            let tail: f64 = v[m + 1..].iter().map(|t| t * t).sum();
            y[m] = libm::atan2(libm::sqrt(tail), v[m]);
        }
        let phi = libm::atan2(v[k], v[k - 1]);
        y[k - 1] = if phi < 0.0 { phi + 2.0 * PI } else { phi };
        // ∂y/∂x = diag(1/h²) E(y)ᵀ P E(x) on the sphere block.
        let e_old = sphere_tangents(&x[..k]);
        let e_new = sphere_tangents(&y[..k]);
        let mut jacobian = vec![0.0; n * n];
        let mut h2 = 1.0;
        for a in 0..k {
            for i in 0..k {
                jacobian[a * n + i] = (0..=k)
                    .map(|r| e_new[r * k + a] * e_old[perm[r] * k + i])
                    .sum::<f64>()
                    / h2;
            }
            h2 *= libm::sin(y[a]) * libm::sin(y[a]);
        }
        for d in k..n {
            jacobian[d * n + d] = 1.0;
        }
        Some(Recentred { point: y, jacobian })
    }

    /// Potential as a jet, or [`Error::MissingPotential`].
    pub fn potential_jet(&self, space: &Arc<JetSpace>, x: &[f64]) -> Result<Jet> {
        let order = space.max_order();
        let n = self.dim();
        Ok(match &self.potential {
            PotentialModel::None => return Err(Error::MissingPotential(self.name.clone())),
            PotentialModel::Constant(c) => Jet::constant(space, order, *c),
            PotentialModel::HalfRadiusSquared => {
                let mut acc = Jet::zero(space, order);
                for i in 0..n {
                    let xi = Jet::variable(space, i, x[i])?;
                    acc.fma_scaled(&xi, &xi, 0.25);
                }
                acc
            }
            PotentialModel::Height { offset } => {
                let t = Jet::variable(space, n - 1, x[n - 1])?;
                (&t * &t).scale(0.25).add_const(*offset)
            }
            PotentialModel::Polynomial(p) => p.to_jet(space, order, x),
        })
    }

    pub fn potential_value(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim();
        Ok(match &self.potential {
            PotentialModel::None => return Err(Error::MissingPotential(self.name.clone())),
            PotentialModel::Constant(c) => *c,
            PotentialModel::HalfRadiusSquared => 0.25 * x.iter().map(|v| v * v).sum::<f64>(),
            PotentialModel::Height { offset } => 0.25 * x[n - 1] * x[n - 1] + offset,
            PotentialModel::Polynomial(p) => p.eval(x),
        })
    }

    /// [`Geometry::sample_points`] with the geometry's own margin.
    pub fn samples(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.sample_points(count, seed, self.margin)
    }

    /// Coordinate partials `∂_i f` at `x`.
    pub fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        Ok(match &self.potential {
            PotentialModel::None => return Err(Error::MissingPotential(self.name.clone())),
            PotentialModel::Constant(_) => vec![0.0; n],
            PotentialModel::HalfRadiusSquared => x.iter().map(|v| 0.5 * v).collect(),
            PotentialModel::Height { .. } => {
                let mut d = vec![0.0; n];
                d[n - 1] = 0.5 * x[n - 1];
                d
            }
            PotentialModel::Polynomial(p) => (0..n).map(|a| p.derivative(a).eval(x)).collect(),
        })
    }

    /// Uniform points in the chart box shrunk by `margin`.
    pub fn sample_points(&self, count: usize, seed: u64, margin: f64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be at least 1".to_string(),
            ));
        }
        let n = self.dim();
        for d in 0..n {
            if !(self.upper[d] - self.lower[d] > 2.0 * margin) || !(margin >= 0.0) {
                return Err(Error::EmptyChart { margin });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| {
                (0..n)
                    .map(|d| rng.gen_range(self.lower[d] + margin..self.upper[d] - margin))
                    .collect()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        assert_eq!(
            Geometry::catalog("T4").unwrap_err(),
            Error::UnknownGeometry("T4".into())
        );
    }

    #[test]
    fn zero_perturbation_is_flat() {
        let g = Geometry::random(&RandomMetricConfig {
            epsilon: 0.0,
            seed: 99,
            ..Default::default()
        })
        .unwrap();
        let v = g.metric_values(&[0.1, 0.2, -0.3, 0.4]);
        for (o, x) in v.iter().enumerate() {
            assert_eq!(*x, if o / 4 == o % 4 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn random_metric_is_reproducible() {
        let cfg = RandomMetricConfig {
            seed: 42,
            ..Default::default()
        };
        let a = Geometry::random(&cfg).unwrap();
        let b = Geometry::random(&cfg).unwrap();
        assert_eq!(a.metric_model(), b.metric_model());
        let ev = linalg::symmetric_eigenvalues(&a.metric_values(&[0.0; 4]), 4);
        assert!(ev[0] > 0.5, "{ev:?}");
    }

    #[test]
    fn jets_agree_with_values() {
        let cfg = RandomMetricConfig {
            seed: 5,
            dim: 5,
            with_potential: true,
            ..Default::default()
        };
        for geom in [
            Geometry::random(&cfg).unwrap(),
            Geometry::catalog("S4").unwrap(),
            Geometry::catalog("CYL").unwrap(),
        ] {
            let pts = geom.sample_points(3, 1, DEFAULT_MARGIN).unwrap();
            let space = JetSpace::new(geom.dim(), 2);
            for p in &pts {
                let jets = geom.metric_jets(&space, p).unwrap();
                for (j, v) in jets.iter().zip(geom.metric_values(p)) {
                    assert!((j.value() - v).abs() < 1e-13);
                }
                let f = geom.potential_jet(&space, p).unwrap();
                assert!((f.value() - geom.potential_value(p).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn recentred_chart_is_an_isometry() {
        for geom in [
            Geometry::catalog("S4").unwrap(),
            Geometry::catalog("CYL").unwrap(),
        ] {
            let n = geom.dim();
            let mut x = vec![0.0; n];
            for (psi, theta, last) in [
                (1e-3, 1.0, 0.4),
                (2.0, 3.1, 5.0),
                (3.14, 1e-4, 0.0),
                (0.2, 0.3, 6.2),
            ] {
                x[0] = psi;
                x[1] = theta;
                x[2] = 0.5;
                x[n - 1] = last;
                let r = geom.recentred(&x).expect("close to the singular set");
                let mut u = vec![0.0; n + 1];
                let k = geom.sphere_angles();
                sphere_point(&r.point[..k], &mut u[..k + 1]);
                assert!(libm::hypot(u[k - 1], u[k]) >= RECENTRE_BELOW);
                let (g, h, j) = (
                    geom.metric_values(&x),
                    geom.metric_values(&r.point),
                    &r.jacobian,
                );
                for a in 0..n {
                    for b in 0..n {
                        let pulled: f64 = (0..n)
                            .flat_map(|c| (0..n).map(move |d| (c, d)))
                            .map(|(c, d)| j[c * n + a] * h[c * n + d] * j[d * n + b])
                            .sum();
                        assert!(
                            (pulled - g[a * n + b]).abs() <= 1e-13 * 6.0,
                            "{} {x:?} ({a},{b})",
                            geom.name()
                        );
                    }
                }
            }
            x.iter_mut().for_each(|v| *v = 1.2);
            assert!(geom.recentred(&x).is_none());
        }
        assert!(Geometry::catalog("GAUSS")
            .unwrap()
            .recentred(&[0.0; 4])
            .is_none());
    }

    #[test]
    fn sampling_respects_margin() {
        let g = Geometry::catalog("S4").unwrap();
        let pts = g.sample_points(200, 3, 0.01).unwrap();
        for p in &pts {
            for d in 0..4 {
                assert!(p[d] >= g.lower()[d] + 0.01 && p[d] <= g.upper()[d] - 0.01);
            }
        }
        assert_eq!(pts, g.sample_points(200, 3, 0.01).unwrap());
        assert!(matches!(
            g.sample_points(1, 3, 4.0),
            Err(Error::EmptyChart { .. })
        ));
        assert!(Geometry::catalog("E4")
            .unwrap()
            .potential_value(&[0.0; 4])
            .is_err());
    }
}
