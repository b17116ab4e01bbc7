//! Sublevel sets `Ω_r = {f ≤ r}` and their parameterizations.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, PotentialModel};
use crate::jets::{Jet, JetSpace, MultiIndex};
use crate::linalg;

use super::gauss::GaussLegendre;

/// Smallest `|∇f|` accepted on a boundary.
pub const REGULARITY_FLOOR: f64 = 1e-6;

/// How a region is laid out in the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionKind {
    /// The whole chart of a closed manifold.
    Closed,
    /// `inner < |x| ≤ outer` in Cartesian coordinates.
    Ball { inner: f64, outer: f64 },
    /// `inner < |x_last| ≤ outer`, all other coordinates over the full chart.
    Slab { inner: f64, outer: f64 },
    /// Chart box restricted by the indicator of `lower < f ≤ level`.
    Indicator,
}

/// `{lower < f ≤ level}` (or all of a closed manifold) on one geometry.
#[derive(Debug, Clone)]
pub struct Region<'g> {
    geometry: &'g Geometry,
    kind: RegionKind,
    lower: Option<f64>,
    level: Option<f64>,
}

/// One tensor-product parameter block of a volume.
#[derive(Debug, Clone)]
pub enum Patch {
    /// Chart coordinates themselves.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Radius and hyperspherical angles.
    Spherical { inner: f64, outer: f64 },
}

/// One boundary component.
#[derive(Debug, Clone)]
pub enum Face {
    /// Coordinate sphere `|x| = radius`, parameterized by angles.
    Sphere { radius: f64, sign: f64 },
    /// Coordinate hyperplane `x_axis = value` over the box on the remaining axes.
    Coordinate {
        axis: usize,
        value: f64,
        lower: Vec<f64>,
        upper: Vec<f64>,
        sign: f64,
    },
}

impl<'g> Region<'g> {
    /// `Ω_r = {f ≤ r}`.
    pub fn sublevel(geometry: &'g Geometry, level: f64) -> Result<Self> {
        Self::build(geometry, None, level)
    }

    /// `{r0 < f ≤ r1}`.
    pub fn shell(geometry: &'g Geometry, r0: f64, r1: f64) -> Result<Self> {
        if !(r1 > r0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "shell levels {r0} and {r1} are not increasing"
            )));
        }
        Self::build(geometry, Some(r0), r1)
    }

    /// The whole manifold, when it is closed and covered by its chart.
    pub fn whole(geometry: &'g Geometry) -> Result<Self> {
        if !geometry.properties().closed {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} is not closed; integrate over sublevel sets and shells",
                geometry.name()
            )));
        }
        Ok(Self {
            geometry,
            kind: RegionKind::Closed,
            lower: None,
            level: None,
        })
    }

    fn build(geometry: &'g Geometry, lower: Option<f64>, level: f64) -> Result<Self> {
        let n = geometry.dim();
        let empty = |min: f64| Error::EmptyRegion { level, min };
        let kind = match geometry.potential_model() {
            PotentialModel::None => {
                return Err(Error::MissingPotential(geometry.name().to_string()))
            }
            PotentialModel::Constant(c) => {
                if level < *c {
                    return Err(empty(*c));
                }
                return Err(Error::NotRegular {
                    level,
                    min_grad: 0.0,
                });
            }
            PotentialModel::HalfRadiusSquared => {
                if !(level > 0.0) {
                    return Err(empty(0.0));
                }
                let outer = 2.0 * libm::sqrt(level);
                let inner = lower.map_or(0.0, |r0| 2.0 * libm::sqrt(r0.max(0.0)));
                for d in 0..n {
                    if geometry.lower()[d] > -outer || geometry.upper()[d] < outer {
                        return Err(Error::OutsideChart(alloc::format!(
                            "ball of radius {outer} does not fit the chart of {}",
                            geometry.name()
                        )));
                    }
                }
                RegionKind::Ball { inner, outer }
            }
            PotentialModel::Height { offset } => {
                if !(level > *offset) {
                    return Err(empty(*offset));
                }
                let outer = 2.0 * libm::sqrt(level - offset);
                let inner = lower.map_or(0.0, |r0| 2.0 * libm::sqrt((r0 - offset).max(0.0)));
                if geometry.lower()[n - 1] > -outer || geometry.upper()[n - 1] < outer {
                    return Err(Error::OutsideChart(alloc::format!(
                        "slab of half-width {outer} does not fit the chart of {}",
                        geometry.name()
                    )));
                }
                RegionKind::Slab { inner, outer }
            }
            PotentialModel::Polynomial(_) => RegionKind::Indicator,
        };
        let region = Self {
            geometry,
            kind,
            lower,
            level: Some(level),
        };
        if kind == RegionKind::Indicator {
            region.check_nonempty()?;
        } else {
            region.check_regular(8)?;
        }
        Ok(region)
    }

    fn check_nonempty(&self) -> Result<()> {
        let level = self.level.unwrap_or(f64::INFINITY);
        let mut min = f64::INFINITY;
        for x in self.geometry.samples(4096, 0)? {
            let f = self.geometry.potential_value(&x)?;
            min = min.min(f);
            if self.contains(f) {
                return Ok(());
            }
        }
        Err(Error::EmptyRegion { level, min })
    }

    /// Minimum of `|∇f|` over the boundary nodes of a `q`-point rule.
    pub fn check_regular(&self, q: usize) -> Result<f64> {
        let level = self.level.unwrap_or(f64::NAN);
        let mut min_grad = f64::INFINITY;
        for face in self.faces()? {
            for_each_face_node(self.geometry, &face, q, |x, _, _| {
                let (_, _, norm) = unit_normal(self.geometry, x, 1.0)?;
                min_grad = min_grad.min(norm);
                Ok(())
            })?;
        }
        if min_grad < REGULARITY_FLOOR {
            return Err(Error::NotRegular { level, min_grad });
        }
        Ok(min_grad)
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.geometry
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    /// `r`, absent for a closed manifold.
    pub fn level(&self) -> Option<f64> {
        self.level
    }

    pub fn lower_level(&self) -> Option<f64> {
        self.lower
    }

    /// Indicator regions converge only at first order in `q`.
    pub fn is_low_accuracy(&self) -> bool {
        self.kind == RegionKind::Indicator
    }

    pub(crate) fn contains(&self, f: f64) -> bool {
        self.level.map_or(true, |r| f <= r) && self.lower.map_or(true, |r0| f > r0)
    }

    pub(crate) fn patches(&self) -> Vec<Patch> {
        let g = self.geometry;
        let n = g.dim();
        match self.kind {
            RegionKind::Closed | RegionKind::Indicator => {
                vec![Patch::Box {
                    lower: g.lower().to_vec(),
                    upper: g.upper().to_vec(),
                }]
            }
            RegionKind::Ball { inner, outer } => vec![Patch::Spherical { inner, outer }],
            RegionKind::Slab { inner, outer } => {
                let with_t = |a: f64, b: f64| {
                    let (mut lower, mut upper) = (g.lower().to_vec(), g.upper().to_vec());
                    lower[n - 1] = a;
                    upper[n - 1] = b;
                    Patch::Box { lower, upper }
                };
                if inner > 0.0 {
                    vec![with_t(-outer, -inner), with_t(inner, outer)]
                } else {
                    vec![with_t(-outer, outer)]
                }
            }
        }
    }

    pub(crate) fn faces(&self) -> Result<Vec<Face>> {
        let g = self.geometry;
        let n = g.dim();
        Ok(match self.kind {
            RegionKind::Closed => Vec::new(),
            RegionKind::Indicator => {
                return Err(Error::BoundaryUnavailable(alloc::format!(
                    "level sets of the potential on {} have no explicit parameterization",
                    g.name()
                )))
            }
            RegionKind::Ball { inner, outer } => {
                let mut faces = vec![Face::Sphere {
                    radius: outer,
                    sign: 1.0,
                }];
                if inner > 0.0 {
                    faces.push(Face::Sphere {
                        radius: inner,
                        sign: -1.0,
                    });
                }
                faces
            }
            RegionKind::Slab { inner, outer } => {
                let face = |value: f64, sign: f64| {
                    let (mut lower, mut upper) = (g.lower().to_vec(), g.upper().to_vec());
                    lower[n - 1] = value;
                    upper[n - 1] = value;
                    Face::Coordinate {
                        axis: n - 1,
                        value,
                        lower,
                        upper,
                        sign,
                    }
                };
                let mut faces = vec![face(outer, 1.0), face(-outer, 1.0)];
                if inner > 0.0 {
                    faces.push(face(inner, -1.0));
                    faces.push(face(-inner, -1.0));
                }
                faces
            }
        })
    }
}

/// Parameter box of the angles on the unit `(n−1)`-sphere.
fn angle_box(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut upper = vec![PI; n - 1];
    upper[n - 2] = 2.0 * PI;
    (vec![0.0; n - 1], upper)
}

/// Unit vector of hyperspherical angles `ψ`, and `Π sin^{n−2−k} ψ_k`.
pub(crate) fn sphere_direction(psi: &[f64], out: &mut [f64]) -> f64 {
    let n = psi.len() + 1;
    let mut s = 1.0;
    let mut jac = 1.0;
    for k in 0..n - 1 {
        out[k] = s * libm::cos(psi[k]);
        let sk = libm::sin(psi[k]);
        jac *= libm::pow(sk, (n - 2 - k) as f64);
        s *= sk;
    }
    out[n - 1] = s;
    jac
}

/// Calls `visit(x, weight·|J|)` for every node of a `q`-point rule on `patch`,
/// last parameter axis fastest.
pub(crate) fn for_each_patch_node(
    n: usize,
    patch: &Patch,
    q: usize,
    mut visit: impl FnMut(&[f64], f64) -> Result<()>,
) -> Result<()> {
    let rule = GaussLegendre::new(q);
    let (lower, upper) = match patch {
        Patch::Box { lower, upper } => (lower.clone(), upper.clone()),
        Patch::Spherical { inner, outer } => {
            let (mut lo, mut hi) = angle_box(n);
            lo.insert(0, *inner);
            hi.insert(0, *outer);
            (lo, hi)
        }
    };
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n).map(|d| rule.on(lower[d], upper[d])).collect();
    let mut p = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut idx = vec![0usize; n];
    loop {
        let mut w = 1.0;
        for d in 0..n {
            p[d] = axes[d].0[idx[d]];
            w *= axes[d].1[idx[d]];
        }
        match patch {
            Patch::Box { .. } => visit(&p, w)?,
            Patch::Spherical { .. } => {
                let s = p[0];
                let jac = sphere_direction(&p[1..], &mut x);
                x.iter_mut().for_each(|v| *v *= s);
                visit(&x, w * libm::pow(s, (n - 1) as f64) * jac)?;
            }
        }
        if !advance(&mut idx, q) {
            return Ok(());
        }
    }
}

/// Calls `visit(x, weight·dS, sign)` for every node of a `q`-point rule on `face`.
pub(crate) fn for_each_face_node(
    geometry: &Geometry,
    face: &Face,
    q: usize,
    mut visit: impl FnMut(&[f64], f64, f64) -> Result<()>,
) -> Result<()> {
    let n = geometry.dim();
    let rule = GaussLegendre::new(q);
    let m = n - 1;
    match face {
        Face::Coordinate {
            axis,
            value,
            lower,
            upper,
            sign,
        } => {
            let free: Vec<usize> = (0..n).filter(|d| d != axis).collect();
            let axes: Vec<(Vec<f64>, Vec<f64>)> =
                free.iter().map(|&d| rule.on(lower[d], upper[d])).collect();
            let mut x = vec![0.0; n];
            x[*axis] = *value;
            let mut idx = vec![0usize; m];
            let mut minor = vec![0.0; m * m];
            loop {
                let mut w = 1.0;
                for (a, &d) in free.iter().enumerate() {
                    x[d] = axes[a].0[idx[a]];
                    w *= axes[a].1[idx[a]];
                }
                let g = geometry.metric_values(&x);
                for (a, &i) in free.iter().enumerate() {
                    for (b, &j) in free.iter().enumerate() {
                        minor[a * m + b] = g[i * n + j];
                    }
                }
                visit(&x, w * libm::sqrt(linalg::det(&minor, m).max(0.0)), *sign)?;
                if !advance(&mut idx, q) {
                    return Ok(());
                }
            }
        }
        Face::Sphere { radius, sign } => {
            let (lower, upper) = angle_box(n);
            let axes: Vec<(Vec<f64>, Vec<f64>)> =
                (0..m).map(|a| rule.on(lower[a], upper[a])).collect();
            let space = JetSpace::new(m, 1);
            let mut idx = vec![0usize; m];
            let mut psi = vec![0.0; m];
            let mut x = vec![0.0; n];
            let mut tangents = vec![0.0; m * n];
            let mut gram = vec![0.0; m * m];
            loop {
                let mut w = 1.0;
                for a in 0..m {
                    psi[a] = axes[a].0[idx[a]];
                    w *= axes[a].1[idx[a]];
                }
                sphere_point_jets(&space, *radius, &psi, &mut x, &mut tangents)?;
                let g = geometry.metric_values(&x);
                for a in 0..m {
                    for b in 0..m {
                        let mut s = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                s += g[i * n + j] * tangents[a * n + i] * tangents[b * n + j];
                            }
                        }
                        gram[a * m + b] = s;
                    }
                }
                visit(&x, w * libm::sqrt(linalg::det(&gram, m).max(0.0)), *sign)?;
                if !advance(&mut idx, q) {
                    return Ok(());
                }
            }
        }
    }
}

/// Point `radius·ω(ψ)` and its tangents `∂x/∂ψ_a` (row `a`).
fn sphere_point_jets(
    space: &alloc::sync::Arc<JetSpace>,
    radius: f64,
    psi: &[f64],
    x: &mut [f64],
    t: &mut [f64],
) -> Result<()> {
    let m = psi.len();
    let n = m + 1;
    let mut s = Jet::constant(space, 1, radius);
    let mut comps = Vec::with_capacity(n);
    for (k, &p) in psi.iter().enumerate() {
        let v = Jet::variable(space, k, p)?;
        comps.push(&s * &v.cos());
        s = &s * &v.sin();
    }
    comps.push(s);
    for (i, c) in comps.iter().enumerate() {
        x[i] = c.value();
        for a in 0..m {
            t[a * n + i] = c.partial(&MultiIndex::axis(m, a, 1))?;
        }
    }
    Ok(())
}

/// Odometer step, last axis fastest; false once every index wrapped.
fn advance(idx: &mut [usize], q: usize) -> bool {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < q {
            return true;
        }
        idx[d] = 0;
    }
    false
}

/// `(ν^i, g^{ij}, |∇f|)` with `ν = sign·∇f/|∇f|`.
pub(crate) fn unit_normal(
    geometry: &Geometry,
    x: &[f64],
    sign: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = geometry.dim();
    let g = geometry.metric_values(x);
    let g_inv = linalg::spd_inverse(&g, n).ok_or(Error::NotPositiveDefinite)?;
    let df = geometry.potential_gradient(x)?;
    let up: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| g_inv[i * n + j] * df[j]).sum())
        .collect();
    let norm = libm::sqrt(up.iter().zip(&df).map(|(a, b)| a * b).sum::<f64>().max(0.0));
    let nu = up
        .iter()
        .map(|v| if norm > 0.0 { sign * v / norm } else { 0.0 })
        .collect();
    Ok((nu, g_inv, norm))
}
