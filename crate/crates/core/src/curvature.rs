//! Curvature tensors at a point, built from [`MetricAtPoint`].
//!
//! Conventions: `R_{ijk}^l = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}`,
//! so that `∇_i∇_jω_k − ∇_j∇_iω_k = −R_{ijk}^l ω_l`. Ricci is `R_{jk} = R_{ijk}^i`
//! and the all-lower tensor is `Rm_{ijkl} = g_{kp} R_{ijl}^p`, which gives
//! `g^{ik} Rm_{ijkl} = R_{jl}` and positive sectional curvature on spheres.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::tensors::{decode, MetricAtPoint, PointTensor, Slot, Symmetry};

use Slot::{Down, Up};

/// Riemann, Ricci, scalar, Weyl and Cotton tensors at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    /// `R_{ijk}^l`
    pub riemann: PointTensor,
    /// `Rm_{ijkl}`
    pub rm: PointTensor,
    pub ricci: PointTensor,
    pub scalar: Jet,
    pub weyl: PointTensor,
    pub cotton: PointTensor,
    /// `∇_i R_{jk}`
    pub grad_ricci: PointTensor,
    /// `∇_i R`
    pub grad_scalar: PointTensor,
}

fn g_jet(metric: &MetricAtPoint, i: usize, j: usize) -> &Jet {
    metric.g().get(&[i, j])
}

/// Gradient of a scalar jet as a lower-index tensor.
pub fn gradient(u: &Jet, point: &Arc<[f64]>) -> Result<PointTensor> {
    let n = u.dim();
    let comps = (0..n)
        .map(|i| u.derivative(i))
        .collect::<Result<Vec<_>>>()?;
    PointTensor::new(n, vec![Down], comps, Symmetry::None, point.clone())
}

/// `g^{ab} T_{..a..b..}` over two lower slots, as a jet tensor.
pub fn metric_trace(
    t: &PointTensor,
    a: usize,
    b: usize,
    metric: &MetricAtPoint,
) -> Result<PointTensor> {
    t.raise_lower(a, metric)?.contract(a, b)
}

fn scalar_of(t: PointTensor) -> Jet {
    t.comps()[0].clone()
}

impl CurvatureBundle {
    pub fn new(metric: &MetricAtPoint) -> Result<Self> {
        let n = metric.dim();
        if n < 3 {
            return Err(Error::Dimension {
                what: "Weyl and Cotton tensors",
                dim: n,
            });
        }
        let k = metric.order();
        if k < 3 {
            return Err(Error::OrderExhausted {
                what: "curvature bundle",
                needed: 3,
                available: k,
            });
        }
        let space = metric.space().clone();
        let point = metric.point().clone();
        let gamma = metric.christoffel();
        let o = k - 2;

        let dgamma: Vec<Vec<Jet>> = (0..n)
            .map(|a| {
                gamma
                    .comps()
                    .iter()
                    .map(|c| c.derivative(a))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let dg = |a: usize, l: usize, i: usize, j: usize| &dgamma[a][(l * n + i) * n + j];
        let gm = |l: usize, i: usize, j: usize| gamma.get(&[l, i, j]);

        let mut riemann = PointTensor::zeros(&space, o, vec![Down, Down, Down, Up], point.clone());
        for i in 0..n {
            for j in i + 1..n {
                for kk in 0..n {
                    for l in 0..n {
                        let mut acc = Jet::zero(&space, o);
                        acc.add_scaled(dg(i, l, j, kk), 1.0);
                        acc.add_scaled(dg(j, l, i, kk), -1.0);
                        for p in 0..n {
                            acc.fma(gm(l, i, p), gm(p, j, kk));
                            acc.fma_scaled(gm(l, j, p), gm(p, i, kk), -1.0);
                        }
                        *riemann.get_mut(&[j, i, kk, l]) = acc.scale(-1.0);
                        *riemann.get_mut(&[i, j, kk, l]) = acc;
                    }
                }
            }
        }

        let ricci = PointTensor::from_fn(n, vec![Down, Down], point.clone(), |idx| {
            let mut acc = Jet::zero(&space, o);
            for i in 0..n {
                acc.add_scaled(riemann.get(&[i, idx[0], idx[1], i]), 1.0);
            }
            acc
        })
        .with_symmetry(Symmetry::SymmetricPair);

        let rm = PointTensor::from_fn(n, vec![Down; 4], point.clone(), |idx| {
            let [i, j, kk, l] = [idx[0], idx[1], idx[2], idx[3]];
            let mut acc = Jet::zero(&space, o);
            for p in 0..n {
                acc.fma(g_jet(metric, kk, p), riemann.get(&[i, j, l, p]));
            }
            acc
        })
        .with_symmetry(Symmetry::RiemannType);

        let scalar = scalar_of(metric_trace(&ricci, 0, 1, metric)?);

        let nf = n as f64;
        let c1 = 1.0 / (nf - 2.0);
        let c2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let weyl = PointTensor::from_fn(n, vec![Down; 4], point.clone(), |idx| {
            let [i, j, kk, l] = [idx[0], idx[1], idx[2], idx[3]];
            let mut acc = rm.get(idx).clone();
            acc.fma_scaled(g_jet(metric, i, kk), ricci.get(&[j, l]), -c1);
            acc.fma_scaled(g_jet(metric, i, l), ricci.get(&[j, kk]), c1);
            acc.fma_scaled(g_jet(metric, j, kk), ricci.get(&[i, l]), c1);
            acc.fma_scaled(g_jet(metric, j, l), ricci.get(&[i, kk]), -c1);
            let gg = &(g_jet(metric, i, kk) * g_jet(metric, j, l))
                - &(g_jet(metric, i, l) * g_jet(metric, j, kk));
            acc.fma_scaled(&scalar, &gg, c2);
            acc
        })
        .with_symmetry(Symmetry::RiemannType);

        let grad_ricci = ricci.covariant_derivative(metric)?;
        let grad_scalar = gradient(&scalar, &point)?;
        let c3 = 1.0 / (2.0 * (nf - 1.0));
        let cotton = PointTensor::from_fn(n, vec![Down; 3], point, |idx| {
            let [i, j, kk] = [idx[0], idx[1], idx[2]];
            let mut acc = grad_ricci.get(&[i, j, kk]) - grad_ricci.get(&[j, i, kk]);
            acc.fma_scaled(g_jet(metric, j, kk), grad_scalar.get(&[i]), -c3);
            acc.fma_scaled(g_jet(metric, i, kk), grad_scalar.get(&[j]), c3);
            acc
        });

        Ok(Self {
            riemann,
            rm,
            ricci,
            scalar,
            weyl,
            cotton,
            grad_ricci,
            grad_scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.rm.dim()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.rm.space()
    }
}

/// Relative-residual scale `1 + max(max|g⁻¹|², max|Rm|)` at the base point.
pub fn residual_scale(metric: &MetricAtPoint, bundle: &CurvatureBundle) -> f64 {
    let gi = metric
        .g_inv_values()
        .iter()
        .fold(0.0, |m: f64, x| m.max(x.abs()));
    1.0 + f64::max(gi * gi, bundle.rm.max_abs_value())
}

/// `C_{ijk} + (n−2)/(n−3) g^{la} ∇_a W_{ijkl}`.
pub fn weyl_divergence_check(
    bundle: &CurvatureBundle,
    metric: &MetricAtPoint,
) -> Result<PointTensor> {
    let n = bundle.dim();
    if n <= 3 {
        return Err(Error::Dimension {
            what: "Weyl divergence relation",
            dim: n,
        });
    }
    let div = divergence_last(&bundle.weyl, metric)?;
    let nf = n as f64;
    bundle.cotton.add_scaled(&div, (nf - 2.0) / (nf - 3.0))
}

/// `g^{la} ∇_a T_{..l}`: divergence on the last slot.
fn divergence_last(t: &PointTensor, metric: &MetricAtPoint) -> Result<PointTensor> {
    let d = t.covariant_derivative(metric)?;
    let last = d.rank() - 1;
    metric_trace(&d, 0, last, metric)
}

/// `g^{ab} ∇_a T_{b..}`: divergence on the first slot.
pub fn divergence(t: &PointTensor, metric: &MetricAtPoint) -> Result<PointTensor> {
    let d = t.covariant_derivative(metric)?;
    metric_trace(&d, 0, 1, metric)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BachMode {
    /// `∇^k∇^l W_{ikjl} + ½ R^{kl} W_{ikjl}`, only in dimension 4.
    Dim4,
    /// `1/(n−3) ∇^k∇^l W_{ikjl} + 1/(n−2) R^{kl} W_{ikjl}`.
    General,
}

/// Bach tensor.
pub fn bach(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
    mode: BachMode,
) -> Result<PointTensor> {
    let n = bundle.dim();
    match mode {
        BachMode::Dim4 if n != 4 => {
            return Err(Error::Dimension {
                what: "four-dimensional Bach tensor",
                dim: n,
            })
        }
        BachMode::General if n <= 3 => {
            return Err(Error::Dimension {
                what: "Bach tensor",
                dim: n,
            })
        }
        _ => {}
    }
    let k = metric.order();
    if k < 4 {
        return Err(Error::OrderExhausted {
            what: "Bach tensor",
            needed: 4,
            available: k,
        });
    }
    // T_{ikj} = g^{ld} ∇_d W_{ikjl}, then g^{kc} ∇_c T_{ikj}.
    let t = divergence_last(&bundle.weyl, metric)?;
    let dt = t.covariant_derivative(metric)?;
    let b1 = metric_trace(&dt, 0, 2, metric)?;
    let ric_up = bundle
        .ricci
        .raise_lower(0, metric)?
        .raise_lower(1, metric)?;
    let o = b1.order();
    let space = bundle.space().clone();
    let b2 = PointTensor::from_fn(n, vec![Down, Down], metric.point().clone(), |idx| {
        let mut acc = Jet::zero(&space, o);
        for a in 0..n {
            for b in 0..n {
                acc.fma(
                    ric_up.get(&[a, b]),
                    bundle.weyl.get(&[idx[0], a, idx[1], b]),
                );
            }
        }
        acc
    });
    let nf = n as f64;
    let (c1, c2) = match mode {
        BachMode::Dim4 => (1.0, 0.5),
        BachMode::General => (1.0 / (nf - 3.0), 1.0 / (nf - 2.0)),
    };
    Ok(b1
        .scale(c1)
        .add_scaled(&b2, c2)?
        .with_symmetry(Symmetry::SymmetricPair))
}

/// The quadratic curvature tensors `U`, `V`, `W` and the derivative fields they use.
#[derive(Debug, Clone)]
pub struct QuadraticTensors {
    pub u: PointTensor,
    /// `U` assembled by the dimension-4 formula, present only when `n = 4`.
    pub u_four_dim: Option<PointTensor>,
    pub v: PointTensor,
    pub w_quad: PointTensor,
    /// `∇_i∇_j R`
    pub hessian_scalar: PointTensor,
    /// `ΔR`
    pub laplacian_scalar: Jet,
    /// `ΔR_{ij} = g^{ab}∇_a∇_b R_{ij}`
    pub laplacian_ricci: PointTensor,
    pub ricci_norm2: Jet,
}

pub fn quadratic_tensors(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
) -> Result<QuadraticTensors> {
    let n = bundle.dim();
    let parts = QuadraticParts::new(metric, bundle)?;
    let (u, v) = parts.u_v(metric, bundle);
    let u_four_dim = if n == 4 {
        Some(u_dim4(
            metric,
            bundle,
            &parts.laplacian_ricci,
            &parts.laplacian_scalar,
        )?)
    } else {
        None
    };
    let w_quad = parts.w_quad(metric, bundle)?;
    Ok(QuadraticTensors {
        u,
        u_four_dim,
        v,
        w_quad,
        hessian_scalar: parts.hessian_scalar,
        laplacian_scalar: parts.laplacian_scalar,
        laplacian_ricci: parts.laplacian_ricci,
        ricci_norm2: parts.ricci_norm2,
    })
}

/// `U`, `V` and `∇∇R` alone, skipping the cross-check and `W`.
pub fn u_v_hessian(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
) -> Result<(PointTensor, PointTensor, PointTensor)> {
    let parts = QuadraticParts::new(metric, bundle)?;
    let (u, v) = parts.u_v(metric, bundle);
    Ok((u, v, parts.hessian_scalar))
}

struct QuadraticParts {
    hessian_scalar: PointTensor,
    laplacian_scalar: Jet,
    laplacian_ricci: PointTensor,
    ricci_norm2: Jet,
    /// `R_{ipjq} R^{pq}`
    rr: PointTensor,
    r2: Jet,
}

impl QuadraticParts {
    fn new(metric: &MetricAtPoint, bundle: &CurvatureBundle) -> Result<Self> {
        let n = bundle.dim();
        let k = metric.order();
        if k < 4 {
            return Err(Error::OrderExhausted {
                what: "quadratic curvature tensors",
                needed: 4,
                available: k,
            });
        }
        let o = k - 4;
        let space = bundle.space().clone();
        let hessian_scalar = bundle
            .grad_scalar
            .covariant_derivative(metric)?
            .with_symmetry(Symmetry::SymmetricPair);
        let laplacian_scalar = scalar_of(metric_trace(&hessian_scalar, 0, 1, metric)?);
        let laplacian_ricci = metric_trace(
            &bundle.grad_ricci.covariant_derivative(metric)?,
            0,
            1,
            metric,
        )?;
        let ric = &bundle.ricci;
        let ric_up = ric.raise_lower(0, metric)?.raise_lower(1, metric)?;
        let ricci_norm2 = ric.inner(ric, metric)?;
        let rr = PointTensor::from_fn(n, vec![Down, Down], metric.point().clone(), |idx| {
            let mut acc = Jet::zero(&space, o);
            for p in 0..n {
                for q in 0..n {
                    acc.fma(bundle.rm.get(&[idx[0], p, idx[1], q]), ric_up.get(&[p, q]));
                }
            }
            acc
        });
        let r2 = &bundle.scalar * &bundle.scalar;
        Ok(Self {
            hessian_scalar,
            laplacian_scalar,
            laplacian_ricci,
            ricci_norm2,
            rr,
            r2,
        })
    }

    fn u_v(&self, metric: &MetricAtPoint, bundle: &CurvatureBundle) -> (PointTensor, PointTensor) {
        let n = bundle.dim();
        let o = self.rr.order();
        let space = bundle.space();
        let point = metric.point().clone();
        let (ric, r) = (&bundle.ricci, &bundle.scalar);
        let m = n as f64 - 3.0;
        let u = PointTensor::from_fn(n, vec![Down, Down], point.clone(), |idx| {
            let g = g_jet(metric, idx[0], idx[1]);
            let mut acc = Jet::zero(space, o);
            acc.add_scaled(self.rr.get(idx), 2.0 * m);
            acc.add_scaled(self.laplacian_ricci.get(idx), m);
            acc.fma_scaled(&self.ricci_norm2, g, -0.5 * m);
            acc.fma_scaled(r, ric.get(idx), -m);
            acc.fma_scaled(&self.laplacian_scalar, g, -0.5 * m);
            acc.fma_scaled(&self.r2, g, 0.25 * m);
            acc
        })
        .with_symmetry(Symmetry::SymmetricPair);
        let v = PointTensor::from_fn(n, vec![Down, Down], point, |idx| {
            let g = g_jet(metric, idx[0], idx[1]);
            let mut acc = Jet::zero(space, o);
            acc.add_scaled(self.hessian_scalar.get(idx), -1.0);
            acc.fma(&self.laplacian_scalar, g);
            acc.fma(r, ric.get(idx));
            acc.fma_scaled(&self.r2, g, -0.25);
            acc
        })
        .with_symmetry(Symmetry::SymmetricPair);
        (u, v)
    }

    fn w_quad(&self, metric: &MetricAtPoint, bundle: &CurvatureBundle) -> Result<PointTensor> {
        let n = bundle.dim();
        let o = self.rr.order();
        let space = bundle.space();
        let (ric, r) = (&bundle.ricci, &bundle.scalar);
        // R_i^{pqr} R_{jpqr}
        let mut rm_up = bundle.rm.clone();
        for s in 1..4 {
            rm_up = rm_up.raise_lower(s, metric)?;
        }
        let rm_norm2 = bundle.rm.inner(&bundle.rm, metric)?;
        let ric_mixed = ric.raise_lower(0, metric)?;
        Ok(
            PointTensor::from_fn(n, vec![Down, Down], metric.point().clone(), |idx| {
                let [i, j] = [idx[0], idx[1]];
                let g = g_jet(metric, i, j);
                let mut acc = Jet::zero(space, o);
                let mut t = [0usize; 3];
                for off in 0..n * n * n {
                    decode(n, off, &mut t);
                    acc.fma(
                        rm_up.get(&[i, t[0], t[1], t[2]]),
                        bundle.rm.get(&[j, t[0], t[1], t[2]]),
                    );
                }
                acc.fma_scaled(&rm_norm2, g, -0.25);
                acc.add_scaled(self.rr.get(idx), -2.0);
                acc.fma(r, ric.get(idx));
                for p in 0..n {
                    acc.fma_scaled(ric.get(&[p, i]), ric_mixed.get(&[p, j]), -2.0);
                }
                acc.fma(&self.ricci_norm2, g);
                acc.fma_scaled(&self.r2, g, -0.25);
                acc
            })
            .with_symmetry(Symmetry::SymmetricPair),
        )
    }
}

/// `U` in dimension four, contracting `Rm` with `Rc` through mixed slots.
fn u_dim4(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
    laplacian_ricci: &PointTensor,
    laplacian_scalar: &Jet,
) -> Result<PointTensor> {
    let n = bundle.dim();
    let o = laplacian_ricci.order();
    let space = bundle.space().clone();
    let rm_mixed = bundle.rm.raise_lower(1, metric)?.raise_lower(3, metric)?;
    let ric_mixed = bundle.ricci.raise_lower(0, metric)?;
    let mut ric_norm = Jet::zero(&space, o);
    let mut scalar = Jet::zero(&space, o);
    for p in 0..n {
        scalar.add_scaled(ric_mixed.get(&[p, p]), 1.0);
        for q in 0..n {
            ric_norm.fma(ric_mixed.get(&[p, q]), ric_mixed.get(&[q, p]));
        }
    }
    let r2 = &scalar * &scalar;
    Ok(
        PointTensor::from_fn(n, vec![Down, Down], metric.point().clone(), |idx| {
            let [i, j] = [idx[0], idx[1]];
            let g = g_jet(metric, i, j);
            let mut acc = laplacian_ricci.get(idx).clone();
            for p in 0..n {
                for q in 0..n {
                    acc.fma_scaled(rm_mixed.get(&[i, p, j, q]), bundle.ricci.get(&[p, q]), 2.0);
                }
            }
            acc.fma_scaled(&ric_norm, g, -0.5);
            acc.fma_scaled(&scalar, bundle.ricci.get(idx), -1.0);
            acc.fma_scaled(laplacian_scalar, g, -0.5);
            acc.fma_scaled(&r2, g, 0.25);
            acc
        })
        .with_symmetry(Symmetry::SymmetricPair),
    )
}

/// `αU + βV`.
pub fn bach_like(u: &PointTensor, v: &PointTensor, alpha: f64, beta: f64) -> Result<PointTensor> {
    Ok(u.scale(alpha)
        .add_scaled(v, beta)?
        .with_symmetry(Symmetry::SymmetricPair))
}

/// `D_{ijk} = C_{ijk} + W_{ijkl} ∇^l f`.
pub fn d_tensor(bundle: &CurvatureBundle, grad_f_up: &PointTensor) -> Result<PointTensor> {
    let n = bundle.dim();
    if grad_f_up.slots() != [Up] {
        return Err(Error::Shape(alloc::format!(
            "expected an upper gradient, got slots {:?}",
            grad_f_up.slots()
        )));
    }
    let o = bundle.cotton.order().min(grad_f_up.order());
    let space = bundle.space().clone();
    Ok(PointTensor::from_fn(
        n,
        vec![Down; 3],
        bundle.cotton.point().clone(),
        |idx| {
            let mut acc = Jet::zero(&space, o);
            acc.add_scaled(bundle.cotton.get(idx), 1.0);
            for l in 0..n {
                acc.fma(
                    bundle.weyl.get(&[idx[0], idx[1], idx[2], l]),
                    grad_f_up.get(&[l]),
                );
            }
            acc
        },
    ))
}

/// Potential-dependent fields on a soliton candidate.
#[derive(Debug, Clone)]
pub struct SolitonFields {
    pub f: Jet,
    pub grad_f: PointTensor,
    pub grad_f_up: PointTensor,
    pub hess_f: PointTensor,
    pub laplacian_f: Jet,
    /// `|∇f|²`
    pub grad_f_norm2: Jet,
    /// `Hess f + Rc − ½g`
    pub soliton_residual: PointTensor,
    /// `R + |∇f|² − f`
    pub normalization_residual: Jet,
    /// `Δf − (n/2 − R)`
    pub laplacian_residual: Jet,
    /// `∇R − 2 Rc(∇f)`
    pub grad_scalar_residual: PointTensor,
}

pub fn soliton_fields(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
    f: &Jet,
) -> Result<SolitonFields> {
    let n = metric.dim();
    if f.order() < 2 {
        return Err(Error::OrderExhausted {
            what: "soliton fields",
            needed: 2,
            available: f.order(),
        });
    }
    let point = metric.point().clone();
    let space = bundle.space().clone();
    let grad_f = gradient(f, &point)?;
    let grad_f_up = grad_f.raise_lower(0, metric)?;
    let hess_f = grad_f
        .covariant_derivative(metric)?
        .with_symmetry(Symmetry::SymmetricPair);
    let laplacian_f = scalar_of(metric_trace(&hess_f, 0, 1, metric)?);
    let grad_f_norm2 = grad_f.inner(&grad_f, metric)?;

    let o = hess_f.order().min(bundle.ricci.order());
    let soliton_residual = PointTensor::from_fn(n, vec![Down, Down], point.clone(), |idx| {
        let mut acc = Jet::zero(&space, o);
        acc.add_scaled(hess_f.get(idx), 1.0);
        acc.add_scaled(bundle.ricci.get(idx), 1.0);
        acc.add_scaled(g_jet(metric, idx[0], idx[1]), -0.5);
        acc
    })
    .with_symmetry(Symmetry::SymmetricPair);
    let normalization_residual = &(&bundle.scalar + &grad_f_norm2) - f;
    let laplacian_residual = (&laplacian_f + &bundle.scalar).add_const(-(n as f64) / 2.0);
    let og = bundle.grad_scalar.order();
    let grad_scalar_residual = PointTensor::from_fn(n, vec![Down], point, |idx| {
        let mut acc = Jet::zero(&space, og);
        acc.add_scaled(bundle.grad_scalar.get(idx), 1.0);
        for j in 0..n {
            acc.fma_scaled(bundle.ricci.get(&[idx[0], j]), grad_f_up.get(&[j]), -2.0);
        }
        acc
    });
    Ok(SolitonFields {
        f: f.clone(),
        grad_f,
        grad_f_up,
        hess_f,
        laplacian_f,
        grad_f_norm2,
        soliton_residual,
        normalization_residual,
        laplacian_residual,
        grad_scalar_residual,
    })
}

/// Largest component of `Ĉ − D`, where `Ĉ` is the Cotton tensor of
/// `ĝ = e^{2f/(2−n)} g`. Recorded as a diagnostic only.
pub fn conformal_cotton_deviation(
    metric: &MetricAtPoint,
    bundle: &CurvatureBundle,
    f: &Jet,
) -> Result<f64> {
    let n = metric.dim();
    let factor = f.scale(2.0 / (2.0 - n as f64)).exp();
    let comps = metric.g().comps().iter().map(|c| c * &factor).collect();
    let hat = MetricAtPoint::from_components(metric.point().clone(), comps)?;
    let hat_bundle = CurvatureBundle::new(&hat)?;
    let d = d_tensor(
        bundle,
        &gradient(f, metric.point())?.raise_lower(0, metric)?,
    )?;
    let diff = hat_bundle.cotton.sub(&d)?;
    Ok(diff.max_abs_value())
}

/// Pointwise identity residuals that need the soliton potential.
pub mod identities {
    use super::*;

    /// `½Δ|∇f|² − (|∇²f|² + ⟨∇f, ∇Δf⟩ + Rc(∇f,∇f))`
    pub fn bochner(
        metric: &MetricAtPoint,
        bundle: &CurvatureBundle,
        s: &SolitonFields,
    ) -> Result<f64> {
        let grad_sq = gradient(&s.grad_f_norm2, metric.point())?;
        let hess_sq = grad_sq.covariant_derivative(metric)?;
        let lap = scalar_of(metric_trace(&hess_sq, 0, 1, metric)?).value();
        let hess_norm = s.hess_f.norm2(metric)?;
        let grad_lap = gradient(&s.laplacian_f, metric.point())?;
        let n = metric.dim();
        let mut cross = 0.0;
        let mut ric = 0.0;
        for i in 0..n {
            cross += s.grad_f_up.value(&[i]) * grad_lap.value(&[i]);
            for j in 0..n {
                ric +=
                    bundle.ricci.value(&[i, j]) * s.grad_f_up.value(&[i]) * s.grad_f_up.value(&[j]);
            }
        }
        Ok(0.5 * lap - (hess_norm + cross + ric))
    }

    /// `n|Rc|² − R²`, non-negative by Cauchy–Schwarz.
    pub fn ricci_trace_slack(metric: &MetricAtPoint, bundle: &CurvatureBundle) -> Result<f64> {
        let rc2 = bundle.ricci.norm2(metric)?;
        let r = bundle.scalar.value();
        Ok(metric.dim() as f64 * rc2 - r * r)
    }

    /// `(∇_k R_{ij})∇^k f ∇^i f ∇^j f − (½∇²R(∇f,∇f) − ½Rc(∇f,∇f) + ¼|∇R|²)`
    pub fn grad_cubic(
        metric: &MetricAtPoint,
        bundle: &CurvatureBundle,
        q: &QuadraticTensors,
        s: &SolitonFields,
    ) -> Result<f64> {
        let n = metric.dim();
        let x = |i: usize| s.grad_f_up.value(&[i]);
        let mut lhs = 0.0;
        let mut hess = 0.0;
        let mut ric = 0.0;
        for i in 0..n {
            for j in 0..n {
                let xij = x(i) * x(j);
                hess += q.hessian_scalar.value(&[i, j]) * xij;
                ric += bundle.ricci.value(&[i, j]) * xij;
                for k in 0..n {
                    lhs += bundle.grad_ricci.value(&[k, i, j]) * x(k) * xij;
                }
            }
        }
        let grad_r2 = bundle.grad_scalar.norm2(metric)?;
        Ok(lhs - (0.5 * hess - 0.5 * ric + 0.25 * grad_r2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric_from(point: &[f64], order: usize, g: impl Fn(&[Jet]) -> Vec<Jet>) -> MetricAtPoint {
        let n = point.len();
        let space = JetSpace::new(n, order);
        let x: Vec<Jet> = (0..n)
            .map(|i| Jet::variable(&space, i, point[i]).unwrap())
            .collect();
        MetricAtPoint::from_components(point.to_vec().into(), g(&x)).unwrap()
    }

    /// Round 4-sphere of radius √6 in hyperspherical coordinates.
    fn sphere4(point: &[f64], order: usize) -> MetricAtPoint {
        let a2 = 6.0;
        metric_from(point, order, |x| {
            let s1 = x[0].sin();
            let s2 = x[1].sin();
            let s3 = x[2].sin();
            let space = x[0].space().clone();
            let z = Jet::zero(&space, order);
            let d = [
                Jet::constant(&space, order, a2),
                (&s1 * &s1).scale(a2),
                (&(&s1 * &s1) * &(&s2 * &s2)).scale(a2),
                (&(&(&s1 * &s1) * &(&s2 * &s2)) * &(&s3 * &s3)).scale(a2),
            ];
            (0..16)
                .map(|o| {
                    if o / 4 == o % 4 {
                        d[o / 4].clone()
                    } else {
                        z.clone()
                    }
                })
                .collect()
        })
    }

    #[test]
    fn round_sphere_curvature() {
        let m = sphere4(&[1.1, 0.7, 2.0, 0.4], 5);
        let b = CurvatureBundle::new(&m).unwrap();
        assert!((b.scalar.value() - 2.0).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let want = 0.5 * m.g().value(&[i, j]);
                assert!((b.ricci.value(&[i, j]) - want).abs() < 1e-12);
            }
        }
        assert!(b.weyl.max_abs_value() < 1e-12);
        assert!(b.cotton.max_abs_value() < 1e-12);
        let q = quadratic_tensors(&m, &b).unwrap();
        assert!(q.u.max_abs_value() < 1e-11);
        assert!(q.v.max_abs_value() < 1e-11);
        let bach4 = bach(&m, &b, BachMode::Dim4).unwrap();
        assert!(bach4.max_abs_value() < 1e-11);
        // Sectional curvature 1/6 is positive in this lowering.
        assert!(b.rm.value(&[0, 1, 0, 1]) > 0.0);
    }

    #[test]
    fn guards() {
        let m3 = metric_from(&[0.1, 0.2, 0.3], 4, |x| {
            let space = x[0].space().clone();
            (0..9)
                .map(|o| Jet::constant(&space, 4, if o / 3 == o % 3 { 1.0 } else { 0.0 }))
                .collect()
        });
        let b = CurvatureBundle::new(&m3).unwrap();
        assert!(matches!(
            weyl_divergence_check(&b, &m3),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            bach(&m3, &b, BachMode::General),
            Err(Error::Dimension { .. })
        ));
        let m2 = metric_from(&[0.1, 0.2], 4, |x| {
            let space = x[0].space().clone();
            (0..4)
                .map(|o| Jet::constant(&space, 4, if o / 2 == o % 2 { 1.0 } else { 0.0 }))
                .collect()
        });
        assert!(matches!(
            CurvatureBundle::new(&m2),
            Err(Error::Dimension { .. })
        ));
        let low = sphere4(&[1.0, 1.0, 1.0, 1.0], 2);
        assert!(matches!(
            CurvatureBundle::new(&low),
            Err(Error::OrderExhausted { .. })
        ));
        let k3 = sphere4(&[1.0, 1.0, 1.0, 1.0], 3);
        let b3 = CurvatureBundle::new(&k3).unwrap();
        assert!(matches!(
            bach(&k3, &b3, BachMode::Dim4),
            Err(Error::OrderExhausted { .. })
        ));
    }
}
