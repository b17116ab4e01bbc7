//! Integral identities on sublevel sets and over the whole manifold.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::curvature::{bach, bach_like, soliton_fields, u_v_hessian, BachMode, CurvatureBundle};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::jets::JetSpace;
use crate::linalg;
use crate::report::{nan_max, IdentityReport, LemmaDetail, Verdict};

use super::integrate::{boundary_sums, volume_sums, BoundaryIntegrand, VolumeIntegrand};
use super::region::Region;

/// Absolute bound on soliton residuals and `ΔR` for a hypothesis to count as held.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-8;
/// Relative part of the pass criterion.
pub const RELATIVE_TOLERANCE: f64 = 1e-6;
/// Absolute floor of the pass criterion.
pub const ABSOLUTE_TOLERANCE: f64 = 1e-8;
/// Whole-manifold integrals stop once the outermost shell adds less than this.
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Soliton,
    Harmonic,
    BachLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Domain {
    Sublevel,
    Whole,
}

/// Integral identities checked on soliton geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LemmaId {
    FluxGradScalar,
    GradScalarDotGradF,
    GradScalarEnergy,
    WeightedGradScalarDotGradF,
    WeightedScalarRicciPotential,
    WeightedFGradScalarDotGradF,
    VIntegral,
    WeightedHessianScalar,
    WeightedVIntegral,
    UIntegral,
    WeightedUIntegral,
    WeightedBachIntegral,
    BachLikeIntegral,
    BachLikeDIntegral,
}

impl LemmaId {
    pub const ALL: [LemmaId; 14] = [
        LemmaId::FluxGradScalar,
        LemmaId::GradScalarDotGradF,
        LemmaId::GradScalarEnergy,
        LemmaId::WeightedGradScalarDotGradF,
        LemmaId::WeightedScalarRicciPotential,
        LemmaId::WeightedFGradScalarDotGradF,
        LemmaId::VIntegral,
        LemmaId::WeightedHessianScalar,
        LemmaId::WeightedVIntegral,
        LemmaId::UIntegral,
        LemmaId::WeightedUIntegral,
        LemmaId::WeightedBachIntegral,
        LemmaId::BachLikeIntegral,
        LemmaId::BachLikeDIntegral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::FluxGradScalar => "flux-grad-scalar",
            LemmaId::GradScalarDotGradF => "grad-scalar-dot-grad-f",
            LemmaId::GradScalarEnergy => "grad-scalar-energy",
            LemmaId::WeightedGradScalarDotGradF => "weighted-grad-scalar-dot-grad-f",
            LemmaId::WeightedScalarRicciPotential => "weighted-scalar-ricci-potential",
            LemmaId::WeightedFGradScalarDotGradF => "weighted-f-grad-scalar-dot-grad-f",
            LemmaId::VIntegral => "v-integral",
            LemmaId::WeightedHessianScalar => "weighted-hessian-scalar",
            LemmaId::WeightedVIntegral => "weighted-v-integral",
            LemmaId::UIntegral => "u-integral",
            LemmaId::WeightedUIntegral => "weighted-u-integral",
            LemmaId::WeightedBachIntegral => "weighted-bach-integral",
            LemmaId::BachLikeIntegral => "bach-like-integral",
            LemmaId::BachLikeDIntegral => "bach-like-d-integral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }

    pub fn anchor(self) -> &'static str {
        match self {
            LemmaId::FluxGradScalar => "∫_∂Ω ⟨∇R,∇f⟩/|∇f| dS = 0",
            LemmaId::GradScalarDotGradF => "∫_Ω ⟨∇R,∇f⟩ dV = 0",
            LemmaId::GradScalarEnergy => {
                "∫_Ω |∇R|² dV = ∫_∂Ω R⟨∇R,∇f⟩/|∇f| dS = −∫_∂Ω |∇f|⟨∇R,∇f⟩ dS"
            }
            LemmaId::WeightedGradScalarDotGradF => "∫_Ω ⟨∇R,∇f⟩ e^{−f} dV = 0",
            LemmaId::WeightedScalarRicciPotential => {
                "∫_Ω R Rc(∇f,∇f) e^{−f} dV = ½∫_∂Ω |∇f|⟨∇R,∇f⟩ e^{−f} dS + ½∫_Ω |∇R|² e^{−f} dV"
            }
            LemmaId::WeightedFGradScalarDotGradF => "∫_Ω f⟨∇R,∇f⟩ e^{−f} dV = 0",
            LemmaId::VIntegral => "∫_Ω V(∇f,∇f) dV = ½∫_Ω (|∇R − (R/2)∇f|² − ¾R²|∇f|²) dV",
            LemmaId::WeightedHessianScalar => {
                "∫_Ω ∇²R(∇f,∇f) e^{−f} dV = −e^{−r}∫_Ω |∇R|² dV + ½∫_Ω |∇R|² e^{−f} dV"
            }
            LemmaId::WeightedVIntegral => "∫_M V(∇f,∇f) e^{−f} dV + ¼∫_M R²|∇f|² e^{−f} dV = 0",
            LemmaId::UIntegral => "∫_Ω U(∇f,∇f) dV = ¼∫_Ω |∇f|²(R² − 2|Rc|²) dV",
            LemmaId::WeightedUIntegral => {
                "∫_M U(∇f,∇f) e^{−f} dV = ¼∫_M |∇f|²(R² − 2|Rc|²) e^{−f} dV"
            }
            LemmaId::WeightedBachIntegral => "∫_M B(∇f,∇f) e^{−f} dV = −½∫_M |D|² e^{−f} dV",
            LemmaId::BachLikeIntegral => {
                "∫_M ((α − β)R² − 2α|Rc|²)|∇f|² e^{−f} dV = 0 when αU + βV = 0"
            }
            LemmaId::BachLikeDIntegral => {
                "−α∫_M |D|² e^{−f} dV − ½(β − α/3)∫_M R²|∇f|² e^{−f} dV = 0 when αU + βV = 0"
            }
        }
    }

    fn gate(self) -> Gate {
        match self {
            LemmaId::WeightedBachIntegral => Gate::Soliton,
            LemmaId::BachLikeIntegral | LemmaId::BachLikeDIntegral => Gate::BachLike,
            _ => Gate::Harmonic,
        }
    }

    fn domain(self) -> Domain {
        match self {
            LemmaId::WeightedVIntegral
            | LemmaId::WeightedUIntegral
            | LemmaId::WeightedBachIntegral
            | LemmaId::BachLikeIntegral
            | LemmaId::BachLikeDIntegral => Domain::Whole,
            _ => Domain::Sublevel,
        }
    }

    fn uses_boundary(self) -> bool {
        matches!(
            self,
            LemmaId::FluxGradScalar
                | LemmaId::GradScalarEnergy
                | LemmaId::WeightedScalarRicciPotential
        )
    }

    pub fn is_bach_like(self) -> bool {
        self.gate() == Gate::BachLike
    }
}

/// Settings of one lemma run.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaConfig {
    /// Level `r` of `Ω_r`.
    pub level: f64,
    pub q: usize,
    /// Points at which hypotheses are checked.
    pub gate_samples: usize,
    pub seed: u64,
    /// `(α, β)` pairs for the Bach-like identities.
    pub bach_like: Vec<(f64, f64)>,
    /// Level increment between shells of whole-manifold integrals.
    pub shell_step: f64,
    /// Pass when `residual ≤ max(relative·magnitude, absolute)`.
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
}

impl LemmaConfig {
    pub fn new(level: f64, q: usize) -> Self {
        Self {
            level,
            q,
            gate_samples: 16,
            seed: 0,
            bach_like: vec![(1.0, 1.0)],
            shell_step: 4.0,
            relative_tolerance: RELATIVE_TOLERANCE,
            absolute_tolerance: ABSOLUTE_TOLERANCE,
        }
    }
}

/// One evaluated identity: the report line plus the numbers behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaOutcome {
    pub report: IdentityReport,
    pub detail: LemmaDetail,
}

/// Curvature values at a point, in plain floating point.
#[derive(Debug, Clone)]
pub(crate) struct PointCurvature {
    pub g_inv: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    pub grad_scalar: Vec<f64>,
    pub weyl: Vec<f64>,
    pub cotton: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub bach: Vec<f64>,
    pub hess_scalar: Vec<f64>,
    pub ricci_norm2: f64,
}

/// Memoized curvature keyed by the coordinates the metric depends on.
pub(crate) struct CurvatureCache<'g> {
    geometry: &'g Geometry,
    space: Arc<JetSpace>,
    axes: Vec<usize>,
    full: bool,
    map: BTreeMap<Vec<u64>, Arc<PointCurvature>>,
}

const CACHE_CAP: usize = 1 << 15;

impl<'g> CurvatureCache<'g> {
    /// `full` adds `U`, `V`, `∇²R` and the Bach tensor to the bundle values.
    pub fn new(geometry: &'g Geometry, full: bool) -> Self {
        let order = if full { 4 } else { 3 };
        Self {
            geometry,
            space: JetSpace::new(geometry.dim(), order),
            axes: geometry.metric_axes(),
            full,
            map: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, x: &[f64]) -> Result<Arc<PointCurvature>> {
        let key: Vec<u64> = self.axes.iter().map(|&a| x[a].to_bits()).collect();
        if let Some(c) = self.map.get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.compute(x)?);
        if self.map.len() >= CACHE_CAP {
            self.map.clear();
        }
        self.map.insert(key, c.clone());
        Ok(c)
    }

    /// Near the singular set of an angle chart the bundle is evaluated in a
    /// rotated chart and pulled back.
    fn compute(&self, x: &[f64]) -> Result<PointCurvature> {
        let Some(r) = self.geometry.recentred(x) else {
            return self.compute_in_chart(x);
        };
        let n = self.geometry.dim();
        let c = self.compute_in_chart(&r.point)?;
        let j = &r.jacobian;
        let g_inv = linalg::spd_inverse(&self.geometry.metric_values(x), n)
            .ok_or_else(|| Error::InvalidArgument(format!("degenerate metric at {x:?}")))?;
        Ok(PointCurvature {
            g_inv,
            ricci: pull_back(&c.ricci, j, n),
            scalar: c.scalar,
            grad_scalar: pull_back(&c.grad_scalar, j, n),
            weyl: pull_back(&c.weyl, j, n),
            cotton: pull_back(&c.cotton, j, n),
            u: pull_back(&c.u, j, n),
            v: pull_back(&c.v, j, n),
            bach: pull_back(&c.bach, j, n),
            hess_scalar: pull_back(&c.hess_scalar, j, n),
            ricci_norm2: c.ricci_norm2,
        })
    }

    fn compute_in_chart(&self, x: &[f64]) -> Result<PointCurvature> {
        let n = self.geometry.dim();
        let metric = self.geometry.metric_in(&self.space, x)?;
        let bundle = CurvatureBundle::new(&metric)?;
        let (u, v, hess_scalar, bach_values) = if self.full {
            let (u, v, h) = u_v_hessian(&metric, &bundle)?;
            let mode = if n == 4 {
                BachMode::Dim4
            } else {
                BachMode::General
            };
            let b = bach(&metric, &bundle, mode)?;
            (u.values(), v.values(), h.values(), b.values())
        } else {
            (Vec::new(), Vec::new(), Vec::new(), Vec::new())
        };
        let g_inv = metric.g_inv_values().to_vec();
        let ricci = bundle.ricci.values();
        let ricci_norm2 = quad_form_norm(&ricci, &g_inv, n);
        Ok(PointCurvature {
            g_inv,
            ricci,
            scalar: bundle.scalar.value(),
            grad_scalar: bundle.grad_scalar.values(),
            weyl: bundle.weyl.values(),
            cotton: bundle.cotton.values(),
            u,
            v,
            bach: bach_values,
            hess_scalar,
            ricci_norm2,
        })
    }
}

/// `T_{i…} = J^a_i ⋯ T'_{a…}` for a covariant tensor given row-major, rank read
/// from its length. Empty input stays empty.
fn pull_back(t: &[f64], jacobian: &[f64], n: usize) -> Vec<f64> {
    let mut rank = 0;
    let mut len = 1;
    while len < t.len() {
        len *= n;
        rank += 1;
    }
    let mut cur = t.to_vec();
    for slot in 0..rank {
        let stride = n.pow((rank - 1 - slot) as u32);
        let mut next = vec![0.0; cur.len()];
        for (o, out) in next.iter_mut().enumerate() {
            let i = (o / stride) % n;
            let base = o - i * stride;
            *out = (0..n)
                .map(|a| jacobian[a * n + i] * cur[base + a * stride])
                .sum();
        }
        cur = next;
    }
    cur
}

/// `|T|² = T_{ij} T_{ab} g^{ia} g^{jb}` for a two-tensor.
fn quad_form_norm(t: &[f64], g_inv: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for b in 0..n {
                    s += t[i * n + j] * t[a * n + b] * g_inv[i * n + a] * g_inv[j * n + b];
                }
            }
        }
    }
    s
}

fn bilinear(t: &[f64], x: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += t[i * n + j] * x[i] * x[j];
        }
    }
    s
}

fn raise(v: &[f64], g_inv: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| g_inv[i * n + j] * v[j]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|D|²` with `D_{ijk} = C_{ijk} + W_{ijkl}∇^l f`.
fn d_norm2(c: &PointCurvature, df_up: &[f64], n: usize) -> f64 {
    let n3 = n * n * n;
    let mut d = vec![0.0; n3];
    for (o, dv) in d.iter_mut().enumerate() {
        *dv = c.cotton[o] + (0..n).map(|l| c.weyl[o * n + l] * df_up[l]).sum::<f64>();
    }
    // raise all three slots
    let mut up = d.clone();
    for slot in 0..3 {
        let stride = n.pow(2 - slot as u32);
        let mut next = vec![0.0; n3];
        for (o, nv) in next.iter_mut().enumerate() {
            let idx = (o / stride) % n;
            let base = o - idx * stride;
            *nv = (0..n)
                .map(|a| c.g_inv[idx * n + a] * up[base + a * stride])
                .sum();
        }
        up = next;
    }
    dot(&d, &up)
}

/// Column indices of [`LemmaVolume`].
mod col {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const AW: usize = 2;
    pub const RCW: usize = 3;
    pub const BW: usize = 4;
    pub const FAW: usize = 5;
    pub const V: usize = 6;
    pub const V_RHS: usize = 7;
    pub const HESS_W: usize = 8;
    pub const VW: usize = 9;
    pub const R2S_QUARTER_W: usize = 10;
    pub const U: usize = 11;
    pub const U_RHS: usize = 12;
    pub const UW: usize = 13;
    pub const U_RHS_W: usize = 14;
    pub const BACH_W: usize = 15;
    pub const D2W: usize = 16;
    pub const R2SW: usize = 17;
    pub const RC2SW: usize = 18;
    pub const WIDTH: usize = 19;
    /// Columns integrated over the whole manifold.
    pub const WHOLE: [usize; 8] = [VW, R2S_QUARTER_W, UW, U_RHS_W, BACH_W, D2W, R2SW, RC2SW];
}

struct LemmaVolume<'g> {
    cache: CurvatureCache<'g>,
}

impl VolumeIntegrand for LemmaVolume<'_> {
    fn width(&self) -> usize {
        col::WIDTH
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let geometry = self.cache.geometry;
        let n = geometry.dim();
        let c = self.cache.get(x)?;
        let f = geometry.potential_value(x)?;
        let df = geometry.potential_gradient(x)?;
        let df_up = raise(&df, &c.g_inv, n);
        let w = libm::exp(-f);
        let s2 = dot(&df, &df_up);
        let a = dot(&c.grad_scalar, &df_up);
        let b = dot(&c.grad_scalar, &raise(&c.grad_scalar, &c.g_inv, n));
        let r = c.scalar;
        let rc_ff = bilinear(&c.ricci, &df_up, n);
        let v_ff = bilinear(&c.v, &df_up, n);
        let u_ff = bilinear(&c.u, &df_up, n);
        let u_rhs = 0.25 * s2 * (r * r - 2.0 * c.ricci_norm2);
        out[col::A] = a;
        out[col::B] = b;
        out[col::AW] = a * w;
        out[col::RCW] = r * rc_ff * w;
        out[col::BW] = b * w;
        out[col::FAW] = f * a * w;
        out[col::V] = v_ff;
        out[col::V_RHS] = 0.5 * ((b - r * a + 0.25 * r * r * s2) - 0.75 * r * r * s2);
        out[col::HESS_W] = bilinear(&c.hess_scalar, &df_up, n) * w;
        out[col::VW] = v_ff * w;
        out[col::R2S_QUARTER_W] = 0.25 * r * r * s2 * w;
        out[col::U] = u_ff;
        out[col::U_RHS] = u_rhs;
        out[col::UW] = u_ff * w;
        out[col::U_RHS_W] = u_rhs * w;
        out[col::BACH_W] = bilinear(&c.bach, &df_up, n) * w;
        out[col::D2W] = d_norm2(&c, &df_up, n) * w;
        out[col::R2SW] = r * r * s2 * w;
        out[col::RC2SW] = c.ricci_norm2 * s2 * w;
        Ok(())
    }
}

/// Boundary columns: `a/|∇f|`, `R a/|∇f|`, `|∇f| a`, `|∇f| a e^{−f}` with `a = ⟨∇R,∇f⟩`.
struct LemmaBoundary<'g> {
    cache: CurvatureCache<'g>,
}

impl BoundaryIntegrand for LemmaBoundary<'_> {
    fn width(&self) -> usize {
        4
    }

    fn eval(&mut self, x: &[f64], _normal: &[f64], out: &mut [f64]) -> Result<()> {
        let geometry = self.cache.geometry;
        let n = geometry.dim();
        let c = self.cache.get(x)?;
        let df = geometry.potential_gradient(x)?;
        let df_up = raise(&df, &c.g_inv, n);
        let norm = libm::sqrt(dot(&df, &df_up));
        let a = dot(&c.grad_scalar, &df_up);
        let w = libm::exp(-geometry.potential_value(x)?);
        out[0] = a / norm;
        out[1] = c.scalar * a / norm;
        out[2] = norm * a;
        out[3] = norm * a * w;
        Ok(())
    }
}

/// Column sums at `q` with `|I(q) − I(q/2)|` alongside.
#[derive(Debug, Clone)]
struct Columns {
    value: Vec<f64>,
    refinement: Vec<f64>,
}

impl Columns {
    fn add(&mut self, other: &Columns) {
        for k in 0..self.value.len() {
            self.value[k] += other.value[k];
            self.refinement[k] += other.refinement[k];
        }
    }
}

fn volume_columns(region: &Region, integrand: &mut LemmaVolume, q: usize) -> Result<Columns> {
    let fine = volume_sums(region, integrand, q, false)?;
    let coarse = volume_sums(region, integrand, q / 2, false)?;
    let refinement = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(Columns {
        value: fine,
        refinement,
    })
}

fn boundary_columns(region: &Region, integrand: &mut LemmaBoundary, q: usize) -> Result<Columns> {
    let fine = boundary_sums(region, integrand, q, false)?;
    let coarse = boundary_sums(region, integrand, q / 2, false)?;
    let refinement = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(Columns {
        value: fine,
        refinement,
    })
}

/// Hypothesis measurements at sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypotheses {
    pub samples: usize,
    /// Largest soliton or normalization residual, `None` without a potential.
    pub soliton: Option<f64>,
    /// Largest `|ΔR|`.
    pub laplacian_scalar: f64,
    /// Largest `|αU + βV|` per configured pair.
    pub bach_like: Vec<f64>,
}

/// Measures the soliton, harmonic-scalar and Bach-like hypotheses at sample points.
pub fn measure_hypotheses(geometry: &Geometry, config: &LemmaConfig) -> Result<Hypotheses> {
    let space = JetSpace::new(geometry.dim(), 4);
    let mut soliton = if geometry.has_potential() {
        Some(0.0f64)
    } else {
        None
    };
    let mut laplacian_scalar = 0.0f64;
    let mut bach_like_max = vec![0.0f64; config.bach_like.len()];
    let points = geometry.samples(config.gate_samples.max(1), config.seed)?;
    for x in &points {
        let metric = geometry.metric_in(&space, x)?;
        let bundle = CurvatureBundle::new(&metric)?;
        let (u, v, hess) = u_v_hessian(&metric, &bundle)?;
        let n = geometry.dim();
        let lap: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| metric.g_inv_values()[i * n + j] * hess.value(&[i, j]))
            .sum();
        laplacian_scalar = nan_max(laplacian_scalar, lap.abs());
        for (k, &(alpha, beta)) in config.bach_like.iter().enumerate() {
            bach_like_max[k] = nan_max(
                bach_like_max[k],
                bach_like(&u, &v, alpha, beta)?.max_abs_value(),
            );
        }
        if let Some(s) = soliton.as_mut() {
            let f = geometry.potential_jet(&space, x)?;
            let fields = soliton_fields(&metric, &bundle, &f)?;
            *s = nan_max(*s, fields.soliton_residual.max_abs_value());
            *s = nan_max(*s, fields.normalization_residual.value().abs());
        }
    }
    Ok(Hypotheses {
        samples: points.len(),
        soliton,
        laplacian_scalar,
        bach_like: bach_like_max,
    })
}

fn held(x: f64) -> bool {
    x <= HYPOTHESIS_TOLERANCE
}

/// Every integral identity on one geometry, sharing one pass of quadrature.
pub fn verify_lemmas(
    geometry: &Geometry,
    ids: &[LemmaId],
    config: &LemmaConfig,
) -> Result<Vec<LemmaOutcome>> {
    let hyp = measure_hypotheses(geometry, config)?;
    let soliton_ok = hyp.soliton.is_some_and(held);
    let harmonic_ok = soliton_ok && held(hyp.laplacian_scalar);

    let mut lines: Vec<(LemmaId, Option<(f64, f64)>)> = Vec::new();
    for &id in ids {
        if id.is_bach_like() {
            lines.extend(config.bach_like.iter().map(|&p| (id, Some(p))));
        } else {
            lines.push((id, None));
        }
    }
    let needs_sublevel = soliton_ok && lines.iter().any(|(id, _)| id.domain() == Domain::Sublevel);
    let needs_boundary = soliton_ok && lines.iter().any(|(id, _)| id.uses_boundary());
    let needs_whole = soliton_ok && lines.iter().any(|(id, _)| id.domain() == Domain::Whole);

    let mut volume = LemmaVolume {
        cache: CurvatureCache::new(geometry, true),
    };
    let q = config.q;
    let closed = geometry.properties().closed;

    // Ω_r columns, boundary columns and whole-manifold columns.
    let mut sub: Option<Result<(Columns, bool)>> = None;
    let mut bdry: Option<Result<Columns>> = None;
    let mut whole: Option<Result<WholeColumns>> = None;
    if needs_sublevel || needs_boundary || (needs_whole && !closed) {
        sub = Some(Region::sublevel(geometry, config.level).and_then(|region| {
            let cols = volume_columns(&region, &mut volume, q)?;
            Ok((cols, region.is_low_accuracy()))
        }));
    }
    if needs_boundary {
        if let Some(Ok(_)) = &sub {
            let region = Region::sublevel(geometry, config.level)?;
            let mut boundary = LemmaBoundary {
                cache: CurvatureCache::new(geometry, true),
            };
            bdry = Some(boundary_columns(&region, &mut boundary, q));
        }
    }
    if needs_whole {
        whole = Some(if closed {
            Region::whole(geometry).and_then(|region| {
                Ok(WholeColumns {
                    columns: volume_columns(&region, &mut volume, q)?,
                    tail: None,
                    outer_level: None,
                    low_accuracy: false,
                })
            })
        } else {
            match &sub {
                Some(Ok((cols, low))) => {
                    whole_columns(geometry, config, cols.clone(), *low, &mut volume)
                }
                Some(Err(e)) => Err(e.clone()),
                None => unreachable!(
                    "sublevel columns are computed whenever whole-manifold columns are"
                ),
            }
        });
    }

    let mut out = Vec::with_capacity(lines.len());
    for (id, pair) in &lines {
        let name = match pair {
            Some((a, b)) => format!("{}[alpha={a},beta={b}]", id.as_str()),
            None => id.as_str().to_string(),
        };
        let mut detail = LemmaDetail {
            id: name.clone(),
            geometry: geometry.name().to_string(),
            level: if id.domain() == Domain::Whole && closed {
                None
            } else {
                Some(config.level)
            },
            q,
            sides: Vec::new(),
            refinement: 0.0,
            tail: None,
            outer_level: None,
            note: None,
        };
        let pair_index = pair.map(|p| config.bach_like.iter().position(|x| *x == p).unwrap_or(0));
        let hypothesis = match id.gate() {
            _ if hyp.soliton.is_none() => Err(format!("{} has no potential", geometry.name())),
            _ if !soliton_ok => Err(format!(
                "soliton residual {:.3e} exceeds the gate",
                hyp.soliton.unwrap_or(f64::NAN)
            )),
            Gate::Soliton => Ok(()),
            Gate::Harmonic if !harmonic_ok => {
                Err(format!("|ΔR| reaches {:.3e}", hyp.laplacian_scalar))
            }
            Gate::Harmonic => Ok(()),
            Gate::BachLike => Ok(()),
        };
        let (verdict, residual, tolerance) = match hypothesis {
            Err(why) => {
                detail.note = Some(why);
                (Verdict::SkippedHypothesis, None, config.absolute_tolerance)
            }
            Ok(()) => {
                let evaluated =
                    evaluate(*id, *pair, &sub, &bdry, &whole, config.level, &mut detail);
                match evaluated {
                    Err(e) => {
                        detail.note = Some(e.to_string());
                        (Verdict::NotApplicable, None, config.absolute_tolerance)
                    }
                    Ok(low_accuracy) => {
                        let residual = detail.residual();
                        let tolerance = f64::max(
                            config.relative_tolerance * detail.magnitude(),
                            config.absolute_tolerance,
                        );
                        let mut verdict = Verdict::from_residual(residual, tolerance);
                        if low_accuracy {
                            verdict = Verdict::LowAccuracy;
                        }
                        if let (Some((alpha, beta)), Some(pi)) = (pair, pair_index) {
                            let b_max = hyp.bach_like.get(pi).copied().unwrap_or(f64::NAN);
                            if !held(b_max) || 3.0 * beta - alpha == 0.0 {
                                detail.note = Some(format!(
                                    "αU + βV reaches {b_max:.3e} at the samples and 3β − α = {}",
                                    3.0 * beta - alpha
                                ));
                                verdict = Verdict::NotApplicable;
                            }
                        }
                        (verdict, Some(residual), tolerance)
                    }
                }
            }
        };
        out.push(LemmaOutcome {
            report: IdentityReport {
                id: name,
                anchor: id.anchor().to_string(),
                geometry: geometry.name().to_string(),
                samples: hyp.samples,
                max_residual: residual,
                tolerance,
                verdict,
            },
            detail,
        });
    }
    Ok(out)
}

/// A single identity on one geometry.
pub fn verify_lemma(
    id: LemmaId,
    geometry: &Geometry,
    level: f64,
    q: usize,
) -> Result<LemmaOutcome> {
    let config = LemmaConfig::new(level, q);
    let mut all = verify_lemmas(geometry, &[id], &config)?;
    Ok(all.remove(0))
}

#[derive(Debug, Clone)]
struct WholeColumns {
    columns: Columns,
    tail: Option<f64>,
    outer_level: Option<f64>,
    low_accuracy: bool,
}

/// `Ω_r` plus shells `{r_k < f ≤ r_{k+1}}` until the outermost adds less than
/// [`TAIL_TOLERANCE`] to every whole-manifold column or the chart runs out.
fn whole_columns(
    geometry: &Geometry,
    config: &LemmaConfig,
    inner: Columns,
    low_accuracy: bool,
    volume: &mut LemmaVolume,
) -> Result<WholeColumns> {
    let mut total = inner;
    let mut r0 = config.level;
    let mut tail = None;
    let mut low = low_accuracy;
    loop {
        let r1 = r0 + config.shell_step;
        let region = match Region::shell(geometry, r0, r1) {
            Ok(region) => region,
            Err(Error::OutsideChart(_)) => break,
            Err(e) => return Err(e),
        };
        low |= region.is_low_accuracy();
        let shell = volume_columns(&region, volume, config.q)?;
        let last = col::WHOLE
            .iter()
            .map(|&k| shell.value[k].abs())
            .fold(0.0, nan_max);
        tail = Some(last);
        total.add(&shell);
        r0 = r1;
        if last < TAIL_TOLERANCE {
            break;
        }
    }
    Ok(WholeColumns {
        columns: total,
        tail,
        outer_level: Some(r0),
        low_accuracy: low,
    })
}

/// Fills `detail.sides`; returns whether the region was low-accuracy.
fn evaluate(
    id: LemmaId,
    pair: Option<(f64, f64)>,
    sub: &Option<Result<(Columns, bool)>>,
    bdry: &Option<Result<Columns>>,
    whole: &Option<Result<WholeColumns>>,
    level: f64,
    detail: &mut LemmaDetail,
) -> Result<bool> {
    let missing = || Error::InvalidArgument(String::from("integrals were not computed"));
    let (v, low): (&Columns, bool) = match id.domain() {
        Domain::Sublevel => match sub.as_ref().ok_or_else(missing)? {
            Ok((c, low)) => (c, *low),
            Err(e) => return Err(e.clone()),
        },
        Domain::Whole => match whole.as_ref().ok_or_else(missing)? {
            Ok(w) => {
                detail.tail = w.tail;
                detail.outer_level = w.outer_level;
                (&w.columns, w.low_accuracy)
            }
            Err(e) => return Err(e.clone()),
        },
    };
    let b = if id.uses_boundary() {
        match bdry.as_ref().ok_or_else(missing)? {
            Ok(c) => Some(c),
            Err(e) => return Err(e.clone()),
        }
    } else {
        None
    };
    let vol = |k: usize| v.value[k];
    let vref = |k: usize| v.refinement[k];
    let (sides, refinement) = match id {
        LemmaId::FluxGradScalar => {
            let b = b.ok_or_else(missing)?;
            (vec![b.value[0], 0.0], b.refinement[0])
        }
        LemmaId::GradScalarDotGradF => (vec![vol(col::A), 0.0], vref(col::A)),
        LemmaId::GradScalarEnergy => {
            let b = b.ok_or_else(missing)?;
            (
                vec![vol(col::B), b.value[1], -b.value[2]],
                vref(col::B) + b.refinement[1] + b.refinement[2],
            )
        }
        LemmaId::WeightedGradScalarDotGradF => (vec![vol(col::AW), 0.0], vref(col::AW)),
        LemmaId::WeightedScalarRicciPotential => {
            let b = b.ok_or_else(missing)?;
            (
                vec![vol(col::RCW), 0.5 * b.value[3] + 0.5 * vol(col::BW)],
                vref(col::RCW) + 0.5 * b.refinement[3] + 0.5 * vref(col::BW),
            )
        }
        LemmaId::WeightedFGradScalarDotGradF => (vec![vol(col::FAW), 0.0], vref(col::FAW)),
        LemmaId::VIntegral => (
            vec![vol(col::V), vol(col::V_RHS)],
            vref(col::V) + vref(col::V_RHS),
        ),
        LemmaId::WeightedHessianScalar => {
            let e = libm::exp(-level);
            (
                vec![vol(col::HESS_W), -e * vol(col::B) + 0.5 * vol(col::BW)],
                vref(col::HESS_W) + e * vref(col::B) + 0.5 * vref(col::BW),
            )
        }
        LemmaId::WeightedVIntegral => (
            vec![vol(col::VW), -vol(col::R2S_QUARTER_W)],
            vref(col::VW) + vref(col::R2S_QUARTER_W),
        ),
        LemmaId::UIntegral => (
            vec![vol(col::U), vol(col::U_RHS)],
            vref(col::U) + vref(col::U_RHS),
        ),
        LemmaId::WeightedUIntegral => (
            vec![vol(col::UW), vol(col::U_RHS_W)],
            vref(col::UW) + vref(col::U_RHS_W),
        ),
        LemmaId::WeightedBachIntegral => (
            vec![vol(col::BACH_W), -0.5 * vol(col::D2W)],
            vref(col::BACH_W) + 0.5 * vref(col::D2W),
        ),
        LemmaId::BachLikeIntegral => {
            let (alpha, beta) = pair.ok_or_else(missing)?;
            (
                vec![
                    (alpha - beta) * vol(col::R2SW),
                    2.0 * alpha * vol(col::RC2SW),
                ],
                (alpha - beta).abs() * vref(col::R2SW) + 2.0 * alpha.abs() * vref(col::RC2SW),
            )
        }
        LemmaId::BachLikeDIntegral => {
            let (alpha, beta) = pair.ok_or_else(missing)?;
            let c = 0.5 * (beta - alpha / 3.0);
            (
                vec![-alpha * vol(col::D2W), c * vol(col::R2SW)],
                alpha.abs() * vref(col::D2W) + c.abs() * vref(col::R2SW),
            )
        }
    };
    detail.sides = sides;
    detail.refinement = refinement;
    Ok(low)
}

/// `(r, e^{−αr} ∫_{Ω_r} |∇R|² dV)` with the refinement estimate of the integral.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayPoint {
    pub level: f64,
    pub value: f64,
    pub refinement: f64,
}

struct GradScalarEnergy<'g> {
    cache: CurvatureCache<'g>,
}

impl VolumeIntegrand for GradScalarEnergy<'_> {
    fn width(&self) -> usize {
        1
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.cache.geometry.dim();
        let c = self.cache.get(x)?;
        out[0] = dot(&c.grad_scalar, &raise(&c.grad_scalar, &c.g_inv, n));
        Ok(())
    }
}

/// Finite-level probe of `e^{−αr} ∫_{Ω_r} |∇R|² dV`.
pub fn decay_probe(
    geometry: &Geometry,
    alpha: f64,
    levels: &[f64],
    q: usize,
) -> Result<Vec<DecayPoint>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "decay rate must be positive, got {alpha}"
        )));
    }
    let mut integrand = GradScalarEnergy {
        cache: CurvatureCache::new(geometry, false),
    };
    levels
        .iter()
        .map(|&r| {
            let region = Region::sublevel(geometry, r)?;
            let fine = volume_sums(&region, &mut integrand, q, false)?[0];
            let coarse = volume_sums(&region, &mut integrand, q / 2, false)?[0];
            let e = libm::exp(-alpha * r);
            Ok(DecayPoint {
                level: r,
                value: e * fine,
                refinement: e * (fine - coarse).abs(),
            })
        })
        .collect()
}
