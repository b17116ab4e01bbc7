//! Pointwise identity catalog and the sample-point runner.

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{
    bach, bach_like, d_tensor, divergence, identities, metric_trace, quadratic_tensors,
    residual_scale, soliton_fields, weyl_divergence_check, BachMode, CurvatureBundle,
    QuadraticTensors, SolitonFields,
};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, PotentialModel};
use crate::jets::JetSpace;
use crate::polynomial::Polynomial;
use crate::quadrature::LemmaId;
use crate::report::{nan_max, IdentityReport, Verdict};
use crate::tensors::{MetricAtPoint, PointTensor, Slot, Symmetry};

/// Jet order used unless configured otherwise.
pub const DEFAULT_ORDER: usize = 5;
/// Supported jet orders.
pub const ORDER_RANGE: (usize, usize) = (2, 6);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Requirement {
    None,
    Potential,
    Soliton,
    Einstein,
    EinsteinSoliton,
    ConformallyFlat,
    ConformallyFlatPotential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dims {
    Any,
    AtLeastFour,
    Four,
}

/// Identities checked pointwise at sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointwiseId {
    RicciCommutation,
    MetricCompatibility,
    RiemannSymmetries,
    WeylTraceFree,
    CottonStructure,
    CottonWeylDivergence,
    BachDecomposition,
    BachGeneralReduction,
    UFourDimForm,
    TraceV,
    TraceU,
    TraceBach,
    TraceBachLike,
    QuadraticWVanishes,
    BachLikeDecomposition,
    DivergenceU,
    DivergenceV,
    DivergenceBach,
    RicciTraceInequality,
    Bochner,
    DTensorAntisymmetry,
    SolitonEquation,
    SolitonNormalization,
    SolitonLaplacianF,
    SolitonGradScalar,
    SolitonGradCubic,
    EinsteinUVanishes,
    EinsteinVVanishes,
    EinsteinBachVanishes,
    EinsteinScalarTwo,
    LcfBachVanishes,
    LcfDVanishes,
}

use PointwiseId as P;

impl PointwiseId {
    pub const ALL: [PointwiseId; 32] = [
        P::RicciCommutation,
        P::MetricCompatibility,
        P::RiemannSymmetries,
        P::WeylTraceFree,
        P::CottonStructure,
        P::CottonWeylDivergence,
        P::BachDecomposition,
        P::BachGeneralReduction,
        P::UFourDimForm,
        P::TraceV,
        P::TraceU,
        P::TraceBach,
        P::TraceBachLike,
        P::QuadraticWVanishes,
        P::BachLikeDecomposition,
        P::DivergenceU,
        P::DivergenceV,
        P::DivergenceBach,
        P::RicciTraceInequality,
        P::Bochner,
        P::DTensorAntisymmetry,
        P::SolitonEquation,
        P::SolitonNormalization,
        P::SolitonLaplacianF,
        P::SolitonGradScalar,
        P::SolitonGradCubic,
        P::EinsteinUVanishes,
        P::EinsteinVVanishes,
        P::EinsteinBachVanishes,
        P::EinsteinScalarTwo,
        P::LcfBachVanishes,
        P::LcfDVanishes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            P::RicciCommutation => "ricci-commutation",
            P::MetricCompatibility => "metric-compatibility",
            P::RiemannSymmetries => "riemann-symmetries",
            P::WeylTraceFree => "weyl-trace-free",
            P::CottonStructure => "cotton-structure",
            P::CottonWeylDivergence => "cotton-weyl-divergence",
            P::BachDecomposition => "bach-decomposition",
            P::BachGeneralReduction => "bach-general-reduction",
            P::UFourDimForm => "u-four-dim-form",
            P::TraceV => "trace-v",
            P::TraceU => "trace-u",
            P::TraceBach => "trace-bach",
            P::TraceBachLike => "trace-bach-like",
            P::QuadraticWVanishes => "quadratic-w-vanishes",
            P::BachLikeDecomposition => "bach-like-decomposition",
            P::DivergenceU => "divergence-u",
            P::DivergenceV => "divergence-v",
            P::DivergenceBach => "divergence-bach",
            P::RicciTraceInequality => "ricci-trace-inequality",
            P::Bochner => "bochner",
            P::DTensorAntisymmetry => "d-tensor-antisymmetry",
            P::SolitonEquation => "soliton-equation",
            P::SolitonNormalization => "soliton-normalization",
            P::SolitonLaplacianF => "soliton-laplacian-f",
            P::SolitonGradScalar => "soliton-grad-scalar",
            P::SolitonGradCubic => "soliton-grad-cubic",
            P::EinsteinUVanishes => "einstein-u-vanishes",
            P::EinsteinVVanishes => "einstein-v-vanishes",
            P::EinsteinBachVanishes => "einstein-bach-vanishes",
            P::EinsteinScalarTwo => "einstein-scalar-two",
            P::LcfBachVanishes => "lcf-bach-vanishes",
            P::LcfDVanishes => "lcf-d-vanishes",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }

    pub fn anchor(self) -> &'static str {
        match self {
            P::RicciCommutation => "(∇_i∇_j − ∇_j∇_i)ω_k = −R_{ijk}^l ω_l",
            P::MetricCompatibility => "∇g = 0",
            P::RiemannSymmetries => {
                "Rm_{ijkl} = −Rm_{jikl} = −Rm_{ijlk} = Rm_{klij}, first Bianchi, Rc symmetric"
            }
            P::WeylTraceFree => "g^{ab}W_{..a..b..} = 0 for every slot pair",
            P::CottonStructure => "C_{ijk} = −C_{jik}, g^{jk}C_{ijk} = g^{ik}C_{ijk} = 0",
            P::CottonWeylDivergence => "C_{ijk} + (n−2)/(n−3) ∇^l W_{ijkl} = 0",
            P::BachDecomposition => "B = ½U + ⅙V",
            P::BachGeneralReduction => {
                "general-n Bach tensor at n = 4 equals the four-dimensional one"
            }
            P::UFourDimForm => "general-n U at n = 4 equals its four-dimensional form",
            P::TraceV => "tr V = 3ΔR",
            P::TraceU => "tr U = −ΔR",
            P::TraceBach => "tr B = 0",
            P::TraceBachLike => "tr(αU + βV) = (3β − α)ΔR",
            P::QuadraticWVanishes => "W_{ij} = 0 in dimension four",
            P::BachLikeDecomposition => "αU + βV = 2αB + (β − α/3)V",
            P::DivergenceU => "∇^i U_{ij} = 0",
            P::DivergenceV => "∇^i V_{ij} = 0",
            P::DivergenceBach => "∇^i B_{ij} = 0",
            P::RicciTraceInequality => "R² ≤ n|Rc|²",
            P::Bochner => "½Δ|∇f|² = |∇²f|² + ⟨∇f, ∇Δf⟩ + Rc(∇f,∇f)",
            P::DTensorAntisymmetry => "D_{ijk} = −D_{jik} with D = C + W(·,·,·,∇f)",
            P::SolitonEquation => "∇²f + Rc = ½g",
            P::SolitonNormalization => "R + |∇f|² = f",
            P::SolitonLaplacianF => "Δf = n/2 − R",
            P::SolitonGradScalar => "∇R = 2Rc(∇f)",
            P::SolitonGradCubic => {
                "(∇_k R_{ij})∇^k f∇^i f∇^j f = ½∇²R(∇f,∇f) − ½Rc(∇f,∇f) + ¼|∇R|²"
            }
            P::EinsteinUVanishes => "Rc = λg ⇒ U = 0",
            P::EinsteinVVanishes => "Rc = λg ⇒ V = 0",
            P::EinsteinBachVanishes => "Rc = λg ⇒ B = 0",
            P::EinsteinScalarTwo => "Einstein shrinking soliton in dimension four has R = 2",
            P::LcfBachVanishes => "W = 0 ⇒ B = 0",
            P::LcfDVanishes => "W = 0, C = 0 ⇒ D = 0",
        }
    }

    /// Smallest metric jet order the identity can be evaluated at.
    pub fn required_order(self) -> usize {
        match self {
            P::MetricCompatibility => 2,
            P::RicciCommutation
            | P::RiemannSymmetries
            | P::WeylTraceFree
            | P::CottonStructure
            | P::RicciTraceInequality
            | P::Bochner
            | P::DTensorAntisymmetry
            | P::SolitonEquation
            | P::SolitonNormalization
            | P::SolitonLaplacianF
            | P::SolitonGradScalar
            | P::EinsteinScalarTwo
            | P::LcfDVanishes => 3,
            P::DivergenceU | P::DivergenceV | P::DivergenceBach => 5,
            _ => 4,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            P::MetricCompatibility => 1e-11,
            P::DivergenceU | P::DivergenceV | P::DivergenceBach => 1e-8,
            P::WeylTraceFree
            | P::RiemannSymmetries
            | P::CottonStructure
            | P::DTensorAntisymmetry
            | P::RicciTraceInequality
            | P::SolitonEquation
            | P::SolitonNormalization
            | P::SolitonLaplacianF
            | P::SolitonGradScalar
            | P::EinsteinScalarTwo => 1e-10,
            _ => 1e-9,
        }
    }

    fn requirement(self) -> Requirement {
        match self {
            P::Bochner | P::DTensorAntisymmetry => Requirement::Potential,
            P::SolitonEquation
            | P::SolitonNormalization
            | P::SolitonLaplacianF
            | P::SolitonGradScalar
            | P::SolitonGradCubic => Requirement::Soliton,
            P::EinsteinUVanishes | P::EinsteinVVanishes | P::EinsteinBachVanishes => {
                Requirement::Einstein
            }
            P::EinsteinScalarTwo => Requirement::EinsteinSoliton,
            P::LcfBachVanishes => Requirement::ConformallyFlat,
            P::LcfDVanishes => Requirement::ConformallyFlatPotential,
            _ => Requirement::None,
        }
    }

    fn dims(self) -> Dims {
        match self {
            P::CottonWeylDivergence | P::TraceBach | P::DivergenceU | P::DivergenceV => {
                Dims::AtLeastFour
            }
            P::BachDecomposition
            | P::BachGeneralReduction
            | P::UFourDimForm
            | P::TraceV
            | P::TraceU
            | P::TraceBachLike
            | P::QuadraticWVanishes
            | P::BachLikeDecomposition
            | P::DivergenceBach
            | P::EinsteinUVanishes
            | P::EinsteinVVanishes
            | P::EinsteinBachVanishes
            | P::EinsteinScalarTwo
            | P::LcfBachVanishes => Dims::Four,
            _ => Dims::Any,
        }
    }

    /// Identities whose hypotheses hold on any metric with a potential.
    pub fn is_general(self) -> bool {
        matches!(
            self.requirement(),
            Requirement::None | Requirement::Potential
        )
    }
}

/// A named identity: pointwise or integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IdentityId {
    Pointwise(PointwiseId),
    Lemma(LemmaId),
}

impl IdentityId {
    pub fn parse(s: &str) -> Option<Self> {
        PointwiseId::parse(s)
            .map(IdentityId::Pointwise)
            .or_else(|| LemmaId::parse(s).map(IdentityId::Lemma))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::Pointwise(p) => p.as_str(),
            IdentityId::Lemma(l) => l.as_str(),
        }
    }

    /// Jet order the identity needs; integral identities evaluate at their own fixed order.
    pub fn required_order(self) -> usize {
        match self {
            IdentityId::Pointwise(p) => p.required_order(),
            IdentityId::Lemma(_) => 0,
        }
    }
}

/// Expands suite names (`pointwise-all`, `soliton-all`, `lemmas`, `all`) and
/// single identity ids into a sorted, de-duplicated list.
pub fn resolve_selection(names: &[impl AsRef<str>]) -> Result<Vec<IdentityId>> {
    let mut out = Vec::new();
    for name in names {
        let name = name.as_ref();
        match name {
            "pointwise-all" => out.extend(
                PointwiseId::ALL
                    .into_iter()
                    .filter(|p| p.is_general())
                    .map(IdentityId::Pointwise),
            ),
            "soliton-all" => out.extend(
                PointwiseId::ALL
                    .into_iter()
                    .filter(|p| !p.is_general())
                    .map(IdentityId::Pointwise),
            ),
            "lemmas" => out.extend(LemmaId::ALL.into_iter().map(IdentityId::Lemma)),
            "all" => {
                out.extend(PointwiseId::ALL.into_iter().map(IdentityId::Pointwise));
                out.extend(LemmaId::ALL.into_iter().map(IdentityId::Lemma));
            }
            other => out.push(
                IdentityId::parse(other)
                    .ok_or_else(|| Error::UnknownIdentity(other.to_string()))?,
            ),
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Refuses a selection that needs more jet order than `order`.
pub fn check_order(ids: &[IdentityId], order: usize) -> Result<()> {
    if !(ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "jet order {order} outside the supported range {}..={}",
            ORDER_RANGE.0, ORDER_RANGE.1
        )));
    }
    if let Some(worst) = ids.iter().max_by_key(|id| id.required_order()) {
        let needed = worst.required_order();
        if needed > order {
            return Err(Error::OrderExhausted {
                what: worst.as_str(),
                needed,
                available: order,
            });
        }
    }
    Ok(())
}

/// Settings of a pointwise run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseConfig {
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    /// Overrides every per-identity default when set.
    pub tolerance: Option<f64>,
}

impl Default for PointwiseConfig {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 7,
            order: DEFAULT_ORDER,
            tolerance: None,
        }
    }
}

/// Parameters drawn once per run: the test covector and `(α, β)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParameters {
    pub covector: Vec<Polynomial>,
    /// Random pairs followed by one pair on the line `β = α/3`.
    pub pairs: Vec<(f64, f64)>,
}

impl RunParameters {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        let covector = (0..dim)
            .map(|_| Polynomial::random(&mut rng, dim, 2))
            .collect();
        let mut pairs: Vec<(f64, f64)> = (0..5)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let alpha: f64 = rng.gen_range(0.5..1.0);
        pairs.push((alpha, alpha / 3.0));
        Self { covector, pairs }
    }
}

/// Per-point context, computing each ingredient on first use.
struct PointContext<'a> {
    geometry: &'a Geometry,
    metric: MetricAtPoint,
    bundle: Option<CurvatureBundle>,
    quadratic: Option<QuadraticTensors>,
    bach4: Option<PointTensor>,
    soliton: Option<SolitonFields>,
}

impl<'a> PointContext<'a> {
    fn bundle(&mut self) -> Result<&CurvatureBundle> {
        if self.bundle.is_none() {
            self.bundle = Some(CurvatureBundle::new(&self.metric)?);
        }
        Ok(self.bundle.as_ref().expect("just set"))
    }

    fn scale(&mut self) -> Result<f64> {
        self.bundle()?;
        Ok(residual_scale(
            &self.metric,
            self.bundle.as_ref().expect("computed"),
        ))
    }

    fn quadratic(&mut self) -> Result<&QuadraticTensors> {
        if self.quadratic.is_none() {
            self.bundle()?;
            let q = quadratic_tensors(&self.metric, self.bundle.as_ref().expect("computed"))?;
            self.quadratic = Some(q);
        }
        Ok(self.quadratic.as_ref().expect("just set"))
    }

    fn bach(&mut self) -> Result<&PointTensor> {
        if self.bach4.is_none() {
            self.bundle()?;
            let mode = if self.metric.dim() == 4 {
                BachMode::Dim4
            } else {
                BachMode::General
            };
            let b = bach(&self.metric, self.bundle.as_ref().expect("computed"), mode)?;
            self.bach4 = Some(b);
        }
        Ok(self.bach4.as_ref().expect("just set"))
    }

    fn soliton(&mut self) -> Result<&SolitonFields> {
        if self.soliton.is_none() {
            self.bundle()?;
            let f = self
                .geometry
                .potential_jet(self.metric.space(), self.metric.point())?;
            let s = soliton_fields(&self.metric, self.bundle.as_ref().expect("computed"), &f)?;
            self.soliton = Some(s);
        }
        Ok(self.soliton.as_ref().expect("just set"))
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(f64::abs).fold(0.0, nan_max)
}

fn trace(t: &PointTensor, metric: &MetricAtPoint) -> Result<f64> {
    Ok(metric_trace(t, 0, 1, metric)?.value(&[]))
}

/// Why an identity does not apply to a geometry, if it does not.
fn gate(id: PointwiseId, geometry: &Geometry) -> Option<(Verdict, &'static str)> {
    let n = geometry.dim();
    let dims_ok = match id.dims() {
        Dims::Any => n >= 3,
        Dims::AtLeastFour => n >= 4,
        Dims::Four => n == 4,
    };
    if !dims_ok {
        return Some((
            Verdict::NotApplicable,
            "dimension outside the identity's range",
        ));
    }
    let p = geometry.properties();
    let has_f = geometry.has_potential();
    let constant_f = matches!(geometry.potential_model(), PotentialModel::Constant(_));
    let held = match id.requirement() {
        Requirement::None => true,
        Requirement::Potential => has_f,
        Requirement::Soliton => p.soliton,
        Requirement::Einstein => p.einstein,
        Requirement::EinsteinSoliton => p.einstein && p.soliton && constant_f,
        Requirement::ConformallyFlat => p.conformally_flat,
        Requirement::ConformallyFlatPotential => p.conformally_flat && has_f,
    };
    if held {
        None
    } else {
        Some((
            Verdict::SkippedHypothesis,
            "geometry does not satisfy the hypothesis",
        ))
    }
}

/// Evaluates one identity at one point; the result is already divided by the point's scale.
fn evaluate(id: PointwiseId, ctx: &mut PointContext, params: &RunParameters) -> Result<f64> {
    let n = ctx.metric.dim();
    let metric = ctx.metric.clone();
    if id == P::MetricCompatibility {
        let dg = metric.g().covariant_derivative(&metric)?;
        let raw = (0..n)
            .flat_map(|a| metric.g().comps().iter().map(move |c| (a, c)))
            .map(|(a, c)| c.derivative(a).map(|d| d.value()))
            .collect::<Result<Vec<_>>>()?;
        return Ok(dg.max_abs_value() / (1.0 + max_abs(raw)));
    }
    let scale = ctx.scale()?;
    let residual = match id {
        P::MetricCompatibility => unreachable!("handled above"),
        P::RicciCommutation => {
            let comps = params
                .covector
                .iter()
                .map(|p| p.to_jet(metric.space(), metric.order(), metric.point()))
                .collect();
            let omega = PointTensor::new(
                n,
                vec![Slot::Down],
                comps,
                Symmetry::None,
                metric.point().clone(),
            )?;
            let dd = omega
                .covariant_derivative(&metric)?
                .covariant_derivative(&metric)?;
            let b = ctx.bundle()?;
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = dd.value(&[i, j, k]) - dd.value(&[j, i, k]);
                        for l in 0..n {
                            r += b.riemann.value(&[i, j, k, l]) * omega.value(&[l]);
                        }
                        worst = nan_max(worst, r.abs());
                    }
                }
            }
            worst
        }
        P::RiemannSymmetries => {
            let b = ctx.bundle()?;
            nan_max(b.rm.symmetry_residual(), b.ricci.symmetry_residual())
        }
        P::WeylTraceFree => {
            let w = ctx.bundle()?.weyl.clone();
            let mut worst = 0.0f64;
            for a in 0..4 {
                for c in a + 1..4 {
                    worst = nan_max(worst, metric_trace(&w, a, c, &metric)?.max_abs_value());
                }
            }
            worst
        }
        P::CottonStructure => {
            let c = ctx.bundle()?.cotton.clone();
            let anti = max_abs((0..n * n * n).map(|o| {
                let (i, j, k) = (o / (n * n), (o / n) % n, o % n);
                c.value(&[i, j, k]) + c.value(&[j, i, k])
            }));
            let t1 = metric_trace(&c, 1, 2, &metric)?.max_abs_value();
            let t0 = metric_trace(&c, 0, 2, &metric)?.max_abs_value();
            nan_max(anti, nan_max(t0, t1))
        }
        P::CottonWeylDivergence => {
            let b = ctx.bundle()?.clone();
            weyl_divergence_check(&b, &metric)?.max_abs_value()
        }
        P::BachDecomposition => {
            let q = ctx.quadratic()?;
            let half = q.u.scale(0.5).add_scaled(&q.v, 1.0 / 6.0)?;
            ctx.bach()?.sub(&half)?.max_abs_value()
        }
        P::BachGeneralReduction => {
            let b = ctx.bundle()?.clone();
            let general = bach(&metric, &b, BachMode::General)?;
            ctx.bach()?.sub(&general)?.max_abs_value()
        }
        P::UFourDimForm => {
            let q = ctx.quadratic()?;
            let four = q.u_four_dim.as_ref().ok_or(Error::Dimension {
                what: "four-dimensional U",
                dim: n,
            })?;
            q.u.sub(four)?.max_abs_value()
        }
        P::TraceV => {
            let q = ctx.quadratic()?;
            (trace(&q.v, &metric)? - 3.0 * q.laplacian_scalar.value()).abs()
        }
        P::TraceU => {
            let q = ctx.quadratic()?;
            (trace(&q.u, &metric)? + q.laplacian_scalar.value()).abs()
        }
        P::TraceBach => trace(ctx.bach()?, &metric)?.abs(),
        P::TraceBachLike => {
            let q = ctx.quadratic()?;
            let lap = q.laplacian_scalar.value();
            let mut worst = 0.0f64;
            for &(alpha, beta) in &params.pairs {
                let t = trace(&bach_like(&q.u, &q.v, alpha, beta)?, &metric)?;
                worst = nan_max(worst, (t - (3.0 * beta - alpha) * lap).abs());
            }
            worst
        }
        P::QuadraticWVanishes => ctx.quadratic()?.w_quad.max_abs_value(),
        P::BachLikeDecomposition => {
            let b = ctx.bach()?.clone();
            let q = ctx.quadratic()?;
            let mut worst = 0.0f64;
            for &(alpha, beta) in &params.pairs {
                let lhs = bach_like(&q.u, &q.v, alpha, beta)?;
                let rhs = b.scale(2.0 * alpha).add_scaled(&q.v, beta - alpha / 3.0)?;
                worst = nan_max(worst, lhs.sub(&rhs)?.max_abs_value());
            }
            worst
        }
        P::DivergenceU => divergence(&ctx.quadratic()?.u.clone(), &metric)?.max_abs_value(),
        P::DivergenceV => divergence(&ctx.quadratic()?.v.clone(), &metric)?.max_abs_value(),
        P::DivergenceBach => divergence(&ctx.bach()?.clone(), &metric)?.max_abs_value(),
        P::RicciTraceInequality => {
            let b = ctx.bundle()?.clone();
            (-identities::ricci_trace_slack(&metric, &b)?).max(0.0)
        }
        P::Bochner => {
            let b = ctx.bundle()?.clone();
            let s = ctx.soliton()?;
            identities::bochner(&metric, &b, s)?.abs()
        }
        P::DTensorAntisymmetry => {
            let b = ctx.bundle()?.clone();
            let s = ctx.soliton()?;
            let d = d_tensor(&b, &s.grad_f_up)?;
            max_abs((0..n * n * n).map(|o| {
                let (i, j, k) = (o / (n * n), (o / n) % n, o % n);
                d.value(&[i, j, k]) + d.value(&[j, i, k])
            }))
        }
        P::SolitonEquation => ctx.soliton()?.soliton_residual.max_abs_value(),
        P::SolitonNormalization => ctx.soliton()?.normalization_residual.value().abs(),
        P::SolitonLaplacianF => ctx.soliton()?.laplacian_residual.value().abs(),
        P::SolitonGradScalar => ctx.soliton()?.grad_scalar_residual.max_abs_value(),
        P::SolitonGradCubic => {
            let b = ctx.bundle()?.clone();
            let q = ctx.quadratic()?.clone();
            let s = ctx.soliton()?;
            identities::grad_cubic(&metric, &b, &q, s)?.abs()
        }
        P::EinsteinUVanishes => ctx.quadratic()?.u.max_abs_value(),
        P::EinsteinVVanishes => ctx.quadratic()?.v.max_abs_value(),
        P::EinsteinBachVanishes | P::LcfBachVanishes => ctx.bach()?.max_abs_value(),
        P::EinsteinScalarTwo => (ctx.bundle()?.scalar.value() - 2.0).abs(),
        P::LcfDVanishes => {
            let b = ctx.bundle()?.clone();
            let s = ctx.soliton()?;
            d_tensor(&b, &s.grad_f_up)?.max_abs_value()
        }
    };
    Ok(residual / scale)
}

/// A prepared pointwise run. Points are independent, so callers may evaluate
/// them in any order or in parallel and combine with [`PointwiseRun::finish`].
#[derive(Debug, Clone)]
pub struct PointwiseRun<'g> {
    geometry: &'g Geometry,
    ids: Vec<PointwiseId>,
    config: PointwiseConfig,
    params: RunParameters,
    points: Vec<Vec<f64>>,
    space: Arc<JetSpace>,
}

impl<'g> PointwiseRun<'g> {
    pub fn new(
        geometry: &'g Geometry,
        ids: &[PointwiseId],
        config: PointwiseConfig,
    ) -> Result<Self> {
        let selection: Vec<IdentityId> = ids.iter().map(|&p| IdentityId::Pointwise(p)).collect();
        check_order(&selection, config.order)?;
        let points = geometry.samples(config.samples, config.seed)?;
        Ok(Self {
            geometry,
            ids: ids.to_vec(),
            params: RunParameters::new(geometry.dim(), config.seed),
            space: JetSpace::new(geometry.dim(), config.order),
            config,
            points,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn ids(&self) -> &[PointwiseId] {
        &self.ids
    }

    /// Scaled residuals at point `index`, one per id; `None` where the identity is gated off.
    pub fn point_residuals(&self, index: usize) -> Result<Vec<Option<f64>>> {
        let x = &self.points[index];
        let mut ctx = PointContext {
            geometry: self.geometry,
            metric: self.geometry.metric_in(&self.space, x)?,
            bundle: None,
            quadratic: None,
            bach4: None,
            soliton: None,
        };
        self.ids
            .iter()
            .map(|&id| match gate(id, self.geometry) {
                Some(_) => Ok(None),
                None => evaluate(id, &mut ctx, &self.params).map(Some),
            })
            .collect()
    }

    /// Combines per-point residuals, indexed like [`PointwiseRun::points`], into reports.
    pub fn finish(&self, per_point: &[Vec<Option<f64>>]) -> Vec<IdentityReport> {
        self.ids
            .iter()
            .enumerate()
            .map(|(k, &id)| {
                let tolerance = self.config.tolerance.unwrap_or(id.default_tolerance());
                let (verdict, max_residual) = match gate(id, self.geometry) {
                    Some((verdict, _)) => (verdict, None),
                    None => {
                        let worst = per_point
                            .iter()
                            .map(|row| row[k].unwrap_or(f64::NAN))
                            .fold(0.0, nan_max);
                        (Verdict::from_residual(worst, tolerance), Some(worst))
                    }
                };
                IdentityReport {
                    id: id.as_str().to_string(),
                    anchor: id.anchor().to_string(),
                    geometry: self.geometry.name().to_string(),
                    samples: self.points.len(),
                    max_residual,
                    tolerance,
                    verdict,
                }
            })
            .collect()
    }

    /// Evaluates every point in order.
    pub fn run(&self) -> Result<Vec<IdentityReport>> {
        let rows = (0..self.points.len())
            .map(|i| self.point_residuals(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.finish(&rows))
    }
}
