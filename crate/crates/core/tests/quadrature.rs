use std::f64::consts::PI;

use bachlike_core::curvature::{quadratic_tensors, soliton_fields, CurvatureBundle};
use bachlike_core::geometry::{Geometry, PotentialModel, RandomMetricConfig};
use bachlike_core::polynomial::Polynomial;
use bachlike_core::quadrature::*;
use bachlike_core::report::Verdict;
use bachlike_core::MultiIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn catalog(name: &str) -> Geometry {
    Geometry::catalog(name).unwrap()
}

fn one(x: &[f64]) -> f64 {
    let _ = x;
    1.0
}

fn volume(region: &Region, q: usize, weighted: bool) -> IntegralResult {
    integrate_region(region, &mut Scalar(one), q, weighted).unwrap()[0]
}

fn area(region: &Region, q: usize, weighted: bool) -> IntegralResult {
    integrate_boundary(region, &mut Flux(|_: &[f64], _: &[f64]| 1.0), q, weighted).unwrap()[0]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

#[test]
fn gaussian_ball_volume_and_area() {
    let g = catalog("GAUSS");
    let r = Region::sublevel(&g, 4.0).unwrap();
    let rho: f64 = 4.0;
    let v = volume(&r, DEFAULT_Q, false);
    assert!(
        close(v.value, PI * PI * rho.powi(4) / 2.0, 1e-12),
        "{}",
        v.value
    );
    assert!((v.value - 1263.31).abs() < 0.01);
    let a = area(&r, DEFAULT_Q, false);
    assert!(
        close(a.value, 2.0 * PI * PI * rho.powi(3), 1e-12),
        "{}",
        a.value
    );
    // ∫_{|x|≤ρ} e^{−|x|²/4} dx = 16π²(1 − (1 + r)e^{−r}) with r = ρ²/4.
    let w = volume(&r, DEFAULT_Q, true);
    let expected = 16.0 * PI * PI * (1.0 - 5.0 * (-4.0f64).exp());
    assert!(close(w.value, expected, 1e-10), "{} vs {expected}", w.value);
    assert_eq!(v.measure, Measure::Volume);
    assert_eq!(w.measure, Measure::WeightedVolume);
    assert_eq!(a.measure, Measure::Surface);
}

#[test]
fn cylinder_boundary_is_two_three_spheres() {
    let g = catalog("CYL");
    let r = Region::sublevel(&g, 5.0).unwrap();
    let a = area(&r, DEFAULT_Q, false);
    assert!(
        close(a.value, 2.0 * 2.0 * PI * PI * 8.0, 1e-10),
        "{}",
        a.value
    );
    assert!((a.value - 315.83).abs() < 0.01);
    let w = area(&r, DEFAULT_Q, true);
    assert!(close(w.value, (-5.0f64).exp() * a.value, 1e-12));
    // |t| ≤ 2√(r − 3/2) times Vol(S³(2)) = 16π².
    let v = volume(&r, DEFAULT_Q, false);
    assert!(
        close(v.value, 4.0 * 3.5f64.sqrt() * 16.0 * PI * PI, 1e-10),
        "{}",
        v.value
    );
}

#[test]
fn sphere_volume_and_empty_boundary() {
    let g = catalog("S4");
    let whole = Region::whole(&g).unwrap();
    let vol = 8.0 * PI * PI / 3.0 * 36.0;
    let v = volume(&whole, DEFAULT_Q, false);
    assert!(close(v.value, vol, 1e-10), "{} vs {vol}", v.value);
    let w = volume(&whole, DEFAULT_Q, true);
    assert!(close(w.value, (-2.0f64).exp() * vol, 1e-10));
    for weighted in [false, true] {
        let b = area(&whole, DEFAULT_Q, weighted);
        assert_eq!(b.value, 0.0);
        assert_eq!(b.refinement, 0.0);
        let mut wide = Flux(|x: &[f64], nu: &[f64]| x[0] * nu[1] + 3.0);
        assert_eq!(
            integrate_boundary(&whole, &mut wide, 16, weighted).unwrap()[0].value,
            0.0
        );
    }
    assert!(Region::sublevel(&g, 5.0).is_err());
}

#[test]
fn constant_potential_weight_factors_out() {
    for c in [-1.5, 0.0, 0.7, 3.0] {
        let g = catalog("S4").with_potential(PotentialModel::Constant(c));
        let whole = Region::whole(&g).unwrap();
        let mut integrand = Scalar(|x: &[f64]| 1.0 + x[0].sin() * x[2].cos().powi(2));
        let plain = integrate_region(&whole, &mut integrand, 16, false).unwrap()[0].value;
        let weighted = integrate_region(&whole, &mut integrand, 16, true).unwrap()[0].value;
        assert!((weighted - (-c).exp() * plain).abs() <= 1e-12 * weighted.abs());
    }
}

#[test]
fn refinement_estimate_bounds_the_next_change() {
    let cases: Vec<(Geometry, Option<f64>)> = vec![
        (catalog("GAUSS"), Some(4.0)),
        (catalog("CYL"), Some(5.0)),
        (catalog("S4"), None),
    ];
    for (g, level) in &cases {
        let region = match level {
            Some(r) => Region::sublevel(g, *r).unwrap(),
            None => Region::whole(g).unwrap(),
        };
        for q in [4, 8, 12] {
            let mut f = Scalar(|x: &[f64]| {
                (0.3 * x[0]).cos() * (1.0 + 0.1 * x[3] * x[3]).ln() + x[1].sin()
            });
            let now = integrate_region(&region, &mut f, q, true).unwrap()[0];
            let next = integrate_region(&region, &mut f, 2 * q, true).unwrap()[0];
            let change = (next.value - now.value).abs();
            assert!(
                change <= 10.0 * now.refinement + 1e-13 * now.value.abs().max(1.0),
                "{} q={q}: change {change:e}, estimate {:e}",
                g.name(),
                now.refinement
            );
        }
    }
}

/// On the angular chart `X^φ` may not depend on `φ`, or `X` would jump across the seam.
fn random_fields(g: &Geometry, seed: u64, count: usize) -> Vec<PolynomialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let x = PolynomialField::random(&mut rng, 4, 1 + k % 3);
            if g.name() == "CYL" {
                x.independent_of(2, 2)
            } else {
                x
            }
        })
        .collect()
}

#[test]
fn stokes_oracle_on_catalog_regions() {
    for (name, level) in [("GAUSS", 4.0), ("CYL", 5.0)] {
        let g = catalog(name);
        let fields = random_fields(&g, 17, 20);
        let region = Region::sublevel(&g, level).unwrap();
        let coarse = stokes_residual(&region, &fields, 16).unwrap();
        let fine = stokes_residual(&region, &fields, 32).unwrap();
        for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
            assert!(
                f.residual <= 1e-6 * f.magnitude(),
                "{name} field {k}: {:e}",
                f.relative()
            );
            assert!(
                f.residual <= c.residual.max(1e-12 * c.magnitude()),
                "{name} field {k}: {:e} -> {:e}",
                c.residual,
                f.residual
            );
        }
        let rough = stokes_residual(&region, &fields, 2).unwrap();
        let total = |rs: &[StokesResult]| rs.iter().map(|r| r.residual).sum::<f64>();
        assert!(total(&fine) < total(&rough));
    }
}

#[test]
fn stokes_with_potential_gradient_on_gaussian_ball() {
    let g = catalog("GAUSS");
    let region = Region::sublevel(&g, 4.0).unwrap();
    let grad_f = PolynomialField::new(
        (0..4)
            .map(|i| Polynomial::from_terms(4, 1, &[(MultiIndex::axis(4, i, 1), 0.5)]).unwrap())
            .collect(),
    );
    let zero = PolynomialField::new(vec![Polynomial::zero(4, 1); 4]);
    let out = stokes_residual(&region, &[grad_f, zero], 16).unwrap();
    // div ∇f = 2 and ⟨∇f, ν⟩ = ρ/2 on |x| = ρ = 4.
    let expected = PI * PI * 256.0;
    assert!(close(out[0].volume, expected, 1e-12));
    assert!(close(out[0].flux, expected, 1e-12));
    assert!(out[0].residual <= 1e-6 * out[0].magnitude());
    assert_eq!(
        (out[1].volume, out[1].flux, out[1].residual),
        (0.0, 0.0, 0.0)
    );
}

#[test]
fn region_errors() {
    let g = catalog("GAUSS");
    assert!(Region::sublevel(&g, -1.0).is_err());
    assert!(Region::whole(&g).is_err());
    let e4 = catalog("E4");
    assert!(Region::sublevel(&e4, 1.0).is_err());
    assert!(integrate_region(
        &Region::sublevel(&g, 1.0).unwrap(),
        &mut Scalar(one),
        1,
        false
    )
    .is_err());
}

const CORE_LEMMAS: [LemmaId; 12] = [
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
];

#[test]
fn lemma_suite_passes_on_gaussian_and_cylinder() {
    for (name, level) in [("GAUSS", 4.0), ("CYL", 5.0)] {
        let g = catalog(name);
        let out = verify_lemmas(&g, &CORE_LEMMAS, &LemmaConfig::new(level, 12)).unwrap();
        assert_eq!(out.len(), CORE_LEMMAS.len());
        for o in &out {
            let r = &o.report;
            assert_eq!(
                r.verdict,
                Verdict::Pass,
                "{name} {}: {:?} {:?}",
                r.id,
                r.max_residual,
                o.detail.sides
            );
            let magnitude = o.detail.sides.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            assert!(
                r.max_residual.unwrap() <= (RELATIVE_TOLERANCE * magnitude).max(ABSOLUTE_TOLERANCE)
            );
        }
    }
}

#[test]
fn cylinder_weighted_v_integrand_matches_pointwise() {
    let g = catalog("CYL");
    for x in g.samples(50, 3).unwrap() {
        let m = g.metric_at(&x, 4).unwrap();
        let b = CurvatureBundle::new(&m).unwrap();
        let q = quadratic_tensors(&m, &b).unwrap();
        let s = soliton_fields(&m, &b, &g.potential_jet(m.space(), &x).unwrap()).unwrap();
        let (mut v_ff, mut grad2) = (0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                v_ff += q.v.value(&[i, j]) * s.grad_f_up.value(&[i]) * s.grad_f_up.value(&[j]);
            }
            grad2 += s.grad_f.value(&[i]) * s.grad_f_up.value(&[i]);
        }
        let r = b.scalar.value();
        assert!((v_ff + 0.25 * r * r * grad2).abs() <= 1e-10);
        assert!((v_ff + 9.0 / 16.0 * grad2).abs() <= 1e-10);
    }
}

#[test]
fn bach_like_lines_on_the_cylinder() {
    let g = catalog("CYL");
    let mut cfg = LemmaConfig::new(5.0, 8);
    cfg.bach_like = vec![(1.0, 1.0), (3.0, 1.0)];
    let out = verify_lemmas(
        &g,
        &[LemmaId::BachLikeIntegral, LemmaId::BachLikeDIntegral],
        &cfg,
    )
    .unwrap();
    let verdict = |id: &str| {
        out.iter()
            .find(|o| o.report.id == id)
            .unwrap()
            .report
            .verdict
    };
    assert_eq!(
        verdict("bach-like-integral[alpha=1,beta=1]"),
        Verdict::NotApplicable
    );
    assert_eq!(
        verdict("bach-like-d-integral[alpha=1,beta=1]"),
        Verdict::NotApplicable
    );
    assert_eq!(
        verdict("bach-like-integral[alpha=3,beta=1]"),
        Verdict::NotApplicable
    );
    assert_eq!(
        verdict("bach-like-d-integral[alpha=3,beta=1]"),
        Verdict::NotApplicable
    );
    let gauss = catalog("GAUSS");
    let mut cfg = LemmaConfig::new(4.0, 8);
    cfg.bach_like = vec![(1.0, 1.0), (-0.5, 0.25)];
    for o in verify_lemmas(
        &gauss,
        &[LemmaId::BachLikeIntegral, LemmaId::BachLikeDIntegral],
        &cfg,
    )
    .unwrap()
    {
        assert_eq!(o.report.verdict, Verdict::Pass, "{}", o.report.id);
    }
    let na = out
        .iter()
        .find(|o| o.report.id == "bach-like-integral[alpha=1,beta=1]")
        .unwrap();
    assert!(na.detail.sides.iter().any(|s| s.abs() > 1e-3));
}

#[test]
fn hypotheses_gate_non_solitons() {
    let g = Geometry::random(&RandomMetricConfig {
        with_potential: true,
        ..Default::default()
    })
    .unwrap();
    let out = verify_lemmas(&g, &CORE_LEMMAS[..2], &LemmaConfig::new(0.5, 4)).unwrap();
    for o in out {
        assert_eq!(o.report.verdict, Verdict::SkippedHypothesis);
    }
    let flat = catalog("E4");
    for o in verify_lemmas(&flat, &CORE_LEMMAS, &LemmaConfig::new(1.0, 4)).unwrap() {
        assert_eq!(o.report.verdict, Verdict::SkippedHypothesis);
    }
}

#[test]
fn lemma_ids_round_trip() {
    for id in LemmaId::ALL {
        assert_eq!(LemmaId::parse(id.as_str()), Some(id));
        assert!(!id.anchor().is_empty());
    }
}

#[test]
fn decay_probe_on_catalog_and_random() {
    let g = catalog("GAUSS");
    for p in decay_probe(&g, 1.0, &[2.0, 4.0, 8.0], 8).unwrap() {
        assert_eq!(p.value, 0.0);
    }
    let cyl = catalog("CYL");
    let probe = decay_probe(&cyl, 0.5, &[2.0, 4.0, 8.0], 8).unwrap();
    assert_eq!(
        probe.iter().map(|p| p.level).collect::<Vec<_>>(),
        vec![2.0, 4.0, 8.0]
    );
    for p in probe {
        assert!(p.value.abs() <= 1e-12);
    }
    let rand = Geometry::random(&RandomMetricConfig {
        with_potential: true,
        ..Default::default()
    })
    .unwrap();
    for p in decay_probe(&rand, 1.0, &[0.3, 0.6], 6).unwrap() {
        assert!(p.value.is_finite() && p.value >= 0.0);
    }
    assert!(decay_probe(&g, 0.0, &[1.0], 8).is_err());
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for q in [2usize, 5, 12, 32] {
        let rule = GaussLegendre::new(q);
        assert_eq!(rule.len(), q);
        let (x, w) = rule.on(-1.0, 3.0);
        for d in 0..2 * q {
            let sum: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
            let exact = (3f64.powi(d as i32 + 1) - (-1f64).powi(d as i32 + 1)) / (d as f64 + 1.0);
            assert!(close(sum, exact, 1e-12), "q={q} d={d}: {sum} vs {exact}");
        }
    }
}
