use std::sync::Arc;

use bachlike_core::polynomial::Polynomial;
use bachlike_core::{Jet, JetSpace, MultiIndex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 3;
const K: usize = 4;

fn space() -> Arc<JetSpace> {
    JetSpace::new(N, K)
}

fn coeffs(range: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-range..range, space().size(K))
}

fn jet(c: Vec<f64>) -> Jet {
    Jet::from_coeffs(&space(), K, c).unwrap()
}

fn l1(j: &Jet) -> f64 {
    j.coeffs().iter().map(|c| c.abs()).sum()
}

fn max_diff(a: &Jet, b: &Jet) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn multiplication_is_associative(a in coeffs(1.0), b in coeffs(1.0), c in coeffs(1.0)) {
        let (a, b, c) = (jet(a), jet(b), jet(c));
        let scale = l1(&a) * l1(&b) * l1(&c);
        let lhs = &(&a * &b) * &c;
        let rhs = &a * &(&b * &c);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn ring_axioms(a in coeffs(1.0), b in coeffs(1.0), c in coeffs(1.0)) {
        let (a, b, c) = (jet(a), jet(b), jet(c));
        let scale = (1.0 + l1(&a)) * (1.0 + l1(&b)) * (1.0 + l1(&c));
        prop_assert!(max_diff(&(&a * &b), &(&b * &a)) <= 1e-12 * scale);
        prop_assert!(max_diff(&(&a + &b), &(&b + &a)) == 0.0);
        let distributed = &(&a * &b) + &(&a * &c);
        prop_assert!(max_diff(&(&a * &(&b + &c)), &distributed) <= 1e-12 * scale);
        let one = Jet::constant(&space(), K, 1.0);
        prop_assert!(max_diff(&(&a * &one), &a) == 0.0);
        prop_assert!(max_diff(&(&a - &a), &Jet::zero(&space(), K)) == 0.0);
    }

    #[test]
    fn division_recovers_factor(a in coeffs(1.0), mut b in coeffs(0.3), b0 in 1.0f64..2.0) {
        b[0] = b0;
        let (a, b) = (jet(a), jet(b));
        let scale = (1.0 + l1(&a)) * (1.0 + l1(&b));
        let back = (&a * &b).try_div(&b).unwrap();
        prop_assert!(max_diff(&back, &a) <= 1e-12 * scale);
    }

    #[test]
    fn truncation_commutes_with_arithmetic(a in coeffs(1.0), mut b in coeffs(0.3), b0 in 1.0f64..2.0, k in 0usize..K) {
        b[0] = b0;
        let (a, b) = (jet(a), jet(b));
        let (ak, bk) = (a.truncated(k).unwrap(), b.truncated(k).unwrap());
        let full = (&(&a * &b) + &a.sin()).try_div(&b.exp()).unwrap().truncated(k).unwrap();
        let low = (&(&ak * &bk) + &ak.sin()).try_div(&bk.exp()).unwrap();
        prop_assert_eq!(full.coeffs(), low.coeffs());
    }
}

/// `sin(p)·e^q / (1 + r²) + √(2 + s²)` for random cubic polynomials.
struct Composite {
    p: [Polynomial; 4],
}

impl Composite {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            p: std::array::from_fn(|_| Polynomial::random(&mut rng, N, 3)),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let [p, q, r, s] = self.p.each_ref().map(|p| p.eval(x));
        p.sin() * q.exp() / (1.0 + r * r) + (2.0 + s * s).sqrt()
    }

    fn jet(&self, space: &Arc<JetSpace>, x: &[f64]) -> Jet {
        let [p, q, r, s] = self
            .p
            .each_ref()
            .map(|p| p.to_jet(space, space.max_order(), x));
        let num = &p.sin() * &q.exp();
        let den = (&r * &r).add_const(1.0);
        &num.try_div(&den).unwrap() + &(&s * &s).add_const(2.0).sqrt().unwrap()
    }
}

const H: f64 = 1e-3;

fn shifted(x: &[f64], axis: usize, step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += step;
    y
}

/// Five-point central differences of `g` along the listed axes, one axis at a time.
fn central(g: &dyn Fn(&[f64]) -> f64, x: &[f64], axes: &[usize]) -> f64 {
    match axes.split_first() {
        None => g(x),
        Some((&a, rest)) => {
            let at = |k: f64| central(g, &shifted(x, a, k * H), rest);
            (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * H)
        }
    }
}

fn axes_of(alpha: &MultiIndex) -> Vec<usize> {
    alpha
        .exponents()
        .iter()
        .enumerate()
        .flat_map(|(a, &e)| std::iter::repeat(a).take(e as usize))
        .collect()
}

#[test]
fn partials_match_finite_differences() {
    let space = JetSpace::new(N, K);
    for seed in 0..5 {
        let f = Composite::new(seed);
        let x = [0.21, -0.13, 0.34];
        let j = f.jet(&space, &x);
        for r in 1..space.size(K) {
            let alpha = space.multi_index(r);
            let axes = axes_of(&alpha);
            let exact = j.partial(&alpha).unwrap();
            // Orders one and two difference function values directly; higher orders
            // difference jet-computed second partials so rounding stays at ε/h².
            let estimate = if alpha.order() <= 2 {
                central(&|y| f.value(y), &x, &axes)
            } else {
                let (outer, inner) = axes.split_at(axes.len() - 2);
                let inner_alpha = {
                    let mut e = vec![0u8; N];
                    inner.iter().for_each(|&a| e[a] += 1);
                    MultiIndex::new(e)
                };
                let second = |y: &[f64]| f.jet(&space, y).partial(&inner_alpha).unwrap();
                central(&second, &x, outer)
            };
            let scale = exact.abs().max(1.0);
            assert!(
                (exact - estimate).abs() <= 1e-5 * scale,
                "seed {seed} α {:?}: {exact} vs {estimate}",
                alpha.exponents()
            );
        }
    }
}

#[test]
fn sqrt_of_sphere_volume_density_matches_finite_differences() {
    use bachlike_core::geometry::Geometry;
    let g = Geometry::catalog("S4").unwrap();
    let x = [1.1, 0.8, 1.9, 2.5];
    let space = JetSpace::new(4, 2);
    let jets = g.metric_jets(&space, &x).unwrap();
    // The chart metric is diagonal.
    let det = (0..4).fold(Jet::constant(&space, 2, 1.0), |acc, i| &acc * &jets[i * 5]);
    let root = det.sqrt().unwrap();
    let density = |y: &[f64]| {
        let v = g.metric_values(y);
        (0..4).map(|i| v[i * 5]).product::<f64>().sqrt()
    };
    for axis in 0..4 {
        let exact = root.partial(&MultiIndex::axis(4, axis, 1)).unwrap();
        let estimate = central(&density, &x, &[axis]);
        assert!((exact - estimate).abs() <= 1e-5 * exact.abs().max(1.0));
        for b in axis..4 {
            let mut e = [0u8; 4];
            e[axis] += 1;
            e[b] += 1;
            let exact = root.partial(&MultiIndex::new(e.to_vec())).unwrap();
            let estimate = central(&density, &x, &[axis, b]);
            assert!((exact - estimate).abs() <= 1e-5 * exact.abs().max(1.0));
        }
    }
}
