//! Dense multivariate polynomials and their exact Taylor jets.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::jets::{factorial, Jet, JetSpace, MultiIndex};

/// `Σ c_α x^α` over all `|α| ≤ degree`, stored in graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    degree: usize,
    exponents: Vec<MultiIndex>,
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero(dim: usize, degree: usize) -> Self {
        let space = JetSpace::new(dim, degree);
        let exponents: Vec<MultiIndex> = (0..space.len()).map(|r| space.multi_index(r)).collect();
        let coeffs = alloc::vec![0.0; exponents.len()];
        Self {
            dim,
            degree,
            exponents,
            coeffs,
        }
    }

    /// Coefficients drawn uniformly from `[-1, 1]`.
    pub fn random(rng: &mut impl Rng, dim: usize, degree: usize) -> Self {
        let mut p = Self::zero(dim, degree);
        for c in p.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..=1.0);
        }
        p
    }

    pub fn from_terms(dim: usize, degree: usize, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let mut p = Self::zero(dim, degree);
        for (alpha, c) in terms {
            let r = p.exponents.iter().position(|e| e == alpha).ok_or_else(|| {
                Error::InvalidArgument(alloc::format!("monomial {alpha:?} outside degree {degree}"))
            })?;
            p.coeffs[r] += c;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.exponents.iter().zip(self.coeffs.iter().copied())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms()
            .map(|(alpha, c)| {
                c * alpha
                    .exponents()
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| libm::pow(xi, e as f64))
                    .product::<f64>()
            })
            .sum()
    }

    /// Evaluation against a table from [`monomials`] of at least this degree.
    pub fn eval_with(&self, table: &[f64]) -> f64 {
        self.coeffs.iter().zip(table).map(|(c, m)| c * m).sum()
    }

    /// `∂p/∂x_axis`, stored at the same degree.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        let space = JetSpace::new(self.dim, self.degree);
        for (alpha, c) in self.terms() {
            let e = alpha.exponents()[axis];
            if e == 0 || c == 0.0 {
                continue;
            }
            let mut lowered = alpha.exponents().to_vec();
            lowered[axis] -= 1;
            let r = space
                .rank(&MultiIndex::new(lowered))
                .expect("lower order stays in the space");
            out.coeffs[r] += c * e as f64;
        }
        out
    }

    /// Sum of two polynomials of the same dimension and degree.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(
            (self.dim, self.degree),
            (other.dim, other.degree),
            "polynomial shapes differ"
        );
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b);
        out
    }

    /// Drops every term that depends on `x_axis`.
    pub fn without_axis(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for (c, alpha) in out.coeffs.iter_mut().zip(&self.exponents) {
            if alpha.exponents()[axis] > 0 {
                *c = 0.0;
            }
        }
        out
    }

    /// Upper bound of `|p|` on the box `[-h, h]^n`.
    pub fn abs_bound(&self, h: f64) -> f64 {
        self.terms()
            .map(|(alpha, c)| c.abs() * libm::pow(h, alpha.order() as f64))
            .sum()
    }

    /// Exact Taylor jet at `x0`: the coefficient of `(x − x0)^β` is
    /// `Σ_{α ≥ β} c_α C(α, β) x0^{α−β}`.
    pub fn to_jet(&self, space: &alloc::sync::Arc<JetSpace>, order: usize, x0: &[f64]) -> Jet {
        let mut out = alloc::vec![0.0; space.size(order)];
        for (alpha, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let a = alpha.exponents();
            for (r, slot) in out.iter_mut().enumerate() {
                let b = space.exponents_of(r);
                if b.iter().zip(a).any(|(bi, ai)| bi > ai) {
                    continue;
                }
                let mut term = c;
                for d in 0..self.dim {
                    let (ai, bi) = (a[d] as usize, b[d] as usize);
                    term *= binomial(ai, bi) * libm::pow(x0[d], (ai - bi) as f64);
                }
                *slot += term;
            }
        }
        Jet::from_coeffs(space, order, out).expect("coefficient count matches the space")
    }
}

/// All monomials `x^α` with `|α| ≤ degree`, in the graded order shared by
/// every [`Polynomial`] of this dimension.
pub fn monomials(space: &JetSpace, x: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![1.0; space.len()];
    for r in 1..space.len() {
        let e = space.exponents_of(r);
        let axis = e.iter().position(|&k| k > 0).expect("nonzero order");
        let mut lowered = e.to_vec();
        lowered[axis] -= 1;
        let prev = space
            .rank(&MultiIndex::new(lowered))
            .expect("lower order stays in the space");
        out[r] = out[prev] * x[axis];
    }
    out
}

/// Precomputed recurrence for filling [`monomials`] tables repeatedly.
#[derive(Debug, Clone)]
pub struct Monomials {
    /// `(axis, previous rank)` for every rank past the constant term.
    steps: Vec<(usize, usize)>,
}

impl Monomials {
    pub fn new(dim: usize, degree: usize) -> Self {
        let space = JetSpace::new(dim, degree);
        let steps = (1..space.len())
            .map(|r| {
                let e = space.exponents_of(r);
                let axis = e.iter().position(|&k| k > 0).expect("nonzero order");
                let mut lowered = e.to_vec();
                lowered[axis] -= 1;
                (
                    axis,
                    space
                        .rank(&MultiIndex::new(lowered))
                        .expect("lower order stays in the space"),
                )
            })
            .collect();
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        for &(axis, prev) in &self.steps {
            let v = out[prev] * x[axis];
            out.push(v);
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
