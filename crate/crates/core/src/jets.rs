//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `∂^α u(x₀) / α!` for every multi-index `|α| ≤ K`. Coefficients are laid
//! out in graded order (all order-0 indices, then order 1, ...), so a jet of
//! lower order is a prefix of a higher-order one and truncation is a slice.
//!
//! Two families of arithmetic exist:
//! - `try_*` methods insist on identical `(n, K)` and return errors;
//! - the operator impls (`&a * &b`, ...) combine at the lower of the two
//!   orders, which is what the tensor layer wants when a covariant derivative
//!   has consumed an order on one side only. They panic on a dimension
//!   mismatch.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Exponent vector of a partial derivative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: impl Into<Vec<u8>>) -> Self {
        Self(exponents.into())
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// `e_axis` scaled by `power`.
    pub fn axis(dim: usize, axis: usize, power: u8) -> Self {
        let mut e = vec![0; dim];
        e[axis] = power;
        Self(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π αᵢ!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }
}

impl From<&[u8]> for MultiIndex {
    fn from(e: &[u8]) -> Self {
        Self(e.to_vec())
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Index tables shared by every jet of a given `(n, K)`.
pub struct JetSpace {
    dim: usize,
    max_order: usize,
    /// `sizes[k]` = number of multi-indices of order ≤ k.
    sizes: Vec<usize>,
    exponents: Vec<u8>,
    factorials: Vec<f64>,
    lookup: BTreeMap<Vec<u8>, usize>,
    mul_offsets: Vec<u32>,
    mul_pairs: Vec<(u32, u32)>,
    /// `deriv[axis][r] = (rank of α_r + e_axis, α_r[axis] + 1)` for `|α_r| < K`.
    deriv: Vec<Vec<(u32, f64)>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("dim", &self.dim)
            .field("max_order", &self.max_order)
            .field("len", &self.len())
            .finish()
    }
}

impl JetSpace {
    pub fn new(dim: usize, max_order: usize) -> Arc<Self> {
        assert!(dim > 0, "jet dimension must be positive");
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut sizes = Vec::with_capacity(max_order + 1);
        for k in 0..=max_order {
            let mut current = vec![0u8; dim];
            push_compositions(k, 0, &mut current, &mut exps);
            sizes.push(exps.len());
        }
        let len = exps.len();
        let lookup: BTreeMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let factorials = exps
            .iter()
            .map(|e| e.iter().map(|&x| factorial(x as usize)).product())
            .collect();

        let mut mul_offsets = Vec::with_capacity(len + 1);
        let mut mul_pairs = Vec::new();
        let mut diff = vec![0u8; dim];
        for k in 0..len {
            mul_offsets.push(mul_pairs.len() as u32);
            for i in 0..len {
                let fits = exps[i].iter().zip(&exps[k]).all(|(a, b)| a <= b);
                if !fits {
                    continue;
                }
                for d in 0..dim {
                    diff[d] = exps[k][d] - exps[i][d];
                }
                let j = lookup[&diff];
                mul_pairs.push((i as u32, j as u32));
            }
        }
        mul_offsets.push(mul_pairs.len() as u32);

        let below = if max_order == 0 {
            0
        } else {
            sizes[max_order - 1]
        };
        let deriv = (0..dim)
            .map(|axis| {
                (0..below)
                    .map(|r| {
                        let mut e = exps[r].clone();
                        e[axis] += 1;
                        (lookup[&e] as u32, e[axis] as f64)
                    })
                    .collect()
            })
            .collect();

        Arc::new(Self {
            dim,
            max_order,
            sizes,
            exponents: exps.concat(),
            factorials,
            lookup,
            mul_offsets,
            mul_pairs,
            deriv,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of coefficients of a full-order jet, `C(n + K, K)`.
    pub fn len(&self) -> usize {
        self.sizes[self.max_order]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of coefficients of a jet of the given order.
    pub fn size(&self, order: usize) -> usize {
        self.sizes[order]
    }

    pub fn rank(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha.exponents()).copied()
    }

    pub fn multi_index(&self, rank: usize) -> MultiIndex {
        MultiIndex::new(self.exponents_of(rank))
    }

    /// Exponent vector of the multi-index at `rank`.
    pub fn exponents_of(&self, rank: usize) -> &[u8] {
        &self.exponents[rank * self.dim..(rank + 1) * self.dim]
    }

    fn compatible(&self, other: &JetSpace) -> bool {
        self.dim == other.dim
    }
}

fn push_compositions(remaining: usize, pos: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    let dim = current.len();
    if pos == dim - 1 {
        current[pos] = remaining as u8;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        push_compositions(remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Truncated Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// Coordinate function `x_i` expanded at `value`, in a fresh `(n, K)` space.
pub fn jet_var(axis: usize, value: f64, dim: usize, order: usize) -> Result<Jet> {
    if axis >= dim {
        return Err(Error::AxisOutOfRange { axis, dim });
    }
    Jet::variable(&JetSpace::new(dim, order), axis, value)
}

/// `∂^α u` at the base point.
pub fn extract_partial(jet: &Jet, alpha: &MultiIndex) -> Result<f64> {
    jet.partial(alpha)
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>, order: usize) -> Self {
        assert!(
            order <= space.max_order,
            "order above the jet space maximum"
        );
        Self {
            space: space.clone(),
            order,
            coeffs: vec![0.0; space.size(order)],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, order: usize, value: f64) -> Self {
        let mut j = Self::zero(space, order);
        j.coeffs[0] = value;
        j
    }

    /// Coordinate function `x_axis` at the given value, full order of the space.
    pub fn variable(space: &Arc<JetSpace>, axis: usize, value: f64) -> Result<Self> {
        if axis >= space.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: space.dim,
            });
        }
        let mut j = Self::constant(space, space.max_order, value);
        if space.max_order > 0 {
            j.coeffs[1 + axis] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from raw Taylor coefficients in graded order.
    pub fn from_coeffs(space: &Arc<JetSpace>, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if order > space.max_order {
            return Err(Error::OrderOverflow {
                requested: order,
                available: space.max_order,
            });
        }
        if coeffs.len() != space.size(order) {
            return Err(Error::Shape(alloc::format!(
                "expected {} coefficients, got {}",
                space.size(order),
                coeffs.len()
            )));
        }
        Ok(Self {
            space: space.clone(),
            order,
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Taylor coefficient `∂^α u / α!`.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64> {
        let r = self.rank_checked(alpha)?;
        Ok(self.coeffs[r])
    }

    /// Partial derivative `∂^α u` at the base point.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<f64> {
        let r = self.rank_checked(alpha)?;
        Ok(self.coeffs[r] * self.space.factorials[r])
    }

    fn rank_checked(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.dim() != self.dim() {
            return Err(Error::Shape(alloc::format!(
                "multi-index of dimension {} for a jet in {} variables",
                alpha.dim(),
                self.dim()
            )));
        }
        if alpha.order() > self.order {
            return Err(Error::OrderOverflow {
                requested: alpha.order(),
                available: self.order,
            });
        }
        Ok(self
            .space
            .rank(alpha)
            .expect("graded table covers every index up to max order"))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| f64::max(m, c.abs()))
    }

    /// Drops every coefficient above `order`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::OrderOverflow {
                requested: order,
                available: self.order,
            });
        }
        Ok(Self {
            space: self.space.clone(),
            order,
            coeffs: self.coeffs[..self.space.size(order)].to_vec(),
        })
    }

    /// `∂u/∂x_axis` as a jet one order lower.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        if self.order == 0 {
            return Err(Error::OrderExhausted {
                what: "derivative",
                needed: 1,
                available: 0,
            });
        }
        let out_order = self.order - 1;
        let table = &self.space.deriv[axis];
        let coeffs = (0..self.space.size(out_order))
            .map(|r| {
                let (target, factor) = table[r];
                self.coeffs[target as usize] * factor
            })
            .collect();
        Ok(Self {
            space: self.space.clone(),
            order: out_order,
            coeffs,
        })
    }

    fn check_same(&self, other: &Jet) -> Result<()> {
        if self.dim() != other.dim() || self.order != other.order {
            return Err(Error::JetMismatch {
                dim_a: self.dim(),
                order_a: self.order,
                dim_b: other.dim(),
                order_b: other.order,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        Ok(self * other)
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        self.div_lowest(other)
    }

    /// Quotient at the lower of the two orders.
    pub fn div_lowest(&self, other: &Jet) -> Result<Jet> {
        assert!(
            self.space.compatible(&other.space),
            "jet dimension mismatch"
        );
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(Error::ZeroDivision);
        }
        let order = self.order.min(other.order);
        let space = if self.order >= other.order {
            &self.space
        } else {
            &other.space
        };
        let n = space.size(order);
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut s = self.coeffs[k];
            let lo = space.mul_offsets[k] as usize;
            let hi = space.mul_offsets[k + 1] as usize;
            for &(i, j) in &space.mul_pairs[lo..hi] {
                if j != 0 {
                    s -= c[i as usize] * other.coeffs[j as usize];
                }
            }
            c[k] = s / b0;
        }
        Ok(Jet {
            space: space.clone(),
            order,
            coeffs: c,
        })
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(&self.space, self.order, 1.0).div_lowest(self)
    }

    /// `self += a · b`, truncated at `self`'s order.
    pub fn fma(&mut self, a: &Jet, b: &Jet) {
        self.fma_scaled(a, b, 1.0);
    }

    /// `self += scale · a · b`, truncated at `self`'s order.
    pub fn fma_scaled(&mut self, a: &Jet, b: &Jet, scale: f64) {
        assert!(
            a.order >= self.order && b.order >= self.order,
            "fma operands of order {} and {} cannot fill order {}",
            a.order,
            b.order,
            self.order
        );
        assert!(
            a.dim() == self.dim() && b.dim() == self.dim(),
            "jet dimension mismatch"
        );
        let space = &self.space;
        let ac = &a.coeffs;
        let bc = &b.coeffs;
        for k in 0..space.size(self.order) {
            let lo = space.mul_offsets[k] as usize;
            let hi = space.mul_offsets[k + 1] as usize;
            let mut s = 0.0;
            for &(i, j) in &space.mul_pairs[lo..hi] {
                s += ac[i as usize] * bc[j as usize];
            }
            self.coeffs[k] += scale * s;
        }
    }

    /// `self += scale · a`, truncated at `self`'s order.
    pub fn add_scaled(&mut self, a: &Jet, scale: f64) {
        assert!(
            a.order >= self.order,
            "operand order below accumulator order"
        );
        for (c, x) in self.coeffs.iter_mut().zip(&a.coeffs) {
            *c += scale * x;
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Univariate Taylor composition: `derivs[m]` is `φ^(m)` at the base value.
    fn compose(&self, derivs: &[f64]) -> Jet {
        debug_assert_eq!(derivs.len(), self.order + 1);
        let mut out = Jet::constant(&self.space, self.order, derivs[0]);
        if self.order == 0 {
            return out;
        }
        let mut tail = self.clone();
        tail.coeffs[0] = 0.0;
        let mut power = tail.clone();
        let mut inv_fact = 1.0;
        for (m, d) in derivs.iter().enumerate().skip(1) {
            inv_fact /= m as f64;
            out.add_scaled(&power, d * inv_fact);
            if m < self.order {
                power = &power * &tail;
            }
        }
        out
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = libm::exp(self.value());
        self.compose(&vec![e; self.order + 1])
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.value() <= 0.0 {
            return Err(Error::Domain {
                func: "sqrt",
                value: self.value(),
            });
        }
        self.powf(0.5)
    }

    /// `u^c`. Integer exponents accept any base (non-zero when negative);
    /// other exponents need a positive constant term.
    pub fn powf(&self, c: f64) -> Result<Jet> {
        let a0 = self.value();
        let integral = libm::floor(c) == c;
        if !integral && a0 <= 0.0 {
            return Err(Error::Domain {
                func: "pow",
                value: a0,
            });
        }
        if integral && c < 0.0 && a0 == 0.0 {
            return Err(Error::ZeroDivision);
        }
        let mut d = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for m in 0..=self.order {
            if falling == 0.0 {
                d.push(0.0);
            } else {
                d.push(falling * libm::pow(a0, c - m as f64));
            }
            falling *= c - m as f64;
        }
        Ok(self.compose(&d))
    }
}

fn combine(a: &Jet, b: &Jet, sign: f64) -> Jet {
    assert!(a.space.compatible(&b.space), "jet dimension mismatch");
    let (hi, lo) = if a.order >= b.order { (a, b) } else { (b, a) };
    let mut out = Jet {
        space: hi.space.clone(),
        order: lo.order,
        coeffs: a.coeffs[..lo.coeffs.len()].to_vec(),
    };
    for (c, x) in out.coeffs.iter_mut().zip(&b.coeffs) {
        *c += sign * x;
    }
    out
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        combine(self, rhs, 1.0)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        combine(self, rhs, -1.0)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert!(self.space.compatible(&rhs.space), "jet dimension mismatch");
        let host = if self.order <= rhs.order { self } else { rhs };
        let mut out = Jet::zero(&host.space, host.order);
        out.fma(self, rhs);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_const(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}
