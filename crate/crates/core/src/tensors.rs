//! Point-local tensors whose components are jets.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Slot {
    Up,
    Down,
}

impl Slot {
    pub fn flipped(self) -> Slot {
        match self {
            Slot::Up => Slot::Down,
            Slot::Down => Slot::Up,
        }
    }
}

/// Declared symmetry, checked by [`PointTensor::symmetry_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// `T_{ij} = T_{ji}`
    SymmetricPair,
    /// Antisymmetric in each pair, symmetric under pair exchange, first Bianchi.
    RiemannType,
}

/// Row-major index arithmetic for rank-`r` tensors in dimension `n`.
pub(crate) fn offset(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub(crate) fn decode(n: usize, mut off: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = off % n;
        off /= n;
    }
}

/// A tensor at one point, each component a truncated Taylor jet.
#[derive(Debug, Clone)]
pub struct PointTensor {
    dim: usize,
    slots: Vec<Slot>,
    comps: Vec<Jet>,
    symmetry: Symmetry,
    point: Arc<[f64]>,
}

impl PointTensor {
    pub fn new(
        dim: usize,
        slots: Vec<Slot>,
        comps: Vec<Jet>,
        symmetry: Symmetry,
        point: Arc<[f64]>,
    ) -> Result<Self> {
        let expected = dim.pow(slots.len() as u32);
        if comps.len() != expected {
            return Err(Error::Shape(format!(
                "rank {} in dimension {dim} needs {expected} components, got {}",
                slots.len(),
                comps.len()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.dim() != dim) {
            return Err(Error::Shape(format!(
                "component jet in {} variables, tensor dimension {dim}",
                c.dim()
            )));
        }
        if point.len() != dim {
            return Err(Error::Shape(format!(
                "base point of length {} in dimension {dim}",
                point.len()
            )));
        }
        Ok(Self {
            dim,
            slots,
            comps,
            symmetry,
            point,
        })
    }

    pub fn zeros(space: &Arc<JetSpace>, order: usize, slots: Vec<Slot>, point: Arc<[f64]>) -> Self {
        let dim = space.dim();
        let len = dim.pow(slots.len() as u32);
        Self {
            dim,
            slots,
            comps: vec![Jet::zero(space, order); len],
            symmetry: Symmetry::None,
            point,
        }
    }

    /// Builds every component from its index tuple.
    pub fn from_fn(
        dim: usize,
        slots: Vec<Slot>,
        point: Arc<[f64]>,
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> Self {
        let rank = slots.len();
        let len = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let comps = (0..len)
            .map(|off| {
                decode(dim, off, &mut idx);
                f(&idx)
            })
            .collect();
        Self {
            dim,
            slots,
            comps,
            symmetry: Symmetry::None,
            point,
        }
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn point(&self) -> &Arc<[f64]> {
        &self.point
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.comps[0].space()
    }

    /// Lowest component order.
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        debug_assert_eq!(idx.len(), self.rank());
        &self.comps[offset(self.dim, idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet {
        &mut self.comps[offset(self.dim, idx)]
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).value()
    }

    /// Component values at the base point, row-major.
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.comps
            .iter()
            .fold(0.0, |m, c| f64::max(m, c.value().abs()))
    }

    pub fn truncated(&self, order: usize) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.truncated(order))
            .collect::<Result<_>>()?;
        Ok(Self {
            comps,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
            ..self.clone()
        }
    }

    fn check_same_shape(&self, other: &PointTensor) -> Result<()> {
        if self.dim != other.dim || self.slots != other.slots {
            return Err(Error::Shape(format!(
                "slots {:?} in dimension {} vs {:?} in dimension {}",
                self.slots, self.dim, other.slots, other.dim
            )));
        }
        Ok(())
    }

    /// `self + s · other`, at the lower order.
    pub fn add_scaled(&self, other: &PointTensor, s: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a + &b.scale(s))
            .collect();
        Ok(Self {
            comps,
            symmetry: Symmetry::None,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &PointTensor) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    /// Tensor product; slots of `self` come first.
    pub fn outer(&self, other: &PointTensor) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "outer product of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let mut comps = Vec::with_capacity(self.comps.len() * other.comps.len());
        for a in &self.comps {
            for b in &other.comps {
                comps.push(a * b);
            }
        }
        Ok(Self {
            dim: self.dim,
            slots,
            comps,
            symmetry: Symmetry::None,
            point: self.point.clone(),
        })
    }

    /// Sums over slots `a` and `b`, which must have opposite variance.
    pub fn contract(&self, a: usize, b: usize) -> Result<Self> {
        let rank = self.rank();
        for s in [a, b] {
            if s >= rank {
                return Err(Error::InvalidSlot { slot: s, rank });
            }
        }
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "cannot contract slot {a} with itself"
            )));
        }
        if self.slots[a] == self.slots[b] {
            return Err(Error::SameVariance { a, b });
        }
        let n = self.dim;
        let slots: Vec<Slot> = self
            .slots
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != a && s != b)
            .map(|(_, &v)| v)
            .collect();
        let out_rank = slots.len();
        let order = self.order();
        let mut out_idx = vec![0; out_rank];
        let mut full = vec![0; rank];
        let comps = (0..n.pow(out_rank as u32))
            .map(|off| {
                decode(n, off, &mut out_idx);
                let mut it = out_idx.iter();
                for (s, slot) in full.iter_mut().enumerate() {
                    if s != a && s != b {
                        *slot = *it.next().expect("output index covers the free slots");
                    }
                }
                let mut acc = Jet::zero(self.space(), order);
                for k in 0..n {
                    full[a] = k;
                    full[b] = k;
                    acc.add_scaled(self.get(&full), 1.0);
                }
                acc
            })
            .collect();
        Ok(Self {
            dim: n,
            slots,
            comps,
            symmetry: Symmetry::None,
            point: self.point.clone(),
        })
    }

    /// Raises a lower slot with `g⁻¹` or lowers an upper slot with `g`.
    pub fn raise_lower(&self, slot: usize, metric: &MetricAtPoint) -> Result<Self> {
        let rank = self.rank();
        if slot >= rank {
            return Err(Error::InvalidSlot { slot, rank });
        }
        self.check_metric(metric)?;
        let m = match self.slots[slot] {
            Slot::Down => &metric.g_inv,
            Slot::Up => &metric.g,
        };
        let n = self.dim;
        let order = self.order().min(m.order());
        let mut slots = self.slots.clone();
        slots[slot] = slots[slot].flipped();
        let mut idx = vec![0; rank];
        let comps = (0..self.comps.len())
            .map(|off| {
                decode(n, off, &mut idx);
                let a = idx[slot];
                let mut acc = Jet::zero(self.space(), order);
                for b in 0..n {
                    idx[slot] = b;
                    acc.fma(m.get(&[a, b]), self.get(&idx));
                }
                acc
            })
            .collect();
        Ok(Self {
            dim: n,
            slots,
            comps,
            symmetry: self.symmetry,
            point: self.point.clone(),
        })
    }

    fn check_metric(&self, metric: &MetricAtPoint) -> Result<()> {
        if metric.dim() != self.dim {
            return Err(Error::Shape(format!(
                "metric of dimension {} applied to a tensor of dimension {}",
                metric.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `∇T` with the derivative index as a new leading lower slot.
    pub fn covariant_derivative(&self, metric: &MetricAtPoint) -> Result<Self> {
        self.check_metric(metric)?;
        let t_order = self.order();
        if t_order == 0 {
            return Err(Error::OrderExhausted {
                what: "covariant derivative",
                needed: 1,
                available: 0,
            });
        }
        let gamma = &metric.christoffel;
        let order = (t_order - 1).min(gamma.order());
        let n = self.dim;
        let rank = self.rank();
        let mut slots = Vec::with_capacity(rank + 1);
        slots.push(Slot::Down);
        slots.extend_from_slice(&self.slots);
        let partials: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                self.comps
                    .iter()
                    .map(|c| c.derivative(i))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let mut idx = vec![0; rank];
        let mut comps = Vec::with_capacity(n * self.comps.len());
        for (i, part) in partials.iter().enumerate() {
            for (off, p) in part.iter().enumerate() {
                decode(n, off, &mut idx);
                let mut acc = Jet::zero(self.space(), order);
                acc.add_scaled(p, 1.0);
                for s in 0..rank {
                    let a = idx[s];
                    for q in 0..n {
                        idx[s] = q;
                        match self.slots[s] {
                            Slot::Up => acc.fma(gamma.get(&[a, i, q]), self.get(&idx)),
                            Slot::Down => {
                                acc.fma_scaled(gamma.get(&[q, i, a]), self.get(&idx), -1.0)
                            }
                        }
                    }
                    idx[s] = a;
                }
                comps.push(acc);
            }
        }
        Ok(Self {
            dim: n,
            slots,
            comps,
            symmetry: Symmetry::None,
            point: self.point.clone(),
        })
    }

    /// Values with every slot flipped by the metric at the base point.
    fn flipped_values(&self, metric: &MetricAtPoint) -> Vec<f64> {
        let n = self.dim;
        let rank = self.rank();
        let mut v = self.values();
        let mut idx = vec![0; rank];
        for (s, slot) in self.slots.iter().enumerate() {
            let m = match slot {
                Slot::Down => &metric.g_inv_values,
                Slot::Up => &metric.g_values,
            };
            let prev = v.clone();
            for (off, out) in v.iter_mut().enumerate() {
                decode(n, off, &mut idx);
                let a = idx[s];
                let mut acc = 0.0;
                for b in 0..n {
                    idx[s] = b;
                    acc += m[a * n + b] * prev[offset(n, &idx)];
                }
                *out = acc;
            }
        }
        v
    }

    /// `|T|²` at the base point, contracting every slot with the metric.
    pub fn norm2(&self, metric: &MetricAtPoint) -> Result<f64> {
        self.check_metric(metric)?;
        let f = self.flipped_values(metric);
        Ok(self.comps.iter().zip(&f).map(|(c, x)| c.value() * x).sum())
    }

    /// Full contraction `⟨self, other⟩` as a jet.
    pub fn inner(&self, other: &PointTensor, metric: &MetricAtPoint) -> Result<Jet> {
        self.check_same_shape(other)?;
        self.check_metric(metric)?;
        let mut raised = other.clone();
        for s in 0..other.rank() {
            raised = raised.raise_lower(s, metric)?;
        }
        let order = self.order().min(raised.order());
        let mut acc = Jet::zero(self.space(), order);
        for (a, b) in self.comps.iter().zip(&raised.comps) {
            acc.fma(a, b);
        }
        Ok(acc)
    }

    /// Largest violation of the declared symmetry at the base point.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let v = |i: &[usize]| self.value(i);
        let mut worst: f64 = 0.0;
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::SymmetricPair => {
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((v(&[i, j]) - v(&[j, i])).abs());
                    }
                }
            }
            Symmetry::RiemannType => {
                let mut idx = [0; 4];
                for off in 0..n.pow(4) {
                    decode(n, off, &mut idx);
                    let [i, j, k, l] = idx;
                    let x = v(&idx);
                    worst = worst
                        .max((x + v(&[j, i, k, l])).abs())
                        .max((x + v(&[i, j, l, k])).abs())
                        .max((x - v(&[k, l, i, j])).abs())
                        .max((x + v(&[j, k, i, l]) + v(&[k, i, j, l])).abs());
                }
            }
        }
        worst
    }
}

/// Metric, inverse metric and Christoffel symbols at one point.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    g: PointTensor,
    g_inv: PointTensor,
    christoffel: PointTensor,
    g_values: Vec<f64>,
    g_inv_values: Vec<f64>,
}

impl MetricAtPoint {
    /// From the `n²` metric component jets (row-major) at `point`.
    pub fn from_components(point: Arc<[f64]>, comps: Vec<Jet>) -> Result<Self> {
        let n = point.len();
        let g = PointTensor::new(
            n,
            vec![Slot::Down, Slot::Down],
            comps,
            Symmetry::SymmetricPair,
            point.clone(),
        )?;
        let order = g.order();
        if order == 0 {
            return Err(Error::OrderExhausted {
                what: "Christoffel symbols",
                needed: 1,
                available: 0,
            });
        }
        let scale = 1.0 + g.comps.iter().map(Jet::max_abs).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..i {
                let d = g.get(&[i, j]) - g.get(&[j, i]);
                if d.max_abs() > 1e-12 * scale {
                    return Err(Error::Shape(format!(
                        "metric is not symmetric in ({i}, {j})"
                    )));
                }
            }
        }
        let g_values = g.values();
        if linalg::cholesky(&g_values, n).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let g_inv = invert(&g, order)?;
        let g_inv_values = g_inv.values();

        // Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})
        let dg: Vec<Vec<Jet>> = (0..n)
            .map(|a| {
                g.comps
                    .iter()
                    .map(|c| c.derivative(a))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let dgv = |a: usize, i: usize, j: usize| &dg[a][i * n + j];
        let space = g.space().clone();
        let mut first = vec![Jet::zero(&space, order - 1); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let s = &(dgv(i, j, l) + dgv(j, i, l)) - dgv(l, i, j);
                    first[(l * n + i) * n + j] = s.scale(0.5);
                    first[(l * n + j) * n + i] = first[(l * n + i) * n + j].clone();
                }
            }
        }
        let mut christoffel = PointTensor::zeros(
            &space,
            order - 1,
            vec![Slot::Up, Slot::Down, Slot::Down],
            point,
        );
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = Jet::zero(&space, order - 1);
                    for l in 0..n {
                        acc.fma(g_inv.get(&[k, l]), &first[(l * n + i) * n + j]);
                    }
                    *christoffel.get_mut(&[k, j, i]) = acc.clone();
                    *christoffel.get_mut(&[k, i, j]) = acc;
                }
            }
        }
        Ok(Self {
            g,
            g_inv,
            christoffel,
            g_values,
            g_inv_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn point(&self) -> &Arc<[f64]> {
        self.g.point()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.g.space()
    }

    pub fn g(&self) -> &PointTensor {
        &self.g
    }

    pub fn g_inv(&self) -> &PointTensor {
        &self.g_inv
    }

    /// `Γ^k_{ij}` with slots `[Up, Down, Down]`, one order below the metric.
    pub fn christoffel(&self) -> &PointTensor {
        &self.christoffel
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn g_inv_values(&self) -> &[f64] {
        &self.g_inv_values
    }

    /// `√det g` at the base point.
    pub fn volume_density(&self) -> f64 {
        libm::sqrt(linalg::det(&self.g_values, self.dim()))
    }
}

/// Gauss–Jordan inverse of a symmetric positive definite jet matrix.
fn invert(g: &PointTensor, order: usize) -> Result<PointTensor> {
    let n = g.dim;
    let space = g.space().clone();
    let mut a: Vec<Jet> = g
        .comps
        .iter()
        .map(|c| c.truncated(order))
        .collect::<Result<_>>()?;
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|off| Jet::constant(&space, order, if off / n == off % n { 1.0 } else { 0.0 }))
        .collect();
    for c in 0..n {
        let p = a[c * n + c].recip()?;
        for k in 0..n {
            a[c * n + k] = &a[c * n + k] * &p;
            inv[c * n + k] = &inv[c * n + k] * &p;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r * n + c].clone();
            for k in 0..n {
                let (ak, ik) = (a[c * n + k].clone(), inv[c * n + k].clone());
                a[r * n + k].fma_scaled(&f, &ak, -1.0);
                inv[r * n + k].fma_scaled(&f, &ik, -1.0);
            }
        }
    }
    // Symmetrize away rounding asymmetry.
    for i in 0..n {
        for j in 0..i {
            let s = (&inv[i * n + j] + &inv[j * n + i]).scale(0.5);
            inv[i * n + j] = s.clone();
            inv[j * n + i] = s;
        }
    }
    PointTensor::new(
        n,
        vec![Slot::Up, Slot::Up],
        inv,
        Symmetry::SymmetricPair,
        g.point.clone(),
    )
}
