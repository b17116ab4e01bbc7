//! Order-fixed pairwise summation.
//!
//! Results depend only on the sequence of pushed values, never on timing or
//! thread count, so repeated runs agree bit for bit.

use alloc::vec;
use alloc::vec::Vec;

const BLOCK: usize = 32;

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Streaming pairwise accumulator for `width` parallel sums.
///
/// Values arrive in blocks of [`BLOCK`] which are summed plainly; block sums
/// are merged like a binary counter, so memory stays logarithmic in the
/// number of pushes and the rounding error grows like `log n`.
#[derive(Debug, Clone)]
pub struct PairwiseAccumulator {
    width: usize,
    block: Vec<f64>,
    filled: usize,
    /// `levels[k]` holds a partial sum over `2^k` blocks, when occupied.
    levels: Vec<Option<Vec<f64>>>,
}

impl PairwiseAccumulator {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            block: vec![0.0; width],
            filled: 0,
            levels: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Adds one row of `width` values.
    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.width);
        for (b, x) in self.block.iter_mut().zip(row) {
            *b += x;
        }
        self.filled += 1;
        if self.filled == BLOCK {
            let carry = core::mem::replace(&mut self.block, vec![0.0; self.width]);
            self.filled = 0;
            self.carry(carry);
        }
    }

    fn carry(&mut self, mut carry: Vec<f64>) {
        for level in self.levels.iter_mut() {
            match level.take() {
                None => {
                    *level = Some(carry);
                    return;
                }
                Some(prev) => {
                    for (c, p) in carry.iter_mut().zip(&prev) {
                        *c = p + *c;
                    }
                }
            }
        }
        self.levels.push(Some(carry));
    }

    /// Totals, merging low levels first.
    pub fn finish(&self) -> Vec<f64> {
        let mut total = self.block.clone();
        for level in self.levels.iter().flatten() {
            for (t, l) in total.iter_mut().zip(level) {
                *t = l + *t;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_integer_sums() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        let mut acc = PairwiseAccumulator::new(2);
        for x in &xs {
            acc.push(&[*x, -2.0 * x]);
        }
        assert_eq!(acc.finish(), vec![500500.0, -1001000.0]);
    }

    #[test]
    fn small_terms_survive() {
        let n = 1 << 20;
        let mut acc = PairwiseAccumulator::new(1);
        for _ in 0..n {
            acc.push(&[0.1]);
        }
        let naive: f64 = (0..n).map(|_| 0.1).sum();
        let exact = 0.1 * n as f64;
        let pw = acc.finish()[0];
        assert!((pw - exact).abs() < (naive - exact).abs());
        assert!((pw - exact).abs() / exact < 1e-14);
    }
}
