//! Row-stochastic matrices: one probability row over GF(q) per code symbol.

use crate::error::{Error, Result};

/// Entries are floored at this value before rows are normalized, so no exact
/// zeros reach the decoder.
pub const PROB_FLOOR: f64 = 1e-30;

/// Row-major matrix whose rows are distributions over the `q` field elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix {
    q: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    pub fn uniform(rows: usize, q: usize) -> Self {
        ProbMatrix {
            q,
            data: vec![1.0 / q as f64; rows * q],
        }
    }

    /// Builds a matrix from explicit rows, normalizing each one.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * q);
        for r in rows {
            if r.len() != q {
                return Err(Error::LengthMismatch { expected: q, got: r.len() });
            }
            if r.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::invalid("probabilities must be finite and nonnegative"));
            }
            data.extend_from_slice(r);
        }
        let mut m = ProbMatrix { q, data };
        for i in 0..m.rows() {
            normalize_floored(m.row_mut(i));
        }
        Ok(m)
    }

    /// One-hot rows at the given symbols (floored like channel likelihoods).
    pub fn one_hot(symbols: &[u8], q: usize) -> Self {
        let mut m = ProbMatrix {
            q,
            data: vec![0.0; symbols.len() * q],
        };
        for (i, &s) in symbols.iter().enumerate() {
            let row = m.row_mut(i);
            row[s as usize] = 1.0;
            normalize_floored(row);
        }
        m
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn rows(&self) -> usize {
        if self.q == 0 {
            0
        } else {
            self.data.len() / self.q
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.q.max(1))
    }

    /// Row-wise argmax, lowest index on ties.
    pub fn hard_decision(&self) -> Vec<u8> {
        self.iter_rows().map(|r| argmax(r) as u8).collect()
    }

    pub(crate) fn from_raw(q: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % q, 0);
        ProbMatrix { q, data }
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Scales a nonnegative row to sum 1, flooring tiny entries first.
///
/// A row that is all zero (or not finite) becomes uniform.
pub fn normalize_floored(row: &mut [f64]) {
    let max = row.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        let u = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|v| *v = u);
        return;
    }
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v / max).max(PROB_FLOOR);
        sum += *v;
    }
    let inv = 1.0 / sum;
    row.iter_mut().for_each(|v| *v *= inv);
}

/// Converts a row of log-likelihoods in place into normalized probabilities.
pub fn normalize_log_row(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in row.iter_mut() {
        *v = (*v - max).exp();
    }
    normalize_floored(row);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_floor() {
        let m = ProbMatrix::from_rows(&[vec![2.0, 2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let r0 = m.row(0);
        assert!((r0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r0[2] > 0.0 && r0[2] < 1e-29);
        assert_eq!(m.row(1), &[0.25; 4]);
        assert_eq!(m.hard_decision(), vec![0, 0]);
        assert!(ProbMatrix::from_rows(&[vec![1.0, -1.0]]).is_err());
    }

    #[test]
    fn log_rows() {
        let mut r = vec![-1000.0, -1000.0 + 2f64.ln(), f64::NEG_INFINITY];
        normalize_log_row(&mut r);
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(r[2] > 0.0);
    }
}
