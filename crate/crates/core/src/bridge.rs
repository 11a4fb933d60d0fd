//! Discrete Brownian bridge by the Lévy construction, pinned at copy 0.
//!
//! In natural units (m = k = T = ħ = 1) the recurrence for `1 <= n < K` is
//!
//! ```text
//! a_n = (K-n)/(K-n+1) · a_{n-1} + sqrt((K-n) / (K (K-n+1))) · η_n
//! ```
//!
//! with `a_0 = 0` and `η_n` a vector of independent standard normals. The
//! return to `a_0` after step `K` is implied and not stored. The marginal
//! variance per coordinate is `n (K-n) / K²`.

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// `K` points in `R^d`, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSample {
    points: Vec<f64>,
    copies: usize,
    dim: usize,
}

impl BridgeSample {
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.points[n * self.dim..(n + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.points
    }

    /// Translates every point by `offset`.
    pub fn shift(mut self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: offset.len(),
            });
        }
        for p in self.points.chunks_exact_mut(self.dim) {
            for (x, o) in p.iter_mut().zip(offset) {
                *x += o;
            }
        }
        Ok(self)
    }
}

/// Per-step standard deviation `sqrt((K-n) / (K (K-n+1)))`.
#[inline]
pub fn step_sigma(copies: usize, n: usize) -> f64 {
    let k = copies as f64;
    let rem = (copies - n) as f64;
    (rem / (k * (rem + 1.0))).sqrt()
}

/// Closed-form marginal variance `n (K-n) / K²` of coordinate `n`.
pub fn marginal_variance(copies: usize, n: usize) -> f64 {
    let k = copies as f64;
    let n = n as f64;
    n * (k - n) / (k * k)
}

fn check(copies: usize, dim: usize) -> Result<()> {
    if copies == 0 {
        return Err(Error::InvalidConfig("bridge needs at least one copy".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidConfig("bridge dimension must be positive".into()));
    }
    Ok(())
}

/// Draws a fresh bridge of `copies` points in `R^dim`.
pub fn levy_bridge(copies: usize, dim: usize, rng: &mut SimRng) -> Result<BridgeSample> {
    check(copies, dim)?;
    let mut points = vec![0.0; copies * dim];
    fill_levy_bridge(&mut points, copies, dim, rng);
    Ok(BridgeSample { points, copies, dim })
}

/// Builds a bridge from explicit noise vectors `η_1..η_{K-1}` (point-major,
/// `(K-1)·dim` values).
pub fn levy_bridge_from_noise(copies: usize, dim: usize, noise: &[f64]) -> Result<BridgeSample> {
    check(copies, dim)?;
    if noise.len() != (copies - 1) * dim {
        return Err(Error::DimensionMismatch {
            expected: (copies - 1) * dim,
            got: noise.len(),
        });
    }
    let mut points = vec![0.0; copies * dim];
    let mut it = noise.iter().copied();
    recur(&mut points, copies, dim, || it.next().unwrap());
    Ok(BridgeSample { points, copies, dim })
}

/// In-place variant used by the jump processes; `out.len()` must be
/// `copies * dim`.
pub fn fill_levy_bridge(out: &mut [f64], copies: usize, dim: usize, rng: &mut SimRng) {
    debug_assert_eq!(out.len(), copies * dim);
    recur(out, copies, dim, || rng.next_standard_normal());
}

fn recur(out: &mut [f64], copies: usize, dim: usize, mut eta: impl FnMut() -> f64) {
    out[..dim].fill(0.0);
    for n in 1..copies {
        let rem = (copies - n) as f64;
        let damp = rem / (rem + 1.0);
        let sigma = step_sigma(copies, n);
        let (prev, cur) = out[(n - 1) * dim..(n + 1) * dim].split_at_mut(dim);
        for (x, p) in cur.iter_mut().zip(prev.iter()) {
            *x = damp * p + sigma * eta();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_copy_is_origin() {
        let mut rng = SimRng::new(1);
        let b = levy_bridge(1, 3, &mut rng).unwrap();
        assert_eq!(b.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_copies_unit_noise() {
        let b = levy_bridge_from_noise(2, 1, &[1.0]).unwrap();
        assert_eq!(b.as_slice(), &[0.0, 0.5]);
    }

    #[test]
    fn rejects_empty_shapes() {
        let mut rng = SimRng::new(1);
        assert!(levy_bridge(0, 1, &mut rng).is_err());
        assert!(levy_bridge(4, 0, &mut rng).is_err());
    }

    #[test]
    fn shift_translates() {
        let b = levy_bridge_from_noise(2, 1, &[1.0]).unwrap();
        assert_eq!(b.clone().shift(&[0.0]).unwrap(), b);
        assert_eq!(b.shift(&[3.0]).unwrap().as_slice(), &[3.0, 3.5]);
    }

    #[test]
    fn shift_dimension_mismatch() {
        let b = levy_bridge_from_noise(2, 1, &[1.0]).unwrap();
        assert!(matches!(
            b.shift(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn shift_round_trip_is_exact_for_dyadic_offsets() {
        let mut rng = SimRng::new(4);
        let b = levy_bridge(16, 2, &mut rng).unwrap();
        let back = b.clone().shift(&[0.25, -8.0]).unwrap().shift(&[-0.25, 8.0]).unwrap();
        for (x, y) in back.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() <= 1e-14);
        }
    }
}
