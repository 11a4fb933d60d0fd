//! Deterministic random source built on MT19937.
//!
//! Every simulation in the crate draws from a [`SimRng`]: 32-bit Mersenne
//! Twister words mapped to `[0, 1)` as `x / 2^32`, standard normals by the
//! Box–Muller transform (both variates of a pair are used), and uniform
//! vectors in the unit ball by rejection from the enclosing cube.
//!
//! Equal seeds give identical streams on every platform.

use rand_mt::Mt;
use std::f64::consts::PI;

const TWO_POW_32: f64 = 4_294_967_296.0;

/// Single-owner generator state. Replicas that run in parallel each own one,
/// seeded `base_seed + replica_index`.
#[derive(Clone)]
pub struct SimRng {
    mt: Mt,
    cached_normal: Option<f64>,
}

impl std::fmt::Debug for SimRng {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimRng")
            .field("cached_normal", &self.cached_normal)
            .finish_non_exhaustive()
    }
}

impl SimRng {
    pub fn new(seed: u32) -> Self {
        Self {
            mt: Mt::new(seed),
            cached_normal: None,
        }
    }

    /// Seed for replica `index` of an ensemble started from `base`.
    pub fn for_replica(base: u32, index: usize) -> Self {
        Self::new(base.wrapping_add(index as u32))
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.mt.next_u32()
    }

    /// Uniform on `[0, 1)`: the raw word divided by 2^32.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        unit_from_u32(self.next_u32())
    }

    /// Uniform integer in `0..n` (`n > 0`), by rejection so every value is
    /// equally likely.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index on empty range");
        let n32 = n as u64;
        let zone = (1u64 << 32) - ((1u64 << 32) % n32);
        loop {
            let x = self.next_u32() as u64;
            if x < zone {
                return (x % n32) as usize;
            }
        }
    }

    /// Standard normal variate; the sine partner of each Box–Muller pair is
    /// cached and returned by the next call.
    pub fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let mut u1 = self.next_uniform();
        if u1 == 0.0 {
            u1 = 1.0 / TWO_POW_32;
        }
        let u2 = self.next_uniform();
        let (z0, z1) = box_muller(u1, u2);
        self.cached_normal = Some(z1);
        z0
    }

    /// Fills `out` with independent standard normals.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.next_standard_normal();
        }
    }

    /// Uniformly distributed point of the closed unit ball in `R^dim`.
    pub fn random_unit_ball_vector(&mut self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        self.fill_unit_ball(&mut v);
        v
    }

    /// Writes a uniform unit-ball point into `out` (dimension = `out.len()`).
    pub fn fill_unit_ball(&mut self, out: &mut [f64]) {
        assert!(!out.is_empty(), "unit ball of dimension 0");
        loop {
            let mut r2 = 0.0;
            for x in out.iter_mut() {
                *x = 2.0 * self.next_uniform() - 1.0;
                r2 += *x * *x;
            }
            if r2 <= 1.0 {
                return;
            }
        }
    }
}

/// The documented 32-bit to unit-interval mapping.
#[inline]
pub fn unit_from_u32(x: u32) -> f64 {
    x as f64 / TWO_POW_32
}

/// Box–Muller transform of two uniforms: `(r cos θ, r sin θ)` with
/// `r = sqrt(-2 ln u1)` and `θ = 2π u2`.
#[inline]
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}
