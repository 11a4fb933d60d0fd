//! Relative entropy, slit diffraction intensities and entropy rates of
//! finite Markov chains.
//!
//! KL divergences are reported in bits; entropy production and flow rates in
//! nats. Use [`bits_to_nats`] / [`nats_to_bits`] to move between them.

use crate::error::{Error, Result};
use crate::quadrature;
use std::f64::consts::{LN_2, PI};

pub fn bits_to_nats(bits: f64) -> f64 {
    bits * LN_2
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

/// Normalized intensity of one or two slits with spacing-to-width ratio `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitModel {
    slits: u32,
    q: f64,
}

impl SlitModel {
    pub fn new(slits: u32, q: f64) -> Result<Self> {
        if !(slits == 1 || slits == 2) {
            return Err(Error::InvalidConfig(format!(
                "normalized intensity defined for 1 or 2 slits, got {slits}"
            )));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidConfig(format!("slit ratio q must be >= 1, got {q}")));
        }
        Ok(Self { slits, q })
    }

    pub fn single(q: f64) -> Result<Self> {
        Self::new(1, q)
    }

    pub fn double(q: f64) -> Result<Self> {
        Self::new(2, q)
    }

    pub fn slits(&self) -> u32 {
        self.slits
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Positions in `[lower, upper]` where `cos(q x) = 0`; the double-slit
    /// intensity vanishes there.
    pub fn dark_fringes(&self, lower: f64, upper: f64) -> Vec<f64> {
        let period = PI / self.q;
        let first = ((lower / period) - 0.5).ceil() as i64;
        let last = ((upper / period) - 0.5).floor() as i64;
        (first..=last).map(|k| (k as f64 + 0.5) * period).collect()
    }
}

/// `sin²x / (π x²)`, with value `1/π` at the origin.
pub fn single_slit(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0 / PI;
    }
    let s = x.sin() / x;
    s * s / PI
}

/// `sin²x · sin²(2qx) / (2π x² sin²(qx))`, with removable singularities
/// replaced by their limits.
pub fn double_slit(q: f64, x: f64) -> f64 {
    let s = q * x;
    let sin_s = s.sin();
    let ratio = if sin_s == 0.0 { 2.0 * s.cos() } else { (2.0 * s).sin() / sin_s };
    single_slit(x) * ratio * ratio / 2.0
}

/// Intensity of `model` at `x`.
pub fn slit_intensity(model: &SlitModel, x: f64) -> f64 {
    match model.slits {
        1 => single_slit(x),
        _ => double_slit(model.q, x),
    }
}

/// Unnormalized `N`-slit intensity `I0 sin²Y sin²(NqY) / (N² Y² sin²(qY))`
/// in the reduced coordinate `Y`.
pub fn n_slit_intensity(slits: u32, q: f64, peak: f64, y: f64) -> f64 {
    let n = slits as f64;
    let envelope = if y == 0.0 { 1.0 } else { (y.sin() / y).powi(2) };
    let s = q * y;
    let sin_s = s.sin();
    let grating = if sin_s == 0.0 {
        // sin(Nθ)/sin(θ) → ±N at θ = mπ
        1.0
    } else {
        ((n * s).sin() / (n * sin_s)).powi(2)
    };
    peak * envelope * grating
}

/// Reduced coordinate `Y = π s y / (λ l)` for slit width `s`, wavelength
/// `λ` and screen distance `l`.
pub fn reduced_coordinate(y: f64, slit_width: f64, wavelength: f64, distance: f64) -> f64 {
    PI * slit_width * y / (wavelength * distance)
}

/// Finite integration window and a bound on the mass of the integrand
/// outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlEstimate {
    pub bits: f64,
    /// Quadrature error estimate on the window.
    pub quadrature_error: f64,
    /// Bound on the neglected tails.
    pub tail_bound: f64,
    pub intervals: usize,
}

impl KlEstimate {
    pub fn error_bound(&self) -> f64 {
        self.quadrature_error + self.tail_bound
    }
}

const MAX_INTERVALS: usize = 8_000_000;

/// `∫ p log₂(p/q)` over the window, splitting at `singular_points`.
///
/// `0 · log 0` is taken as 0. The quadrature is asked for `tol` minus the
/// window's tail bound.
pub fn kl_continuous(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    window: Window,
    singular_points: &[f64],
    tol: f64,
) -> Result<KlEstimate> {
    let budget = tol - window.tail_bound;
    if !(budget > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tail bound {:e} leaves no quadrature budget for tolerance {tol:e}",
            window.tail_bound
        )));
    }
    let mut bad = None;
    let integrand = |x: f64| {
        let px = p(x);
        if px <= 0.0 {
            return 0.0;
        }
        let qx = q(x);
        if qx <= 0.0 {
            bad.get_or_insert(x);
            return 0.0;
        }
        px * (px / qx).log2()
    };
    let r = quadrature::integrate(integrand, window.lower, window.upper, singular_points, budget, MAX_INTERVALS)?;
    if let Some(x) = bad {
        return Err(Error::NonFinite(format!("reference density vanishes at x = {x} where p > 0")));
    }
    Ok(KlEstimate {
        bits: r.value,
        quadrature_error: r.error,
        tail_bound: window.tail_bound,
        intervals: r.intervals,
    })
}

/// Bound on `∫_{|x|>X} |I₁ log₂(I₁/I₂)|` for the slit pair.
///
/// The integrand equals `I₁ (L(qx) - 1)` with `L = -log₂ cos²`, whose mean
/// over any period `π/q` is 2, and `I₁ ≤ 1/(π x²)`.
pub fn slit_tail_bound(q: f64, half_width: f64) -> f64 {
    let period = PI / q;
    2.0 / PI * (3.0 / half_width + 2.0 * period / (half_width * half_width))
}

/// Smallest power-of-two multiple of the fringe period with tail bound
/// below `target`.
pub fn slit_window(q: f64, target: f64) -> Window {
    let mut half_width = PI / q;
    while slit_tail_bound(q, half_width) > target {
        half_width *= 2.0;
    }
    // shrink back by bisection to the tightest width meeting the target
    let (mut lo, mut hi) = (half_width / 2.0, half_width);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if slit_tail_bound(q, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Window {
        lower: -hi,
        upper: hi,
        tail_bound: slit_tail_bound(q, hi),
    }
}

/// `D(I₁ ∥ I₂)` in bits for the slit ratio `q`, to absolute accuracy `tol`.
pub fn slit_relative_entropy(q: f64, tol: f64) -> Result<KlEstimate> {
    let pair = SlitModel::double(q)?;
    let window = slit_window(q, tol / 10.0);
    let fringes = pair.dark_fringes(window.lower, window.upper);
    kl_continuous(single_slit, |x| double_slit(q, x), window, &fringes, tol)
}

/// `Σ P log₂(P/Q)` with `0 log 0 = 0`.
///
/// Entries need only be nonnegative; the formula is applied as written
/// even when the vectors are not normalized.
pub fn kl_discrete(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut sum = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if !(pi.is_finite() && qi.is_finite()) || pi < 0.0 || qi < 0.0 {
            return Err(Error::NonFinite(format!("entry {i} is negative or not finite")));
        }
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::NotAbsolutelyContinuous(i));
        }
        sum += pi * (pi / qi).log2();
    }
    Ok(sum)
}

/// Transition matrix and current distribution over `S` states.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    states: usize,
    p: Vec<f64>,
    mu: Vec<f64>,
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl FiniteChain {
    /// `p` is row-major `S × S`.
    pub fn new(p: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let states = mu.len();
        if states == 0 {
            return Err(Error::InvalidConfig("chain needs at least one state".into()));
        }
        if p.len() != states * states {
            return Err(Error::DimensionMismatch {
                expected: states * states,
                got: p.len(),
            });
        }
        if p.iter().chain(&mu).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidConfig("entries must be finite and nonnegative".into()));
        }
        for (x, row) in p.chunks_exact(states).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidConfig(format!("row {x} sums to {s}")));
            }
        }
        let m: f64 = mu.iter().sum();
        if (m - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidConfig(format!("distribution sums to {m}")));
        }
        Ok(Self { states, p, mu })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.states + y]
    }

    pub fn distribution(&self) -> &[f64] {
        &self.mu
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.states..(x + 1) * self.states]
    }

    pub fn column(&self, y: usize) -> Vec<f64> {
        (0..self.states).map(|x| self.transition(x, y)).collect()
    }

    /// Same kernel with a different distribution.
    pub fn with_distribution(&self, mu: Vec<f64>) -> Result<Self> {
        Self::new(self.p.clone(), mu)
    }

    fn check_reversible(&self) -> Result<()> {
        for x in 0..self.states {
            for y in 0..self.states {
                if self.transition(x, y) > 0.0 && self.transition(y, x) == 0.0 {
                    return Err(Error::Irreversible { from: x, to: y });
                }
            }
        }
        Ok(())
    }

    /// `Σ_y p(x,y) ln(p(x,y)/p(y,x))` in nats.
    pub fn local_flow(&self, x: usize) -> Result<f64> {
        self.check_reversible()?;
        Ok(self.local_flow_unchecked(x))
    }

    fn local_flow_unchecked(&self, x: usize) -> f64 {
        (0..self.states)
            .filter(|&y| self.transition(x, y) > 0.0)
            .map(|y| {
                let fwd = self.transition(x, y);
                fwd * (fwd / self.transition(y, x)).ln()
            })
            .sum()
    }
}

/// Entropy production and flow rates, both in nats per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRates {
    pub production: f64,
    pub flow: f64,
}

/// Production rate `½ Σ (μp − μ'p') ln(μp / μ'p')` and flow rate
/// `Σ μ(x) I(x)`.
///
/// Production is infinite when probability flows out of a state into one
/// with zero mass.
pub fn entropy_rates(chain: &FiniteChain) -> Result<EntropyRates> {
    chain.check_reversible()?;
    let s = chain.states;
    let mu = &chain.mu;
    let mut production = 0.0;
    for x in 0..s {
        for y in 0..s {
            let fwd = mu[x] * chain.transition(x, y);
            let bwd = mu[y] * chain.transition(y, x);
            if fwd == bwd {
                continue;
            }
            if fwd == 0.0 || bwd == 0.0 {
                production = f64::INFINITY;
                continue;
            }
            production += 0.5 * (fwd - bwd) * (fwd / bwd).ln();
        }
    }
    let flow = (0..s).map(|x| mu[x] * chain.local_flow_unchecked(x)).sum();
    Ok(EntropyRates { production, flow })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn intensity_limits() {
        assert_eq!(single_slit(0.0), 1.0 / PI);
        assert!(close(double_slit(1.0, 0.0), 2.0 / PI, 1e-15));
        assert!(close(double_slit(2.0, 0.0), 2.0 / PI, 1e-15));
        // continuity across the removable point
        assert!(close(single_slit(1e-9), 1.0 / PI, 1e-12));
        assert!(close(double_slit(1.0, 1e-9), 2.0 / PI, 1e-12));
    }

    #[test]
    fn double_slit_limit_at_interior_zero_of_sin() {
        let q = 1.0;
        let x = PI;
        let near = double_slit(q, x + 1e-7);
        let expect = single_slit(x + 1e-7) * 4.0 * (q * x).cos().powi(2) / 2.0;
        assert!(close(near, expect, 1e-12));
    }

    #[test]
    fn intensities_integrate_to_one() {
        for q in [1.0, 2.0] {
            // tails: (2/(π X)) times the mean of the periodic numerator
            let x = 2.0e4;
            let fringes = SlitModel::double(q).unwrap().dark_fringes(-x, x);
            let i1 = quadrature::integrate(single_slit, -x, x, &fringes, 1e-7, 4_000_000).unwrap();
            let i2 = quadrature::integrate(|t| double_slit(q, t), -x, x, &fringes, 1e-7, 4_000_000).unwrap();
            let tail1 = 1.0 / (PI * x);
            let tail2 = if q == 1.0 { 0.5 / (PI * x) } else { 1.0 / (PI * x) };
            assert!(close(i1.value + tail1, 1.0, 1e-6), "{}", i1.value);
            assert!(close(i2.value + tail2, 1.0, 1e-6), "{}", i2.value);
        }
    }

    #[test]
    fn n_slit_reduces_to_closed_forms() {
        for &y in &[0.0, 0.3, 1.7, PI, 5.0] {
            assert!(close(n_slit_intensity(1, 1.5, 1.0, y), PI * single_slit(y), 1e-12));
            let q = 2.0;
            assert!(close(n_slit_intensity(2, q, 2.0 / PI, y), double_slit(q, y), 1e-12));
        }
    }

    #[test]
    fn model_validation() {
        assert!(SlitModel::new(3, 1.0).is_err());
        assert!(SlitModel::new(2, 0.5).is_err());
        let m = SlitModel::new(2, 2.0).unwrap();
        assert_eq!(slit_intensity(&m, 0.0), double_slit(2.0, 0.0));
    }

    #[test]
    fn dark_fringes_are_zeros_of_cos() {
        let m = SlitModel::double(2.0).unwrap();
        let z = m.dark_fringes(-3.0, 3.0);
        assert_eq!(z.len(), 4);
        for x in z {
            assert!((2.0 * x).cos().abs() < 1e-14);
        }
    }

    #[test]
    fn tail_bound_dominates_measured_tail() {
        for q in [1.0, 2.0] {
            let x = 200.0;
            let fringes = SlitModel::double(q).unwrap().dark_fringes(x, 8.0 * x);
            let f = |t: f64| {
                let p = single_slit(t);
                if p == 0.0 { 0.0 } else { (p * (p / double_slit(q, t)).log2()).abs() }
            };
            let piece = quadrature::integrate(f, x, 8.0 * x, &fringes, 1e-9, 4_000_000).unwrap();
            assert!(2.0 * piece.value < slit_tail_bound(q, x), "{} vs {}", piece.value, slit_tail_bound(q, x));
        }
    }

    #[test]
    fn self_divergence_is_zero() {
        let g = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        let w = Window { lower: -12.0, upper: 12.0, tail_bound: 1e-12 };
        let r = kl_continuous(g, g, w, &[], 1e-9).unwrap();
        assert_eq!(r.bits, 0.0);
    }

    #[test]
    fn gaussian_shift_divergence() {
        // D(N(0,1) ∥ N(1,1)) = 1/2 nat
        let g0 = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        let g1 = |x: f64| (-(x - 1.0) * (x - 1.0) / 2.0).exp() / (2.0 * PI).sqrt();
        let w = Window { lower: -30.0, upper: 30.0, tail_bound: 1e-12 };
        let r = kl_continuous(g0, g1, w, &[], 1e-9).unwrap();
        assert!(close(r.bits, nats_to_bits(0.5), 1e-8));
    }

    #[test]
    fn kl_discrete_examples() {
        assert_eq!(kl_discrete(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let v = kl_discrete(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!(close(v, 0.5 + 0.5 * (2.0f64 / 3.0).log2(), 1e-15));
        assert!(close(v, 0.20752, 1e-5));
        assert_eq!(kl_discrete(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(kl_discrete(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::NotAbsolutelyContinuous(1)));
        assert!(kl_discrete(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn two_state_rates_by_direct_summation() {
        let chain = FiniteChain::new(vec![0.6, 0.4, 0.2, 0.8], vec![0.5, 0.5]).unwrap();
        let r = entropy_rates(&chain).unwrap();
        let f: f64 = 0.5 * 0.4;
        let b = 0.5 * 0.2;
        let production = (f - b) * (f / b).ln();
        let flow = 0.5 * 0.4 * (2.0f64).ln() + 0.5 * 0.2 * (0.5f64).ln();
        assert!(close(r.production, production, 1e-15));
        assert!(close(r.flow, flow, 1e-15));
    }

    #[test]
    fn detailed_balance_has_no_production() {
        // stationary distribution of the two-state chain is (1/3, 2/3)
        let chain = FiniteChain::new(vec![0.6, 0.4, 0.2, 0.8], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!(entropy_rates(&chain).unwrap().production.abs() < 1e-16);
    }

    #[test]
    fn symmetric_kernel_has_no_flow() {
        let chain = FiniteChain::new(vec![0.5, 0.3, 0.2, 0.3, 0.4, 0.3, 0.2, 0.3, 0.5], vec![0.7, 0.2, 0.1]).unwrap();
        assert_eq!(entropy_rates(&chain).unwrap().flow, 0.0);
    }

    #[test]
    fn irreversible_pair_rejected() {
        let chain = FiniteChain::new(vec![0.5, 0.5, 0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(entropy_rates(&chain), Err(Error::Irreversible { from: 0, to: 1 }));
    }

    #[test]
    fn chain_validation() {
        assert!(FiniteChain::new(vec![0.5, 0.4, 0.2, 0.8], vec![0.5, 0.5]).is_err());
        assert!(FiniteChain::new(vec![1.0], vec![0.9]).is_err());
        assert!(FiniteChain::new(vec![1.0, 0.0], vec![1.0]).is_err());
    }
}
