//! Directed two-particle jump processes on ring-polymer copies.
//!
//! Two distinguishable particles `a` and `b` are each represented by `K`
//! imaginary-time copies. At every jump two copy indices `n1`, `n2` are
//! chosen and the distances `‖a_n1 - b_n1‖`, `‖a_n2 - b_n2‖` compared. With
//! probability `alpha` the *forward* branch is taken, otherwise the
//! *backward* one:
//!
//! * kind [`ProcessKind::N`] redraws both particles as fresh Lévy bridges,
//!   pinned so that one copy of each particle keeps its old position;
//! * kind [`ProcessKind::W`] heat-bath resamples one copy of each particle
//!   from its two ring neighbours.
//!
//! With `alpha = 1/2` both branches are equally likely and the dynamics is
//! the ordinary free-particle path-integral sampler; `alpha > 1/2` makes the
//! pair drift. [`Process`] keeps the flip counters `F`, `R`, `C_n` online.

use crate::bridge::fill_levy_bridge;
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    /// Whole-bridge redraw with pinning.
    N,
    /// Single-copy heat-bath resampling.
    W,
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(Self::N),
            "W" | "w" => Ok(Self::W),
            other => Err(Error::InvalidConfig(format!("unknown process kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::N => "N",
            Self::W => "W",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    pub kind: ProcessKind,
    /// Choose `n1 < n2` uniformly among all pairs instead of `n2 = n1 + j`.
    pub pair_mode: bool,
    /// Copy count `K`.
    pub copies: usize,
    /// Offset `j`; ignored in pair mode except for the `C_n` bookkeeping.
    pub offset: usize,
    /// Forward-branch probability, `1/2 <= alpha <= 1`.
    pub alpha: f64,
    /// Initial separation of the two particles along the first axis.
    pub delta: f64,
    pub dim: usize,
}

impl ProcessConfig {
    /// Offset-mode configuration with the default separation and `d = 1`.
    pub fn new(kind: ProcessKind, copies: usize, offset: usize, alpha: f64) -> Self {
        Self {
            kind,
            pair_mode: false,
            copies,
            offset,
            alpha,
            delta: default_delta(copies),
            dim: 1,
        }
    }

    /// Pair-mode `N` process (`alpha = 1` and `alpha = 1/2` give the two
    /// named special cases).
    pub fn pair_mode(copies: usize, alpha: f64) -> Self {
        Self {
            kind: ProcessKind::N,
            pair_mode: true,
            copies,
            offset: 1.min(copies.saturating_sub(1)),
            alpha,
            delta: default_delta(copies),
            dim: 1,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.copies < 2 {
            return bad(format!("need K >= 2 copies, got {}", self.copies));
        }
        if !self.pair_mode && (self.offset == 0 || self.offset >= self.copies) {
            return bad(format!("offset j must satisfy 0 < j < K, got j={} K={}", self.offset, self.copies));
        }
        if self.pair_mode && self.kind == ProcessKind::W {
            return bad("the W process is defined for offset mode only".into());
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [1/2, 1], got {}", self.alpha));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        Ok(())
    }
}

/// Default initial separation. The relative position of the two particles
/// performs an unbiased random walk, so the separation must exceed its
/// excursion over the longest runs (about `1e3` after `2·10^7` jumps of the
/// `N` process at `K = 8`).
pub fn default_delta(_copies: usize) -> f64 {
    1.0e5
}

/// Coordinates of both particles, point-major `K × d` arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub jumps: u64,
}

/// `a = 0`, `b = (δ, 0, …, 0)` in every copy.
pub fn init_state(config: &ProcessConfig) -> Result<ProcessState> {
    config.validate()?;
    let (k, d) = (config.copies, config.dim);
    let mut b = vec![0.0; k * d];
    for p in b.chunks_exact_mut(d) {
        p[0] = config.delta;
    }
    Ok(ProcessState {
        a: vec![0.0; k * d],
        b,
        jumps: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Forward,
    Backward,
}

/// What a single jump did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpRecord {
    pub n1: usize,
    pub n2: usize,
    pub branch: Branch,
    /// `‖a_n1-b_n1‖ - ‖a_n2-b_n2‖` changed sign across the jump.
    pub flipped: bool,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpStats {
    /// `J`: jumps performed.
    pub jumps: u64,
    /// `F`: forward jumps that flipped the compared sign.
    pub forward_flips: u64,
    /// `R`: backward jumps that flipped the compared sign.
    pub backward_flips: u64,
    /// `A`: mean first coordinate of `a` after the last jump.
    pub a_mean: f64,
    /// `B`: mean of `b - δ` (first coordinate) after the last jump.
    pub b_mean: f64,
    /// `C_n`: per-copy flip counts of `‖a_n-b_n‖ - ‖a_n'-b_n'‖`, `n' = n+j`.
    pub copy_flips: Vec<u64>,
}

impl JumpStats {
    /// `C`: mean of `C_n`.
    pub fn c_mean(&self) -> f64 {
        if self.copy_flips.is_empty() {
            return 0.0;
        }
        self.copy_flips.iter().sum::<u64>() as f64 / self.copy_flips.len() as f64
    }
}

/// The two table ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRatios {
    /// `(A+B)·K·√K / (F-R)`
    pub r1: f64,
    /// `(A+B)·J / ((F-R)·C)`, with `C = J/2` for kind `N`.
    pub r2: f64,
}

pub fn derived_ratios(stats: &JumpStats, config: &ProcessConfig) -> Result<DerivedRatios> {
    if stats.forward_flips == stats.backward_flips {
        return Err(Error::UndefinedRatio(format!(
            "F = R = {}; the ratios divide by F - R",
            stats.forward_flips
        )));
    }
    let k = config.copies as f64;
    let sum = stats.a_mean + stats.b_mean;
    let net = stats.forward_flips as f64 - stats.backward_flips as f64;
    let jumps = stats.jumps as f64;
    let c = match config.kind {
        ProcessKind::N => jumps / 2.0,
        ProcessKind::W => stats.c_mean(),
    };
    if c == 0.0 {
        return Err(Error::UndefinedRatio("C = 0".into()));
    }
    Ok(DerivedRatios {
        r1: sum * k * k.sqrt() / net,
        r2: sum * jumps / (net * c),
    })
}

/// `true` when copy `n1` is the closer one; exact ties count as closer.
#[inline]
fn closer(d1: f64, d2: f64) -> bool {
    d1 <= d2
}

/// A running process: configuration, state, generator and the incremental
/// flip bookkeeping.
#[derive(Debug, Clone)]
pub struct Process {
    config: ProcessConfig,
    state: ProcessState,
    rng: SimRng,
    dists: Vec<f64>,
    /// `closer(dist[n], dist[n+j])` per copy.
    signs: Vec<bool>,
    forward_flips: u64,
    backward_flips: u64,
    copy_flips: Vec<u64>,
    scratch_a: Vec<f64>,
    scratch_b: Vec<f64>,
}

impl Process {
    pub fn new(config: ProcessConfig, seed: u32) -> Result<Self> {
        let state = init_state(&config)?;
        Ok(Self::from_state(config, state, SimRng::new(seed)))
    }

    /// Resumes from an explicit state (counters start at zero).
    pub fn from_state(config: ProcessConfig, state: ProcessState, rng: SimRng) -> Self {
        let k = config.copies;
        let mut p = Self {
            dists: vec![0.0; k],
            signs: vec![false; k],
            forward_flips: 0,
            backward_flips: 0,
            copy_flips: vec![0; k],
            scratch_a: vec![0.0; k * config.dim],
            scratch_b: vec![0.0; k * config.dim],
            config,
            state,
            rng,
        };
        for n in 0..k {
            p.dists[n] = p.distance(n);
        }
        for n in 0..k {
            p.signs[n] = p.sign_at(n);
        }
        p
    }

    pub fn config(&self) -> &ProcessConfig {
        &self.config
    }

    pub fn state(&self) -> &ProcessState {
        &self.state
    }

    fn distance(&self, n: usize) -> f64 {
        let d = self.config.dim;
        crate::geom::dist(&self.state.a[n * d..(n + 1) * d], &self.state.b[n * d..(n + 1) * d])
    }

    fn sign_at(&self, n: usize) -> bool {
        let np = (n + self.config.offset) % self.config.copies;
        closer(self.dists[n], self.dists[np])
    }

    /// Picks the two compared copies.
    pub fn choose_positions(&mut self) -> (usize, usize) {
        choose_positions(&self.config, &mut self.rng)
    }

    /// Performs one jump of the configured kind.
    pub fn step(&mut self) -> JumpRecord {
        let (n1, n2) = self.choose_positions();
        let before = closer(self.dists[n1], self.dists[n2]);
        let forward = self.rng.next_uniform() < self.config.alpha;
        match self.config.kind {
            ProcessKind::N => self.redraw(n1, n2, before == forward),
            ProcessKind::W => self.resample(n1, n2, before == forward),
        }
        let after = closer(self.dists[n1], self.dists[n2]);
        let flipped = before != after;
        let branch = if forward { Branch::Forward } else { Branch::Backward };
        if flipped {
            match branch {
                Branch::Forward => self.forward_flips += 1,
                Branch::Backward => self.backward_flips += 1,
            }
        }
        self.state.jumps += 1;
        JumpRecord { n1, n2, branch, flipped }
    }

    /// Whole-bridge redraw. `a_at_n1` selects pinning `a` at `n1` and `b`
    /// at `n2` (otherwise the reverse).
    fn redraw(&mut self, n1: usize, n2: usize, a_at_n1: bool) {
        let (k, d) = (self.config.copies, self.config.dim);
        let (pa, pb) = if a_at_n1 { (n1, n2) } else { (n2, n1) };
        fill_levy_bridge(&mut self.scratch_a, k, d, &mut self.rng);
        fill_levy_bridge(&mut self.scratch_b, k, d, &mut self.rng);
        for c in 0..d {
            let sa = self.state.a[pa * d + c] - self.scratch_a[pa * d + c];
            let sb = self.state.b[pb * d + c] - self.scratch_b[pb * d + c];
            for n in 0..k {
                self.state.a[n * d + c] = self.scratch_a[n * d + c] + sa;
                self.state.b[n * d + c] = self.scratch_b[n * d + c] + sb;
            }
        }
        for n in 0..k {
            self.dists[n] = self.distance(n);
        }
        for n in 0..k {
            let s = self.sign_at(n);
            if s != self.signs[n] {
                self.copy_flips[n] += 1;
                self.signs[n] = s;
            }
        }
    }

    /// Heat-bath resampling of one copy of each particle. `a_at_n2` selects
    /// resampling `a_n2` and `b_n1` (otherwise `a_n1` and `b_n2`).
    fn resample(&mut self, n1: usize, n2: usize, a_at_n2: bool) {
        let k = self.config.copies;
        let (ia, ib) = if a_at_n2 { (n2, n1) } else { (n1, n2) };
        let sigma = resample_sigma(k);
        heat_bath(&mut self.state.a, k, self.config.dim, ia, sigma, &mut self.rng);
        heat_bath(&mut self.state.b, k, self.config.dim, ib, sigma, &mut self.rng);
        self.dists[ia] = self.distance(ia);
        self.dists[ib] = self.distance(ib);
        let j = self.config.offset;
        let touched = [ia, (ia + k - j) % k, ib, (ib + k - j) % k];
        for (i, &n) in touched.iter().enumerate() {
            if touched[..i].contains(&n) {
                continue;
            }
            let s = self.sign_at(n);
            if s != self.signs[n] {
                self.copy_flips[n] += 1;
                self.signs[n] = s;
            }
        }
    }

    pub fn run(&mut self, jumps: u64) {
        for _ in 0..jumps {
            self.step();
        }
    }

    pub fn stats(&self) -> JumpStats {
        let (k, d) = (self.config.copies, self.config.dim);
        let mean_first = |v: &[f64]| v.iter().step_by(d).sum::<f64>() / k as f64;
        JumpStats {
            jumps: self.state.jumps,
            forward_flips: self.forward_flips,
            backward_flips: self.backward_flips,
            a_mean: mean_first(&self.state.a),
            b_mean: mean_first(&self.state.b) - self.config.delta,
            copy_flips: self.copy_flips.clone(),
        }
    }
}

/// Noise scale `1/sqrt(2 β h_q)` of the heat-bath move; `h_q = K` in
/// natural units.
pub fn resample_sigma(copies: usize) -> f64 {
    1.0 / (2.0 * copies as f64).sqrt()
}

/// `x_n <- (x_{n-1} + x_{n+1})/2 + σ η` for every coordinate of copy `n`,
/// indices taken around the ring.
pub fn heat_bath(x: &mut [f64], copies: usize, dim: usize, n: usize, sigma: f64, rng: &mut SimRng) {
    let prev = (n + copies - 1) % copies;
    let next = (n + 1) % copies;
    for c in 0..dim {
        let mid = 0.5 * (x[prev * dim + c] + x[next * dim + c]);
        x[n * dim + c] = mid + sigma * rng.next_standard_normal();
    }
}

/// Pair mode: uniform over `n1 < n2`. Offset mode: `n1` uniform,
/// `n2 = (n1 + j) mod K`.
pub fn choose_positions(config: &ProcessConfig, rng: &mut SimRng) -> (usize, usize) {
    let k = config.copies;
    if config.pair_mode {
        let pairs = k * (k - 1) / 2;
        let mut idx = rng.next_index(pairs);
        for n1 in 0..k - 1 {
            let row = k - 1 - n1;
            if idx < row {
                return (n1, n1 + 1 + idx);
            }
            idx -= row;
        }
        unreachable!("pair index out of range")
    } else {
        let n1 = rng.next_index(k);
        (n1, (n1 + config.offset) % k)
    }
}

/// Runs `jumps` steps from the initial state and returns the statistics.
pub fn run(config: &ProcessConfig, jumps: u64, seed: u32) -> Result<JumpStats> {
    let mut p = Process::new(config.clone(), seed)?;
    p.run(jumps);
    Ok(p.stats())
}
