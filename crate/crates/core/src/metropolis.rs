//! Metropolis Monte Carlo in the restricted sample space `D(S)`.
//!
//! A trial move displaces one vertex by at most `S(u)`. Proposals that keep
//! the vertex and its neighbors near their centers and preserve chirality
//! go through the usual Metropolis test; otherwise a vertex that is itself
//! outside the region takes a vibrant centering step instead. Once the chain
//! is inside `D(S)` only Metropolis moves remain.

use crate::distgeo::{self, ChiralityCheck, VibrantParams};
use crate::error::{Error, Result};
use crate::geom;
use crate::graph::{self, Conformation, RadiusMap, WeightedGraph};
use crate::rng::SimRng;

/// Lennard-Jones pair term `4ε((σ/r)¹² − (σ/r)⁶)`, cut at `cutoff` and
/// shifted to vanish there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LennardJones {
    pub epsilon: f64,
    pub sigma: f64,
    pub cutoff: f64,
}

impl LennardJones {
    pub fn new(epsilon: f64, sigma: f64, cutoff: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && sigma > 0.0 && cutoff >= sigma && cutoff.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Lennard-Jones needs ε ≥ 0, σ > 0 and cutoff ≥ σ (got {epsilon}, {sigma}, {cutoff})"
            )));
        }
        Ok(Self { epsilon, sigma, cutoff })
    }

    fn raw(&self, r: f64) -> f64 {
        let s6 = (self.sigma / r).powi(6);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    pub fn energy(&self, r: f64) -> f64 {
        if r >= self.cutoff {
            0.0
        } else {
            self.raw(r) - self.raw(self.cutoff)
        }
    }
}

/// Hooke terms from the graph edges plus an optional Lennard-Jones term on
/// non-adjacent pairs, at temperature `kt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    pub lj: Option<LennardJones>,
    pub kt: f64,
    /// Lennard-Jones interaction groups: only vertices with the same group
    /// interact. `None` puts every vertex in one group.
    groups: Option<Vec<Option<usize>>>,
    members: Vec<Vec<usize>>,
}

impl PotentialModel {
    pub fn new(kt: f64, lj: Option<LennardJones>) -> Result<Self> {
        if !(kt > 0.0 && kt.is_finite()) {
            return Err(Error::InvalidConfig(format!("kT must be positive, got {kt}")));
        }
        Ok(Self {
            lj,
            kt,
            groups: None,
            members: Vec::new(),
        })
    }

    /// Hooke terms only.
    pub fn hooke(kt: f64) -> Result<Self> {
        Self::new(kt, None)
    }

    pub fn with_groups(mut self, groups: Vec<Option<usize>>) -> Self {
        let count = groups.iter().flatten().map(|&g| g + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); count];
        for (v, g) in groups.iter().enumerate() {
            if let Some(g) = g {
                members[*g].push(v);
            }
        }
        self.groups = Some(groups);
        self.members = members;
        self
    }

    fn lj_partners<'a>(&'a self, u: usize, n: usize) -> Box<dyn Iterator<Item = usize> + 'a> {
        match &self.groups {
            None => Box::new((0..n).filter(move |&v| v != u)),
            Some(groups) => match groups.get(u).copied().flatten() {
                None => Box::new(std::iter::empty()),
                Some(g) => Box::new(self.members[g].iter().copied().filter(move |&v| v != u)),
            },
        }
    }
}

fn lj_local(model: &PotentialModel, graph: &WeightedGraph, conf: &Conformation, u: usize) -> f64 {
    let Some(lj) = model.lj else { return 0.0 };
    let au = conf.point(u);
    let mut e = 0.0;
    for v in model.lj_partners(u, conf.len()) {
        let r = geom::dist(au, conf.point(v));
        if r < lj.cutoff && graph.edge(u, v).is_none() {
            e += lj.energy(r);
        }
    }
    e
}

/// Every potential term involving `u`.
pub fn local_potential(model: &PotentialModel, graph: &WeightedGraph, conf: &Conformation, u: usize) -> f64 {
    graph::local_hooke(graph, conf, u) + lj_local(model, graph, conf, u)
}

/// Total potential energy.
pub fn total_potential(model: &PotentialModel, graph: &WeightedGraph, conf: &Conformation) -> f64 {
    let mut e = graph::hooke_potential(graph, conf);
    if model.lj.is_some() {
        // each pair is seen from both ends
        e += 0.5 * (0..conf.len()).map(|u| lj_local(model, graph, conf, u)).sum::<f64>();
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected,
    /// The vertex was outside its region and took a vibrant step (which may
    /// itself have been undone by the chirality check).
    Fallback,
}

/// Result of one trial move with the resulting change of total energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub outcome: Outcome,
    pub energy_change: f64,
}

/// One trial move of vertex `u`.
#[allow(clippy::too_many_arguments)]
pub fn trial_move(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    u: usize,
    radii: &RadiusMap,
    model: &PotentialModel,
    params: &VibrantParams,
    chirality: &impl ChiralityCheck,
    rng: &mut SimRng,
) -> TrialResult {
    let dim = conf.dim();
    let s = radii.get(u);
    let a = conf.point(u).to_vec();
    let mut step = vec![0.0; dim];
    rng.fill_unit_ball(&mut step);
    {
        let p = conf.point_mut(u);
        for i in 0..dim {
            p[i] = a[i] + s * step[i];
        }
    }
    let inside = graph::center_offset(graph, conf, u) < s
        && distgeo::check_distance(graph, conf, u, radii)
        && chirality.holds_at(conf, u);
    if inside {
        let proposed = local_potential(model, graph, conf, u);
        let z = conf.point(u).to_vec();
        conf.set_point(u, &a);
        let current = local_potential(model, graph, conf, u);
        if proposed < current || rng.next_uniform() < ((current - proposed) / model.kt).exp() {
            conf.set_point(u, &z);
            return TrialResult {
                outcome: Outcome::Accepted,
                energy_change: proposed - current,
            };
        }
        return TrialResult {
            outcome: Outcome::Rejected,
            energy_change: 0.0,
        };
    }
    conf.set_point(u, &a);
    let r = graph::center_offset(graph, conf, u);
    if r > s || !distgeo::check_distance(graph, conf, u, radii) {
        let before = local_potential(model, graph, conf, u);
        distgeo::vibrant_center(graph, conf, u, radii, params, chirality, rng);
        let after = local_potential(model, graph, conf, u);
        return TrialResult {
            outcome: Outcome::Fallback,
            energy_change: after - before,
        };
    }
    TrialResult {
        outcome: Outcome::Rejected,
        energy_change: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MCReport {
    pub steps: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub fallback_moves: usize,
    /// Total energy after each sweep.
    pub energy: Vec<f64>,
    /// Membership in `D(S)` after each sweep.
    pub in_space: Vec<bool>,
}

impl MCReport {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    pub fn record(&mut self, outcome: Outcome) {
        self.steps += 1;
        match outcome {
            Outcome::Accepted => self.accepted += 1,
            Outcome::Rejected => self.rejected += 1,
            Outcome::Fallback => self.fallback_moves += 1,
        }
    }

    /// First sweep from which the chain stayed in `D(S)` to the end.
    pub fn settled_from(&self) -> Option<usize> {
        let last_out = self.in_space.iter().rposition(|&b| !b);
        match last_out {
            None if !self.in_space.is_empty() => Some(0),
            None => None,
            Some(i) if i + 1 < self.in_space.len() => Some(i + 1),
            Some(_) => None,
        }
    }

    /// Per-sweep rows `sweep,energy,in_space`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,energy,in_space\n");
        for (i, (e, b)) in self.energy.iter().zip(&self.in_space).enumerate() {
            out.push_str(&format!("{i},{e:?},{}\n", u8::from(*b)));
        }
        out
    }
}

/// Random-vertex trial moves, `sweeps·|V|` of them, recording energy and
/// membership after every sweep.
#[allow(clippy::too_many_arguments)]
pub fn mc_run(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    radii: &RadiusMap,
    model: &PotentialModel,
    params: &VibrantParams,
    chirality: &impl ChiralityCheck,
    sweeps: usize,
    seed: u32,
) -> MCReport {
    let mut rng = SimRng::new(seed);
    let mut report = MCReport::default();
    let n = graph.vertex_count();
    if n == 0 {
        return report;
    }
    let mut energy = total_potential(model, graph, conf);
    for _ in 0..sweeps {
        for _ in 0..n {
            let u = rng.next_index(n);
            let t = trial_move(graph, conf, u, radii, model, params, chirality, &mut rng);
            energy += t.energy_change;
            report.record(t.outcome);
        }
        report.energy.push(energy);
        report.in_space.push(graph::in_restricted_space(graph, conf, radii));
    }
    report
}
