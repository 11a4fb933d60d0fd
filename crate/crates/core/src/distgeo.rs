//! Distance-geometry embedding by iterative centering.
//!
//! Plain centering moves one vertex at a time onto its center; the Hooke
//! potential never increases along the way and the step lengths tend to
//! zero. The vibrant variant adds capped, noisy moves and rejects any move
//! that breaks a chirality constraint, which lets it leave configurations
//! where plain centering gets stuck.

use crate::geom;
use crate::graph::{self, Conformation, RadiusMap, WeightedGraph};
use crate::rng::SimRng;

/// Orientation constraints consulted after each move.
pub trait ChiralityCheck {
    /// Whether every constraint involving `u` holds in `conf`.
    fn holds_at(&self, conf: &Conformation, u: usize) -> bool;

    /// Whether every constraint holds.
    fn holds_everywhere(&self, conf: &Conformation) -> bool {
        (0..conf.len()).all(|u| self.holds_at(conf, u))
    }
}

/// The empty constraint set.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unconstrained;

impl ChiralityCheck for Unconstrained {
    fn holds_at(&self, _: &Conformation, _: usize) -> bool {
        true
    }
}

impl<T: ChiralityCheck + ?Sized> ChiralityCheck for &T {
    fn holds_at(&self, conf: &Conformation, u: usize) -> bool {
        (**self).holds_at(conf, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitOrder {
    Cyclic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteringSchedule {
    pub order: VisitOrder,
    pub max_steps: usize,
    /// Stop once the latest move of every vertex is shorter than this.
    pub stop_displacement: f64,
}

impl Default for CenteringSchedule {
    fn default() -> Self {
        Self {
            order: VisitOrder::Random,
            max_steps: 1_000_000,
            stop_displacement: 1e-9,
        }
    }
}

/// One centering step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub vertex: usize,
    pub displacement: f64,
    /// Hooke potential after the step.
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CenteringTrace {
    pub steps: Vec<TraceStep>,
    pub initial_potential: f64,
    pub converged: bool,
}

impl CenteringTrace {
    pub fn final_potential(&self) -> f64 {
        self.steps.last().map_or(self.initial_potential, |s| s.potential)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,vertex,displacement,potential\n");
        for s in &self.steps {
            out.push_str(&format!("{},{},{:e},{:e}\n", s.step, s.vertex, s.displacement, s.potential));
        }
        out
    }
}

fn pick(order: VisitOrder, step: usize, n: usize, rng: &mut SimRng) -> usize {
    match order {
        VisitOrder::Cyclic => step % n,
        VisitOrder::Random => rng.next_index(n),
    }
}

/// Plain iterative centering.
pub fn iterative_centering(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    schedule: &CenteringSchedule,
    rng: &mut SimRng,
) -> CenteringTrace {
    constrained_centering(graph, conf, schedule, &Unconstrained, rng)
}

/// Iterative centering where a move is undone when it breaks a chirality
/// constraint; undone moves record zero displacement.
pub fn constrained_centering(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    schedule: &CenteringSchedule,
    chirality: &impl ChiralityCheck,
    rng: &mut SimRng,
) -> CenteringTrace {
    let n = graph.vertex_count();
    let mut potential = graph::hooke_potential(graph, conf);
    let mut trace = CenteringTrace {
        steps: Vec::new(),
        initial_potential: potential,
        converged: false,
    };
    if n == 0 {
        trace.converged = true;
        return trace;
    }
    let mut latest = vec![f64::INFINITY; n];
    let mut pending = n;
    let mut old = vec![0.0; conf.dim()];
    let mut target = vec![0.0; conf.dim()];
    for step in 0..schedule.max_steps {
        let u = pick(schedule.order, step, n, rng);
        old.copy_from_slice(conf.point(u));
        graph::center_into(graph, conf, u, &mut target);
        let before = graph::local_hooke(graph, conf, u);
        conf.set_point(u, &target);
        let mut displacement = geom::dist(&old, &target);
        if !chirality.holds_at(conf, u) {
            conf.set_point(u, &old);
            displacement = 0.0;
        } else {
            potential += graph::local_hooke(graph, conf, u) - before;
        }
        trace.steps.push(TraceStep {
            step,
            vertex: u,
            displacement,
            potential,
        });
        let was_pending = latest[u] >= schedule.stop_displacement;
        latest[u] = displacement;
        let now_pending = displacement >= schedule.stop_displacement;
        match (was_pending, now_pending) {
            (true, false) => pending -= 1,
            (false, true) => pending += 1,
            _ => {}
        }
        if pending == 0 {
            trace.converged = true;
            break;
        }
    }
    // replace the running sum by an exact evaluation at the end
    if let Some(last) = trace.steps.last_mut() {
        last.potential = graph::hooke_potential(graph, conf);
    }
    trace
}

/// A run is declared stalled when the last `10·|V|` steps improved the
/// potential by less than `1e-12` and the conformation is outside `D(S)`.
pub fn is_stalled(trace: &CenteringTrace, graph: &WeightedGraph, conf: &Conformation, radii: &RadiusMap) -> bool {
    let window = 10 * graph.vertex_count();
    let steps = &trace.steps;
    if steps.len() <= window {
        return false;
    }
    let then = steps[steps.len() - 1 - window].potential;
    let now = steps[steps.len() - 1].potential;
    then - now < 1e-12 && !graph::in_restricted_space(graph, conf, radii)
}

/// Noise factor `c` and speed-up cap `C` of vibrant centering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrantParams {
    pub noise: f64,
    pub cap: f64,
}

impl Default for VibrantParams {
    fn default() -> Self {
        Self { noise: 1.1, cap: 10.0 }
    }
}

impl VibrantParams {
    pub fn new(noise: f64, cap: f64) -> crate::Result<Self> {
        if !(noise > 1.0 && cap > 1.0) {
            return Err(crate::Error::InvalidConfig(format!(
                "vibrant factors must exceed 1 (noise {noise}, cap {cap})"
            )));
        }
        Ok(Self { noise, cap })
    }
}

/// One vibrant centering move of `u`; returns whether the move was kept.
///
/// Far from the center (beyond `cap·S`) the vertex steps `cap·S` toward it,
/// within `cap·S` but beyond `S` it steps `S`, and otherwise it lands on the
/// center; each move adds noise of radius `noise·` the step scale. A move
/// that breaks chirality is undone.
pub fn vibrant_center(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    u: usize,
    radii: &RadiusMap,
    params: &VibrantParams,
    chirality: &impl ChiralityCheck,
    rng: &mut SimRng,
) -> bool {
    let dim = conf.dim();
    let a = conf.point(u).to_vec();
    let z = graph::center(graph, conf, u);
    let r = geom::dist(&a, &z);
    let s = radii.get(u);
    let mut noise = vec![0.0; dim];
    rng.fill_unit_ball(&mut noise);
    let p = conf.point_mut(u);
    if r > params.cap * s {
        let step = params.cap * s;
        for i in 0..dim {
            p[i] = a[i] + step * ((z[i] - a[i]) / r + params.noise * noise[i]);
        }
    } else if r > s {
        for i in 0..dim {
            p[i] = a[i] + s * ((z[i] - a[i]) / r + params.noise * noise[i]);
        }
    } else {
        for i in 0..dim {
            p[i] = z[i] + s * params.noise * noise[i];
        }
    }
    if !chirality.holds_at(conf, u) {
        conf.set_point(u, &a);
        return false;
    }
    true
}

/// Whether every neighbor `v` of `u` is within `S(v)` of its center (or is
/// exempt with `S(v) = 0`).
pub fn check_distance(graph: &WeightedGraph, conf: &Conformation, u: usize, radii: &RadiusMap) -> bool {
    graph.neighbors(u).iter().all(|nb| {
        let s = radii.get(nb.vertex);
        graph::center_offset(graph, conf, nb.vertex) < s || s == 0.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VibrantReport {
    pub steps: usize,
    pub accepted: usize,
    pub in_restricted_space: bool,
}

/// Runs random-order vibrant centering until the conformation is in
/// `D(radii)` or `max_steps` moves have been made. Membership is tested
/// once per `|V|` moves.
pub fn vibrant_run(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    radii: &RadiusMap,
    params: &VibrantParams,
    chirality: &impl ChiralityCheck,
    rng: &mut SimRng,
    max_steps: usize,
) -> VibrantReport {
    let n = graph.vertex_count();
    let mut report = VibrantReport {
        steps: 0,
        accepted: 0,
        in_restricted_space: graph::in_restricted_space(graph, conf, radii),
    };
    if n == 0 || report.in_restricted_space {
        return report;
    }
    while report.steps < max_steps {
        let u = rng.next_index(n);
        if vibrant_center(graph, conf, u, radii, params, chirality, rng) {
            report.accepted += 1;
        }
        report.steps += 1;
        if report.steps % n == 0 && graph::in_restricted_space(graph, conf, radii) {
            report.in_restricted_space = true;
            break;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealReport {
    pub stages: Vec<VibrantReport>,
    pub in_restricted_space: bool,
}

impl AnnealReport {
    pub fn total_steps(&self) -> usize {
        self.stages.iter().map(|s| s.steps).sum()
    }
}

/// Vibrant centering with radii `m·S` for each multiplier `m` in `stages`
/// (decreasing, ending at 1), each stage allowed `steps_per_stage` moves.
/// Reports membership in `D(S)` at the end instead of failing.
pub fn anneal_and_settle(
    graph: &WeightedGraph,
    conf: &mut Conformation,
    target: &RadiusMap,
    params: &VibrantParams,
    chirality: &impl ChiralityCheck,
    rng: &mut SimRng,
    stages: &[f64],
    steps_per_stage: usize,
) -> crate::Result<AnnealReport> {
    if stages.is_empty() || stages.windows(2).any(|w| w[1] > w[0]) || *stages.last().unwrap() != 1.0 {
        return Err(crate::Error::InvalidConfig(
            "stage multipliers must be non-increasing and end at 1".into(),
        ));
    }
    let mut report = AnnealReport {
        stages: Vec::new(),
        in_restricted_space: graph::in_restricted_space(graph, conf, target),
    };
    if report.in_restricted_space {
        return Ok(report);
    }
    for &m in stages {
        let radii = target.scaled(m);
        let r = vibrant_run(graph, conf, &radii, params, chirality, rng, steps_per_stage);
        report.stages.push(r);
    }
    report.in_restricted_space = graph::in_restricted_space(graph, conf, target);
    Ok(report)
}
