//! Non-equilibrium molecular Monte Carlo with bead pairs.
//!
//! A molecule is equipped with pairs of auxiliary beads, each bead tied to
//! an anchor atom by a zero-length spring, and the whole system is
//! replicated `K` times on a ring with inter-copy springs of constant `K`.
//! A non-equilibrium step picks a bead pair, compares its separation in two
//! copies half a ring apart, pins one bead in each copy according to the
//! directed rule and relaxes everything else by restricted-space
//! Metropolis moves.

use crate::chirotope::{self, PartialChirotope};
use crate::distgeo::VibrantParams;
use crate::error::{Error, Result};
use crate::geom;
use crate::graph::{Conformation, RadiusMap, WeightedGraph};
use crate::metropolis::{self, LennardJones, MCReport, PotentialModel};
use crate::rng::SimRng;
use rayon::prelude::*;

/// A pair of beads tied to atoms `first` and `second`, chosen with
/// probability `probability`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeadPair {
    pub first: usize,
    pub second: usize,
    pub stiffness: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeadSpec {
    pub pairs: Vec<BeadPair>,
    pub copies: usize,
    pub bead_radius: f64,
}

/// Indices of a pair's beads among the particles of one copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquippedPair {
    pub bead_a: usize,
    pub bead_b: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquippedSystem {
    pub graph: WeightedGraph,
    pub conf: Conformation,
    pub radii: RadiusMap,
    /// Rank-4 constraints over all copies.
    pub chirotope: PartialChirotope,
    pub atoms: usize,
    pub particles: usize,
    pub copies: usize,
    pub pairs: Vec<EquippedPair>,
    /// Vertices that never move.
    pub fixed: Vec<bool>,
}

impl EquippedSystem {
    pub fn vertex(&self, copy: usize, particle: usize) -> usize {
        copy * self.particles + particle
    }

    pub fn half_ring(&self) -> usize {
        self.copies / 2
    }

    /// Moves `particle` to `p` in every copy.
    pub fn place_particle(&mut self, particle: usize, p: &[f64]) {
        for c in 0..self.copies {
            let v = self.vertex(c, particle);
            self.conf.set_point(v, p);
        }
    }

    /// Adds the constraint `χ(particles) = sign` to every copy.
    pub fn add_chirality(&mut self, particles: &[usize], sign: i8) -> Result<()> {
        for c in 0..self.copies {
            let t: Vec<usize> = particles.iter().map(|&p| self.vertex(c, p)).collect();
            self.chirotope.insert(&t, sign)?;
        }
        Ok(())
    }

    /// Fixes `particle` in every copy.
    pub fn fix_particle(&mut self, particle: usize) {
        for c in 0..self.copies {
            let v = self.vertex(c, particle);
            self.fixed[v] = true;
        }
    }

    /// Mean position of `particle` over the copies.
    pub fn centroid(&self, particle: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.conf.dim()];
        for c in 0..self.copies {
            for (mi, x) in m.iter_mut().zip(self.conf.point(self.vertex(c, particle))) {
                *mi += x / self.copies as f64;
            }
        }
        m
    }
}

/// Appends the beads to a molecule and replicates it on a ring of
/// `spec.copies` copies. Beads start on their anchors.
pub fn equip(graph: &WeightedGraph, conf: &Conformation, radii: &RadiusMap, spec: &BeadSpec) -> Result<EquippedSystem> {
    let atoms = graph.vertex_count();
    if conf.len() != atoms || radii.len() != atoms {
        return Err(Error::DimensionMismatch { expected: atoms, got: conf.len().min(radii.len()) });
    }
    let k = spec.copies;
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidConfig(format!("copy count must be even and at least 2, got {k}")));
    }
    if !spec.pairs.is_empty() {
        let total: f64 = spec.pairs.iter().map(|p| p.probability).sum();
        if (total - 1.0).abs() > 1e-9 || spec.pairs.iter().any(|p| !(p.probability >= 0.0)) {
            return Err(Error::InvalidConfig(format!("pair probabilities must sum to 1, got {total}")));
        }
    }
    for p in &spec.pairs {
        for anchor in [p.first, p.second] {
            if anchor >= atoms {
                return Err(Error::OutOfRange { index: anchor, size: atoms });
            }
        }
        if !(p.stiffness > 0.0) {
            return Err(Error::InvalidConfig(format!("bead spring constant must be positive, got {}", p.stiffness)));
        }
    }
    // one copy with beads
    let mut single = graph.clone();
    let mut one = conf.clone();
    let mut one_radii = radii.clone();
    let mut pairs = Vec::with_capacity(spec.pairs.len());
    for p in &spec.pairs {
        let mut ids = [0; 2];
        for (slot, anchor) in [p.first, p.second].into_iter().enumerate() {
            let b = single.add_vertex();
            single.add_edge(b, anchor, 0.0, p.stiffness)?;
            one.push(&conf.point(anchor).to_vec());
            one_radii.push(spec.bead_radius);
            ids[slot] = b;
        }
        pairs.push(EquippedPair {
            bead_a: ids[0],
            bead_b: ids[1],
            probability: p.probability,
        });
    }
    let particles = single.vertex_count();
    let mut g = WeightedGraph::new(particles * k, conf.dim())?;
    let mut coords = Vec::with_capacity(particles * k * conf.dim());
    let mut r = Vec::with_capacity(particles * k);
    for c in 0..k {
        for e in single.edges() {
            g.add_edge(c * particles + e.u, c * particles + e.v, e.length, e.stiffness)?;
        }
        coords.extend_from_slice(one.as_slice());
        r.extend_from_slice(one_radii.as_slice());
    }
    let ring_edges = if k == 2 { 1 } else { k };
    for p in 0..particles {
        for c in 0..ring_edges {
            g.add_edge(c * particles + p, ((c + 1) % k) * particles + p, 0.0, k as f64)?;
        }
    }
    Ok(EquippedSystem {
        graph: g,
        conf: Conformation::from_flat(conf.dim(), coords)?,
        radii: RadiusMap::new(r)?,
        chirotope: PartialChirotope::new(conf.dim() + 1),
        atoms,
        particles,
        copies: k,
        pairs,
        fixed: vec![false; particles * k],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoneqParams {
    pub model: PotentialModel,
    pub vibrant: VibrantParams,
    /// Probability of the forward branch; 1/2 makes the pinning undirected.
    pub alpha: f64,
    /// Metropolis steps per pinning.
    pub inner_steps: usize,
    /// Swaps which bead is pinned at the first copy.
    pub flip: bool,
}

/// What one non-equilibrium step did.
#[derive(Debug, Clone, PartialEq)]
pub struct NoneqRecord {
    pub pair: usize,
    pub n1: usize,
    pub n2: usize,
    pub forward: bool,
    /// Pinned vertices (bead `a`, bead `b`).
    pub pinned: (usize, usize),
    pub report: MCReport,
}

/// One pinning cycle: choose a pair and two copies, pin one bead in each by
/// the directed rule and run `inner_steps` trial moves over the remaining
/// movable vertices.
pub fn noneq_step(system: &mut EquippedSystem, rng: &mut SimRng, params: &NoneqParams) -> Result<NoneqRecord> {
    if system.pairs.is_empty() {
        return Err(Error::InvalidConfig("no bead pairs to pin".into()));
    }
    let mut x = rng.next_uniform();
    let mut l = system.pairs.len() - 1;
    for (i, p) in system.pairs.iter().enumerate() {
        if x < p.probability {
            l = i;
            break;
        }
        x -= p.probability;
    }
    let pair = system.pairs[l];
    let k = system.copies;
    let n1 = rng.next_index(k);
    let n2 = (n1 + system.half_ring()) % k;
    let sep = |n: usize| {
        geom::dist(
            system.conf.point(system.vertex(n, pair.bead_a)),
            system.conf.point(system.vertex(n, pair.bead_b)),
        )
    };
    let closer = sep(n1) < sep(n2);
    let forward = rng.next_uniform() < params.alpha;
    let a_at_n1 = (closer == forward) != params.flip;
    let (na, nb) = if a_at_n1 { (n1, n2) } else { (n2, n1) };
    let pinned = (system.vertex(na, pair.bead_a), system.vertex(nb, pair.bead_b));
    let movable: Vec<usize> = (0..system.graph.vertex_count())
        .filter(|&v| !system.fixed[v] && v != pinned.0 && v != pinned.1)
        .collect();
    let mut report = MCReport::default();
    if !movable.is_empty() {
        for _ in 0..params.inner_steps {
            let u = movable[rng.next_index(movable.len())];
            let t = metropolis::trial_move(
                &system.graph,
                &mut system.conf,
                u,
                &system.radii,
                &params.model,
                &params.vibrant,
                &system.chirotope,
                rng,
            );
            report.record(t.outcome);
        }
    }
    Ok(NoneqRecord {
        pair: l,
        n1,
        n2,
        forward,
        pinned,
        report,
    })
}

/// Parameters of the linear-polymer demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerConfig {
    pub atoms: usize,
    pub copies: usize,
    /// Number of pinning cycles.
    pub sweeps: usize,
    /// Trial moves per cycle; `None` means 50 per coordinate.
    pub inner_steps: Option<usize>,
    pub alpha: f64,
    pub fix_last: bool,
    pub flip: bool,
    pub kt: f64,
    pub bond_length: f64,
    pub bond_stiffness: f64,
    pub lj_epsilon: f64,
    pub lj_sigma: f64,
    pub lj_cutoff: f64,
    pub bead_stiffness: f64,
    pub helix_radius: f64,
    /// Helix turn per bead, in degrees.
    pub helix_step: f64,
    pub atom_radius: f64,
    pub bead_radius: f64,
}

impl Default for PolymerConfig {
    fn default() -> Self {
        Self {
            atoms: 16,
            copies: 4,
            sweeps: 40,
            inner_steps: None,
            alpha: 1.0,
            fix_last: false,
            flip: false,
            kt: 1.0,
            bond_length: 1.0,
            bond_stiffness: 50.0,
            lj_epsilon: 0.2,
            lj_sigma: 1.0,
            lj_cutoff: 2.5,
            bead_stiffness: 1.0,
            helix_radius: 0.5,
            helix_step: 90.0,
            atom_radius: 0.5,
            bead_radius: 1.0,
        }
    }
}

impl PolymerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atoms < 3 {
            return Err(Error::InvalidConfig(format!("polymer needs at least 3 atoms, got {}", self.atoms)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        for (name, v) in [
            ("bond length", self.bond_length),
            ("bond stiffness", self.bond_stiffness),
            ("bead stiffness", self.bead_stiffness),
            ("helix radius", self.helix_radius),
            ("atom radius", self.atom_radius),
            ("bead radius", self.bead_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Builds the equipped polymer: atoms on the x axis joined by springs, one
/// bead pair per bond (bead `a` on the left atom, bead `b` on the right),
/// second beads wound on a right-handed helix about the x axis and held
/// there by orientation constraints.
pub fn build_polymer(config: &PolymerConfig) -> Result<EquippedSystem> {
    config.validate()?;
    let n = config.atoms;
    let mut g = WeightedGraph::new(n, 3)?;
    for i in 0..n - 1 {
        g.add_edge(i, i + 1, config.bond_length, config.bond_stiffness)?;
    }
    let coords = (0..n).flat_map(|i| [i as f64 * config.bond_length, 0.0, 0.0]).collect();
    let conf = Conformation::from_flat(3, coords)?;
    let radii = RadiusMap::uniform(n, config.atom_radius)?;
    let bonds = n - 1;
    let spec = BeadSpec {
        pairs: (0..bonds)
            .map(|i| BeadPair {
                first: i,
                second: i + 1,
                stiffness: config.bead_stiffness,
                probability: 1.0 / bonds as f64,
            })
            .collect(),
        copies: config.copies,
        bead_radius: config.bead_radius,
    };
    let mut sys = equip(&g, &conf, &radii, &spec)?;
    let step = config.helix_step.to_radians();
    for (i, p) in sys.pairs.clone().iter().enumerate() {
        let t = i as f64 * step;
        let x = (i + 1) as f64 * config.bond_length;
        sys.place_particle(p.bead_b, &[x, config.helix_radius * t.cos(), config.helix_radius * t.sin()]);
    }
    // three bases per consecutive quadruple of second beads, signs from
    // the reference helix
    let second: Vec<usize> = sys.pairs.iter().map(|p| p.bead_b).collect();
    let reference = sys.conf.clone();
    for i in 0..second.len().saturating_sub(3) {
        for last in [i + 3, i + 4, i + 5] {
            if last >= second.len() {
                continue;
            }
            let t = [second[i], second[i + 1], second[i + 2], second[last]];
            let s = chirotope::chi_of_points(&reference, &t)?;
            if s != 0 {
                sys.add_chirality(&t, s)?;
            }
        }
    }
    if config.fix_last {
        sys.fix_particle(n - 1);
    }
    Ok(sys)
}

/// Least-squares rotation angle about the x axis through `(y0, z0)` that
/// carries `before` to `after`.
fn rotation_about_x(before: &Conformation, after: &Conformation, axis: [f64; 2]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for v in 0..before.len() {
        let p = before.point(v);
        let q = after.point(v);
        let (y, z) = (p[1] - axis[0], p[2] - axis[1]);
        let (dy, dz) = (q[1] - p[1], q[2] - p[2]);
        num += y * dz - z * dy;
        den += y * y + z * z;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Result of one seed of the polymer demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerResult {
    pub seed: u32,
    /// Displacement of the atoms' center of mass along the chain axis.
    pub axial_drift: f64,
    /// Accumulated rotation about the chain axis (radians, right-handed
    /// about +x).
    pub twist_angle: f64,
    pub acceptance_rate: f64,
}

fn atom_mean_x(sys: &EquippedSystem) -> f64 {
    let mut x = 0.0;
    for c in 0..sys.copies {
        for a in 0..sys.atoms {
            x += sys.conf.point(sys.vertex(c, a))[0];
        }
    }
    x / (sys.copies * sys.atoms) as f64
}

/// Runs the demonstration for one seed.
pub fn polymer_run(config: &PolymerConfig, seed: u32) -> Result<PolymerResult> {
    let mut sys = build_polymer(config)?;
    let model = PotentialModel::new(config.kt, Some(LennardJones::new(config.lj_epsilon, config.lj_sigma, config.lj_cutoff)?))?
        .with_groups((0..sys.graph.vertex_count()).map(|v| {
            let (c, p) = (v / sys.particles, v % sys.particles);
            (p < sys.atoms).then_some(c)
        }).collect());
    let params = NoneqParams {
        model,
        vibrant: VibrantParams::default(),
        alpha: config.alpha,
        inner_steps: config.inner_steps.unwrap_or(50 * 3 * sys.graph.vertex_count()),
        flip: config.flip,
    };
    let axis_point = sys.conf.point(sys.vertex(0, config.atoms - 1)).to_vec();
    let axis = [axis_point[1], axis_point[2]];
    let mut rng = SimRng::new(seed);
    let x0 = atom_mean_x(&sys);
    let mut twist = 0.0;
    let mut accepted = 0usize;
    let mut steps = 0usize;
    for _ in 0..config.sweeps {
        let before = sys.conf.clone();
        let rec = noneq_step(&mut sys, &mut rng, &params)?;
        twist += rotation_about_x(&before, &sys.conf, axis);
        accepted += rec.report.accepted;
        steps += rec.report.steps;
    }
    Ok(PolymerResult {
        seed,
        axial_drift: atom_mean_x(&sys) - x0,
        twist_angle: twist,
        acceptance_rate: if steps == 0 { 0.0 } else { accepted as f64 / steps as f64 },
    })
}

/// Runs the demonstration for every seed in parallel.
pub fn polymer_demo(config: &PolymerConfig, seeds: &[u32]) -> Result<Vec<PolymerResult>> {
    config.validate()?;
    seeds.par_iter().map(|&s| polymer_run(config, s)).collect()
}

/// CSV with columns `seed,axial_drift,twist_angle,acceptance_rate`.
pub fn polymer_csv(results: &[PolymerResult]) -> String {
    let mut out = String::from("seed,axial_drift,twist_angle,acceptance_rate\n");
    for r in results {
        out.push_str(&format!("{},{:?},{:?},{:?}\n", r.seed, r.axial_drift, r.twist_angle, r.acceptance_rate));
    }
    out
}
