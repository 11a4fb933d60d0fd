//! Partial chirotopes: orientation constraints on vertex tuples, their
//! evaluation on point configurations, and realization by linear
//! programming.
//!
//! A tuple `(a_1, …, a_r)` of a rank-`r` chirotope is evaluated as the sign
//! of the determinant of the points `(1, x_{a_i})` (homogeneous form, for
//! configurations of dimension `r − 1`) or of `x_{a_i}` directly (dimension
//! `r`). For rank 4 the homogeneous determinant equals
//! `det(x_b − x_a, x_c − x_a, x_d − x_a)`.

use crate::distgeo::ChiralityCheck;
use crate::error::{Error, Result};
use crate::geom;
use crate::graph::{ChiralityRecord, Conformation, WeightedGraph};
use crate::lp;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Determinants below this magnitude count as sign 0.
pub const ZERO_TOL: f64 = 1e-12;

/// Sorts `tuple` in place and returns the parity of the permutation used
/// (`+1` even, `-1` odd), or 0 when an entry repeats.
pub fn sort_with_parity(tuple: &mut [usize]) -> i8 {
    let mut parity = 1;
    for i in 1..tuple.len() {
        let mut j = i;
        while j > 0 && tuple[j - 1] > tuple[j] {
            tuple.swap(j - 1, j);
            parity = -parity;
            j -= 1;
        }
    }
    if tuple.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        parity
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialChirotope {
    rank: usize,
    /// Sorted tuples with the sign of that sorted order.
    tuples: Vec<(Vec<usize>, i8)>,
    index: HashMap<Vec<usize>, usize>,
    by_vertex: HashMap<usize, Vec<usize>>,
}

impl PartialChirotope {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            ..Default::default()
        }
    }

    pub fn from_records(rank: usize, records: &[ChiralityRecord]) -> Result<Self> {
        let mut chi = Self::new(rank);
        for r in records {
            chi.insert(&r.vertices, r.sign)?;
        }
        Ok(chi)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Stored tuples in sorted order with their signs.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], i8)> {
        self.tuples.iter().map(|(t, s)| (t.as_slice(), *s))
    }

    /// Stored tuples that contain `u`.
    pub fn entries_with(&self, u: usize) -> impl Iterator<Item = (&[usize], i8)> {
        self.by_vertex
            .get(&u)
            .into_iter()
            .flatten()
            .map(|&i| (self.tuples[i].0.as_slice(), self.tuples[i].1))
    }

    /// Records `χ(tuple) = sign`. Re-inserting a consistent value is a
    /// no-op; a conflicting value is an error.
    pub fn insert(&mut self, tuple: &[usize], sign: i8) -> Result<()> {
        if tuple.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: tuple.len() });
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidConfig(format!("chirotope sign must be ±1, got {sign}")));
        }
        let mut sorted = tuple.to_vec();
        let parity = sort_with_parity(&mut sorted);
        if parity == 0 {
            return Err(Error::InvalidConfig(format!("tuple {tuple:?} repeats a vertex")));
        }
        let stored = sign * parity;
        if let Some(&i) = self.index.get(&sorted) {
            if self.tuples[i].1 != stored {
                return Err(Error::InvalidConfig(format!("conflicting signs for tuple {tuple:?}")));
            }
            return Ok(());
        }
        let i = self.tuples.len();
        for &v in &sorted {
            self.by_vertex.entry(v).or_default().push(i);
        }
        self.index.insert(sorted.clone(), i);
        self.tuples.push((sorted, stored));
        Ok(())
    }

    /// `χ(tuple)` by the alternating rule; `Some(0)` for a repeated vertex,
    /// `None` when undefined.
    pub fn query(&self, tuple: &[usize]) -> Option<i8> {
        if tuple.len() != self.rank {
            return None;
        }
        let mut sorted = tuple.to_vec();
        let parity = sort_with_parity(&mut sorted);
        if parity == 0 {
            return Some(0);
        }
        self.index.get(&sorted).map(|&i| parity * self.tuples[i].1)
    }

    /// Positively oriented ordering of every stored tuple.
    pub fn positive_bases(&self) -> Vec<Vec<usize>> {
        self.tuples
            .iter()
            .map(|(t, s)| {
                let mut t = t.clone();
                if *s < 0 {
                    t.swap(0, 1);
                }
                t
            })
            .collect()
    }

    /// Three-term Grassmann–Plücker relations
    /// `[σab][σcd] − [σac][σbd] + [σad][σbc] = 0` whose six brackets are all
    /// defined and whose sign pattern makes the relation impossible. Each
    /// violation is reported as `(σ, [a, b, c, d])`.
    pub fn gp_violations(&self) -> Vec<(Vec<usize>, [usize; 4])> {
        if self.rank < 2 {
            return Vec::new();
        }
        let k = self.rank - 2;
        // group the pairs {a, b} completing each (r−2)-subset σ
        let mut groups: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (t, _) in &self.tuples {
            for_each_subset(t.len(), k, |pick| {
                let sigma: Vec<usize> = pick.iter().map(|&i| t[i]).collect();
                let rest: Vec<usize> = (0..t.len()).filter(|i| !pick.contains(i)).map(|i| t[i]).collect();
                groups.entry(sigma).or_default().push((rest[0], rest[1]));
            });
        }
        let mut out = Vec::new();
        for (sigma, pairs) in groups {
            let mut verts: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            verts.sort_unstable();
            verts.dedup();
            if verts.len() < 4 {
                continue;
            }
            let bracket = |a: usize, b: usize| -> Option<i8> {
                let mut t = sigma.clone();
                t.push(a);
                t.push(b);
                self.query(&t)
            };
            for_each_subset(verts.len(), 4, |pick| {
                let [a, b, c, d] = [verts[pick[0]], verts[pick[1]], verts[pick[2]], verts[pick[3]]];
                let signs = [
                    bracket(a, b),
                    bracket(c, d),
                    bracket(a, c),
                    bracket(b, d),
                    bracket(a, d),
                    bracket(b, c),
                ];
                if signs.iter().all(Option::is_some) {
                    let s: Vec<i8> = signs.iter().map(|s| s.unwrap()).collect();
                    if !gp_terms_possible([s[0] * s[1], -s[2] * s[3], s[4] * s[5]]) {
                        out.push((sigma.clone(), [a, b, c, d]));
                    }
                }
            });
        }
        out
    }
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        f(&pick);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pick[i] < n - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A signed sum of positive magnitudes can vanish iff every term is zero or
/// both signs occur.
fn gp_terms_possible(terms: [i8; 3]) -> bool {
    let pos = terms.iter().any(|&t| t > 0);
    let neg = terms.iter().any(|&t| t < 0);
    pos == neg
}

/// Whether the bracket signs `([123], [145], [124], [135], [125], [134])`
/// are compatible with `[123][145] − [124][135] + [125][134] = 0`. A zero
/// bracket removes its term.
pub fn check_gp_signs(signs: [i8; 6]) -> bool {
    gp_terms_possible([signs[0] * signs[1], -signs[2] * signs[3], signs[4] * signs[5]])
}

/// Raw orientation determinant of `tuple` (see the module docs).
pub fn orientation_det(conf: &Conformation, tuple: &[usize]) -> Result<f64> {
    let r = tuple.len();
    let dim = conf.dim();
    let homogeneous = if dim + 1 == r {
        true
    } else if dim == r {
        false
    } else {
        return Err(Error::DimensionMismatch { expected: r - 1, got: dim });
    };
    if let Some(&u) = tuple.iter().find(|&&u| u >= conf.len()) {
        return Err(Error::OutOfRange { index: u, size: conf.len() });
    }
    if homogeneous && r == 4 {
        let a = conf.point(tuple[0]);
        let col = |i: usize| {
            let p = conf.point(tuple[i]);
            [p[0] - a[0], p[1] - a[1], p[2] - a[2]]
        };
        return Ok(geom::det3(col(1), col(2), col(3)));
    }
    let mut m = Vec::with_capacity(r * r);
    for &u in tuple {
        if homogeneous {
            m.push(1.0);
        }
        m.extend_from_slice(conf.point(u));
    }
    Ok(geom::det(m, r))
}

/// Sign of [`orientation_det`], with magnitudes below [`ZERO_TOL`] as 0.
pub fn chi_of_points(conf: &Conformation, tuple: &[usize]) -> Result<i8> {
    let d = orientation_det(conf, tuple)?;
    Ok(if d.abs() < ZERO_TOL { 0 } else if d > 0.0 { 1 } else { -1 })
}

/// Whether every stored tuple containing `u` has its stored (nonzero)
/// sign in `conf`.
pub fn check_chirality(chi: &PartialChirotope, conf: &Conformation, u: usize) -> bool {
    chi.entries_with(u)
        .all(|(t, s)| chi_of_points(conf, t).map_or(false, |got| got == s))
}

impl ChiralityCheck for PartialChirotope {
    fn holds_at(&self, conf: &Conformation, u: usize) -> bool {
        check_chirality(self, conf, u)
    }

    fn holds_everywhere(&self, conf: &Conformation) -> bool {
        self.entries()
            .all(|(t, s)| chi_of_points(conf, t).map_or(false, |got| got == s))
    }
}

/// Ordered bases `(a, b, c, d)` that must satisfy
/// `det(x_b − x_a, x_c − x_a, x_d − x_a) ≥ ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRequest {
    pub vertices: usize,
    pub bases: Vec<[usize; 4]>,
}

impl RealizationRequest {
    pub fn new(vertices: usize, bases: Vec<[usize; 4]>) -> Result<Self> {
        for b in &bases {
            let mut s = b.to_vec();
            if sort_with_parity(&mut s) == 0 {
                return Err(Error::InvalidConfig(format!("base {b:?} repeats a vertex")));
            }
            if let Some(&u) = b.iter().find(|&&u| u >= vertices) {
                return Err(Error::OutOfRange { index: u, size: vertices });
            }
        }
        Ok(Self { vertices, bases })
    }

    /// Positive bases of a rank-4 chirotope.
    pub fn from_chirotope(vertices: usize, chi: &PartialChirotope) -> Result<Self> {
        if chi.rank() != 4 {
            return Err(Error::InvalidConfig(format!("realization needs rank 4, got {}", chi.rank())));
        }
        let bases = chi.positive_bases().into_iter().map(|t| [t[0], t[1], t[2], t[3]]).collect();
        Self::new(vertices, bases)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub conformation: Conformation,
    pub epsilon: f64,
    /// Smallest base determinant in the returned conformation.
    pub min_det: f64,
}

/// Fixed planar coordinates `(cos 2πi/n, sin 2πi/n)` of vertex `i`.
pub fn circle_point(i: usize, n: usize) -> [f64; 2] {
    let t = 2.0 * PI * i as f64 / n as f64;
    [t.cos(), t.sin()]
}

/// Minimum base volume `sin(2π/n)³`.
pub fn circle_epsilon(n: usize) -> f64 {
    (2.0 * PI / n as f64).sin().powi(3)
}

/// Coefficients of `z_a, z_b, z_c, z_d` in the orientation determinant once
/// the planar coordinates are fixed: the cofactors of the height column of
/// the homogeneous 4×4 matrix.
pub fn height_cofactors(planar: [[f64; 2]; 4]) -> [f64; 4] {
    let minor = |skip: usize| {
        let rows: Vec<[f64; 2]> = (0..4).filter(|&i| i != skip).map(|i| planar[i]).collect();
        // det of rows (1, x, y)
        (rows[1][0] - rows[0][0]) * (rows[2][1] - rows[0][1]) - (rows[2][0] - rows[0][0]) * (rows[1][1] - rows[0][1])
    };
    // expansion along column 4 of rows (1, x, y, z): sign (−1)^(i+4)
    [-minor(0), minor(1), -minor(2), minor(3)]
}

/// Places every vertex on the unit circle and solves for heights `z ≥ 0`
/// making each base determinant at least `sin(2π/n)³`. The result is audited
/// against the requested bases.
pub fn realize_lp(request: &RealizationRequest) -> Result<Realization> {
    let n = request.vertices;
    if n < 4 {
        return Err(Error::InvalidConfig(format!("realization needs at least 4 vertices, got {n}")));
    }
    let epsilon = circle_epsilon(n);
    // heights only for vertices that appear in a base
    let mut column = vec![usize::MAX; n];
    let mut used = Vec::new();
    for b in &request.bases {
        for &v in b {
            if column[v] == usize::MAX {
                column[v] = used.len();
                used.push(v);
            }
        }
    }
    let rows = constraint_rows(request, &column, used.len());
    let z = match lp::realize_via_dual(&rows, epsilon) {
        Ok(sol) => sol.z,
        Err(Error::Infeasible(_)) => {
            let core = infeasible_core(&rows, epsilon);
            let bases: Vec<[usize; 4]> = core.iter().map(|&i| request.bases[i]).collect();
            return Err(Error::Infeasible(format!(
                "no heights satisfy the bases; conflicting subsystem: {bases:?}"
            )));
        }
        Err(e) => return Err(e),
    };
    let mut coords = Vec::with_capacity(3 * n);
    for v in 0..n {
        let [x, y] = circle_point(v, n);
        let h = if column[v] == usize::MAX { 0.0 } else { z[column[v]].max(0.0) };
        coords.extend_from_slice(&[x, y, h]);
    }
    let conformation = Conformation::from_flat(3, coords)?;
    let min_det = request
        .bases
        .iter()
        .map(|b| orientation_det(&conformation, b).unwrap())
        .fold(f64::INFINITY, f64::min);
    if !request.bases.is_empty() && min_det < epsilon - 1e-8 {
        return Err(Error::Infeasible(format!(
            "residual audit failed: smallest base volume {min_det:e} below {epsilon:e}"
        )));
    }
    Ok(Realization {
        conformation,
        epsilon,
        min_det,
    })
}

fn constraint_rows(request: &RealizationRequest, column: &[usize], width: usize) -> Vec<Vec<f64>> {
    let n = request.vertices;
    request
        .bases
        .iter()
        .map(|b| {
            let planar = [circle_point(b[0], n), circle_point(b[1], n), circle_point(b[2], n), circle_point(b[3], n)];
            let cof = height_cofactors(planar);
            let mut row = vec![0.0; width];
            for (k, &v) in b.iter().enumerate() {
                row[column[v]] += cof[k];
            }
            row
        })
        .collect()
}

/// Deletion filter: a subset of rows that is still infeasible but becomes
/// feasible when any single row is removed.
fn infeasible_core(rows: &[Vec<f64>], epsilon: f64) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..rows.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<Vec<f64>> = keep
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &r)| rows[r].clone())
            .collect();
        if matches!(lp::realize_via_dual(&trial, epsilon), Err(Error::Infeasible(_))) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep
}

/// Result of splitting vertices: the enlarged graph and chirotope, and for
/// every vertex the original vertex it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub graph: WeightedGraph,
    pub chirotope: PartialChirotope,
    pub origin: Vec<usize>,
}

impl SplitResult {
    /// Extends a conformation of the original graph by copying each
    /// victim's position to its clones.
    pub fn expand(&self, conf: &Conformation) -> Conformation {
        let mut out = Conformation::zeros(0, conf.dim());
        for &o in &self.origin {
            out.push(conf.point(o));
        }
        out
    }

    /// Collapses clones back onto their original vertex by averaging.
    pub fn merge(&self, conf: &Conformation) -> Conformation {
        let originals = self.origin.iter().copied().max().map_or(0, |m| m + 1);
        let dim = conf.dim();
        let mut sum = vec![0.0; originals * dim];
        let mut count = vec![0usize; originals];
        for (v, &o) in self.origin.iter().enumerate() {
            for i in 0..dim {
                sum[o * dim + i] += conf.point(v)[i];
            }
            count[o] += 1;
        }
        for o in 0..originals {
            for i in 0..dim {
                sum[o * dim + i] /= count[o].max(1) as f64;
            }
        }
        Conformation::from_flat(dim, sum).expect("finite averages")
    }
}

/// Stiffness of the zero-length edges tying clones together.
pub const CLONE_STIFFNESS: f64 = 1.0;

/// Splits each victim that lies in `t > 1` stored tuples into `t` copies,
/// one tuple per copy. Copies inherit the victim's edges and are joined
/// pairwise by zero-length edges.
pub fn split_vertices(graph: &WeightedGraph, chi: &PartialChirotope, victims: &[usize]) -> Result<SplitResult> {
    let mut g = graph.clone();
    let mut origin: Vec<usize> = (0..graph.vertex_count()).collect();
    // for each stored tuple, the vertex ids after splitting
    let mut tuples: Vec<(Vec<usize>, i8)> = chi.tuples.clone();
    for &victim in victims {
        if victim >= graph.vertex_count() {
            return Err(Error::OutOfRange { index: victim, size: graph.vertex_count() });
        }
        let carrying: Vec<usize> = (0..tuples.len()).filter(|&i| tuples[i].0.contains(&victim)).collect();
        if carrying.len() < 2 {
            continue;
        }
        let mut clones = vec![victim];
        for &ti in &carrying[1..] {
            let c = g.add_vertex();
            origin.push(victim);
            for nb in graph.neighbors(victim) {
                g.add_edge(c, nb.vertex, nb.length, nb.stiffness)?;
            }
            for t in tuples[ti].0.iter_mut() {
                if *t == victim {
                    *t = c;
                }
            }
            clones.push(c);
        }
        for i in 0..clones.len() {
            for j in i + 1..clones.len() {
                g.add_edge(clones[i], clones[j], 0.0, CLONE_STIFFNESS)?;
            }
        }
    }
    let mut out = PartialChirotope::new(chi.rank());
    for (t, s) in tuples {
        out.insert(&t, s)?;
    }
    Ok(SplitResult {
        graph: g,
        chirotope: out,
        origin,
    })
}
