//! Weighted molecular graphs, conformations and the vertex center.
//!
//! Each undirected edge carries a desired length `W` and a spring constant
//! `h`. The center of a vertex is the spring-weighted mean of the positions
//! each incident edge would like it to occupy; a conformation lies in the
//! restricted space `D(S)` when every vertex is within its radius of its
//! center.

use crate::error::{Error, Result};
use crate::geom;
use std::fmt::Write as _;

/// Neighbor entry of an adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub length: f64,
    pub stiffness: f64,
}

/// Undirected edge, stored once with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub stiffness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    dim: usize,
    adj: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(vertices: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("graph dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            adj: vec![Vec::new(); vertices],
            edges: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[Neighbor] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// Appends a vertex and returns its id.
    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds the undirected edge `{u, v}`. A zero length is allowed (it ties
    /// split copies of one vertex together); the stiffness must be positive.
    pub fn add_edge(&mut self, u: usize, v: usize, length: f64, stiffness: f64) -> Result<()> {
        let n = self.vertex_count();
        for x in [u, v] {
            if x >= n {
                return Err(Error::OutOfRange { index: x, size: n });
            }
        }
        if u == v {
            return Err(Error::InvalidConfig(format!("self loop on vertex {u}")));
        }
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::InvalidConfig(format!("edge {u}-{v}: length {length} must be >= 0")));
        }
        if !(stiffness > 0.0 && stiffness.is_finite()) {
            return Err(Error::InvalidConfig(format!("edge {u}-{v}: stiffness {stiffness} must be > 0")));
        }
        if self.adj[u].iter().any(|nb| nb.vertex == v) {
            return Err(Error::InvalidConfig(format!("duplicate edge {u}-{v}")));
        }
        self.adj[u].push(Neighbor { vertex: v, length, stiffness });
        self.adj[v].push(Neighbor { vertex: u, length, stiffness });
        self.edges.push(Edge {
            u: u.min(v),
            v: u.max(v),
            length,
            stiffness,
        });
        Ok(())
    }

    /// Removes `{u, v}` if present; returns whether an edge was removed.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if u >= self.vertex_count() || v >= self.vertex_count() {
            return false;
        }
        let before = self.adj[u].len();
        self.adj[u].retain(|nb| nb.vertex != v);
        if self.adj[u].len() == before {
            return false;
        }
        self.adj[v].retain(|nb| nb.vertex != u);
        let (a, b) = (u.min(v), u.max(v));
        self.edges.retain(|e| !(e.u == a && e.v == b));
        true
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<Neighbor> {
        self.adj.get(u)?.iter().find(|nb| nb.vertex == v).copied()
    }
}

/// Per-vertex coordinates, stored vertex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    dim: usize,
    coords: Vec<f64>,
}

impl Conformation {
    pub fn zeros(vertices: usize, dim: usize) -> Self {
        Self {
            dim,
            coords: vec![0.0; vertices * dim],
        }
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {} of vertex {}", i % dim, i / dim)));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, u: usize) -> &[f64] {
        &self.coords[u * self.dim..(u + 1) * self.dim]
    }

    pub fn point_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.coords[u * self.dim..(u + 1) * self.dim]
    }

    pub fn set_point(&mut self, u: usize, p: &[f64]) {
        self.point_mut(u).copy_from_slice(p);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.coords {
            *x *= factor;
        }
    }

    pub fn translate(&mut self, offset: &[f64]) {
        for p in self.coords.chunks_exact_mut(self.dim) {
            for (x, o) in p.iter_mut().zip(offset) {
                *x += o;
            }
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.coords.chunks_exact(self.dim) {
            for (s, x) in c.iter_mut().zip(p) {
                *s += x;
            }
        }
        let n = self.len().max(1) as f64;
        c.iter_mut().for_each(|s| *s /= n);
        c
    }

    /// `id,x,y,z` rows; planar conformations get `z = 0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,x,y,z\n");
        for u in 0..self.len() {
            let p = self.point(u);
            let get = |i: usize| p.get(i).copied().unwrap_or(0.0);
            writeln!(out, "{u},{},{},{}", get(0), get(1), get(2)).unwrap();
        }
        out
    }

    /// Reads `id,x,y,z` rows back; `dim` selects how many coordinates to
    /// keep.
    pub fn from_csv(text: &str, dim: usize) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("id")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse { line: i + 1, msg: "expected id,x,y,z".into() });
            }
            let id = fields[0]
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad id {:?}", fields[0]) })?;
            let mut p = Vec::with_capacity(3);
            for f in &fields[1..] {
                p.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad number {f:?}") })?,
                );
            }
            p.truncate(dim);
            rows.push((id, p));
        }
        rows.sort_by_key(|r| r.0);
        for (k, (id, _)) in rows.iter().enumerate() {
            if *id != k {
                return Err(Error::Parse { line: 0, msg: format!("vertex ids must be 0..n, missing {k}") });
            }
        }
        let points: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
        Self::from_points(dim, &points)
    }
}

/// Per-vertex radius `S(u)`. A zero radius exempts the vertex from the
/// neighbor distance check.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusMap(Vec<f64>);

impl RadiusMap {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if let Some(u) = radii.iter().position(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig(format!("radius of vertex {u} must be finite and >= 0")));
        }
        Ok(Self(radii))
    }

    pub fn uniform(vertices: usize, radius: f64) -> Result<Self> {
        Self::new(vec![radius; vertices])
    }

    pub fn get(&self, u: usize) -> f64 {
        self.0[u]
    }

    pub fn set(&mut self, u: usize, radius: f64) {
        self.0[u] = radius;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|s| s * factor).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn push(&mut self, radius: f64) {
        self.0.push(radius);
    }
}

/// Center of vertex `u`. Neighbors sitting exactly on `u` cannot supply a
/// direction; their pull is applied along the direction from `u` toward the
/// center of the remaining neighbors. An isolated vertex, or one whose
/// neighbors all coincide with it, is its own center.
pub fn center(graph: &WeightedGraph, conf: &Conformation, u: usize) -> Vec<f64> {
    let mut out = vec![0.0; conf.dim()];
    center_into(graph, conf, u, &mut out);
    out
}

/// Allocation-free form of [`center`].
pub fn center_into(graph: &WeightedGraph, conf: &Conformation, u: usize, out: &mut [f64]) {
    let dim = conf.dim();
    let au = conf.point(u);
    let mut t = 0.0;
    let mut q = 0.0;
    let mut f = 0.0;
    out.fill(0.0);
    for nb in graph.neighbors(u) {
        let av = conf.point(nb.vertex);
        let mut r2 = 0.0;
        for i in 0..dim {
            let z = au[i] - av[i];
            r2 += z * z;
        }
        let r = r2.sqrt();
        if r > 0.0 {
            let k = nb.length / r;
            for i in 0..dim {
                out[i] += nb.stiffness * (av[i] + k * (au[i] - av[i]));
            }
            t += nb.stiffness;
        } else {
            f += nb.stiffness * nb.length;
            q += nb.stiffness;
        }
    }
    if q > 0.0 && t > 0.0 {
        let mut r2 = 0.0;
        for i in 0..dim {
            let z = out[i] / t - au[i];
            r2 += z * z;
        }
        let r = r2.sqrt();
        if r > 0.0 {
            for i in 0..dim {
                let z = out[i] / t - au[i];
                out[i] += q * au[i] + (f / r) * z;
            }
            let shrink = t / (t + q);
            out.iter_mut().for_each(|y| *y *= shrink);
        }
    }
    if t > 0.0 {
        out.iter_mut().for_each(|y| *y /= t);
    } else {
        out.copy_from_slice(au);
    }
}

/// `Σ_e (h/2)(‖e‖ − W)²` over undirected edges.
pub fn hooke_potential(graph: &WeightedGraph, conf: &Conformation) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let d = geom::dist(conf.point(e.u), conf.point(e.v)) - e.length;
            0.5 * e.stiffness * d * d
        })
        .sum()
}

/// Hooke energy of the edges incident to `u`.
pub fn local_hooke(graph: &WeightedGraph, conf: &Conformation, u: usize) -> f64 {
    let au = conf.point(u);
    graph
        .neighbors(u)
        .iter()
        .map(|nb| {
            let d = geom::dist(au, conf.point(nb.vertex)) - nb.length;
            0.5 * nb.stiffness * d * d
        })
        .sum()
}

/// Distance from `u` to its center.
pub fn center_offset(graph: &WeightedGraph, conf: &Conformation, u: usize) -> f64 {
    geom::dist(conf.point(u), &center(graph, conf, u))
}

/// Whether every vertex with positive radius lies strictly within that
/// radius of its center.
pub fn in_restricted_space(graph: &WeightedGraph, conf: &Conformation, radii: &RadiusMap) -> bool {
    (0..graph.vertex_count()).all(|u| {
        let s = radii.get(u);
        s == 0.0 || center_offset(graph, conf, u) < s
    })
}

/// Sign constraint read from a `chi` line: the listed vertices, in order,
/// and the required orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiralityRecord {
    pub vertices: Vec<usize>,
    pub sign: i8,
}

/// Everything a graph file can carry.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub graph: WeightedGraph,
    /// Present only when every vertex line gave coordinates.
    pub conformation: Option<Conformation>,
    pub radii: RadiusMap,
    pub chirality: Vec<ChiralityRecord>,
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad {what} {tok:?}") })
}

/// Parses the line-oriented graph format:
///
/// ```text
/// dim 3
/// vertex 0 0.0 0.0 0.0
/// edge 0 1 1.5 1.0
/// radius 0 0.1
/// chi 0 1 2 3 +1
/// ```
///
/// `#` starts a comment. Vertex ids must be `0..n`. Radii default to 0.
pub fn parse_graph_text(text: &str) -> Result<GraphDocument> {
    let mut dim: Option<usize> = None;
    let mut vertices: Vec<(usize, Option<Vec<f64>>)> = Vec::new();
    let mut edges: Vec<(usize, usize, usize, f64, f64)> = Vec::new();
    let mut radii: Vec<(usize, usize, f64)> = Vec::new();
    let mut chis: Vec<(usize, Vec<usize>, i8)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "dim" => {
                if toks.len() != 2 {
                    return Err(Error::Parse { line: ln, msg: "usage: dim <d>".into() });
                }
                if dim.is_some() {
                    return Err(Error::Parse { line: ln, msg: "dim given twice".into() });
                }
                let d: usize = parse_num(toks[1], ln, "dimension")?;
                if d == 0 {
                    return Err(Error::Parse { line: ln, msg: "dimension must be positive".into() });
                }
                dim = Some(d);
            }
            "vertex" => {
                let d = dim.ok_or(Error::Parse { line: ln, msg: "dim must precede vertex lines".into() })?;
                let id = parse_num(toks.get(1).copied().unwrap_or(""), ln, "vertex id")?;
                let coords = match toks.len() - 2 {
                    0 => None,
                    k if k == d => Some(
                        toks[2..]
                            .iter()
                            .map(|t| parse_num::<f64>(t, ln, "coordinate"))
                            .collect::<Result<Vec<_>>>()?,
                    ),
                    k => {
                        return Err(Error::Parse { line: ln, msg: format!("vertex needs 0 or {d} coordinates, got {k}") })
                    }
                };
                vertices.push((id, coords));
            }
            "edge" => {
                if toks.len() != 5 {
                    return Err(Error::Parse { line: ln, msg: "usage: edge <u> <v> <W> <h>".into() });
                }
                edges.push((
                    ln,
                    parse_num(toks[1], ln, "vertex id")?,
                    parse_num(toks[2], ln, "vertex id")?,
                    parse_num(toks[3], ln, "length")?,
                    parse_num(toks[4], ln, "stiffness")?,
                ));
            }
            "radius" => {
                if toks.len() != 3 {
                    return Err(Error::Parse { line: ln, msg: "usage: radius <id> <S>".into() });
                }
                radii.push((ln, parse_num(toks[1], ln, "vertex id")?, parse_num(toks[2], ln, "radius")?));
            }
            "chi" => {
                if toks.len() < 3 {
                    return Err(Error::Parse { line: ln, msg: "usage: chi <a> <b> ... <+1|-1>".into() });
                }
                let ids = toks[1..toks.len() - 1]
                    .iter()
                    .map(|t| parse_num::<usize>(t, ln, "vertex id"))
                    .collect::<Result<Vec<_>>>()?;
                let sign = match *toks.last().unwrap() {
                    "+1" | "1" | "+" => 1,
                    "-1" | "-" => -1,
                    s => return Err(Error::Parse { line: ln, msg: format!("sign must be +1 or -1, got {s:?}") }),
                };
                chis.push((ln, ids, sign));
            }
            kw => return Err(Error::Parse { line: ln, msg: format!("unknown keyword {kw:?}") }),
        }
    }

    let dim = dim.ok_or(Error::Parse { line: 0, msg: "missing dim line".into() })?;
    vertices.sort_by_key(|v| v.0);
    for (k, (id, _)) in vertices.iter().enumerate() {
        if *id != k {
            return Err(Error::Parse { line: 0, msg: format!("vertex ids must be dense 0..n; missing or repeated id near {k}") });
        }
    }
    let n = vertices.len();
    let mut graph = WeightedGraph::new(n, dim)?;
    for (ln, u, v, w, h) in edges {
        graph
            .add_edge(u, v, w, h)
            .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
    }
    let mut s = vec![0.0; n];
    for (ln, u, r) in radii {
        if u >= n {
            return Err(Error::Parse { line: ln, msg: format!("radius for unknown vertex {u}") });
        }
        if !(r >= 0.0) {
            return Err(Error::Parse { line: ln, msg: "radius must be >= 0".into() });
        }
        s[u] = r;
    }
    let mut chirality = Vec::with_capacity(chis.len());
    for (ln, ids, sign) in chis {
        if ids.len() != dim + 1 {
            return Err(Error::Parse { line: ln, msg: format!("chi needs {} vertices in dimension {dim}", dim + 1) });
        }
        if let Some(&u) = ids.iter().find(|&&u| u >= n) {
            return Err(Error::Parse { line: ln, msg: format!("chi references unknown vertex {u}") });
        }
        chirality.push(ChiralityRecord { vertices: ids, sign });
    }
    let conformation = if n > 0 && vertices.iter().all(|v| v.1.is_some()) {
        let pts: Vec<Vec<f64>> = vertices.into_iter().map(|v| v.1.unwrap()).collect();
        Some(Conformation::from_points(dim, &pts)?)
    } else {
        None
    };
    Ok(GraphDocument {
        graph,
        conformation,
        radii: RadiusMap::new(s)?,
        chirality,
    })
}

/// Writes a document back in the text format.
pub fn write_graph_text(doc: &GraphDocument) -> String {
    let g = &doc.graph;
    let mut out = format!("dim {}\n", g.dim());
    for u in 0..g.vertex_count() {
        write!(out, "vertex {u}").unwrap();
        if let Some(c) = &doc.conformation {
            for x in c.point(u) {
                write!(out, " {x}").unwrap();
            }
        }
        out.push('\n');
    }
    for e in g.edges() {
        writeln!(out, "edge {} {} {} {}", e.u, e.v, e.length, e.stiffness).unwrap();
    }
    for u in 0..doc.radii.len() {
        if doc.radii.get(u) > 0.0 {
            writeln!(out, "radius {u} {}", doc.radii.get(u)).unwrap();
        }
    }
    for c in &doc.chirality {
        out.push_str("chi");
        for v in &c.vertices {
            write!(out, " {v}").unwrap();
        }
        writeln!(out, " {}", if c.sign > 0 { "+1" } else { "-1" }).unwrap();
    }
    out
}
