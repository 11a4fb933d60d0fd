//! Reference molecules and small benchmark instances.
//!
//! Peptides are grown atom by atom from internal coordinates (bond length,
//! bond angle, torsion) with ideal backbone geometry. The coordinates serve
//! as a source of chirality signs and target distances.

use crate::chirotope::{self, PartialChirotope};
use crate::error::Result;
use crate::graph::{ChiralityRecord, Conformation, GraphDocument, RadiusMap, WeightedGraph};

/// Places a point `d` bonded to `c` with `|cd| = bond`, angle `b-c-d` and
/// torsion `a-b-c-d` (degrees).
pub fn place_atom(a: [f64; 3], b: [f64; 3], c: [f64; 3], bond: f64, angle: f64, torsion: f64) -> [f64; 3] {
    let (angle, torsion) = (angle.to_radians(), torsion.to_radians());
    let bc = normalize(sub(c, b));
    let n = normalize(cross(sub(b, a), bc));
    let m = cross(n, bc);
    let d = [
        -bond * angle.cos(),
        bond * angle.sin() * torsion.cos(),
        bond * angle.sin() * torsion.sin(),
    ];
    [0, 1, 2].map(|i| c[i] + d[0] * bc[i] + d[1] * m[i] + d[2] * n[i])
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// A tetrahedral center and its four substituents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralCenter {
    pub center: usize,
    pub substituents: [usize; 4],
}

impl ChiralCenter {
    /// The three tuples `(c, s1, s2, s3)`, `(c, s1, s2, s4)`, `(c, s1, s3, s4)`.
    pub fn bases(&self) -> [[usize; 4]; 3] {
        let [s1, s2, s3, s4] = self.substituents;
        let c = self.center;
        [[c, s1, s2, s3], [c, s1, s2, s4], [c, s1, s3, s4]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub names: Vec<String>,
    pub residue: Vec<usize>,
    pub coords: Conformation,
    pub bonds: Vec<(usize, usize)>,
    pub centers: Vec<ChiralCenter>,
}

impl Molecule {
    fn empty() -> Self {
        Self {
            names: Vec::new(),
            residue: Vec::new(),
            coords: Conformation::zeros(0, 3),
            bonds: Vec::new(),
            centers: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, residue: usize, p: [f64; 3]) -> usize {
        self.names.push(name.to_string());
        self.residue.push(residue);
        self.coords.push(&p);
        self.names.len() - 1
    }

    fn at(&self, i: usize) -> [f64; 3] {
        let p = self.coords.point(i);
        [p[0], p[1], p[2]]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Index of atom `name` in residue `residue`.
    pub fn find(&self, residue: usize, name: &str) -> Option<usize> {
        (0..self.len()).find(|&i| self.residue[i] == residue && self.names[i] == name)
    }

    /// Rank-4 chirotope of every chiral center, three bases each, with
    /// signs read from the reference coordinates.
    pub fn chirotope(&self) -> Result<PartialChirotope> {
        let mut chi = PartialChirotope::new(4);
        for c in &self.centers {
            for b in c.bases() {
                let s = chirotope::chi_of_points(&self.coords, &b)?;
                chi.insert(&b, s)?;
            }
        }
        Ok(chi)
    }

    /// Pairs joined by one bond (1-2) or sharing a bonded neighbor (1-3).
    pub fn bonded_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.bonds {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut pairs: Vec<(usize, usize)> = self.bonds.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        for nbrs in &adj {
            for (i, &u) in nbrs.iter().enumerate() {
                for &v in &nbrs[i + 1..] {
                    pairs.push((u.min(v), u.max(v)));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

/// Ideal backbone geometry (Å, degrees).
const N_CA: f64 = 1.458;
const CA_C: f64 = 1.525;
const C_N: f64 = 1.329;
const C_O: f64 = 1.231;
const N_H: f64 = 1.01;
const C_H: f64 = 1.09;
const ANGLE_N_CA_C: f64 = 111.2;
const ANGLE_CA_C_N: f64 = 116.2;
const ANGLE_C_N_CA: f64 = 121.7;
const TETRAHEDRAL: f64 = 109.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideChain {
    Alanine,
    Threonine,
}

/// Backbone torsions `(φ, ψ)` in degrees.
pub const EXTENDED: (f64, f64) = (-120.0, 130.0);
pub const ALPHA_HELIX: (f64, f64) = (-57.0, -47.0);

/// A linear L-peptide of `residues` identical residues with all-trans
/// peptide bonds. Threonine atoms are ordered
/// H N HA CA CB HB OG1 HG1 CG2 HG21 HG22 HG23 C O and alanine atoms
/// H N HA CA CB HB1 HB2 HB3 C O. The order fixes each atom's place on the
/// circle used by [`chirotope::realize_lp`]: with `N H CA HA` the three
/// Cα bases of a residue admit no heights.
pub fn peptide(side: SideChain, residues: usize, torsions: (f64, f64)) -> Molecule {
    let (phi, psi) = torsions;
    let mut m = Molecule::empty();
    let mut prev: Option<(usize, usize, usize)> = None; // N, CA, C of previous residue
    for r in 0..residues {
        let (n, ca, c) = match prev {
            None => {
                let n = [0.0, 0.0, 0.0];
                let ca = [N_CA, 0.0, 0.0];
                let c = place_atom([0.0, 1.0, 0.0], n, ca, CA_C, ANGLE_N_CA_C, phi);
                (n, ca, c)
            }
            Some((pn, pca, pc)) => {
                let n = place_atom(m.at(pn), m.at(pca), m.at(pc), C_N, ANGLE_CA_C_N, psi);
                let ca = place_atom(m.at(pca), m.at(pc), n, N_CA, ANGLE_C_N_CA, 180.0);
                let c = place_atom(m.at(pc), n, ca, CA_C, ANGLE_N_CA_C, phi);
                (n, ca, c)
            }
        };
        let h = match prev {
            None => place_atom(c, ca, n, N_H, TETRAHEDRAL, 180.0),
            Some((_, pca, pc)) => place_atom(m.at(pca), m.at(pc), n, N_H, 119.5, 0.0),
        };
        let ha = place_atom(c, n, ca, C_H, TETRAHEDRAL, 118.0);
        let cb = place_atom(c, n, ca, 1.53, 110.5, -122.5);
        let o = place_atom(n, ca, c, C_O, 120.5, psi + 180.0);
        let ids = match side {
            SideChain::Threonine => {
                let ih = m.add("H", r, h);
                let i_n = m.add("N", r, n);
                let iha = m.add("HA", r, ha);
                let ica = m.add("CA", r, ca);
                let icb = m.add("CB", r, cb);
                let hb = place_atom(n, ca, cb, C_H, TETRAHEDRAL, 60.0);
                let og1 = place_atom(n, ca, cb, 1.43, TETRAHEDRAL, -60.0);
                let cg2 = place_atom(n, ca, cb, 1.52, 110.5, 180.0);
                let ihb = m.add("HB", r, hb);
                let iog = m.add("OG1", r, og1);
                let ihg = m.add("HG1", r, place_atom(ca, cb, og1, 0.96, TETRAHEDRAL, 180.0));
                let icg = m.add("CG2", r, cg2);
                let hg: Vec<usize> = ["HG21", "HG22", "HG23"]
                    .iter()
                    .enumerate()
                    .map(|(k, name)| m.add(name, r, place_atom(ca, cb, cg2, C_H, TETRAHEDRAL, 60.0 + 120.0 * k as f64)))
                    .collect();
                let ic = m.add("C", r, c);
                let io = m.add("O", r, o);
                m.bonds.extend([(ih, i_n), (i_n, ica), (iha, ica), (ica, icb), (icb, ihb), (icb, iog), (iog, ihg), (icb, icg)]);
                m.bonds.extend(hg.iter().map(|&x| (icg, x)));
                m.bonds.extend([(ica, ic), (ic, io)]);
                m.centers.push(ChiralCenter { center: ica, substituents: [i_n, ic, icb, iha] });
                m.centers.push(ChiralCenter { center: icb, substituents: [iog, ica, icg, ihb] });
                (i_n, ica, ic)
            }
            SideChain::Alanine => {
                let ih = m.add("H", r, h);
                let i_n = m.add("N", r, n);
                let iha = m.add("HA", r, ha);
                let ica = m.add("CA", r, ca);
                let icb = m.add("CB", r, cb);
                let hb: Vec<usize> = ["HB1", "HB2", "HB3"]
                    .iter()
                    .enumerate()
                    .map(|(k, name)| m.add(name, r, place_atom(n, ca, cb, C_H, TETRAHEDRAL, 60.0 + 120.0 * k as f64)))
                    .collect();
                let ic = m.add("C", r, c);
                let io = m.add("O", r, o);
                m.bonds.extend([(ih, i_n), (i_n, ica), (iha, ica), (ica, icb)]);
                m.bonds.extend(hb.iter().map(|&x| (icb, x)));
                m.bonds.extend([(ica, ic), (ic, io)]);
                m.centers.push(ChiralCenter { center: ica, substituents: [i_n, ic, icb, iha] });
                (i_n, ica, ic)
            }
        };
        if let Some((_, _, pc)) = prev {
            m.bonds.push((pc, ids.0));
        }
        prev = Some(ids);
    }
    m
}

/// Target distances and radii of the helix pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct HelixConfig {
    pub residues: usize,
    /// `O(i)–H(i+4)` hydrogen-bond length.
    pub hbond_oh: f64,
    /// `O(i)–N(i+4)` length.
    pub hbond_on: f64,
    /// `Cα(i)–Cα(i+2)` spacing.
    pub ca_ca_2: f64,
    pub stiffness: f64,
    pub radius: f64,
}

impl Default for HelixConfig {
    fn default() -> Self {
        Self {
            residues: 7,
            hbond_oh: 2.06,
            hbond_on: 2.99,
            ca_ca_2: 5.45,
            stiffness: 10.0,
            radius: 0.3,
        }
    }
}

/// Poly-alanine helix instance: 1-2 and 1-3 distances from ideal geometry,
/// hydrogen-bond and Cα spacing edges from `config`, Cα chirality, and
/// uniform radii. The reference helix is returned as the conformation.
pub fn alanine_helix(config: &HelixConfig) -> Result<GraphDocument> {
    let m = peptide(SideChain::Alanine, config.residues, ALPHA_HELIX);
    let mut g = WeightedGraph::new(m.len(), 3)?;
    for (u, v) in m.bonded_pairs() {
        let d = crate::geom::dist(m.coords.point(u), m.coords.point(v));
        g.add_edge(u, v, d, config.stiffness)?;
    }
    let find = |r, name| m.find(r, name).expect("atom present");
    for r in 0..config.residues {
        if r + 4 < config.residues {
            g.add_edge(find(r, "O"), find(r + 4, "H"), config.hbond_oh, config.stiffness)?;
            g.add_edge(find(r, "O"), find(r + 4, "N"), config.hbond_on, config.stiffness)?;
        }
        if r + 2 < config.residues {
            g.add_edge(find(r, "CA"), find(r + 2, "CA"), config.ca_ca_2, config.stiffness)?;
        }
    }
    let chi = m.chirotope()?;
    Ok(GraphDocument {
        graph: g,
        conformation: Some(m.coords.clone()),
        radii: RadiusMap::uniform(m.len(), config.radius)?,
        chirality: records(&chi),
    })
}

/// Extended threonine chain of `residues` residues as a graph document:
/// 1-2 and 1-3 distances, three orientation constraints per chiral center
/// and uniform radii. No coordinates are attached.
pub fn threonine_chain(residues: usize, radius: f64) -> Result<GraphDocument> {
    let m = peptide(SideChain::Threonine, residues, EXTENDED);
    let mut g = WeightedGraph::new(m.len(), 3)?;
    for (u, v) in m.bonded_pairs() {
        g.add_edge(u, v, crate::geom::dist(m.coords.point(u), m.coords.point(v)), 1.0)?;
    }
    Ok(GraphDocument {
        graph: g,
        conformation: None,
        radii: RadiusMap::uniform(m.len(), radius)?,
        chirality: records(&m.chirotope()?),
    })
}

/// Chirality records of every stored tuple.
pub fn records(chi: &PartialChirotope) -> Vec<ChiralityRecord> {
    chi.entries()
        .map(|(t, s)| ChiralityRecord { vertices: t.to_vec(), sign: s })
        .collect()
}

/// Regular tetrahedron with unit edges, started from a squashed
/// configuration.
pub fn tetrahedron() -> GraphDocument {
    let mut g = WeightedGraph::new(4, 3).unwrap();
    for u in 0..4 {
        for v in u + 1..4 {
            g.add_edge(u, v, 1.0, 1.0).unwrap();
        }
    }
    let start = Conformation::from_flat(3, vec![0.0, 0.0, 0.0, 2.0, 0.1, 0.0, 0.3, 1.5, 0.2, 0.9, 0.6, 0.05]).unwrap();
    GraphDocument {
        graph: g,
        conformation: Some(start),
        radii: RadiusMap::uniform(4, 0.01).unwrap(),
        chirality: Vec::new(),
    }
}

/// The planar jam: `A=(0,0)`, `B=(4,3)`, `C=(4,-3)`, `D=(0,5)` with
/// `|AB| = |AC| = 5`, `|BC| = 6`, `|AD| = 0.01`, radii 0.001 and the
/// constraint that `B, C, D` be counter-clockwise (the start is clockwise).
pub fn jam_instance() -> GraphDocument {
    let mut g = WeightedGraph::new(4, 2).unwrap();
    g.add_edge(0, 1, 5.0, 1.0).unwrap();
    g.add_edge(0, 2, 5.0, 1.0).unwrap();
    g.add_edge(1, 2, 6.0, 1.0).unwrap();
    g.add_edge(0, 3, 0.01, 1.0).unwrap();
    let conf = Conformation::from_flat(2, vec![0.0, 0.0, 4.0, 3.0, 4.0, -3.0, 0.0, 5.0]).unwrap();
    GraphDocument {
        graph: g,
        conformation: Some(conf),
        radii: RadiusMap::uniform(4, 0.001).unwrap(),
        chirality: vec![ChiralityRecord { vertices: vec![1, 2, 3], sign: 1 }],
    }
}
