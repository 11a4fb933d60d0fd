//! Whole-molecule workflow: realize the chirotope, rescale, settle by
//! vibrant centering with shrinking radii, then sample by restricted-space
//! Metropolis.

use crate::chirotope::{self, PartialChirotope, RealizationRequest};
use crate::distgeo::{self, AnnealReport, ChiralityCheck, VibrantParams};
use crate::error::{Error, Result};
use crate::geom;
use crate::graph::{self, Conformation, GraphDocument};
use crate::metropolis::{self, MCReport, PotentialModel};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Radius multipliers for vibrant centering, ending at 1.
    pub stages: Vec<f64>,
    pub steps_per_stage: usize,
    pub sweeps: usize,
    pub model: PotentialModel,
    pub vibrant: VibrantParams,
}

impl PipelineConfig {
    pub fn new(model: PotentialModel) -> Self {
        Self {
            stages: vec![100.0, 10.0, 1.0],
            steps_per_stage: 200_000,
            sweeps: 200,
            model,
            vibrant: VibrantParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    /// Smallest base determinant of the linear-programming start.
    pub realized_min_det: f64,
    pub anneal: AnnealReport,
    pub mc: MCReport,
    pub in_restricted_space: bool,
    pub chirality_holds: bool,
    pub conformation: Conformation,
}

/// Scales `conf` about its centroid so that the mean edge length matches
/// the mean target length.
pub fn rescale_to_edges(graph: &graph::WeightedGraph, conf: &mut Conformation) {
    let edges = graph.edges();
    let (mut have, mut want) = (0.0, 0.0);
    for e in edges {
        have += geom::dist(conf.point(e.u), conf.point(e.v));
        want += e.length;
    }
    if have > 0.0 && want > 0.0 {
        let c = conf.centroid();
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        conf.translate(&neg);
        conf.scale(want / have);
    }
}

/// Runs the workflow on a rank-4 document from scratch: the document's own
/// conformation is ignored.
pub fn run_pipeline(doc: &GraphDocument, config: &PipelineConfig, seed: u32) -> Result<PipelineReport> {
    let g = &doc.graph;
    if g.dim() != 3 {
        return Err(Error::InvalidConfig(format!("pipeline needs a 3-dimensional graph, got {}", g.dim())));
    }
    let chi = PartialChirotope::from_records(4, &doc.chirality)?;
    let request = RealizationRequest::from_chirotope(g.vertex_count(), &chi)?;
    let realized = chirotope::realize_lp(&request)?;
    let mut conf = realized.conformation;
    rescale_to_edges(g, &mut conf);
    let mut rng = SimRng::new(seed);
    let anneal = distgeo::anneal_and_settle(
        g,
        &mut conf,
        &doc.radii,
        &config.vibrant,
        &chi,
        &mut rng,
        &config.stages,
        config.steps_per_stage,
    )?;
    let mc = metropolis::mc_run(
        g,
        &mut conf,
        &doc.radii,
        &config.model,
        &config.vibrant,
        &chi,
        config.sweeps,
        rng.next_u32(),
    );
    Ok(PipelineReport {
        realized_min_det: realized.min_det,
        anneal,
        in_restricted_space: graph::in_restricted_space(g, &conf, &doc.radii),
        chirality_holds: chi.holds_everywhere(&conf),
        mc,
        conformation: conf,
    })
}
