//! Key-value configuration files (TOML syntax).

use anyhow::{Context, Result};
use qcmc_core::metropolis::{LennardJones, PotentialModel};
use qcmc_core::molecular::PolymerConfig;
use qcmc_core::molecules::HelixConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Potential for `mc run`.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    #[serde(rename = "kT")]
    pub kt: Option<f64>,
    pub lj_epsilon: Option<f64>,
    pub lj_sigma: Option<f64>,
    pub lj_cutoff: Option<f64>,
    pub noise: Option<f64>,
    pub cap: Option<f64>,
}

impl PotentialFile {
    pub fn load(path: &Path) -> Result<Self> {
        read(path)
    }

    /// Builds the model; `kt` overrides the file's temperature.
    pub fn model(&self, kt: Option<f64>) -> Result<PotentialModel> {
        let kt = kt.or(self.kt).unwrap_or(1.0);
        let lj = match (self.lj_epsilon, self.lj_sigma, self.lj_cutoff) {
            (None, None, None) => None,
            (Some(e), Some(s), c) => Some(LennardJones::new(e, s, c.unwrap_or(2.5 * s))?),
            _ => anyhow::bail!("Lennard-Jones needs both lj_epsilon and lj_sigma"),
        };
        Ok(PotentialModel::new(kt, lj)?)
    }
}

/// Overrides for the polymer demonstration.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolymerFile {
    pub atoms: Option<usize>,
    pub copies: Option<usize>,
    pub sweeps: Option<usize>,
    pub inner_steps: Option<usize>,
    pub alpha: Option<f64>,
    #[serde(rename = "kT")]
    pub kt: Option<f64>,
    pub bond_length: Option<f64>,
    pub bond_stiffness: Option<f64>,
    pub lj_epsilon: Option<f64>,
    pub lj_sigma: Option<f64>,
    pub lj_cutoff: Option<f64>,
    pub bead_stiffness: Option<f64>,
    pub helix_radius: Option<f64>,
    pub helix_step: Option<f64>,
    pub atom_radius: Option<f64>,
    pub bead_radius: Option<f64>,
}

impl PolymerFile {
    pub fn load(path: &Path) -> Result<Self> {
        read(path)
    }

    pub fn apply(&self, c: &mut PolymerConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(atoms => atoms, copies => copies, sweeps => sweeps, alpha => alpha, kt => kt,
            bond_length => bond_length, bond_stiffness => bond_stiffness, lj_epsilon => lj_epsilon,
            lj_sigma => lj_sigma, lj_cutoff => lj_cutoff, bead_stiffness => bead_stiffness,
            helix_radius => helix_radius, helix_step => helix_step, atom_radius => atom_radius,
            bead_radius => bead_radius);
        if self.inner_steps.is_some() {
            c.inner_steps = self.inner_steps;
        }
    }
}

/// Helix instance and workflow settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HelixFile {
    pub residues: usize,
    pub hbond_oh: f64,
    pub hbond_on: f64,
    pub ca_ca_2: f64,
    pub stiffness: f64,
    pub radius: f64,
    #[serde(rename = "kT")]
    pub kt: f64,
    pub stages: Vec<f64>,
    pub steps_per_stage: usize,
    pub sweeps: usize,
}

impl Default for HelixFile {
    fn default() -> Self {
        let h = HelixConfig::default();
        Self {
            residues: h.residues,
            hbond_oh: h.hbond_oh,
            hbond_on: h.hbond_on,
            ca_ca_2: h.ca_ca_2,
            stiffness: h.stiffness,
            radius: h.radius,
            kt: 0.05,
            stages: vec![100.0, 10.0, 1.0],
            steps_per_stage: 200_000,
            sweeps: 200,
        }
    }
}

impl HelixFile {
    pub fn load(path: &Path) -> Result<Self> {
        read(path)
    }

    pub fn helix(&self) -> HelixConfig {
        HelixConfig {
            residues: self.residues,
            hbond_oh: self.hbond_oh,
            hbond_on: self.hbond_on,
            ca_ca_2: self.ca_ca_2,
            stiffness: self.stiffness,
            radius: self.radius,
        }
    }
}
