//! End-to-end runs: state preparation, scheduling, readout, reconstruction,
//! calibration, filtering and export, with a manifest for reproduction.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{reconstruct, TomographyNetwork};
use crate::network::{apply_filter, build_multiplex, calibrate_filter, ExportFormat, FilterCalibration, Multiplex};
use crate::sampler::{exact_counts, sample, CountsRecord, EXACT_RNG_ID, RNG_ID};
use crate::scheduler::{generate_plan, MeasurementPlan};
use crate::states::{
    collision_state, product_state, w_state, xx_ground_state, CollisionConfig, ProductSpec, StateVector, XXConfig,
};

/// Mixed into the run seed so the null-state calibration draws independent
/// shots from the analysed state.
pub const CALIBRATION_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    W { n_qubits: usize },
    Product { bits: String },
    Xx { n_spins: usize, field: f64 },
    Collision { pairs: usize, lambda_t: f64, theta: f64 },
}

impl StateSpec {
    pub fn n_qubits(&self) -> usize {
        match self {
            StateSpec::W { n_qubits } => *n_qubits,
            StateSpec::Product { bits } => bits.chars().count(),
            StateSpec::Xx { n_spins, .. } => *n_spins,
            StateSpec::Collision { pairs, .. } => 2 * pairs + 1,
        }
    }

    /// Checks every parameter without building the state.
    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::W { n_qubits } if *n_qubits < 2 => {
                Err(Error::InvalidArgument(format!("W state needs at least 2 qubits, got {n_qubits}")))
            }
            StateSpec::W { n_qubits } => crate::states::check_capacity(*n_qubits),
            StateSpec::Product { bits } if bits.chars().count() < 2 => {
                Err(Error::InvalidArgument("product state needs at least 2 qubits".into()))
            }
            StateSpec::Product { bits } => {
                crate::states::check_capacity(bits.chars().count())?;
                match bits.chars().find(|c| !"01+-".contains(*c)) {
                    Some(c) => Err(Error::InvalidArgument(format!("bad product-state character {c:?}"))),
                    None => Ok(()),
                }
            }
            StateSpec::Xx { n_spins, field } => XXConfig::new(*n_spins, *field).map(|_| ()),
            StateSpec::Collision { pairs, lambda_t, theta } => CollisionConfig::new(*pairs, *lambda_t, *theta).map(|_| ()),
        }
    }

    pub fn prepare(&self) -> Result<StateVector> {
        self.validate()?;
        match self {
            StateSpec::W { n_qubits } => w_state(*n_qubits),
            StateSpec::Product { bits } => product_state(&ProductSpec::Bits(bits.clone())),
            StateSpec::Xx { n_spins, field } => Ok(xx_ground_state(&XXConfig::new(*n_spins, *field)?)?.0),
            StateSpec::Collision { pairs, lambda_t, theta } => {
                collision_state(&CollisionConfig::new(*pairs, *lambda_t, *theta)?)
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::W { n_qubits } => write!(f, "W(N={n_qubits})"),
            StateSpec::Product { bits } => write!(f, "|{bits}>"),
            StateSpec::Xx { n_spins, field } => write!(f, "XX ground state (N={n_spins}, B={field})"),
            StateSpec::Collision { pairs, lambda_t, theta } => {
                write!(f, "collision model (n={pairs}, λt={lambda_t}, θ={theta})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub state: StateSpec,
    /// `None` selects the exact, noise-free path.
    pub shots: Option<u64>,
    pub seed: u64,
    pub formats: Vec<ExportFormat>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == Some(0) {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        self.state.validate()
    }

    pub fn calibration_seed(&self) -> u64 {
        self.seed ^ CALIBRATION_SEED_MIX
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub state: StateSpec,
    pub n_qubits: usize,
    pub shots: Option<u64>,
    pub seed: u64,
    pub calibration_seed: Option<u64>,
    pub rng_id: String,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub plan: MeasurementPlan,
    pub counts: CountsRecord,
    pub network: TomographyNetwork,
    pub calibration: FilterCalibration,
    /// Filtered.
    pub multiplex: Multiplex,
}

/// Runs every stage in memory; errors name the failing stage.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate().map_err(Error::in_stage("config"))?;
    let state = cfg.state.prepare().map_err(Error::in_stage("state"))?;
    let n = state.n_qubits();
    let plan = generate_plan(n).map_err(Error::in_stage("plan"))?;
    let counts = match cfg.shots {
        Some(s) => sample(&state, &plan, s, cfg.seed),
        None => exact_counts(&state, &plan),
    }
    .map_err(Error::in_stage("sample"))?;
    let network = reconstruct(&counts, &plan).map_err(Error::in_stage("reconstruct"))?;
    let calibration =
        calibrate_filter(n, &plan, cfg.shots, cfg.calibration_seed()).map_err(Error::in_stage("calibrate"))?;
    let raw = build_multiplex(&network).map_err(Error::in_stage("network"))?;
    let multiplex = apply_filter(&raw, &calibration).map_err(Error::in_stage("filter"))?;
    Ok(Artifacts {
        plan,
        counts,
        network,
        calibration,
        multiplex,
    })
}

impl Artifacts {
    pub fn manifest(&self, cfg: &RunConfig, artifacts: Vec<String>) -> Manifest {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            state: cfg.state.clone(),
            n_qubits: self.plan.n_qubits,
            shots: cfg.shots,
            seed: cfg.seed,
            calibration_seed: cfg.shots.map(|_| cfg.calibration_seed()),
            rng_id: if cfg.shots.is_some() { RNG_ID } else { EXACT_RNG_ID }.to_string(),
            artifacts,
        }
    }

    /// Writes the artifact set plus `manifest.json` and returns the paths.
    pub fn write(&self, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in [
            ("plan.json", self.plan.to_json()?),
            ("counts.json", self.counts.to_json()?),
            ("network.json", self.network.to_json()?),
            ("calibration.json", self.calibration.to_json()?),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
        written.extend(self.multiplex.export(ExportFormat::Json, dir)?);
        for &format in cfg.formats.iter().filter(|f| **f != ExportFormat::Json) {
            written.extend(self.multiplex.export(format, dir)?);
        }
        let names = written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.manifest(cfg, names))?)?;
        written.push(path);
        Ok(written)
    }
}
