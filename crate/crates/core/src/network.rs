//! Quantum tomography multiplex: one weighted layer per pairwise quantity,
//! plus the null-state filter that removes statistically irrelevant links.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{reconstruct, TomographyNetwork};
use crate::quantifiers::{metrics, PairMetrics, ENTROPY_UNIT};
use crate::sampler::{exact_counts, sample, EXACT_RNG_ID, RNG_ID};
use crate::scheduler::MeasurementPlan;
use crate::states::StateVector;

pub const MULTIPLEX_SCHEMA_VERSION: u32 = 1;

/// Links at or below mean + this many standard deviations are dropped.
pub const FILTER_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Concurrence,
    Discord,
    Classical,
    MutualInformation,
    Entropy,
    Purity,
}

impl Layer {
    pub const ALL: [Layer; 6] = [
        Layer::Concurrence,
        Layer::Discord,
        Layer::Classical,
        Layer::MutualInformation,
        Layer::Entropy,
        Layer::Purity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Concurrence => "concurrence",
            Layer::Discord => "discord",
            Layer::Classical => "classical",
            Layer::MutualInformation => "mutual_information",
            Layer::Entropy => "entropy",
            Layer::Purity => "purity",
        }
    }

    /// Purity is 1, not 0, on the null state and is never filtered.
    pub fn is_filtered(self) -> bool {
        self != Layer::Purity
    }

    pub fn weight(self, m: &PairMetrics) -> f64 {
        match self {
            Layer::Concurrence => m.concurrence,
            Layer::Discord => m.discord_bits,
            Layer::Classical => m.classical_correlations_bits,
            Layer::MutualInformation => m.mutual_information_bits,
            Layer::Entropy => m.entropy_bits,
            Layer::Purity => m.purity,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layer::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownLayer(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerData {
    /// `None` until a calibration is applied, and always for purity.
    pub threshold: Option<f64>,
    /// `(i, j, weight)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize, f64)>,
    pub strengths: Vec<f64>,
}

impl LayerData {
    fn new(n_qubits: usize, edges: Vec<(usize, usize, f64)>, threshold: Option<f64>) -> Self {
        let mut strengths = vec![0.0; n_qubits];
        for &(i, j, w) in &edges {
            strengths[i] += w;
            strengths[j] += w;
        }
        LayerData {
            threshold,
            edges,
            strengths,
        }
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .ok()
            .map(|k| self.edges[k].2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub mean: f64,
    pub std_dev: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProvenance {
    pub baseline: String,
    pub n_qubits: usize,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub rng_id: String,
    pub statistics: String,
}

/// Per-layer null-state statistics and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCalibration {
    pub layers: BTreeMap<Layer, LayerStats>,
    pub provenance: CalibrationProvenance,
}

impl FilterCalibration {
    pub fn threshold(&self, layer: Layer) -> Option<f64> {
        self.layers.get(&layer).map(|s| s.threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cal: FilterCalibration = serde_json::from_str(text)?;
        if let Some((l, _)) = cal.layers.iter().find(|(_, s)| s.threshold.is_nan() || s.threshold < 0.0) {
            return Err(Error::schema(format!("layers.{l}.threshold"), "must be non-negative"));
        }
        Ok(cal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplexMetadata {
    pub entropy_unit: String,
    pub measured_qubit: String,
}

impl Default for MultiplexMetadata {
    fn default() -> Self {
        MultiplexMetadata {
            entropy_unit: ENTROPY_UNIT.to_string(),
            measured_qubit: "smaller index of each pair".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multiplex {
    pub schema_version: u32,
    pub n_qubits: usize,
    /// Shots per setting behind the weights; `None` on the exact path.
    pub shots: Option<u64>,
    pub layers: BTreeMap<Layer, LayerData>,
    pub calibration: Option<FilterCalibration>,
    pub metadata: MultiplexMetadata,
}

impl Multiplex {
    pub fn layer(&self, layer: Layer) -> &LayerData {
        &self.layers[&layer]
    }

    pub fn strengths(&self, layer: Layer) -> &[f64] {
        &self.layer(layer).strengths
    }

    pub fn strengths_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(self.strengths(name.parse()?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mux: Multiplex = serde_json::from_str(text)?;
        for layer in Layer::ALL {
            let data = mux
                .layers
                .get(&layer)
                .ok_or_else(|| Error::schema("layers", format!("missing layer {layer}")))?;
            if data.edges.iter().any(|&(i, j, w)| i >= j || j >= mux.n_qubits || w.is_nan() || w < 0.0) {
                return Err(Error::schema(format!("layers.{layer}.edges"), "bad edge"));
            }
        }
        Ok(mux)
    }

    /// One GraphML document holding the given layer as a weighted graph.
    pub fn to_graphml(&self, layer: Layer) -> String {
        let data = self.layer(layer);
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
        out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
        out.push_str("  <key id=\"strength\" for=\"node\" attr.name=\"strength\" attr.type=\"double\"/>\n");
        let _ = writeln!(out, "  <graph id=\"{layer}\" edgedefault=\"undirected\">");
        for (q, s) in data.strengths.iter().enumerate() {
            let _ = writeln!(out, "    <node id=\"q{q}\"><data key=\"strength\">{s}</data></node>");
        }
        for (k, &(i, j, w)) in data.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "    <edge id=\"e{k}\" source=\"q{i}\" target=\"q{j}\"><data key=\"weight\">{w}</data></edge>"
            );
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }

    /// Graphviz rendering of one layer: node size follows strength, edge
    /// width and colour follow weight.
    pub fn to_dot(&self, layer: Layer) -> String {
        let data = self.layer(layer);
        let max_w = data.edges.iter().map(|e| e.2).fold(0.0f64, f64::max);
        let max_s = data.strengths.iter().copied().fold(0.0f64, f64::max);
        let mut out = String::new();
        let _ = writeln!(out, "graph {layer} {{");
        out.push_str("  layout=circo;\n  node [shape=circle, style=filled, fillcolor=\"#dddddd\"];\n");
        for (q, s) in data.strengths.iter().enumerate() {
            let size = 0.3 + if max_s > 0.0 { 0.5 * s / max_s } else { 0.0 };
            let _ = writeln!(out, "  {q} [width={size:.3}, label=\"{q}\"];");
        }
        for &(i, j, w) in &data.edges {
            let rel = if max_w > 0.0 { w / max_w } else { 0.0 };
            let _ = writeln!(
                out,
                "  {i} -- {j} [weight={w}, penwidth={:.3}, color=\"{}\"];",
                1.0 + 4.0 * rel,
                ramp(rel)
            );
        }
        out.push_str("}\n");
        out
    }

    /// Writes the multiplex in `format` under `dir`, returning the paths.
    pub fn export(&self, format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        match format {
            ExportFormat::Json => {
                let path = dir.join("multiplex.json");
                std::fs::write(&path, self.to_json()?)?;
                written.push(path);
            }
            ExportFormat::GraphMl | ExportFormat::Dot => {
                for layer in Layer::ALL {
                    let (ext, body) = match format {
                        ExportFormat::GraphMl => ("graphml", self.to_graphml(layer)),
                        _ => ("dot", self.to_dot(layer)),
                    };
                    let path = dir.join(format!("{layer}.{ext}"));
                    std::fs::write(&path, body)?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

/// Pale yellow to deep purple.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(253.0, 68.0), lerp(231.0, 1.0), lerp(37.0, 84.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    GraphMl,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(Error::InvalidArgument(format!("unknown export format `{other}`"))),
        }
    }
}

/// Unfiltered multiplex: every pair appears in every layer.
pub fn build_multiplex(net: &TomographyNetwork) -> Result<Multiplex> {
    net.validate()?;
    let all: Vec<PairMetrics> = net
        .pairs
        .par_iter()
        .map(|p| metrics(&p.rho, p.i, p.j))
        .collect::<Result<_>>()?;
    let layers = Layer::ALL
        .into_iter()
        .map(|layer| {
            let edges = net
                .pairs
                .iter()
                .zip(&all)
                .map(|(p, m)| (p.i, p.j, layer.weight(m).max(0.0)))
                .collect();
            (layer, LayerData::new(net.n_qubits, edges, None))
        })
        .collect();
    Ok(Multiplex {
        schema_version: MULTIPLEX_SCHEMA_VERSION,
        n_qubits: net.n_qubits,
        shots: net.shots,
        layers,
        calibration: None,
        metadata: MultiplexMetadata::default(),
    })
}

/// Mean and population standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-layer statistics of an unfiltered null-state multiplex.
pub fn calibration_from_baseline(baseline: &Multiplex, provenance: CalibrationProvenance) -> FilterCalibration {
    let layers = Layer::ALL
        .into_iter()
        .filter(|l| l.is_filtered())
        .map(|layer| {
            let weights: Vec<f64> = baseline.layer(layer).edges.iter().map(|e| e.2).collect();
            let (mean, std_dev) = mean_std(&weights);
            let threshold = if baseline.shots.is_none() {
                0.0
            } else {
                (mean + FILTER_SIGMAS * std_dev).max(0.0)
            };
            (layer, LayerStats { mean, std_dev, threshold })
        })
        .collect();
    FilterCalibration { layers, provenance }
}

/// Runs the full pipeline on |0…0⟩ and derives mean + 5σ per layer.
/// `shots = None` selects the exact path, where every threshold is 0.
pub fn calibrate_filter(n_qubits: usize, plan: &MeasurementPlan, shots: Option<u64>, seed: u64) -> Result<FilterCalibration> {
    if plan.n_qubits != n_qubits {
        return Err(Error::QubitMismatch {
            expected: n_qubits,
            found: plan.n_qubits,
        });
    }
    let zero = StateVector::basis_state(&"0".repeat(n_qubits))?;
    let counts = match shots {
        Some(s) => sample(&zero, plan, s, seed)?,
        None => exact_counts(&zero, plan)?,
    };
    let baseline = build_multiplex(&reconstruct(&counts, plan)?)?;
    let provenance = CalibrationProvenance {
        baseline: format!("|{}>", "0".repeat(n_qubits)),
        n_qubits,
        shots,
        seed: shots.map(|_| seed),
        rng_id: if shots.is_some() { RNG_ID } else { EXACT_RNG_ID }.to_string(),
        statistics: format!(
            "pooled over all pairs of each layer; population standard deviation; threshold = mean + {FILTER_SIGMAS}·std"
        ),
    };
    Ok(calibration_from_baseline(&baseline, provenance))
}

/// Drops links at or below each layer's threshold; purity is untouched.
pub fn apply_filter(mux: &Multiplex, cal: &FilterCalibration) -> Result<Multiplex> {
    if cal.provenance.n_qubits != mux.n_qubits {
        return Err(Error::CalibrationMismatch(format!(
            "calibration has {} qubits, multiplex {}",
            cal.provenance.n_qubits, mux.n_qubits
        )));
    }
    if cal.provenance.shots != mux.shots {
        return Err(Error::CalibrationMismatch(format!(
            "calibration shots {:?} differ from analysis shots {:?}",
            cal.provenance.shots, mux.shots
        )));
    }
    let mut out = mux.clone();
    for (layer, data) in out.layers.iter_mut() {
        if let Some(t) = cal.threshold(*layer).filter(|_| layer.is_filtered()) {
            let edges = data.edges.iter().copied().filter(|e| e.2 > t).collect();
            *data = LayerData::new(mux.n_qubits, edges, Some(t));
        }
    }
    out.calibration = Some(cal.clone());
    Ok(out)
}
