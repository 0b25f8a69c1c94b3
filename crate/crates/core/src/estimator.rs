//! From counts to physical two-qubit states for every pair.
//!
//! Correlators are pooled over every setting that measures the requested
//! basis pair, inverted linearly into a Pauli expansion, and projected back
//! onto the set of density matrices by the eigenvalue-truncation
//! maximum-likelihood rule of Smolin, Gambetta and Smith.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix2Q;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::sampler::{CountsRecord, SettingCounts};
use crate::scheduler::{pairs, Basis, CoverageReport, MeasurementPlan};

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

/// Input tolerance of [`mle_project`].
pub const MLE_INPUT_TOL: f64 = 1e-8;

pub const POOLING_RULE: &str = "shot-weighted mean over every covering setting";
pub const RECONSTRUCTION_METHOD: &str = "linear inversion + eigenvalue-truncation maximum likelihood";

/// Weighted sum of ±1 outcomes and the weight behind it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pooled {
    pub signed: f64,
    pub weight: f64,
}

impl Pooled {
    pub fn merge(self, other: Pooled) -> Pooled {
        Pooled {
            signed: self.signed + other.signed,
            weight: self.weight + other.weight,
        }
    }

    pub fn value(&self) -> f64 {
        if self.weight == 0.0 {
            0.0
        } else {
            self.signed / self.weight
        }
    }
}

/// Weight of the four outcomes (b_i, b_j) ∈ {00, 01, 10, 11} in one setting.
pub fn pair_marginal(setting: &SettingCounts, i: usize, j: usize) -> [f64; 4] {
    let mut m = [0.0; 4];
    for (key, tally) in &setting.histogram {
        let bytes = key.as_bytes();
        let k = 2 * usize::from(bytes[i] == b'1') + usize::from(bytes[j] == b'1');
        m[k] += tally.0;
    }
    m
}

/// ⟨σ_a ⊗ σ_b⟩ plus marginals for one pair; index 0 is the identity and
/// 1..=3 are X, Y, Z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelators {
    pub i: usize,
    pub j: usize,
    pub values: [[f64; 4]; 4],
    /// Number of settings pooled into each cell.
    pub settings_pooled: [[usize; 4]; 4],
    /// Shots behind each cell; absent on the exact path.
    pub effective_shots: Option<[[u64; 4]; 4]>,
}

impl PairCorrelators {
    /// Table with only c[I][I] = 1, for building expectations by hand.
    pub fn identity(i: usize, j: usize) -> Self {
        let mut values = [[0.0; 4]; 4];
        values[0][0] = 1.0;
        PairCorrelators {
            i,
            j,
            values,
            settings_pooled: [[0; 4]; 4],
            effective_shots: None,
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }
}

fn pauli_index(b: Basis) -> usize {
    b.index() + 1
}

pub fn estimate_correlators(
    counts: &CountsRecord,
    coverage: &CoverageReport,
    i: usize,
    j: usize,
) -> Result<PairCorrelators> {
    let n = counts.n_qubits;
    if i >= j || j >= n {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) must satisfy i < j < {n}")));
    }
    if coverage.n_qubits() != n {
        return Err(Error::QubitMismatch {
            expected: n,
            found: coverage.n_qubits(),
        });
    }
    let mut cells = [[Pooled::default(); 4]; 4];
    let mut used = [[0usize; 4]; 4];
    let mut marginals: Vec<Option<[f64; 4]>> = vec![None; counts.settings.len()];
    let mut missing = Vec::new();

    for a in Basis::ALL {
        for b in Basis::ALL {
            let ids = coverage.cell(i, j, a, b);
            if ids.is_empty() {
                missing.push(format!("({i}, {j}):{a}{b}"));
                continue;
            }
            let (ra, rb) = (pauli_index(a), pauli_index(b));
            for k in ids {
                let m = *marginals[k].get_or_insert_with(|| pair_marginal(&counts.settings[k], i, j));
                let total: f64 = m.iter().sum();
                let joint = Pooled {
                    signed: m[0] - m[1] - m[2] + m[3],
                    weight: total,
                };
                let first = Pooled {
                    signed: m[0] + m[1] - m[2] - m[3],
                    weight: total,
                };
                let second = Pooled {
                    signed: m[0] - m[1] + m[2] - m[3],
                    weight: total,
                };
                cells[ra][rb] = cells[ra][rb].merge(joint);
                cells[ra][0] = cells[ra][0].merge(first);
                cells[0][rb] = cells[0][rb].merge(second);
                used[ra][rb] += 1;
                used[ra][0] += 1;
                used[0][rb] += 1;
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteCoverage(missing));
    }

    let mut values = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            values[a][b] = cells[a][b].value().clamp(-1.0, 1.0);
        }
    }
    values[0][0] = 1.0;
    used[0][0] = counts.settings.len();
    let effective_shots = counts
        .shots
        .map(|s| used.map(|row| row.map(|u| u as u64 * s)));
    Ok(PairCorrelators {
        i,
        j,
        values,
        settings_pooled: used,
        effective_shots,
    })
}

/// ρ = ¼ Σ_ab c_ab σ_a ⊗ σ_b. Hermitian with unit trace, not necessarily
/// positive.
pub fn linear_inversion(pc: &PairCorrelators) -> Matrix4<C64> {
    let mut rho = Matrix4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let c = pc.values[a][b];
            if c != 0.0 {
                rho += linalg::pauli_pair(a, b) * C64::new(0.25 * c, 0.0);
            }
        }
    }
    rho
}

/// Smallest eigenvalue, for flagging non-physical inversions.
pub fn min_eigenvalue(m: &Matrix4<C64>) -> f64 {
    linalg::eigvalsh4(m)[0]
}

/// Closest probability vector to a unit-sum spectrum: walk from the smallest
/// eigenvalue, zeroing it while it stays negative after its share of the
/// accumulated deficit, then spread the deficit evenly over the rest.
/// Input and output are in ascending order.
pub fn project_spectrum(ascending: &[f64]) -> Vec<f64> {
    let d = ascending.len();
    let mut out = ascending.to_vec();
    let mut deficit = 0.0;
    let mut remaining = d;
    while remaining > 0 {
        let k = d - remaining;
        if out[k] + deficit / remaining as f64 >= 0.0 {
            break;
        }
        deficit += out[k];
        out[k] = 0.0;
        remaining -= 1;
    }
    if remaining > 0 {
        let share = deficit / remaining as f64;
        for v in &mut out[d - remaining..] {
            *v += share;
        }
    }
    out
}

/// Maximum-likelihood projection of a Hermitian unit-trace estimate.
pub fn mle_project(rho: &Matrix4<C64>) -> Result<DensityMatrix2Q> {
    let dev = linalg::hermitian_deviation4(rho);
    if dev > MLE_INPUT_TOL {
        return Err(Error::NonHermitian(dev));
    }
    let tr = linalg::trace4(rho);
    if (tr - linalg::ONE).norm() > MLE_INPUT_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} ≠ 1")));
    }
    let (values, vectors) = linalg::eigh4(rho);
    let projected = project_spectrum(values.as_slice());
    let total: f64 = projected.iter().sum();
    let values = Vector4::from_iterator(projected.into_iter().map(|v| v / total));
    let out = linalg::hermitian_part4(&linalg::from_spectrum4(&values, &vectors));
    let tr = linalg::trace4(&out).re;
    Ok(DensityMatrix2Q::new_unchecked(out / C64::new(tr, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub i: usize,
    pub j: usize,
    pub rho: DensityMatrix2Q,
    pub correlators: PairCorrelators,
    /// Smallest eigenvalue of the linear-inversion estimate.
    pub linear_min_eigenvalue: f64,
}

impl PairState {
    pub fn was_projected(&self) -> bool {
        self.linear_min_eigenvalue < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetadata {
    pub pooling: String,
    pub reconstruction: String,
}

impl Default for NetworkMetadata {
    fn default() -> Self {
        NetworkMetadata {
            pooling: POOLING_RULE.to_string(),
            reconstruction: RECONSTRUCTION_METHOD.to_string(),
        }
    }
}

/// Every pair of qubits with its reconstructed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyNetwork {
    pub schema_version: u32,
    pub n_qubits: usize,
    /// Shots per setting of the source counts; `None` for exact data.
    pub shots: Option<u64>,
    pub metadata: NetworkMetadata,
    pub pairs: Vec<PairState>,
}

impl TomographyNetwork {
    pub fn get(&self, i: usize, j: usize) -> Option<&PairState> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if j >= self.n_qubits || i == j {
            return None;
        }
        self.pairs.get(crate::scheduler::pair_index(i, j, self.n_qubits))
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.n_qubits * self.n_qubits.saturating_sub(1) / 2;
        if self.pairs.len() != expected {
            return Err(Error::schema(
                "pairs",
                format!("{} entries, expected {expected}", self.pairs.len()),
            ));
        }
        for ((i, j), p) in pairs(self.n_qubits).zip(&self.pairs) {
            if (p.i, p.j) != (i, j) {
                return Err(Error::schema("pairs", format!("entry ({}, {}) out of order", p.i, p.j)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: TomographyNetwork = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}

/// Counts settings must come from the plan; coverage is judged on what the
/// counts actually contain.
pub fn reconstruct(counts: &CountsRecord, plan: &MeasurementPlan) -> Result<TomographyNetwork> {
    counts.validate()?;
    plan.validate()?;
    if counts.n_qubits != plan.n_qubits {
        return Err(Error::QubitMismatch {
            expected: plan.n_qubits,
            found: counts.n_qubits,
        });
    }
    let measured = counts.basis_sequences()?;
    for (k, bases) in measured.iter().enumerate() {
        if !plan.settings.iter().any(|s| &s.bases == bases) {
            return Err(Error::schema(
                format!("settings[{k}].bases"),
                "setting is not part of the plan",
            ));
        }
    }
    let coverage = CoverageReport::from_settings(counts.n_qubits, &measured)?;
    let missing = coverage.missing_cells();
    if !missing.is_empty() {
        return Err(Error::IncompleteCoverage(missing.iter().map(|m| m.to_string()).collect()));
    }

    let all_pairs: Vec<(usize, usize)> = pairs(counts.n_qubits).collect();
    let states = all_pairs
        .par_iter()
        .map(|&(i, j)| {
            let correlators = estimate_correlators(counts, &coverage, i, j)?;
            let linear = linear_inversion(&correlators);
            let rho = mle_project(&linear)?;
            Ok(PairState {
                i,
                j,
                rho,
                correlators,
                linear_min_eigenvalue: min_eigenvalue(&linear),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographyNetwork {
        schema_version: NETWORK_SCHEMA_VERSION,
        n_qubits: counts.n_qubits,
        shots: counts.shots,
        metadata: NetworkMetadata::default(),
        pairs: states,
    })
}
