//! Finite-shot readout of every setting in a plan.
//!
//! Each setting draws from its own ChaCha8 stream: the master seed fixes the
//! key and the setting index selects the stream, so results never depend on
//! the order (or thread) in which settings are sampled.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{parse_bases, Basis, MeasurementPlan};
use crate::states::{exact_probabilities, index_to_bits, StateVector};

pub const COUNTS_SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_SHOTS: u64 = 8192;

/// Algorithm identifier written into every counts file.
pub const RNG_ID: &str = "chacha8(rand_chacha 0.9):seed_from_u64(seed),stream=setting_index;inverse-cdf(f64)";

pub const EXACT_RNG_ID: &str = "exact";

/// Histogram entry: an integer count for sampled data, a probability for
/// the exact path.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tally(pub f64);

impl Serialize for Tally {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 >= 0.0 && self.0.fract() == 0.0 && self.0 < 9.0e15 {
            s.serialize_u64(self.0 as u64)
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Tally {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Tally)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingCounts {
    pub bases: String,
    pub histogram: BTreeMap<String, Tally>,
}

impl SettingCounts {
    pub fn parsed_bases(&self) -> Result<Vec<Basis>> {
        parse_bases(&self.bases)
    }

    pub fn total(&self) -> f64 {
        self.histogram.values().map(|t| t.0).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub schema_version: u32,
    pub n_qubits: usize,
    /// Shots per setting; `None` marks exact probabilities.
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub rng_id: String,
    pub settings: Vec<SettingCounts>,
}

impl CountsRecord {
    pub fn is_exact(&self) -> bool {
        self.shots.is_none()
    }

    pub fn basis_sequences(&self) -> Result<Vec<Vec<Basis>>> {
        self.settings.iter().map(|s| s.parsed_bases()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != COUNTS_SCHEMA_VERSION {
            return Err(Error::schema(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if self.n_qubits < 2 {
            return Err(Error::schema("n_qubits", "must be at least 2"));
        }
        if self.shots == Some(0) {
            return Err(Error::schema("shots", "must be at least 1"));
        }
        for (k, s) in self.settings.iter().enumerate() {
            let field = |name: &str| format!("settings[{k}].{name}");
            let bases = parse_bases(&s.bases).map_err(|e| Error::schema(field("bases"), e.to_string()))?;
            if bases.len() != self.n_qubits {
                return Err(Error::schema(field("bases"), format!("length {} ≠ n_qubits", bases.len())));
            }
            for (key, tally) in &s.histogram {
                if key.len() != self.n_qubits || key.chars().any(|c| c != '0' && c != '1') {
                    return Err(Error::schema(field("histogram"), format!("bad bitstring key {key:?}")));
                }
                let v = tally.0;
                let ok = match self.shots {
                    Some(_) => v >= 0.0 && v.fract() == 0.0,
                    None => (0.0..=1.0 + 1e-12).contains(&v),
                };
                if !ok {
                    return Err(Error::schema(field("histogram"), format!("bad value {v} for {key}")));
                }
            }
            let total = s.total();
            match self.shots {
                Some(shots) if total != shots as f64 => {
                    return Err(Error::schema(
                        field("histogram"),
                        format!("counts sum to {total}, expected {shots}"),
                    ))
                }
                None if (total - 1.0).abs() > 1e-9 => {
                    return Err(Error::schema(field("histogram"), format!("probabilities sum to {total}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: CountsRecord = serde_json::from_str(text)?;
        record.validate()?;
        Ok(record)
    }
}

fn check_sizes(state: &StateVector, plan: &MeasurementPlan) -> Result<()> {
    if plan.n_qubits != state.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: plan.n_qubits,
            found: state.n_qubits(),
        });
    }
    Ok(())
}

/// Independent generator for one setting.
pub fn setting_rng(seed: u64, setting_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(setting_index as u64);
    rng
}

/// Draw `shots` outcomes from a distribution by inverse CDF.
pub fn draw_counts<R: Rng>(probabilities: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for &p in probabilities {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; probabilities.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}

pub fn sample(state: &StateVector, plan: &MeasurementPlan, shots: u64, seed: u64) -> Result<CountsRecord> {
    check_sizes(state, plan)?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let n = state.n_qubits();
    let settings = plan
        .settings
        .par_iter()
        .enumerate()
        .map(|(k, setting)| {
            let probs = exact_probabilities(state, &setting.bases)?;
            let counts = draw_counts(&probs, shots, &mut setting_rng(seed, k));
            let histogram = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(idx, &c)| (index_to_bits(idx, n), Tally(c as f64)))
                .collect();
            Ok(SettingCounts {
                bases: setting.bases_string(),
                histogram,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountsRecord {
        schema_version: COUNTS_SCHEMA_VERSION,
        n_qubits: n,
        shots: Some(shots),
        seed: Some(seed),
        rng_id: RNG_ID.to_string(),
        settings,
    })
}

/// Noise-free counterpart of [`sample`]: exact outcome probabilities.
pub fn exact_counts(state: &StateVector, plan: &MeasurementPlan) -> Result<CountsRecord> {
    check_sizes(state, plan)?;
    let n = state.n_qubits();
    let settings = plan
        .settings
        .par_iter()
        .map(|setting| {
            let probs = exact_probabilities(state, &setting.bases)?;
            let histogram = probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(idx, &p)| (index_to_bits(idx, n), Tally(p)))
                .collect();
            Ok(SettingCounts {
                bases: setting.bases_string(),
                histogram,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountsRecord {
        schema_version: COUNTS_SCHEMA_VERSION,
        n_qubits: n,
        shots: None,
        seed: None,
        rng_id: EXACT_RNG_ID.to_string(),
        settings,
    })
}
