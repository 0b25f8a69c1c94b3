//! Measurement-setting schedule for pairwise tomography of every qubit pair.
//!
//! Qubits are labelled with letters a, b, c according to the base-three
//! digits of their index. Each labelling is expanded into six settings by
//! running the letters over all orderings of the three Pauli axes, and three
//! trivial settings (everything along X, Y, Z) supply the equal-basis
//! correlators. That gives `6 ⌈log₃ N⌉ + 3` settings in total.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Above this many qubits the pair × cell table is not materialized.
pub const MAX_MATERIALIZED_QUBITS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Basis {
        Basis::ALL[index]
    }

    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Basis> {
        match c {
            'X' => Some(Basis::X),
            'Y' => Some(Basis::Y),
            'Z' => Some(Basis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Axis assigned to letters (a, b, c) by each of the six permutations,
/// in fixed column order 1..=6.
pub const PERMUTATIONS: [[Basis; 3]; 6] = [
    [Basis::X, Basis::Y, Basis::Z],
    [Basis::X, Basis::Z, Basis::Y],
    [Basis::Y, Basis::X, Basis::Z],
    [Basis::Y, Basis::Z, Basis::X],
    [Basis::Z, Basis::X, Basis::Y],
    [Basis::Z, Basis::Y, Basis::X],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Trivial { axis: Basis },
    Labelled { labelling: u32, permutation: u32 },
}

/// One basis per qubit, executed simultaneously on every shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    #[serde(with = "bases_string")]
    pub bases: Vec<Basis>,
    pub provenance: Provenance,
}

impl Setting {
    pub fn bases_string(&self) -> String {
        bases_to_string(&self.bases)
    }
}

pub fn bases_to_string(bases: &[Basis]) -> String {
    bases.iter().map(|b| b.as_char()).collect()
}

pub fn parse_bases(s: &str) -> Result<Vec<Basis>> {
    s.chars()
        .enumerate()
        .map(|(k, c)| {
            Basis::from_char(c).ok_or_else(|| {
                Error::schema("bases", format!("character {c:?} at position {k} is not X, Y or Z"))
            })
        })
        .collect()
}

mod bases_string {
    use super::{bases_to_string, parse_bases, Basis};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bases: &[Basis], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&bases_to_string(bases))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Basis>, D::Error> {
        let raw = String::deserialize(d)?;
        parse_bases(&raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub schema_version: u32,
    pub n_qubits: usize,
    pub labellings: u32,
    pub settings: Vec<Setting>,
}

/// ⌈log₃ n⌉ computed in integers.
pub fn labelling_count(n_qubits: usize) -> u32 {
    let mut levels = 0u32;
    let mut reach = 1usize;
    while reach < n_qubits {
        reach = reach.saturating_mul(3);
        levels += 1;
    }
    levels
}

/// Letter (0 = a, 1 = b, 2 = c) of qubit `qubit` in labelling `labelling` (1-based):
/// the `labelling`-th base-three digit of the qubit index.
pub fn letter_of(qubit: usize, labelling: u32) -> u8 {
    assert!(labelling >= 1, "labellings are numbered from 1");
    match 3usize.checked_pow(labelling - 1) {
        Some(block) => ((qubit / block) % 3) as u8,
        None => 0,
    }
}

/// The six settings spawned by one letter assignment.
pub fn labelling_settings(letters: &[u8], labelling: u32) -> Vec<Setting> {
    PERMUTATIONS
        .iter()
        .enumerate()
        .map(|(p, axes)| Setting {
            bases: letters.iter().map(|&l| axes[l as usize]).collect(),
            provenance: Provenance::Labelled {
                labelling,
                permutation: p as u32 + 1,
            },
        })
        .collect()
}

pub fn generate_plan(n_qubits: usize) -> Result<MeasurementPlan> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "a measurement plan needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let levels = labelling_count(n_qubits);
    let mut settings = Vec::with_capacity(6 * levels as usize + 3);
    for axis in Basis::ALL {
        settings.push(Setting {
            bases: vec![axis; n_qubits],
            provenance: Provenance::Trivial { axis },
        });
    }
    for l in 1..=levels {
        let letters: Vec<u8> = (0..n_qubits).map(|q| letter_of(q, l)).collect();
        settings.extend(labelling_settings(&letters, l));
    }
    Ok(MeasurementPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        n_qubits,
        labellings: levels,
        settings,
    })
}

impl MeasurementPlan {
    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn basis_sequences(&self) -> Vec<Vec<Basis>> {
        self.settings.iter().map(|s| s.bases.clone()).collect()
    }

    /// Structural checks for plans read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::schema("n_qubits", "must be at least 2"));
        }
        for (k, s) in self.settings.iter().enumerate() {
            if s.bases.len() != self.n_qubits {
                return Err(Error::schema(
                    format!("settings[{k}].bases"),
                    format!("length {} differs from n_qubits {}", s.bases.len(), self.n_qubits),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: MeasurementPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Setting counts of the schemes this one is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveCounts {
    /// One setting per (pair, basis pair).
    pub unparallelized: u64,
    /// ⌊N/2⌋ disjoint pairs measured per setting.
    pub parallel: u64,
}

pub fn naive_setting_counts(n_qubits: usize) -> Result<NaiveCounts> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 qubits, got {n_qubits}")));
    }
    let n = n_qubits as u64;
    let unparallelized = 9 * n * (n - 1) / 2;
    let per_setting = n / 2;
    Ok(NaiveCounts {
        unparallelized,
        parallel: unparallelized.div_ceil(per_setting),
    })
}

/// `6 ⌈log₂ N⌉ + 3`, the two-letter variant of the same construction.
pub fn base2_setting_count(n_qubits: usize) -> usize {
    let mut levels = 0usize;
    let mut reach = 1usize;
    while reach < n_qubits {
        reach = reach.saturating_mul(2);
        levels += 1;
    }
    6 * levels + 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingCell {
    pub i: usize,
    pub j: usize,
    pub first: Basis,
    pub second: Basis,
}

impl fmt::Display for MissingCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}):{}{}", self.i, self.j, self.first, self.second)
    }
}

/// Index of the unordered pair `i < j` in row-major upper-triangular order.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn cell_code(a: Basis, b: Basis) -> u8 {
    (a.index() * 3 + b.index()) as u8
}

/// For every unordered pair and basis pair, which settings measure it.
///
/// Every setting assigns each pair exactly one (a, b) cell, so the table is
/// stored as one cell code per (pair, setting).
#[derive(Debug, Clone)]
pub struct CoverageReport {
    n_qubits: usize,
    n_settings: usize,
    codes: Vec<u8>,
}

impl CoverageReport {
    pub fn build(plan: &MeasurementPlan) -> Result<Self> {
        Self::from_settings(plan.n_qubits, &plan.basis_sequences())
    }

    pub fn from_settings(n_qubits: usize, settings: &[Vec<Basis>]) -> Result<Self> {
        if n_qubits > MAX_MATERIALIZED_QUBITS {
            return Err(Error::Capacity {
                what: "coverage table qubits",
                value: n_qubits,
                limit: MAX_MATERIALIZED_QUBITS,
            });
        }
        check_lengths(n_qubits, settings)?;
        let n_settings = settings.len();
        let n_pairs = n_qubits * n_qubits.saturating_sub(1) / 2;
        let mut codes = vec![0u8; n_pairs * n_settings];
        codes
            .par_chunks_mut(n_settings.max(1))
            .zip(pairs(n_qubits).collect::<Vec<_>>().into_par_iter())
            .for_each(|(row, (i, j))| {
                for (slot, s) in row.iter_mut().zip(settings) {
                    *slot = cell_code(s[i], s[j]);
                }
            });
        Ok(CoverageReport {
            n_qubits,
            n_settings,
            codes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Setting indices measuring qubit `i` in `a` and qubit `j` in `b`.
    pub fn cell(&self, i: usize, j: usize, a: Basis, b: Basis) -> Vec<usize> {
        let (lo, hi, a, b) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        let p = pair_index(lo, hi, self.n_qubits);
        let want = cell_code(a, b);
        self.codes[p * self.n_settings..(p + 1) * self.n_settings]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == want)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn missing_cells(&self) -> Vec<MissingCell> {
        let mut out = Vec::new();
        for (i, j) in pairs(self.n_qubits) {
            let p = pair_index(i, j, self.n_qubits);
            let mask = self.codes[p * self.n_settings..(p + 1) * self.n_settings]
                .iter()
                .fold(0u16, |m, &c| m | (1 << c));
            push_missing(&mut out, i, j, mask);
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_cells().is_empty()
    }
}

fn check_lengths(n_qubits: usize, settings: &[Vec<Basis>]) -> Result<()> {
    if let Some((k, s)) = settings.iter().enumerate().find(|(_, s)| s.len() != n_qubits) {
        return Err(Error::schema(
            format!("settings[{k}].bases"),
            format!("length {} differs from n_qubits {n_qubits}", s.len()),
        ));
    }
    Ok(())
}

fn push_missing(out: &mut Vec<MissingCell>, i: usize, j: usize, mask: u16) {
    if mask == 0x1ff {
        return;
    }
    for code in 0..9 {
        if mask & (1 << code) == 0 {
            out.push(MissingCell {
                i,
                j,
                first: Basis::from_index(code / 3),
                second: Basis::from_index(code % 3),
            });
        }
    }
}

/// Completeness check without materializing the table; works for any N.
pub fn verify_coverage(n_qubits: usize, settings: &[Vec<Basis>]) -> Result<Vec<MissingCell>> {
    check_lengths(n_qubits, settings)?;
    let mut missing: Vec<MissingCell> = (0..n_qubits)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in i + 1..n_qubits {
                let mask = settings
                    .iter()
                    .fold(0u16, |m, s| m | (1 << cell_code(s[i], s[j])));
                push_missing(&mut local, i, j, mask);
            }
            local
        })
        .collect();
    missing.sort();
    Ok(missing)
}

pub fn plan_is_complete(plan: &MeasurementPlan) -> bool {
    verify_coverage(plan.n_qubits, &plan.basis_sequences())
        .map(|m| m.is_empty())
        .unwrap_or(false)
}
