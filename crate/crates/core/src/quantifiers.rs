//! The six pairwise quantities carried by the multiplex layers.
//!
//! All entropies are in bits. Classical correlations and discord measure the
//! first slot of the density matrix, which is always the lower qubit index.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix2Q;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Negative discord down to this value is rounding and clamps to zero.
pub const DISCORD_CLAMP: f64 = 1e-6;

pub const ENTROPY_UNIT: &str = "bits";

/// Which slot of the two-qubit state receives the projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// Anything with a Hermitian spectrum.
pub trait Spectrum {
    fn spectrum(&self) -> Vec<f64>;
}

impl Spectrum for DensityMatrix2Q {
    fn spectrum(&self) -> Vec<f64> {
        self.eigenvalues().to_vec()
    }
}

impl Spectrum for Matrix4<C64> {
    fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh4(self).iter().copied().collect()
    }
}

impl Spectrum for Matrix2<C64> {
    fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh2(self).iter().copied().collect()
    }
}

/// Von Neumann entropy in bits; works for one- and two-qubit states.
pub fn entropy_bits<M: Spectrum + ?Sized>(rho: &M) -> f64 {
    rho.spectrum().into_iter().map(linalg::xlog2x).sum::<f64>().max(0.0)
}

pub fn purity(rho: &DensityMatrix2Q) -> f64 {
    let m = rho.matrix();
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Wootters concurrence.
///
/// The λ's are the singular values of τ_kl = ⟨v_k| σ_y⊗σ_y |v_l*⟩ where
/// |v_k⟩ = √p_k |ψ_k⟩ runs over the eigen-decomposition of ρ. This avoids
/// the square roots of near-zero eigenvalues of ρρ̃.
/// Eigenvalues below this are numerical zeros for the concurrence, whose
/// dependence on a small weight `ε` goes like `√ε`.
pub const SPECTRAL_FLOOR: f64 = 1e-13;

pub fn concurrence(rho: &DensityMatrix2Q) -> f64 {
    let (values, vectors) = linalg::eigh4(rho.matrix());
    let flip = linalg::pauli_pair(2, 2);
    let mut v = Matrix4::<C64>::zeros();
    for k in 0..4 {
        let w = if values[k] > SPECTRAL_FLOOR { values[k].sqrt() } else { 0.0 };
        v.set_column(k, &(vectors.column(k) * C64::new(w, 0.0)));
    }
    let tau = v.adjoint() * flip * v.map(|z| z.conj());
    let mut s: Vec<f64> = tau.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

pub fn mutual_information(rho: &DensityMatrix2Q) -> f64 {
    let sa = entropy_bits(&rho.reduce_to_first());
    let sb = entropy_bits(&rho.reduce_to_second());
    (sa + sb - entropy_bits(rho)).max(0.0)
}

/// Search parameters for the measurement-direction optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordSearch {
    pub polar_steps: usize,
    pub azimuth_steps: usize,
    /// Grid points refined locally.
    pub starts: usize,
    /// Refinement stops when the step falls below this (radians).
    pub min_step: f64,
}

impl Default for DiscordSearch {
    fn default() -> Self {
        DiscordSearch {
            polar_steps: 32,
            azimuth_steps: 64,
            starts: 4,
            min_step: 1e-7,
        }
    }
}

/// Correlation data in the measured-first orientation.
struct Bloch {
    /// Bloch vector of the measured qubit.
    measured: [f64; 3],
    /// Bloch vector of the other qubit.
    other: [f64; 3],
    /// T[a][b] = ⟨σ_a(measured) σ_b(other)⟩.
    t: [[f64; 3]; 3],
}

impl Bloch {
    fn new(rho: &DensityMatrix2Q, measured: Slot) -> Self {
        let c = rho.correlator_table();
        let mut b = Bloch {
            measured: [0.0; 3],
            other: [0.0; 3],
            t: [[0.0; 3]; 3],
        };
        for a in 0..3 {
            match measured {
                Slot::First => {
                    b.measured[a] = c[a + 1][0];
                    b.other[a] = c[0][a + 1];
                }
                Slot::Second => {
                    b.measured[a] = c[0][a + 1];
                    b.other[a] = c[a + 1][0];
                }
            }
            for k in 0..3 {
                b.t[a][k] = match measured {
                    Slot::First => c[a + 1][k + 1],
                    Slot::Second => c[k + 1][a + 1],
                };
            }
        }
        b
    }

    /// Average conditional entropy of the unmeasured qubit after projecting
    /// the measured one onto ±n.
    fn conditional_entropy(&self, theta: f64, phi: f64) -> f64 {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let nm: f64 = (0..3).map(|a| n[a] * self.measured[a]).sum();
        let nt: [f64; 3] = std::array::from_fn(|k| (0..3).map(|a| n[a] * self.t[a][k]).sum());
        let mut total = 0.0;
        for s in [1.0, -1.0] {
            let weight = 1.0 + s * nm;
            let p = 0.5 * weight;
            if p <= 1e-15 {
                continue;
            }
            let r: f64 = (0..3)
                .map(|k| ((self.other[k] + s * nt[k]) / weight).powi(2))
                .sum::<f64>()
                .sqrt();
            total += p * linalg::qubit_entropy_from_bloch(r);
        }
        total
    }

    fn other_entropy(&self) -> f64 {
        let r = self.other.iter().map(|x| x * x).sum::<f64>().sqrt();
        linalg::qubit_entropy_from_bloch(r)
    }
}

/// Classical correlations J with the given search settings.
pub fn classical_correlations_with(rho: &DensityMatrix2Q, measured: Slot, search: &DiscordSearch) -> f64 {
    use std::f64::consts::PI;
    let bloch = Bloch::new(rho, measured);
    let f = |theta: f64, phi: f64| bloch.conditional_entropy(theta, phi);

    // ±n give the same measurement, so the upper hemisphere suffices;
    // θ includes both poles.
    let dt = PI / 2.0 / (search.polar_steps.max(2) - 1) as f64;
    let dp = 2.0 * PI / search.azimuth_steps.max(1) as f64;
    let mut grid: Vec<(f64, f64, f64)> = Vec::with_capacity(search.polar_steps * search.azimuth_steps);
    for it in 0..search.polar_steps.max(2) {
        let theta = it as f64 * dt;
        for ip in 0..search.azimuth_steps.max(1) {
            let phi = ip as f64 * dp;
            grid.push((f(theta, phi), theta, phi));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = grid[0].0;
    for &(start, theta0, phi0) in grid.iter().take(search.starts.max(1)) {
        let (mut value, mut theta, mut phi) = (start, theta0, phi0);
        let (mut st, mut sp) = (dt, dp);
        while st.max(sp) > search.min_step {
            let mut moved = false;
            for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let (t, p) = (theta + a * st, phi + b * sp);
                let v = f(t, p);
                if v < value {
                    value = v;
                    theta = t;
                    phi = p;
                    moved = true;
                }
            }
            if !moved {
                st *= 0.5;
                sp *= 0.5;
            }
        }
        best = best.min(value);
    }
    (bloch.other_entropy() - best).max(0.0)
}

/// Classical correlations J: the information about the unmeasured qubit
/// gained by the best rank-1 projective measurement on `measured`.
pub fn classical_correlations(rho: &DensityMatrix2Q, measured: Slot) -> f64 {
    classical_correlations_with(rho, measured, &DiscordSearch::default())
}

/// Quantum discord D = I − J.
pub fn discord(rho: &DensityMatrix2Q, measured: Slot) -> Result<f64> {
    discord_from(mutual_information(rho), classical_correlations(rho, measured))
}

fn discord_from(mi: f64, j: f64) -> Result<f64> {
    let d = mi - j;
    if d >= 0.0 {
        Ok(d)
    } else if d >= -DISCORD_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "discord {d:e} below zero (mutual information {mi}, classical {j})"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub concurrence: f64,
    pub entropy_bits: f64,
    pub purity: f64,
    pub mutual_information_bits: f64,
    pub classical_correlations_bits: f64,
    pub discord_bits: f64,
    pub measured_qubit: usize,
}

/// All six quantities for the pair `i < j`, measuring qubit `i`.
pub fn metrics(rho: &DensityMatrix2Q, i: usize, j: usize) -> Result<PairMetrics> {
    if i >= j {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) must have i < j")));
    }
    let mi = mutual_information(rho);
    let classical = classical_correlations(rho, Slot::First);
    Ok(PairMetrics {
        concurrence: concurrence(rho),
        entropy_bits: entropy_bits(rho),
        purity: purity(rho),
        mutual_information_bits: mi,
        classical_correlations_bits: classical,
        discord_bits: discord_from(mi, classical)?,
        measured_qubit: i,
    })
}
