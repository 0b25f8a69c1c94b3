//! Exact statevectors and the exact reduced-density-matrix oracle.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the
//! bitstring `"100"` is qubit 0 excited. `|0⟩` is the +1 eigenstate of σ_z.

mod collision;
mod xx;

pub use collision::{collision_state, CollisionConfig};
pub use xx::{
    critical_fields, ground_crossings, xx_apply_hamiltonian, xx_ground_energy, xx_ground_state,
    xx_sector_ground_energies, xx_zone, XXConfig,
};

use nalgebra::{Matrix2, Matrix4};

use crate::density::DensityMatrix2Q;
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::scheduler::Basis;

/// Dense statevector bound used by every constructor and the sampler.
pub const MAX_QUBITS: usize = 14;

pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

pub(crate) fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "statevector qubits",
            value: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl StateVector {
    /// Wraps amplitudes after checking length and normalization.
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_capacity(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let state = StateVector { n_qubits, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm² {norm} ≠ 1")));
        }
        Ok(state)
    }

    /// Normalizes whatever it is given; zero vectors are rejected.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of `qubit` inside an amplitude index.
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    pub fn basis_state(bits: &str) -> Result<Self> {
        product_state(&ProductSpec::Bits(bits.to_string()))
    }

    /// Debug dump: JSON array of `[re, im]` pairs.
    pub fn to_dump_json(&self) -> Result<String> {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        Ok(serde_json::to_string(&pairs)?)
    }

    pub fn from_dump_json(text: &str) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
        let n = pairs.len().trailing_zeros() as usize;
        if pairs.len() != 1 << n {
            return Err(Error::schema("amplitudes", "length is not a power of two"));
        }
        Self::new(n, pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// W state: equal superposition of every single-excitation basis state.
pub fn w_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!("W state needs N ≥ 2, got {n_qubits}")));
    }
    check_capacity(n_qubits)?;
    let amp = C64::new(1.0 / (n_qubits as f64).sqrt(), 0.0);
    let mut amplitudes = vec![ZERO; 1 << n_qubits];
    for q in 0..n_qubits {
        amplitudes[1 << q] = amp;
    }
    StateVector::new(n_qubits, amplitudes)
}

/// GHZ state (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_state(n_qubits: usize) -> Result<StateVector> {
    check_capacity(n_qubits)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amplitudes = vec![ZERO; 1 << n_qubits];
    amplitudes[0] = h;
    amplitudes[(1 << n_qubits) - 1] = h;
    StateVector::new(n_qubits, amplitudes)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProductSpec {
    /// One character per qubit: `0`, `1`, `+` or `-`.
    Bits(String),
    /// Bloch angles (θ, φ) per qubit: cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
    Angles(Vec<(f64, f64)>),
}

impl ProductSpec {
    fn angles(&self) -> Result<Vec<(f64, f64)>> {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            ProductSpec::Angles(a) => Ok(a.clone()),
            ProductSpec::Bits(bits) => bits
                .chars()
                .enumerate()
                .map(|(k, c)| match c {
                    '0' => Ok((0.0, 0.0)),
                    '1' => Ok((PI, 0.0)),
                    '+' => Ok((FRAC_PI_2, 0.0)),
                    '-' => Ok((FRAC_PI_2, PI)),
                    _ => Err(Error::InvalidArgument(format!(
                        "product-state character {c:?} at position {k}; expected 0, 1, + or -"
                    ))),
                })
                .collect(),
        }
    }
}

fn qubit_from_angles(theta: f64, phi: f64) -> [C64; 2] {
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

pub fn product_state(spec: &ProductSpec) -> Result<StateVector> {
    let angles = spec.angles()?;
    let n = angles.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty product-state spec".into()));
    }
    check_capacity(n)?;
    if angles.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
        return Err(Error::InvalidArgument("non-finite Bloch angle".into()));
    }
    let mut amplitudes = vec![ONE];
    for &(theta, phi) in &angles {
        let q = qubit_from_angles(theta, phi);
        amplitudes = amplitudes
            .iter()
            .flat_map(|&a| [a * q[0], a * q[1]])
            .collect();
    }
    StateVector::normalized(n, amplitudes)
}

/// Two-qubit reduced density matrix of qubits `i < j`, slot order (i, j).
pub fn exact_rdm(state: &StateVector, i: usize, j: usize) -> Result<DensityMatrix2Q> {
    let n = state.n_qubits;
    if i >= j || j >= n {
        return Err(Error::InvalidArgument(format!(
            "pair ({i}, {j}) must satisfy i < j < {n}"
        )));
    }
    let (mi, mj) = (state.mask(i), state.mask(j));
    let amps = &state.amplitudes;
    let mut rho = Matrix4::<C64>::zeros();
    for rest in 0..amps.len() {
        if rest & (mi | mj) != 0 {
            continue;
        }
        let local = [rest, rest | mj, rest | mi, rest | mi | mj].map(|k| amps[k]);
        for r in 0..4 {
            if local[r] == ZERO {
                continue;
            }
            for c in 0..4 {
                rho[(r, c)] += local[r] * local[c].conj();
            }
        }
    }
    DensityMatrix2Q::new(rho)
}

/// Single-qubit reduced density matrix.
pub fn single_qubit_rdm(state: &StateVector, q: usize) -> Result<Matrix2<C64>> {
    if q >= state.n_qubits {
        return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
    }
    let m = state.mask(q);
    let amps = &state.amplitudes;
    let mut rho = Matrix2::<C64>::zeros();
    for rest in (0..amps.len()).filter(|k| k & m == 0) {
        let local = [amps[rest], amps[rest | m]];
        for r in 0..2 {
            for c in 0..2 {
                rho[(r, c)] += local[r] * local[c].conj();
            }
        }
    }
    Ok(rho)
}

/// Readout rotation for a measurement basis: H for X, H·S† for Y.
fn rotation(basis: Basis) -> Option<[[C64; 2]; 2]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        Basis::Z => None,
        Basis::X => Some([[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]]),
        // H · diag(1, -i)
        Basis::Y => Some([[C64::new(h, 0.0), C64::new(0.0, -h)], [C64::new(h, 0.0), C64::new(0.0, h)]]),
    }
}

fn apply_single(amps: &mut [C64], mask: usize, g: &[[C64; 2]; 2]) {
    for k in 0..amps.len() {
        if k & mask != 0 {
            continue;
        }
        let (a0, a1) = (amps[k], amps[k | mask]);
        amps[k] = g[0][0] * a0 + g[0][1] * a1;
        amps[k | mask] = g[1][0] * a0 + g[1][1] * a1;
    }
}

/// Born-rule outcome probabilities after rotating each qubit into its
/// setting's basis, indexed like the amplitudes.
pub fn exact_probabilities(state: &StateVector, bases: &[Basis]) -> Result<Vec<f64>> {
    if bases.len() != state.n_qubits {
        return Err(Error::QubitMismatch {
            expected: state.n_qubits,
            found: bases.len(),
        });
    }
    let mut amps = state.amplitudes.clone();
    for (q, &b) in bases.iter().enumerate() {
        if let Some(g) = rotation(b) {
            apply_single(&mut amps, state.mask(q), &g);
        }
    }
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Bitstring of an outcome index, qubit 0 first.
pub fn index_to_bits(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}
