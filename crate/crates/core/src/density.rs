use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-10;

/// Two-qubit density matrix in the |00>, |01>, |10>, |11> basis; the first
/// slot belongs to the lower qubit index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2Q(Matrix4<C64>);

impl DensityMatrix2Q {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let dev = linalg::hermitian_deviation4(&m);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = linalg::trace4(&m);
        if (tr - linalg::ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} ≠ 1")));
        }
        let min = linalg::eigvalsh4(&m)[0];
        if min < -EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix2Q(m))
    }

    pub(crate) fn new_unchecked(m: Matrix4<C64>) -> Self {
        DensityMatrix2Q(m)
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(amplitudes: [C64; 4]) -> Self {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let v = nalgebra::Vector4::from_iterator(amplitudes.iter().map(|a| a / norm.sqrt()));
        DensityMatrix2Q(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix2Q(Matrix4::identity() * C64::new(0.25, 0.0))
    }

    /// Convex combination; weights are normalized.
    pub fn mixture(parts: &[(f64, DensityMatrix2Q)]) -> Self {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let m = parts
            .iter()
            .fold(Matrix4::zeros(), |acc, (w, r)| acc + r.0 * C64::new(w / total, 0.0));
        DensityMatrix2Q(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let v = linalg::eigvalsh4(&self.0);
        [v[0], v[1], v[2], v[3]]
    }

    /// Reduced state of the first (lower-index) qubit.
    pub fn reduce_to_first(&self) -> Matrix2<C64> {
        let m = &self.0;
        Matrix2::from_fn(|r, c| m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)])
    }

    /// Reduced state of the second qubit.
    pub fn reduce_to_second(&self) -> Matrix2<C64> {
        let m = &self.0;
        Matrix2::from_fn(|r, c| m[(r, c)] + m[(r + 2, c + 2)])
    }

    /// ⟨σ_a ⊗ σ_b⟩ for Pauli indices 0..4 (0 = identity).
    pub fn correlator(&self, a: usize, b: usize) -> f64 {
        (self.0 * linalg::pauli_pair(a, b)).trace().re
    }

    /// Full 4×4 table of Pauli expectation values.
    pub fn correlator_table(&self) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for (a, row) in t.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.correlator(a, b);
            }
        }
        t
    }

    /// Conjugation by U ⊗ V.
    pub fn local_unitary(&self, u: &Matrix2<C64>, v: &Matrix2<C64>) -> Self {
        let w = linalg::kron(u, v);
        DensityMatrix2Q(w * self.0 * w.adjoint())
    }

    pub fn trace_distance(&self, other: &DensityMatrix2Q) -> f64 {
        linalg::trace_distance4(&self.0, &other.0)
    }

    /// Rows of [re, im] pairs, the on-disk layout.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..4)
            .map(|r| (0..4).map(|c| [self.0[(r, c)].re, self.0[(r, c)].im]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(Error::schema("rho", "expected a 4×4 matrix of [re, im] pairs"));
        }
        Self::new(Matrix4::from_fn(|r, c| C64::new(rows[r][c][0], rows[r][c][1])))
    }
}

impl Serialize for DensityMatrix2Q {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix2Q {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
