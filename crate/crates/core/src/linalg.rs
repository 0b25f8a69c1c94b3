//! Small fixed-size complex linear algebra shared by the reconstruction
//! and quantifier code. Everything here is 2×2 or 4×4.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex;

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(index: usize) -> Matrix2<C64> {
    match index {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Kronecker product with `a` acting on the first (more significant) slot.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// σ_a ⊗ σ_b for Pauli indices in 0..4.
pub fn pauli_pair(a: usize, b: usize) -> Matrix4<C64> {
    kron(&pauli(a), &pauli(b))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation4(m: &Matrix4<C64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..4 {
        for c in r..4 {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part4(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian 4×4 matrix, eigenvalues ascending.
pub fn eigh4(m: &Matrix4<C64>) -> (Vector4<f64>, Matrix4<C64>) {
    let eig = hermitian_part4(m).symmetric_eigen();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector4::from_fn(|k, _| eig.eigenvalues[order[k]]);
    let vectors = Matrix4::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh4(m: &Matrix4<C64>) -> Vector4<f64> {
    eigh4(m).0
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending. Closed form.
pub fn eigvalsh2(m: &Matrix2<C64>) -> Vector2<f64> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    Vector2::new(mean - radius, mean + radius)
}

/// Reassemble V diag(λ) V†.
pub fn from_spectrum4(values: &Vector4<f64>, vectors: &Matrix4<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        if values[k] == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += v * v.adjoint() * C64::new(values[k], 0.0);
    }
    out
}

pub fn trace4(m: &Matrix4<C64>) -> C64 {
    m[(0, 0)] + m[(1, 1)] + m[(2, 2)] + m[(3, 3)]
}

/// Trace distance ½‖a − b‖₁ between two Hermitian matrices.
pub fn trace_distance4(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    0.5 * eigvalsh4(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

/// Binary entropy in bits of a qubit whose Bloch vector has length `r`.
pub fn qubit_entropy_from_bloch(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    let p = 0.5 * (1.0 + r);
    let q = 0.5 * (1.0 - r);
    xlog2x(p) + xlog2x(q)
}

/// −x log₂ x with the 0·log 0 = 0 convention; tiny negatives count as 0.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}
