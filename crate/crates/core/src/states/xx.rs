//! Open XX chain in a longitudinal field,
//! H = −Σᵢ [½(σˣᵢσˣᵢ₊₁ + σʸᵢσʸᵢ₊₁) + B σᶻᵢ], with J = 1.
//!
//! H conserves the number of excitations (|1⟩ spins), so it is diagonalized
//! one excitation sector at a time. The ground sector holds k excitations
//! for cos[π(k+1)/(N+1)] < B < cos[πk/(N+1)].

use nalgebra::DMatrix;

use super::{StateVector, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Energies closer than this count as a level crossing.
pub const DEGENERACY_TOL: f64 = 2e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XXConfig {
    pub n_spins: usize,
    pub field: f64,
}

impl XXConfig {
    pub fn new(n_spins: usize, field: f64) -> Result<Self> {
        let cfg = XXConfig { n_spins, field };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::InvalidArgument(format!("XX chain needs N ≥ 2, got {}", self.n_spins)));
        }
        if self.n_spins > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "XX chain spins",
                value: self.n_spins,
                limit: MAX_QUBITS,
            });
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidArgument("field must be finite".into()));
        }
        Ok(())
    }
}

/// Level-crossing fields B_k = cos[πk/(N+1)] for k = 1..=N, decreasing.
pub fn critical_fields(n_spins: usize) -> Vec<f64> {
    (1..=n_spins)
        .map(|k| (std::f64::consts::PI * k as f64 / (n_spins as f64 + 1.0)).cos())
        .collect()
}

/// Zone index k such that B_{k+1} < B < B_k (number of crossings passed
/// coming down from large B).
pub fn xx_zone(n_spins: usize, field: f64) -> usize {
    critical_fields(n_spins).iter().filter(|&&bk| bk > field).count()
}

struct Sector {
    states: Vec<usize>,
    hamiltonian: DMatrix<f64>,
}

fn sector(n: usize, excitations: usize, field: f64) -> Sector {
    let states: Vec<usize> = (0..1usize << n)
        .filter(|s| s.count_ones() as usize == excitations)
        .collect();
    let dim = states.len();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let diag = -field * (n as f64 - 2.0 * excitations as f64);
    for (row, &s) in states.iter().enumerate() {
        h[(row, row)] = diag;
        for bond in 0..n - 1 {
            let hop = (1usize << bond) | (1usize << (bond + 1));
            let pair = s & hop;
            if pair != 0 && pair != hop {
                let t = s ^ hop;
                let col = states.binary_search(&t).expect("hop stays in sector");
                h[(row, col)] = -1.0;
            }
        }
    }
    Sector { states, hamiltonian: h }
}

fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Lowest energy in each excitation sector m = 0..=N.
pub fn xx_sector_ground_energies(cfg: &XXConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok((0..=cfg.n_spins)
        .map(|m| sorted_eigenvalues(&sector(cfg.n_spins, m, cfg.field).hamiltonian)[0])
        .collect())
}

pub fn xx_ground_energy(cfg: &XXConfig) -> Result<f64> {
    Ok(xx_sector_ground_energies(cfg)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Ground state and its energy. Fails when the ground space is degenerate.
pub fn xx_ground_state(cfg: &XXConfig) -> Result<(StateVector, f64)> {
    cfg.validate()?;
    let n = cfg.n_spins;
    let mut lowest: Vec<(f64, usize)> = Vec::new();
    for m in 0..=n {
        let ev = sorted_eigenvalues(&sector(n, m, cfg.field).hamiltonian);
        lowest.extend(ev.into_iter().take(2).map(|e| (e, m)));
    }
    lowest.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (e0, m0) = lowest[0];
    let gap = lowest[1].0 - e0;
    if gap <= DEGENERACY_TOL {
        return Err(Error::DegenerateGroundState { field: cfg.field, gap });
    }

    let sec = sector(n, m0, cfg.field);
    let eig = sec.hamiltonian.clone().symmetric_eigen();
    let k = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty sector");
    let v = eig.eigenvectors.column(k);
    // Fix the global sign: largest-magnitude component positive.
    let pivot = v.iter().fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
    let sign = pivot.signum();
    let mut amplitudes = vec![ZERO; 1 << n];
    for (&s, &x) in sec.states.iter().zip(v.iter()) {
        amplitudes[s] = C64::new(sign * x, 0.0);
    }
    Ok((StateVector::normalized(n, amplitudes)?, e0))
}

/// H|ψ⟩ on the full Hilbert space, built bond by bond.
pub fn xx_apply_hamiltonian(cfg: &XXConfig, state: &StateVector) -> Result<Vec<C64>> {
    cfg.validate()?;
    let n = cfg.n_spins;
    if state.n_qubits() != n {
        return Err(Error::QubitMismatch {
            expected: n,
            found: state.n_qubits(),
        });
    }
    let amps = state.amplitudes();
    let mut out = vec![ZERO; amps.len()];
    for (s, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        for q in 0..n {
            let z = if s & state.mask(q) == 0 { 1.0 } else { -1.0 };
            out[s] += a * (-cfg.field * z);
        }
        for q in 0..n - 1 {
            let (m1, m2) = (state.mask(q), state.mask(q + 1));
            // ½(XX + YY) flips 01 ↔ 10 and annihilates 00, 11.
            if (s & m1 == 0) != (s & m2 == 0) {
                out[s ^ m1 ^ m2] += -a;
            }
        }
    }
    Ok(out)
}

/// Fields in (lo, hi) where the ground sector changes, located by scanning
/// `steps` points and bisecting each change to `tol`.
pub fn ground_crossings(n_spins: usize, lo: f64, hi: f64, steps: usize, tol: f64) -> Result<Vec<f64>> {
    let ground_sector = |b: f64| -> Result<usize> {
        let e = xx_sector_ground_energies(&XXConfig::new(n_spins, b)?)?;
        Ok(e.iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(m, _)| m)
            .unwrap())
    };
    let mut out = Vec::new();
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let mut prev = ground_sector(grid[0])?;
    for w in grid.windows(2) {
        let next = ground_sector(w[1])?;
        if next != prev {
            let (mut a, mut b) = (w[0], w[1]);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if ground_sector(mid)? == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = next;
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_field_aligns_spins() {
        // 4×4 by hand: |00⟩ has −2B, the others at most 0 ± 1.
        let (gs, e) = xx_ground_state(&XXConfig::new(2, 10.0).unwrap()).unwrap();
        assert!((e + 20.0).abs() < 1e-12);
        assert!((gs.amplitudes()[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_spin_zone_one_is_singlet_like() {
        // B_1 = cos(π/3) = 0.5; below it the ground state is (|01⟩ + |10⟩)/√2 at E = −1.
        let (gs, e) = xx_ground_state(&XXConfig::new(2, 0.2).unwrap()).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((gs.amplitudes()[1].re - h).abs() < 1e-12);
        assert!((gs.amplitudes()[2].re - h).abs() < 1e-12);
    }

    #[test]
    fn critical_field_values() {
        let b = critical_fields(9);
        assert!((b[0] - 0.951_056_516_295_153_6).abs() < 1e-12);
        assert!((b[1] - 0.809_016_994_374_947_5).abs() < 1e-12);
        assert_eq!(xx_zone(9, 0.87), 1);
        assert_eq!(xx_zone(9, 0.7), 2);
        assert_eq!(xx_zone(9, 1.5), 0);
    }

    #[test]
    fn rejects_degenerate_field() {
        let b1 = critical_fields(9)[0];
        let err = xx_ground_state(&XXConfig::new(9, b1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateGroundState { .. }));
        assert!(xx_ground_state(&XXConfig::new(9, b1 + 1e-6).unwrap()).is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(XXConfig::new(1, 0.5).is_err());
        assert!(matches!(XXConfig::new(15, 0.5), Err(Error::Capacity { .. })));
        assert!(XXConfig::new(4, f64::NAN).is_err());
    }

    #[test]
    fn eigen_residual_is_small() {
        for &(n, b) in &[(5usize, 0.3), (9, 0.87), (9, 0.7), (9, 0.45), (8, -0.2)] {
            let cfg = XXConfig::new(n, b).unwrap();
            let (gs, e) = xx_ground_state(&cfg).unwrap();
            let hv = xx_apply_hamiltonian(&cfg, &gs).unwrap();
            let resid: f64 = hv
                .iter()
                .zip(gs.amplitudes())
                .map(|(h, v)| (h - v * e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-9, "n={n} b={b} residual {resid:e}");
        }
    }

    #[test]
    fn sector_energies_follow_free_fermions() {
        // E_m = −B(N − 2m) − 2 Σ_{k≤m} cos(πk/(N+1)).
        let cfg = XXConfig::new(7, 0.35).unwrap();
        let e = xx_sector_ground_energies(&cfg).unwrap();
        for (m, &em) in e.iter().enumerate() {
            let band: f64 = critical_fields(7).iter().take(m).sum();
            let expected = -0.35 * (7.0 - 2.0 * m as f64) - 2.0 * band;
            assert!((em - expected).abs() < 1e-10, "m={m}");
        }
    }
}
