//! Purified collisional model: n emitters, each initially excited, decay and
//! release an ancilla that collides once with the system qubit via
//! U_θ = exp(−i θ/2 σˣ_a ⊗ σᶻ_S).
//!
//! Layout: emitter k at qubit 2k, ancilla k at 2k + 1, system at 2n.

use super::{check_capacity, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionConfig {
    pub pairs: usize,
    /// Dimensionless time λt.
    pub lambda_t: f64,
    /// Interaction strength θ in radians.
    pub theta: f64,
}

impl CollisionConfig {
    pub fn new(pairs: usize, lambda_t: f64, theta: f64) -> Result<Self> {
        let cfg = CollisionConfig { pairs, lambda_t, theta };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.pairs < 1 {
            return Err(Error::InvalidArgument("collision model needs at least one pair".into()));
        }
        if !(self.lambda_t >= 0.0 && self.lambda_t.is_finite()) {
            return Err(Error::InvalidArgument(format!("λt must be ≥ 0, got {}", self.lambda_t)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidArgument("θ must be finite".into()));
        }
        check_capacity(self.n_qubits())
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.pairs + 1
    }

    pub fn emitter(&self, k: usize) -> usize {
        2 * k
    }

    pub fn ancilla(&self, k: usize) -> usize {
        2 * k + 1
    }

    pub fn system(&self) -> usize {
        2 * self.pairs
    }

    /// Probability that an emitter is still excited, e^{−λt}.
    pub fn survival(&self) -> f64 {
        (-self.lambda_t).exp()
    }
}

/// Total state at time λt with system initially |+⟩ and ancillae |0⟩.
pub fn collision_state(cfg: &CollisionConfig) -> Result<StateVector> {
    cfg.validate()?;
    let n = cfg.n_qubits();
    let mask = |q: usize| 1usize << (n - 1 - q);

    // |1⟩ on every emitter, |0⟩ on ancillae, |+⟩ on the system.
    let excited: usize = (0..cfg.pairs).map(|k| mask(cfg.emitter(k))).sum();
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![ZERO; 1 << n];
    amps[excited] = h;
    amps[excited | mask(cfg.system())] = h;

    let p = cfg.survival();
    let (stay, decay) = (p.sqrt(), (1.0 - p).sqrt());
    let (c, s) = ((cfg.theta / 2.0).cos(), (cfg.theta / 2.0).sin());
    let sys = mask(cfg.system());

    for k in 0..cfg.pairs {
        let e = mask(cfg.emitter(k));
        let a = mask(cfg.ancilla(k));
        let mut next = vec![ZERO; amps.len()];
        for idx in (0..amps.len()).filter(|i| i & e != 0) {
            debug_assert!(amps[idx & !e] == ZERO, "emitter {k} already decayed");
            let psi = amps[idx];
            if psi == ZERO {
                continue;
            }
            next[idx] += psi * stay;
            // U_θ = cos(θ/2) I − i sin(θ/2) X_a Z_S
            let z = if idx & sys == 0 { 1.0 } else { -1.0 };
            let ground = idx & !e;
            next[ground] += psi * (decay * c);
            next[ground ^ a] += psi * C64::new(0.0, -decay * s * z);
        }
        amps = next;
    }
    StateVector::normalized(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{exact_rdm, single_qubit_rdm};

    #[test]
    fn no_time_no_decay() {
        let cfg = CollisionConfig::new(1, 0.0, 1.0).unwrap();
        let s = collision_state(&cfg).unwrap();
        // |1⟩_e |0⟩_a |+⟩_S → indices 100 and 101.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0b100].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[0b101].re - h).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn long_time_branch_only() {
        let theta = 0.8;
        let cfg = CollisionConfig::new(1, 1000.0, theta).unwrap();
        let s = collision_state(&cfg).unwrap();
        let e = single_qubit_rdm(&s, 0).unwrap();
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-12);
        // U_θ(|0⟩|+⟩) = (cos|0⟩ − i sin|1⟩)|0⟩/√2 + (cos|0⟩ + i sin|1⟩)|1⟩/√2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let a = s.amplitudes();
        assert!((a[0b000] - C64::new(h * c, 0.0)).norm() < 1e-12);
        assert!((a[0b010] - C64::new(0.0, -h * sn)).norm() < 1e-12);
        assert!((a[0b001] - C64::new(h * c, 0.0)).norm() < 1e-12);
        assert!((a[0b011] - C64::new(0.0, h * sn)).norm() < 1e-12);
    }

    #[test]
    fn normalized_on_grid() {
        use std::f64::consts::PI;
        for n in 1..=4 {
            for lt in [0.0, 0.1, 1.0, 1000.0] {
                for th in [0.0, PI / 2.0, 2.0 * PI / 3.0] {
                    let s = collision_state(&CollisionConfig::new(n, lt, th).unwrap()).unwrap();
                    assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_coupling_gives_product_state() {
        let cfg = CollisionConfig::new(2, 0.7, 0.0).unwrap();
        let s = collision_state(&cfg).unwrap();
        // Each emitter ends in √p|1⟩ + √(1−p)|0⟩, independent of the rest.
        for (i, j) in crate::scheduler::pairs(5) {
            let rho = exact_rdm(&s, i, j).unwrap();
            let a = rho.reduce_to_first();
            let b = rho.reduce_to_second();
            let prod = crate::linalg::kron(&a, &b);
            assert!((prod - rho.matrix()).norm() < 1e-12, "pair ({i},{j})");
        }
    }

    #[test]
    fn config_validation() {
        assert!(CollisionConfig::new(0, 1.0, 1.0).is_err());
        assert!(CollisionConfig::new(1, -1.0, 1.0).is_err());
        assert!(CollisionConfig::new(7, 1.0, 1.0).is_err());
        assert_eq!(CollisionConfig::new(4, 1.0, 1.0).unwrap().n_qubits(), 9);
    }
}
