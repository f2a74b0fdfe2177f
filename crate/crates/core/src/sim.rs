//! State-vector simulation of the native gate set.
//!
//! `prx(θ, φ) = exp(-i θ/2 (cos φ X + sin φ Y))`, `cz = diag(1, 1, 1, -1)`.
//! Measurements do not collapse the state: every shot is drawn independently
//! from the final joint distribution of the measured qubits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circuit::{Circuit, CircuitError, Instruction, MAX_SIMULATED_QUBITS};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl StateVector {
    /// `|0…0⟩` on `qubits` qubits. Qubit `k` is bit `k` of the basis index.
    pub fn zero(qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes, qubits }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn apply_prx(&mut self, qubit: usize, theta: f64, phi: f64) {
        let c = libm::cos(theta / 2.0);
        let s = libm::sin(theta / 2.0);
        let (sp, cp) = (libm::sin(phi), libm::cos(phi));
        let u00 = Complex64::new(c, 0.0);
        // -i s e^{-iφ} and -i s e^{iφ}
        let u01 = Complex64::new(-s * sp, -s * cp);
        let u10 = Complex64::new(s * sp, -s * cp);
        let u11 = u00;
        let mask = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = u00 * a0 + u01 * a1;
                self.amplitudes[i | mask] = u10 * a0 + u11 * a1;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Joint distribution of `qubits`; `qubits[0]` is the most significant
    /// bit of the outcome index.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let width = qubits.len();
        let mut dist = vec![0.0; 1 << width];
        for (basis, amp) in self.amplitudes.iter().enumerate() {
            let mut outcome = 0usize;
            for &q in qubits {
                outcome = (outcome << 1) | ((basis >> q) & 1);
            }
            dist[outcome] += amp.norm_sqr();
        }
        dist
    }
}

/// Per-key shot data of one execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    /// Measure keys in declaration order.
    pub keys: Vec<String>,
    /// `bits[k][s]` is the outcome of key `k` in shot `s`.
    pub bits: Vec<Vec<u8>>,
    pub shots: usize,
}

impl ShotRecord {
    /// Per-shot bitstrings; the leftmost character is the first declared key.
    pub fn bitstrings(&self) -> Vec<String> {
        (0..self.shots)
            .map(|s| {
                self.bits
                    .iter()
                    .map(|col| if col[s] == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

/// Runs every unitary of `circuit` on a fresh register.
///
/// Returns the final state and, for each measure key in declaration order,
/// the register index of its qubit.
pub fn evolve(circuit: &Circuit) -> Result<(StateVector, Vec<usize>), CircuitError> {
    let order = circuit.referenced_qubits();
    if order.len() > MAX_SIMULATED_QUBITS {
        return Err(CircuitError::TooManyQubits(order.len()));
    }
    let index = |name: &str| order.iter().position(|q| *q == name);
    let mut state = StateVector::zero(order.len());
    let mut measured = Vec::new();
    for inst in &circuit.instructions {
        let qs = inst.qubits();
        let expected = if matches!(inst, Instruction::Cz { .. }) { 2 } else { 1 };
        if qs.len() != expected {
            return Err(CircuitError::BadArity {
                gate: inst.gate_name(),
                got: qs.len(),
            });
        }
        let q0 = index(&qs[0]).ok_or_else(|| CircuitError::UnknownQubit(qs[0].clone()))?;
        match inst {
            Instruction::Prx { theta, phi, .. } => state.apply_prx(q0, *theta, *phi),
            Instruction::Cz { .. } => {
                let q1 = index(&qs[1]).ok_or_else(|| CircuitError::UnknownQubit(qs[1].clone()))?;
                state.apply_cz(q0, q1);
            }
            Instruction::Measure { .. } => measured.push(q0),
        }
    }
    Ok((state, measured))
}

/// Exact outcome distribution over the measure keys.
pub fn outcome_distribution(circuit: &Circuit) -> Result<Vec<f64>, CircuitError> {
    let (state, measured) = evolve(circuit)?;
    Ok(state.marginal(&measured))
}

/// Simulates `shots` repetitions. Shot `s` draws from the generator keyed by
/// `(seed, s)`, so the record depends only on the circuit, seed and shot count.
pub fn simulate(circuit: &Circuit, seed: u64, shots: usize) -> Result<ShotRecord, CircuitError> {
    let dist = outcome_distribution(circuit)?;
    let keys: Vec<String> = circuit.measure_keys().into_iter().map(String::from).collect();
    let width = keys.len();

    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for p in &dist {
        acc += p;
        cdf.push(acc);
    }
    let last_nonzero = dist.iter().rposition(|p| *p > 0.0).unwrap_or(0);

    let mut bits = vec![Vec::with_capacity(shots); width];
    for shot in 0..shots {
        let u = rng::unit(&mut rng::keyed(seed, shot as u64)) * acc;
        let outcome = cdf.partition_point(|c| *c <= u).min(last_nonzero);
        for (k, col) in bits.iter_mut().enumerate() {
            col.push(((outcome >> (width - 1 - k)) & 1) as u8);
        }
    }
    Ok(ShotRecord { keys, bits, shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn prx_pi_flips() {
        let c = Circuit::new("x").prx("QB1", PI, 0.0).measure("QB1", "m0");
        let dist = outcome_distribution(&c).unwrap();
        assert!((dist[1] - 1.0).abs() < 1e-15);
        let rec = simulate(&c, 1, 10).unwrap();
        assert!(rec.bits[0].iter().all(|b| *b == 1));
    }

    #[test]
    fn prx_half_pi_about_y_is_even() {
        let c = Circuit::new("y").prx("QB1", FRAC_PI_2, FRAC_PI_2).measure("QB1", "m0");
        let dist = outcome_distribution(&c).unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-15);
        assert!((dist[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measure_only_reads_zero() {
        let c = Circuit::new("id").measure("QB1", "m0");
        let rec = simulate(&c, 9, 10).unwrap();
        assert!(rec.bits[0].iter().all(|b| *b == 0));
        assert_eq!(rec.bitstrings()[0], "0");
    }

    #[test]
    fn bit_order_follows_key_declaration() {
        // Only QB2 is flipped; it is measured first, so it is the leftmost bit.
        let c = Circuit::new("o")
            .prx("QB1", 0.0, 0.0)
            .prx("QB2", PI, 0.0)
            .measure("QB2", "a")
            .measure("QB1", "b");
        let rec = simulate(&c, 0, 3).unwrap();
        assert_eq!(rec.keys, ["a", "b"]);
        assert!(rec.bitstrings().iter().all(|s| s == "10"));
    }

    #[test]
    fn cz_flips_phase_only_on_one_one() {
        let mut s = StateVector::zero(2);
        s.apply_prx(0, PI, 0.0);
        s.apply_prx(1, PI, 0.0);
        let before = s.amplitudes()[3];
        s.apply_cz(0, 1);
        assert_eq!(s.amplitudes()[3], -before);
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let c = Circuit::new("y").prx("QB1", FRAC_PI_2, FRAC_PI_2).measure("QB1", "m0");
        assert_eq!(simulate(&c, 42, 200).unwrap(), simulate(&c, 42, 200).unwrap());
        assert_ne!(simulate(&c, 42, 200).unwrap(), simulate(&c, 43, 200).unwrap());
    }
}
