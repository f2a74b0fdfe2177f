//! Numerical pieces of a selected-configuration workflow: a toy Hamiltonian,
//! a parameterized ansatz, a deterministic coordinate scan, configuration
//! selection from samples, and reduced-space diagonalization.

mod hamiltonian;
mod matrix;
mod observable;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

pub use hamiltonian::{basis_string, basis_strings, HamiltonianError, ToyHamiltonian, MAX_HAMILTONIAN_QUBITS};
pub use matrix::{diagonalize_symmetric, jacobi_eigen, DenseMatrix, Eigen, EigenError};
pub use observable::{
    estimate_from_shots, expectation_from_counts, expectation_from_distribution, DiagonalObservable,
    Estimate,
};

use crate::circuit::Circuit;
use crate::histogram::Histogram;
use crate::status::{Status, StatusCode};

/// Measure key of ansatz qubit `i`.
pub fn measure_key(i: usize) -> String {
    alloc::format!("m{i}")
}

/// One layer of real-amplitude rotations `prx(θ_i, π/2)`, a `cz` on every
/// listed edge whose endpoints are both ansatz qubits, then a measurement of
/// each qubit under key `m{i}`.
pub fn build_ansatz<S: AsRef<str>>(params: &[f64], qubits: &[S], edges: &[(S, S)]) -> Status<Circuit> {
    if params.len() != qubits.len() {
        return Err(StatusCode::InvalidArgument);
    }
    let used = |q: &str| qubits.iter().any(|x| x.as_ref() == q);
    let mut circuit = Circuit::new("ansatz");
    for (theta, q) in params.iter().zip(qubits) {
        circuit = circuit.prx(q.as_ref(), *theta, FRAC_PI_2);
    }
    for (a, b) in edges {
        if used(a.as_ref()) && used(b.as_ref()) {
            circuit = circuit.cz(a.as_ref(), b.as_ref());
        }
    }
    for (i, q) in qubits.iter().enumerate() {
        circuit = circuit.measure(q.as_ref(), &measure_key(i));
    }
    Ok(circuit)
}

/// Outcome of a coordinate scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub params: Vec<f64>,
    pub energy: f64,
    /// Best energy after each completed sweep.
    pub sweep_energies: Vec<f64>,
    pub evaluations: usize,
}

/// Deterministic coordinate-wise grid scan.
///
/// Each sweep visits parameters in index order; for each, every grid value is
/// evaluated with the others held fixed and the argmin is kept. Equal energies
/// resolve toward the smaller grid value.
pub fn coordinate_scan<E, F>(
    initial: &[f64],
    grid: &[f64],
    sweeps: usize,
    mut evaluate: F,
) -> Result<ScanResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    assert!(!grid.is_empty(), "scan grid must be non-empty");
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut params = initial.to_vec();
    let mut energy = f64::INFINITY;
    let mut sweep_energies = Vec::with_capacity(sweeps);
    let mut evaluations = 0;
    for _ in 0..sweeps {
        for i in 0..params.len() {
            let mut best: Option<(f64, f64)> = None;
            for &value in &sorted {
                params[i] = value;
                let e = evaluate(&params)?;
                evaluations += 1;
                if best.is_none_or(|(be, _)| e < be) {
                    best = Some((e, value));
                }
            }
            let (e, value) = best.expect("grid is non-empty");
            params[i] = value;
            energy = e;
        }
        sweep_energies.push(energy);
    }
    Ok(ScanResult {
        params,
        energy,
        sweep_energies,
        evaluations,
    })
}

/// Top-`k` bitstrings by count (ties ascending), padded with the
/// lowest-index unobserved basis strings when fewer than `k` were seen.
pub fn select_configurations(hist: &Histogram, k: usize, width: usize) -> Vec<String> {
    let mut ranked: Vec<(&str, u64)> = hist.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut chosen: Vec<String> = ranked.into_iter().take(k).map(|(s, _)| s.to_string()).collect();
    let mut index = 0usize;
    while chosen.len() < k && index < 1usize << width {
        let candidate = basis_string(index, width);
        if hist.get(&candidate) == 0 {
            chosen.push(candidate);
        }
        index += 1;
    }
    chosen
}

/// `M[i][j] = ⟨basis_i|H|basis_j⟩`.
pub fn reduced_hamiltonian<S: AsRef<str>>(h: &ToyHamiltonian, basis: &[S]) -> DenseMatrix {
    let k = basis.len();
    let mut m = DenseMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = h.matrix_element(basis[i].as_ref(), basis[j].as_ref());
        }
    }
    m
}

/// Ground energy from the full `2^n` matrix.
pub fn exact_ground_energy(h: &ToyHamiltonian) -> Result<f64, EigenError> {
    diagonalize_symmetric(&h.full_matrix()).map(|(e, _)| e)
}

/// Result of reduced-space diagonalization.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceSolution {
    pub energy: f64,
    pub basis: Vec<String>,
    pub vector: Vec<f64>,
}

/// Selects `k` configurations from `hist` and diagonalizes `h` in their span.
pub fn solve_in_subspace(h: &ToyHamiltonian, hist: &Histogram, k: usize) -> Result<SubspaceSolution, EigenError> {
    let basis = select_configurations(hist, k, h.qubits());
    let (energy, vector) = diagonalize_symmetric(&reduced_hamiltonian(h, &basis))?;
    Ok(SubspaceSolution { energy, basis, vector })
}
