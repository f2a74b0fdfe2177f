use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use super::observable::DiagonalObservable;

pub const MAX_HAMILTONIAN_QUBITS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HamiltonianError {
    TooManyQubits(usize),
    BadWord(String),
}

impl fmt::Display for HamiltonianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HamiltonianError::TooManyQubits(n) => {
                write!(f, "{n} qubits exceeds the limit of {MAX_HAMILTONIAN_QUBITS}")
            }
            HamiltonianError::BadWord(w) => write!(f, "invalid Pauli word {w:?}"),
        }
    }
}

impl core::error::Error for HamiltonianError {}

/// Real linear combination of Pauli words over `{I, Z, X}`.
///
/// Character `j` of a word acts on qubit `j`, which is also character `j`
/// of a basis bitstring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HamiltonianFile", into = "HamiltonianFile")]
pub struct ToyHamiltonian {
    n: usize,
    terms: Vec<(f64, String)>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianFile {
    n: usize,
    terms: Vec<(f64, String)>,
}

impl TryFrom<HamiltonianFile> for ToyHamiltonian {
    type Error = HamiltonianError;

    fn try_from(file: HamiltonianFile) -> Result<Self, Self::Error> {
        Self::new(file.n, file.terms)
    }
}

impl From<ToyHamiltonian> for HamiltonianFile {
    fn from(h: ToyHamiltonian) -> Self {
        Self {
            n: h.n,
            terms: h.terms,
        }
    }
}

impl ToyHamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, String)>) -> Result<Self, HamiltonianError> {
        if n > MAX_HAMILTONIAN_QUBITS {
            return Err(HamiltonianError::TooManyQubits(n));
        }
        for (_, word) in &terms {
            if word.len() != n || !word.bytes().all(|b| matches!(b, b'I' | b'Z' | b'X')) {
                return Err(HamiltonianError::BadWord(word.clone()));
            }
        }
        Ok(Self { n, terms })
    }

    /// `-J Σ Z_j Z_{j+1} - h Σ X_j` on an open chain.
    pub fn transverse_field_ising(n: usize, coupling: f64, field: f64) -> Result<Self, HamiltonianError> {
        let word = |letters: &[(usize, u8)]| -> String {
            let mut w = alloc::vec![b'I'; n];
            for &(pos, l) in letters {
                w[pos] = l;
            }
            String::from_utf8(w).expect("ascii")
        };
        let mut terms = Vec::new();
        for j in 0..n.saturating_sub(1) {
            terms.push((-coupling, word(&[(j, b'Z'), (j + 1, b'Z')])));
        }
        for j in 0..n {
            terms.push((-field, word(&[(j, b'X')])));
        }
        Self::new(n, terms)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, String)] {
        &self.terms
    }

    /// `⟨x|H|y⟩` for basis bitstrings of length `n`.
    pub fn matrix_element(&self, x: &str, y: &str) -> f64 {
        let (x, y) = (x.as_bytes(), y.as_bytes());
        debug_assert!(x.len() == self.n && y.len() == self.n);
        self.terms
            .iter()
            .filter_map(|(coeff, word)| {
                let mut sign = 1.0;
                for ((&p, &xb), &yb) in word.as_bytes().iter().zip(x).zip(y) {
                    match p {
                        b'X' if xb == yb => return None,
                        b'X' => {}
                        _ if xb != yb => return None,
                        b'Z' if xb == b'1' => sign = -sign,
                        _ => {}
                    }
                }
                Some(coeff * sign)
            })
            .sum()
    }

    /// Full `2^n × 2^n` matrix; row `i` is the basis string of `i` in binary,
    /// most significant bit first.
    pub fn full_matrix(&self) -> DenseMatrix {
        let basis = basis_strings(self.n);
        super::reduced_hamiltonian(self, &basis)
    }

    /// The Z/I part of the Hamiltonian over measure keys `m0, m1, …`.
    pub fn diagonal_part(&self) -> DiagonalObservable {
        let terms = self
            .terms
            .iter()
            .filter(|(_, w)| !w.contains('X'))
            .map(|(c, w)| {
                let support = w
                    .bytes()
                    .enumerate()
                    .filter(|(_, b)| *b == b'Z')
                    .map(|(j, _)| alloc::format!("m{j}"))
                    .collect();
                (*c, support)
            })
            .collect();
        DiagonalObservable::new(terms)
    }
}

/// Basis string of `index` on `n` bits, most significant bit first.
pub fn basis_string(index: usize, n: usize) -> String {
    (0..n)
        .map(|j| if (index >> (n - 1 - j)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn basis_strings(n: usize) -> Vec<String> {
    (0..1usize << n).map(|i| basis_string(i, n)).collect()
}
