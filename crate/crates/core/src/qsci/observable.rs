use alloc::string::String;
use alloc::vec::Vec;

use crate::histogram::Histogram;
use crate::status::{Status, StatusCode};

/// Linear combination of Z-strings over measure keys. An empty support is the
/// identity term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagonalObservable {
    terms: Vec<(f64, Vec<String>)>,
}

/// Mean and standard error of an estimated expectation value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl DiagonalObservable {
    pub fn new(terms: Vec<(f64, Vec<String>)>) -> Self {
        Self { terms }
    }

    pub fn z(key: &str, coefficient: f64) -> Self {
        Self::new(alloc::vec![(coefficient, alloc::vec![String::from(key)])])
    }

    pub fn terms(&self) -> &[(f64, Vec<String>)] {
        &self.terms
    }

    /// Σ|c|, the bound on any expectation value.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Resolves each support key to its bit position within `keys`.
    fn positions(&self, keys: &[&str]) -> Status<Vec<(f64, Vec<usize>)>> {
        self.terms
            .iter()
            .map(|(c, support)| {
                let pos = support
                    .iter()
                    .map(|k| keys.iter().position(|x| x == k).ok_or(StatusCode::InvalidArgument))
                    .collect::<Status<Vec<_>>>()?;
                Ok((*c, pos))
            })
            .collect()
    }

    /// Value of the observable on one outcome bitstring.
    fn outcome_value(resolved: &[(f64, Vec<usize>)], bits: &[u8]) -> f64 {
        resolved
            .iter()
            .map(|(c, pos)| {
                let parity = pos.iter().filter(|&&p| bits[p] == b'1').count();
                if parity % 2 == 0 {
                    *c
                } else {
                    -*c
                }
            })
            .sum()
    }
}

/// Expectation from aggregated counts. `keys` names the bit positions of the
/// histogram's bitstrings in order.
///
/// Each term's parity average is formed from integer sums before scaling by
/// its coefficient, so an identity term contributes its coefficient exactly.
pub fn expectation_from_counts(
    hist: &Histogram,
    observable: &DiagonalObservable,
    keys: &[&str],
) -> Status<f64> {
    let resolved = observable.positions(keys)?;
    let total = hist.total();
    if total == 0 {
        return Err(StatusCode::InvalidArgument);
    }
    if hist.iter().any(|(bits, _)| bits.len() != keys.len()) {
        return Err(StatusCode::InvalidArgument);
    }
    Ok(resolved
        .iter()
        .map(|(c, pos)| {
            let signed: i64 = hist
                .iter()
                .map(|(bits, count)| {
                    let b = bits.as_bytes();
                    let odd = pos.iter().filter(|&&p| b[p] == b'1').count() % 2 == 1;
                    if odd {
                        -(count as i64)
                    } else {
                        count as i64
                    }
                })
                .sum();
            c * (signed as f64 / total as f64)
        })
        .sum())
}

/// Shot-level estimate: mean of per-shot values and the sample standard
/// deviation divided by `√shots`.
pub fn estimate_from_shots<S: AsRef<str>>(
    shots: &[S],
    observable: &DiagonalObservable,
    keys: &[&str],
) -> Status<Estimate> {
    let resolved = observable.positions(keys)?;
    if shots.is_empty() {
        return Err(StatusCode::InvalidArgument);
    }
    let values = shots
        .iter()
        .map(|s| {
            let s = s.as_ref();
            if s.len() != keys.len() {
                return Err(StatusCode::InvalidArgument);
            }
            Ok(DiagonalObservable::outcome_value(&resolved, s.as_bytes()))
        })
        .collect::<Status<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = expectation_from_counts(&Histogram::from_shots(shots), observable, keys)?;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        libm::sqrt(var) / libm::sqrt(n)
    } else {
        0.0
    };
    Ok(Estimate { value: mean, stderr })
}

/// Exact expectation under an outcome distribution indexed like
/// [`crate::sim::StateVector::marginal`].
pub fn expectation_from_distribution(
    dist: &[f64],
    observable: &DiagonalObservable,
    keys: &[&str],
) -> Status<f64> {
    let resolved = observable.positions(keys)?;
    let width = keys.len();
    if dist.len() != 1 << width {
        return Err(StatusCode::InvalidArgument);
    }
    Ok(dist
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let bits = super::hamiltonian::basis_string(i, width);
            p * DiagonalObservable::outcome_value(&resolved, bits.as_bytes())
        })
        .sum())
}
