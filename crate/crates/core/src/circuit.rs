//! Native-gate circuits as carried in `IQMJSON` programs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::keys::QubitMapping;

/// Upper bound on distinct qubits a circuit may touch in the simulator.
pub const MAX_SIMULATED_QUBITS: usize = 12;

/// One native instruction. Angles are radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Instruction {
    Prx {
        qubits: Vec<String>,
        theta: f64,
        phi: f64,
    },
    Cz {
        qubits: Vec<String>,
    },
    Measure {
        qubits: Vec<String>,
        key: String,
    },
}

impl Instruction {
    pub fn qubits(&self) -> &[String] {
        match self {
            Instruction::Prx { qubits, .. }
            | Instruction::Cz { qubits }
            | Instruction::Measure { qubits, .. } => qubits,
        }
    }

    fn qubits_mut(&mut self) -> &mut Vec<String> {
        match self {
            Instruction::Prx { qubits, .. }
            | Instruction::Cz { qubits }
            | Instruction::Measure { qubits, .. } => qubits,
        }
    }

    pub fn gate_name(&self) -> &'static str {
        match self {
            Instruction::Prx { .. } => "prx",
            Instruction::Cz { .. } => "cz",
            Instruction::Measure { .. } => "measure",
        }
    }

    fn arity(&self) -> usize {
        match self {
            Instruction::Cz { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitError {
    UnknownQubit(String),
    BadArity { gate: &'static str, got: usize },
    NotConnected(String, String),
    DuplicateKey(String),
    TooManyQubits(usize),
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::UnknownQubit(q) => write!(f, "unknown qubit {q}"),
            CircuitError::BadArity { gate, got } => {
                write!(f, "{gate} acts on the wrong number of qubits ({got})")
            }
            CircuitError::NotConnected(a, b) => write!(f, "cz pair {a}-{b} is not connected"),
            CircuitError::DuplicateKey(k) => write!(f, "duplicate measure key {k}"),
            CircuitError::TooManyQubits(n) => {
                write!(f, "circuit touches {n} qubits, limit is {MAX_SIMULATED_QUBITS}")
            }
        }
    }
}

impl core::error::Error for CircuitError {}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            instructions: Vec::new(),
        }
    }

    pub fn prx(mut self, qubit: &str, theta: f64, phi: f64) -> Self {
        self.instructions.push(Instruction::Prx {
            qubits: alloc::vec![qubit.to_string()],
            theta,
            phi,
        });
        self
    }

    pub fn cz(mut self, a: &str, b: &str) -> Self {
        self.instructions.push(Instruction::Cz {
            qubits: alloc::vec![a.to_string(), b.to_string()],
        });
        self
    }

    pub fn measure(mut self, qubit: &str, key: &str) -> Self {
        self.instructions.push(Instruction::Measure {
            qubits: alloc::vec![qubit.to_string()],
            key: key.to_string(),
        });
        self
    }

    /// Measure keys with their qubit, in declaration order.
    pub fn measurements(&self) -> Vec<(&str, &str)> {
        self.instructions
            .iter()
            .filter_map(|inst| match inst {
                Instruction::Measure { qubits, key } => {
                    Some((key.as_str(), qubits.first().map_or("", String::as_str)))
                }
                _ => None,
            })
            .collect()
    }

    pub fn measure_keys(&self) -> Vec<&str> {
        self.measurements().into_iter().map(|(k, _)| k).collect()
    }

    /// Distinct qubits in order of first use.
    pub fn referenced_qubits(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for q in self.instructions.iter().flat_map(|i| i.qubits()) {
            if !seen.contains(&q.as_str()) {
                seen.push(q);
            }
        }
        seen
    }

    /// Rewrites logical qubit names through `mapping`. Names absent from the
    /// mapping are kept as they are.
    pub fn apply_mapping(&mut self, mapping: &QubitMapping) {
        for inst in &mut self.instructions {
            for q in inst.qubits_mut() {
                if let Some(p) = mapping.physical_for(q) {
                    *q = p.to_string();
                }
            }
        }
    }

    /// Checks the circuit against a device topology.
    pub fn validate<S: AsRef<str>>(
        &self,
        qubits: &[S],
        edges: &[(S, S)],
    ) -> Result<(), CircuitError> {
        let known = |q: &str| qubits.iter().any(|k| k.as_ref() == q);
        let mut keys: Vec<&str> = Vec::new();
        for inst in &self.instructions {
            let qs = inst.qubits();
            if qs.len() != inst.arity() {
                return Err(CircuitError::BadArity {
                    gate: inst.gate_name(),
                    got: qs.len(),
                });
            }
            if let Some(q) = qs.iter().find(|q| !known(q)) {
                return Err(CircuitError::UnknownQubit(q.clone()));
            }
            match inst {
                Instruction::Cz { qubits } => {
                    let (a, b) = (qubits[0].as_str(), qubits[1].as_str());
                    let connected = a != b
                        && edges.iter().any(|(x, y)| {
                            let (x, y) = (x.as_ref(), y.as_ref());
                            (x == a && y == b) || (x == b && y == a)
                        });
                    if !connected {
                        return Err(CircuitError::NotConnected(a.to_string(), b.to_string()));
                    }
                }
                Instruction::Measure { key, .. } => {
                    if keys.contains(&key.as_str()) {
                        return Err(CircuitError::DuplicateKey(key.clone()));
                    }
                    keys.push(key);
                }
                Instruction::Prx { .. } => {}
            }
        }
        let touched = self.referenced_qubits().len();
        if touched > MAX_SIMULATED_QUBITS {
            return Err(CircuitError::TooManyQubits(touched));
        }
        Ok(())
    }
}
