//! JSON bodies of the vendor REST protocol, shared by the mock service and
//! the plugin.

use std::collections::BTreeMap;

use qdmi_core::{Circuit, HeraldingMode, QubitMapping};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Availability {
    Online,
    Maintenance,
}

impl Availability {
    pub fn name(self) -> &'static str {
        match self {
            Availability::Online => "online",
            Availability::Maintenance => "maintenance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendSummary {
    pub id: String,
    pub alias: String,
    pub availability: Availability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    pub quantum_computers: Vec<BackendSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticArchitecture {
    pub quantum_computer_id: String,
    pub alias: String,
    pub version: String,
    pub qubits: Vec<String>,
    pub connectivity: Vec<(String, String)>,
    pub operations: Vec<String>,
    pub supported_formats: Vec<String>,
    pub default_calibration_set_id: String,
}

/// A calibrated operation on concrete qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationLocus {
    pub name: String,
    pub qubits: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicArchitecture {
    pub calibration_set_id: String,
    pub qubits: Vec<String>,
    pub operations: Vec<OperationLocus>,
}

/// Coherence times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitMetrics {
    pub name: String,
    pub t1: f64,
    pub t2: f64,
}

/// Duration in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationMetrics {
    pub name: String,
    pub qubits: Vec<String>,
    pub fidelity: f64,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMetrics {
    pub calibration_set_id: String,
    pub quantum_computer_id: String,
    pub created_at: String,
    pub qubits: Vec<QubitMetrics>,
    pub operations: Vec<OperationMetrics>,
}

impl CalibrationMetrics {
    pub fn qubit(&self, name: &str) -> Option<&QubitMetrics> {
        self.qubits.iter().find(|q| q.name == name)
    }

    /// Metrics for `name` on `qubits`; two-qubit loci match in either order.
    pub fn operation(&self, name: &str, qubits: &[&str]) -> Option<&OperationMetrics> {
        self.operations
            .iter()
            .find(|op| op.name == name && same_locus(&op.qubits, qubits))
    }
}

pub(crate) fn same_locus(locus: &[String], qubits: &[&str]) -> bool {
    if locus.len() != qubits.len() {
        return false;
    }
    locus.iter().zip(qubits).all(|(a, b)| a == b) || locus.iter().rev().zip(qubits).all(|(a, b)| a == b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSupport {
    pub supported: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitJobRequest {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<Circuit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    pub shots: u64,
    #[serde(default)]
    pub heralding_mode: HeraldingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_mapping: Option<QubitMapping>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobCreated {
    pub id: String,
    pub native_state: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobStatusBody {
    pub id: String,
    pub native_state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_calibration_set_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyOutcomes {
    pub key: String,
    pub values: Vec<u8>,
}

/// Per-key outcomes in declaration order; `values[s]` is shot `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub shots: u64,
    pub measurements: Vec<KeyOutcomes>,
}

impl Measurements {
    /// Per-shot bitstrings, leftmost character from the first key.
    pub fn bitstrings(&self) -> Vec<String> {
        (0..self.shots as usize)
            .map(|s| {
                self.measurements
                    .iter()
                    .map(|k| if k.values.get(s) == Some(&1) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub keys: Vec<String>,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RequestLog {
    pub counts: BTreeMap<String, u64>,
    /// Route names in arrival order.
    pub log: Vec<String>,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub route: String,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// Bearer-token file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthFile {
    pub access_token: String,
}
