//! Service configuration and the backend registry fixture.

use std::path::Path;
use std::time::Duration;

use qdmi_core::rng;
use serde::{Deserialize, Serialize};

use crate::wire::Availability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Every qubit coupled to the middle one.
    Star,
    Chain,
}

/// One registry entry as written in a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendFixture {
    pub alias: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default = "default_availability")]
    pub availability: Availability,
    #[serde(default)]
    pub supports_calibration_jobs: bool,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_qubits() -> usize {
    5
}

fn default_topology() -> Topology {
    Topology::Star
}

fn default_availability() -> Availability {
    Availability::Online
}

fn default_formats() -> Vec<String> {
    vec!["IQMJSON".into()]
}

impl BackendFixture {
    pub fn five_qubit_star() -> Self {
        Self {
            alias: "mock-5q".into(),
            id: None,
            qubits: 5,
            topology: Topology::Star,
            availability: Availability::Online,
            supports_calibration_jobs: true,
            formats: vec!["IQMJSON".into(), "CALIBRATION".into()],
        }
    }

    pub fn six_qubit_chain() -> Self {
        Self {
            alias: "mock-6q".into(),
            id: None,
            qubits: 6,
            topology: Topology::Chain,
            availability: Availability::Maintenance,
            supports_calibration_jobs: false,
            formats: vec!["IQMJSON".into()],
        }
    }

    pub fn qubit_names(&self) -> Vec<String> {
        (1..=self.qubits).map(|i| format!("QB{i}")).collect()
    }

    pub fn connectivity(&self) -> Vec<(String, String)> {
        let names = self.qubit_names();
        match self.topology {
            Topology::Chain => names.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect(),
            Topology::Star => {
                if names.len() < 2 {
                    return Vec::new();
                }
                let centre = names[(names.len() - 1) / 2].clone();
                names
                    .iter()
                    .filter(|n| **n != centre)
                    .map(|n| (n.clone(), centre.clone()))
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MockConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tokens: Vec<String>,
    #[serde(default)]
    pub stage_duration_ms: u64,
    #[serde(default)]
    pub fail_at_validation: bool,
    /// Entries replace the default backend with the same alias; others are
    /// appended.
    #[serde(default)]
    pub backends: Vec<BackendFixture>,
    /// Drops every default backend before applying `backends`.
    #[serde(default)]
    pub replace_default_backends: bool,
    #[serde(default)]
    pub base_path: String,
    /// Exposes the `/_test` inspection and fault-injection routes.
    #[serde(default)]
    pub test_routes: bool,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tokens: vec!["test-token".into()],
            stage_duration_ms: 0,
            fail_at_validation: false,
            backends: Vec::new(),
            replace_default_backends: false,
            base_path: String::new(),
            test_routes: false,
        }
    }
}

impl MockConfig {
    /// Default registry, one token, zero stage durations, test routes on.
    pub fn for_tests(seed: u64) -> Self {
        Self {
            seed,
            test_routes: true,
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn stage_duration(&self) -> Duration {
        Duration::from_millis(self.stage_duration_ms)
    }

    /// Default fixture merged with the configured overrides.
    pub fn registry(&self) -> Vec<BackendFixture> {
        let mut out = if self.replace_default_backends {
            Vec::new()
        } else {
            vec![BackendFixture::five_qubit_star(), BackendFixture::six_qubit_chain()]
        };
        for fixture in &self.backends {
            match out.iter_mut().find(|b| b.alias == fixture.alias) {
                Some(slot) => *slot = fixture.clone(),
                None => out.push(fixture.clone()),
            }
        }
        out
    }
}

/// UUID-shaped identifier derived from `(seed, domain, n)`.
pub fn uuid_like(seed: u64, domain: u64, n: u64) -> String {
    let base = rng::derive_seed(seed ^ domain.rotate_left(32), n);
    let hi = rng::derive_seed(base, 0);
    let lo = rng::derive_seed(base, 1);
    let hi = (hi & 0xffff_ffff_ffff_0fff) | 0x0000_0000_0000_4000;
    let lo = (lo & 0x3fff_ffff_ffff_ffff) | 0x8000_0000_0000_0000;
    format!(
        "{:08x}-{:04x}-{:04x}-{:04x}-{:012x}",
        hi >> 32,
        (hi >> 16) & 0xffff,
        hi & 0xffff,
        lo >> 48,
        lo & 0xffff_ffff_ffff
    )
}
