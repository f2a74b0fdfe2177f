//! Selected-configuration workflow over the adapter: coordinate scan of a
//! one-layer ansatz against the diagonal part of a toy Hamiltonian, sampling
//! at the best parameters, then diagonalization in the span of the dominant
//! configurations.
//!
//! `offload` and `simulator` only change where the sampling stage runs and
//! which backend alias it targets; the algorithm is the same code path in all
//! four modes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use qdmi_core::qsci::{self, ToyHamiltonian};
use qdmi_core::{Circuit, Histogram, SessionParameterKey, StatusCode};
use serde::{Deserialize, Serialize};

use crate::adapter::{build_target, run_estimator, run_sampler, RunOptions};
use crate::launcher::{self, LaunchRequest};
use crate::mock::{BackendFixture, MockConfig};
use crate::plugin::{Device, Session};

pub const SIMULATOR_ALIAS: &str = "mock-5q-sim";
pub const HARDWARE_ALIAS: &str = "mock-5q";
pub const DEFAULT_GRID_POINTS: usize = 5;
pub const DEFAULT_SWEEPS: usize = 2;

/// `points` evenly spaced values from 0 to π inclusive.
pub fn default_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 * PI / (points - 1) as f64).collect(),
    }
}

/// Default mock fixtures plus a simulator clone of the five-qubit device, so
/// both aliases resolve to identical hardware descriptions.
pub fn mock_config(seed: u64) -> MockConfig {
    let mut sim = BackendFixture::five_qubit_star();
    sim.alias = SIMULATOR_ALIAS.into();
    MockConfig {
        seed,
        backends: vec![sim],
        ..MockConfig::default()
    }
}

/// Where the in-process stages connect. Unset fields fall back to the
/// `QDMI_*` environment of the plugin.
#[derive(Clone, Debug, Default)]
pub struct Endpoint {
    pub base_url: Option<String>,
    pub token: Option<String>,
    pub auth_file: Option<PathBuf>,
}

/// How the offloaded sampling stage is launched.
#[derive(Clone, Debug)]
pub struct OffloadSettings {
    pub site_config: PathBuf,
    pub partition: String,
    /// The `qdmi` executable that runs the handoff.
    pub executable: PathBuf,
    pub work_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub struct WorkflowConfig {
    pub offload: bool,
    pub simulator: bool,
    pub shots: u64,
    /// Recorded in the handoff request. Sampling randomness comes from the
    /// backend, so reproducibility also needs a backend started with this seed.
    pub seed: u64,
    pub k: usize,
    pub grid: Vec<f64>,
    pub sweeps: usize,
    pub simulator_alias: String,
    pub hardware_alias: String,
    pub options: RunOptions,
    pub offload_settings: Option<OffloadSettings>,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        Self {
            offload: false,
            simulator: true,
            shots: 4096,
            seed: 7,
            k: 4,
            grid: default_grid(DEFAULT_GRID_POINTS),
            sweeps: DEFAULT_SWEEPS,
            simulator_alias: SIMULATOR_ALIAS.into(),
            hardware_alias: HARDWARE_ALIAS.into(),
            options: RunOptions::default(),
            offload_settings: None,
        }
    }
}

impl WorkflowConfig {
    pub fn alias(&self) -> &str {
        if self.simulator {
            &self.simulator_alias
        } else {
            &self.hardware_alias
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Session,
    Target,
    Scan,
    Sample,
    Diagonalize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Session => "session",
            Stage::Target => "target",
            Stage::Scan => "scan",
            Stage::Sample => "sample",
            Stage::Diagonalize => "diagonalize",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkflowError {
    pub stage: Stage,
    pub message: String,
}

impl WorkflowError {
    fn new(stage: Stage, message: impl fmt::Display) -> Self {
        Self { stage, message: message.to_string() }
    }
}

impl fmt::Display for WorkflowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.message)
    }
}

impl std::error::Error for WorkflowError {}

#[derive(Clone, Debug, PartialEq)]
pub struct QsciResult {
    pub energy: f64,
    pub basis: Vec<String>,
    pub params: Vec<f64>,
    pub scan_energy: f64,
    pub counts: Histogram,
    pub alias: String,
}

/// Sampling request written for the offloaded stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoffRequest {
    pub circuit: Circuit,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoffResponse {
    pub counts: BTreeMap<String, u64>,
}

pub fn load_hamiltonian(path: &Path) -> Result<ToyHamiltonian, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn status_message(code: StatusCode) -> String {
    code.name().to_string()
}

/// Opens and initializes a session on `alias`.
pub fn open_session(device: &Device, endpoint: &Endpoint, alias: Option<&str>) -> Result<Session, StatusCode> {
    let mut session = device.session_alloc();
    if let Some(url) = &endpoint.base_url {
        session.set_parameter(SessionParameterKey::BaseUrl, url)?;
    }
    if let Some(token) = &endpoint.token {
        session.set_parameter(SessionParameterKey::Token, token)?;
    }
    if let Some(path) = &endpoint.auth_file {
        session.set_parameter(SessionParameterKey::AuthFile, &path.display().to_string())?;
    }
    if let Some(alias) = alias {
        session.set_parameter(SessionParameterKey::Custom2, alias)?;
    }
    session.init()?;
    Ok(session)
}

pub fn run_qsci(
    device: &Device,
    endpoint: &Endpoint,
    config: &WorkflowConfig,
    h: &ToyHamiltonian,
) -> Result<QsciResult, WorkflowError> {
    let n = h.qubits();
    if config.k == 0 || config.k > 1 << n {
        return Err(WorkflowError::new(Stage::Config, format!("k must be in 1..={}", 1 << n)));
    }
    if config.grid.is_empty() || config.shots == 0 {
        return Err(WorkflowError::new(Stage::Config, "grid and shots must be non-empty"));
    }
    if config.offload && config.offload_settings.is_none() {
        return Err(WorkflowError::new(Stage::Config, "offload requires launcher settings"));
    }
    let alias = config.alias();
    let session = open_session(device, endpoint, Some(alias))
        .map_err(|e| WorkflowError::new(Stage::Session, status_message(e)))?;

    let target = build_target(&session).map_err(|e| WorkflowError::new(Stage::Target, status_message(e)))?;
    if target.qubit_names.len() < n {
        return Err(WorkflowError::new(
            Stage::Target,
            format!("{alias} has {} qubits, {n} needed", target.qubit_names.len()),
        ));
    }
    let qubits = &target.qubit_names[..n];
    let edges: Vec<(String, String)> = target
        .connectivity
        .iter()
        .filter(|(a, b)| qubits.contains(a) && qubits.contains(b))
        .cloned()
        .collect();

    let observable = h.diagonal_part();
    let scan = qsci::coordinate_scan(&vec![0.0; n], &config.grid, config.sweeps, |params| {
        let circuit = qsci::build_ansatz(params, qubits, &edges)?;
        run_estimator(&session, &circuit, &observable, config.shots, &config.options).map(|e| e.value)
    })
    .map_err(|e| WorkflowError::new(Stage::Scan, status_message(e)))?;

    let circuit = qsci::build_ansatz(&scan.params, qubits, &edges)
        .map_err(|e| WorkflowError::new(Stage::Sample, status_message(e)))?;
    let counts = if config.offload {
        let settings = config.offload_settings.as_ref().expect("checked above");
        let request = HandoffRequest { circuit, shots: config.shots, seed: config.seed };
        offload_sample(settings, alias, &request)?
    } else {
        let mut hists = run_sampler(&session, &[circuit], config.shots, &config.options)
            .map_err(|e| WorkflowError::new(Stage::Sample, status_message(e.status)))?;
        hists.remove(0)
    };
    drop(session);

    let solution = qsci::solve_in_subspace(h, &counts, config.k)
        .map_err(|e| WorkflowError::new(Stage::Diagonalize, e))?;
    Ok(QsciResult {
        energy: solution.energy,
        basis: solution.basis,
        params: scan.params,
        scan_energy: scan.energy,
        counts,
        alias: alias.to_string(),
    })
}

/// Writes the request, runs `qdmi run-handoff` under the launcher and reads
/// the counts back.
fn offload_sample(settings: &OffloadSettings, alias: &str, request: &HandoffRequest) -> Result<Histogram, WorkflowError> {
    let fail = |m: String| WorkflowError::new(Stage::Sample, m);
    let request_path = settings.work_dir.join("handoff-request.json");
    let response_path = settings.work_dir.join("handoff-response.json");
    let _ = std::fs::remove_file(&response_path);
    let body = serde_json::to_vec_pretty(request).map_err(|e| fail(e.to_string()))?;
    std::fs::write(&request_path, body).map_err(|e| fail(format!("{}: {e}", request_path.display())))?;

    let site = launcher::load_site_config(&settings.site_config).map_err(|e| fail(e.to_string()))?;
    let launch = LaunchRequest::from_process(
        &settings.partition,
        vec![
            settings.executable.display().to_string(),
            "run-handoff".into(),
            "--request".into(),
            request_path.display().to_string(),
            "--response".into(),
            response_path.display().to_string(),
        ],
        Some(alias.to_string()),
    );
    match launcher::launch(&site, &launch) {
        Ok(0) => {}
        Ok(code) => return Err(fail(format!("offloaded stage exited with status {code}"))),
        Err(e) => return Err(fail(e.to_string())),
    }
    let text = std::fs::read_to_string(&response_path).map_err(|e| fail(format!("{}: {e}", response_path.display())))?;
    let response: HandoffResponse = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
    Ok(response.counts.iter().map(|(k, v)| (k.as_str(), *v)).collect())
}

/// Child side of the handoff: samples the circuit on the session configured
/// by the environment.
pub fn execute_handoff(device: &Device, request: &HandoffRequest, options: &RunOptions) -> Result<HandoffResponse, StatusCode> {
    let session = open_session(device, &Endpoint::default(), None)?;
    let hist = run_sampler(&session, std::slice::from_ref(&request.circuit), request.shots, options)
        .map_err(|e| e.status)?
        .remove(0);
    Ok(HandoffResponse {
        counts: hist.iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

/// QSCI energies for every subspace size from one histogram.
pub fn energies_by_k(h: &ToyHamiltonian, counts: &Histogram) -> Result<Vec<f64>, WorkflowError> {
    (1..=1usize << h.qubits())
        .map(|k| {
            qsci::solve_in_subspace(h, counts, k)
                .map(|s| s.energy)
                .map_err(|e| WorkflowError::new(Stage::Diagonalize, e))
        })
        .collect()
}
