//! Transport-independent request handling of the mock vendor service.
//!
//! Every route is a [`Request`]; [`MockBackend::handle`] authenticates,
//! counts and answers it with a status code and a JSON body. The HTTP layer
//! in [`super::server`] only translates paths.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};
use qdmi_core::lifecycle::{self, StageSchedule, ABORTED, READY};
use qdmi_core::rng;
use qdmi_core::sim::{self, ShotRecord};
use qdmi_core::Histogram;
use serde::Serialize;

use super::config::{uuid_like, BackendFixture, MockConfig};
use crate::clock::Clock;
use crate::wire::{
    Availability, BackendSummary, CalibrationMetrics, CalibrationSupport, CircuitJobRequest, Counts, Discovery,
    DynamicArchitecture, ErrorBody, JobCreated, JobStatusBody, KeyOutcomes, Measurements, OperationLocus,
    OperationMetrics, QubitMetrics, RequestLog, StaticArchitecture,
};

/// Largest accepted shot count per job.
pub const MAX_SHOTS: u64 = 1_000_000;
/// Operations every mock backend declares.
pub const OPERATIONS: [&str; 3] = ["prx", "cz", "measure"];
/// Version string reported in static architecture.
pub const VERSION: &str = "mock-1.0";

const BACKEND_DOMAIN: u64 = 1;
const SET_DOMAIN: u64 = 2;
const JOB_DOMAIN: u64 = 3;
const METRICS_DOMAIN: u64 = 4;

/// Synthetic origin of service timestamps (2025-01-01T00:00:00Z).
const EPOCH_SECONDS: i64 = 1_735_689_600;

/// One inbound route with its path parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Request {
    Discovery,
    StaticArchitecture { qc: String },
    DynamicArchitecture { qc: String, calibration_set: String },
    CalibrationSupport { qc: String },
    CalibrationMetrics { calibration_set: String },
    SubmitCircuit { qc: String, body: Vec<u8> },
    JobStatus { job: String },
    JobMeasurements { job: String },
    JobCounts { job: String },
    JobCancel { job: String },
    SubmitCalibration { qc: String },
    CalibrationStatus { job: String },
    CalibrationAbort { job: String },
}

impl Request {
    /// Symbolic route name used by request counters and fault injection.
    pub fn route_name(&self) -> &'static str {
        match self {
            Request::Discovery => "discovery",
            Request::StaticArchitecture { .. } => "static_arch",
            Request::DynamicArchitecture { .. } => "dynamic_arch",
            Request::CalibrationSupport { .. } => "calibration_support",
            Request::CalibrationMetrics { .. } => "calibration_metrics",
            Request::SubmitCircuit { .. } => "submit_circuit",
            Request::JobStatus { .. } => "job_status",
            Request::JobMeasurements { .. } => "job_measurements",
            Request::JobCounts { .. } => "job_counts",
            Request::JobCancel { .. } => "job_cancel",
            Request::SubmitCalibration { .. } => "submit_calibration",
            Request::CalibrationStatus { .. } => "calibration_status",
            Request::CalibrationAbort { .. } => "calibration_abort",
        }
    }
}

/// Status code and JSON body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Reply {
    fn ok<T: Serialize>(value: &T) -> Self {
        Self::json(200, value)
    }

    fn json<T: Serialize>(status: u16, value: &T) -> Self {
        Self {
            status,
            body: serde_json::to_vec(value).expect("wire types serialize"),
        }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        Self::json(status, &ErrorBody { error: message.into() })
    }
}

type Handled = Result<Reply, Reply>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum JobKind {
    Circuit,
    Calibration,
}

#[derive(Debug)]
struct NativeJob {
    id: String,
    kind: JobKind,
    backend_id: String,
    created: Duration,
    schedule: StageSchedule,
    seed: u64,
    aborted: bool,
    error_message: Option<String>,
    artifacts: Option<ShotRecord>,
    result_set: Option<String>,
}

impl NativeJob {
    fn state_at(&self, now: Duration) -> &'static str {
        if self.aborted {
            ABORTED
        } else {
            self.schedule.state_at(now.saturating_sub(self.created))
        }
    }
}

#[derive(Debug)]
struct Backend {
    fixture: BackendFixture,
    id: String,
    active_set: String,
}

#[derive(Debug, Default)]
struct State {
    backends: Vec<Backend>,
    sets: BTreeMap<String, CalibrationMetrics>,
    jobs: BTreeMap<String, NativeJob>,
    job_counter: u64,
    set_counter: u64,
    log: RequestLog,
    faults: BTreeMap<String, u32>,
}

/// The mock vendor service. All mutable state sits behind one lock.
#[derive(Debug)]
pub struct MockBackend {
    config: MockConfig,
    clock: Arc<dyn Clock>,
    state: Mutex<State>,
}

impl MockBackend {
    pub fn new(config: MockConfig, clock: Arc<dyn Clock>) -> Self {
        let mut state = State::default();
        for (index, fixture) in config.registry().into_iter().enumerate() {
            let id = fixture
                .id
                .clone()
                .unwrap_or_else(|| uuid_like(config.seed, BACKEND_DOMAIN, index as u64));
            let metrics = initial_metrics(&config, &fixture, &id, index as u64, &mut state.set_counter, clock.now());
            let active_set = metrics.calibration_set_id.clone();
            state.sets.insert(active_set.clone(), metrics);
            state.backends.push(Backend { fixture, id, active_set });
        }
        Self {
            config,
            clock,
            state: Mutex::new(state),
        }
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    /// Authenticates, counts and answers one request.
    pub fn handle(&self, request: Request, authorization: Option<&str>) -> Reply {
        let now = self.clock.now();
        let mut state = self.state.lock().unwrap();
        let route = request.route_name();
        *state.log.counts.entry(route.to_string()).or_default() += 1;
        state.log.log.push(route.to_string());
        state.log.total += 1;

        if let Some(remaining) = state.faults.get_mut(route) {
            if *remaining > 0 {
                *remaining -= 1;
                return Reply::error(503, "injected fault");
            }
        }
        if !self.authorized(authorization) {
            return Reply::error(401, "missing or unknown bearer token");
        }
        self.dispatch(&mut state, request, now).unwrap_or_else(|e| e)
    }

    fn authorized(&self, header: Option<&str>) -> bool {
        header
            .and_then(|h| h.strip_prefix("Bearer "))
            .is_some_and(|token| self.config.tokens.iter().any(|t| t == token))
    }

    fn dispatch(&self, state: &mut State, request: Request, now: Duration) -> Handled {
        match request {
            Request::Discovery => Ok(Reply::ok(&Discovery {
                quantum_computers: state
                    .backends
                    .iter()
                    .map(|b| BackendSummary {
                        id: b.id.clone(),
                        alias: b.fixture.alias.clone(),
                        availability: b.fixture.availability,
                    })
                    .collect(),
            })),
            Request::StaticArchitecture { qc } => {
                let b = backend(state, &qc)?;
                Ok(Reply::ok(&StaticArchitecture {
                    quantum_computer_id: b.id.clone(),
                    alias: b.fixture.alias.clone(),
                    version: VERSION.into(),
                    qubits: b.fixture.qubit_names(),
                    connectivity: b.fixture.connectivity(),
                    operations: OPERATIONS.iter().map(|s| s.to_string()).collect(),
                    supported_formats: b.fixture.formats.clone(),
                    default_calibration_set_id: b.active_set.clone(),
                }))
            }
            Request::DynamicArchitecture { qc, calibration_set } => {
                let id = backend(state, &qc)?.id.clone();
                let set = state
                    .sets
                    .get(&calibration_set)
                    .filter(|s| s.quantum_computer_id == id)
                    .ok_or_else(|| Reply::error(404, "unknown calibration set"))?;
                Ok(Reply::ok(&dynamic_architecture(set)))
            }
            Request::CalibrationSupport { qc } => Ok(Reply::ok(&CalibrationSupport {
                supported: backend(state, &qc)?.fixture.supports_calibration_jobs,
            })),
            Request::CalibrationMetrics { calibration_set } => state
                .sets
                .get(&calibration_set)
                .map(Reply::ok)
                .ok_or_else(|| Reply::error(404, "unknown calibration set")),
            Request::SubmitCircuit { qc, body } => self.submit_circuit(state, &qc, &body, now),
            Request::JobStatus { job } => {
                let job = circuit_job(state, &job)?;
                Ok(Reply::ok(&status_body(job, now)))
            }
            Request::JobMeasurements { job } => {
                let record = ready_artifacts(circuit_job(state, &job)?, now)?;
                Ok(Reply::ok(&Measurements {
                    shots: record.shots as u64,
                    measurements: record
                        .keys
                        .iter()
                        .zip(&record.bits)
                        .map(|(key, values)| KeyOutcomes {
                            key: key.clone(),
                            values: values.clone(),
                        })
                        .collect(),
                }))
            }
            Request::JobCounts { job } => {
                let record = ready_artifacts(circuit_job(state, &job)?, now)?;
                let hist = Histogram::from_shots(record.bitstrings());
                Ok(Reply::ok(&Counts {
                    keys: record.keys.clone(),
                    counts: hist.iter().map(|(k, v)| (k.to_string(), v)).collect(),
                }))
            }
            Request::JobCancel { job } => {
                circuit_job(state, &job)?;
                abort(state, &job, now)
            }
            Request::SubmitCalibration { qc } => self.submit_calibration(state, &qc, now),
            Request::CalibrationStatus { job } => {
                calibration_job(state, &job)?;
                self.observe_calibration(state, &job, now);
                Ok(Reply::ok(&status_body(&state.jobs[&job], now)))
            }
            Request::CalibrationAbort { job } => {
                calibration_job(state, &job)?;
                self.observe_calibration(state, &job, now);
                abort(state, &job, now)
            }
        }
    }

    fn submit_circuit(&self, state: &mut State, qc: &str, body: &[u8], now: Duration) -> Handled {
        let b = backend(state, qc)?;
        if b.fixture.availability == Availability::Maintenance {
            return Err(Reply::error(409, "quantum computer is in maintenance"));
        }
        let value: serde_json::Value =
            serde_json::from_slice(body).map_err(|e| Reply::error(400, format!("malformed body: {e}")))?;
        let format = value
            .get("format")
            .and_then(|f| f.as_str())
            .ok_or_else(|| Reply::error(400, "missing program format"))?
            .to_string();
        let backend_id = b.id.clone();
        let stage = self.config.stage_duration();

        if !b.fixture.formats.contains(&format) || format == "QIRBASESTRING" {
            if !b.fixture.formats.contains(&format) && !self.config.fail_at_validation {
                return Err(Reply::error(422, format!("program format {format} is not supported")));
            }
            let message = format!("validation failed: program format {format} cannot be executed");
            let job = self.new_job(state, JobKind::Circuit, backend_id, StageSchedule::circuit_failing_validation(stage), now);
            job.error_message = Some(message);
            return Ok(created(job, now));
        }
        if format != "IQMJSON" {
            return Err(Reply::error(400, format!("{format} is not a circuit program format")));
        }

        let request: CircuitJobRequest =
            serde_json::from_value(value).map_err(|e| Reply::error(400, format!("invalid job request: {e}")))?;
        let mut circuit = request.circuit.ok_or_else(|| Reply::error(400, "missing circuit"))?;
        if request.shots < 1 || request.shots > MAX_SHOTS {
            return Err(Reply::error(400, format!("shots must be within 1..={MAX_SHOTS}")));
        }
        if let Some(mapping) = &request.qubit_mapping {
            circuit.apply_mapping(mapping);
        }
        let b = backend(state, qc)?;
        circuit
            .validate(&b.fixture.qubit_names(), &b.fixture.connectivity())
            .map_err(|e| Reply::error(400, e.to_string()))?;

        let job = self.new_job(state, JobKind::Circuit, backend_id, StageSchedule::circuit(stage), now);
        let record = sim::simulate(&circuit, job.seed, request.shots as usize).map_err(|e| Reply::error(400, e.to_string()))?;
        job.artifacts = Some(record);
        Ok(created(job, now))
    }

    fn submit_calibration(&self, state: &mut State, qc: &str, now: Duration) -> Handled {
        let b = backend(state, qc)?;
        if !b.fixture.supports_calibration_jobs {
            return Err(Reply::error(422, "calibration jobs are not supported"));
        }
        if b.fixture.availability == Availability::Maintenance {
            return Err(Reply::error(409, "quantum computer is in maintenance"));
        }
        let backend_id = b.id.clone();
        let schedule = StageSchedule::calibration(self.config.stage_duration());
        let job = self.new_job(state, JobKind::Calibration, backend_id, schedule, now);
        Ok(created(job, now))
    }

    fn new_job<'a>(
        &self,
        state: &'a mut State,
        kind: JobKind,
        backend_id: String,
        schedule: StageSchedule,
        now: Duration,
    ) -> &'a mut NativeJob {
        let counter = state.job_counter;
        state.job_counter += 1;
        let id = uuid_like(self.config.seed, JOB_DOMAIN, counter);
        let job = NativeJob {
            id: id.clone(),
            kind,
            backend_id,
            created: now,
            schedule,
            seed: rng::derive_seed(self.config.seed, counter),
            aborted: false,
            error_message: None,
            artifacts: None,
            result_set: None,
        };
        state.jobs.entry(id).or_insert(job)
    }

    /// Materializes the job's calibration set the first time it is seen ready.
    fn observe_calibration(&self, state: &mut State, id: &str, now: Duration) {
        let job = &state.jobs[id];
        if job.state_at(now) != READY || job.result_set.is_some() {
            return;
        }
        let (seed, backend_id) = (job.seed, job.backend_id.clone());
        let Some(index) = state.backends.iter().position(|b| b.id == backend_id) else {
            return;
        };
        let previous = &state.sets[&state.backends[index].active_set];
        let set_id = uuid_like(self.config.seed, SET_DOMAIN, state.set_counter);
        state.set_counter += 1;
        let metrics = jittered(previous, set_id.clone(), timestamp(now), seed);
        state.sets.insert(set_id.clone(), metrics);
        state.backends[index].active_set = set_id.clone();
        state.jobs.get_mut(id).unwrap().result_set = Some(set_id);
    }

    pub fn request_log(&self) -> RequestLog {
        self.state.lock().unwrap().log.clone()
    }

    pub fn reset_request_log(&self) {
        self.state.lock().unwrap().log = RequestLog::default();
    }

    /// Makes the next `count` requests to `route` fail with 503.
    pub fn inject_failures(&self, route: &str, count: u32) {
        self.state.lock().unwrap().faults.insert(route.to_string(), count);
    }

    pub fn set_availability(&self, alias: &str, availability: Availability) -> bool {
        let mut state = self.state.lock().unwrap();
        match state.backends.iter_mut().find(|b| b.fixture.alias == alias) {
            Some(b) => {
                b.fixture.availability = availability;
                true
            }
            None => false,
        }
    }

    pub fn backend_id(&self, alias: &str) -> Option<String> {
        let state = self.state.lock().unwrap();
        state.backends.iter().find(|b| b.fixture.alias == alias).map(|b| b.id.clone())
    }

    pub fn active_calibration_set(&self, alias: &str) -> Option<String> {
        let state = self.state.lock().unwrap();
        state
            .backends
            .iter()
            .find(|b| b.fixture.alias == alias)
            .map(|b| b.active_set.clone())
    }

    pub fn calibration_set_count(&self) -> usize {
        self.state.lock().unwrap().sets.len()
    }
}

fn backend<'a>(state: &'a State, key: &str) -> Result<&'a Backend, Reply> {
    state
        .backends
        .iter()
        .find(|b| b.id == key || b.fixture.alias == key)
        .ok_or_else(|| Reply::error(404, format!("unknown quantum computer {key}")))
}

fn job_of_kind<'a>(state: &'a State, id: &str, kind: JobKind) -> Result<&'a NativeJob, Reply> {
    state
        .jobs
        .get(id)
        .filter(|j| j.kind == kind)
        .ok_or_else(|| Reply::error(404, format!("unknown job {id}")))
}

fn circuit_job<'a>(state: &'a State, id: &str) -> Result<&'a NativeJob, Reply> {
    job_of_kind(state, id, JobKind::Circuit)
}

fn calibration_job<'a>(state: &'a State, id: &str) -> Result<&'a NativeJob, Reply> {
    job_of_kind(state, id, JobKind::Calibration)
}

fn ready_artifacts(job: &NativeJob, now: Duration) -> Result<&ShotRecord, Reply> {
    let native = job.state_at(now);
    if native != READY {
        return Err(Reply::error(409, format!("job is {native}, results are not available")));
    }
    job.artifacts
        .as_ref()
        .ok_or_else(|| Reply::error(409, "job has no measurement artifacts"))
}

fn abort(state: &mut State, id: &str, now: Duration) -> Handled {
    let job = state.jobs.get_mut(id).expect("caller checked existence");
    let native = job.state_at(now);
    if lifecycle::is_terminal_native(native) {
        return Err(Reply::error(409, format!("job is already {native}")));
    }
    job.aborted = true;
    Ok(Reply::ok(&status_body(job, now)))
}

fn status_body(job: &NativeJob, now: Duration) -> JobStatusBody {
    let native = job.state_at(now);
    JobStatusBody {
        id: job.id.clone(),
        native_state: native.to_string(),
        error_message: if native == lifecycle::FAILED {
            job.error_message.clone()
        } else {
            None
        },
        result_calibration_set_id: job.result_set.clone(),
    }
}

fn created(job: &NativeJob, now: Duration) -> Reply {
    Reply::json(
        201,
        &JobCreated {
            id: job.id.clone(),
            native_state: job.state_at(now).to_string(),
        },
    )
}

fn timestamp(elapsed: Duration) -> String {
    let origin = DateTime::<Utc>::from_timestamp(EPOCH_SECONDS, 0).expect("valid epoch");
    let delta = TimeDelta::from_std(elapsed).unwrap_or(TimeDelta::zero());
    (origin + delta).to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn dynamic_architecture(set: &CalibrationMetrics) -> DynamicArchitecture {
    DynamicArchitecture {
        calibration_set_id: set.calibration_set_id.clone(),
        qubits: set.qubits.iter().map(|q| q.name.clone()).collect(),
        operations: set
            .operations
            .iter()
            .map(|op| OperationLocus {
                name: op.name.clone(),
                qubits: op.qubits.clone(),
            })
            .collect(),
    }
}

fn initial_metrics(
    config: &MockConfig,
    fixture: &BackendFixture,
    backend_id: &str,
    index: u64,
    set_counter: &mut u64,
    now: Duration,
) -> CalibrationMetrics {
    let mut draw = {
        let mut g = rng::keyed(config.seed ^ METRICS_DOMAIN.rotate_left(40), index);
        move || rng::unit(&mut g)
    };
    let names = fixture.qubit_names();
    let qubits = names
        .iter()
        .map(|name| {
            let t1 = 30e-6 + 30e-6 * draw();
            QubitMetrics {
                name: name.clone(),
                t1,
                t2: t1 * (0.5 + draw()),
            }
        })
        .collect();
    let mut operations = Vec::new();
    for name in &names {
        operations.push(OperationMetrics {
            name: "prx".into(),
            qubits: vec![name.clone()],
            fidelity: 0.995 + 0.0045 * draw(),
            duration: 40e-9,
        });
    }
    for (a, b) in fixture.connectivity() {
        operations.push(OperationMetrics {
            name: "cz".into(),
            qubits: vec![a, b],
            fidelity: 0.97 + 0.025 * draw(),
            duration: 80e-9,
        });
    }
    for name in &names {
        operations.push(OperationMetrics {
            name: "measure".into(),
            qubits: vec![name.clone()],
            fidelity: 0.95 + 0.04 * draw(),
            duration: 1.5e-6,
        });
    }
    let id = uuid_like(config.seed, SET_DOMAIN, *set_counter);
    *set_counter += 1;
    CalibrationMetrics {
        calibration_set_id: id,
        quantum_computer_id: backend_id.to_string(),
        created_at: timestamp(now),
        qubits,
        operations,
    }
}

/// Multiplies every metric by a seeded factor in `[0.95, 1.05]` and clamps
/// the result back into range (`t2 ≤ 2·t1`, fidelity ≤ 1).
fn jittered(previous: &CalibrationMetrics, id: String, created_at: String, seed: u64) -> CalibrationMetrics {
    let mut g = rng::keyed(seed, 0);
    let mut factor = move || 0.95 + 0.1 * rng::unit(&mut g);
    let qubits = previous
        .qubits
        .iter()
        .map(|q| {
            let t1 = q.t1 * factor();
            QubitMetrics {
                name: q.name.clone(),
                t1,
                t2: (q.t2 * factor()).min(2.0 * t1),
            }
        })
        .collect();
    let operations = previous
        .operations
        .iter()
        .map(|op| OperationMetrics {
            name: op.name.clone(),
            qubits: op.qubits.clone(),
            fidelity: (op.fidelity * factor()).min(1.0),
            duration: op.duration * factor(),
        })
        .collect();
    CalibrationMetrics {
        calibration_set_id: id,
        quantum_computer_id: previous.quantum_computer_id.clone(),
        created_at,
        qubits,
        operations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::wire::Availability;
    use qdmi_core::map_native_status;
    use qdmi_core::Circuit;
    use std::f64::consts::PI;

    const AUTH: Option<&str> = Some("Bearer test-token");

    fn service(config: MockConfig) -> (MockBackend, Arc<ManualClock>) {
        let clock = Arc::new(ManualClock::new());
        (MockBackend::new(config, clock.clone()), clock)
    }

    fn json(reply: &Reply) -> serde_json::Value {
        serde_json::from_slice(&reply.body).unwrap()
    }

    fn submit(svc: &MockBackend, qc: &str, circuit: &Circuit, shots: u64) -> Reply {
        let body = serde_json::to_vec(&serde_json::json!({
            "format": "IQMJSON", "circuit": circuit, "shots": shots
        }))
        .unwrap();
        svc.handle(Request::SubmitCircuit { qc: qc.into(), body }, AUTH)
    }

    fn job_id(reply: &Reply) -> String {
        json(reply)["id"].as_str().unwrap().to_string()
    }

    #[test]
    fn discovery_and_auth() {
        let (svc, _) = service(MockConfig::default());
        let reply = svc.handle(Request::Discovery, AUTH);
        let d: Discovery = serde_json::from_slice(&reply.body).unwrap();
        let aliases: Vec<_> = d.quantum_computers.iter().map(|b| (b.alias.as_str(), b.availability)).collect();
        assert_eq!(aliases, [("mock-5q", Availability::Online), ("mock-6q", Availability::Maintenance)]);
        assert_eq!(svc.handle(Request::Discovery, None).status, 401);
        assert_eq!(svc.handle(Request::Discovery, Some("Bearer nope")).status, 401);
        assert_eq!(svc.handle(Request::Discovery, Some("test-token")).status, 401);

        let mut empty = MockConfig::default();
        empty.replace_default_backends = true;
        let (svc, _) = service(empty);
        assert_eq!(svc.handle(Request::Discovery, AUTH).body, br#"{"quantum_computers":[]}"#);
    }

    #[test]
    fn static_architecture_is_stable() {
        let (svc, _) = service(MockConfig::default());
        let a = svc.handle(Request::StaticArchitecture { qc: "mock-5q".into() }, AUTH);
        let b = svc.handle(Request::StaticArchitecture { qc: svc.backend_id("mock-5q").unwrap() }, AUTH);
        assert_eq!(a, b);
        let arch: StaticArchitecture = serde_json::from_slice(&a.body).unwrap();
        assert_eq!(arch.qubits, ["QB1", "QB2", "QB3", "QB4", "QB5"]);
        assert_eq!(svc.handle(Request::StaticArchitecture { qc: "nope".into() }, AUTH).status, 404);
    }

    #[test]
    fn fixture_metrics_are_complete_and_consistent() {
        let (svc, _) = service(MockConfig::default());
        for alias in ["mock-5q", "mock-6q"] {
            let set = svc.active_calibration_set(alias).unwrap();
            let reply = svc.handle(Request::CalibrationMetrics { calibration_set: set }, AUTH);
            let m: CalibrationMetrics = serde_json::from_slice(&reply.body).unwrap();
            let n = if alias == "mock-5q" { 5 } else { 6 };
            assert_eq!(m.qubits.len(), n);
            assert!(m.qubits.iter().all(|q| q.t1 > 0.0 && q.t2 > 0.0 && q.t2 <= 2.0 * q.t1));
            assert_eq!(m.operations.len(), 2 * n + (n - 1));
            assert!(m.operations.iter().all(|o| (0.0..=1.0).contains(&o.fidelity) && o.duration > 0.0));
        }
        let bad = Request::CalibrationMetrics { calibration_set: "x".into() };
        assert_eq!(svc.handle(bad, AUTH).status, 404);
    }

    #[test]
    fn zero_duration_job_is_ready_on_first_poll() {
        let (svc, _) = service(MockConfig::default());
        let c = Circuit::new("x").prx("QB1", PI, 0.0).measure("QB1", "m0");
        let reply = submit(&svc, "mock-5q", &c, 10);
        assert_eq!(reply.status, 201);
        let id = job_id(&reply);
        let status = svc.handle(Request::JobStatus { job: id.clone() }, AUTH);
        assert_eq!(json(&status)["native_state"], "ready");
        let m: Measurements =
            serde_json::from_slice(&svc.handle(Request::JobMeasurements { job: id.clone() }, AUTH).body).unwrap();
        assert_eq!(m.measurements[0].values, vec![1; 10]);
        let counts = svc.handle(Request::JobCounts { job: id }, AUTH);
        assert_eq!(json(&counts)["counts"], serde_json::json!({"1": 10}));
    }

    #[test]
    fn schedule_arithmetic_and_cancel() {
        let mut config = MockConfig::default();
        config.stage_duration_ms = 10;
        let (svc, clock) = service(config);
        let c = Circuit::new("x").measure("QB1", "m0");
        let id = job_id(&submit(&svc, "mock-5q", &c, 3));
        clock.advance(Duration::from_millis(5));
        let s = svc.handle(Request::JobStatus { job: id.clone() }, AUTH);
        assert_eq!(json(&s)["native_state"], "received");
        assert_eq!(svc.handle(Request::JobMeasurements { job: id.clone() }, AUTH).status, 409);
        clock.advance(Duration::from_millis(10));
        assert_eq!(json(&svc.handle(Request::JobStatus { job: id.clone() }, AUTH))["native_state"], "queued");
        assert_eq!(svc.handle(Request::JobCancel { job: id.clone() }, AUTH).status, 200);
        clock.advance(Duration::from_secs(10));
        assert_eq!(json(&svc.handle(Request::JobStatus { job: id.clone() }, AUTH))["native_state"], "aborted");
        assert_eq!(svc.handle(Request::JobCancel { job: id }, AUTH).status, 409);
    }

    #[test]
    fn cancel_after_ready_conflicts() {
        let (svc, _) = service(MockConfig::default());
        let id = job_id(&submit(&svc, "mock-5q", &Circuit::new("x").measure("QB1", "m"), 1));
        assert_eq!(svc.handle(Request::JobCancel { job: id.clone() }, AUTH).status, 409);
        assert_eq!(json(&svc.handle(Request::JobStatus { job: id }, AUTH))["native_state"], "ready");
    }

    #[test]
    fn submission_errors() {
        let (svc, _) = service(MockConfig::default());
        let not_adjacent = Circuit::new("x").cz("QB1", "QB2").measure("QB1", "m");
        assert_eq!(submit(&svc, "mock-5q", &not_adjacent, 10).status, 400);
        assert_eq!(submit(&svc, "mock-5q", &Circuit::new("x").measure("QB1", "m"), 0).status, 400);
        assert_eq!(submit(&svc, "mock-6q", &Circuit::new("x").measure("QB1", "m"), 1).status, 409);
        let qir = serde_json::to_vec(&serde_json::json!({"format": "QIRBASESTRING", "program": "x", "shots": 1})).unwrap();
        assert_eq!(svc.handle(Request::SubmitCircuit { qc: "mock-5q".into(), body: qir }, AUTH).status, 422);
        let garbage = Request::SubmitCircuit { qc: "mock-5q".into(), body: b"{".to_vec() };
        assert_eq!(svc.handle(garbage, AUTH).status, 400);
        let unknown_gate = br#"{"format":"IQMJSON","shots":1,"circuit":{"name":"x","instructions":[{"gate":"h","qubits":["QB1"]}]}}"#;
        let req = Request::SubmitCircuit { qc: "mock-5q".into(), body: unknown_gate.to_vec() };
        assert_eq!(svc.handle(req, AUTH).status, 400);
    }

    #[test]
    fn fail_at_validation_path() {
        let mut config = MockConfig::default();
        config.fail_at_validation = true;
        config.stage_duration_ms = 1;
        let (svc, clock) = service(config);
        let qir = serde_json::to_vec(&serde_json::json!({"format": "QIRBASESTRING", "program": "x", "shots": 1})).unwrap();
        let id = job_id(&svc.handle(Request::SubmitCircuit { qc: "mock-5q".into(), body: qir }, AUTH));
        let mut seen = Vec::new();
        for _ in 0..6 {
            let s = json(&svc.handle(Request::JobStatus { job: id.clone() }, AUTH));
            seen.push(s["native_state"].as_str().unwrap().to_string());
            clock.advance(Duration::from_millis(1));
        }
        assert_eq!(seen, ["received", "queued", "validation_started", "failed", "failed", "failed"]);
        let s = json(&svc.handle(Request::JobStatus { job: id }, AUTH));
        assert!(s["error_message"].as_str().unwrap().contains("QIRBASESTRING"));
    }

    #[test]
    fn mapping_is_applied_before_validation() {
        let (svc, _) = service(MockConfig::default());
        let c = Circuit::new("x").prx("q0", PI, 0.0).measure("q0", "m0");
        let body = serde_json::to_vec(&serde_json::json!({
            "format": "IQMJSON", "circuit": c, "shots": 4, "heralding_mode": "zeros",
            "qubit_mapping": [{"logical": "q0", "physical": "QB3"}]
        }))
        .unwrap();
        let reply = svc.handle(Request::SubmitCircuit { qc: "mock-5q".into(), body }, AUTH);
        assert_eq!(reply.status, 201);
        let counts = json(&svc.handle(Request::JobCounts { job: job_id(&reply) }, AUTH));
        assert_eq!(counts["counts"]["1"], 4);
    }

    #[test]
    fn calibration_job_materializes_a_new_set() {
        let (svc, _) = service(MockConfig::default());
        let before = svc.active_calibration_set("mock-5q").unwrap();
        let reply = svc.handle(Request::SubmitCalibration { qc: "mock-5q".into() }, AUTH);
        assert_eq!(reply.status, 201);
        let id = job_id(&reply);
        let status: JobStatusBody =
            serde_json::from_slice(&svc.handle(Request::CalibrationStatus { job: id }, AUTH).body).unwrap();
        assert_eq!(status.native_state, "ready");
        let after = status.result_calibration_set_id.unwrap();
        assert_ne!(after, before);
        assert_eq!(svc.active_calibration_set("mock-5q").unwrap(), after);
        for set in [&before, &after] {
            let r = Request::DynamicArchitecture { qc: "mock-5q".into(), calibration_set: set.clone() };
            assert_eq!(svc.handle(r, AUTH).status, 200);
        }
        let old: CalibrationMetrics = serde_json::from_slice(
            &svc.handle(Request::CalibrationMetrics { calibration_set: before }, AUTH).body,
        )
        .unwrap();
        let new: CalibrationMetrics =
            serde_json::from_slice(&svc.handle(Request::CalibrationMetrics { calibration_set: after }, AUTH).body)
                .unwrap();
        for (o, n) in old.qubits.iter().zip(&new.qubits) {
            let ratio = n.t1 / o.t1;
            assert!((0.95..=1.05).contains(&ratio));
            assert!(n.t2 <= 2.0 * n.t1);
        }
        assert!(new.operations.iter().all(|o| o.fidelity <= 1.0));
        let r = svc.handle(Request::SubmitCalibration { qc: "mock-6q".into() }, AUTH);
        assert_eq!(r.status, 422);
    }

    #[test]
    fn aborted_calibration_creates_no_set() {
        let mut config = MockConfig::default();
        config.stage_duration_ms = 10;
        let (svc, clock) = service(config);
        let sets = svc.calibration_set_count();
        let id = job_id(&svc.handle(Request::SubmitCalibration { qc: "mock-5q".into() }, AUTH));
        assert_eq!(svc.handle(Request::CalibrationAbort { job: id.clone() }, AUTH).status, 200);
        clock.advance(Duration::from_secs(1));
        let s = json(&svc.handle(Request::CalibrationStatus { job: id }, AUTH));
        assert_eq!(s["native_state"], "aborted");
        assert_eq!(svc.calibration_set_count(), sets);
    }

    #[test]
    fn counters_and_faults() {
        let (svc, _) = service(MockConfig::default());
        svc.inject_failures("discovery", 2);
        assert_eq!(svc.handle(Request::Discovery, AUTH).status, 503);
        assert_eq!(svc.handle(Request::Discovery, AUTH).status, 503);
        assert_eq!(svc.handle(Request::Discovery, AUTH).status, 200);
        svc.handle(Request::CalibrationSupport { qc: "mock-5q".into() }, AUTH);
        let log = svc.request_log();
        assert_eq!(log.counts["discovery"], 3);
        assert_eq!(log.total, 4);
        assert_eq!(log.log.last().unwrap(), "calibration_support");
    }

    #[test]
    fn service_is_byte_deterministic() {
        let run = || {
            let (svc, _) = service(MockConfig::for_tests(9));
            let c = Circuit::new("x").prx("QB1", 1.1, 0.2).prx("QB3", 0.4, 0.0).cz("QB1", "QB3").measure("QB1", "a").measure("QB3", "b");
            let id = job_id(&submit(&svc, "mock-5q", &c, 200));
            let cal = job_id(&svc.handle(Request::SubmitCalibration { qc: "mock-5q".into() }, AUTH));
            let set = svc.active_calibration_set("mock-5q").unwrap();
            vec![
                svc.handle(Request::Discovery, AUTH),
                svc.handle(Request::JobMeasurements { job: id.clone() }, AUTH),
                svc.handle(Request::JobCounts { job: id }, AUTH),
                svc.handle(Request::CalibrationStatus { job: cal }, AUTH),
                svc.handle(Request::CalibrationMetrics { calibration_set: set }, AUTH),
            ]
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn every_emitted_state_maps() {
        let mut config = MockConfig::default();
        config.stage_duration_ms = 1;
        let (svc, clock) = service(config);
        let id = job_id(&submit(&svc, "mock-5q", &Circuit::new("x").measure("QB1", "m"), 1));
        for _ in 0..16 {
            let s = json(&svc.handle(Request::JobStatus { job: id.clone() }, AUTH));
            assert!(map_native_status(s["native_state"].as_str().unwrap()).is_ok());
            clock.advance(Duration::from_millis(1));
        }
    }
}
