use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use qdmi_core::keys::{parse_qubit_mapping, validate_heralding};
use qdmi_core::value::sized_read;
use qdmi_core::{
    map_native_status, Circuit, DeviceJob, HeraldingMode, Histogram, JobParameterKey, JobResultKey, JobStatus,
    ProgramFormat, PropertyValue, Status, StatusCode,
};

use super::routes::RouteOp;
use super::session::Shared;
use super::PluginConfig;
use crate::wire::{CircuitJobRequest, Counts, JobCreated, JobStatusBody, Measurements};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JobKind {
    Circuit,
    Calibration,
}

#[derive(Clone, Debug, Default)]
struct ResultCache {
    shots: Option<Vec<String>>,
    hist: Option<Histogram>,
    calibration_set: Option<String>,
}

/// A job handle bound to the session that created it.
#[derive(Debug)]
pub struct Job {
    shared: Arc<Mutex<Shared>>,
    config: Arc<PluginConfig>,
    parameters: BTreeMap<JobParameterKey, String>,
    kind: JobKind,
    remote_id: Option<String>,
    status: Option<JobStatus>,
    error_message: Option<String>,
    results: ResultCache,
    freed: bool,
}

impl Job {
    pub(crate) fn new(shared: Arc<Mutex<Shared>>, config: Arc<PluginConfig>) -> Self {
        Self {
            shared,
            config,
            parameters: BTreeMap::new(),
            kind: JobKind::Circuit,
            remote_id: None,
            status: None,
            error_message: None,
            results: ResultCache::default(),
            freed: false,
        }
    }

    pub(crate) fn attached(shared: Arc<Mutex<Shared>>, config: Arc<PluginConfig>, remote_id: &str, kind: JobKind) -> Self {
        let mut job = Self::new(shared, config);
        job.kind = kind;
        job.remote_id = Some(remote_id.to_string());
        job.status = Some(JobStatus::Submitted);
        job
    }

    pub fn remote_id(&self) -> Option<&str> {
        self.remote_id.as_deref()
    }

    pub fn kind(&self) -> JobKind {
        self.kind
    }

    /// Last known status; `None` before submission.
    pub fn status(&self) -> Option<JobStatus> {
        self.status
    }

    /// Backend error message of a failed job.
    pub fn error_message(&self) -> Option<&str> {
        self.error_message.as_deref()
    }

    /// Releases the handle. Idempotent.
    pub fn free(&mut self) {
        self.freed = true;
        self.results = ResultCache::default();
    }

    /// Locks the owning session, failing once either side has been freed.
    fn session(&self) -> Status<MutexGuard<'_, Shared>> {
        if self.freed {
            return Err(StatusCode::InvalidArgument);
        }
        let shared = self.shared.lock().unwrap();
        shared.transport()?;
        Ok(shared)
    }

    fn submitted(&self) -> Status<&str> {
        self.remote_id.as_deref().ok_or(StatusCode::InvalidArgument)
    }

    fn format(&self) -> Status<ProgramFormat> {
        self.parameters
            .get(&JobParameterKey::ProgramFormat)
            .ok_or(StatusCode::InvalidArgument)?
            .parse()
    }

    fn circuit_request(&self, format: ProgramFormat) -> Status<CircuitJobRequest> {
        let program = self.parameters.get(&JobParameterKey::Program).ok_or(StatusCode::InvalidArgument)?;
        let shots: u64 = self
            .parameters
            .get(&JobParameterKey::ShotsNum)
            .ok_or(StatusCode::InvalidArgument)?
            .parse()
            .map_err(|_| StatusCode::InvalidArgument)?;
        let heralding_mode = match self.parameters.get(&JobParameterKey::Custom1) {
            Some(text) => validate_heralding(text)?,
            None => HeraldingMode::None,
        };
        let qubit_mapping = self
            .parameters
            .get(&JobParameterKey::Custom5)
            .map(|text| parse_qubit_mapping(text))
            .transpose()?;
        let (circuit, program) = match format {
            ProgramFormat::IqmJson => {
                let circuit: Circuit = serde_json::from_str(program).map_err(|_| StatusCode::InvalidArgument)?;
                (Some(circuit), None)
            }
            _ => (None, Some(program.clone())),
        };
        Ok(CircuitJobRequest {
            format: format.wire_name().to_string(),
            circuit,
            program,
            shots,
            heralding_mode,
            qubit_mapping,
        })
    }

    fn status_route(&self) -> RouteOp {
        match self.kind {
            JobKind::Circuit => RouteOp::JobStatus,
            JobKind::Calibration => RouteOp::CalibrationStatus,
        }
    }

    fn fetch_status(&self, shared: &Shared) -> Status<JobStatusBody> {
        let id = self.submitted()?;
        shared
            .transport()?
            .request(self.status_route(), &[("job", id)], None)
            .map_err(|e| match e.status_code() {
                StatusCode::PermissionDenied | StatusCode::NotFound => e.status_code(),
                _ => StatusCode::Fatal,
            })
    }

    fn result_value(&mut self, key: JobResultKey) -> Status<PropertyValue> {
        if self.status != Some(JobStatus::Done) {
            return Err(StatusCode::InvalidArgument);
        }
        match (self.kind, key) {
            (JobKind::Calibration, JobResultKey::Custom1) => self.calibration_result().map(PropertyValue::Text),
            (JobKind::Circuit, JobResultKey::Shots) => Ok(PropertyValue::TextList(self.shots()?.clone())),
            (JobKind::Circuit, JobResultKey::HistKeys) => Ok(PropertyValue::Text(self.histogram()?.encode().0)),
            (JobKind::Circuit, JobResultKey::HistValues) => Ok(PropertyValue::Text(self.histogram()?.encode().1)),
            _ => Err(StatusCode::InvalidArgument),
        }
    }

    fn shots(&mut self) -> Status<&Vec<String>> {
        if self.results.shots.is_none() {
            let shared = self.session()?;
            let id = self.submitted()?;
            let m: Measurements = shared
                .transport()?
                .request(RouteOp::JobMeasurements, &[("job", id)], None)
                .map_err(|e| e.status_code())?;
            let shots = m.bitstrings();
            drop(shared);
            self.results.shots = Some(shots);
        }
        Ok(self.results.shots.as_ref().unwrap())
    }

    /// Derived locally from cached shots when present, otherwise fetched.
    fn histogram(&mut self) -> Status<&Histogram> {
        if self.results.hist.is_none() {
            let hist = match &self.results.shots {
                Some(shots) if !shots.is_empty() => Histogram::from_shots(shots),
                _ => {
                    let shared = self.session()?;
                    let id = self.submitted()?;
                    let counts: Counts = shared
                        .transport()?
                        .request(RouteOp::JobCounts, &[("job", id)], None)
                        .map_err(|e| e.status_code())?;
                    counts.counts.into_iter().collect()
                }
            };
            self.results.hist = Some(hist);
        }
        Ok(self.results.hist.as_ref().unwrap())
    }

    /// Rereads the job status for the new set id and refreshes the session
    /// to it, retrying the refresh once after the configured delay.
    fn calibration_result(&mut self) -> Status<String> {
        if let Some(set) = &self.results.calibration_set {
            return Ok(set.clone());
        }
        let mut shared = self.session()?;
        let body = self.fetch_status(&shared)?;
        let set = body.result_calibration_set_id.ok_or(StatusCode::Protocol)?;
        if shared.refresh(&set).is_err() {
            self.config.clock.sleep(self.config.refresh_retry_delay);
            shared.refresh(&set).map_err(|_| StatusCode::Fatal)?;
        }
        drop(shared);
        self.results.calibration_set = Some(set.clone());
        Ok(set)
    }
}

impl DeviceJob for Job {
    fn set_parameter(&mut self, key: JobParameterKey, value: &str) -> Status<()> {
        let shared = self.session()?;
        if self.remote_id.is_some() {
            return Err(StatusCode::InvalidArgument);
        }
        match key {
            JobParameterKey::ProgramFormat => {
                let format: ProgramFormat = value.parse()?;
                if format == ProgramFormat::Calibration && !shared.calibration_supported {
                    return Err(StatusCode::NotSupported);
                }
            }
            JobParameterKey::ShotsNum => {
                if !value.parse::<u64>().is_ok_and(|n| n > 0) {
                    return Err(StatusCode::InvalidArgument);
                }
            }
            JobParameterKey::Custom1 => {
                validate_heralding(value)?;
            }
            JobParameterKey::Custom5 => {
                parse_qubit_mapping(value)?;
            }
            JobParameterKey::Program => {}
        }
        drop(shared);
        self.parameters.insert(key, value.to_string());
        Ok(())
    }

    fn submit(&mut self) -> Status<()> {
        let shared = self.session()?;
        if self.remote_id.is_some() {
            return Err(StatusCode::InvalidArgument);
        }
        let format = self.format()?;
        let qc = shared.backend.as_ref().ok_or(StatusCode::InvalidArgument)?.id.clone();
        let transport = shared.transport()?;
        let (kind, created): (JobKind, JobCreated) = if format == ProgramFormat::Calibration {
            if !shared.calibration_supported {
                return Err(StatusCode::NotSupported);
            }
            let created = transport
                .request(RouteOp::SubmitCalibration, &[("qc", &qc)], None)
                .map_err(|e| e.status_code())?;
            (JobKind::Calibration, created)
        } else {
            let body = serde_json::to_vec(&self.circuit_request(format)?).map_err(|_| StatusCode::Fatal)?;
            let created = transport
                .request(RouteOp::SubmitCircuit, &[("qc", &qc)], Some(&body))
                .map_err(|e| e.status_code())?;
            (JobKind::Circuit, created)
        };
        drop(shared);
        self.kind = kind;
        self.remote_id = Some(created.id);
        self.status = Some(JobStatus::Submitted);
        Ok(())
    }

    fn check(&mut self) -> Status<JobStatus> {
        let shared = self.session()?;
        let current = self.status.ok_or(StatusCode::InvalidArgument)?;
        if current.is_terminal() {
            return Ok(current);
        }
        let body = self.fetch_status(&shared)?;
        drop(shared);
        let mapped = map_native_status(&body.native_state)?;
        let next = current.max(mapped);
        if next == JobStatus::Failed {
            self.error_message = body.error_message;
        }
        self.status = Some(next);
        Ok(next)
    }

    fn wait(&mut self, timeout: Duration) -> Status<JobStatus> {
        let clock = self.config.clock.clone();
        let start = clock.now();
        for attempt in 0.. {
            let status = self.check()?;
            if status.is_terminal() {
                return Ok(status);
            }
            if clock.now().saturating_sub(start) >= timeout {
                return Err(StatusCode::Timeout);
            }
            clock.sleep(self.config.backoff.delay(attempt));
        }
        unreachable!("polling loop only exits by returning")
    }

    fn cancel(&mut self) -> Status<()> {
        let shared = self.session()?;
        let id = self.submitted()?;
        if self.status.is_some_and(JobStatus::is_terminal) {
            return Err(StatusCode::InvalidArgument);
        }
        let route = match self.kind {
            JobKind::Circuit => RouteOp::JobCancel,
            JobKind::Calibration => RouteOp::CalibrationAbort,
        };
        shared
            .transport()?
            .request::<JobStatusBody>(route, &[("job", id)], None)
            .map_err(|e| e.status_code())?;
        drop(shared);
        self.status = Some(JobStatus::Canceled);
        Ok(())
    }

    fn get_results(&mut self, key: JobResultKey, capacity: usize, destination: Option<&mut [u8]>) -> Status<usize> {
        drop(self.session()?);
        let value = self.result_value(key)?;
        sized_read(&value, capacity, destination)
    }
}
