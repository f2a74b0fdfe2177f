//! Frontend facade over any [`DeviceSession`]: an execution target built from
//! property queries, a sampler returning histograms and an estimator for
//! diagonal observables.

use std::collections::BTreeMap;
use std::time::Duration;

use qdmi_core::qsci::{estimate_from_shots, DiagonalObservable, Estimate};
use qdmi_core::value::{decode_pair_list, decode_text_list};
use qdmi_core::{
    read_to_string, Circuit, DeviceJob, DeviceProperty, DeviceSession, HeraldingMode, Histogram, JobParameterKey,
    JobResultKey, JobStatus, OperationProperty, QubitMapping, Status, StatusCode,
};

/// Calibration data of one operation on one locus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperationQuality {
    pub fidelity: f64,
    pub duration_seconds: f64,
}

/// What a compiler needs to know about the device, read through the query
/// layer only.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionTarget {
    pub name: String,
    pub availability: String,
    pub qubit_names: Vec<String>,
    pub connectivity: Vec<(String, String)>,
    pub operations: BTreeMap<(String, Vec<String>), OperationQuality>,
    pub calibration_set_id: String,
}

impl ExecutionTarget {
    pub fn quality(&self, operation: &str, sites: &[&str]) -> Option<OperationQuality> {
        let key = |s: &[&str]| (operation.to_string(), s.iter().map(|q| q.to_string()).collect::<Vec<_>>());
        let reversed: Vec<&str> = sites.iter().rev().copied().collect();
        self.operations
            .get(&key(sites))
            .or_else(|| self.operations.get(&key(&reversed)))
            .copied()
    }

    /// Checks that `circuit` only uses target qubits and coupled pairs.
    pub fn admits(&self, circuit: &Circuit) -> bool {
        circuit.validate(&self.qubit_names, &self.connectivity).is_ok()
    }
}

fn device_text<S: DeviceSession>(session: &S, key: DeviceProperty) -> Status<String> {
    read_to_string(|cap, buf| session.query_device_property(key, cap, buf))
}

fn operation_text<S: DeviceSession>(session: &S, op: &str, sites: &[&str], key: OperationProperty) -> Status<String> {
    read_to_string(|cap, buf| session.query_operation_property(op, sites, key, cap, buf))
}

fn real(text: String) -> Status<f64> {
    text.parse().map_err(|_| StatusCode::Protocol)
}

pub fn build_target<S: DeviceSession>(session: &S) -> Status<ExecutionTarget> {
    let qubit_names = decode_text_list(&device_text(session, DeviceProperty::Sites)?);
    let name_of = |i: usize| qubit_names.get(i).cloned().ok_or(StatusCode::Protocol);
    let connectivity = decode_pair_list(&device_text(session, DeviceProperty::CouplingMap)?)?
        .into_iter()
        .map(|(a, b)| Ok((name_of(a)?, name_of(b)?)))
        .collect::<Status<Vec<_>>>()?;

    let mut operations = BTreeMap::new();
    for op in decode_text_list(&device_text(session, DeviceProperty::Operations)?) {
        let loci = decode_text_list(&operation_text(session, &op, &[], OperationProperty::SitesSupported)?);
        for locus in loci {
            let sites: Vec<&str> = locus.split('-').collect();
            let quality = OperationQuality {
                fidelity: real(operation_text(session, &op, &sites, OperationProperty::Fidelity)?)?,
                duration_seconds: real(operation_text(session, &op, &sites, OperationProperty::Duration)?)?,
            };
            operations.insert((op.clone(), sites.iter().map(|s| s.to_string()).collect()), quality);
        }
    }
    Ok(ExecutionTarget {
        name: device_text(session, DeviceProperty::Name)?,
        availability: device_text(session, DeviceProperty::Status)?,
        qubit_names,
        connectivity,
        operations,
        calibration_set_id: device_text(session, DeviceProperty::Custom1)?,
    })
}

/// Execution options shared by every circuit of a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub heralding: HeraldingMode,
    pub qubit_mapping: Option<QubitMapping>,
    pub timeout: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            heralding: HeraldingMode::None,
            qubit_mapping: None,
            timeout: Duration::from_secs(600),
        }
    }
}

/// A batch stopped at circuit `index`; `completed` holds the earlier results.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("circuit {index} failed with {status}")]
pub struct BatchError {
    pub index: usize,
    pub status: StatusCode,
    pub completed: Vec<Histogram>,
}

fn run_job<S: DeviceSession>(session: &S, circuit: &Circuit, shots: u64, options: &RunOptions) -> Status<S::Job> {
    let program = serde_json::to_string(circuit).map_err(|_| StatusCode::InvalidArgument)?;
    let mut job = session.create_job()?;
    job.set_parameter(JobParameterKey::ProgramFormat, "IQMJSON")?;
    job.set_parameter(JobParameterKey::Program, &program)?;
    job.set_parameter(JobParameterKey::ShotsNum, &shots.to_string())?;
    job.set_parameter(JobParameterKey::Custom1, options.heralding.name())?;
    if let Some(mapping) = &options.qubit_mapping {
        job.set_parameter(JobParameterKey::Custom5, &mapping.to_string())?;
    }
    job.submit()?;
    match job.wait(options.timeout)? {
        JobStatus::Done => Ok(job),
        _ => Err(StatusCode::Fatal),
    }
}

fn job_text<J: DeviceJob>(job: &mut J, key: JobResultKey) -> Status<String> {
    read_to_string(|cap, buf| job.get_results(key, cap, buf))
}

/// Runs each circuit as one job and returns its histogram.
pub fn run_sampler<S: DeviceSession>(
    session: &S,
    circuits: &[Circuit],
    shots: u64,
    options: &RunOptions,
) -> Result<Vec<Histogram>, BatchError> {
    let mut completed = Vec::with_capacity(circuits.len());
    for (index, circuit) in circuits.iter().enumerate() {
        let result = run_job(session, circuit, shots, options).and_then(|mut job| {
            let keys = job_text(&mut job, JobResultKey::HistKeys)?;
            let values = job_text(&mut job, JobResultKey::HistValues)?;
            Histogram::decode(&keys, &values)
        });
        match result {
            Ok(hist) => completed.push(hist),
            Err(status) => return Err(BatchError { index, status, completed }),
        }
    }
    Ok(completed)
}

/// Shot-level estimate of a diagonal observable over the circuit's measure
/// keys.
pub fn run_estimator<S: DeviceSession>(
    session: &S,
    circuit: &Circuit,
    observable: &DiagonalObservable,
    shots: u64,
    options: &RunOptions,
) -> Status<Estimate> {
    let keys = circuit.measure_keys();
    let measured = observable
        .terms()
        .iter()
        .all(|(_, support)| support.iter().all(|k| keys.contains(&k.as_str())));
    if !measured {
        return Err(StatusCode::InvalidArgument);
    }
    let mut job = run_job(session, circuit, shots, options)?;
    let shots = decode_text_list(&job_text(&mut job, JobResultKey::Shots)?);
    estimate_from_shots(&shots, observable, &keys)
}

pub use qdmi_core::qsci::expectation_from_counts;
