//! In-process device that simulates circuits directly, without a service.

use std::cell::Cell;
use std::rc::Rc;
use std::time::Duration;

use qdmi_core::value::sized_read;
use qdmi_core::{
    sim, Circuit, DeviceJob, DeviceProperty, DeviceSession, Histogram, JobParameterKey, JobResultKey, JobStatus,
    OperationProperty, PropertyValue, SiteProperty, Status, StatusCode,
};

/// Five qubits in a star around QB3, all gates calibrated.
pub struct FakeDevice {
    pub seed: u64,
    pub submissions: Rc<Cell<u64>>,
}

impl FakeDevice {
    pub fn new(seed: u64) -> Self {
        Self { seed, submissions: Rc::new(Cell::new(0)) }
    }

    fn qubits() -> Vec<String> {
        (1..=5).map(|i| format!("QB{i}")).collect()
    }

    fn edges() -> Vec<(usize, usize)> {
        vec![(0, 2), (1, 2), (3, 2), (4, 2)]
    }

    fn loci(op: &str) -> Vec<String> {
        match op {
            "cz" => Self::edges().iter().map(|(a, b)| format!("QB{}-QB{}", a + 1, b + 1)).collect(),
            _ => Self::qubits(),
        }
    }
}

impl DeviceSession for FakeDevice {
    type Job = FakeJob;

    fn query_device_property(&self, key: DeviceProperty, capacity: usize, dest: Option<&mut [u8]>) -> Status<usize> {
        let value = match key {
            DeviceProperty::Name => PropertyValue::text("fake-5q"),
            DeviceProperty::Version => PropertyValue::text("0"),
            DeviceProperty::QubitCount => PropertyValue::Integer(5),
            DeviceProperty::Sites => PropertyValue::text_list(Self::qubits()),
            DeviceProperty::CouplingMap => PropertyValue::PairList(Self::edges()),
            DeviceProperty::Operations => PropertyValue::text_list(["prx", "cz", "measure"]),
            DeviceProperty::Status => PropertyValue::text("online"),
            DeviceProperty::Custom1 => PropertyValue::text("fake-calibration"),
        };
        sized_read(&value, capacity, dest)
    }

    fn query_site_property(&self, site: &str, key: SiteProperty, capacity: usize, dest: Option<&mut [u8]>) -> Status<usize> {
        let index = Self::qubits().iter().position(|q| q == site).ok_or(StatusCode::NotFound)?;
        let value = match key {
            SiteProperty::Name => PropertyValue::text(site),
            SiteProperty::Index => PropertyValue::Integer(index as i64),
            SiteProperty::T1 => PropertyValue::Real(50e-6),
            SiteProperty::T2 => PropertyValue::Real(40e-6),
        };
        sized_read(&value, capacity, dest)
    }

    fn query_operation_property(
        &self,
        operation: &str,
        sites: &[&str],
        key: OperationProperty,
        capacity: usize,
        dest: Option<&mut [u8]>,
    ) -> Status<usize> {
        if !["prx", "cz", "measure"].contains(&operation) {
            return Err(StatusCode::NotFound);
        }
        let loci = Self::loci(operation);
        let value = match key {
            OperationProperty::Name => PropertyValue::text(operation),
            OperationProperty::SitesSupported => PropertyValue::text_list(loci),
            OperationProperty::Fidelity | OperationProperty::Duration => {
                let joined = sites.join("-");
                let reversed = sites.iter().rev().cloned().collect::<Vec<_>>().join("-");
                if !loci.contains(&joined) && !loci.contains(&reversed) {
                    return Err(StatusCode::NotFound);
                }
                PropertyValue::Real(if key == OperationProperty::Fidelity { 0.99 } else { 40e-9 })
            }
        };
        sized_read(&value, capacity, dest)
    }

    fn create_job(&self) -> Status<FakeJob> {
        let n = self.submissions.get();
        Ok(FakeJob {
            seed: qdmi_core::rng::derive_seed(self.seed, n),
            counter: self.submissions.clone(),
            program: None,
            shots: None,
            status: None,
            record: None,
        })
    }
}

pub struct FakeJob {
    seed: u64,
    counter: Rc<Cell<u64>>,
    program: Option<String>,
    shots: Option<usize>,
    status: Option<JobStatus>,
    record: Option<Vec<String>>,
}

impl DeviceJob for FakeJob {
    fn set_parameter(&mut self, key: JobParameterKey, value: &str) -> Status<()> {
        match key {
            JobParameterKey::Program => self.program = Some(value.to_string()),
            JobParameterKey::ShotsNum => self.shots = Some(value.parse().map_err(|_| StatusCode::InvalidArgument)?),
            JobParameterKey::ProgramFormat if value != "IQMJSON" => return Err(StatusCode::NotSupported),
            _ => {}
        }
        Ok(())
    }

    fn submit(&mut self) -> Status<()> {
        let program = self.program.as_ref().ok_or(StatusCode::InvalidArgument)?;
        let circuit: Circuit = serde_json::from_str(program).map_err(|_| StatusCode::InvalidArgument)?;
        let shots = self.shots.ok_or(StatusCode::InvalidArgument)?;
        let names = FakeDevice::qubits();
        let edges: Vec<(String, String)> = FakeDevice::edges().into_iter().map(|(a, b)| (names[a].clone(), names[b].clone())).collect();
        circuit.validate(&names, &edges).map_err(|_| StatusCode::InvalidArgument)?;
        let record = sim::simulate(&circuit, self.seed, shots).map_err(|_| StatusCode::InvalidArgument)?;
        self.record = Some(record.bitstrings());
        self.counter.set(self.counter.get() + 1);
        self.status = Some(JobStatus::Done);
        Ok(())
    }

    fn check(&mut self) -> Status<JobStatus> {
        self.status.ok_or(StatusCode::InvalidArgument)
    }

    fn wait(&mut self, _timeout: Duration) -> Status<JobStatus> {
        self.check()
    }

    fn cancel(&mut self) -> Status<()> {
        Err(StatusCode::InvalidArgument)
    }

    fn get_results(&mut self, key: JobResultKey, capacity: usize, dest: Option<&mut [u8]>) -> Status<usize> {
        let shots = self.record.as_ref().ok_or(StatusCode::InvalidArgument)?;
        let hist = Histogram::from_shots(shots);
        let value = match key {
            JobResultKey::Shots => PropertyValue::text_list(shots.iter().cloned()),
            JobResultKey::HistKeys => PropertyValue::Text(hist.encode().0),
            JobResultKey::HistValues => PropertyValue::Text(hist.encode().1),
            JobResultKey::Custom1 => return Err(StatusCode::InvalidArgument),
        };
        sized_read(&value, capacity, dest)
    }
}
