use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use qdmi_core::value::sized_read;
use qdmi_core::{
    DeviceProperty, DeviceSession, OperationProperty, PropertyValue, SessionParameterKey, SiteProperty, Status,
    StatusCode,
};

use super::env;
use super::job::{Job, JobKind};
use super::routes::RouteOp;
use super::token::{resolve_token, TokenOrigin};
use super::transport::{Transport, TransportError};
use super::PluginConfig;
use crate::wire::{
    same_locus, BackendSummary, CalibrationMetrics, CalibrationSupport, Discovery, DynamicArchitecture,
    StaticArchitecture,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionState {
    Configured,
    Initialized,
    Finalized,
}

/// Metadata loaded during initialization. Replaced as a whole on refresh.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Caches {
    pub static_arch: StaticArchitecture,
    pub dynamic: DynamicArchitecture,
    pub metrics: CalibrationMetrics,
}

#[derive(Debug)]
pub(crate) struct Shared {
    pub state: SessionState,
    pub parameters: BTreeMap<SessionParameterKey, String>,
    pub backend: Option<BackendSummary>,
    pub discovered: Vec<BackendSummary>,
    pub caches: Option<Arc<Caches>>,
    pub calibration_supported: bool,
    pub transport: Option<Transport>,
    pub token_origin: Option<TokenOrigin>,
}

impl Shared {
    pub fn transport(&self) -> Status<&Transport> {
        if self.state != SessionState::Initialized {
            return Err(StatusCode::InvalidArgument);
        }
        self.transport.as_ref().ok_or(StatusCode::InvalidArgument)
    }

    pub fn caches(&self) -> Status<Arc<Caches>> {
        if self.state != SessionState::Initialized {
            return Err(StatusCode::InvalidArgument);
        }
        self.caches.clone().ok_or(StatusCode::InvalidArgument)
    }

    /// Loads dynamic architecture and metrics for `set`, then swaps both in.
    /// On failure the previous caches stay in place.
    pub fn refresh(&mut self, set: &str) -> Status<()> {
        let caches = self.caches()?;
        let transport = self.transport()?;
        let qc = caches.static_arch.quantum_computer_id.as_str();
        let dynamic: DynamicArchitecture = transport
            .request(RouteOp::DynamicArch, &[("qc", qc), ("calset", set)], None)
            .map_err(|e| e.status_code())?;
        let metrics: CalibrationMetrics = transport
            .request(RouteOp::CalibrationMetrics, &[("calset", set)], None)
            .map_err(|e| e.status_code())?;
        if dynamic.calibration_set_id != set || metrics.calibration_set_id != set {
            return Err(StatusCode::Protocol);
        }
        self.caches = Some(Arc::new(Caches {
            static_arch: caches.static_arch.clone(),
            dynamic,
            metrics,
        }));
        Ok(())
    }
}

/// A session against one backend of the vendor service.
///
/// A session and the jobs created from it are meant for one owner at a time.
#[derive(Debug)]
pub struct Session {
    shared: Arc<Mutex<Shared>>,
    config: Arc<PluginConfig>,
}

fn fatal(e: TransportError) -> StatusCode {
    e.status_code()
}

impl Session {
    pub(crate) fn new(config: Arc<PluginConfig>) -> Self {
        Self {
            shared: Arc::new(Mutex::new(Shared {
                state: SessionState::Configured,
                parameters: BTreeMap::new(),
                backend: None,
                discovered: Vec::new(),
                caches: None,
                calibration_supported: false,
                transport: None,
                token_origin: None,
            })),
            config,
        }
    }

    fn lock(&self) -> MutexGuard<'_, Shared> {
        self.shared.lock().unwrap()
    }

    pub fn state(&self) -> SessionState {
        self.lock().state
    }

    pub fn set_parameter(&mut self, key: SessionParameterKey, value: &str) -> Status<()> {
        let mut shared = self.lock();
        if shared.state != SessionState::Configured {
            return Err(StatusCode::InvalidArgument);
        }
        if key == SessionParameterKey::BaseUrl && value.is_empty() {
            return Err(StatusCode::InvalidArgument);
        }
        shared.parameters.insert(key, value.to_string());
        Ok(())
    }

    /// Discovery, target resolution, static architecture, dynamic
    /// architecture of the default calibration set, calibration metrics and
    /// the calibration-support probe, in that order.
    pub fn init(&mut self) -> Status<()> {
        let mut shared = self.lock();
        if shared.state != SessionState::Configured {
            return Err(StatusCode::InvalidArgument);
        }
        let environment = &self.config.environment;
        let param_or_env = |key, var| {
            shared
                .parameters
                .get(&key)
                .cloned()
                .or_else(|| environment.get(var).map(str::to_string))
        };
        let base_url = param_or_env(SessionParameterKey::BaseUrl, env::BASE_URL).ok_or(StatusCode::InvalidArgument)?;
        let id = param_or_env(SessionParameterKey::Custom1, env::QC_ID);
        let alias = param_or_env(SessionParameterKey::Custom2, env::QC_ALIAS);
        let token = resolve_token(&shared.parameters, environment)?;
        let transport = Transport::new(&base_url, token.token(), self.config.routes.clone(), self.config.request_timeout);

        let discovery: Discovery = transport.request(RouteOp::Discovery, &[], None).map_err(fatal)?;
        let backend = select_backend(&discovery.quantum_computers, id.as_deref(), alias.as_deref())?;
        let qc = backend.id.as_str();
        let static_arch: StaticArchitecture =
            transport.request(RouteOp::StaticArch, &[("qc", qc)], None).map_err(fatal)?;
        let set = static_arch.default_calibration_set_id.as_str();
        let dynamic: DynamicArchitecture = transport
            .request(RouteOp::DynamicArch, &[("qc", qc), ("calset", set)], None)
            .map_err(fatal)?;
        let metrics: CalibrationMetrics =
            transport.request(RouteOp::CalibrationMetrics, &[("calset", set)], None).map_err(fatal)?;
        let support: CalibrationSupport =
            transport.request(RouteOp::CalibrationSupport, &[("qc", qc)], None).map_err(fatal)?;

        shared.backend = Some(backend);
        shared.discovered = discovery.quantum_computers;
        shared.caches = Some(Arc::new(Caches { static_arch, dynamic, metrics }));
        shared.calibration_supported = support.supported;
        shared.transport = Some(transport);
        shared.token_origin = Some(token.origin);
        shared.state = SessionState::Initialized;
        Ok(())
    }

    /// Points the caches at calibration set `id`.
    pub fn refresh_calibration(&self, id: &str) -> Status<()> {
        self.lock().refresh(id)
    }

    /// Re-opens a job that was submitted earlier, e.g. by another process.
    pub fn attach_job(&self, remote_id: &str, kind: JobKind) -> Status<Job> {
        self.lock().transport()?;
        Ok(Job::attached(self.shared.clone(), self.config.clone(), remote_id, kind))
    }

    /// Invalidates the session and every job created from it. Idempotent.
    pub fn free(&mut self) {
        let mut shared = self.lock();
        shared.state = SessionState::Finalized;
        shared.transport = None;
        shared.caches = None;
    }

    pub fn backend(&self) -> Option<BackendSummary> {
        self.lock().backend.clone()
    }

    /// All backends returned by discovery during initialization.
    pub fn discovered(&self) -> Vec<BackendSummary> {
        self.lock().discovered.clone()
    }

    pub fn calibration_supported(&self) -> bool {
        self.lock().calibration_supported
    }

    pub fn token_origin(&self) -> Option<TokenOrigin> {
        self.lock().token_origin
    }

    pub fn active_calibration_set(&self) -> Status<String> {
        Ok(self.lock().caches()?.dynamic.calibration_set_id.clone())
    }

    pub fn static_architecture(&self) -> Status<StaticArchitecture> {
        Ok(self.lock().caches()?.static_arch.clone())
    }

    pub fn dynamic_architecture(&self) -> Status<DynamicArchitecture> {
        Ok(self.lock().caches()?.dynamic.clone())
    }

    pub fn calibration_metrics(&self) -> Status<CalibrationMetrics> {
        Ok(self.lock().caches()?.metrics.clone())
    }

    fn device_value(&self, key: DeviceProperty) -> Status<PropertyValue> {
        let (caches, backend) = {
            let shared = self.lock();
            (shared.caches()?, shared.backend.clone().ok_or(StatusCode::InvalidArgument)?)
        };
        let arch = &caches.static_arch;
        Ok(match key {
            DeviceProperty::Name => PropertyValue::text(&arch.alias),
            DeviceProperty::Version => PropertyValue::text(&arch.version),
            DeviceProperty::QubitCount => PropertyValue::Integer(arch.qubits.len() as i64),
            DeviceProperty::Sites => PropertyValue::text_list(&arch.qubits),
            DeviceProperty::CouplingMap => {
                let index = |q: &str| arch.qubits.iter().position(|x| x == q);
                let pairs = arch
                    .connectivity
                    .iter()
                    .map(|(a, b)| Some((index(a)?, index(b)?)))
                    .collect::<Option<Vec<_>>>()
                    .ok_or(StatusCode::Protocol)?;
                PropertyValue::PairList(pairs)
            }
            DeviceProperty::Operations => PropertyValue::text_list(&arch.operations),
            DeviceProperty::Status => PropertyValue::text(backend.availability.name()),
            DeviceProperty::Custom1 => PropertyValue::text(&caches.dynamic.calibration_set_id),
        })
    }

    fn site_value(&self, site: &str, key: SiteProperty) -> Status<PropertyValue> {
        let caches = self.lock().caches()?;
        let index = caches
            .static_arch
            .qubits
            .iter()
            .position(|q| q == site)
            .ok_or(StatusCode::NotFound)?;
        let metrics = || caches.metrics.qubit(site).ok_or(StatusCode::NotFound);
        Ok(match key {
            SiteProperty::Name => PropertyValue::text(site),
            SiteProperty::Index => PropertyValue::Integer(index as i64),
            SiteProperty::T1 => PropertyValue::Real(metrics()?.t1),
            SiteProperty::T2 => PropertyValue::Real(metrics()?.t2),
        })
    }

    fn operation_value(&self, operation: &str, sites: &[&str], key: OperationProperty) -> Status<PropertyValue> {
        let caches = self.lock().caches()?;
        if !caches.static_arch.operations.iter().any(|o| o == operation) {
            return Err(StatusCode::NotFound);
        }
        let loci = caches.dynamic.operations.iter().filter(|l| l.name == operation);
        match key {
            OperationProperty::Name => Ok(PropertyValue::text(operation)),
            OperationProperty::SitesSupported => {
                Ok(PropertyValue::text_list(loci.map(|l| l.qubits.join("-"))))
            }
            OperationProperty::Fidelity | OperationProperty::Duration => {
                let mut loci = loci;
                if !loci.any(|l| same_locus(&l.qubits, sites)) {
                    return Err(StatusCode::NotFound);
                }
                let m = caches.metrics.operation(operation, sites).ok_or(StatusCode::NotFound)?;
                Ok(PropertyValue::Real(if key == OperationProperty::Fidelity {
                    m.fidelity
                } else {
                    m.duration
                }))
            }
        }
    }
}

fn select_backend(list: &[BackendSummary], id: Option<&str>, alias: Option<&str>) -> Status<BackendSummary> {
    let by_id = id.map(|id| list.iter().find(|b| b.id == id).ok_or(StatusCode::NotFound)).transpose()?;
    let by_alias = alias
        .map(|a| list.iter().find(|b| b.alias == a).ok_or(StatusCode::NotFound))
        .transpose()?;
    match (by_id, by_alias) {
        (Some(a), Some(b)) if a.id != b.id => Err(StatusCode::InvalidArgument),
        (Some(b), _) | (None, Some(b)) => Ok(b.clone()),
        (None, None) => list.first().cloned().ok_or(StatusCode::NotFound),
    }
}

impl DeviceSession for Session {
    type Job = Job;

    fn query_device_property(&self, key: DeviceProperty, capacity: usize, destination: Option<&mut [u8]>) -> Status<usize> {
        sized_read(&self.device_value(key)?, capacity, destination)
    }

    fn query_site_property(
        &self,
        site: &str,
        key: SiteProperty,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize> {
        sized_read(&self.site_value(site, key)?, capacity, destination)
    }

    fn query_operation_property(
        &self,
        operation: &str,
        sites: &[&str],
        key: OperationProperty,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize> {
        sized_read(&self.operation_value(operation, sites, key)?, capacity, destination)
    }

    fn create_job(&self) -> Status<Job> {
        self.lock().transport()?;
        Ok(Job::new(self.shared.clone(), self.config.clone()))
    }
}
