//! The `qdmi` command line.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use qdmi_core::qsci::{self, ToyHamiltonian};
use qdmi_core::value::decode_text_list;
use qdmi_core::{
    read_to_string, DeviceJob, DeviceProperty, DeviceSession, Histogram, JobParameterKey, JobResultKey,
    OperationProperty, ProgramFormat, SessionParameterKey, SiteProperty, StatusCode,
};
use serde_json::{json, Value};

use crate::adapter::RunOptions;
use crate::clock::SystemClock;
use crate::launcher::{self, LaunchError, LaunchRequest, Partition, SiteConfig};
use crate::mock::{MockConfig, MockServer};
use crate::plugin::{Device, Job, JobKind, Session};
use crate::workflow::{self, Endpoint, HandoffRequest, OffloadSettings, WorkflowConfig, WorkflowError};

#[derive(Debug, Parser)]
#[command(name = "qdmi", version, about = "Device-management interface client, mock service and launcher")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

/// Connection options. Each falls back to the matching `QDMI_*` variable.
#[derive(Clone, Debug, Default, Args)]
pub struct GlobalOptions {
    #[arg(long, global = true)]
    pub base_url: Option<String>,
    #[arg(long, global = true)]
    pub token: Option<String>,
    #[arg(long, global = true)]
    pub auth_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub qc_id: Option<String>,
    #[arg(long, global = true)]
    pub qc_alias: Option<String>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the mock vendor service until interrupted.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// List the backends the service offers.
    Devices,
    /// Device-level properties of the selected backend.
    Info,
    /// Properties of one qubit.
    SiteProps { site: String },
    /// Properties of one operation, for one locus or for all loci.
    OpProps {
        operation: String,
        /// Comma-separated locus, e.g. QB1,QB3.
        #[arg(long)]
        sites: Option<String>,
    },
    /// Submit a job and print its id.
    Submit {
        program: Option<PathBuf>,
        #[arg(long, default_value = "IQMJSON")]
        format: String,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value = "none")]
        heralding: String,
        /// logical:physical pairs, comma-separated.
        #[arg(long)]
        map: Option<String>,
    },
    /// Print the job's current status.
    Status(JobRef),
    /// Poll until the job finishes or the timeout passes.
    Wait {
        #[command(flatten)]
        job: JobRef,
        #[arg(long, default_value = "600s", value_parser = parse_duration)]
        timeout: Duration,
    },
    Cancel(JobRef),
    /// Print one result of a finished job.
    Results {
        #[command(flatten)]
        job: JobRef,
        /// SHOTS, HIST, HIST_KEYS, HIST_VALUES or CUSTOM1.
        #[arg(long, default_value = "HIST")]
        key: String,
    },
    /// Submit a calibration job. With --wait, print the new calibration set id.
    Calibrate {
        #[arg(long)]
        wait: bool,
        #[arg(long, default_value = "600s", value_parser = parse_duration)]
        timeout: Duration,
    },
    /// Run a command with the partition's endpoint and credentials injected.
    Launch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        partition: String,
        #[arg(long)]
        backend: Option<String>,
        #[arg(last = true, required = true)]
        command: Vec<String>,
    },
    /// Selected-configuration demo against an embedded mock service.
    DemoQsci(DemoArgs),
    /// Child side of an offloaded sampling stage.
    #[command(hide = true)]
    RunHandoff {
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        response: PathBuf,
    },
}

#[derive(Clone, Debug, Args)]
pub struct JobRef {
    pub id: String,
    /// The id names a calibration job.
    #[arg(long)]
    pub calibration: bool,
}

#[derive(Clone, Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub offload: bool,
    #[arg(long)]
    pub simulator: bool,
    #[arg(long, default_value_t = 4096)]
    pub shots: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// JSON file `{"n": .., "terms": [[coeff, "word"], ..]}`. Defaults to the
    /// 3-qubit transverse-field Ising model.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    #[arg(long, default_value_t = workflow::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value_t = workflow::DEFAULT_SWEEPS)]
    pub sweeps: usize,
    #[arg(long, default_value = "0ms", value_parser = parse_duration)]
    pub stage: Duration,
    /// Site configuration for --offload; one is generated when absent.
    #[arg(long)]
    pub site_config: Option<PathBuf>,
    #[arg(long, default_value = "quantum")]
    pub partition: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", .0.name())]
    Interface(StatusCode),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Launch(#[from] LaunchError),
    #[error("{0}")]
    Workflow(#[from] WorkflowError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<StatusCode> for CliError {
    fn from(code: StatusCode) -> Self {
        CliError::Interface(code)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Launch(e) => e.exit_code(),
            _ => 1,
        }
    }
}

/// Bare numbers are seconds; `ms` and `s` suffixes are accepted.
pub fn parse_duration(text: &str) -> Result<Duration, String> {
    let text = text.trim();
    let (number, scale) = if let Some(n) = text.strip_suffix("ms") {
        (n, 1e-3)
    } else if let Some(n) = text.strip_suffix('s') {
        (n, 1.0)
    } else {
        (text, 1.0)
    };
    let value: f64 = number.trim().parse().map_err(|_| format!("invalid duration {text:?}"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("invalid duration {text:?}"));
    }
    Ok(Duration::from_secs_f64(value * scale))
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Serve { config, port, host } => serve(config.as_deref(), &host, port, out),
        Command::Devices => devices(g, out),
        Command::Info => info(g, out),
        Command::SiteProps { site } => site_props(g, &site, out),
        Command::OpProps { operation, sites } => op_props(g, &operation, sites.as_deref(), out),
        Command::Submit { program, format, shots, heralding, map } => {
            submit(g, program.as_deref(), &format, shots, &heralding, map.as_deref(), out)
        }
        Command::Status(job) => {
            let session = open(g)?;
            let status = attach(&session, &job)?.check()?;
            print_status(g, &job.id, status.name(), out)
        }
        Command::Wait { job, timeout } => {
            let session = open(g)?;
            let status = attach(&session, &job)?.wait(timeout)?;
            print_status(g, &job.id, status.name(), out)
        }
        Command::Cancel(job) => {
            let session = open(g)?;
            attach(&session, &job)?.cancel()?;
            print_status(g, &job.id, "CANCELED", out)
        }
        Command::Results { job, key } => results(g, &job, &key, out),
        Command::Calibrate { wait, timeout } => calibrate(g, wait, timeout, out),
        Command::Launch { config, partition, backend, command } => {
            let site = launcher::load_site_config(&config)?;
            let request = LaunchRequest::from_process(&partition, command, backend);
            Ok(launcher::launch(&site, &request)?)
        }
        Command::DemoQsci(args) => demo_qsci(g, &args, out),
        Command::RunHandoff { request, response } => run_handoff(&request, &response),
    }
}

fn serve(config: Option<&Path>, host: &str, port: u16, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = match config {
        Some(path) => MockConfig::load(path).map_err(CliError::Usage)?,
        None => MockConfig::default(),
    };
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid address {host}:{port}")))?;
    let server = MockServer::bind(config, Arc::new(SystemClock::new()), addr)?;
    writeln!(out, "{}", server.base_url())?;
    out.flush()?;
    wait_for_interrupt()?;
    server.shutdown();
    Ok(0)
}

fn wait_for_interrupt() -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(async {
        #[cfg(unix)]
        {
            use tokio::signal::unix::{signal, SignalKind};
            let mut term = signal(SignalKind::terminate())?;
            tokio::select! {
                r = tokio::signal::ctrl_c() => r,
                _ = term.recv() => Ok(()),
            }
        }
        #[cfg(not(unix))]
        tokio::signal::ctrl_c().await
    })
}

/// Opens and initializes a session from the global options.
pub fn open(g: &GlobalOptions) -> Result<Session, StatusCode> {
    let device = Device::initialize();
    let mut session = device.session_alloc();
    let params = [
        (SessionParameterKey::BaseUrl, g.base_url.clone()),
        (SessionParameterKey::Token, g.token.clone()),
        (SessionParameterKey::AuthFile, g.auth_file.as_ref().map(|p| p.display().to_string())),
        (SessionParameterKey::Custom1, g.qc_id.clone()),
        (SessionParameterKey::Custom2, g.qc_alias.clone()),
    ];
    for (key, value) in params {
        if let Some(value) = value {
            session.set_parameter(key, &value)?;
        }
    }
    session.init()?;
    Ok(session)
}

fn attach(session: &Session, job: &JobRef) -> Result<Job, StatusCode> {
    let kind = if job.calibration { JobKind::Calibration } else { JobKind::Circuit };
    session.attach_job(&job.id, kind)
}

fn device_text(s: &Session, key: DeviceProperty) -> Result<String, StatusCode> {
    read_to_string(|cap, buf| s.query_device_property(key, cap, buf))
}

fn site_text(s: &Session, site: &str, key: SiteProperty) -> Result<String, StatusCode> {
    read_to_string(|cap, buf| s.query_site_property(site, key, cap, buf))
}

fn op_text(s: &Session, op: &str, sites: &[&str], key: OperationProperty) -> Result<String, StatusCode> {
    read_to_string(|cap, buf| s.query_operation_property(op, sites, key, cap, buf))
}

fn job_text(job: &mut Job, key: JobResultKey) -> Result<String, StatusCode> {
    read_to_string(|cap, buf| job.get_results(key, cap, buf))
}

fn emit_json(out: &mut dyn Write, value: &Value) -> Result<i32, CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("values serialize"))?;
    Ok(0)
}

fn devices(g: &GlobalOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut session = open(g)?;
    let list = session.discovered();
    session.free();
    if g.json {
        return emit_json(out, &serde_json::to_value(&list).expect("summaries serialize"));
    }
    for b in &list {
        writeln!(out, "{:<38} {:<14} {}", b.id, b.alias, b.availability.name())?;
    }
    Ok(0)
}

fn info(g: &GlobalOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut session = open(g)?;
    let backend = session.backend().ok_or(StatusCode::Fatal)?;
    let fields = [
        ("name", DeviceProperty::Name),
        ("version", DeviceProperty::Version),
        ("status", DeviceProperty::Status),
        ("qubit_count", DeviceProperty::QubitCount),
        ("sites", DeviceProperty::Sites),
        ("coupling_map", DeviceProperty::CouplingMap),
        ("operations", DeviceProperty::Operations),
        ("calibration_set", DeviceProperty::Custom1),
    ];
    let mut rows = vec![("id", backend.id.clone())];
    for (label, key) in fields {
        rows.push((label, device_text(&session, key)?));
    }
    session.free();
    if g.json {
        let map: serde_json::Map<String, Value> = rows.into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
        return emit_json(out, &Value::Object(map));
    }
    for (label, value) in rows {
        writeln!(out, "{label:<16} {value}")?;
    }
    Ok(0)
}

fn site_props(g: &GlobalOptions, site: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut session = open(g)?;
    let index = site_text(&session, site, SiteProperty::Index)?;
    let t1 = site_text(&session, site, SiteProperty::T1)?;
    let t2 = site_text(&session, site, SiteProperty::T2)?;
    session.free();
    if g.json {
        return emit_json(out, &json!({"site": site, "index": index, "t1": t1, "t2": t2}));
    }
    writeln!(out, "{:<6} {:<6} {:<24} T2", "SITE", "INDEX", "T1")?;
    writeln!(out, "{site:<6} {index:<6} {t1:<24} {t2}")?;
    Ok(0)
}

fn op_props(g: &GlobalOptions, op: &str, sites: Option<&str>, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut session = open(g)?;
    let loci: Vec<String> = match sites {
        Some(s) => vec![s.replace(',', "-")],
        None => decode_text_list(&op_text(&session, op, &[], OperationProperty::SitesSupported)?),
    };
    let mut rows = Vec::new();
    for locus in &loci {
        let parts: Vec<&str> = locus.split('-').collect();
        let fidelity = op_text(&session, op, &parts, OperationProperty::Fidelity)?;
        let duration = op_text(&session, op, &parts, OperationProperty::Duration)?;
        rows.push((locus.clone(), fidelity, duration));
    }
    session.free();
    if g.json {
        let items: Vec<Value> = rows
            .iter()
            .map(|(l, f, d)| json!({"operation": op, "sites": l, "fidelity": f, "duration": d}))
            .collect();
        return emit_json(out, &Value::Array(items));
    }
    writeln!(out, "{:<10} {:<10} {:<24} DURATION", "OPERATION", "SITES", "FIDELITY")?;
    for (l, f, d) in rows {
        writeln!(out, "{op:<10} {l:<10} {f:<24} {d}")?;
    }
    Ok(0)
}

fn submit(
    g: &GlobalOptions,
    program: Option<&Path>,
    format: &str,
    shots: u64,
    heralding: &str,
    map: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let format: ProgramFormat = format.parse()?;
    let session = open(g)?;
    let mut job = session.create_job()?;
    job.set_parameter(JobParameterKey::ProgramFormat, format.name())?;
    if format != ProgramFormat::Calibration {
        let path = program.ok_or_else(|| CliError::Usage("a program file is required".into()))?;
        let text = std::fs::read_to_string(path)?;
        job.set_parameter(JobParameterKey::Program, &text)?;
        job.set_parameter(JobParameterKey::ShotsNum, &shots.to_string())?;
        job.set_parameter(JobParameterKey::Custom1, heralding)?;
        if let Some(map) = map {
            job.set_parameter(JobParameterKey::Custom5, map)?;
        }
    }
    job.submit()?;
    writeln!(out, "{}", job.remote_id().ok_or(StatusCode::Fatal)?)?;
    Ok(0)
}

fn print_status(g: &GlobalOptions, id: &str, status: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    if g.json {
        return emit_json(out, &json!({"id": id, "status": status}));
    }
    writeln!(out, "{status}")?;
    Ok(0)
}

fn results(g: &GlobalOptions, job: &JobRef, key: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let session = open(g)?;
    let mut handle = attach(&session, job)?;
    handle.check()?;
    if key == "HIST" {
        let keys = job_text(&mut handle, JobResultKey::HistKeys)?;
        let values = job_text(&mut handle, JobResultKey::HistValues)?;
        let hist = Histogram::decode(&keys, &values)?;
        if g.json {
            let counts: serde_json::Map<String, Value> = hist.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            return emit_json(out, &json!({"id": job.id, "counts": counts}));
        }
        let width = hist.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (bits, count) in hist.iter() {
            writeln!(out, "{bits:<width$}  {count}")?;
        }
        return Ok(0);
    }
    let key: JobResultKey = key.parse()?;
    let text = job_text(&mut handle, key)?;
    if g.json {
        let value = match key {
            JobResultKey::Custom1 => Value::String(text),
            _ => json!(decode_text_list(&text)),
        };
        return emit_json(out, &json!({"id": job.id, "key": key.name(), "value": value}));
    }
    match key {
        JobResultKey::Custom1 => writeln!(out, "{text}")?,
        _ => {
            for item in decode_text_list(&text) {
                writeln!(out, "{item}")?;
            }
        }
    }
    Ok(0)
}

fn calibrate(g: &GlobalOptions, wait: bool, timeout: Duration, out: &mut dyn Write) -> Result<i32, CliError> {
    let session = open(g)?;
    let mut job = session.create_job()?;
    job.set_parameter(JobParameterKey::ProgramFormat, ProgramFormat::Calibration.name())?;
    job.submit()?;
    if !wait {
        writeln!(out, "{}", job.remote_id().ok_or(StatusCode::Fatal)?)?;
        return Ok(0);
    }
    match job.wait(timeout)? {
        qdmi_core::JobStatus::Done => {}
        other => {
            writeln!(out, "{}", other.name())?;
            return Err(StatusCode::Fatal.into());
        }
    }
    writeln!(out, "{}", job_text(&mut job, JobResultKey::Custom1)?)?;
    Ok(0)
}

/// Transverse-field Ising chain `-ZZI - IZZ - 0.5 (XII + IXI + IIX)`.
pub fn default_hamiltonian() -> ToyHamiltonian {
    ToyHamiltonian::transverse_field_ising(3, 1.0, 0.5).expect("3 qubits is within the limit")
}

/// Writes an auth file and a one-partition site configuration for `base_url`.
pub fn write_site_config(dir: &Path, partition: &str, base_url: &str, token: &str) -> std::io::Result<PathBuf> {
    let auth = dir.join("auth.json");
    std::fs::write(&auth, json!({"access_token": token}).to_string())?;
    let mut config = SiteConfig::default();
    config.partitions.insert(
        partition.to_string(),
        Partition {
            base_url: base_url.to_string(),
            auth_file: auth,
            allowed_backends: Some(vec![workflow::SIMULATOR_ALIAS.into(), workflow::HARDWARE_ALIAS.into()]),
            default_alias: None,
        },
    );
    let path = dir.join("site.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&config).expect("config serializes"))?;
    Ok(path)
}

fn demo_qsci(g: &GlobalOptions, args: &DemoArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let h = match &args.hamiltonian {
        Some(path) => workflow::load_hamiltonian(path).map_err(CliError::Usage)?,
        None => default_hamiltonian(),
    };
    let mut mock = workflow::mock_config(args.seed);
    mock.stage_duration_ms = args.stage.as_millis() as u64;
    let token = mock.tokens.first().cloned().unwrap_or_default();
    let server = MockServer::start(mock, Arc::new(SystemClock::new()))?;
    let work = tempfile::tempdir()?;

    let offload_settings = if args.offload {
        let site_config = match &args.site_config {
            Some(path) => path.clone(),
            None => write_site_config(work.path(), &args.partition, server.base_url(), &token)?,
        };
        Some(OffloadSettings {
            site_config,
            partition: args.partition.clone(),
            executable: std::env::current_exe()?,
            work_dir: work.path().to_path_buf(),
        })
    } else {
        None
    };
    let config = WorkflowConfig {
        offload: args.offload,
        simulator: args.simulator,
        shots: args.shots,
        seed: args.seed,
        k: args.k,
        grid: workflow::default_grid(args.grid_points),
        sweeps: args.sweeps,
        offload_settings,
        ..WorkflowConfig::default()
    };
    let endpoint = Endpoint {
        base_url: Some(server.base_url().to_string()),
        token: Some(token),
        auth_file: None,
    };
    let result = workflow::run_qsci(&Device::initialize(), &endpoint, &config, &h)?;
    let exact = qsci::exact_ground_energy(&h).map_err(|e| CliError::Usage(e.to_string()))?;
    server.shutdown();

    if g.json {
        let counts: serde_json::Map<String, Value> = result.counts.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        return emit_json(
            out,
            &json!({
                "energy": result.energy,
                "exact_energy": exact,
                "basis": result.basis,
                "params": result.params,
                "scan_energy": result.scan_energy,
                "backend": result.alias,
                "offload": args.offload,
                "simulator": args.simulator,
                "counts": counts,
            }),
        );
    }
    writeln!(out, "backend        {}", result.alias)?;
    writeln!(out, "offload        {}", args.offload)?;
    writeln!(out, "params         {:?}", result.params)?;
    writeln!(out, "scan energy    {}", result.scan_energy)?;
    writeln!(out, "configurations {}", result.basis.join(" "))?;
    writeln!(out, "energy         {}", result.energy)?;
    writeln!(out, "exact energy   {exact}")?;
    Ok(0)
}

fn run_handoff(request: &Path, response: &Path) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(request)?;
    let request: HandoffRequest = serde_json::from_str(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let result = workflow::execute_handoff(&Device::initialize(), &request, &RunOptions::default())?;
    std::fs::write(response, serde_json::to_vec_pretty(&result).expect("counts serialize"))?;
    Ok(0)
}

/// Entry point shared by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
