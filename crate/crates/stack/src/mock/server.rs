//! HTTP binding of [`MockBackend`] and an in-process server handle.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::sync::oneshot;

use super::config::MockConfig;
use super::service::{MockBackend, Reply, Request};
use crate::clock::Clock;
use crate::wire::FaultInjection;

type Shared = State<Arc<MockBackend>>;

fn respond(reply: Reply) -> Response {
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], reply.body).into_response()
}

fn call(svc: &MockBackend, headers: &HeaderMap, request: Request) -> Response {
    let auth = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
    respond(svc.handle(request, auth))
}

async fn discovery(State(svc): Shared, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::Discovery)
}

async fn static_arch(State(svc): Shared, Path(qc): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::StaticArchitecture { qc })
}

async fn dynamic_arch(State(svc): Shared, Path((qc, calibration_set)): Path<(String, String)>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::DynamicArchitecture { qc, calibration_set })
}

async fn calibration_support(State(svc): Shared, Path(qc): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::CalibrationSupport { qc })
}

async fn calibration_metrics(State(svc): Shared, Path(calibration_set): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::CalibrationMetrics { calibration_set })
}

async fn submit_circuit(State(svc): Shared, Path(qc): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    call(&svc, &headers, Request::SubmitCircuit { qc, body: body.to_vec() })
}

async fn job_status(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::JobStatus { job })
}

async fn job_measurements(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::JobMeasurements { job })
}

async fn job_counts(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::JobCounts { job })
}

async fn job_cancel(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::JobCancel { job })
}

async fn submit_calibration(State(svc): Shared, Path(qc): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::SubmitCalibration { qc })
}

async fn calibration_status(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::CalibrationStatus { job })
}

async fn calibration_abort(State(svc): Shared, Path(job): Path<String>, headers: HeaderMap) -> Response {
    call(&svc, &headers, Request::CalibrationAbort { job })
}

async fn request_counts(State(svc): Shared) -> Response {
    Json(svc.request_log()).into_response()
}

async fn reset_counts(State(svc): Shared) -> Response {
    svc.reset_request_log();
    StatusCode::NO_CONTENT.into_response()
}

async fn faults(State(svc): Shared, Json(fault): Json<FaultInjection>) -> Response {
    svc.inject_failures(&fault.route, fault.count);
    StatusCode::NO_CONTENT.into_response()
}

/// Normalizes a base path to `""` or `"/segment..."` without a trailing slash.
pub fn normalize_base_path(path: &str) -> String {
    let trimmed = path.trim_matches('/');
    if trimmed.is_empty() {
        String::new()
    } else {
        format!("/{trimmed}")
    }
}

pub fn router(svc: Arc<MockBackend>) -> Router {
    let mut api = Router::new()
        .route("/quantum-computers", get(discovery))
        .route("/quantum-computers/{qc}/static-architecture", get(static_arch))
        .route("/quantum-computers/{qc}/dynamic-architecture/{calset}", get(dynamic_arch))
        .route("/quantum-computers/{qc}/calibration-support", get(calibration_support))
        .route("/calibration-sets/{calset}/metrics", get(calibration_metrics))
        .route("/quantum-computers/{qc}/jobs", post(submit_circuit))
        .route("/jobs/{job}/status", get(job_status))
        .route("/jobs/{job}/measurements", get(job_measurements))
        .route("/jobs/{job}/counts", get(job_counts))
        .route("/jobs/{job}/cancel", post(job_cancel))
        .route("/quantum-computers/{qc}/calibration-jobs", post(submit_calibration))
        .route("/calibration-jobs/{job}", get(calibration_status))
        .route("/calibration-jobs/{job}/abort", post(calibration_abort));
    if svc.config().test_routes {
        api = api
            .route("/_test/request-counts", get(request_counts))
            .route("/_test/request-counts/reset", post(reset_counts))
            .route("/_test/faults", post(faults));
    }
    let base = normalize_base_path(&svc.config().base_path);
    let app = if base.is_empty() { api } else { Router::new().nest(&base, api) };
    app.with_state(svc)
}

/// Serves `svc` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    svc: Arc<MockBackend>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(svc)).with_graceful_shutdown(shutdown).await
}

/// A mock service running on a background thread. Stops on drop.
#[derive(Debug)]
pub struct MockServer {
    base_url: String,
    backend: Arc<MockBackend>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds an ephemeral loopback port.
    pub fn start(config: MockConfig, clock: Arc<dyn Clock>) -> std::io::Result<Self> {
        Self::bind(config, clock, SocketAddr::from(([127, 0, 0, 1], 0)))
    }

    pub fn bind(config: MockConfig, clock: Arc<dyn Clock>, addr: SocketAddr) -> std::io::Result<Self> {
        let listener = std::net::TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let local = listener.local_addr()?;
        let base_url = format!("http://{local}{}", normalize_base_path(&config.base_path));
        let backend = Arc::new(MockBackend::new(config, clock));
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let (tx, rx) = oneshot::channel::<()>();
        let svc = backend.clone();
        let thread = std::thread::Builder::new().name("mock-service".into()).spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener registers with runtime");
                let _ = serve(listener, svc, async {
                    let _ = rx.await;
                })
                .await;
            });
        })?;
        Ok(Self {
            base_url,
            backend,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    /// Root URL including the configured base path.
    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn backend(&self) -> &Arc<MockBackend> {
        &self.backend
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop();
    }
}
