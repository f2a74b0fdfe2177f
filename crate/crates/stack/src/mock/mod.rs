//! Mock vendor backend: registry, calibration sets, job lifecycles and the
//! simulator behind a REST interface.

mod config;
mod server;
mod service;

pub use config::{uuid_like, BackendFixture, MockConfig, Topology};
pub use server::{normalize_base_path, router, serve, MockServer};
pub use service::{MockBackend, Reply, Request, MAX_SHOTS, OPERATIONS, VERSION};
