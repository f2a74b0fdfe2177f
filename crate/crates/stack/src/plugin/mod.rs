//! Device plugin speaking the mock vendor protocol: token resolution, route
//! table, blocking transport, cached session metadata and job lifecycles.

pub mod env;
mod job;
mod routes;
mod session;
mod token;
mod transport;

use std::sync::Arc;
use std::time::Duration;

use qdmi_core::backoff::Backoff;

pub use env::Environment;
pub use job::{Job, JobKind};
pub use routes::{Method, RouteOp, RouteTable};
pub use session::{Session, SessionState};
pub use token::{read_auth_file, resolve_token, TokenOrigin, TokenSource};
pub use transport::{Transport, TransportError};

use crate::clock::{Clock, SystemClock};

/// Default delay before the single retry of a calibration refresh.
pub const REFRESH_RETRY_DELAY: Duration = Duration::from_secs(120);

#[derive(Clone, Debug)]
pub struct PluginConfig {
    pub backoff: Backoff,
    pub refresh_retry_delay: Duration,
    pub clock: Arc<dyn Clock>,
    pub environment: Environment,
    pub routes: RouteTable,
    pub request_timeout: Duration,
}

impl Default for PluginConfig {
    fn default() -> Self {
        Self {
            backoff: Backoff::default(),
            refresh_retry_delay: REFRESH_RETRY_DELAY,
            clock: Arc::new(SystemClock::new()),
            environment: Environment::from_process(),
            routes: RouteTable::default(),
            request_timeout: Duration::from_secs(30),
        }
    }
}

impl PluginConfig {
    /// Empty environment, a 50 ms refresh retry and the given clock.
    pub fn for_tests(clock: Arc<dyn Clock>) -> Self {
        Self {
            refresh_retry_delay: Duration::from_millis(50),
            clock,
            environment: Environment::empty(),
            ..Self::default()
        }
    }
}

/// Plugin entry point: allocates sessions sharing one configuration.
#[derive(Debug)]
pub struct Device {
    config: Arc<PluginConfig>,
}

impl Device {
    /// Default configuration with the process environment.
    pub fn initialize() -> Self {
        Self::with_config(PluginConfig::default())
    }

    pub fn with_config(config: PluginConfig) -> Self {
        Self { config: Arc::new(config) }
    }

    pub fn config(&self) -> &PluginConfig {
        &self.config
    }

    pub fn session_alloc(&self) -> Session {
        Session::new(self.config.clone())
    }

    pub fn finalize(self) {}
}
