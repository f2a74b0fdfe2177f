//! A workflow test bed: a mock started with the workflow fixtures, a site
//! configuration pointing at it, and a plugin that ignores the process
//! environment.

use std::path::PathBuf;
use std::sync::Arc;

use qdmi_core::qsci::ToyHamiltonian;
use qdmi_stack::cli::{default_hamiltonian, write_site_config};
use qdmi_stack::clock::SystemClock;
use qdmi_stack::mock::MockServer;
use qdmi_stack::plugin::{Device, PluginConfig};
use qdmi_stack::workflow::{self, run_qsci, Endpoint, OffloadSettings, QsciResult, WorkflowConfig, WorkflowError};

pub const BIN: &str = env!("CARGO_BIN_EXE_qdmi");

pub struct Rig {
    pub server: MockServer,
    pub dir: tempfile::TempDir,
    pub site: PathBuf,
    pub device: Device,
}

impl Rig {
    pub fn new(seed: u64) -> Self {
        let server = MockServer::start(workflow::mock_config(seed), Arc::new(SystemClock::new())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let site = write_site_config(dir.path(), "quantum", server.base_url(), "test-token").unwrap();
        let device = Device::with_config(PluginConfig::for_tests(Arc::new(SystemClock::new())));
        Rig { server, dir, site, device }
    }

    pub fn endpoint(&self) -> Endpoint {
        Endpoint {
            base_url: Some(self.server.base_url().into()),
            token: Some("test-token".into()),
            auth_file: None,
        }
    }

    pub fn config(&self, offload: bool, simulator: bool) -> WorkflowConfig {
        WorkflowConfig {
            offload,
            simulator,
            offload_settings: Some(OffloadSettings {
                site_config: self.site.clone(),
                partition: "quantum".into(),
                executable: BIN.into(),
                work_dir: self.dir.path().into(),
            }),
            ..WorkflowConfig::default()
        }
    }

    pub fn run(&self, config: &WorkflowConfig, h: &ToyHamiltonian) -> Result<QsciResult, WorkflowError> {
        run_qsci(&self.device, &self.endpoint(), config, h)
    }
}

/// Each mode gets a fresh backend started with the same seed.
pub fn run_mode(offload: bool, simulator: bool, tweak: impl Fn(&mut WorkflowConfig)) -> QsciResult {
    let rig = Rig::new(7);
    let mut config = rig.config(offload, simulator);
    tweak(&mut config);
    rig.run(&config, &default_hamiltonian()).unwrap()
}
