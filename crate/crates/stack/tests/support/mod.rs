#![allow(dead_code)]

pub mod adapter_suite;
pub mod fake;
pub mod rig;

use std::sync::Arc;

use qdmi_core::{read_to_string, DeviceJob, DeviceProperty, DeviceSession, JobResultKey, SessionParameterKey, SiteProperty};
use qdmi_stack::clock::ManualClock;
use qdmi_stack::mock::{MockConfig, MockServer};
use qdmi_stack::plugin::{Device, PluginConfig, Session};

pub const TOKEN: &str = "test-token";

/// A mock service and a plugin sharing one virtual clock.
pub struct Harness {
    pub server: MockServer,
    pub clock: Arc<ManualClock>,
    pub device: Device,
}

impl Harness {
    pub fn new(config: MockConfig) -> Self {
        let clock = Arc::new(ManualClock::new());
        let server = MockServer::start(config, clock.clone()).expect("mock binds");
        let device = Device::with_config(PluginConfig::for_tests(clock.clone()));
        Self { server, clock, device }
    }

    pub fn default_mock() -> Self {
        Self::new(MockConfig::for_tests(7))
    }

    /// A configured, not yet initialized session.
    pub fn configured(&self, alias: Option<&str>) -> Session {
        let mut s = self.device.session_alloc();
        s.set_parameter(SessionParameterKey::BaseUrl, self.server.base_url()).unwrap();
        s.set_parameter(SessionParameterKey::Token, TOKEN).unwrap();
        if let Some(alias) = alias {
            s.set_parameter(SessionParameterKey::Custom2, alias).unwrap();
        }
        s
    }

    pub fn session(&self, alias: &str) -> Session {
        let mut s = self.configured(Some(alias));
        s.init().expect("session initializes");
        s
    }

    pub fn requests(&self) -> u64 {
        self.server.backend().request_log().total
    }

    pub fn route_log(&self) -> Vec<String> {
        self.server.backend().request_log().log
    }

    /// An authenticated GET straight to the mock, bypassing the plugin.
    pub fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> T {
        let text = ureq::get(&format!("{}{}", self.server.base_url(), path))
            .header("Authorization", &format!("Bearer {TOKEN}"))
            .call()
            .unwrap()
            .body_mut()
            .read_to_string()
            .unwrap();
        serde_json::from_str(&text).unwrap()
    }
}

pub fn device_text<S: DeviceSession>(s: &S, key: DeviceProperty) -> String {
    read_to_string(|cap, buf| s.query_device_property(key, cap, buf)).unwrap()
}

pub fn site_text<S: DeviceSession>(s: &S, site: &str, key: SiteProperty) -> String {
    read_to_string(|cap, buf| s.query_site_property(site, key, cap, buf)).unwrap()
}

pub fn result_text<J: DeviceJob>(job: &mut J, key: JobResultKey) -> qdmi_core::Status<String> {
    read_to_string(|cap, buf| job.get_results(key, cap, buf))
}
