use std::collections::BTreeMap;

pub const BASE_URL: &str = "QDMI_BASE_URL";
pub const TOKEN: &str = "QDMI_TOKEN";
pub const AUTH_FILE: &str = "QDMI_AUTH_FILE";
pub const QC_ID: &str = "QDMI_QC_ID";
pub const QC_ALIAS: &str = "QDMI_QC_ALIAS";

pub const ALL: [&str; 5] = [BASE_URL, TOKEN, AUTH_FILE, QC_ID, QC_ALIAS];

/// Snapshot of the plugin's environment variables. Empty values count as
/// unset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Environment {
    vars: BTreeMap<String, String>,
}

impl Environment {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_process() -> Self {
        let mut env = Self::empty();
        for name in ALL {
            if let Ok(value) = std::env::var(name) {
                env = env.with(name, value);
            }
        }
        env
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.vars.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.vars.get(name).map(String::as_str).filter(|v| !v.is_empty())
    }
}
