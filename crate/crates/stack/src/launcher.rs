//! Single-host emulation of a scheduler prolog: resolve a partition's endpoint
//! and credentials from a site configuration, enforce the backend policy,
//! validate the token, then run the user command with the `QDMI_*` variables
//! injected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::plugin::{env, read_auth_file, RouteOp, RouteTable, Transport};
use crate::wire::Discovery;

pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_POLICY: i32 = 65;
pub const EXIT_CREDENTIAL: i32 = 66;
pub const EXIT_SPAWN: i32 = 70;

const VALIDATION_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LaunchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("policy rejection: {0}")]
    Policy(String),
    #[error("credential rejection: {0}")]
    Credential(String),
    #[error("failed to start command: {0}")]
    Spawn(String),
}

impl LaunchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LaunchError::Config(_) => EXIT_CONFIG,
            LaunchError::Policy(_) => EXIT_POLICY,
            LaunchError::Credential(_) => EXIT_CREDENTIAL,
            LaunchError::Spawn(_) => EXIT_SPAWN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Partition {
    pub base_url: String,
    pub auth_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_backends: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_alias: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    #[serde(deserialize_with = "unique_partitions")]
    pub partitions: BTreeMap<String, Partition>,
}

/// Rejects duplicate names and empty base URLs while parsing, so the error
/// carries the position in the file.
fn unique_partitions<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Partition>, D::Error> {
    struct Partitions;

    impl<'de> Visitor<'de> for Partitions {
        type Value = BTreeMap<String, Partition>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map of partition names to partitions")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some(name) = map.next_key::<String>()? {
                if out.contains_key(&name) {
                    return Err(de::Error::custom(format!("duplicate partition {name:?}")));
                }
                let partition: Partition = map.next_value()?;
                if partition.base_url.is_empty() {
                    return Err(de::Error::custom(format!("partition {name:?} has an empty base_url")));
                }
                out.insert(name, partition);
            }
            Ok(out)
        }
    }

    d.deserialize_map(Partitions)
}

pub fn parse_site_config(text: &str) -> Result<SiteConfig, LaunchError> {
    serde_json::from_str(text).map_err(|e| LaunchError::Config(e.to_string()))
}

pub fn load_site_config(path: &Path) -> Result<SiteConfig, LaunchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LaunchError::Config(format!("{}: {e}", path.display())))?;
    parse_site_config(&text).map_err(|e| match e {
        LaunchError::Config(m) => LaunchError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaunchRequest {
    pub partition: String,
    pub command: Vec<String>,
    pub requested_backend_alias: Option<String>,
    pub inherited_env: BTreeMap<String, String>,
}

impl LaunchRequest {
    /// A request that inherits the current process environment.
    pub fn from_process(partition: &str, command: Vec<String>, backend: Option<String>) -> Self {
        Self {
            partition: partition.to_string(),
            command,
            requested_backend_alias: backend,
            inherited_env: std::env::vars().collect(),
        }
    }
}

fn partition<'a>(config: &'a SiteConfig, request: &LaunchRequest) -> Result<&'a Partition, LaunchError> {
    config
        .partitions
        .get(&request.partition)
        .ok_or_else(|| LaunchError::Policy(format!("unknown partition {:?}", request.partition)))
}

/// The backend alias the child will see, if any.
pub fn enforce_policy(config: &SiteConfig, request: &LaunchRequest) -> Result<Option<String>, LaunchError> {
    let p = partition(config, request)?;
    match &request.requested_backend_alias {
        Some(alias) => {
            let permitted = p.allowed_backends.as_ref().is_none_or(|allowed| allowed.contains(alias));
            if permitted {
                Ok(Some(alias.clone()))
            } else {
                Err(LaunchError::Policy(format!(
                    "backend not permitted on partition: {alias} on {}",
                    request.partition
                )))
            }
        }
        None => Ok(p.default_alias.clone()),
    }
}

/// Reads the token and issues one discovery request with it.
pub fn validate_credentials(base_url: &str, auth_file: &Path) -> Result<(), LaunchError> {
    let token = read_auth_file(auth_file).map_err(|_| {
        LaunchError::Credential(format!("{} is missing or malformed", auth_file.display()))
    })?;
    let transport = Transport::new(base_url, &token, RouteTable::default(), VALIDATION_TIMEOUT);
    transport
        .request::<Discovery>(RouteOp::Discovery, &[], None)
        .map(drop)
        .map_err(|e| LaunchError::Credential(e.to_string()))
}

/// `inherited` plus the endpoint, the auth file and the resolved alias.
pub fn child_environment(
    inherited: &BTreeMap<String, String>,
    partition: &Partition,
    alias: Option<&str>,
) -> BTreeMap<String, String> {
    let mut out = inherited.clone();
    out.insert(env::BASE_URL.into(), partition.base_url.clone());
    out.insert(env::AUTH_FILE.into(), partition.auth_file.display().to_string());
    if let Some(alias) = alias {
        out.insert(env::QC_ALIAS.into(), alias.to_string());
    }
    out
}

/// Runs the command in the injected environment and returns its exit code;
/// death by signal `n` is reported as `128 + n`.
pub fn inject_and_exec(request: &LaunchRequest, config: &SiteConfig, alias: Option<&str>) -> Result<i32, LaunchError> {
    let p = partition(config, request)?;
    let (program, args) = request
        .command
        .split_first()
        .ok_or_else(|| LaunchError::Spawn("empty command".into()))?;
    let status = Command::new(program)
        .args(args)
        .env_clear()
        .envs(child_environment(&request.inherited_env, p, alias))
        .status()
        .map_err(|e| LaunchError::Spawn(format!("{program}: {e}")))?;
    Ok(exit_code(status))
}

#[cfg(unix)]
fn exit_code(status: std::process::ExitStatus) -> i32 {
    use std::os::unix::process::ExitStatusExt;
    status.code().or_else(|| status.signal().map(|s| 128 + s)).unwrap_or(1)
}

#[cfg(not(unix))]
fn exit_code(status: std::process::ExitStatus) -> i32 {
    status.code().unwrap_or(1)
}

/// Policy, then credentials, then the command. Nothing runs unless both
/// checks pass.
pub fn launch(config: &SiteConfig, request: &LaunchRequest) -> Result<i32, LaunchError> {
    let alias = enforce_policy(config, request)?;
    let p = partition(config, request)?;
    validate_credentials(&p.base_url, &p.auth_file)?;
    inject_and_exec(request, config, alias.as_deref())
}
