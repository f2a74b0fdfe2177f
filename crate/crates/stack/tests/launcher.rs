use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qdmi_stack::clock::SystemClock;
use qdmi_stack::launcher::{
    child_environment, enforce_policy, launch, load_site_config, validate_credentials, LaunchError,
    LaunchRequest, SiteConfig,
};
use qdmi_stack::mock::{MockConfig, MockServer};
use qdmi_stack::plugin::env;

const BIN: &str = env!("CARGO_BIN_EXE_qdmi");

struct Site {
    server: MockServer,
    dir: tempfile::TempDir,
    config: SiteConfig,
}

impl Site {
    fn new(seed: u64) -> Self {
        let mut mock = MockConfig::for_tests(seed);
        mock.tokens.push("rotated-token".into());
        let server = MockServer::start(mock, Arc::new(SystemClock::new())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let auth = write_auth(dir.path(), "auth.json", "test-token");
        let text = serde_json::json!({"partitions": {
            "q": {"base_url": server.base_url(), "auth_file": auth,
                  "allowed_backends": ["mock-5q"], "default_alias": "mock-5q"},
            "open": {"base_url": server.base_url(), "auth_file": auth}
        }});
        let path = dir.path().join("site.json");
        std::fs::write(&path, text.to_string()).unwrap();
        let config = load_site_config(&path).unwrap();
        Site { server, dir, config }
    }

    fn requests(&self) -> u64 {
        self.server.backend().request_log().total
    }

    fn marker(&self) -> PathBuf {
        self.dir.path().join("ran")
    }

    /// A command that leaves a marker file behind when it runs.
    fn touch_request(&self, alias: Option<&str>) -> LaunchRequest {
        request(
            "q",
            &["sh", "-c", &format!("touch {}", self.marker().display())],
            alias,
        )
    }
}

fn write_auth(dir: &Path, name: &str, token: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::json!({"access_token": token}).to_string()).unwrap();
    path
}

fn base_env() -> BTreeMap<String, String> {
    [("PATH", std::env::var("PATH").unwrap_or_else(|_| "/usr/bin:/bin".into())), ("WORKLOAD_TAG", "x".into())]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn request(partition: &str, command: &[&str], alias: Option<&str>) -> LaunchRequest {
    LaunchRequest {
        partition: partition.into(),
        command: command.iter().map(|s| s.to_string()).collect(),
        requested_backend_alias: alias.map(String::from),
        inherited_env: base_env(),
    }
}

fn parse_env(text: &str) -> BTreeMap<String, String> {
    text.split('\0')
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn child_sees_exactly_the_injected_variables() {
    let site = Site::new(1);
    let out = site.dir.path().join("env.txt");
    let cmd = format!("env -0 > {}", out.display());
    let code = launch(&site.config, &request("q", &["sh", "-c", &cmd], None)).unwrap();
    assert_eq!(code, 0);
    let mut child = parse_env(&std::fs::read_to_string(&out).unwrap());
    // the shell itself may export these
    for noise in ["PWD", "SHLVL", "_", "OLDPWD"] {
        child.remove(noise);
    }
    let inherited = base_env();
    let mut added: Vec<&str> = child.keys().filter(|k| !inherited.contains_key(*k)).map(String::as_str).collect();
    added.sort();
    assert_eq!(added, [env::AUTH_FILE, env::BASE_URL, env::QC_ALIAS]);
    assert!(inherited.iter().all(|(k, v)| child.get(k) == Some(v)));
    assert_eq!(child[env::BASE_URL], site.server.base_url());
    assert_eq!(child[env::QC_ALIAS], "mock-5q");
    assert_eq!(child[env::AUTH_FILE], site.config.partitions["q"].auth_file.display().to_string());
}

#[test]
fn exit_status_passes_through() {
    let site = Site::new(2);
    assert_eq!(launch(&site.config, &request("q", &["sh", "-c", "exit 3"], None)), Ok(3));
    #[cfg(unix)]
    assert_eq!(launch(&site.config, &request("q", &["sh", "-c", "kill -TERM $$"], None)), Ok(128 + 15));
    let err = launch(&site.config, &request("q", &["/nonexistent/program"], None)).unwrap_err();
    assert!(matches!(err, LaunchError::Spawn(_)));
    assert_eq!(err.exit_code(), 70);
}

#[test]
fn credential_check_costs_one_request() {
    let site = Site::new(3);
    let p = &site.config.partitions["q"];
    let before = site.requests();
    validate_credentials(&p.base_url, &p.auth_file).unwrap();
    assert_eq!(site.requests() - before, 1);
    assert_eq!(site.server.backend().request_log().log.last().map(String::as_str), Some("discovery"));
}

#[test]
fn revoked_token_runs_nothing() {
    let site = Site::new(4);
    std::fs::write(&site.config.partitions["q"].auth_file, r#"{"access_token": "revoked"}"#).unwrap();
    let err = launch(&site.config, &site.touch_request(None)).unwrap_err();
    assert_eq!(err.exit_code(), 66);
    assert!(!site.marker().exists());
}

#[test]
fn missing_or_malformed_auth_file_runs_nothing() {
    let site = Site::new(5);
    let auth = site.config.partitions["q"].auth_file.clone();
    std::fs::write(&auth, "not json").unwrap();
    assert_eq!(launch(&site.config, &site.touch_request(None)).unwrap_err().exit_code(), 66);
    std::fs::remove_file(&auth).unwrap();
    assert_eq!(launch(&site.config, &site.touch_request(None)).unwrap_err().exit_code(), 66);
    assert!(!site.marker().exists());
    assert_eq!(site.requests(), 0);
}

#[test]
fn disallowed_backend_runs_nothing_and_sends_nothing() {
    let site = Site::new(6);
    let err = launch(&site.config, &site.touch_request(Some("mock-6q"))).unwrap_err();
    assert_eq!(err.exit_code(), 65);
    assert!(!site.marker().exists());
    assert_eq!(site.requests(), 0);

    let mut open = site.touch_request(Some("mock-6q"));
    open.partition = "open".into();
    assert_eq!(enforce_policy(&site.config, &open), Ok(Some("mock-6q".into())));
    let mut unknown = site.touch_request(None);
    unknown.partition = "nope".into();
    assert_eq!(launch(&site.config, &unknown).unwrap_err().exit_code(), 65);
}

#[test]
fn rotating_the_auth_file_needs_no_command_change() {
    let site = Site::new(7);
    let req = site.touch_request(None);
    assert_eq!(launch(&site.config, &req), Ok(0));
    std::fs::remove_file(site.marker()).unwrap();

    let mut rotated = site.config.clone();
    let q = rotated.partitions.get_mut("q").unwrap();
    q.auth_file = write_auth(site.dir.path(), "rotated.json", "rotated-token");
    assert_eq!(launch(&rotated, &req), Ok(0));
    assert!(site.marker().exists());
}

/// Submits a fixed circuit through the CLI and prints its histogram.
fn workload(dir: &Path) -> String {
    let program = dir.join("program.json");
    let circuit = qdmi_core::Circuit::new("w")
        .prx("QB1", 1.0, 0.3)
        .prx("QB3", 2.0, 0.0)
        .cz("QB1", "QB3")
        .measure("QB1", "a")
        .measure("QB3", "b");
    std::fs::write(&program, serde_json::to_string(&circuit).unwrap()).unwrap();
    format!(
        "id=$({BIN} submit {p} --shots 2000) && {BIN} wait $id >/dev/null && {BIN} results $id --key HIST",
        p = program.display()
    )
}

#[test]
fn launcher_and_manual_export_give_identical_output() {
    let via_launcher = {
        let site = Site::new(42);
        let out = site.dir.path().join("out.txt");
        let script = format!("{{ {}; }} > {}", workload(site.dir.path()), out.display());
        assert_eq!(launch(&site.config, &request("q", &["sh", "-c", &script], None)), Ok(0));
        std::fs::read(out).unwrap()
    };
    let manual = {
        let site = Site::new(42);
        let p = &site.config.partitions["q"];
        let out = std::process::Command::new("sh")
            .args(["-c", &workload(site.dir.path())])
            .env_clear()
            .envs(base_env())
            .env(env::BASE_URL, &p.base_url)
            .env(env::AUTH_FILE, &p.auth_file)
            .env(env::QC_ALIAS, "mock-5q")
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert!(!manual.is_empty());
    assert_eq!(via_launcher, manual);
}

#[test]
fn injected_environment_is_a_pure_function() {
    let site = Site::new(8);
    let p = &site.config.partitions["open"];
    let a = child_environment(&base_env(), p, None);
    assert_eq!(a, child_environment(&base_env(), p, None));
    assert_eq!(a.len(), base_env().len() + 2);
}
