//! The frontend-adapter suite, written once against [`Backend`] and run
//! against both the HTTP plugin and the in-process fake.

use std::f64::consts::PI;

use qdmi_core::qsci::DiagonalObservable;
use qdmi_core::{Circuit, DeviceSession, Histogram, StatusCode};
use qdmi_stack::adapter::{build_target, expectation_from_counts, run_estimator, run_sampler, RunOptions};
use qdmi_stack::plugin::Session;

use super::fake::FakeDevice;
use super::Harness;

pub trait Backend {
    type S: DeviceSession;
    fn session(&self) -> &Self::S;
    fn submissions(&self) -> u64;
    /// Requests that reached a remote service.
    fn backend_requests(&self) -> u64;
}

pub struct Http {
    harness: Harness,
    session: Session,
}

impl Http {
    pub fn new() -> Self {
        let harness = Harness::default_mock();
        let session = harness.session("mock-5q");
        Self { harness, session }
    }
}

impl Backend for Http {
    type S = Session;
    fn session(&self) -> &Session {
        &self.session
    }
    fn submissions(&self) -> u64 {
        let log = self.harness.server.backend().request_log();
        log.counts.get("submit_circuit").copied().unwrap_or(0)
    }
    fn backend_requests(&self) -> u64 {
        self.harness.requests()
    }
}

pub struct Fake(pub FakeDevice);

impl Backend for Fake {
    type S = FakeDevice;
    fn session(&self) -> &FakeDevice {
        &self.0
    }
    fn submissions(&self) -> u64 {
        self.0.submissions.get()
    }
    fn backend_requests(&self) -> u64 {
        0
    }
}

pub fn prepare_one() -> Circuit {
    Circuit::new("one").prx("QB1", PI, 0.0).measure("QB1", "m0")
}

pub fn target_from_queries_only<B: Backend>(b: B) {
    let before = (b.submissions(), b.backend_requests());
    let target = build_target(b.session()).unwrap();
    assert_eq!(target.qubit_names.len(), 5);
    assert_eq!(target.connectivity.len(), 4);
    assert!(target.connectivity.iter().all(|(a, b)| a == "QB3" || b == "QB3"));
    assert!(target.quality("cz", &["QB3", "QB1"]).is_some());
    assert!(target.quality("cz", &["QB1", "QB2"]).is_none());
    assert_eq!(target.operations.len(), 5 + 4 + 5);
    assert!(target.admits(&prepare_one()));
    assert!(!target.admits(&Circuit::new("x").cz("QB1", "QB2")));
    assert_eq!((b.submissions(), b.backend_requests()), before);
}

pub fn sampler_counts<B: Backend>(b: B) {
    let hists = run_sampler(b.session(), &[prepare_one()], 100, &RunOptions::default()).unwrap();
    assert_eq!(hists, [[("1", 100)].into_iter().collect::<Histogram>()]);
}

pub fn sampler_empty_batch<B: Backend>(b: B) {
    assert_eq!(run_sampler(b.session(), &[], 100, &RunOptions::default()).unwrap(), Vec::<Histogram>::new());
    assert_eq!(b.submissions(), 0);
}

pub fn sampler_one_job_per_circuit<B: Backend>(b: B) {
    let circuits = [prepare_one(), Circuit::new("z").measure("QB2", "a"), Circuit::new("y").prx("QB3", PI / 2.0, PI / 2.0).measure("QB3", "b")];
    let hists = run_sampler(b.session(), &circuits, 64, &RunOptions::default()).unwrap();
    assert_eq!(b.submissions(), 3);
    assert!(hists.iter().all(|h| h.total() == 64));
}

pub fn sampler_stops_at_first_error<B: Backend>(b: B) {
    let circuits = [prepare_one(), Circuit::new("bad").measure("QB9", "m"), prepare_one()];
    let err = run_sampler(b.session(), &circuits, 10, &RunOptions::default()).unwrap_err();
    assert_eq!(err.index, 1);
    assert_eq!(err.status, StatusCode::InvalidArgument);
    assert_eq!(err.completed.len(), 1);
}

pub fn estimator_examples<B: Backend>(b: B) {
    let opts = RunOptions::default();
    let z = DiagonalObservable::z("m0", 1.0);
    let e = run_estimator(b.session(), &prepare_one(), &z, 50, &opts).unwrap();
    assert_eq!((e.value, e.stderr), (-1.0, 0.0));

    let identity = DiagonalObservable::new(vec![(0.25, vec![])]);
    let e = run_estimator(b.session(), &prepare_one(), &identity, 50, &opts).unwrap();
    assert_eq!((e.value, e.stderr), (0.25, 0.0));

    let zeros = Circuit::new("00").measure("QB1", "m0").measure("QB2", "m1");
    let half = DiagonalObservable::new(vec![(0.5, vec!["m0".into()]), (0.5, vec!["m1".into()])]);
    assert_eq!(run_estimator(b.session(), &zeros, &half, 20, &opts).unwrap().value, 1.0);

    let before = b.submissions();
    let unmeasured = DiagonalObservable::z("m7", 1.0);
    assert_eq!(run_estimator(b.session(), &zeros, &unmeasured, 20, &opts), Err(StatusCode::InvalidArgument));
    assert_eq!(b.submissions(), before);
}

pub fn estimator_matches_counts<B: Backend>(b: B) {
    let c = Circuit::new("mix").prx("QB1", 1.1, 0.4).prx("QB3", 0.7, 0.0).cz("QB1", "QB3").measure("QB1", "m0").measure("QB3", "m1");
    let obs = DiagonalObservable::new(vec![(0.3, vec!["m0".into()]), (-0.8, vec!["m0".into(), "m1".into()]), (0.1, vec![])]);
    let e = run_estimator(b.session(), &c, &obs, 400, &RunOptions::default()).unwrap();
    assert!(e.value.abs() <= obs.coefficient_norm());
    assert!(e.stderr > 0.0);
    // the next job draws a fresh seed, so only agreement in distribution is expected
    let hist = run_sampler(b.session(), &[c], 400, &RunOptions::default()).unwrap().remove(0);
    let from_counts = expectation_from_counts(&hist, &obs, &["m0", "m1"]).unwrap();
    assert!((from_counts - e.value).abs() < 8.0 * e.stderr + 1e-12);
}

/// Every suite case by name, for runners that are not the test harness.
pub fn run_all<B: Backend>(make: impl Fn() -> B) -> Vec<&'static str> {
    target_from_queries_only(make());
    sampler_counts(make());
    sampler_empty_batch(make());
    sampler_one_job_per_circuit(make());
    sampler_stops_at_first_error(make());
    estimator_examples(make());
    estimator_matches_counts(make());
    vec![
        "target_from_queries_only",
        "sampler_counts",
        "sampler_empty_batch",
        "sampler_one_job_per_circuit",
        "sampler_stops_at_first_error",
        "estimator_examples",
        "estimator_matches_counts",
    ]
}
