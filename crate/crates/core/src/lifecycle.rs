//! Deterministic native job lifecycles.
//!
//! A schedule is an ordered list of timed native stages followed by one
//! terminal state. The native state of a job is a pure function of the time
//! elapsed since its creation, so backends can advance jobs lazily when they
//! are observed.

use alloc::vec::Vec;
use core::time::Duration;

/// Native stages of a circuit job, in order, before `ready`.
pub const CIRCUIT_STAGES: &[&str] = &[
    "received",
    "queued",
    "validation_started",
    "validation_ended",
    "fetch_calibration_started",
    "fetch_calibration_ended",
    "compilation_started",
    "compilation_ended",
    "pending_execution",
    "execution_started",
    "execution_ended",
    "post_processing_started",
    "post_processing_ended",
];

/// Native stages of a calibration job, in order, before `ready`.
pub const CALIBRATION_STAGES: &[&str] = &["received", "queued", "running"];

pub const READY: &str = "ready";
pub const FAILED: &str = "failed";
pub const ABORTED: &str = "aborted";

pub fn is_terminal_native(state: &str) -> bool {
    matches!(state, READY | FAILED | ABORTED)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSchedule {
    stages: Vec<(&'static str, Duration)>,
    terminal: &'static str,
}

impl StageSchedule {
    pub fn new(stages: Vec<(&'static str, Duration)>, terminal: &'static str) -> Self {
        Self { stages, terminal }
    }

    fn uniform(names: &[&'static str], stage: Duration, terminal: &'static str) -> Self {
        Self::new(names.iter().map(|n| (*n, stage)).collect(), terminal)
    }

    /// Full circuit lifecycle ending in `ready`.
    pub fn circuit(stage: Duration) -> Self {
        Self::uniform(CIRCUIT_STAGES, stage, READY)
    }

    /// Circuit lifecycle that ends in `failed` once `validation_started` has run.
    pub fn circuit_failing_validation(stage: Duration) -> Self {
        let upto = CIRCUIT_STAGES
            .iter()
            .position(|s| *s == "validation_started")
            .map_or(CIRCUIT_STAGES.len(), |i| i + 1);
        Self::uniform(&CIRCUIT_STAGES[..upto], stage, FAILED)
    }

    pub fn calibration(stage: Duration) -> Self {
        Self::uniform(CALIBRATION_STAGES, stage, READY)
    }

    pub fn stages(&self) -> &[(&'static str, Duration)] {
        &self.stages
    }

    pub fn terminal(&self) -> &'static str {
        self.terminal
    }

    pub fn total(&self) -> Duration {
        self.stages.iter().map(|(_, d)| *d).sum()
    }

    /// Native state after `elapsed`. Stage `i` covers the half-open interval
    /// from the sum of the earlier durations to that sum plus its own.
    pub fn state_at(&self, elapsed: Duration) -> &'static str {
        let mut end = Duration::ZERO;
        for (name, d) in &self.stages {
            end += *d;
            if elapsed < end {
                return name;
            }
        }
        self.terminal
    }

    /// Position of `state` in the schedule order; the terminal comes last.
    pub fn position(&self, state: &str) -> Option<usize> {
        self.stages
            .iter()
            .position(|(n, _)| *n == state)
            .or_else(|| (state == self.terminal).then_some(self.stages.len()))
    }
}
