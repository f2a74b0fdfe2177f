//! Interface status codes, job states, and the native status mapping.

use core::fmt;
use core::str::FromStr;

/// Result code returned by every device-contract operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatusCode {
    Success,
    InvalidArgument,
    PermissionDenied,
    NotSupported,
    NotFound,
    Timeout,
    Protocol,
    Fatal,
}

/// Outcome of a device-contract call. The error side never holds
/// [`StatusCode::Success`].
pub type Status<T> = Result<T, StatusCode>;

impl StatusCode {
    pub const ALL: [StatusCode; 8] = [
        StatusCode::Success,
        StatusCode::InvalidArgument,
        StatusCode::PermissionDenied,
        StatusCode::NotSupported,
        StatusCode::NotFound,
        StatusCode::Timeout,
        StatusCode::Protocol,
        StatusCode::Fatal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatusCode::Success => "SUCCESS",
            StatusCode::InvalidArgument => "ERROR_INVALID_ARGUMENT",
            StatusCode::PermissionDenied => "ERROR_PERMISSION_DENIED",
            StatusCode::NotSupported => "ERROR_NOT_SUPPORTED",
            StatusCode::NotFound => "ERROR_NOT_FOUND",
            StatusCode::Timeout => "ERROR_TIMEOUT",
            StatusCode::Protocol => "ERROR_PROTOCOL",
            StatusCode::Fatal => "ERROR_FATAL",
        }
    }

    /// Collapses a call outcome into its single status code.
    pub fn of<T>(result: &Status<T>) -> StatusCode {
        match result {
            Ok(_) => StatusCode::Success,
            Err(code) => *code,
        }
    }
}

impl fmt::Display for StatusCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::error::Error for StatusCode {}

/// Coarse job status exposed through the interface.
///
/// The derived ordering is the progress order: `Submitted < Queued < Running`,
/// with the three terminal states after all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JobStatus {
    Submitted,
    Queued,
    Running,
    Done,
    Canceled,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Canceled | JobStatus::Failed)
    }

    pub fn name(self) -> &'static str {
        match self {
            JobStatus::Submitted => "SUBMITTED",
            JobStatus::Queued => "QUEUED",
            JobStatus::Running => "RUNNING",
            JobStatus::Done => "DONE",
            JobStatus::Canceled => "CANCELED",
            JobStatus::Failed => "FAILED",
        }
    }

    /// Whether moving from `self` to `next` respects terminal stickiness and
    /// non-regression of progress.
    pub fn may_transition_to(self, next: JobStatus) -> bool {
        if self.is_terminal() {
            next == self
        } else {
            next >= self
        }
    }
}

impl fmt::Display for JobStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JobStatus {
    type Err = StatusCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "SUBMITTED" => JobStatus::Submitted,
            "QUEUED" => JobStatus::Queued,
            "RUNNING" => JobStatus::Running,
            "DONE" => JobStatus::Done,
            "CANCELED" => JobStatus::Canceled,
            "FAILED" => JobStatus::Failed,
            _ => return Err(StatusCode::InvalidArgument),
        })
    }
}

/// Every native vendor state string and the interface status it maps to.
pub const NATIVE_STATUS_TABLE: &[(&str, JobStatus)] = &[
    ("received", JobStatus::Submitted),
    ("queued", JobStatus::Queued),
    ("waiting", JobStatus::Queued),
    ("validation_started", JobStatus::Running),
    ("validation_ended", JobStatus::Running),
    ("fetch_calibration_started", JobStatus::Running),
    ("fetch_calibration_ended", JobStatus::Running),
    ("compilation_started", JobStatus::Running),
    ("compilation_ended", JobStatus::Running),
    ("save_sweep_metadata_started", JobStatus::Running),
    ("save_sweep_metadata_ended", JobStatus::Running),
    ("pending execution", JobStatus::Running),
    ("pending_execution", JobStatus::Running),
    ("execution_started", JobStatus::Running),
    ("execution_ended", JobStatus::Running),
    ("post_processing_pending", JobStatus::Running),
    ("post_processing_started", JobStatus::Running),
    ("post_processing_ended", JobStatus::Running),
    ("running", JobStatus::Running),
    ("processing", JobStatus::Running),
    ("accepted", JobStatus::Running),
    ("pending compilation", JobStatus::Running),
    ("compiled", JobStatus::Running),
    ("ready", JobStatus::Done),
    ("completed", JobStatus::Done),
    ("aborted", JobStatus::Canceled),
    ("cancelled", JobStatus::Canceled),
    ("failed", JobStatus::Failed),
];

/// Maps a native vendor job state onto the interface status.
///
/// Matching is exact. Anything outside the table is protocol drift and
/// yields [`StatusCode::Protocol`].
pub fn map_native_status(native: &str) -> Status<JobStatus> {
    NATIVE_STATUS_TABLE
        .iter()
        .find(|(name, _)| *name == native)
        .map(|&(_, status)| status)
        .ok_or(StatusCode::Protocol)
}
