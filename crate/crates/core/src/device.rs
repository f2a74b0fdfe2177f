//! The device contract: what a backend plugin offers to frontends.
//!
//! Sites are addressed by their name (for example `QB3`). Every buffer read
//! follows the two-call protocol of [`crate::value::sized_read`].

use core::time::Duration;

use crate::keys::{DeviceProperty, JobParameterKey, JobResultKey, OperationProperty, SiteProperty};
use crate::status::{JobStatus, Status};

/// An initialized session bound to one backend.
pub trait DeviceSession {
    type Job: DeviceJob;

    fn query_device_property(
        &self,
        key: DeviceProperty,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize>;

    fn query_site_property(
        &self,
        site: &str,
        key: SiteProperty,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize>;

    /// `sites` may be empty for [`OperationProperty::SitesSupported`] and
    /// [`OperationProperty::Name`].
    fn query_operation_property(
        &self,
        operation: &str,
        sites: &[&str],
        key: OperationProperty,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize>;

    fn create_job(&self) -> Status<Self::Job>;
}

/// A job handle created from a session.
pub trait DeviceJob {
    fn set_parameter(&mut self, key: JobParameterKey, value: &str) -> Status<()>;

    fn submit(&mut self) -> Status<()>;

    /// Polls once and returns the mapped status.
    fn check(&mut self) -> Status<JobStatus>;

    /// Polls until terminal or until `timeout` has elapsed.
    fn wait(&mut self, timeout: Duration) -> Status<JobStatus>;

    fn cancel(&mut self) -> Status<()>;

    fn get_results(
        &mut self,
        key: JobResultKey,
        capacity: usize,
        destination: Option<&mut [u8]>,
    ) -> Status<usize>;
}
