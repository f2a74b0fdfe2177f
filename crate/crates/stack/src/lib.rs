//! Host-side half of the device-management stack: the mock vendor service,
//! the HTTP device plugin, the frontend adapter, the batch-system launcher,
//! the hybrid workflow driver and the command-line front end.

pub mod adapter;
pub mod cli;
pub mod clock;
pub mod launcher;
pub mod mock;
pub mod wire;
pub mod plugin;
pub mod workflow;
