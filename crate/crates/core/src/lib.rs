//! Core of a device-management interface stack for quantum backends.
//!
//! This crate holds everything that does not need an operating system:
//!
//! - the vendor-agnostic interface vocabulary (status codes, parameter,
//!   property and result keys) and the two-call buffer sizing protocol,
//! - the device contract traits that plugins implement and frontends consume,
//! - the native-to-interface job status mapping and deterministic stage
//!   schedules for vendor job lifecycles,
//! - a state-vector simulator for the native `prx`/`cz`/`measure` gate set,
//! - the numerical pieces of a selected-configuration workflow (toy Pauli
//!   Hamiltonians, configuration selection, a cyclic Jacobi eigensolver).
//!
//! Networking, processes and file formats live in the companion `qdmi-stack`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod backoff;
pub mod circuit;
pub mod device;
pub mod histogram;
pub mod keys;
pub mod lifecycle;
pub mod qsci;
pub mod rng;
pub mod sim;
pub mod status;
pub mod value;

pub use circuit::{Circuit, Instruction};
pub use device::{DeviceJob, DeviceSession};
pub use histogram::Histogram;
pub use keys::{
    DeviceProperty, HeraldingMode, JobParameterKey, JobResultKey, OperationProperty,
    ProgramFormat, QubitMapping, SessionParameterKey, SiteProperty,
};
pub use status::{map_native_status, JobStatus, Status, StatusCode};
pub use value::{encode_value, read_to_string, sized_read, PropertyValue};
