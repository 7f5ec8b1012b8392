//! Standard-library companion to `ipm-core`: the `rustfft` transform
//! backend, checkpoint and CSV/JSON formats, experiment configuration and
//! execution, run manifests and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod manifest;
pub mod output;
pub mod report;
pub mod spec;

pub use error::LabError;
pub use experiments::{execute, Check, Execution};
pub use spec::{parse_config, ExperimentSpec, Kind, Overrides, ToleranceProfile};
