//! File formats, instance generation and run reports.

pub mod generate;
pub mod mps;
pub mod report;

pub use generate::{generate, Family, GeneratedInstance, InstanceSpec};
pub use mps::{parse_mps, read_mps, write_mps, MpsModel};
pub use report::{PhaseTimes, ProblemReport, RunReport, REPORT_FORMAT_VERSION};
