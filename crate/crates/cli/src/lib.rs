//! Library surface of the reproduction harness: scenario-file parsing and
//! the experiment implementations behind the `isac-ed` binary.

pub mod experiments;
pub mod scenario;
