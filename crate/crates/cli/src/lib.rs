//! Library surface of the CLI: plans, presets, runners, and output writers,
//! kept callable so integration tests can drive whole experiments without
//! spawning the binary.

pub mod output;
pub mod plan;
pub mod presets;
pub mod runs;
