//! Monte Carlo generation of detection data at two fidelities.
//!
//! * [`sample_counts`] draws per-setting outcome counts directly from the
//!   Born distribution — fast, used by the experiment runners.
//! * [`generate_streams`] emits event-level detector click streams (signal
//!   thinning plus dark counts) that feed the k-fold coincidence finder,
//!   closing the loop between state modeling and timestamp processing.
//!
//! Detector channels follow a fixed convention: photon `i` owns channels
//! `2i` (+1 port) and `2i + 1` (−1 port), so channel group `c >> 1`
//! identifies the photon. Timestamps are integer picoseconds.

mod coincidence;
mod counts;
mod streams;
mod tagfile;

pub use coincidence::{
    accidental_rate, channel_group, find_coincidences, reference_find_coincidences,
    CoincidenceEvent, CoincidenceTally,
};
pub use counts::sample_counts;
pub use streams::{generate_streams, ClickOrigin, TimestampStream, PS_PER_SECOND};
pub use tagfile::{
    read_streams, read_streams_from_path, write_streams, write_streams_to_path, TagFileError,
    MAGIC, VERSION,
};

use thiserror::Error;

use crate::measurement::MeasurementError;
use crate::sources::SourceError;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("rate {0} must be finite and nonnegative")]
    BadRate(f64),
    #[error("duration {0} must be positive")]
    BadDuration(f64),
    #[error("coincidence window {0} must be positive")]
    BadWindow(f64),
    #[error("stream for channel {channel} is not strictly increasing at index {index}")]
    UnsortedStream { channel: u8, index: usize },
    #[error("fold {fold} outside supported range 2..={groups} for these streams")]
    BadFold { fold: usize, groups: usize },
    #[error("stream generation needs a fully measured setting, got {label:?}")]
    PartialSetting { label: String },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Source(#[from] SourceError),
}
