//! Episode files: one canonical JSON file per goal met, mirroring
//! augmentation and social-compliance scoring.

mod compliance;
mod episode;
mod stats;

pub use compliance::{compliance_report, ComplianceConfig, ComplianceReport};
pub use episode::{
    episode_file_name, is_valid_user_id, load_episode, mirror_episode, write_episode, Clock,
    Episode, FixedClock, Metadata, Step, SystemClock, TOOLKIT_VERSION,
};

pub use stats::{dataset_stats, ComplianceTotals, DatasetStats, FileError, UserTotals};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum RecorderError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: crate::canonical::CanonicalError,
    },
    #[error("invalid episode: {0}")]
    Invalid(String),
    #[error("invalid user id {0:?}: expected one or more ASCII letters or digits")]
    UserId(String),
}
