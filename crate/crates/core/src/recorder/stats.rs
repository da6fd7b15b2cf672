use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{compliance_report, load_episode, ComplianceConfig, ComplianceReport, RecorderError};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UserTotals {
    pub episodes: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComplianceTotals {
    pub min_human_distance: Option<f64>,
    pub personal_space_violation_steps: usize,
    pub interaction_crossing_steps: usize,
    pub speeding_near_human_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileError {
    pub file: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub episodes: usize,
    pub mirrored_episodes: usize,
    pub total_steps: usize,
    pub per_user: BTreeMap<String, UserTotals>,
    pub compliance: ComplianceTotals,
    /// Files that could not be read or failed validation.
    pub errors: Vec<FileError>,
}

/// Summarize every `*.json` episode file directly inside `dir`. Unreadable
/// files are listed in `errors` and skipped.
pub fn dataset_stats(dir: &Path, config: &ComplianceConfig) -> Result<DatasetStats, RecorderError> {
    let io = |source| RecorderError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let results: Vec<(PathBuf, Result<(String, bool, usize, ComplianceReport), String>)> = files
        .into_par_iter()
        .map(|path| {
            let summary = load_episode(&path)
                .map(|ep| {
                    let report = compliance_report(&ep, config);
                    (ep.metadata.user_id, ep.metadata.mirrored, ep.steps.len(), report)
                })
                .map_err(|e| e.to_string());
            (path, summary)
        })
        .collect();

    let mut stats = DatasetStats::default();
    for (file, result) in results {
        match result {
            Ok((user, mirrored, steps, report)) => {
                stats.episodes += 1;
                stats.mirrored_episodes += usize::from(mirrored);
                stats.total_steps += steps;
                let totals = stats.per_user.entry(user).or_default();
                totals.episodes += 1;
                totals.steps += steps;
                let c = &mut stats.compliance;
                if let Some(d) = report.min_human_distance {
                    c.min_human_distance = Some(c.min_human_distance.map_or(d, |m| m.min(d)));
                }
                c.personal_space_violation_steps += report.personal_space_violation_steps;
                c.interaction_crossing_steps += report.interaction_crossing_steps;
                c.speeding_near_human_steps += report.speeding_near_human_steps;
            }
            Err(error) => stats.errors.push(FileError { file, error }),
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recorder::episode::tests::tiny_episode;
    use crate::recorder::{write_episode, FixedClock};

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let s = dataset_stats(dir.path(), &ComplianceConfig::default()).unwrap();
        assert_eq!(s, DatasetStats::default());
    }

    #[test]
    fn totals_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut ep = tiny_episode();
        write_episode(&ep, dir.path(), &FixedClock(1)).unwrap();
        ep.metadata.user_id = "u04".into();
        write_episode(&ep, dir.path(), &FixedClock(2)).unwrap();
        std::fs::write(dir.path().join("junk.json"), b"not json").unwrap();
        let s = dataset_stats(dir.path(), &ComplianceConfig::default()).unwrap();
        assert_eq!(s.episodes, 2);
        assert_eq!(s.total_steps, 4);
        assert_eq!(s.per_user["u03"], UserTotals { episodes: 1, steps: 2 });
        assert_eq!(s.errors.len(), 1);
        assert!(s.errors[0].file.ends_with("junk.json"));
    }
}
