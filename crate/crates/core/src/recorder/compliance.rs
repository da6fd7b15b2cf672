use serde::{Deserialize, Serialize};

use super::Episode;
use crate::world::{segment_distance, WorldSnapshot};

/// Proxemics thresholds, in meters and meters per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComplianceConfig {
    pub personal_space: f64,
    pub interaction_distance: f64,
    pub speed_limit: f64,
    pub speed_radius: f64,
}

impl Default for ComplianceConfig {
    fn default() -> Self {
        ComplianceConfig {
            personal_space: 0.9,
            interaction_distance: 0.4,
            speed_limit: 0.6,
            speed_radius: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    /// Smallest robot-to-human center distance; `None` (null) without humans.
    pub min_human_distance: Option<f64>,
    pub personal_space_violation_steps: usize,
    pub interaction_crossing_steps: usize,
    pub speeding_near_human_steps: usize,
    pub total_steps: usize,
}

/// Per step: the robot pose is the one reached by that step's command, and
/// the speed is the commanded planar speed `|(advance, lateral)|` after
/// scaling the label by the episode's caps.
pub fn compliance_report(episode: &Episode, config: &ComplianceConfig) -> ComplianceReport {
    let caps = episode.metadata.caps;
    let mut report = ComplianceReport {
        min_human_distance: None,
        personal_space_violation_steps: 0,
        interaction_crossing_steps: 0,
        speeding_near_human_steps: 0,
        total_steps: episode.steps.len(),
    };
    for step in &episode.steps {
        let s = &step.snapshot;
        let nearest = nearest_human(s);
        if let Some(d) = nearest {
            report.min_human_distance = Some(report.min_human_distance.map_or(d, |m| m.min(d)));
            if d < config.personal_space {
                report.personal_space_violation_steps += 1;
            }
            let speed = (step.label.advance() * caps.advance).hypot(step.label.lateral() * caps.lateral);
            if d < config.speed_radius && speed > config.speed_limit {
                report.speeding_near_human_steps += 1;
            }
        }
        if crosses_interaction(s, config.interaction_distance) {
            report.interaction_crossing_steps += 1;
        }
    }
    report
}

fn nearest_human(s: &WorldSnapshot) -> Option<f64> {
    let robot = s.robot.position();
    s.humans
        .iter()
        .map(|h| robot.distance(h.pose.position()))
        .min_by(f64::total_cmp)
}

fn crosses_interaction(s: &WorldSnapshot, threshold: f64) -> bool {
    let robot = s.robot.position();
    s.interactions.iter().any(|i| {
        match (s.entity_position(i.entity1_id), s.entity_position(i.entity2_id)) {
            (Some(a), Some(b)) => segment_distance(robot, a, b) < threshold,
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recorder::episode::tests::tiny_episode;

    #[test]
    fn empty_room_scores_zero() {
        let r = compliance_report(&tiny_episode(), &ComplianceConfig::default());
        assert_eq!(r.min_human_distance, None);
        assert_eq!(r.personal_space_violation_steps, 0);
        assert_eq!(r.interaction_crossing_steps, 0);
        assert_eq!(r.speeding_near_human_steps, 0);
        assert_eq!(r.total_steps, 2);
        let json = serde_json::to_value(r).unwrap();
        assert!(json["min_human_distance"].is_null());
    }
}
