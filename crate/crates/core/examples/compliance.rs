//! Score episodes against proxemics thresholds.

use sonata::controller::{ControllerConfig, EpisodeController};
use sonata::driver::drive_to_goal;
use sonata::recorder::{compliance_report, dataset_stats, write_episode, ComplianceConfig, FixedClock};
use sonata::rng::Seed;
use sonata::scene::{CountRange, GenerationRanges};

fn main() -> anyhow::Result<()> {
    let ranges = GenerationRanges {
        humans_static: CountRange::new(3, 4),
        human_human_talking: CountRange::exactly(1),
        ..GenerationRanges::default()
    };
    let config = ComplianceConfig::default();
    let dir = tempfile::tempdir()?;
    for seed in 0..4 {
        let mut c = EpisodeController::new(ControllerConfig::default(), ranges, Seed(seed), None)?;
        drive_to_goal(&mut c, 5000)?;
        let episode = c.episode(0);
        let r = compliance_report(&episode, &config);
        println!(
            "seed {seed}: {} steps, closest human {}, personal space {}, crossings {}, speeding {}",
            r.total_steps,
            r.min_human_distance.map_or("-".into(), |d| format!("{d:.2} m")),
            r.personal_space_violation_steps,
            r.interaction_crossing_steps,
            r.speeding_near_human_steps,
        );
        write_episode(&episode, dir.path(), &FixedClock(1_700_000_000 + seed))?;
    }

    // A stricter limit near people.
    let strict = ComplianceConfig {
        speed_limit: 0.3,
        ..config
    };
    let stats = dataset_stats(dir.path(), &strict)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
