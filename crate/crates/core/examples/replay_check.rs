//! Re-simulate recorded episodes and locate any divergence.

use sonata::controller::{ControllerConfig, EpisodeController};
use sonata::driver::drive_to_goal;
use sonata::recorder::{load_episode, write_episode, FixedClock};
use sonata::replay::replay_episode;
use sonata::rng::Seed;
use sonata::scene::GenerationRanges;

fn main() -> anyhow::Result<()> {
    let mut c = EpisodeController::new(ControllerConfig::default(), GenerationRanges::default(), Seed(4), None)?;
    drive_to_goal(&mut c, 5000)?;
    let dir = tempfile::tempdir()?;
    let path = write_episode(&c.episode(1_700_000_000), dir.path(), &FixedClock(1_700_000_000))?;

    let episode = load_episode(&path)?;
    println!("recorded: {}", replay_episode(&episode)?);

    // Nudge one coordinate of one stored frame.
    let mut tampered = episode.clone();
    let k = tampered.steps.len() / 2;
    tampered.steps[k].snapshot.robot.y += 1e-3;
    println!("tampered: {}", replay_episode(&tampered)?);

    // A mirrored episode replays in the mirrored scene.
    println!("mirrored: {}", replay_episode(&episode.mirrored())?);
    Ok(())
}
