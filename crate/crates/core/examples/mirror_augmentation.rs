//! Double a dataset by reflecting episodes across the world x-axis.

use sonata::canonical;
use sonata::controller::{ControllerConfig, EpisodeController};
use sonata::driver::drive_to_goal;
use sonata::graph::{episode_to_samples, mirror_feature_row};
use sonata::recorder::mirror_episode;
use sonata::rng::Seed;
use sonata::scene::GenerationRanges;

fn main() -> anyhow::Result<()> {
    let mut c = EpisodeController::new(ControllerConfig::default(), GenerationRanges::default(), Seed(8), None)?;
    drive_to_goal(&mut c, 5000)?;
    let episode = c.episode(0).canonical();
    let mirrored = mirror_episode(&episode);

    let first = &episode.steps[0];
    let m = &mirrored.steps[0];
    println!("robot   {:?}\nmirror  {:?}", first.snapshot.robot, m.snapshot.robot);
    println!("label   {:?}\nmirror  {:?}", first.label.0, m.label.0);

    // Reflecting twice gives back the same bytes.
    let twice = mirror_episode(&mirrored);
    assert_eq!(canonical::to_vec(&twice)?, canonical::to_vec(&episode)?);
    println!("mirror twice: identical");

    // Features commute with the reflection.
    let a = episode_to_samples(&episode, 3, 10)?;
    let b = episode_to_samples(&mirrored, 3, 10)?;
    let worst = a
        .iter()
        .zip(&b)
        .flat_map(|(sa, sb)| sa.features.iter().zip(&sb.features))
        .flat_map(|(ra, rb)| {
            mirror_feature_row(ra)
                .into_iter()
                .zip(rb.iter())
                .map(|(x, y)| (x - y).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    println!("{} samples, largest feature mismatch {worst:e}", a.len());
    Ok(())
}
