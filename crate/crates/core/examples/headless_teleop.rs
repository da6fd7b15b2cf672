//! Record an episode without a UI: joystick events in, dataset file out.

use sonata::bus::topics::JoystickMsg;
use sonata::controller::{ControllerConfig, Decision, EpisodeController, Phase};
use sonata::driver::Autopilot;
use sonata::recorder::{load_episode, SystemClock};
use sonata::rng::Seed;
use sonata::scene::GenerationRanges;

fn main() -> anyhow::Result<()> {
    let config = ControllerConfig {
        user_id: "demo".into(),
        ..ControllerConfig::default()
    };
    let mut controller = EpisodeController::new(config, GenerationRanges::default(), Seed(21), None)?;
    let mut pilot = Autopilot::plan(controller.snapshot(), &controller.config().scene)?;
    println!("planned {} waypoints", pilot.path().len());

    // The autopilot stands in for a person: it emits one event per axis
    // per tick, exactly what the teleoperation page sends.
    while controller.phase() == Phase::Running {
        let label = pilot.next_label(controller.snapshot());
        for (axis, value) in label.0.iter().enumerate() {
            controller.apply_input(JoystickMsg {
                axis_id: axis as u32,
                value: *value,
            });
        }
        let step = controller.tick()?;
        if step.frame_id % 20 == 0 {
            println!("frame {:4}  goal distance {:.2} m", step.frame_id, step.goal_distance);
        }
        anyhow::ensure!(step.frame_id < 5000, "goal not reached");
    }

    let dir = tempfile::tempdir()?;
    let path = controller
        .finish(Decision::Save, dir.path(), &SystemClock)?
        .expect("save returns the file");
    let episode = load_episode(&path)?;
    println!(
        "saved {} with {} steps",
        path.file_name().unwrap().to_string_lossy(),
        episode.steps.len()
    );
    Ok(())
}
