//! Turn episodes into temporal graphs with 42-column node features.

use sonata::controller::{ControllerConfig, EpisodeController};
use sonata::driver::drive_to_goal;
use sonata::graph::{
    episode_to_samples, export_graph_dataset, import_graph_dataset, schema_path, EdgeRelation, FEATURE_NAMES,
};
use sonata::rng::Seed;
use sonata::scene::GenerationRanges;

fn main() -> anyhow::Result<()> {
    let mut samples = Vec::new();
    for seed in 0..3 {
        let mut c = EpisodeController::new(ControllerConfig::default(), GenerationRanges::default(), Seed(seed), None)?;
        drive_to_goal(&mut c, 5000)?;
        samples.extend(episode_to_samples(&c.episode(0), 3, 5)?);
    }

    let s = &samples[0];
    println!("{} samples; the first has {} nodes and {} edges", samples.len(), s.nodes.len(), s.edges.len());
    for r in EdgeRelation::ALL {
        println!("  {r:?}: {}", s.count_relation(r));
    }
    let goal = s
        .nodes
        .iter()
        .position(|n| n.node_type == sonata::graph::NodeType::Goal && n.frame_index == 0)
        .unwrap();
    for (name, v) in FEATURE_NAMES.iter().zip(&s.features[goal]).filter(|(_, v)| **v != 0.0) {
        println!("  goal {name} = {v:.4}");
    }
    println!("label {:?}", s.label.0);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("graphs.jsonl");
    export_graph_dataset(&samples, &path)?;
    let back = import_graph_dataset(&path)?;
    assert_eq!(back.len(), samples.len());
    println!("exported {} lines, schema at {}", back.len(), schema_path(&path).file_name().unwrap().to_string_lossy());
    Ok(())
}
