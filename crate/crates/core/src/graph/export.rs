use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{
    EdgeRelation, GraphError, GraphSample, NodeType, FEATURE_LEN, FEATURE_NAMES, GOAL_BLOCK,
    NORM_DISTANCE, OBJECT_BLOCK, ONE_HOT_FRAME, ONE_HOT_TYPE, PERSON_BLOCK, ROOM_BLOCK, TIME_BLOCK,
    WALL_BLOCK,
};
use crate::canonical;

/// `<dataset>.schema.json` next to the dataset.
pub fn schema_path(dataset: &Path) -> PathBuf {
    let mut name = dataset.as_os_str().to_owned();
    name.push(".schema.json");
    PathBuf::from(name)
}

/// Column table and vocabularies of the exported dataset.
pub fn schema() -> Value {
    let block = |name: &str, r: std::ops::Range<usize>, doc: &str| {
        json!({"name": name, "start": r.start, "end": r.end, "doc": doc})
    };
    json!({
        "format": "one canonical JSON record per line: {nodes, edges, features, label}",
        "feature_len": FEATURE_LEN,
        "columns": FEATURE_NAMES.as_slice(),
        "blocks": [
            block("OH_t", ONE_HOT_TYPE, "one-hot node type"),
            block("OH_f", ONE_HOT_FRAME, "one-hot frame index, 0 = newest"),
            block("ts", TIME_BLOCK, "min(t / 100 s, 1), min(frame_id / 1000, 1)"),
            block("p", PERSON_BLOCK, "human: x, y, sin, cos of relative heading, vx, vy, vangle, distance"),
            block("o", OBJECT_BLOCK, "object: x, y, sin, cos, sideX, sideY, distance, half-diagonal"),
            block("r", ROOM_BLOCK, "room: humans / 10, objects / 10, walls / 10, area / 100 m^2"),
            block("w", WALL_BLOCK, "wall: x1, y1, x2, y2, sin, cos of direction, length, distance"),
            block("g", GOAL_BLOCK, "goal: x, y, distance, reached"),
        ],
        "normalization": {
            "frame": "robot frame of the newest frame in the window: x forward, y left",
            "distance_m": NORM_DISTANCE,
            "velocity": "divided by the advance, lateral and rotation speed caps",
        },
        "node_types": NodeType::ALL.iter().map(|t| json!({"name": t, "index": t.index()})).collect::<Vec<_>>(),
        "relations": EdgeRelation::ALL,
        "label": ["advance", "lateral", "rotation"],
    })
}

/// Write samples as JSON lines plus the sidecar schema.
pub fn export_graph_dataset(samples: &[GraphSample], path: &Path) -> Result<(), GraphError> {
    let io = |e: std::io::Error| GraphError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut out = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for (i, s) in samples.iter().enumerate() {
        let line = canonical::to_string(s).map_err(|e| GraphError::Record {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.write_all(line.as_bytes()).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)?;
    let schema = serde_json::to_string_pretty(&schema()).expect("schema is plain JSON");
    std::fs::write(schema_path(path), schema + "\n").map_err(io)?;
    Ok(())
}

/// Read a dataset back; every feature row must have [`FEATURE_LEN`] entries.
pub fn import_graph_dataset(path: &Path) -> Result<Vec<GraphSample>, GraphError> {
    let io = |e: std::io::Error| GraphError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        let record = |message: String| GraphError::Record {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        let sample: GraphSample = canonical::from_slice(line.as_bytes()).map_err(|e| record(e.to_string()))?;
        if sample.features.len() != sample.nodes.len() {
            return Err(record(format!(
                "{} feature rows for {} nodes",
                sample.features.len(),
                sample.nodes.len()
            )));
        }
        if let Some(row) = sample.features.iter().position(|r| r.len() != FEATURE_LEN) {
            return Err(record(format!("feature row {row} does not have {FEATURE_LEN} entries")));
        }
        out.push(sample);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Label;

    fn sample() -> GraphSample {
        GraphSample {
            nodes: vec![super::super::GraphNode {
                id: 0,
                node_type: NodeType::Room,
                frame_index: 0,
                entity_id: None,
            }],
            edges: vec![super::super::GraphEdge {
                src: 0,
                dst: 0,
                relation: EdgeRelation::SelfLoop,
            }],
            features: vec![{
                let mut r = vec![0.0; FEATURE_LEN];
                r[4] = 1.0;
                r[5] = 1.0;
                r[29] = 1.0 / 3.0;
                r
            }],
            label: Label([0.5, -0.25, 1.0]),
        }
    }

    #[test]
    fn round_trip_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.jsonl");
        let samples = vec![sample(), sample()];
        export_graph_dataset(&samples, &path).unwrap();
        let back = import_graph_dataset(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], sample().canonical());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(&path)).unwrap()).unwrap();
        assert_eq!(schema["columns"].as_array().unwrap().len(), FEATURE_LEN);
        assert_eq!(schema["relations"][4], "temporal");
    }

    #[test]
    fn short_row_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let mut s = sample();
        s.features[0].pop();
        std::fs::write(&path, canonical::to_string(&s).unwrap() + "\n").unwrap();
        let err = import_graph_dataset(&path).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
