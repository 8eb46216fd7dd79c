use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId, Properties, PropertyValue};

pub const SNAPSHOT_VERSION: &str = "kgchat-snapshot-1";

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: String,
    dimension: usize,
    nodes: Vec<SnapshotNode>,
    edges: Vec<SnapshotEdge>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotNode {
    id: u64,
    label: String,
    properties: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotEdge {
    id: u64,
    source: u64,
    target: u64,
    kind: String,
}

pub fn save_snapshot(graph: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let doc = SnapshotFile {
        version: SNAPSHOT_VERSION.to_string(),
        dimension: graph.dimension(),
        nodes: graph
            .nodes()
            .iter()
            .map(|n| SnapshotNode {
                id: n.id.0,
                label: n.label.as_str().to_string(),
                properties: n.properties.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| SnapshotEdge { id: e.id.0, source: e.source.0, target: e.target.0, kind: e.kind.clone() })
            .collect(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| GraphError::Format(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let reader = BufReader::new(File::open(path)?);
    let doc: SnapshotFile = serde_json::from_reader(reader).map_err(|e| GraphError::Format(e.to_string()))?;
    from_document(doc)
}

/// Parses a snapshot held in memory.
pub fn snapshot_from_str(text: &str) -> Result<Graph, GraphError> {
    let doc: SnapshotFile = serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
    from_document(doc)
}

fn from_document(doc: SnapshotFile) -> Result<Graph, GraphError> {
    if doc.version != SNAPSHOT_VERSION {
        return Err(GraphError::Format(format!(
            "unsupported version {:?}, expected {SNAPSHOT_VERSION:?}",
            doc.version
        )));
    }
    let mut graph = Graph::new(doc.dimension);
    for (i, node) in doc.nodes.into_iter().enumerate() {
        if node.id != i as u64 + 1 {
            return Err(GraphError::Format(format!("node ids must be 1..N in order, found {} at position {}", node.id, i + 1)));
        }
        let properties = node
            .properties
            .iter()
            .map(|(k, v)| PropertyValue::from_json(v).map(|p| (k.clone(), p)))
            .collect::<Result<Properties, _>>()
            .map_err(|e| GraphError::Format(format!("node {}: {e}", node.id)))?;
        graph
            .create_node(&node.label, properties)
            .map_err(|e| GraphError::Format(format!("node {}: {e}", node.id)))?;
    }
    for (i, edge) in doc.edges.into_iter().enumerate() {
        if edge.id != i as u64 + 1 {
            return Err(GraphError::Format(format!("edge ids must be 1..N in order, found {} at position {}", edge.id, i + 1)));
        }
        for end in [edge.source, edge.target] {
            if graph.get_node(NodeId(end)).is_none() {
                return Err(GraphError::Format(format!("edge {} references missing node {end}", edge.id)));
            }
        }
        graph
            .create_edge(NodeId(edge.source), NodeId(edge.target), &edge.kind)
            .map_err(|e| GraphError::Format(format!("edge {}: {e}", edge.id)))?;
    }
    Ok(graph)
}
