//! NDJSON persistence for crossing trees: one node per line in arena order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{CrossingTree, NodeSlot, Orientation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u32,
    pub parent_id: Option<u32>,
    pub level: i32,
    pub position: u32,
    pub orientation: Orientation,
    pub z: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time: Option<f64>,
}

pub fn write_tree<W: Write>(tree: &CrossingTree, mut w: W) -> Result<()> {
    for node in tree.nodes() {
        let rec = NodeRecord {
            id: node.id().0,
            parent_id: node.parent().map(|p| p.0),
            level: node.level(),
            position: node.position() as u32,
            orientation: node.orientation(),
            z: node.subcrossing_count(),
            duration: node.duration(),
            start_time: node.start_time(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn serialize_tree(tree: &CrossingTree) -> Vec<u8> {
    let mut out = Vec::with_capacity(tree.len() * 96);
    write_tree(tree, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn deserialize_tree(bytes: &[u8]) -> Result<CrossingTree> {
    read_tree(bytes)
}

pub fn read_tree<R: BufRead>(r: R) -> Result<CrossingTree> {
    let malformed = |line: usize, reason: String| Error::MalformedRecord { line, reason };
    let mut nodes: Vec<NodeSlot> = Vec::new();
    let mut generations: Vec<std::ops::Range<u32>> = Vec::new();
    let mut declared_z: Vec<u32> = Vec::new();
    let mut durations: Vec<f64> = Vec::new();
    let mut starts: Vec<f64> = Vec::new();
    let mut timed: Option<bool> = None;
    let mut root_level = 0i32;
    let mut last_parent: Option<u32> = None;
    let mut line_no = 0usize;

    for line in r.lines() {
        line_no += 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: NodeRecord =
            serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
        let id = nodes.len() as u32;
        if rec.id != id {
            return Err(malformed(
                line_no,
                format!("expected id {id}, found {}", rec.id),
            ));
        }
        match (id, rec.parent_id) {
            (0, None) => {
                root_level = rec.level;
                generations.push(0..1);
            }
            (0, Some(_)) => return Err(malformed(line_no, "first record must be the root".into())),
            (_, None) => return Err(malformed(line_no, "only the root may lack a parent".into())),
            (_, Some(p)) => {
                if p >= id {
                    return Err(malformed(
                        line_no,
                        format!("parent {p} does not precede node"),
                    ));
                }
                if last_parent.is_some_and(|lp| p < lp) {
                    return Err(malformed(line_no, "children out of parent order".into()));
                }
                let parent = &mut nodes[p as usize];
                if parent.child_count == 0 {
                    parent.first_child = id;
                } else if last_parent != Some(p) {
                    return Err(malformed(
                        line_no,
                        format!("children of {p} are not contiguous"),
                    ));
                }
                parent.child_count += 1;
                last_parent = Some(p);
                let g = (root_level - rec.level) as i64;
                let parent_g = generations.partition_point(|r| r.end <= p) as i64;
                if g != parent_g + 1 {
                    return Err(malformed(
                        line_no,
                        format!("level {} inconsistent with parent", rec.level),
                    ));
                }
                let g = g as usize;
                if g == generations.len() {
                    generations.push(id..id + 1);
                } else if g + 1 == generations.len() {
                    generations[g].end = id + 1;
                } else {
                    return Err(malformed(line_no, "generations out of order".into()));
                }
            }
        }
        let g = generations.len() - 1;
        if rec.position != id - generations[g].start {
            return Err(malformed(
                line_no,
                format!("position {} does not match rank", rec.position),
            ));
        }
        match (rec.duration, rec.start_time, timed) {
            (Some(d), Some(s), None | Some(true)) => {
                timed = Some(true);
                durations.push(d);
                starts.push(s);
            }
            (None, None, None | Some(false)) => timed = Some(false),
            _ => {
                return Err(malformed(
                    line_no,
                    "duration fields must be present on all records or none".into(),
                ))
            }
        }
        declared_z.push(rec.z);
        nodes.push(NodeSlot {
            orientation: rec.orientation,
            parent: rec.parent_id.unwrap_or(u32::MAX),
            first_child: 0,
            child_count: 0,
        });
    }
    if nodes.is_empty() {
        return Err(malformed(line_no.max(1), "empty stream".into()));
    }
    let end = nodes.len() as u32;
    for (i, (slot, &z)) in nodes.iter_mut().zip(&declared_z).enumerate() {
        if slot.child_count != z {
            return Err(malformed(
                i + 1,
                format!("declared z = {z} but {} children follow", slot.child_count),
            ));
        }
        if slot.child_count == 0 {
            slot.first_child = end;
        }
    }
    let (durations, starts) = if timed == Some(true) {
        (Some(durations), Some(starts))
    } else {
        (None, None)
    };
    Ok(CrossingTree::from_parts(
        root_level,
        nodes,
        generations,
        durations,
        starts,
    ))
}
