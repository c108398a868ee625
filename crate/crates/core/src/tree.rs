//! Arena-stored crossing trees.
//!
//! Nodes are laid out generation by generation, left to right, so generation
//! `g` occupies a contiguous id range and the children of every node are a
//! contiguous run of the next generation. A node's position within its level
//! is its offset in that range.

use std::fmt;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::branching::sample_w_one;
use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;

pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Up,
    #[serde(rename = "-")]
    Down,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Up => 1,
            Orientation::Down => -1,
        }
    }

    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }

    pub fn from_sign(s: i64) -> Orientation {
        if s > 0 {
            Orientation::Up
        } else {
            Orientation::Down
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Up => "+",
            Orientation::Down => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NodeSlot {
    pub(crate) orientation: Orientation,
    pub(crate) parent: u32,
    pub(crate) first_child: u32,
    pub(crate) child_count: u32,
}

/// Subcrossing orientations for a parent crossing with `z` children:
/// `z/2 - 1` excursion pairs, each `+-` or `-+` with probability 1/2, then
/// the direct pair matching the parent.
pub fn generate_orientations<R: Rng + ?Sized>(
    parent: Orientation,
    z: u32,
    rng: &mut R,
) -> Result<Vec<Orientation>> {
    if z < 2 || !z.is_multiple_of(2) {
        return Err(Error::InvalidZ { z });
    }
    let mut out = Vec::with_capacity(z as usize);
    push_orientations(parent, z, rng, &mut out);
    Ok(out)
}

fn push_orientations<R: Rng + ?Sized>(
    parent: Orientation,
    z: u32,
    rng: &mut R,
    out: &mut Vec<Orientation>,
) {
    let mut bits = 0u64;
    let mut left = 0u32;
    for _ in 0..z / 2 - 1 {
        if left == 0 {
            bits = rng.next_u64();
            left = 64;
        }
        let first = if bits & 1 == 1 {
            Orientation::Up
        } else {
            Orientation::Down
        };
        bits >>= 1;
        left -= 1;
        out.push(first);
        out.push(first.flip());
    }
    out.push(parent);
    out.push(parent);
}

/// Checks that `children` is a valid subcrossing orientation vector for
/// `parent`: excursion pairs followed by the matching direct pair.
pub fn validate_orientation_vector(parent: Orientation, children: &[Orientation]) -> bool {
    let z = children.len();
    if z < 2 || !z.is_multiple_of(2) {
        return false;
    }
    let (excursions, direct) = children.split_at(z - 2);
    excursions.chunks(2).all(|p| p[0] != p[1]) && direct.iter().all(|&o| o == parent)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DurationMode {
    /// Every leaf lasts exactly its mean `mu^level`.
    Mean,
    /// Leaf durations are `mu^level * W` with `W` approximated over `k` generations.
    Sampled { k: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingTree {
    pub(crate) root_level: i32,
    pub(crate) nodes: Vec<NodeSlot>,
    /// `generations[g]` is the id range of generation `g`.
    pub(crate) generations: Vec<Range<u32>>,
    pub(crate) durations: Option<Vec<f64>>,
    pub(crate) start_times: Option<Vec<f64>>,
}

/// Borrowed view of one node.
#[derive(Clone, Copy)]
pub struct CrossingNode<'a> {
    tree: &'a CrossingTree,
    id: NodeId,
}

impl<'a> CrossingNode<'a> {
    fn slot(&self) -> &'a NodeSlot {
        &self.tree.nodes[self.id.index()]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn generation(&self) -> usize {
        self.tree.generation_of(self.id)
    }

    /// Spatial level `n`: the crossing spans `2^n`.
    pub fn level(&self) -> i32 {
        self.tree.root_level - self.generation() as i32
    }

    /// Rank within its generation.
    pub fn position(&self) -> usize {
        let g = self.generation();
        (self.id.0 - self.tree.generations[g].start) as usize
    }

    pub fn orientation(&self) -> Orientation {
        self.slot().orientation
    }

    pub fn parent(&self) -> Option<NodeId> {
        let p = self.slot().parent;
        (p != NO_PARENT).then_some(NodeId(p))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + 'a {
        let s = self.slot();
        (s.first_child..s.first_child + s.child_count).map(NodeId)
    }

    pub fn subcrossing_count(&self) -> u32 {
        self.slot().child_count
    }

    pub fn children_orientations(&self) -> Vec<Orientation> {
        self.children()
            .map(|c| self.tree.nodes[c.index()].orientation)
            .collect()
    }

    pub fn duration(&self) -> Option<f64> {
        self.tree.durations.as_ref().map(|d| d[self.id.index()])
    }

    pub fn start_time(&self) -> Option<f64> {
        self.tree.start_times.as_ref().map(|s| s[self.id.index()])
    }

    /// Rank-adjacent node on the left within the simulated generation. Absent
    /// at the edge of the root crossing.
    pub fn left_neighbor(&self) -> Option<NodeId> {
        let r = &self.tree.generations[self.generation()];
        (self.id.0 > r.start).then(|| NodeId(self.id.0 - 1))
    }

    pub fn right_neighbor(&self) -> Option<NodeId> {
        let r = &self.tree.generations[self.generation()];
        (self.id.0 + 1 < r.end).then(|| NodeId(self.id.0 + 1))
    }
}

fn expected_nodes(mu: f64, depth: u32) -> f64 {
    (0..=depth).map(|g| mu.powi(g as i32)).sum()
}

/// Expand a crossing tree `depth` generations below a level-0 root.
pub fn expand_tree<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    root_orientation: Orientation,
    depth: u32,
    rng: &mut R,
    node_budget: usize,
) -> Result<CrossingTree> {
    let expected = expected_nodes(dist.mu(), depth);
    if expected > node_budget as f64 {
        return Err(Error::NodeBudgetExceeded {
            nodes: expected,
            budget: node_budget,
        });
    }
    let mut nodes = vec![NodeSlot {
        orientation: root_orientation,
        parent: NO_PARENT,
        // a leaf's first_child is the arena length
        first_child: 1,
        child_count: 0,
    }];
    #[allow(clippy::single_range_in_vec_init)] // one range per generation, grown below
    let mut generations = vec![0..1u32];
    let mut buf = Vec::new();
    for g in 0..depth as usize {
        let range = generations[g].clone();
        let start = nodes.len() as u32;
        for id in range {
            let z = dist.sample_z(rng);
            let parent_or = nodes[id as usize].orientation;
            buf.clear();
            push_orientations(parent_or, z, rng, &mut buf);
            let first = nodes.len() as u32;
            nodes[id as usize].first_child = first;
            nodes[id as usize].child_count = z;
            nodes.extend(buf.iter().map(|&o| NodeSlot {
                orientation: o,
                parent: id,
                first_child: 0,
                child_count: 0,
            }));
            if nodes.len() > node_budget {
                return Err(Error::NodeBudgetExceeded {
                    nodes: nodes.len() as f64,
                    budget: node_budget,
                });
            }
        }
        let end = nodes.len() as u32;
        for slot in &mut nodes[start as usize..] {
            slot.first_child = end;
        }
        generations.push(start..end);
    }
    Ok(CrossingTree {
        root_level: 0,
        nodes,
        generations,
        durations: None,
        start_times: None,
    })
}

impl CrossingTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn root_level(&self) -> i32 {
        self.root_level
    }

    /// Number of generations below the root.
    pub fn depth(&self) -> u32 {
        (self.generations.len() - 1) as u32
    }

    pub fn leaf_level(&self) -> i32 {
        self.root_level - self.depth() as i32
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> CrossingNode<'_> {
        assert!(id.index() < self.nodes.len(), "node id out of range");
        CrossingNode { tree: self, id }
    }

    pub fn nodes(&self) -> impl Iterator<Item = CrossingNode<'_>> {
        (0..self.nodes.len() as u32).map(move |i| self.node(NodeId(i)))
    }

    /// Ids of generation `g` in left-to-right order.
    pub fn generation(&self, g: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.generations[g].clone().map(NodeId)
    }

    pub fn generation_len(&self, g: usize) -> usize {
        self.generations[g].len()
    }

    pub fn generation_of(&self, id: NodeId) -> usize {
        self.generations.partition_point(|r| r.end <= id.0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.generation(self.depth() as usize)
    }

    pub fn has_durations(&self) -> bool {
        self.durations.is_some()
    }

    pub fn durations(&self) -> Option<&[f64]> {
        self.durations.as_deref()
    }

    pub fn start_times(&self) -> Option<&[f64]> {
        self.start_times.as_deref()
    }

    /// Assign leaf durations and propagate sums and start times upward.
    pub fn assign_durations<R: Rng + ?Sized>(
        &mut self,
        dist: &OffspringDistribution,
        mode: DurationMode,
        rng: &mut R,
    ) {
        let n = self.nodes.len();
        let mut dur = vec![0.0; n];
        let mut start = vec![0.0; n];
        let scale = dist.mu().powi(self.leaf_level());
        let leaves = self.generations[self.depth() as usize].clone();
        let mut t = 0.0;
        for id in leaves {
            let d = match mode {
                DurationMode::Mean => scale,
                DurationMode::Sampled { k } => scale * sample_w_one(dist, k, rng),
            };
            dur[id as usize] = d;
            start[id as usize] = t;
            t += d;
        }
        for g in (0..self.depth() as usize).rev() {
            for id in self.generations[g].clone() {
                let s = &self.nodes[id as usize];
                let kids = s.first_child as usize..(s.first_child + s.child_count) as usize;
                dur[id as usize] = dur[kids.clone()].iter().sum();
                start[id as usize] = start[kids.start];
            }
        }
        self.durations = Some(dur);
        self.start_times = Some(start);
    }

    /// Check every structural invariant; reports the first violation.
    pub fn validate(&self) -> std::result::Result<(), TreeViolation> {
        let bad = |id: u32, reason: String| TreeViolation {
            node: NodeId(id),
            reason,
        };
        if self.nodes.is_empty() {
            return Err(bad(0, "empty tree".into()));
        }
        if self.nodes[0].parent != NO_PARENT {
            return Err(bad(0, "root has a parent".into()));
        }
        if self.generations.first() != Some(&(0..1)) {
            return Err(bad(0, "generation 0 must be exactly the root".into()));
        }
        for w in self.generations.windows(2) {
            if w[0].end != w[1].start || w[1].is_empty() {
                return Err(bad(w[1].start, "generations are not contiguous".into()));
            }
        }
        if self.generations.last().map(|r| r.end as usize) != Some(self.nodes.len()) {
            return Err(bad(0, "generation index does not cover the arena".into()));
        }
        let depth = self.depth() as usize;
        for (g, range) in self.generations.iter().enumerate() {
            let mut expected_child = if g < depth {
                self.generations[g + 1].start
            } else {
                range.end
            };
            for id in range.clone() {
                let s = &self.nodes[id as usize];
                if g == depth {
                    if s.child_count != 0 {
                        return Err(bad(id, "leaf generation node has children".into()));
                    }
                    continue;
                }
                if s.first_child != expected_child {
                    return Err(bad(id, "children are not contiguous in order".into()));
                }
                expected_child += s.child_count;
                let kids: Vec<Orientation> = (s.first_child..s.first_child + s.child_count)
                    .map(|c| self.nodes[c as usize].orientation)
                    .collect();
                if !validate_orientation_vector(s.orientation, &kids) {
                    return Err(bad(
                        id,
                        format!("invalid subcrossing orientations (z = {})", kids.len()),
                    ));
                }
                for c in s.first_child..s.first_child + s.child_count {
                    if self.nodes[c as usize].parent != id {
                        return Err(bad(c, format!("parent link should be {id}")));
                    }
                }
            }
            if g < depth && expected_child != self.generations[g + 1].end {
                return Err(bad(range.start, "next generation has orphan nodes".into()));
            }
        }
        match (&self.durations, &self.start_times) {
            (None, None) => {}
            (Some(dur), Some(start)) => {
                if start[0] != 0.0 {
                    return Err(bad(0, "root start time must be 0".into()));
                }
                for (id, s) in self.nodes.iter().enumerate() {
                    if !(dur[id] >= 0.0) {
                        return Err(bad(id as u32, "negative duration".into()));
                    }
                    if s.child_count > 0 {
                        let kids = s.first_child as usize..(s.first_child + s.child_count) as usize;
                        let sum: f64 = dur[kids.clone()].iter().sum();
                        if (dur[id] - sum).abs() > 1e-12 * dur[id] {
                            return Err(bad(
                                id as u32,
                                "duration is not the sum of its children".into(),
                            ));
                        }
                        if start[kids.start] != start[id] {
                            return Err(bad(
                                id as u32,
                                "start time differs from first child".into(),
                            ));
                        }
                    }
                }
                let leaves = self.generations[depth].clone();
                for id in leaves.start + 1..leaves.end {
                    let (p, c) = (id as usize - 1, id as usize);
                    if !(start[c] > start[p]) {
                        return Err(bad(id, "leaf start times not strictly increasing".into()));
                    }
                    let gap = (start[p] + dur[p] - start[c]).abs();
                    if gap > 1e-9 * start[c].max(dur[0]) {
                        return Err(bad(
                            id,
                            "leaf does not start where its predecessor ends".into(),
                        ));
                    }
                }
            }
            _ => {
                return Err(bad(
                    0,
                    "durations and start times must be set together".into(),
                ))
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        root_level: i32,
        nodes: Vec<NodeSlot>,
        generations: Vec<Range<u32>>,
        durations: Option<Vec<f64>>,
        start_times: Option<Vec<f64>>,
    ) -> CrossingTree {
        CrossingTree {
            root_level,
            nodes,
            generations,
            durations,
            start_times,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeViolation {
    pub node: NodeId,
    pub reason: String,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: {}", self.node.0, self.reason)
    }
}

impl std::error::Error for TreeViolation {}
