//! The adaptive profile tree: three node variants, structural mutation
//! primitives (node creation, pointer switching, leaf promotion), and
//! structure statistics.
//!
//! Nodes live in an arena and are addressed by [`NodeId`]. All mutations
//! are in-place or splice-style, so a `NodeId` handed out once stays
//! valid for the lifetime of the tree: promoting a leaf to an internal
//! profile node reuses its id, and a pointer switch only rewrites the
//! parent's child slot.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::metric::{distance, FeatureVector, MetricKind};

/// Unique identity of one tracked object profile. Allocated monotonically,
/// never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProfileLabel(u64);

impl ProfileLabel {
    pub fn new(id: u64) -> Self {
        ProfileLabel(id)
    }

    pub fn id(&self) -> u64 {
        self.0
    }
}

impl fmt::Display for ProfileLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arena index of one tree node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(&self) -> usize {
        self.0
    }
}

/// Which child slot of a parent node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A child-reference location inside the tree: either the root slot or
/// one side of an internal node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Root,
    Child { parent: NodeId, side: Side },
}

/// The three node variants.
///
/// Internal nodes route by two pivots. Internal profile nodes do the
/// same but additionally root a subtree that all belongs to one label.
/// Leaf profile nodes carry a representative vector, the label, and a
/// bounded container of stored metadata vectors.
#[derive(Clone, Debug)]
pub enum Node {
    Internal {
        p1: FeatureVector,
        p2: FeatureVector,
        left: NodeId,
        right: NodeId,
    },
    InternalProfile {
        p1: FeatureVector,
        p2: FeatureVector,
        lab: ProfileLabel,
        rep: FeatureVector,
        left: NodeId,
        right: NodeId,
    },
    LeafProfile {
        rep: FeatureVector,
        lab: ProfileLabel,
        container: Vec<FeatureVector>,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::LeafProfile { .. })
    }

    /// Routing pivots of a two-pivot node.
    pub fn pivots(&self) -> Option<(&FeatureVector, &FeatureVector)> {
        match self {
            Node::Internal { p1, p2, .. } | Node::InternalProfile { p1, p2, .. } => {
                Some((p1, p2))
            }
            Node::LeafProfile { .. } => None,
        }
    }

    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match self {
            Node::Internal { left, right, .. } | Node::InternalProfile { left, right, .. } => {
                Some((*left, *right))
            }
            Node::LeafProfile { .. } => None,
        }
    }

    pub fn label(&self) -> Option<ProfileLabel> {
        match self {
            Node::Internal { .. } => None,
            Node::InternalProfile { lab, .. } | Node::LeafProfile { lab, .. } => Some(*lab),
        }
    }
}

/// Structure statistics gathered by full traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeStats {
    /// Edges on the longest root-to-leaf path; 0 for an empty tree or a
    /// lone leaf.
    pub height: usize,
    pub internal_count: usize,
    pub internal_profile_count: usize,
    pub leaf_count: usize,
    /// Distinct labels present in the tree.
    pub profile_count: usize,
    /// Total vectors stored in leaf containers.
    pub indexed_vectors: usize,
}

/// Arena-backed profile tree.
#[derive(Clone, Debug)]
pub struct ProfileTree {
    metric: MetricKind,
    nodes: Vec<Node>,
    root: Option<NodeId>,
}

impl ProfileTree {
    pub fn new(metric: MetricKind) -> Self {
        ProfileTree {
            metric,
            nodes: Vec::new(),
            root: None,
        }
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Number of nodes ever allocated (the arena never shrinks).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    /// Panics on a dangling id; internal callers hold valid ids.
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.0]
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    /// Creates a leaf profile node. The container may be empty.
    pub fn new_leaf_profile(
        &mut self,
        rep: FeatureVector,
        lab: ProfileLabel,
        container: Vec<FeatureVector>,
    ) -> NodeId {
        self.push(Node::LeafProfile {
            rep,
            lab,
            container,
        })
    }

    /// Creates a two-pivot node: plain internal when `profile` is absent,
    /// internal profile node otherwise. Rejects coincident pivots.
    pub fn new_internal(
        &mut self,
        p1: FeatureVector,
        p2: FeatureVector,
        left: NodeId,
        right: NodeId,
        profile: Option<(ProfileLabel, FeatureVector)>,
    ) -> Result<NodeId> {
        if distance(&p1, &p2, self.metric) <= 0.0 {
            return Err(Error::DegeneratePivot);
        }
        if left.0 >= self.nodes.len() || right.0 >= self.nodes.len() {
            return Err(Error::Structural("internal node child does not exist".into()));
        }
        let node = match profile {
            None => Node::Internal {
                p1,
                p2,
                left,
                right,
            },
            Some((lab, rep)) => Node::InternalProfile {
                p1,
                p2,
                lab,
                rep,
                left,
                right,
            },
        };
        Ok(self.push(node))
    }

    /// Installs `id` as the root of an empty tree.
    pub fn install_root(&mut self, id: NodeId) -> Result<()> {
        if self.root.is_some() {
            return Err(Error::Structural("tree already has a root".into()));
        }
        if id.0 >= self.nodes.len() {
            return Err(Error::Structural("root candidate does not exist".into()));
        }
        self.root = Some(id);
        Ok(())
    }

    /// Makes `slot` address `replacement` and returns the node previously
    /// addressed. This is a splice, not a delete: the caller is expected
    /// to have linked the displaced node somewhere under `replacement`.
    pub fn pointer_switch(&mut self, slot: Slot, replacement: NodeId) -> Result<NodeId> {
        if replacement.0 >= self.nodes.len() {
            return Err(Error::Structural("replacement node does not exist".into()));
        }
        let displaced = match slot {
            Slot::Root => {
                let old = self
                    .root
                    .ok_or_else(|| Error::Structural("root slot of an empty tree".into()))?;
                self.root = Some(replacement);
                old
            }
            Slot::Child { parent, side } => {
                let node = self
                    .nodes
                    .get_mut(parent.0)
                    .ok_or_else(|| Error::Structural("dangling parent in slot".into()))?;
                let child = match node {
                    Node::Internal { left, right, .. }
                    | Node::InternalProfile { left, right, .. } => match side {
                        Side::Left => left,
                        Side::Right => right,
                    },
                    Node::LeafProfile { .. } => {
                        return Err(Error::Structural("slot parent is a leaf".into()))
                    }
                };
                let old = *child;
                *child = replacement;
                old
            }
        };
        #[cfg(debug_assertions)]
        debug_assert!(
            self.reachable_from(replacement, displaced),
            "pointer switch dropped the displaced node"
        );
        Ok(displaced)
    }

    #[cfg(debug_assertions)]
    fn reachable_from(&self, from: NodeId, target: NodeId) -> bool {
        let mut stack = vec![from];
        while let Some(id) = stack.pop() {
            if id == target {
                return true;
            }
            if let Some((l, r)) = self.nodes[id.0].children() {
                stack.push(l);
                stack.push(r);
            }
        }
        false
    }

    /// Turns a leaf profile node into an internal profile node, in place,
    /// keeping its label. The container is discarded; its contents are
    /// expected to live on in the two children.
    pub fn promote_to_internal_profile(
        &mut self,
        leaf: NodeId,
        p1: FeatureVector,
        p2: FeatureVector,
        rep: FeatureVector,
        left: NodeId,
        right: NodeId,
    ) -> Result<()> {
        if distance(&p1, &p2, self.metric) <= 0.0 {
            return Err(Error::DegeneratePivot);
        }
        if left.0 >= self.nodes.len() || right.0 >= self.nodes.len() {
            return Err(Error::Structural("promotion child does not exist".into()));
        }
        let node = self
            .nodes
            .get_mut(leaf.0)
            .ok_or_else(|| Error::Structural("promotion target does not exist".into()))?;
        let lab = match node {
            Node::LeafProfile { lab, .. } => *lab,
            _ => return Err(Error::Structural("promotion target is not a leaf".into())),
        };
        *node = Node::InternalProfile {
            p1,
            p2,
            lab,
            rep,
            left,
            right,
        };
        Ok(())
    }

    /// Locates the slot currently addressing `target` by traversal from
    /// the root.
    pub fn find_slot(&self, target: NodeId) -> Result<Slot> {
        let root = self
            .root
            .ok_or_else(|| Error::Structural("empty tree".into()))?;
        if root == target {
            return Ok(Slot::Root);
        }
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if let Some((l, r)) = self.nodes[id.0].children() {
                if l == target {
                    return Ok(Slot::Child {
                        parent: id,
                        side: Side::Left,
                    });
                }
                if r == target {
                    return Ok(Slot::Child {
                        parent: id,
                        side: Side::Right,
                    });
                }
                stack.push(l);
                stack.push(r);
            }
        }
        Err(Error::Structural("node not reachable from the root".into()))
    }

    /// Depth (edges from the root) of a reachable node.
    pub fn depth_of(&self, target: NodeId) -> Option<usize> {
        let root = self.root?;
        let mut stack = vec![(root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            if id == target {
                return Some(d);
            }
            if let Some((l, r)) = self.nodes[id.0].children() {
                stack.push((l, d + 1));
                stack.push((r, d + 1));
            }
        }
        None
    }

    /// Exact counts by full traversal.
    pub fn stats(&self) -> TreeStats {
        let mut stats = TreeStats::default();
        let Some(root) = self.root else {
            return stats;
        };
        let mut labels = BTreeSet::new();
        let mut stack = vec![(root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            stats.height = stats.height.max(depth);
            match &self.nodes[id.0] {
                Node::Internal { left, right, .. } => {
                    stats.internal_count += 1;
                    stack.push((*left, depth + 1));
                    stack.push((*right, depth + 1));
                }
                Node::InternalProfile {
                    lab, left, right, ..
                } => {
                    stats.internal_profile_count += 1;
                    labels.insert(*lab);
                    stack.push((*left, depth + 1));
                    stack.push((*right, depth + 1));
                }
                Node::LeafProfile { lab, container, .. } => {
                    stats.leaf_count += 1;
                    labels.insert(*lab);
                    stats.indexed_vectors += container.len();
                }
            }
        }
        stats.profile_count = labels.len();
        stats
    }

    /// Distinct labels reachable in the tree.
    pub fn labels(&self) -> BTreeSet<ProfileLabel> {
        let mut labels = BTreeSet::new();
        if let Some(root) = self.root {
            let mut stack = vec![root];
            while let Some(id) = stack.pop() {
                if let Some(lab) = self.nodes[id.0].label() {
                    labels.insert(lab);
                }
                if let Some((l, r)) = self.nodes[id.0].children() {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        labels
    }

    /// Line-oriented preorder dump, one node per line:
    /// `I|p1-hash|p2-hash`, `P|lab|p1-hash|p2-hash|rep-hash`,
    /// `L|lab|container-size`. A debugging format, not a durability one.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let Some(root) = self.root else {
            return out;
        };
        // Explicit stack, pushing right first so the left subtree is
        // emitted first (preorder).
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            match &self.nodes[id.0] {
                Node::Internal {
                    p1,
                    p2,
                    left,
                    right,
                } => {
                    out.push_str(&format!(
                        "I|{:016x}|{:016x}\n",
                        vector_hash(p1),
                        vector_hash(p2)
                    ));
                    stack.push(*right);
                    stack.push(*left);
                }
                Node::InternalProfile {
                    p1,
                    p2,
                    lab,
                    rep,
                    left,
                    right,
                } => {
                    out.push_str(&format!(
                        "P|{}|{:016x}|{:016x}|{:016x}\n",
                        lab,
                        vector_hash(p1),
                        vector_hash(p2),
                        vector_hash(rep)
                    ));
                    stack.push(*right);
                    stack.push(*left);
                }
                Node::LeafProfile { lab, container, .. } => {
                    out.push_str(&format!("L|{}|{}\n", lab, container.len()));
                }
            }
        }
        out
    }

    /// Verifies the structural invariants: two non-null children on every
    /// internal node, distinct pivots, no node reachable twice, leaf count
    /// = internal count + 1, and label coherence inside profile subtrees.
    pub fn check_structure(&self) -> Result<()> {
        let Some(root) = self.root else {
            return Ok(());
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<(NodeId, Option<ProfileLabel>)> = vec![(root, None)];
        let mut leaves = 0usize;
        let mut internals = 0usize;
        while let Some((id, required)) = stack.pop() {
            let node = self
                .nodes
                .get(id.0)
                .ok_or_else(|| Error::Structural(format!("dangling node id {}", id.0)))?;
            if seen[id.0] {
                return Err(Error::Structural(format!(
                    "node {} reachable twice",
                    id.0
                )));
            }
            seen[id.0] = true;
            if let Some((p1, p2)) = node.pivots() {
                if distance(p1, p2, self.metric) <= 0.0 {
                    return Err(Error::Structural(format!(
                        "node {} has coincident pivots",
                        id.0
                    )));
                }
            }
            match node {
                Node::Internal { left, right, .. } => {
                    internals += 1;
                    stack.push((*left, required));
                    stack.push((*right, required));
                }
                Node::InternalProfile {
                    lab, left, right, ..
                } => {
                    internals += 1;
                    if let Some(req) = required {
                        if req != *lab {
                            return Err(Error::Structural(format!(
                                "profile node {} labeled {} inside subtree of {}",
                                id.0, lab, req
                            )));
                        }
                    }
                    stack.push((*left, Some(*lab)));
                    stack.push((*right, Some(*lab)));
                }
                Node::LeafProfile { lab, .. } => {
                    leaves += 1;
                    if let Some(req) = required {
                        if req != *lab {
                            return Err(Error::Structural(format!(
                                "leaf {} labeled {} inside subtree of {}",
                                id.0, lab, req
                            )));
                        }
                    }
                }
            }
        }
        if leaves != internals + 1 {
            return Err(Error::Structural(format!(
                "{leaves} leaves but {internals} internal nodes"
            )));
        }
        Ok(())
    }
}

/// Stable 64-bit FNV-1a hash over the raw f64 bits of a vector; used by
/// the snapshot format.
pub fn vector_hash(v: &FeatureVector) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for x in v.as_slice() {
        for byte in x.to_bits().to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}
