//! The online labeling workflow: greedy threshold-based label search,
//! down insertion, up insertion, and unique label allocation.
//!
//! A query descends the tree greedily: at every two-pivot node the
//! distances `d1 = d(p1, q)` and `d2 = d(p2, q)` are computed and the
//! search goes left iff `d1 < d2` (ties go right, matching the strict
//! comparison). At the reached leaf the representative distance
//! `d3 = d(rep, q)` classifies the query:
//!
//! * `d3 < beta` — same object; the leaf's label is returned.
//! * `beta <= d3 < zeta` — similar object; a new label is allocated and
//!   a new leaf is spliced in next to the reached one (down insertion).
//! * `d3 >= zeta` — dissimilar object; a new label is allocated and a
//!   new root separates the new leaf from the whole existing tree
//!   (up insertion). A lone-leaf root falls back to down insertion,
//!   since up insertion needs root pivots.
//!
//! Greedy descent never backtracks, so retrieval is approximate; the
//! [`crate::oracle`] module quantifies the approximation against an
//! exhaustive scan.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::metric::{distance, FeatureVector, IndexConfig};
use crate::tree::{Node, NodeId, ProfileLabel, ProfileTree, Slot};

/// Instrumentation for one search: distance evaluations, routing/threshold
/// decisions, and wall time.
///
/// `comparisons` counts one decision per two-pivot node plus one for the
/// leaf threshold classification, so `comparisons <= distances_computed`
/// holds at every depth. Distances computed while building replacement
/// nodes during an insertion are not search costs and are excluded.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    pub distances_computed: u64,
    pub comparisons: u64,
    pub elapsed: Duration,
}

/// Outcome of a mutating label search.
#[derive(Clone, Copy, Debug)]
pub struct LabelResult {
    pub label: ProfileLabel,
    /// The leaf profile node where the label lives: the reached leaf for
    /// a match, the freshly created leaf for an insertion.
    pub leaf: NodeId,
    /// True when a new label was allocated (and the tree mutated).
    pub created: bool,
    pub stats: SearchStats,
}

/// Outcome of a read-only lookup on a non-empty tree.
#[derive(Clone, Copy, Debug)]
pub struct LookupOutcome {
    /// The leaf reached by greedy descent.
    pub leaf: NodeId,
    /// Distance from the query to the reached leaf's representative.
    pub rep_distance: f64,
    /// The leaf's label when `rep_distance < beta`, `None` otherwise.
    pub label: Option<ProfileLabel>,
    pub stats: SearchStats,
}

/// Monotone unique label source. The first label is 1; labels are never
/// reused within one allocator.
#[derive(Clone, Debug)]
pub struct LabelAllocator {
    next: u64,
}

impl LabelAllocator {
    pub fn new() -> Self {
        LabelAllocator { next: 1 }
    }

    pub fn allocate(&mut self) -> ProfileLabel {
        let lab = ProfileLabel::new(self.next);
        self.next += 1;
        lab
    }

    /// Count of labels handed out so far.
    pub fn issued(&self) -> u64 {
        self.next - 1
    }
}

impl Default for LabelAllocator {
    fn default() -> Self {
        Self::new()
    }
}

/// The label retrieval engine: a profile tree plus its allocator and
/// configuration.
///
/// Mutating searches require `&mut self`; read-only lookups take `&self`
/// and may run from any number of threads.
#[derive(Clone, Debug)]
pub struct LabelEngine {
    config: IndexConfig,
    tree: ProfileTree,
    alloc: LabelAllocator,
    profiles_created: u64,
    pub(crate) degenerate_splits: u64,
}

impl LabelEngine {
    pub fn new(config: IndexConfig) -> Self {
        let tree = ProfileTree::new(config.metric);
        LabelEngine {
            config,
            tree,
            alloc: LabelAllocator::new(),
            profiles_created: 0,
            degenerate_splits: 0,
        }
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn tree(&self) -> &ProfileTree {
        &self.tree
    }

    pub(crate) fn tree_mut(&mut self) -> &mut ProfileTree {
        &mut self.tree
    }

    /// Labels created by searches on this engine (equals the number of
    /// allocator labels that made it into the tree).
    pub fn profiles_created(&self) -> u64 {
        self.profiles_created
    }

    /// Splits skipped because a pooled container held only identical
    /// vectors; such leaves stay oversized.
    pub fn degenerate_splits(&self) -> u64 {
        self.degenerate_splits
    }

    /// Allocates a fresh unique label.
    pub fn allocate_label(&mut self) -> ProfileLabel {
        self.alloc.allocate()
    }

    pub fn labels_issued(&self) -> u64 {
        self.alloc.issued()
    }

    /// Greedy descent to the unique leaf, accumulating search stats.
    fn descend(&self, q: &FeatureVector, stats: &mut SearchStats) -> NodeId {
        let mut id = self.tree.root().expect("descend on empty tree");
        loop {
            match self.tree.node(id) {
                Node::Internal {
                    p1,
                    p2,
                    left,
                    right,
                }
                | Node::InternalProfile {
                    p1,
                    p2,
                    left,
                    right,
                    ..
                } => {
                    let d1 = distance(p1, q, self.config.metric);
                    let d2 = distance(p2, q, self.config.metric);
                    stats.distances_computed += 2;
                    stats.comparisons += 1;
                    // Ties go right: the branch is taken only on d1 < d2.
                    id = if d1 < d2 { *left } else { *right };
                }
                Node::LeafProfile { .. } => return id,
            }
        }
    }

    /// Mutating label search. On an empty tree the query becomes the root
    /// leaf under a fresh label.
    pub fn label_search(&mut self, query: &FeatureVector) -> Result<LabelResult> {
        let start = Instant::now();
        let q = self.config.prepare(query.clone())?;
        let mut stats = SearchStats::default();

        if self.tree.is_empty() {
            let label = self.alloc.allocate();
            let leaf = self.tree.new_leaf_profile(q, label, Vec::new());
            self.tree.install_root(leaf)?;
            self.profiles_created += 1;
            stats.elapsed = start.elapsed();
            return Ok(LabelResult {
                label,
                leaf,
                created: true,
                stats,
            });
        }

        let reached = self.descend(&q, &mut stats);
        let (rep_distance, leaf_label) = match self.tree.node(reached) {
            Node::LeafProfile { rep, lab, .. } => {
                (distance(rep, &q, self.config.metric), *lab)
            }
            _ => unreachable!("descend returns a leaf"),
        };
        stats.distances_computed += 1;
        stats.comparisons += 1;

        if rep_distance < self.config.beta {
            stats.elapsed = start.elapsed();
            return Ok(LabelResult {
                label: leaf_label,
                leaf: reached,
                created: false,
                stats,
            });
        }

        let label = self.alloc.allocate();
        let root_is_leaf = self
            .tree
            .root()
            .map(|r| self.tree.node(r).is_leaf())
            .unwrap_or(false);
        let leaf = if rep_distance < self.config.zeta || root_is_leaf {
            self.down_insert(reached, &q, label)?
        } else {
            self.up_insert(&q, label)?
        };
        self.profiles_created += 1;
        stats.elapsed = start.elapsed();
        Ok(LabelResult {
            label,
            leaf,
            created: true,
            stats,
        })
    }

    /// Read-only greedy lookup; returns `None` on an empty tree.
    pub fn lookup(&self, query: &FeatureVector) -> Result<Option<LookupOutcome>> {
        let start = Instant::now();
        let q = self.config.prepare(query.clone())?;
        if self.tree.is_empty() {
            return Ok(None);
        }
        let mut stats = SearchStats::default();
        let reached = self.descend(&q, &mut stats);
        let (rep_distance, lab) = match self.tree.node(reached) {
            Node::LeafProfile { rep, lab, .. } => {
                (distance(rep, &q, self.config.metric), *lab)
            }
            _ => unreachable!(),
        };
        stats.distances_computed += 1;
        stats.comparisons += 1;
        stats.elapsed = start.elapsed();
        Ok(Some(LookupOutcome {
            leaf: reached,
            rep_distance,
            label: (rep_distance < self.config.beta).then_some(lab),
            stats,
        }))
    }

    /// Sequential batch lookup.
    pub fn lookup_batch_seq(
        &self,
        queries: &[FeatureVector],
    ) -> Result<Vec<Option<LookupOutcome>>> {
        queries.iter().map(|q| self.lookup(q)).collect()
    }

    /// Parallel batch lookup over a read-only tree.
    #[cfg(feature = "parallel")]
    pub fn lookup_batch_par(
        &self,
        queries: &[FeatureVector],
    ) -> Result<Vec<Option<LookupOutcome>>> {
        use rayon::prelude::*;
        queries.par_iter().map(|q| self.lookup(q)).collect()
    }

    /// Batch lookup; runs in parallel for large batches when the
    /// `parallel` feature is enabled.
    pub fn lookup_batch(&self, queries: &[FeatureVector]) -> Result<Vec<Option<LookupOutcome>>> {
        #[cfg(feature = "parallel")]
        {
            if queries.len() >= crate::PAR_THRESHOLD {
                return self.lookup_batch_par(queries);
            }
        }
        self.lookup_batch_seq(queries)
    }

    /// Splices a new leaf for `q` next to `leaf`: the slot that held the
    /// reached leaf now holds a plain internal node with pivots `(q,
    /// leaf.rep)` whose left child is the new leaf and whose right child
    /// is the old leaf subtree. Returns the new leaf.
    pub fn down_insert(
        &mut self,
        leaf: NodeId,
        query: &FeatureVector,
        label: ProfileLabel,
    ) -> Result<NodeId> {
        let q = self.config.prepare(query.clone())?;
        let rep = match self.tree.get(leaf) {
            Some(Node::LeafProfile { rep, .. }) => rep.clone(),
            Some(_) => {
                return Err(Error::Structural(
                    "down insertion target is not a leaf".into(),
                ))
            }
            None => return Err(Error::Structural("down insertion target does not exist".into())),
        };
        if distance(&q, &rep, self.config.metric) <= 0.0 {
            // Only reachable when d3 >= beta > 0 during search; direct
            // callers may violate that, so keep the guard.
            return Err(Error::DegeneratePivot);
        }
        let slot = self.tree.find_slot(leaf)?;
        let node_q = self.tree.new_leaf_profile(q.clone(), label, Vec::new());
        let inter = self.tree.new_internal(q, rep, node_q, leaf, None)?;
        self.tree.pointer_switch(slot, inter)?;
        Ok(node_q)
    }

    /// Creates a new root separating `q` from the whole existing tree.
    /// The kept pivot is the old-root pivot nearer to `q`; the new leaf
    /// sits on the side of `q` so that re-searching `q` reaches it.
    pub fn up_insert(&mut self, query: &FeatureVector, label: ProfileLabel) -> Result<NodeId> {
        let q = self.config.prepare(query.clone())?;
        let root = self
            .tree
            .root()
            .ok_or_else(|| Error::Structural("up insertion on an empty tree".into()))?;
        let (p1, p2) = match self.tree.node(root) {
            Node::Internal { p1, p2, .. } | Node::InternalProfile { p1, p2, .. } => {
                (p1.clone(), p2.clone())
            }
            Node::LeafProfile { .. } => {
                return Err(Error::Structural(
                    "up insertion requires a two-pivot root".into(),
                ))
            }
        };
        let d1 = distance(&p1, &q, self.config.metric);
        let d2 = distance(&p2, &q, self.config.metric);
        let node_q = self.tree.new_leaf_profile(q.clone(), label, Vec::new());
        let new_root = if d1 < d2 {
            self.tree.new_internal(q, p1, node_q, root, None)?
        } else {
            self.tree.new_internal(p2, q, root, node_q, None)?
        };
        self.tree.pointer_switch(Slot::Root, new_root)?;
        Ok(node_q)
    }
}
