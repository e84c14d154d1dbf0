//! Batch insertion: a tracked object's collected metadata bag lands in
//! its profile leaf, and the leaf splits by two-way clustering whenever
//! the container reaches capacity.
//!
//! Splitting is recursive: 2-means does not balance, so a child whose
//! container is still at capacity is split again. Pools made of one
//! repeated vector cannot be split; those leaves stay oversized and are
//! counted on the engine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::LabelEngine;
use crate::error::{Error, Result};
use crate::metric::{distance, mean, mean_of, FeatureVector, MetricKind};
use crate::tree::{Node, NodeId, ProfileLabel};

/// Number of points examined when seeding the two initial centers.
const SEED_SAMPLE: usize = 64;
/// Lloyd iteration cap.
const MAX_ITERS: usize = 100;
/// Additional seeded restarts tried after the farthest-pair init; the
/// run with the lowest within-cluster cost wins. Small sets have many
/// shallow local optima, and restarts are cheap next to a split.
const RESTARTS: usize = 3;

/// The metadata collected on one tracked object, destined for its
/// profile leaf.
#[derive(Clone, Debug)]
pub struct MetadataBag {
    pub label: ProfileLabel,
    pub vectors: Vec<FeatureVector>,
    pub source: Option<BagSource>,
}

/// Optional provenance of a bag.
#[derive(Clone, Copy, Debug)]
pub struct BagSource {
    pub camera: u32,
    pub frames: (u64, u64),
}

impl MetadataBag {
    pub fn new(label: ProfileLabel, vectors: Vec<FeatureVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Config("metadata bag must not be empty".into()));
        }
        let dim = vectors[0].dim();
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        Ok(MetadataBag {
            label,
            vectors,
            source: None,
        })
    }

    pub fn with_source(mut self, source: BagSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Converged two-way clustering of a vector set.
///
/// Every member of `cluster1` is at least as close to `c1` as to `c2`,
/// and every member of `cluster2` is strictly closer to `c2` (ties go to
/// cluster 1), against the returned centers.
#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub cluster1: Vec<FeatureVector>,
    pub cluster2: Vec<FeatureVector>,
    pub c1: FeatureVector,
    pub c2: FeatureVector,
    pub iterations: usize,
}

/// Assigns each point to the nearer center; `true` means cluster 1.
/// Ties go to cluster 1, mirroring the `d(o, p1) <= d(o, p2)` rule.
pub fn assign_clusters_seq(
    points: &[FeatureVector],
    c1: &FeatureVector,
    c2: &FeatureVector,
    metric: MetricKind,
) -> Vec<bool> {
    points
        .iter()
        .map(|p| distance(p, c1, metric) <= distance(p, c2, metric))
        .collect()
}

/// Parallel assignment; identical output to [`assign_clusters_seq`].
#[cfg(feature = "parallel")]
pub fn assign_clusters_par(
    points: &[FeatureVector],
    c1: &FeatureVector,
    c2: &FeatureVector,
    metric: MetricKind,
) -> Vec<bool> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| distance(p, c1, metric) <= distance(p, c2, metric))
        .collect()
}

fn assign_clusters(
    points: &[FeatureVector],
    c1: &FeatureVector,
    c2: &FeatureVector,
    metric: MetricKind,
) -> Vec<bool> {
    #[cfg(feature = "parallel")]
    {
        if points.len() >= crate::PAR_THRESHOLD {
            return assign_clusters_par(points, c1, c2, metric);
        }
    }
    assign_clusters_seq(points, c1, c2, metric)
}

/// Center of one side of an assignment; falls back to the point farthest
/// from the opposite center when the side is empty or its mean degenerates
/// (all-antipodal cosine sums).
fn side_center(
    points: &[FeatureVector],
    assign: &[bool],
    side: bool,
    other_center: &FeatureVector,
    metric: MetricKind,
) -> FeatureVector {
    let members: Vec<FeatureVector> = points
        .iter()
        .zip(assign)
        .filter(|(_, a)| **a == side)
        .map(|(p, _)| p.clone())
        .collect();
    if !members.is_empty() {
        if let Ok(center) = mean_of(&members, metric) {
            return center;
        }
    }
    // Reseed deterministically: farthest point from the other center,
    // lowest index on ties.
    let mut best = 0usize;
    let mut best_d = -1.0;
    for (i, p) in points.iter().enumerate() {
        let d = distance(p, other_center, metric);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    points[best].clone()
}

struct LloydRun {
    assign: Vec<bool>,
    c1: FeatureVector,
    c2: FeatureVector,
    iterations: usize,
    cost: f64,
}

/// Per-point contribution to the within-cluster cost that Lloyd descends:
/// squared distance for euclidean, the (already chord-squared) cosine
/// distance as-is.
fn point_cost(p: &FeatureVector, c: &FeatureVector, metric: MetricKind) -> f64 {
    let d = distance(p, c, metric);
    match metric {
        MetricKind::Euclidean => d * d,
        MetricKind::Cosine => d,
    }
}

fn lloyd_run(
    data: &[FeatureVector],
    metric: MetricKind,
    init: (usize, usize),
) -> Option<LloydRun> {
    let mut c1 = data[init.0].clone();
    let mut c2 = data[init.1].clone();
    let mut assign = assign_clusters(data, &c1, &c2, metric);
    let mut iterations = 0usize;
    for _ in 0..MAX_ITERS {
        iterations += 1;
        c1 = side_center(data, &assign, true, &c2, metric);
        c2 = side_center(data, &assign, false, &c1, metric);
        let next = assign_clusters(data, &c1, &c2, metric);
        if next == assign {
            break;
        }
        assign = next;
    }
    // `assign` is consistent with (c1, c2) here: either the loop broke on
    // a stable assignment or the last computed assignment was stored.
    if assign.iter().all(|a| *a) || assign.iter().all(|a| !*a) {
        return None;
    }
    if distance(&c1, &c2, metric) <= 0.0 {
        return None;
    }
    let cost = data
        .iter()
        .zip(&assign)
        .map(|(p, a)| point_cost(p, if *a { &c1 } else { &c2 }, metric))
        .sum();
    Some(LloydRun {
        assign,
        c1,
        c2,
        iterations,
        cost,
    })
}

/// Two-way clustering. Centers start as the two most distant points
/// among `min(64, n)` deterministically sampled points; a few seeded
/// restart pairs are also tried and the converged run with the lowest
/// within-cluster cost wins. Deterministic given (data order, seed).
pub fn partition(
    data: &[FeatureVector],
    metric: MetricKind,
    seed: u64,
) -> Result<PartitionOutcome> {
    if data.len() < 2 {
        return Err(Error::Config("partition requires at least two points".into()));
    }
    let first = &data[0];
    if data.iter().all(|v| v == first) {
        return Err(Error::DegeneratePartition);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<usize> = if data.len() <= SEED_SAMPLE {
        (0..data.len()).collect()
    } else {
        let mut idx = rand::seq::index::sample(&mut rng, data.len(), SEED_SAMPLE).into_vec();
        idx.sort_unstable();
        idx
    };

    let mut farthest = (0usize, 1usize);
    let mut best_d = -1.0f64;
    for (k, &i) in sample.iter().enumerate() {
        for &j in &sample[k + 1..] {
            let d = distance(&data[i], &data[j], metric);
            if d > best_d {
                best_d = d;
                farthest = (i, j);
            }
        }
    }
    if best_d <= 0.0 {
        // The sample happened to be identical copies; scan for any
        // distinct pair (one exists, the all-identical case was rejected).
        let j = data
            .iter()
            .position(|v| v != first)
            .expect("distinct point exists");
        farthest = (0, j);
    }

    let mut inits = vec![farthest];
    let mut guard = 0;
    while inits.len() < 1 + RESTARTS && guard < 64 {
        guard += 1;
        let i = rng.gen_range(0..data.len());
        let j = rng.gen_range(0..data.len());
        if i != j && data[i] != data[j] {
            inits.push((i, j));
        }
    }

    let mut best: Option<LloydRun> = None;
    for init in inits {
        if let Some(run) = lloyd_run(data, metric, init) {
            match &best {
                Some(b) if b.cost <= run.cost => {}
                _ => best = Some(run),
            }
        }
    }
    let best = best.ok_or(Error::DegeneratePartition)?;

    let mut cluster1 = Vec::new();
    let mut cluster2 = Vec::new();
    for (p, a) in data.iter().zip(&best.assign) {
        if *a {
            cluster1.push(p.clone());
        } else {
            cluster2.push(p.clone());
        }
    }
    Ok(PartitionOutcome {
        cluster1,
        cluster2,
        c1: best.c1,
        c2: best.c2,
        iterations: best.iterations,
    })
}

/// Median split by distance to the pooled mean: the deterministic
/// fallback for pools 2-means cannot separate.
fn median_split(
    data: &[FeatureVector],
    metric: MetricKind,
) -> Option<(Vec<FeatureVector>, Vec<FeatureVector>, FeatureVector, FeatureVector)> {
    let pooled_mean = mean_of(data, metric).ok()?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        let da = distance(&data[a], &pooled_mean, metric);
        let db = distance(&data[b], &pooled_mean, metric);
        da.partial_cmp(&db).unwrap().then(a.cmp(&b))
    });
    let half = data.len() / 2;
    let lo: Vec<FeatureVector> = order[..half].iter().map(|&i| data[i].clone()).collect();
    let hi: Vec<FeatureVector> = order[half..].iter().map(|&i| data[i].clone()).collect();
    if lo.is_empty() || hi.is_empty() {
        return None;
    }
    let c1 = mean_of(&lo, metric).ok()?;
    let c2 = mean_of(&hi, metric).ok()?;
    if distance(&c1, &c2, metric) <= 0.0 {
        return None;
    }
    Some((lo, hi, c1, c2))
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(6364136223846793005)
        .wrapping_add(salt.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
}

impl LabelEngine {
    /// Inserts a bag into its profile. `node` is the profile node handed
    /// out by the label search that created or matched the label; if the
    /// profile has since split, the bag descends greedily from that node
    /// using the bag's mean vector until it reaches a leaf.
    ///
    /// If the container stays under capacity the vectors are appended;
    /// otherwise the pooled contents are partitioned in two, the leaf is
    /// promoted to an internal profile node with the cluster centers as
    /// pivots, and any child still at capacity is split again.
    pub fn batch_insert(&mut self, node: NodeId, bag: MetadataBag, seed: u64) -> Result<()> {
        let metric = self.config().metric;
        let c_max = self.config().c_max;
        let mut vectors = Vec::with_capacity(bag.vectors.len());
        for v in bag.vectors {
            vectors.push(self.config().prepare(v)?);
        }

        let target = self.route_bag(node, bag.label, &vectors)?;
        match self.tree_mut().node_mut(target) {
            Node::LeafProfile { container, .. } => container.extend(vectors),
            _ => unreachable!("route_bag returns a leaf"),
        }

        let mut work = vec![(target, seed)];
        while let Some((id, s)) = work.pop() {
            let len = match self.tree().node(id) {
                Node::LeafProfile { container, .. } => container.len(),
                _ => continue,
            };
            if len < c_max {
                continue;
            }
            let pooled = match self.tree_mut().node_mut(id) {
                Node::LeafProfile { container, .. } => std::mem::take(container),
                _ => unreachable!(),
            };
            match partition(&pooled, metric, s) {
                Ok(out) => {
                    let left = self.split_child(id, out.c1.clone(), out.cluster1)?;
                    let right = self.split_child(id, out.c2.clone(), out.cluster2)?;
                    let rep = mean(&out.c1, &out.c2, metric)?;
                    self.tree_mut()
                        .promote_to_internal_profile(id, out.c1, out.c2, rep, left, right)?;
                    work.push((left, mix_seed(s, 1)));
                    work.push((right, mix_seed(s, 2)));
                }
                Err(Error::DegeneratePartition) => {
                    if let Some((lo, hi, c1, c2)) = median_split(&pooled, metric) {
                        let left = self.split_child(id, c1.clone(), lo)?;
                        let right = self.split_child(id, c2.clone(), hi)?;
                        let rep = mean(&c1, &c2, metric)?;
                        self.tree_mut()
                            .promote_to_internal_profile(id, c1, c2, rep, left, right)?;
                        work.push((left, mix_seed(s, 1)));
                        work.push((right, mix_seed(s, 2)));
                    } else {
                        // All points identical: keep one oversized leaf.
                        match self.tree_mut().node_mut(id) {
                            Node::LeafProfile { container, .. } => *container = pooled,
                            _ => unreachable!(),
                        }
                        self.degenerate_splits += 1;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        #[cfg(debug_assertions)]
        self.tree().check_structure()?;
        Ok(())
    }

    fn split_child(
        &mut self,
        parent: NodeId,
        center: FeatureVector,
        members: Vec<FeatureVector>,
    ) -> Result<NodeId> {
        let lab = self
            .tree()
            .node(parent)
            .label()
            .ok_or_else(|| Error::Structural("split parent lost its label".into()))?;
        Ok(self.tree_mut().new_leaf_profile(center, lab, members))
    }

    /// Resolves the leaf that should receive a bag, checking labels along
    /// the way.
    fn route_bag(
        &self,
        node: NodeId,
        label: ProfileLabel,
        vectors: &[FeatureVector],
    ) -> Result<NodeId> {
        let metric = self.config().metric;
        let mut id = node;
        let mut mean_vec: Option<FeatureVector> = None;
        loop {
            match self.tree().get(id) {
                None => return Err(Error::Structural("bag target does not exist".into())),
                Some(Node::Internal { .. }) => {
                    return Err(Error::MisdirectedBag {
                        bag: label.id(),
                        node: id.index() as u64,
                    })
                }
                Some(Node::LeafProfile { lab, .. }) => {
                    if *lab != label {
                        return Err(Error::MisdirectedBag {
                            bag: label.id(),
                            node: lab.id(),
                        });
                    }
                    return Ok(id);
                }
                Some(Node::InternalProfile {
                    lab,
                    p1,
                    p2,
                    left,
                    right,
                    ..
                }) => {
                    if *lab != label {
                        return Err(Error::MisdirectedBag {
                            bag: label.id(),
                            node: lab.id(),
                        });
                    }
                    let m = match &mean_vec {
                        Some(m) => m,
                        None => {
                            let m = mean_of(vectors, metric)
                                .unwrap_or_else(|_| vectors[0].clone());
                            mean_vec = Some(m);
                            mean_vec.as_ref().unwrap()
                        }
                    };
                    let d1 = distance(p1, m, metric);
                    let d2 = distance(p2, m, metric);
                    id = if d1 < d2 { *left } else { *right };
                }
            }
        }
    }
}
