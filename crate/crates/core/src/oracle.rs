//! The conventional sequential-scan labeler the tree replaces: an
//! append-only flat store scanned exhaustively per query. Used as the
//! correctness baseline (the tree's greedy descent is approximate) and
//! as the linear-cost comparator.

use std::time::Instant;

use crate::engine::{LabelEngine, SearchStats};
use crate::error::{Error, Result};
use crate::metric::{distance, FeatureVector, MetricKind};
use crate::tree::ProfileLabel;

/// Append-only mirror of every (vector, label) pair held in the tree
/// under test: profile representatives created by searches plus all
/// batch-inserted container contents.
#[derive(Clone, Debug)]
pub struct FlatStore {
    metric: MetricKind,
    entries: Vec<(FeatureVector, ProfileLabel)>,
}

impl FlatStore {
    pub fn new(metric: MetricKind) -> Self {
        FlatStore {
            metric,
            entries: Vec::new(),
        }
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn push(&mut self, vector: FeatureVector, label: ProfileLabel) {
        self.entries.push((vector, label));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(FeatureVector, ProfileLabel)] {
        &self.entries
    }
}

/// Index and distance of the globally nearest entry; ties resolve to the
/// earliest-inserted entry. Sequential reference implementation.
pub fn scan_nearest_seq(store: &FlatStore, query: &FeatureVector) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (v, _)) in store.entries.iter().enumerate() {
        let d = distance(v, query, store.metric);
        match best {
            Some((_, bd)) if bd <= d => {}
            _ => best = Some((i, d)),
        }
    }
    best
}

/// Parallel scan with deterministic tie-breaking: chunk argmins are
/// combined in chunk order, so the earliest index still wins ties.
#[cfg(feature = "parallel")]
pub fn scan_nearest_par(store: &FlatStore, query: &FeatureVector) -> Option<(usize, f64)> {
    use rayon::prelude::*;
    const CHUNK: usize = 2048;
    let chunk_bests: Vec<Option<(usize, f64)>> = store
        .entries
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut best: Option<(usize, f64)> = None;
            for (i, (v, _)) in chunk.iter().enumerate() {
                let d = distance(v, query, store.metric);
                match best {
                    Some((_, bd)) if bd <= d => {}
                    _ => best = Some((c * CHUNK + i, d)),
                }
            }
            best
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for cb in chunk_bests.into_iter().flatten() {
        match best {
            Some((_, bd)) if bd <= cb.1 => {}
            _ => best = Some(cb),
        }
    }
    best
}

fn scan_nearest(store: &FlatStore, query: &FeatureVector) -> Option<(usize, f64)> {
    #[cfg(feature = "parallel")]
    {
        if store.len() >= crate::PAR_THRESHOLD {
            return scan_nearest_par(store, query);
        }
    }
    scan_nearest_seq(store, query)
}

/// Result of one exhaustive scan.
#[derive(Clone, Copy, Debug)]
pub struct ScanResult {
    /// Label of the globally nearest entry if its distance is below
    /// `beta`, `None` otherwise (or on an empty store).
    pub label: Option<ProfileLabel>,
    pub stats: SearchStats,
}

/// Scans all entries; `distances_computed` is exactly the store size.
pub fn linear_label_search(store: &FlatStore, query: &FeatureVector, beta: f64) -> ScanResult {
    let start = Instant::now();
    let nearest = scan_nearest(store, query);
    let label = nearest.and_then(|(i, d)| {
        if d < beta {
            Some(store.entries[i].1)
        } else {
            None
        }
    });
    let stats = SearchStats {
        distances_computed: store.len() as u64,
        comparisons: store.len() as u64,
        elapsed: start.elapsed(),
    };
    ScanResult { label, stats }
}

/// Agreement between greedy tree labeling and the exhaustive scan over a
/// query batch, with the paired mean search costs.
#[derive(Clone, Copy, Debug)]
pub struct AgreementReport {
    /// Fraction of queries where both sides return the same
    /// label-or-none verdict.
    pub agreement: f64,
    pub queries: usize,
    pub matching: usize,
    pub tree_mean_distances: f64,
    pub oracle_mean_distances: f64,
}

/// Compares tree lookups against the oracle on every query. Errors if the
/// store does not mirror the engine (every indexed vector plus every
/// created profile representative must be present).
pub fn agreement(
    engine: &LabelEngine,
    store: &FlatStore,
    queries: &[FeatureVector],
) -> Result<AgreementReport> {
    let expected = engine.tree().stats().indexed_vectors + engine.profiles_created() as usize;
    if expected != store.len() {
        return Err(Error::InconsistentBaseline {
            store: store.len(),
            tree: expected,
        });
    }
    let beta = engine.config().beta;
    let outcomes = engine.lookup_batch(queries)?;
    let mut matching = 0usize;
    let mut tree_distances = 0u64;
    for (q, out) in queries.iter().zip(&outcomes) {
        let tree_label = out.as_ref().and_then(|o| o.label);
        tree_distances += out.as_ref().map_or(0, |o| o.stats.distances_computed);
        let oracle_label = linear_label_search(store, q, beta).label;
        if tree_label == oracle_label {
            matching += 1;
        }
    }
    let n = queries.len().max(1) as f64;
    Ok(AgreementReport {
        agreement: matching as f64 / n,
        queries: queries.len(),
        matching,
        tree_mean_distances: tree_distances as f64 / n,
        oracle_mean_distances: store.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FeatureVector, IndexConfig};

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn empty_store_returns_none_with_zero_distances() {
        let store = FlatStore::new(MetricKind::Euclidean);
        let r = linear_label_search(&store, &fv(&[0.0, 0.0]), 0.2);
        assert_eq!(r.label, None);
        assert_eq!(r.stats.distances_computed, 0);
    }

    #[test]
    fn exact_entry_is_found_at_distance_zero() {
        let mut store = FlatStore::new(MetricKind::Euclidean);
        let q = fv(&[1.0, 2.0]);
        store.push(fv(&[5.0, 5.0]), ProfileLabel::new(1));
        store.push(q.clone(), ProfileLabel::new(2));
        let r = linear_label_search(&store, &q, 0.2);
        assert_eq!(r.label, Some(ProfileLabel::new(2)));
        assert_eq!(r.stats.distances_computed, 2);
    }

    #[test]
    fn nearest_of_three_entries_wins() {
        // Entries at distances 0.5, 0.1, 0.3 from the query; beta 0.2.
        let mut store = FlatStore::new(MetricKind::Euclidean);
        store.push(fv(&[0.5, 0.0]), ProfileLabel::new(1));
        store.push(fv(&[0.1, 0.0]), ProfileLabel::new(2));
        store.push(fv(&[0.3, 0.0]), ProfileLabel::new(3));
        let r = linear_label_search(&store, &fv(&[0.0, 0.0]), 0.2);
        assert_eq!(r.label, Some(ProfileLabel::new(2)));
    }

    #[test]
    fn nearest_beyond_beta_returns_none() {
        let mut store = FlatStore::new(MetricKind::Euclidean);
        store.push(fv(&[0.5, 0.0]), ProfileLabel::new(1));
        let r = linear_label_search(&store, &fv(&[0.0, 0.0]), 0.2);
        assert_eq!(r.label, None);
    }

    #[test]
    fn ties_resolve_to_earliest_entry() {
        let mut store = FlatStore::new(MetricKind::Euclidean);
        store.push(fv(&[0.1, 0.0]), ProfileLabel::new(1));
        store.push(fv(&[-0.1, 0.0]), ProfileLabel::new(2));
        let r = linear_label_search(&store, &fv(&[0.0, 0.0]), 0.2);
        assert_eq!(r.label, Some(ProfileLabel::new(1)));
    }

    #[test]
    fn seq_and_par_scans_agree() {
        let mut store = FlatStore::new(MetricKind::Euclidean);
        for i in 0..3000 {
            store.push(
                fv(&[(i % 83) as f64 * 0.01, (i % 47) as f64 * 0.01]),
                ProfileLabel::new(i + 1),
            );
        }
        let q = fv(&[0.31, 0.17]);
        let seq = scan_nearest_seq(&store, &q);
        #[cfg(feature = "parallel")]
        {
            let par = scan_nearest_par(&store, &q);
            assert_eq!(seq, par);
        }
        assert!(seq.is_some());
    }

    #[test]
    fn agreement_is_full_on_single_profile() {
        let cfg = IndexConfig::new(2, MetricKind::Euclidean, 0.2, 0.6, 8).unwrap();
        let mut engine = LabelEngine::new(cfg);
        let rep = fv(&[0.5, 0.5]);
        let r = engine.label_search(&rep).unwrap();
        let mut store = FlatStore::new(MetricKind::Euclidean);
        store.push(rep.clone(), r.label);
        let queries: Vec<_> = (0..20)
            .map(|i| fv(&[0.5 + 0.001 * i as f64, 0.5]))
            .collect();
        let report = agreement(&engine, &store, &queries).unwrap();
        assert_eq!(report.agreement, 1.0);
        assert_eq!(report.oracle_mean_distances, 1.0);
    }

    #[test]
    fn mirror_violation_is_detected() {
        let cfg = IndexConfig::new(2, MetricKind::Euclidean, 0.2, 0.6, 8).unwrap();
        let mut engine = LabelEngine::new(cfg);
        engine.label_search(&fv(&[0.5, 0.5])).unwrap();
        let store = FlatStore::new(MetricKind::Euclidean);
        assert!(matches!(
            agreement(&engine, &store, &[fv(&[0.5, 0.5])]),
            Err(Error::InconsistentBaseline { .. })
        ));
    }
}
