//! Acceptance suite: one test per criterion, each printing a summary
//! line. Run with `cargo test --test acceptance -- --nocapture` to see
//! the measured numbers.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use labelidx::batch::{partition, MetadataBag};
use labelidx::bbox::Bbox;
use labelidx::kalman::{KalmanConfig, KalmanFilter};
use labelidx::metric::{distance, FeatureVector, IndexConfig, MetricKind};
use labelidx::mot::{compute_mot_metrics, GtBox, HypBox};
use labelidx::oracle::linear_label_search;
use labelidx::scene::{
    cluster_queries, clustered_corpus, generate_scene, random_unit_vector, SceneSpec,
};
use labelidx::track::{run_tracking, truth_from_stream, EngineLabeler, NaiveLabeler};
use labelidx::tree::Node;
use labelidx::{LabelEngine, MirroredIndex, TrackerConfig};

/// Criterion 1: insert 10,000 random unit vectors (beta 0.2, zeta 0.6);
/// re-querying each vector immediately after its insertion returns its
/// own label with created=false, 100% of the time, in under 30 s.
#[test]
fn criterion_1_self_consistency() {
    let start = Instant::now();
    let cfg = IndexConfig::new(128, MetricKind::Cosine, 0.2, 0.6, 64).unwrap();
    let mut engine = LabelEngine::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let total = 10_000usize;
    let mut own_label = 0usize;
    for _ in 0..total {
        let v = random_unit_vector(128, &mut rng);
        let inserted = engine.label_search(&v).unwrap();
        let again = engine.label_search(&v).unwrap();
        if again.label == inserted.label && !again.created {
            own_label += 1;
        }
    }
    let elapsed = start.elapsed();
    println!(
        "[criterion 1] self-consistency: {own_label}/{total} own-label re-queries in {:.2}s \
         (tree height {})",
        elapsed.as_secs_f64(),
        engine.tree().stats().height
    );
    assert_eq!(own_label, total);
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: on 256-cluster synthetic data, the tree's mean search
/// cost grows far slower than the corpus: at n=64k it is at most 6x the
/// n=1k value (the oracle's is exactly 64x), and stays below 60
/// distances per query.
#[test]
fn criterion_2_logarithmic_search_cost() {
    let sizes = [1_000usize, 4_000, 16_000, 64_000];
    let mut tree_means = Vec::new();
    let mut centers_holder = None;
    for &n in &sizes {
        let cfg =
            IndexConfig::with_corpus_hint(128, MetricKind::Cosine, 0.2, 1.9, n).unwrap();
        let corpus = clustered_corpus(128, 256, n, 0.02, 0.8, 777).unwrap();
        let queries = cluster_queries(&corpus.centers, 200, 0.02, 888);
        centers_holder.get_or_insert(corpus.centers);

        let mut index = MirroredIndex::new(cfg, 777);
        for v in corpus.vectors {
            index.ingest(v).unwrap();
        }
        index.flush_all().unwrap();
        assert_eq!(index.store().len(), n, "store mirrors all {n} vectors");

        let outcomes = index.engine().lookup_batch(&queries).unwrap();
        let total: u64 = outcomes
            .iter()
            .flatten()
            .map(|o| o.stats.distances_computed)
            .sum();
        let mean = total as f64 / queries.len() as f64;

        // The oracle scans the whole store per query, by construction.
        let scan = linear_label_search(index.store(), &queries[0], 0.2);
        assert_eq!(scan.stats.distances_computed, n as u64);

        println!(
            "[criterion 2] n={n}: tree mean distances {mean:.1}, oracle {n}, height {}, \
             profiles {}",
            index.engine().tree().stats().height,
            index.engine().tree().stats().profile_count
        );
        tree_means.push(mean);
    }
    let ratio = tree_means[3] / tree_means[0];
    println!(
        "[criterion 2] 64x data growth -> tree cost ratio {ratio:.2} (oracle ratio 64.00)"
    );
    assert!(
        tree_means[3] <= 6.0 * tree_means[0],
        "tree cost ratio {ratio:.2} exceeds 6x"
    );
    assert!(
        tree_means[3] <= 60.0,
        "tree mean distances at 64k = {:.1}",
        tree_means[3]
    );
}

/// Criterion 3: greedy tree labeling agrees with the exhaustive linear
/// scan on at least 95% of 5,000 queries over 64 well-separated clusters
/// (pairwise center distance >= 0.8, noise radius <= 0.1, beta 0.2).
#[test]
fn criterion_3_oracle_agreement() {
    let cfg = IndexConfig::with_corpus_hint(128, MetricKind::Cosine, 0.2, 1.9, 3200).unwrap();
    let corpus = clustered_corpus(128, 64, 3200, 0.02, 0.8, 4242).unwrap();
    // Separation sanity: every pair of centers is at least 0.8 apart.
    for i in 0..corpus.centers.len() {
        for j in i + 1..corpus.centers.len() {
            assert!(
                distance(&corpus.centers[i], &corpus.centers[j], MetricKind::Cosine) >= 0.8
            );
        }
    }
    let queries = cluster_queries(&corpus.centers, 5_000, 0.02, 5353);

    let mut index = MirroredIndex::new(cfg, 4242);
    for v in corpus.vectors {
        index.ingest(v).unwrap();
    }
    index.flush_all().unwrap();

    let report = index.agreement(&queries).unwrap();
    println!(
        "[criterion 3] agreement {:.4} ({}/{}), tree mean distances {:.1} vs oracle {:.0}",
        report.agreement,
        report.matching,
        report.queries,
        report.tree_mean_distances,
        report.oracle_mean_distances
    );
    assert!(
        report.agreement >= 0.95,
        "agreement {:.4} below 0.95",
        report.agreement
    );
    // The cost side of the comparison: greedy search is far cheaper.
    assert!(report.tree_mean_distances < report.oracle_mean_distances);
}

/// Criterion 4: after each of 1,000 seeded batch insertions, every leaf
/// container is under capacity (except flagged all-identical leaves),
/// leaves = internals + 1, and the indexed total equals the sum of bag
/// sizes. Zero violations.
#[test]
fn criterion_4_capacity_and_conservation() {
    let c_max = 8usize;
    let cfg = IndexConfig::new(4, MetricKind::Euclidean, 0.5, 1.0, c_max).unwrap();
    let mut engine = LabelEngine::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // Seed a set of well-separated profiles.
    let mut profiles = Vec::new();
    for i in 0..16 {
        let v = FeatureVector::new(vec![10.0 * i as f64, 0.0, 0.0, 0.0]).unwrap();
        let r = engine.label_search(&v).unwrap();
        assert!(r.created);
        profiles.push((r.label, r.leaf, v));
    }

    use rand::Rng;
    let mut total_bagged = 0usize;
    let mut violations = 0usize;
    for step in 0..1_000u64 {
        let (label, node, rep) = &profiles[rng.gen_range(0..profiles.len())];
        let size = rng.gen_range(1..=12);
        let identical = rng.gen_bool(0.05);
        let vectors: Vec<FeatureVector> = (0..size)
            .map(|_| {
                if identical {
                    rep.clone()
                } else {
                    let values: Vec<f64> = rep
                        .as_slice()
                        .iter()
                        .map(|x| x + rng.gen_range(-2.0..2.0))
                        .collect();
                    FeatureVector::new(values).unwrap()
                }
            })
            .collect();
        total_bagged += vectors.len();
        let bag = MetadataBag::new(*label, vectors).unwrap();
        engine.batch_insert(*node, bag, step).unwrap();

        let stats = engine.tree().stats();
        if stats.leaf_count != stats.internal_count + stats.internal_profile_count + 1 {
            violations += 1;
        }
        if stats.indexed_vectors != total_bagged {
            violations += 1;
        }
        // Capacity: oversized leaves are only allowed when all their
        // contents are identical (the flagged degenerate case).
        let tree = engine.tree();
        let mut stack = vec![tree.root().unwrap()];
        while let Some(id) = stack.pop() {
            match tree.node(id) {
                Node::LeafProfile { container, .. } => {
                    if container.len() >= c_max
                        && !container.iter().all(|v| v == &container[0])
                    {
                        violations += 1;
                    }
                }
                n => {
                    let (l, r) = n.children().unwrap();
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
    }
    let stats = engine.tree().stats();
    println!(
        "[criterion 4] 1000 batch inserts: {} vectors indexed, {} leaves, {} degenerate \
         splits, {} violations",
        stats.indexed_vectors,
        stats.leaf_count,
        engine.degenerate_splits(),
        violations
    );
    assert_eq!(violations, 0);
    assert_eq!(stats.indexed_vectors, total_bagged);
    assert!(engine.degenerate_splits() > 0, "degenerate path untested");
    engine.tree().check_structure().unwrap();
}

mod partition_oracle {
    //! Test-side oracle for criterion 5: exhaustive best 2-partition with
    //! its own cost arithmetic, independent of the implementation path.
    use super::*;

    fn own_mean(points: &[&FeatureVector]) -> Vec<f64> {
        let dim = points[0].dim();
        let mut m = vec![0.0; dim];
        for p in points {
            for (s, x) in m.iter_mut().zip(p.as_slice()) {
                *s += x;
            }
        }
        for s in m.iter_mut() {
            *s /= points.len() as f64;
        }
        m
    }

    fn cluster_cost(points: &[&FeatureVector], metric: MetricKind) -> f64 {
        let m = own_mean(points);
        match metric {
            MetricKind::Euclidean => points
                .iter()
                .map(|p| {
                    p.as_slice()
                        .iter()
                        .zip(&m)
                        .map(|(x, c)| (x - c) * (x - c))
                        .sum::<f64>()
                })
                .sum(),
            MetricKind::Cosine => {
                let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
                points
                    .iter()
                    .map(|p| {
                        let dot: f64 =
                            p.as_slice().iter().zip(&m).map(|(x, c)| x * c).sum();
                        1.0 - dot / norm
                    })
                    .sum()
            }
        }
    }

    pub fn partition_cost(
        a: &[FeatureVector],
        b: &[FeatureVector],
        metric: MetricKind,
    ) -> f64 {
        let ar: Vec<&FeatureVector> = a.iter().collect();
        let br: Vec<&FeatureVector> = b.iter().collect();
        cluster_cost(&ar, metric) + cluster_cost(&br, metric)
    }

    /// Exhaustive minimum over all 2-partitions with both sides
    /// non-empty.
    pub fn brute_force_best(points: &[FeatureVector], metric: MetricKind) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << (n - 1)) {
            let mut a = Vec::new();
            let mut b = vec![&points[0]];
            for (i, p) in points.iter().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    a.push(p);
                } else {
                    b.push(p);
                }
            }
            if a.is_empty() {
                continue;
            }
            let cost = cluster_cost(&a, metric) + cluster_cost(&b, metric);
            if cost < best {
                best = cost;
            }
        }
        best
    }
}

/// Criterion 5: on 200 random sets of size <= 8, the 2-means partition
/// matches the brute-force optimal 2-partition cost (within 1e-9) at
/// least 90% of the time, and its converged-assignment invariant holds
/// every single time.
#[test]
fn criterion_5_partition_optimality() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let mut optimal = 0usize;
    let mut total = 0usize;
    for round in 0..200 {
        let metric = if round % 2 == 0 {
            MetricKind::Euclidean
        } else {
            MetricKind::Cosine
        };
        let n = rng.gen_range(2..=8);
        let points: Vec<FeatureVector> = (0..n)
            .map(|_| {
                let v = random_unit_vector(6, &mut rng);
                if metric == MetricKind::Euclidean {
                    FeatureVector::new(
                        v.as_slice().iter().map(|x| 3.0 * x).collect(),
                    )
                    .unwrap()
                } else {
                    v
                }
            })
            .collect();
        let out = partition(&points, metric, round as u64).unwrap();

        // Converged assignment: each point no farther from its own
        // center, checked against the returned centers.
        for p in &out.cluster1 {
            assert!(distance(p, &out.c1, metric) <= distance(p, &out.c2, metric));
        }
        for p in &out.cluster2 {
            assert!(distance(p, &out.c2, metric) < distance(p, &out.c1, metric));
        }

        let cost = partition_oracle::partition_cost(&out.cluster1, &out.cluster2, metric);
        let best = partition_oracle::brute_force_best(&points, metric);
        total += 1;
        if cost <= best + 1e-9 {
            optimal += 1;
        }
    }
    let rate = optimal as f64 / total as f64;
    println!("[criterion 5] partition optimal in {optimal}/{total} sets ({rate:.3})");
    assert!(rate >= 0.90, "optimality rate {rate:.3} below 0.90");
}

/// Criterion 6: across 50 seeded re-entry scenes (10 objects, latent
/// separation above zeta, noise below beta/2), engine-based tracking
/// yields zero identity switches while the fresh-label baseline switches
/// at least once per re-entry, on every scene.
#[test]
fn criterion_6_id_switch_reduction() {
    let beta = 0.2;
    let zeta = 0.6;
    let noise = 0.05; // < beta / 2
    let separation = 0.7; // > zeta
    let mut worst_engine = 0u64;
    let mut baseline_total = 0u64;
    for s in 0..50u64 {
        let spec = SceneSpec::reentry(32, 5, 5, 8, 12, noise, separation, 1_000 + s);
        assert_eq!(spec.objects(), 10);
        let reentries = spec.reentries();
        assert!(reentries >= 1);
        let stream = generate_scene(&spec).unwrap();
        let truth = truth_from_stream(&stream);
        let tracker = TrackerConfig {
            max_missed: 5,
            ..TrackerConfig::default()
        };

        let cfg = IndexConfig::new(32, MetricKind::Cosine, beta, zeta, 8).unwrap();
        let mut index = MirroredIndex::new(cfg, s);
        let mut engine_labeler = EngineLabeler::new(&mut index);
        let engine_out = run_tracking(&stream, &mut engine_labeler, &tracker).unwrap();
        let engine_report = compute_mot_metrics(&engine_out.estimates, &truth, 0.5).unwrap();

        let mut naive = NaiveLabeler::new();
        let naive_out = run_tracking(&stream, &mut naive, &tracker).unwrap();
        let naive_report = compute_mot_metrics(&naive_out.estimates, &truth, 0.5).unwrap();

        assert_eq!(
            engine_report.id_switches, 0,
            "scene {s}: engine switched identities"
        );
        assert!(
            naive_report.id_switches >= reentries,
            "scene {s}: baseline switched {} < {} re-entries",
            naive_report.id_switches,
            reentries
        );
        worst_engine = worst_engine.max(engine_report.id_switches);
        baseline_total += naive_report.id_switches;
    }
    println!(
        "[criterion 6] 50 scenes: engine ID-Sw max {worst_engine}, baseline total \
         {baseline_total} (>= 250 re-entries)"
    );
}

/// Criterion 7: the filter matches hand-derived scalar closed forms to
/// 1e-12 and the covariance stays symmetric PSD through 1,000 cycles.
#[test]
fn criterion_7_kalman_numerics() {
    let kf = KalmanFilter::new(KalmanConfig::default());

    // Scalar analog of the predict step on the (u, u-velocity) block:
    // F = [[1,1],[0,1]], hand-expanded F P Ft + Q.
    let mut st = kf.initiate(&Bbox::new(5.0, 0.0, 0.5, 40.0));
    st.mean[4] = 1.5;
    let (p, pv, v) = (
        st.covariance[(0, 0)],
        st.covariance[(0, 4)],
        st.covariance[(4, 4)],
    );
    let q_pos = (40.0 / 20.0) * (40.0 / 20.0);
    let q_vel = (40.0 / 160.0) * (40.0 / 160.0);
    let pred = kf.predict(&st);
    assert!((pred.mean[0] - 6.5).abs() < 1e-12);
    assert!((pred.covariance[(0, 0)] - (p + 2.0 * pv + v + q_pos)).abs() < 1e-12);
    assert!((pred.covariance[(0, 4)] - (pv + v)).abs() < 1e-12);
    assert!((pred.covariance[(4, 4)] - (v + q_vel)).abs() < 1e-12);

    // Scalar analog of the update step: diagonal prior makes the u gain
    // the textbook p/(p+r).
    let st = kf.initiate(&Bbox::new(5.0, 0.0, 0.5, 40.0));
    let p = st.covariance[(0, 0)];
    let r = (40.0 / 20.0) * (40.0 / 20.0);
    let upd = kf.update(&st, &Bbox::new(6.0, 0.0, 0.5, 40.0));
    let k = p / (p + r);
    assert!((upd.mean[0] - (5.0 + k)).abs() < 1e-12);
    assert!((upd.covariance[(0, 0)] - ((1.0 - k) * (1.0 - k) * p + k * k * r)).abs() < 1e-12);

    // 1,000 predict/update cycles keep the covariance symmetric PSD.
    let mut st = kf.initiate(&Bbox::new(100.0, 100.0, 0.5, 50.0));
    let mut min_eig = f64::INFINITY;
    for i in 0..1_000 {
        st = kf.predict(&st);
        let wiggle = (i % 11) as f64 * 0.4 - 2.0;
        st = kf.update(&st, &Bbox::new(100.0 + wiggle, 100.0 - wiggle, 0.5, 50.0));
        let asym = (st.covariance - st.covariance.transpose()).norm();
        assert!(asym < 1e-8, "asymmetry {asym} at cycle {i}");
        let eig = nalgebra::SymmetricEigen::new(st.covariance);
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        min_eig = min_eig.min(lo);
        assert!(lo >= -1e-8, "eigenvalue {lo} at cycle {i}");
    }
    println!("[criterion 7] scalar forms match to 1e-12; min eigenvalue over 1000 cycles {min_eig:.3e}");
}

fn two_track_scenario() -> (Vec<HypBox>, Vec<GtBox>) {
    let mut gt = Vec::new();
    let mut hyp = Vec::new();
    for frame in 0..20u64 {
        for id in 1..=2u64 {
            let bbox = Bbox::new(40.0 + 3.0 * frame as f64, 100.0 * id as f64, 0.5, 40.0);
            gt.push(GtBox { frame, id, bbox });
            hyp.push(HypBox {
                frame,
                label: 10 + id,
                bbox,
            });
        }
    }
    (hyp, gt)
}

/// Criterion 8: hand-crafted 2-track/20-frame scenarios reproduce
/// hand-counted ID-Sw, Frag, FP, FN exactly, MOTA matches its closed
/// form to 1e-12, and perfect tracking scores MOTA = MOTP = 1.
#[test]
fn criterion_8_mot_metric_identities() {
    // Perfect tracking.
    let (hyp, gt) = two_track_scenario();
    let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
    assert_eq!(
        (r.id_switches, r.fragmentations, r.false_positives, r.false_negatives),
        (0, 0, 0, 0)
    );
    assert!((r.mota - 1.0).abs() < 1e-12);
    assert!((r.motp - 1.0).abs() < 1e-12);

    // One mid-track label change on track 2: hand count ID-Sw = 1,
    // GT = 40, MOTA = 1 - 1/40.
    let (mut hyp, gt) = two_track_scenario();
    for h in hyp.iter_mut() {
        if h.label == 12 && h.frame >= 10 {
            h.label = 13;
        }
    }
    let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
    assert_eq!(r.id_switches, 1);
    assert_eq!(r.fragmentations, 0);
    assert!((r.mota - (1.0 - 1.0 / 40.0)).abs() < 1e-12);

    // Dropping frames 8..12 of track 2: hand count FN = 4, Frag = 1.
    let (hyp, gt) = two_track_scenario();
    let hyp: Vec<HypBox> = hyp
        .into_iter()
        .filter(|h| !(h.label == 12 && (8..12).contains(&h.frame)))
        .collect();
    let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
    assert_eq!(r.false_negatives, 4);
    assert_eq!(r.fragmentations, 1);
    assert_eq!(r.id_switches, 0);
    assert!((r.mota - (1.0 - 4.0 / 40.0)).abs() < 1e-12);

    // Five spurious boxes: FP = 5; dropping track 2 entirely: ML counts
    // it, MOTA = 1 - 20/40.
    let (mut hyp, gt) = two_track_scenario();
    for frame in 0..5u64 {
        hyp.push(HypBox {
            frame,
            label: 99,
            bbox: Bbox::new(900.0, 900.0, 0.5, 40.0),
        });
    }
    let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
    assert_eq!(r.false_positives, 5);
    assert!((r.mota - (1.0 - 5.0 / 40.0)).abs() < 1e-12);

    let (hyp, gt) = two_track_scenario();
    let hyp: Vec<HypBox> = hyp.into_iter().filter(|h| h.label != 12).collect();
    let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
    assert_eq!(r.false_negatives, 20);
    assert!((r.mostly_lost - 0.5).abs() < 1e-12);
    assert!((r.mota - 0.5).abs() < 1e-12);
    assert!(r.mostly_tracked + r.mostly_lost <= 1.0);

    println!("[criterion 8] hand-counted scenarios reproduced exactly");
}

/// Criterion 9: across 1,000 fuzzed insertions, every down or up
/// insertion is immediately re-searchable (the new leaf is reached with
/// rep distance exactly 0 and its label returned) and the path height
/// grows by exactly 1. Zero violations.
#[test]
fn criterion_9_insertion_contracts() {
    use rand::Rng;
    let cfg = IndexConfig::new(16, MetricKind::Cosine, 0.2, 0.9, 32).unwrap();
    let mut engine = LabelEngine::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    let mut reps: Vec<FeatureVector> = Vec::new();
    let (mut downs, mut ups, mut matches) = (0u64, 0u64, 0u64);

    for _ in 0..1_000 {
        let q = if !reps.is_empty() && rng.gen_bool(0.3) {
            // Near an existing representative: expect a match.
            let base = &reps[rng.gen_range(0..reps.len())];
            let values: Vec<f64> = base
                .as_slice()
                .iter()
                .map(|x| x + rng.gen_range(-0.01..0.01))
                .collect();
            FeatureVector::new(values).unwrap()
        } else {
            random_unit_vector(16, &mut rng)
        };

        // Read-only pre-pass: reached leaf, its depth, and the expected
        // classification.
        let pre = engine.lookup(&q).unwrap();
        let old_height = engine.tree().stats().height;
        let expected = match &pre {
            None => "create-root",
            Some(o) => {
                if o.rep_distance < 0.2 {
                    "match"
                } else if o.rep_distance < 0.9
                    || engine.tree().node(engine.tree().root().unwrap()).is_leaf()
                {
                    "down"
                } else {
                    "up"
                }
            }
        };
        let pre_depth = pre
            .as_ref()
            .map(|o| engine.tree().depth_of(o.leaf).unwrap());

        let r = engine.label_search(&q).unwrap();
        match expected {
            "match" => {
                assert!(!r.created);
                matches += 1;
            }
            "down" | "create-root" => {
                if expected == "down" {
                    assert!(r.created);
                    // The new leaf replaces the reached leaf's slot one
                    // level deeper.
                    let new_depth = engine.tree().depth_of(r.leaf).unwrap();
                    assert_eq!(new_depth, pre_depth.unwrap() + 1);
                    downs += 1;
                }
            }
            "up" => {
                assert!(r.created);
                assert_eq!(engine.tree().stats().height, old_height + 1);
                assert_eq!(engine.tree().depth_of(r.leaf), Some(1));
                ups += 1;
            }
            _ => unreachable!(),
        }

        if r.created {
            // Immediate re-search reaches the new leaf with d3 = 0.
            let out = engine.lookup(&q).unwrap().unwrap();
            assert_eq!(out.leaf, r.leaf);
            assert_eq!(out.rep_distance, 0.0);
            assert_eq!(out.label, Some(r.label));
            reps.push(q);
        }
    }
    engine.tree().check_structure().unwrap();
    println!(
        "[criterion 9] 1000 insertions: {downs} down, {ups} up, {matches} matches, 0 violations"
    );
    assert!(downs > 0 && ups > 0 && matches > 0, "all paths must fire");
}
