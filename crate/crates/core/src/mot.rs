//! CLEAR-style tracking metrics: frame-level IoU matching with
//! match continuity, identity switches, fragmentations, FP/FN, mostly
//! tracked / mostly lost, MOTA and MOTP.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::bbox::Bbox;
use crate::error::{Error, Result};

/// One ground-truth box.
#[derive(Clone, Copy, Debug)]
pub struct GtBox {
    pub frame: u64,
    pub id: u64,
    pub bbox: Bbox,
}

/// One hypothesis box reported by a tracker.
#[derive(Clone, Copy, Debug)]
pub struct HypBox {
    pub frame: u64,
    pub label: u64,
    pub bbox: Bbox,
}

/// Aggregated tracking quality over one sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MotReport {
    /// Matched ground-truth identities changing their assigned label.
    pub id_switches: u64,
    /// Times a trajectory's coverage was interrupted and later resumed.
    pub fragmentations: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    /// Fraction of identities covered at least 80% of their lifespan.
    pub mostly_tracked: f64,
    /// Fraction of identities covered at most 20% of their lifespan.
    pub mostly_lost: f64,
    /// 1 - (FN + FP + ID switches) / total ground-truth boxes.
    pub mota: f64,
    /// Mean IoU over all matches.
    pub motp: f64,
}

impl fmt::Display for MotReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ID-Sw {} | Frag {} | FP {} | FN {} | MT {:.3} | ML {:.3} | MOTA {:.4} | MOTP {:.4}",
            self.id_switches,
            self.fragmentations,
            self.false_positives,
            self.false_negatives,
            self.mostly_tracked,
            self.mostly_lost,
            self.mota,
            self.motp
        )
    }
}

#[derive(Default)]
struct GtState {
    present: u64,
    matched: u64,
    last_label: Option<u64>,
    ever_matched: bool,
    pending_gap: bool,
}

/// Computes the metrics by frame-level matching at the given IoU
/// threshold. Matches persist frame to frame while they stay above the
/// threshold; remaining candidates are matched greedily by descending
/// IoU. Rejects empty ground truth.
pub fn compute_mot_metrics(
    hypotheses: &[HypBox],
    truth: &[GtBox],
    iou_threshold: f64,
) -> Result<MotReport> {
    if truth.is_empty() {
        return Err(Error::Config("ground truth is empty".into()));
    }

    let mut gt_frames: BTreeMap<u64, Vec<&GtBox>> = BTreeMap::new();
    for g in truth {
        gt_frames.entry(g.frame).or_default().push(g);
    }
    let mut hyp_frames: BTreeMap<u64, Vec<&HypBox>> = BTreeMap::new();
    for h in hypotheses {
        hyp_frames.entry(h.frame).or_default().push(h);
    }
    let frames: BTreeSet<u64> = gt_frames
        .keys()
        .chain(hyp_frames.keys())
        .copied()
        .collect();

    let mut report = MotReport::default();
    let mut states: HashMap<u64, GtState> = HashMap::new();
    // Matches carried from the previous frame: gt id -> label.
    let mut carried: HashMap<u64, u64> = HashMap::new();
    let mut gt_total = 0u64;
    let mut matches_total = 0u64;
    let mut iou_sum = 0.0f64;

    let empty_gt: Vec<&GtBox> = Vec::new();
    let empty_hyp: Vec<&HypBox> = Vec::new();
    for frame in frames {
        let gts = gt_frames.get(&frame).unwrap_or(&empty_gt);
        let hyps = hyp_frames.get(&frame).unwrap_or(&empty_hyp);
        gt_total += gts.len() as u64;

        let mut gt_taken = vec![false; gts.len()];
        let mut hyp_taken = vec![false; hyps.len()];
        let mut matches: Vec<(usize, usize, f64)> = Vec::new();

        // Keep last frame's correspondence when it still holds.
        for (gi, g) in gts.iter().enumerate() {
            let Some(&label) = carried.get(&g.id) else {
                continue;
            };
            let Some(hi) = hyps.iter().position(|h| h.label == label) else {
                continue;
            };
            if hyp_taken[hi] {
                continue;
            }
            let iou = g.bbox.iou(&hyps[hi].bbox);
            if iou >= iou_threshold {
                gt_taken[gi] = true;
                hyp_taken[hi] = true;
                matches.push((gi, hi, iou));
            }
        }

        // Greedy best-first on what remains.
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (gi, g) in gts.iter().enumerate() {
            if gt_taken[gi] {
                continue;
            }
            for (hi, h) in hyps.iter().enumerate() {
                if hyp_taken[hi] {
                    continue;
                }
                let iou = g.bbox.iou(&h.bbox);
                if iou >= iou_threshold {
                    pairs.push((gi, hi, iou));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .unwrap()
                .then(gts[a.0].id.cmp(&gts[b.0].id))
                .then(hyps[a.1].label.cmp(&hyps[b.1].label))
        });
        for (gi, hi, iou) in pairs {
            if !gt_taken[gi] && !hyp_taken[hi] {
                gt_taken[gi] = true;
                hyp_taken[hi] = true;
                matches.push((gi, hi, iou));
            }
        }

        carried.clear();
        for (gi, hi, iou) in &matches {
            let g = gts[*gi];
            let h = hyps[*hi];
            let state = states.entry(g.id).or_default();
            if let Some(last) = state.last_label {
                if last != h.label {
                    report.id_switches += 1;
                }
            }
            if state.pending_gap {
                report.fragmentations += 1;
                state.pending_gap = false;
            }
            state.last_label = Some(h.label);
            state.ever_matched = true;
            state.matched += 1;
            carried.insert(g.id, h.label);
            matches_total += 1;
            iou_sum += iou;
        }

        for (gi, g) in gts.iter().enumerate() {
            let state = states.entry(g.id).or_default();
            state.present += 1;
            if !gt_taken[gi] {
                report.false_negatives += 1;
                if state.ever_matched {
                    state.pending_gap = true;
                }
            }
        }
        report.false_positives += hyp_taken.iter().filter(|t| !**t).count() as u64;
    }

    let ids = states.len() as f64;
    let mut mt = 0u64;
    let mut ml = 0u64;
    for state in states.values() {
        let coverage = state.matched as f64 / state.present.max(1) as f64;
        if coverage >= 0.8 {
            mt += 1;
        }
        if coverage <= 0.2 {
            ml += 1;
        }
    }
    report.mostly_tracked = mt as f64 / ids;
    report.mostly_lost = ml as f64 / ids;
    report.mota = 1.0
        - (report.false_negatives + report.false_positives + report.id_switches) as f64
            / gt_total as f64;
    report.motp = if matches_total > 0 {
        iou_sum / matches_total as f64
    } else {
        0.0
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxes(frame: u64, specs: &[(u64, f64)]) -> (Vec<GtBox>, Vec<HypBox>) {
        let gt = specs
            .iter()
            .map(|(id, u)| GtBox {
                frame,
                id: *id,
                bbox: Bbox::new(*u, 100.0 * *id as f64, 0.5, 40.0),
            })
            .collect();
        let hyp = specs
            .iter()
            .map(|(id, u)| HypBox {
                frame,
                label: 100 + *id,
                bbox: Bbox::new(*u, 100.0 * *id as f64, 0.5, 40.0),
            })
            .collect();
        (gt, hyp)
    }

    /// Two perfectly tracked identities over 20 frames.
    fn perfect_scenario() -> (Vec<HypBox>, Vec<GtBox>) {
        let mut gt = Vec::new();
        let mut hyp = Vec::new();
        for frame in 0..20 {
            let (g, h) = boxes(frame, &[(1, 40.0 + 3.0 * frame as f64), (2, 40.0 + 3.0 * frame as f64)]);
            gt.extend(g);
            hyp.extend(h);
        }
        (hyp, gt)
    }

    #[test]
    fn perfect_tracking_scores_perfectly() {
        let (hyp, gt) = perfect_scenario();
        let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
        assert_eq!(r.id_switches, 0);
        assert_eq!(r.false_positives, 0);
        assert_eq!(r.false_negatives, 0);
        assert_eq!(r.fragmentations, 0);
        assert!((r.mota - 1.0).abs() < 1e-12);
        assert!((r.motp - 1.0).abs() < 1e-12);
        assert!((r.mostly_tracked - 1.0).abs() < 1e-12);
        assert_eq!(r.mostly_lost, 0.0);
    }

    #[test]
    fn one_mid_track_label_change_counts_one_switch() {
        let (mut hyp, gt) = perfect_scenario();
        // Track 2's label changes from frame 10 on.
        for h in hyp.iter_mut() {
            if h.label == 102 && h.frame >= 10 {
                h.label = 103;
            }
        }
        let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
        assert_eq!(r.id_switches, 1);
        // Hand count: GT = 40 boxes, errors = 1 switch.
        assert!((r.mota - (1.0 - 1.0 / 40.0)).abs() < 1e-12);
        assert_eq!(r.fragmentations, 0);
    }

    #[test]
    fn dropping_one_track_entirely_is_mostly_lost() {
        let (hyp, gt) = perfect_scenario();
        let hyp: Vec<HypBox> = hyp.into_iter().filter(|h| h.label != 102).collect();
        let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
        assert_eq!(r.false_negatives, 20);
        assert!((r.mostly_lost - 0.5).abs() < 1e-12);
        assert!((r.mostly_tracked - 0.5).abs() < 1e-12);
        assert!((r.mota - 0.5).abs() < 1e-12);
        assert!((r.motp - 1.0).abs() < 1e-12);
        // mt + ml never exceeds 1.
        assert!(r.mostly_tracked + r.mostly_lost <= 1.0);
    }

    #[test]
    fn coverage_gap_counts_one_fragmentation() {
        let (hyp, gt) = perfect_scenario();
        // Track 2 unreported during frames 8..12 while the truth persists.
        let hyp: Vec<HypBox> = hyp
            .into_iter()
            .filter(|h| !(h.label == 102 && (8..12).contains(&h.frame)))
            .collect();
        let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
        assert_eq!(r.fragmentations, 1);
        assert_eq!(r.false_negatives, 4);
        assert_eq!(r.id_switches, 0);
    }

    #[test]
    fn spurious_boxes_count_as_false_positives() {
        let (mut hyp, gt) = perfect_scenario();
        for frame in 0..5 {
            hyp.push(HypBox {
                frame,
                label: 999,
                bbox: Bbox::new(500.0, 500.0, 0.5, 40.0),
            });
        }
        let r = compute_mot_metrics(&hyp, &gt, 0.5).unwrap();
        assert_eq!(r.false_positives, 5);
        assert!((r.mota - (1.0 - 5.0 / 40.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_truth_is_rejected() {
        let (hyp, _) = perfect_scenario();
        assert!(compute_mot_metrics(&hyp, &[], 0.5).is_err());
    }
}
