//! The tracking harness: detections are associated to live tracks by
//! predicted-box IoU, tracks run a constant-velocity Kalman filter, new
//! physical tracks get their label from a [`Labeler`], and a terminated
//! track's collected features are handed back as its metadata bag.

use std::collections::BTreeMap;

use crate::engine::LabelAllocator;
use crate::error::Result;
use crate::kalman::{KalmanConfig, KalmanFilter, TrackState};
use crate::metric::FeatureVector;
use crate::mot::{GtBox, HypBox};
use crate::scene::Detection;
use crate::tree::{NodeId, ProfileLabel};
use crate::workflow::MirroredIndex;

/// Source of identity labels for new tracks, and sink for the metadata
/// bags of finished tracks.
pub trait Labeler {
    fn label_for(&mut self, feature: &FeatureVector) -> Result<(ProfileLabel, Option<NodeId>)>;

    fn finish_track(
        &mut self,
        label: ProfileLabel,
        node: Option<NodeId>,
        bag: Vec<FeatureVector>,
        camera: u32,
        frames: (u64, u64),
    ) -> Result<()>;
}

/// Labels via the profile index (with its oracle mirror kept in sync)
/// and batch-inserts finished bags.
pub struct EngineLabeler<'a> {
    index: &'a mut MirroredIndex,
}

impl<'a> EngineLabeler<'a> {
    pub fn new(index: &'a mut MirroredIndex) -> Self {
        EngineLabeler { index }
    }
}

impl Labeler for EngineLabeler<'_> {
    fn label_for(&mut self, feature: &FeatureVector) -> Result<(ProfileLabel, Option<NodeId>)> {
        let r = self.index.search_and_mirror(feature)?;
        Ok((r.label, Some(r.leaf)))
    }

    fn finish_track(
        &mut self,
        label: ProfileLabel,
        node: Option<NodeId>,
        bag: Vec<FeatureVector>,
        camera: u32,
        frames: (u64, u64),
    ) -> Result<()> {
        let Some(node) = node else { return Ok(()) };
        if bag.is_empty() {
            return Ok(());
        }
        self.index.insert_bag(
            node,
            label,
            bag,
            Some(crate::batch::BagSource { camera, frames }),
        )
    }
}

/// Baseline labeler: every physical track gets a fresh label, nothing is
/// indexed. This is the conventional tracker the index is compared with.
pub struct NaiveLabeler {
    alloc: LabelAllocator,
}

impl NaiveLabeler {
    pub fn new() -> Self {
        NaiveLabeler {
            alloc: LabelAllocator::new(),
        }
    }
}

impl Default for NaiveLabeler {
    fn default() -> Self {
        Self::new()
    }
}

impl Labeler for NaiveLabeler {
    fn label_for(&mut self, _feature: &FeatureVector) -> Result<(ProfileLabel, Option<NodeId>)> {
        Ok((self.alloc.allocate(), None))
    }

    fn finish_track(
        &mut self,
        _label: ProfileLabel,
        _node: Option<NodeId>,
        _bag: Vec<FeatureVector>,
        _camera: u32,
        _frames: (u64, u64),
    ) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrackerConfig {
    /// Frames a track survives without a detection before termination.
    pub max_missed: u32,
    /// Detections to skip before the label search fires (0 = search on
    /// the first detection).
    pub confirm_after: u32,
    /// Minimum predicted-box IoU for association.
    pub min_iou: f64,
    pub kalman: KalmanConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            max_missed: 30,
            confirm_after: 0,
            min_iou: 0.1,
            kalman: KalmanConfig::default(),
        }
    }
}

/// Summary of one finished track.
#[derive(Clone, Copy, Debug)]
pub struct TrackRecord {
    pub label: ProfileLabel,
    pub camera: u32,
    pub first_frame: u64,
    pub last_frame: u64,
    pub detections: u64,
}

/// Harness output: per-frame labeled box estimates (the hypothesis
/// stream for metric computation) and per-track summaries.
#[derive(Clone, Debug, Default)]
pub struct TrackingOutput {
    pub estimates: Vec<HypBox>,
    pub records: Vec<TrackRecord>,
}

struct LiveTrack {
    state: TrackState,
    label: Option<ProfileLabel>,
    node: Option<NodeId>,
    bag: Vec<FeatureVector>,
    pending: Vec<FeatureVector>,
    hits: u32,
    missed: u32,
    camera: u32,
    first_frame: u64,
    last_frame: u64,
    detections: u64,
}

/// Ground-truth boxes carried by a synthetic stream.
pub fn truth_from_stream(stream: &[Detection]) -> Vec<GtBox> {
    stream
        .iter()
        .filter_map(|d| {
            d.truth_id.map(|id| GtBox {
                frame: d.frame,
                id,
                bbox: d.bbox,
            })
        })
        .collect()
}

/// Runs the tracker over a frame-ordered detection stream.
pub fn run_tracking(
    stream: &[Detection],
    labeler: &mut dyn Labeler,
    cfg: &TrackerConfig,
) -> Result<TrackingOutput> {
    let kf = KalmanFilter::new(cfg.kalman);
    let mut frames: BTreeMap<u64, Vec<&Detection>> = BTreeMap::new();
    for d in stream {
        frames.entry(d.frame).or_default().push(d);
    }

    let mut tracks: Vec<LiveTrack> = Vec::new();
    let mut output = TrackingOutput::default();

    let retire = |track: LiveTrack, labeler: &mut dyn Labeler, out: &mut TrackingOutput| -> Result<()> {
        if let Some(label) = track.label {
            out.records.push(TrackRecord {
                label,
                camera: track.camera,
                first_frame: track.first_frame,
                last_frame: track.last_frame,
                detections: track.detections,
            });
            labeler.finish_track(
                label,
                track.node,
                track.bag,
                track.camera,
                (track.first_frame, track.last_frame),
            )?;
        }
        Ok(())
    };

    for (&frame, dets) in &frames {
        for t in tracks.iter_mut() {
            t.state = kf.predict(&t.state);
        }

        // Candidate pairs above the IoU gate, greedily matched best-first.
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (ti, t) in tracks.iter().enumerate() {
            let tb = t.state.bbox();
            for (di, d) in dets.iter().enumerate() {
                if d.camera != t.camera {
                    continue;
                }
                let iou = tb.iou(&d.bbox);
                if iou >= cfg.min_iou {
                    pairs.push((ti, di, iou));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .unwrap()
                .then(a.0.cmp(&b.0))
                .then(a.1.cmp(&b.1))
        });
        let mut track_taken = vec![false; tracks.len()];
        let mut det_taken = vec![false; dets.len()];
        let mut matched: Vec<(usize, usize)> = Vec::new();
        for (ti, di, _) in pairs {
            if !track_taken[ti] && !det_taken[di] {
                track_taken[ti] = true;
                det_taken[di] = true;
                matched.push((ti, di));
            }
        }

        for (ti, di) in matched {
            let det = dets[di];
            let t = &mut tracks[ti];
            t.state = kf.update(&t.state, &det.bbox);
            t.hits += 1;
            t.missed = 0;
            t.last_frame = frame;
            t.detections += 1;
            if t.label.is_some() {
                t.bag.push(det.feature.clone());
            } else {
                t.pending.push(det.feature.clone());
                if t.hits > cfg.confirm_after {
                    let (label, node) = labeler.label_for(&det.feature)?;
                    t.label = Some(label);
                    t.node = node;
                    t.bag.append(&mut t.pending);
                }
            }
        }

        for (ti, taken) in track_taken.iter().enumerate() {
            if !taken {
                tracks[ti].missed += 1;
            }
        }

        for (di, det) in dets.iter().enumerate() {
            if det_taken[di] {
                continue;
            }
            let mut t = LiveTrack {
                state: kf.initiate(&det.bbox),
                label: None,
                node: None,
                bag: Vec::new(),
                pending: vec![det.feature.clone()],
                hits: 1,
                missed: 0,
                camera: det.camera,
                first_frame: frame,
                last_frame: frame,
                detections: 1,
            };
            if t.hits > cfg.confirm_after {
                let (label, node) = labeler.label_for(&det.feature)?;
                t.label = Some(label);
                t.node = node;
                t.bag.append(&mut t.pending);
            }
            tracks.push(t);
        }

        // Report labeled tracks that were observed this frame.
        for t in tracks.iter() {
            if t.missed == 0 && t.last_frame == frame {
                if let Some(label) = t.label {
                    output.estimates.push(HypBox {
                        frame,
                        label: label.id(),
                        bbox: t.state.bbox(),
                    });
                }
            }
        }

        // Terminate stale tracks.
        let mut i = 0;
        while i < tracks.len() {
            if tracks[i].missed > cfg.max_missed {
                let t = tracks.swap_remove(i);
                retire(t, labeler, &mut output)?;
            } else {
                i += 1;
            }
        }
    }

    for t in tracks.drain(..) {
        retire(t, labeler, &mut output)?;
    }

    output
        .estimates
        .sort_by(|a, b| a.frame.cmp(&b.frame).then(a.label.cmp(&b.label)));
    output.records.sort_by(|a, b| {
        a.first_frame
            .cmp(&b.first_frame)
            .then(a.label.id().cmp(&b.label.id()))
    });
    Ok(output)
}
