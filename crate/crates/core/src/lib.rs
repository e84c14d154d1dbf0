//! Adaptive profile-label retrieval for object tracking.
//!
//! A metric tree assigns stable identity labels to appearance embeddings:
//! queries descend greedily by pivot distances, a match threshold decides
//! whether the reached profile is the same object, and two insertion
//! strategies (down beside the nearest profile, up at the root) place new
//! profiles. Tracked objects' collected metadata is batch-inserted into
//! their profile leaves, which split by two-way clustering at capacity.
//!
//! The crate also ships the evaluation tooling around the index: an
//! exhaustive-scan oracle, a synthetic scene generator, a constant
//! velocity Kalman tracking harness, CLEAR-style tracking metrics, and
//! CSV ingestion/reporting used by the CLI.
//!
//! Batch evaluation paths (oracle scans, batch lookups, cluster
//! assignment) run data-parallel under the default `parallel` feature and
//! fall back to sequential loops without it.

pub mod batch;
pub mod bbox;
pub mod engine;
pub mod error;
pub mod io;
pub mod kalman;
pub mod metric;
pub mod mot;
pub mod oracle;
pub mod scene;
pub mod track;
pub mod tree;
pub mod workflow;

/// Minimum batch size before the parallel paths kick in.
#[cfg(feature = "parallel")]
pub(crate) const PAR_THRESHOLD: usize = 1024;

pub use batch::{BagSource, MetadataBag, PartitionOutcome};
pub use bbox::Bbox;
pub use engine::{LabelAllocator, LabelEngine, LabelResult, LookupOutcome, SearchStats};
pub use error::{Error, Result};
pub use kalman::{KalmanConfig, KalmanFilter, TrackState};
pub use metric::{
    distance, mean, normalize, try_distance, FeatureVector, IndexConfig, MetricKind,
    DEFAULT_DIMENSION,
};
pub use mot::{compute_mot_metrics, GtBox, HypBox, MotReport};
pub use oracle::{linear_label_search, AgreementReport, FlatStore, ScanResult};
pub use scene::{clustered_corpus, generate_scene, Detection, SceneSpec};
pub use track::{
    run_tracking, truth_from_stream, EngineLabeler, Labeler, NaiveLabeler, TrackRecord,
    TrackerConfig, TrackingOutput,
};
pub use tree::{Node, NodeId, ProfileLabel, ProfileTree, Side, Slot, TreeStats};
pub use workflow::MirroredIndex;
