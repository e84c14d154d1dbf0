//! The full engine workflow with an oracle mirror: every vector is
//! label-searched; vectors that match an existing profile accumulate in
//! per-label bags which are batch-inserted (when a bag reaches the leaf
//! capacity, and at flush). The flat store mirrors everything the tree
//! holds, so oracle comparisons and cost sweeps see the same corpus.

use std::collections::BTreeMap;

use crate::batch::{BagSource, MetadataBag};
use crate::engine::{LabelEngine, LabelResult};
use crate::error::Result;
use crate::metric::{FeatureVector, IndexConfig};
use crate::oracle::{agreement, AgreementReport, FlatStore};
use crate::tree::NodeId;

struct PendingBag {
    node: NodeId,
    vectors: Vec<FeatureVector>,
}

/// An engine paired with the flat-store mirror of its contents.
pub struct MirroredIndex {
    engine: LabelEngine,
    store: FlatStore,
    pending: BTreeMap<u64, PendingBag>,
    flush_at: usize,
    seed: u64,
    bags_inserted: u64,
}

impl MirroredIndex {
    pub fn new(config: IndexConfig, seed: u64) -> Self {
        let flush_at = config.c_max;
        let store = FlatStore::new(config.metric);
        MirroredIndex {
            engine: LabelEngine::new(config),
            store,
            pending: BTreeMap::new(),
            flush_at,
            seed,
            bags_inserted: 0,
        }
    }

    pub fn engine(&self) -> &LabelEngine {
        &self.engine
    }

    pub fn store(&self) -> &FlatStore {
        &self.store
    }

    /// Label search that keeps the mirror in sync: a created profile's
    /// representative (the query itself) is appended to the store.
    pub fn search_and_mirror(&mut self, vector: &FeatureVector) -> Result<LabelResult> {
        let prepared = self.engine.config().prepare(vector.clone())?;
        let result = self.engine.label_search(&prepared)?;
        if result.created {
            self.store.push(prepared, result.label);
        }
        Ok(result)
    }

    /// Runs one vector through the workflow: label search, then either a
    /// new profile (the vector becomes its representative) or an entry in
    /// the matched profile's pending bag.
    pub fn ingest(&mut self, vector: FeatureVector) -> Result<LabelResult> {
        let prepared = self.engine.config().prepare(vector)?;
        let result = self.engine.label_search(&prepared)?;
        if result.created {
            self.store.push(prepared, result.label);
        } else {
            let entry = self
                .pending
                .entry(result.label.id())
                .or_insert_with(|| PendingBag {
                    node: result.leaf,
                    vectors: Vec::new(),
                });
            entry.vectors.push(prepared);
            if entry.vectors.len() >= self.flush_at {
                self.flush_label(result.label.id())?;
            }
        }
        Ok(result)
    }

    fn flush_label(&mut self, label: u64) -> Result<()> {
        let Some(bag) = self.pending.remove(&label) else {
            return Ok(());
        };
        let label = crate::tree::ProfileLabel::new(label);
        for v in &bag.vectors {
            self.store.push(v.clone(), label);
        }
        let seed = self
            .seed
            .wrapping_add(self.bags_inserted.wrapping_mul(0x9e3779b97f4a7c15));
        self.bags_inserted += 1;
        let meta = MetadataBag::new(label, bag.vectors)?;
        self.engine.batch_insert(bag.node, meta, seed)
    }

    /// Batch-inserts every pending bag (deterministic label order).
    pub fn flush_all(&mut self) -> Result<()> {
        let labels: Vec<u64> = self.pending.keys().copied().collect();
        for label in labels {
            self.flush_label(label)?;
        }
        Ok(())
    }

    /// Inserts a pre-assembled bag directly (used by the tracking
    /// harness, which collects bags per track).
    pub fn insert_bag(
        &mut self,
        node: NodeId,
        label: crate::tree::ProfileLabel,
        vectors: Vec<FeatureVector>,
        source: Option<BagSource>,
    ) -> Result<()> {
        let mut prepared = Vec::with_capacity(vectors.len());
        for v in vectors {
            prepared.push(self.engine.config().prepare(v)?);
        }
        for v in &prepared {
            self.store.push(v.clone(), label);
        }
        let seed = self
            .seed
            .wrapping_add(self.bags_inserted.wrapping_mul(0x9e3779b97f4a7c15));
        self.bags_inserted += 1;
        let mut meta = MetadataBag::new(label, prepared)?;
        meta.source = source;
        self.engine.batch_insert(node, meta, seed)
    }

    /// Oracle agreement over a query batch; pending bags must be flushed
    /// first so the mirror invariant holds.
    pub fn agreement(&self, queries: &[FeatureVector]) -> Result<AgreementReport> {
        agreement(&self.engine, &self.store, queries)
    }
}
