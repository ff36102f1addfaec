use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex};
use crate::info::RecordInfo;

/// Per-leaf access counter entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldHits {
    pub path: String,
    pub count: u64,
}

/// Counts address resolutions per leaf, then forwards to the inner mapping.
#[derive(Debug)]
pub struct Trace<M> {
    inner: M,
    hits: Vec<AtomicU64>,
}

pub(crate) fn saturating_inc(counter: &AtomicU64) {
    let _ = counter.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |c| c.checked_add(1));
}

impl<M: Mapping> Trace<M> {
    pub fn new(inner: M) -> Self {
        let hits = (0..inner.leaf_count()).map(|_| AtomicU64::new(0)).collect();
        Self { inner, hits }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Counter per leaf, in flatten order.
    pub fn field_hits(&self) -> Vec<FieldHits> {
        self.inner
            .record_info()
            .leaves()
            .iter()
            .zip(&self.hits)
            .map(|(leaf, c)| FieldHits {
                path: leaf.path.clone(),
                count: c.load(Ordering::Relaxed),
            })
            .collect()
    }

    pub fn hits(&self, leaf: usize) -> u64 {
        self.hits[leaf].load(Ordering::Relaxed)
    }

    pub fn total_hits(&self) -> u64 {
        self.hits
            .iter()
            .fold(0u64, |acc, c| acc.saturating_add(c.load(Ordering::Relaxed)))
    }

    pub fn reset(&self) {
        self.hits.iter().for_each(|c| c.store(0, Ordering::Relaxed));
    }
}

impl<M: Mapping> Mapping for Trace<M> {
    fn extents(&self) -> &ArrayExtents {
        self.inner.extents()
    }

    fn record_info(&self) -> &Arc<RecordInfo> {
        self.inner.record_info()
    }

    fn blob_count(&self) -> usize {
        self.inner.blob_count()
    }

    fn blob_size(&self, blob: usize) -> usize {
        self.inner.blob_size(blob)
    }

    fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
        saturating_inc(&self.hits[leaf]);
        self.inner.blob_nr_and_offset(index, leaf)
    }

    fn shares_across_indices(&self, leaf: usize) -> bool {
        self.inner.shares_across_indices(leaf)
    }

    fn descriptor(&self) -> String {
        format!("trace:{}", self.inner.descriptor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::AoS;
    use crate::record_dim;

    #[test]
    fn counts_resolutions_per_leaf() {
        let info = RecordInfo::new(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
        }));
        let e = ArrayExtents::linear(4).unwrap();
        let t = Trace::new(AoS::packed(e, info.clone()));
        assert!(t.field_hits().iter().all(|h| h.count == 0));
        let x = info.leaf_by_path("Pos.X").unwrap();
        for _ in 0..3 {
            assert_eq!(
                t.blob_nr_and_offset(&1.into(), x),
                t.inner().blob_nr_and_offset(&1.into(), x)
            );
        }
        let hits = t.field_hits();
        assert_eq!(hits[x], FieldHits { path: "Pos.X".into(), count: 3 });
        assert_eq!(hits[0].count, 0);
        assert_eq!(t.total_hits(), 3);
        t.reset();
        assert_eq!(t.total_hits(), 0);
    }

    #[test]
    fn counters_saturate() {
        let c = AtomicU64::new(u64::MAX - 1);
        saturating_inc(&c);
        saturating_inc(&c);
        assert_eq!(c.load(Ordering::Relaxed), u64::MAX);
    }
}
