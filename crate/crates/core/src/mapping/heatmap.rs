use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::trace::saturating_inc;
use super::{Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex};
use crate::info::RecordInfo;

/// Counts, per blob byte, how often it was covered by a resolved access.
#[derive(Debug)]
pub struct Heatmap<M> {
    inner: M,
    bytes: Vec<Vec<AtomicU64>>,
}

impl<M: Mapping> Heatmap<M> {
    pub fn new(inner: M) -> Self {
        let bytes = (0..inner.blob_count())
            .map(|b| (0..inner.blob_size(b)).map(|_| AtomicU64::new(0)).collect())
            .collect();
        Self { inner, bytes }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn byte_hits(&self, blob: usize) -> Vec<u64> {
        self.bytes[blob]
            .iter()
            .map(|c| c.load(Ordering::Relaxed))
            .collect()
    }

    pub fn total_hits(&self) -> u64 {
        self.bytes
            .iter()
            .flatten()
            .fold(0u64, |acc, c| acc.saturating_add(c.load(Ordering::Relaxed)))
    }

    pub fn reset(&self) {
        self.bytes
            .iter()
            .flatten()
            .for_each(|c| c.store(0, Ordering::Relaxed));
    }
}

impl<M: Mapping> Mapping for Heatmap<M> {
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
        let r = self.inner.blob_nr_and_offset(index, leaf);
        let size = self.inner.record_info().leaf(leaf).size();
        self.bytes[r.blob][r.offset..r.offset + size]
            .iter()
            .for_each(saturating_inc);
        r
    }

    fn shares_across_indices(&self, leaf: usize) -> bool {
        self.inner.shares_across_indices(leaf)
    }

    fn descriptor(&self) -> String {
        format!("heatmap:{}", self.inner.descriptor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::SoA;
    use crate::record_dim;

    #[test]
    fn one_resolution_marks_leaf_bytes() {
        let info = RecordInfo::new(record_dim!({ A: f32, B: f64 }));
        let h = Heatmap::new(SoA::single_blob(ArrayExtents::linear(2).unwrap(), info));
        assert_eq!(h.total_hits(), 0);
        let r = h.blob_nr_and_offset(&1.into(), 0);
        let bytes = h.byte_hits(0);
        assert_eq!(bytes.iter().filter(|&&c| c == 1).count(), 4);
        assert!(bytes[r.offset..r.offset + 4].iter().all(|&c| c == 1));

        h.blob_nr_and_offset(&0.into(), 1);
        let bytes = h.byte_hits(0);
        assert_eq!(&bytes[8..16], &[1; 8]);
        assert_eq!(h.total_hits(), 12);
    }
}
