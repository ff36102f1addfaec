use std::sync::Arc;

use super::{Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex};
use crate::info::RecordInfo;

/// Collapses the whole array into a single aligned record: every index maps
/// to the same bytes.
#[derive(Debug, Clone)]
pub struct One {
    extents: ArrayExtents,
    info: Arc<RecordInfo>,
}

impl One {
    pub fn new(extents: ArrayExtents, info: Arc<RecordInfo>) -> Self {
        Self { extents, info }
    }

    /// A one-element mapping, used to back stack-local records.
    pub fn scalar(info: Arc<RecordInfo>) -> Self {
        Self::new(ArrayExtents::linear(1).expect("1 is a valid extent"), info)
    }
}

impl Mapping for One {
    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn record_info(&self) -> &Arc<RecordInfo> {
        &self.info
    }

    fn blob_count(&self) -> usize {
        1
    }

    fn blob_size(&self, _blob: usize) -> usize {
        self.info.aligned_size()
    }

    #[inline]
    fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
        debug_assert!(self.extents.contains(index), "{index} outside {}", self.extents);
        NrAndOffset::new(0, self.info.leaf(leaf).aligned_offset)
    }

    #[inline]
    fn blob_nr_and_offset_flat(&self, _flat: usize, leaf: usize) -> NrAndOffset {
        NrAndOffset::new(0, self.info.leaf(leaf).aligned_offset)
    }

    fn shares_across_indices(&self, _leaf: usize) -> bool {
        self.extents.product() > 1
    }

    fn descriptor(&self) -> String {
        "one".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;

    #[test]
    fn index_independent() {
        let info = RecordInfo::new(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        }));
        let m = One::new(ArrayExtents::new(&[4, 3]).unwrap(), info.clone());
        let mass = info.leaf_by_path("Mass").unwrap();
        assert_eq!(m.blob_nr_and_offset(&[2, 1].into(), mass), NrAndOffset::new(0, 16));
        assert_eq!(m.blob_nr_and_offset(&[0, 0].into(), 0), NrAndOffset::new(0, 0));
        assert_eq!(
            m.blob_nr_and_offset(&[3, 2].into(), mass),
            m.blob_nr_and_offset(&[1, 0].into(), mass)
        );
        assert_eq!(m.blob_size(0), 32);
    }
}
