use std::sync::Arc;

use super::{linearizer_suffix, LeafSlot, Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex, Linearizer};
use crate::error::Result;
use crate::info::RecordInfo;

/// Struct of arrays: each leaf's values stored contiguously, either one blob
/// per leaf or all leaf arrays concatenated in one blob.
#[derive(Debug, Clone)]
pub struct SoA {
    extents: ArrayExtents,
    info: Arc<RecordInfo>,
    multi_blob: bool,
    linearizer: Linearizer,
    slots: Box<[LeafSlot]>,
}

impl SoA {
    pub fn new(extents: ArrayExtents, info: Arc<RecordInfo>, multi_blob: bool) -> Self {
        let n = extents.product();
        let mut cursor = 0;
        let slots = info
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, leaf)| {
                let slot = if multi_blob {
                    LeafSlot { blob: i, base: 0, stride: leaf.size() }
                } else {
                    LeafSlot { blob: 0, base: cursor, stride: leaf.size() }
                };
                cursor += n * leaf.size();
                slot
            })
            .collect();
        Self {
            extents,
            info,
            multi_blob,
            linearizer: Linearizer::RowMajor,
            slots,
        }
    }

    pub fn single_blob(extents: ArrayExtents, info: Arc<RecordInfo>) -> Self {
        Self::new(extents, info, false)
    }

    pub fn multi_blob(extents: ArrayExtents, info: Arc<RecordInfo>) -> Self {
        Self::new(extents, info, true)
    }

    pub fn with_linearizer(mut self, linearizer: Linearizer) -> Result<Self> {
        linearizer.validate(&self.extents)?;
        self.linearizer = linearizer;
        Ok(self)
    }

    pub fn is_multi_blob(&self) -> bool {
        self.multi_blob
    }

    #[inline]
    fn at_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
        let s = self.slots[leaf];
        NrAndOffset::new(s.blob, s.base + flat * s.stride)
    }
}

impl Mapping for SoA {
    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn record_info(&self) -> &Arc<RecordInfo> {
        &self.info
    }

    fn blob_count(&self) -> usize {
        if self.multi_blob {
            self.info.leaf_count()
        } else {
            1
        }
    }

    fn blob_size(&self, blob: usize) -> usize {
        let n = self.extents.product();
        if self.multi_blob {
            n * self.info.leaf(blob).size()
        } else {
            n * self.info.packed_size()
        }
    }

    #[inline]
    fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
        self.at_flat(self.linearizer.linearize(&self.extents, index), leaf)
    }

    #[inline]
    fn blob_nr_and_offset_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
        if self.linearizer == Linearizer::RowMajor {
            self.at_flat(flat, leaf)
        } else {
            let index = Linearizer::RowMajor.delinearize(&self.extents, flat);
            self.blob_nr_and_offset(&index, leaf)
        }
    }

    fn lanes(&self) -> Option<usize> {
        (self.linearizer == Linearizer::RowMajor).then(|| self.extents.product())
    }

    fn descriptor(&self) -> String {
        let base = if self.multi_blob { "soa:mb" } else { "soa" };
        format!("{base}{}", linearizer_suffix(self.linearizer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;

    #[test]
    fn multi_blob_offsets() {
        let info = RecordInfo::new(record_dim!({ X: f32, Y: f32 }));
        let m = SoA::multi_blob(ArrayExtents::linear(4).unwrap(), info);
        assert_eq!(m.blob_nr_and_offset(&2.into(), 1), NrAndOffset::new(1, 8));
        assert_eq!(m.blob_nr_and_offset(&0.into(), 0), NrAndOffset::new(0, 0));
        assert_eq!(m.blob_count(), 2);
        assert_eq!(m.blob_size(1), 16);
    }

    #[test]
    fn single_blob_offsets() {
        let info = RecordInfo::new(record_dim!({ X: f32, Y: f32 }));
        let m = SoA::single_blob(ArrayExtents::linear(4).unwrap(), info);
        assert_eq!(m.blob_nr_and_offset(&2.into(), 1), NrAndOffset::new(0, 24));
        assert_eq!(m.blob_nr_and_offset(&0.into(), 0), NrAndOffset::new(0, 0));
    }

    #[test]
    fn particle_blobs() {
        let info = RecordInfo::new(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        }));
        let e = ArrayExtents::linear(4).unwrap();
        assert_eq!(SoA::multi_blob(e, info.clone()).blob_count(), 7);
        let sb = SoA::single_blob(e, info);
        assert_eq!(sb.blob_count(), 1);
        assert_eq!(sb.blob_size(0), 84);
        assert_eq!(sb.lanes(), Some(4));
    }
}
