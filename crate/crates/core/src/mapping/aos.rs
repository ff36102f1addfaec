use std::sync::Arc;

use super::{linearizer_suffix, LeafSlot, Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex, Linearizer};
use crate::error::Result;
use crate::info::RecordInfo;
use crate::record::Packing;

/// Array of structs: whole records repeated back to back in a single blob.
#[derive(Debug, Clone)]
pub struct AoS {
    extents: ArrayExtents,
    info: Arc<RecordInfo>,
    packing: Packing,
    linearizer: Linearizer,
    record_size: usize,
    slots: Box<[LeafSlot]>,
}

impl AoS {
    pub fn new(extents: ArrayExtents, info: Arc<RecordInfo>, packing: Packing) -> Self {
        let record_size = info.size(packing);
        let slots = info
            .leaves()
            .iter()
            .map(|l| LeafSlot { blob: 0, base: l.offset(packing), stride: record_size })
            .collect();
        Self {
            extents,
            info,
            packing,
            linearizer: Linearizer::RowMajor,
            record_size,
            slots,
        }
    }

    pub fn packed(extents: ArrayExtents, info: Arc<RecordInfo>) -> Self {
        Self::new(extents, info, Packing::Packed)
    }

    pub fn aligned(extents: ArrayExtents, info: Arc<RecordInfo>) -> Self {
        Self::new(extents, info, Packing::Aligned)
    }

    pub fn with_linearizer(mut self, linearizer: Linearizer) -> Result<Self> {
        linearizer.validate(&self.extents)?;
        self.linearizer = linearizer;
        Ok(self)
    }

    pub fn packing(&self) -> Packing {
        self.packing
    }

    #[inline]
    fn at_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
        let s = self.slots[leaf];
        NrAndOffset::new(s.blob, s.base + flat * s.stride)
    }
}

impl Mapping for AoS {
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
        self.extents.product() * self.record_size
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

    fn descriptor(&self) -> String {
        let base = match self.packing {
            Packing::Packed => "aos:packed",
            Packing::Aligned => "aos",
        };
        format!("{base}{}", linearizer_suffix(self.linearizer))
    }
}
