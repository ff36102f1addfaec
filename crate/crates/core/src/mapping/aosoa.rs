use std::sync::Arc;

use super::{linearizer_suffix, LeafSlot, Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex, Linearizer};
use crate::error::{LayoutError, Result};
use crate::info::RecordInfo;

/// Blocks of `lanes` records; inside a block each leaf is stored `lanes` times
/// in a row before the next leaf. The final partial block is padded to full size.
#[derive(Debug, Clone)]
pub struct AoSoA {
    extents: ArrayExtents,
    info: Arc<RecordInfo>,
    lanes: usize,
    linearizer: Linearizer,
    block_size: usize,
    /// `log2(lanes)` when `lanes` is a power of two.
    shift: Option<u32>,
    slots: Box<[LeafSlot]>,
}

impl AoSoA {
    pub fn new(extents: ArrayExtents, info: Arc<RecordInfo>, lanes: usize) -> Result<Self> {
        if lanes == 0 {
            return Err(LayoutError::Config("AoSoA needs at least one lane".into()));
        }
        let block_size = lanes * info.packed_size();
        let slots = info
            .leaves()
            .iter()
            .map(|l| LeafSlot { blob: 0, base: l.packed_offset * lanes, stride: l.size() })
            .collect();
        Ok(Self {
            extents,
            info,
            lanes,
            linearizer: Linearizer::RowMajor,
            block_size,
            shift: lanes.is_power_of_two().then(|| lanes.trailing_zeros()),
            slots,
        })
    }

    pub fn with_linearizer(mut self, linearizer: Linearizer) -> Result<Self> {
        linearizer.validate(&self.extents)?;
        self.linearizer = linearizer;
        Ok(self)
    }

    pub fn lane_count(&self) -> usize {
        self.lanes
    }

    #[inline]
    fn at_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
        let (block, lane) = match self.shift {
            Some(s) => (flat >> s, flat & (self.lanes - 1)),
            None => (flat / self.lanes, flat % self.lanes),
        };
        let s = self.slots[leaf];
        NrAndOffset::new(s.blob, block * self.block_size + s.base + lane * s.stride)
    }
}

impl Mapping for AoSoA {
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
        self.extents.product().div_ceil(self.lanes) * self.block_size
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
        (self.linearizer == Linearizer::RowMajor).then_some(self.lanes)
    }

    fn descriptor(&self) -> String {
        format!("aosoa:{}{}", self.lanes, linearizer_suffix(self.linearizer))
    }
}
