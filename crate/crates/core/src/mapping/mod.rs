//! Mappings translate an (array index, leaf) pair into a blob number and byte offset.
//!
//! A mapping fixes the physical layout of a data space: how many blobs it needs,
//! how large each blob is, and where every leaf of every record lives. Views
//! call [`Mapping::blob_nr_and_offset`] only on terminal accesses.

mod aos;
mod aosoa;
mod desc;
mod heatmap;
mod one;
mod soa;
mod split;
mod trace;
pub mod verify;

use std::sync::Arc;

pub use aos::AoS;
pub use aosoa::AoSoA;
pub use desc::MappingDesc;
pub use heatmap::Heatmap;
pub use one::One;
pub use soa::SoA;
pub use split::Split;
pub use trace::{FieldHits, Trace};

use crate::array::{ArrayExtents, ArrayIndex, Linearizer};
use crate::info::RecordInfo;

/// Location of a leaf: blob number and byte offset inside that blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NrAndOffset {
    pub blob: usize,
    pub offset: usize,
}

impl NrAndOffset {
    pub fn new(blob: usize, offset: usize) -> Self {
        Self { blob, offset }
    }
}

/// Element `i` of a leaf lives at `base + i * stride` in `blob`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LeafSlot {
    pub blob: usize,
    pub base: usize,
    pub stride: usize,
}

/// The mapping contract.
///
/// Leaves are addressed by their ordinal in flatten order (see
/// [`RecordInfo::leaves`]). For every valid index and leaf the returned range
/// `offset .. offset + leaf size` must fit into `blob_size(blob)`, and ranges of
/// distinct (index, leaf) pairs must not overlap unless
/// [`Mapping::shares_across_indices`] says the leaf is shared.
pub trait Mapping: Send + Sync {
    fn extents(&self) -> &ArrayExtents;

    fn record_info(&self) -> &Arc<RecordInfo>;

    fn blob_count(&self) -> usize;

    fn blob_size(&self, blob: usize) -> usize;

    fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset;

    /// Textual descriptor in the CLI mapping syntax.
    fn descriptor(&self) -> String;

    /// `Some(L)` if, in row-major flat order, each leaf's values are stored in
    /// contiguous runs of `L` elements starting at multiples of `L`
    /// (the last run may be shorter). Used to pick chunked copies.
    fn lanes(&self) -> Option<usize> {
        None
    }

    /// Like [`Mapping::blob_nr_and_offset`], with the index given as its row-major flat position.
    fn blob_nr_and_offset_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
        let index = Linearizer::RowMajor.delinearize(self.extents(), flat);
        self.blob_nr_and_offset(&index, leaf)
    }

    /// Whether all array indices resolve `leaf` to the same bytes.
    fn shares_across_indices(&self, _leaf: usize) -> bool {
        false
    }

    fn leaf_count(&self) -> usize {
        self.record_info().leaf_count()
    }

    /// Sum of all blob sizes.
    fn total_bytes(&self) -> usize {
        (0..self.blob_count()).map(|b| self.blob_size(b)).sum()
    }
}

macro_rules! forward_mapping {
    ($($ty:ty),*) => {$(
        impl<M: Mapping + ?Sized> Mapping for $ty {
            fn extents(&self) -> &ArrayExtents {
                (**self).extents()
            }

            fn record_info(&self) -> &Arc<RecordInfo> {
                (**self).record_info()
            }

            fn blob_count(&self) -> usize {
                (**self).blob_count()
            }

            fn blob_size(&self, blob: usize) -> usize {
                (**self).blob_size(blob)
            }

            #[inline]
            fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
                (**self).blob_nr_and_offset(index, leaf)
            }

            fn descriptor(&self) -> String {
                (**self).descriptor()
            }

            fn lanes(&self) -> Option<usize> {
                (**self).lanes()
            }

            #[inline]
            fn blob_nr_and_offset_flat(&self, flat: usize, leaf: usize) -> NrAndOffset {
                (**self).blob_nr_and_offset_flat(flat, leaf)
            }

            fn shares_across_indices(&self, leaf: usize) -> bool {
                (**self).shares_across_indices(leaf)
            }
        }
    )*};
}

forward_mapping!(Box<M>, Arc<M>, &M);

fn linearizer_suffix(lin: Linearizer) -> &'static str {
    match lin {
        Linearizer::RowMajor => "",
        Linearizer::ColMajor => ":col",
        Linearizer::Morton => ":morton",
    }
}
