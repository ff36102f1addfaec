use std::sync::Arc;

use super::{Mapping, NrAndOffset};
use crate::array::{ArrayExtents, ArrayIndex};
use crate::error::{LayoutError, Result};
use crate::info::RecordInfo;
use crate::record::RecordCoord;

/// Maps the subtree selected by a record coordinate with one mapping and the
/// rest of the record dimension with another. Blobs of the selected part come
/// first, followed by the blobs of the remainder.
#[derive(Debug, Clone)]
pub struct Split<A, B> {
    extents: ArrayExtents,
    info: Arc<RecordInfo>,
    selector: RecordCoord,
    first: usize,
    count: usize,
    selected: A,
    rest: B,
    selected_blobs: usize,
}

impl<A: Mapping, B: Mapping> Split<A, B> {
    /// `make_selected` receives the selected subtree as a standalone record
    /// dimension; `make_rest` receives the dimension with that subtree removed.
    pub fn new(
        extents: ArrayExtents,
        info: Arc<RecordInfo>,
        selector: &RecordCoord,
        make_selected: impl FnOnce(ArrayExtents, Arc<RecordInfo>) -> Result<A>,
        make_rest: impl FnOnce(ArrayExtents, Arc<RecordInfo>) -> Result<B>,
    ) -> Result<Self> {
        let node = info
            .node_by_coord(selector)
            .map_err(|e| LayoutError::Config(format!("invalid split selector: {e}")))?;
        let rest_dim = info.dim().without(selector)?.ok_or_else(|| {
            LayoutError::Config("split selector leaves nothing for the remainder".into())
        })?;
        let selected_info = info.subtree(node);
        let rest_info = RecordInfo::new(rest_dim);
        let selected = make_selected(extents, selected_info.clone())?;
        let rest = make_rest(extents, rest_info.clone())?;
        for (m, expected) in [
            (selected.record_info(), &selected_info),
            (rest.record_info(), &rest_info),
        ] {
            if m.shape() != expected.shape() {
                return Err(LayoutError::Config(format!(
                    "inner mapping built for {} instead of {}",
                    m.shape(),
                    expected.shape()
                )));
            }
        }
        if selected.extents() != &extents || rest.extents() != &extents {
            return Err(LayoutError::Config("inner mappings must share the extents".into()));
        }
        let n = info.node(node);
        Ok(Self {
            extents,
            selector: selector.clone(),
            first: n.first_leaf,
            count: n.leaf_count,
            selected_blobs: selected.blob_count(),
            info,
            selected,
            rest,
        })
    }

    pub fn selected(&self) -> &A {
        &self.selected
    }

    pub fn rest(&self) -> &B {
        &self.rest
    }

    pub fn selector(&self) -> &RecordCoord {
        &self.selector
    }

    /// Which inner mapping owns `leaf`, and the leaf ordinal inside it.
    #[inline]
    fn route(&self, leaf: usize) -> (bool, usize) {
        if leaf < self.first {
            (false, leaf)
        } else if leaf < self.first + self.count {
            (true, leaf - self.first)
        } else {
            (false, leaf - self.count)
        }
    }
}

impl<A: Mapping, B: Mapping> Mapping for Split<A, B> {
    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn record_info(&self) -> &Arc<RecordInfo> {
        &self.info
    }

    fn blob_count(&self) -> usize {
        self.selected_blobs + self.rest.blob_count()
    }

    fn blob_size(&self, blob: usize) -> usize {
        if blob < self.selected_blobs {
            self.selected.blob_size(blob)
        } else {
            self.rest.blob_size(blob - self.selected_blobs)
        }
    }

    #[inline]
    fn blob_nr_and_offset(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
        match self.route(leaf) {
            (true, inner) => self.selected.blob_nr_and_offset(index, inner),
            (false, inner) => {
                let r = self.rest.blob_nr_and_offset(index, inner);
                NrAndOffset::new(r.blob + self.selected_blobs, r.offset)
            }
        }
    }

    fn shares_across_indices(&self, leaf: usize) -> bool {
        match self.route(leaf) {
            (true, inner) => self.selected.shares_across_indices(inner),
            (false, inner) => self.rest.shares_across_indices(inner),
        }
    }

    fn descriptor(&self) -> String {
        let path = self
            .info
            .dim()
            .tags_of(&self.selector)
            .map(|t| t.join("."))
            .unwrap_or_default();
        format!(
            "split:{path}:{}:{}",
            self.selected.descriptor(),
            self.rest.descriptor()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{AoS, One, SoA};
    use crate::record_dim;

    fn particle() -> Arc<RecordInfo> {
        RecordInfo::new(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        }))
    }

    #[test]
    fn pos_to_soa_rest_to_packed_aos() {
        let info = particle();
        let e = ArrayExtents::linear(4).unwrap();
        let m = Split::new(
            e,
            info.clone(),
            &RecordCoord::from([1]),
            |e, i| Ok(SoA::multi_blob(e, i)),
            |e, i| Ok(AoS::packed(e, i)),
        )
        .unwrap();
        assert_eq!(m.blob_count(), 3);
        assert_eq!(m.total_bytes(), 8 * 4 + 13 * 4);
        let y = info.leaf_by_path("Pos.Y").unwrap();
        assert_eq!(m.blob_nr_and_offset(&2.into(), y), NrAndOffset::new(1, 8));
        let mass = info.leaf_by_path("Mass").unwrap();
        // remainder record is {Id:u16, Mass:f64, Flags[3]} = 13 bytes packed
        assert_eq!(m.blob_nr_and_offset(&1.into(), mass), NrAndOffset::new(2, 13 + 2));
        assert_eq!(m.descriptor(), "split:Pos:soa:mb:aos:packed");
    }

    #[test]
    fn nested_split_with_one() {
        let info = particle();
        let e = ArrayExtents::linear(4).unwrap();
        let m = Split::new(
            e,
            info.clone(),
            &RecordCoord::from([1]),
            |e, i| Ok(SoA::multi_blob(e, i)),
            |e, i| {
                Split::new(
                    e,
                    i,
                    &RecordCoord::from([1]),
                    |e, i| Ok(One::new(e, i)),
                    |e, i| Ok(AoS::aligned(e, i)),
                )
            },
        )
        .unwrap();
        assert_eq!(m.blob_count(), 4);
        let mass = info.leaf_by_path("Mass").unwrap();
        assert_eq!(m.blob_nr_and_offset(&3.into(), mass), NrAndOffset::new(2, 0));
        assert!(m.shares_across_indices(mass));
        assert!(!m.shares_across_indices(0));
        assert_eq!(m.blob_size(3), 4 * 6);
    }

    #[test]
    fn degenerate_selectors_rejected() {
        let info = particle();
        let e = ArrayExtents::linear(4).unwrap();
        let root = Split::new(
            e,
            info.clone(),
            &RecordCoord::root(),
            |e, i| Ok(AoS::packed(e, i)),
            |e, i| Ok(AoS::packed(e, i)),
        );
        assert!(matches!(root, Err(LayoutError::Config(_))));
        let bad = Split::new(
            e,
            info,
            &RecordCoord::from([9]),
            |e, i| Ok(AoS::packed(e, i)),
            |e, i| Ok(AoS::packed(e, i)),
        );
        assert!(matches!(bad, Err(LayoutError::Config(_))));
    }
}
