//! Exhaustive checks of the mapping contract over all (index, leaf) pairs.

use super::Mapping;
use crate::array::{array_index_range, ArrayIndex};

/// Byte range occupied by one leaf of one array element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteRange {
    pub blob: usize,
    pub begin: usize,
    pub end: usize,
    pub index: ArrayIndex,
    pub leaf: usize,
}

/// Every (index, leaf) range of `m`, indices in row-major order, leaves in flatten order.
pub fn enumerate_ranges<M: Mapping + ?Sized>(m: &M) -> Vec<ByteRange> {
    let info = m.record_info().clone();
    let mut out = Vec::with_capacity(m.extents().product() * info.leaf_count());
    for index in array_index_range(m.extents()) {
        for (leaf, l) in info.leaves().iter().enumerate() {
            let r = m.blob_nr_and_offset(&index, leaf);
            out.push(ByteRange {
                blob: r.blob,
                begin: r.offset,
                end: r.offset + l.size(),
                index,
                leaf,
            });
        }
    }
    out
}

/// Outcome of [`check_layout`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayoutReport {
    pub ranges: usize,
    /// Pairs of ranges sharing at least one byte that are not permitted to.
    pub overlaps: usize,
    /// Ranges that point to a missing blob or run past the blob end.
    pub out_of_bounds: usize,
    /// Bytes of each blob covered by no range.
    pub uncovered: Vec<usize>,
}

impl LayoutReport {
    pub fn is_disjoint(&self) -> bool {
        self.overlaps == 0 && self.out_of_bounds == 0
    }

    pub fn tiles(&self) -> bool {
        self.is_disjoint() && self.uncovered.iter().all(|&u| u == 0)
    }
}

/// Checks containment and disjointness. Identical ranges of one leaf are
/// accepted when the mapping declares that leaf shared across indices.
pub fn check_layout<M: Mapping + ?Sized>(m: &M) -> LayoutReport {
    let mut ranges = enumerate_ranges(m);
    let blob_sizes: Vec<usize> = (0..m.blob_count()).map(|b| m.blob_size(b)).collect();
    let mut report = LayoutReport {
        ranges: ranges.len(),
        uncovered: blob_sizes.clone(),
        ..Default::default()
    };
    ranges.retain(|r| {
        let ok = r.blob < blob_sizes.len() && r.end <= blob_sizes[r.blob];
        if !ok {
            report.out_of_bounds += 1;
        }
        ok
    });
    ranges.sort_by_key(|r| (r.blob, r.begin, r.end));

    let mut reach: Option<&ByteRange> = None;
    for r in &ranges {
        match reach {
            Some(prev) if prev.blob == r.blob && r.begin < prev.end => {
                let shared = prev.begin == r.begin
                    && prev.end == r.end
                    && prev.leaf == r.leaf
                    && m.shares_across_indices(r.leaf);
                if !shared {
                    report.overlaps += 1;
                }
                if r.end > prev.end {
                    report.uncovered[r.blob] -= r.end - prev.end;
                    reach = Some(r);
                }
            }
            _ => {
                report.uncovered[r.blob] -= r.end - r.begin;
                reach = Some(r);
            }
        }
    }
    report
}
