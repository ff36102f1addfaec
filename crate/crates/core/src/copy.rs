//! Copying the contents of one view into another view with a different mapping.
//!
//! [`naive_copy`] moves one leaf of one element at a time. When both mappings
//! store each leaf in runs of lanes ([`Mapping::lanes`]), [`aosoa_copy`] moves
//! whole runs of `min(Ls, Ld)` elements instead. [`smart_copy`] picks between
//! the two and [`parallel_copy`] splits the array among worker threads.

use std::ops::Range;

use crate::error::{LayoutError, Result};
use crate::mapping::{Mapping, NrAndOffset};
use crate::view::{Blob, View};

/// Which side of a chunked copy is traversed in ascending byte order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    ReadContiguous,
    WriteContiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    FieldWise,
    Chunked(Direction),
}

/// How a copy between two mappings will be carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyPlan {
    pub strategy: Strategy,
    /// Elements per contiguous move (1 for field-wise copies).
    pub chunk_elems: usize,
    /// Lane counts of the source and destination, when both have one.
    pub lanes: Option<(usize, usize)>,
}

impl CopyPlan {
    /// Chunked when both mappings have lanes, field-wise otherwise.
    pub fn choose<Ms: Mapping + ?Sized, Md: Mapping + ?Sized>(src: &Ms, dst: &Md) -> Self {
        match (src.lanes(), dst.lanes()) {
            (Some(ls), Some(ld)) => CopyPlan {
                strategy: Strategy::Chunked(Direction::ReadContiguous),
                chunk_elems: ls.min(ld),
                lanes: Some((ls, ld)),
            },
            _ => CopyPlan {
                strategy: Strategy::FieldWise,
                chunk_elems: 1,
                lanes: None,
            },
        }
    }

    /// Flat indices below this bound are copied in chunks; the rest field-wise.
    fn chunked_end(&self, product: usize) -> usize {
        match self.lanes {
            Some((ls, ld)) if matches!(self.strategy, Strategy::Chunked(_)) => {
                let block = ls.max(ld);
                product / block * block
            }
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CopyStats {
    /// Number of contiguous memory moves.
    pub elemental_copies: u64,
    pub bytes_moved: u64,
}

impl CopyStats {
    fn merge(self, other: CopyStats) -> CopyStats {
        CopyStats {
            elemental_copies: self.elemental_copies + other.elemental_copies,
            bytes_moved: self.bytes_moved + other.bytes_moved,
        }
    }
}

/// One contiguous move of `elems` consecutive elements of a single leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub leaf: usize,
    /// Row-major flat index of the first element.
    pub first: usize,
    pub elems: usize,
    pub src: NrAndOffset,
    pub dst: NrAndOffset,
    pub bytes: usize,
}

fn check_compatible<Ms: Mapping + ?Sized, Md: Mapping + ?Sized>(src: &Ms, dst: &Md) -> Result<()> {
    if src.extents() != dst.extents() {
        return Err(LayoutError::Usage(format!(
            "cannot copy between extents {} and {}",
            src.extents(),
            dst.extents()
        )));
    }
    let (a, b) = (src.record_info().shape(), dst.record_info().shape());
    if a != b {
        return Err(LayoutError::Usage(format!("cannot copy {a} into {b}")));
    }
    Ok(())
}

/// Enumerates the runs of a chunked copy over `range`, whose bounds must be
/// multiples of `max(Ls, Ld)` (or the end of the array).
pub fn for_each_run<Ms: Mapping + ?Sized, Md: Mapping + ?Sized>(
    src: &Ms,
    dst: &Md,
    direction: Direction,
    range: Range<usize>,
    mut f: impl FnMut(Run),
) -> Result<()> {
    let (Some(ls), Some(ld)) = (src.lanes(), dst.lanes()) else {
        return Err(LayoutError::Strategy(format!(
            "{} -> {} is not a pair of lane-structured mappings",
            src.descriptor(),
            dst.descriptor()
        )));
    };
    let (outer, inner) = match direction {
        Direction::ReadContiguous => (ls, ld),
        Direction::WriteContiguous => (ld, ls),
    };
    let info = src.record_info();
    let mut block = range.start;
    while block < range.end {
        let block_end = (block - block % outer + outer).min(range.end);
        for (leaf, l) in info.leaves().iter().enumerate() {
            let mut first = block;
            while first < block_end {
                let elems = (inner - first % inner).min(block_end - first);
                f(Run {
                    leaf,
                    first,
                    elems,
                    src: src.blob_nr_and_offset_flat(first, leaf),
                    dst: dst.blob_nr_and_offset_flat(first, leaf),
                    bytes: elems * l.size(),
                });
                first += elems;
            }
        }
        block = block_end;
    }
    Ok(())
}

/// Raw destination blob pointers, handed to workers that write disjoint ranges.
#[derive(Clone, Copy)]
struct DstBlobs<'a> {
    ptrs: &'a [(*mut u8, usize)],
}

// SAFETY: workers write through these pointers only at the disjoint byte
// ranges their array-index ranges map to; the destination view is mutably
// borrowed for the whole copy.
unsafe impl Send for DstBlobs<'_> {}
unsafe impl Sync for DstBlobs<'_> {}

impl DstBlobs<'_> {
    #[inline]
    fn write(&self, at: NrAndOffset, bytes: &[u8]) {
        let (ptr, len) = self.ptrs[at.blob];
        assert!(at.offset + bytes.len() <= len, "destination range outside blob");
        // SAFETY: bounds checked above; ranges of concurrent writers are disjoint.
        unsafe { std::ptr::copy_nonoverlapping(bytes.as_ptr(), ptr.add(at.offset), bytes.len()) }
    }
}

fn dst_ptrs<B: Blob>(blobs: &mut [B]) -> Vec<(*mut u8, usize)> {
    blobs
        .iter_mut()
        .map(|b| {
            let bytes = b.bytes_mut();
            (bytes.as_mut_ptr(), bytes.len())
        })
        .collect()
}

fn fieldwise_range<Ms: Mapping, Bs: Blob, Md: Mapping>(
    src: &View<Ms, Bs>,
    dst_mapping: &Md,
    dst: DstBlobs,
    range: Range<usize>,
) -> CopyStats {
    let info = src.info();
    let sizes: Vec<usize> = info.leaves().iter().map(|l| l.size()).collect();
    let mut bytes = 0u64;
    for flat in range.clone() {
        for (leaf, &size) in sizes.iter().enumerate() {
            let s = src.mapping().blob_nr_and_offset_flat(flat, leaf);
            let d = dst_mapping.blob_nr_and_offset_flat(flat, leaf);
            dst.write(d, &src.blobs()[s.blob].bytes()[s.offset..s.offset + size]);
            bytes += size as u64;
        }
    }
    CopyStats {
        elemental_copies: (range.len() * sizes.len()) as u64,
        bytes_moved: bytes,
    }
}

fn chunked_range<Ms: Mapping, Bs: Blob, Md: Mapping>(
    src: &View<Ms, Bs>,
    dst_mapping: &Md,
    dst: DstBlobs,
    direction: Direction,
    range: Range<usize>,
) -> Result<CopyStats> {
    let mut stats = CopyStats::default();
    for_each_run(src.mapping(), dst_mapping, direction, range, |r| {
        dst.write(r.dst, &src.blobs()[r.src.blob].bytes()[r.src.offset..r.src.offset + r.bytes]);
        stats.elemental_copies += 1;
        stats.bytes_moved += r.bytes as u64;
    })?;
    Ok(stats)
}

/// Copies `range` with `plan`: chunked up to the last full block, field-wise after.
fn copy_range<Ms: Mapping, Bs: Blob, Md: Mapping>(
    src: &View<Ms, Bs>,
    dst_mapping: &Md,
    dst: DstBlobs,
    plan: &CopyPlan,
    range: Range<usize>,
) -> Result<CopyStats> {
    match plan.strategy {
        Strategy::FieldWise => Ok(fieldwise_range(src, dst_mapping, dst, range)),
        Strategy::Chunked(direction) => {
            let split = plan.chunked_end(src.len()).clamp(range.start, range.end);
            let head = chunked_range(src, dst_mapping, dst, direction, range.start..split)?;
            let tail = fieldwise_range(src, dst_mapping, dst, split..range.end);
            Ok(head.merge(tail))
        }
    }
}

fn run_plan<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
    plan: CopyPlan,
) -> Result<CopyStats> {
    check_compatible(src.mapping(), dst.mapping())?;
    let ptrs = dst_ptrs(dst.blobs_mut());
    let blobs = DstBlobs { ptrs: &ptrs };
    copy_range(src, dst.mapping(), blobs, &plan, 0..src.len())
}

/// Element by element, leaf by leaf.
pub fn naive_copy<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
) -> Result<CopyStats> {
    let plan = CopyPlan { strategy: Strategy::FieldWise, chunk_elems: 1, lanes: None };
    run_plan(src, dst, plan)
}

/// Field-wise copy driven through the record iterators of both views.
pub fn iterator_copy<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
) -> Result<CopyStats> {
    check_compatible(src.mapping(), dst.mapping())?;
    let mut stats = CopyStats::default();
    for rec in src.iter() {
        dst.at_mut(rec.index()).store(&rec)?;
    }
    let info = src.info();
    stats.elemental_copies = (src.len() * info.leaf_count()) as u64;
    stats.bytes_moved = (src.len() * info.packed_size()) as u64;
    Ok(stats)
}

/// Chunked copy between two lane-structured mappings (AoSoA, or SoA as one
/// block spanning the whole array). Elements past the last full block of
/// `max(Ls, Ld)` are copied field-wise.
pub fn aosoa_copy<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
    direction: Direction,
) -> Result<CopyStats> {
    let mut plan = CopyPlan::choose(src.mapping(), dst.mapping());
    if plan.lanes.is_none() {
        return Err(LayoutError::Strategy(format!(
            "{} -> {} is not a pair of lane-structured mappings",
            src.mapping().descriptor(),
            dst.mapping().descriptor()
        )));
    }
    plan.strategy = Strategy::Chunked(direction);
    run_plan(src, dst, plan)
}

/// Chunked copy when both sides allow it, field-wise otherwise.
pub fn smart_copy<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
) -> Result<CopyStats> {
    run_plan(src, dst, CopyPlan::choose(src.mapping(), dst.mapping()))
}

/// Splits the flat array into `workers` contiguous ranges and copies them
/// concurrently. With `strategy` `None` the plan of [`smart_copy`] is used.
///
/// Chunked ranges start at multiples of `max(Ls, Ld)` so that no run is split
/// between workers. If the destination stores some leaf once for all indices,
/// the copy runs on a single worker.
pub fn parallel_copy<Ms: Mapping, Bs: Blob, Md: Mapping, Bd: Blob>(
    src: &View<Ms, Bs>,
    dst: &mut View<Md, Bd>,
    workers: usize,
    strategy: Option<Strategy>,
) -> Result<CopyStats> {
    if workers == 0 {
        return Err(LayoutError::Usage("parallel copy needs at least one worker".into()));
    }
    check_compatible(src.mapping(), dst.mapping())?;
    let mut plan = CopyPlan::choose(src.mapping(), dst.mapping());
    match strategy {
        None => {}
        Some(Strategy::FieldWise) => {
            plan = CopyPlan { strategy: Strategy::FieldWise, chunk_elems: 1, lanes: None };
        }
        Some(Strategy::Chunked(direction)) => {
            if plan.lanes.is_none() {
                return Err(LayoutError::Strategy(format!(
                    "{} -> {} is not a pair of lane-structured mappings",
                    src.mapping().descriptor(),
                    dst.mapping().descriptor()
                )));
            }
            plan.strategy = Strategy::Chunked(direction);
        }
    }
    let shared = (0..dst.mapping().leaf_count()).any(|l| dst.mapping().shares_across_indices(l));
    let workers = if shared { 1 } else { workers };
    let ranges = partition(src.len(), workers, &plan);

    let ptrs = dst_ptrs(dst.blobs_mut());
    let blobs = DstBlobs { ptrs: &ptrs };
    let dst_mapping = dst.mapping();
    let results = run_workers(&ranges, |r| copy_range(src, dst_mapping, blobs, &plan, r));
    results
        .into_iter()
        .try_fold(CopyStats::default(), |acc, r| Ok(acc.merge(r?)))
}

/// Worker ranges for `parallel_copy`, aligned to whole blocks for chunked plans.
pub fn partition(product: usize, workers: usize, plan: &CopyPlan) -> Vec<Range<usize>> {
    let unit = match (plan.strategy, plan.lanes) {
        (Strategy::Chunked(_), Some((ls, ld))) => ls.max(ld),
        _ => 1,
    };
    let units = product.div_ceil(unit);
    let workers = workers.clamp(1, units.max(1));
    (0..workers)
        .map(|w| {
            let begin = (units * w / workers * unit).min(product);
            let end = (units * (w + 1) / workers * unit).min(product);
            begin..end
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn run_workers<T: Send>(
    ranges: &[Range<usize>],
    job: impl Fn(Range<usize>) -> T + Sync,
) -> Vec<T> {
    use rayon::prelude::*;
    if ranges.len() == 1 {
        return vec![job(ranges[0].clone())];
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ranges.len())
        .build()
        .expect("failed to start copy workers");
    pool.install(|| ranges.par_iter().map(|r| job(r.clone())).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_workers<T: Send>(
    ranges: &[Range<usize>],
    job: impl Fn(Range<usize>) -> T + Sync,
) -> Vec<T> {
    if ranges.len() == 1 {
        return vec![job(ranges[0].clone())];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|r| {
                let job = &job;
                let r = r.clone();
                s.spawn(move || job(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("copy worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayExtents;
    use crate::info::RecordInfo;
    use crate::mapping::{AoS, AoSoA, SoA};
    use crate::record_dim;
    use crate::view::alloc_view;
    use std::sync::Arc;

    fn vec3() -> Arc<RecordInfo> {
        RecordInfo::new(record_dim!({ X: f32, Y: f32, Z: f32 }))
    }

    fn filled<M: Mapping>(m: M) -> View<M> {
        let mut v = alloc_view(m).unwrap();
        for i in 0..v.len() {
            for leaf in 0..3 {
                v.set_flat(i, leaf, (i * 3 + leaf) as f32);
            }
        }
        v
    }

    fn same<M1: Mapping, M2: Mapping>(a: &View<M1>, b: &View<M2>) -> bool {
        (0..a.len()).all(|i| (0..3).all(|l| a.get_flat::<f32>(i, l) == b.get_flat::<f32>(i, l)))
    }

    #[test]
    fn run_counts_for_aosoa8_to_aosoa4() {
        let e = ArrayExtents::linear(16).unwrap();
        let src = AoSoA::new(e, vec3(), 8).unwrap();
        let dst = AoSoA::new(e, vec3(), 4).unwrap();
        let mut runs = Vec::new();
        for_each_run(&src, &dst, Direction::ReadContiguous, 0..16, |r| runs.push(r)).unwrap();
        assert_eq!(runs.len(), 3 * 16 / 4);
        assert!(runs.iter().all(|r| r.elems == 4 && r.bytes == 16));
        // source offsets ascend when reading contiguously
        assert!(runs.windows(2).all(|w| w[0].src.offset < w[1].src.offset));
        let mut wruns = Vec::new();
        for_each_run(&src, &dst, Direction::WriteContiguous, 0..16, |r| wruns.push(r)).unwrap();
        assert!(wruns.windows(2).all(|w| w[0].dst.offset < w[1].dst.offset));
    }

    #[test]
    fn chunked_equals_naive() {
        let e = ArrayExtents::linear(20).unwrap();
        let src = filled(AoSoA::new(e, vec3(), 4).unwrap());
        for dir in [Direction::ReadContiguous, Direction::WriteContiguous] {
            let mut a = alloc_view(AoSoA::new(e, vec3(), 8).unwrap()).unwrap();
            let stats = aosoa_copy(&src, &mut a, dir).unwrap();
            assert!(same(&src, &a));
            // 16 elements chunked in runs of 4, 4 tail elements field-wise
            assert_eq!(stats.elemental_copies, 3 * 4 + 4 * 3);
            assert_eq!(stats.bytes_moved, 20 * 12);
        }
    }

    #[test]
    fn strategy_selection() {
        let e = ArrayExtents::linear(8).unwrap();
        let aos = AoS::packed(e, vec3());
        let soa = SoA::multi_blob(e, vec3());
        let aosoa = AoSoA::new(e, vec3(), 4).unwrap();
        assert_eq!(CopyPlan::choose(&aos, &aos).strategy, Strategy::FieldWise);
        assert_eq!(CopyPlan::choose(&soa, &aosoa).chunk_elems, 4);
        let src = filled(aos.clone());
        let mut dst = alloc_view(aos).unwrap();
        let mut whole = alloc_view(soa).unwrap();
        let stats = smart_copy(&filled(AoSoA::new(e, vec3(), 8).unwrap()), &mut whole).unwrap();
        assert_eq!(stats.elemental_copies, 3);
        assert!(matches!(
            aosoa_copy(&src, &mut dst, Direction::ReadContiguous),
            Err(LayoutError::Strategy(_))
        ));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let src = filled(AoS::packed(ArrayExtents::linear(8).unwrap(), vec3()));
        let mut dst = alloc_view(AoS::packed(ArrayExtents::linear(9).unwrap(), vec3())).unwrap();
        assert!(matches!(naive_copy(&src, &mut dst), Err(LayoutError::Usage(_))));
        let other = RecordInfo::new(record_dim!({ X: f32, Y: f32, W: f32 }));
        let mut dst = alloc_view(AoS::packed(ArrayExtents::linear(8).unwrap(), other)).unwrap();
        assert!(matches!(smart_copy(&src, &mut dst), Err(LayoutError::Usage(_))));
    }

    #[test]
    fn partitions_respect_blocks() {
        let plan = CopyPlan {
            strategy: Strategy::Chunked(Direction::ReadContiguous),
            chunk_elems: 8,
            lanes: Some((8, 32)),
        };
        let parts = partition(1000, 4, &plan);
        assert_eq!(parts.first().unwrap().start, 0);
        assert_eq!(parts.last().unwrap().end, 1000);
        assert!(parts.windows(2).all(|w| w[0].end == w[1].start && w[1].start % 32 == 0));
        let field = CopyPlan { strategy: Strategy::FieldWise, chunk_elems: 1, lanes: None };
        assert_eq!(partition(3, 8, &field).len(), 3);
    }

    #[test]
    fn parallel_matches_sequential() {
        let e = ArrayExtents::linear(1000).unwrap();
        let src = filled(AoSoA::new(e, vec3(), 8).unwrap());
        for workers in [1, 2, 3, 4] {
            let mut d = alloc_view(AoSoA::new(e, vec3(), 32).unwrap()).unwrap();
            let stats = parallel_copy(&src, &mut d, workers, None).unwrap();
            assert!(same(&src, &d));
            assert_eq!(stats.bytes_moved, 12_000);
            let mut d = alloc_view(AoS::aligned(e, vec3())).unwrap();
            parallel_copy(&src, &mut d, workers, Some(Strategy::FieldWise)).unwrap();
            assert!(same(&src, &d));
        }
    }
}
