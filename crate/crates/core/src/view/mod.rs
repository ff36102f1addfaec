//! Views bind a mapping to blob storage and give record-level access.

mod blob;
mod one;
mod ops;
mod record;
mod sub;

use std::sync::Arc;

pub use blob::{AlignedAllocator, AlignedBlob, Blob, BlobAllocator, InlineBlob, VecAllocator};
pub use one::OneRecord;
pub use ops::{Operand, RecordCompare, RecordOperand, RecordRead, RecordWrite};
pub use record::{VirtualRecord, VirtualRecordMut};
pub use sub::{SubView, SubViewMut};

use crate::array::{array_index_range, ArrayExtents, ArrayIndex};
use crate::error::{LayoutError, Result};
use crate::info::{NodeId, RecordInfo};
use crate::mapping::{Mapping, NrAndOffset};
use crate::value::{Scalar, Value};

/// Start alignment of blobs from the default allocator, at least one cache line.
pub fn blob_alignment(info: &RecordInfo) -> usize {
    info.max_align().max(64)
}

/// Allocates zero-filled, cache-line aligned blobs for `mapping`.
pub fn alloc_view<M: Mapping>(mapping: M) -> Result<View<M>> {
    alloc_view_with(mapping, &AlignedAllocator)
}

pub fn alloc_view_with<M: Mapping, A: BlobAllocator>(
    mapping: M,
    allocator: &A,
) -> Result<View<M, A::Blob>> {
    let align = blob_alignment(mapping.record_info());
    let blobs = (0..mapping.blob_count())
        .map(|b| allocator.allocate(align, mapping.blob_size(b)))
        .collect::<Result<Vec<_>>>()?;
    View::new(mapping, blobs)
}

/// A mapping together with the blobs it lays data out in.
#[derive(Debug, Clone)]
pub struct View<M, B = AlignedBlob> {
    mapping: M,
    blobs: Vec<B>,
}

impl<M: Mapping, B: Blob> View<M, B> {
    /// Wraps caller-provided blobs; each must be at least as large as the mapping requires.
    pub fn new(mapping: M, blobs: Vec<B>) -> Result<Self> {
        if blobs.len() != mapping.blob_count() {
            return Err(LayoutError::Config(format!(
                "mapping needs {} blobs, got {}",
                mapping.blob_count(),
                blobs.len()
            )));
        }
        for (i, b) in blobs.iter().enumerate() {
            if b.len() < mapping.blob_size(i) {
                return Err(LayoutError::Config(format!(
                    "blob {i} holds {} bytes, mapping needs {}",
                    b.len(),
                    mapping.blob_size(i)
                )));
            }
        }
        Ok(Self { mapping, blobs })
    }

    pub fn mapping(&self) -> &M {
        &self.mapping
    }

    pub fn blobs(&self) -> &[B] {
        &self.blobs
    }

    /// Mutable blob access. The blob list itself cannot be resized.
    pub fn blobs_mut(&mut self) -> &mut [B] {
        &mut self.blobs
    }

    pub fn into_parts(self) -> (M, Vec<B>) {
        (self.mapping, self.blobs)
    }

    pub fn extents(&self) -> &ArrayExtents {
        self.mapping.extents()
    }

    pub fn info(&self) -> &Arc<RecordInfo> {
        self.mapping.record_info()
    }

    pub fn len(&self) -> usize {
        self.extents().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Leaf ordinal for a dotted tag path such as `"Pos.Y"`.
    pub fn leaf(&self, path: &str) -> Result<usize> {
        self.info().leaf_by_path(path)
    }

    #[inline]
    fn locate(&self, index: &ArrayIndex, leaf: usize) -> NrAndOffset {
        debug_assert!(
            self.extents().contains(index),
            "index {index} outside {}",
            self.extents()
        );
        self.mapping.blob_nr_and_offset(index, leaf)
    }

    #[inline]
    fn slot(&self, r: NrAndOffset, len: usize) -> &[u8] {
        &self.blobs[r.blob].bytes()[r.offset..r.offset + len]
    }

    #[inline]
    fn slot_mut(&mut self, r: NrAndOffset, len: usize) -> &mut [u8] {
        &mut self.blobs[r.blob].bytes_mut()[r.offset..r.offset + len]
    }

    #[inline]
    fn debug_check_type<T: Scalar>(&self, leaf: usize) {
        debug_assert_eq!(
            self.info().leaf(leaf).ty,
            T::TYPE,
            "leaf {} accessed with the wrong type",
            self.info().leaf(leaf).path
        );
    }

    /// Reads a leaf. The index is bounds-checked in debug builds only.
    #[inline]
    pub fn get<T: Scalar>(&self, index: &ArrayIndex, leaf: usize) -> T {
        self.debug_check_type::<T>(leaf);
        let r = self.locate(index, leaf);
        T::read(self.slot(r, T::TYPE.size()))
    }

    #[inline]
    pub fn set<T: Scalar>(&mut self, index: &ArrayIndex, leaf: usize, value: T) {
        self.debug_check_type::<T>(leaf);
        let r = self.locate(index, leaf);
        value.write(self.slot_mut(r, T::TYPE.size()))
    }

    /// Read-modify-write with a single address resolution.
    #[inline]
    pub fn update<T: Scalar>(&mut self, index: &ArrayIndex, leaf: usize, f: impl FnOnce(T) -> T) {
        self.debug_check_type::<T>(leaf);
        let r = self.locate(index, leaf);
        let slot = self.slot_mut(r, T::TYPE.size());
        f(T::read(slot)).write(slot)
    }

    /// Like [`View::get`], addressing the element by its row-major flat position.
    #[inline]
    pub fn get_flat<T: Scalar>(&self, flat: usize, leaf: usize) -> T {
        self.debug_check_type::<T>(leaf);
        debug_assert!(flat < self.len());
        let r = self.mapping.blob_nr_and_offset_flat(flat, leaf);
        T::read(self.slot(r, T::TYPE.size()))
    }

    #[inline]
    pub fn set_flat<T: Scalar>(&mut self, flat: usize, leaf: usize, value: T) {
        self.debug_check_type::<T>(leaf);
        debug_assert!(flat < self.len());
        let r = self.mapping.blob_nr_and_offset_flat(flat, leaf);
        value.write(self.slot_mut(r, T::TYPE.size()))
    }

    #[inline]
    pub fn update_flat<T: Scalar>(&mut self, flat: usize, leaf: usize, f: impl FnOnce(T) -> T) {
        self.debug_check_type::<T>(leaf);
        debug_assert!(flat < self.len());
        let r = self.mapping.blob_nr_and_offset_flat(flat, leaf);
        let slot = self.slot_mut(r, T::TYPE.size());
        f(T::read(slot)).write(slot)
    }

    /// Bounds- and type-checked read.
    pub fn try_get<T: Scalar>(&self, index: &ArrayIndex, leaf: usize) -> Result<T> {
        self.check(index, leaf, T::TYPE)?;
        Ok(self.get(index, leaf))
    }

    /// Bounds- and type-checked write.
    pub fn try_set<T: Scalar>(&mut self, index: &ArrayIndex, leaf: usize, value: T) -> Result<()> {
        self.check(index, leaf, T::TYPE)?;
        self.set(index, leaf, value);
        Ok(())
    }

    fn check(&self, index: &ArrayIndex, leaf: usize, ty: crate::record::ScalarType) -> Result<()> {
        self.extents().check(index)?;
        let l = self
            .info()
            .leaves()
            .get(leaf)
            .ok_or_else(|| LayoutError::Usage(format!("no leaf with ordinal {leaf}")))?;
        if l.ty != ty {
            return Err(LayoutError::Usage(format!(
                "leaf {} has type {}, accessed as {ty}",
                l.path, l.ty
            )));
        }
        Ok(())
    }

    /// Reads a leaf as a dynamically typed value.
    pub fn get_value(&self, index: &ArrayIndex, leaf: usize) -> Value {
        let ty = self.info().leaf(leaf).ty;
        let r = self.locate(index, leaf);
        Value::read(ty, self.slot(r, ty.size()))
    }

    /// Writes a value, converting it to the leaf's type.
    pub fn set_value(&mut self, index: &ArrayIndex, leaf: usize, value: Value) {
        let ty = self.info().leaf(leaf).ty;
        let r = self.locate(index, leaf);
        value.cast(ty).write(self.slot_mut(r, ty.size()))
    }

    /// Read-modify-write of a dynamically typed leaf with one address resolution.
    pub fn update_value(&mut self, index: &ArrayIndex, leaf: usize, f: impl FnOnce(Value) -> Value) {
        let ty = self.info().leaf(leaf).ty;
        let r = self.locate(index, leaf);
        let slot = self.slot_mut(r, ty.size());
        f(Value::read(ty, slot)).cast(ty).write(slot)
    }

    /// Lazy handle to the record at `index`. Resolves nothing by itself.
    pub fn at(&self, index: impl Into<ArrayIndex>) -> VirtualRecord<'_, M, B> {
        VirtualRecord::new(self, index.into(), NodeId::ROOT)
    }

    pub fn at_mut(&mut self, index: impl Into<ArrayIndex>) -> VirtualRecordMut<'_, M, B> {
        VirtualRecordMut::new(self, index.into(), NodeId::ROOT)
    }

    /// Records in row-major order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = VirtualRecord<'_, M, B>> + '_ {
        array_index_range(self.extents()).map(move |i| self.at(i))
    }

    /// Calls `f` on every record in row-major order.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(VirtualRecordMut<'_, M, B>)) {
        for i in array_index_range(&self.extents().clone()) {
            f(self.at_mut(i));
        }
    }

    /// Fills every destination record from the matching source record,
    /// leaf by leaf along equal tag paths.
    pub fn transform_from<M2: Mapping, B2: Blob>(
        &mut self,
        src: &View<M2, B2>,
        mut f: impl FnMut(VirtualRecord<'_, M2, B2>) -> OneRecord,
    ) -> Result<()> {
        if src.extents() != self.extents() {
            return Err(LayoutError::Usage(format!(
                "extents differ: {} vs {}",
                src.extents(),
                self.extents()
            )));
        }
        for (i, rec) in src.iter().enumerate() {
            let out = f(rec);
            let idx = crate::array::Linearizer::RowMajor.delinearize(self.extents(), i);
            self.at_mut(idx).try_assign(&out)?;
        }
        Ok(())
    }

    /// Subspace `origin .. origin + extents` of this view.
    pub fn sub_view(&self, origin: ArrayIndex, extents: ArrayExtents) -> Result<SubView<'_, M, B>> {
        SubView::new(self, origin, extents)
    }

    pub fn sub_view_mut(
        &mut self,
        origin: ArrayIndex,
        extents: ArrayExtents,
    ) -> Result<SubViewMut<'_, M, B>> {
        SubViewMut::new(self, origin, extents)
    }
}
