use super::{Blob, View, VirtualRecord, VirtualRecordMut};
use crate::array::{array_index_range, ArrayExtents, ArrayIndex};
use crate::error::{LayoutError, Result};
use crate::info::NodeId;
use crate::mapping::Mapping;
use crate::value::Scalar;

fn check_window(parent: &ArrayExtents, origin: &ArrayIndex, extents: &ArrayExtents) -> Result<()> {
    let fits = origin.rank() == parent.rank()
        && extents.rank() == parent.rank()
        && origin
            .coords()
            .iter()
            .zip(extents.sizes())
            .zip(parent.sizes())
            .all(|((o, e), p)| o.checked_add(*e).is_some_and(|end| end <= *p));
    if fits {
        Ok(())
    } else {
        Err(LayoutError::Config(format!(
            "sub view at {origin} with extents {extents} exceeds {parent}"
        )))
    }
}

/// Read-only window `origin .. origin + extents` into a view. Nothing is copied.
pub struct SubView<'a, M, B> {
    parent: &'a View<M, B>,
    origin: ArrayIndex,
    extents: ArrayExtents,
}

impl<'a, M: Mapping, B: Blob> SubView<'a, M, B> {
    pub(crate) fn new(parent: &'a View<M, B>, origin: ArrayIndex, extents: ArrayExtents) -> Result<Self> {
        check_window(parent.extents(), &origin, &extents)?;
        Ok(Self { parent, origin, extents })
    }

    pub fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    pub fn origin(&self) -> ArrayIndex {
        self.origin
    }

    /// Parent index for a sub view index.
    pub fn to_parent(&self, index: &ArrayIndex) -> ArrayIndex {
        debug_assert!(self.extents.contains(index), "{index} outside {}", self.extents);
        index.offset_by(&self.origin)
    }

    pub fn at(&self, index: impl Into<ArrayIndex>) -> VirtualRecord<'a, M, B> {
        VirtualRecord::new(self.parent, self.to_parent(&index.into()), NodeId::ROOT)
    }

    pub fn get<T: Scalar>(&self, index: &ArrayIndex, leaf: usize) -> T {
        self.parent.get(&self.to_parent(index), leaf)
    }

    pub fn iter(&self) -> impl Iterator<Item = VirtualRecord<'a, M, B>> + '_ {
        array_index_range(&self.extents).map(move |i| self.at(i))
    }
}

/// Mutable window into a view.
pub struct SubViewMut<'a, M, B> {
    parent: &'a mut View<M, B>,
    origin: ArrayIndex,
    extents: ArrayExtents,
}

impl<'a, M: Mapping, B: Blob> SubViewMut<'a, M, B> {
    pub(crate) fn new(
        parent: &'a mut View<M, B>,
        origin: ArrayIndex,
        extents: ArrayExtents,
    ) -> Result<Self> {
        check_window(parent.extents(), &origin, &extents)?;
        Ok(Self { parent, origin, extents })
    }

    pub fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    pub fn to_parent(&self, index: &ArrayIndex) -> ArrayIndex {
        debug_assert!(self.extents.contains(index), "{index} outside {}", self.extents);
        index.offset_by(&self.origin)
    }

    pub fn at(&self, index: impl Into<ArrayIndex>) -> VirtualRecord<'_, M, B> {
        VirtualRecord::new(self.parent, self.to_parent(&index.into()), NodeId::ROOT)
    }

    pub fn at_mut(&mut self, index: impl Into<ArrayIndex>) -> VirtualRecordMut<'_, M, B> {
        let i = self.to_parent(&index.into());
        VirtualRecordMut::new(self.parent, i, NodeId::ROOT)
    }

    pub fn get<T: Scalar>(&self, index: &ArrayIndex, leaf: usize) -> T {
        self.parent.get(&self.to_parent(index), leaf)
    }

    pub fn set<T: Scalar>(&mut self, index: &ArrayIndex, leaf: usize, value: T) {
        let i = self.to_parent(index);
        self.parent.set(&i, leaf, value)
    }
}

#[cfg(test)]
mod tests {
    use crate::array::{ArrayExtents, ArrayIndex};
    use crate::info::RecordInfo;
    use crate::mapping::AoS;
    use crate::record_dim;
    use crate::view::alloc_view;

    #[test]
    fn offsets_into_parent() {
        let info = RecordInfo::new(record_dim!({ V: i32 }));
        let mut v = alloc_view(AoS::packed(ArrayExtents::linear(8).unwrap(), info)).unwrap();
        for i in 0..8 {
            v.set(&i.into(), 0, i as i32 * 10);
        }
        let s = v.sub_view(2.into(), ArrayExtents::linear(2).unwrap()).unwrap();
        assert_eq!(s.at(1).field("V").get::<i32>(), 30);
        assert_eq!(s.iter().count(), 2);

        let full = v.sub_view(0.into(), *v.extents()).unwrap();
        assert!((0..8).all(|i| full.get::<i32>(&i.into(), 0) == v.get::<i32>(&i.into(), 0)));

        let mut m = v.sub_view_mut(2.into(), ArrayExtents::linear(2).unwrap()).unwrap();
        m.set(&1.into(), 0, -1);
        m.at_mut(0).field("V").set(-2i32);
        assert_eq!(v.get::<i32>(&3.into(), 0), -1);
        assert_eq!(v.get::<i32>(&2.into(), 0), -2);
    }

    #[test]
    fn windows_must_fit() {
        let info = RecordInfo::new(record_dim!({ V: i32 }));
        let v = alloc_view(AoS::packed(ArrayExtents::new(&[4, 4]).unwrap(), info)).unwrap();
        let e = ArrayExtents::new(&[2, 3]).unwrap();
        assert!(v.sub_view(ArrayIndex::from([2, 1]), e).is_ok());
        assert!(v.sub_view(ArrayIndex::from([2, 2]), e).is_err());
        assert!(v.sub_view(ArrayIndex::from([0]), ArrayExtents::linear(1).unwrap()).is_err());
    }
}
