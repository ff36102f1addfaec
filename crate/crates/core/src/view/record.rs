use std::ops::{Add, AddAssign, Mul, MulAssign, Sub, SubAssign};
use std::sync::Arc;

use super::ops::{self, RecordOperand, RecordRead, RecordWrite};
use super::{Blob, OneRecord, View};
use crate::array::ArrayIndex;
use crate::error::{LayoutError, Result};
use crate::info::{NodeId, NodeInfo, RecordInfo};
use crate::mapping::Mapping;
use crate::record::RecordCoord;
use crate::value::{BinOp, RecordTuple, Scalar, Value};

fn child_of(info: &RecordInfo, node: NodeId, tag: &str) -> Result<NodeId> {
    info.child_by_tag(node, tag)
}

fn path_of(info: &RecordInfo, node: NodeId, path: &str) -> Result<NodeId> {
    let tags: Vec<&str> = path.split('.').filter(|t| !t.is_empty()).collect();
    info.node_by_tags(node, &tags)
}

fn leaf_at(info: &RecordInfo, node: NodeId) -> usize {
    let n = info.node(node);
    assert!(n.is_leaf(), "record {} is not a leaf", n.shape);
    n.first_leaf
}

fn tuple_values<T: RecordTuple>(info: &RecordInfo, node: NodeId, t: &T) -> Result<Vec<Value>> {
    let mut types = Vec::new();
    T::leaf_types(&mut types);
    let n = info.node(node);
    let expected: Vec<_> = n.leaves().map(|l| info.leaf(l).ty).collect();
    if types != expected {
        return Err(LayoutError::Usage(format!(
            "tuple with leaf types {types:?} does not fit record {}",
            n.shape
        )));
    }
    let mut values = Vec::with_capacity(types.len());
    t.push_leaves(&mut values);
    Ok(values)
}

fn values_to_tuple<T: RecordTuple>(
    info: &RecordInfo,
    node: NodeId,
    read: impl Fn(usize) -> Value,
) -> Result<T> {
    let mut types = Vec::new();
    T::leaf_types(&mut types);
    let n = info.node(node);
    if !types.iter().copied().eq(n.leaves().map(|l| info.leaf(l).ty)) {
        return Err(LayoutError::Usage(format!(
            "tuple with leaf types {types:?} does not fit record {}",
            n.shape
        )));
    }
    let mut it = n.leaves().map(read);
    T::pull_leaves(&mut it).ok_or_else(|| LayoutError::Usage("tuple too long".into()))
}

/// Lazy reference to a record (or a part of it) inside a view.
///
/// Navigation only extends the stored path; the mapping is consulted on
/// terminal reads.
pub struct VirtualRecord<'a, M, B> {
    view: &'a View<M, B>,
    index: ArrayIndex,
    node: NodeId,
}

impl<M, B> Clone for VirtualRecord<'_, M, B> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M, B> Copy for VirtualRecord<'_, M, B> {}

impl<'a, M: Mapping, B: Blob> VirtualRecord<'a, M, B> {
    pub(crate) fn new(view: &'a View<M, B>, index: ArrayIndex, node: NodeId) -> Self {
        Self { view, index, node }
    }

    pub fn view(&self) -> &'a View<M, B> {
        self.view
    }

    pub fn index(&self) -> ArrayIndex {
        self.index
    }

    pub fn node_info(&self) -> &'a NodeInfo {
        self.view.info().node(self.node)
    }

    pub fn coord(&self) -> &'a RecordCoord {
        &self.node_info().coord
    }

    pub fn is_leaf(&self) -> bool {
        self.node_info().is_leaf()
    }

    pub fn try_field(&self, tag: &str) -> Result<Self> {
        let node = child_of(self.view.info(), self.node, tag)?;
        Ok(Self { node, ..*self })
    }

    /// Child record by tag. Panics on an unknown tag; see [`VirtualRecord::try_field`].
    pub fn field(&self, tag: &str) -> Self {
        self.try_field(tag).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Descendant by dotted tag path, e.g. `"Pos.Y"`.
    pub fn try_path(&self, path: &str) -> Result<Self> {
        let node = path_of(self.view.info(), self.node, path)?;
        Ok(Self { node, ..*self })
    }

    pub fn path(&self, path: &str) -> Self {
        self.try_path(path).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Child record by position.
    pub fn child(&self, i: usize) -> Self {
        let node = self.node_info().children[i];
        Self { node, ..*self }
    }

    /// Reads the leaf this record points at. Panics if it is not a leaf.
    #[inline]
    pub fn get<T: Scalar>(&self) -> T {
        self.view.get(&self.index, leaf_at(self.view.info(), self.node))
    }

    pub fn value(&self) -> Value {
        self.view.get_value(&self.index, leaf_at(self.view.info(), self.node))
    }

    /// Deep copy into a stack-local record.
    pub fn load(&self) -> OneRecord {
        OneRecord::load(self)
    }

    pub fn load_tuple<T: RecordTuple>(&self) -> Result<T> {
        values_to_tuple(self.view.info(), self.node, |l| self.view.get_value(&self.index, l))
    }
}

impl<M: Mapping, B: Blob> RecordRead for VirtualRecord<'_, M, B> {
    fn record_info(&self) -> &Arc<RecordInfo> {
        self.view.info()
    }

    fn node(&self) -> NodeId {
        self.node
    }

    fn read_leaf(&self, leaf: usize) -> Value {
        self.view.get_value(&self.index, leaf)
    }
}

/// Mutable counterpart of [`VirtualRecord`].
pub struct VirtualRecordMut<'a, M, B> {
    view: &'a mut View<M, B>,
    index: ArrayIndex,
    node: NodeId,
}

impl<'a, M: Mapping, B: Blob> VirtualRecordMut<'a, M, B> {
    pub(crate) fn new(view: &'a mut View<M, B>, index: ArrayIndex, node: NodeId) -> Self {
        Self { view, index, node }
    }

    pub fn index(&self) -> ArrayIndex {
        self.index
    }

    pub fn node_info(&self) -> &NodeInfo {
        self.view.info().node(self.node)
    }

    /// Shared view of the same record.
    pub fn as_ref(&self) -> VirtualRecord<'_, M, B> {
        VirtualRecord::new(self.view, self.index, self.node)
    }

    /// Shorter-lived handle to the same record.
    pub fn reborrow(&mut self) -> VirtualRecordMut<'_, M, B> {
        VirtualRecordMut::new(self.view, self.index, self.node)
    }

    pub fn try_field(&mut self, tag: &str) -> Result<VirtualRecordMut<'_, M, B>> {
        let node = child_of(self.view.info(), self.node, tag)?;
        Ok(VirtualRecordMut::new(self.view, self.index, node))
    }

    pub fn field(&mut self, tag: &str) -> VirtualRecordMut<'_, M, B> {
        self.try_field(tag).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Like [`VirtualRecordMut::field`], consuming the handle to keep its lifetime.
    pub fn into_field(self, tag: &str) -> VirtualRecordMut<'a, M, B> {
        let node = child_of(self.view.info(), self.node, tag).unwrap_or_else(|e| panic!("{e}"));
        VirtualRecordMut::new(self.view, self.index, node)
    }

    pub fn try_path(&mut self, path: &str) -> Result<VirtualRecordMut<'_, M, B>> {
        let node = path_of(self.view.info(), self.node, path)?;
        Ok(VirtualRecordMut::new(self.view, self.index, node))
    }

    pub fn path(&mut self, path: &str) -> VirtualRecordMut<'_, M, B> {
        self.try_path(path).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn child(&mut self, i: usize) -> VirtualRecordMut<'_, M, B> {
        let node = self.node_info().children[i];
        VirtualRecordMut::new(self.view, self.index, node)
    }

    #[inline]
    pub fn get<T: Scalar>(&self) -> T {
        self.view.get(&self.index, leaf_at(self.view.info(), self.node))
    }

    #[inline]
    pub fn set<T: Scalar>(&mut self, value: T) {
        let leaf = leaf_at(self.view.info(), self.node);
        self.view.set(&self.index, leaf, value)
    }

    /// Read-modify-write of a leaf with one address resolution.
    #[inline]
    pub fn update<T: Scalar>(&mut self, f: impl FnOnce(T) -> T) {
        let leaf = leaf_at(self.view.info(), self.node);
        self.view.update(&self.index, leaf, f)
    }

    pub fn value(&self) -> Value {
        self.view.get_value(&self.index, leaf_at(self.view.info(), self.node))
    }

    pub fn set_value(&mut self, value: Value) {
        let leaf = leaf_at(self.view.info(), self.node);
        self.view.set_value(&self.index, leaf, value)
    }

    pub fn load(&self) -> OneRecord {
        OneRecord::load(self)
    }

    pub fn load_tuple<T: RecordTuple>(&self) -> Result<T> {
        self.as_ref().load_tuple()
    }

    /// Copies every leaf of a structurally identical record into this one.
    pub fn store(&mut self, src: &impl RecordRead) -> Result<()> {
        let dst_shape = &self.node_info().shape;
        let src_shape = &src.record_info().node(src.node()).shape;
        if dst_shape != src_shape {
            return Err(LayoutError::Usage(format!(
                "cannot store record {src_shape} into {dst_shape}"
            )));
        }
        ops::assign(self, ops::Operand::Record(src))
    }

    /// Writes a tuple whose flattened leaves have exactly this record's leaf types.
    pub fn store_tuple<T: RecordTuple>(&mut self, t: &T) -> Result<()> {
        let values = tuple_values(self.view.info(), self.node, t)?;
        let leaves = self.node_info().leaves();
        for (leaf, v) in leaves.zip(values) {
            self.view.set_value(&self.index, leaf, v);
        }
        Ok(())
    }

    /// Assigns matching leaves from a record or broadcasts a scalar.
    pub fn try_assign(&mut self, rhs: &impl RecordOperand) -> Result<()> {
        ops::assign(self, rhs.operand())
    }

    pub fn assign(&mut self, rhs: impl RecordOperand) {
        self.try_assign(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_apply(&mut self, op: BinOp, rhs: &impl RecordOperand) -> Result<()> {
        ops::apply(self, op, rhs.operand())
    }
}

impl<M: Mapping, B: Blob> RecordRead for VirtualRecordMut<'_, M, B> {
    fn record_info(&self) -> &Arc<RecordInfo> {
        self.view.info()
    }

    fn node(&self) -> NodeId {
        self.node
    }

    fn read_leaf(&self, leaf: usize) -> Value {
        self.view.get_value(&self.index, leaf)
    }
}

impl<M: Mapping, B: Blob> RecordWrite for VirtualRecordMut<'_, M, B> {
    fn write_leaf(&mut self, leaf: usize, value: Value) {
        self.view.set_value(&self.index, leaf, value)
    }

    fn update_leaf(&mut self, leaf: usize, f: &mut dyn FnMut(Value) -> Value) {
        self.view.update_value(&self.index, leaf, f)
    }
}

macro_rules! binary_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl<M: Mapping, B: Blob, R: RecordOperand> $trait<R> for VirtualRecord<'_, M, B> {
            type Output = OneRecord;

            fn $method(self, rhs: R) -> OneRecord {
                let mut out = self.load();
                out.try_apply(BinOp::$op, &rhs).unwrap_or_else(|e| panic!("{e}"));
                out
            }
        }
    )*};
}

binary_ops!(Add add Add, Sub sub Sub, Mul mul Mul);

macro_rules! assign_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl<M: Mapping, B: Blob, R: RecordOperand> $trait<R> for VirtualRecordMut<'_, M, B> {
            fn $method(&mut self, rhs: R) {
                self.try_apply(BinOp::$op, &rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign Add, SubAssign sub_assign Sub, MulAssign mul_assign Mul);
