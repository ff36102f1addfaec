use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Sub, SubAssign};
use std::sync::Arc;

use super::ops::{self, RecordOperand, RecordRead, RecordWrite};
use super::{InlineBlob, View, VirtualRecord, VirtualRecordMut};
use crate::array::ArrayIndex;
use crate::error::{LayoutError, Result};
use crate::info::{NodeId, RecordInfo};
use crate::mapping::{Mapping, One};
use crate::record::RecordDim;
use crate::value::{BinOp, RecordTuple, Scalar, Value};

/// A single record with its own inline storage and value semantics:
/// cloning copies the data, and it is independent of any view.
///
/// New records are zero-filled.
#[derive(Clone)]
pub struct OneRecord {
    view: View<One, InlineBlob>,
}

const ORIGIN: ArrayIndex = ArrayIndex::ORIGIN_1D;

impl OneRecord {
    pub fn zeroed(info: Arc<RecordInfo>) -> Self {
        let mapping = One::scalar(info);
        let blob = InlineBlob::zeroed(mapping.blob_size(0));
        Self { view: View::new(mapping, vec![blob]).expect("blob sized from the mapping") }
    }

    pub fn from_dim(dim: RecordDim) -> Self {
        Self::zeroed(RecordInfo::new(dim))
    }

    /// Deep copy of the subtree exposed by `src`.
    pub fn load(src: &(impl RecordRead + ?Sized)) -> Self {
        let node = src.node();
        let info = src.record_info().subtree(node);
        let mut out = Self::zeroed(info);
        let leaves = src.record_info().node(node).leaves();
        for (dst, leaf) in leaves.enumerate() {
            out.view.set_value(&ORIGIN, dst, src.read_leaf(leaf));
        }
        out
    }

    pub fn from_tuple<T: RecordTuple>(info: Arc<RecordInfo>, t: &T) -> Result<Self> {
        let mut out = Self::zeroed(info);
        out.at_mut().store_tuple(t)?;
        Ok(out)
    }

    pub fn info(&self) -> &Arc<RecordInfo> {
        self.view.info()
    }

    pub fn at(&self) -> VirtualRecord<'_, One, InlineBlob> {
        self.view.at(ORIGIN)
    }

    pub fn at_mut(&mut self) -> VirtualRecordMut<'_, One, InlineBlob> {
        self.view.at_mut(ORIGIN)
    }

    pub fn field(&self, tag: &str) -> VirtualRecord<'_, One, InlineBlob> {
        self.at().field(tag)
    }

    pub fn field_mut(&mut self, tag: &str) -> VirtualRecordMut<'_, One, InlineBlob> {
        self.at_mut().into_field(tag)
    }

    /// Reads the leaf at a dotted tag path. Panics if the path does not name a leaf.
    pub fn get<T: Scalar>(&self, path: &str) -> T {
        self.at().path(path).get()
    }

    pub fn set<T: Scalar>(&mut self, path: &str, value: T) {
        self.at_mut().path(path).set(value)
    }

    /// The record's leaf values in flatten order.
    pub fn values(&self) -> Vec<Value> {
        (0..self.info().leaf_count())
            .map(|l| self.view.get_value(&ORIGIN, l))
            .collect()
    }

    pub fn to_tuple<T: RecordTuple>(&self) -> Result<T> {
        self.at().load_tuple()
    }

    pub fn try_assign(&mut self, rhs: &impl RecordOperand) -> Result<()> {
        ops::assign(self, rhs.operand())
    }

    pub fn assign(&mut self, rhs: impl RecordOperand) {
        self.try_assign(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_apply(&mut self, op: BinOp, rhs: &impl RecordOperand) -> Result<()> {
        ops::apply(self, op, rhs.operand())
    }

    /// `self op rhs` as a new record; fails if two records share no tag path.
    pub fn try_binary(&self, op: BinOp, rhs: &impl RecordOperand) -> Result<OneRecord> {
        let mut out = self.clone();
        out.try_apply(op, rhs)?;
        Ok(out)
    }
}

impl RecordRead for OneRecord {
    fn record_info(&self) -> &Arc<RecordInfo> {
        self.view.info()
    }

    fn node(&self) -> NodeId {
        NodeId::ROOT
    }

    fn read_leaf(&self, leaf: usize) -> Value {
        self.view.get_value(&ORIGIN, leaf)
    }
}

impl RecordWrite for OneRecord {
    fn write_leaf(&mut self, leaf: usize, value: Value) {
        self.view.set_value(&ORIGIN, leaf, value)
    }

    fn update_leaf(&mut self, leaf: usize, f: &mut dyn FnMut(Value) -> Value) {
        self.view.update_value(&ORIGIN, leaf, f)
    }
}

/// Equal shapes and equal leaf values.
impl PartialEq for OneRecord {
    fn eq(&self, other: &Self) -> bool {
        self.info().shape() == other.info().shape() && self.values() == other.values()
    }
}

impl fmt::Debug for OneRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (leaf, v) in self.info().leaves().iter().zip(self.values()) {
            m.entry(&leaf.path, &v);
        }
        m.finish()
    }
}

impl<R: RecordRead> From<&R> for OneRecord {
    fn from(src: &R) -> Self {
        OneRecord::load(src)
    }
}

impl TryFrom<(&RecordDim, Value)> for OneRecord {
    type Error = LayoutError;

    /// A record of the given shape with every leaf set to the value.
    fn try_from((dim, v): (&RecordDim, Value)) -> Result<Self> {
        let mut out = Self::from_dim(dim.clone());
        out.try_assign(&v)?;
        Ok(out)
    }
}

macro_rules! binary_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl<R: RecordOperand> $trait<R> for OneRecord {
            type Output = OneRecord;

            fn $method(mut self, rhs: R) -> OneRecord {
                self.try_apply(BinOp::$op, &rhs).unwrap_or_else(|e| panic!("{e}"));
                self
            }
        }

        impl<R: RecordOperand> $trait<R> for &OneRecord {
            type Output = OneRecord;

            fn $method(self, rhs: R) -> OneRecord {
                self.try_binary(BinOp::$op, &rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    )*};
}

binary_ops!(Add add Add, Sub sub Sub, Mul mul Mul);

macro_rules! assign_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl<R: RecordOperand> $trait<R> for OneRecord {
            fn $method(&mut self, rhs: R) {
                self.try_apply(BinOp::$op, &rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign Add, SubAssign sub_assign Sub, MulAssign mul_assign Mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;
    use crate::view::RecordCompare;

    fn vec3() -> Arc<RecordInfo> {
        RecordInfo::new(record_dim!({ X: f32, Y: f32, Z: f32 }))
    }

    #[test]
    fn zero_initialized_and_deep_copied() {
        let mut a = OneRecord::zeroed(vec3());
        assert!(a.all_eq(0.0f32));
        a.set("Y", 2.0f32);
        let b = a.clone();
        a.set("Y", 3.0f32);
        assert_eq!(b.get::<f32>("Y"), 2.0);
        assert_ne!(a, b);
    }

    #[test]
    fn arithmetic_matches_leafwise_oracle() {
        let a = OneRecord::from_tuple(vec3(), &(1.0f32, 2.0f32, 3.0f32)).unwrap();
        let b = OneRecord::from_tuple(vec3(), &(0.5f32, -1.0f32, 4.0f32)).unwrap();
        let sum = &a + &b;
        let diff = &a - &b;
        let prod = &a * &b;
        let scaled = &a * 2.0f32;
        assert_eq!(sum.to_tuple::<(f32, f32, f32)>().unwrap(), (1.5, 1.0, 7.0));
        assert_eq!(diff.to_tuple::<(f32, f32, f32)>().unwrap(), (0.5, 3.0, -1.0));
        assert_eq!(prod.to_tuple::<(f32, f32, f32)>().unwrap(), (0.5, -2.0, 12.0));
        assert_eq!(scaled.to_tuple::<(f32, f32, f32)>().unwrap(), (2.0, 4.0, 6.0));
        let mut acc = a.clone();
        acc += &b;
        acc -= 1.0f32;
        acc *= &a;
        assert_eq!(acc.to_tuple::<(f32, f32, f32)>().unwrap(), (0.5, 0.0, 18.0));
    }

    #[test]
    fn partial_tag_intersection() {
        let wide = RecordInfo::new(record_dim!({ X: f32, Y: f32, W: i32 }));
        let mut a = OneRecord::zeroed(wide);
        a.set("W", 7i32);
        let b = OneRecord::from_tuple(vec3(), &(1.0f32, 2.0f32, 3.0f32)).unwrap();
        a += &b;
        assert_eq!(a.to_tuple::<(f32, f32, i32)>().unwrap(), (1.0, 2.0, 7));
    }

    #[test]
    fn disjoint_tags_rejected() {
        let vec2 = OneRecord::from_dim(record_dim!({ X: f32, Y: f32 }));
        let particle = OneRecord::from_dim(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
        }));
        let err = vec2.try_binary(BinOp::Add, &particle).unwrap_err();
        assert!(matches!(err, LayoutError::Usage(_)));
        assert!(particle.try_compare(&vec2, std::cmp::Ordering::is_eq).is_err());
        // matching one level down works
        let pos = particle.field("Pos");
        assert!(vec2.all_eq(pos));
    }

    #[test]
    fn comparisons_reduce_with_and() {
        let a = OneRecord::from_tuple(vec3(), &(1.0f32, 2.0f32, 3.0f32)).unwrap();
        assert!(a.all_gt(0.0f32));
        assert!(!a.all_gt(1.0f32));
        assert!(a.all_ge(1.0f32));
        assert!(a.all_le(&a));
        assert!(!a.all_lt(&a));
        let nan = OneRecord::try_from((a.info().dim(), Value::F32(f32::NAN))).unwrap();
        assert!(!nan.all_eq(&nan));
    }
}
