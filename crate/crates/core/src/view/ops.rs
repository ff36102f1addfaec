//! Field-wise assignment, arithmetic, and comparison between records.
//!
//! Two leaves take part in an operation when their tag paths relative to the
//! operand roots are equal. A scalar operand is broadcast to every leaf.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{LayoutError, Result};
use crate::info::{NodeId, RecordInfo};
use crate::value::{BinOp, Value};

/// Anything that exposes a record subtree for reading.
pub trait RecordRead {
    fn record_info(&self) -> &Arc<RecordInfo>;

    /// Root of the exposed subtree.
    fn node(&self) -> NodeId;

    /// Reads a leaf, given as an ordinal of [`RecordRead::record_info`].
    fn read_leaf(&self, leaf: usize) -> Value;
}

/// A record whose leaves can be written.
pub trait RecordWrite: RecordRead {
    fn write_leaf(&mut self, leaf: usize, value: Value);

    /// Read-modify-write with one address resolution.
    fn update_leaf(&mut self, leaf: usize, f: &mut dyn FnMut(Value) -> Value);
}

impl<R: RecordRead + ?Sized> RecordRead for &R {
    fn record_info(&self) -> &Arc<RecordInfo> {
        (**self).record_info()
    }

    fn node(&self) -> NodeId {
        (**self).node()
    }

    fn read_leaf(&self, leaf: usize) -> Value {
        (**self).read_leaf(leaf)
    }
}

impl<R: RecordRead + ?Sized> RecordRead for &mut R {
    fn record_info(&self) -> &Arc<RecordInfo> {
        (**self).record_info()
    }

    fn node(&self) -> NodeId {
        (**self).node()
    }

    fn read_leaf(&self, leaf: usize) -> Value {
        (**self).read_leaf(leaf)
    }
}

/// Right-hand side of a record operation.
pub enum Operand<'a> {
    Scalar(Value),
    Record(&'a dyn RecordRead),
}

pub trait RecordOperand {
    fn operand(&self) -> Operand<'_>;
}

impl<R: RecordRead> RecordOperand for R {
    fn operand(&self) -> Operand<'_> {
        Operand::Record(self)
    }
}

macro_rules! scalar_operand {
    ($($t:ty),*) => {$(
        impl RecordOperand for $t {
            fn operand(&self) -> Operand<'_> {
                Operand::Scalar(Value::from(*self))
            }
        }
    )*};
}

scalar_operand!(i8, i16, i32, i64, u8, u16, u32, u64, f32, f64, bool);

impl RecordOperand for Value {
    fn operand(&self) -> Operand<'_> {
        Operand::Scalar(*self)
    }
}

/// Calls `f(lhs_leaf, rhs_leaf)` for every pair of leaves with equal relative
/// tag paths and returns the number of pairs.
pub(crate) fn for_each_match(
    lhs: &dyn RecordRead,
    rhs: &dyn RecordRead,
    mut f: impl FnMut(usize, usize),
) -> usize {
    let (li, ln) = (lhs.record_info(), lhs.node());
    let (ri, rn) = (rhs.record_info(), rhs.node());
    let (lnode, rnode) = (li.node(ln), ri.node(rn));
    if lnode.shape == rnode.shape {
        for (l, r) in lnode.leaves().zip(rnode.leaves()) {
            f(l, r);
        }
        return lnode.leaf_count;
    }
    let depth = lnode.depth();
    let mut count = 0;
    for l in lnode.leaves() {
        let rel = &li.leaf(l).tags[depth..];
        let Ok(node) = ri.node_by_tags(rn, rel) else { continue };
        let target = ri.node(node);
        if target.is_leaf() {
            f(l, target.first_leaf);
            count += 1;
        }
    }
    count
}

fn no_match(lhs: &dyn RecordRead, rhs: &dyn RecordRead) -> LayoutError {
    let l = lhs.record_info().node(lhs.node());
    let r = rhs.record_info().node(rhs.node());
    LayoutError::Usage(format!("records {} and {} share no tag path", l.shape, r.shape))
}

/// `lhs = rhs` on matching leaves; `rhs` values are converted to the leaf types.
pub(crate) fn assign<W: RecordWrite>(lhs: &mut W, rhs: Operand) -> Result<()> {
    let node = lhs.record_info().node(lhs.node()).leaves();
    match rhs {
        Operand::Scalar(v) => {
            for leaf in node {
                lhs.write_leaf(leaf, v);
            }
        }
        Operand::Record(r) => {
            let mut pairs = Vec::with_capacity(node.len());
            if for_each_match(&*lhs, r, |a, b| pairs.push((a, b))) == 0 {
                return Err(no_match(&*lhs, r));
            }
            for (a, b) in pairs {
                lhs.write_leaf(a, r.read_leaf(b));
            }
        }
    }
    Ok(())
}

/// `lhs op= rhs` on matching leaves, evaluated in the lhs leaf types.
pub(crate) fn apply<W: RecordWrite>(lhs: &mut W, op: BinOp, rhs: Operand) -> Result<()> {
    let node = lhs.record_info().node(lhs.node()).leaves();
    match rhs {
        Operand::Scalar(v) => {
            for leaf in node {
                lhs.update_leaf(leaf, &mut |x| x.apply(op, v));
            }
        }
        Operand::Record(r) => {
            let mut pairs = Vec::with_capacity(node.len());
            if for_each_match(&*lhs, r, |a, b| pairs.push((a, b))) == 0 {
                return Err(no_match(&*lhs, r));
            }
            for (a, b) in pairs {
                let v = r.read_leaf(b);
                lhs.update_leaf(a, &mut |x| x.apply(op, v));
            }
        }
    }
    Ok(())
}

/// True iff `pred` holds for the ordering of every matching leaf pair.
pub(crate) fn compare_all(
    lhs: &dyn RecordRead,
    rhs: Operand,
    pred: fn(Ordering) -> bool,
) -> Result<bool> {
    let holds = |a: Value, b: Value| a.compare(b).is_some_and(pred);
    match rhs {
        Operand::Scalar(v) => {
            let leaves = lhs.record_info().node(lhs.node()).leaves();
            Ok(leaves.into_iter().all(|l| holds(lhs.read_leaf(l), v)))
        }
        Operand::Record(r) => {
            let mut all = true;
            if for_each_match(lhs, r, |a, b| all &= holds(lhs.read_leaf(a), r.read_leaf(b))) == 0 {
                return Err(no_match(lhs, r));
            }
            Ok(all)
        }
    }
}

/// Comparison helpers. Each is an AND-reduction over matching leaves and
/// panics if two record operands share no tag path; the `try_compare` form
/// reports that as an error instead.
pub trait RecordCompare: RecordRead + Sized {
    fn try_compare(&self, rhs: impl RecordOperand, pred: fn(Ordering) -> bool) -> Result<bool> {
        compare_all(self, rhs.operand(), pred)
    }

    fn all_eq(&self, rhs: impl RecordOperand) -> bool {
        self.try_compare(rhs, Ordering::is_eq).unwrap_or_else(|e| panic!("{e}"))
    }

    fn all_lt(&self, rhs: impl RecordOperand) -> bool {
        self.try_compare(rhs, Ordering::is_lt).unwrap_or_else(|e| panic!("{e}"))
    }

    fn all_le(&self, rhs: impl RecordOperand) -> bool {
        self.try_compare(rhs, Ordering::is_le).unwrap_or_else(|e| panic!("{e}"))
    }

    fn all_gt(&self, rhs: impl RecordOperand) -> bool {
        self.try_compare(rhs, Ordering::is_gt).unwrap_or_else(|e| panic!("{e}"))
    }

    fn all_ge(&self, rhs: impl RecordOperand) -> bool {
        self.try_compare(rhs, Ordering::is_ge).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<R: RecordRead> RecordCompare for R {}
