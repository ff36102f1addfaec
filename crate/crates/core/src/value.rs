//! Dynamically typed leaf values and the [`Scalar`] bridge to Rust types.

use std::cmp::Ordering;

use crate::record::{ScalarKind, ScalarType};

/// A single leaf value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    I8(i8),
    I16(i16),
    I32(i32),
    I64(i64),
    U8(u8),
    U16(u16),
    U32(u32),
    U64(u64),
    F32(f32),
    F64(f64),
    Bool(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

enum Wide {
    Int(i128),
    Float(f64),
}

impl Value {
    pub fn ty(self) -> ScalarType {
        match self {
            Value::I8(_) => ScalarType::I8,
            Value::I16(_) => ScalarType::I16,
            Value::I32(_) => ScalarType::I32,
            Value::I64(_) => ScalarType::I64,
            Value::U8(_) => ScalarType::U8,
            Value::U16(_) => ScalarType::U16,
            Value::U32(_) => ScalarType::U32,
            Value::U64(_) => ScalarType::U64,
            Value::F32(_) => ScalarType::F32,
            Value::F64(_) => ScalarType::F64,
            Value::Bool(_) => ScalarType::BOOL,
        }
    }

    pub fn zero(ty: ScalarType) -> Self {
        Value::I8(0).cast(ty)
    }

    fn wide(self) -> Wide {
        match self {
            Value::I8(v) => Wide::Int(v.into()),
            Value::I16(v) => Wide::Int(v.into()),
            Value::I32(v) => Wide::Int(v.into()),
            Value::I64(v) => Wide::Int(v.into()),
            Value::U8(v) => Wide::Int(v.into()),
            Value::U16(v) => Wide::Int(v.into()),
            Value::U32(v) => Wide::Int(v.into()),
            Value::U64(v) => Wide::Int(v.into()),
            Value::Bool(v) => Wide::Int(v.into()),
            Value::F32(v) => Wide::Float(v.into()),
            Value::F64(v) => Wide::Float(v),
        }
    }

    /// Converts with Rust `as` semantics (integers wrap, floats saturate into integers).
    pub fn cast(self, ty: ScalarType) -> Value {
        if self.ty() == ty {
            return self;
        }
        macro_rules! to {
            ($variant:ident, $t:ty) => {
                match self.wide() {
                    Wide::Int(v) => Value::$variant(v as $t),
                    Wide::Float(v) => Value::$variant(v as $t),
                }
            };
        }
        match (ty.kind(), ty.size()) {
            (ScalarKind::SignedInt, 1) => to!(I8, i8),
            (ScalarKind::SignedInt, 2) => to!(I16, i16),
            (ScalarKind::SignedInt, 4) => to!(I32, i32),
            (ScalarKind::SignedInt, _) => to!(I64, i64),
            (ScalarKind::UnsignedInt, 1) => to!(U8, u8),
            (ScalarKind::UnsignedInt, 2) => to!(U16, u16),
            (ScalarKind::UnsignedInt, 4) => to!(U32, u32),
            (ScalarKind::UnsignedInt, _) => to!(U64, u64),
            (ScalarKind::Float, 4) => to!(F32, f32),
            (ScalarKind::Float, _) => to!(F64, f64),
            (ScalarKind::Bool, _) => Value::Bool(match self.wide() {
                Wide::Int(v) => v != 0,
                Wide::Float(v) => v != 0.0,
            }),
        }
    }

    /// `self op rhs`, evaluated in the type of `self`. Integers wrap. On booleans
    /// `Add` is or, `Sub` is and-not, and `Mul` is and.
    pub fn apply(self, op: BinOp, rhs: Value) -> Value {
        macro_rules! int {
            ($variant:ident, $a:expr, $b:expr) => {
                Value::$variant(match op {
                    BinOp::Add => $a.wrapping_add($b),
                    BinOp::Sub => $a.wrapping_sub($b),
                    BinOp::Mul => $a.wrapping_mul($b),
                })
            };
        }
        macro_rules! float {
            ($variant:ident, $a:expr, $b:expr) => {
                Value::$variant(match op {
                    BinOp::Add => $a + $b,
                    BinOp::Sub => $a - $b,
                    BinOp::Mul => $a * $b,
                })
            };
        }
        match (self, rhs.cast(self.ty())) {
            (Value::I8(a), Value::I8(b)) => int!(I8, a, b),
            (Value::I16(a), Value::I16(b)) => int!(I16, a, b),
            (Value::I32(a), Value::I32(b)) => int!(I32, a, b),
            (Value::I64(a), Value::I64(b)) => int!(I64, a, b),
            (Value::U8(a), Value::U8(b)) => int!(U8, a, b),
            (Value::U16(a), Value::U16(b)) => int!(U16, a, b),
            (Value::U32(a), Value::U32(b)) => int!(U32, a, b),
            (Value::U64(a), Value::U64(b)) => int!(U64, a, b),
            (Value::F32(a), Value::F32(b)) => float!(F32, a, b),
            (Value::F64(a), Value::F64(b)) => float!(F64, a, b),
            (Value::Bool(a), Value::Bool(b)) => Value::Bool(match op {
                BinOp::Add => a | b,
                BinOp::Sub => a & !b,
                BinOp::Mul => a & b,
            }),
            _ => unreachable!("rhs was cast to the lhs type"),
        }
    }

    /// Compares in the type of `self`; `None` for NaN.
    pub fn compare(self, rhs: Value) -> Option<Ordering> {
        match (self, rhs.cast(self.ty())) {
            (Value::I8(a), Value::I8(b)) => a.partial_cmp(&b),
            (Value::I16(a), Value::I16(b)) => a.partial_cmp(&b),
            (Value::I32(a), Value::I32(b)) => a.partial_cmp(&b),
            (Value::I64(a), Value::I64(b)) => a.partial_cmp(&b),
            (Value::U8(a), Value::U8(b)) => a.partial_cmp(&b),
            (Value::U16(a), Value::U16(b)) => a.partial_cmp(&b),
            (Value::U32(a), Value::U32(b)) => a.partial_cmp(&b),
            (Value::U64(a), Value::U64(b)) => a.partial_cmp(&b),
            (Value::F32(a), Value::F32(b)) => a.partial_cmp(&b),
            (Value::F64(a), Value::F64(b)) => a.partial_cmp(&b),
            (Value::Bool(a), Value::Bool(b)) => a.partial_cmp(&b),
            _ => unreachable!("rhs was cast to the lhs type"),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self.wide() {
            Wide::Int(v) => v as f64,
            Wide::Float(v) => v,
        }
    }

    /// Decodes `ty` from native-endian bytes. Any nonzero byte reads as `true`.
    pub fn read(ty: ScalarType, bytes: &[u8]) -> Value {
        match (ty.kind(), ty.size()) {
            (ScalarKind::SignedInt, 1) => Value::I8(i8::read(bytes)),
            (ScalarKind::SignedInt, 2) => Value::I16(i16::read(bytes)),
            (ScalarKind::SignedInt, 4) => Value::I32(i32::read(bytes)),
            (ScalarKind::SignedInt, _) => Value::I64(i64::read(bytes)),
            (ScalarKind::UnsignedInt, 1) => Value::U8(u8::read(bytes)),
            (ScalarKind::UnsignedInt, 2) => Value::U16(u16::read(bytes)),
            (ScalarKind::UnsignedInt, 4) => Value::U32(u32::read(bytes)),
            (ScalarKind::UnsignedInt, _) => Value::U64(u64::read(bytes)),
            (ScalarKind::Float, 4) => Value::F32(f32::read(bytes)),
            (ScalarKind::Float, _) => Value::F64(f64::read(bytes)),
            (ScalarKind::Bool, _) => Value::Bool(bool::read(bytes)),
        }
    }

    pub fn write(self, bytes: &mut [u8]) {
        match self {
            Value::I8(v) => v.write(bytes),
            Value::I16(v) => v.write(bytes),
            Value::I32(v) => v.write(bytes),
            Value::I64(v) => v.write(bytes),
            Value::U8(v) => v.write(bytes),
            Value::U16(v) => v.write(bytes),
            Value::U32(v) => v.write(bytes),
            Value::U64(v) => v.write(bytes),
            Value::F32(v) => v.write(bytes),
            Value::F64(v) => v.write(bytes),
            Value::Bool(v) => v.write(bytes),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::I8(v) => v.fmt(f),
            Value::I16(v) => v.fmt(f),
            Value::I32(v) => v.fmt(f),
            Value::I64(v) => v.fmt(f),
            Value::U8(v) => v.fmt(f),
            Value::U16(v) => v.fmt(f),
            Value::U32(v) => v.fmt(f),
            Value::U64(v) => v.fmt(f),
            Value::F32(v) => v.fmt(f),
            Value::F64(v) => v.fmt(f),
            Value::Bool(v) => v.fmt(f),
        }
    }
}

/// A Rust type that can be stored in a leaf of the matching [`ScalarType`].
pub trait Scalar: Copy + Send + Sync + 'static {
    const TYPE: ScalarType;

    /// Reads from the first `TYPE.size()` bytes.
    fn read(bytes: &[u8]) -> Self;
    fn write(self, bytes: &mut [u8]);
    fn into_value(self) -> Value;
    /// Converts with `as` semantics.
    fn from_value(v: Value) -> Self;
}

macro_rules! impl_scalar {
    ($($t:ty => $variant:ident, $const:ident;)*) => {$(
        impl Scalar for $t {
            const TYPE: ScalarType = ScalarType::$const;

            #[inline(always)]
            fn read(bytes: &[u8]) -> Self {
                <$t>::from_ne_bytes(bytes[..std::mem::size_of::<$t>()].try_into().unwrap())
            }

            #[inline(always)]
            fn write(self, bytes: &mut [u8]) {
                bytes[..std::mem::size_of::<$t>()].copy_from_slice(&self.to_ne_bytes());
            }

            #[inline(always)]
            fn into_value(self) -> Value {
                Value::$variant(self)
            }

            #[inline(always)]
            fn from_value(v: Value) -> Self {
                match v.cast(Self::TYPE) {
                    Value::$variant(x) => x,
                    _ => unreachable!(),
                }
            }
        }

        impl From<$t> for Value {
            fn from(v: $t) -> Value {
                Value::$variant(v)
            }
        }
    )*};
}

impl_scalar! {
    i8 => I8, I8;
    i16 => I16, I16;
    i32 => I32, I32;
    i64 => I64, I64;
    u8 => U8, U8;
    u16 => U16, U16;
    u32 => U32, U32;
    u64 => U64, U64;
    f32 => F32, F32;
    f64 => F64, F64;
}

impl Scalar for bool {
    const TYPE: ScalarType = ScalarType::BOOL;

    #[inline(always)]
    fn read(bytes: &[u8]) -> Self {
        bytes[0] != 0
    }

    #[inline(always)]
    fn write(self, bytes: &mut [u8]) {
        bytes[0] = self as u8;
    }

    fn into_value(self) -> Value {
        Value::Bool(self)
    }

    fn from_value(v: Value) -> Self {
        matches!(v.cast(Self::TYPE), Value::Bool(true))
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Value {
        Value::Bool(v)
    }
}

/// A host value that converts to and from a flat sequence of leaf values, the
/// way tuples and arrays line up with a record's leaves in flatten order.
pub trait RecordTuple: Sized {
    fn leaf_types(out: &mut Vec<ScalarType>);
    fn push_leaves(&self, out: &mut Vec<Value>);
    fn pull_leaves(it: &mut dyn Iterator<Item = Value>) -> Option<Self>;
}

impl<T: Scalar> RecordTuple for T {
    fn leaf_types(out: &mut Vec<ScalarType>) {
        out.push(T::TYPE);
    }

    fn push_leaves(&self, out: &mut Vec<Value>) {
        out.push(self.into_value());
    }

    fn pull_leaves(it: &mut dyn Iterator<Item = Value>) -> Option<Self> {
        it.next().map(T::from_value)
    }
}

impl<T: RecordTuple, const N: usize> RecordTuple for [T; N] {
    fn leaf_types(out: &mut Vec<ScalarType>) {
        for _ in 0..N {
            T::leaf_types(out);
        }
    }

    fn push_leaves(&self, out: &mut Vec<Value>) {
        self.iter().for_each(|x| x.push_leaves(out));
    }

    fn pull_leaves(it: &mut dyn Iterator<Item = Value>) -> Option<Self> {
        let items: Vec<T> = (0..N).map(|_| T::pull_leaves(it)).collect::<Option<_>>()?;
        items.try_into().ok()
    }
}

macro_rules! impl_tuple {
    ($($name:ident)+) => {
        impl<$($name: RecordTuple),+> RecordTuple for ($($name,)+) {
            fn leaf_types(out: &mut Vec<ScalarType>) {
                $($name::leaf_types(out);)+
            }

            #[allow(non_snake_case)]
            fn push_leaves(&self, out: &mut Vec<Value>) {
                let ($($name,)+) = self;
                $($name.push_leaves(out);)+
            }

            fn pull_leaves(it: &mut dyn Iterator<Item = Value>) -> Option<Self> {
                Some(($($name::pull_leaves(it)?,)+))
            }
        }
    };
}

impl_tuple!(A);
impl_tuple!(A B);
impl_tuple!(A B C);
impl_tuple!(A B C D);
impl_tuple!(A B C D E);
impl_tuple!(A B C D E F);
impl_tuple!(A B C D E F G);
impl_tuple!(A B C D E F G H);
