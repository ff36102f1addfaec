//! The record dimension: a tree of named fields whose leaves are scalars.
//!
//! A [`RecordDim`] describes the element type of a data space, the way nested
//! structs describe a value type. Fixed-size array fields are normalized into
//! records whose children are tagged `"0"`, `"1"`, ... by [`normalize_arrays`].

use std::fmt;

use crate::error::{LayoutError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    SignedInt,
    UnsignedInt,
    Float,
    Bool,
}

/// A scalar leaf type. Alignment always equals size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarType {
    kind: ScalarKind,
    size: u8,
}

impl ScalarType {
    pub const I8: Self = Self::raw(ScalarKind::SignedInt, 1);
    pub const I16: Self = Self::raw(ScalarKind::SignedInt, 2);
    pub const I32: Self = Self::raw(ScalarKind::SignedInt, 4);
    pub const I64: Self = Self::raw(ScalarKind::SignedInt, 8);
    pub const U8: Self = Self::raw(ScalarKind::UnsignedInt, 1);
    pub const U16: Self = Self::raw(ScalarKind::UnsignedInt, 2);
    pub const U32: Self = Self::raw(ScalarKind::UnsignedInt, 4);
    pub const U64: Self = Self::raw(ScalarKind::UnsignedInt, 8);
    pub const F32: Self = Self::raw(ScalarKind::Float, 4);
    pub const F64: Self = Self::raw(ScalarKind::Float, 8);
    pub const BOOL: Self = Self::raw(ScalarKind::Bool, 1);

    pub const ALL: [Self; 11] = [
        Self::I8,
        Self::I16,
        Self::I32,
        Self::I64,
        Self::U8,
        Self::U16,
        Self::U32,
        Self::U64,
        Self::F32,
        Self::F64,
        Self::BOOL,
    ];

    const fn raw(kind: ScalarKind, size: u8) -> Self {
        Self { kind, size }
    }

    /// Builds a scalar type, rejecting combinations that have no Rust counterpart.
    pub fn new(kind: ScalarKind, size: usize) -> Result<Self> {
        let ok = match kind {
            ScalarKind::SignedInt | ScalarKind::UnsignedInt => matches!(size, 1 | 2 | 4 | 8),
            ScalarKind::Float => matches!(size, 4 | 8),
            ScalarKind::Bool => size == 1,
        };
        if ok {
            Ok(Self::raw(kind, size as u8))
        } else {
            Err(LayoutError::Schema(format!(
                "unsupported scalar {kind:?} of {size} bytes"
            )))
        }
    }

    pub fn kind(self) -> ScalarKind {
        self.kind
    }

    pub fn size(self) -> usize {
        self.size as usize
    }

    pub fn align(self) -> usize {
        self.size as usize
    }

    pub fn name(self) -> &'static str {
        match (self.kind, self.size) {
            (ScalarKind::SignedInt, 1) => "i8",
            (ScalarKind::SignedInt, 2) => "i16",
            (ScalarKind::SignedInt, 4) => "i32",
            (ScalarKind::SignedInt, _) => "i64",
            (ScalarKind::UnsignedInt, 1) => "u8",
            (ScalarKind::UnsignedInt, 2) => "u16",
            (ScalarKind::UnsignedInt, 4) => "u32",
            (ScalarKind::UnsignedInt, _) => "u64",
            (ScalarKind::Float, 4) => "f32",
            (ScalarKind::Float, _) => "f64",
            (ScalarKind::Bool, _) => "bool",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A path of child indices from the root of a record dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordCoord(pub Vec<usize>);

impl RecordCoord {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_prefix_of(&self, other: &RecordCoord) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        Self(path)
    }
}

impl From<Vec<usize>> for RecordCoord {
    fn from(path: Vec<usize>) -> Self {
        Self(path)
    }
}

impl<const N: usize> From<[usize; N]> for RecordCoord {
    fn from(path: [usize; N]) -> Self {
        Self(path.to_vec())
    }
}

impl fmt::Display for RecordCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Field {
    pub tag: String,
    pub dim: RecordDim,
}

/// A normalized record dimension: no array fields, unique sibling tags, no empty records.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RecordDim {
    Leaf(ScalarType),
    Record(Vec<Field>),
}

/// Byte layout rule for the fields of one record instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Packing {
    /// Leaves follow each other without gaps.
    Packed,
    /// Each leaf starts at a multiple of its alignment; the total is rounded to the max alignment.
    Aligned,
}

/// A flattened leaf: its coordinate, scalar type, and tag path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatLeaf {
    pub coord: RecordCoord,
    pub ty: ScalarType,
    pub tags: Vec<String>,
}

impl RecordDim {
    /// Builds a record node, checking for a non-empty field list and unique tags.
    pub fn record<I, S>(fields: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, RecordDim)>,
        S: Into<String>,
    {
        let fields: Vec<Field> = fields
            .into_iter()
            .map(|(tag, dim)| Field {
                tag: tag.into(),
                dim,
            })
            .collect();
        if fields.is_empty() {
            return Err(LayoutError::Schema("record without fields".into()));
        }
        for (i, f) in fields.iter().enumerate() {
            if f.tag.is_empty() {
                return Err(LayoutError::Schema("empty tag".into()));
            }
            if fields[..i].iter().any(|g| g.tag == f.tag) {
                return Err(LayoutError::Schema(format!("duplicate tag `{}`", f.tag)));
            }
        }
        Ok(Self::Record(fields))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Self::Leaf(_))
    }

    pub fn fields(&self) -> &[Field] {
        match self {
            Self::Leaf(_) => &[],
            Self::Record(fields) => fields,
        }
    }

    /// Leaves in depth-first, declaration order.
    pub fn flatten_leaves(&self) -> Vec<FlatLeaf> {
        let mut out = Vec::new();
        let mut coord = Vec::new();
        let mut tags = Vec::new();
        fn walk(
            dim: &RecordDim,
            coord: &mut Vec<usize>,
            tags: &mut Vec<String>,
            out: &mut Vec<FlatLeaf>,
        ) {
            match dim {
                RecordDim::Leaf(ty) => out.push(FlatLeaf {
                    coord: RecordCoord(coord.clone()),
                    ty: *ty,
                    tags: tags.clone(),
                }),
                RecordDim::Record(fields) => {
                    for (i, f) in fields.iter().enumerate() {
                        coord.push(i);
                        tags.push(f.tag.clone());
                        walk(&f.dim, coord, tags, out);
                        coord.pop();
                        tags.pop();
                    }
                }
            }
        }
        walk(self, &mut coord, &mut tags, &mut out);
        out
    }

    pub fn leaf_types(&self) -> Vec<ScalarType> {
        let mut out = Vec::new();
        self.for_each_leaf_type(&mut |t| out.push(t));
        out
    }

    fn for_each_leaf_type(&self, f: &mut impl FnMut(ScalarType)) {
        match self {
            Self::Leaf(t) => f(*t),
            Self::Record(fields) => fields.iter().for_each(|x| x.dim.for_each_leaf_type(f)),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Leaf(_) => 1,
            Self::Record(fields) => fields.iter().map(|f| f.dim.leaf_count()).sum(),
        }
    }

    pub fn size_packed(&self) -> usize {
        self.leaf_types().iter().map(|t| t.size()).sum()
    }

    pub fn size_aligned(&self) -> usize {
        aligned_layout(self.leaf_types()).1
    }

    pub fn size_of(&self, packing: Packing) -> usize {
        match packing {
            Packing::Packed => self.size_packed(),
            Packing::Aligned => self.size_aligned(),
        }
    }

    /// Largest leaf alignment.
    pub fn max_align(&self) -> usize {
        self.leaf_types().iter().map(|t| t.align()).max().unwrap_or(1)
    }

    /// Byte offset of the leaf at `coord` inside one record instance.
    pub fn offset_of(&self, coord: &RecordCoord, packing: Packing) -> Result<usize> {
        let ordinal = self.leaf_ordinal(coord)?;
        let types = self.leaf_types();
        Ok(match packing {
            Packing::Packed => types[..ordinal].iter().map(|t| t.size()).sum(),
            Packing::Aligned => aligned_layout(types).0[ordinal],
        })
    }

    /// Position of the leaf at `coord` in flatten order.
    pub fn leaf_ordinal(&self, coord: &RecordCoord) -> Result<usize> {
        let mut dim = self;
        let mut ordinal = 0;
        for &i in coord.as_slice() {
            let fields = dim.fields();
            let Some(f) = fields.get(i) else {
                return Err(LayoutError::Usage(format!("invalid record coord {coord}")));
            };
            ordinal += fields[..i].iter().map(|g| g.dim.leaf_count()).sum::<usize>();
            dim = &f.dim;
        }
        if !dim.is_leaf() {
            return Err(LayoutError::Usage(format!(
                "record coord {coord} addresses a record, not a leaf"
            )));
        }
        Ok(ordinal)
    }

    /// The subtree addressed by `coord`.
    pub fn at(&self, coord: &RecordCoord) -> Result<&RecordDim> {
        let mut dim = self;
        for &i in coord.as_slice() {
            dim = &dim
                .fields()
                .get(i)
                .ok_or_else(|| LayoutError::Usage(format!("invalid record coord {coord}")))?
                .dim;
        }
        Ok(dim)
    }

    pub fn coord_from_tags<S: AsRef<str>>(&self, tags: &[S]) -> Result<RecordCoord> {
        let mut dim = self;
        let mut path = Vec::with_capacity(tags.len());
        let mut parent = String::from("<root>");
        for tag in tags {
            let tag = tag.as_ref();
            let Some(i) = dim.fields().iter().position(|f| f.tag == tag) else {
                return Err(LayoutError::Lookup {
                    tag: tag.to_string(),
                    parent,
                });
            };
            path.push(i);
            dim = &dim.fields()[i].dim;
            parent = tag.to_string();
        }
        Ok(RecordCoord(path))
    }

    /// Tag names along `coord`.
    pub fn tags_of(&self, coord: &RecordCoord) -> Result<Vec<String>> {
        let mut dim = self;
        let mut tags = Vec::with_capacity(coord.depth());
        for &i in coord.as_slice() {
            let f = dim
                .fields()
                .get(i)
                .ok_or_else(|| LayoutError::Usage(format!("invalid record coord {coord}")))?;
            tags.push(f.tag.clone());
            dim = &f.dim;
        }
        Ok(tags)
    }

    /// This dimension with the subtree at `coord` removed. Records left without
    /// fields are pruned; `None` if nothing remains.
    pub fn without(&self, coord: &RecordCoord) -> Result<Option<RecordDim>> {
        self.at(coord)?;
        Ok(remove_subtree(self, coord.as_slice()))
    }
}

fn remove_subtree(dim: &RecordDim, path: &[usize]) -> Option<RecordDim> {
    let (&first, rest) = path.split_first()?;
    let fields: Vec<Field> = dim
        .fields()
        .iter()
        .enumerate()
        .filter_map(|(i, f)| {
            if i != first {
                return Some(f.clone());
            }
            remove_subtree(&f.dim, rest).map(|dim| Field {
                tag: f.tag.clone(),
                dim,
            })
        })
        .collect();
    (!fields.is_empty()).then_some(RecordDim::Record(fields))
}

/// Offsets of `types` laid out sequentially at natural alignment, and the total
/// size rounded up to the largest alignment.
pub fn aligned_layout(types: impl IntoIterator<Item = ScalarType>) -> (Vec<usize>, usize) {
    let mut offsets = Vec::new();
    let mut cursor = 0usize;
    let mut max_align = 1usize;
    for t in types {
        cursor = cursor.next_multiple_of(t.align());
        offsets.push(cursor);
        cursor += t.size();
        max_align = max_align.max(t.align());
    }
    (offsets, cursor.next_multiple_of(max_align))
}

/// Leaf permutation (indices into flatten order) that sorts leaves by
/// non-increasing alignment, keeping declaration order among equals.
pub fn permute_minimize_padding(dim: &RecordDim) -> Vec<usize> {
    let types = dim.leaf_types();
    let mut perm: Vec<usize> = (0..types.len()).collect();
    perm.sort_by_key(|&i| std::cmp::Reverse(types[i].align()));
    perm
}

/// Aligned record size when the leaves are placed in `perm` order.
pub fn aligned_size_permuted(dim: &RecordDim, perm: &[usize]) -> usize {
    let types = dim.leaf_types();
    aligned_layout(perm.iter().map(|&i| types[i])).1
}

/// A record dimension that may still contain fixed-extent array fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawDim {
    Scalar(ScalarType),
    Record(Vec<(String, RawDim)>),
    Array(Box<RawDim>, usize),
}

impl RawDim {
    pub fn array(elem: RawDim, extent: usize) -> Self {
        Self::Array(Box::new(elem), extent)
    }
}

/// Replaces every `[T; k]` by a record of `k` fields tagged `"0"` .. `"k-1"`.
pub fn normalize_arrays(raw: &RawDim) -> Result<RecordDim> {
    match raw {
        RawDim::Scalar(t) => Ok(RecordDim::Leaf(*t)),
        RawDim::Record(fields) => RecordDim::record(
            fields
                .iter()
                .map(|(tag, d)| Ok((tag.clone(), normalize_arrays(d)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        RawDim::Array(elem, extent) => {
            if *extent == 0 {
                return Err(LayoutError::Schema("zero-extent array field".into()));
            }
            let elem = normalize_arrays(elem)?;
            RecordDim::record((0..*extent).map(|i| (i.to_string(), elem.clone())))
        }
    }
}

impl fmt::Display for RecordDim {
    /// Canonical schema text, e.g. `{Id:u16,Pos{X:f32,Y:f32}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Leaf(t) => write!(f, "{t}"),
            Self::Record(fields) => {
                f.write_str("{")?;
                for (i, field) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    match &field.dim {
                        RecordDim::Leaf(t) => write!(f, "{}:{t}", field.tag)?,
                        rec => write!(f, "{}{rec}", field.tag)?,
                    }
                }
                f.write_str("}")
            }
        }
    }
}

/// Builds a [`RecordDim`] from Rust-like syntax. Array fields use `[T; N]`.
///
/// ```
/// use memlayout::{record_dim, ScalarType};
/// let vec = record_dim!({ X: f32, Y: f32 });
/// assert_eq!(vec.leaf_types(), vec![ScalarType::F32, ScalarType::F32]);
/// let flags = record_dim!({ Flags: [bool; 3] });
/// assert_eq!(flags.leaf_count(), 3);
/// ```
#[macro_export]
macro_rules! record_dim {
    ({ $($tag:ident : $ty:tt),+ $(,)? }) => {
        $crate::normalize_arrays(&$crate::record_dim!(@raw { $($tag : $ty),+ }))
            .expect("invalid record_dim!")
    };
    ($ty:ident) => {
        $crate::RecordDim::Leaf($crate::record_dim!(@scalar $ty))
    };
    (@raw { $($tag:ident : $ty:tt),+ $(,)? }) => {
        $crate::RawDim::Record(vec![$((stringify!($tag).to_string(), $crate::record_dim!(@raw $ty))),+])
    };
    (@raw [$ty:tt; $n:expr]) => {
        $crate::RawDim::array($crate::record_dim!(@raw $ty), $n)
    };
    (@raw $ty:ident) => {
        $crate::RawDim::Scalar($crate::record_dim!(@scalar $ty))
    };
    (@scalar $ty:ident) => {
        $crate::ScalarType::from_name(stringify!($ty)).expect("unknown scalar type")
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2() -> RecordDim {
        record_dim!({ X: f32, Y: f32 })
    }

    fn particle() -> RecordDim {
        record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        })
    }

    #[test]
    fn normalizes_scalar_array() {
        let raw = RawDim::array(RawDim::Scalar(ScalarType::BOOL), 3);
        let dim = normalize_arrays(&raw).unwrap();
        let expected = RecordDim::record([
            ("0", RecordDim::Leaf(ScalarType::BOOL)),
            ("1", RecordDim::Leaf(ScalarType::BOOL)),
            ("2", RecordDim::Leaf(ScalarType::BOOL)),
        ])
        .unwrap();
        assert_eq!(dim, expected);
    }

    #[test]
    fn normalizes_nested_array() {
        let raw = RawDim::array(RawDim::array(RawDim::Scalar(ScalarType::F32), 2), 2);
        let dim = normalize_arrays(&raw).unwrap();
        let inner = RecordDim::record([
            ("0", RecordDim::Leaf(ScalarType::F32)),
            ("1", RecordDim::Leaf(ScalarType::F32)),
        ])
        .unwrap();
        assert_eq!(
            dim,
            RecordDim::record([("0", inner.clone()), ("1", inner)]).unwrap()
        );
        assert_eq!(
            normalize_arrays(&RawDim::Scalar(ScalarType::F32)).unwrap(),
            RecordDim::Leaf(ScalarType::F32)
        );
    }

    #[test]
    fn zero_extent_array_rejected() {
        let raw = RawDim::array(RawDim::Scalar(ScalarType::F32), 0);
        assert!(matches!(normalize_arrays(&raw), Err(LayoutError::Schema(_))));
    }

    #[test]
    fn flatten_particle() {
        let leaves = particle().flatten_leaves();
        let paths: Vec<String> = leaves.iter().map(|l| l.tags.join(".")).collect();
        assert_eq!(
            paths,
            ["Id", "Pos.X", "Pos.Y", "Mass", "Flags.0", "Flags.1", "Flags.2"]
        );
        assert_eq!(leaves[6].coord, RecordCoord::from([3, 2]));

        let v = vec2().flatten_leaves();
        assert_eq!(v[0].coord, RecordCoord::from([0]));
        assert_eq!(v[1].tags, ["Y"]);

        let single = RecordDim::Leaf(ScalarType::F64).flatten_leaves();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].coord, RecordCoord::root());
        assert!(single[0].tags.is_empty());
    }

    #[test]
    fn sizes() {
        assert_eq!(particle().size_packed(), 21);
        assert_eq!(vec2().size_packed(), 8);
        assert_eq!(RecordDim::Leaf(ScalarType::BOOL).size_packed(), 1);
        assert_eq!(particle().size_aligned(), 32);
        assert_eq!(vec2().size_aligned(), 8);
        assert_eq!(RecordDim::Leaf(ScalarType::F64).size_aligned(), 8);
    }

    #[test]
    fn offsets() {
        let p = particle();
        let mass = RecordCoord::from([2]);
        assert_eq!(p.offset_of(&mass, Packing::Packed).unwrap(), 10);
        assert_eq!(p.offset_of(&mass, Packing::Aligned).unwrap(), 16);
        let first = RecordCoord::from([0]);
        assert_eq!(p.offset_of(&first, Packing::Packed).unwrap(), 0);
        assert_eq!(p.offset_of(&first, Packing::Aligned).unwrap(), 0);
        assert!(matches!(
            p.offset_of(&RecordCoord::from([1]), Packing::Packed),
            Err(LayoutError::Usage(_))
        ));
    }

    #[test]
    fn coord_lookup() {
        let p = particle();
        assert_eq!(p.coord_from_tags(&["Pos", "Y"]).unwrap(), RecordCoord::from([1, 1]));
        assert_eq!(p.coord_from_tags::<&str>(&[]).unwrap(), RecordCoord::root());
        match p.coord_from_tags(&["Velocity"]) {
            Err(LayoutError::Lookup { tag, .. }) => assert_eq!(tag, "Velocity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimize_padding() {
        let p = particle();
        let perm = permute_minimize_padding(&p);
        assert_eq!(perm, [3, 1, 2, 0, 4, 5, 6]);
        assert_eq!(aligned_size_permuted(&p, &perm), 24);

        let sorted = record_dim!({ A: f64, B: u32, C: u8 });
        assert_eq!(permute_minimize_padding(&sorted), [0, 1, 2]);
        let same = record_dim!({ A: u32, B: f32, C: i32 });
        assert_eq!(permute_minimize_padding(&same), [0, 1, 2]);
    }

    #[test]
    fn removal_prunes_empty_records() {
        let p = particle();
        let rest = p.without(&RecordCoord::from([1])).unwrap().unwrap();
        assert_eq!(rest.to_string(), "{Id:u16,Mass:f64,Flags{0:bool,1:bool,2:bool}}");
        let single = record_dim!({ Pos: { X: f32 }, M: f32 });
        let rest = single.without(&RecordCoord::from([0, 0])).unwrap().unwrap();
        assert_eq!(rest.to_string(), "{M:f32}");
        assert_eq!(p.without(&RecordCoord::root()).unwrap(), None);
    }

    #[test]
    fn duplicate_tags_rejected() {
        let dup = RecordDim::record([
            ("A", RecordDim::Leaf(ScalarType::F32)),
            ("A", RecordDim::Leaf(ScalarType::F32)),
        ]);
        assert!(matches!(dup, Err(LayoutError::Schema(_))));
        assert!(RecordDim::record(Vec::<(String, RecordDim)>::new()).is_err());
    }
}
