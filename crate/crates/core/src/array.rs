//! Array extents, indices, linearization, and index/leaf iteration.

use std::fmt;
use std::str::FromStr;

use crate::error::{LayoutError, Result};
use crate::record::{RecordCoord, RecordDim};

/// Largest supported array rank.
pub const MAX_RANK: usize = 8;

/// Runtime sizes of the array dimensions. Every size is at least 1 and the
/// product fits in `usize`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArrayExtents {
    sizes: [usize; MAX_RANK],
    rank: u8,
    product: usize,
}

impl ArrayExtents {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_RANK {
            return Err(LayoutError::Config(format!(
                "rank must be in 1..={MAX_RANK}, got {}",
                sizes.len()
            )));
        }
        if let Some(d) = sizes.iter().position(|&s| s == 0) {
            return Err(LayoutError::Config(format!("extent {d} is zero")));
        }
        let product = sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or(LayoutError::Overflow)?;
        let mut buf = [0; MAX_RANK];
        buf[..sizes.len()].copy_from_slice(sizes);
        Ok(Self {
            sizes: buf,
            rank: sizes.len() as u8,
            product,
        })
    }

    /// One-dimensional extents of `n` elements.
    pub fn linear(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes[..self.rank as usize]
    }

    /// Number of array elements.
    pub fn product(&self) -> usize {
        self.product
    }

    pub fn contains(&self, index: &ArrayIndex) -> bool {
        index.rank() == self.rank()
            && index.coords().iter().zip(self.sizes()).all(|(i, s)| i < s)
    }

    pub fn check(&self, index: &ArrayIndex) -> Result<()> {
        if self.contains(index) {
            Ok(())
        } else {
            Err(LayoutError::Bounds {
                index: index.to_string(),
                extents: self.to_string(),
            })
        }
    }
}

impl fmt::Debug for ArrayExtents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ArrayExtents{:?}", self.sizes())
    }
}

impl fmt::Display for ArrayExtents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join(self.sizes()))
    }
}

/// Parses the CLI form `128,256,32`.
impl FromStr for ArrayExtents {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| LayoutError::Config(format!("bad extent `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&sizes)
    }
}

/// A coordinate in the array dimensions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayIndex {
    coords: [usize; MAX_RANK],
    rank: u8,
}

impl ArrayIndex {
    /// The index `{0}` of a one-dimensional array.
    pub const ORIGIN_1D: ArrayIndex = ArrayIndex { coords: [0; MAX_RANK], rank: 1 };

    pub fn new(coords: &[usize]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_RANK,
            "array index rank must be in 1..={MAX_RANK}"
        );
        let mut buf = [0; MAX_RANK];
        buf[..coords.len()].copy_from_slice(coords);
        Self {
            coords: buf,
            rank: coords.len() as u8,
        }
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(&[0; MAX_RANK][..rank])
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords[..self.rank as usize]
    }

    pub fn coords_mut(&mut self) -> &mut [usize] {
        &mut self.coords[..self.rank as usize]
    }

    /// Element-wise sum, used to offset sub-view indices.
    pub fn offset_by(&self, origin: &ArrayIndex) -> ArrayIndex {
        let mut out = *self;
        for (c, o) in out.coords_mut().iter_mut().zip(origin.coords()) {
            *c += o;
        }
        out
    }
}

impl fmt::Debug for ArrayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ArrayIndex{:?}", self.coords())
    }
}

impl fmt::Display for ArrayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join(self.coords()))
    }
}

impl From<usize> for ArrayIndex {
    fn from(i: usize) -> Self {
        Self::new(&[i])
    }
}

impl<const N: usize> From<[usize; N]> for ArrayIndex {
    fn from(c: [usize; N]) -> Self {
        Self::new(&c)
    }
}

impl From<&[usize]> for ArrayIndex {
    fn from(c: &[usize]) -> Self {
        Self::new(c)
    }
}

impl From<&ArrayIndex> for ArrayIndex {
    fn from(i: &ArrayIndex) -> Self {
        *i
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Order in which multidimensional indices are flattened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Linearizer {
    /// Last index fastest.
    #[default]
    RowMajor,
    /// First index fastest.
    ColMajor,
    /// Bit-interleaved Z-order; needs equal power-of-two extents.
    Morton,
}

impl Linearizer {
    /// Rejects extents this linearizer cannot handle.
    pub fn validate(self, extents: &ArrayExtents) -> Result<()> {
        if self != Linearizer::Morton {
            return Ok(());
        }
        let first = extents.sizes()[0];
        if !first.is_power_of_two() || extents.sizes().iter().any(|&s| s != first) {
            return Err(LayoutError::Config(format!(
                "Morton order needs equal power-of-two extents, got {extents}"
            )));
        }
        Ok(())
    }

    /// Flat position of `index`. The index must lie within `extents`.
    #[inline]
    pub fn linearize(self, extents: &ArrayExtents, index: &ArrayIndex) -> usize {
        debug_assert!(extents.contains(index), "{index} outside {extents}");
        let sizes = extents.sizes();
        let coords = index.coords();
        match self {
            Linearizer::RowMajor => {
                let mut flat = coords[0];
                for d in 1..sizes.len() {
                    flat = flat * sizes[d] + coords[d];
                }
                flat
            }
            Linearizer::ColMajor => {
                let last = sizes.len() - 1;
                let mut flat = coords[last];
                for d in (0..last).rev() {
                    flat = flat * sizes[d] + coords[d];
                }
                flat
            }
            Linearizer::Morton => {
                let rank = sizes.len();
                let bits = sizes[0].trailing_zeros() as usize;
                let mut flat = 0;
                for b in 0..bits {
                    for (d, &c) in coords.iter().enumerate() {
                        flat |= ((c >> b) & 1) << (b * rank + (rank - 1 - d));
                    }
                }
                flat
            }
        }
    }

    pub fn checked_linearize(self, extents: &ArrayExtents, index: &ArrayIndex) -> Result<usize> {
        self.validate(extents)?;
        extents.check(index)?;
        Ok(self.linearize(extents, index))
    }

    /// Inverse of [`Linearizer::linearize`].
    pub fn delinearize(self, extents: &ArrayExtents, mut flat: usize) -> ArrayIndex {
        debug_assert!(flat < extents.product());
        let sizes = extents.sizes();
        let mut index = ArrayIndex::zero(sizes.len());
        let coords = index.coords_mut();
        match self {
            Linearizer::RowMajor => {
                for d in (0..sizes.len()).rev() {
                    coords[d] = flat % sizes[d];
                    flat /= sizes[d];
                }
            }
            Linearizer::ColMajor => {
                for d in 0..sizes.len() {
                    coords[d] = flat % sizes[d];
                    flat /= sizes[d];
                }
            }
            Linearizer::Morton => {
                let rank = sizes.len();
                let bits = sizes[0].trailing_zeros() as usize;
                for b in 0..bits {
                    for (d, c) in coords.iter_mut().enumerate() {
                        *c |= ((flat >> (b * rank + (rank - 1 - d))) & 1) << b;
                    }
                }
            }
        }
        index
    }
}

pub fn linearize_row_major(extents: &ArrayExtents, index: &ArrayIndex) -> Result<usize> {
    Linearizer::RowMajor.checked_linearize(extents, index)
}

pub fn linearize_col_major(extents: &ArrayExtents, index: &ArrayIndex) -> Result<usize> {
    Linearizer::ColMajor.checked_linearize(extents, index)
}

pub fn linearize_morton(extents: &ArrayExtents, index: &ArrayIndex) -> Result<usize> {
    Linearizer::Morton.checked_linearize(extents, index)
}

/// Row-major enumeration of every index within some extents.
#[derive(Debug, Clone)]
pub struct ArrayIndexRange {
    extents: ArrayExtents,
    next: Option<ArrayIndex>,
    remaining: usize,
}

impl ArrayIndexRange {
    pub fn new(extents: ArrayExtents) -> Self {
        Self {
            extents,
            next: Some(ArrayIndex::zero(extents.rank())),
            remaining: extents.product(),
        }
    }
}

impl Iterator for ArrayIndexRange {
    type Item = ArrayIndex;

    fn next(&mut self) -> Option<ArrayIndex> {
        let current = self.next?;
        let mut succ = current;
        let sizes = self.extents.sizes();
        let coords = succ.coords_mut();
        let mut d = sizes.len();
        self.next = loop {
            if d == 0 {
                break None;
            }
            d -= 1;
            coords[d] += 1;
            if coords[d] < sizes[d] {
                break Some(succ);
            }
            coords[d] = 0;
        };
        self.remaining -= 1;
        Some(current)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ArrayIndexRange {}

pub fn array_index_range(extents: &ArrayExtents) -> ArrayIndexRange {
    ArrayIndexRange::new(*extents)
}

/// Calls `f` with the coordinate of every leaf, in flatten order.
pub fn for_each_leaf(dim: &RecordDim, mut f: impl FnMut(&RecordCoord)) {
    fn walk(dim: &RecordDim, path: &mut Vec<usize>, f: &mut impl FnMut(&RecordCoord)) {
        match dim {
            RecordDim::Leaf(_) => f(&RecordCoord(path.clone())),
            RecordDim::Record(fields) => {
                for (i, field) in fields.iter().enumerate() {
                    path.push(i);
                    walk(&field.dim, path, f);
                    path.pop();
                }
            }
        }
    }
    walk(dim, &mut Vec::new(), &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;
    use proptest::prelude::*;

    fn ext(s: &[usize]) -> ArrayExtents {
        ArrayExtents::new(s).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(ext(&[128, 256, 32]).product(), 1_048_576);
        assert_eq!(ext(&[1]).product(), 1);
        assert_eq!(ext(&[4, 3]).product(), 12);
        assert_eq!(ArrayExtents::new(&[usize::MAX, 2]), Err(LayoutError::Overflow));
        assert!(ArrayExtents::new(&[3, 0]).is_err());
        assert!(ArrayExtents::new(&[]).is_err());
    }

    #[test]
    fn parses_cli_extents() {
        assert_eq!("128,256,32".parse::<ArrayExtents>().unwrap(), ext(&[128, 256, 32]));
        assert!("4,x".parse::<ArrayExtents>().is_err());
    }

    #[test]
    fn row_major_examples() {
        let e = ext(&[3, 3]);
        assert_eq!(linearize_row_major(&e, &[1, 0].into()).unwrap(), 3);
        assert_eq!(linearize_row_major(&e, &[0, 0].into()).unwrap(), 0);
        assert_eq!(linearize_row_major(&ext(&[4, 3]), &[2, 1].into()).unwrap(), 7);
        assert!(matches!(
            linearize_row_major(&e, &[3, 0].into()),
            Err(LayoutError::Bounds { .. })
        ));
    }

    #[test]
    fn col_major_examples() {
        assert_eq!(linearize_col_major(&ext(&[3, 3]), &[1, 0].into()).unwrap(), 1);
        assert_eq!(linearize_col_major(&ext(&[3, 3]), &[0, 0].into()).unwrap(), 0);
        assert_eq!(linearize_col_major(&ext(&[4, 3]), &[2, 1].into()).unwrap(), 6);
        assert!(linearize_col_major(&ext(&[4, 3]), &[0, 3].into()).is_err());
    }

    #[test]
    fn morton_examples() {
        assert_eq!(linearize_morton(&ext(&[4, 4]), &[1, 1].into()).unwrap(), 3);
        assert_eq!(linearize_morton(&ext(&[4, 4]), &[0, 0].into()).unwrap(), 0);
        let e = ext(&[2, 2]);
        let mut seen: Vec<usize> = array_index_range(&e)
            .map(|i| linearize_morton(&e, &i).unwrap())
            .collect();
        seen.sort();
        assert_eq!(seen, [0, 1, 2, 3]);
        assert!(matches!(
            linearize_morton(&ext(&[4, 2]), &[0, 0].into()),
            Err(LayoutError::Config(_))
        ));
        assert!(linearize_morton(&ext(&[3, 3]), &[0, 0].into()).is_err());
    }

    #[test]
    fn index_range_examples() {
        let listed: Vec<Vec<usize>> = array_index_range(&ext(&[3, 3]))
            .map(|i| i.coords().to_vec())
            .collect();
        assert_eq!(listed.len(), 9);
        assert_eq!(listed[..4], [vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0]]);
        assert_eq!(listed[8], [2, 2]);

        let one: Vec<ArrayIndex> = array_index_range(&ext(&[1])).collect();
        assert_eq!(one, [ArrayIndex::from(0)]);

        // lexicographic enumeration oracle
        let cube: Vec<Vec<usize>> = array_index_range(&ext(&[2, 2, 2]))
            .map(|i| i.coords().to_vec())
            .collect();
        let mut expected = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    expected.push(vec![a, b, c]);
                }
            }
        }
        assert_eq!(cube, expected);
    }

    #[test]
    fn leaf_iteration() {
        let particle = record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        });
        let mut coords = Vec::new();
        for_each_leaf(&particle, |c| coords.push(c.clone()));
        assert_eq!(coords.len(), 7);
        assert_eq!(coords[0], RecordCoord::from([0]));
        assert_eq!(coords[6], RecordCoord::from([3, 2]));

        let mut single = Vec::new();
        for_each_leaf(&record_dim!(f32), |c| single.push(c.clone()));
        assert_eq!(single, [RecordCoord::root()]);

        let mut vec2 = Vec::new();
        for_each_leaf(&record_dim!({ X: f32, Y: f32 }), |c| vec2.push(c.clone()));
        assert_eq!(vec2, [RecordCoord::from([0]), RecordCoord::from([1])]);
    }

    fn arb_extents() -> impl Strategy<Value = ArrayExtents> {
        prop::collection::vec(1usize..8, 1..5)
            .prop_filter("small", |v| v.iter().product::<usize>() <= 4096)
            .prop_map(|v| ArrayExtents::new(&v).unwrap())
    }

    fn assert_bijection(lin: Linearizer, e: &ArrayExtents) {
        let mut hit = vec![false; e.product()];
        for idx in array_index_range(e) {
            let flat = lin.linearize(e, &idx);
            assert!(!hit[flat], "{lin:?} maps two indices to {flat}");
            hit[flat] = true;
            assert_eq!(lin.delinearize(e, flat), idx);
        }
    }

    proptest! {
        #[test]
        fn linearizers_are_bijections(e in arb_extents()) {
            assert_bijection(Linearizer::RowMajor, &e);
            assert_bijection(Linearizer::ColMajor, &e);
        }

        #[test]
        fn morton_is_bijection(rank in 1usize..4, bits in 0u32..4) {
            let side = 1usize << bits;
            let e = ArrayExtents::new(&vec![side; rank]).unwrap();
            prop_assume!(e.product() <= 4096);
            assert_bijection(Linearizer::Morton, &e);
        }

        #[test]
        fn range_is_row_major_preimage(e in arb_extents()) {
            for (flat, idx) in array_index_range(&e).enumerate() {
                prop_assert_eq!(Linearizer::RowMajor.linearize(&e, &idx), flat);
            }
        }
    }
}
