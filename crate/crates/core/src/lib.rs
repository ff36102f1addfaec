//! Exchangeable memory layouts for n-dimensional arrays of nested records.
//!
//! A [`RecordDim`] describes the element type as a tree of named fields, an
//! [`ArrayExtents`] the index space. A [`Mapping`] decides where every leaf of
//! every element lives in a set of byte blobs, and a [`View`] binds a mapping
//! to its blobs and offers lazy record access.

pub mod array;
pub mod copy;
pub mod error;
pub mod info;
pub mod instrument;
pub mod mapping;
pub mod record;
pub mod schema;
pub mod value;
pub mod view;

pub use array::{array_index_range, for_each_leaf, ArrayExtents, ArrayIndex, Linearizer, MAX_RANK};
pub use copy::{
    aosoa_copy, iterator_copy, naive_copy, parallel_copy, smart_copy, CopyPlan, CopyStats, Direction,
    Strategy,
};
pub use error::{LayoutError, Result};
pub use info::{LeafInfo, NodeId, NodeInfo, RecordInfo};
pub use mapping::{
    AoS, AoSoA, FieldHits, Heatmap, Mapping, MappingDesc, NrAndOffset, One, SoA, Split, Trace,
};
pub use record::{
    normalize_arrays, Field, Packing, RawDim, RecordCoord, RecordDim, ScalarKind, ScalarType,
};
pub use schema::parse_schema;
pub use value::{BinOp, RecordTuple, Scalar, Value};
pub use view::{
    alloc_view, alloc_view_with, AlignedBlob, Blob, BlobAllocator, OneRecord, RecordCompare,
    RecordOperand, RecordRead, RecordWrite, SubView, SubViewMut, View, VirtualRecord,
    VirtualRecordMut,
};
