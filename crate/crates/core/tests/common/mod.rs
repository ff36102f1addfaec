#![allow(dead_code)]

use std::sync::Arc;

use memlayout::{record_dim, ArrayExtents, Mapping, MappingDesc, RecordDim, RecordInfo, ScalarType};
use proptest::prelude::*;

pub fn particle_dim() -> RecordDim {
    record_dim!({
        Id: u16,
        Pos: { X: f32, Y: f32 },
        Mass: f64,
        Flags: [bool; 3],
    })
}

pub fn particle() -> Arc<RecordInfo> {
    RecordInfo::new(particle_dim())
}

/// Descriptors of every mapping family, including nested and wrapped ones.
pub const ALL_DESCRIPTORS: &[&str] = &[
    "aos:packed",
    "aos",
    "soa",
    "soa:mb",
    "aosoa:1",
    "aosoa:4",
    "aosoa:8",
    "aosoa:32",
    "one",
    "split:Pos:soa:mb:aos:packed",
    "split:Pos:soa:mb:split:Mass:one:aos",
    "trace:aos:packed",
    "heatmap:aosoa:4",
    "trace:heatmap:soa:mb",
];

/// The seven layouts compared pairwise by the copy tests.
pub const COPY_DESCRIPTORS: &[&str] =
    &["aos:packed", "aos", "soa", "soa:mb", "aosoa:4", "aosoa:8", "aosoa:32"];

pub fn build(desc: &str, extents: ArrayExtents, info: Arc<RecordInfo>) -> Box<dyn Mapping> {
    desc.parse::<MappingDesc>()
        .unwrap()
        .build(extents, info)
        .unwrap_or_else(|e| panic!("{desc}: {e}"))
}

pub fn arb_scalar() -> impl Strategy<Value = ScalarType> {
    proptest::sample::select(ScalarType::ALL.to_vec())
}

/// Random record dimensions up to three levels deep with at most four fields per record.
pub fn arb_record_dim() -> impl Strategy<Value = RecordDim> {
    let leaf = arb_scalar().prop_map(RecordDim::Leaf);
    let tree = leaf.prop_recursive(3, 16, 4, |inner| {
        prop::collection::vec(inner, 1..=4).prop_map(|children| {
            RecordDim::record(children.into_iter().enumerate().map(|(i, c)| (format!("f{i}"), c)))
                .unwrap()
        })
    });
    // the root is always a record
    prop::collection::vec(tree, 1..=4).prop_map(|children| {
        RecordDim::record(children.into_iter().enumerate().map(|(i, c)| (format!("t{i}"), c)))
            .unwrap()
    })
}

pub fn arb_extents(max_product: usize) -> impl Strategy<Value = ArrayExtents> {
    prop::collection::vec(1usize..=6, 1..=3)
        .prop_filter("product too large", move |s| s.iter().product::<usize>() <= max_product)
        .prop_map(|s| ArrayExtents::new(&s).unwrap())
}
