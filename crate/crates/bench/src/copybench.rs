//! Timing of layout-changing copies between pairs of mappings.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use memlayout::{
    alloc_view, aosoa_copy, iterator_copy, naive_copy, parallel_copy, ArrayExtents, Blob,
    Direction, LayoutError, Linearizer, Mapping, MappingDesc, RecordDim, RecordInfo, Result,
    ScalarKind, ScalarType, Value, View,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CSV_HEADER: &str = "src_mapping,dst_mapping,strategy,threads,bytes,seconds,GiB_per_s";
pub const DEFAULT_EVENT_FIELDS: usize = 100;
const EVENT_CYCLE: [ScalarType; 5] = [
    ScalarType::I32,
    ScalarType::I64,
    ScalarType::F32,
    ScalarType::U8,
    ScalarType::BOOL,
];

/// Flat record of `fields` leaves named `f0, f1, ...` whose types cycle
/// through i32, i64, f32, u8 and bool.
pub fn event_dim(fields: usize) -> Result<RecordDim> {
    if fields == 0 {
        return Err(LayoutError::Config(
            "event schema needs at least one field".into(),
        ));
    }
    RecordDim::record((0..fields).map(|i| (format!("f{i}"), RecordDim::Leaf(EVENT_CYCLE[i % 5]))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// Three position floats, three velocity floats and a mass.
    Particle,
    Event(usize),
}

impl Schema {
    pub fn dim(self) -> Result<RecordDim> {
        match self {
            Schema::Particle => Ok(crate::nbody::particle_dim()),
            Schema::Event(n) => event_dim(n),
        }
    }

    /// Comment for the report header.
    pub fn note(self) -> String {
        match self {
            Schema::Particle => "particle schema: 7 f32 leaves".into(),
            Schema::Event(n) => format!(
                "generated event schema: {n} leaves cycling i32,i64,f32,u8,bool \
                 (stands in for a recorded physics event layout)"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CopyStrategy {
    Naive,
    Iterator,
    AoSoARead,
    AoSoAWrite,
    Parallel,
    /// Plain byte copy of the same data volume.
    Memcpy,
}

impl CopyStrategy {
    pub const ALL: [CopyStrategy; 6] = [
        CopyStrategy::Naive,
        CopyStrategy::Iterator,
        CopyStrategy::AoSoARead,
        CopyStrategy::AoSoAWrite,
        CopyStrategy::Parallel,
        CopyStrategy::Memcpy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopyStrategy::Naive => "naive",
            CopyStrategy::Iterator => "iterator",
            CopyStrategy::AoSoARead => "aosoa_read",
            CopyStrategy::AoSoAWrite => "aosoa_write",
            CopyStrategy::Parallel => "parallel",
            CopyStrategy::Memcpy => "memcpy",
        }
    }

    /// Chunked strategies need lanes on both sides.
    pub fn applies_to(self, src: &dyn Mapping, dst: &dyn Mapping) -> bool {
        match self {
            CopyStrategy::AoSoARead | CopyStrategy::AoSoAWrite => {
                src.lanes().is_some() && dst.lanes().is_some()
            }
            _ => true,
        }
    }
}

/// Parses `descA-descB,descC-descD`.
pub fn parse_pairs(text: &str) -> Result<Vec<(MappingDesc, MappingDesc)>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.trim().split_once('-').ok_or_else(|| {
                LayoutError::Config(format!("mapping pair {p:?} is not of the form <src>-<dst>"))
            })?;
            Ok((a.parse()?, b.parse()?))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CopyBenchConfig {
    pub extents: ArrayExtents,
    pub schema: Schema,
    pub pairs: Vec<(MappingDesc, MappingDesc)>,
    pub strategies: Vec<CopyStrategy>,
    /// Worker count of the parallel strategy.
    pub threads: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl CopyBenchConfig {
    pub fn new(extents: ArrayExtents, pairs: Vec<(MappingDesc, MappingDesc)>) -> Self {
        Self {
            extents,
            schema: Schema::Particle,
            pairs,
            strategies: CopyStrategy::ALL.to_vec(),
            threads: 1,
            repeats: 5,
            seed: crate::nbody::SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyRow {
    pub src: String,
    pub dst: String,
    pub strategy: CopyStrategy,
    pub threads: usize,
    /// Payload bytes: elements times the packed record size.
    pub bytes: usize,
    /// Mean over the timed repeats.
    pub seconds: f64,
}

impl CopyRow {
    pub fn gib_per_s(&self) -> f64 {
        self.bytes as f64 / (1u64 << 30) as f64 / self.seconds
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.9},{:.4}",
            self.src,
            self.dst,
            self.strategy.name(),
            self.threads,
            self.bytes,
            self.seconds,
            self.gib_per_s()
        )
    }
}

/// Header comment, column line and one line per row.
pub fn render_csv(schema: Schema, rows: &[CopyRow]) -> String {
    let mut s = format!("# {}\n{CSV_HEADER}\n", schema.note());
    for r in rows {
        let _ = writeln!(s, "{}", r.csv());
    }
    s
}

/// Fills every leaf with seeded uniform values of its type.
pub fn fill_random<M: Mapping, B: Blob>(view: &mut View<M, B>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types: Vec<ScalarType> = view.info().leaves().iter().map(|l| l.ty).collect();
    for i in 0..view.len() {
        let idx = Linearizer::RowMajor.delinearize(view.extents(), i);
        for (leaf, &ty) in types.iter().enumerate() {
            let v = match ty.kind() {
                ScalarKind::Float => Value::F64(rng.gen_range(-1.0..1.0)).cast(ty),
                ScalarKind::Bool => Value::Bool(rng.gen()),
                _ => Value::U64(rng.gen()).cast(ty),
            };
            view.set_value(&idx, leaf, v);
        }
    }
}

type DynView = View<Box<dyn Mapping>>;

fn copy_once(
    strategy: CopyStrategy,
    src: &DynView,
    dst: &mut DynView,
    threads: usize,
) -> Result<()> {
    match strategy {
        CopyStrategy::Naive => naive_copy(src, dst),
        CopyStrategy::Iterator => iterator_copy(src, dst),
        CopyStrategy::AoSoARead => aosoa_copy(src, dst, Direction::ReadContiguous),
        CopyStrategy::AoSoAWrite => aosoa_copy(src, dst, Direction::WriteContiguous),
        CopyStrategy::Parallel => parallel_copy(src, dst, threads, None),
        CopyStrategy::Memcpy => unreachable!("handled by the caller"),
    }
    .map(|_| ())
}

fn same_blobs(a: &DynView, b: &DynView) -> bool {
    a.blobs()
        .iter()
        .zip(b.blobs())
        .all(|(x, y)| x.bytes() == y.bytes())
}

fn timed(repeats: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    f()?;
    let mut total = 0.0;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        f()?;
        total += t.elapsed().as_secs_f64();
    }
    Ok(total / repeats.max(1) as f64)
}

/// Runs every applicable strategy on every pair. Each strategy's result is
/// compared with a naive copy before it is timed; a mismatch is an error.
pub fn run(config: &CopyBenchConfig) -> Result<Vec<CopyRow>> {
    let info: Arc<RecordInfo> = RecordInfo::new(config.schema.dim()?);
    let bytes = config.extents.product() * info.packed_size();
    let mut rows = vec![];
    for (a, b) in &config.pairs {
        let mut src = alloc_view(a.build(config.extents, info.clone())?)?;
        fill_random(&mut src, config.seed);
        let mut reference = alloc_view(b.build(config.extents, info.clone())?)?;
        naive_copy(&src, &mut reference)?;
        for &strategy in &config.strategies {
            let threads = if strategy == CopyStrategy::Parallel {
                config.threads
            } else {
                1
            };
            let seconds = if strategy == CopyStrategy::Memcpy {
                let from: Vec<u8> = src
                    .blobs()
                    .iter()
                    .flat_map(|b| b.bytes().iter().copied())
                    .cycle()
                    .take(bytes)
                    .collect();
                let mut to = vec![0u8; bytes];
                timed(config.repeats, || {
                    to.copy_from_slice(std::hint::black_box(&from));
                    if to != from {
                        return Err(LayoutError::Usage("byte copy mismatch".into()));
                    }
                    Ok(())
                })?
            } else {
                let mut dst = alloc_view(b.build(config.extents, info.clone())?)?;
                if !strategy.applies_to(src.mapping().as_ref(), dst.mapping().as_ref()) {
                    continue;
                }
                copy_once(strategy, &src, &mut dst, threads)?;
                if !same_blobs(&dst, &reference) {
                    return Err(LayoutError::Usage(format!(
                        "{} copy {a} -> {b} disagrees with the naive copy",
                        strategy.name()
                    )));
                }
                timed(config.repeats, || {
                    copy_once(strategy, &src, &mut dst, threads)
                })?
            };
            rows.push(CopyRow {
                src: a.to_string(),
                dst: b.to_string(),
                strategy,
                threads,
                bytes,
                seconds,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_schema_mix() {
        let dim = event_dim(DEFAULT_EVENT_FIELDS).unwrap();
        let types = dim.leaf_types();
        assert_eq!(types.len(), 100);
        assert_eq!(types.iter().filter(|t| **t == ScalarType::BOOL).count(), 20);
        assert_eq!(dim.size_packed(), 20 * (4 + 8 + 4 + 1 + 1));
        assert!(event_dim(0).is_err());
    }

    #[test]
    fn pair_parsing() {
        let p = parse_pairs("aos-soa:mb, aosoa:8-aosoa:32").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].1.to_string(), "aosoa:32");
        assert!(parse_pairs("aos").is_err());
        assert!(parse_pairs("aos-blob").is_err());
    }

    #[test]
    fn rows_per_pair_and_strategy() {
        let e = ArrayExtents::linear(64).unwrap();
        let mut config =
            CopyBenchConfig::new(e, parse_pairs("aos-soa:mb,aosoa:8-aosoa:32").unwrap());
        config.repeats = 1;
        config.threads = 2;
        let rows = run(&config).unwrap();
        // aos has no lanes, so the chunked strategies are skipped for the first pair
        assert_eq!(rows.len(), 4 + 6);
        assert!(rows.iter().all(|r| r.bytes == 64 * 28));
        assert_eq!(rows.iter().filter(|r| r.threads == 2).count(), 2);
        let csv = render_csv(config.schema, &rows);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# "));
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn event_schema_copies_validate() {
        let e = ArrayExtents::new(&[4, 5]).unwrap();
        let mut config =
            CopyBenchConfig::new(e, parse_pairs("aos-aosoa:4,soa:mb-aos:packed").unwrap());
        config.schema = Schema::Event(12);
        config.repeats = 1;
        assert_eq!(run(&config).unwrap().len(), 4 + 4);
    }
}
