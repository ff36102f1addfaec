use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use memlayout::{alloc_view, AoS, AoSoA, ArrayExtents, Mapping, SoA, View};
use memlayout_bench::nbody;

const UPDATE_N: usize = 2048;
const MOVE_N: usize = 1 << 22;

fn prepared<M: Mapping>(m: M) -> View<M> {
    let mut v = alloc_view(m).unwrap();
    nbody::init(&mut v, nbody::SEED);
    v
}

macro_rules! each_mapping {
    ($n:expr, |$name:ident, $view:ident| $body:block) => {{
        let e = ArrayExtents::linear($n).unwrap();
        let info = nbody::particle_info();
        {
            let $name = "aos:packed";
            let mut $view = prepared(AoS::packed(e, info.clone()));
            $body
        }
        {
            let $name = "soa:mb";
            let mut $view = prepared(SoA::multi_blob(e, info.clone()));
            $body
        }
        {
            let $name = "aosoa:8";
            let mut $view = prepared(AoSoA::new(e, info.clone(), 8).unwrap());
            $body
        }
        {
            let $name = "aosoa:16";
            let mut $view = prepared(AoSoA::new(e, info.clone(), 16).unwrap());
            $body
        }
    }};
}

fn update(c: &mut Criterion) {
    let mut group = c.benchmark_group("update");
    group.sample_size(10);
    group.throughput(Throughput::Elements((UPDATE_N * UPDATE_N) as u64));
    each_mapping!(UPDATE_N, |name, view| {
        group.bench_function(BenchmarkId::new("typed", name), |b| {
            b.iter(|| nbody::update_kernel_typed(&mut view))
        });
    });
    group.finish();
}

fn movement(c: &mut Criterion) {
    let mut group = c.benchmark_group("move");
    group.sample_size(10);
    group.throughput(Throughput::Bytes((MOVE_N * 9 * 4) as u64));
    each_mapping!(MOVE_N, |name, view| {
        group.bench_function(BenchmarkId::new("typed", name), |b| {
            b.iter(|| nbody::move_kernel_typed(&mut view))
        });
        group.bench_function(BenchmarkId::new("runs", name), |b| {
            b.iter(|| nbody::move_kernel_runs(&mut view))
        });
    });
    group.finish();
}

criterion_group!(benches, update, movement);
criterion_main!(benches);
