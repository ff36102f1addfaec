//! All-pairs n-body simulation over any mapping.
//!
//! [`update_kernel`] and [`move_kernel`] are written with record operations on
//! virtual records. [`update_kernel_typed`] and [`move_kernel_typed`] compute
//! the same arithmetic in the same order through flat leaf accessors and are
//! used where speed matters.

use std::sync::Arc;
use std::time::Instant;

use memlayout::{
    alloc_view, record_dim, ArrayExtents, Blob, Mapping, MappingDesc, OneRecord, RecordDim,
    RecordInfo, View, VirtualRecord,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PROBLEM_SIZE: usize = 16 * 1024;
pub const TIMESTEP: f32 = 0.0001;
pub const EPS2: f32 = 0.01;
pub const SEED: u64 = 42;

/// Leaf ordinals in flatten order.
pub const POS_X: usize = 0;
pub const POS_Y: usize = 1;
pub const POS_Z: usize = 2;
pub const VEL_X: usize = 3;
pub const VEL_Y: usize = 4;
pub const VEL_Z: usize = 5;
pub const MASS: usize = 6;

pub fn particle_dim() -> RecordDim {
    record_dim!({
        Pos: { X: f32, Y: f32, Z: f32 },
        Vel: { X: f32, Y: f32, Z: f32 },
        Mass: f32,
    })
}

pub fn particle_info() -> Arc<RecordInfo> {
    RecordInfo::new(particle_dim())
}

/// Positions and velocities uniform in [-1, 1), masses in (0, 1].
pub fn init<M: Mapping, B: Blob>(view: &mut View<M, B>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..view.len() {
        for leaf in POS_X..=VEL_Z {
            view.set_flat(i, leaf, rng.gen_range(-1.0f32..1.0));
        }
        view.set_flat(i, MASS, 1.0 - rng.gen::<f32>());
    }
}

/// Accumulates the influence of `pj` on the velocity of `pi`.
pub fn p_p_interaction<M: Mapping, B: Blob>(pi: &mut OneRecord, pj: VirtualRecord<'_, M, B>) {
    let mut dist = pi.field("Pos") - pj.field("Pos");
    dist *= dist.clone();
    let dist_sqr = EPS2 + dist.get::<f32>("X") + dist.get::<f32>("Y") + dist.get::<f32>("Z");
    let dist_sixth = dist_sqr * dist_sqr * dist_sqr;
    let inv_dist_cube = 1.0f32 / dist_sixth.sqrt();
    let sts = pj.field("Mass").get::<f32>() * inv_dist_cube * TIMESTEP;
    let mut vel = pi.field_mut("Vel");
    vel += dist * sts;
}

/// Velocity update over a one-dimensional view of particles. Each particle is
/// accumulated in a local record against every particle, itself included,
/// and then stored back.
pub fn update_kernel<M: Mapping, B: Blob>(particles: &mut View<M, B>) {
    for i in 0..particles.len() {
        let mut pi = particles.at(i).load();
        for j in 0..particles.len() {
            p_p_interaction(&mut pi, particles.at(j));
        }
        particles.at_mut(i).assign(&pi);
    }
}

/// Position update: `Pos += Vel * TIMESTEP`.
pub fn move_kernel<M: Mapping, B: Blob>(particles: &mut View<M, B>) {
    for i in 0..particles.len() {
        let step = particles.at(i).field("Vel") * TIMESTEP;
        let mut p = particles.at_mut(i);
        let mut pos = p.field("Pos");
        pos += &step;
    }
}

/// [`update_kernel`] through typed flat accessors.
pub fn update_kernel_typed<M: Mapping, B: Blob>(particles: &mut View<M, B>) {
    let n = particles.len();
    for i in 0..n {
        let pos = [POS_X, POS_Y, POS_Z].map(|l| particles.get_flat::<f32>(i, l));
        let mut vel = [VEL_X, VEL_Y, VEL_Z].map(|l| particles.get_flat::<f32>(i, l));
        for j in 0..n {
            let mut dist = [0.0f32; 3];
            for (k, d) in dist.iter_mut().enumerate() {
                *d = pos[k] - particles.get_flat::<f32>(j, POS_X + k);
                *d *= *d;
            }
            let dist_sqr = EPS2 + dist[0] + dist[1] + dist[2];
            let dist_sixth = dist_sqr * dist_sqr * dist_sqr;
            let inv_dist_cube = 1.0f32 / dist_sixth.sqrt();
            let sts = particles.get_flat::<f32>(j, MASS) * inv_dist_cube * TIMESTEP;
            for k in 0..3 {
                vel[k] += dist[k] * sts;
            }
        }
        for (k, v) in vel.into_iter().enumerate() {
            particles.set_flat(i, VEL_X + k, v);
        }
    }
}

/// [`move_kernel`] through typed flat accessors.
pub fn move_kernel_typed<M: Mapping, B: Blob>(particles: &mut View<M, B>) {
    for i in 0..particles.len() {
        for k in 0..3 {
            let v = particles.get_flat::<f32>(i, VEL_X + k);
            particles.update_flat::<f32>(i, POS_X + k, |p| p + v * TIMESTEP);
        }
    }
}

/// [`move_kernel_typed`] over whole lane runs when the mapping has lanes
/// ([`Mapping::lanes`]): each run of a leaf is contiguous, so the update
/// streams through plain slices. Other mappings use the per-element path.
pub fn move_kernel_runs<M: Mapping, B: Blob>(particles: &mut View<M, B>) {
    const CHUNK: usize = 64;
    let Some(lanes) = particles.mapping().lanes() else {
        return move_kernel_typed(particles);
    };
    let n = particles.len();
    let mut first = 0;
    while first < n {
        let run = lanes.min(n - first);
        for k in 0..3 {
            let vel = particles
                .mapping()
                .blob_nr_and_offset_flat(first, VEL_X + k);
            let pos = particles
                .mapping()
                .blob_nr_and_offset_flat(first, POS_X + k);
            let mut buf = [0.0f32; CHUNK];
            for start in (0..run).step_by(CHUNK) {
                let len = CHUNK.min(run - start);
                let v = vel.offset + start * 4;
                let src = &particles.blobs()[vel.blob].bytes()[v..v + len * 4];
                for (b, x) in buf.iter_mut().zip(src.chunks_exact(4)) {
                    *b = f32::from_ne_bytes(x.try_into().unwrap());
                }
                let p = pos.offset + start * 4;
                let dst = &mut particles.blobs_mut()[pos.blob].bytes_mut()[p..p + len * 4];
                for (x, b) in dst.chunks_exact_mut(4).zip(&buf) {
                    let updated = f32::from_ne_bytes((&*x).try_into().unwrap()) + b * TIMESTEP;
                    x.copy_from_slice(&updated.to_ne_bytes());
                }
            }
        }
        first += run;
    }
}

/// Share of transported floats that a kernel uses: `read_moved` floats are
/// loaded of which `read_used` are needed, likewise for stores.
pub fn bandwidth_utilization(
    read_moved: usize,
    read_used: usize,
    written_moved: usize,
    written_used: usize,
) -> f64 {
    let unused = (read_moved - read_used) + (written_moved - written_used);
    1.0 - unused as f64 / (read_moved + written_moved) as f64
}

/// The move kernel on AoS loads and stores whole 7-float records but reads
/// only 6 floats and writes 3.
pub fn bandwidth_utilization_aos_move() -> f64 {
    bandwidth_utilization(7, 6, 7, 3)
}

/// With one blob per leaf only the touched leaves are transported.
pub fn bandwidth_utilization_soa_move() -> f64 {
    bandwidth_utilization(6, 6, 3, 3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Update,
    Move,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Update => "update",
            Kernel::Move => "move",
        }
    }
}

#[derive(Debug, Clone)]
pub struct NBodyConfig {
    pub problem_size: usize,
    pub steps: usize,
    pub mapping: MappingDesc,
    pub seed: u64,
}

impl Default for NBodyConfig {
    fn default() -> Self {
        Self {
            problem_size: PROBLEM_SIZE,
            steps: 5,
            mapping: MappingDesc::AoS {
                packing: memlayout::Packing::Packed,
                linearizer: Default::default(),
            },
            seed: SEED,
        }
    }
}

/// Mean timing of one kernel over all steps.
#[derive(Debug, Clone, PartialEq)]
pub struct NBodyRow {
    pub kernel: Kernel,
    pub mapping: String,
    pub elements: usize,
    pub seconds: f64,
    /// Particle interactions per second for update, GiB/s of Pos and Vel traffic for move.
    pub rate: f64,
}

impl NBodyRow {
    pub const CSV_HEADER: &'static str = "kernel,mapping,elements,seconds,rate";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.9},{:.6e}",
            self.kernel.name(),
            self.mapping,
            self.elements,
            self.seconds,
            self.rate
        )
    }
}

/// Runs `steps` update and move iterations with the typed kernels and reports
/// the mean time per kernel.
pub fn run<M: Mapping, B: Blob>(view: &mut View<M, B>, steps: usize) -> Vec<NBodyRow> {
    let n = view.len();
    let mapping = view.mapping().descriptor();
    let mut update = 0.0;
    let mut mv = 0.0;
    for _ in 0..steps {
        let t = Instant::now();
        update_kernel_typed(view);
        update += t.elapsed().as_secs_f64();
        let t = Instant::now();
        move_kernel_typed(view);
        mv += t.elapsed().as_secs_f64();
    }
    let steps_f = steps.max(1) as f64;
    let (update, mv) = (update / steps_f, mv / steps_f);
    let per_sec = |work: f64, secs: f64| {
        if secs > 0.0 {
            work / secs
        } else {
            f64::INFINITY
        }
    };
    let move_bytes = (n * 9 * 4) as f64 / (1u64 << 30) as f64;
    vec![
        NBodyRow {
            kernel: Kernel::Update,
            mapping: mapping.clone(),
            elements: n,
            seconds: update,
            rate: per_sec((n * n) as f64, update),
        },
        NBodyRow {
            kernel: Kernel::Move,
            mapping,
            elements: n,
            seconds: mv,
            rate: per_sec(move_bytes, mv),
        },
    ]
}

/// Builds, initializes and runs a simulation as configured.
pub fn run_config(config: &NBodyConfig) -> memlayout::Result<Vec<NBodyRow>> {
    let e = ArrayExtents::linear(config.problem_size)?;
    let mut view = alloc_view(config.mapping.build(e, particle_info())?)?;
    init(&mut view, config.seed);
    Ok(run(&mut view, config.steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use memlayout::{AoS, AoSoA, SoA};

    fn view_of<M: Mapping>(m: M, seed: u64) -> View<M> {
        let mut v = alloc_view(m).unwrap();
        init(&mut v, seed);
        v
    }

    #[test]
    fn leaf_constants_match_schema() {
        let info = particle_info();
        for (path, leaf) in [
            ("Pos.X", POS_X),
            ("Pos.Z", POS_Z),
            ("Vel.X", VEL_X),
            ("Vel.Z", VEL_Z),
            ("Mass", MASS),
        ] {
            assert_eq!(info.leaf_by_path(path).unwrap(), leaf);
        }
        assert_eq!(info.leaf_count(), 7);
    }

    #[test]
    fn initial_values_in_range() {
        let v = view_of(
            AoS::packed(ArrayExtents::linear(500).unwrap(), particle_info()),
            SEED,
        );
        for i in 0..500 {
            for l in POS_X..=VEL_Z {
                let x = v.get_flat::<f32>(i, l);
                assert!((-1.0..1.0).contains(&x));
            }
            let m = v.get_flat::<f32>(i, MASS);
            assert!(m > 0.0 && m <= 1.0);
        }
    }

    #[test]
    fn self_interaction_leaves_velocity() {
        let mut v = alloc_view(AoS::packed(
            ArrayExtents::linear(1).unwrap(),
            particle_info(),
        ))
        .unwrap();
        v.set_flat(0, VEL_Y, 0.25f32);
        v.set_flat(0, MASS, 0.5f32);
        let before: Vec<f32> = (0..7).map(|l| v.get_flat(0, l)).collect();
        update_kernel(&mut v);
        let after: Vec<f32> = (0..7).map(|l| v.get_flat(0, l)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn symmetric_pair() {
        let mut v = alloc_view(SoA::multi_blob(
            ArrayExtents::linear(2).unwrap(),
            particle_info(),
        ))
        .unwrap();
        v.set_flat(0, POS_X, 0.5f32);
        v.set_flat(1, POS_X, -0.5f32);
        v.set_flat(0, POS_Y, 0.25f32);
        v.set_flat(1, POS_Y, -0.25f32);
        v.set_flat(0, MASS, 0.75f32);
        v.set_flat(1, MASS, 0.75f32);
        update_kernel(&mut v);
        // the squared component distance carries no sign, so both receive the same change
        for k in 0..3 {
            assert_eq!(
                v.get_flat::<f32>(0, VEL_X + k),
                v.get_flat::<f32>(1, VEL_X + k)
            );
        }
        assert!(v.get_flat::<f32>(0, VEL_X) > 0.0);
        assert_eq!(v.get_flat::<f32>(0, VEL_Z), 0.0);
    }

    #[test]
    fn zero_mass_exerts_nothing() {
        let mut v = view_of(
            AoS::aligned(ArrayExtents::linear(2).unwrap(), particle_info()),
            3,
        );
        v.set_flat(1, MASS, 0.0f32);
        let vel0: Vec<f32> = (VEL_X..=VEL_Z).map(|l| v.get_flat(0, l)).collect();
        update_kernel(&mut v);
        let after: Vec<f32> = (VEL_X..=VEL_Z).map(|l| v.get_flat(0, l)).collect();
        assert_eq!(vel0, after);
    }

    #[test]
    fn move_adds_scaled_velocity() {
        let mut v = view_of(
            AoSoA::new(ArrayExtents::linear(9).unwrap(), particle_info(), 4).unwrap(),
            7,
        );
        let before = v.clone();
        move_kernel(&mut v);
        for i in 0..9 {
            for k in 0..3 {
                let p: f32 = before.get_flat(i, POS_X + k);
                let vel: f32 = before.get_flat(i, VEL_X + k);
                assert_eq!(v.get_flat::<f32>(i, POS_X + k), p + vel * TIMESTEP);
                assert_eq!(v.get_flat::<f32>(i, VEL_X + k), vel);
            }
            assert_eq!(v.get_flat::<f32>(i, MASS), before.get_flat::<f32>(i, MASS));
        }
    }

    #[test]
    fn record_and_typed_kernels_agree_exactly() {
        let e = ArrayExtents::linear(33).unwrap();
        let mut a = view_of(AoS::packed(e, particle_info()), SEED);
        let mut b = view_of(SoA::multi_blob(e, particle_info()), SEED);
        update_kernel(&mut a);
        move_kernel(&mut a);
        update_kernel_typed(&mut b);
        move_kernel_typed(&mut b);
        for i in 0..33 {
            for l in 0..7 {
                assert_eq!(
                    a.get_flat::<f32>(i, l).to_bits(),
                    b.get_flat::<f32>(i, l).to_bits()
                );
            }
        }
    }

    #[test]
    fn run_kernel_matches_typed_kernel() {
        for desc in [
            "aos:packed",
            "soa",
            "soa:mb",
            "aosoa:8",
            "aosoa:3",
            "aosoa:128",
        ] {
            let e = ArrayExtents::linear(301).unwrap();
            let m: MappingDesc = desc.parse().unwrap();
            let mut a = view_of(m.build(e, particle_info()).unwrap(), 5);
            let mut b = view_of(m.build(e, particle_info()).unwrap(), 5);
            move_kernel_typed(&mut a);
            move_kernel_runs(&mut b);
            assert_eq!(a.blobs()[0].bytes(), b.blobs()[0].bytes(), "{desc}");
            assert!((0..a.blobs().len()).all(|i| a.blobs()[i].bytes() == b.blobs()[i].bytes()));
        }
    }

    #[test]
    fn bandwidth_fractions() {
        assert!((bandwidth_utilization_aos_move() - (1.0 - 5.0 / 14.0)).abs() < 1e-12);
        assert_eq!(bandwidth_utilization(7, 7, 7, 7), 1.0);
        assert_eq!(bandwidth_utilization_soa_move(), 1.0);
    }

    #[test]
    fn report_rows() {
        let config = NBodyConfig {
            problem_size: 16,
            steps: 2,
            ..Default::default()
        };
        let rows = run_config(&config).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].kernel, Kernel::Update);
        assert_eq!(
            rows[1].csv().split(',').count(),
            NBodyRow::CSV_HEADER.split(',').count()
        );
        assert!(rows
            .iter()
            .all(|r| r.mapping == "aos:packed" && r.elements == 16));
    }
}
