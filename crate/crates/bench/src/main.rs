use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use memlayout::instrument::{
    enumerate_cells, render_heatmap_csv, render_svg, render_trace_report, DEFAULT_BYTES_PER_ROW,
};
use memlayout::record::{aligned_size_permuted, permute_minimize_padding};
use memlayout::{
    alloc_view, parse_schema, ArrayExtents, Heatmap, Mapping, MappingDesc, Packing, RecordDim,
    RecordInfo, Trace,
};
use memlayout_bench::copybench::{self, CopyBenchConfig, Schema};
use memlayout_bench::nbody::{self, NBodyRow};

#[derive(Parser)]
#[command(
    name = "tool",
    version,
    about = "Memory layout inspection and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Show where every leaf of every element lives, optionally as an SVG diagram
    Dump(DumpArgs),
    /// Show packed, aligned and padding-minimized sizes and offsets of a schema
    Sizes(SizesArgs),
    /// Run the all-pairs n-body simulation
    Nbody(NBodyArgs),
    /// Time layout-changing copies between mapping pairs
    Copybench(CopyArgs),
}

#[derive(Args)]
struct DumpArgs {
    /// Record schema, e.g. `Particle{Pos{X:f32,Y:f32},Mass:f64}`
    #[arg(long)]
    schema: String,
    /// Array extents, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Mapping descriptor, e.g. `aosoa:4` or `split:Pos:soa:mb:aos`
    #[arg(long)]
    mapping: MappingDesc,
    /// Write an SVG diagram to this file
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Bytes per diagram row
    #[arg(long, default_value_t = DEFAULT_BYTES_PER_ROW)]
    bytes_per_row: usize,
}

#[derive(Args)]
struct SizesArgs {
    #[arg(long)]
    schema: String,
}

#[derive(Args)]
struct NBodyArgs {
    /// Number of particles
    #[arg(long, default_value_t = nbody::PROBLEM_SIZE)]
    n: usize,
    /// Update and move iterations
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value = "aos:packed")]
    mapping: MappingDesc,
    /// Count mapping resolutions per field and print them
    #[arg(long, conflicts_with = "heatmap")]
    trace: bool,
    /// Count accesses per byte and write them as CSV
    #[arg(long, value_name = "OUT_CSV")]
    heatmap: Option<PathBuf>,
    #[arg(long, default_value_t = nbody::SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaChoice {
    Particle,
    Event,
}

#[derive(Args)]
struct CopyArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Comma separated `<src>-<dst>` descriptor pairs
    #[arg(
        long,
        default_value = "aos:packed-soa:mb,soa:mb-aos:packed,aosoa:8-aosoa:32,aosoa:32-aosoa:8,soa:mb-aosoa:8"
    )]
    pairs: String,
    /// Workers of the parallel strategy
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value = "particle")]
    schema: SchemaChoice,
    /// Leaf count of the generated event schema
    #[arg(long, default_value_t = copybench::DEFAULT_EVENT_FIELDS)]
    event_fields: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Also write the report to this file
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn schema(text: &str) -> Result<RecordDim> {
    parse_schema(text).with_context(|| format!("invalid schema {text:?}"))
}

fn extents(dims: &[usize]) -> Result<ArrayExtents> {
    ArrayExtents::new(dims).context("invalid --dims")
}

fn dump(args: DumpArgs) -> Result<()> {
    let info = RecordInfo::new(schema(&args.schema)?);
    let m = args.mapping.build(extents(&args.dims)?, info)?;
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "mapping {}", m.descriptor())?;
    writeln!(out, "extents {}", m.extents())?;
    for b in 0..m.blob_count() {
        writeln!(out, "blob {b}: {} bytes", m.blob_size(b))?;
    }
    match &args.svg {
        Some(path) => {
            let svg = render_svg(&m, args.bytes_per_row)?;
            fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            writeln!(out, "blob,begin,end,field,index")?;
            for c in enumerate_cells(&m)? {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.blob, c.byte_begin, c.byte_end, c.tag_path, c.array_index
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn sizes(args: SizesArgs) -> Result<()> {
    let dim = schema(&args.schema)?;
    let perm = permute_minimize_padding(&dim);
    println!("packed size {}", dim.size_packed());
    println!("aligned size {}", dim.size_aligned());
    println!(
        "minimized aligned size {}",
        aligned_size_permuted(&dim, &perm)
    );
    let leaves = dim.flatten_leaves();
    let order: Vec<String> = perm.iter().map(|&l| leaves[l].tags.join(".")).collect();
    println!("minimizing order {}", order.join(","));
    println!("field,type,size,packed_offset,aligned_offset");
    for leaf in &leaves {
        println!(
            "{},{},{},{},{}",
            leaf.tags.join("."),
            leaf.ty,
            leaf.ty.size(),
            dim.offset_of(&leaf.coord, Packing::Packed)?,
            dim.offset_of(&leaf.coord, Packing::Aligned)?
        );
    }
    Ok(())
}

fn print_rows(rows: &[NBodyRow]) {
    println!("{}", NBodyRow::CSV_HEADER);
    for r in rows {
        println!("{}", r.csv());
    }
}

fn run_nbody(args: NBodyArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let e = ArrayExtents::linear(args.n)?;
    let mapping = args.mapping.build(e, nbody::particle_info())?;
    if args.trace {
        let mut view = alloc_view(Trace::new(mapping))?;
        nbody::init(&mut view, args.seed);
        view.mapping().reset();
        print_rows(&nbody::run(&mut view, args.steps));
        print!("{}", render_trace_report(view.mapping()));
    } else if let Some(path) = &args.heatmap {
        let mut view = alloc_view(Heatmap::new(mapping))?;
        nbody::init(&mut view, args.seed);
        view.mapping().reset();
        print_rows(&nbody::run(&mut view, args.steps));
        fs::write(path, render_heatmap_csv(view.mapping()))
            .with_context(|| format!("writing {}", path.display()))?;
    } else {
        let mut view = alloc_view(mapping)?;
        nbody::init(&mut view, args.seed);
        print_rows(&nbody::run(&mut view, args.steps));
    }
    Ok(())
}

fn run_copybench(args: CopyArgs) -> Result<()> {
    let mut config =
        CopyBenchConfig::new(extents(&args.dims)?, copybench::parse_pairs(&args.pairs)?);
    config.schema = match args.schema {
        SchemaChoice::Particle => Schema::Particle,
        SchemaChoice::Event => Schema::Event(args.event_fields),
    };
    if args.threads == 0 {
        bail!("--threads must be at least 1");
    }
    config.threads = args.threads;
    config.repeats = args.repeats;
    let report = copybench::render_csv(config.schema, &copybench::run(&config)?);
    print!("{report}");
    if let Some(path) = &args.csv {
        fs::write(path, &report).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        if e.use_stderr() {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            std::process::exit(e.exit_code());
        }
        e.exit()
    });
    let result = match cli.command {
        Command::Dump(a) => dump(a),
        Command::Sizes(a) => sizes(a),
        Command::Nbody(a) => run_nbody(a),
        Command::Copybench(a) => run_copybench(a),
    };
    match result {
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        r => r,
    }
}
