//! `sposet`: generate instances, build oracles, and query stored containers.
//!
//! Labels are 1-based on the command line and in every message.
//! Exit codes: 0 ok, 2 usage or parse error, 3 validation failure, 4 corrupt container.
//! Set `SPOSET_LOG` (for example `SPOSET_LOG=debug`) for log output on stderr.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use succinct_poset::container::{inspect, load, save, ContainerInfo};
use succinct_poset::format::{parse_instance, write_instance};
use succinct_poset::gen::{generate, EdgeSemantics, GenKind, GenSpec, Instance, SplitMix64};
use succinct_poset::oracle::check_transitive;
use succinct_poset::order::{topological_order, transitive_closure, transitive_reduction, validate_poset};
use succinct_poset::scc::strongly_connected_components;
use succinct_poset::{BitMatrix, Digraph, Error, Mode, Oracle, SpaceReport, Violation};

#[derive(Parser)]
#[command(name = "sposet", version, about = "Succinct poset and reachability oracles")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance in the text format.
    Gen(GenArgs),
    /// Build an oracle from an instance file and store it as a container.
    Build(BuildArgs),
    /// Answer queries against a container: `a b`, `--all`, or pairs on stdin.
    Query(QueryArgs),
    /// Print the space report of a container.
    Stats(StatsArgs),
    /// Check an instance file against the axioms of its edge semantics.
    Verify(VerifyArgs),
    /// Time random queries against a container.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// chain, antichain, grid, random_dag, random_layered, random_digraph, random_relation
    #[arg(long)]
    kind: GenKind,
    /// Element count (row count for grids).
    #[arg(long)]
    n: usize,
    /// Column count for grids.
    #[arg(long, default_value_t = 0)]
    cols: usize,
    /// Edge probability for the random kinds.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// cover, closure, relation or digraph
    #[arg(long)]
    edges: EdgeSemantics,
    /// poset, reduction, digraph or relation; defaults to the natural mode for --edges
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    container: PathBuf,
    a: Option<usize>,
    b: Option<usize>,
    /// Answer every ordered pair in row-major label order.
    #[arg(long, conflicts_with_all = ["a", "b", "stdin"])]
    all: bool,
    /// Read one "a b" pair per line from stdin.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    stdin: bool,
}

#[derive(Args)]
struct StatsArgs {
    container: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    edges: EdgeSemantics,
}

#[derive(Args)]
struct BenchArgs {
    container: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

/// Maps library errors to exit codes, shifting element labels to 1-based.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, msg) = match e {
            Error::Parse { line, msg } => (2, format!("parse error on line {line}: {msg}")),
            Error::Range { index, hi, .. } => (2, format!("label {} outside 1..={}", index + 1, hi + 1)),
            Error::TooLarge(m) => (2, format!("input too large: {m}")),
            Error::NotADag { vertex } => (3, format!("not acyclic: vertex {} lies on a cycle", vertex + 1)),
            Error::InvalidPoset(v) => (3, format!("not a strict partial order: {}", violation(v))),
            Error::NotTransitive { a, b, c } => (
                3,
                format!("not transitive: ({}, {}) and ({}, {}) present, ({}, {}) missing", a + 1, b + 1, b + 1, c + 1, a + 1, c + 1),
            ),
            Error::NotAReduction { u, v } => {
                (3, format!("not a transitive reduction: edge ({}, {}) is implied by a longer path", u + 1, v + 1))
            }
            Error::Corrupt(m) => (4, format!("corrupt container: {m}")),
            other => (1, other.to_string()),
        };
        Self { code, msg }
    }
}

fn violation(v: Violation) -> String {
    match v {
        Violation::Reflexive { a } => format!("element {} precedes itself", a + 1),
        Violation::Antisymmetric { a, b } => format!("({}, {}) and ({}, {}) both present", a + 1, b + 1, b + 1, a + 1),
        Violation::Transitive { a, b, c } => {
            format!("({}, {}) and ({}, {}) present, ({}, {}) missing", a + 1, b + 1, b + 1, c + 1, a + 1, c + 1)
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure { code: 1, msg: format!("cannot write {}: {e}", path.display()) })
}

fn read_instance(path: &Path, edges: EdgeSemantics) -> CliResult<Instance> {
    Ok(parse_instance(&read_text(path)?, edges)?)
}

fn read_container(path: &Path) -> CliResult<(Vec<u8>, Oracle)> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let oracle = load(&bytes)?;
    Ok((bytes, oracle))
}

/// Converts a 1-based label to 0-based.
fn label(x: usize, n: usize) -> CliResult<usize> {
    if x == 0 || x > n {
        return Err(Failure::usage(format!("label {x} outside 1..={n}")));
    }
    Ok(x - 1)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn io_fail(e: io::Error) -> Failure {
    Failure { code: 1, msg: format!("i/o error: {e}") }
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let spec = GenSpec { kind: a.kind, n: a.n, cols: a.cols, p: a.p, seed: a.seed };
    if !(0.0..=1.0).contains(&a.p) {
        return Err(Failure::usage(format!("--p must lie in [0, 1], got {}", a.p)));
    }
    if a.kind == GenKind::Grid && a.cols == 0 && a.n > 0 {
        return Err(Failure::usage("grid needs --cols"));
    }
    let inst = generate(&spec)?;
    let text = write_instance(&inst, None);
    match a.out {
        Some(path) => write_file(&path, text.as_bytes()),
        None => io::stdout().write_all(text.as_bytes()).map_err(io_fail),
    }
}

fn print_space(r: &SpaceReport) {
    println!("n = {}", r.n);
    println!("total bits = {}", r.total_bits);
    println!("n^2/4 = {:.0} (ratio {:.4})", r.quarter(), r.quarter_ratio());
    println!("n(n-1)/2 = {:.0} (ratio {:.4})", r.triangular(), r.triangular_ratio());
    for (name, bits) in &r.sections {
        println!("  {name:<20} {bits:>12}");
    }
}

fn cmd_build(a: BuildArgs) -> CliResult<()> {
    let inst = read_instance(&a.input, a.edges)?;
    let mode = a.mode.unwrap_or(Mode::for_semantics(a.edges));
    let start = Instant::now();
    let oracle = Oracle::build(&inst, mode)?;
    log::info!("built {mode} oracle for n={} in {:?}", inst.n, start.elapsed());
    let bytes = save(&oracle);
    write_file(&a.out, &bytes)?;
    println!("mode = {mode}");
    println!("container bytes = {}", bytes.len());
    print_space(&oracle.space_report());
    Ok(())
}

fn cmd_query(a: QueryArgs) -> CliResult<()> {
    let (_, oracle) = read_container(&a.container)?;
    let n = oracle.n();
    let mut out = BufWriter::new(io::stdout().lock());
    if a.all {
        for x in 0..n {
            for y in 0..n {
                writeln!(out, "{}", yes_no(oracle.query(x, y)?)).map_err(io_fail)?;
            }
        }
    } else if a.stdin {
        for (i, line) in io::stdin().lock().lines().enumerate() {
            let line = line.map_err(io_fail)?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::usage(format!("stdin line {}: expected two labels", i + 1)))?;
            let [x, y] = nums[..] else {
                return Err(Failure::usage(format!("stdin line {}: expected two labels", i + 1)));
            };
            writeln!(out, "{}", yes_no(oracle.query(label(x, n)?, label(y, n)?)?)).map_err(io_fail)?;
        }
    } else {
        let (Some(x), Some(y)) = (a.a, a.b) else {
            return Err(Failure::usage("query needs two labels, --all or --stdin"));
        };
        writeln!(out, "{}", yes_no(oracle.query(label(x, n)?, label(y, n)?)?)).map_err(io_fail)?;
    }
    out.flush().map_err(io_fail)
}

fn stats_json(info: &ContainerInfo, bytes: usize, r: &SpaceReport) -> serde_json::Value {
    json!({
        "mode": info.mode.name(),
        "version": info.version,
        "n": r.n,
        "container_bytes": bytes,
        "total_bits": r.total_bits,
        "quarter": r.quarter(),
        "quarter_ratio": r.quarter_ratio(),
        "triangular": r.triangular(),
        "triangular_ratio": r.triangular_ratio(),
        "sections": r.sections.iter().map(|(k, v)| json!({"name": k, "bits": v})).collect::<Vec<_>>(),
        "container_sections": info.sections.iter().map(|s| json!({"tag": s.tag, "offset": s.offset, "len": s.len})).collect::<Vec<_>>(),
    })
}

fn cmd_stats(a: StatsArgs) -> CliResult<()> {
    let (bytes, oracle) = read_container(&a.container)?;
    let info = inspect(&bytes)?;
    let report = oracle.space_report();
    if a.json {
        println!("{}", stats_json(&info, bytes.len(), &report));
        return Ok(());
    }
    println!("mode = {}", info.mode);
    println!("container version = {}, bytes = {}", info.version, bytes.len());
    for s in &info.sections {
        println!("  section {} at {} ({} bytes)", s.tag, s.offset, s.len);
    }
    print_space(&report);
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let inst = read_instance(&a.input, a.edges)?;
    let n = inst.n;
    println!("n = {n}, edges = {}, semantics = {}", inst.edges.len(), a.edges.name());
    match a.edges {
        EdgeSemantics::Cover => {
            let g = Digraph::from_edges(n, inst.edges.iter().copied())?;
            topological_order(&g)?;
            let closure = transitive_closure(&g)?;
            let reduced = transitive_reduction(&closure).edge_set();
            println!("acyclic: yes");
            println!("comparable pairs = {}", closure.pair_count());
            println!("reduction edges = {}", reduced.len());
            println!("edges form the transitive reduction: {}", yes_no(reduced == g.edge_set()));
        }
        EdgeSemantics::Closure => {
            let m = BitMatrix::from_pairs(n, inst.edges.iter().copied())?;
            validate_poset(&m).map_err(Error::InvalidPoset)?;
            println!("strict partial order: yes");
        }
        EdgeSemantics::Relation => {
            let m = BitMatrix::from_pairs(n, inst.edges.iter().copied())?;
            check_transitive(&m)?;
            let reflexive = (0..n).filter(|&x| m.get(x, x)).count();
            println!("transitive: yes");
            println!("reflexive elements = {reflexive} of {n}");
        }
        EdgeSemantics::Digraph => {
            let g = Digraph::from_edges(n, inst.edges.iter().copied())?;
            let comps = strongly_connected_components(&g);
            println!("strongly connected components = {}", comps.count);
            println!("acyclic: {}", yes_no(comps.count == n && g.edges().iter().all(|(u, v)| u != v)));
        }
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let (_, oracle) = read_container(&a.container)?;
    let n = oracle.n();
    if n == 0 || a.pairs == 0 {
        return Err(Failure::usage("bench needs a non-empty container and --pairs > 0"));
    }
    let mut rng = SplitMix64::new(a.seed);
    let pairs: Vec<(usize, usize)> =
        (0..a.pairs).map(|_| (rng.below(n as u64) as usize, rng.below(n as u64) as usize)).collect();

    let start = Instant::now();
    let mut yes = 0usize;
    for &(x, y) in &pairs {
        yes += oracle.query(x, y)? as usize;
    }
    let ns = start.elapsed().as_nanos() as f64 / pairs.len() as f64;

    let (mut max_ops, mut total_ops) = (0u32, 0u64);
    for &(x, y) in &pairs {
        let mut ops = 0;
        oracle.query_counted(x, y, &mut ops)?;
        max_ops = max_ops.max(ops);
        total_ops += ops as u64;
    }
    let mean_ops = total_ops as f64 / pairs.len() as f64;
    if a.json {
        let v = json!({
            "mode": oracle.mode().name(),
            "n": n,
            "pairs": pairs.len(),
            "seed": a.seed,
            "ns_per_query": ns,
            "mean_ops": mean_ops,
            "max_ops": max_ops,
            "yes": yes,
        });
        println!("{v}");
    } else {
        println!("mode = {}, n = {n}, pairs = {}", oracle.mode(), pairs.len());
        println!("ns/query = {ns:.1}");
        println!("ops/query mean = {mean_ops:.3}, max = {max_ops}");
        println!("yes answers = {yes}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPOSET_LOG", "off")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
