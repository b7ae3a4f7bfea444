//! Command-line front-end: build, query, verify, stats, bench, and dyn
//! (dynamic op-script replay) over the succinct range-analytics index.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! mismatch.

use std::fmt::Write as _;
use std::io::Read as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wtgrid::container::StaticIndex;
use wtgrid::dynamic::DynamicIndex;
use wtgrid::geom::{self, Corner};
use wtgrid::grid::{Point, RectQuery};
use wtgrid::oracle::Oracle;
use wtgrid::stats::{self, Centering};
use wtgrid::work::Work;

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_MISMATCH: i32 = 3;

struct CliErr {
    code: i32,
    msg: String,
}

impl CliErr {
    fn usage(msg: impl Into<String>) -> Self {
        CliErr { code: EXIT_USAGE, msg: msg.into() }
    }

    fn data(msg: impl Into<String>) -> Self {
        CliErr { code: EXIT_DATA, msg: msg.into() }
    }
}

impl From<wtgrid::Error> for CliErr {
    fn from(e: wtgrid::Error) -> Self {
        CliErr::data(e.to_string())
    }
}

impl From<std::io::Error> for CliErr {
    fn from(e: std::io::Error) -> Self {
        CliErr::data(e.to_string())
    }
}

type CmdResult<T> = Result<T, CliErr>;

#[derive(Parser)]
#[command(name = "wtgrid", version, about = "Succinct 2D range-analytics engine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a static index from a points file (one `x TAB y TAB w` per line).
    Build(BuildArgs),
    /// Run one query against a saved index.
    Query(QueryArgs),
    /// Compare indexed answers against the brute-force oracle on seeded
    /// random instances (static and dynamic).
    Verify(VerifyArgs),
    /// Report per-section space next to the analytic bits-per-point formulas.
    Stats {
        /// Path to a saved index.
        index: String,
    },
    /// Measure per-family query latencies on a seeded workload (TSV output).
    Bench(BenchArgs),
    /// Replay a dynamic operation script (`ins x y w`, `del x y`,
    /// `upd x y w`, `qry <subquery ...>`); one result line per `qry`.
    Dyn(DynArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Input points file ('#' lines are comments).
    input: String,
    /// Output index path.
    #[arg(short, long)]
    output: String,
    /// Aligned-statistics sampling parameter (block size factor).
    #[arg(long, default_value_t = 1)]
    t: u32,
    /// Value-tree fan-out parameter.
    #[arg(long, default_value_t = 2)]
    ell: u64,
    /// Build the fixed-threshold majority section for this alpha in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Coordinate universe size (default: max coordinate + 1).
    #[arg(long = "U")]
    universe: Option<u64>,
    /// Weight bound (default: max weight + 1).
    #[arg(long = "W")]
    weight_bound: Option<u64>,
}

#[derive(Args)]
struct QueryArgs {
    /// Path to a saved index.
    index: String,
    #[command(subcommand)]
    family: Family,
}

/// Shared `--rect x0 y0 x1 y1` / `--rect full` argument.
#[derive(Args)]
struct RectArg {
    /// Query rectangle: four inclusive bounds `x0 y0 x1 y1`, or the single
    /// word `full` for [0,U-1] x [0,U-1].
    #[arg(long, num_args = 1..=4, required = true, allow_hyphen_values = false)]
    rect: Vec<String>,
}

impl RectArg {
    fn resolve(&self, universe: u64) -> CmdResult<RectQuery> {
        if self.rect.len() == 1 && self.rect[0] == "full" {
            return Ok(RectQuery::full(universe));
        }
        if self.rect.len() != 4 {
            return Err(CliErr::usage("--rect expects `x0 y0 x1 y1` or `full`"));
        }
        let mut v = [0u64; 4];
        for (slot, s) in v.iter_mut().zip(&self.rect) {
            *slot = s
                .parse()
                .map_err(|_| CliErr::usage(format!("--rect: `{s}` is not an unsigned integer")))?;
        }
        Ok(RectQuery::new(v[0], v[2], v[1], v[3]))
    }
}

#[derive(Subcommand)]
enum Family {
    /// Number of points in the rectangle.
    Count(RectArg),
    /// All points in the rectangle, one `x TAB y TAB w` line each.
    Report(RectArg),
    /// Maximal (dominant) points of the rectangle.
    Dominance(RectArg),
    /// Points visible from an origin toward one corner direction.
    Visibility {
        /// Origin `x y` in universe coordinates.
        #[arg(long, num_args = 2, required = true)]
        at: Vec<u64>,
        /// Quadrant: sw, ne, nw, or se.
        #[arg(long)]
        dir: String,
    },
    /// Sum of weights.
    Sum(RectArg),
    /// Average weight as an exact rational, or `undefined` when empty.
    Avg(RectArg),
    /// Population variance as an exact rational, or `undefined` when empty.
    Var(RectArg),
    /// Numerically stable variance (floating point).
    Varstable {
        #[command(flatten)]
        rect: RectArg,
        /// Centering strategy: band or global.
        #[arg(long, default_value = "band")]
        centering: String,
    },
    /// Minimum weight with one witness point, or `none`.
    Min(RectArg),
    /// Maximum weight with one witness point, or `none`.
    Max(RectArg),
    /// K smallest (default) or largest weights with witnesses.
    Topk {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        k: u64,
        /// Return the k largest instead of the k smallest.
        #[arg(long)]
        largest: bool,
    },
    /// K-th smallest weight (1-based, duplicates counted).
    Quantile {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        k: u64,
    },
    /// Weights occurring more than alpha * count times, with frequencies.
    Majority {
        #[command(flatten)]
        rect: RectArg,
        /// Threshold in (0, 1); omitted = use the fixed build-time alpha.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Smallest weight >= w present in the rectangle, or `none`.
    Succ {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        w: u64,
    },
    /// Largest weight <= w present in the rectangle, or `none`.
    Pred {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        w: u64,
    },
    /// Most frequent weight with its frequency, or `none`.
    Mode(RectArg),
    /// K most frequent weights with frequencies.
    Topfreq {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        k: u64,
    },
    /// Number of points with weight in [w0, w1].
    Countvr {
        #[command(flatten)]
        rect: RectArg,
        #[arg(long)]
        w0: u64,
        #[arg(long)]
        w1: u64,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Maximum points per random instance.
    #[arg(long, default_value_t = 128)]
    n: u64,
    /// Coordinate universe size.
    #[arg(long = "U", default_value_t = 1024)]
    universe: u64,
    /// Weight bound.
    #[arg(long = "W", default_value_t = 256)]
    weight_bound: u64,
    /// RNG seed; a fixed seed reproduces the report byte-for-byte.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random instances.
    #[arg(long, default_value_t = 20)]
    iterations: u64,
    /// Self-test hook: flip one bitmap bit in the first instance and expect
    /// the harness to report a mismatch.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Path to a saved index.
    index: String,
    /// Workload seed; the query sequence is a function of the seed only.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Queries per family.
    #[arg(long, default_value_t = 200)]
    queries: u64,
}

#[derive(Args)]
struct DynArgs {
    /// Script path, or `-` for standard input.
    script: String,
    /// Coordinate universe size.
    #[arg(long = "U", default_value_t = 1024)]
    universe: u64,
    /// Weight bound.
    #[arg(long = "W", default_value_t = 1024)]
    weight_bound: u64,
    /// Aligned-statistics sampling parameter.
    #[arg(long, default_value_t = 1)]
    t: u32,
    /// Value-tree fan-out parameter.
    #[arg(long, default_value_t = 2)]
    ell: u64,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Query(a) => cmd_query(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Stats { index } => cmd_stats(&index),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Dyn(a) => cmd_dyn(a),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

// ---------------------------------------------------------------- points IO

fn parse_points_file(path: &str) -> CmdResult<Vec<Point>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliErr::data(format!("cannot read `{path}`: {e}")))?;
    parse_points(&text)
}

fn parse_points(text: &str) -> CmdResult<Vec<Point>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CliErr::data(format!(
                "line {lineno}: expected `x<TAB>y<TAB>w`, got {} fields",
                fields.len()
            )));
        }
        let mut nums = [0u64; 3];
        for (slot, f) in nums.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| {
                CliErr::data(format!("line {lineno}: `{f}` is not an unsigned integer"))
            })?;
        }
        points.push(Point::new(nums[0], nums[1], nums[2]));
    }
    Ok(points)
}

fn load_index(path: &str) -> CmdResult<StaticIndex> {
    let bytes =
        std::fs::read(path).map_err(|e| CliErr::data(format!("cannot read `{path}`: {e}")))?;
    Ok(StaticIndex::load(&bytes)?)
}

// -------------------------------------------------------------------- build

fn cmd_build(a: BuildArgs) -> CmdResult<()> {
    if let Some(alpha) = a.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliErr::usage("--alpha must lie strictly between 0 and 1"));
        }
    }
    if a.ell < 2 {
        return Err(CliErr::usage("--ell must be at least 2"));
    }
    if a.t == 0 {
        return Err(CliErr::usage("--t must be at least 1"));
    }
    let points = parse_points_file(&a.input)?;
    let n = points.len();
    let idx = StaticIndex::build(points, a.t, a.ell, a.alpha, a.universe, a.weight_bound)?;
    std::fs::write(&a.output, idx.save())
        .map_err(|e| CliErr::data(format!("cannot write `{}`: {e}", a.output)))?;
    println!(
        "built index: n={n} U={} W={} t={} ell={}{}",
        idx.params.universe,
        idx.params.weight_bound,
        idx.params.t,
        idx.params.ell,
        idx.params.alpha.map(|al| format!(" alpha={al}")).unwrap_or_default()
    );
    Ok(())
}

// -------------------------------------------------------------------- query

fn print_points(points: &[Point]) {
    for p in points {
        println!("{}\t{}\t{}", p.x, p.y, p.w);
    }
}

fn print_pairs(pairs: &[(u64, u64)]) {
    for (v, c) in pairs {
        println!("{v}\t{c}");
    }
}

fn cmd_query(a: QueryArgs) -> CmdResult<()> {
    let idx = load_index(&a.index)?;
    let u = idx.params.universe;
    let mut work = Work::new();
    match a.family {
        Family::Count(r) => println!("{}", idx.grid.count(&r.resolve(u)?)),
        Family::Report(r) => print_points(&idx.grid.report(&r.resolve(u)?)),
        Family::Dominance(r) => {
            print_points(&geom::dominance(&idx.grid, &r.resolve(u)?, &mut work))
        }
        Family::Visibility { at, dir } => {
            let dir: Corner = dir.parse().map_err(CliErr::usage)?;
            print_points(&geom::visibility(&idx.grid, at[0], at[1], dir, &mut work));
        }
        Family::Sum(r) => println!("{}", stats::range_sum(&idx.grid, &idx.sums, &r.resolve(u)?)),
        Family::Avg(r) => match stats::range_avg(&idx.grid, &idx.sums, &r.resolve(u)?) {
            Some(v) => println!("{v}"),
            None => println!("undefined"),
        },
        Family::Var(r) => match stats::range_var(&idx.grid, &idx.sums, &r.resolve(u)?) {
            Some(v) => println!("{v}"),
            None => println!("undefined"),
        },
        Family::Varstable { rect, centering } => {
            let c = match centering.as_str() {
                "band" => Centering::PerBand,
                "global" => Centering::Global,
                other => {
                    return Err(CliErr::usage(format!(
                        "--centering must be `band` or `global`, got `{other}`"
                    )))
                }
            };
            match stats::range_var_stable(&idx.grid, &idx.sums, &rect.resolve(u)?, c) {
                Some(v) => println!("{v}"),
                None => println!("undefined"),
            }
        }
        Family::Min(r) => match stats::range_min(&idx.grid, &idx.minmax, &r.resolve(u)?) {
            Some((_, p)) => print_points(&[p]),
            None => println!("none"),
        },
        Family::Max(r) => match stats::range_max(&idx.grid, &idx.minmax, &r.resolve(u)?) {
            Some((_, p)) => print_points(&[p]),
            None => println!("none"),
        },
        Family::Topk { rect, k, largest } => {
            if k == 0 {
                return Err(CliErr::usage("--k must be at least 1"));
            }
            let q = rect.resolve(u)?;
            let out = if largest {
                stats::top_k_largest(&idx.grid, &idx.minmax, &q, k as usize, &mut work)
            } else {
                stats::top_k_smallest(&idx.grid, &idx.minmax, &q, k as usize, &mut work)
            };
            let points: Vec<Point> = out.into_iter().map(|(_, p)| p).collect();
            print_points(&points);
        }
        Family::Quantile { rect, k } => {
            if k == 0 {
                return Err(CliErr::usage("--k must be at least 1"));
            }
            let q = rect.resolve(u)?;
            let (value, _) = idx.values.quantile(&idx.grid, &q, k, &mut work)?;
            println!("{value}");
        }
        Family::Majority { rect, alpha } => {
            let q = rect.resolve(u)?;
            let out = match alpha {
                Some(al) => {
                    if !(al > 0.0 && al < 1.0) {
                        return Err(CliErr::usage("--alpha must lie strictly between 0 and 1"));
                    }
                    idx.values.majority_alpha(&idx.grid, &q, al, &mut work)
                }
                None => match &idx.majority {
                    Some(m) => m.majority(&idx.grid, &q, &mut work),
                    None => {
                        return Err(CliErr::data(
                            "index was built without --alpha; pass --alpha to this query",
                        ))
                    }
                },
            };
            print_pairs(&out);
        }
        Family::Succ { rect, w } => {
            match idx.values.successor(&idx.grid, &rect.resolve(u)?, w, &mut work) {
                Some(v) => println!("{v}"),
                None => println!("none"),
            }
        }
        Family::Pred { rect, w } => {
            match idx.values.predecessor(&idx.grid, &rect.resolve(u)?, w, &mut work) {
                Some(v) => println!("{v}"),
                None => println!("none"),
            }
        }
        Family::Mode(r) => match idx.values.mode(&idx.grid, &r.resolve(u)?, &mut work) {
            Some((v, c)) => println!("{v}\t{c}"),
            None => println!("none"),
        },
        Family::Topfreq { rect, k } => {
            if k == 0 {
                return Err(CliErr::usage("--k must be at least 1"));
            }
            let q = rect.resolve(u)?;
            print_pairs(&idx.values.top_k_frequent(&idx.grid, &q, k as usize, &mut work));
        }
        Family::Countvr { rect, w0, w1 } => {
            let q = rect.resolve(u)?;
            println!("{}", idx.values.count_value_range(&idx.grid, &q, w0, w1, &mut work));
        }
    }
    Ok(())
}

// ------------------------------------------------------------------- verify

/// One line describing a failing query, tight enough to replay by hand.
fn repro(seed: u64, iter: u64, family: &str, q: &RectQuery) -> String {
    format!(
        "MISMATCH seed={seed} iter={iter} family={family} rect={},{},{},{}",
        q.x0, q.y0, q.x1, q.y1
    )
}

fn gen_points(rng: &mut ChaCha8Rng, n_max: u64, u: u64, w: u64) -> Vec<Point> {
    let n = rng.gen_range(0..=n_max);
    (0..n)
        .map(|_| Point::new(rng.gen_range(0..u), rng.gen_range(0..u), rng.gen_range(0..w)))
        .collect()
}

fn gen_rects(rng: &mut ChaCha8Rng, u: u64, count: usize) -> Vec<RectQuery> {
    let mut rects = vec![RectQuery::full(u)];
    // A point rectangle, a vertical line, a horizontal line, an empty one.
    let (px, py) = (rng.gen_range(0..u), rng.gen_range(0..u));
    rects.push(RectQuery::new(px, px, py, py));
    rects.push(RectQuery::new(px, px, 0, u - 1));
    rects.push(RectQuery::new(0, u - 1, py, py));
    rects.push(RectQuery::new(u / 2 + 1, u / 2, 0, u - 1));
    while rects.len() < count {
        let (mut x0, mut x1) = (rng.gen_range(0..u), rng.gen_range(0..u));
        let (mut y0, mut y1) = (rng.gen_range(0..u), rng.gen_range(0..u));
        if x0 > x1 {
            std::mem::swap(&mut x0, &mut x1);
        }
        if y0 > y1 {
            std::mem::swap(&mut y0, &mut y1);
        }
        rects.push(RectQuery::new(x0, x1, y0, y1));
    }
    rects
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Compares every static query family on one instance. Returns the failing
/// family name and rectangle on the first mismatch.
fn check_static(
    idx: &StaticIndex,
    oracle: &Oracle,
    rects: &[RectQuery],
    rng: &mut ChaCha8Rng,
) -> Result<u64, (&'static str, RectQuery)> {
    let mut work = Work::new();
    let mut queries = 0u64;
    let u = idx.params.universe;
    for q in rects {
        macro_rules! check {
            ($name:literal, $got:expr, $want:expr) => {{
                queries += 1;
                if $got != $want {
                    return Err(($name, *q));
                }
            }};
        }
        let cnt = oracle.count(q);
        check!("count", idx.grid.count(q), cnt);
        check!("report", idx.grid.report(q), oracle.report(q));
        check!("dominance", geom::dominance(&idx.grid, q, &mut work), oracle.dominance(q));
        check!("sum", stats::range_sum(&idx.grid, &idx.sums, q), oracle.sum(q));
        check!("avg", stats::range_avg(&idx.grid, &idx.sums, q).map(|r| (r.num(), r.den())), {
            let c = cnt as i128;
            (c != 0).then(|| {
                let r = wtgrid::stats::Rational::new(oracle.sum(q) as i128, c);
                (r.num(), r.den())
            })
        });
        check!(
            "var",
            stats::range_var(&idx.grid, &idx.sums, q).is_some(),
            cnt != 0
        );
        if cnt != 0 {
            let s = oracle.sum(q) as f64;
            let s2 = oracle.sum_sq(q) as f64;
            let want = (s2 - s * s / cnt as f64) / cnt as f64;
            let got = stats::range_var(&idx.grid, &idx.sums, q).unwrap().to_f64();
            queries += 1;
            if !rel_close(got, want, 1e-9) {
                return Err(("var", *q));
            }
            for c in [Centering::PerBand, Centering::Global] {
                let got = stats::range_var_stable(&idx.grid, &idx.sums, q, c).unwrap();
                queries += 1;
                if !rel_close(got, want, 1e-6) {
                    return Err(("varstable", *q));
                }
            }
        }
        check!(
            "min",
            stats::range_min(&idx.grid, &idx.minmax, q),
            oracle.min(q)
        );
        check!(
            "max",
            stats::range_max(&idx.grid, &idx.minmax, q),
            oracle.max(q)
        );
        let k = rng.gen_range(1..=8);
        check!(
            "topk",
            stats::top_k_smallest(&idx.grid, &idx.minmax, q, k, &mut work)
                .iter()
                .map(|(w, _)| *w)
                .collect::<Vec<_>>(),
            oracle.top_k_smallest(q, k)
        );
        if cnt > 0 {
            let k = rng.gen_range(1..=cnt);
            check!(
                "quantile",
                idx.values.quantile(&idx.grid, q, k, &mut work).ok().map(|(v, _)| v),
                oracle.quantile(q, k)
            );
        }
        let w = idx.params.weight_bound;
        let (mut w0, mut w1) = (rng.gen_range(0..w), rng.gen_range(0..w));
        if w0 > w1 {
            std::mem::swap(&mut w0, &mut w1);
        }
        check!(
            "countvr",
            idx.values.count_value_range(&idx.grid, q, w0, w1, &mut work),
            oracle.count_value_range(q, w0, w1)
        );
        let alpha = [0.5, 0.25, 0.125][rng.gen_range(0..3)];
        check!(
            "majority",
            idx.values.majority_alpha(&idx.grid, q, alpha, &mut work),
            oracle.majority(q, alpha)
        );
        if let Some(m) = &idx.majority {
            check!(
                "majority-fixed",
                m.majority(&idx.grid, q, &mut work),
                oracle.majority(q, m.alpha())
            );
        }
        let probe = rng.gen_range(0..w);
        check!(
            "succ",
            idx.values.successor(&idx.grid, q, probe, &mut work),
            oracle.successor(q, probe).map(|(v, _)| v)
        );
        check!(
            "pred",
            idx.values.predecessor(&idx.grid, q, probe, &mut work),
            oracle.predecessor(q, probe).map(|(v, _)| v)
        );
        check!("mode", idx.values.mode(&idx.grid, q, &mut work), oracle.mode(q));
        let k = rng.gen_range(1..=4);
        check!(
            "topfreq",
            idx.values.top_k_frequent(&idx.grid, q, k, &mut work),
            oracle.top_k_frequent(q, k)
        );
    }
    // Visibility uses an origin, not a rectangle; probe a few origins.
    for _ in 0..4 {
        let (qx, qy) = (rng.gen_range(0..u), rng.gen_range(0..u));
        for dir in Corner::ALL {
            queries += 1;
            let got = geom::visibility(&idx.grid, qx, qy, dir, &mut work);
            if got != oracle.visibility(qx, qy, dir) {
                return Err(("visibility", RectQuery::new(qx, qx, qy, qy)));
            }
        }
    }
    Ok(queries)
}

/// Replays a random dynamic script against a vector mirror, comparing the
/// main families after every few operations.
fn check_dynamic(
    rng: &mut ChaCha8Rng,
    u: u64,
    w: u64,
    ops: u64,
) -> Result<u64, (&'static str, RectQuery)> {
    let mut dynidx = DynamicIndex::new(u, w, 1, 2);
    let mut mirror: Vec<Point> = Vec::new();
    let mut queries = 0u64;
    for step in 0..ops {
        let roll = rng.gen_range(0..10);
        if roll < 7 || mirror.is_empty() {
            let p = Point::new(rng.gen_range(0..u), rng.gen_range(0..u), rng.gen_range(0..w));
            dynidx.insert(p).expect("coords validated");
            mirror.push(p);
        } else {
            let victim = mirror[rng.gen_range(0..mirror.len())];
            dynidx.delete(victim.x, victim.y).expect("point exists");
            let at = mirror.iter().rposition(|p| p.x == victim.x && p.y == victim.y).unwrap();
            mirror.remove(at);
        }
        if step % 5 != 0 {
            continue;
        }
        let oracle = Oracle::new(mirror.clone());
        for q in gen_rects(rng, u, 3) {
            queries += 5;
            if dynidx.count(&q) != oracle.count(&q) {
                return Err(("dyn-count", q));
            }
            if dynidx.report(&q) != oracle.report(&q) {
                return Err(("dyn-report", q));
            }
            if dynidx.sum(&q) != oracle.sum(&q) {
                return Err(("dyn-sum", q));
            }
            if dynidx.min(&q) != oracle.min(&q) {
                return Err(("dyn-min", q));
            }
            let cnt = oracle.count(&q);
            if cnt > 0 {
                let k = rng.gen_range(1..=cnt);
                if dynidx.quantile(&q, k).ok().map(|(v, _)| v) != oracle.quantile(&q, k) {
                    return Err(("dyn-quantile", q));
                }
            }
            let probe = rng.gen_range(0..w);
            if dynidx.successor(&q, probe) != oracle.successor(&q, probe).map(|(v, _)| v) {
                return Err(("dyn-succ", q));
            }
        }
    }
    Ok(queries)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut total_queries = 0u64;
    for iter in 0..a.iterations {
        let points = gen_points(&mut rng, a.n, a.universe, a.weight_bound);
        let t = [1u32, 2, 4, 8][rng.gen_range(0..4)];
        let ell = [2u64, 4, 16][rng.gen_range(0..3)];
        let alpha = [0.5, 0.25, 0.125][rng.gen_range(0..3)];
        let mut idx = StaticIndex::build(
            points.clone(),
            t,
            ell,
            Some(alpha),
            Some(a.universe),
            Some(a.weight_bound),
        )?;
        if a.inject_fault && iter == 0 && !idx.debug_flip_bit() {
            return Err(CliErr::data(
                "cannot inject a fault into an empty instance; raise --n or change --seed",
            ));
        }
        let oracle = Oracle::new(points);
        let rects = gen_rects(&mut rng, a.universe, 10);
        match check_static(&idx, &oracle, &rects, &mut rng) {
            Ok(q) => total_queries += q,
            Err((family, q)) => {
                println!("{}", repro(a.seed, iter, family, &q));
                return Err(CliErr {
                    code: EXIT_MISMATCH,
                    msg: "verification mismatch (static)".into(),
                });
            }
        }
        let du = a.universe.min(64);
        let dw = a.weight_bound.min(32);
        match check_dynamic(&mut rng, du, dw, a.n.min(80)) {
            Ok(q) => total_queries += q,
            Err((family, q)) => {
                println!("{}", repro(a.seed, iter, family, &q));
                return Err(CliErr {
                    code: EXIT_MISMATCH,
                    msg: "verification mismatch (dynamic)".into(),
                });
            }
        }
        println!("iter {iter}: n={} t={t} ell={ell} alpha={alpha} ok", idx.params.n);
    }
    println!(
        "verify: {} iterations, {} queries, all families match the oracle",
        a.iterations, total_queries
    );
    Ok(())
}

// -------------------------------------------------------------------- stats

fn cmd_stats(index: &str) -> CmdResult<()> {
    let idx = load_index(index)?;
    let n = idx.params.n;
    let per = |bits: u64| if n == 0 { 0.0 } else { bits as f64 / n as f64 };
    let logn = (n.max(2) as f64).log2();
    let t = idx.params.t as f64;
    let m = idx.values.distinct_values().max(2) as f64;
    let levels = (m.log2() / (idx.params.ell.max(2) as f64).log2()).ceil();
    let sp = idx.grid.space_report();
    println!(
        "n={} U={} W={} t={} ell={} distinct-values={}",
        n,
        idx.params.universe,
        idx.params.weight_bound,
        idx.params.t,
        idx.params.ell,
        idx.values.distinct_values()
    );
    println!("section\tbits\tbits/point\tanalytic bits/point");
    println!(
        "grid.permutation\t{}\t{:.2}\t{:.2}  [log2 n]",
        sp.wavelet_bits,
        per(sp.wavelet_bits),
        logn
    );
    println!(
        "grid.coord-maps\t{}\t{:.2}\t{:.2}  [2 log2 C(U+n,n) / n]",
        sp.xmap_bits + sp.ymap_bits,
        per(sp.xmap_bits + sp.ymap_bits),
        if n == 0 { 0.0 } else { sp.analytic_map_bits / n as f64 }
    );
    println!(
        "grid.weights\t{}\t{:.2}\t{:.2}  [log2 W]",
        sp.weight_bits,
        per(sp.weight_bits),
        (idx.params.weight_bound.max(2) as f64).log2()
    );
    println!(
        "stats.sums\t{}\t{:.2}\t{:.2}  [(2/t) log2 n + moment words]",
        idx.sums.size_bits(),
        per(idx.sums.size_bits()),
        (2.0 / t) * logn
    );
    println!(
        "stats.minmax\t{}\t{:.2}\t{:.2}  [log2 n (1 + 1/t)]",
        idx.minmax.size_bits(),
        per(idx.minmax.size_bits()),
        logn * (1.0 + 1.0 / t)
    );
    println!(
        "valuewt\t{}\t{:.2}\t{:.2}  [log2 n ceil(log2 m / log2 ell)]",
        idx.values.size_bits(),
        per(idx.values.size_bits()),
        logn * levels
    );
    match &idx.majority {
        Some(mj) => println!(
            "majority(alpha={})\t{}\t{:.2}\t{:.2}  [(1/alpha) log2 m log2 n / block]",
            mj.alpha(),
            mj.size_bits(),
            per(mj.size_bits()),
            (1.0 / mj.alpha()) * m.log2() * logn / mj.block() as f64
        ),
        None => println!("majority\tabsent\t-\t-"),
    }
    Ok(())
}

// -------------------------------------------------------------------- bench

fn median_p99(mut ns: Vec<u64>) -> (u64, u64) {
    ns.sort_unstable();
    let median = ns[ns.len() / 2];
    let p99 = ns[(ns.len() * 99 / 100).min(ns.len() - 1)];
    (median, p99)
}

fn cmd_bench(a: BenchArgs) -> CmdResult<()> {
    if a.queries == 0 {
        return Err(CliErr::usage("--queries must be at least 1"));
    }
    let idx = load_index(&a.index)?;
    let u = idx.params.universe;
    let w = idx.params.weight_bound;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let rects = gen_rects(&mut rng, u.max(2), a.queries as usize);
    let mut work = Work::new();
    let mut sink = 0u64;
    println!("family\tmedian_ns\tp99_ns");
    let families: Vec<(&str, Box<dyn FnMut(&RectQuery, &mut u64)>)> = vec![
        ("count", Box::new(|q, s| *s ^= idx.grid.count(q))),
        ("report", Box::new(|q, s| *s ^= idx.grid.report(q).len() as u64)),
        ("sum", Box::new(|q, s| *s ^= stats::range_sum(&idx.grid, &idx.sums, q) as u64)),
        (
            "min",
            Box::new(|q, s| *s ^= stats::range_min(&idx.grid, &idx.minmax, q).map_or(0, |x| x.0)),
        ),
    ];
    for (name, mut f) in families {
        let mut ns = Vec::with_capacity(rects.len());
        for q in &rects {
            let start = Instant::now();
            f(q, &mut sink);
            ns.push(start.elapsed().as_nanos() as u64);
        }
        let (median, p99) = median_p99(ns);
        println!("{name}\t{median}\t{p99}");
    }
    // Quantile, majority, succ carry extra parameters.
    let mut ns_q = Vec::new();
    let mut ns_m = Vec::new();
    let mut ns_s = Vec::new();
    for q in &rects {
        let cnt = idx.grid.count(q);
        if cnt > 0 {
            let k = rng.gen_range(1..=cnt);
            let start = Instant::now();
            sink ^= idx.values.quantile(&idx.grid, q, k, &mut work).map_or(0, |(v, _)| v);
            ns_q.push(start.elapsed().as_nanos() as u64);
        }
        let start = Instant::now();
        sink ^= idx.values.majority_alpha(&idx.grid, q, 0.25, &mut work).len() as u64;
        ns_m.push(start.elapsed().as_nanos() as u64);
        let probe = rng.gen_range(0..w.max(1));
        let start = Instant::now();
        sink ^= idx.values.successor(&idx.grid, q, probe, &mut work).unwrap_or(0);
        ns_s.push(start.elapsed().as_nanos() as u64);
    }
    for (name, ns) in [("quantile", ns_q), ("majority", ns_m), ("succ", ns_s)] {
        if ns.is_empty() {
            println!("{name}\t-\t-");
        } else {
            let (median, p99) = median_p99(ns);
            println!("{name}\t{median}\t{p99}");
        }
    }
    // Keep the sink observable so the measured calls cannot be optimized out.
    eprintln!("# checksum {sink:#x}");
    Ok(())
}

// ---------------------------------------------------------------------- dyn

struct ScriptCtx<'a> {
    line: usize,
    fields: &'a [&'a str],
    universe: u64,
}

impl<'a> ScriptCtx<'a> {
    fn err(&self, msg: impl std::fmt::Display) -> CliErr {
        CliErr::data(format!("line {}: {msg}", self.line))
    }

    fn num(&self, i: usize) -> CmdResult<u64> {
        let f = self
            .fields
            .get(i)
            .ok_or_else(|| self.err(format!("missing argument {}", i + 1)))?;
        f.parse().map_err(|_| self.err(format!("`{f}` is not an unsigned integer")))
    }

    /// Reads `x0 y0 x1 y1` (or the single word `full`) starting at field `i`.
    fn rect(&self, i: usize) -> CmdResult<RectQuery> {
        if self.fields.get(i) == Some(&"full") {
            return Ok(RectQuery::full(self.universe));
        }
        Ok(RectQuery::new(self.num(i)?, self.num(i + 2)?, self.num(i + 1)?, self.num(i + 3)?))
    }
}

fn fmt_points_line(points: &[Point]) -> String {
    let mut out = String::new();
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{},{},{}", p.x, p.y, p.w);
    }
    out
}

fn cmd_dyn(a: DynArgs) -> CmdResult<()> {
    let text = if a.script == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(&a.script)
            .map_err(|e| CliErr::data(format!("cannot read `{}`: {e}", a.script)))?
    };
    let mut dynidx = DynamicIndex::new(a.universe, a.weight_bound, a.t, a.ell);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let ctx = ScriptCtx { line: lineno + 1, fields: &fields, universe: a.universe };
        match fields[0] {
            "ins" => {
                let p = Point::new(ctx.num(1)?, ctx.num(2)?, ctx.num(3)?);
                dynidx.insert(p).map_err(|e| ctx.err(e))?;
            }
            "del" => {
                dynidx.delete(ctx.num(1)?, ctx.num(2)?).map_err(|e| ctx.err(e))?;
            }
            "upd" => {
                dynidx
                    .update(ctx.num(1)?, ctx.num(2)?, ctx.num(3)?)
                    .map_err(|e| ctx.err(e))?;
            }
            "qry" => {
                let sub = *fields.get(1).ok_or_else(|| ctx.err("qry needs a subquery"))?;
                run_dyn_query(&dynidx, &ctx, sub)?;
            }
            other => return Err(ctx.err(format!("unknown op `{other}`"))),
        }
    }
    Ok(())
}

fn run_dyn_query(idx: &DynamicIndex, ctx: &ScriptCtx, sub: &str) -> CmdResult<()> {
    match sub {
        "count" => println!("{}", idx.count(&ctx.rect(2)?)),
        "report" => println!("{}", fmt_points_line(&idx.report(&ctx.rect(2)?))),
        "dominance" => println!("{}", fmt_points_line(&idx.dominance(&ctx.rect(2)?))),
        "visibility" => {
            let (qx, qy) = (ctx.num(2)?, ctx.num(3)?);
            let dir: Corner = ctx
                .fields
                .get(4)
                .ok_or_else(|| ctx.err("visibility needs `qx qy dir`"))?
                .parse()
                .map_err(|e| ctx.err(e))?;
            println!("{}", fmt_points_line(&idx.visibility(qx, qy, dir)));
        }
        "sum" => println!("{}", idx.sum(&ctx.rect(2)?)),
        "avg" => match idx.avg(&ctx.rect(2)?) {
            Some(v) => println!("{v}"),
            None => println!("undefined"),
        },
        "var" => match idx.var(&ctx.rect(2)?) {
            Some(v) => println!("{v}"),
            None => println!("undefined"),
        },
        "min" => match idx.min(&ctx.rect(2)?) {
            Some((_, p)) => println!("{}", fmt_points_line(&[p])),
            None => println!("none"),
        },
        "max" => match idx.max(&ctx.rect(2)?) {
            Some((_, p)) => println!("{}", fmt_points_line(&[p])),
            None => println!("none"),
        },
        "quantile" => {
            let k = ctx.num(2)?;
            match idx.quantile(&ctx.rect(3)?, k) {
                Ok((v, _)) => println!("{v}"),
                Err(_) => println!("undefined"),
            }
        }
        "majority" => {
            let alpha: f64 = ctx
                .fields
                .get(2)
                .ok_or_else(|| ctx.err("majority needs `alpha x0 y0 x1 y1`"))?
                .parse()
                .map_err(|_| ctx.err("alpha must be a number in (0, 1)"))?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(ctx.err("alpha must lie strictly between 0 and 1"));
            }
            let out = idx.majority_alpha(&ctx.rect(3)?, alpha);
            let mut s = String::new();
            for (i, (v, c)) in out.iter().enumerate() {
                if i > 0 {
                    s.push(';');
                }
                let _ = write!(s, "{v}:{c}");
            }
            println!("{s}");
        }
        "succ" => match idx.successor(&ctx.rect(3)?, ctx.num(2)?) {
            Some(v) => println!("{v}"),
            None => println!("none"),
        },
        "pred" => match idx.predecessor(&ctx.rect(3)?, ctx.num(2)?) {
            Some(v) => println!("{v}"),
            None => println!("none"),
        },
        other => return Err(ctx.err(format!("unknown subquery `{other}`"))),
    }
    Ok(())
}
