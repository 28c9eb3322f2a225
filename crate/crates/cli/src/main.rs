mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use catchup::customization::Params;
use catchup::graph::{read_queries, TdGraph};
use catchup::hierarchy::{build_elimination_tree, compute_order, NodeOrder};
use catchup::contraction::contract;
use catchup::index::CatchupIndex;
use catchup::oracle::{dijkstra_rank_queries, generate, uniform_queries, GeneratorParams, QuerySpec, TdDijkstra, Topology};
use catchup::query::{batch, Mode, ProfileWant, Server};
use catchup::ttf::{Profile, DEFAULT_PERIOD};

use report::Report;

#[derive(Parser)]
#[command(name = "catchup", version, about = "Exact time-dependent routing on customizable contraction hierarchies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic time-dependent graph.
    Generate(GenerateArgs),
    /// Compute a nested dissection order and contract.
    Preprocess(PreprocessArgs),
    /// Customize and write an index.
    Customize(CustomizeArgs),
    /// Run earliest arrival queries.
    Query(QueryArgs),
    /// Run profile queries.
    ProfileQuery(ProfileArgs),
    /// Compare all query variants and time-dependent Dijkstra.
    Bench(BenchArgs),
    /// Build an instance end to end and check queries against Dijkstra.
    Verify(VerifyArgs),
    /// Graph and index statistics.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Grid,
    Planar,
    Path,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Grid => Topology::Grid,
            TopologyArg::Planar => Topology::Planar,
            TopologyArg::Path => Topology::Path,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Basic,
    Corridor,
    Lazy,
    Astar,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Basic => Mode::Basic,
            ModeArg::Corridor => Mode::Corridor,
            ModeArg::Lazy => Mode::Lazy,
            ModeArg::Astar => Mode::LazyAstar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WantArg {
    Bounds,
    Ttf,
    Paths,
}

impl From<WantArg> for ProfileWant {
    fn from(w: WantArg) -> Self {
        match w {
            WantArg::Bounds => ProfileWant::Bounds,
            WantArg::Ttf => ProfileWant::ExactTtf,
            WantArg::Paths => ProfileWant::Paths,
        }
    }
}

#[derive(Args)]
struct ReportArg {
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct Customization {
    /// Breakpoint limit before functions are approximated, or `inf`.
    #[arg(long, default_value = "1000", value_parser = parse_beta)]
    beta: usize,
    /// Approximation error in seconds.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl Customization {
    fn params(&self) -> Result<Params> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            bail!("--epsilon must be positive, got {}", self.epsilon);
        }
        Ok(Params { beta: self.beta, epsilon: self.epsilon, threads: threads(self.threads) })
    }
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "grid")]
    topology: TopologyArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Fraction of arcs with time-dependent travel times.
    #[arg(long, default_value_t = 0.3)]
    td_fraction: f64,
    #[arg(long, default_value_t = 10)]
    min_breakpoints: usize,
    #[arg(long, default_value_t = 40)]
    max_breakpoints: usize,
    /// Peak delay relative to the free flow travel time.
    #[arg(long, default_value_t = 0.4)]
    amplitude: f64,
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    period: f64,
}

impl GeneratorArgs {
    fn params(&self, seed: u64) -> Result<GeneratorParams> {
        if !(0.0..=1.0).contains(&self.td_fraction) {
            bail!("--td-fraction must be in [0, 1]");
        }
        if self.min_breakpoints < 2 || self.min_breakpoints > self.max_breakpoints {
            bail!("need 2 <= --min-breakpoints <= --max-breakpoints");
        }
        if !(self.period > 0.0) || self.n == 0 {
            bail!("--period and --n must be positive");
        }
        Ok(GeneratorParams {
            topology: self.topology.into(),
            n: self.n,
            td_fraction: self.td_fraction,
            breakpoints: (self.min_breakpoints, self.max_breakpoints),
            amplitude: self.amplitude,
            seed,
            period: self.period,
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    seed: u64,
    /// Output graph file.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Output order file.
    #[arg(long)]
    order: PathBuf,
    /// Tie breaking in the nested dissection.
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct CustomizeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Order file; computed from `--seed` if absent.
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output index file.
    #[arg(long)]
    index: PathBuf,
    #[command(flatten)]
    custom: Customization,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct IndexInput {
    #[arg(long)]
    index: PathBuf,
    /// Graph file; defaults to the path recorded in the index.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// A query file (`source target [departure]` per line) or a number of uniform random queries.
    #[arg(long, default_value = "100")]
    queries: String,
    /// Seed for random queries and missing departures.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    input: IndexInput,
    #[arg(long, value_enum, default_value = "astar")]
    mode: ModeArg,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: IndexInput,
    #[arg(long, value_enum, default_value = "paths")]
    want: WantArg,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: IndexInput,
    /// Also run Dijkstra rank queries with this many sources and report per rank.
    #[arg(long)]
    rank_sources: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    /// Profile queries checked against sampled Dijkstra runs.
    #[arg(long, default_value_t = 10)]
    profiles: usize,
    #[command(flatten)]
    custom: Customization,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArg,
}

fn parse_beta(s: &str) -> Result<usize, String> {
    match s {
        "inf" | "infinity" | "none" => Ok(usize::MAX),
        _ => match s.parse::<usize>() {
            Ok(b) if b >= 2 => Ok(b),
            _ => Err(format!("expected an integer >= 2 or `inf`, got `{s}`")),
        },
    }
}

fn threads(t: Option<usize>) -> usize {
    t.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CATCHUP_LOG", "info")).format_timestamp(None).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate_cmd(a),
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Customize(a) => customize_cmd(a),
        Command::Query(a) => query_cmd(a),
        Command::ProfileQuery(a) => profile_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Stats(a) => stats_cmd(a),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn load_graph(path: &Path) -> Result<TdGraph> {
    TdGraph::load(path).with_context(|| format!("reading graph {}", path.display()))
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let params = a.generator.params(a.seed)?;
    let start = Instant::now();
    let g = generate(&params);
    let time = start.elapsed();
    g.save(&a.graph).with_context(|| format!("writing {}", a.graph.display()))?;
    info!("generated {} nodes and {} arcs in {:.3}s", g.num_nodes(), g.num_arcs(), secs(time));
    let mut r = Report::new(a.report.report.as_deref(), &["nodes", "arcs", "td_arcs_pct", "avg_points_td", "rel_delay_pct", "rel_delay_td_pct", "time_s"])?;
    let s = graph_stats(&g);
    r.row(&[&g.num_nodes(), &g.num_arcs(), &s.td_pct, &s.avg_points, &s.delay.0, &s.delay.1, &secs(time)])?;
    r.finish()
}

fn preprocess_cmd(a: PreprocessArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let start = Instant::now();
    let order = compute_order(&g, a.seed);
    let order_time = start.elapsed();
    order.save(&a.order).with_context(|| format!("writing {}", a.order.display()))?;
    let start = Instant::now();
    let aug = contract(&g, &order);
    let contraction_time = start.elapsed();
    let etree = build_elimination_tree(&aug);
    info!("order in {:.3}s, contraction in {:.3}s: {} slots, elimination tree height {}", secs(order_time), secs(contraction_time), aug.num_slots(), etree.height());
    let mut r = Report::new(a.report.report.as_deref(), &["nodes", "slots", "etree_height", "order_s", "contraction_s"])?;
    r.row(&[&g.num_nodes(), &aug.num_slots(), &etree.height(), &secs(order_time), &secs(contraction_time)])?;
    r.finish()
}

fn customize_cmd(a: CustomizeArgs) -> Result<()> {
    let params = a.custom.params()?;
    let g = load_graph(&a.graph)?;
    let start = Instant::now();
    let (order, seed) = match (&a.order, a.seed) {
        (Some(p), seed) => (NodeOrder::load(p, g.num_nodes()).with_context(|| format!("reading order {}", p.display()))?, seed.unwrap_or(0)),
        (None, Some(seed)) => (compute_order(&g, seed), seed),
        (None, None) => bail!("either --order or --seed is required"),
    };
    let order_time = if a.order.is_some() { Duration::ZERO } else { start.elapsed() };
    let start = Instant::now();
    let aug = contract(&g, &order);
    let etree = build_elimination_tree(&aug);
    let contraction_time = start.elapsed();
    let (mut index, rep) = CatchupIndex::customize(g, aug, etree, &params);
    index.seed = seed;
    index.graph_path = Some(std::fs::canonicalize(&a.graph).unwrap_or(a.graph.clone()));
    index.save(&a.index).with_context(|| format!("writing {}", a.index.display()))?;
    let bytes = std::fs::metadata(&a.index)?.len();
    let x = index.expansion_stats();
    let c = rep.counters;
    info!(
        "customized with {} threads: scalar {:.3}s, time-dependent {:.3}s, {} expansions for {} arcs ({:.3} per arc)",
        params.threads,
        secs(rep.scalar_time),
        secs(rep.td_time),
        x.entries,
        x.arcs,
        x.mean
    );
    let mut r = Report::new(
        a.report.report.as_deref(),
        &[
            "beta", "epsilon", "threads", "order_s", "contraction_s", "scalar_s", "td_s", "index_bytes", "arcs", "expansions", "avg_expansions",
            "max_expansions", "single_pct", "triangles", "merges", "approximations", "reconstructions", "peak_live_fns",
        ],
    )?;
    r.row(&[
        &beta_str(params.beta),
        &params.epsilon,
        &params.threads,
        &secs(order_time),
        &secs(contraction_time),
        &secs(rep.scalar_time),
        &secs(rep.td_time),
        &bytes,
        &x.arcs,
        &x.entries,
        &x.mean,
        &x.max,
        &x.single_pct,
        &c.triangles,
        &c.merges,
        &c.approximations,
        &c.reconstruction_calls,
        &c.peak_live_fns,
    ])?;
    r.finish()
}

fn beta_str(beta: usize) -> String {
    if beta == usize::MAX {
        "inf".into()
    } else {
        beta.to_string()
    }
}

fn load_index(input: &IndexInput) -> Result<CatchupIndex> {
    CatchupIndex::load(&input.index, input.graph.as_deref()).with_context(|| format!("reading index {}", input.index.display()))
}

fn load_queries(input: &IndexInput, g: &TdGraph) -> Result<Vec<QuerySpec>> {
    if let Ok(count) = input.queries.parse::<usize>() {
        let seed = input.seed.context("--seed is required for random queries")?;
        return Ok(uniform_queries(g, seed, count));
    }
    let raw = read_queries(&input.queries).with_context(|| format!("reading queries {}", input.queries))?;
    let mut random = input.seed.map(|s| uniform_queries(g, s, raw.len()).into_iter());
    let mut out = Vec::with_capacity(raw.len());
    for (i, (source, target, dep)) in raw.into_iter().enumerate() {
        if source as usize >= g.num_nodes() || target as usize >= g.num_nodes() {
            bail!("query {}: node out of range", i + 1);
        }
        let departure = match dep {
            Some(d) => d,
            None => random.as_mut().context("--seed is required for queries without departure")?.next().unwrap().departure,
        };
        out.push(QuerySpec { source, target, departure });
    }
    Ok(out)
}

fn query_cmd(a: QueryArgs) -> Result<()> {
    let index = load_index(&a.input)?;
    let queries = load_queries(&a.input, index.graph())?;
    let mode: Mode = a.mode.into();
    let start = Instant::now();
    let results = batch(&index, &queries, threads(a.input.threads), |server, q| {
        let t = Instant::now();
        let r = server.query(q.source, q.target, q.departure, mode).expect("nodes were checked");
        (r, t.elapsed())
    });
    let total = start.elapsed();
    info!("{} {mode} queries in {:.3}s", queries.len(), secs(total));
    let mut r = Report::new(a.input.report.report.as_deref(), &["source", "target", "departure", "earliest_arrival", "travel_time", "queue_pops", "ttf_evals", "time_us"])?;
    for (q, (res, time)) in queries.iter().zip(results) {
        r.row(&[&q.source, &q.target, &q.departure, &res.earliest_arrival, &res.travel_time(), &res.stats.queue_pops, &res.stats.ttf_evals, &(time.as_secs_f64() * 1e6)])?;
    }
    r.finish()
}

fn profile_cmd(a: ProfileArgs) -> Result<()> {
    let index = load_index(&a.input)?;
    let queries = load_queries(&a.input, index.graph())?;
    let want: ProfileWant = a.want.into();
    let results = batch(&index, &queries, threads(a.input.threads), |server, q| {
        let t = Instant::now();
        let out = server.profile_query(q.source, q.target, want).expect("nodes were checked");
        (out, t.elapsed())
    });
    let mut r = Report::new(
        a.input.report.report.as_deref(),
        &["source", "target", "profile_points", "switches", "distinct_paths", "corridor_arcs", "phase1_ms", "phase2_ms", "phase3_ms", "phase4_ms", "total_ms"],
    )?;
    for (q, (out, time)) in queries.iter().zip(results) {
        let points = match &out.profile {
            Some(p) => p.num_points(),
            None => out.bounds.as_ref().map_or(0, |b| b.upper.len()),
        };
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let p = out.phase_times;
        r.row(&[&q.source, &q.target, &points, &out.switches, &out.distinct_paths, &out.corridor_arcs, &ms(p[0]), &ms(p[1]), &ms(p[2]), &ms(p[3]), &ms(time)])?;
    }
    r.finish()
}

#[derive(Default, Clone, Copy)]
struct Totals {
    queries: u64,
    pops: u64,
    evals: u64,
    time: Duration,
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let index = load_index(&a.input)?;
    let g = index.graph();
    let queries = load_queries(&a.input, g)?;
    let mut r = Report::new(a.input.report.report.as_deref(), &["algorithm", "rank", "queries", "avg_queue_pops", "avg_ttf_evals", "avg_time_ms", "total_s"])?;
    let emit = |r: &mut Report, name: &str, rank: &str, t: Totals| -> Result<()> {
        let n = t.queries.max(1) as f64;
        r.row(&[&name, &rank, &t.queries, &(t.pops as f64 / n), &(t.evals as f64 / n), &(secs(t.time) * 1e3 / n), &secs(t.time)])
    };
    let mut dijkstra = TdDijkstra::new(g);
    let mut t = Totals::default();
    for q in &queries {
        let start = Instant::now();
        dijkstra.query(q.source, q.target, q.departure);
        t.time += start.elapsed();
        t.pops += dijkstra.pops;
        t.queries += 1;
    }
    emit(&mut r, "td-dijkstra", "", t)?;
    let mut server = Server::new(&index);
    server.set_verify_termination(false);
    for mode in [Mode::Basic, Mode::Corridor, Mode::Lazy, Mode::LazyAstar] {
        let t = run_suite(&mut server, &queries, mode);
        emit(&mut r, &mode.to_string(), "", t)?;
    }
    let threads = threads(a.input.threads);
    let start = Instant::now();
    batch(&index, &queries, threads, |s, q| s.ea_query(q.source, q.target, q.departure).map(|r| r.earliest_arrival).ok());
    let wall = start.elapsed();
    emit(&mut r, &format!("lazy-astar-batch-{threads}t"), "", Totals { queries: queries.len() as u64, time: wall, ..Default::default() })?;
    if let Some(sources) = a.rank_sources {
        let seed = a.input.seed.context("--seed is required for rank queries")?;
        for (rank, qs) in dijkstra_rank_queries(g, seed, sources).iter().enumerate() {
            let t = run_suite(&mut server, qs, Mode::LazyAstar);
            emit(&mut r, "lazy-astar", &rank.to_string(), t)?;
        }
    }
    r.finish()
}

fn run_suite(server: &mut Server, queries: &[QuerySpec], mode: Mode) -> Totals {
    let mut t = Totals::default();
    for q in queries {
        let start = Instant::now();
        let res = server.query(q.source, q.target, q.departure, mode).expect("nodes were checked");
        t.time += start.elapsed();
        t.pops += res.stats.queue_pops;
        t.evals += res.stats.ttf_evals;
        t.queries += 1;
    }
    t
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let params = a.custom.params()?;
    let g = generate(&a.generator.params(a.seed)?);
    let order = compute_order(&g, a.seed);
    let (index, _) = CatchupIndex::build(g, &order, &params);
    let g = index.graph();
    let queries = uniform_queries(g, a.seed, a.queries);
    let mut dijkstra = TdDijkstra::new(g);
    let mut server = Server::new(&index);
    server.set_verify_termination(true);
    let mut round_trip = Vec::new();
    index.write_to(&mut round_trip)?;
    let reloaded = CatchupIndex::read_from(&mut round_trip.as_slice(), g.clone())?;
    let mut reloaded_server = Server::new(&reloaded);
    let (mut ea_bad, mut path_bad, mut load_bad, mut checked) = (0, 0, 0, 0);
    for q in &queries {
        let expected = dijkstra.query(q.source, q.target, q.departure);
        for mode in [Mode::Basic, Mode::Corridor, Mode::Lazy, Mode::LazyAstar] {
            checked += 1;
            let got = server.query(q.source, q.target, q.departure, mode)?.earliest_arrival;
            if !same(got, expected) || server.late_improvement() {
                warn!("{mode} query {q:?}: {got} vs {expected}");
                ea_bad += 1;
                continue;
            }
            if expected.is_finite() {
                let path = server.retrieve_path()?;
                if !same(q.departure + g.path_travel_time(&path, q.departure), expected) {
                    warn!("{mode} query {q:?}: path does not match its arrival");
                    path_bad += 1;
                }
            }
        }
        let again = reloaded_server.ea_query(q.source, q.target, q.departure)?.earliest_arrival;
        if again.to_bits() != server.ea_query(q.source, q.target, q.departure)?.earliest_arrival.to_bits() {
            load_bad += 1;
        }
    }
    let mut profile_bad = 0;
    for q in uniform_queries(g, a.seed ^ 0x5eed, a.profiles) {
        let out = server.profile_query(q.source, q.target, ProfileWant::ExactTtf)?;
        for i in 0..256 {
            let dep = i as f64 * g.period() / 256.0;
            let expected = dijkstra.query(q.source, q.target, dep) - dep;
            let got = match out.profile.as_ref().unwrap() {
                Profile::Zero => 0.0,
                Profile::Unreachable => f64::INFINITY,
                Profile::Ttf(f) => f.eval(dep),
            };
            if !same(got, expected) {
                warn!("profile {q:?} at {dep}: {got} vs {expected}");
                profile_bad += 1;
                break;
            }
        }
    }
    let mut r = Report::new(a.report.report.as_deref(), &["check", "checked", "mismatches"])?;
    r.row(&[&"earliest_arrival", &checked, &ea_bad])?;
    r.row(&[&"path", &checked, &path_bad])?;
    r.row(&[&"round_trip", &queries.len(), &load_bad])?;
    r.row(&[&"profile", &a.profiles, &profile_bad])?;
    r.finish()?;
    let bad = ea_bad + path_bad + load_bad + profile_bad;
    if bad > 0 {
        bail!("{bad} mismatches");
    }
    info!("all {checked} queries match time-dependent Dijkstra");
    Ok(())
}

/// Equal within 1e-9 relative, or both infinite.
fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

struct GraphStats {
    td_pct: f64,
    avg_points: f64,
    delay: (f64, f64),
}

fn graph_stats(g: &TdGraph) -> GraphStats {
    let td: Vec<usize> = g.ttfs().iter().filter(|f| !f.is_constant()).map(|f| f.len()).collect();
    GraphStats {
        td_pct: 100.0 * td.len() as f64 / g.num_arcs().max(1) as f64,
        avg_points: td.iter().sum::<usize>() as f64 / td.len().max(1) as f64,
        delay: g.relative_total_delay(),
    }
}

fn stats_cmd(a: StatsArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let s = graph_stats(&g);
    let mut r = Report::new(a.report.report.as_deref(), &["key", "value"])?;
    r.row(&[&"nodes", &g.num_nodes()])?;
    r.row(&[&"arcs", &g.num_arcs()])?;
    r.row(&[&"td_arcs_pct", &s.td_pct])?;
    r.row(&[&"avg_points_td", &s.avg_points])?;
    r.row(&[&"rel_delay_pct", &s.delay.0])?;
    r.row(&[&"rel_delay_td_pct", &s.delay.1])?;
    if let Some(path) = &a.index {
        let index = CatchupIndex::load(path, Some(&a.graph)).with_context(|| format!("reading index {}", path.display()))?;
        let x = index.expansion_stats();
        let removed = index.customized().removed.iter().filter(|&&r| r).count();
        r.row(&[&"index_bytes", &std::fs::metadata(path)?.len()])?;
        r.row(&[&"beta", &beta_str(index.params().beta)])?;
        r.row(&[&"epsilon", &index.params().epsilon])?;
        r.row(&[&"shortcut_arcs", &x.arcs])?;
        r.row(&[&"removed_arcs", &removed])?;
        r.row(&[&"expansions", &x.entries])?;
        r.row(&[&"avg_expansions", &x.mean])?;
        r.row(&[&"max_expansions", &x.max])?;
        r.row(&[&"single_expansion_pct", &x.single_pct])?;
        r.row(&[&"etree_height", &index.etree().height()])?;
    }
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::parse_beta;

    #[test]
    fn beta_values() {
        assert_eq!(parse_beta("1000"), Ok(1000));
        assert_eq!(parse_beta("2"), Ok(2));
        assert_eq!(parse_beta("inf"), Ok(usize::MAX));
        assert!(parse_beta("1").is_err());
        assert!(parse_beta("-3").is_err());
        assert!(parse_beta("many").is_err());
    }
}
