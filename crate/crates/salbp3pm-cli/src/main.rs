//! Command-line front end for the `salbp3pm` library.
//!
//! Subcommands mirror the library layers: `solve` runs an optimization
//! driver, `encode` emits the plain DIMACS encoding, `stats` reports
//! instance shape and preprocessing results, `oracle` runs the exhaustive
//! reference search, `generate` writes built-in and random instances, and
//! `bench` sweeps methods over a set of instance files.
//!
//! Exit codes: 0 when a schedule was found (proved optimal or not),
//! 1 on any runtime error, 2 on usage errors, 3 when the instance is
//! proved infeasible, and 4 when a timeout left the question open.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use salbp3pm::bench::{run_batch, write_csv, write_markdown};
use salbp3pm::cnf::{write_dimacs, write_wcnf, WcnfDialect};
use salbp3pm::corpus;
use salbp3pm::encode::{encode, peak::peak_layer_binary, EncodeOptions, EncoderKind};
use salbp3pm::instance::{
    analytic_bounds, generate_powers, parse_instance, write_native, Bounds, Instance,
    InstanceFormat, Solution,
};
use salbp3pm::optimize::{
    optimize, BlockingScope, Method, OptimizeOptions, OptimizeOutcome, SolveStatus,
};
use salbp3pm::oracle::{oracle_optimum, search_space_estimate, OracleLimits, OracleResult};
use salbp3pm::precedence::Preprocessed;
use salbp3pm::solver::BackendKind;

const EXIT_INFEASIBLE: u8 = 3;
const EXIT_UNKNOWN: u8 = 4;

#[derive(Parser)]
#[command(name = "salbp3pm", version, about = "Exact power-peak minimization for assembly lines")]
enum Cli {
    /// Minimize the power peak of an instance with a SAT-based driver
    Solve(SolveArgs),
    /// Emit the base DIMACS CNF encoding of an instance
    Encode(EncodeArgs),
    /// Report instance shape, precedence closure, windows, and bounds
    Stats(StatsArgs),
    /// Exhaustive reference search (small instances only)
    Oracle(OracleArgs),
    /// Write built-in or random instances in the native format
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Run several methods over several instances and tabulate results
    Bench(BenchArgs),
}

/// Instance input shared by every reading subcommand.
#[derive(Args)]
struct InputArgs {
    /// Instance file to read
    file: PathBuf,
    /// Input format
    #[arg(long, value_enum, default_value_t = FormatArg::Native)]
    format: FormatArg,
    /// Station count (alb files carry none)
    #[arg(long)]
    stations: Option<usize>,
    /// Cycle time (alb files carry none)
    #[arg(long)]
    cycle: Option<u32>,
    /// Draw missing per-task powers uniformly from `lo:hi`
    #[arg(long, value_parser = parse_power_range, value_name = "LO:HI")]
    power_range: Option<(u64, u64)>,
}

impl InputArgs {
    fn load(&self, power_seed: u64) -> anyhow::Result<Instance> {
        let text = fs::read_to_string(&self.file)
            .with_context(|| format!("reading {}", self.file.display()))?;
        let format = match self.format {
            FormatArg::Native => {
                if self.stations.is_some() || self.cycle.is_some() {
                    bail!("--stations and --cycle only apply to --format alb");
                }
                InstanceFormat::Native
            }
            FormatArg::Alb => {
                let (Some(station_count), Some(cycle_time)) = (self.stations, self.cycle) else {
                    bail!("alb files carry no line parameters; pass --stations and --cycle");
                };
                InstanceFormat::Alb {
                    station_count,
                    cycle_time,
                }
            }
        };
        let mut inst = parse_instance(&text, format)
            .with_context(|| format!("parsing {}", self.file.display()))?;
        if let Some(stem) = self.file.file_stem().and_then(|s| s.to_str()) {
            inst.name = stem.to_string();
        }
        if inst.powers.is_none() {
            if let Some((lo, hi)) = self.power_range {
                let powers = generate_powers(&inst, power_seed, lo, hi)?;
                inst = inst.with_powers(powers)?;
            }
        }
        Ok(inst)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Optimization method
    #[arg(long, value_enum, default_value_t = MethodArg::CompactIncremental)]
    method: MethodArg,
    /// SAT backend
    #[arg(long, value_enum, default_value_t = BackendArg::Embedded)]
    backend: BackendArg,
    /// Which tasks enter each blocking cut
    #[arg(long, value_enum, default_value_t = BlockingArg::Minimized)]
    blocking: BlockingArg,
    /// Wall-clock budget in seconds
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    /// Window pruning from the precedence closure
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pruning: Toggle,
    /// Redundant transitive precedence clauses
    #[arg(long, value_enum, default_value_t = Toggle::Off)]
    extended_edges: Toggle,
    /// External weighted-MaxSAT command; `{file}` is replaced by the
    /// problem path (appended when absent)
    #[arg(long, env = "SALBP3PM_MAXSAT_CMD", value_name = "CMD")]
    maxsat_cmd: Option<String>,
    /// Warm-up solve budget before the bound structure is committed
    #[arg(long, default_value_t = 10)]
    init_iterations: usize,
    /// Seed for the solver and for generated powers
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable report instead of the text summary
    #[arg(long)]
    json: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Encoder flavor
    #[arg(long, value_enum, default_value_t = EncoderArg::Compact)]
    encoder: EncoderArg,
    /// Window pruning from the precedence closure
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pruning: Toggle,
    /// Redundant transitive precedence clauses
    #[arg(long, value_enum, default_value_t = Toggle::Off)]
    extended_edges: Toggle,
    /// Seed for generated powers
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the weighted peak-minimization formula instead: the base
    /// encoding as hard clauses plus a binary bound counter whose soft
    /// bits make the optimal cost equal the optimal peak
    #[arg(long)]
    wcnf: bool,
    /// WCNF flavor: classic `p wcnf` header or the headerless 2022 format
    #[arg(long, value_enum, default_value_t = WcnfDialectArg::Classic, requires = "wcnf")]
    wcnf_dialect: WcnfDialectArg,
    /// Write the DIMACS file here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Seed for generated powers
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable report instead of the text summary
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Abort after this many search nodes
    #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
    max_nodes: u64,
    /// Refuse instances whose search-space estimate exceeds this
    #[arg(long, default_value_t = 1_000_000_000_000)]
    max_estimate: u64,
    /// Seed for generated powers
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable report instead of the text summary
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Five-task instance used throughout the documentation
    Example(OutArg),
    /// Two-task instance whose feasible peaks are exactly its bounds
    GapPair(OutArg),
    /// 21-task synthetic stress instance
    LargeSynthetic(OutArg),
    /// Seeded random instance
    Random(RandomArgs),
    /// Built-in benchmark family, one file per instance
    Families(OutDirArgs),
    /// Seeded acceptance corpus, one file per instance
    Acceptance(AcceptanceArgs),
}

#[derive(Args)]
struct OutArg {
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    tasks: usize,
    #[arg(long)]
    stations: usize,
    #[arg(long)]
    cycle: u32,
    /// Independent probability of each forward precedence pair
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    #[arg(long, value_parser = parse_power_range, value_name = "LO:HI", default_value = "1:10")]
    power_range: (u64, u64),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance name recorded in the file
    #[arg(long)]
    name: Option<String>,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutDirArgs {
    /// Directory to fill (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AcceptanceArgs {
    /// Directory to fill (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2026)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Native-format instance files, or directories of `.txt` instances;
    /// the built-in family set when empty
    files: Vec<PathBuf>,
    /// Comma-separated method names; every method when absent
    #[arg(long, value_name = "M1,M2,..")]
    methods: Option<String>,
    #[arg(long, value_enum, default_value_t = BackendArg::Embedded)]
    backend: BackendArg,
    /// Wall-clock budget in seconds, per run
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    /// Draw missing per-task powers uniformly from `lo:hi`
    #[arg(long, value_parser = parse_power_range, value_name = "LO:HI")]
    power_range: Option<(u64, u64)>,
    /// External weighted-MaxSAT command for the compact-maxsat method
    #[arg(long, env = "SALBP3PM_MAXSAT_CMD", value_name = "CMD")]
    maxsat_cmd: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportArg::Markdown)]
    report: ReportArg,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Native,
    Alb,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    BaselineBlocking,
    CompactBlocking,
    CompactPb,
    CompactMaxsat,
    CompactIncremental,
}

impl From<MethodArg> for Method {
    fn from(arg: MethodArg) -> Method {
        match arg {
            MethodArg::BaselineBlocking => Method::BaselineBlocking,
            MethodArg::CompactBlocking => Method::CompactBlocking,
            MethodArg::CompactPb => Method::CompactPb,
            MethodArg::CompactMaxsat => Method::CompactMaxsat,
            MethodArg::CompactIncremental => Method::CompactIncremental,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Embedded,
    Library,
}

impl From<BackendArg> for BackendKind {
    fn from(arg: BackendArg) -> BackendKind {
        match arg {
            BackendArg::Embedded => BackendKind::Embedded,
            BackendArg::Library => BackendKind::Library,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockingArg {
    Witnessed,
    Minimized,
}

impl From<BlockingArg> for BlockingScope {
    fn from(arg: BlockingArg) -> BlockingScope {
        match arg {
            BlockingArg::Witnessed => BlockingScope::Witnessed,
            BlockingArg::Minimized => BlockingScope::Minimized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderArg {
    Baseline,
    Compact,
}

impl From<EncoderArg> for EncoderKind {
    fn from(arg: EncoderArg) -> EncoderKind {
        match arg {
            EncoderArg::Baseline => EncoderKind::Baseline,
            EncoderArg::Compact => EncoderKind::Compact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WcnfDialectArg {
    Classic,
    #[value(name = "new")]
    New,
}

impl From<WcnfDialectArg> for WcnfDialect {
    fn from(arg: WcnfDialectArg) -> WcnfDialect {
        match arg {
            WcnfDialectArg::Classic => WcnfDialect::Classic,
            WcnfDialectArg::New => WcnfDialect::New2022,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Csv,
    Markdown,
}

/// Boolean flags that default to on need an explicit off switch.
#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn is_on(self) -> bool {
        matches!(self, Toggle::On)
    }
}

fn parse_power_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range {lo}:{hi} must satisfy 1 <= LO <= HI"));
    }
    Ok((lo, hi))
}

fn parse_timeout(secs: f64) -> anyhow::Result<Duration> {
    if !secs.is_finite() || secs < 0.0 {
        bail!("timeout must be a non-negative number of seconds");
    }
    Ok(Duration::from_secs_f64(secs))
}

fn require_powers(inst: &Instance) -> anyhow::Result<()> {
    if inst.powers.is_none() {
        bail!(
            "instance {} has no power data; pass --power-range LO:HI to draw some",
            inst.name
        );
    }
    Ok(())
}

/// Write `text` to `out` when given, stdout otherwise.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn status_code(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        SolveStatus::Unknown => ExitCode::from(EXIT_UNKNOWN),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli {
        Cli::Solve(args) => run_solve(args),
        Cli::Encode(args) => run_encode(args),
        Cli::Stats(args) => run_stats(args),
        Cli::Oracle(args) => run_oracle(args),
        Cli::Generate(cmd) => run_generate(cmd),
        Cli::Bench(args) => run_bench(args),
    }
}

#[derive(serde::Serialize)]
struct SolveReport<'a> {
    instance: &'a str,
    tasks: usize,
    stations: usize,
    cycle: u32,
    #[serde(flatten)]
    outcome: &'a OptimizeOutcome,
}

fn run_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let inst = args.input.load(args.seed)?;
    require_powers(&inst)?;
    let opts = OptimizeOptions {
        method: args.method.into(),
        backend: args.backend.into(),
        encode: EncodeOptions {
            pruning: args.pruning.is_on(),
            extended_edges: args.extended_edges.is_on(),
            ..EncodeOptions::default()
        },
        blocking: args.blocking.into(),
        seed: args.seed,
        timeout: args.timeout.map(parse_timeout).transpose()?,
        maxsat_cmd: args.maxsat_cmd,
        init_iterations: args.init_iterations,
    };
    let outcome = optimize(&inst, &opts)?;
    let rendered = if args.json {
        let report = SolveReport {
            instance: &inst.name,
            tasks: inst.task_count(),
            stations: inst.station_count,
            cycle: inst.cycle_time,
            outcome: &outcome,
        };
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        render_solve_text(&inst, &outcome)?
    };
    emit(args.out.as_deref(), &rendered)?;
    Ok(status_code(outcome.status))
}

fn render_solve_text(inst: &Instance, outcome: &OptimizeOutcome) -> anyhow::Result<String> {
    let mut s = String::new();
    writeln!(
        s,
        "instance       {} ({} tasks, {} stations, cycle {})",
        inst.name,
        inst.task_count(),
        inst.station_count,
        inst.cycle_time
    )?;
    writeln!(s, "method         {} on {}", outcome.method, outcome.backend)?;
    writeln!(s, "status         {}", outcome.status)?;
    match outcome.peak {
        Some(peak) => writeln!(s, "peak           {peak}")?,
        None => writeln!(s, "peak           -")?,
    }
    writeln!(
        s,
        "bounds         [{}, {}]",
        outcome.bounds.lower, outcome.bounds.upper
    )?;
    writeln!(
        s,
        "closing unsat  {}",
        if outcome.closing_unsat { "yes" } else { "no" }
    )?;
    writeln!(
        s,
        "effort         {} iterations, {} solve calls, {} sessions, {} conflicts",
        outcome.iterations.len(),
        outcome.stats.solve_calls,
        outcome.stats.sessions,
        outcome.stats.conflicts
    )?;
    writeln!(s, "wall time      {} ms", outcome.stats.wall_ms)?;
    if let Some(sol) = &outcome.solution {
        s.push_str(&render_schedule(inst, sol)?);
    }
    Ok(s)
}

/// Schedule table with 1-based task and station ids, sorted by station
/// then start time.
fn render_schedule(inst: &Instance, sol: &Solution) -> anyhow::Result<String> {
    let powers = inst.powers()?;
    let mut order: Vec<usize> = (0..inst.task_count()).collect();
    order.sort_by_key(|&i| (sol.assignment[i], sol.start[i], i));
    let mut s = String::new();
    writeln!(s, "schedule:")?;
    writeln!(s, "  task  station  start  end  power")?;
    for i in order {
        writeln!(
            s,
            "  {:>4}  {:>7}  {:>5}  {:>3}  {:>5}",
            i + 1,
            sol.assignment[i] + 1,
            sol.start[i],
            sol.start[i] + inst.durations[i],
            powers[i]
        )?;
    }
    Ok(s)
}

fn run_encode(args: EncodeArgs) -> anyhow::Result<ExitCode> {
    let inst = args.input.load(args.seed)?;
    let options = EncodeOptions {
        pruning: args.pruning.is_on(),
        extended_edges: args.extended_edges.is_on(),
        ..EncodeOptions::default()
    };
    let kind: EncoderKind = args.encoder.into();
    let mut enc = encode(&inst, kind, options)?;
    let mut buf = Vec::new();
    if args.wcnf {
        // Same weighted formula the maxsat method hands to an external
        // solver, except the bound counter starts from the analytic upper
        // bound instead of a warm-up incumbent.
        let bounds = analytic_bounds(&inst)?;
        let wcnf = peak_layer_binary(&mut enc, bounds.lower, bounds.upper)?;
        write_wcnf(&wcnf, args.wcnf_dialect.into(), &mut buf)?;
        let text = String::from_utf8(buf).expect("WCNF output is ASCII");
        emit(args.out.as_deref(), &text)?;
        eprintln!(
            "{} weighted encoding of {}: {} vars, {} hard + {} soft clauses, top {}",
            kind,
            inst.name,
            wcnf.hard.var_count(),
            wcnf.hard.clause_count(),
            wcnf.soft.len(),
            wcnf.top()
        );
        return Ok(ExitCode::SUCCESS);
    }
    write_dimacs(&enc.formula, &mut buf)?;
    let text = String::from_utf8(buf).expect("DIMACS output is ASCII");
    emit(args.out.as_deref(), &text)?;
    eprintln!(
        "{} encoding of {}: {} vars, {} clauses",
        kind,
        inst.name,
        enc.formula.var_count(),
        enc.formula.clauses().len()
    );
    for (family, count) in enc.stats.by_name() {
        eprintln!("  {family:<24} {count}");
    }
    if enc.stats.pb_aux_vars > 0 {
        eprintln!("  {:<24} {}", "pb auxiliary vars", enc.stats.pb_aux_vars);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct TaskRow {
    task: usize,
    duration: u32,
    power: Option<u64>,
    /// 1-based inclusive station range; `None` when the windows are empty.
    stations: Option<(usize, usize)>,
    earliest_start: Option<u32>,
    latest_start: Option<i64>,
}

#[derive(serde::Serialize)]
struct StatsReport {
    instance: String,
    tasks: usize,
    stations: usize,
    cycle: u32,
    direct_edges: usize,
    closed_edges: usize,
    bounds: Option<Bounds>,
    search_space_estimate: String,
    window_infeasible: bool,
    task_rows: Vec<TaskRow>,
}

fn run_stats(args: StatsArgs) -> anyhow::Result<ExitCode> {
    let inst = args.input.load(args.seed)?;
    let pre = Preprocessed::build(&inst)?;
    let bounds = inst.powers.is_some().then(|| analytic_bounds(&inst)).transpose()?;
    let rows: Vec<TaskRow> = (0..inst.task_count())
        .map(|i| {
            let range = pre.windows.range0(i);
            let (earliest, latest) = match &range {
                Some(r) => {
                    let est = r.clone().map(|k| pre.temporal.est[i][k]).min();
                    let lst = r.clone().map(|k| pre.temporal.lst[i][k]).max();
                    (est, lst)
                }
                None => (None, None),
            };
            TaskRow {
                task: i + 1,
                duration: inst.durations[i],
                power: inst.powers.as_ref().map(|w| w[i]),
                stations: range.map(|r| (r.start() + 1, r.end() + 1)),
                earliest_start: earliest,
                latest_start: latest,
            }
        })
        .collect();
    let report = StatsReport {
        instance: inst.name.clone(),
        tasks: inst.task_count(),
        stations: inst.station_count,
        cycle: inst.cycle_time,
        direct_edges: inst.edges().len(),
        closed_edges: pre.closure.closed_edges.len(),
        bounds,
        search_space_estimate: search_space_estimate(&inst).to_string(),
        window_infeasible: pre.windows.is_infeasible(),
        task_rows: rows,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render_stats_text(&report));
    }
    Ok(ExitCode::SUCCESS)
}

fn render_stats_text(report: &StatsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "instance   {} ({} tasks, {} stations, cycle {})",
        report.instance, report.tasks, report.stations, report.cycle
    );
    let _ = writeln!(
        s,
        "edges      {} direct, {} in the transitive closure",
        report.direct_edges, report.closed_edges
    );
    match report.bounds {
        Some(b) => {
            let _ = writeln!(s, "bounds     peak in [{}, {}]", b.lower, b.upper);
        }
        None => {
            let _ = writeln!(s, "bounds     unavailable (no power data)");
        }
    }
    let _ = writeln!(s, "estimate   {} schedule candidates", report.search_space_estimate);
    if report.window_infeasible {
        let _ = writeln!(s, "windows    empty for some task: the instance is infeasible");
    }
    let _ = writeln!(s, "  task  dur  power  stations  starts");
    for row in &report.task_rows {
        let power = row.power.map_or("-".to_string(), |w| w.to_string());
        let (stations, starts) = match (row.stations, row.earliest_start, row.latest_start) {
            (Some((lo, hi)), Some(est), Some(lst)) => {
                (format!("{lo}..{hi}"), format!("{est}..{lst}"))
            }
            _ => ("empty".to_string(), "-".to_string()),
        };
        let _ = writeln!(
            s,
            "  {:>4}  {:>3}  {:>5}  {:>8}  {}",
            row.task, row.duration, power, stations, starts
        );
    }
    s
}

#[derive(serde::Serialize)]
struct OracleReport<'a> {
    instance: &'a str,
    feasible: bool,
    peak: Option<u64>,
    solution: Option<&'a Solution>,
}

fn run_oracle(args: OracleArgs) -> anyhow::Result<ExitCode> {
    let inst = args.input.load(args.seed)?;
    require_powers(&inst)?;
    let limits = OracleLimits {
        max_nodes: args.max_nodes,
        max_estimate: args.max_estimate as u128,
    };
    let result = oracle_optimum(&inst, &limits)?;
    let (feasible, peak, solution) = match &result {
        OracleResult::Infeasible => (false, None, None),
        OracleResult::Optimal { peak, solution } => (true, Some(*peak), Some(solution)),
    };
    if args.json {
        let report = OracleReport {
            instance: &inst.name,
            feasible,
            peak,
            solution,
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        match (peak, solution) {
            (Some(peak), Some(sol)) => {
                println!("optimal peak {peak}");
                print!("{}", render_schedule(&inst, sol)?);
            }
            _ => println!("infeasible"),
        }
    }
    Ok(if feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INFEASIBLE)
    })
}

fn run_generate(cmd: GenerateCmd) -> anyhow::Result<ExitCode> {
    match cmd {
        GenerateCmd::Example(args) => emit_instance(&corpus::worked_example(), args.out.as_deref()),
        GenerateCmd::GapPair(args) => emit_instance(&corpus::bound_gap_pair(), args.out.as_deref()),
        GenerateCmd::LargeSynthetic(args) => {
            emit_instance(&corpus::large_synthetic(), args.out.as_deref())
        }
        GenerateCmd::Random(args) => {
            let name = args
                .name
                .clone()
                .unwrap_or_else(|| format!("random-{}", args.seed));
            let inst = corpus::random_instance(
                name,
                args.tasks,
                args.stations,
                args.cycle,
                args.edge_prob,
                args.power_range,
                args.seed,
            );
            emit_instance(&inst, args.out.as_deref())
        }
        GenerateCmd::Families(args) => write_instance_dir(&corpus::family_instances(), &args.out_dir),
        GenerateCmd::Acceptance(args) => {
            write_instance_dir(&corpus::acceptance_corpus(args.seed), &args.out_dir)
        }
    }
}

fn emit_instance(inst: &Instance, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    emit(out, &write_native(inst))?;
    Ok(ExitCode::SUCCESS)
}

fn write_instance_dir(instances: &[Instance], dir: &Path) -> anyhow::Result<ExitCode> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for inst in instances {
        let path = dir.join(format!("{}.txt", inst.name));
        fs::write(&path, write_native(inst)).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("wrote {} instances to {}", instances.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

/// Expand bench positionals: a directory stands for every `.txt` file
/// directly inside it, in name order.
fn expand_instance_paths(files: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in files {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("reading directory {}", path.display()))?
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .map(|entry| entry.path())
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
                .collect();
            found.sort();
            if found.is_empty() {
                bail!("{} contains no .txt instance files", path.display());
            }
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

fn run_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let instances: Vec<Instance> = if args.files.is_empty() {
        corpus::family_instances()
    } else {
        expand_instance_paths(&args.files)?
            .iter()
            .map(|path| {
                let input = InputArgs {
                    file: path.clone(),
                    format: FormatArg::Native,
                    stations: None,
                    cycle: None,
                    power_range: args.power_range,
                };
                input.load(args.seed)
            })
            .collect::<anyhow::Result<_>>()?
    };
    for inst in &instances {
        require_powers(inst)?;
    }
    let methods: Vec<Method> = match &args.methods {
        None => Method::all().to_vec(),
        Some(list) => list
            .split(',')
            .map(|name| name.trim().parse::<Method>())
            .collect::<Result<_, _>>()?,
    };
    let options = OptimizeOptions {
        backend: args.backend.into(),
        seed: args.seed,
        timeout: args.timeout.map(parse_timeout).transpose()?,
        maxsat_cmd: args.maxsat_cmd,
        ..OptimizeOptions::default()
    };
    let rows = run_batch(&instances, &methods, &options);
    let mut buf = Vec::new();
    match args.report {
        ReportArg::Csv => write_csv(&rows, &mut buf)?,
        ReportArg::Markdown => write_markdown(&rows, &mut buf)?,
    }
    let text = String::from_utf8(buf).expect("reports are UTF-8");
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn power_ranges_parse_and_reject_nonsense() {
        assert_eq!(parse_power_range("1:10"), Ok((1, 10)));
        assert_eq!(parse_power_range(" 3 : 3 "), Ok((3, 3)));
        assert!(parse_power_range("10").is_err());
        assert!(parse_power_range("0:4").is_err());
        assert!(parse_power_range("5:4").is_err());
    }
}
