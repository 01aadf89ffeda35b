//! Batch benchmarking: run every (instance, method) pair, collect one row
//! per run, and render the rows as CSV or a Markdown report with a
//! per-method summary. Jobs execute through [`exec::par_map`], so batches
//! use every core in parallel builds while row order stays deterministic —
//! instance-major in input order, then methods in the order given. A cell
//! whose driver fails becomes an [`RowStatus::Error`] row; one bad
//! instance or a misbehaving external command never takes down the rest
//! of the batch.

use std::io;
use std::time::Instant;

use serde::Serialize;

use crate::encode::encode;
use crate::exec;
use crate::instance::Instance;
use crate::optimize::{optimize, Method, OptimizeOptions, SolveStatus};
use crate::precedence::transitive_closure;
use crate::solver::BackendKind;

/// Solver verdict for one cell, extended with `Error` for cells whose
/// driver failed outright instead of returning a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
    Error,
}

impl From<SolveStatus> for RowStatus {
    fn from(status: SolveStatus) -> RowStatus {
        match status {
            SolveStatus::Optimal => RowStatus::Optimal,
            SolveStatus::Feasible => RowStatus::Feasible,
            SolveStatus::Infeasible => RowStatus::Infeasible,
            SolveStatus::Unknown => RowStatus::Unknown,
        }
    }
}

impl RowStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RowStatus::Optimal => "optimal",
            RowStatus::Feasible => "feasible",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Unknown => "unknown",
            RowStatus::Error => "error",
        }
    }
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub tasks: usize,
    pub stations: usize,
    pub cycle: u32,
    /// Direct precedence edges.
    pub edges: usize,
    /// Edges in the transitive closure.
    pub closed_edges: usize,
    pub method: Method,
    pub backend: BackendKind,
    pub status: RowStatus,
    pub peak: Option<u64>,
    /// Whether the verdict rests on an unsatisfiable call: the closing
    /// call behind an optimum, or the refutation behind an infeasible
    /// line. Always false for feasible, unknown, and error rows.
    pub proved: bool,
    pub lower: Option<u64>,
    pub upper: Option<u64>,
    /// Bound iterations the driver logged.
    pub iterations: u64,
    pub solve_calls: u64,
    pub conflicts: u64,
    /// Base-encoding size for the method's encoder, before any peak layer.
    pub vars: u64,
    pub clauses: u64,
    pub wall_s: f64,
    /// Error message for `Error` rows, empty otherwise.
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: u64,
    pub optimal: u64,
    pub feasible: u64,
    pub infeasible: u64,
    pub unknown: u64,
    pub errors: u64,
    /// Wall time summed over optimal rows only, so a slow timeout or
    /// failure cannot pad a method's score.
    pub optimal_wall_s: f64,
}

fn bench_cell(inst: &Instance, method: Method, options: &OptimizeOptions) -> BenchRow {
    let closure = transitive_closure(inst);
    let mut row = BenchRow {
        instance: inst.name.clone(),
        tasks: inst.task_count(),
        stations: inst.station_count,
        cycle: inst.cycle_time,
        edges: inst.edges().len(),
        closed_edges: closure.closed_edges.len(),
        method,
        backend: options.backend,
        status: RowStatus::Error,
        peak: None,
        proved: false,
        lower: None,
        upper: None,
        iterations: 0,
        solve_calls: 0,
        conflicts: 0,
        vars: 0,
        clauses: 0,
        wall_s: 0.0,
        note: String::new(),
    };
    // Reporting re-encode, outside the timed window: the base formula the
    // method starts from, sized without any peak layer on top.
    if let Ok(enc) = encode(inst, method.encoder(), options.encode) {
        row.vars = u64::from(enc.formula.var_count());
        row.clauses = enc.formula.clause_count() as u64;
    }
    let opts = OptimizeOptions {
        method,
        ..options.clone()
    };
    let start = Instant::now();
    match optimize(inst, &opts) {
        Ok(out) => {
            row.status = out.status.into();
            row.peak = out.peak;
            row.proved = out.closing_unsat || out.status == SolveStatus::Infeasible;
            row.lower = Some(out.bounds.lower);
            row.upper = Some(out.bounds.upper);
            row.iterations = out.iterations.len() as u64;
            row.solve_calls = out.stats.solve_calls;
            row.conflicts = out.stats.conflicts;
        }
        Err(err) => row.note = err.to_string(),
    }
    row.wall_s = start.elapsed().as_secs_f64();
    row
}

/// Run `methods` over every instance. `options.method` is overridden per
/// job; everything else (backend, seed, timeout, encode options) applies
/// uniformly. A failed cell is recorded as an error row rather than
/// aborting the batch.
pub fn run_batch(
    instances: &[Instance],
    methods: &[Method],
    options: &OptimizeOptions,
) -> Vec<BenchRow> {
    let mut jobs = Vec::with_capacity(instances.len() * methods.len());
    for inst in instances {
        for &method in methods {
            jobs.push((inst.clone(), method));
        }
    }
    exec::par_map(jobs, |(inst, method)| bench_cell(&inst, method, options))
}

/// Per-method totals, in the order methods first appear in `rows`.
/// `optimal` counts exactly the rows with [`RowStatus::Optimal`], and
/// `optimal_wall_s` sums wall time over those rows alone.
pub fn summarize(rows: &[BenchRow]) -> Vec<MethodSummary> {
    let mut out: Vec<MethodSummary> = Vec::new();
    for row in rows {
        let entry = match out.iter_mut().find(|s| s.method == row.method) {
            Some(e) => e,
            None => {
                out.push(MethodSummary {
                    method: row.method,
                    runs: 0,
                    optimal: 0,
                    feasible: 0,
                    infeasible: 0,
                    unknown: 0,
                    errors: 0,
                    optimal_wall_s: 0.0,
                });
                out.last_mut().unwrap()
            }
        };
        entry.runs += 1;
        match row.status {
            RowStatus::Optimal => {
                entry.optimal += 1;
                entry.optimal_wall_s += row.wall_s;
            }
            RowStatus::Feasible => entry.feasible += 1,
            RowStatus::Infeasible => entry.infeasible += 1,
            RowStatus::Unknown => entry.unknown += 1,
            RowStatus::Error => entry.errors += 1,
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_u64(v: Option<u64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn write_csv(rows: &[BenchRow], out: &mut impl io::Write) -> io::Result<()> {
    writeln!(
        out,
        "instance,tasks,stations,cycle,edges,closed_edges,method,backend,status,peak,proved,\
         lower,upper,iterations,solve_calls,conflicts,vars,clauses,wall_s,note"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{}",
            csv_field(&r.instance),
            r.tasks,
            r.stations,
            r.cycle,
            r.edges,
            r.closed_edges,
            r.method,
            r.backend_name(),
            r.status,
            opt_u64(r.peak),
            r.proved,
            opt_u64(r.lower),
            opt_u64(r.upper),
            r.iterations,
            r.solve_calls,
            r.conflicts,
            r.vars,
            r.clauses,
            r.wall_s,
            csv_field(&r.note),
        )?;
    }
    Ok(())
}

impl BenchRow {
    fn backend_name(&self) -> &'static str {
        match self.backend {
            BackendKind::Embedded => "embedded",
            BackendKind::Library => "library",
        }
    }
}

pub fn write_markdown(rows: &[BenchRow], out: &mut impl io::Write) -> io::Result<()> {
    writeln!(
        out,
        "| method | runs | optimal | feasible | infeasible | unknown | errors | opt time s |"
    )?;
    writeln!(out, "|---|---:|---:|---:|---:|---:|---:|---:|")?;
    for s in summarize(rows) {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {:.3} |",
            s.method, s.runs, s.optimal, s.feasible, s.infeasible, s.unknown, s.errors,
            s.optimal_wall_s
        )?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "| instance | n | m | c | edges | closed | method | status | peak | proved | lb | ub | \
         iters | vars | clauses | s |"
    )?;
    writeln!(
        out,
        "|---|---:|---:|---:|---:|---:|---|---|---:|---|---:|---:|---:|---:|---:|---:|"
    )?;
    for r in rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.3} |",
            r.instance,
            r.tasks,
            r.stations,
            r.cycle,
            r.edges,
            r.closed_edges,
            r.method,
            r.status,
            opt_u64(r.peak),
            r.proved,
            opt_u64(r.lower),
            opt_u64(r.upper),
            r.iterations,
            r.vars,
            r.clauses,
            r.wall_s,
        )?;
    }
    let mut first = true;
    for r in rows.iter().filter(|r| !r.note.is_empty()) {
        if first {
            writeln!(out)?;
            first = false;
        }
        writeln!(out, "> {} / {}: {}", r.instance, r.method, r.note)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_instance, worked_example};

    fn small_batch() -> Vec<BenchRow> {
        let instances = [worked_example(), random_instance("r4", 4, 2, 5, 0.3, (1, 8), 3)];
        let methods = [Method::CompactIncremental, Method::CompactPb];
        run_batch(&instances, &methods, &OptimizeOptions::default())
    }

    #[test]
    fn rows_are_instance_major_and_all_optimal() {
        let rows = small_batch();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].instance, "example");
        assert_eq!(rows[1].instance, "example");
        assert_eq!(rows[0].method, Method::CompactIncremental);
        assert_eq!(rows[1].method, Method::CompactPb);
        assert_eq!(rows[2].instance, "r4");
        for r in &rows {
            assert_eq!(r.status, RowStatus::Optimal, "{} {}", r.instance, r.method);
            assert!(r.proved, "{} {}", r.instance, r.method);
            assert!(r.vars > 0 && r.clauses > 0);
            assert!(r.note.is_empty());
        }
        // Both methods prove the same optimum on the same instance.
        assert_eq!(rows[0].peak, rows[1].peak);
        assert_eq!(rows[2].peak, rows[3].peak);
        // The example's precedence graph: 4 direct edges, 6 closed.
        assert_eq!((rows[0].edges, rows[0].closed_edges), (4, 6));
    }

    #[test]
    fn summary_counts_every_row_once() {
        let rows = small_batch();
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 2);
        for s in &summary {
            assert_eq!(s.runs, 2);
            assert_eq!(s.optimal, 2);
            assert_eq!(s.feasible + s.infeasible + s.unknown + s.errors, 0);
            let optimal_rows = rows
                .iter()
                .filter(|r| r.method == s.method && r.status == RowStatus::Optimal)
                .count() as u64;
            assert_eq!(s.optimal, optimal_rows);
        }
    }

    #[test]
    fn summary_time_covers_optimal_rows_only() {
        let mut rows = small_batch();
        // Turn one cell into a monstrous timeout; its time must not count.
        rows[1].status = RowStatus::Unknown;
        rows[1].peak = None;
        rows[1].proved = false;
        rows[1].wall_s = 1.0e9;
        let summary = summarize(&rows);
        for s in &summary {
            let expected: f64 = rows
                .iter()
                .filter(|r| r.method == s.method && r.status == RowStatus::Optimal)
                .map(|r| r.wall_s)
                .sum();
            assert_eq!(s.optimal_wall_s, expected, "{}", s.method);
            assert!(s.optimal_wall_s < 1.0e9);
        }
    }

    #[test]
    fn a_failing_cell_becomes_a_row_instead_of_poisoning_the_batch() {
        let instances = [worked_example()];
        let methods = [Method::CompactIncremental, Method::CompactMaxsat];
        let options = OptimizeOptions {
            // An external command that prints garbage is a driver error.
            maxsat_cmd: Some("sh -c 'echo garbage'".into()),
            init_iterations: 1,
            ..OptimizeOptions::default()
        };
        let rows = run_batch(&instances, &methods, &options);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].status, RowStatus::Optimal);
        let bad = &rows[1];
        assert_eq!(bad.status, RowStatus::Error);
        assert_eq!(bad.peak, None);
        assert!(!bad.proved);
        assert!(!bad.note.is_empty(), "error rows carry the message");
        // The row still describes the instance and its encoding.
        assert_eq!((bad.tasks, bad.stations, bad.cycle), (5, 3, 7));
        assert!(bad.vars > 0 && bad.clauses > 0);
        let summary = summarize(&rows);
        assert_eq!(summary[1].errors, 1);
        assert_eq!(summary[1].optimal_wall_s, 0.0);
    }

    #[test]
    fn same_seed_batches_agree_on_everything_but_wall_time() {
        let strip_time = |mut rows: Vec<BenchRow>| {
            for r in &mut rows {
                r.wall_s = 0.0;
            }
            rows
        };
        let a = strip_time(small_batch());
        let b = strip_time(small_batch());
        assert_eq!(a, b);
    }

    #[test]
    fn csv_and_markdown_render_every_row() {
        let rows = small_batch();
        let mut csv = Vec::new();
        write_csv(&rows, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().count(), 1 + rows.len());
        assert_eq!(
            csv.lines().next().unwrap(),
            "instance,tasks,stations,cycle,edges,closed_edges,method,backend,status,peak,\
             proved,lower,upper,iterations,solve_calls,conflicts,vars,clauses,wall_s,note"
        );
        assert!(csv.contains("example,5,3,7,4,6,compact-incremental,embedded,optimal,9,true,9,16,"));
        let mut md = Vec::new();
        write_markdown(&rows, &mut md).unwrap();
        let md = String::from_utf8(md).unwrap();
        assert!(md.contains("| compact-pb |"));
        assert!(md.contains("| example | 5 | 3 | 7 | 4 | 6 |"));
        assert!(!md.contains('>'), "no error notes for a clean batch");
    }

    #[test]
    fn csv_fields_with_commas_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
