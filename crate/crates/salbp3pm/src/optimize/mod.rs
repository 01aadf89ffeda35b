//! Exact peak minimization drivers. Every method follows the same shape —
//! find schedules, tighten a bound, finish with an unsatisfiable solver
//! call that certifies optimality — but they differ in how the bound is
//! expressed and how much solver state survives between iterations:
//!
//! * [`Method::BaselineBlocking`] / [`Method::CompactBlocking`]: no bound
//!   encoding at all; each incumbent's peak witness is forbidden with
//!   blocking clauses in one persistent session.
//! * [`Method::CompactPb`]: each iteration rebuilds the formula with a
//!   hard per-slot cap one below the incumbent and solves it fresh.
//! * [`Method::CompactMaxsat`]: the bound becomes a binary counter with
//!   soft bits, handed to an external weighted-MaxSAT command when
//!   configured and otherwise minimized by embedded linear descent.
//! * [`Method::CompactIncremental`]: one session holds an indicator-level
//!   ladder; the walk down asserts one unit clause per improvement.
//!
//! A reported [`SolveStatus::Optimal`] always rests on a machine-checked
//! unsatisfiable call, never on bookkeeping alone: when the incumbent hits
//! the analytic floor, drivers still append a cap below it and watch the
//! solver refute it.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cnf::{lit, CnfFormula, Lit};
use crate::encode::{EncodeOptions, EncoderKind, Encoding};
use crate::error::{Error, Result};
use crate::instance::{
    analytic_bounds, power_profile, validate_solution, Bounds, Instance, Solution,
};
use crate::solver::{BackendKind, SatSession, SolveOutcome};

mod blocking;
mod incremental;
mod maxsat;
mod pb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BaselineBlocking,
    CompactBlocking,
    CompactPb,
    CompactMaxsat,
    CompactIncremental,
}

impl Method {
    pub fn all() -> [Method; 5] {
        [
            Method::BaselineBlocking,
            Method::CompactBlocking,
            Method::CompactPb,
            Method::CompactMaxsat,
            Method::CompactIncremental,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::BaselineBlocking => "baseline-blocking",
            Method::CompactBlocking => "compact-blocking",
            Method::CompactPb => "compact-pb",
            Method::CompactMaxsat => "compact-maxsat",
            Method::CompactIncremental => "compact-incremental",
        }
    }

    pub fn encoder(&self) -> EncoderKind {
        match self {
            Method::BaselineBlocking => EncoderKind::Baseline,
            _ => EncoderKind::Compact,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::all()
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {s:?} (expected one of: {})",
                    Method::all().map(|m| m.name()).join(", ")
                ))
            })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What goes into a blocking clause: the whole active set at the peak slot,
/// or a smallest prefix of it (heaviest first) that still meets the
/// incumbent peak. The smaller the set, the more schedules one cut removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockingScope {
    Witnessed,
    #[default]
    Minimized,
}

impl std::str::FromStr for BlockingScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "witnessed" => Ok(BlockingScope::Witnessed),
            "minimized" => Ok(BlockingScope::Minimized),
            other => Err(Error::InvalidArgument(format!(
                "unknown blocking scope {other:?} (expected witnessed|minimized)"
            ))),
        }
    }
}

impl std::fmt::Display for BlockingScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlockingScope::Witnessed => "witnessed",
            BlockingScope::Minimized => "minimized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Bounded warm-up: find a decent incumbent before committing to a
    /// bound structure.
    Init,
    Search,
    /// The call whose unsatisfiability certifies the final answer.
    Closing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationResult {
    Sat { peak: u64 },
    Unsat,
    TimedOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IterationLog {
    pub phase: Phase,
    /// Peak cap the solver ran under, if the method encodes one.
    pub bound_in_effect: Option<u64>,
    /// Indicator levels held false during this call (incremental method).
    pub false_indicators: Option<u64>,
    pub result: IterationResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    /// Best peak found and a closing unsatisfiable call proves nothing
    /// better exists.
    Optimal,
    /// A schedule is in hand but the run ended before the proof.
    Feasible,
    Infeasible,
    /// Ended (timed out) before any schedule was found.
    Unknown,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub sessions: u64,
    pub solve_calls: u64,
    pub clauses_added: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub method: Method,
    pub backend: BackendKind,
    pub encode: EncodeOptions,
    pub blocking: BlockingScope,
    pub seed: u64,
    pub timeout: Option<Duration>,
    /// External weighted-MaxSAT command template; `{file}` is replaced by
    /// the problem path (appended when absent). Only the maxsat method
    /// reads it.
    pub maxsat_cmd: Option<String>,
    /// Warm-up solve budget before the bound structure is committed.
    pub init_iterations: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            method: Method::CompactIncremental,
            backend: BackendKind::default(),
            encode: EncodeOptions::default(),
            blocking: BlockingScope::default(),
            seed: 0,
            timeout: None,
            maxsat_cmd: None,
            init_iterations: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeOutcome {
    pub method: Method,
    pub backend: BackendKind,
    pub status: SolveStatus,
    pub peak: Option<u64>,
    pub solution: Option<Solution>,
    pub bounds: Bounds,
    /// Whether the run ended on a machine-checked unsatisfiable call.
    pub closing_unsat: bool,
    pub iterations: Vec<IterationLog>,
    pub stats: RunStats,
}

/// Mutable context threaded through a driver: incumbent, logs, flags, and
/// aggregated solver counters.
pub(crate) struct Run<'a> {
    pub inst: &'a Instance,
    pub opts: &'a OptimizeOptions,
    pub bounds: Bounds,
    pub deadline: Option<Instant>,
    pub logs: Vec<IterationLog>,
    pub stats: RunStats,
    pub best: Option<(u64, Solution)>,
    pub closing_unsat: bool,
    pub infeasible: bool,
    pub timed_out: bool,
}

impl Run<'_> {
    pub fn log(
        &mut self,
        phase: Phase,
        bound_in_effect: Option<u64>,
        false_indicators: Option<u64>,
        result: IterationResult,
    ) {
        self.logs.push(IterationLog {
            phase,
            bound_in_effect,
            false_indicators,
            result,
        });
    }

    pub fn improve(&mut self, peak: u64, sol: Solution) {
        match &self.best {
            Some((incumbent, _)) if *incumbent <= peak => {}
            _ => self.best = Some((peak, sol)),
        }
    }

    pub fn best_peak(&self) -> u64 {
        self.best.as_ref().expect("an incumbent schedule exists").0
    }

    pub fn retire(&mut self, session: &dyn SatSession) {
        let s = session.stats();
        self.stats.sessions += 1;
        self.stats.solve_calls += s.solve_calls;
        self.stats.clauses_added += s.clauses_added;
        self.stats.conflicts += s.conflicts;
        self.stats.decisions += s.decisions;
        self.stats.propagations += s.propagations;
    }
}

/// Decode, validate, and profile one model. A model that decodes to an
/// infeasible schedule is an encoder defect and surfaces as an error.
pub(crate) fn model_schedule(enc: &Encoding, model: &[bool]) -> Result<(u64, Solution)> {
    let sol = enc.decode(model)?;
    let report = validate_solution(&enc.instance, &sol);
    if !report.is_feasible() {
        return Err(Error::Invariant(format!(
            "decoded schedule violates constraints: {:?}",
            report.violations
        )));
    }
    let profile = power_profile(&enc.instance, &sol)?;
    Ok((profile.peak, sol))
}

/// Tasks to forbid from being simultaneously active: the active set at the
/// first peak slot, optionally minimized to a heaviest prefix that still
/// reaches `threshold`. Any set of tasks whose powers sum to at least the
/// incumbent peak can never run together in a strictly better schedule, so
/// cutting it never excludes one.
pub(crate) fn witness_cut(
    inst: &Instance,
    sol: &Solution,
    threshold: u64,
    scope: BlockingScope,
) -> Result<Vec<usize>> {
    let powers = inst.powers()?;
    let profile = power_profile(inst, sol)?;
    let tau = *profile
        .peak_times
        .first()
        .ok_or_else(|| Error::Invariant("power profile has no peak slot".into()))?;
    let active: Vec<usize> = (0..inst.task_count())
        .filter(|&i| sol.start[i] <= tau && tau < sol.start[i] + inst.durations[i])
        .collect();
    match scope {
        BlockingScope::Witnessed => Ok(active),
        BlockingScope::Minimized => {
            let mut by_weight = active;
            by_weight.sort_by_key(|&i| (std::cmp::Reverse(powers[i]), i));
            let mut cut = Vec::new();
            let mut sum = 0u64;
            for i in by_weight {
                if sum >= threshold {
                    break;
                }
                cut.push(i);
                sum += powers[i];
            }
            debug_assert!(sum >= threshold, "witness must reach the peak");
            cut.sort_unstable();
            Ok(cut)
        }
    }
}

/// Forbid the cut from being co-active in any slot: one clause per slot
/// over the activity variables.
pub(crate) fn block_cut(enc: &Encoding, session: &mut dyn SatSession, cut: &[usize]) {
    for t in 0..enc.instance.cycle_time {
        let lits: Vec<Lit> = cut
            .iter()
            .map(|&i| lit(enc.vars.a(i, t).unwrap(), false))
            .collect();
        session.add_clause(&lits);
    }
}

/// Feed a live session the clauses appended to `f` since index `from`.
pub(crate) fn push_delta(session: &mut dyn SatSession, f: &CnfFormula, from: usize) {
    session.ensure_vars(f.var_count());
    for clause in &f.clauses()[from..] {
        session.add_clause(clause);
    }
}

pub(crate) enum InitEnd {
    /// Ran out of schedules early: the incumbent is already optimal.
    Proved,
    /// Budget spent; the incumbent is an upper bound.
    Exhausted,
    Infeasible,
    TimedOut,
}

/// Warm-up phase shared by the bounded methods: a short blocking descent
/// that turns the first few models into an incumbent. An unsatisfiable
/// call during warm-up is already a full optimality (or infeasibility)
/// proof, since blocking cuts never exclude a strictly better schedule.
pub(crate) fn run_init(
    run: &mut Run,
    enc: &Encoding,
    session: &mut dyn SatSession,
) -> Result<InitEnd> {
    for _ in 0..run.opts.init_iterations {
        match session.solve(run.deadline) {
            SolveOutcome::Sat(model) => {
                let (peak, sol) = model_schedule(enc, &model)?;
                run.improve(peak, sol.clone());
                run.log(Phase::Init, None, None, IterationResult::Sat { peak });
                let cut = witness_cut(run.inst, &sol, run.best_peak(), run.opts.blocking)?;
                block_cut(enc, session, &cut);
            }
            SolveOutcome::Unsat => {
                return if run.best.is_none() {
                    run.infeasible = true;
                    run.log(Phase::Init, None, None, IterationResult::Unsat);
                    Ok(InitEnd::Infeasible)
                } else {
                    run.closing_unsat = true;
                    run.log(Phase::Closing, None, None, IterationResult::Unsat);
                    Ok(InitEnd::Proved)
                };
            }
            SolveOutcome::TimedOut => {
                run.timed_out = true;
                run.log(Phase::Init, None, None, IterationResult::TimedOut);
                return Ok(InitEnd::TimedOut);
            }
        }
    }
    Ok(InitEnd::Exhausted)
}

pub fn optimize(inst: &Instance, opts: &OptimizeOptions) -> Result<OptimizeOutcome> {
    let start = Instant::now();
    let bounds = analytic_bounds(inst)?;
    let mut run = Run {
        inst,
        opts,
        bounds,
        deadline: opts.timeout.map(|d| start + d),
        logs: Vec::new(),
        stats: RunStats::default(),
        best: None,
        closing_unsat: false,
        infeasible: false,
        timed_out: false,
    };
    match opts.method {
        Method::BaselineBlocking => blocking::drive(&mut run, EncoderKind::Baseline)?,
        Method::CompactBlocking => blocking::drive(&mut run, EncoderKind::Compact)?,
        Method::CompactPb => pb::drive(&mut run)?,
        Method::CompactMaxsat => maxsat::drive(&mut run)?,
        Method::CompactIncremental => incremental::drive(&mut run)?,
    }
    let status = if run.infeasible {
        SolveStatus::Infeasible
    } else if run.closing_unsat && run.best.is_some() {
        SolveStatus::Optimal
    } else if run.best.is_some() {
        SolveStatus::Feasible
    } else {
        SolveStatus::Unknown
    };
    let mut stats = run.stats;
    stats.wall_ms = start.elapsed().as_millis() as u64;
    let (peak, solution) = match run.best {
        Some((p, s)) => (Some(p), Some(s)),
        None => (None, None),
    };
    Ok(OptimizeOutcome {
        method: opts.method,
        backend: opts.backend,
        status,
        peak,
        solution,
        bounds,
        closing_unsat: run.closing_unsat,
        iterations: run.logs,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_instance, worked_example};
    use crate::oracle::{oracle_optimum, OracleResult};

    fn opts(method: Method) -> OptimizeOptions {
        OptimizeOptions {
            method,
            ..OptimizeOptions::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::all() {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("pairwise".parse::<Method>().is_err());
    }

    #[test]
    fn every_method_solves_the_worked_example_to_the_oracle_optimum() {
        let inst = worked_example();
        let OracleResult::Optimal { peak: expect, .. } =
            oracle_optimum(&inst, &Default::default()).unwrap()
        else {
            panic!("worked example is feasible");
        };
        for method in Method::all() {
            let out = optimize(&inst, &opts(method)).unwrap();
            assert_eq!(out.status, SolveStatus::Optimal, "{method}");
            assert_eq!(out.peak, Some(expect), "{method}");
            assert!(out.closing_unsat, "{method}");
            let sol = out.solution.expect("optimal run carries a schedule");
            assert!(validate_solution(&inst, &sol).is_feasible(), "{method}");
            assert_eq!(
                power_profile(&inst, &sol).unwrap().peak,
                expect,
                "{method}"
            );
        }
    }

    #[test]
    fn every_method_agrees_with_the_oracle_on_random_instances() {
        for case in 0..25u64 {
            let n = 2 + (case % 5) as usize;
            let m = 1 + (case % 3) as usize;
            let c = 3 + (case % 5) as u32;
            let inst = random_instance("fuzz", n, m, c, 0.4, (1, 9), 1000 + case);
            let expect = match oracle_optimum(&inst, &Default::default()).unwrap() {
                OracleResult::Optimal { peak, .. } => Some(peak),
                OracleResult::Infeasible => None,
            };
            for method in Method::all() {
                let out = optimize(&inst, &opts(method)).unwrap();
                match expect {
                    Some(peak) => {
                        assert_eq!(out.status, SolveStatus::Optimal, "case {case} {method}");
                        assert_eq!(out.peak, Some(peak), "case {case} {method}");
                        assert!(out.closing_unsat, "case {case} {method}");
                    }
                    None => {
                        assert_eq!(out.status, SolveStatus::Infeasible, "case {case} {method}");
                        assert_eq!(out.peak, None, "case {case} {method}");
                    }
                }
            }
        }
    }

    #[test]
    fn witnessed_scope_matches_minimized_results() {
        let inst = worked_example();
        let mut witnessed = opts(Method::CompactBlocking);
        witnessed.blocking = BlockingScope::Witnessed;
        let a = optimize(&inst, &witnessed).unwrap();
        let b = optimize(&inst, &opts(Method::CompactBlocking)).unwrap();
        assert_eq!(a.peak, b.peak);
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
    }

    #[test]
    fn timeout_reports_without_a_proof() {
        // Feasible by construction: twelve 2-slot tasks, three stations of
        // ten slots. The expired deadline halts the very first solve call.
        let inst = crate::instance::Instance::new(
            "slow",
            3,
            10,
            vec![2; 12],
            Some((0..12).map(|i| i % 10 + 1).collect()),
            vec![],
        )
        .unwrap();
        let mut o = opts(Method::CompactIncremental);
        o.timeout = Some(Duration::from_millis(0));
        let out = optimize(&inst, &o).unwrap();
        assert!(matches!(
            out.status,
            SolveStatus::Unknown | SolveStatus::Feasible
        ));
        assert!(!out.closing_unsat);
        assert!(out
            .iterations
            .iter()
            .any(|l| l.result == IterationResult::TimedOut));
    }

    #[test]
    fn incremental_logs_expose_the_bound_derivation() {
        let inst = worked_example();
        let out = optimize(&inst, &opts(Method::CompactIncremental)).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        let w0 = out
            .iterations
            .iter()
            .filter_map(|l| match (l.phase, l.result) {
                (Phase::Init, IterationResult::Sat { peak }) => Some(peak),
                _ => None,
            })
            .min()
            .expect("warm-up found a schedule");
        for l in &out.iterations {
            let Some(f) = l.false_indicators else { continue };
            let bound = l.bound_in_effect.expect("indicator entries carry a bound");
            assert_eq!(bound, w0 - f, "bound must equal ceiling minus false levels");
            if let IterationResult::Sat { peak } = l.result {
                assert!(peak <= bound);
            }
        }
    }
}
