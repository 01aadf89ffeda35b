//! SAT encodings of the balancing problem. Two encoders share one variable
//! layout and differ in how exactly-one, ordering, and precedence structure
//! are expressed:
//!
//! * [`EncoderKind::Baseline`] uses pairwise at-most-one constraints and
//!   explicit per-pair precedence clauses.
//! * [`EncoderKind::Compact`] replaces the quadratic families with linear
//!   reachability ladders over stations and start times.
//!
//! Assignment (`x`) and start (`s`) variables are always allocated over
//! their full ranges, so models of both encoders project onto the same
//! grid; window pruning adds explicit falsifying units instead of shrinking
//! the tables. Activity (`a`) variables are one-sided: clauses force them
//! true wherever a task runs, and nothing forces them false, which is sound
//! for peak reasoning because every schedule extends to the minimal
//! activity assignment.

use std::collections::BTreeMap;

use crate::cnf::{lit, ClauseOutcome, CnfFormula, Lit, Var};
use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};
use crate::precedence::Preprocessed;
use crate::varmap::VarMap;

mod baseline;
mod compact;
pub mod peak;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncoderKind {
    Baseline,
    #[default]
    Compact,
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(EncoderKind::Baseline),
            "compact" => Ok(EncoderKind::Compact),
            other => Err(Error::InvalidArgument(format!(
                "unknown encoder {other:?} (expected baseline|compact)"
            ))),
        }
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncoderKind::Baseline => "baseline",
            EncoderKind::Compact => "compact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Emit station/start window units and station-conditional start
    /// pruning, and narrow the compact reachability ladders to the windows.
    pub pruning: bool,
    /// Emit per-pair precedence families over the transitive closure
    /// instead of the direct edges (the closure pairs are implied either
    /// way; emitting them is a propagation aid).
    pub extended_edges: bool,
    /// Force activity variables true on the slots a task must occupy in
    /// every schedule (tasks longer than half the cycle).
    pub mandatory_activity: bool,
    /// Allocate start variables across the whole cycle and pin the tail
    /// beyond the latest feasible start false.
    pub emit_window_units: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            pruning: true,
            extended_edges: false,
            mandatory_activity: false,
            emit_window_units: false,
        }
    }
}

/// Clause families, named by what each one forbids or forces. Encoding
/// statistics are reported per family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClauseFamily {
    // Shared between encoders.
    ActivityLink,
    NonOverlap,
    MandatoryActivity,
    StationWindowUnit,
    StartBoundUnit,
    StartPrune,
    StartWindowUnit,
    // Baseline families.
    StationAlo,
    StationAmo,
    StationPrecedence,
    SameStationOrder,
    StartAlo,
    StartAmo,
    // Compact station ladder.
    ReachInit,
    ReachMono,
    AssignImpliesReach,
    AssignExcludesPrevReach,
    ReachStepForcesAssign,
    ReachAlo,
    // Compact start-time ladder.
    StartReachInit,
    StartReachMono,
    StartImpliesReach,
    StartExcludesPrevReach,
    ReachStepForcesStart,
    StartReachFinal,
    // Compact precedence.
    ReachPrecedence,
    SameStationReach,
    // Peak bounding layers.
    PeakLevelUnit,
    PeakLevelOrder,
    PeakSlotBound,
}

impl ClauseFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ClauseFamily::ActivityLink => "activity-link",
            ClauseFamily::NonOverlap => "non-overlap",
            ClauseFamily::MandatoryActivity => "mandatory-activity",
            ClauseFamily::StationWindowUnit => "station-window-unit",
            ClauseFamily::StartBoundUnit => "start-bound-unit",
            ClauseFamily::StartPrune => "start-prune",
            ClauseFamily::StartWindowUnit => "start-window-unit",
            ClauseFamily::StationAlo => "station-alo",
            ClauseFamily::StationAmo => "station-amo",
            ClauseFamily::StationPrecedence => "station-precedence",
            ClauseFamily::SameStationOrder => "same-station-order",
            ClauseFamily::StartAlo => "start-alo",
            ClauseFamily::StartAmo => "start-amo",
            ClauseFamily::ReachInit => "reach-init",
            ClauseFamily::ReachMono => "reach-mono",
            ClauseFamily::AssignImpliesReach => "assign-implies-reach",
            ClauseFamily::AssignExcludesPrevReach => "assign-excludes-prev-reach",
            ClauseFamily::ReachStepForcesAssign => "reach-step-forces-assign",
            ClauseFamily::ReachAlo => "reach-alo",
            ClauseFamily::StartReachInit => "start-reach-init",
            ClauseFamily::StartReachMono => "start-reach-mono",
            ClauseFamily::StartImpliesReach => "start-implies-reach",
            ClauseFamily::StartExcludesPrevReach => "start-excludes-prev-reach",
            ClauseFamily::ReachStepForcesStart => "reach-step-forces-start",
            ClauseFamily::StartReachFinal => "start-reach-final",
            ClauseFamily::ReachPrecedence => "reach-precedence",
            ClauseFamily::SameStationReach => "same-station-reach",
            ClauseFamily::PeakLevelUnit => "peak-level-unit",
            ClauseFamily::PeakLevelOrder => "peak-level-order",
            ClauseFamily::PeakSlotBound => "peak-slot-bound",
        }
    }
}

impl std::fmt::Display for ClauseFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default)]
pub struct EncodingStats {
    pub families: BTreeMap<ClauseFamily, u64>,
    /// Clauses and variables from pseudo-Boolean compilation in peak layers.
    pub pb_clauses: u64,
    pub pb_aux_vars: u64,
}

impl EncodingStats {
    pub fn family(&self, family: ClauseFamily) -> u64 {
        self.families.get(&family).copied().unwrap_or(0)
    }

    pub fn family_total(&self) -> u64 {
        self.families.values().sum()
    }

    pub fn by_name(&self) -> BTreeMap<&'static str, u64> {
        self.families.iter().map(|(f, &n)| (f.name(), n)).collect()
    }
}

/// Clause term that may be constant: `True` satisfies the clause (nothing
/// is emitted), `False` drops out of it.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Term {
    L(Lit),
    True,
    False,
}

pub(crate) fn push(
    f: &mut CnfFormula,
    stats: &mut EncodingStats,
    family: ClauseFamily,
    terms: &[Term],
) {
    let mut lits: Vec<Lit> = Vec::with_capacity(terms.len());
    for &t in terms {
        match t {
            Term::True => return,
            Term::False => {}
            Term::L(l) => lits.push(l),
        }
    }
    let outcome = f.add_clause(&lits);
    debug_assert_ne!(outcome, ClauseOutcome::Tautology, "{family:?}");
    *stats.families.entry(family).or_insert(0) += 1;
}

/// Effective per-task ranges after (optional) window pruning; inclusive.
/// `broken` marks a task whose windows are empty: the instance cannot be
/// scheduled, an empty clause records that, and the task falls back to
/// full ranges so the surrounding structure stays well-formed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TaskRanges {
    pub station_lo: usize,
    pub station_hi: usize,
    pub time_lo: u32,
    pub time_hi: u32,
    pub broken: bool,
}

fn full_ranges(inst: &Instance, i: usize, broken: bool) -> TaskRanges {
    TaskRanges {
        station_lo: 0,
        station_hi: inst.station_count - 1,
        time_lo: 0,
        time_hi: inst.cycle_time - inst.durations[i],
        broken,
    }
}

pub(crate) fn task_ranges(inst: &Instance, pre: &Preprocessed, pruning: bool) -> Vec<TaskRanges> {
    let n = inst.task_count();
    if !pruning {
        return (0..n).map(|i| full_ranges(inst, i, false)).collect();
    }
    (0..n)
        .map(|i| {
            let Some(stations) = pre.windows.range0(i) else {
                return full_ranges(inst, i, true);
            };
            let (lo, hi) = (*stations.start(), *stations.end());
            let time_lo = (lo..=hi).map(|k| pre.temporal.est[i][k]).min().unwrap();
            let time_hi_raw = (lo..=hi).map(|k| pre.temporal.lst[i][k]).max().unwrap();
            let cap = (inst.cycle_time - inst.durations[i]) as i64;
            let time_hi = time_hi_raw.min(cap);
            if time_hi < time_lo as i64 {
                return full_ranges(inst, i, true);
            }
            TaskRanges {
                station_lo: lo,
                station_hi: hi,
                time_lo,
                time_hi: time_hi as u32,
                broken: false,
            }
        })
        .collect()
}

/// A complete base encoding: feasibility only, no peak bound. Peak layers
/// are stacked on top by the optimization drivers.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub instance: Instance,
    pub kind: EncoderKind,
    pub options: EncodeOptions,
    pub formula: CnfFormula,
    pub vars: VarMap,
    pub stats: EncodingStats,
}

impl Encoding {
    /// Variables a model is projected onto for comparison and enumeration:
    /// the full assignment grid, then every in-window start variable, in a
    /// fixed order shared by both encoders.
    pub fn projection_vars(&self) -> Vec<Var> {
        let inst = &self.instance;
        let mut out = Vec::new();
        for i in 0..inst.task_count() {
            for k in 0..inst.station_count {
                out.push(self.vars.x(i, k).expect("assignment grid is dense"));
            }
        }
        for i in 0..inst.task_count() {
            for t in inst.start_window(i) {
                out.push(self.vars.s(i, t).expect("start window is dense"));
            }
        }
        out
    }

    /// Decode a projected model row (bits in [`Self::projection_vars`]
    /// order) into a schedule.
    pub fn decode_projection(&self, bits: &[bool]) -> Result<Solution> {
        let mut model = vec![false; self.formula.var_count() as usize + 1];
        for (&v, &b) in self.projection_vars().iter().zip(bits) {
            model[v as usize] = b;
        }
        self.decode(&model)
    }

    /// Read the schedule out of a model: exactly one assignment and one
    /// start per task, anything else is an encoder defect.
    pub fn decode(&self, model: &[bool]) -> Result<Solution> {
        let inst = &self.instance;
        let mut assignment = Vec::with_capacity(inst.task_count());
        let mut start = Vec::with_capacity(inst.task_count());
        for i in 0..inst.task_count() {
            let stations: Vec<usize> = (0..inst.station_count)
                .filter(|&k| model[self.vars.x(i, k).unwrap() as usize])
                .collect();
            let [station] = stations[..] else {
                return Err(Error::Invariant(format!(
                    "task {} has {} true assignment variables",
                    i + 1,
                    stations.len()
                )));
            };
            let starts: Vec<u32> = inst
                .start_window(i)
                .filter(|&t| model[self.vars.s(i, t).unwrap() as usize])
                .collect();
            let [at] = starts[..] else {
                return Err(Error::Invariant(format!(
                    "task {} has {} true start variables",
                    i + 1,
                    starts.len()
                )));
            };
            assignment.push(station);
            start.push(at);
        }
        Ok(Solution { assignment, start })
    }
}

pub fn encode(inst: &Instance, kind: EncoderKind, options: EncodeOptions) -> Result<Encoding> {
    match kind {
        EncoderKind::Baseline => baseline::encode(inst, options),
        EncoderKind::Compact => compact::encode(inst, options),
    }
}

/// Shared scaffolding both encoders build on.
pub(crate) struct Shared {
    pub pre: Preprocessed,
    pub ranges: Vec<TaskRanges>,
    pub formula: CnfFormula,
    pub vars: VarMap,
    pub stats: EncodingStats,
}

impl Shared {
    /// Allocate the common variable tables (assignment grid, start
    /// variables, activity variables) and record broken windows.
    pub fn build(inst: &Instance, options: EncodeOptions) -> Result<Shared> {
        let pre = Preprocessed::build(inst)?;
        let ranges = task_ranges(inst, &pre, options.pruning);
        let mut formula = CnfFormula::new();
        let mut vars = VarMap::new(inst.task_count(), inst.station_count, inst.cycle_time);
        for i in 0..inst.task_count() {
            for k in 0..inst.station_count {
                vars.alloc_x(&mut formula, i, k);
            }
        }
        for i in 0..inst.task_count() {
            let hi = if options.emit_window_units {
                inst.cycle_time - 1
            } else {
                inst.cycle_time - inst.durations[i]
            };
            for t in 0..=hi {
                vars.alloc_s(&mut formula, i, t);
            }
        }
        for i in 0..inst.task_count() {
            for t in 0..inst.cycle_time {
                vars.alloc_a(&mut formula, i, t);
            }
        }
        if ranges.iter().any(|r| r.broken) {
            // Empty window: no schedule exists. Record it as an empty
            // clause so every solve on this encoding reports unsat.
            formula.add_clause(&[]);
        }
        Ok(Shared {
            pre,
            ranges,
            formula,
            vars,
            stats: EncodingStats::default(),
        })
    }

    pub fn neg_x(&self, i: usize, k: usize) -> Term {
        Term::L(lit(self.vars.x(i, k).unwrap(), false))
    }

    pub fn pos_x(&self, i: usize, k: usize) -> Term {
        Term::L(lit(self.vars.x(i, k).unwrap(), true))
    }

    pub fn neg_s(&self, i: usize, t: u32) -> Term {
        Term::L(lit(self.vars.s(i, t).unwrap(), false))
    }

    pub fn pos_s(&self, i: usize, t: u32) -> Term {
        Term::L(lit(self.vars.s(i, t).unwrap(), true))
    }

    pub fn neg_a(&self, i: usize, t: u32) -> Term {
        Term::L(lit(self.vars.a(i, t).unwrap(), false))
    }

    pub fn pos_a(&self, i: usize, t: u32) -> Term {
        Term::L(lit(self.vars.a(i, t).unwrap(), true))
    }

    /// Start-to-activity coupling: a task starting at t occupies every
    /// slot of its duration.
    pub fn emit_activity_link(&mut self, inst: &Instance) {
        for i in 0..inst.task_count() {
            for t in inst.start_window(i) {
                for offset in 0..inst.durations[i] {
                    let terms = [self.neg_s(i, t), self.pos_a(i, t + offset)];
                    push(
                        &mut self.formula,
                        &mut self.stats,
                        ClauseFamily::ActivityLink,
                        &terms,
                    );
                }
            }
        }
    }

    /// Window pruning: explicit falsifying units outside the station and
    /// start windows, then station-conditional start pruning inside them.
    /// The units are load-bearing: assignment and start variables are
    /// allocated over full ranges, so out-of-window slots must be pinned
    /// false explicitly.
    pub fn emit_pruning(&mut self, inst: &Instance) {
        for i in 0..inst.task_count() {
            let r = self.ranges[i];
            if r.broken {
                continue;
            }
            for k in 0..inst.station_count {
                if k < r.station_lo || k > r.station_hi {
                    let terms = [self.neg_x(i, k)];
                    push(
                        &mut self.formula,
                        &mut self.stats,
                        ClauseFamily::StationWindowUnit,
                        &terms,
                    );
                }
            }
            for t in inst.start_window(i) {
                if t < r.time_lo || t > r.time_hi {
                    let terms = [self.neg_s(i, t)];
                    push(
                        &mut self.formula,
                        &mut self.stats,
                        ClauseFamily::StartBoundUnit,
                        &terms,
                    );
                }
            }
            for k in r.station_lo..=r.station_hi {
                for t in r.time_lo..=r.time_hi {
                    if self.pre.temporal.ip(i, k, t) {
                        let terms = [self.neg_x(i, k), self.neg_s(i, t)];
                        push(
                            &mut self.formula,
                            &mut self.stats,
                            ClauseFamily::StartPrune,
                            &terms,
                        );
                    }
                }
            }
        }
    }

    /// Optional: starts beyond the feasible window, when those variables
    /// are allocated at all, are pinned false.
    pub fn emit_start_window_units(&mut self, inst: &Instance) {
        for i in 0..inst.task_count() {
            for t in (inst.cycle_time - inst.durations[i] + 1)..inst.cycle_time {
                let terms = [self.neg_s(i, t)];
                push(
                    &mut self.formula,
                    &mut self.stats,
                    ClauseFamily::StartWindowUnit,
                    &terms,
                );
            }
        }
    }

    /// Optional: a task longer than half the cycle is active in the middle
    /// slots no matter where it starts.
    pub fn emit_mandatory_activity(&mut self, inst: &Instance) {
        for i in 0..inst.task_count() {
            let t_i = inst.durations[i];
            if 2 * t_i <= inst.cycle_time {
                continue;
            }
            for t in (inst.cycle_time - t_i)..t_i {
                let terms = [self.pos_a(i, t)];
                push(
                    &mut self.formula,
                    &mut self.stats,
                    ClauseFamily::MandatoryActivity,
                    &terms,
                );
            }
        }
    }

    /// Two tasks on one station cannot both be active in the same slot.
    /// `pairs` selects which unordered task pairs get the family.
    pub fn emit_non_overlap(&mut self, inst: &Instance, pairs: &[(usize, usize)]) {
        for &(i, j) in pairs {
            let (ri, rj) = (self.ranges[i], self.ranges[j]);
            let lo = ri.station_lo.max(rj.station_lo);
            let hi = ri.station_hi.min(rj.station_hi);
            for k in lo..=hi {
                for t in 0..inst.cycle_time {
                    let terms = [
                        self.neg_x(i, k),
                        self.neg_x(j, k),
                        self.neg_a(i, t),
                        self.neg_a(j, t),
                    ];
                    push(
                        &mut self.formula,
                        &mut self.stats,
                        ClauseFamily::NonOverlap,
                        &terms,
                    );
                }
            }
        }
    }

    /// The precedence pairs a per-pair family ranges over: direct edges by
    /// default, the transitive closure with extended edges.
    pub fn family_edges(&self, inst: &Instance, options: EncodeOptions) -> Vec<(usize, usize)> {
        if options.extended_edges {
            self.pre.closure.closed_edges.clone()
        } else {
            inst.edges().to_vec()
        }
    }

    pub fn finish(self, inst: &Instance, kind: EncoderKind, options: EncodeOptions) -> Encoding {
        let mut vars = self.vars;
        vars.absorb_aux(&self.formula);
        assert_eq!(vars.mapped_vars(), self.formula.var_count());
        Encoding {
            instance: inst.clone(),
            kind,
            options,
            formula: self.formula,
            vars,
            stats: self.stats,
        }
    }
}
