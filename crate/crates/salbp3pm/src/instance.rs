//! Problem instances, schedules, and schedule-level analysis.
//!
//! An [`Instance`] fixes the task set (durations, optional powers), the
//! station count `m`, the cycle time `c`, and an acyclic precedence
//! relation. A [`Solution`] assigns each task a station and a start time;
//! [`validate_solution`] checks it against every feasibility constraint
//! class, [`power_profile`] computes the instantaneous power load per time
//! slot, and [`analytic_bounds`] gives closed-form bounds on the optimal
//! peak.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A problem instance. Tasks are indexed `0..n` internally; input and
/// output formats use 1-based ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Number of stations `m` (>= 1).
    pub station_count: usize,
    /// Cycle time `c` (>= 1): every task must finish by `c`.
    pub cycle_time: u32,
    /// Per-task durations, `1 <= t[i] <= c`.
    pub durations: Vec<u32>,
    /// Per-task power demands (`>= 1`). Absent for formats that carry no
    /// power data; supply via [`generate_powers`] before solving.
    pub powers: Option<Vec<u64>>,
    /// Direct precedence pairs `(i, j)` = task i completes before j starts
    /// (0-based, sorted, deduplicated, acyclic).
    edges: Vec<(usize, usize)>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        station_count: usize,
        cycle_time: u32,
        durations: Vec<u32>,
        powers: Option<Vec<u64>>,
        mut edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = durations.len();
        if n == 0 {
            return Err(Error::InvalidInstance("no tasks".into()));
        }
        if station_count == 0 {
            return Err(Error::InvalidInstance("station count must be >= 1".into()));
        }
        if cycle_time == 0 {
            return Err(Error::InvalidInstance("cycle time must be >= 1".into()));
        }
        for (i, &t) in durations.iter().enumerate() {
            if t == 0 || t > cycle_time {
                return Err(Error::InvalidInstance(format!(
                    "task {} duration {} outside [1, {}]",
                    i + 1,
                    t,
                    cycle_time
                )));
            }
        }
        if let Some(w) = &powers {
            if w.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "{} powers for {} tasks",
                    w.len(),
                    n
                )));
            }
            if let Some(i) = w.iter().position(|&x| x == 0) {
                return Err(Error::InvalidInstance(format!(
                    "task {} power must be >= 1",
                    i + 1
                )));
            }
        }
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInstance(format!(
                    "precedence pair ({}, {}) references a task outside 1..={}",
                    i + 1,
                    j + 1,
                    n
                )));
            }
            if i == j {
                return Err(Error::InvalidInstance(format!(
                    "self-loop on task {}",
                    i + 1
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let inst = Instance {
            name: name.into(),
            station_count,
            cycle_time,
            durations,
            powers,
            edges,
        };
        if inst.topological_order().is_none() {
            return Err(Error::InvalidInstance("precedence graph is cyclic".into()));
        }
        Ok(inst)
    }

    pub fn task_count(&self) -> usize {
        self.durations.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Feasible start times for task `i`: `0 ..= c - t[i]`.
    pub fn start_window(&self, i: usize) -> std::ops::RangeInclusive<u32> {
        0..=self.cycle_time - self.durations[i]
    }

    pub fn powers(&self) -> Result<&[u64]> {
        self.powers
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("instance has no power data".into()))
    }

    pub fn with_powers(mut self, powers: Vec<u64>) -> Result<Self> {
        if powers.len() != self.task_count() {
            return Err(Error::InvalidArgument(format!(
                "{} powers for {} tasks",
                powers.len(),
                self.task_count()
            )));
        }
        if powers.contains(&0) {
            return Err(Error::InvalidArgument("powers must be >= 1".into()));
        }
        self.powers = Some(powers);
        Ok(self)
    }

    /// Tasks in a topological order of the precedence DAG, or `None` if the
    /// edge set contains a cycle (ruled out by the constructor).
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.task_count();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            indeg[j] += 1;
            succ[i].push(j);
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        queue.reverse();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn direct_predecessors(&self, task: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, j)| j == task)
            .map(|&(i, _)| i)
            .collect()
    }
}

/// A schedule: per-task station (0-based) and start time. Plain data;
/// feasibility is established separately by [`validate_solution`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: Vec<usize>,
    pub start: Vec<u32>,
}

/// Instantaneous power load per time slot, with the peak and every slot
/// achieving it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub loads: Vec<u64>,
    pub peak: u64,
    pub peak_times: Vec<u32>,
}

/// Closed-form bounds on the optimal peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: u64,
    pub upper: u64,
}

/// One feasibility violation. Task ids are 0-based; `Display` renders them
/// 1-based to match the input formats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    StationRange { task: usize, station: usize },
    StartWindow { task: usize, start: u32 },
    CycleTime { task: usize, end: u64 },
    Overlap { first: usize, second: usize },
    Precedence { before: usize, after: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Violation::StationRange { task, station } => {
                write!(f, "task {} assigned to invalid station {}", task + 1, station + 1)
            }
            Violation::StartWindow { task, start } => {
                write!(f, "task {} starts at {} outside its window", task + 1, start)
            }
            Violation::CycleTime { task, end } => {
                write!(f, "task {} ends at {} past the cycle time", task + 1, end)
            }
            Violation::Overlap { first, second } => {
                write!(f, "tasks {} and {} overlap on a shared station", first + 1, second + 1)
            }
            Violation::Precedence { before, after } => {
                write!(f, "precedence {} -> {} violated", before + 1, after + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a schedule against every constraint class: station range, start
/// window, cycle-time completion, same-station non-overlap, and precedence.
/// Reports every violation rather than stopping at the first.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> ValidationReport {
    let n = inst.task_count();
    assert_eq!(sol.assignment.len(), n, "assignment length mismatch");
    assert_eq!(sol.start.len(), n, "start length mismatch");
    let mut violations = Vec::new();
    for i in 0..n {
        if sol.assignment[i] >= inst.station_count {
            violations.push(Violation::StationRange {
                task: i,
                station: sol.assignment[i],
            });
        }
        if !inst.start_window(i).contains(&sol.start[i]) {
            violations.push(Violation::StartWindow {
                task: i,
                start: sol.start[i],
            });
        }
        let end = sol.start[i] as u64 + inst.durations[i] as u64;
        if end > inst.cycle_time as u64 {
            violations.push(Violation::CycleTime { task: i, end });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if sol.assignment[i] != sol.assignment[j] {
                continue;
            }
            let (si, ei) = (sol.start[i] as u64, sol.start[i] as u64 + inst.durations[i] as u64);
            let (sj, ej) = (sol.start[j] as u64, sol.start[j] as u64 + inst.durations[j] as u64);
            if si < ej && sj < ei {
                violations.push(Violation::Overlap { first: i, second: j });
            }
        }
    }
    for &(i, j) in inst.edges() {
        let ok = if sol.assignment[i] < sol.assignment[j] {
            true
        } else if sol.assignment[i] == sol.assignment[j] {
            sol.start[i] as u64 + inst.durations[i] as u64 <= sol.start[j] as u64
        } else {
            false
        };
        if !ok {
            violations.push(Violation::Precedence { before: i, after: j });
        }
    }
    ValidationReport { violations }
}

/// Sum the powers of the tasks active in each time slot. Task `i` is active
/// in slots `start[i] .. start[i] + t[i]`. Requires power data and starts
/// inside their windows (so slot indexing cannot overflow the horizon).
pub fn power_profile(inst: &Instance, sol: &Solution) -> Result<PowerProfile> {
    let powers = inst.powers()?;
    let n = inst.task_count();
    if sol.assignment.len() != n || sol.start.len() != n {
        return Err(Error::InvalidArgument("solution shape mismatch".into()));
    }
    let c = inst.cycle_time as usize;
    let mut loads = vec![0u64; c];
    for (i, &power) in powers.iter().enumerate() {
        if !inst.start_window(i).contains(&sol.start[i]) {
            return Err(Error::InvalidArgument(format!(
                "task {} start {} outside its window",
                i + 1,
                sol.start[i]
            )));
        }
        let s = sol.start[i] as usize;
        for slot in loads.iter_mut().skip(s).take(inst.durations[i] as usize) {
            *slot += power;
        }
    }
    let peak = loads.iter().copied().max().unwrap_or(0);
    let peak_times = (0..c as u32).filter(|&t| loads[t as usize] == peak).collect();
    Ok(PowerProfile {
        loads,
        peak,
        peak_times,
    })
}

/// Closed-form peak bounds:
/// lower = max(max_i w_i, ceil(sum_i w_i * t_i / c)), the larger of the
/// heaviest single task and the average-load (energy) bound;
/// upper = sum of the min(m, n) largest powers, since at most one task per
/// station runs at any instant.
pub fn analytic_bounds(inst: &Instance) -> Result<Bounds> {
    let powers = inst.powers()?;
    let max_power = powers.iter().copied().max().unwrap_or(0);
    let energy: u64 = powers
        .iter()
        .zip(&inst.durations)
        .map(|(&w, &t)| w * t as u64)
        .sum();
    let c = inst.cycle_time as u64;
    let lower = max_power.max(energy.div_ceil(c));
    let mut sorted = powers.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let upper = sorted
        .iter()
        .take(inst.station_count.min(inst.task_count()))
        .sum();
    Ok(Bounds { lower, upper })
}

/// Draw per-task powers uniformly from `lo..=hi` with a deterministic
/// stream: the same `(seed, lo, hi, n)` always yields the same vector on
/// every platform.
pub fn generate_powers(inst: &Instance, seed: u64, lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "power range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..inst.task_count())
        .map(|_| rng.random_range(lo..=hi))
        .collect())
}

/// Input formats. The `.alb`-style precedence files used by the public
/// balancing data sets carry neither station count nor cycle time, so the
/// selector supplies them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Native,
    Alb {
        station_count: usize,
        cycle_time: u32,
    },
}

/// Parse an instance.
///
/// Native format (line-oriented, `#` starts a comment line):
/// ```text
/// n m c
/// t_1 .. t_n
/// w_1 .. w_n     (or `?` when power data is absent)
/// i j            (1-based direct precedence pairs, one per line)
/// -1 -1
/// ```
///
/// Alb format: first line `n`, then `n` duration lines, then `i,j` pairs
/// terminated by `-1,-1`. Powers are absent and must be generated.
pub fn parse_instance(source: &str, format: InstanceFormat) -> Result<Instance> {
    match format {
        InstanceFormat::Native => parse_native(source),
        InstanceFormat::Alb {
            station_count,
            cycle_time,
        } => parse_alb(source, station_count, cycle_time),
    }
}

/// Lines that carry data: skips blanks and `#` comments, keeps 1-based line
/// numbers for error reporting.
fn data_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

fn parse_ints(line: &str, lineno: usize) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| Error::parse(lineno, format!("expected integer, found {tok:?}")))
        })
        .collect()
}

fn parse_native(source: &str) -> Result<Instance> {
    let mut lines = data_lines(source);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header line `n m c`"))?;
    let header = parse_ints(header, lineno)?;
    let [n, m, c] = header[..] else {
        return Err(Error::parse(lineno, "header must be exactly `n m c`"));
    };
    if n < 1 || m < 1 || c < 1 {
        return Err(Error::parse(lineno, "n, m, c must all be >= 1"));
    }
    let n = n as usize;

    let (lineno, durations) = lines
        .next()
        .ok_or_else(|| Error::parse(lineno, "missing durations line"))?;
    let durations = parse_ints(durations, lineno)?;
    if durations.len() != n {
        return Err(Error::parse(
            lineno,
            format!("expected {} durations, found {}", n, durations.len()),
        ));
    }
    if durations.iter().any(|&t| t < 1 || t > c) {
        return Err(Error::parse(lineno, "durations must lie in [1, c]"));
    }
    let durations: Vec<u32> = durations.into_iter().map(|t| t as u32).collect();

    let (lineno, power_line) = lines
        .next()
        .ok_or_else(|| Error::parse(lineno, "missing powers line"))?;
    let tokens: Vec<&str> = power_line.split_whitespace().collect();
    let powers = if tokens.iter().all(|&t| t == "?") {
        if tokens.len() != 1 && tokens.len() != n {
            return Err(Error::parse(
                lineno,
                format!("expected {n} `?` placeholders or a single `?`"),
            ));
        }
        None
    } else if tokens.contains(&"?") {
        return Err(Error::parse(
            lineno,
            "powers must be all integers or all `?` placeholders",
        ));
    } else {
        let values = parse_ints(power_line, lineno)?;
        if values.len() != n {
            return Err(Error::parse(
                lineno,
                format!("expected {} powers, found {}", n, values.len()),
            ));
        }
        if values.iter().any(|&w| w < 1) {
            return Err(Error::parse(lineno, "powers must be >= 1"));
        }
        Some(values.into_iter().map(|w| w as u64).collect())
    };

    let edges = parse_edge_list(&mut lines, n, parse_ints)?;
    Instance::new("unnamed", m as usize, c as u32, durations, powers, edges)
}

fn parse_alb(source: &str, station_count: usize, cycle_time: u32) -> Result<Instance> {
    let mut lines = data_lines(source);
    let (lineno, first) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing task-count line"))?;
    let header = parse_ints(first, lineno)?;
    let [n] = header[..] else {
        return Err(Error::parse(lineno, "first line must be the task count"));
    };
    if n < 1 {
        return Err(Error::parse(lineno, "task count must be >= 1"));
    }
    let n = n as usize;
    let mut durations = Vec::with_capacity(n);
    let mut last_line = lineno;
    for _ in 0..n {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::parse(last_line, "missing duration line"))?;
        let values = parse_ints(line, lineno)?;
        let [t] = values[..] else {
            return Err(Error::parse(lineno, "expected one duration per line"));
        };
        if t < 1 {
            return Err(Error::parse(lineno, "durations must be >= 1"));
        }
        durations.push(t as u32);
        last_line = lineno;
    }
    let edges = parse_edge_list(&mut lines, n, |line, lineno| {
        line.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::parse(lineno, format!("expected integer, found {tok:?}")))
            })
            .collect()
    })?;
    Instance::new("unnamed", station_count, cycle_time, durations, None, edges)
}

/// Shared edge-list reader: `(i, j)` pairs, 1-based, terminated by
/// `(-1, -1)`. The token shape per line is format-specific.
fn parse_edge_list<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    n: usize,
    split: impl Fn(&'a str, usize) -> Result<Vec<i64>>,
) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    let mut terminated = false;
    let mut last_line = 0;
    for (lineno, line) in lines.by_ref() {
        last_line = lineno;
        let pair = split(line, lineno)?;
        let [i, j] = pair[..] else {
            return Err(Error::parse(lineno, "expected a precedence pair `i j`"));
        };
        if (i, j) == (-1, -1) {
            terminated = true;
            break;
        }
        if i < 1 || j < 1 || i as usize > n || j as usize > n {
            return Err(Error::parse(
                lineno,
                format!("precedence pair ({i}, {j}) outside 1..={n}"),
            ));
        }
        edges.push((i as usize - 1, j as usize - 1));
    }
    if !terminated {
        return Err(Error::parse(
            last_line + 1,
            "edge list not terminated by `-1 -1`",
        ));
    }
    if let Some((lineno, line)) = lines.next() {
        return Err(Error::parse(
            lineno,
            format!("unexpected content after edge terminator: {line:?}"),
        ));
    }
    Ok(edges)
}

/// Render an instance in the native format. Output is byte-stable for a
/// given instance, so written corpora diff cleanly.
pub fn write_native(inst: &Instance) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    if !inst.name.is_empty() {
        writeln!(out, "# {}", inst.name).unwrap();
    }
    writeln!(
        out,
        "{} {} {}",
        inst.task_count(),
        inst.station_count,
        inst.cycle_time
    )
    .unwrap();
    let join = |it: Vec<String>| it.join(" ");
    writeln!(out, "{}", join(inst.durations.iter().map(|t| t.to_string()).collect())).unwrap();
    match &inst.powers {
        Some(w) => writeln!(out, "{}", join(w.iter().map(|x| x.to_string()).collect())).unwrap(),
        None => writeln!(out, "?").unwrap(),
    }
    for &(i, j) in inst.edges() {
        writeln!(out, "{} {}", i + 1, j + 1).unwrap();
    }
    writeln!(out, "-1 -1").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_instance() -> Instance {
        crate::corpus::worked_example()
    }

    fn example_schedule() -> Solution {
        crate::corpus::worked_example_schedule()
    }

    #[test]
    fn example_schedule_is_feasible() {
        let inst = example_instance();
        let report = validate_solution(&inst, &example_schedule());
        assert!(report.is_feasible(), "unexpected: {:?}", report.violations);
    }

    #[test]
    fn example_profile_peaks_at_14() {
        let inst = example_instance();
        let profile = power_profile(&inst, &example_schedule()).unwrap();
        assert_eq!(profile.loads, vec![5, 14, 14, 7, 7, 9, 5]);
        assert_eq!(profile.peak, 14);
        assert_eq!(profile.peak_times, vec![1, 2]);
    }

    #[test]
    fn example_bounds() {
        let bounds = analytic_bounds(&example_instance()).unwrap();
        // energy = 5*3 + 3*4 + 6*2 + 4*3 + 5*2 = 61, ceil(61/7) = 9 > max w = 6
        assert_eq!(bounds, Bounds { lower: 9, upper: 16 });
    }

    #[test]
    fn profile_conserves_energy() {
        let inst = example_instance();
        let profile = power_profile(&inst, &example_schedule()).unwrap();
        let energy: u64 = inst
            .powers()
            .unwrap()
            .iter()
            .zip(&inst.durations)
            .map(|(&w, &t)| w * t as u64)
            .sum();
        assert_eq!(profile.loads.iter().sum::<u64>(), energy);
    }

    #[test]
    fn single_station_bounds_collapse() {
        let inst = Instance::new("one", 1, 10, vec![2, 3], Some(vec![7, 4]), vec![]).unwrap();
        let bounds = analytic_bounds(&inst).unwrap();
        // At most one task runs at a time on a single station.
        assert_eq!(bounds.upper, 7);
        assert_eq!(bounds.lower, 7);
    }

    #[test]
    fn validation_reports_every_class() {
        let inst = example_instance();
        // Station out of range for task 1.
        let mut sol = example_schedule();
        sol.assignment[0] = 9;
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .contains(&Violation::StationRange { task: 0, station: 9 }));

        // Start outside the window (also past the cycle).
        let mut sol = example_schedule();
        sol.start[1] = 6; // t = 4, window is 0..=3
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .contains(&Violation::StartWindow { task: 1, start: 6 }));
        assert!(report
            .violations
            .contains(&Violation::CycleTime { task: 1, end: 10 }));

        // Overlap: tasks 3 and 4 share station 3; move task 4 onto task 3.
        let mut sol = example_schedule();
        sol.start[3] = 2;
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .contains(&Violation::Overlap { first: 2, second: 3 }));
        // The same move breaks precedence 3 -> 4.
        assert!(report
            .violations
            .contains(&Violation::Precedence { before: 2, after: 3 }));

        // Cross-station precedence: move task 1's predecessor to a later station.
        let mut sol = example_schedule();
        sol.assignment[0] = 2;
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .contains(&Violation::Precedence { before: 0, after: 1 }));
    }

    #[test]
    fn native_round_trip() {
        let inst = example_instance();
        let text = write_native(&inst);
        let mut parsed = parse_instance(&text, InstanceFormat::Native).unwrap();
        parsed.name = inst.name.clone(); // comments don't carry the name back
        assert_eq!(parsed, inst);
    }

    #[test]
    fn native_parses_placeholder_powers() {
        let text = "3 2 5\n2 3 1\n?\n1 2\n-1 -1\n";
        let inst = parse_instance(text, InstanceFormat::Native).unwrap();
        assert_eq!(inst.powers, None);
        assert!(inst.powers().is_err());
        let text = "3 2 5\n2 3 1\n? ? ?\n-1 -1\n";
        let inst = parse_instance(text, InstanceFormat::Native).unwrap();
        assert_eq!(inst.powers, None);
    }

    #[test]
    fn native_rejects_malformed_input() {
        let cases: &[(&str, &str)] = &[
            ("", "missing header"),
            ("2 2\n1 1\n1 1\n-1 -1\n", "short header"),
            ("2 1 3\n1\n1 1\n-1 -1\n", "missing duration"),
            ("2 1 3\n1 4\n1 1\n-1 -1\n", "duration above cycle"),
            ("2 1 3\n1 1\n1 ?\n-1 -1\n", "mixed powers"),
            ("2 1 3\n1 1\n1 1\n1 3\n-1 -1\n", "edge out of range"),
            ("2 1 3\n1 1\n1 1\n1 2\n", "missing terminator"),
            ("2 1 3\n1 1\n1 1\n1 2\n2 1\n-1 -1\n", "cyclic"),
            ("2 1 3\n1 1\n1 1\n-1 -1\nextra\n", "trailing content"),
            ("2 1 3\n1 1\n0 1\n-1 -1\n", "zero power"),
        ];
        for (text, what) in cases {
            assert!(
                parse_instance(text, InstanceFormat::Native).is_err(),
                "expected rejection: {what}"
            );
        }
    }

    #[test]
    fn alb_parses_body() {
        let text = "5\n3\n4\n2\n3\n2\n1,2\n-1,-1\n";
        let inst = parse_instance(
            text,
            InstanceFormat::Alb {
                station_count: 3,
                cycle_time: 7,
            },
        )
        .unwrap();
        assert_eq!(inst.task_count(), 5);
        assert_eq!(inst.durations, vec![3, 4, 2, 3, 2]);
        assert_eq!(inst.edges(), &[(0, 1)]);
        assert_eq!(inst.powers, None);
        assert_eq!(inst.station_count, 3);
        assert_eq!(inst.cycle_time, 7);
    }

    #[test]
    fn generated_powers_are_deterministic_and_in_range() {
        let inst = example_instance();
        let a = generate_powers(&inst, 42, 1, 10).unwrap();
        let b = generate_powers(&inst, 42, 1, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|&w| (1..=10).contains(&w)));
        let c = generate_powers(&inst, 43, 1, 10).unwrap();
        assert_ne!(a, c, "different seeds should differ on 5 draws from 1..=10");
        assert!(generate_powers(&inst, 1, 0, 5).is_err());
        assert!(generate_powers(&inst, 1, 6, 5).is_err());
    }

    #[test]
    fn constructor_rejects_bad_instances() {
        assert!(Instance::new("x", 1, 1, vec![], None, vec![]).is_err());
        assert!(Instance::new("x", 0, 1, vec![1], None, vec![]).is_err());
        assert!(Instance::new("x", 1, 0, vec![1], None, vec![]).is_err());
        assert!(Instance::new("x", 1, 2, vec![3], None, vec![]).is_err());
        assert!(Instance::new("x", 1, 2, vec![1, 1], Some(vec![1]), vec![]).is_err());
        assert!(Instance::new("x", 1, 2, vec![1, 1], None, vec![(0, 0)]).is_err());
        assert!(Instance::new("x", 1, 2, vec![1, 1], None, vec![(0, 2)]).is_err());
        assert!(Instance::new("x", 1, 2, vec![1, 1], None, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn duplicate_edges_are_dedupped() {
        let inst =
            Instance::new("x", 2, 2, vec![1, 1], None, vec![(0, 1), (0, 1)]).unwrap();
        assert_eq!(inst.edges(), &[(0, 1)]);
    }

    #[test]
    fn topological_order_respects_edges() {
        let inst = example_instance();
        let order = inst.topological_order().unwrap();
        let pos: Vec<usize> = {
            let mut p = vec![0; 5];
            for (idx, &t) in order.iter().enumerate() {
                p[t] = idx;
            }
            p
        };
        for &(i, j) in inst.edges() {
            assert!(pos[i] < pos[j]);
        }
    }
}
