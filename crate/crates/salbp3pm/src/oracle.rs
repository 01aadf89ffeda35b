//! Brute-force reference solver: exhaustive search over assignments and
//! start times, used to verify the SAT pipeline at small scale.
//!
//! Tasks are branched in topological order, so every direct predecessor is
//! placed before its successor and precedence can be checked incrementally.
//! Two exact prunes apply everywhere (a successor's station is at least the
//! maximum over its predecessors'; a station's total duration cannot exceed
//! the cycle time); the optimum search additionally bounds on the partial
//! power profile, which only grows as tasks are added.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};

/// Blow-up guards. `max_estimate` rejects instances whose raw search space
/// (stations^tasks times the product of start-window sizes) is hopeless
/// before any work happens; `max_nodes` cuts off enumeration that turns out
/// to be too wide despite a plausible estimate.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_nodes: u64,
    pub max_estimate: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_nodes: 100_000_000,
            max_estimate: 1_000_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Infeasible,
    Optimal { peak: u64, solution: Solution },
}

/// Upper estimate of the schedule space: stations^tasks times the product
/// of start-window widths. Exhaustive procedures reject instances whose
/// estimate is hopeless, and corpus generators keep instances destined for
/// full enumeration under a cap of it.
pub fn search_space_estimate(inst: &Instance) -> u128 {
    let n = inst.task_count();
    let m = inst.station_count as u128;
    let mut est: u128 = 1;
    for i in 0..n {
        let window = inst.start_window(i).count() as u128;
        est = est.saturating_mul(m).saturating_mul(window);
    }
    est
}

fn check_estimate(inst: &Instance, limits: &OracleLimits) -> Result<()> {
    let est = search_space_estimate(inst);
    if est > limits.max_estimate {
        return Err(Error::LimitExceeded(format!(
            "oracle search space estimate {est} exceeds limit {}",
            limits.max_estimate
        )));
    }
    Ok(())
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    assignment: Vec<usize>,
    start: Vec<u32>,
    placed: Vec<bool>,
    station_load: Vec<u32>,
    nodes: u64,
    max_nodes: u64,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, limits: &OracleLimits) -> Self {
        let n = inst.task_count();
        Search {
            inst,
            order: inst
                .topological_order()
                .expect("constructor guarantees acyclicity"),
            preds: (0..n).map(|i| inst.direct_predecessors(i)).collect(),
            assignment: vec![0; n],
            start: vec![0; n],
            placed: vec![false; n],
            station_load: vec![0; inst.station_count],
            nodes: 0,
            max_nodes: limits.max_nodes,
        }
    }

    fn bump_node(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::LimitExceeded(format!(
                "oracle node budget {} exhausted",
                self.max_nodes
            )));
        }
        Ok(())
    }

    /// Stations task `i` may use given already-placed direct predecessors.
    fn station_floor(&self, i: usize) -> usize {
        self.preds[i]
            .iter()
            .map(|&p| self.assignment[p])
            .max()
            .unwrap_or(0)
    }

    /// Check start time `tau` for task `i` on station `k` against placed
    /// same-station tasks (disjointness) and direct predecessors (order).
    fn start_ok(&self, i: usize, k: usize, tau: u32) -> bool {
        let t_i = self.inst.durations[i];
        for j in 0..self.inst.task_count() {
            if !self.placed[j] || self.assignment[j] != k {
                continue;
            }
            let (s_j, e_j) = (self.start[j], self.start[j] + self.inst.durations[j]);
            if tau < e_j && s_j < tau + t_i {
                return false;
            }
        }
        self.preds[i]
            .iter()
            .all(|&p| self.assignment[p] != k || self.start[p] + self.inst.durations[p] <= tau)
    }
}

/// Minimum feasible power peak, with one witnessing schedule, by exhaustive
/// search. Within equal peaks the lexicographically first placement in
/// topological branching order wins, so results are deterministic.
pub fn oracle_optimum(inst: &Instance, limits: &OracleLimits) -> Result<OracleResult> {
    check_estimate(inst, limits)?;
    let powers = inst.powers()?.to_vec();
    let lb_stop = powers.iter().copied().max().unwrap_or(0);
    let c = inst.cycle_time as usize;
    let mut search = Search::new(inst, limits);
    let mut loads = vec![0u64; c];
    let mut best: Option<(u64, Solution)> = None;

    fn recurse(
        s: &mut Search,
        powers: &[u64],
        loads: &mut Vec<u64>,
        partial_peak: u64,
        depth: usize,
        best: &mut Option<(u64, Solution)>,
        lb_stop: u64,
    ) -> Result<()> {
        if let Some((peak, _)) = best {
            if *peak <= lb_stop {
                return Ok(()); // already at the analytic floor
            }
            if partial_peak >= *peak {
                return Ok(()); // profile only grows; cannot improve
            }
        }
        if depth == s.order.len() {
            let solution = Solution {
                assignment: s.assignment.clone(),
                start: s.start.clone(),
            };
            if best.as_ref().is_none_or(|(peak, _)| partial_peak < *peak) {
                *best = Some((partial_peak, solution));
            }
            return Ok(());
        }
        let i = s.order[depth];
        let t_i = s.inst.durations[i];
        for k in s.station_floor(i)..s.inst.station_count {
            if s.station_load[k] + t_i > s.inst.cycle_time {
                continue;
            }
            for tau in s.inst.start_window(i) {
                if !s.start_ok(i, k, tau) {
                    continue;
                }
                s.bump_node()?;
                s.assignment[i] = k;
                s.start[i] = tau;
                s.placed[i] = true;
                s.station_load[k] += t_i;
                let mut new_peak = partial_peak;
                for slot in &mut loads[tau as usize..(tau + t_i) as usize] {
                    *slot += powers[i];
                    new_peak = new_peak.max(*slot);
                }
                recurse(s, powers, loads, new_peak, depth + 1, best, lb_stop)?;
                for slot in &mut loads[tau as usize..(tau + t_i) as usize] {
                    *slot -= powers[i];
                }
                s.station_load[k] -= t_i;
                s.placed[i] = false;
            }
        }
        Ok(())
    }

    recurse(
        &mut search,
        &powers,
        &mut loads,
        0,
        0,
        &mut best,
        lb_stop,
    )?;
    Ok(match best {
        None => OracleResult::Infeasible,
        Some((peak, solution)) => OracleResult::Optimal { peak, solution },
    })
}

/// Every feasible schedule, by exhaustive search with only exact prunes.
/// The result is the ground truth that encoding model sets are compared
/// against, so no heuristic cut may be applied here.
pub fn oracle_feasible_set(inst: &Instance, limits: &OracleLimits) -> Result<BTreeSet<Solution>> {
    check_estimate(inst, limits)?;
    let mut search = Search::new(inst, limits);
    let mut out = BTreeSet::new();

    fn recurse(s: &mut Search, depth: usize, out: &mut BTreeSet<Solution>) -> Result<()> {
        if depth == s.order.len() {
            out.insert(Solution {
                assignment: s.assignment.clone(),
                start: s.start.clone(),
            });
            return Ok(());
        }
        let i = s.order[depth];
        let t_i = s.inst.durations[i];
        for k in s.station_floor(i)..s.inst.station_count {
            if s.station_load[k] + t_i > s.inst.cycle_time {
                continue;
            }
            for tau in s.inst.start_window(i) {
                if !s.start_ok(i, k, tau) {
                    continue;
                }
                s.bump_node()?;
                s.assignment[i] = k;
                s.start[i] = tau;
                s.placed[i] = true;
                s.station_load[k] += t_i;
                recurse(s, depth + 1, out)?;
                s.station_load[k] -= t_i;
                s.placed[i] = false;
            }
        }
        Ok(())
    }

    recurse(&mut search, 0, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_powers, power_profile, validate_solution, Instance};

    fn example() -> Instance {
        crate::corpus::worked_example()
    }

    #[test]
    fn two_free_tasks_stagger_to_the_single_task_floor() {
        let inst =
            Instance::new("pair", 2, 2, vec![1, 1], Some(vec![5, 3]), vec![]).unwrap();
        let result = oracle_optimum(&inst, &OracleLimits::default()).unwrap();
        let OracleResult::Optimal { peak, solution } = result else {
            panic!("instance is feasible");
        };
        assert_eq!(peak, 5);
        let profile = power_profile(&inst, &solution).unwrap();
        assert_eq!(profile.peak, 5);
    }

    #[test]
    fn single_task_peak_is_its_power() {
        let inst = Instance::new("one", 1, 3, vec![2], Some(vec![7]), vec![]).unwrap();
        let result = oracle_optimum(&inst, &OracleLimits::default()).unwrap();
        assert!(matches!(result, OracleResult::Optimal { peak: 7, .. }));
    }

    #[test]
    fn overloaded_instance_is_infeasible() {
        // Three unit tasks, one station, cycle 2: capacity prune leaves nothing.
        let inst =
            Instance::new("tight", 1, 2, vec![1, 1, 1], Some(vec![1, 1, 1]), vec![]).unwrap();
        let result = oracle_optimum(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(result, OracleResult::Infeasible);
        let set = oracle_feasible_set(&inst, &OracleLimits::default()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn free_task_enumerates_every_station_start_pair() {
        let inst = Instance::new("free", 2, 2, vec![1], Some(vec![1]), vec![]).unwrap();
        let set = oracle_feasible_set(&inst, &OracleLimits::default()).unwrap();
        let expected: BTreeSet<Solution> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(|(k, tau)| Solution {
                assignment: vec![k],
                start: vec![tau],
            })
            .collect();
        assert_eq!(set, expected);
    }

    #[test]
    fn chained_pair_on_one_station_has_a_unique_schedule() {
        let inst =
            Instance::new("chain", 1, 2, vec![1, 1], Some(vec![1, 1]), vec![(0, 1)]).unwrap();
        let set = oracle_feasible_set(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(set.len(), 1);
        let only = set.iter().next().unwrap();
        assert_eq!(only.assignment, vec![0, 0]);
        assert_eq!(only.start, vec![0, 1]);
    }

    #[test]
    fn example_instance_optimum_is_within_bounds_and_validates() {
        let inst = example();
        let bounds = crate::instance::analytic_bounds(&inst).unwrap();
        let result = oracle_optimum(&inst, &OracleLimits::default()).unwrap();
        let OracleResult::Optimal { peak, solution } = result else {
            panic!("example instance is feasible");
        };
        assert!(peak >= bounds.lower && peak <= bounds.upper);
        assert!(validate_solution(&inst, &solution).is_feasible());
        assert_eq!(power_profile(&inst, &solution).unwrap().peak, peak);
        // The example schedule peaks at 14, so the optimum cannot exceed it.
        assert!(peak <= 14);
    }

    #[test]
    fn example_feasible_set_contains_the_example_schedule() {
        let inst = example();
        let set = oracle_feasible_set(&inst, &OracleLimits::default()).unwrap();
        assert!(set.contains(&crate::corpus::worked_example_schedule()));
        for sol in &set {
            assert!(validate_solution(&inst, sol).is_feasible());
        }
    }

    #[test]
    fn optimum_agrees_with_feasible_set_minimum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for case in 0..40 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=2);
            let c = rng.random_range(2..=4);
            let durations: Vec<u32> = (0..n).map(|_| rng.random_range(1..=c)).collect();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.3) {
                        edges.push((i, j));
                    }
                }
            }
            let inst = Instance::new(format!("diff-{case}"), m, c, durations, None, edges)
                .unwrap();
            let powers = generate_powers(&inst, case as u64, 1, 10).unwrap();
            let inst = inst.with_powers(powers).unwrap();
            let limits = OracleLimits::default();
            let set = oracle_feasible_set(&inst, &limits).unwrap();
            let opt = oracle_optimum(&inst, &limits).unwrap();
            match opt {
                OracleResult::Infeasible => assert!(set.is_empty(), "case {case}"),
                OracleResult::Optimal { peak, .. } => {
                    let min_peak = set
                        .iter()
                        .map(|sol| power_profile(&inst, sol).unwrap().peak)
                        .min()
                        .expect("optimal implies nonempty set");
                    assert_eq!(peak, min_peak, "case {case}");
                }
            }
        }
    }

    #[test]
    fn node_budget_is_enforced() {
        let inst = example();
        let limits = OracleLimits {
            max_nodes: 3,
            ..OracleLimits::default()
        };
        assert!(matches!(
            oracle_feasible_set(&inst, &limits),
            Err(Error::LimitExceeded(_))
        ));
    }

    #[test]
    fn estimate_guard_refuses_up_front() {
        let inst = example();
        let limits = OracleLimits {
            max_estimate: 1,
            ..OracleLimits::default()
        };
        assert!(matches!(
            oracle_optimum(&inst, &limits),
            Err(Error::LimitExceeded(_))
        ));
    }
}
