//! Precedence preprocessing: transitive closure of the precedence DAG and
//! the station/start-time windows it implies.
//!
//! The closure answers "must task i complete before task j" for arbitrary
//! pairs. Windows translate accumulated predecessor/successor workload into
//! per-task station ranges and per-(task, station) start-time ranges; the
//! encoders turn window violations into pruning clauses.

use crate::error::Result;
use crate::instance::Instance;
use serde::Serialize;

/// Transitive closure of the precedence relation, with predecessor and
/// successor sets materialized per task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceClosure {
    n: usize,
    reach: Vec<bool>,
    /// All pairs `(i, j)` with i transitively before j, sorted.
    pub closed_edges: Vec<(usize, usize)>,
    /// Transitive predecessors per task, ascending.
    pub pred_star: Vec<Vec<usize>>,
    /// Transitive successors per task, ascending.
    pub succ_star: Vec<Vec<usize>>,
}

impl PrecedenceClosure {
    /// True iff task `i` must complete before task `j`.
    pub fn before(&self, i: usize, j: usize) -> bool {
        self.reach[i * self.n + j]
    }

    fn from_reach(n: usize, reach: Vec<bool>) -> Self {
        let mut closed_edges = Vec::new();
        let mut pred_star = vec![Vec::new(); n];
        let mut succ_star = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if reach[i * n + j] {
                    closed_edges.push((i, j));
                    succ_star[i].push(j);
                    pred_star[j].push(i);
                }
            }
        }
        PrecedenceClosure {
            n,
            reach,
            closed_edges,
            pred_star,
            succ_star,
        }
    }
}

/// Transitive closure by memoized depth-first search: each task's
/// descendant set is computed once as the union of its direct successors
/// and their (memoized) descendant sets. O(n * (n + |E|)) set unions.
pub fn transitive_closure(inst: &Instance) -> PrecedenceClosure {
    let n = inst.task_count();
    let mut direct_succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in inst.edges() {
        direct_succ[i].push(j);
    }
    let mut reach = vec![false; n * n];
    let mut done = vec![false; n];

    fn visit(
        i: usize,
        n: usize,
        direct_succ: &[Vec<usize>],
        reach: &mut Vec<bool>,
        done: &mut Vec<bool>,
    ) {
        if done[i] {
            return;
        }
        done[i] = true;
        for &j in &direct_succ[i] {
            visit(j, n, direct_succ, reach, done);
            reach[i * n + j] = true;
            for k in 0..n {
                if reach[j * n + k] {
                    reach[i * n + k] = true;
                }
            }
        }
    }

    for i in 0..n {
        visit(i, n, &direct_succ, &mut reach, &mut done);
    }
    PrecedenceClosure::from_reach(n, reach)
}

/// Reference closure via the Floyd-Warshall triple loop. Kept for
/// differential testing against [`transitive_closure`]; use the DFS
/// version in production paths.
pub fn closure_warshall_reference(inst: &Instance) -> PrecedenceClosure {
    let n = inst.task_count();
    let mut reach = vec![false; n * n];
    for &(i, j) in inst.edges() {
        reach[i * n + j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if !reach[i * n + k] {
                continue;
            }
            for j in 0..n {
                if reach[k * n + j] {
                    reach[i * n + j] = true;
                }
            }
        }
    }
    PrecedenceClosure::from_reach(n, reach)
}

/// Per-task station windows, 1-based as computed:
/// first(i) = ceil((t_i + sum of transitive-predecessor durations) / c),
/// last(i)  = m + 1 - ceil((t_i + sum of transitive-successor durations) / c).
///
/// `first` can exceed `m` and `last` can drop below 1 on overloaded
/// instances; an empty window is an infeasibility signal, reported rather
/// than fatal (encoders turn it into an immediately unsatisfiable clause
/// set).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StationWindows {
    pub first: Vec<i64>,
    pub last: Vec<i64>,
}

impl StationWindows {
    /// 0-based inclusive station range for task `i`, `None` when empty.
    pub fn range0(&self, i: usize) -> Option<std::ops::RangeInclusive<usize>> {
        let (first, last) = (self.first[i], self.last[i]);
        (first <= last && last >= 1).then(|| (first.max(1) - 1) as usize..=(last - 1) as usize)
    }

    pub fn is_infeasible(&self) -> bool {
        (0..self.first.len()).any(|i| self.range0(i).is_none())
    }
}

pub fn station_windows(inst: &Instance, closure: &PrecedenceClosure) -> StationWindows {
    let n = inst.task_count();
    let m = inst.station_count as i64;
    let c = inst.cycle_time as u64;
    let mut first = Vec::with_capacity(n);
    let mut last = Vec::with_capacity(n);
    for i in 0..n {
        let head: u64 = closure.pred_star[i]
            .iter()
            .map(|&j| inst.durations[j] as u64)
            .sum::<u64>()
            + inst.durations[i] as u64;
        let tail: u64 = closure.succ_star[i]
            .iter()
            .map(|&j| inst.durations[j] as u64)
            .sum::<u64>()
            + inst.durations[i] as u64;
        first.push(head.div_ceil(c) as i64);
        last.push(m + 1 - tail.div_ceil(c) as i64);
    }
    StationWindows { first, last }
}

/// Per-(task, station) start-time windows. For task i on station k
/// (0-based index, 1-based in the formulas):
/// est = sum of durations of transitive predecessors that cannot be placed
/// before station k (first(j) >= k), all of which must run on k before i;
/// lst = c - t_i - sum of durations of transitive successors that cannot be
/// placed after station k (last(j) <= k), all of which must run on k
/// after i. `lst` may be negative when the station cannot host the task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemporalWindows {
    pub est: Vec<Vec<u32>>,
    pub lst: Vec<Vec<i64>>,
}

impl TemporalWindows {
    /// True iff start time `t` is impossible for task `i` on 0-based
    /// station `k`.
    pub fn ip(&self, i: usize, k: usize, t: u32) -> bool {
        t < self.est[i][k] || t as i64 > self.lst[i][k]
    }
}

pub fn temporal_windows(
    inst: &Instance,
    closure: &PrecedenceClosure,
    windows: &StationWindows,
) -> TemporalWindows {
    let n = inst.task_count();
    let m = inst.station_count;
    let c = inst.cycle_time as i64;
    let mut est = vec![Vec::with_capacity(m); n];
    let mut lst = vec![Vec::with_capacity(m); n];
    for i in 0..n {
        for k0 in 0..m {
            let k = (k0 + 1) as i64;
            let head: u32 = closure.pred_star[i]
                .iter()
                .filter(|&&j| windows.first[j] >= k)
                .map(|&j| inst.durations[j])
                .sum();
            let tail: i64 = closure.succ_star[i]
                .iter()
                .filter(|&&j| windows.last[j] <= k)
                .map(|&j| inst.durations[j] as i64)
                .sum();
            est[i].push(head);
            lst[i].push(c - inst.durations[i] as i64 - tail);
        }
    }
    TemporalWindows { est, lst }
}

/// Everything the encoders need from preprocessing, built in one pass.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub closure: PrecedenceClosure,
    pub windows: StationWindows,
    pub temporal: TemporalWindows,
}

impl Preprocessed {
    pub fn build(inst: &Instance) -> Result<Self> {
        let closure = transitive_closure(inst);
        let windows = station_windows(inst, &closure);
        let temporal = temporal_windows(inst, &closure, &windows);
        Ok(Preprocessed {
            closure,
            windows,
            temporal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain_instance(n: usize, m: usize, c: u32) -> Instance {
        Instance::new(
            "chain",
            m,
            c,
            vec![1; n],
            None,
            (0..n - 1).map(|i| (i, i + 1)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn closure_adds_transitive_pair() {
        let inst = chain_instance(3, 3, 1);
        let closure = transitive_closure(&inst);
        assert_eq!(closure.closed_edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(closure.before(0, 2));
        assert!(!closure.before(2, 0));
        assert_eq!(closure.pred_star[2], vec![0, 1]);
        assert_eq!(closure.succ_star[0], vec![1, 2]);
    }

    #[test]
    fn closure_is_idempotent() {
        let inst = Instance::new(
            "diamond",
            4,
            4,
            vec![1, 1, 1, 1],
            None,
            vec![(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let once = transitive_closure(&inst);
        let reclosed = Instance::new(
            "closed",
            4,
            4,
            vec![1, 1, 1, 1],
            None,
            once.closed_edges.clone(),
        )
        .unwrap();
        let twice = transitive_closure(&reclosed);
        assert_eq!(once.closed_edges, twice.closed_edges);
    }

    #[test]
    fn tight_chain_windows_pin_every_task() {
        // Three unit tasks in a chain with c = 1: station windows collapse
        // to first = last = position in the chain.
        let inst = chain_instance(3, 3, 1);
        let pre = Preprocessed::build(&inst).unwrap();
        assert_eq!(pre.windows.first, vec![1, 2, 3]);
        assert_eq!(pre.windows.last, vec![1, 2, 3]);
        assert!(!pre.windows.is_infeasible());
        assert_eq!(pre.windows.range0(1), Some(1..=1));
    }

    #[test]
    fn overloaded_chain_is_flagged_infeasible() {
        let inst = chain_instance(3, 2, 1);
        let pre = Preprocessed::build(&inst).unwrap();
        // Task 3 needs station 3 of 2.
        assert_eq!(pre.windows.first[2], 3);
        assert_eq!(pre.windows.last[2], 2);
        assert!(pre.windows.is_infeasible());
        assert_eq!(pre.windows.range0(2), None);
    }

    #[test]
    fn shared_station_forces_sequential_start_windows() {
        // Two unit tasks chained, one station, c = 2: the successor cannot
        // start before the predecessor's duration has elapsed, and the
        // predecessor cannot start so late that the successor no longer fits.
        let inst = chain_instance(2, 1, 2);
        let pre = Preprocessed::build(&inst).unwrap();
        assert_eq!(pre.temporal.est[1][0], 1);
        assert_eq!(pre.temporal.lst[0][0], 0);
        assert!(pre.temporal.ip(1, 0, 0));
        assert!(!pre.temporal.ip(1, 0, 1));
        assert!(pre.temporal.ip(0, 0, 1));
        assert!(!pre.temporal.ip(0, 0, 0));
    }

    #[test]
    fn loose_instance_windows_tighten_only_at_the_ends() {
        let inst = Instance::new("loose", 3, 10, vec![2, 3], None, vec![(0, 1)]).unwrap();
        let pre = Preprocessed::build(&inst).unwrap();
        assert_eq!(pre.windows.first, vec![1, 1]);
        assert_eq!(pre.windows.last, vec![3, 3]);
        // On station 1 the predecessor cannot sit anywhere earlier, so if
        // the successor lands there too it must wait out the predecessor.
        assert_eq!(pre.temporal.est[1][0], 2);
        assert_eq!(pre.temporal.est[1][1], 0);
        assert_eq!(pre.temporal.est[1][2], 0);
        // Symmetrically the successor cannot leave station 3.
        assert_eq!(pre.temporal.lst[0][0], 8);
        assert_eq!(pre.temporal.lst[0][1], 8);
        assert_eq!(pre.temporal.lst[0][2], 5);
        // The successor itself has no successors: full late windows.
        for k in 0..3 {
            assert_eq!(pre.temporal.lst[1][k], 7);
        }
    }

    /// Random DAG: edges only from lower to higher task index, so cycles
    /// are impossible by construction.
    fn random_dag(n: usize, seed: u64) -> Instance {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(0.3) {
                    edges.push((i, j));
                }
            }
        }
        Instance::new("dag", 3, 8, vec![1; n], None, edges).unwrap()
    }

    #[test]
    fn dfs_matches_warshall_on_random_dags() {
        for seed in 0..100 {
            let inst = random_dag(2 + (seed as usize % 14), seed);
            let dfs = transitive_closure(&inst);
            let warshall = closure_warshall_reference(&inst);
            assert_eq!(dfs.closed_edges, warshall.closed_edges, "seed {seed}");
        }
    }

    proptest! {
        #[test]
        fn closure_properties(seed in 0u64..500, n in 2usize..12) {
            let inst = random_dag(n, seed);
            let closure = transitive_closure(&inst);
            // Contains the direct edges.
            for &(i, j) in inst.edges() {
                prop_assert!(closure.before(i, j));
            }
            // pred*/succ* mirror the reachability matrix.
            for i in 0..n {
                for j in 0..n {
                    let hit = closure.before(i, j);
                    prop_assert_eq!(hit, closure.succ_star[i].contains(&j));
                    prop_assert_eq!(hit, closure.pred_star[j].contains(&i));
                    if hit {
                        prop_assert!(!closure.before(j, i), "antisymmetry");
                    }
                }
            }
            // Transitivity of the result.
            for &(i, j) in &closure.closed_edges {
                for &k in &closure.succ_star[j] {
                    prop_assert!(closure.before(i, k));
                }
            }
        }

        #[test]
        fn windows_are_monotone_along_edges(seed in 0u64..200, n in 2usize..10) {
            let inst = random_dag(n, seed);
            let pre = Preprocessed::build(&inst).unwrap();
            for &(i, j) in &pre.closure.closed_edges {
                prop_assert!(pre.windows.first[i] <= pre.windows.first[j]);
                prop_assert!(pre.windows.last[i] <= pre.windows.last[j]);
            }
        }
    }
}
