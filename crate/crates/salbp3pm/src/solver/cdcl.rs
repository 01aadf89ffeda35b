//! Self-contained CDCL SAT solver: two-watched-literal propagation,
//! first-UIP clause learning with local minimization, VSIDS branching with
//! phase saving, Luby restarts, and activity-based learnt-clause cleanup.
//!
//! Ties in branching are broken by variable index and the heap is rebuilt
//! deterministically, so runs are reproducible; the seed only perturbs the
//! initial phase assignment. Clauses may be added between `solve` calls
//! (the trail is always rewound to level zero in between).

use std::time::Instant;

use rand::{Rng, SeedableRng};

use super::{SatSession, SolveOutcome, SolveStats};
use crate::cnf::{Lit, Var};

/// Internal literal: variable index shifted left, low bit set = positive.
type SLit = u32;

#[inline]
fn var_of(l: SLit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn is_pos(l: SLit) -> bool {
    l & 1 == 1
}

#[inline]
fn negate(l: SLit) -> SLit {
    l ^ 1
}

#[inline]
fn slit(var: usize, positive: bool) -> SLit {
    (var as u32) << 1 | positive as u32
}

/// Literal truth under a raw assignment vector; free function so clause
/// storage can stay mutably borrowed at call sites inside propagation.
#[inline]
fn value_in(assigns: &[u8], l: SLit) -> u8 {
    match assigns[var_of(l)] {
        VAL_UNDEF => VAL_UNDEF,
        a => {
            if (a == VAL_TRUE) == is_pos(l) {
                VAL_TRUE
            } else {
                VAL_FALSE
            }
        }
    }
}

fn from_external(l: Lit) -> SLit {
    slit((l.unsigned_abs() - 1) as usize, l > 0)
}

const VAL_FALSE: u8 = 0;
const VAL_TRUE: u8 = 1;
const VAL_UNDEF: u8 = 2;

#[derive(Debug)]
struct Clause {
    lits: Vec<SLit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    /// Cached literal from the clause; if true the clause is satisfied and
    /// need not be inspected.
    blocker: SLit,
}

/// Heap entry ordering: higher activity first, then lower variable index.
#[derive(PartialEq)]
struct HeapEntry {
    activity: f64,
    var: u32,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.activity
            .total_cmp(&other.activity)
            .then(other.var.cmp(&self.var))
    }
}

enum SearchStep {
    Sat(Vec<bool>),
    Unsat,
    Restart,
    TimedOut,
}

pub struct CdclSolver {
    clauses: Vec<Clause>,
    learnt_refs: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    activity: Vec<f64>,
    heap: std::collections::BinaryHeap<HeapEntry>,
    trail: Vec<SLit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    ok: bool,
    var_inc: f64,
    cla_inc: f64,
    max_learnts: f64,
    phase_rng: rand_chacha::ChaCha8Rng,
    stats: SolveStats,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 64;
const DEADLINE_CHECK_MASK: u64 = 0xff;

impl CdclSolver {
    pub fn new(seed: u64) -> Self {
        CdclSolver {
            clauses: Vec::new(),
            learnt_refs: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            phase: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            activity: Vec::new(),
            heap: std::collections::BinaryHeap::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            ok: true,
            var_inc: 1.0,
            cla_inc: 1.0,
            max_learnts: 1000.0,
            phase_rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            stats: SolveStats::default(),
        }
    }

    fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    fn value(&self, l: SLit) -> u8 {
        value_in(&self.assigns, l)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: SLit, reason: Option<u32>) {
        debug_assert_eq!(self.value(l), VAL_UNDEF);
        let v = var_of(l);
        self.assigns[v] = is_pos(l) as u8;
        self.phase[v] = is_pos(l);
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        for &l in &self.trail[keep..] {
            let v = var_of(l);
            self.assigns[v] = VAL_UNDEF;
            self.reason[v] = None;
            self.heap.push(HeapEntry {
                activity: self.activity[v],
                var: v as u32,
            });
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target as usize);
        self.qhead = keep;
    }

    fn attach(&mut self, cref: u32) {
        let (w0, w1) = {
            let c = &self.clauses[cref as usize];
            (c.lits[0], c.lits[1])
        };
        self.watches[negate(w0) as usize].push(Watcher { cref, blocker: w1 });
        self.watches[negate(w1) as usize].push(Watcher { cref, blocker: w0 });
    }

    /// Propagate queued assignments; `Some(cref)` on conflict.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let ws = std::mem::take(&mut self.watches[p as usize]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut idx = 0;
            'watchers: while idx < ws.len() {
                let w = ws[idx];
                idx += 1;
                self.stats.propagations += 1;
                if self.value(w.blocker) == VAL_TRUE {
                    kept.push(w);
                    continue;
                }
                let c = &mut self.clauses[w.cref as usize];
                if c.deleted {
                    continue; // lazily drop watchers of removed clauses
                }
                // Normalize: the falsified watched literal goes to slot 1.
                if c.lits[0] == negate(p) {
                    c.lits.swap(0, 1);
                }
                debug_assert_eq!(c.lits[1], negate(p));
                let first = c.lits[0];
                if first != w.blocker && value_in(&self.assigns, first) == VAL_TRUE {
                    kept.push(Watcher {
                        cref: w.cref,
                        blocker: first,
                    });
                    continue;
                }
                // Look for a non-false replacement watch.
                for k in 2..c.lits.len() {
                    if value_in(&self.assigns, c.lits[k]) != VAL_FALSE {
                        c.lits.swap(1, k);
                        let new_watch = c.lits[1];
                        self.watches[negate(new_watch) as usize].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        continue 'watchers;
                    }
                }
                // Clause is unit or conflicting.
                kept.push(Watcher {
                    cref: w.cref,
                    blocker: first,
                });
                if self.value(first) == VAL_FALSE {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    kept.extend_from_slice(&ws[idx..]);
                    break;
                }
                self.enqueue(first, Some(w.cref));
            }
            debug_assert!(self.watches[p as usize].is_empty());
            self.watches[p as usize] = kept;
            if conflict.is_some() {
                return conflict;
            }
            drop(ws);
        }
        None
    }

    fn var_bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            // Stale heap entries no longer match any rescaled activity;
            // reseed the heap so unassigned variables stay reachable.
            self.heap.clear();
            for u in 0..self.num_vars() {
                if self.assigns[u] == VAL_UNDEF {
                    self.heap.push(HeapEntry {
                        activity: self.activity[u],
                        var: u as u32,
                    });
                }
            }
        }
    }

    fn cla_bump(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for cr in &self.learnt_refs {
                self.clauses[*cr as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP learning: returns the learnt clause (asserting literal
    /// first, a highest-level literal second) and the backtrack level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<SLit>, u32) {
        let mut learnt: Vec<SLit> = vec![0];
        let mut to_clear: Vec<usize> = Vec::new();
        let mut path_count = 0u32;
        let mut skip_first = false;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            self.cla_bump(confl);
            let lits: Vec<SLit> = {
                let c = &self.clauses[confl as usize];
                c.lits[usize::from(skip_first)..].to_vec()
            };
            for q in lits {
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    to_clear.push(v);
                    self.var_bump(v);
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var_of(self.trail[index])] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[var_of(p)] = false;
            path_count -= 1;
            if path_count == 0 {
                learnt[0] = negate(p);
                break;
            }
            confl = self.reason[var_of(p)].expect("conflict path literal has a reason");
            skip_first = true;
        }
        // Local minimization: drop a literal whose entire reason clause is
        // already covered by the rest of the learnt clause.
        let mut kept: Vec<SLit> = vec![learnt[0]];
        for &l in &learnt[1..] {
            let redundant = match self.reason[var_of(l)] {
                None => false,
                Some(cr) => self.clauses[cr as usize].lits[1..]
                    .iter()
                    .all(|&q| self.seen[var_of(q)] || self.level[var_of(q)] == 0),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for v in to_clear {
            self.seen[v] = false;
        }
        let backtrack = if kept.len() == 1 {
            0
        } else {
            let max_at = (1..kept.len())
                .max_by_key(|&i| self.level[var_of(kept[i])])
                .expect("nonempty tail");
            kept.swap(1, max_at);
            self.level[var_of(kept[1])]
        };
        (kept, backtrack)
    }

    fn record_learnt(&mut self, lits: Vec<SLit>) {
        debug_assert!(!lits.is_empty());
        if lits.len() == 1 {
            self.enqueue(lits[0], None);
            return;
        }
        let asserting = lits[0];
        let cref = self.clauses.len() as u32;
        self.clauses.push(Clause {
            lits,
            learnt: true,
            deleted: false,
            activity: 0.0,
        });
        self.learnt_refs.push(cref);
        self.attach(cref);
        self.cla_bump(cref);
        self.enqueue(asserting, Some(cref));
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.value(first) == VAL_TRUE && self.reason[var_of(first)] == Some(cref)
    }

    /// Remove the less active half of the learnt clauses. Only called at
    /// decision level zero; binary and locked clauses are kept.
    fn reduce_learnts(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        self.learnt_refs
            .retain(|&cr| !self.clauses[cr as usize].deleted);
        let mut by_activity = self.learnt_refs.clone();
        by_activity.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .total_cmp(&self.clauses[b as usize].activity)
                .then(a.cmp(&b))
        });
        for &cr in by_activity.iter().take(by_activity.len() / 2) {
            let keep = self.clauses[cr as usize].lits.len() <= 2 || self.locked(cr);
            if !keep {
                self.clauses[cr as usize].deleted = true;
            }
        }
        self.learnt_refs
            .retain(|&cr| !self.clauses[cr as usize].deleted);
        for list in &mut self.watches {
            // Deleted clauses also fall out lazily during propagation, but
            // compacting here keeps the lists short.
            list.retain(|w| !self.clauses[w.cref as usize].deleted);
        }
        self.max_learnts *= 1.1;
    }

    fn pick_branch_var(&mut self) -> Option<usize> {
        while let Some(entry) = self.heap.pop() {
            let v = entry.var as usize;
            // Entries are stale if the variable was re-pushed with newer
            // activity or assigned in the meantime.
            if self.assigns[v] == VAL_UNDEF && self.activity[v] == entry.activity {
                return Some(v);
            }
        }
        None
    }

    fn extract_model(&self) -> Vec<bool> {
        let mut model = vec![false; self.num_vars() + 1];
        for v in 0..self.num_vars() {
            model[v + 1] = self.assigns[v] == VAL_TRUE;
        }
        model
    }

    fn deadline_passed(deadline: Option<Instant>) -> bool {
        deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn search(&mut self, budget: u64, deadline: Option<Instant>) -> SearchStep {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchStep::Unsat;
                }
                let (learnt, backtrack) = self.analyze(confl);
                self.cancel_until(backtrack);
                self.record_learnt(learnt);
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if self.stats.conflicts & DEADLINE_CHECK_MASK == 0
                    && Self::deadline_passed(deadline)
                {
                    self.cancel_until(0);
                    return SearchStep::TimedOut;
                }
                if conflicts_here >= budget {
                    self.cancel_until(0);
                    return SearchStep::Restart;
                }
            } else {
                match self.pick_branch_var() {
                    None => {
                        let model = self.extract_model();
                        self.cancel_until(0);
                        return SearchStep::Sat(model);
                    }
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(slit(v, self.phase[v]), None);
                    }
                }
            }
        }
    }
}

/// Luby restart sequence: 1, 1, 2, 1, 1, 2, 4, ...
fn luby(x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

impl SatSession for CdclSolver {
    fn ensure_vars(&mut self, upto: Var) {
        while self.num_vars() < upto as usize {
            let v = self.num_vars();
            self.assigns.push(VAL_UNDEF);
            self.phase.push(self.phase_rng.random_bool(0.5));
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.push(HeapEntry {
                activity: 0.0,
                var: v as u32,
            });
        }
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        debug_assert_eq!(self.decision_level(), 0);
        self.stats.clauses_added += 1;
        if !self.ok {
            return;
        }
        // Simplify against the level-zero trail.
        let mut clause: Vec<SLit> = Vec::with_capacity(lits.len());
        for &ext in lits {
            assert!(ext != 0 && ext.unsigned_abs() <= self.num_vars() as u32);
            let l = from_external(ext);
            match self.value(l) {
                VAL_TRUE => return, // satisfied outright
                VAL_FALSE => continue,
                _ => {}
            }
            if clause.contains(&l) {
                continue;
            }
            if clause.contains(&negate(l)) {
                return; // tautology
            }
            clause.push(l);
        }
        match clause.len() {
            0 => self.ok = false,
            1 => self.enqueue(clause[0], None),
            _ => {
                let cref = self.clauses.len() as u32;
                self.clauses.push(Clause {
                    lits: clause,
                    learnt: false,
                    deleted: false,
                    activity: 0.0,
                });
                self.attach(cref);
            }
        }
    }

    fn solve(&mut self, deadline: Option<Instant>) -> SolveOutcome {
        self.stats.solve_calls += 1;
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        let mut restarts = 0u64;
        loop {
            if Self::deadline_passed(deadline) {
                return SolveOutcome::TimedOut;
            }
            let budget = RESTART_BASE * luby(restarts);
            match self.search(budget, deadline) {
                SearchStep::Sat(model) => return SolveOutcome::Sat(model),
                SearchStep::Unsat => return SolveOutcome::Unsat,
                SearchStep::TimedOut => return SolveOutcome::TimedOut,
                SearchStep::Restart => {
                    restarts += 1;
                    if self.learnt_refs.len() as f64 > self.max_learnts {
                        self.reduce_learnts();
                    }
                }
            }
        }
    }

    fn stats(&self) -> SolveStats {
        self.stats
    }

    fn backend_name(&self) -> &'static str {
        "embedded"
    }
}
