//! Bookkeeping between problem-level objects and CNF variables.
//!
//! Every variable allocated through the map gets a reverse-lookup role, so
//! models can be decoded and diagnostics can name what a literal means.
//! Auxiliary variables created behind the map's back (by the
//! pseudo-Boolean compiler) are folded in as [`VarRole::Aux`] via
//! [`VarMap::absorb_aux`]; the map asserts full coverage before decoding.

use std::collections::BTreeMap;

use crate::cnf::{CnfFormula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// x(i,k): task i runs on station k.
    Assign { task: usize, station: usize },
    /// s(i,t): task i starts at time t.
    Start { task: usize, time: u32 },
    /// a(i,t): task i is active during slot t.
    Active { task: usize, time: u32 },
    /// r(i,k): task i's station is at most k.
    AssignReach { task: usize, station: usize },
    /// tt(i,t): task i's start time is at most t.
    StartReach { task: usize, time: u32 },
    /// u(j): power level j is still permitted.
    PeakLevel { level: u64 },
    /// Binary objective bit with weight 2^bit.
    PeakBit { bit: u32 },
    /// Internal counter variable from constraint compilation.
    Aux,
}

impl VarRole {
    pub fn kind_name(&self) -> &'static str {
        match self {
            VarRole::Assign { .. } => "assign",
            VarRole::Start { .. } => "start",
            VarRole::Active { .. } => "active",
            VarRole::AssignReach { .. } => "assign-reach",
            VarRole::StartReach { .. } => "start-reach",
            VarRole::PeakLevel { .. } => "peak-level",
            VarRole::PeakBit { .. } => "peak-bit",
            VarRole::Aux => "aux",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VarMap {
    x: Vec<Vec<Option<Var>>>,
    s: Vec<Vec<Option<Var>>>,
    a: Vec<Vec<Option<Var>>>,
    r: Vec<Vec<Option<Var>>>,
    t: Vec<Vec<Option<Var>>>,
    u: BTreeMap<u64, Var>,
    bin: Vec<Var>,
    reverse: Vec<VarRole>,
}

impl VarMap {
    /// Empty map for `n` tasks, `m` stations, cycle time `c`. Tables are
    /// sized up front; slots stay `None` until allocated.
    pub fn new(n: usize, m: usize, c: u32) -> Self {
        VarMap {
            x: vec![vec![None; m]; n],
            s: vec![vec![None; c as usize]; n],
            a: vec![vec![None; c as usize]; n],
            r: vec![vec![None; m]; n],
            t: vec![vec![None; c as usize]; n],
            u: BTreeMap::new(),
            bin: Vec::new(),
            reverse: Vec::new(),
        }
    }

    fn fresh(&mut self, f: &mut CnfFormula, role: VarRole) -> Var {
        let v = f.new_var();
        debug_assert_eq!(v as usize, self.reverse.len() + 1, "map out of sync");
        self.reverse.push(role);
        v
    }

    pub fn alloc_x(&mut self, f: &mut CnfFormula, task: usize, station: usize) -> Var {
        assert!(self.x[task][station].is_none());
        let v = self.fresh(f, VarRole::Assign { task, station });
        self.x[task][station] = Some(v);
        v
    }

    pub fn alloc_s(&mut self, f: &mut CnfFormula, task: usize, time: u32) -> Var {
        assert!(self.s[task][time as usize].is_none());
        let v = self.fresh(f, VarRole::Start { task, time });
        self.s[task][time as usize] = Some(v);
        v
    }

    pub fn alloc_a(&mut self, f: &mut CnfFormula, task: usize, time: u32) -> Var {
        assert!(self.a[task][time as usize].is_none());
        let v = self.fresh(f, VarRole::Active { task, time });
        self.a[task][time as usize] = Some(v);
        v
    }

    pub fn alloc_r(&mut self, f: &mut CnfFormula, task: usize, station: usize) -> Var {
        assert!(self.r[task][station].is_none());
        let v = self.fresh(f, VarRole::AssignReach { task, station });
        self.r[task][station] = Some(v);
        v
    }

    pub fn alloc_t(&mut self, f: &mut CnfFormula, task: usize, time: u32) -> Var {
        assert!(self.t[task][time as usize].is_none());
        let v = self.fresh(f, VarRole::StartReach { task, time });
        self.t[task][time as usize] = Some(v);
        v
    }

    pub fn alloc_u(&mut self, f: &mut CnfFormula, level: u64) -> Var {
        assert!(!self.u.contains_key(&level));
        let v = self.fresh(f, VarRole::PeakLevel { level });
        self.u.insert(level, v);
        v
    }

    pub fn alloc_bin(&mut self, f: &mut CnfFormula, bit: u32) -> Var {
        assert_eq!(bit as usize, self.bin.len(), "bits are allocated in order");
        let v = self.fresh(f, VarRole::PeakBit { bit });
        self.bin.push(v);
        v
    }

    pub fn x(&self, task: usize, station: usize) -> Option<Var> {
        self.x[task][station]
    }

    pub fn s(&self, task: usize, time: u32) -> Option<Var> {
        self.s[task].get(time as usize).copied().flatten()
    }

    pub fn a(&self, task: usize, time: u32) -> Option<Var> {
        self.a[task][time as usize]
    }

    pub fn r(&self, task: usize, station: usize) -> Option<Var> {
        self.r[task][station]
    }

    pub fn t(&self, task: usize, time: u32) -> Option<Var> {
        self.t[task].get(time as usize).copied().flatten()
    }

    pub fn u(&self, level: u64) -> Option<Var> {
        self.u.get(&level).copied()
    }

    pub fn peak_levels(&self) -> impl Iterator<Item = (u64, Var)> + '_ {
        self.u.iter().map(|(&l, &v)| (l, v))
    }

    pub fn bin(&self, bit: u32) -> Option<Var> {
        self.bin.get(bit as usize).copied()
    }

    pub fn bin_count(&self) -> u32 {
        self.bin.len() as u32
    }

    pub fn task_count(&self) -> usize {
        self.x.len()
    }

    pub fn station_count(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn role(&self, v: Var) -> VarRole {
        self.reverse[(v - 1) as usize]
    }

    pub fn mapped_vars(&self) -> u32 {
        self.reverse.len() as u32
    }

    /// Tag formula variables allocated outside the map (constraint-compiler
    /// auxiliaries) so the reverse table covers the whole formula again.
    pub fn absorb_aux(&mut self, f: &CnfFormula) {
        assert!(
            self.reverse.len() <= f.var_count() as usize,
            "map has variables the formula lacks"
        );
        self.reverse.resize(f.var_count() as usize, VarRole::Aux);
    }

    pub fn role_counts(&self) -> BTreeMap<&'static str, u32> {
        let mut counts = BTreeMap::new();
        for role in &self.reverse {
            *counts.entry(role.kind_name()).or_insert(0) += 1;
        }
        counts
    }
}
