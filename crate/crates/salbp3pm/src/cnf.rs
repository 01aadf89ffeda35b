//! CNF and weighted-CNF containers, DIMACS serialization, and compilation
//! of pseudo-Boolean `<=` constraints to clauses.
//!
//! Variables are 1-based `u32`s, literals are DIMACS-style signed `i32`s.
//! Models are `Vec<bool>` indexed by variable (slot 0 unused), so solver
//! backends and formula utilities agree on one representation.

use crate::error::{Error, Result};

pub type Var = u32;
pub type Lit = i32;

pub fn lit(var: Var, positive: bool) -> Lit {
    if positive {
        var as Lit
    } else {
        -(var as Lit)
    }
}

pub fn lit_var(l: Lit) -> Var {
    l.unsigned_abs()
}

/// Truth of a literal under a model indexed by variable (slot 0 unused).
pub fn lit_true(model: &[bool], l: Lit) -> bool {
    model[lit_var(l) as usize] == (l > 0)
}

/// Outcome of inserting one clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseOutcome {
    Added,
    /// Clause contained a complementary literal pair; rejected at insertion.
    Tautology,
    /// Empty clause: the formula is marked trivially unsatisfiable.
    EmptyMarked,
}

/// Clause container. Duplicate literals are dropped, tautologies rejected,
/// and an empty clause recorded as an explicit trivially-unsat marker
/// rather than stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    vars: u32,
    clauses: Vec<Vec<Lit>>,
    pub trivially_unsat: bool,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.vars += 1;
        self.vars
    }

    /// Allocate variables so that ids `1..=upto` are all valid.
    pub fn ensure_vars(&mut self, upto: Var) {
        self.vars = self.vars.max(upto);
    }

    pub fn var_count(&self) -> u32 {
        self.vars
    }

    /// Stored clauses plus the empty-clause marker if set.
    pub fn clause_count(&self) -> usize {
        self.clauses.len() + usize::from(self.trivially_unsat)
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> ClauseOutcome {
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(l != 0, "literal 0 is not valid");
            assert!(
                lit_var(l) <= self.vars,
                "literal {l} references unallocated variable (have {})",
                self.vars
            );
            if clause.contains(&l) {
                continue;
            }
            if clause.contains(&-l) {
                return ClauseOutcome::Tautology;
            }
            clause.push(l);
        }
        if clause.is_empty() {
            self.trivially_unsat = true;
            return ClauseOutcome::EmptyMarked;
        }
        self.clauses.push(clause);
        ClauseOutcome::Added
    }

    /// True iff `model` satisfies every clause (and the formula is not
    /// trivially unsat). `model` is indexed by variable, slot 0 unused.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        !self.trivially_unsat
            && self
                .clauses
                .iter()
                .all(|cl| cl.iter().any(|&l| lit_true(model, l)))
    }
}

/// Serialize in DIMACS CNF (`p cnf <vars> <clauses>`; one clause per line,
/// 0-terminated). Output is byte-stable for a given formula; the
/// trivially-unsat marker serializes as a bare `0` line.
pub fn write_dimacs(f: &CnfFormula, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "p cnf {} {}", f.var_count(), f.clause_count())?;
    for clause in f.clauses() {
        for l in clause {
            write!(out, "{l} ")?;
        }
        writeln!(out, "0")?;
    }
    if f.trivially_unsat {
        writeln!(out, "0")?;
    }
    Ok(())
}

pub fn dimacs_string(f: &CnfFormula) -> String {
    let mut buf = Vec::new();
    write_dimacs(f, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

/// Parse DIMACS CNF. Accepts `c` comment lines, clauses spanning or
/// sharing lines, and a bare `0` as the empty-clause marker. The declared
/// clause count must match.
pub fn parse_dimacs(source: &str) -> Result<CnfFormula> {
    let mut f = CnfFormula::new();
    let mut declared: Option<(u32, usize)> = None;
    let mut current: Vec<Lit> = Vec::new();
    let mut parsed_clauses = 0usize;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if declared.is_some() {
                return Err(Error::parse(lineno, "duplicate problem line"));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let ["cnf", vars, clauses] = toks[..] else {
                return Err(Error::parse(lineno, "expected `p cnf <vars> <clauses>`"));
            };
            let vars: u32 = vars
                .parse()
                .map_err(|_| Error::parse(lineno, "bad variable count"))?;
            let clauses: usize = clauses
                .parse()
                .map_err(|_| Error::parse(lineno, "bad clause count"))?;
            f.ensure_vars(vars);
            declared = Some((vars, clauses));
            continue;
        }
        let Some((vars, _)) = declared else {
            return Err(Error::parse(lineno, "clause before problem line"));
        };
        for tok in line.split_whitespace() {
            let l: Lit = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad literal {tok:?}")))?;
            if l == 0 {
                f.add_clause(&current);
                parsed_clauses += 1;
                current.clear();
            } else {
                if lit_var(l) > vars {
                    return Err(Error::parse(
                        lineno,
                        format!("literal {l} exceeds declared variable count {vars}"),
                    ));
                }
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::parse(
            source.lines().count(),
            "unterminated final clause",
        ));
    }
    match declared {
        Some((_, count)) if count == parsed_clauses => Ok(f),
        Some((_, count)) => Err(Error::parse(
            source.lines().count(),
            format!("declared {count} clauses, found {parsed_clauses}"),
        )),
        None => Err(Error::parse(1, "missing problem line")),
    }
}

/// Weighted partial MaxSAT formula: hard clauses plus weighted soft
/// clauses. In this crate soft clauses are unit literals in practice, but
/// the container does not rely on that.
#[derive(Debug, Clone, Default)]
pub struct WcnfFormula {
    pub hard: CnfFormula,
    pub soft: Vec<(u64, Vec<Lit>)>,
}

/// WCNF serialization dialects: the classic header format
/// (`p wcnf <vars> <clauses> <top>`, hard clauses prefixed by top) and the
/// 2022 headerless format (`h` prefix for hard clauses).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WcnfDialect {
    #[default]
    Classic,
    New2022,
}

impl WcnfFormula {
    pub fn add_soft(&mut self, weight: u64, lits: &[Lit]) {
        assert!(weight >= 1, "soft clause weight must be >= 1");
        assert!(!lits.is_empty(), "soft clause must not be empty");
        for &l in lits {
            assert!(
                l != 0 && lit_var(l) <= self.hard.var_count(),
                "soft literal {l} references unallocated variable"
            );
        }
        self.soft.push((weight, lits.to_vec()));
    }

    /// Hard-clause sentinel weight: strictly greater than the sum of all
    /// soft weights.
    pub fn top(&self) -> u64 {
        self.soft.iter().map(|(w, _)| w).sum::<u64>() + 1
    }

    /// Sum of violated soft weights under `model`.
    pub fn cost_of_model(&self, model: &[bool]) -> u64 {
        self.soft
            .iter()
            .filter(|(_, cl)| !cl.iter().any(|&l| lit_true(model, l)))
            .map(|(w, _)| w)
            .sum()
    }
}

pub fn write_wcnf(
    f: &WcnfFormula,
    dialect: WcnfDialect,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    let top = f.top();
    let write_lits = |out: &mut dyn std::io::Write, lits: &[Lit]| -> std::io::Result<()> {
        for l in lits {
            write!(out, "{l} ")?;
        }
        writeln!(out, "0")
    };
    match dialect {
        WcnfDialect::Classic => {
            let clause_count = f.hard.clause_count() + f.soft.len();
            writeln!(
                out,
                "p wcnf {} {} {}",
                f.hard.var_count(),
                clause_count,
                top
            )?;
            for clause in f.hard.clauses() {
                write!(out, "{top} ")?;
                write_lits(out, clause)?;
            }
            if f.hard.trivially_unsat {
                writeln!(out, "{top} 0")?;
            }
            for (w, clause) in &f.soft {
                write!(out, "{w} ")?;
                write_lits(out, clause)?;
            }
        }
        WcnfDialect::New2022 => {
            for clause in f.hard.clauses() {
                write!(out, "h ")?;
                write_lits(out, clause)?;
            }
            if f.hard.trivially_unsat {
                writeln!(out, "h 0")?;
            }
            for (w, clause) in &f.soft {
                write!(out, "{w} ")?;
                write_lits(out, clause)?;
            }
        }
    }
    Ok(())
}

pub fn wcnf_string(f: &WcnfFormula, dialect: WcnfDialect) -> String {
    let mut buf = Vec::new();
    write_wcnf(f, dialect, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("WCNF output is ASCII")
}

/// Counts reported by [`encode_pb_leq`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PbEncodeStats {
    pub aux_vars: u64,
    pub clauses: u64,
}

/// Upper bound on auxiliary variables allocated by [`encode_pb_leq`] for
/// `n_lits` terms and the given bound: one counter digit per partial-sum
/// level per non-final term. Asserted as a regression guard in tests.
pub fn pb_aux_var_bound(n_lits: usize, bound: u64) -> u64 {
    (n_lits.saturating_sub(1)) as u64 * bound
}

/// Compile `sum(coeff_i * lit_i) <= bound` to clauses via a weighted
/// sequential counter: auxiliary digit `s[i][j]` means "the sum over the
/// first i+1 terms is at least j", tracked up to `bound` and overflowed
/// into a conflict clause.
///
/// Degenerate cases short-circuit: a negative bound marks the formula
/// trivially unsat; a term with coefficient above the bound forces its
/// literal false; a total at or below the bound emits nothing.
///
/// Terms must carry positive coefficients and pairwise-distinct literals.
pub fn encode_pb_leq(f: &mut CnfFormula, terms: &[(u64, Lit)], bound: i64) -> PbEncodeStats {
    let mut stats = PbEncodeStats::default();
    let add = |f: &mut CnfFormula, stats: &mut PbEncodeStats, lits: &[Lit]| {
        if f.add_clause(lits) != ClauseOutcome::Tautology {
            stats.clauses += 1;
        }
    };
    if bound < 0 {
        add(f, &mut stats, &[]);
        return stats;
    }
    let bound = bound as u64;
    debug_assert!(
        {
            let mut lits: Vec<Lit> = terms.iter().map(|&(_, l)| l).collect();
            lits.sort_unstable();
            lits.windows(2).all(|w| w[0] != w[1])
        },
        "PB terms must have distinct literals"
    );
    // Coefficients above the bound force their literal false outright.
    let mut chain: Vec<(u64, Lit)> = Vec::with_capacity(terms.len());
    for &(coeff, l) in terms {
        debug_assert!(l != 0);
        if coeff == 0 {
            continue;
        }
        if coeff > bound {
            add(f, &mut stats, &[-l]);
        } else {
            chain.push((coeff, l));
        }
    }
    let total: u64 = chain.iter().map(|&(c, _)| c).sum();
    if total <= bound {
        return stats; // vacuous
    }
    // Sequential counter. Row i holds digits for levels 1..=cap_i where
    // cap_i = min(prefix sum through i, bound); the final term needs no row,
    // only the overflow check against the previous row.
    let nt = chain.len();
    let mut prev_row: Vec<Var> = Vec::new();
    let mut prefix: u64 = 0;
    for (i, &(coeff, x)) in chain.iter().enumerate() {
        let last = i + 1 == nt;
        // Overflow: previous sum >= bound + 1 - coeff together with x
        // would exceed the bound.
        let overflow_level = bound + 1 - coeff; // >= 1 since coeff <= bound
        if overflow_level as usize <= prev_row.len() {
            let s_prev = prev_row[overflow_level as usize - 1];
            add(f, &mut stats, &[lit(s_prev, false), -x]);
        }
        if last {
            break;
        }
        let cap = prefix.saturating_add(coeff).min(bound) as usize;
        let mut row: Vec<Var> = Vec::with_capacity(cap);
        for _ in 0..cap {
            row.push(f.new_var());
            stats.aux_vars += 1;
        }
        // x alone reaches levels 1..=coeff.
        for j in 1..=(coeff as usize).min(cap) {
            add(f, &mut stats, &[-x, lit(row[j - 1], true)]);
        }
        for j in 1..=prev_row.len() {
            // Carry previous levels forward.
            if j <= cap {
                add(
                    f,
                    &mut stats,
                    &[lit(prev_row[j - 1], false), lit(row[j - 1], true)],
                );
            }
            // Previous level j plus x reaches level j + coeff.
            let lifted = j + coeff as usize;
            if lifted <= cap {
                add(
                    f,
                    &mut stats,
                    &[lit(prev_row[j - 1], false), -x, lit(row[lifted - 1], true)],
                );
            }
        }
        prev_row = row;
        prefix += coeff;
    }
    stats
}
