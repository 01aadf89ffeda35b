//! Incremental SAT session abstraction over the embedded CDCL engine and
//! the optional external-library backend, plus model enumeration on a
//! variable projection.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::cnf::{CnfFormula, Lit, Var};
use crate::error::{Error, Result};

pub mod cdcl;
#[cfg(feature = "backend-batsat")]
pub mod library;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Model indexed by variable, slot 0 unused.
    Sat(Vec<bool>),
    Unsat,
    TimedOut,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub solve_calls: u64,
    pub clauses_added: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

/// One incremental solving session: variables and clauses may be added
/// between `solve` calls, and everything added stays in force.
pub trait SatSession {
    fn ensure_vars(&mut self, upto: Var);
    /// Add one clause; an empty slice asserts falsity.
    fn add_clause(&mut self, lits: &[Lit]);
    fn solve(&mut self, deadline: Option<Instant>) -> SolveOutcome;
    fn stats(&self) -> SolveStats;
    fn backend_name(&self) -> &'static str;

    fn add_formula(&mut self, f: &CnfFormula) {
        self.ensure_vars(f.var_count());
        for clause in f.clauses() {
            self.add_clause(clause);
        }
        if f.trivially_unsat {
            self.add_clause(&[]);
        }
    }
}

/// Selectable SAT backend. `Library` needs the `backend-batsat` feature;
/// requesting it without the feature is a configuration error, so the
/// variant itself is always available to parsers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Embedded,
    Library,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "embedded" => Ok(BackendKind::Embedded),
            "library" => Ok(BackendKind::Library),
            other => Err(Error::InvalidArgument(format!(
                "unknown backend {other:?} (expected embedded|library)"
            ))),
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Embedded => "embedded",
            BackendKind::Library => "library",
        })
    }
}

pub fn new_session(kind: BackendKind, seed: u64) -> Result<Box<dyn SatSession>> {
    match kind {
        BackendKind::Embedded => Ok(Box::new(cdcl::CdclSolver::new(seed))),
        #[cfg(feature = "backend-batsat")]
        BackendKind::Library => Ok(Box::new(library::LibrarySolver::new(seed))),
        #[cfg(not(feature = "backend-batsat"))]
        BackendKind::Library => Err(Error::Config(
            "library backend requires the `backend-batsat` feature".into(),
        )),
    }
}

/// Enumerate all models projected onto `projection`, by repeatedly solving
/// and blocking the projected assignment. Returned rows align with the
/// order of `projection`. The session is consumed in the sense that the
/// blocking clauses stay behind, so callers pass a throwaway session.
///
/// Enumerating on a projection matters: blocking full models would visit
/// every completion of the don't-care variables.
pub fn enumerate_models(
    session: &mut dyn SatSession,
    projection: &[Var],
    limit: usize,
    deadline: Option<Instant>,
) -> Result<BTreeSet<Vec<bool>>> {
    let mut out: BTreeSet<Vec<bool>> = BTreeSet::new();
    loop {
        match session.solve(deadline) {
            SolveOutcome::Unsat => return Ok(out),
            SolveOutcome::TimedOut => {
                return Err(Error::LimitExceeded(format!(
                    "model enumeration timed out after {} models",
                    out.len()
                )))
            }
            SolveOutcome::Sat(model) => {
                let row: Vec<bool> = projection
                    .iter()
                    .map(|&v| model[v as usize])
                    .collect();
                let blocking: Vec<Lit> = projection
                    .iter()
                    .zip(&row)
                    .map(|(&v, &value)| crate::cnf::lit(v, !value))
                    .collect();
                if !out.insert(row) {
                    return Err(Error::Invariant(
                        "enumeration revisited a blocked projection".into(),
                    ));
                }
                if out.len() > limit {
                    return Err(Error::LimitExceeded(format!(
                        "model enumeration exceeded limit {limit}"
                    )));
                }
                session.add_clause(&blocking);
            }
        }
    }
}
