//! Exact solving for assembly line balancing with power peak minimization:
//! instance model, SAT encodings, optimization drivers, and a brute-force
//! oracle for verification at small scale.

pub mod bench;
pub mod cnf;
pub mod corpus;
pub mod encode;
pub mod error;
pub mod exec;
pub mod instance;
pub mod optimize;
pub mod oracle;
pub mod precedence;
pub mod solver;
pub mod varmap;

pub use error::{Error, Result};
