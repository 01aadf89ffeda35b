//! Pure blocking descent: no peak bound is encoded. Each model's peak
//! witness becomes a clause set forbidding that task group from ever
//! running together again, so every later model is structurally different
//! and the incumbent can only improve. The final unsatisfiable call means
//! no schedule avoids all recorded witnesses — and since each witness set
//! carries at least the incumbent's power, no schedule beats the
//! incumbent.

use super::{block_cut, model_schedule, witness_cut, IterationResult, Phase, Run};
use crate::encode::{encode, EncoderKind};
use crate::error::Result;
use crate::solver::{new_session, SolveOutcome};

pub(super) fn drive(run: &mut Run, kind: EncoderKind) -> Result<()> {
    let enc = encode(run.inst, kind, run.opts.encode)?;
    let mut session = new_session(run.opts.backend, run.opts.seed)?;
    session.add_formula(&enc.formula);
    loop {
        match session.solve(run.deadline) {
            SolveOutcome::Sat(model) => {
                let (peak, sol) = model_schedule(&enc, &model)?;
                run.improve(peak, sol.clone());
                run.log(Phase::Search, None, None, IterationResult::Sat { peak });
                let cut = witness_cut(run.inst, &sol, run.best_peak(), run.opts.blocking)?;
                block_cut(&enc, session.as_mut(), &cut);
            }
            SolveOutcome::Unsat => {
                if run.best.is_none() {
                    run.infeasible = true;
                    run.log(Phase::Search, None, None, IterationResult::Unsat);
                } else {
                    run.closing_unsat = true;
                    run.log(Phase::Closing, None, None, IterationResult::Unsat);
                }
                break;
            }
            SolveOutcome::TimedOut => {
                run.timed_out = true;
                run.log(Phase::Search, None, None, IterationResult::TimedOut);
                break;
            }
        }
    }
    run.retire(session.as_ref());
    Ok(())
}
