//! Bound-rebuild descent: after a short blocking warm-up fixes an
//! incumbent, each round clones the pristine base encoding, appends a hard
//! per-slot cap of `incumbent - 1`, and solves from scratch. Satisfiable
//! rounds replace the incumbent with the decoded (strictly better)
//! schedule; the first unsatisfiable round is the optimality proof. Warm-up
//! cuts live only in their own session, so the cloned base stays free of
//! them and the cap is the sole restriction in every round.

use super::{model_schedule, run_init, InitEnd, IterationResult, Phase, Run};
use crate::encode::{encode, peak::append_slot_cap, EncoderKind};
use crate::error::Result;
use crate::solver::{new_session, SolveOutcome};

pub(super) fn drive(run: &mut Run) -> Result<()> {
    let base = encode(run.inst, EncoderKind::Compact, run.opts.encode)?;
    let mut warmup = new_session(run.opts.backend, run.opts.seed)?;
    warmup.add_formula(&base.formula);
    let end = run_init(run, &base, warmup.as_mut())?;
    run.retire(warmup.as_ref());
    if !matches!(end, InitEnd::Exhausted) {
        return Ok(());
    }
    for round in 0u64.. {
        let target = run.best_peak() - 1;
        let mut capped = base.clone();
        append_slot_cap(&mut capped, target)?;
        let mut session = new_session(run.opts.backend, run.opts.seed.wrapping_add(round + 1))?;
        session.add_formula(&capped.formula);
        let outcome = session.solve(run.deadline);
        run.retire(session.as_ref());
        match outcome {
            SolveOutcome::Sat(model) => {
                let (peak, sol) = model_schedule(&capped, &model)?;
                debug_assert!(peak <= target, "slot caps bound every decoded peak");
                run.improve(peak, sol);
                run.log(
                    Phase::Search,
                    Some(target),
                    None,
                    IterationResult::Sat { peak },
                );
            }
            SolveOutcome::Unsat => {
                run.closing_unsat = true;
                run.log(Phase::Closing, Some(target), None, IterationResult::Unsat);
                break;
            }
            SolveOutcome::TimedOut => {
                run.timed_out = true;
                run.log(Phase::Search, Some(target), None, IterationResult::TimedOut);
                break;
            }
        }
    }
    Ok(())
}
