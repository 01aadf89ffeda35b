//! Single-session descent over an indicator ladder. After the blocking
//! warm-up fixes a first incumbent `w0`, the session gains one indicator
//! variable per candidate peak level strictly between the analytic floor
//! and `w0`, chained so that falsifying one level falsifies everything
//! above it. Each improvement then costs exactly one unit clause
//! `¬u(incumbent - 1)`, and the per-slot bounds tighten by the number of
//! falsified levels — the learned-clause database survives the whole walk.
//! The last two steps have no indicator to assert (the ladder stops above
//! the floor), so they append explicit slot caps; the closing call caps
//! one below the floor and must come back unsatisfiable.

use super::{model_schedule, push_delta, run_init, InitEnd, IterationResult, Phase, Run};
use crate::cnf::lit;
use crate::encode::{
    encode,
    peak::{append_slot_cap, peak_indicator_layer},
    EncoderKind,
};
use crate::error::{Error, Result};
use crate::solver::{new_session, SolveOutcome};

pub(super) fn drive(run: &mut Run) -> Result<()> {
    let mut enc = encode(run.inst, EncoderKind::Compact, run.opts.encode)?;
    let mut session = new_session(run.opts.backend, run.opts.seed)?;
    session.add_formula(&enc.formula);
    let end = run_init(run, &enc, session.as_mut())?;
    if !matches!(end, InitEnd::Exhausted) {
        run.retire(session.as_ref());
        return Ok(());
    }
    let lb = run.bounds.lower;
    let w0 = run.best_peak();
    let before = enc.formula.clauses().len();
    let layer = peak_indicator_layer(&mut enc, lb, w0)?;
    push_delta(session.as_mut(), &enc.formula, before);
    loop {
        let wb = run.best_peak();
        if wb == lb {
            // Closing: refute one below the analytic floor.
            let target = lb - 1;
            let before = enc.formula.clauses().len();
            append_slot_cap(&mut enc, target)?;
            push_delta(session.as_mut(), &enc.formula, before);
            match session.solve(run.deadline) {
                SolveOutcome::Unsat => {
                    run.closing_unsat = true;
                    run.log(Phase::Closing, Some(target), None, IterationResult::Unsat);
                }
                SolveOutcome::Sat(_) => {
                    return Err(Error::Invariant(
                        "schedule below the analytic lower bound".into(),
                    ));
                }
                SolveOutcome::TimedOut => {
                    run.timed_out = true;
                    run.log(Phase::Closing, Some(target), None, IterationResult::TimedOut);
                }
            }
            break;
        }
        let bound = wb - 1;
        if bound == lb {
            // No indicator level exists for the floor itself; cap directly.
            let before = enc.formula.clauses().len();
            append_slot_cap(&mut enc, bound)?;
            push_delta(session.as_mut(), &enc.formula, before);
            match session.solve(run.deadline) {
                SolveOutcome::Sat(model) => {
                    let (peak, sol) = model_schedule(&enc, &model)?;
                    debug_assert_eq!(peak, lb, "capped at the floor");
                    run.improve(peak, sol);
                    run.log(
                        Phase::Search,
                        Some(bound),
                        None,
                        IterationResult::Sat { peak },
                    );
                }
                SolveOutcome::Unsat => {
                    run.closing_unsat = true;
                    run.log(Phase::Closing, Some(bound), None, IterationResult::Unsat);
                    break;
                }
                SolveOutcome::TimedOut => {
                    run.timed_out = true;
                    run.log(Phase::Search, Some(bound), None, IterationResult::TimedOut);
                    break;
                }
            }
            continue;
        }
        // One unit clause walks the ladder down to the new bound.
        let u = enc
            .vars
            .u(bound)
            .ok_or_else(|| Error::Invariant(format!("no indicator for level {bound}")))?;
        session.add_clause(&[lit(u, false)]);
        let falsified = layer.false_indicators_at(bound);
        match session.solve(run.deadline) {
            SolveOutcome::Sat(model) => {
                let (peak, sol) = model_schedule(&enc, &model)?;
                debug_assert!(peak <= bound, "indicator bound holds on decoded peaks");
                run.improve(peak, sol);
                run.log(
                    Phase::Search,
                    Some(bound),
                    Some(falsified),
                    IterationResult::Sat { peak },
                );
            }
            SolveOutcome::Unsat => {
                run.closing_unsat = true;
                run.log(
                    Phase::Closing,
                    Some(bound),
                    Some(falsified),
                    IterationResult::Unsat,
                );
                break;
            }
            SolveOutcome::TimedOut => {
                run.timed_out = true;
                run.log(
                    Phase::Search,
                    Some(bound),
                    Some(falsified),
                    IterationResult::TimedOut,
                );
                break;
            }
        }
    }
    run.retire(session.as_ref());
    Ok(())
}
