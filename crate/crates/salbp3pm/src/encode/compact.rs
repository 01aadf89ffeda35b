//! Compact encoder. The quadratic families of the baseline are replaced by
//! per-task reachability ladders: `r(i,k)` ("task i sits on station k or
//! earlier") and `tt(i,t)` ("task i starts at t or earlier"). Exactly-one
//! over stations and start times, precedence, and same-station ordering all
//! become constant-width clauses over ladder steps, linear in the window
//! width instead of quadratic.
//!
//! Slot non-overlap is only emitted for task pairs unrelated under the
//! precedence closure: for related pairs the ladder precedence plus the
//! same-station ordering clauses already exclude any overlap, and any task
//! sandwiched between two ends of a same-station chain is forced onto that
//! station with its slot ordered by the chain.

use crate::cnf::lit;
use crate::error::Result;
use crate::instance::Instance;

use super::{push, ClauseFamily, EncodeOptions, Encoding, EncoderKind, Shared, Term};

fn pos_r(sh: &Shared, i: usize, k: usize) -> Term {
    Term::L(lit(sh.vars.r(i, k).unwrap(), true))
}

fn neg_r(sh: &Shared, i: usize, k: usize) -> Term {
    Term::L(lit(sh.vars.r(i, k).unwrap(), false))
}

fn pos_tt(sh: &Shared, i: usize, t: u32) -> Term {
    Term::L(lit(sh.vars.t(i, t).unwrap(), true))
}

fn neg_tt(sh: &Shared, i: usize, t: u32) -> Term {
    Term::L(lit(sh.vars.t(i, t).unwrap(), false))
}

/// `tt(p, at)` as a clause term, collapsing out-of-ladder offsets: a start
/// before the window is impossible, at or past the window top certain.
fn tt_term(sh: &Shared, p: usize, at: i64) -> Term {
    let r = sh.ranges[p];
    if at < r.time_lo as i64 {
        Term::False
    } else if at >= r.time_hi as i64 {
        Term::True
    } else {
        pos_tt(sh, p, at as u32)
    }
}

pub(super) fn encode(inst: &Instance, options: EncodeOptions) -> Result<Encoding> {
    let mut sh = Shared::build(inst, options)?;
    let n = inst.task_count();
    let m = inst.station_count;

    // Station ladder: r(i,k) ⇔ "assigned within lo..=k". Together with the
    // window units this is exactly-one over stations in 4·width clauses.
    for i in 0..n {
        let (lo, hi) = (sh.ranges[i].station_lo, sh.ranges[i].station_hi);
        for k in lo..=hi {
            sh.vars.alloc_r(&mut sh.formula, i, k);
        }
        let init_a = [neg_r(&sh, i, lo), sh.pos_x(i, lo)];
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::ReachInit,
            &init_a,
        );
        let init_b = [sh.neg_x(i, lo), pos_r(&sh, i, lo)];
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::ReachInit,
            &init_b,
        );
        for k in (lo + 1)..=hi {
            let terms = [neg_r(&sh, i, k - 1), pos_r(&sh, i, k)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::ReachMono,
                &terms,
            );
        }
        for k in lo..=hi {
            let terms = [sh.neg_x(i, k), pos_r(&sh, i, k)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::AssignImpliesReach,
                &terms,
            );
        }
        for k in (lo + 1)..=hi {
            let terms = [sh.neg_x(i, k), neg_r(&sh, i, k - 1)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::AssignExcludesPrevReach,
                &terms,
            );
        }
        for k in (lo + 1)..=hi {
            let terms = [neg_r(&sh, i, k), pos_r(&sh, i, k - 1), sh.pos_x(i, k)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::ReachStepForcesAssign,
                &terms,
            );
        }
        let alo = if lo == hi {
            vec![sh.pos_x(i, hi)]
        } else {
            vec![pos_r(&sh, i, hi - 1), sh.pos_x(i, hi)]
        };
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::ReachAlo,
            &alo,
        );
    }

    // Start-time ladder, same shape; the top step is certain, which makes
    // the final constraint a unit instead of a disjunction.
    for i in 0..n {
        let (tlo, thi) = (sh.ranges[i].time_lo, sh.ranges[i].time_hi);
        for t in tlo..=thi {
            sh.vars.alloc_t(&mut sh.formula, i, t);
        }
        let init_a = [neg_tt(&sh, i, tlo), sh.pos_s(i, tlo)];
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::StartReachInit,
            &init_a,
        );
        let init_b = [sh.neg_s(i, tlo), pos_tt(&sh, i, tlo)];
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::StartReachInit,
            &init_b,
        );
        for t in (tlo + 1)..=thi {
            let terms = [neg_tt(&sh, i, t - 1), pos_tt(&sh, i, t)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::StartReachMono,
                &terms,
            );
        }
        for t in tlo..=thi {
            let terms = [sh.neg_s(i, t), pos_tt(&sh, i, t)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::StartImpliesReach,
                &terms,
            );
        }
        for t in (tlo + 1)..=thi {
            let terms = [sh.neg_s(i, t), neg_tt(&sh, i, t - 1)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::StartExcludesPrevReach,
                &terms,
            );
        }
        for t in (tlo + 1)..=thi {
            let terms = [neg_tt(&sh, i, t), pos_tt(&sh, i, t - 1), sh.pos_s(i, t)];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::ReachStepForcesStart,
                &terms,
            );
        }
        let final_unit = [pos_tt(&sh, i, thi)];
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::StartReachFinal,
            &final_unit,
        );
    }

    // Precedence over the transitive closure: a successor on station k
    // means the predecessor reached k. One binary clause per station step.
    for &(p, s) in &sh.pre.closure.closed_edges {
        let (rp, rs) = (sh.ranges[p], sh.ranges[s]);
        for k in 0..m.saturating_sub(1) {
            if k < rs.station_lo || k > rs.station_hi {
                continue; // successor pinned off this station by its window
            }
            if k >= rp.station_hi {
                continue; // predecessor certainly within the first k stations
            }
            let r_term = if k < rp.station_lo {
                Term::False
            } else {
                pos_r(&sh, p, k)
            };
            let terms = [sh.neg_x(s, k), r_term];
            push(
                &mut sh.formula,
                &mut sh.stats,
                ClauseFamily::ReachPrecedence,
                &terms,
            );
        }
    }

    // Same-station ordering through the start ladder: sharing a station,
    // a successor starting at t forces the predecessor done by t.
    let edges = sh.family_edges(inst, options);
    for &(p, s) in &edges {
        let (rp, rs) = (sh.ranges[p], sh.ranges[s]);
        let klo = rp.station_lo.max(rs.station_lo);
        let khi = rp.station_hi.min(rs.station_hi);
        if klo > khi {
            continue;
        }
        let t_p = inst.durations[p] as i64;
        for k in klo..=khi {
            for t2 in rs.time_lo..=rs.time_hi {
                let done_by = tt_term(&sh, p, t2 as i64 - t_p);
                if matches!(done_by, Term::True) {
                    continue;
                }
                let terms = [sh.neg_x(p, k), sh.neg_x(s, k), sh.neg_s(s, t2), done_by];
                push(
                    &mut sh.formula,
                    &mut sh.stats,
                    ClauseFamily::SameStationReach,
                    &terms,
                );
            }
        }
    }

    sh.emit_activity_link(inst);

    // Pairs related by precedence can never overlap: different stations,
    // or same station with ladder-ordered disjoint slots. Only unrelated
    // pairs need the explicit slot clash family.
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !sh.pre.closure.before(i, j) && !sh.pre.closure.before(j, i))
        .collect();
    sh.emit_non_overlap(inst, &pairs);

    if options.pruning {
        sh.emit_pruning(inst);
    }
    if options.emit_window_units {
        sh.emit_start_window_units(inst);
    }
    if options.mandatory_activity {
        sh.emit_mandatory_activity(inst);
    }

    Ok(sh.finish(inst, EncoderKind::Compact, options))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use crate::corpus::worked_example;
    use crate::encode::{encode, EncodeOptions, EncoderKind};
    use crate::instance::Instance;
    use crate::oracle::oracle_feasible_set;
    use crate::solver::{enumerate_models, new_session, BackendKind, SolveOutcome};

    use super::super::ClauseFamily;

    fn no_pruning() -> EncodeOptions {
        EncodeOptions {
            pruning: false,
            ..EncodeOptions::default()
        }
    }

    #[test]
    fn worked_example_is_satisfiable_and_decodes() {
        let inst = worked_example();
        for options in [EncodeOptions::default(), no_pruning()] {
            let enc = encode(&inst, EncoderKind::Compact, options).unwrap();
            let mut session = new_session(BackendKind::Embedded, 7).unwrap();
            session.add_formula(&enc.formula);
            let SolveOutcome::Sat(model) = session.solve(None) else {
                panic!("worked example must be satisfiable (pruning={})", options.pruning);
            };
            let sol = enc.decode(&model).unwrap();
            let report = crate::instance::validate_solution(&inst, &sol);
            assert!(report.is_feasible(), "{:?}", report.violations);
        }
    }

    #[test]
    fn station_ladder_is_4m_clauses_per_task() {
        // Free tasks, four stations, no pruning: every ladder spans the
        // full station range and costs exactly 16 clauses.
        let inst = Instance::new("wide", 4, 3, vec![1, 1, 1], Some(vec![1, 1, 1]), vec![]).unwrap();
        let enc = encode(&inst, EncoderKind::Compact, no_pruning()).unwrap();
        let n = 3u64;
        assert_eq!(enc.stats.family(ClauseFamily::ReachInit), 2 * n);
        assert_eq!(enc.stats.family(ClauseFamily::ReachMono), 3 * n);
        assert_eq!(enc.stats.family(ClauseFamily::AssignImpliesReach), 4 * n);
        assert_eq!(enc.stats.family(ClauseFamily::AssignExcludesPrevReach), 3 * n);
        assert_eq!(enc.stats.family(ClauseFamily::ReachStepForcesAssign), 3 * n);
        assert_eq!(enc.stats.family(ClauseFamily::ReachAlo), n);
        let ladder: u64 = [
            ClauseFamily::ReachInit,
            ClauseFamily::ReachMono,
            ClauseFamily::AssignImpliesReach,
            ClauseFamily::AssignExcludesPrevReach,
            ClauseFamily::ReachStepForcesAssign,
            ClauseFamily::ReachAlo,
        ]
        .iter()
        .map(|&f| enc.stats.family(f))
        .sum();
        assert_eq!(ladder, 16 * n);
    }

    #[test]
    fn start_ladder_is_4w_clauses_per_task() {
        let inst = worked_example();
        let enc = encode(&inst, EncoderKind::Compact, no_pruning()).unwrap();
        // Window widths c - t + 1 for t = [3,4,2,3,2], c = 7.
        let widths = [5u64, 4, 6, 5, 6];
        let total: u64 = widths.iter().map(|w| 4 * w).sum();
        let ladder: u64 = [
            ClauseFamily::StartReachInit,
            ClauseFamily::StartReachMono,
            ClauseFamily::StartImpliesReach,
            ClauseFamily::StartExcludesPrevReach,
            ClauseFamily::ReachStepForcesStart,
            ClauseFamily::StartReachFinal,
        ]
        .iter()
        .map(|&f| enc.stats.family(f))
        .sum();
        assert_eq!(ladder, total);
    }

    #[test]
    fn reach_precedence_is_one_clause_per_station_step() {
        let inst = worked_example();
        let enc = encode(&inst, EncoderKind::Compact, no_pruning()).unwrap();
        // Closure of {(0,1),(0,2),(2,3),(1,4)} has 6 pairs; m - 1 = 2 each.
        assert_eq!(enc.stats.family(ClauseFamily::ReachPrecedence), 12);
    }

    #[test]
    fn model_set_matches_oracle_and_baseline() {
        let inst = Instance::new(
            "tiny",
            2,
            4,
            vec![2, 1, 2],
            Some(vec![4, 2, 3]),
            vec![(0, 1), (1, 2)],
        )
        .unwrap();
        let expected = oracle_feasible_set(&inst, &Default::default()).unwrap();
        for options in [EncodeOptions::default(), no_pruning()] {
            let mut by_kind = Vec::new();
            for kind in [EncoderKind::Baseline, EncoderKind::Compact] {
                let enc = encode(&inst, kind, options).unwrap();
                let mut session = new_session(BackendKind::Embedded, 17).unwrap();
                session.add_formula(&enc.formula);
                let rows = enumerate_models(session.as_mut(), &enc.projection_vars(), 10_000, None)
                    .unwrap();
                let got: BTreeSet<_> = rows
                    .iter()
                    .map(|bits| enc.decode_projection(bits).unwrap())
                    .collect();
                assert_eq!(got, expected, "{kind} pruning={}", options.pruning);
                by_kind.push(rows);
            }
            // Projected rows, not just decoded schedules, must agree.
            assert_eq!(by_kind[0], by_kind[1], "pruning={}", options.pruning);
        }
    }

    #[test]
    fn infeasible_instance_encodes_unsat() {
        let inst = Instance::new("tight", 1, 3, vec![2, 2], Some(vec![1, 1]), vec![]).unwrap();
        let enc = encode(&inst, EncoderKind::Compact, EncodeOptions::default()).unwrap();
        let mut session = new_session(BackendKind::Embedded, 3).unwrap();
        session.add_formula(&enc.formula);
        assert!(matches!(session.solve(None), SolveOutcome::Unsat));
    }

    #[test]
    fn compact_base_is_smaller_at_scale() {
        // A chain-heavy mid-size instance: the pairwise families dominate
        // the baseline while the ladders stay linear.
        let inst = crate::corpus::random_instance("scale", 12, 5, 9, 0.3, (1, 10), 99);
        let base = encode(&inst, EncoderKind::Baseline, EncodeOptions::default()).unwrap();
        let comp = encode(&inst, EncoderKind::Compact, EncodeOptions::default()).unwrap();
        assert!(
            comp.formula.clause_count() < base.formula.clause_count(),
            "compact {} vs baseline {}",
            comp.formula.clause_count(),
            base.formula.clause_count()
        );
    }
}
