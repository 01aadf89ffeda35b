//! Baseline encoder: pairwise exactly-one over stations and start times,
//! explicit per-station-pair precedence clauses, and slot non-overlap for
//! every task pair. Quadratic in stations and pairs, but each clause is a
//! direct transcription of one scheduling rule, which makes this encoder
//! the reference the compact one is checked against.

use crate::error::Result;
use crate::instance::Instance;

use super::{push, ClauseFamily, EncodeOptions, Encoding, EncoderKind, Shared, Term};

pub(super) fn encode(inst: &Instance, options: EncodeOptions) -> Result<Encoding> {
    let mut sh = Shared::build(inst, options)?;
    let n = inst.task_count();
    let m = inst.station_count;

    // Exactly one station per task, pairwise over the full station range.
    for i in 0..n {
        let alo: Vec<Term> = (0..m).map(|k| sh.pos_x(i, k)).collect();
        push(
            &mut sh.formula,
            &mut sh.stats,
            ClauseFamily::StationAlo,
            &alo,
        );
        for k2 in 1..m {
            for k1 in 0..k2 {
                let terms = [sh.neg_x(i, k1), sh.neg_x(i, k2)];
                push(
                    &mut sh.formula,
                    &mut sh.stats,
                    ClauseFamily::StationAmo,
                    &terms,
                );
            }
        }
    }

    // A successor never sits on an earlier station than its predecessor.
    let edges = sh.family_edges(inst, options);
    for &(p, s) in &edges {
        for h in 0..m {
            for k in (h + 1)..m {
                let terms = [sh.neg_x(p, k), sh.neg_x(s, h)];
                push(
                    &mut sh.formula,
                    &mut sh.stats,
                    ClauseFamily::StationPrecedence,
                    &terms,
                );
            }
        }
    }

    // Exactly one start time per task, pairwise over the full window.
    for i in 0..n {
        let alo: Vec<Term> = inst.start_window(i).map(|t| sh.pos_s(i, t)).collect();
        push(&mut sh.formula, &mut sh.stats, ClauseFamily::StartAlo, &alo);
        for t2 in inst.start_window(i) {
            for t1 in inst.start_window(i) {
                if t1 < t2 {
                    let terms = [sh.neg_s(i, t1), sh.neg_s(i, t2)];
                    push(
                        &mut sh.formula,
                        &mut sh.stats,
                        ClauseFamily::StartAmo,
                        &terms,
                    );
                }
            }
        }
    }

    sh.emit_activity_link(inst);

    // Sharing a station, a successor never starts before its predecessor.
    // Together with non-overlap this forces the predecessor to finish
    // first: equal or overlapping starts clash on the occupied slots.
    for &(p, s) in &edges {
        let (rp, rs) = (sh.ranges[p], sh.ranges[s]);
        let lo = rp.station_lo.max(rs.station_lo);
        let hi = rp.station_hi.min(rs.station_hi);
        for k in lo..=hi {
            for t1 in rp.time_lo..=rp.time_hi {
                for t2 in rs.time_lo..t1.min(rs.time_hi + 1) {
                    let terms = [
                        sh.neg_x(p, k),
                        sh.neg_x(s, k),
                        sh.neg_s(p, t1),
                        sh.neg_s(s, t2),
                    ];
                    push(
                        &mut sh.formula,
                        &mut sh.stats,
                        ClauseFamily::SameStationOrder,
                        &terms,
                    );
                }
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
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

    Ok(sh.finish(inst, EncoderKind::Baseline, options))
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

    #[test]
    fn worked_example_is_satisfiable_and_decodes() {
        let inst = worked_example();
        for options in [
            EncodeOptions::default(),
            EncodeOptions {
                pruning: false,
                ..EncodeOptions::default()
            },
        ] {
            let enc = encode(&inst, EncoderKind::Baseline, options).unwrap();
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
    fn pairwise_family_counts_match_closed_forms() {
        let inst = worked_example();
        let (n, m, e) = (5u64, 3u64, 4u64);
        for options in [
            EncodeOptions::default(),
            EncodeOptions {
                pruning: false,
                ..EncodeOptions::default()
            },
        ] {
            let enc = encode(&inst, EncoderKind::Baseline, options).unwrap();
            assert_eq!(enc.stats.family(ClauseFamily::StationAlo), n);
            assert_eq!(
                enc.stats.family(ClauseFamily::StationAmo),
                n * m * (m - 1) / 2
            );
            assert_eq!(
                enc.stats.family(ClauseFamily::StationPrecedence),
                e * m * (m - 1) / 2
            );
            assert_eq!(enc.stats.family(ClauseFamily::StartAlo), n);
        }
    }

    #[test]
    fn extended_edges_add_closure_pairs() {
        let inst = worked_example();
        // Closure of {(0,1),(0,2),(2,3),(1,4)} adds (0,3) and (0,4).
        let enc = encode(
            &inst,
            EncoderKind::Baseline,
            EncodeOptions {
                extended_edges: true,
                ..EncodeOptions::default()
            },
        )
        .unwrap();
        assert_eq!(enc.stats.family(ClauseFamily::StationPrecedence), 6 * 3);
    }

    #[test]
    fn model_set_matches_oracle_on_small_instance() {
        let inst = Instance::new(
            "tiny",
            2,
            3,
            vec![2, 1, 1],
            Some(vec![4, 2, 3]),
            vec![(0, 1)],
        )
        .unwrap();
        let expected = oracle_feasible_set(&inst, &Default::default()).unwrap();
        for pruning in [true, false] {
            let enc = encode(
                &inst,
                EncoderKind::Baseline,
                EncodeOptions {
                    pruning,
                    ..EncodeOptions::default()
                },
            )
            .unwrap();
            let mut session = new_session(BackendKind::Embedded, 11).unwrap();
            session.add_formula(&enc.formula);
            let rows =
                enumerate_models(session.as_mut(), &enc.projection_vars(), 10_000, None).unwrap();
            let got: BTreeSet<_> = rows
                .iter()
                .map(|bits| enc.decode_projection(bits).unwrap())
                .collect();
            assert_eq!(got, expected, "pruning={pruning}");
        }
    }

    #[test]
    fn infeasible_instance_encodes_unsat() {
        // Two tasks of length 2, one station, cycle 3: they cannot both fit.
        let inst = Instance::new("tight", 1, 3, vec![2, 2], Some(vec![1, 1]), vec![]).unwrap();
        let enc = encode(&inst, EncoderKind::Baseline, EncodeOptions::default()).unwrap();
        let mut session = new_session(BackendKind::Embedded, 3).unwrap();
        session.add_formula(&enc.formula);
        assert!(matches!(session.solve(None), SolveOutcome::Unsat));
    }
}
