//! Peak bounding layers stacked on top of a base encoding. Each layer ties
//! the per-slot power load to a set of level variables through one
//! pseudo-Boolean constraint per time slot, so tightening the peak bound
//! is a matter of asserting level literals rather than re-encoding.
//!
//! Three shapes:
//!
//! * [`peak_layer_unary`]: one level variable per power unit up to `ub`.
//!   Asserting `¬u(j)` for every `j > W` caps the peak at `W`.
//! * [`peak_layer_binary`]: a binary bound counter with one soft literal
//!   per bit, packaged as a weighted formula whose optimal cost equals the
//!   optimal peak.
//! * [`peak_indicator_layer`]: level variables only strictly between the
//!   lower bound and a known feasible peak, for solver sessions that walk
//!   the bound downward one unit at a time.

use crate::cnf::{encode_pb_leq, lit, Lit, WcnfFormula};
use crate::error::Result;

use super::{push, ClauseFamily, Encoding, Term};

fn slot_load_terms(enc: &Encoding, powers: &[u64], t: u32) -> Vec<(u64, Lit)> {
    powers
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > 0)
        .map(|(i, &w)| (w, lit(enc.vars.a(i, t).unwrap(), true)))
        .collect()
}

fn add_pb(enc: &mut Encoding, terms: &[(u64, Lit)], bound: u64) {
    let bound = i64::try_from(bound).expect("peak bound fits in i64");
    let s = encode_pb_leq(&mut enc.formula, terms, bound);
    enc.stats.pb_clauses += s.clauses;
    enc.stats.pb_aux_vars += s.aux_vars;
    *enc.stats
        .families
        .entry(ClauseFamily::PeakSlotBound)
        .or_insert(0) += s.clauses;
}

/// Full unary level ladder over `1..=ub`. `u(j)` reads "the peak may reach
/// j": levels at or below `lb` are pinned true, levels are downward closed,
/// and every slot load is bounded by the highest true level. Capping the
/// peak at `W` afterwards takes a single unit clause `¬u(W+1)`.
pub fn peak_layer_unary(enc: &mut Encoding, lb: u64, ub: u64) -> Result<()> {
    assert!(1 <= lb && lb <= ub, "bounds must satisfy 1 <= lb <= ub");
    let powers = enc.instance.powers()?.to_vec();
    for j in 1..=ub {
        enc.vars.alloc_u(&mut enc.formula, j);
    }
    for j in 1..=lb {
        let terms = [Term::L(lit(enc.vars.u(j).unwrap(), true))];
        push(
            &mut enc.formula,
            &mut enc.stats,
            ClauseFamily::PeakLevelUnit,
            &terms,
        );
    }
    for j in 2..=ub {
        let terms = [
            Term::L(lit(enc.vars.u(j).unwrap(), false)),
            Term::L(lit(enc.vars.u(j - 1).unwrap(), true)),
        ];
        push(
            &mut enc.formula,
            &mut enc.stats,
            ClauseFamily::PeakLevelOrder,
            &terms,
        );
    }
    // load(t) + #false levels above lb <= ub, i.e. load(t) <= highest true
    // level.
    for t in 0..enc.instance.cycle_time {
        let mut terms = slot_load_terms(enc, &powers, t);
        for j in (lb + 1)..=ub {
            terms.push((1, lit(enc.vars.u(j).unwrap(), false)));
        }
        add_pb(enc, &terms, ub);
    }
    enc.vars.absorb_aux(&enc.formula);
    Ok(())
}

/// Binary bound counter packaged as a weighted formula. The bit variables
/// spell a bound `B`; hard clauses keep `lb <= B` and every slot load at
/// most `B`, and each bit contributes a soft clause `(¬bit, 2^bit)`, so a
/// model of cost `B` is exactly a schedule with peak at most `B`. The
/// optimal cost therefore equals the optimal peak.
pub fn peak_layer_binary(enc: &mut Encoding, lb: u64, w_best: u64) -> Result<WcnfFormula> {
    assert!(1 <= lb && lb <= w_best, "bounds must satisfy 1 <= lb <= w_best");
    let powers = enc.instance.powers()?.to_vec();
    let n_bit = w_best.ilog2() + 1;
    let ceiling = (1u64 << n_bit) - 1;
    for bit in 0..n_bit {
        enc.vars.alloc_bin(&mut enc.formula, bit);
    }
    let bit_slack_terms = |enc: &Encoding| -> Vec<(u64, Lit)> {
        (0..n_bit)
            .map(|bit| (1u64 << bit, lit(enc.vars.bin(bit).unwrap(), false)))
            .collect()
    };
    // ceiling - B <= ceiling - lb keeps the spelled bound at or above lb.
    let link = bit_slack_terms(enc);
    add_pb(enc, &link, ceiling - lb);
    for t in 0..enc.instance.cycle_time {
        let mut terms = slot_load_terms(enc, &powers, t);
        terms.extend(bit_slack_terms(enc));
        add_pb(enc, &terms, ceiling);
    }
    enc.vars.absorb_aux(&enc.formula);
    let mut wcnf = WcnfFormula {
        hard: enc.formula.clone(),
        soft: Vec::new(),
    };
    for bit in 0..n_bit {
        wcnf.add_soft(1u64 << bit, &[lit(enc.vars.bin(bit).unwrap(), false)]);
    }
    Ok(wcnf)
}

/// Append a hard per-slot load cap to an existing encoding, returning the
/// index range of the new clauses so a live solver session can ingest just
/// the delta. This is how a bound walk closes out levels the indicator
/// ladder does not reach.
pub fn append_slot_cap(enc: &mut Encoding, cap: u64) -> Result<std::ops::Range<usize>> {
    let powers = enc.instance.powers()?.to_vec();
    let first = enc.formula.clauses().len();
    for t in 0..enc.instance.cycle_time {
        let terms = slot_load_terms(enc, &powers, t);
        add_pb(enc, &terms, cap);
    }
    enc.vars.absorb_aux(&enc.formula);
    Ok(first..enc.formula.clauses().len())
}

/// Handle on an installed indicator layer: which levels carry variables
/// and what ceiling the slot bounds were built against.
#[derive(Debug, Clone, Copy)]
pub struct IndicatorLayer {
    pub lb: u64,
    pub ceiling: u64,
}

impl IndicatorLayer {
    /// Levels that carry an indicator variable (may be empty).
    pub fn levels(&self) -> std::ops::RangeInclusive<u64> {
        (self.lb + 1)..=(self.ceiling - 1)
    }

    /// Levels forced false by asserting `¬u(bound)`: the order clauses
    /// propagate falsehood upward, so every level at or above `bound`
    /// goes false and each slot's load is capped at exactly `bound`.
    pub fn false_indicators_at(&self, bound: u64) -> u64 {
        self.levels().filter(|&j| j >= bound).count() as u64
    }
}

/// Indicator levels strictly between `lb` and a known feasible peak `w0`.
/// Each slot satisfies `load + #false indicators <= w0`; falsifying the
/// top `w0 - W` indicators therefore caps the peak at `W`. Levels are
/// downward closed, so after a model with peak `W` the single unit
/// `¬u(W - 1)` tightens the bound to `W - 1`.
pub fn peak_indicator_layer(enc: &mut Encoding, lb: u64, w0: u64) -> Result<IndicatorLayer> {
    assert!(1 <= lb && lb <= w0, "bounds must satisfy 1 <= lb <= w0");
    let powers = enc.instance.powers()?.to_vec();
    let layer = IndicatorLayer { lb, ceiling: w0 };
    for j in layer.levels() {
        enc.vars.alloc_u(&mut enc.formula, j);
    }
    for j in layer.levels().skip(1) {
        let terms = [
            Term::L(lit(enc.vars.u(j).unwrap(), false)),
            Term::L(lit(enc.vars.u(j - 1).unwrap(), true)),
        ];
        push(
            &mut enc.formula,
            &mut enc.stats,
            ClauseFamily::PeakLevelOrder,
            &terms,
        );
    }
    for t in 0..enc.instance.cycle_time {
        let mut terms = slot_load_terms(enc, &powers, t);
        for j in layer.levels() {
            terms.push((1, lit(enc.vars.u(j).unwrap(), false)));
        }
        add_pb(enc, &terms, w0);
    }
    enc.vars.absorb_aux(&enc.formula);
    Ok(layer)
}
