//! The dual `f^d(x) = 1 − f(1 − x)` of functions and expressions.
//!
//! On expressions the transform is structural: projections stay, joins and
//! meets swap, `Med_b` becomes `Med_{1−b}`, and `χ_a` becomes the dual step
//! `x ↦ 1 − χ_a(1 − x)`, which is the indicator of `]1−a, 1]` (of `{1}` when
//! `a = 0`, of `]0,1]` when `a = 1`). The half-open `]1−a, 1]` is written as
//! `χ_t` with `t` the smallest float strictly above `1 − a`.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::agg::{AggFunction, Provenance};
use crate::expr::{BasisExpr, Node};
use crate::types::{GridPoint, Param, UnitValue};

pub fn dualize(f: &AggFunction) -> AggFunction {
    let inner = f.clone();
    AggFunction::new(
        format!("dual({})", f.name()),
        f.arity(),
        Provenance::DualOf(Box::new(f.provenance().clone())),
        move |x| {
            let flipped: Vec<f64> = x.iter().map(|&c| 1.0 - c).collect();
            1.0 - inner.call(&flipped)
        },
    )
}

/// Smallest float strictly greater than the rational `q`.
fn float_above_ratio(q: GridPoint) -> f64 {
    let t = q.to_f64();
    if q.cmp_f64(t) == Ordering::Less {
        t
    } else {
        t.next_up()
    }
}

/// Smallest float strictly greater than the real number `1 − a`.
fn float_above_complement(a: f64) -> f64 {
    let s = 1.0 - a;
    // Fast two-sum (|1| >= |a|): 1 − a = s + err exactly.
    let err = (1.0 - s) - a;
    if err < 0.0 {
        s
    } else {
        s.next_up()
    }
}

fn dual_step(threshold: Param) -> Param {
    if threshold.is_zero() {
        return match threshold {
            Param::Ratio(q) => Param::Ratio(GridPoint::new(q.denominator(), q.denominator()).expect("k/k")),
            Param::Real(_) => Param::Real(UnitValue::ONE),
        };
    }
    if threshold.is_one() {
        return match threshold {
            Param::Ratio(q) => Param::Ratio(GridPoint::new(0, q.denominator()).expect("0/k")),
            Param::Real(_) => Param::Real(UnitValue::ZERO),
        };
    }
    let t = match threshold {
        Param::Ratio(q) => float_above_ratio(q.complement()),
        Param::Real(v) => float_above_complement(v.get()),
    };
    Param::Real(UnitValue::new(t).expect("threshold stays inside ]0,1]"))
}

fn dual_rec(e: &BasisExpr, memo: &mut HashMap<*const (), BasisExpr>) -> BasisExpr {
    if let Some(d) = memo.get(&e.ptr_id()) {
        return d.clone();
    }
    let children = |cs: &[BasisExpr], memo: &mut HashMap<*const (), BasisExpr>| -> Vec<BasisExpr> {
        cs.iter().map(|c| dual_rec(c, memo)).collect()
    };
    let d = match e.node() {
        Node::Proj { .. } => e.clone(),
        Node::Chi { threshold, arg } => BasisExpr::chi(dual_step(*threshold), dual_rec(arg, memo)),
        Node::Med { bias, left, right } => {
            BasisExpr::med(bias.complement(), dual_rec(left, memo), dual_rec(right, memo))
                .expect("children keep the arity")
        }
        Node::Join(cs) => BasisExpr::meet(children(cs, memo)).expect("children keep the arity"),
        Node::Meet(cs) => BasisExpr::join(children(cs, memo)).expect("children keep the arity"),
    };
    memo.insert(e.ptr_id(), d.clone());
    d
}

/// An expression `d` with `d(x) = 1 − e(1 − x)`, sharing subtrees as `e`
/// does.
pub fn dualize_expr(e: &BasisExpr) -> BasisExpr {
    dual_rec(e, &mut HashMap::new())
}
