//! Seeded random test subjects.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agg::AggFunction;
use crate::catalog::g_phi;
use crate::compiler::StepFn1D;
use crate::expr::BasisExpr;
use crate::types::{GridPoint, Param};

/// A uniform point of `[0,1]^n`, with exact 0 and 1 coordinates mixed in
/// now and then so the corners and faces get exercised.
pub fn point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..16) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        })
        .collect()
}

/// A uniform point of `[0,1]^n` without the corner bias.
pub fn uniform_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

/// `x <= y` coordinatewise, with some coordinates equal.
pub fn comparable_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = point(rng, n);
    let y = x
        .iter()
        .map(|&c| {
            if rng.gen_bool(0.3) {
                c
            } else {
                rng.gen_range(c..=1.0)
            }
        })
        .collect();
    (x, y)
}

/// Grid indices of a point of `I_k^n` other than the two corners.
pub fn star_grid_point<R: Rng + ?Sized>(rng: &mut R, n: usize, k: u64) -> Vec<u64> {
    loop {
        let idx: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=k)).collect();
        if !idx.iter().all(|&i| i == 0) && !idx.iter().all(|&i| i == k) {
            return idx;
        }
    }
}

/// A parameter in `[0,1]`: a small-denominator rational, a random real, or
/// one of the endpoints.
pub fn param<R: Rng + ?Sized>(rng: &mut R) -> Param {
    match rng.gen_range(0..8) {
        0 => Param::real(0.0).expect("0 is in range"),
        1 => Param::real(1.0).expect("1 is in range"),
        2..=4 => {
            let den = rng.gen_range(1..=12);
            Param::Ratio(GridPoint::new(rng.gen_range(0..=den), den).expect("num <= den"))
        }
        _ => Param::real(rng.gen::<f64>()).expect("gen::<f64> lies in [0,1)"),
    }
}

/// A random expression of the given arity with nesting depth at most `depth`.
pub fn expr<R: Rng + ?Sized>(rng: &mut R, arity: usize, depth: usize) -> BasisExpr {
    if depth == 0 || rng.gen_bool(0.2) {
        return BasisExpr::proj(rng.gen_range(0..arity), arity).expect("index < arity");
    }
    match rng.gen_range(0..4) {
        0 => BasisExpr::chi(param(rng), expr(rng, arity, depth - 1)),
        1 => BasisExpr::med(
            param(rng),
            expr(rng, arity, depth - 1),
            expr(rng, arity, depth - 1),
        )
        .expect("children share the arity"),
        op => {
            let width = rng.gen_range(1..=3);
            let cs = (0..width).map(|_| expr(rng, arity, depth - 1)).collect();
            if op == 2 {
                BasisExpr::join(cs).expect("children share the arity")
            } else {
                BasisExpr::meet(cs).expect("children share the arity")
            }
        }
    }
}

/// A right-continuous step function with at most `max_breaks` breakpoints,
/// all rationals with denominator at most `max_den`, and value 0 on the
/// first piece.
pub fn step_fn<R: Rng + ?Sized>(rng: &mut R, max_breaks: usize, max_den: u64) -> StepFn1D {
    let mut candidates: Vec<f64> = crate::compiler::rationals_up_to(max_den)
        .into_iter()
        .filter(|q| !q.is_zero() && !q.is_one())
        .map(|q| q.to_f64())
        .collect();
    candidates.shuffle(rng);
    let count = rng.gen_range(0..=max_breaks.min(candidates.len()));
    let mut breaks: Vec<f64> = candidates[..count].to_vec();
    breaks.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = (0..count).map(|_| rng.gen::<f64>()).collect();
    values.sort_by(f64::total_cmp);
    values.insert(0, 0.0);
    StepFn1D::right_continuous(breaks, values).expect("generated breakpoints are valid")
}

/// A non-monotone table function `φ` with `cells` equal-width cells.
pub fn phi<R: Rng + ?Sized>(rng: &mut R, cells: usize) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    let table: Vec<f64> = (0..cells.max(1)).map(|_| rng.gen::<f64>()).collect();
    let cells = table.len();
    Arc::new(move |x: f64| table[((x * cells as f64) as usize).min(cells - 1)])
}

/// `g_φ` for a random non-monotone `φ`.
pub fn g_phi_subject<R: Rng + ?Sized>(rng: &mut R) -> AggFunction {
    let p = phi(rng, 8);
    g_phi("g_phi", move |x| p(x))
}
