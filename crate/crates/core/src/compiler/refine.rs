//! Truncated rational refinements of `χ_a` and `Med_b`.
//!
//! With all rationals, `χ_a = ⋀_{q ≤ a} χ_q` and `Med_b = ⋁_{q ≤ b} Med_q`.
//! Keeping only denominators up to `m` gives a finite meet (join) that
//! equals `χ_{q*}` (`Med_{q*}`) for the largest kept `q* <= a`, so the error
//! shrinks like `1/m`.

use std::cmp::Ordering;

use super::CompileError;
use crate::expr::BasisExpr;
use crate::types::{GridPoint, Param};

/// Every rational in `[0,1]` with denominator at most `m`, in lowest terms,
/// ascending.
pub fn rationals_up_to(m: u64) -> Vec<GridPoint> {
    let mut out: Vec<GridPoint> = (1..=m)
        .flat_map(|d| (0..=d).map(move |n| (n, d)))
        .filter(|&(n, d)| num_integer::gcd(n, d) == 1)
        .map(|(n, d)| GridPoint::new(n, d).expect("n <= d"))
        .collect();
    out.sort();
    out
}

fn at_most(q: GridPoint, bound: Param) -> bool {
    match bound {
        Param::Ratio(r) => q <= r,
        Param::Real(v) => q.cmp_f64(v.get()) != Ordering::Greater,
    }
}

fn below(bound: Param, m: u64) -> Result<Vec<GridPoint>, CompileError> {
    if m == 0 {
        return Err(CompileError::ZeroDenominatorBound);
    }
    Ok(rationals_up_to(m)
        .into_iter()
        .filter(|&q| at_most(q, bound))
        .collect())
}

/// `⋀ χ_q(x_0)` over rationals `q <= a` with denominator `<= m`.
pub fn refine_chi(a: impl Into<Param>, m: u64) -> Result<BasisExpr, CompileError> {
    let x0 = BasisExpr::proj(0, 1)?;
    let steps = below(a.into(), m)?
        .into_iter()
        .map(|q| BasisExpr::chi(q, x0.clone()))
        .collect();
    Ok(BasisExpr::meet(steps)?)
}

/// `⋁ Med_q(x_0, x_1)` over rationals `q <= b` with denominator `<= m`.
pub fn refine_med(b: impl Into<Param>, m: u64) -> Result<BasisExpr, CompileError> {
    let x0 = BasisExpr::proj(0, 2)?;
    let x1 = BasisExpr::proj(1, 2)?;
    let medians = below(b.into(), m)?
        .into_iter()
        .map(|q| BasisExpr::med(q, x0.clone(), x1.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BasisExpr::join(medians)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{chi_raw, med_raw};
    use crate::expr::Node;

    #[test]
    fn farey_sizes() {
        // |F_m| = 1 + sum of Euler's phi up to m
        assert_eq!(rationals_up_to(1).len(), 2);
        assert_eq!(rationals_up_to(5).len(), 11);
        assert_eq!(rationals_up_to(8).len(), 23);
        let f = rationals_up_to(10);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn chi_half_with_m2_is_exact() {
        let e = refine_chi(GridPoint::new(1, 2).unwrap(), 2).unwrap();
        let Node::Meet(cs) = e.node() else { panic!() };
        assert_eq!(cs.len(), 2);
        for i in 0..=1000u64 {
            let x = i as f64 / 1000.0;
            assert_eq!(e.eval_slice(&[x]).unwrap(), chi_raw(0.5, x), "x = {x}");
        }
    }

    #[test]
    fn chi_zero_is_a_single_step() {
        let e = refine_chi(Param::real(0.0).unwrap(), 7).unwrap();
        let x0 = BasisExpr::proj(0, 1).unwrap();
        assert_eq!(
            e,
            BasisExpr::meet(vec![BasisExpr::chi(GridPoint::zero(), x0)]).unwrap()
        );
    }

    #[test]
    fn chi_irrational_disagrees_on_short_interval() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let m = 50;
        // Brute force: the largest j/d <= a with d <= m.
        let best = (1..=m)
            .flat_map(|d| (0..=d).map(move |j| j as f64 / d as f64))
            .filter(|&q| q <= a)
            .fold(0.0, f64::max);
        assert!(a - best < 1.0 / m as f64);
        let e = refine_chi(Param::real(a).unwrap(), m).unwrap();
        for i in 0..=20_000u64 {
            let x = i as f64 / 20_000.0;
            let got = e.eval_slice(&[x]).unwrap();
            if got != chi_raw(a, x) {
                assert!(best <= x && x < a, "disagreement at {x}");
            }
        }
    }

    #[test]
    fn med_examples() {
        let e = refine_med(GridPoint::new(1, 2).unwrap(), 2).unwrap();
        let min = refine_med(Param::real(0.0).unwrap(), 9).unwrap();
        for i in 0..=40u64 {
            for j in 0..=40u64 {
                let (x, y) = (i as f64 / 40.0, j as f64 / 40.0);
                assert_eq!(e.eval_slice(&[x, y]).unwrap(), med_raw(0.5, x, y));
                assert_eq!(min.eval_slice(&[x, y]).unwrap(), x.min(y));
            }
        }
    }

    #[test]
    fn zero_bound_is_rejected() {
        assert_eq!(
            refine_chi(GridPoint::zero(), 0).unwrap_err(),
            CompileError::ZeroDenominatorBound
        );
        assert_eq!(
            refine_med(GridPoint::zero(), 0).unwrap_err(),
            CompileError::ZeroDenominatorBound
        );
    }
}
