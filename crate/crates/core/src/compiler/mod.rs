//! Compilation of aggregation functions into basis expressions.
//!
//! The pipeline mirrors the constructive proof of the representation
//! theorem:
//!
//! 1. [`build_g`] produces `G^n_b`, an expression equal to `b` everywhere
//!    except the two corners of the cube.
//! 2. [`build_h`] combines `G^n_{f(a)}` with the steps `χ_{a_i}(x_i)` over
//!    the support of `a`, giving a block that is `f(a)` on the up-set of `a`.
//! 3. [`compile_grid`] joins the blocks for every `a` of the grid
//!    `I_k^n` minus its corners. The result agrees with `f` on the grid and
//!    is a lower approximation of `f` everywhere.
//!
//! [`grid_oracle`] recomputes the same function by enumeration and never
//! touches the expression tree.

mod dual;
mod refine;
mod unary;

pub use dual::{dualize, dualize_expr};
pub use refine::{rationals_up_to, refine_chi, refine_med};
pub use unary::{compile_unary_exact, jump_set, Attainment, StepError, StepFn1D};

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agg::AggFunction;
use crate::expr::{BasisExpr, ExprError};
use crate::types::{grid_coords, grid_indices, GridPoint, InputVector, Param, UnitValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("grid resolution k must be at least 1")]
    ZeroResolution,
    #[error("denominator bound m must be at least 1")]
    ZeroDenominatorBound,
    #[error("boundary condition fails: f{point} = {value}")]
    Boundary { point: &'static str, value: f64 },
    #[error("function value {value} at {point:?} lies outside [0,1]")]
    OutOfRange { point: Vec<f64>, value: f64 },
    #[error("building block needs a point of [0,1]^n other than the two corners")]
    CornerPoint,
    #[error("arity mismatch: function takes {expected} arguments, point has {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Statistics of one [`compile_grid`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub arity: usize,
    pub resolution: u64,
    /// Nodes of the logical (unshared) tree.
    pub node_count: u64,
    /// Number of `h`-blocks, `(k+1)^n - 2`.
    pub h_blocks: u64,
    /// Distinct nodes after subtree sharing.
    pub shared_nodes: u64,
    pub wall_time_ms: f64,
}

/// Binary `G^2_b(u, v) = Med_b(χ_0(u ∨ v), χ_1(u ∧ v))` applied to two
/// subexpressions.
fn g2_of(bias: Param, u: BasisExpr, v: BasisExpr) -> Result<BasisExpr, ExprError> {
    let zero = Param::Real(UnitValue::ZERO);
    let one = Param::Real(UnitValue::ONE);
    BasisExpr::med(
        bias,
        BasisExpr::chi(zero, BasisExpr::join(vec![u.clone(), v.clone()])?),
        BasisExpr::chi(one, BasisExpr::meet(vec![u, v])?),
    )
}

/// `G^n_b`: 0 at all-zeros, 1 at all-ones, `b` elsewhere.
///
/// Built by the induction `G^1_b(x_0) = Med_b(χ_0(x_0), χ_1(x_0))`,
/// `G^2_b = Med_b(χ_0(x_0 ∨ x_1), χ_1(x_0 ∧ x_1))` and
/// `G^{m+1}_b = G^2_b(G^m_b, x_m)`. The inner `G^m_b` is shared between the
/// two arguments of each step.
pub fn build_g(n: usize, bias: impl Into<Param>) -> Result<BasisExpr, CompileError> {
    if n == 0 {
        return Err(CompileError::ZeroArity);
    }
    let bias = bias.into();
    let xs = BasisExpr::projections(n)?;
    if n == 1 {
        let x0 = xs[0].clone();
        return Ok(BasisExpr::med(
            bias,
            BasisExpr::chi(Param::Real(UnitValue::ZERO), x0.clone()),
            BasisExpr::chi(Param::Real(UnitValue::ONE), x0),
        )?);
    }
    let mut g = g2_of(bias, xs[0].clone(), xs[1].clone())?;
    for x in &xs[2..] {
        g = g2_of(bias, g, x.clone())?;
    }
    Ok(g)
}

/// Shared pieces reused across the blocks of one compilation.
struct BlockCache {
    arity: usize,
    projections: Vec<BasisExpr>,
    skeletons: HashMap<u64, BasisExpr>,
    steps: HashMap<(usize, u64, u64), BasisExpr>,
}

impl BlockCache {
    fn new(arity: usize) -> Result<Self, CompileError> {
        Ok(BlockCache {
            arity,
            projections: BasisExpr::projections(arity)?,
            skeletons: HashMap::new(),
            steps: HashMap::new(),
        })
    }

    fn skeleton(&mut self, value: UnitValue) -> Result<BasisExpr, CompileError> {
        if let Some(g) = self.skeletons.get(&value.get().to_bits()) {
            return Ok(g.clone());
        }
        let g = build_g(self.arity, value)?;
        self.skeletons.insert(value.get().to_bits(), g.clone());
        Ok(g)
    }

    fn step(&mut self, coord: usize, threshold: Param) -> BasisExpr {
        let key = match threshold {
            Param::Ratio(q) => (coord, q.numerator(), q.denominator()),
            // Real thresholds: keyed by bit pattern, tagged with a zero
            // denominator that no rational can have.
            Param::Real(v) => (coord, v.get().to_bits(), 0),
        };
        let x = self.projections[coord].clone();
        self.steps
            .entry(key)
            .or_insert_with(|| BasisExpr::chi(threshold, x))
            .clone()
    }

    /// `h = G^n_{value} ∧ ⋀_{i ∈ J_a} χ_{a_i}(x_i)`.
    ///
    /// `include_zero_coords` adds `χ_0(x_i)` for coordinates outside the
    /// support; it exists only so the lemma suite can show that this
    /// mistake is detected.
    fn block(
        &mut self,
        value: UnitValue,
        point: &[Param],
        include_zero_coords: bool,
    ) -> Result<BasisExpr, CompileError> {
        let mut parts = vec![self.skeleton(value)?];
        for (i, &a) in point.iter().enumerate() {
            if include_zero_coords || !a.is_zero() {
                parts.push(self.step(i, a));
            }
        }
        Ok(BasisExpr::meet(parts)?)
    }
}

fn check_point(f: &AggFunction, point: &[Param]) -> Result<(), CompileError> {
    if point.len() != f.arity() {
        return Err(CompileError::ArityMismatch {
            expected: f.arity(),
            found: point.len(),
        });
    }
    if point.iter().all(|p| p.is_zero()) || point.iter().all(|p| p.is_one()) {
        return Err(CompileError::CornerPoint);
    }
    Ok(())
}

fn value_at(f: &AggFunction, coords: &[f64]) -> Result<UnitValue, CompileError> {
    let v = f.call(coords);
    UnitValue::new(v).map_err(|_| CompileError::OutOfRange {
        point: coords.to_vec(),
        value: v,
    })
}

pub(crate) fn build_h_with(
    f: &AggFunction,
    point: &[Param],
    include_zero_coords: bool,
) -> Result<BasisExpr, CompileError> {
    check_point(f, point)?;
    let coords: Vec<f64> = point.iter().map(|p| p.value()).collect();
    let value = value_at(f, &coords)?;
    BlockCache::new(f.arity())?.block(value, point, include_zero_coords)
}

/// The block `h^f_a`: 1 at all-ones, `f(a)` on `{x >= a}` minus all-ones,
/// and 0 where `x` is not above `a`.
pub fn build_h(f: &AggFunction, a: &InputVector) -> Result<BasisExpr, CompileError> {
    let point: Vec<Param> = a.iter().map(Param::Real).collect();
    build_h_with(f, &point, false)
}

/// [`build_h`] at a grid point, keeping the thresholds rational.
pub fn build_h_grid(f: &AggFunction, a: &[GridPoint]) -> Result<BasisExpr, CompileError> {
    let point: Vec<Param> = a.iter().map(|&q| Param::Ratio(q)).collect();
    build_h_with(f, &point, false)
}

pub(crate) fn check_boundary(f: &AggFunction) -> Result<(), CompileError> {
    let n = f.arity();
    let at_zero = f.call(&vec![0.0; n]);
    if at_zero != 0.0 {
        return Err(CompileError::Boundary {
            point: "(0,…,0)",
            value: at_zero,
        });
    }
    let at_one = f.call(&vec![1.0; n]);
    if at_one != 1.0 {
        return Err(CompileError::Boundary {
            point: "(1,…,1)",
            value: at_one,
        });
    }
    Ok(())
}

/// Step-wise lower approximation of `f` on the grid `I_k^n`: the join of
/// `h^f_a` over every grid point `a` except the two corners, in
/// lexicographic order of `a`.
///
/// `f` is evaluated only here; the returned expression is self-contained.
pub fn compile_grid(f: &AggFunction, k: u64) -> Result<(BasisExpr, CompileReport), CompileError> {
    compile_grid_with(f, k, false)
}

pub(crate) fn compile_grid_with(
    f: &AggFunction,
    k: u64,
    include_zero_coords: bool,
) -> Result<(BasisExpr, CompileReport), CompileError> {
    if k == 0 {
        return Err(CompileError::ZeroResolution);
    }
    check_boundary(f)?;
    let started = Instant::now();
    let n = f.arity();
    let mut cache = BlockCache::new(n)?;
    let mut blocks = Vec::new();
    for idx in grid_indices(n, k) {
        if idx.iter().all(|&i| i == 0) || idx.iter().all(|&i| i == k) {
            continue;
        }
        let coords = grid_coords(&idx, k);
        let value = value_at(f, &coords)?;
        let point: Vec<Param> = idx
            .iter()
            .map(|&i| Param::Ratio(GridPoint::new(i, k).expect("grid index <= k")))
            .collect();
        blocks.push(cache.block(value, &point, include_zero_coords)?);
    }
    let h_blocks = blocks.len() as u64;
    let expr = if blocks.is_empty() {
        // Unary with k = 1: no interior grid points. The empty join still has
        // to send 1 to 1 and everything else to 0.
        BasisExpr::chi(Param::Real(UnitValue::ONE), cache.projections[0].clone())
    } else {
        BasisExpr::join(blocks)?
    };
    let report = CompileReport {
        arity: n,
        resolution: k,
        node_count: expr.node_count(),
        h_blocks,
        shared_nodes: crate::program::Program::new(&expr).len() as u64,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((expr, report))
}

/// Enumerative reference for [`compile_grid`]: `max { f(a) : a ∈ I_k^n_*, a <= x }`,
/// with 1 at all-ones and 0 when no grid point lies below `x`.
#[derive(Debug, Clone)]
pub struct GridOracle {
    arity: usize,
    // (coordinates, f value) for every a in I_k^n_*
    candidates: Vec<(Vec<f64>, f64)>,
}

impl GridOracle {
    pub fn new(f: &AggFunction, k: u64) -> Result<Self, CompileError> {
        if k == 0 {
            return Err(CompileError::ZeroResolution);
        }
        check_boundary(f)?;
        let n = f.arity();
        let candidates = grid_indices(n, k)
            .filter(|idx| !idx.iter().all(|&i| i == 0) && !idx.iter().all(|&i| i == k))
            .map(|idx| {
                let coords = grid_coords(&idx, k);
                let v = f.call(&coords);
                (coords, v)
            })
            .collect();
        Ok(GridOracle { arity: n, candidates })
    }

    pub fn query(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        if x.iter().all(|&c| c == 1.0) {
            return 1.0;
        }
        self.candidates
            .iter()
            .filter(|(a, _)| a.iter().zip(x).all(|(ai, xi)| ai <= xi))
            .map(|&(_, v)| v)
            .fold(0.0, f64::max)
    }
}

pub fn grid_oracle(f: &AggFunction, k: u64, x: &InputVector) -> Result<UnitValue, CompileError> {
    if x.len() != f.arity() {
        return Err(CompileError::ArityMismatch {
            expected: f.arity(),
            found: x.len(),
        });
    }
    let v = GridOracle::new(f, k)?.query(x.as_slice());
    UnitValue::new(v).map_err(|_| CompileError::OutOfRange {
        point: x.as_slice().to_vec(),
        value: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agg::Provenance;

    fn product(n: usize) -> AggFunction {
        AggFunction::new("product", n, Provenance::Custom, |x| x.iter().product())
    }

    fn max2() -> AggFunction {
        AggFunction::new("max", 2, Provenance::Custom, |x| x[0].max(x[1]))
    }

    fn iv(xs: &[f64]) -> InputVector {
        InputVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn g_examples() {
        let g = build_g(2, UnitValue::new(0.7).unwrap()).unwrap();
        assert_eq!(g.eval_slice(&[0.3, 0.9]).unwrap(), 0.7);
        let g = build_g(3, GridPoint::new(1, 2).unwrap()).unwrap();
        assert_eq!(g.eval_slice(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        let g = build_g(4, UnitValue::new(0.2).unwrap()).unwrap();
        assert_eq!(g.eval_slice(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(build_g(0, UnitValue::ZERO), Err(CompileError::ZeroArity));
    }

    #[test]
    fn g2_matches_the_dsl_spelling() {
        let parsed = crate::dsl::parse("med(1/2, chi(0, join(x0, x1)), chi(1, meet(x0, x1)))", None).unwrap();
        assert_eq!(build_g(2, GridPoint::new(1, 2).unwrap()).unwrap(), parsed);
    }

    #[test]
    fn g_shares_the_inner_skeleton() {
        // G^3 = Med(χ0(join(G2, x2)), χ1(meet(G2, x2))) with G2 of 9 nodes.
        let g = build_g(3, UnitValue::new(0.5).unwrap()).unwrap();
        assert_eq!(build_g(2, UnitValue::new(0.5).unwrap()).unwrap().node_count(), 9);
        assert_eq!(g.node_count(), 1 + 2 * (1 + 1 + 9 + 1));
        assert_eq!(crate::program::Program::new(&g).len(), 7 + 6);
    }

    #[test]
    fn h_examples() {
        let f = product(2);
        let h = build_h(&f, &iv(&[0.5, 0.5])).unwrap();
        assert_eq!(h.eval_slice(&[0.6, 0.7]).unwrap(), 0.25);
        assert_eq!(h.eval_slice(&[0.4, 0.9]).unwrap(), 0.0);
        assert_eq!(h.eval_slice(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(build_h(&f, &iv(&[0.0, 0.0])), Err(CompileError::CornerPoint));
        assert_eq!(build_h(&f, &iv(&[1.0, 1.0])), Err(CompileError::CornerPoint));
        assert!(matches!(
            build_h(&f, &iv(&[0.5])),
            Err(CompileError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn h_skips_zero_coordinates() {
        let f = max2();
        let a = [GridPoint::new(1, 2).unwrap(), GridPoint::zero()];
        let h = build_h_grid(&f, &a).unwrap();
        // x = (1/2, 0) is above a, so the block carries f(a).
        assert_eq!(h.eval_slice(&[0.5, 0.0]).unwrap(), 0.5);
        let broken = build_h_with(&f, &a.map(Param::Ratio), true).unwrap();
        assert_eq!(broken.eval_slice(&[0.5, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn ternary_product_at_half_grid() {
        let f = product(3);
        let (e, report) = compile_grid(&f, 2).unwrap();
        assert_eq!(report.h_blocks, 25);
        assert_eq!(e.eval_slice(&[0.5, 0.5, 1.0]).unwrap(), 0.25);
        // Independent oracle: enumerate a <= x directly.
        let oracle = GridOracle::new(&f, 2).unwrap();
        assert_eq!(oracle.query(&[0.5, 0.5, 1.0]), 0.25);
    }

    #[test]
    fn oracle_examples() {
        let f = product(2);
        assert_eq!(grid_oracle(&f, 2, &iv(&[1.0, 1.0])).unwrap().get(), 1.0);
        assert_eq!(grid_oracle(&f, 2, &iv(&[0.4, 0.4])).unwrap().get(), 0.0);
        assert_eq!(grid_oracle(&max2(), 2, &iv(&[0.6, 0.1])).unwrap().get(), 0.5);
    }

    #[test]
    fn block_count_formula() {
        for (n, k) in [(1, 3), (2, 4), (3, 2), (2, 1)] {
            let (_, report) = compile_grid(&product(n), k).unwrap();
            assert_eq!(report.h_blocks, (k + 1).pow(n as u32) - 2);
        }
    }

    #[test]
    fn unary_k1_has_no_blocks() {
        let id = AggFunction::new("id", 1, Provenance::Custom, |x| x[0]);
        let (e, report) = compile_grid(&id, 1).unwrap();
        assert_eq!(report.h_blocks, 0);
        assert_eq!(e.eval_slice(&[0.0]).unwrap(), 0.0);
        assert_eq!(e.eval_slice(&[0.99]).unwrap(), 0.0);
        assert_eq!(e.eval_slice(&[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn compile_rejects_bad_inputs() {
        let bad = AggFunction::new("half", 2, Provenance::Custom, |_| 0.5);
        assert!(matches!(
            compile_grid(&bad, 3),
            Err(CompileError::Boundary { .. })
        ));
        assert_eq!(
            compile_grid(&product(2), 0).unwrap_err(),
            CompileError::ZeroResolution
        );
        let wild = AggFunction::new("wild", 1, Provenance::Custom, |x| {
            if x[0] == 0.0 {
                0.0
            } else if x[0] == 1.0 {
                1.0
            } else {
                2.0
            }
        });
        assert!(matches!(
            compile_grid(&wild, 2),
            Err(CompileError::OutOfRange { .. })
        ));
    }
}
