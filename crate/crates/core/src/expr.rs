//! Expression trees over the generating basis.
//!
//! A [`BasisExpr`] is an immutable, reference-counted tree whose leaves are
//! projections of one common arity. Subtrees may be shared (the compiler
//! reuses `G^n_b` skeletons), but every size metric reports the logical,
//! unshared tree.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::basis::{chi_raw, med_raw};
use crate::types::{InputVector, Param, UnitValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("projection arity must be at least 1")]
    ZeroArity,
    #[error("projection index {index} out of range for arity {arity}")]
    ProjIndex { index: usize, arity: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{0} needs at least one argument")]
    EmptyChildren(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Proj {
        index: usize,
    },
    Chi {
        threshold: Param,
        arg: BasisExpr,
    },
    Med {
        bias: Param,
        left: BasisExpr,
        right: BasisExpr,
    },
    Join(Vec<BasisExpr>),
    Meet(Vec<BasisExpr>),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    arity: usize,
}

#[derive(Debug, Clone)]
pub struct BasisExpr(Arc<Inner>);

impl PartialEq for BasisExpr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.arity == other.0.arity && self.0.node == other.0.node)
    }
}

impl BasisExpr {
    fn from_node(node: Node, arity: usize) -> Self {
        BasisExpr(Arc::new(Inner { node, arity }))
    }

    /// The `index`-th `arity`-ary projection (0-based).
    pub fn proj(index: usize, arity: usize) -> Result<Self, ExprError> {
        if arity == 0 {
            return Err(ExprError::ZeroArity);
        }
        if index >= arity {
            return Err(ExprError::ProjIndex { index, arity });
        }
        Ok(Self::from_node(Node::Proj { index }, arity))
    }

    /// All `n` projections of arity `n`, in order.
    pub fn projections(arity: usize) -> Result<Vec<Self>, ExprError> {
        (0..arity).map(|i| Self::proj(i, arity)).collect()
    }

    pub fn chi(threshold: impl Into<Param>, arg: BasisExpr) -> Self {
        let arity = arg.arity();
        Self::from_node(
            Node::Chi {
                threshold: threshold.into(),
                arg,
            },
            arity,
        )
    }

    pub fn med(bias: impl Into<Param>, left: BasisExpr, right: BasisExpr) -> Result<Self, ExprError> {
        check_same(left.arity(), right.arity())?;
        let arity = left.arity();
        Ok(Self::from_node(
            Node::Med {
                bias: bias.into(),
                left,
                right,
            },
            arity,
        ))
    }

    pub fn join(children: Vec<BasisExpr>) -> Result<Self, ExprError> {
        let arity = common_arity(&children, "join")?;
        Ok(Self::from_node(Node::Join(children), arity))
    }

    pub fn meet(children: Vec<BasisExpr>) -> Result<Self, ExprError> {
        let arity = common_arity(&children, "meet")?;
        Ok(Self::from_node(Node::Meet(children), arity))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub(crate) fn ptr_id(&self) -> *const () {
        Arc::as_ptr(&self.0) as *const ()
    }

    /// Bottom-up evaluation at `x`.
    pub fn evaluate(&self, x: &InputVector) -> Result<UnitValue, ExprError> {
        let v = self.eval_slice(x.as_slice())?;
        Ok(UnitValue::new(v).expect("basis operations preserve [0,1]"))
    }

    /// Evaluation on raw coordinates, assumed to lie in `[0,1]`.
    pub fn eval_slice(&self, x: &[f64]) -> Result<f64, ExprError> {
        check_same(self.arity(), x.len())?;
        Ok(self.eval_with(x, &chi_raw))
    }

    /// Evaluation with a substitute `χ` semantics. Used by mutation tests to
    /// show that the oracle suites detect a broken generator.
    pub(crate) fn eval_with<C: Fn(f64, f64) -> f64>(&self, x: &[f64], chi: &C) -> f64 {
        match self.node() {
            Node::Proj { index } => x[*index],
            Node::Chi { threshold, arg } => chi(threshold.value(), arg.eval_with(x, chi)),
            Node::Med { bias, left, right } => {
                med_raw(bias.value(), left.eval_with(x, chi), right.eval_with(x, chi))
            }
            Node::Join(cs) => cs.iter().fold(0.0, |acc, c| {
                if acc == 1.0 {
                    acc
                } else {
                    acc.max(c.eval_with(x, chi))
                }
            }),
            Node::Meet(cs) => cs.iter().fold(1.0, |acc, c| {
                if acc == 0.0 {
                    acc
                } else {
                    acc.min(c.eval_with(x, chi))
                }
            }),
        }
    }

    /// Substitutes `gs[i]` for every projection `x_i` of this `k`-ary
    /// expression, producing an expression of the common arity of `gs`.
    pub fn compose(&self, gs: &[BasisExpr]) -> Result<BasisExpr, ExprError> {
        check_same(self.arity(), gs.len())?;
        let n = common_arity(gs, "compose")?;
        let mut memo = HashMap::new();
        Ok(self.substitute(gs, n, &mut memo))
    }

    fn substitute(&self, gs: &[BasisExpr], n: usize, memo: &mut HashMap<*const (), BasisExpr>) -> BasisExpr {
        if let Some(done) = memo.get(&self.ptr_id()) {
            return done.clone();
        }
        let out = match self.node() {
            Node::Proj { index } => gs[*index].clone(),
            Node::Chi { threshold, arg } => BasisExpr::chi(*threshold, arg.substitute(gs, n, memo)),
            Node::Med { bias, left, right } => BasisExpr::from_node(
                Node::Med {
                    bias: *bias,
                    left: left.substitute(gs, n, memo),
                    right: right.substitute(gs, n, memo),
                },
                n,
            ),
            Node::Join(cs) => BasisExpr::from_node(
                Node::Join(cs.iter().map(|c| c.substitute(gs, n, memo)).collect()),
                n,
            ),
            Node::Meet(cs) => BasisExpr::from_node(
                Node::Meet(cs.iter().map(|c| c.substitute(gs, n, memo)).collect()),
                n,
            ),
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> Vec<&BasisExpr> {
        match self.node() {
            Node::Proj { .. } => Vec::new(),
            Node::Chi { arg, .. } => vec![arg],
            Node::Med { left, right, .. } => vec![left, right],
            Node::Join(cs) | Node::Meet(cs) => cs.iter().collect(),
        }
    }

    /// Number of nodes of the logical tree, counting shared subtrees once per
    /// occurrence.
    pub fn node_count(&self) -> u64 {
        fn go(e: &BasisExpr, memo: &mut HashMap<*const (), u64>) -> u64 {
            if let Some(&c) = memo.get(&e.ptr_id()) {
                return c;
            }
            let c = 1 + e.children().into_iter().map(|c| go(c, memo)).sum::<u64>();
            memo.insert(e.ptr_id(), c);
            c
        }
        go(self, &mut HashMap::new())
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(BasisExpr::depth)
            .max()
            .unwrap_or(0)
    }

    /// Least common multiple of the denominators of all rational `χ`
    /// thresholds, i.e. the finest uniform grid the step nodes sit on.
    ///
    /// `None` when some threshold is a plain float or there are no `χ` nodes.
    pub fn grid_resolution(&self) -> Option<u64> {
        fn go(e: &BasisExpr, seen: &mut HashMap<*const (), ()>, acc: &mut Option<Option<u64>>) {
            if seen.insert(e.ptr_id(), ()).is_some() {
                return;
            }
            if let Node::Chi { threshold, .. } = e.node() {
                *acc = match (*acc, threshold) {
                    // 0 and 1 sit on every grid.
                    (_, Param::Real(v)) if v.get() == 0.0 || v.get() == 1.0 => *acc,
                    (Some(None), _) | (_, Param::Real(_)) => Some(None),
                    (None, Param::Ratio(q)) => Some(Some(q.reduced().denominator())),
                    (Some(Some(l)), Param::Ratio(q)) => Some(Some(l.lcm(&q.reduced().denominator()))),
                };
            }
            for c in e.children() {
                go(c, seen, acc);
            }
        }
        let mut acc = None;
        go(self, &mut HashMap::new(), &mut acc);
        acc.flatten()
    }
}

impl fmt::Display for BasisExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print(self))
    }
}

fn check_same(expected: usize, found: usize) -> Result<(), ExprError> {
    if expected == found {
        Ok(())
    } else {
        Err(ExprError::ArityMismatch { expected, found })
    }
}

fn common_arity(children: &[BasisExpr], what: &'static str) -> Result<usize, ExprError> {
    let first = children.first().ok_or(ExprError::EmptyChildren(what))?.arity();
    for c in &children[1..] {
        check_same(first, c.arity())?;
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GridPoint;

    fn x(i: usize, n: usize) -> BasisExpr {
        BasisExpr::proj(i, n).unwrap()
    }

    fn at(e: &BasisExpr, xs: &[f64]) -> f64 {
        e.evaluate(&InputVector::new(xs.to_vec()).unwrap()).unwrap().get()
    }

    #[test]
    fn projection_picks_coordinate() {
        assert_eq!(at(&x(1, 3), &[0.2, 0.7, 0.9]), 0.7);
        assert_eq!(
            BasisExpr::proj(3, 3),
            Err(ExprError::ProjIndex { index: 3, arity: 3 })
        );
        assert_eq!(BasisExpr::proj(0, 0), Err(ExprError::ZeroArity));
    }

    #[test]
    fn g2_shape_evaluates_to_bias_off_corners() {
        let half = GridPoint::new(1, 2).unwrap();
        let e = BasisExpr::med(
            half,
            BasisExpr::chi(
                GridPoint::zero(),
                BasisExpr::join(vec![x(0, 2), x(1, 2)]).unwrap(),
            ),
            BasisExpr::chi(GridPoint::one(), BasisExpr::meet(vec![x(0, 2), x(1, 2)]).unwrap()),
        )
        .unwrap();
        assert_eq!(at(&e, &[0.3, 0.9]), 0.5);
        assert_eq!(at(&e, &[0.0, 0.0]), 0.0);
        assert_eq!(at(&e, &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn join_of_zeros() {
        let e = BasisExpr::join(vec![x(0, 2), x(1, 2)]).unwrap();
        assert_eq!(at(&e, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn arity_errors() {
        assert_eq!(
            BasisExpr::join(vec![x(0, 2), x(0, 3)]),
            Err(ExprError::ArityMismatch {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(BasisExpr::meet(vec![]), Err(ExprError::EmptyChildren("meet")));
        let e = x(0, 2);
        assert!(e.evaluate(&InputVector::new(vec![0.1]).unwrap()).is_err());
    }

    #[test]
    fn compose_examples() {
        let g = BasisExpr::chi(GridPoint::new(1, 3).unwrap(), x(0, 2));
        assert_eq!(x(0, 1).compose(std::slice::from_ref(&g)).unwrap(), g);

        let join = BasisExpr::join(vec![x(0, 2), x(1, 2)]).unwrap();
        let swapped = join.compose(&[x(1, 2), x(0, 2)]).unwrap();
        assert_eq!(at(&swapped, &[0.2, 0.8]), 0.8);

        let step = BasisExpr::chi(GridPoint::new(1, 2).unwrap(), x(0, 1));
        let min = BasisExpr::meet(vec![x(0, 2), x(1, 2)]).unwrap();
        let composed = step.compose(&[min]).unwrap();
        assert_eq!(composed.arity(), 2);
        assert_eq!(at(&composed, &[0.6, 0.4]), 0.0);

        assert!(join.compose(&[x(0, 2)]).is_err());
        assert!(join.compose(&[x(0, 2), x(0, 3)]).is_err());
    }

    #[test]
    fn node_count_counts_shared_subtrees_per_occurrence() {
        let leaf = x(0, 1);
        let shared = BasisExpr::chi(GridPoint::zero(), leaf);
        let e = BasisExpr::join(vec![shared.clone(), shared.clone(), shared]).unwrap();
        assert_eq!(e.node_count(), 7);
        assert_eq!(e.depth(), 3);
    }

    #[test]
    fn grid_resolution_is_lcm_of_denominators() {
        let e = BasisExpr::meet(vec![
            BasisExpr::chi(GridPoint::new(1, 4).unwrap(), x(0, 2)),
            BasisExpr::chi(GridPoint::new(2, 6).unwrap(), x(1, 2)),
            BasisExpr::chi(GridPoint::one(), x(1, 2)),
            BasisExpr::chi(Param::real(1.0).unwrap(), x(1, 2)),
        ])
        .unwrap();
        assert_eq!(e.grid_resolution(), Some(12));
        assert_eq!(x(0, 1).grid_resolution(), None);
        let real = BasisExpr::chi(Param::real(0.3).unwrap(), x(0, 1));
        assert_eq!(real.grid_resolution(), None);
    }
}
