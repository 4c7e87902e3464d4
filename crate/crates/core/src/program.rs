//! Flat evaluation program for a [`BasisExpr`].
//!
//! Compiled expressions reuse subtrees heavily (every `h`-block with the
//! same value shares one `G^n_b` skeleton, every `χ_{i/k}(x_j)` leaf is
//! shared across blocks). Lowering to a topologically ordered instruction
//! list merges both pointer-shared and structurally equal nodes (the
//! latter matter for trees read back from JSON), so each distinct node is
//! evaluated once per input. Results are identical to [`BasisExpr::eval_slice`]
//! because every instruction is a selection (min, max, median) or a
//! comparison; no arithmetic is reordered.

use std::collections::HashMap;

use crate::basis::{chi_raw, med_raw};
use crate::expr::{BasisExpr, ExprError, Node};

#[derive(Debug, Clone, Copy)]
enum Op {
    Input(usize),
    Chi { threshold: f64, arg: u32 },
    Med { bias: f64, left: u32, right: u32 },
    Max { start: u32, end: u32 },
    Min { start: u32, end: u32 },
}

/// Structural identity of an instruction, over already-merged operands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Input(usize),
    Chi(u64, u32),
    Med(u64, u32, u32),
    Max(Vec<u32>),
    Min(Vec<u32>),
}

#[derive(Default)]
struct Lowering {
    by_ptr: HashMap<*const (), u32>,
    by_key: HashMap<Key, u32>,
}

#[derive(Debug, Clone)]
pub struct Program {
    arity: usize,
    ops: Vec<Op>,
    // Operand slots for Max/Min.
    operands: Vec<u32>,
}

impl Program {
    pub fn new(expr: &BasisExpr) -> Self {
        let mut program = Program {
            arity: expr.arity(),
            ops: Vec::new(),
            operands: Vec::new(),
        };
        program.lower(expr, &mut Lowering::default());
        program
    }

    fn lower(&mut self, e: &BasisExpr, memo: &mut Lowering) -> u32 {
        if let Some(&s) = memo.by_ptr.get(&e.ptr_id()) {
            return s;
        }
        let (key, op) = match e.node() {
            Node::Proj { index } => (Key::Input(*index), Op::Input(*index)),
            Node::Chi { threshold, arg } => {
                let arg = self.lower(arg, memo);
                let threshold = threshold.value();
                (Key::Chi(threshold.to_bits(), arg), Op::Chi { threshold, arg })
            }
            Node::Med { bias, left, right } => {
                let left = self.lower(left, memo);
                let right = self.lower(right, memo);
                let bias = bias.value();
                (
                    Key::Med(bias.to_bits(), left, right),
                    Op::Med { bias, left, right },
                )
            }
            Node::Join(cs) | Node::Meet(cs) => {
                let args: Vec<u32> = cs.iter().map(|c| self.lower(c, memo)).collect();
                let join = matches!(e.node(), Node::Join(_));
                let key = if join { Key::Max(args) } else { Key::Min(args) };
                if let Some(&s) = memo.by_key.get(&key) {
                    memo.by_ptr.insert(e.ptr_id(), s);
                    return s;
                }
                let (Key::Max(args) | Key::Min(args)) = &key else {
                    unreachable!()
                };
                let start = self.operands.len() as u32;
                self.operands.extend(args);
                let end = self.operands.len() as u32;
                let op = if join {
                    Op::Max { start, end }
                } else {
                    Op::Min { start, end }
                };
                (key, op)
            }
        };
        let slot = match memo.by_key.get(&key) {
            Some(&s) => s,
            None => {
                let s = self.ops.len() as u32;
                self.ops.push(op);
                memo.by_key.insert(key, s);
                s
            }
        };
        memo.by_ptr.insert(e.ptr_id(), slot);
        slot
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of distinct nodes after sharing.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        if x.len() != self.arity {
            return Err(ExprError::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        let mut scratch = Vec::new();
        Ok(self.eval_into(x, &mut scratch))
    }

    /// Evaluation reusing a caller-owned buffer; `x` must have the program's
    /// arity.
    pub fn eval_into(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Input(i) => x[i],
                Op::Chi { threshold, arg } => chi_raw(threshold, scratch[arg as usize]),
                Op::Med { bias, left, right } => {
                    med_raw(bias, scratch[left as usize], scratch[right as usize])
                }
                Op::Max { start, end } => self.operands[start as usize..end as usize]
                    .iter()
                    .fold(0.0, |acc: f64, &s| acc.max(scratch[s as usize])),
                Op::Min { start, end } => self.operands[start as usize..end as usize]
                    .iter()
                    .fold(1.0, |acc: f64, &s| acc.min(scratch[s as usize])),
            };
            scratch.push(v);
        }
        *scratch.last().expect("program has at least one op")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GridPoint;

    #[test]
    fn shared_nodes_are_lowered_once() {
        let x0 = BasisExpr::proj(0, 2).unwrap();
        let x1 = BasisExpr::proj(1, 2).unwrap();
        let c = BasisExpr::chi(GridPoint::new(1, 2).unwrap(), x0.clone());
        let e = BasisExpr::join(vec![
            BasisExpr::meet(vec![c.clone(), x1.clone()]).unwrap(),
            BasisExpr::meet(vec![c.clone(), x0]).unwrap(),
        ])
        .unwrap();
        let p = Program::new(&e);
        // x0, chi, x1, meet, meet, join
        assert_eq!(p.len(), 6);
        assert_eq!(e.node_count(), 9);
        for xs in [[0.2, 0.9], [0.5, 0.3], [0.7, 0.7], [1.0, 0.0]] {
            assert_eq!(p.eval(&xs).unwrap(), e.eval_slice(&xs).unwrap());
        }
        assert!(p.eval(&[0.1]).is_err());
    }

    #[test]
    fn structurally_equal_nodes_are_merged() {
        let g = crate::compiler::build_g(3, GridPoint::new(1, 3).unwrap()).unwrap();
        let reparsed = crate::dsl::from_json_str(&crate::dsl::to_json_string(&g)).unwrap();
        let p = Program::new(&reparsed);
        assert_eq!(p.len(), Program::new(&g).len());
        for xs in [[0.0, 0.0, 0.0], [0.2, 0.9, 1.0], [1.0, 1.0, 1.0]] {
            assert_eq!(p.eval(&xs).unwrap(), reparsed.eval_slice(&xs).unwrap());
        }
    }
}
