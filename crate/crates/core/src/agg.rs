//! A uniform evaluation interface for `n`-ary functions on `[0,1]`.
//!
//! An [`AggFunction`] is *claimed* to be an aggregation function; the
//! boundary and monotonicity axioms are checked by `verify`, never assumed.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::BasisExpr;
use crate::program::Program;
use crate::types::{grid_floor, InputVector, UnitValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggError {
    #[error("arity mismatch: function takes {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("function value {0} lies outside [0,1]")]
    OutputOutOfRange(f64),
    #[error("table for arity {arity} at resolution {k} needs {expected} values, got {found}")]
    TableSize {
        arity: usize,
        k: u64,
        expected: usize,
        found: usize,
    },
    #[error("arity must be at least 1")]
    ZeroArity,
}

/// Where a function came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Catalog(String),
    Sampled { k: u64 },
    Compiled,
    DualOf(Box<Provenance>),
    GPhi,
    Custom,
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct AggFunction {
    name: String,
    arity: usize,
    provenance: Provenance,
    eval: Arc<Evaluator>,
}

impl AggFunction {
    pub fn new<F>(name: impl Into<String>, arity: usize, provenance: Provenance, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(arity >= 1, "aggregation functions have arity >= 1");
        AggFunction {
            name: name.into(),
            arity,
            provenance,
            eval: Arc::new(f),
        }
    }

    /// Wraps a basis expression; evaluation goes through a flattened
    /// [`Program`].
    pub fn from_expr(name: impl Into<String>, expr: &BasisExpr) -> Self {
        let program = Program::new(expr);
        let arity = program.arity();
        AggFunction::new(name, arity, Provenance::Compiled, move |x| {
            program.eval_into(x, &mut Vec::new())
        })
    }

    /// A function given by its values on `I_k^n`, extended to the cube by
    /// rounding every coordinate down to the grid.
    ///
    /// `table` is indexed lexicographically, the last coordinate fastest.
    pub fn sampled(name: impl Into<String>, arity: usize, k: u64, table: Vec<f64>) -> Result<Self, AggError> {
        if arity == 0 {
            return Err(AggError::ZeroArity);
        }
        let side = k as usize + 1;
        let expected = side.pow(arity as u32);
        if table.len() != expected {
            return Err(AggError::TableSize {
                arity,
                k,
                expected,
                found: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AggError::OutputOutOfRange(bad));
        }
        Ok(AggFunction::new(
            name,
            arity,
            Provenance::Sampled { k },
            move |x| {
                let idx = x
                    .iter()
                    .fold(0usize, |acc, &c| acc * side + grid_floor(c, k) as usize);
                table[idx]
            },
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Raw evaluation. `x` must have length `arity()`.
    #[inline]
    pub fn call(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        (self.eval)(x)
    }

    /// Checked evaluation.
    pub fn apply(&self, x: &InputVector) -> Result<UnitValue, AggError> {
        if x.len() != self.arity {
            return Err(AggError::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        let v = self.call(x.as_slice());
        UnitValue::new(v).map_err(|_| AggError::OutputOutOfRange(v))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl fmt::Debug for AggFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AggFunction")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}
