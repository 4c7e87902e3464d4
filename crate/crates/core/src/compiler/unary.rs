//! Unary step functions and their exact compilation.
//!
//! A unary aggregation function is the join of its blocks `h^f_q` over the
//! rationals of `]0,1[` together with the blocks `h^f_c` at the points
//! `c ∈ D(f)` where `f` jumps and attains the upper value. For a step
//! function only finitely many of these blocks matter.

use thiserror::Error;

use super::{rationals_up_to, BlockCache, CompileError};
use crate::agg::{AggFunction, Provenance};
use crate::expr::BasisExpr;
use crate::types::{Param, UnitValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("breakpoint {0} is not inside ]0,1[")]
    BreakpointOutOfRange(f64),
    #[error("breakpoints must be strictly increasing")]
    BreakpointOrder,
    #[error("{breakpoints} breakpoints need {} values, got {values}", breakpoints + 1)]
    ValueCount { breakpoints: usize, values: usize },
    #[error("{breakpoints} breakpoints need as many attainment flags, got {flags}")]
    FlagCount { breakpoints: usize, flags: usize },
    #[error("value {0} lies outside [0,1]")]
    ValueOutOfRange(f64),
    #[error("values must be nondecreasing")]
    NotMonotone,
}

/// Which neighbouring piece supplies the value at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attainment {
    /// `f(c)` is the value of the piece ending at `c`.
    Left,
    /// `f(c)` is the value of the piece starting at `c`.
    Right,
}

/// A nondecreasing piecewise-constant `f: [0,1] → [0,1]` with `f(0) = 0` and
/// `f(1) = 1`.
///
/// With breakpoints `c_1 < … < c_m` in `]0,1[` and values `v_0 ≤ … ≤ v_m`,
/// `f = v_j` on the open piece `]c_j, c_{j+1}[` (where `c_0 = 0`,
/// `c_{m+1} = 1`), and `f(c_j)` is `v_{j-1}` or `v_j` according to the flag.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    attainment: Vec<Attainment>,
}

impl StepFn1D {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        attainment: Vec<Attainment>,
    ) -> Result<Self, StepError> {
        if let Some(&c) = breakpoints.iter().find(|&&c| !(c > 0.0 && c < 1.0)) {
            return Err(StepError::BreakpointOutOfRange(c));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StepError::BreakpointOrder);
        }
        if values.len() != breakpoints.len() + 1 {
            return Err(StepError::ValueCount {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if attainment.len() != breakpoints.len() {
            return Err(StepError::FlagCount {
                breakpoints: breakpoints.len(),
                flags: attainment.len(),
            });
        }
        if let Some(&v) = values.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(StepError::ValueOutOfRange(v));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(StepError::NotMonotone);
        }
        Ok(StepFn1D {
            breakpoints,
            values,
            attainment,
        })
    }

    /// Every breakpoint attains the value of the piece to its right.
    pub fn right_continuous(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, StepError> {
        let flags = vec![Attainment::Right; breakpoints.len()];
        StepFn1D::new(breakpoints, values, flags)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn attainment(&self) -> &[Attainment] {
        &self.attainment
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        // Number of breakpoints strictly below x.
        let below = self.breakpoints.partition_point(|&c| c < x);
        if below < self.breakpoints.len() && self.breakpoints[below] == x {
            return match self.attainment[below] {
                Attainment::Left => self.values[below],
                Attainment::Right => self.values[below + 1],
            };
        }
        self.values[below]
    }

    /// `sup_{x < c_j} f(x)` for the `j`-th breakpoint (0-based).
    pub fn left_limit(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn to_agg(&self, name: impl Into<String>) -> AggFunction {
        let f = self.clone();
        AggFunction::new(name, 1, Provenance::Custom, move |x| f.eval(x[0]))
    }
}

/// `D(f) = { c ∈ ]0,1[ : sup_{x<c} f(x) < f(c) }`, ascending.
pub fn jump_set(f: &StepFn1D) -> Vec<UnitValue> {
    f.breakpoints
        .iter()
        .enumerate()
        .filter(|&(j, &c)| f.left_limit(j) < f.eval(c))
        .map(|(_, &c)| UnitValue::new(c).expect("breakpoints lie in ]0,1["))
        .collect()
}

/// Join of `h^f_q` over the rationals `q ∈ ]0,1[` with denominator at most
/// `m`, plus `h^f_c` for every `c ∈ D(f)`.
///
/// The result equals `f` everywhere when `f` is right-continuous, vanishes
/// on the first piece, and has its breakpoints among those rationals or in
/// `D(f)`.
pub fn compile_unary_exact(f: &StepFn1D, m: u64) -> Result<BasisExpr, CompileError> {
    if m == 0 {
        return Err(CompileError::ZeroDenominatorBound);
    }
    let mut points: Vec<(f64, Param)> = rationals_up_to(m)
        .into_iter()
        .filter(|q| !q.is_zero() && !q.is_one())
        .map(|q| (q.to_f64(), Param::Ratio(q)))
        .collect();
    for c in jump_set(f) {
        if !points.iter().any(|&(p, _)| p == c.get()) {
            points.push((c.get(), Param::Real(c)));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cache = BlockCache::new(1)?;
    let blocks = points
        .into_iter()
        .map(|(p, param)| {
            let value = UnitValue::new(f.eval(p)).expect("step values lie in [0,1]");
            cache.block(value, &[param], false)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if blocks.is_empty() {
        return Ok(BasisExpr::chi(
            Param::Real(UnitValue::ONE),
            cache.projections[0].clone(),
        ));
    }
    Ok(BasisExpr::join(blocks)?)
}
