//! Property checks producing [`VerifyReport`]s.
//!
//! Tolerances: `{0,1}`-valued outputs and values at identically constructed
//! grid points are compared exactly; [`TOLERANCE`] applies wherever float
//! arithmetic such as `1 − x` enters. Random probes are drawn from
//! ChaCha8 seeded with [`DEFAULT_SEED`] unless a seed is given.

pub mod gen;
mod lemmas;
mod report;

pub use lemmas::{lemma_suite, lemma_suite_with, Mutation, SuiteConfig};
pub use report::{Check, Tracker, VerifyReport, Witness};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agg::AggFunction;
use crate::expr::BasisExpr;
use crate::program::Program;
use crate::types::{grid_coords, grid_indices};

pub const DEFAULT_SEED: u64 = 0xA66_5EED;
pub const TOLERANCE: f64 = 1e-12;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("arity mismatch: function has arity {function}, expression {expr}")]
    ArityMismatch { function: usize, expr: usize },
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
}

fn boundary_checks(f: &AggFunction, report: &mut VerifyReport) {
    let n = f.arity();
    for (name, v) in [("boundary-zero", 0.0), ("boundary-one", 1.0)] {
        let x = vec![v; n];
        let mut t = Tracker::new(name, 0.0);
        t.compare(&x, v, f.call(&x));
        report.push(t.finish());
    }
}

fn range_excess(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        (-v).max(v - 1.0)
    }
}

/// Boundary conditions, range, and monotonicity of `f` on every covering
/// pair of `I_k^n` (comparable grid pairs are chains of those) and on
/// `random_pairs` random comparable pairs.
pub fn check_aggregation(f: &AggFunction, grid_k: u64, random_pairs: usize) -> VerifyReport {
    check_aggregation_seeded(f, grid_k, random_pairs, DEFAULT_SEED)
}

pub fn check_aggregation_seeded(
    f: &AggFunction,
    grid_k: u64,
    random_pairs: usize,
    seed: u64,
) -> VerifyReport {
    let mut report = VerifyReport::new(format!("aggregation axioms: {}", f.name()));
    boundary_checks(f, &mut report);
    let n = f.arity();
    let k = grid_k.max(1);
    let side = k as usize + 1;
    let values: Vec<f64> = grid_indices(n, k)
        .map(|idx| f.call(&grid_coords(&idx, k)))
        .collect();

    let mut range = Tracker::new("range", 0.0);
    let mut mono = Tracker::new("monotone-grid", 0.0);
    for (pos, idx) in grid_indices(n, k).enumerate() {
        let x = grid_coords(&idx, k);
        range.excess(range_excess(values[pos]), || {
            Witness::at(&x, values[pos].clamp(0.0, 1.0), values[pos])
        });
        // Lexicographic order with the last coordinate fastest: stepping
        // coordinate i moves the flat position by side^(n-1-i).
        let mut stride = 1;
        for i in (0..n).rev() {
            if idx[i] < k {
                let up = values[pos + stride];
                mono.excess(values[pos] - up, || {
                    let mut y = idx.clone();
                    y[i] += 1;
                    Witness::pair(&x, &grid_coords(&y, k), values[pos], up)
                });
            }
            stride *= side;
        }
    }
    report.push(range.finish());
    report.push(mono.finish());
    report.push(random_monotonicity(f, random_pairs, seed));
    report
}

fn random_monotonicity(f: &AggFunction, pairs: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut t = Tracker::new("monotone-random", 0.0);
    for _ in 0..pairs {
        let (x, y) = gen::comparable_pair(&mut rng, f.arity());
        let (fx, fy) = (f.call(&x), f.call(&y));
        t.excess(fx - fy, || Witness::pair(&x, &y, fx, fy));
    }
    t.finish()
}

/// Boundary conditions and random monotonicity only, for arities whose
/// grids are too large to enumerate.
pub fn check_aggregation_random(f: &AggFunction, random_pairs: usize, seed: u64) -> VerifyReport {
    let mut report = VerifyReport::new(format!("aggregation axioms: {}", f.name()));
    boundary_checks(f, &mut report);
    report.push(random_monotonicity(f, random_pairs, seed));
    report
}

/// Gap statistics between a function and a candidate lower approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxError {
    /// `max (f(x) − e(x))` over the samples.
    pub max_gap: f64,
    pub mean_gap: f64,
    /// `e == f` at every point of the compile grid.
    pub grid_exactness: bool,
    /// `e <= f + TOLERANCE` at every sample.
    pub lower_bound: bool,
    pub samples: usize,
    pub resolution: Option<u64>,
    /// Sample with the largest gap.
    pub worst: Option<Witness>,
    pub grid_witness: Option<Witness>,
    pub lower_bound_witness: Option<Witness>,
}

impl ApproxError {
    pub fn to_report(&self, title: impl Into<String>) -> VerifyReport {
        let mut r = VerifyReport::new(title);
        r.push(Check {
            name: "lower-bound".into(),
            passed: self.lower_bound,
            probes: self.samples as u64,
            max_error: self
                .lower_bound_witness
                .as_ref()
                .map_or(0.0, |w| w.found - w.expected),
            witness: self.lower_bound_witness.clone(),
        });
        if self.resolution.is_some() {
            r.push(Check {
                name: "grid-exactness".into(),
                passed: self.grid_exactness,
                probes: 0,
                max_error: self
                    .grid_witness
                    .as_ref()
                    .map_or(0.0, |w| (w.expected - w.found).abs()),
                witness: self.grid_witness.clone(),
            });
        }
        r.push(Check {
            name: "max-gap".into(),
            passed: true,
            probes: self.samples as u64,
            max_error: self.max_gap,
            witness: self.worst.clone(),
        });
        r
    }
}

/// Samples `samples` uniform points and compares `e` with `f`; checks
/// exactness on `I_k^n` where `k` is given or inferred from the rational
/// thresholds of `e`.
pub fn approx_error(
    f: &AggFunction,
    e: &BasisExpr,
    k: Option<u64>,
    samples: usize,
    seed: u64,
) -> Result<ApproxError, VerifyError> {
    if f.arity() != e.arity() {
        return Err(VerifyError::ArityMismatch {
            function: f.arity(),
            expr: e.arity(),
        });
    }
    if k == Some(0) {
        return Err(VerifyError::ZeroResolution);
    }
    let n = f.arity();
    let program = Program::new(e);
    let mut scratch = Vec::new();
    let mut rng = rng(seed);

    let mut max_gap = f64::NEG_INFINITY;
    let mut total = 0.0;
    let mut worst = None;
    let mut lower_bound_witness: Option<Witness> = None;
    for _ in 0..samples {
        let x = gen::uniform_point(&mut rng, n);
        let (fx, ex) = (f.call(&x), program.eval_into(&x, &mut scratch));
        let gap = fx - ex;
        total += gap;
        if gap > max_gap {
            max_gap = gap;
            worst = Some(Witness::at(&x, fx, ex));
        }
        if ex > fx + TOLERANCE {
            let deeper = lower_bound_witness
                .as_ref()
                .is_none_or(|w| w.found - w.expected < ex - fx);
            if deeper {
                lower_bound_witness = Some(Witness::at(&x, fx, ex));
            }
        }
    }

    let resolution = k.or_else(|| e.grid_resolution());
    let mut grid_witness = None;
    if let Some(k) = resolution {
        for idx in grid_indices(n, k) {
            let x = grid_coords(&idx, k);
            let (fx, ex) = (f.call(&x), program.eval_into(&x, &mut scratch));
            if fx != ex {
                grid_witness = Some(Witness::at(&x, fx, ex));
                break;
            }
        }
    }
    Ok(ApproxError {
        max_gap: if samples == 0 { 0.0 } else { max_gap },
        mean_gap: if samples == 0 { 0.0 } else { total / samples as f64 },
        grid_exactness: grid_witness.is_none(),
        lower_bound: lower_bound_witness.is_none(),
        samples,
        resolution,
        worst,
        grid_witness,
        lower_bound_witness,
    })
}
