//! Named aggregation functions.
//!
//! Names are CLI-visible. Parameterized entries take their parameters after
//! a colon, separated by commas, each a decimal or a fraction `i/k`:
//! `bmedian:1/3`, `wmean:0.2,0.3,0.5`, `chi:0.25`, `constant:1/2`.
//! Every lookup runs the boundary and monotonicity probes of
//! [`verify::check_aggregation`](crate::verify::check_aggregation) before the
//! function is handed out.

use thiserror::Error;

use crate::agg::{AggFunction, Provenance};
use crate::basis::{chi_raw, med_raw};
use crate::dsl::parse_num;

/// Arities a catalog name accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Any,
    Odd,
    Exactly(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Any => n >= 1,
            Arity::Odd => n % 2 == 1,
            Arity::Exactly(m) => n == m,
        }
    }

    fn describe(self) -> String {
        match self {
            Arity::Any => "any arity >= 1".into(),
            Arity::Odd => "odd arity".into(),
            Arity::Exactly(m) => format!("arity {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown function `{0}` (known: {known})", known = NAMES.join(", "))]
    UnknownName(String),
    #[error("`{name}` needs {expected}, got arity {arity}")]
    UnsupportedArity {
        name: String,
        arity: usize,
        expected: String,
    },
    #[error("bad parameter for `{name}`: {message}")]
    BadParameter { name: String, message: String },
    #[error("`{name}` fails the registration probe `{check}`")]
    FailedProbe { name: String, check: String },
}

/// A catalog function with its known analytic properties.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub function: AggFunction,
    /// Lipschitz constant in each coordinate, when the function has one.
    pub lipschitz: Option<f64>,
    pub annihilator: Option<f64>,
    pub neutral: Option<f64>,
}

impl CatalogEntry {
    pub fn arity(&self) -> usize {
        self.function.arity()
    }

    /// Upper bound on `f(x) − compiled_k(x)` from the per-coordinate
    /// Lipschitz constant and the grid mesh `1/k`.
    pub fn mesh_bound(&self, k: u64) -> Option<f64> {
        self.lipschitz.map(|l| l * self.arity() as f64 / k as f64)
    }
}

pub const NAMES: &[&str] = &[
    "product",
    "min",
    "max",
    "mean",
    "median",
    "lukasiewicz",
    "drastic",
    "probsum",
    "bmedian",
    "wmean",
    "chi",
    "constant",
];

/// Arity constraint of a bare (parameter-free) name.
pub fn arity_of(name: &str) -> Option<Arity> {
    Some(match name {
        "product" | "min" | "max" | "mean" | "lukasiewicz" | "drastic" | "probsum" | "constant" => Arity::Any,
        "median" => Arity::Odd,
        "bmedian" => Arity::Exactly(2),
        "wmean" => Arity::Exactly(3),
        "chi" => Arity::Exactly(1),
        _ => return None,
    })
}

fn parse_params(name: &str, text: Option<&str>) -> Result<Vec<f64>, CatalogError> {
    let Some(text) = text else {
        return Ok(Vec::new());
    };
    text.split(',')
        .map(|p| {
            parse_num(p.trim())
                .map(|v| v.value())
                .map_err(|e| CatalogError::BadParameter {
                    name: name.into(),
                    message: format!("`{}`: {}", p.trim(), e.kind),
                })
        })
        .collect()
}

fn one_param(name: &str, params: &[f64], default: f64) -> Result<f64, CatalogError> {
    match params {
        [] => Ok(default),
        [p] => Ok(*p),
        _ => Err(CatalogError::BadParameter {
            name: name.into(),
            message: format!("expected one parameter, got {}", params.len()),
        }),
    }
}

fn weights(name: &str, params: &[f64]) -> Result<[f64; 3], CatalogError> {
    let w = match params {
        [] => [0.5, 1.0 / 3.0, 1.0 / 6.0],
        [a, b, c] => [*a, *b, *c],
        _ => {
            return Err(CatalogError::BadParameter {
                name: name.into(),
                message: format!("expected three weights, got {}", params.len()),
            })
        }
    };
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CatalogError::BadParameter {
            name: name.into(),
            message: format!("weights sum to {total}, not 1"),
        });
    }
    Ok(w)
}

fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn drastic(x: &[f64]) -> f64 {
    if x.iter().filter(|&&c| c != 1.0).count() <= 1 {
        x.iter().copied().fold(1.0, f64::min)
    } else {
        0.0
    }
}

/// Looks up `spec` (a name with optional parameters) at arity `n`.
pub fn lookup(spec: &str, n: usize) -> Result<CatalogEntry, CatalogError> {
    let (name, param_text) = match spec.split_once(':') {
        Some((name, rest)) => (name.trim(), Some(rest)),
        None => (spec.trim(), None),
    };
    let arity = arity_of(name).ok_or_else(|| CatalogError::UnknownName(name.into()))?;
    if !arity.accepts(n) {
        return Err(CatalogError::UnsupportedArity {
            name: name.into(),
            arity: n,
            expected: arity.describe(),
        });
    }
    let params = parse_params(name, param_text)?;
    if !params.is_empty() && !matches!(name, "bmedian" | "wmean" | "chi" | "constant") {
        return Err(CatalogError::BadParameter {
            name: name.into(),
            message: "takes no parameters".into(),
        });
    }
    let nf = n as f64;
    let tag = Provenance::Catalog(spec.trim().to_string());
    let mk = |f: fn(&[f64]) -> f64| AggFunction::new(spec.trim(), n, tag.clone(), f);
    let (function, lipschitz, annihilator, neutral) = match name {
        "product" => (mk(|x| x.iter().product()), Some(1.0), Some(0.0), Some(1.0)),
        "min" => (
            mk(|x| x.iter().copied().fold(1.0, f64::min)),
            Some(1.0),
            Some(0.0),
            Some(1.0),
        ),
        "max" => (
            mk(|x| x.iter().copied().fold(0.0, f64::max)),
            Some(1.0),
            Some(1.0),
            Some(0.0),
        ),
        "mean" => (
            AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| {
                x.iter().sum::<f64>() / nf
            }),
            Some(1.0 / nf),
            None,
            None,
        ),
        "median" => (mk(median), Some(1.0), None, None),
        "lukasiewicz" => (
            AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| {
                (x.iter().sum::<f64>() - (nf - 1.0)).max(0.0)
            }),
            Some(1.0),
            Some(0.0),
            Some(1.0),
        ),
        "drastic" => (mk(drastic), None, Some(0.0), Some(1.0)),
        "probsum" => (
            mk(|x| 1.0 - x.iter().map(|c| 1.0 - c).product::<f64>()),
            Some(1.0),
            Some(1.0),
            Some(0.0),
        ),
        "bmedian" => {
            let b = one_param(name, &params, 0.5)?;
            let annihilator = (b == 0.0).then_some(0.0).or((b == 1.0).then_some(1.0));
            let neutral = (b == 0.0).then_some(1.0).or((b == 1.0).then_some(0.0));
            (
                AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| {
                    med_raw(b, x[0], x[1])
                }),
                Some(1.0),
                annihilator,
                neutral,
            )
        }
        "wmean" => {
            let w = weights(name, &params)?;
            let lip = w.iter().copied().fold(0.0, f64::max);
            (
                // Dividing by the float sum of the weights, accumulated in
                // the same order, sends (1,1,1) to exactly 1.
                AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| {
                    let total = w[0] + w[1] + w[2];
                    ((w[0] * x[0] + w[1] * x[1] + w[2] * x[2]) / total).min(1.0)
                }),
                Some(lip),
                None,
                None,
            )
        }
        "chi" => {
            let a = one_param(name, &params, 0.5)?;
            (
                AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| chi_raw(a, x[0])),
                None,
                None,
                None,
            )
        }
        "constant" => {
            let b = one_param(name, &params, 0.5)?;
            (
                AggFunction::new(spec.trim(), n, tag.clone(), move |x: &[f64]| {
                    if x.iter().all(|&c| c == 0.0) {
                        0.0
                    } else if x.iter().all(|&c| c == 1.0) {
                        1.0
                    } else {
                        b
                    }
                }),
                None,
                None,
                None,
            )
        }
        _ => unreachable!("arity_of covers every name"),
    };
    let entry = CatalogEntry {
        name: spec.trim().to_string(),
        function,
        lipschitz,
        annihilator,
        neutral,
    };
    registration_probe(&entry)?;
    Ok(entry)
}

/// The function registered under `spec` at arity `n`.
pub fn get(spec: &str, n: usize) -> Result<AggFunction, CatalogError> {
    lookup(spec, n).map(|e| e.function)
}

fn registration_probe(entry: &CatalogEntry) -> Result<(), CatalogError> {
    let n = entry.arity();
    // Keep the probe grid at a few thousand points whatever the arity.
    let k = (1..=8u64)
        .rev()
        .find(|&k| (k + 1).checked_pow(n as u32).is_some_and(|s| s <= 4096))
        .unwrap_or(0);
    let report = if k == 0 {
        crate::verify::check_aggregation_random(&entry.function, 256, crate::verify::DEFAULT_SEED)
    } else {
        crate::verify::check_aggregation(&entry.function, k, 256)
    };
    match report.first_failure() {
        None => Ok(()),
        Some(check) => Err(CatalogError::FailedProbe {
            name: entry.name.clone(),
            check: check.name.clone(),
        }),
    }
}

/// Every catalog name with default parameters at every supported arity up to
/// `max_arity`.
pub fn subjects(max_arity: usize) -> Vec<CatalogEntry> {
    NAMES
        .iter()
        .flat_map(|&name| (1..=max_arity).map(move |n| (name, n)))
        .filter(|&(name, n)| arity_of(name).is_some_and(|a| a.accepts(n)))
        .map(|(name, n)| lookup(name, n).expect("default catalog entries pass their probes"))
        .collect()
}

/// `g_φ(x, y)`: 0 when `x + y < 1`, `φ(x)` when `x + y = 1`, 1 when
/// `x + y > 1`.
///
/// The sum is compared with 1 exactly (not after rounding), so `g_φ` is
/// nondecreasing for every `φ`.
pub fn g_phi<P>(name: impl Into<String>, phi: P) -> AggFunction
where
    P: Fn(f64) -> f64 + Send + Sync + 'static,
{
    AggFunction::new(name, 2, Provenance::GPhi, move |x: &[f64]| {
        let (a, b) = (x[0], x[1]);
        let s = a + b;
        // Two-sum: a + b = s + err exactly.
        let bv = s - a;
        let err = (a - (s - bv)) + (b - bv);
        let side = s
            .partial_cmp(&1.0)
            .expect("finite")
            .then(err.partial_cmp(&0.0).expect("finite"));
        match side {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => phi(a),
        }
    })
}
