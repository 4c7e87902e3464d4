//! Negations and implications built from aggregation functions.
//!
//! Conjunctions (min, product, Łukasiewicz) and disjunctions (max,
//! probabilistic sum) are ordinary catalog entries. An implication is not
//! an aggregation function (it decreases in its first argument), so it is
//! a separate type here and never enters the catalog.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::agg::{AggFunction, Provenance};
use crate::verify::{rng, Tracker, VerifyReport, Witness, DEFAULT_SEED, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectiveError {
    #[error("`{name}` is not a negation: {reason}")]
    NotNegation { name: String, reason: String },
    #[error("negation `{0}` is not strong (not an involution)")]
    NotStrong(String),
    #[error("`{name}` does not have {element} as annihilator: f({x}, {y}) = {value}")]
    NoAnnihilator {
        name: String,
        element: f64,
        x: f64,
        y: f64,
        value: f64,
    },
    #[error("`{name}` has arity {arity}, a binary function is required")]
    NotBinary { name: String, arity: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

type Unary = dyn Fn(f64) -> f64 + Send + Sync;

/// A decreasing map `N` with `N(0) = 1`, `N(1) = 0`; strong when it is an
/// involution.
#[derive(Clone)]
pub struct Negation {
    name: String,
    strong: bool,
    f: Arc<Unary>,
}

const NEGATION_PROBES: u32 = 256;

impl Negation {
    /// `N(x) = 1 − x`.
    pub fn zadeh() -> Self {
        Negation {
            name: "zadeh".into(),
            strong: true,
            f: Arc::new(|x| 1.0 - x),
        }
    }

    /// `N(x) = (1 − x) / (1 + λx)` for `λ > −1`.
    pub fn sugeno(lambda: f64) -> Result<Self, ConnectiveError> {
        if !(lambda > -1.0 && lambda.is_finite()) {
            return Err(ConnectiveError::BadParameter(format!(
                "Sugeno λ must exceed −1, got {lambda}"
            )));
        }
        Negation::from_fn(format!("sugeno:{lambda}"), move |x| {
            (1.0 - x) / (1.0 + lambda * x)
        })
    }

    /// `N(x) = (1 − x^w)^(1/w)` for `w > 0`.
    pub fn yager(w: f64) -> Result<Self, ConnectiveError> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(ConnectiveError::BadParameter(format!(
                "Yager w must be positive, got {w}"
            )));
        }
        Negation::from_fn(format!("yager:{w}"), move |x| {
            (1.0 - x.powf(w)).max(0.0).powf(1.0 / w)
        })
    }

    /// Wraps `f` after probing the negation axioms on a uniform grid; the
    /// strong flag is set when `N(N(x)) = x` holds there within
    /// [`TOLERANCE`].
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Result<Self, ConnectiveError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let fail = |reason: String| ConnectiveError::NotNegation {
            name: name.clone(),
            reason,
        };
        if f(0.0) != 1.0 {
            return Err(fail(format!("N(0) = {}", f(0.0))));
        }
        if f(1.0) != 0.0 {
            return Err(fail(format!("N(1) = {}", f(1.0))));
        }
        let xs: Vec<f64> = (0..=NEGATION_PROBES)
            .map(|i| i as f64 / NEGATION_PROBES as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if let Some(&y) = ys.iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(fail(format!("value {y} outside [0,1]")));
        }
        if let Some(i) = (1..ys.len()).find(|&i| ys[i] >= ys[i - 1]) {
            return Err(fail(format!(
                "not strictly decreasing: N({}) = {} <= N({}) = {}",
                xs[i - 1],
                ys[i - 1],
                xs[i],
                ys[i]
            )));
        }
        let strong = xs.iter().zip(&ys).all(|(&x, &y)| (f(y) - x).abs() <= TOLERANCE);
        Ok(Negation {
            name,
            strong,
            f: Arc::new(f),
        })
    }

    /// `zadeh`, `sugeno:λ` or `yager:w`.
    pub fn by_name(spec: &str) -> Result<Self, ConnectiveError> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let value = |default: f64| -> Result<f64, ConnectiveError> {
            param.map_or(Ok(default), |p| {
                p.parse::<f64>()
                    .map_err(|_| ConnectiveError::BadParameter(format!("`{p}` is not a number")))
            })
        };
        match name {
            "zadeh" if param.is_none() => Ok(Negation::zadeh()),
            "sugeno" => Negation::sugeno(value(1.0)?),
            "yager" => Negation::yager(value(2.0)?),
            _ => Err(ConnectiveError::BadParameter(format!(
                "unknown negation `{spec}` (known: zadeh, sugeno:λ, yager:w)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Negation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Negation")
            .field("name", &self.name)
            .field("strong", &self.strong)
            .finish()
    }
}

type Binary = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A binary map `I: [0,1]^2 → [0,1]`.
#[derive(Clone)]
pub struct Implication {
    name: String,
    f: Arc<Binary>,
}

impl Implication {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Implication {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
}

impl fmt::Debug for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Implication").field("name", &self.name).finish()
    }
}

fn require_binary(f: &AggFunction) -> Result<(), ConnectiveError> {
    if f.arity() != 2 {
        return Err(ConnectiveError::NotBinary {
            name: f.name().into(),
            arity: f.arity(),
        });
    }
    Ok(())
}

const ANNIHILATOR_GRID: usize = 64;

/// First probe `(x, y, f(x, y))` with `z` in one argument and
/// `f(x, y) != z`, over a uniform grid and `probes` random points.
fn annihilator_witness(f: &AggFunction, z: f64, probes: usize) -> Option<(f64, f64, f64)> {
    let mut rng = rng(DEFAULT_SEED);
    let grid = (0..=ANNIHILATOR_GRID).map(|i| i as f64 / ANNIHILATOR_GRID as f64);
    let random: Vec<f64> = (0..probes).map(|_| rng.gen::<f64>()).collect();
    grid.chain(random).find_map(|t| {
        [(z, t), (t, z)]
            .into_iter()
            .map(|(x, y)| (x, y, f.call(&[x, y])))
            .find(|&(_, _, v)| v != z)
    })
}

/// `f(0, y) = 0 = f(x, 0)` on a grid plus `probes` random points.
pub fn has_annihilator_zero(f: &AggFunction, probes: usize) -> bool {
    f.arity() == 2 && annihilator_witness(f, 0.0, probes).is_none()
}

/// `f(1, y) = 1 = f(x, 1)` on a grid plus `probes` random points.
pub fn has_annihilator_one(f: &AggFunction, probes: usize) -> bool {
    f.arity() == 2 && annihilator_witness(f, 1.0, probes).is_none()
}

fn require_annihilator(f: &AggFunction, z: f64) -> Result<(), ConnectiveError> {
    require_binary(f)?;
    match annihilator_witness(f, z, 256) {
        None => Ok(()),
        Some((x, y, value)) => Err(ConnectiveError::NoAnnihilator {
            name: f.name().into(),
            element: z,
            x,
            y,
            value,
        }),
    }
}

fn require_strong(n: &Negation) -> Result<(), ConnectiveError> {
    if n.is_strong() {
        Ok(())
    } else {
        Err(ConnectiveError::NotStrong(n.name.clone()))
    }
}

/// `I(x, y) = N(conj(x, N(y)))` for a binary `conj` with annihilator 0 and a
/// strong negation `N`.
pub fn implication_from(conj: &AggFunction, n: &Negation) -> Result<Implication, ConnectiveError> {
    require_annihilator(conj, 0.0)?;
    require_strong(n)?;
    let (c, neg) = (conj.clone(), n.clone());
    Ok(Implication::new(
        format!("implication({}, {})", conj.name(), n.name()),
        move |x, y| neg.apply(c.call(&[x, neg.apply(y)])),
    ))
}

/// `I(x, y) = disj(N(x), y)` for a binary `disj` with annihilator 1 and a
/// strong negation `N`.
pub fn implication_from_disjunction(
    disj: &AggFunction,
    n: &Negation,
) -> Result<Implication, ConnectiveError> {
    require_annihilator(disj, 1.0)?;
    require_strong(n)?;
    let (d, neg) = (disj.clone(), n.clone());
    Ok(Implication::new(
        format!("implication_s({}, {})", disj.name(), n.name()),
        move |x, y| d.call(&[neg.apply(x), y]),
    ))
}

/// The `N`-dual `N(f(N(x_0), …, N(x_{n−1})))`; dual of a conjunction with
/// annihilator 0 is a disjunction with annihilator `N(0) = 1`.
pub fn dual_under(f: &AggFunction, n: &Negation) -> AggFunction {
    let (inner, neg) = (f.clone(), n.clone());
    AggFunction::new(
        format!("dual({}, {})", f.name(), n.name()),
        f.arity(),
        Provenance::DualOf(Box::new(f.provenance().clone())),
        move |x| {
            let flipped: Vec<f64> = x.iter().map(|&c| neg.apply(c)).collect();
            neg.apply(inner.call(&flipped))
        },
    )
}

/// The implication contract: `I(0,0) = 1`, `I(1,1) = 1`, `I(1,0) = 0`,
/// nonincreasing in `x` and nondecreasing in `y` on the grid with `steps`
/// cells per side.
pub fn check_implication(i: &Implication, steps: usize) -> VerifyReport {
    let mut report = VerifyReport::new(format!("implication contract: {}", i.name()));
    for (name, x, y, want) in [
        ("i(0,0)=1", 0.0, 0.0, 1.0),
        ("i(1,1)=1", 1.0, 1.0, 1.0),
        ("i(1,0)=0", 1.0, 0.0, 0.0),
    ] {
        let mut t = Tracker::new(name, 0.0);
        t.compare(&[x, y], want, i.apply(x, y));
        report.push(t.finish());
    }
    let s = steps.max(1);
    let at = |j: usize| j as f64 / s as f64;
    let mut dec_x = Tracker::new("nonincreasing-x", 0.0);
    let mut inc_y = Tracker::new("nondecreasing-y", 0.0);
    for a in 0..=s {
        for b in 0..=s {
            let v = i.apply(at(a), at(b));
            if a < s {
                let w = i.apply(at(a + 1), at(b));
                dec_x.excess(w - v, || {
                    Witness::pair(&[at(a), at(b)], &[at(a + 1), at(b)], v, w)
                });
            }
            if b < s {
                let w = i.apply(at(a), at(b + 1));
                inc_y.excess(v - w, || {
                    Witness::pair(&[at(a), at(b)], &[at(a), at(b + 1)], v, w)
                });
            }
        }
    }
    report.push(dec_x.finish());
    report.push(inc_y.finish());
    report
}
