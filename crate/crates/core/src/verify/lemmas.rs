//! Oracle suites for the building blocks and the compilers.
//!
//! Each check compares an expression with an enumerative or closed-form
//! oracle that does not go through the expression tree. A [`Mutation`]
//! injects a known bug so that the suite can be shown to detect it.

use std::cell::RefCell;

use rand::Rng;

use super::{gen, rng, Tracker, VerifyReport, Witness, DEFAULT_SEED, TOLERANCE};
use crate::basis::{chi_raw, med_raw};
use crate::catalog::{self, CatalogEntry};
use crate::compiler::{
    build_g, build_h_with, compile_grid_with, compile_unary_exact, dualize, dualize_expr, jump_set,
    refine_chi, refine_med, GridOracle, StepFn1D,
};
use crate::expr::BasisExpr;
use crate::program::Program;
use crate::types::{grid_coords, grid_indices, GridPoint, Param};

/// A deliberately injected bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// `χ_0(0) = 1` instead of 0.
    ChiZeroAtZero,
    /// `h`-blocks also carry `χ_0(x_i)` for coordinates with `a_i = 0`.
    SupportIncludesZeros,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub mutation: Mutation,
    /// Random `(f, a)` pairs for the `h` check, on top of fixed anchors.
    pub h_pairs: usize,
    /// Random probes per function in the sampled checks.
    pub samples: usize,
    /// Grid resolutions for the representation check.
    pub resolutions: Vec<u64>,
    pub unary_cases: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            mutation: Mutation::None,
            h_pairs: 100,
            samples: 200,
            resolutions: vec![2, 5],
            unary_cases: 20,
        }
    }
}

fn mutant_chi(a: f64, x: f64) -> f64 {
    if a == 0.0 && x == 0.0 {
        1.0
    } else {
        chi_raw(a, x)
    }
}

type Eval = Box<dyn Fn(&[f64]) -> f64>;

fn evaluator(e: &BasisExpr, mutation: Mutation) -> Eval {
    if mutation == Mutation::ChiZeroAtZero {
        let e = e.clone();
        return Box::new(move |x| e.eval_with(x, &mutant_chi));
    }
    let program = Program::new(e);
    let scratch = RefCell::new(Vec::new());
    Box::new(move |x| program.eval_into(x, &mut scratch.borrow_mut()))
}

/// All checks with the default configuration.
pub fn lemma_suite() -> VerifyReport {
    lemma_suite_with(&SuiteConfig::default())
}

pub fn lemma_suite_with(cfg: &SuiteConfig) -> VerifyReport {
    let title = match cfg.mutation {
        Mutation::None => "lemma suite".to_string(),
        m => format!("lemma suite (mutation {m:?})"),
    };
    let mut report = VerifyReport::new(title);
    let subjects = catalog::subjects(3);
    g_lemma(cfg, &mut report);
    h_lemma(cfg, &subjects, &mut report);
    representation(cfg, &subjects, &mut report);
    nesting(cfg, &subjects, &mut report);
    mesh_bound(cfg, &subjects, &mut report);
    duality(cfg, &subjects, &mut report);
    refinement(cfg, &mut report);
    unary(cfg, &mut report);
    report
}

fn quarter_probe(n: usize) -> impl Iterator<Item = Vec<f64>> {
    grid_indices(n, 4).map(|idx| grid_coords(&idx, 4))
}

fn g_lemma(cfg: &SuiteConfig, report: &mut VerifyReport) {
    let mut t = Tracker::new("g-lemma", 0.0);
    for n in 1..=4 {
        for i in 0..=4 {
            let b = GridPoint::new(i, 4).expect("i <= 4");
            let g = build_g(n, b).expect("n >= 1");
            let eval = evaluator(&g, cfg.mutation);
            for x in quarter_probe(n) {
                let want = if x.iter().all(|&c| c == 0.0) {
                    0.0
                } else if x.iter().all(|&c| c == 1.0) {
                    1.0
                } else {
                    b.to_f64()
                };
                t.compare(&x, want, eval(&x));
            }
        }
    }
    report.push(t.finish());
}

fn h_lemma(cfg: &SuiteConfig, subjects: &[CatalogEntry], report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0x4b);
    let entry = |name: &str, n: usize| catalog::lookup(name, n).expect("anchor entries exist");
    // Anchors with zero coordinates and f(a) > 0.
    let mut pairs: Vec<(CatalogEntry, Vec<u64>)> = vec![
        (entry("max", 2), vec![2, 0]),
        (entry("mean", 3), vec![0, 1, 0]),
        (entry("product", 2), vec![4, 2]),
    ];
    for _ in 0..cfg.h_pairs {
        let f = subjects[rng.gen_range(0..subjects.len())].clone();
        let a = gen::star_grid_point(&mut rng, f.arity(), 4);
        pairs.push((f, a));
    }

    let mut middle = Tracker::new("h-lemma", TOLERANCE);
    let mut outer = Tracker::new("h-lemma-corners", 0.0);
    for (f, idx) in pairs {
        let n = f.arity();
        let point: Vec<Param> = idx
            .iter()
            .map(|&i| Param::Ratio(GridPoint::new(i, 4).expect("i <= 4")))
            .collect();
        let a = grid_coords(&idx, 4);
        let fa = f.function.call(&a);
        let h = build_h_with(
            &f.function,
            &point,
            cfg.mutation == Mutation::SupportIncludesZeros,
        )
        .expect("star grid points are valid");
        let eval = evaluator(&h, cfg.mutation);
        for x in quarter_probe(n) {
            let got = eval(&x);
            if x.iter().all(|&c| c == 1.0) {
                outer.compare(&x, 1.0, got);
            } else if x.iter().zip(&a).all(|(xi, ai)| xi >= ai) {
                middle.compare(&x, fa, got);
            } else {
                outer.compare(&x, 0.0, got);
            }
        }
    }
    report.push(middle.finish());
    report.push(outer.finish());
}

fn representation(cfg: &SuiteConfig, subjects: &[CatalogEntry], report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0x5e);
    let mut grid = Tracker::new("representation-grid", 0.0);
    let mut oracle = Tracker::new("representation-oracle", TOLERANCE);
    let mut lower = Tracker::new("lower-bound", TOLERANCE);
    let include_zeros = cfg.mutation == Mutation::SupportIncludesZeros;
    for f in subjects {
        let n = f.arity();
        for &k in &cfg.resolutions {
            let (e, _) = compile_grid_with(&f.function, k, include_zeros).expect("catalog entries compile");
            let eval = evaluator(&e, cfg.mutation);
            for idx in grid_indices(n, k) {
                let x = grid_coords(&idx, k);
                grid.compare(&x, f.function.call(&x), eval(&x));
            }
            let reference = GridOracle::new(&f.function, k).expect("catalog entries compile");
            for _ in 0..cfg.samples {
                let x = gen::point(&mut rng, n);
                let got = eval(&x);
                oracle.compare(&x, reference.query(&x), got);
                let fx = f.function.call(&x);
                lower.excess(got - fx, || Witness::at(&x, fx, got));
            }
        }
    }
    report.push(grid.finish());
    report.push(oracle.finish());
    report.push(lower.finish());
}

fn nesting(cfg: &SuiteConfig, subjects: &[CatalogEntry], report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0x6e);
    let mut t = Tracker::new("k-nesting", TOLERANCE);
    let include_zeros = cfg.mutation == Mutation::SupportIncludesZeros;
    for f in subjects.iter().filter(|f| f.arity() <= 2) {
        for (k, k2) in [(2, 4), (3, 6)] {
            let coarse = evaluator(
                &compile_grid_with(&f.function, k, include_zeros)
                    .expect("compiles")
                    .0,
                cfg.mutation,
            );
            let fine = evaluator(
                &compile_grid_with(&f.function, k2, include_zeros)
                    .expect("compiles")
                    .0,
                cfg.mutation,
            );
            for _ in 0..cfg.samples {
                let x = gen::point(&mut rng, f.arity());
                let (c, d, fx) = (coarse(&x), fine(&x), f.function.call(&x));
                t.excess(c - d, || Witness::at(&x, d, c));
                t.excess(d - fx, || Witness::at(&x, fx, d));
            }
        }
    }
    report.push(t.finish());
}

fn mesh_bound(cfg: &SuiteConfig, subjects: &[CatalogEntry], report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0x3b);
    let k = 10;
    let mut t = Tracker::new("mesh-bound", TOLERANCE);
    for f in subjects.iter().filter(|f| f.arity() <= 2) {
        let Some(bound) = f.mesh_bound(k) else { continue };
        let (e, _) = compile_grid_with(&f.function, k, cfg.mutation == Mutation::SupportIncludesZeros)
            .expect("compiles");
        let eval = evaluator(&e, cfg.mutation);
        for _ in 0..cfg.samples {
            let x = gen::uniform_point(&mut rng, f.arity());
            let (fx, got) = (f.function.call(&x), eval(&x));
            t.excess(fx - got - bound, || Witness::at(&x, fx, got));
        }
    }
    report.push(t.finish());
}

fn duality(cfg: &SuiteConfig, subjects: &[CatalogEntry], report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0xd0);
    let mut dual = Tracker::new("duality", TOLERANCE);
    for _ in 0..cfg.samples {
        let n = rng.gen_range(1..=3);
        let e = gen::expr(&mut rng, n, 4);
        let d = dualize_expr(&e);
        let (eval_e, eval_d) = (evaluator(&e, cfg.mutation), evaluator(&d, cfg.mutation));
        let x = gen::point(&mut rng, n);
        let flipped: Vec<f64> = x.iter().map(|c| 1.0 - c).collect();
        dual.compare(&x, 1.0 - eval_e(&flipped), eval_d(&x));
    }
    report.push(dual.finish());

    let mut involution = Tracker::new("duality-involution", TOLERANCE);
    for f in subjects {
        let dd = dualize(&dualize(&f.function));
        for _ in 0..cfg.samples.min(50) {
            let x = gen::point(&mut rng, f.arity());
            involution.compare(&x, f.function.call(&x), dd.call(&x));
        }
    }
    report.push(involution.finish());
}

/// Largest `j/d <= a` with `d <= m`, by direct search.
fn best_rational_below(a: f64, m: u64) -> f64 {
    (1..=m)
        .map(|d| {
            let mut j = (a * d as f64).floor() as u64;
            while j > 0 && j as f64 / d as f64 > a {
                j -= 1;
            }
            while j < d && (j + 1) as f64 / d as f64 <= a {
                j += 1;
            }
            j as f64 / d as f64
        })
        .fold(0.0, f64::max)
}

fn refinement(cfg: &SuiteConfig, report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0xef);
    let mut med = Tracker::new("refine-med", 0.0);
    let mut chi = Tracker::new("refine-chi", 0.0);
    for m in [10u64, 50] {
        for _ in 0..cfg.samples.min(100) {
            let b = rng.gen::<f64>();
            let e = refine_med(Param::real(b).expect("b in [0,1)"), m).expect("m >= 1");
            let eval = evaluator(&e, cfg.mutation);
            let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (want, got) = (med_raw(b, x, y), eval(&[x, y]));
            med.excess((want - got).abs() - 1.0 / m as f64, || {
                Witness::at(&[b, x, y], want, got)
            });

            let a = rng.gen::<f64>();
            let q = best_rational_below(a, m);
            chi.excess(a - q - 1.0 / m as f64, || Witness::at(&[a], a, q));
            let e = refine_chi(Param::real(a).expect("a in [0,1)"), m).expect("m >= 1");
            let eval = evaluator(&e, cfg.mutation);
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                let got = eval(&[x]);
                let outside = x < q || x >= a;
                if outside && got != chi_raw(a, x) {
                    chi.excess(f64::INFINITY, || Witness::at(&[a, x], chi_raw(a, x), got));
                }
            }
        }
    }
    report.push(med.finish());
    report.push(chi.finish());
}

/// `{ c : f(c) > sup_{x<c} f(x) }` over the breakpoints and a uniform scan,
/// with the left supremum taken over the scan below `c` and the float just
/// below `c`.
pub(crate) fn brute_force_jumps(f: &StepFn1D, scan: usize) -> Vec<f64> {
    let grid: Vec<f64> = (1..scan).map(|i| i as f64 / scan as f64).collect();
    let mut candidates: Vec<f64> = grid
        .iter()
        .copied()
        .chain(f.breakpoints().iter().copied())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    candidates
        .into_iter()
        .filter(|&c| {
            let left = grid
                .iter()
                .take_while(|&&x| x < c)
                .map(|&x| f.eval(x))
                .fold(f.eval(c.next_down()), f64::max);
            f.eval(c) > left
        })
        .collect()
}

fn unary(cfg: &SuiteConfig, report: &mut VerifyReport) {
    let mut rng = rng(cfg.seed ^ 0x1d);
    let mut exact = Tracker::new("unary-exact", 0.0);
    let mut jumps = Tracker::new("unary-jump-set", 0.0);
    for _ in 0..cfg.unary_cases {
        let f = gen::step_fn(&mut rng, 5, 10);
        let e = compile_unary_exact(&f, 10).expect("m >= 1");
        let eval = evaluator(&e, cfg.mutation);
        for x in (0..=cfg.samples)
            .map(|i| i as f64 / cfg.samples.max(1) as f64)
            .chain(f.breakpoints().iter().copied())
        {
            exact.compare(&[x], f.eval(x), eval(&[x]));
        }
        let found: Vec<f64> = jump_set(&f).iter().map(|c| c.get()).collect();
        let brute = brute_force_jumps(&f, 1000);
        if found != brute {
            let first = found
                .iter()
                .zip(&brute)
                .position(|(a, b)| a != b)
                .unwrap_or(found.len().min(brute.len()));
            let at = found.get(first).or(brute.get(first)).copied().unwrap_or(0.0);
            jumps.excess(f64::INFINITY, || {
                Witness::at(&[at], brute.len() as f64, found.len() as f64)
            });
        } else {
            jumps.excess(0.0, || Witness::at(&[], 0.0, 0.0));
        }
    }
    report.push(exact.finish());
    report.push(jumps.finish());
}
