//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always appear in the output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use aggbasis::catalog;
use aggbasis::compiler::{
    build_g, build_h_grid, compile_grid, compile_unary_exact, dualize, dualize_expr, jump_set, refine_chi,
    refine_med, GridOracle, StepFn1D,
};
use aggbasis::connectives::{check_implication, implication_from, Negation};
use aggbasis::dsl::{from_json_str, parse, print, to_json_string};
use aggbasis::types::{grid_coords, grid_indices, GridPoint, Param};
use aggbasis::verify::{gen, lemma_suite_with, Mutation, SuiteConfig, DEFAULT_SEED, TOLERANCE};
use aggbasis::{AggFunction, Program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ offset)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn med3(b: f64, x: f64, y: f64) -> f64 {
    let mut v = [b, x, y];
    v.sort_by(f64::total_cmp);
    v[1]
}

struct Sampler {
    program: Program,
    scratch: Vec<f64>,
}

impl Sampler {
    fn new(e: &aggbasis::BasisExpr) -> Self {
        Sampler {
            program: Program::new(e),
            scratch: Vec::new(),
        }
    }

    fn at(&mut self, x: &[f64]) -> f64 {
        self.program.eval_into(x, &mut self.scratch)
    }
}

fn c1_g_function() -> Outcome {
    let started = Instant::now();
    let mut probes = 0;
    for n in 1..=4 {
        for q in 0..=4 {
            let b = GridPoint::new(q, 4).unwrap();
            let g = build_g(n, b).map_err(|e| e.to_string())?;
            let mut s = Sampler::new(&g);
            for idx in grid_indices(n, 1) {
                let x = grid_coords(&idx, 1);
                let want = if idx.iter().all(|&i| i == 0) {
                    0.0
                } else if idx.iter().all(|&i| i == 1) {
                    1.0
                } else {
                    b.to_f64()
                };
                let got = s.at(&x);
                ensure(got == want, || format!("n={n} b={q}/4 at {x:?}: {got} != {want}"))?;
                probes += 1;
            }
        }
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("{probes} vertex probes exact in {:?}", started.elapsed()))
}

fn c2_h_function() -> Outcome {
    let started = Instant::now();
    let subjects = catalog::subjects(3);
    let mut r = rng(2);
    for case in 0..100 {
        let entry = &subjects[r.gen_range(0..subjects.len())];
        let n = entry.arity();
        let idx = gen::star_grid_point(&mut r, n, 4);
        let a: Vec<GridPoint> = idx.iter().map(|&i| GridPoint::new(i, 4).unwrap()).collect();
        let h = build_h_grid(&entry.function, &a).map_err(|e| e.to_string())?;
        let fa = entry.function.call(&grid_coords(&idx, 4));
        let mut s = Sampler::new(&h);
        for p in grid_indices(n, 4) {
            let x = grid_coords(&p, 4);
            let got = s.at(&x);
            let (want, tol) = if p.iter().all(|&i| i == 4) {
                (1.0, 0.0)
            } else if p.iter().zip(&idx).all(|(pi, ai)| pi >= ai) {
                (fa, TOLERANCE)
            } else {
                (0.0, 0.0)
            };
            ensure((got - want).abs() <= tol, || {
                format!("case {case} {} a={idx:?} x={x:?}: {got} != {want}", entry.name)
            })?;
        }
    }
    Ok(format!(
        "100 seeded (f, a) pairs exact on I_4^n in {:?}",
        started.elapsed()
    ))
}

fn c3_catalog_grid() -> Outcome {
    let started = Instant::now();
    let subjects = catalog::subjects(3);
    let mut r = rng(3);
    let mut runs = 0;
    let mut worst = 0.0f64;
    for entry in &subjects {
        let f = &entry.function;
        let n = f.arity();
        for k in [2u64, 5, 10] {
            let (e, _) = compile_grid(f, k).map_err(|e| format!("{}: {e}", entry.name))?;
            let oracle = GridOracle::new(f, k).map_err(|e| e.to_string())?;
            let mut s = Sampler::new(&e);
            for idx in grid_indices(n, k) {
                let x = grid_coords(&idx, k);
                let want = if idx.iter().all(|&i| i == 0) {
                    0.0
                } else if idx.iter().all(|&i| i == k) {
                    1.0
                } else {
                    f.call(&x)
                };
                let got = s.at(&x);
                ensure(got == want, || {
                    format!("{} k={k} grid {x:?}: {got} != {want}", entry.name)
                })?;
            }
            for _ in 0..10_000 {
                let x = gen::point(&mut r, n);
                let (got, want) = (s.at(&x), oracle.query(&x));
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= TOLERANCE, || {
                    format!("{} k={k} at {x:?}: {got} vs oracle {want}", entry.name)
                })?;
            }
            runs += 1;
        }
    }
    within(Duration::from_secs(30), started)?;
    Ok(format!(
        "{} entries x 3 resolutions ({runs} runs), max oracle gap {worst:e}, {:?}",
        subjects.len(),
        started.elapsed()
    ))
}

fn max_gap(f: &AggFunction, k: u64, samples: usize, seed: u64) -> Result<(f64, f64), String> {
    let (e, _) = compile_grid(f, k).map_err(|e| e.to_string())?;
    let mut s = Sampler::new(&e);
    let mut r = rng(seed);
    let mut gap = 0.0f64;
    let mut lowest = 0.0f64;
    for _ in 0..samples {
        let x = gen::uniform_point(&mut r, f.arity());
        let d = f.call(&x) - s.at(&x);
        gap = gap.max(d);
        lowest = lowest.min(d);
    }
    Ok((gap, lowest))
}

fn c4_product_bounds() -> Outcome {
    let started = Instant::now();
    let p2 = catalog::get("product", 2).map_err(|e| e.to_string())?;
    let p3 = catalog::get("product", 3).map_err(|e| e.to_string())?;
    let (g2, low2) = max_gap(&p2, 100, 10_000, 41)?;
    ensure(low2 >= -TOLERANCE, || {
        format!("binary compile overshoots f by {}", -low2)
    })?;
    ensure(g2 > 0.0 && g2 <= 0.02, || {
        format!("binary k=100 max gap {g2} not in (0, 0.02]")
    })?;
    let (g3, low3) = max_gap(&p3, 20, 10_000, 42)?;
    ensure(low3 >= -TOLERANCE, || {
        format!("ternary compile overshoots f by {}", -low3)
    })?;
    ensure(g3 <= 0.15, || format!("ternary k=20 max gap {g3} > 0.15"))?;
    within(Duration::from_secs(60), started)?;
    Ok(format!(
        "binary k=100 gap {g2:.6}, ternary k=20 gap {g3:.6}, {:?}",
        started.elapsed()
    ))
}

fn c5_ternary_product() -> Outcome {
    let p3 = catalog::get("product", 3).map_err(|e| e.to_string())?;
    let (e, _) = compile_grid(&p3, 2).map_err(|e| e.to_string())?;
    let oracle = GridOracle::new(&p3, 2).map_err(|e| e.to_string())?;
    let mut s = Sampler::new(&e);
    let mut grid = 0;
    for idx in grid_indices(3, 2) {
        let x = grid_coords(&idx, 2);
        let (got, want) = (s.at(&x), oracle.query(&x));
        ensure(got == want, || format!("grid {x:?}: {got} vs oracle {want}"))?;
        grid += 1;
    }
    let mut r = rng(5);
    for _ in 0..1000 {
        let x = gen::point(&mut r, 3);
        let (got, want) = (s.at(&x), oracle.query(&x));
        ensure((got - want).abs() <= TOLERANCE, || {
            format!("at {x:?}: {got} vs oracle {want}")
        })?;
    }
    let example = s.at(&[0.5, 0.5, 1.0]);
    ensure(example == 0.25, || {
        format!("(1/2, 1/2, 1) gives {example}, expected 0.25")
    })?;
    Ok(format!(
        "{grid} grid points and 1000 random points match the oracle"
    ))
}

// Independent reference: scan a fine grid of ]0,1[ plus the breakpoints and
// keep the points whose value exceeds the sup of a left neighbourhood.
fn scanned_jumps(f: &StepFn1D) -> Vec<f64> {
    let mut points: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    points.extend_from_slice(f.breakpoints());
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .into_iter()
        .filter(|&c| {
            let left_sup = (1..=16).map(|j| f.eval(c - 1e-9 * j as f64)).fold(0.0, f64::max);
            left_sup < f.eval(c)
        })
        .collect()
}

fn c6_unary_exact() -> Outcome {
    let mut r = rng(6);
    for case in 0..50 {
        let f = gen::step_fn(&mut r, 5, 10);
        let e = compile_unary_exact(&f, 10).map_err(|e| e.to_string())?;
        let mut s = Sampler::new(&e);
        let probes: Vec<f64> = (0..1000)
            .map(|_| r.gen::<f64>())
            .chain(f.breakpoints().iter().copied())
            .chain([0.0, 1.0])
            .collect();
        for x in probes {
            let (got, want) = (s.at(&[x]), f.eval(x));
            ensure(got == want, || {
                format!("case {case} {f:?} at {x}: {got} != {want}")
            })?;
        }
        let mut fast: Vec<f64> = jump_set(&f).into_iter().map(|u| u.get()).collect();
        let mut slow = scanned_jumps(&f);
        fast.sort_by(f64::total_cmp);
        slow.sort_by(f64::total_cmp);
        ensure(fast == slow, || {
            format!("case {case}: jump_set {fast:?} vs scan {slow:?}")
        })?;
    }
    Ok("50 step functions exact at 1000 samples plus breakpoints; jump sets agree".into())
}

fn best_rational_at_most(a: f64, m: u64) -> f64 {
    (1..=m)
        .flat_map(|d| (0..=d).map(move |q| (q, d)))
        .filter(|&(q, d)| GridPoint::new(q, d).unwrap().cmp_f64(a).is_le())
        .map(|(q, d)| q as f64 / d as f64)
        .fold(0.0, f64::max)
}

fn c7_refinement() -> Outcome {
    let mut r = rng(7);
    let mut report = Vec::new();
    for m in [10u64, 50, 100] {
        let bound = 1.0 / m as f64;
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let b = r.gen::<f64>();
            let e = refine_med(Param::real(b).unwrap(), m).map_err(|e| e.to_string())?;
            let (x, y) = (r.gen::<f64>(), r.gen::<f64>());
            let got = e.eval_slice(&[x, y]).map_err(|e| e.to_string())?;
            let err = (got - med3(b, x, y)).abs();
            worst = worst.max(err);
            ensure(err <= bound, || {
                format!("med m={m} b={b} at ({x}, {y}): error {err}")
            })?;
        }
        for _ in 0..50 {
            let a = r.gen::<f64>();
            let e = refine_chi(Param::real(a).unwrap(), m).map_err(|e| e.to_string())?;
            let q = best_rational_at_most(a, m);
            ensure(a - q < bound, || {
                format!("chi m={m} a={a}: best rational {q} too far")
            })?;
            let probes = (0..=2000)
                .map(|i| i as f64 / 2000.0)
                .chain((0..=200).map(|i| q + (a - q) * i as f64 / 200.0));
            for x in probes {
                let got = e.eval_slice(&[x]).map_err(|e| e.to_string())?;
                let want = if x >= a && x != 0.0 { 1.0 } else { 0.0 };
                ensure(got == want || (q <= x && x < a), || {
                    format!("chi m={m} a={a} disagrees at {x}, outside [{q}, {a})")
                })?;
            }
        }
        report.push(format!("m={m} med error {worst:.2e}"));
    }
    Ok(format!(
        "{}; chi disagreement stays inside [q, a) with a - q < 1/m",
        report.join(", ")
    ))
}

fn c8_duality() -> Outcome {
    let mut r = rng(8);
    let subjects = catalog::subjects(3);
    for case in 0..1000 {
        let n = r.gen_range(1..=3);
        let e = gen::expr(&mut r, n, 4);
        let d = dualize_expr(&e);
        let x = gen::point(&mut r, n);
        let xc: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        let got = d.eval_slice(&x).map_err(|e| e.to_string())?;
        let want = 1.0 - e.eval_slice(&xc).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= TOLERANCE, || {
            format!("case {case} {} at {x:?}: {got} vs {want}", print(&e))
        })?;
        let back = dualize_expr(&d).eval_slice(&x).map_err(|e| e.to_string())?;
        let orig = e.eval_slice(&x).map_err(|e| e.to_string())?;
        ensure((back - orig).abs() <= TOLERANCE, || {
            format!("case {case} involution {} at {x:?}: {back} vs {orig}", print(&e))
        })?;
        let entry = &subjects[case % subjects.len()];
        let x = gen::point(&mut r, entry.arity());
        let dd = dualize(&dualize(&entry.function)).call(&x);
        let f = entry.function.call(&x);
        ensure((dd - f).abs() <= TOLERANCE, || {
            format!("{} dual of dual at {x:?}: {dd} vs {f}", entry.name)
        })?;
    }
    Ok("1000 random expressions and catalog functions, duality and involution within 1e-12".into())
}

fn c9_implications() -> Outcome {
    let n = Negation::zadeh();
    let kd = implication_from(&catalog::get("min", 2).map_err(|e| e.to_string())?, &n)
        .map_err(|e| e.to_string())?;
    let rb = implication_from(&catalog::get("product", 2).map_err(|e| e.to_string())?, &n)
        .map_err(|e| e.to_string())?;
    let mut r = rng(9);
    for _ in 0..1000 {
        let (x, y) = (r.gen::<f64>(), r.gen::<f64>());
        let (got, want) = (kd.apply(x, y), (1.0 - x).max(y));
        ensure((got - want).abs() <= TOLERANCE, || {
            format!("Kleene-Dienes at ({x}, {y}): {got} vs {want}")
        })?;
        let (got, want) = (rb.apply(x, y), 1.0 - x + x * y);
        ensure((got - want).abs() <= TOLERANCE, || {
            format!("Reichenbach at ({x}, {y}): {got} vs {want}")
        })?;
    }
    for i in [&kd, &rb] {
        let report = check_implication(i, 20);
        ensure(report.passed(), || report.to_text())?;
    }
    Ok("Kleene-Dienes and Reichenbach match at 1000 probes and satisfy the contract".into())
}

fn c10_dsl() -> Outcome {
    let mut r = rng(10);
    for case in 0..1000 {
        let n = r.gen_range(1..=4);
        let e = gen::expr(&mut r, n, 5);
        let text = print(&e);
        let back = parse(&text, Some(n)).map_err(|err| format!("case {case} {text}: {err}"))?;
        ensure(back == e, || {
            format!("case {case}: DSL round trip changed {text}")
        })?;
        let json = to_json_string(&e);
        let back = from_json_str(&json).map_err(|err| format!("case {case} json: {err}"))?;
        ensure(back == e, || {
            format!("case {case}: JSON round trip changed {text}")
        })?;
    }
    let malformed = [
        ("med(1/2, x0", 1, 12),
        ("chi(1/2, y0)", 1, 10),
        ("chi(3/2, x0)", 1, 5),
        ("join(x0,\n  meet(x1, ))", 2, 12),
        ("chi(1/0, x0)", 1, 7),
        ("x0 x1", 1, 4),
    ];
    for (src, line, column) in malformed {
        match parse(src, None) {
            Ok(e) => return Err(format!("{src:?} parsed as {}", print(&e))),
            Err(err) => ensure(err.position.line == line && err.position.column == column, || {
                format!(
                    "{src:?}: error at {}, expected {line}:{column} ({err})",
                    err.position
                )
            })?,
        }
    }
    Ok(format!(
        "1000 DSL and JSON round trips, {} malformed inputs rejected with positions",
        malformed.len()
    ))
}

fn c11_mutations() -> Outcome {
    let run = |mutation| {
        lemma_suite_with(&SuiteConfig {
            mutation,
            ..SuiteConfig::default()
        })
    };
    let clean = run(Mutation::None);
    ensure(clean.passed(), || clean.to_text())?;

    let chi = run(Mutation::ChiZeroAtZero);
    let g = chi.check("g-lemma").ok_or("missing g-lemma check")?;
    ensure(!g.passed, || "chi(0)(0) = 1 mutation not detected".into())?;
    let w = g.witness.as_ref().ok_or("g-lemma failure without witness")?;
    ensure(w.input.iter().all(|&v| v == 0.0), || {
        format!("g-lemma witness {w} is not all zeros")
    })?;

    let support = run(Mutation::SupportIncludesZeros);
    let h = support.check("h-lemma").ok_or("missing h-lemma check")?;
    ensure(!h.passed, || "support mutation not detected".into())?;
    let w = h.witness.as_ref().ok_or("h-lemma failure without witness")?;
    ensure(w.input.contains(&0.0), || {
        format!("h-lemma witness {w} has no zero coordinate")
    })?;
    Ok(format!(
        "clean suite passes; chi mutation witness {}; support mutation witness {}",
        g.witness.as_ref().unwrap(),
        w
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("G function on the cube vertices", c1_g_function),
        ("h function on I_4", c2_h_function),
        ("catalog grid exactness and oracle agreement", c3_catalog_grid),
        ("product approximation bounds", c4_product_bounds),
        ("ternary product at k=2", c5_ternary_product),
        ("exact unary step functions", c6_unary_exact),
        ("rational refinement", c7_refinement),
        ("duality", c8_duality),
        ("implications", c9_implications),
        ("expression language round trips", c10_dsl),
        ("mutation witnesses", c11_mutations),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
