//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wcdim::attractor::{chaos_game, ChaosGameOptions};
use wcdim::boxdim::{box_counts, fit_dimension, scale_ladder};
use wcdim::coeff::{geometric, CoefficientFunction, EnvelopeFunction};
use wcdim::cover::{self, compute_k, levels, premeasure_sum, proof_bound_check};
use wcdim::ifs::{
    validate_weak_contraction, IFSystem, Metric, MetricDomain, PointMap, ValidationOptions,
    WeakContraction,
};
use wcdim::moran::{x_curve, MoranProblem};
use wcdim::scene::parse_scene;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || {
        format!("took {took:.2?}, budget {budget:.0?}")
    })
}

fn solve(c: &[f64]) -> f64 {
    MoranProblem::new(c.to_vec()).unwrap().solve()
}

fn random_piecewise(rng: &mut ChaCha8Rng, max_value: f64) -> CoefficientFunction {
    let k = rng.random_range(0..=8usize);
    let mut breaks: Vec<f64> = (0..k).map(|_| rng.random_range(1e-3..10.0)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let values = (0..=breaks.len())
        .map(|_| rng.random_range(0.0..max_value))
        .collect();
    CoefficientFunction::piecewise(breaks, values).unwrap()
}

// 1 ---------------------------------------------------------------------------

fn moran_oracles() -> Outcome {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let cases: [(&[f64], f64); 3] = [
        (&[1.0 / 3.0, 1.0 / 3.0], 2f64.ln() / 3f64.ln()),
        (&[0.5, 0.5, 0.5], 3f64.ln() / 2f64.ln()),
        (&[0.5, 0.25], phi.ln() / 2f64.ln()),
    ];
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for (c, want) in cases {
        let start = Instant::now();
        let got = solve(c);
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure((got - want).abs() <= 1e-9, || {
            format!("{c:?}: got {got}, want {want}")
        })?;
        ensure(took < Duration::from_millis(10), || {
            format!("{c:?} took {took:?}")
        })?;
        worst = worst.max((got - want).abs());
    }
    Ok(format!("max error {worst:.1e}, slowest {slowest:.1?}"))
}

// 2 ---------------------------------------------------------------------------

fn conventions() -> Outcome {
    let a = solve(&[0.0, 0.0]);
    let b = solve(&[0.9, 0.0]);
    ensure(a == 0.0, || format!("(0,0) gave {a}"))?;
    ensure(b == 0.0, || format!("(0.9,0) gave {b}"))?;
    Ok("(0,0) -> 0, (0.9,0) -> 0".into())
}

// 3 ---------------------------------------------------------------------------

fn envelope_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..1000 {
        let f = random_piecewise(&mut rng, 1.0);
        let env = f.envelope().map_err(|e| e.to_string())?;
        ensure(env.values().windows(2).all(|w| w[0] <= w[1]), || {
            format!("case {case}: envelope not monotone")
        })?;
        for _ in 0..10 {
            let t = rng.random_range(0.0..12.0);
            let at_t = env.eval(t);
            for _ in 0..10 {
                let p = t + rng.random_range(0.0..20.0);
                if p <= t {
                    continue;
                }
                let a = f.eval(p).unwrap();
                ensure(at_t <= a, || {
                    format!("case {case}: env({t}) = {at_t} > alpha({p}) = {a}")
                })?;
            }
        }
        let jump = (env.eval(1e-8) - env.value_at_zero()).abs();
        ensure(jump <= 1e-6, || format!("case {case}: jump {jump} at 0"))?;
    }

    let grid = geometric(1e-6, 10.0, 64);
    for case in 0..200 {
        let m = rng.random_range(2..=5usize);
        let envs: Vec<EnvelopeFunction> = (0..m)
            .map(|_| random_piecewise(&mut rng, 0.95).envelope().unwrap())
            .collect();
        let raw: Vec<f64> = grid
            .iter()
            .map(|&t| solve(&envs.iter().map(|e| e.eval(t)).collect::<Vec<_>>()))
            .collect();
        ensure(raw.windows(2).all(|w| w[1] >= w[0] - 1e-12), || {
            format!("case {case}: raw x(t) decreases")
        })?;
        let curve = x_curve(&envs, &grid, 1e-12).map_err(|e| e.to_string())?;
        let xs: Vec<f64> = curve.samples.iter().map(|s| s.1).collect();
        ensure(xs.windows(2).all(|w| w[0] <= w[1]), || {
            format!("case {case}: x(t) not monotone")
        })?;
        ensure(
            xs.iter().zip(&raw).all(|(a, b)| (a - b).abs() <= 1e-12),
            || format!("case {case}: curve departs from raw solves"),
        )?;
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "1000 envelopes, 200 curves in {:.2?}",
        start.elapsed()
    ))
}

// 4 ---------------------------------------------------------------------------

fn cover_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for m in 2..=4usize {
        for case in 0..5 {
            let coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..0.9)).collect();
            let d = rng.random_range(0.5..3.0);
            let envs: Vec<EnvelopeFunction> = coeffs
                .iter()
                .map(|c| EnvelopeFunction::constant(*c))
                .collect();
            let x0 = solve(&coeffs);
            let k = compute_k(&envs, d).map_err(|e| e.to_string())?;
            let all = levels(&envs, d, 12, u64::MAX).map_err(|e| e.to_string())?;
            for level in &all {
                let sum = premeasure_sum(level, x0);
                let want = d.powf(x0);
                let rel = (sum - want).abs() / want;
                worst = worst.max(rel);
                ensure(rel <= 1e-9, || {
                    format!(
                        "m={m} case {case} depth {}: sum {sum} vs {want}",
                        level.depth
                    )
                })?;
                let cap = k.powi(level.depth as i32) * d;
                ensure(level.max_bound() <= cap * (1.0 + 1e-12), || {
                    format!("m={m} depth {}: max bound above K^n D", level.depth)
                })?;
                ensure(
                    level.word_count() == (m as u64).pow(level.depth as u32),
                    || "word count".into(),
                )?;
            }
        }
    }

    let mut checks = 0;
    while checks < 100 {
        let m = rng.random_range(2..=3usize);
        let d = rng.random_range(0.5..2.0);
        let envs: Vec<EnvelopeFunction> = (0..m)
            .map(|_| random_piecewise(&mut rng, 0.6).envelope().unwrap())
            .collect();
        let t = d * rng.random_range(0.05..1.0);
        let p = cover::depth_for_epsilon(&envs, d, t, 1 << 20).map_err(|e| e.to_string())?;
        let n = p + 2 + rng.random_range(0..2usize);
        if (m as u64).pow(n as u32) > 1 << 20 {
            continue;
        }
        let r = proof_bound_check(&envs, d, t, n, 1 << 20).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("proof bound fails: {r:?}"))?;
        checks += 1;
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "max rel error {worst:.1e}, 100 proof checks, {:.2?}",
        start.elapsed()
    ))
}

// 5, 6 ------------------------------------------------------------------------

struct Expected {
    ratio: f64,
    k: (i32, i32),
    target: f64,
    tol: f64,
    over: f64,
    min_r2: Option<f64>,
    budget: Duration,
}

fn end_to_end(sys: &IFSystem, e: Expected) -> Outcome {
    let Expected {
        ratio,
        k,
        target,
        tol,
        over,
        min_r2,
        budget,
    } = e;
    let start = Instant::now();
    let x0 = solve(&sys.infima().unwrap());
    let cloud =
        chaos_game(sys, &ChaosGameOptions::new(100_000, 2024)).map_err(|e| e.to_string())?;
    let scales = scale_ladder(1.0, ratio, k.0, k.1);
    let series = box_counts(&cloud, sys.domain(), &scales).map_err(|e| e.to_string())?;
    let fit = fit_dimension(series, None)
        .map_err(|e| e.to_string())?
        .fit
        .unwrap();
    ensure((fit.slope - target).abs() <= tol, || {
        format!("slope {} outside {target} +- {tol}", fit.slope)
    })?;
    ensure(fit.slope <= x0 + over, || {
        format!("slope {} > x0 {x0} + {over}", fit.slope)
    })?;
    if let Some(r2) = min_r2 {
        ensure(fit.r2 >= r2, || format!("r2 {} < {r2}", fit.r2))?;
    }
    within_budget(start, budget)?;
    Ok(format!(
        "slope {:.4}, x0 {:.4}, r2 {:.5}, {:.2?}",
        fit.slope,
        x0,
        fit.r2,
        start.elapsed()
    ))
}

fn cantor() -> Outcome {
    let third = 1.0 / 3.0;
    let dom = MetricDomain::new(Metric::Euclidean, vec![0.0], vec![1.0]).unwrap();
    let w = |t: f64| {
        WeakContraction::new(
            PointMap::similarity(third, vec![t]),
            CoefficientFunction::constant(third).unwrap(),
        )
    };
    let sys = IFSystem::new(dom, vec![w(0.0), w(2.0 / 3.0)]).unwrap();
    end_to_end(
        &sys,
        Expected {
            ratio: third,
            k: (2, 7),
            target: 0.63,
            tol: 0.05,
            over: 0.02,
            min_r2: Some(0.995),
            budget: Duration::from_secs(10),
        },
    )
}

fn sierpinski() -> Outcome {
    let dom = MetricDomain::new(Metric::Euclidean, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let w = |t: [f64; 2]| {
        WeakContraction::new(
            PointMap::similarity(0.5, t.to_vec()),
            CoefficientFunction::constant(0.5).unwrap(),
        )
    };
    let sys = IFSystem::new(dom, vec![w([0.0, 0.0]), w([0.5, 0.0]), w([0.0, 0.5])]).unwrap();
    end_to_end(
        &sys,
        Expected {
            ratio: 0.5,
            k: (2, 9),
            target: 1.585,
            tol: 0.07,
            over: 0.03,
            min_r2: None,
            budget: Duration::from_secs(20),
        },
    )
}

// 7 ---------------------------------------------------------------------------

fn variable_coefficient() -> Outcome {
    let text = "\
space 1 euclidean box [0] [1]
map A similarity 0.25 [0] alpha piecewise 0:0.25 1:0.5
map B similarity 0.25 [0.75] alpha piecewise 0:0.25 1:0.5
";
    let scene = parse_scene(text).map_err(|e| e.to_string())?;
    let envs = scene.system.envelopes().map_err(|e| e.to_string())?;
    let x0 = solve(&scene.system.infima().unwrap());
    ensure(x0 == 0.5, || format!("x0 = {x0}"))?;
    let at2: Vec<f64> = envs.iter().map(|e| e.eval(2.0)).collect();
    let x2 = solve(&at2);
    ensure((x2 - 1.0).abs() <= 1e-9, || format!("x(2) = {x2}"))?;
    Ok(format!("x0 = {x0}, x(2) = {x2}"))
}

// 8 ---------------------------------------------------------------------------

fn validator_discrimination() -> Outcome {
    let start = Instant::now();
    let dom = MetricDomain::new(Metric::Euclidean, vec![0.0], vec![1.0]).unwrap();
    let w = |a: f64| {
        WeakContraction::new(
            PointMap::similarity(0.5, vec![0.25]),
            CoefficientFunction::constant(a).unwrap(),
        )
    };
    let (good, bad) = (w(0.5), w(0.4));
    let mut seeds = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let seed = seeds.next_u64();
        let opts = ValidationOptions::for_domain(&dom, seed);
        let g = validate_weak_contraction(&good, &dom, &opts).map_err(|e| e.to_string())?;
        ensure(g.pass && g.worst_ratio <= 1.0 + 1e-12, || {
            format!("seed {seed}: alpha 0.5 rejected, worst {}", g.worst_ratio)
        })?;
        worst = worst.max(g.worst_ratio);
        let b = validate_weak_contraction(&bad, &dom, &opts).map_err(|e| e.to_string())?;
        ensure(!b.pass && !b.violations.is_empty(), || {
            format!("seed {seed}: alpha 0.4 accepted")
        })?;
    }
    within_budget(start, Duration::from_secs(5))?;
    Ok(format!(
        "8 seeds, worst passing ratio {worst}, {:.2?}",
        start.elapsed()
    ))
}

// 9 ---------------------------------------------------------------------------

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scene = dir.path().join("cantor.scene");
    std::fs::write(
        &scene,
        "\
space 1 euclidean box [0] [1]
map L similarity 0.3333333333333333 [0] alpha const 0.3333333333333333
map R similarity 0.3333333333333333 [0.6666666666666666] alpha const 0.3333333333333333
set scale_ratio 0.3333333333333333
set scale_k_min 2
set scale_k_max 7
",
    )
    .map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_wcdim"))
            .arg("verify")
            .arg(&scene)
            .env("WCDIM_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("verify exited {:?}", out.status.code())
        })?;
        Ok(out.stdout)
    };
    let a = run("1")?;
    let b = run("4")?;
    ensure(!a.is_empty() && a == b, || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Moran oracle suite", moran_oracles),
        ("convention suite", conventions),
        ("envelope properties", envelope_properties),
        ("cover identities", cover_identities),
        ("end-to-end Cantor", cantor),
        ("end-to-end Sierpinski", sierpinski),
        ("variable-coefficient regression", variable_coefficient),
        ("validator discrimination", validator_discrimination),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
