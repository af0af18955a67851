use proptest::prelude::*;

use wcdim::coeff::{CoefficientFunction, EnvelopeFunction};
use wcdim::cover::{self, levels, premeasure_sum};
use wcdim::ifs::{
    validate_weak_contraction, Metric, MetricDomain, PointMap, ValidationOptions, WeakContraction,
};
use wcdim::moran::{moran_sum, MoranProblem};
use wcdim::scene::expr::Expr;
use wcdim::scene::parse_scene;

fn piecewise() -> impl Strategy<Value = CoefficientFunction> {
    prop::collection::btree_set(1u32..10_000, 0..8).prop_flat_map(|breaks| {
        let breaks: Vec<f64> = breaks.into_iter().map(|b| b as f64 / 1000.0).collect();
        let n = breaks.len() + 1;
        prop::collection::vec(0.0f64..0.999, n)
            .prop_map(move |values| CoefficientFunction::piecewise(breaks.clone(), values).unwrap())
    })
}

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.95, 2..6)
}

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![
        Just(Metric::Euclidean),
        Just(Metric::Chebyshev),
        Just(Metric::Manhattan)
    ]
}

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn envelope_is_monotone_lower_bound(f in piecewise(), ts in prop::collection::vec(0.0f64..12.0, 10)) {
        let env = f.envelope().unwrap();
        prop_assert!(env.values().windows(2).all(|w| w[0] <= w[1]));
        for t in ts {
            let e = env.eval(t);
            for k in 1..20 {
                let p = t + k as f64 * 0.37;
                prop_assert!(e <= f.eval(p).unwrap());
            }
            // tail infimum is attained arbitrarily close to the right of t
            let near = f.eval(t + 1e-9).unwrap().min(
                f.eval(t + 20.0).unwrap()
            );
            prop_assert!(e <= near);
        }
        prop_assert_eq!(env.eval(0.0), env.value_at_zero());
    }

    #[test]
    fn envelope_is_idempotent(f in piecewise()) {
        let env = f.envelope().unwrap();
        let again = EnvelopeFunction::from_steps(env.knots().to_vec(), env.values().to_vec()).unwrap();
        for t in [0.0, 0.001, 0.5, 1.0, 3.3, 9.9, 50.0] {
            prop_assert_eq!(env.eval(t), again.eval(t));
        }
    }

    #[test]
    fn moran_root_solves_equation(c in coefficients()) {
        let x = MoranProblem::new(c.clone()).unwrap().solve();
        prop_assert!(x > 0.0);
        prop_assert!((moran_sum(&c, x) - 1.0).abs() < 1e-9);
        // bracketed by the extreme single-ratio dimensions
        let m = c.len() as f64;
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(0.0, f64::max);
        prop_assert!(x >= m.ln() / (1.0 / lo).ln() - 1e-9);
        prop_assert!(x <= m.ln() / (1.0 / hi).ln() + 1e-9);
    }

    #[test]
    fn moran_root_monotone_in_coefficients(c in coefficients(), i in 0usize..6, bump in 0.0f64..0.04) {
        let i = i % c.len();
        let mut d = c.clone();
        d[i] += bump;
        let x = MoranProblem::new(c).unwrap().solve();
        let y = MoranProblem::new(d).unwrap().solve();
        prop_assert!(y >= x - 1e-11);
    }

    #[test]
    fn moran_root_permutation_invariant(c in coefficients()) {
        let mut r = c.clone();
        r.reverse();
        let x = MoranProblem::new(c).unwrap().solve();
        let y = MoranProblem::new(r).unwrap().solve();
        prop_assert!((x - y).abs() < 1e-11);
    }

    #[test]
    fn metric_axioms(m in metric(), a in point(3), b in point(3), c in point(3)) {
        let ab = m.distance(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, m.distance(&b, &a));
        prop_assert_eq!(m.distance(&a, &a), 0.0);
        let bound = m.distance(&a, &c) + m.distance(&c, &b);
        prop_assert!(ab <= bound * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn metric_ordering(a in point(4), b in point(4)) {
        let cheb = Metric::Chebyshev.distance(&a, &b);
        let eucl = Metric::Euclidean.distance(&a, &b);
        let manh = Metric::Manhattan.distance(&a, &b);
        prop_assert!(cheb <= eucl * (1.0 + 1e-12));
        prop_assert!(eucl <= manh * (1.0 + 1e-12));
    }

    #[test]
    fn constant_cover_sums_are_invariant(c in coefficients(), d in 0.1f64..5.0, depth in 1usize..7) {
        let envs: Vec<EnvelopeFunction> = c.iter().map(|v| EnvelopeFunction::constant(*v)).collect();
        let x0 = MoranProblem::new(c.clone()).unwrap().solve();
        let k = cover::compute_k(&envs, d).unwrap();
        for level in levels(&envs, d, depth, u64::MAX).unwrap() {
            let sum = premeasure_sum(&level, x0);
            prop_assert!((sum / d.powf(x0) - 1.0).abs() < 1e-9);
            prop_assert!(level.max_bound() <= k.powi(level.depth as i32) * d * (1.0 + 1e-12));
            prop_assert_eq!(level.word_count(), (c.len() as u64).pow(level.depth as u32));
        }
    }

    #[test]
    fn variable_cover_bounds_shrink(fs in prop::collection::vec(piecewise(), 2..4), d in 0.1f64..5.0) {
        let envs: Vec<EnvelopeFunction> = fs.iter().map(|f| f.envelope().unwrap()).collect();
        let k = cover::compute_k(&envs, d).unwrap();
        let all = levels(&envs, d, 5, u64::MAX).unwrap();
        let mut prev = d;
        for level in &all {
            let m = level.max_bound();
            prop_assert!(m <= prev * (1.0 + 1e-12));
            prop_assert!(m <= k.powi(level.depth as i32) * d * (1.0 + 1e-12));
            prev = m;
        }
    }

    #[test]
    fn similarity_passes_at_its_ratio(r in 0.05f64..0.95, seed in any::<u64>(), m in metric()) {
        let dom = MetricDomain::new(m, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let w = WeakContraction::new(
            PointMap::similarity(r, vec![0.0, 0.0]),
            CoefficientFunction::constant(r).unwrap(),
        );
        let mut opts = ValidationOptions::for_domain(&dom, seed);
        opts.pairs = 2000;
        let rep = validate_weak_contraction(&w, &dom, &opts).unwrap();
        prop_assert!(rep.pass);
        prop_assert!(rep.worst_ratio <= 1.0 + 1e-12);
    }
}

// scene DSL ------------------------------------------------------------------

fn num() -> impl Strategy<Value = f64> {
    (1u32..1000).prop_map(|v| v as f64 / 1000.0)
}

fn map_line(i: usize) -> impl Strategy<Value = String> {
    let alpha = prop_oneof![
        num().prop_map(|a| format!("const {a}")),
        (num(), num()).prop_map(|(a, b)| format!("piecewise 0:{a} 0.5:{b}")),
        num().prop_map(|a| format!("expr \"min(0.95, {a} + t/10)\"")),
    ];
    let body = prop_oneof![
        (num(), num(), num()).prop_map(|(r, x, y)| format!("similarity {r} [{x}, {y}]")),
        (num(), num(), num()).prop_map(|(r, x, a)| format!("similarity {r} [{x} 0] rotate {a}")),
        (num(), num()).prop_map(|(a, b)| format!("affine [[{a}, 0], [0, {b}]] [0.1, 0.2]")),
        num().prop_map(|a| format!("expr \"x1*{a}\" \"x2/2 + 0.1\"")),
    ];
    (body, alpha).prop_map(move |(b, a)| format!("map m{i} {b} alpha {a}"))
}

fn scene_text() -> impl Strategy<Value = String> {
    (
        prop_oneof![Just("euclidean"), Just("chebyshev"), Just("manhattan")],
        map_line(0),
        map_line(1),
        prop::option::of(map_line(2)),
        prop::option::of(1u64..1000),
    )
        .prop_map(|(metric, a, b, c, seed)| {
            let mut s = format!("# generated\nspace 2 {metric} box [0, 0] [1, 1]\n{a}\n{b}\n");
            if let Some(c) = c {
                s.push_str(&c);
                s.push('\n');
            }
            if let Some(seed) = seed {
                s.push_str(&format!("set seed {seed}\n"));
            }
            s
        })
}

const TOKENS: &[&str] = &[
    "space",
    "map",
    "set",
    "alpha",
    "const",
    "piecewise",
    "expr",
    "similarity",
    "affine",
    "rotate",
    "box",
    "diameter",
    "[",
    "]",
    ",",
    ":",
    "\"",
    "#",
    "0",
    "-1",
    "1e999",
    "0.5",
    "x1",
    "\"t\"",
    "\n",
    "nan",
    "seed",
    "euclidean",
    "2",
];

#[derive(Debug, Clone)]
enum Mutation {
    Delete(usize),
    Insert(usize, usize),
    Replace(usize, usize),
    Swap(usize, usize),
}

fn mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        any::<usize>().prop_map(Mutation::Delete),
        (any::<usize>(), 0..TOKENS.len()).prop_map(|(i, t)| Mutation::Insert(i, t)),
        (any::<usize>(), 0..TOKENS.len()).prop_map(|(i, t)| Mutation::Replace(i, t)),
        (any::<usize>(), any::<usize>()).prop_map(|(i, j)| Mutation::Swap(i, j)),
    ]
}

fn mutate(text: &str, muts: &[Mutation]) -> String {
    let mut toks: Vec<String> = text
        .split_inclusive([' ', '\n'])
        .map(str::to_string)
        .collect();
    for m in muts {
        if toks.is_empty() {
            toks.push(String::new());
        }
        let n = toks.len();
        match *m {
            Mutation::Delete(i) => {
                toks.remove(i % n);
            }
            Mutation::Insert(i, t) => toks.insert(i % (n + 1), format!("{} ", TOKENS[t])),
            Mutation::Replace(i, t) => toks[i % n] = format!("{} ", TOKENS[t]),
            Mutation::Swap(i, j) => toks.swap(i % n, j % n),
        }
    }
    toks.concat()
}

fn expr_tree() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("pi".to_string()),
        (0u32..100).prop_map(|v| format!("{}", v as f64 / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop_oneof![Just("+"), Just("-"), Just("*"), Just("/"), Just("^")]
            )
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("abs({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("min({a}, {b}, 1)")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scene_round_trip(text in scene_text()) {
        let scene = parse_scene(&text).unwrap();
        let printed = scene.to_string();
        let again = parse_scene(&printed).unwrap();
        prop_assert_eq!(&scene, &again);
        prop_assert_eq!(printed, again.to_string());
    }

    #[test]
    fn mutated_scenes_never_panic(text in scene_text(), muts in prop::collection::vec(mutation(), 1..6)) {
        let mutated = mutate(&text, &muts);
        match parse_scene(&mutated) {
            Ok(s) => prop_assert!(s.system.len() >= 2),
            Err(e) => {
                prop_assert!(e.line >= 1);
                prop_assert!(e.column >= 1);
            }
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_scene(&text);
    }

    #[test]
    fn expression_display_round_trip(src in expr_tree(), t in 0.001f64..10.0) {
        let e = Expr::parse(&src, &["t"]).unwrap();
        let again = Expr::parse(&e.to_string(), &["t"]).unwrap();
        prop_assert_eq!(&e, &again);
        let a = e.eval(&[("t", t)]);
        let b = again.eval(&[("t", t)]);
        prop_assert_eq!(a, b);
    }
}
