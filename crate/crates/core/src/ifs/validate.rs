//! Randomized evidence for the weak-contraction inequality
//! `d(f(x), f(y)) <= env(d(x, y)) * d(x, y)`.
//!
//! Passing is evidence, not proof. The pair budget is split into fixed-size
//! chunks with one random substream each, so the report is the same for any
//! worker count.

use rand::RngExt;
use rayon::prelude::*;

use crate::coeff::EnvelopeFunction;
use crate::rng;

use super::{IfsError, MetricDomain, WeakContraction};

const CHUNK: usize = 4096;
const MAX_VIOLATIONS: usize = 10;
/// Share of pairs drawn at small separations.
const SMALL_FRACTION: f64 = 0.1;
/// Smallest separation probed, relative to the diameter bound.
const SMALL_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub image_distance: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub pass: bool,
    pub pairs: usize,
    /// Largest `d(f(x), f(y)) / (env(d) * d)` seen.
    pub worst_ratio: f64,
    pub violation_count: usize,
    /// First violations in sampling order, at most 10.
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub pairs: usize,
    pub seed: u64,
    pub slack: f64,
}

impl ValidationOptions {
    /// Defaults for a domain: 10^5 pairs, slack `1e-9 * D`.
    pub fn for_domain(dom: &MetricDomain, seed: u64) -> Self {
        ValidationOptions {
            pairs: 100_000,
            seed,
            slack: 1e-9 * dom.diameter_bound(),
        }
    }
}

struct ChunkResult {
    worst: f64,
    count: usize,
    violations: Vec<Violation>,
}

fn sample_pair(dom: &MetricDomain, r: &mut rng::Rng) -> (Vec<f64>, Vec<f64>) {
    let uniform = |r: &mut rng::Rng| -> Vec<f64> {
        dom.lo()
            .iter()
            .zip(dom.hi())
            .map(|(l, h)| l + (h - l) * r.random::<f64>())
            .collect()
    };
    let x = uniform(r);
    if r.random::<f64>() >= SMALL_FRACTION {
        let y = uniform(r);
        return (x, y);
    }
    let d = dom.diameter_bound();
    let scale = d * (SMALL_SCALE.ln() * r.random::<f64>()).exp();
    let mut dir: Vec<f64> = (0..dom.dim())
        .map(|_| 2.0 * r.random::<f64>() - 1.0)
        .collect();
    let n = dom.metric().norm(&dir);
    if n == 0.0 {
        dir[0] = 1.0;
    } else {
        dir.iter_mut().for_each(|v| *v /= n);
    }
    let y = x
        .iter()
        .zip(&dir)
        .zip(dom.lo().iter().zip(dom.hi()))
        .map(|((xi, di), (l, h))| (xi + scale * di).clamp(*l, *h))
        .collect();
    (x, y)
}

fn run_chunk(
    w: &WeakContraction,
    env: &EnvelopeFunction,
    dom: &MetricDomain,
    opts: &ValidationOptions,
    chunk: usize,
    count: usize,
) -> Result<ChunkResult, IfsError> {
    let mut r = rng::substream(opts.seed, chunk as u64);
    let metric = dom.metric();
    let mut out = ChunkResult {
        worst: 0.0,
        count: 0,
        violations: Vec::new(),
    };
    for _ in 0..count {
        let (x, y) = sample_pair(dom, &mut r);
        let dist = metric.distance(&x, &y);
        if dist == 0.0 {
            continue;
        }
        let image = metric.norm(&w.map.image_difference(&x, &y)?);
        let allowed = env.eval(dist) * dist;
        let ratio = if image == 0.0 {
            0.0
        } else if allowed == 0.0 {
            f64::INFINITY
        } else {
            image / allowed
        };
        out.worst = out.worst.max(ratio);
        if image > allowed + opts.slack {
            out.count += 1;
            if out.violations.len() < MAX_VIOLATIONS {
                out.violations.push(Violation {
                    x,
                    y,
                    distance: dist,
                    image_distance: image,
                    allowed,
                });
            }
        }
    }
    Ok(out)
}

pub fn validate_weak_contraction(
    w: &WeakContraction,
    dom: &MetricDomain,
    opts: &ValidationOptions,
) -> Result<ValidationReport, IfsError> {
    if opts.pairs == 0 {
        return Err(IfsError::InvalidArgument(
            "n_pairs must be at least 1".into(),
        ));
    }
    w.map.check_dim(dom.dim())?;
    let env = w.coefficient.envelope()?;
    let chunks = opts.pairs.div_ceil(CHUNK);
    let results: Vec<ChunkResult> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let n = CHUNK.min(opts.pairs - k * CHUNK);
            run_chunk(w, &env, dom, opts, k, n)
        })
        .collect::<Result<_, _>>()?;
    let mut report = ValidationReport {
        pass: true,
        pairs: opts.pairs,
        worst_ratio: 0.0,
        violation_count: 0,
        violations: Vec::new(),
    };
    for r in results {
        report.worst_ratio = report.worst_ratio.max(r.worst);
        report.violation_count += r.count;
        for v in r.violations {
            if report.violations.len() < MAX_VIOLATIONS {
                report.violations.push(v);
            }
        }
    }
    report.pass = report.violation_count == 0;
    Ok(report)
}
