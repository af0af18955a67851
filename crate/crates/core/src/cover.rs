//! Word covers of the attractor and the sums that bound its Hausdorff
//! pre-measures.
//!
//! For a word `w = j1 ... jn` the bound `B(w)` on `dia S_w` follows the
//! recursion `B(empty) = D`, `B(j w) = env_j(B(w)) * B(w)`. Every quantity
//! here is an upper bound, never a claimed exact diameter.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coeff::EnvelopeFunction;
use crate::moran::{self, MoranError};

pub const DEFAULT_WORD_LIMIT: u64 = 10_000_000;

/// Relative slack for floating-point comparisons of bound sums.
const SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("need at least 2 envelopes, got {0}")]
    TooFewMaps(usize),
    #[error("diameter bound must be positive, got {0}")]
    BadDiameter(f64),
    #[error("decay constant K = {0} is not below 1")]
    DegenerateK(f64),
    #[error("{m}^{depth} words exceed the word limit {limit}")]
    TooManyWords { m: usize, depth: usize, limit: u64 },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("depth {n} is too shallow: need at least p + 2 = {needed}")]
    DepthTooShallow { n: usize, needed: usize },
    #[error(transparent)]
    Moran(#[from] MoranError),
}

/// Bounds for all `m^n` words of one depth, stored as a multiset of
/// `(value, multiplicity)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WordBoundLevel {
    pub depth: usize,
    pub m: usize,
    /// Sorted ascending by value.
    pub entries: Vec<(f64, u64)>,
}

impl WordBoundLevel {
    pub fn word_count(&self) -> u64 {
        self.entries.iter().map(|(_, k)| k).sum()
    }

    pub fn max_bound(&self) -> f64 {
        self.entries.iter().map(|(v, _)| *v).fold(0.0, f64::max)
    }
}

fn check(envelopes: &[EnvelopeFunction], d: f64) -> Result<(), CoverError> {
    if envelopes.len() < 2 {
        return Err(CoverError::TooFewMaps(envelopes.len()));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(CoverError::BadDiameter(d));
    }
    Ok(())
}

/// `K = max_j env_j(D)`.
pub fn compute_k(envelopes: &[EnvelopeFunction], d: f64) -> Result<f64, CoverError> {
    check(envelopes, d)?;
    let k = envelopes.iter().map(|e| e.eval(d)).fold(0.0, f64::max);
    if k >= 1.0 {
        return Err(CoverError::DegenerateK(k));
    }
    Ok(k)
}

/// Deduplication key: the value rounded to 12 significant digits.
fn quantize(v: f64) -> (i32, i64) {
    if v == 0.0 {
        return (i32::MIN, 0);
    }
    let e = v.abs().log10().floor() as i32;
    let mantissa = (v / 10f64.powi(e - 11)).round() as i64;
    (e, mantissa)
}

fn words_at(m: usize, depth: usize) -> Option<u64> {
    (m as u64).checked_pow(depth as u32)
}

fn root_level(m: usize, d: f64) -> WordBoundLevel {
    WordBoundLevel {
        depth: 0,
        m,
        entries: vec![(d, 1)],
    }
}

/// Prepends every map index to every word of `level`. Entries whose values
/// agree to 12 significant digits are merged, keeping the larger value so
/// the result stays an upper bound.
pub fn extend_level(level: &WordBoundLevel, envelopes: &[EnvelopeFunction]) -> WordBoundLevel {
    let mut merged: BTreeMap<(i32, i64), (f64, u64)> = BTreeMap::new();
    for &(b, mult) in &level.entries {
        for env in envelopes {
            let v = env.eval(b) * b;
            let slot = merged.entry(quantize(v)).or_insert((v, 0));
            slot.0 = slot.0.max(v);
            slot.1 += mult;
        }
    }
    let mut entries: Vec<(f64, u64)> = merged.into_values().collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    WordBoundLevel {
        depth: level.depth + 1,
        m: level.m,
        entries,
    }
}

/// Bounds for every word of length `depth`.
pub fn word_bounds(
    envelopes: &[EnvelopeFunction],
    d: f64,
    depth: usize,
    word_limit: u64,
) -> Result<WordBoundLevel, CoverError> {
    Ok(levels(envelopes, d, depth, word_limit)?
        .pop()
        .expect("depth >= 1"))
}

/// Levels `1..=depth`, in order.
pub fn levels(
    envelopes: &[EnvelopeFunction],
    d: f64,
    depth: usize,
    word_limit: u64,
) -> Result<Vec<WordBoundLevel>, CoverError> {
    check(envelopes, d)?;
    if depth == 0 {
        return Err(CoverError::ZeroDepth);
    }
    let m = envelopes.len();
    match words_at(m, depth) {
        Some(n) if n <= word_limit => {}
        _ => {
            return Err(CoverError::TooManyWords {
                m,
                depth,
                limit: word_limit,
            })
        }
    }
    let mut out = Vec::with_capacity(depth);
    let mut level = root_level(m, d);
    for _ in 0..depth {
        level = extend_level(&level, envelopes);
        out.push(level.clone());
    }
    Ok(out)
}

/// `sum_w B(w)^p`, with `0^p = 0`.
pub fn premeasure_sum(level: &WordBoundLevel, p: f64) -> f64 {
    level
        .entries
        .iter()
        .filter(|(b, _)| *b > 0.0)
        .map(|(b, k)| *k as f64 * b.powf(p))
        .sum()
}

/// Smallest `n >= 1` whose word bounds are all at most `eps`.
pub fn depth_for_epsilon(
    envelopes: &[EnvelopeFunction],
    d: f64,
    eps: f64,
    word_limit: u64,
) -> Result<usize, CoverError> {
    check(envelopes, d)?;
    if !(eps > 0.0) {
        return Err(CoverError::BadEpsilon(eps));
    }
    compute_k(envelopes, d)?;
    let m = envelopes.len();
    let mut level = root_level(m, d);
    loop {
        let depth = level.depth + 1;
        match words_at(m, depth) {
            Some(n) if n <= word_limit => {}
            _ => {
                return Err(CoverError::TooManyWords {
                    m,
                    depth,
                    limit: word_limit,
                })
            }
        }
        level = extend_level(&level, envelopes);
        if level.max_bound() <= eps {
            return Ok(depth);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofBoundReport {
    pub t: f64,
    pub depth: usize,
    /// Depth after which every word bound is at most `t`.
    pub p: usize,
    pub x_t: f64,
    pub k: f64,
    /// `sum_w B(w)^{x(t)}` at `depth`.
    pub lhs: f64,
    /// Sum of the grouped bounds
    /// `(prod_{i <= n-p-1} env_{j_i}(t) * K^{p+1} D)^{x(t)}` over all words.
    pub grouped: f64,
    /// `m^{p+1} (K^{p+1} D)^{x(t)}`, independent of `depth`.
    pub rhs: f64,
    pub holds: bool,
}

fn pow0(base: f64, x: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        base.powf(x)
    }
}

/// Evaluates the chain `sum_w B(w)^{x(t)} <= grouped <= rhs` at depth `n`.
///
/// The first `n - p - 1` letters of each word are bounded by `env(t)` and the
/// remaining `p + 1` by `K`. The trailing `p + 1` letters range over all
/// `m^{p+1}` choices, which is where the factor `m^{p+1}` in `rhs` comes from.
pub fn proof_bound_check(
    envelopes: &[EnvelopeFunction],
    d: f64,
    t: f64,
    n: usize,
    word_limit: u64,
) -> Result<ProofBoundReport, CoverError> {
    check(envelopes, d)?;
    let p = depth_for_epsilon(envelopes, d, t, word_limit)?;
    if n < p + 2 {
        return Err(CoverError::DepthTooShallow { n, needed: p + 2 });
    }
    let k = compute_k(envelopes, d)?;
    let at_t: Vec<f64> = envelopes.iter().map(|e| e.eval(t)).collect();
    let x = moran::MoranProblem::new(at_t.clone())?.solve();
    let level = word_bounds(envelopes, d, n, word_limit)?;
    let lhs = premeasure_sum(&level, x);

    let m = envelopes.len() as f64;
    let tail = pow0(k.powi(p as i32 + 1) * d, x);
    let head: f64 = at_t.iter().map(|a| pow0(*a, x)).sum();
    let grouped = m.powi(p as i32 + 1) * tail * head.powi((n - p - 1) as i32);
    let rhs = m.powi(p as i32 + 1) * tail;
    let holds = lhs <= grouped * (1.0 + SUM_SLACK) && grouped <= rhs * (1.0 + SUM_SLACK);
    Ok(ProofBoundReport {
        t,
        depth: n,
        p,
        x_t: x,
        k,
        lhs,
        grouped,
        rhs,
        holds,
    })
}

/// One row of the CLI cover table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverRow {
    pub depth: usize,
    pub max_bound: f64,
    pub sum: f64,
    pub word_count: u64,
}

pub fn cover_table(
    envelopes: &[EnvelopeFunction],
    d: f64,
    depth: usize,
    exponent: f64,
    word_limit: u64,
) -> Result<Vec<CoverRow>, CoverError> {
    Ok(levels(envelopes, d, depth, word_limit)?
        .iter()
        .map(|l| CoverRow {
            depth: l.depth,
            max_bound: l.max_bound(),
            sum: premeasure_sum(l, exponent),
            word_count: l.word_count(),
        })
        .collect())
}

pub fn cover_table_csv(rows: &[CoverRow]) -> String {
    use crate::format::sig17;
    let mut out = String::from("depth,max_bound,sum_at_x0,word_count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.depth,
            sig17(r.max_bound),
            sig17(r.sum),
            r.word_count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientFunction;

    fn c(v: f64) -> EnvelopeFunction {
        EnvelopeFunction::constant(v)
    }

    fn step() -> EnvelopeFunction {
        CoefficientFunction::piecewise(vec![1.0], vec![0.25, 0.5])
            .unwrap()
            .envelope()
            .unwrap()
    }

    const L: u64 = DEFAULT_WORD_LIMIT;

    #[test]
    fn k_examples() {
        assert_eq!(
            compute_k(&[c(1.0 / 3.0), c(1.0 / 3.0)], 1.0).unwrap(),
            1.0 / 3.0
        );
        assert_eq!(compute_k(&[c(0.25), c(0.5)], 1.0).unwrap(), 0.5);
        assert_eq!(compute_k(&[step(), step()], 0.5).unwrap(), 0.25);
        assert!(matches!(
            compute_k(&[c(0.5)], 1.0),
            Err(CoverError::TooFewMaps(1))
        ));
    }

    #[test]
    fn cantor_depth_three() {
        let lvl = word_bounds(&[c(1.0 / 3.0), c(1.0 / 3.0)], 1.0, 3, L).unwrap();
        assert_eq!(lvl.word_count(), 8);
        for (v, _) in &lvl.entries {
            assert!((v - 1.0 / 27.0).abs() < 1e-16);
        }
    }

    #[test]
    fn uneven_pair_multiset() {
        let lvl = word_bounds(&[c(0.5), c(0.25)], 1.0, 2, L).unwrap();
        assert_eq!(
            lvl.entries,
            vec![(1.0 / 16.0, 1), (1.0 / 8.0, 2), (0.25, 1)]
        );
        assert_eq!(premeasure_sum(&lvl, 1.0), 0.5625);
        assert_eq!(premeasure_sum(&lvl, 0.0), 4.0);
    }

    #[test]
    fn step_envelope_recursion() {
        // level 1: env(2) = 0.5 -> B = 1; level 2: env(1) = 0.5 -> B = 0.5
        let l = levels(&[step(), step()], 2.0, 2, L).unwrap();
        assert_eq!(l[0].entries, vec![(1.0, 2)]);
        assert_eq!(l[1].entries, vec![(0.5, 4)]);
    }

    #[test]
    fn cantor_sum_at_dimension_is_one() {
        let lvl = word_bounds(&[c(1.0 / 3.0), c(1.0 / 3.0)], 1.0, 3, L).unwrap();
        let x0 = 2f64.ln() / 3f64.ln();
        assert!((premeasure_sum(&lvl, x0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_examples() {
        let cantor = [c(1.0 / 3.0), c(1.0 / 3.0)];
        assert_eq!(depth_for_epsilon(&cantor, 1.0, 0.1, L).unwrap(), 3);
        assert_eq!(depth_for_epsilon(&cantor, 1.0, 5.0, L).unwrap(), 1);
        assert_eq!(depth_for_epsilon(&cantor, 1.0, 1.0 / 3.0, L).unwrap(), 1);
        let half = [c(0.5), c(0.5)];
        assert_eq!(
            depth_for_epsilon(&half, 1.0, 2f64.powi(-10), L).unwrap(),
            10
        );
        assert!(matches!(
            depth_for_epsilon(&half, 1.0, 1e-300, 1 << 20),
            Err(CoverError::TooManyWords { .. })
        ));
        assert!(depth_for_epsilon(&half, 1.0, 0.0, L).is_err());
    }

    #[test]
    fn word_limit_enforced() {
        assert!(matches!(
            word_bounds(&[c(0.5), c(0.5)], 1.0, 24, L),
            Err(CoverError::TooManyWords {
                m: 2,
                depth: 24,
                ..
            })
        ));
        assert!(word_bounds(&[c(0.5), c(0.5)], 1.0, 23, L).is_ok());
    }

    /// Term-by-term recomputation of both sides for every word.
    fn brute_force(
        env: &[EnvelopeFunction],
        d: f64,
        t: f64,
        n: usize,
        p: usize,
        x: f64,
        k: f64,
    ) -> (f64, f64) {
        let m = env.len();
        let mut lhs = 0.0;
        let mut grouped = 0.0;
        for code in 0..m.pow(n as u32) {
            let mut word = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                word.push(c % m);
                c /= m;
            }
            // word[0] is the outermost map
            let mut b = d;
            for &j in word.iter().rev() {
                b *= env[j].eval(b);
            }
            let mut g = k.powi(p as i32 + 1) * d;
            for &j in &word[..n - p - 1] {
                g *= env[j].eval(t);
            }
            assert!(b <= g * (1.0 + 1e-12), "chain step fails for {word:?}");
            lhs += pow0(b, x);
            grouped += pow0(g, x);
        }
        (lhs, grouped)
    }

    #[test]
    fn cantor_bound_check_matches_brute_force() {
        let env = [c(1.0 / 3.0), c(1.0 / 3.0)];
        let r = proof_bound_check(&env, 1.0, 0.1, 5, L).unwrap();
        assert_eq!(r.p, 3);
        assert!(r.holds);
        assert!((r.lhs - 1.0).abs() < 1e-12);
        // without the m^{p+1} factor the right side would be 1/16 < lhs
        assert!((r.rhs / 16.0 - 0.0625).abs() < 1e-12);
        let (lhs, grouped) = brute_force(&env, 1.0, 0.1, 5, r.p, r.x_t, r.k);
        assert!((lhs - r.lhs).abs() < 1e-12);
        assert!((grouped - r.grouped).abs() < 1e-12);
    }

    #[test]
    fn step_envelope_bound_check_matches_brute_force() {
        let env = [
            step(),
            CoefficientFunction::piecewise(vec![0.3, 2.0], vec![0.1, 0.4, 0.6])
                .unwrap()
                .envelope()
                .unwrap(),
        ];
        let r = proof_bound_check(&env, 3.0, 0.2, 0, L).unwrap_err();
        let CoverError::DepthTooShallow { needed, .. } = r else {
            panic!()
        };
        let r = proof_bound_check(&env, 3.0, 0.2, needed, L).unwrap();
        assert!(r.holds);
        let (lhs, grouped) = brute_force(&env, 3.0, 0.2, needed, r.p, r.x_t, r.k);
        assert!((lhs - r.lhs).abs() <= 1e-12 * lhs.max(1.0));
        assert!((grouped - r.grouped).abs() <= 1e-9 * grouped.max(1.0));
    }

    #[test]
    fn all_zero_bound_check() {
        let env = [c(0.0), c(0.0)];
        let r = proof_bound_check(&env, 1.0, 0.5, 3, L).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn half_pair_bound_check() {
        let env = [c(0.5), c(0.5)];
        let r = proof_bound_check(&env, 1.0, 0.3, 4, L).unwrap();
        assert_eq!(r.p, 2);
        assert!(r.holds);
        assert!(matches!(
            proof_bound_check(&env, 1.0, 0.3, 3, L),
            Err(CoverError::DepthTooShallow { needed: 4, .. })
        ));
    }

    #[test]
    fn csv_header() {
        let rows = cover_table(&[c(0.5), c(0.5)], 1.0, 2, 1.0, L).unwrap();
        let csv = cover_table_csv(&rows);
        assert!(csv.starts_with(
            "depth,max_bound,sum_at_x0,word_count\n1,0.50000000000000000,1.0000000000000000,2\n"
        ));
    }
}
