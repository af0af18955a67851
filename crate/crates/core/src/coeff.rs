//! Contraction-coefficient functions `alpha(t)` and their tail-infimum
//! envelopes `inf_{p > t} alpha(p)`.

use thiserror::Error;

use crate::scene::expr::{Expr, ExprError, TBinding};

/// Values at or above this are accepted but logged, since the cover decay
/// constant gets arbitrarily close to one.
pub const NEAR_ONE_WARNING: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error("coefficient evaluated to {value} at t = {t}, outside [0, 1)")]
    EvaluatesOutsideUnit { t: f64, value: f64 },
    #[error("coefficient argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("piecewise breakpoints must be positive and strictly increasing")]
    BadBreakpoints,
    #[error("piecewise coefficient needs exactly one more value than breakpoints")]
    BadPieceCount,
    #[error("invalid sample grid: {0}")]
    BadGrid(String),
    #[error("sample grid too coarse: envelope still moved by {change:e} after {passes} refinement passes")]
    GridTooCoarse { change: f64, passes: usize },
    #[error("envelope steps must be nondecreasing and within [0, 1)")]
    BadEnvelope,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn check_unit(t: f64, value: f64) -> Result<f64, CoeffError> {
    if !(0.0..1.0).contains(&value) {
        return Err(CoeffError::EvaluatesOutsideUnit { t, value });
    }
    if value >= NEAR_ONE_WARNING {
        log::warn!("coefficient {value} at t = {t} is within 1e-12 of 1");
    }
    Ok(value)
}

/// Step function on `(0, inf)`: `values[0]` on `(0, t1)`, `values[i]` on
/// `[t_i, t_{i+1})`, last value on `[t_k, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Piecewise {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, CoeffError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(CoeffError::BadPieceCount);
        }
        let increasing = breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !increasing || breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(CoeffError::BadBreakpoints);
        }
        for (i, &v) in values.iter().enumerate() {
            let at = if i == 0 { 0.0 } else { breakpoints[i - 1] };
            check_unit(at, v)?;
        }
        Ok(Piecewise {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, t: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|b| *b <= t)]
    }
}

/// Geometric sample grid on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl SampleGrid {
    pub const DEFAULT_POINTS: usize = 2048;
    pub const DEFAULT_T_MIN: f64 = 1e-8;

    /// Default grid for a domain of diameter bound `d`: `[1e-8, 4 d]`.
    pub fn for_diameter(d: f64) -> Self {
        SampleGrid {
            t_min: Self::DEFAULT_T_MIN,
            t_max: (4.0 * d).max(Self::DEFAULT_T_MIN * 2.0),
            points: Self::DEFAULT_POINTS,
        }
    }

    pub fn validate(&self) -> Result<(), CoeffError> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(CoeffError::BadGrid(format!(
                "need 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.points < 2 {
            return Err(CoeffError::BadGrid("need at least 2 points".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        geometric(self.t_min, self.t_max, self.points)
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    out[n - 1] = hi;
    out
}

/// Refinement settings for the expression envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub max_passes: usize,
    /// Points inserted between the neighbours of each candidate minimum.
    pub points_per_bracket: usize,
    /// A pass that moves the envelope by at most this much ends refinement.
    pub tolerance: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            max_passes: 8,
            points_per_bracket: 16,
            tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExprCoefficient {
    pub expr: Expr,
    pub grid: SampleGrid,
    pub refinement: Refinement,
}

impl ExprCoefficient {
    pub fn new(expr: Expr, grid: SampleGrid) -> Self {
        ExprCoefficient {
            expr,
            grid,
            refinement: Refinement::default(),
        }
    }
}

/// `alpha(t)` for one map.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFunction {
    Constant(f64),
    Piecewise(Piecewise),
    Expr(ExprCoefficient),
}

impl CoefficientFunction {
    pub fn constant(c: f64) -> Result<Self, CoeffError> {
        check_unit(0.0, c)?;
        Ok(CoefficientFunction::Constant(c))
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, CoeffError> {
        Ok(CoefficientFunction::Piecewise(Piecewise::new(
            breakpoints,
            values,
        )?))
    }

    /// Builds an expression coefficient and samples it once so that values
    /// outside `[0, 1)` on the grid are rejected up front.
    pub fn expression(expr: Expr, grid: SampleGrid) -> Result<Self, CoeffError> {
        grid.validate()?;
        let f = CoefficientFunction::Expr(ExprCoefficient::new(expr, grid));
        f.envelope()?;
        Ok(f)
    }

    /// `alpha(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64, CoeffError> {
        if !(t > 0.0) {
            return Err(CoeffError::NonPositiveArgument(t));
        }
        match self {
            CoefficientFunction::Constant(c) => Ok(*c),
            CoefficientFunction::Piecewise(p) => Ok(p.eval(t)),
            CoefficientFunction::Expr(e) => check_unit(t, e.expr.eval(&TBinding(t))?),
        }
    }

    pub fn envelope(&self) -> Result<EnvelopeFunction, CoeffError> {
        match self {
            CoefficientFunction::Constant(c) => Ok(EnvelopeFunction::constant(*c)),
            CoefficientFunction::Piecewise(p) => {
                let mut values = p.values.clone();
                for i in (0..values.len() - 1).rev() {
                    values[i] = values[i].min(values[i + 1]);
                }
                Ok(EnvelopeFunction {
                    knots: p.breakpoints.clone(),
                    values,
                })
            }
            CoefficientFunction::Expr(e) => sampled_envelope(e),
        }
    }

    /// `inf_{t > 0} alpha(t)`.
    pub fn global_infimum(&self) -> Result<f64, CoeffError> {
        Ok(self.envelope()?.value_at_zero())
    }
}

/// Free-function form of [`CoefficientFunction::eval`].
pub fn eval_alpha(f: &CoefficientFunction, t: f64) -> Result<f64, CoeffError> {
    f.eval(t)
}

pub fn envelope(f: &CoefficientFunction) -> Result<EnvelopeFunction, CoeffError> {
    f.envelope()
}

pub fn global_infimum(f: &CoefficientFunction) -> Result<f64, CoeffError> {
    f.global_infimum()
}

/// Monotone nondecreasing step function on `[0, inf)`.
///
/// `values[0]` holds on `[0, knots[0])`, `values[i]` on
/// `[knots[i-1], knots[i])`, and the last value from the last knot onward.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl EnvelopeFunction {
    pub fn constant(c: f64) -> Self {
        EnvelopeFunction {
            knots: Vec::new(),
            values: vec![c],
        }
    }

    /// Builds an envelope from explicit steps, checking monotonicity.
    pub fn from_steps(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, CoeffError> {
        if values.len() != knots.len() + 1 {
            return Err(CoeffError::BadPieceCount);
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) || knots.iter().any(|k| !(*k > 0.0)) {
            return Err(CoeffError::BadBreakpoints);
        }
        let unit = values.iter().all(|v| (0.0..1.0).contains(v));
        if !unit || !values.windows(2).all(|w| w[0] <= w[1]) {
            return Err(CoeffError::BadEnvelope);
        }
        Ok(EnvelopeFunction { knots, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.knots.partition_point(|k| *k <= t)]
    }

    pub fn value_at_zero(&self) -> f64 {
        self.values[0]
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }
}

fn sample(e: &ExprCoefficient, ts: &[f64]) -> Result<Vec<(f64, f64)>, CoeffError> {
    ts.iter()
        .map(|&t| Ok((t, check_unit(t, e.expr.eval(&TBinding(t))?)?)))
        .collect()
}

/// Suffix minima over samples `(t_i, v_i)`, as step values on the sample knots.
fn suffix_steps(samples: &[(f64, f64)]) -> Vec<f64> {
    let n = samples.len();
    // steps[0]: t < t_0; steps[i+1]: t in [t_i, t_{i+1}); steps[n]: t >= t_{n-1}
    let mut steps = vec![0.0; n + 1];
    steps[n] = samples[n - 1].1;
    let mut running = f64::INFINITY;
    for i in (0..n).rev() {
        if i + 1 < n {
            steps[i + 1] = running;
        }
        running = running.min(samples[i].1);
    }
    steps[0] = running;
    steps
}

fn envelope_at(knots: &[f64], steps: &[f64], t: f64) -> f64 {
    steps[knots.partition_point(|k| *k <= t)]
}

/// Hard cap on samples accumulated by refinement.
const MAX_REFINED_SAMPLES: usize = 1 << 20;

fn sampled_envelope(e: &ExprCoefficient) -> Result<EnvelopeFunction, CoeffError> {
    e.grid.validate()?;
    let coarse = e.grid.points();
    let mut samples = sample(e, &coarse)?;
    let mut knots: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut steps = suffix_steps(&samples);

    let probe = |knots: &[f64], steps: &[f64]| -> Vec<f64> {
        std::iter::once(steps[0])
            .chain(coarse.iter().map(|&t| envelope_at(knots, steps, t)))
            .collect()
    };
    let mut before = probe(&knots, &steps);
    let mut change = f64::INFINITY;
    let mut passes = 0;
    while passes < e.refinement.max_passes {
        passes += 1;
        // candidates: local minima of the samples that are also the running
        // minimum from the right; only these can hide a deeper dip
        let n = samples.len();
        let mut extra = Vec::new();
        let mut running = f64::INFINITY;
        for i in (0..n).rev() {
            let v = samples[i].1;
            let left_ok = i == 0 || samples[i - 1].1 >= v;
            let right_ok = i + 1 == n || samples[i + 1].1 >= v;
            if v <= running && left_ok && right_ok {
                let lo = if i == 0 {
                    samples[0].0 * 0.5
                } else {
                    samples[i - 1].0
                };
                let hi = if i + 1 == n {
                    samples[i].0
                } else {
                    samples[i + 1].0
                };
                let k = e.refinement.points_per_bracket;
                for j in 1..=k {
                    let t = lo + (hi - lo) * j as f64 / (k + 1) as f64;
                    if t > 0.0 && t != samples[i].0 {
                        extra.push(t);
                    }
                }
            }
            running = running.min(v);
        }
        if samples.len() + extra.len() > MAX_REFINED_SAMPLES {
            break;
        }
        let mut added = sample(e, &extra)?;
        samples.append(&mut added);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        knots = samples.iter().map(|s| s.0).collect();
        steps = suffix_steps(&samples);
        let after = probe(&knots, &steps);
        change = before
            .iter()
            .zip(&after)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        before = after;
        if change <= e.refinement.tolerance {
            break;
        }
    }
    if change > e.refinement.tolerance {
        return Err(CoeffError::GridTooCoarse { change, passes });
    }
    Ok(EnvelopeFunction {
        knots,
        values: steps,
    })
}
