//! Root of the generalized Moran equation `sum_j c_j^x = 1` and the
//! distance-dependent curve `x(t)` built from envelopes.
//!
//! Zero coefficients never contribute (`0^x = 0` for every `x >= 0`,
//! including `x = 0`). When every coefficient is zero the root is defined
//! as 0. With a single positive coefficient the unique root is also 0.

use rayon::prelude::*;
use thiserror::Error;

use crate::coeff::EnvelopeFunction;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Coefficients at or below this are treated as exactly zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-15;

const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoranError {
    #[error("coefficient {index} = {value} is outside [0, 1)")]
    InvalidCoefficient { index: usize, value: f64 },
    #[error("need at least 2 coefficients, got {0}")]
    TooFewCoefficients(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("bracket [{lo}, {hi}] does not contain the root")]
    BadBracket { lo: f64, hi: f64 },
    #[error("t grid must be nonempty, positive and strictly increasing")]
    BadGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoranProblem {
    coefficients: Vec<f64>,
    tolerance: f64,
    zero_threshold: f64,
}

impl MoranProblem {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, MoranError> {
        if coefficients.len() < 2 {
            return Err(MoranError::TooFewCoefficients(coefficients.len()));
        }
        for (index, &value) in coefficients.iter().enumerate() {
            if !(0.0..1.0).contains(&value) {
                return Err(MoranError::InvalidCoefficient { index, value });
            }
        }
        Ok(MoranProblem {
            coefficients,
            tolerance: DEFAULT_TOLERANCE,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self, MoranError> {
        if !(tolerance > 0.0) {
            return Err(MoranError::BadTolerance(tolerance));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn with_zero_threshold(mut self, threshold: f64) -> Self {
        self.zero_threshold = threshold.max(0.0);
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// The active coefficients `{c_j : c_j > threshold}`.
    pub fn active(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .copied()
            .filter(|c| *c > self.zero_threshold)
            .collect()
    }

    pub fn solve(&self) -> f64 {
        let active = self.active();
        if active.len() <= 1 {
            return 0.0;
        }
        let g = |x: f64| moran_sum(&active, x);
        let mut hi = 1.0;
        while g(hi) >= 1.0 {
            hi *= 2.0;
        }
        bisect(&active, 0.0, hi, self.tolerance)
    }
}

/// `sum c^x` over the given (already filtered) coefficients.
pub fn moran_sum(active: &[f64], x: f64) -> f64 {
    active.iter().map(|c| c.powf(x)).sum()
}

fn bisect(active: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let g = moran_sum(active, mid);
        if g == 1.0 {
            return mid;
        }
        if hi - lo <= tol && (g - 1.0).abs() <= tol {
            return mid;
        }
        if mid <= lo || mid >= hi {
            return mid;
        }
        if g > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on a caller-supplied bracket `[lo, hi]`, which must satisfy
/// `g(lo) >= 1 >= g(hi)` over the active coefficients.
pub fn bisect_in(p: &MoranProblem, lo: f64, hi: f64) -> Result<f64, MoranError> {
    let active = p.active();
    if active.len() <= 1 {
        return Ok(0.0);
    }
    if !(lo >= 0.0 && lo <= hi && moran_sum(&active, lo) >= 1.0 && moran_sum(&active, hi) <= 1.0) {
        return Err(MoranError::BadBracket { lo, hi });
    }
    Ok(bisect(&active, lo, hi, p.tolerance))
}

pub fn solve_moran(p: &MoranProblem) -> f64 {
    p.solve()
}

/// Convenience wrapper with default tolerance.
pub fn solve_coefficients(coefficients: &[f64]) -> Result<f64, MoranError> {
    Ok(MoranProblem::new(coefficients.to_vec())?.solve())
}

/// Samples of `x(t)` with `x_at_zero = x(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionCurve {
    pub samples: Vec<(f64, f64)>,
    pub x_at_zero: f64,
}

impl DimensionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for (t, x) in &self.samples {
            out.push_str(&crate::format::sig17(*t));
            out.push(',');
            out.push_str(&crate::format::sig17(*x));
            out.push('\n');
        }
        out
    }
}

/// Solves the Moran equation with coefficients `envelope_j(t)` at each grid
/// point.
pub fn x_curve(
    envelopes: &[EnvelopeFunction],
    t_grid: &[f64],
    tolerance: f64,
) -> Result<DimensionCurve, MoranError> {
    if envelopes.len() < 2 {
        return Err(MoranError::TooFewCoefficients(envelopes.len()));
    }
    let ordered = t_grid.windows(2).all(|w| w[0] < w[1]);
    if t_grid.is_empty() || !ordered || t_grid[0] < 0.0 {
        return Err(MoranError::BadGrid);
    }
    let solve_at = |coeffs: Vec<f64>| -> Result<f64, MoranError> {
        Ok(MoranProblem::new(coeffs)?
            .with_tolerance(tolerance)?
            .solve())
    };
    let x_at_zero = solve_at(envelopes.iter().map(|e| e.value_at_zero()).collect())?;
    let xs: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| solve_at(envelopes.iter().map(|e| e.eval(t)).collect()))
        .collect::<Result<_, _>>()?;
    // running max removes bisection round-off between nearly equal neighbours
    let mut running = x_at_zero;
    let samples = t_grid
        .iter()
        .zip(xs)
        .map(|(&t, x)| {
            running = running.max(x);
            (t, running)
        })
        .collect();
    Ok(DimensionCurve { samples, x_at_zero })
}
