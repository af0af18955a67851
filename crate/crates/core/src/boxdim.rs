//! Box-counting dimension of point clouds.
//!
//! Cells are anchored at the domain's lower corner, not at the data
//! minimum, so counts do not move when points are added.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::attractor::PointCloud;
use crate::format::sig17;
use crate::ifs::MetricDomain;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxDimError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("scales must be positive and strictly decreasing")]
    BadScales,
    #[error("scale {0:e} is below 1e-12 of the diameter bound")]
    ScaleTooSmall(f64),
    #[error("fit window needs at least 3 scales, got {0}")]
    TooFewScales(usize),
    #[error("all counts in the fit window are equal")]
    DegenerateFit,
    #[error("point has dimension {found}, domain has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Inclusive index range into the scale list.
    pub window_lo: usize,
    pub window_hi: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountSeries {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub fit: Option<Fit>,
}

impl BoxCountSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,count\n");
        for (e, n) in self.scales.iter().zip(&self.counts) {
            out.push_str(&format!("{},{n}\n", sig17(*e)));
        }
        out
    }
}

/// `base * ratio^k` for `k = k_min..=k_max`.
pub fn scale_ladder(base: f64, ratio: f64, k_min: i32, k_max: i32) -> Vec<f64> {
    (k_min..=k_max).map(|k| base * ratio.powi(k)).collect()
}

/// Default ladder: `D * 2^-k`, `k = 2..=9`.
pub fn default_scales(dom: &MetricDomain) -> Vec<f64> {
    scale_ladder(dom.diameter_bound(), 0.5, 2, 9)
}

pub fn box_counts(
    cloud: &PointCloud,
    dom: &MetricDomain,
    scales: &[f64],
) -> Result<BoxCountSeries, BoxDimError> {
    if cloud.is_empty() {
        return Err(BoxDimError::EmptyCloud);
    }
    if let Some(p) = cloud.points.iter().find(|p| p.len() != dom.dim()) {
        return Err(BoxDimError::DimensionMismatch {
            expected: dom.dim(),
            found: p.len(),
        });
    }
    let decreasing = scales.windows(2).all(|w| w[0] > w[1]);
    if scales.is_empty() || !decreasing || !scales.iter().all(|e| e.is_finite() && *e > 0.0) {
        return Err(BoxDimError::BadScales);
    }
    let floor = 1e-12 * dom.diameter_bound();
    if let Some(e) = scales.iter().find(|e| **e < floor) {
        return Err(BoxDimError::ScaleTooSmall(*e));
    }
    let lo = dom.lo();
    let counts = scales
        .par_iter()
        .map(|&eps| {
            let cells: HashSet<Vec<i64>> = cloud
                .points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(lo)
                        .map(|(x, l)| ((x - l) / eps).floor() as i64)
                        .collect()
                })
                .collect();
            cells.len() as u64
        })
        .collect();
    Ok(BoxCountSeries {
        scales: scales.to_vec(),
        counts,
        fit: None,
    })
}

/// Least-squares fit of `ln N` against `ln(1/eps)` over `window` (inclusive
/// index range). The default window drops the largest and smallest scale.
pub fn fit_dimension(
    mut series: BoxCountSeries,
    window: Option<(usize, usize)>,
) -> Result<BoxCountSeries, BoxDimError> {
    let n = series.scales.len();
    let (lo, hi) = match window {
        Some(w) => w,
        None if n >= 2 => (1, n - 2),
        None => return Err(BoxDimError::TooFewScales(n)),
    };
    if hi < lo || hi >= n || hi - lo + 1 < 3 {
        return Err(BoxDimError::TooFewScales(if hi >= lo {
            (hi - lo + 1).min(n)
        } else {
            0
        }));
    }
    let counts = &series.counts[lo..=hi];
    if counts.iter().all(|c| *c == counts[0]) {
        return Err(BoxDimError::DegenerateFit);
    }
    let xs: Vec<f64> = series.scales[lo..=hi]
        .iter()
        .map(|e| (1.0 / e).ln())
        .collect();
    let ys: Vec<f64> = counts.iter().map(|c| (*c as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = 1.0 - ss_res / syy;
    series.fit = Some(Fit {
        slope,
        intercept,
        r2,
        window_lo: lo,
        window_hi: hi,
    });
    Ok(series)
}
