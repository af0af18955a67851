use std::fmt;
use std::str::FromStr;

use super::IfsError;

/// A point in the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    Chebyshev,
    Manhattan,
}

impl Metric {
    /// Norm of a difference vector.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Metric::Chebyshev => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Metric::Manhattan => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Chebyshev => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
            Metric::Manhattan => "manhattan",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "chebyshev" => Ok(Metric::Chebyshev),
            "manhattan" => Ok(Metric::Manhattan),
            _ => Err(format!("unknown metric `{s}`")),
        }
    }
}

/// Axis-aligned box with a metric and a diameter bound `D >= dia S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDomain {
    metric: Metric,
    lo: Vec<f64>,
    hi: Vec<f64>,
    diameter_bound: f64,
}

impl MetricDomain {
    /// Domain whose diameter bound is the box diameter.
    pub fn new(metric: Metric, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, IfsError> {
        let d = metric.distance(&lo, &hi);
        Self::with_diameter(metric, lo, hi, d)
    }

    pub fn with_diameter(
        metric: Metric,
        lo: Vec<f64>,
        hi: Vec<f64>,
        diameter_bound: f64,
    ) -> Result<Self, IfsError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(IfsError::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let ok = lo
            .iter()
            .zip(&hi)
            .all(|(l, h)| l.is_finite() && h.is_finite() && l < h);
        if !ok {
            return Err(IfsError::InvalidDomain(
                "need lo < hi in every coordinate".into(),
            ));
        }
        if !(diameter_bound > 0.0 && diameter_bound.is_finite()) {
            return Err(IfsError::InvalidDomain(format!(
                "diameter bound must be positive, got {diameter_bound}"
            )));
        }
        Ok(MetricDomain {
            metric,
            lo,
            hi,
            diameter_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn box_diameter(&self) -> f64 {
        self.metric.distance(&self.lo, &self.hi)
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64, IfsError> {
        for p in [a, b] {
            if p.dim() != self.dim() {
                return Err(IfsError::DimensionMismatch {
                    expected: self.dim(),
                    found: p.dim(),
                });
            }
        }
        Ok(self.metric.distance(&a.0, &b.0))
    }

    /// Whether `p` lies in the box inflated by `margin` on every side.
    pub fn contains(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *x >= l - margin && *x <= h + margin)
    }

    /// Corner of the box farthest from `p`.
    pub fn far_corner(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (l, h))| {
                if (x - l).abs() >= (h - x).abs() {
                    *l
                } else {
                    *h
                }
            })
            .collect()
    }
}

/// Free-function form of [`MetricDomain::distance`].
pub fn distance(dom: &MetricDomain, a: &Point, b: &Point) -> Result<f64, IfsError> {
    dom.distance(a, b)
}
