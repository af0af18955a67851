use crate::coeff::CoefficientFunction;
use crate::scene::expr::{CoordBindings, Expr};

use super::{IfsError, MetricDomain, Point};

/// The point map `f_j`.
#[derive(Debug, Clone, PartialEq)]
pub enum PointMap {
    /// `x -> ratio * R(angle) x + translation`; `angle` only in 2-D.
    Similarity {
        ratio: f64,
        angle: f64,
        translation: Vec<f64>,
    },
    /// `x -> A x + b`, `matrix` row-major.
    Affine {
        matrix: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    /// One expression per output coordinate over `x1..xd`.
    Expr(Vec<Expr>),
}

impl PointMap {
    pub fn similarity(ratio: f64, translation: Vec<f64>) -> Self {
        PointMap::Similarity {
            ratio,
            angle: 0.0,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PointMap::Similarity { translation, .. } | PointMap::Affine { translation, .. } => {
                translation.len()
            }
            PointMap::Expr(c) => c.len(),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<(), IfsError> {
        let mismatch = |found| IfsError::DimensionMismatch { expected: d, found };
        match self {
            PointMap::Similarity {
                ratio,
                angle,
                translation,
            } => {
                if translation.len() != d {
                    return Err(mismatch(translation.len()));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(IfsError::InvalidMap(format!(
                        "similarity ratio must be in (0, 1), got {ratio}"
                    )));
                }
                if *angle != 0.0 && d != 2 {
                    return Err(IfsError::InvalidMap(
                        "rotation angle is only supported in dimension 2".into(),
                    ));
                }
            }
            PointMap::Affine {
                matrix,
                translation,
            } => {
                if translation.len() != d {
                    return Err(mismatch(translation.len()));
                }
                if matrix.len() != d {
                    return Err(mismatch(matrix.len()));
                }
                if let Some(row) = matrix.iter().find(|r| r.len() != d) {
                    return Err(mismatch(row.len()));
                }
            }
            PointMap::Expr(c) => {
                if c.len() != d {
                    return Err(mismatch(c.len()));
                }
            }
        }
        Ok(())
    }

    fn linear(&self, v: &[f64]) -> Option<Vec<f64>> {
        match self {
            PointMap::Similarity { ratio, angle, .. } => {
                if *angle != 0.0 && v.len() == 2 {
                    let (s, c) = angle.sin_cos();
                    Some(vec![
                        ratio * (c * v[0] - s * v[1]),
                        ratio * (s * v[0] + c * v[1]),
                    ])
                } else {
                    Some(v.iter().map(|x| ratio * x).collect())
                }
            }
            PointMap::Affine { matrix, .. } => Some(
                matrix
                    .iter()
                    .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
                    .collect(),
            ),
            PointMap::Expr(_) => None,
        }
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>, IfsError> {
        let out = match self {
            PointMap::Similarity { translation, .. } | PointMap::Affine { translation, .. } => {
                let mut v = self.linear(p).unwrap_or_default();
                v.iter_mut().zip(translation).for_each(|(x, b)| *x += b);
                v
            }
            PointMap::Expr(components) => {
                let b = CoordBindings(p);
                components
                    .iter()
                    .map(|e| e.eval(&b))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(IfsError::NonFinite);
        }
        Ok(out)
    }

    /// `f(x) - f(y)`. For affine kinds this is the linear part applied to
    /// `x - y`, which avoids cancellation against the translation.
    pub fn image_difference(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, IfsError> {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        match self.linear(&diff) {
            Some(v) => Ok(v),
            None => {
                let fx = self.apply(x)?;
                let fy = self.apply(y)?;
                Ok(fx.iter().zip(&fy).map(|(a, b)| a - b).collect())
            }
        }
    }
}

/// A point map together with its contraction coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakContraction {
    pub map: PointMap,
    pub coefficient: CoefficientFunction,
}

impl WeakContraction {
    pub fn new(map: PointMap, coefficient: CoefficientFunction) -> Self {
        WeakContraction { map, coefficient }
    }

    pub fn apply(&self, p: &Point) -> Result<Point, IfsError> {
        Ok(Point(self.map.apply(&p.0)?))
    }
}

pub fn apply_map(w: &WeakContraction, p: &Point) -> Result<Point, IfsError> {
    w.apply(p)
}

/// Iterates `p <- f(p)` from `start` and, in lockstep, from the box corner
/// farthest from `start`. Converges once the step is at most `tol` and the
/// two orbits are within `tol` of each other; a map with more than one fixed
/// point (such as the identity) never converges.
pub fn fixed_point(
    w: &WeakContraction,
    dom: &MetricDomain,
    start: &Point,
    tol: f64,
    max_iter: usize,
) -> Result<Point, IfsError> {
    if start.dim() != dom.dim() {
        return Err(IfsError::DimensionMismatch {
            expected: dom.dim(),
            found: start.dim(),
        });
    }
    let metric = dom.metric();
    let mut p = start.0.clone();
    let mut q = dom.far_corner(&p);
    for _ in 0..max_iter {
        let fp = w.map.apply(&p)?;
        let step = metric.distance(&p, &fp);
        p = fp;
        q = w.map.apply(&q)?;
        if step <= tol && metric.distance(&p, &q) <= tol {
            return Ok(Point(p));
        }
    }
    Err(IfsError::NoConvergence(max_iter))
}
