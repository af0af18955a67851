//! Finite approximations of the attractor: chaos-game point clouds and
//! grid-cell iteration of the set map `A -> union_j f_j(A)`.

use std::collections::BTreeSet;

use rand::RngExt;
use rayon::prelude::*;
use thiserror::Error;

use crate::format::sig17;
use crate::ifs::{fixed_point, IFSystem, IfsError, MetricDomain, Point};
use crate::rng;

/// Clouds must stay inside the box inflated by this fraction of `D`.
pub const BOX_MARGIN: f64 = 1e-6;
/// Largest number of cells `iterate_sets` will allocate.
pub const MAX_CELLS: f64 = 1e8;
/// Clouds up to this size get an exact diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttractorError {
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error("grid of {0:.3e} cells exceeds the limit of 1e8")]
    GridTooLarge(f64),
    #[error("set is empty")]
    EmptySet,
    #[error("point {0:?} left the domain box")]
    OutsideDomain(Vec<f64>),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("malformed point CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub burn_in: usize,
}

impl PointCloud {
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Self {
        PointCloud {
            dim,
            points,
            seed: 0,
            burn_in: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x1,...,xd`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = (1..=self.dim)
            .map(|i| format!("x{i}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| sig17(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, AttractorError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(AttractorError::Csv {
            line: 1,
            message: "missing header".into(),
        })?;
        let dim = header.split(',').count();
        for (i, name) in header.split(',').enumerate() {
            if name.trim() != format!("x{}", i + 1) {
                return Err(AttractorError::Csv {
                    line: 1,
                    message: format!("expected column x{}, found `{}`", i + 1, name.trim()),
                });
            }
        }
        let mut points = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| AttractorError::Csv {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if row.len() != dim {
                return Err(AttractorError::Csv {
                    line: i + 1,
                    message: format!("expected {dim} values, found {}", row.len()),
                });
            }
            points.push(row);
        }
        Ok(PointCloud::from_points(dim, points))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosGameOptions {
    pub n_points: usize,
    pub seed: u64,
    pub burn_in: usize,
    /// Map selection weights; uniform when `None`.
    pub weights: Option<Vec<f64>>,
}

impl ChaosGameOptions {
    pub fn new(n_points: usize, seed: u64) -> Self {
        ChaosGameOptions {
            n_points,
            seed,
            burn_in: 100,
            weights: None,
        }
    }
}

/// Orbit of a random composition of the maps, started at the fixed point
/// of the first map (a point of the attractor). The first `burn_in`
/// orbit points are dropped.
pub fn chaos_game(sys: &IFSystem, opts: &ChaosGameOptions) -> Result<PointCloud, AttractorError> {
    if opts.n_points == 0 {
        return Err(AttractorError::InvalidArgument(
            "n_points must be at least 1".into(),
        ));
    }
    let dom = sys.domain();
    let m = sys.len();
    let cumulative = match &opts.weights {
        None => None,
        Some(w) => {
            if w.len() != m || w.iter().any(|x| !(*x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(AttractorError::InvalidArgument(
                    "need one nonnegative weight per map with positive sum".into(),
                ));
            }
            let total: f64 = w.iter().sum();
            let mut acc = 0.0;
            Some(
                w.iter()
                    .map(|x| {
                        acc += x / total;
                        acc
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    let d = dom.diameter_bound();
    let start = fixed_point(
        &sys.maps()[0],
        dom,
        &Point::new(dom.lo().to_vec()),
        1e-13 * d,
        100_000,
    )?;
    let mut r = rng::seeded(opts.seed);
    let mut p = start.0;
    let mut points = Vec::with_capacity(opts.n_points);
    let margin = BOX_MARGIN * d;
    for i in 0..opts.burn_in + opts.n_points {
        if i >= opts.burn_in {
            if !dom.contains(&p, margin) {
                return Err(AttractorError::OutsideDomain(p));
            }
            points.push(p.clone());
        }
        let j = match &cumulative {
            None => r.random_range(0..m),
            Some(c) => {
                let u: f64 = r.random();
                c.iter().position(|x| u < *x).unwrap_or(m - 1)
            }
        };
        p = sys.maps()[j].map.apply(&p)?;
    }
    Ok(PointCloud {
        dim: dom.dim(),
        points,
        seed: opts.seed,
        burn_in: opts.burn_in,
    })
}

/// Occupied cells of a regular grid of side `h` anchored at the box corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    pub h: f64,
    pub origin: Vec<f64>,
    pub cells: BTreeSet<Vec<i64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl CellSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        self.cells.iter().map(|c| self.center(c)).collect()
    }

    fn center(&self, c: &[i64]) -> Vec<f64> {
        c.iter()
            .zip(&self.origin)
            .map(|(i, o)| o + (*i as f64 + 0.5) * self.h)
            .collect()
    }
}

fn cell_of(p: &[f64], origin: &[f64], h: f64) -> Vec<i64> {
    p.iter()
        .zip(origin)
        .map(|(x, o)| ((x - o) / h).floor() as i64)
        .collect()
}

/// Grid version of the set iteration: start from every cell of the box and
/// repeatedly replace the set by the cells hit by the images of its cell
/// centres. Stops when the set is unchanged, when successive sets are within
/// `stop_tol` in Hausdorff distance, or after `max_iter` steps.
///
/// Mapping centres only is an approximation, not a guaranteed superset.
pub fn iterate_sets(
    sys: &IFSystem,
    h: f64,
    max_iter: usize,
    stop_tol: f64,
) -> Result<CellSet, AttractorError> {
    if !(h > 0.0) {
        return Err(AttractorError::InvalidArgument("h must be positive".into()));
    }
    let dom = sys.domain();
    let per_axis: Vec<i64> = dom
        .lo()
        .iter()
        .zip(dom.hi())
        .map(|(l, hi)| ((hi - l) / h).ceil().max(1.0) as i64)
        .collect();
    let total: f64 = per_axis.iter().map(|n| *n as f64).product();
    if total > MAX_CELLS {
        return Err(AttractorError::GridTooLarge(total));
    }
    let mut cells = BTreeSet::new();
    let mut idx = vec![0i64; per_axis.len()];
    'fill: loop {
        cells.insert(idx.clone());
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < per_axis[k] {
                continue 'fill;
            }
            idx[k] = 0;
        }
        break;
    }
    let mut set = CellSet {
        h,
        origin: dom.lo().to_vec(),
        cells,
        iterations: 0,
        converged: false,
    };
    while set.iterations < max_iter {
        let centers = set.centers();
        let images: Vec<Vec<Vec<i64>>> = centers
            .par_iter()
            .map(|c| {
                sys.maps()
                    .iter()
                    .map(|w| Ok(cell_of(&w.map.apply(c)?, &set.origin, h)))
                    .collect::<Result<Vec<_>, IfsError>>()
            })
            .collect::<Result<_, _>>()?;
        let next: BTreeSet<Vec<i64>> = images.into_iter().flatten().collect();
        let next = CellSet {
            cells: next,
            iterations: set.iterations + 1,
            ..set.clone()
        };
        let unchanged = next.cells == set.cells;
        let close = !unchanged
            && stop_tol > 0.0
            && hausdorff_distance(&set.centers(), &next.centers(), dom)? <= stop_tol;
        set = next;
        if unchanged || close {
            set.converged = true;
            break;
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterEstimate {
    pub value: f64,
    pub approximate: bool,
}

/// Largest pairwise distance in the cloud, capped at the box diameter.
///
/// Exact for clouds of at most 20 000 points. Larger clouds use the exact
/// diameter of an evenly strided subsample, then alternate farthest-point
/// sweeps over the whole cloud from the best pair found.
pub fn diameter_estimate(
    cloud: &PointCloud,
    dom: &MetricDomain,
) -> Result<DiameterEstimate, AttractorError> {
    if cloud.is_empty() {
        return Err(AttractorError::EmptySet);
    }
    let metric = dom.metric();
    let pts = &cloud.points;
    let exact_pairs = |set: &[&Vec<f64>]| -> (f64, usize, usize) {
        (0..set.len())
            .into_par_iter()
            .map(|i| {
                let mut best = (0.0, i, i);
                for j in i + 1..set.len() {
                    let d = metric.distance(set[i], set[j]);
                    if d > best.0 {
                        best = (d, i, j);
                    }
                }
                best
            })
            .reduce(
                || (0.0, 0, 0),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                        b
                    } else {
                        a
                    }
                },
            )
    };
    let cap = dom.box_diameter();
    if pts.len() <= EXACT_DIAMETER_LIMIT {
        let refs: Vec<&Vec<f64>> = pts.iter().collect();
        let (d, _, _) = exact_pairs(&refs);
        return Ok(DiameterEstimate {
            value: d.min(cap),
            approximate: false,
        });
    }
    let stride = pts.len().div_ceil(EXACT_DIAMETER_LIMIT);
    let sub: Vec<&Vec<f64>> = pts.iter().step_by(stride).collect();
    let (mut best, i, _) = exact_pairs(&sub);
    let mut anchor = sub[i].clone();
    for _ in 0..4 {
        let (d, far) = pts
            .iter()
            .map(|p| metric.distance(&anchor, p))
            .enumerate()
            .fold((0.0, 0), |acc, (k, d)| if d > acc.0 { (d, k) } else { acc });
        if d <= best && far != 0 {
            best = best.max(d);
            break;
        }
        best = best.max(d);
        anchor = pts[far].clone();
    }
    Ok(DiameterEstimate {
        value: best.min(cap),
        approximate: true,
    })
}

fn directed(a: &[Vec<f64>], b: &[Vec<f64>], dom: &MetricDomain) -> f64 {
    let metric = dom.metric();
    a.par_iter()
        .map(|p| {
            b.iter()
                .map(|q| metric.distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    dom: &MetricDomain,
) -> Result<f64, AttractorError> {
    if a.is_empty() || b.is_empty() {
        return Err(AttractorError::EmptySet);
    }
    for p in a.iter().chain(b) {
        if p.len() != dom.dim() {
            return Err(IfsError::DimensionMismatch {
                expected: dom.dim(),
                found: p.len(),
            }
            .into());
        }
    }
    Ok(directed(a, b, dom).max(directed(b, a, dom)))
}

/// `union_j f_j(A)` for a finite set `A`.
pub fn apply_union(sys: &IFSystem, a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, AttractorError> {
    let mut out = Vec::with_capacity(a.len() * sys.len());
    for w in sys.maps() {
        for p in a {
            out.push(w.map.apply(p)?);
        }
    }
    Ok(out)
}
