//! The `verify` pipeline and its JSON report.
//!
//! Every number goes through [`json_number`], keys are sorted, and no
//! timing or host data is recorded, so equal inputs give byte-identical
//! reports regardless of thread count.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attractor::{self, AttractorError, ChaosGameOptions, DiameterEstimate, PointCloud};
use crate::boxdim::{self, BoxCountSeries};
use crate::coeff::{geometric, CoeffError, EnvelopeFunction};
use crate::cover::{self, CoverError, CoverRow};
use crate::format::json_number;
use crate::ifs::{validate_weak_contraction, IfsError, ValidationOptions, ValidationReport};
use crate::moran::{self, DimensionCurve, MoranError, MoranProblem};
use crate::scene::SceneConfig;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Moran(#[from] MoranError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error(transparent)]
    Attractor(#[from] AttractorError),
}

/// `x0` and the curve `x(t)` of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary {
    pub envelopes: Vec<EnvelopeFunction>,
    pub infima: Vec<f64>,
    pub x0: f64,
    pub curve: DimensionCurve,
}

/// `t` grid for the reported curve: `n` geometric points on `[1e-6 D, D]`.
pub fn curve_grid(d: f64, n: usize) -> Vec<f64> {
    geometric(1e-6 * d, d, n.max(2))
}

pub fn bound_summary(scene: &SceneConfig, t_grid: &[f64]) -> Result<BoundSummary, ReportError> {
    let envelopes = scene.system.envelopes()?;
    let infima: Vec<f64> = envelopes.iter().map(|e| e.value_at_zero()).collect();
    let tol = scene.options.tolerance();
    let x0 = MoranProblem::new(infima.clone())?
        .with_tolerance(tol)?
        .solve();
    let curve = moran::x_curve(&envelopes, t_grid, tol)?;
    Ok(BoundSummary {
        envelopes,
        infima,
        x0,
        curve,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdicts {
    /// Every map passed the sampled contraction check.
    pub validator_pass: bool,
    /// Fitted box dimension is at most `x0 + bound_tol`; `None` when no fit
    /// was possible.
    pub bound_consistent: Option<bool>,
    /// The estimated attractor diameter is at most `D`.
    pub diameter_within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub scene_sha256: String,
    pub canonical_scene: String,
    pub bound: BoundSummary,
    pub diameter_bound: f64,
    pub x_at_d: f64,
    pub k: Result<f64, String>,
    pub validations: Vec<ValidationReport>,
    pub cloud_len: usize,
    pub diameter: DiameterEstimate,
    pub box_counts: BoxCountSeries,
    pub box_fit_error: Option<String>,
    pub cover: Result<(usize, Vec<CoverRow>), String>,
    pub verdicts: Verdicts,
    names: Vec<String>,
    settings: Settings,
}

#[derive(Debug, Clone, PartialEq)]
struct Settings {
    seed: u64,
    points: usize,
    burn_in: usize,
    pairs: usize,
    slack: f64,
    tolerance: f64,
    bound_tol: f64,
    word_limit: u64,
    cover_epsilon: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs the full pipeline. `scene_text` is the file content the scene was
/// parsed from and only feeds the digest.
pub fn verify(scene: &SceneConfig, scene_text: &str) -> Result<VerifyReport, ReportError> {
    let dom = scene.domain();
    let d = dom.diameter_bound();
    let o = &scene.options;
    let settings = Settings {
        seed: o.seed(),
        points: o.points(),
        burn_in: o.burn_in(),
        pairs: o.pairs(),
        slack: o.slack(d),
        tolerance: o.tolerance(),
        bound_tol: o.bound_tol(),
        word_limit: o.word_limit(),
        cover_epsilon: d / 100.0,
    };

    let bound = bound_summary(scene, &curve_grid(d, o.curve_points()))?;
    let at_d: Vec<f64> = bound.envelopes.iter().map(|e| e.eval(d)).collect();
    let x_at_d = MoranProblem::new(at_d)?
        .with_tolerance(settings.tolerance)?
        .solve();
    let k = cover::compute_k(&bound.envelopes, d).map_err(|e| e.to_string());

    let vopts = ValidationOptions {
        pairs: settings.pairs,
        seed: settings.seed,
        slack: settings.slack,
    };
    let validations = scene
        .system
        .maps()
        .iter()
        .map(|w| validate_weak_contraction(w, dom, &vopts))
        .collect::<Result<Vec<_>, _>>()?;

    let mut copts = ChaosGameOptions::new(settings.points, settings.seed);
    copts.burn_in = settings.burn_in;
    let cloud: PointCloud = attractor::chaos_game(&scene.system, &copts)?;
    let diameter = attractor::diameter_estimate(&cloud, dom)?;

    let scales = boxdim::scale_ladder(
        o.scale_base(d),
        o.scale_ratio(),
        o.scale_k_min(),
        o.scale_k_max(),
    );
    let (box_counts, box_fit_error) = match boxdim::box_counts(&cloud, dom, &scales) {
        Ok(series) => match boxdim::fit_dimension(series.clone(), None) {
            Ok(fitted) => (fitted, None),
            Err(e) => (series, Some(e.to_string())),
        },
        Err(e) => (
            BoxCountSeries {
                scales,
                counts: Vec::new(),
                fit: None,
            },
            Some(e.to_string()),
        ),
    };

    let cover = cover_rows(&bound, d, &settings).map_err(|e| e.to_string());

    let verdicts = Verdicts {
        validator_pass: validations.iter().all(|v| v.pass),
        bound_consistent: box_counts
            .fit
            .map(|f| f.slope <= bound.x0 + settings.bound_tol),
        diameter_within_bound: diameter.value <= d * (1.0 + 1e-12),
    };

    Ok(VerifyReport {
        scene_sha256: sha256_hex(scene_text.as_bytes()),
        canonical_scene: scene.to_string(),
        bound,
        diameter_bound: d,
        x_at_d,
        k,
        validations,
        cloud_len: cloud.len(),
        diameter,
        box_counts,
        box_fit_error,
        cover,
        verdicts,
        names: scene.names.clone(),
        settings,
    })
}

fn cover_rows(
    bound: &BoundSummary,
    d: f64,
    s: &Settings,
) -> Result<(usize, Vec<CoverRow>), CoverError> {
    let depth = cover::depth_for_epsilon(&bound.envelopes, d, s.cover_epsilon, s.word_limit)?;
    let rows = cover::cover_table(&bound.envelopes, d, depth, bound.x0, s.word_limit)?;
    Ok((depth, rows))
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| json_number(*x)).collect())
}

impl VerifyReport {
    /// Exit status implied by the verdicts: 4 for a failed contraction
    /// check, 5 for an inconsistent bound, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        if !self.verdicts.validator_pass {
            4
        } else if self.verdicts.bound_consistent == Some(false) {
            5
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        let s = &self.settings;
        let maps: Vec<Value> = self
            .names
            .iter()
            .zip(&self.validations)
            .zip(&self.bound.infima)
            .map(|((name, v), inf)| {
                let violations: Vec<Value> = v
                    .violations
                    .iter()
                    .map(|x| {
                        json!({
                            "x": nums(&x.x),
                            "y": nums(&x.y),
                            "distance": json_number(x.distance),
                            "image_distance": json_number(x.image_distance),
                            "allowed": json_number(x.allowed),
                        })
                    })
                    .collect();
                json!({
                    "name": name,
                    "infimum": json_number(*inf),
                    "validation": {
                        "pass": v.pass,
                        "pairs": v.pairs,
                        "worst_ratio": json_number(v.worst_ratio),
                        "violation_count": v.violation_count,
                        "violations": violations,
                    },
                })
            })
            .collect();

        let curve: Vec<Value> = self
            .bound
            .curve
            .samples
            .iter()
            .map(|(t, x)| json!([json_number(*t), json_number(*x)]))
            .collect();

        let fit = match (&self.box_counts.fit, &self.box_fit_error) {
            (Some(f), _) => json!({
                "slope": json_number(f.slope),
                "intercept": json_number(f.intercept),
                "r2": json_number(f.r2),
                "window": [f.window_lo, f.window_hi],
            }),
            (None, Some(e)) => json!({ "error": e }),
            (None, None) => Value::Null,
        };

        let cover = match &self.cover {
            Ok((depth, rows)) => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "depth": r.depth,
                            "max_bound": json_number(r.max_bound),
                            "sum_at_x0": json_number(r.sum),
                            "word_count": r.word_count,
                        })
                    })
                    .collect();
                json!({
                    "epsilon": json_number(s.cover_epsilon),
                    "depth": depth,
                    "levels": rows,
                })
            }
            Err(e) => json!({ "epsilon": json_number(s.cover_epsilon), "error": e }),
        };

        let mut root = Map::new();
        root.insert("schema".into(), json!(SCHEMA_VERSION));
        root.insert(
            "inputs".into(),
            json!({
                "scene_sha256": self.scene_sha256,
                "scene": self.canonical_scene,
                "seed": s.seed,
                "points": s.points,
                "burn_in": s.burn_in,
                "pairs": s.pairs,
                "slack": json_number(s.slack),
                "tolerance": json_number(s.tolerance),
                "bound_tol": json_number(s.bound_tol),
                "word_limit": s.word_limit,
            }),
        );
        root.insert(
            "bound".into(),
            json!({
                "x0": json_number(self.bound.x0),
                "diameter_bound": json_number(self.diameter_bound),
                "x_at_diameter": json_number(self.x_at_d),
                "k": match &self.k {
                    Ok(k) => json_number(*k),
                    Err(_) => Value::Null,
                },
                "curve": curve,
            }),
        );
        root.insert("maps".into(), Value::Array(maps));
        root.insert(
            "attractor".into(),
            json!({
                "points": self.cloud_len,
                "diameter": json_number(self.diameter.value),
                "diameter_approximate": self.diameter.approximate,
            }),
        );
        root.insert(
            "box_counting".into(),
            json!({
                "scales": nums(&self.box_counts.scales),
                "counts": self.box_counts.counts,
                "fit": fit,
            }),
        );
        root.insert("cover".into(), cover);
        root.insert(
            "verdicts".into(),
            json!({
                "validator_pass": self.verdicts.validator_pass,
                "bound_consistent": self.verdicts.bound_consistent,
                "diameter_within_bound": self.verdicts.diameter_within_bound,
            }),
        );
        Value::Object(root)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serialises");
        s.push('\n');
        s
    }
}
