//! Line-oriented scene files describing a weak-contraction IFS.
//!
//! ```text
//! # middle-thirds Cantor set
//! space 1 euclidean box [0] [1]
//! map L similarity 0.3333333333333333 [0] alpha const 0.3333333333333333
//! map R similarity 0.3333333333333333 [0.6666666666666666] alpha const 0.3333333333333333
//! set seed 7
//! ```
//!
//! Declarations:
//!
//! * `space INT metric box [lo..] [hi..] [diameter NUM]`
//! * `map NAME similarity RATIO [t..] [rotate ANGLE] alpha SPEC`
//! * `map NAME affine [[row..]..] [t..] alpha SPEC`
//! * `map NAME expr "f1" .. "fd" alpha SPEC` (variables `x1..xd`)
//! * alpha `SPEC`: `const NUM`, `piecewise 0:v0 t1:v1 ..` (breakpoint:value,
//!   first breakpoint 0), or `expr "..."` in the variable `t`
//! * `set KEY VALUE`
//!
//! `#` starts a comment. List entries may be separated by commas or spaces.

pub mod expr;

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::coeff::{CoeffError, CoefficientFunction, SampleGrid};
use crate::ifs::{IFSystem, IfsError, Metric, MetricDomain, PointMap, WeakContraction};

use self::expr::{Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SceneErrorKind {
    Syntax(String),
    DuplicateMapName(String),
    FewerThanTwoMaps(usize),
    CoefficientOutOfRange(String),
    InvalidCoefficient(String),
    InvalidMap(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct SceneError {
    pub line: usize,
    pub column: usize,
    pub kind: SceneErrorKind,
}

impl fmt::Display for SceneErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            SceneErrorKind::DuplicateMapName(n) => write!(f, "duplicate map name `{n}`"),
            SceneErrorKind::FewerThanTwoMaps(n) => {
                write!(f, "a scene needs at least 2 maps, found {n}")
            }
            SceneErrorKind::CoefficientOutOfRange(m) => {
                write!(f, "coefficient out of range [0, 1): {m}")
            }
            SceneErrorKind::InvalidCoefficient(m) => write!(f, "invalid coefficient: {m}"),
            SceneErrorKind::InvalidMap(m) => write!(f, "invalid map: {m}"),
        }
    }
}

impl SceneError {
    fn new(line: usize, column: usize, kind: SceneErrorKind) -> Self {
        SceneError { line, column, kind }
    }

    fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Self::new(line, column, SceneErrorKind::Syntax(msg.into()))
    }

    /// Whether the error concerns coefficient values rather than syntax.
    pub fn is_coefficient_error(&self) -> bool {
        matches!(
            self.kind,
            SceneErrorKind::CoefficientOutOfRange(_) | SceneErrorKind::InvalidCoefficient(_)
        )
    }
}

/// Optional run settings; unset fields fall back to documented defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneOptions {
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub burn_in: Option<usize>,
    pub pairs: Option<usize>,
    pub slack: Option<f64>,
    pub tolerance: Option<f64>,
    pub alpha_grid: Option<usize>,
    pub curve_points: Option<usize>,
    pub scale_base: Option<f64>,
    pub scale_ratio: Option<f64>,
    pub scale_k_min: Option<i32>,
    pub scale_k_max: Option<i32>,
    pub bound_tol: Option<f64>,
    pub word_limit: Option<u64>,
    pub report_out: Option<String>,
}

const MAX_ALPHA_GRID: usize = 1_000_000;

impl SceneOptions {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
    pub fn points(&self) -> usize {
        self.points.unwrap_or(100_000)
    }
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(100)
    }
    pub fn pairs(&self) -> usize {
        self.pairs.unwrap_or(100_000)
    }
    pub fn slack(&self, d: f64) -> f64 {
        self.slack.unwrap_or(1e-9 * d)
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(crate::moran::DEFAULT_TOLERANCE)
    }
    pub fn alpha_grid(&self) -> usize {
        self.alpha_grid.unwrap_or(SampleGrid::DEFAULT_POINTS)
    }
    pub fn curve_points(&self) -> usize {
        self.curve_points.unwrap_or(64)
    }
    pub fn scale_base(&self, d: f64) -> f64 {
        self.scale_base.unwrap_or(d)
    }
    pub fn scale_ratio(&self) -> f64 {
        self.scale_ratio.unwrap_or(0.5)
    }
    pub fn scale_k_min(&self) -> i32 {
        self.scale_k_min.unwrap_or(2)
    }
    pub fn scale_k_max(&self) -> i32 {
        self.scale_k_max.unwrap_or(9)
    }
    pub fn bound_tol(&self) -> f64 {
        self.bound_tol.unwrap_or(0.05)
    }
    pub fn word_limit(&self) -> u64 {
        self.word_limit.unwrap_or(crate::cover::DEFAULT_WORD_LIMIT)
    }
}

/// A parsed scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub system: IFSystem,
    pub names: Vec<String>,
    pub options: SceneOptions,
}

impl SceneConfig {
    pub fn domain(&self) -> &MetricDomain {
        self.system.domain()
    }
}

pub fn parse_scene(text: &str) -> Result<SceneConfig, SceneError> {
    Builder::default().run(text)
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Str(String),
    LBracket,
    RBracket,
    Comma,
    Colon,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Str(_) => f.write_str("string"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<Spanned>, SceneError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, column });
            i += 1;
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' {
                j += 1;
            }
            if j == chars.len() {
                return Err(SceneError::syntax(lineno, column, "unterminated string"));
            }
            out.push(Spanned {
                tok: Tok::Str(chars[start..j].iter().collect()),
                column,
            });
            i = j + 1;
            continue;
        }
        if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| {
                SceneError::syntax(lineno, column, format!("malformed number `{text}`"))
            })?;
            if !v.is_finite() {
                return Err(SceneError::syntax(
                    lineno,
                    column,
                    format!("number `{text}` is not finite"),
                ));
            }
            out.push(Spanned {
                tok: Tok::Num(v),
                column,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-')
            {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Word(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        return Err(SceneError::syntax(
            lineno,
            column,
            format!("unexpected character `{c}`"),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// syntax

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.end_column, |t| t.column)
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SceneError> {
        Err(SceneError::syntax(self.line, self.column(), msg))
    }

    fn found(&self) -> String {
        self.peek()
            .map_or("end of line".to_string(), |t| t.to_string())
    }

    fn word(&mut self, what: &str) -> Result<String, SceneError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => self.err(format!("expected {what}, found {}", self.found())),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SceneError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`, found {}", self.found())),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == kw)
    }

    fn num(&mut self) -> Result<f64, SceneError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(*v)
            }
            _ => self.err(format!("expected number, found {}", self.found())),
        }
    }

    fn string(&mut self) -> Result<(String, usize), SceneError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok((s.clone(), column))
            }
            _ => self.err(format!("expected quoted string, found {}", self.found())),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SceneError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.err(format!("expected {tok}, found {}", self.found()))
        }
    }

    fn num_list(&mut self) -> Result<Vec<f64>, SceneError> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBracket) {
            if !out.is_empty() {
                self.eat(&Tok::Comma);
            }
            out.push(self.num()?);
        }
        Ok(out)
    }

    fn num_matrix(&mut self) -> Result<Vec<Vec<f64>>, SceneError> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBracket) {
            if !out.is_empty() {
                self.eat(&Tok::Comma);
            }
            out.push(self.num_list()?);
        }
        Ok(out)
    }

    fn done(&self) -> Result<(), SceneError> {
        if self.pos < self.toks.len() {
            return self.err(format!("unexpected {} at end of declaration", self.found()));
        }
        Ok(())
    }
}

struct SpaceDecl {
    line: usize,
    dim: usize,
    metric: Metric,
    lo: Vec<f64>,
    hi: Vec<f64>,
    diameter: Option<f64>,
}

enum BodyDecl {
    Similarity {
        ratio: f64,
        translation: Vec<f64>,
        angle: f64,
    },
    Affine {
        matrix: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    Expr(Vec<(String, usize)>),
}

enum AlphaDecl {
    Const(f64, usize),
    Piecewise(Vec<(f64, f64, usize)>),
    Expr(String, usize),
}

struct MapDecl {
    line: usize,
    name: String,
    body: BodyDecl,
    alpha: AlphaDecl,
}

#[derive(Default)]
struct Builder {
    space: Option<SpaceDecl>,
    maps: Vec<MapDecl>,
    options: SceneOptions,
    last_line: usize,
}

impl Builder {
    fn run(mut self, text: &str) -> Result<SceneConfig, SceneError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            self.last_line = line;
            let toks = lex_line(raw, line)?;
            if toks.is_empty() {
                continue;
            }
            let mut c = Cursor {
                toks: &toks,
                pos: 0,
                line,
                end_column: raw.chars().count() + 1,
            };
            match c.word("declaration")?.as_str() {
                "space" => self.space_decl(&mut c)?,
                "map" => self.map_decl(&mut c)?,
                "set" => self.option_decl(&mut c)?,
                other => {
                    return Err(SceneError::syntax(
                        line,
                        1,
                        format!("unknown declaration `{other}` (expected space, map or set)"),
                    ))
                }
            }
            c.done()?;
        }
        self.finish()
    }

    fn space_decl(&mut self, c: &mut Cursor) -> Result<(), SceneError> {
        if self.space.is_some() {
            return c.err("duplicate space declaration");
        }
        let column = c.column();
        let dim = c.num()?;
        if dim.fract() != 0.0 || !(1.0..=1e6).contains(&dim) {
            return Err(SceneError::syntax(
                c.line,
                column,
                "dimension must be a positive integer",
            ));
        }
        let column = c.column();
        let metric = c
            .word("metric")?
            .parse::<Metric>()
            .map_err(|m| SceneError::syntax(c.line, column, m))?;
        c.keyword("box")?;
        let lo = c.num_list()?;
        let hi = c.num_list()?;
        let diameter = if c.at_keyword("diameter") {
            c.pos += 1;
            Some(c.num()?)
        } else {
            None
        };
        self.space = Some(SpaceDecl {
            line: c.line,
            dim: dim as usize,
            metric,
            lo,
            hi,
            diameter,
        });
        Ok(())
    }

    fn map_decl(&mut self, c: &mut Cursor) -> Result<(), SceneError> {
        let name_col = c.column();
        let name = c.word("map name")?;
        if self.maps.iter().any(|m| m.name == name) {
            return Err(SceneError::new(
                c.line,
                name_col,
                SceneErrorKind::DuplicateMapName(name),
            ));
        }
        let body = match c.word("map kind")?.as_str() {
            "similarity" => {
                let ratio = c.num()?;
                let translation = c.num_list()?;
                let angle = if c.at_keyword("rotate") {
                    c.pos += 1;
                    c.num()?
                } else {
                    0.0
                };
                BodyDecl::Similarity {
                    ratio,
                    translation,
                    angle,
                }
            }
            "affine" => {
                let matrix = c.num_matrix()?;
                let translation = c.num_list()?;
                BodyDecl::Affine {
                    matrix,
                    translation,
                }
            }
            "expr" => {
                let mut parts = vec![c.string()?];
                while let Some(Tok::Str(_)) = c.peek() {
                    parts.push(c.string()?);
                }
                BodyDecl::Expr(parts)
            }
            other => return c.err(format!("unknown map kind `{other}`")),
        };
        c.keyword("alpha")?;
        let alpha = match c.word("alpha kind")?.as_str() {
            "const" => {
                let col = c.column();
                AlphaDecl::Const(c.num()?, col)
            }
            "piecewise" => {
                let mut pairs = Vec::new();
                while let Some(Tok::Num(_)) = c.peek() {
                    let col = c.column();
                    let t = c.num()?;
                    c.expect(Tok::Colon)?;
                    let v = c.num()?;
                    pairs.push((t, v, col));
                }
                if pairs.is_empty() {
                    return c.err("piecewise needs at least one breakpoint:value pair");
                }
                AlphaDecl::Piecewise(pairs)
            }
            "expr" => {
                let (s, col) = c.string()?;
                AlphaDecl::Expr(s, col)
            }
            other => return c.err(format!("unknown alpha kind `{other}`")),
        };
        self.maps.push(MapDecl {
            line: c.line,
            name,
            body,
            alpha,
        });
        Ok(())
    }

    fn option_decl(&mut self, c: &mut Cursor) -> Result<(), SceneError> {
        let key_col = c.column();
        let key = c.word("option name")?;
        let value_col = c.column();
        let line = c.line;
        let bad = |msg: &str| SceneError::syntax(line, value_col, format!("option `{key}`: {msg}"));
        let o = &mut self.options;
        let mut count = |max: f64| -> Result<f64, SceneError> {
            let v = c.num()?;
            if v.fract() != 0.0 || v < 0.0 || v > max {
                return Err(bad("expected a nonnegative integer in range"));
            }
            Ok(v)
        };
        match key.as_str() {
            "seed" => o.seed = Some(count(u64::MAX as f64)? as u64),
            "points" => o.points = Some(count(1e9)? as usize),
            "burn_in" => o.burn_in = Some(count(1e9)? as usize),
            "pairs" => o.pairs = Some(count(1e9)? as usize),
            "alpha_grid" => o.alpha_grid = Some(count(MAX_ALPHA_GRID as f64)? as usize),
            "curve_points" => o.curve_points = Some(count(1e6)? as usize),
            "word_limit" => o.word_limit = Some(count(1e12)? as u64),
            "scale_k_min" | "scale_k_max" => {
                let v = c.num()?;
                if v.fract() != 0.0 || v.abs() > 1000.0 {
                    return Err(bad("expected an integer"));
                }
                if key == "scale_k_min" {
                    o.scale_k_min = Some(v as i32);
                } else {
                    o.scale_k_max = Some(v as i32);
                }
            }
            "slack" | "tolerance" | "scale_base" | "scale_ratio" | "bound_tol" => {
                let v = c.num()?;
                let ok = match key.as_str() {
                    "slack" | "bound_tol" => v >= 0.0,
                    "scale_ratio" => v > 0.0 && v < 1.0,
                    _ => v > 0.0,
                };
                if !ok {
                    return Err(bad("value out of range"));
                }
                match key.as_str() {
                    "slack" => o.slack = Some(v),
                    "tolerance" => o.tolerance = Some(v),
                    "scale_base" => o.scale_base = Some(v),
                    "scale_ratio" => o.scale_ratio = Some(v),
                    _ => o.bound_tol = Some(v),
                }
            }
            "report_out" => o.report_out = Some(c.string()?.0),
            _ => {
                return Err(SceneError::syntax(
                    line,
                    key_col,
                    format!("unknown option `{key}`"),
                ))
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<SceneConfig, SceneError> {
        let end = self.last_line.max(1);
        let Some(space) = self.space else {
            return Err(SceneError::syntax(end, 1, "missing space declaration"));
        };
        if self.maps.len() < 2 {
            return Err(SceneError::new(
                self.maps.first().map_or(end, |m| m.line),
                1,
                SceneErrorKind::FewerThanTwoMaps(self.maps.len()),
            ));
        }
        let sline = space.line;
        if space.lo.len() != space.dim || space.hi.len() != space.dim {
            return Err(SceneError::syntax(
                sline,
                1,
                format!("box corners must have {} coordinates", space.dim),
            ));
        }
        let domain_err = |e: IfsError| SceneError::syntax(sline, 1, e.to_string());
        let domain = match space.diameter {
            Some(d) => MetricDomain::with_diameter(space.metric, space.lo, space.hi, d),
            None => MetricDomain::new(space.metric, space.lo, space.hi),
        }
        .map_err(domain_err)?;
        let dim = domain.dim();
        let mut grid = SampleGrid::for_diameter(domain.diameter_bound());
        grid.points = self.options.alpha_grid().clamp(2, MAX_ALPHA_GRID);

        let coord_vars: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        let coord_refs: Vec<&str> = coord_vars.iter().map(String::as_str).collect();

        let mut maps = Vec::with_capacity(self.maps.len());
        let mut names = Vec::with_capacity(self.maps.len());
        let mut seen = HashSet::new();
        for m in self.maps {
            if !seen.insert(m.name.clone()) {
                return Err(SceneError::new(
                    m.line,
                    1,
                    SceneErrorKind::DuplicateMapName(m.name),
                ));
            }
            let line = m.line;
            let map = match m.body {
                BodyDecl::Similarity {
                    ratio,
                    translation,
                    angle,
                } => PointMap::Similarity {
                    ratio,
                    angle,
                    translation,
                },
                BodyDecl::Affine {
                    matrix,
                    translation,
                } => PointMap::Affine {
                    matrix,
                    translation,
                },
                BodyDecl::Expr(parts) => {
                    let mut comps = Vec::with_capacity(parts.len());
                    for (src, col) in parts {
                        comps.push(
                            Expr::parse(&src, &coord_refs).map_err(|e| expr_error(line, col, e))?,
                        );
                    }
                    PointMap::Expr(comps)
                }
            };
            map.check_dim(dim).map_err(|e| {
                SceneError::new(
                    line,
                    1,
                    SceneErrorKind::InvalidMap(format!("map `{}`: {e}", m.name)),
                )
            })?;
            let coefficient = match m.alpha {
                AlphaDecl::Const(v, col) => {
                    if !(0.0..1.0).contains(&v) {
                        return Err(SceneError::new(
                            line,
                            col,
                            SceneErrorKind::CoefficientOutOfRange(format!("const {v}")),
                        ));
                    }
                    CoefficientFunction::constant(v).map_err(|e| coeff_error(line, col, e))?
                }
                AlphaDecl::Piecewise(pairs) => {
                    let col = pairs[0].2;
                    for &(_, v, c) in &pairs {
                        if !(0.0..1.0).contains(&v) {
                            return Err(SceneError::new(
                                line,
                                c,
                                SceneErrorKind::CoefficientOutOfRange(format!("piece value {v}")),
                            ));
                        }
                    }
                    if pairs[0].0 != 0.0 {
                        return Err(SceneError::syntax(
                            line,
                            col,
                            "first piecewise breakpoint must be 0",
                        ));
                    }
                    let breaks = pairs[1..].iter().map(|p| p.0).collect();
                    let values = pairs.iter().map(|p| p.1).collect();
                    CoefficientFunction::piecewise(breaks, values)
                        .map_err(|e| coeff_error(line, col, e))?
                }
                AlphaDecl::Expr(src, col) => {
                    let e = Expr::parse(&src, &["t"]).map_err(|e| expr_error(line, col, e))?;
                    CoefficientFunction::expression(e, grid)
                        .map_err(|e| coeff_error(line, col, e))?
                }
            };
            names.push(m.name);
            maps.push(WeakContraction::new(map, coefficient));
        }
        let system = IFSystem::new(domain, maps).map_err(domain_err)?;
        Ok(SceneConfig {
            system,
            names,
            options: self.options,
        })
    }
}

fn expr_error(line: usize, string_col: usize, e: ExprError) -> SceneError {
    let column = match &e {
        ExprError::Syntax { column, .. } | ExprError::UnknownIdentifier { column, .. } => {
            string_col + column
        }
        _ => string_col,
    };
    SceneError::syntax(line, column, format!("in expression: {e}"))
}

fn coeff_error(line: usize, column: usize, e: CoeffError) -> SceneError {
    let kind = match e {
        CoeffError::EvaluatesOutsideUnit { .. } => {
            SceneErrorKind::CoefficientOutOfRange(e.to_string())
        }
        other => SceneErrorKind::InvalidCoefficient(other.to_string()),
    };
    SceneError::new(line, column, kind)
}

// ---------------------------------------------------------------------------
// printing

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

impl fmt::Display for SceneConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dom = self.domain();
        writeln!(
            f,
            "space {} {} box {} {} diameter {:?}",
            dom.dim(),
            dom.metric(),
            list(dom.lo()),
            list(dom.hi()),
            dom.diameter_bound()
        )?;
        for (name, w) in self.names.iter().zip(self.system.maps()) {
            let mut line = format!("map {name} ");
            match &w.map {
                PointMap::Similarity {
                    ratio,
                    angle,
                    translation,
                } => {
                    write!(line, "similarity {ratio:?} {}", list(translation))?;
                    if *angle != 0.0 {
                        write!(line, " rotate {angle:?}")?;
                    }
                }
                PointMap::Affine {
                    matrix,
                    translation,
                } => {
                    let rows: Vec<String> = matrix.iter().map(|r| list(r)).collect();
                    write!(line, "affine [{}] {}", rows.join(", "), list(translation))?;
                }
                PointMap::Expr(comps) => {
                    line.push_str("expr");
                    for c in comps {
                        write!(line, " \"{c}\"")?;
                    }
                }
            }
            line.push_str(" alpha ");
            match &w.coefficient {
                CoefficientFunction::Constant(c) => write!(line, "const {c:?}")?,
                CoefficientFunction::Piecewise(p) => {
                    line.push_str("piecewise");
                    let starts = std::iter::once(0.0).chain(p.breakpoints().iter().copied());
                    for (t, v) in starts.zip(p.values()) {
                        write!(line, " {t:?}:{v:?}")?;
                    }
                }
                CoefficientFunction::Expr(e) => write!(line, "expr \"{}\"", e.expr)?,
            }
            writeln!(f, "{line}")?;
        }
        let o = &self.options;
        let mut set = |k: &str, v: Option<String>| match v {
            Some(v) => writeln!(f, "set {k} {v}"),
            None => Ok(()),
        };
        set("seed", o.seed.map(|v| v.to_string()))?;
        set("points", o.points.map(|v| v.to_string()))?;
        set("burn_in", o.burn_in.map(|v| v.to_string()))?;
        set("pairs", o.pairs.map(|v| v.to_string()))?;
        set("slack", o.slack.map(|v| format!("{v:?}")))?;
        set("tolerance", o.tolerance.map(|v| format!("{v:?}")))?;
        set("alpha_grid", o.alpha_grid.map(|v| v.to_string()))?;
        set("curve_points", o.curve_points.map(|v| v.to_string()))?;
        set("scale_base", o.scale_base.map(|v| format!("{v:?}")))?;
        set("scale_ratio", o.scale_ratio.map(|v| format!("{v:?}")))?;
        set("scale_k_min", o.scale_k_min.map(|v| v.to_string()))?;
        set("scale_k_max", o.scale_k_max.map(|v| v.to_string()))?;
        set("bound_tol", o.bound_tol.map(|v| format!("{v:?}")))?;
        set("word_limit", o.word_limit.map(|v| v.to_string()))?;
        set(
            "report_out",
            o.report_out.as_ref().map(|v| format!("\"{v}\"")),
        )?;
        Ok(())
    }
}
