//! Sitting-instance paths, reparameterizations, homotopies and thinness
//! certificates.
//!
//! A [`Path`] is a list of chart-local segments over sub-intervals of `[0, 1]`.
//! Each segment map takes the global parameter `t` directly, so concatenation
//! and reversal are plain substitutions. Chart changes happen only at segment
//! boundaries, where the path is expected to sit.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::build::{self, num, var};
use crate::expr::smooth::{self, FLAT_LO};
use crate::expr::{Expr, ExprFn, Shape};
use crate::geometry::{distance, Atlas};

/// Endpoint agreement tolerance for continuity and concatenation.
pub const CONTINUITY_TOL: f64 = 1e-9;
/// Velocity bound inside the sitting collars.
pub const SITTING_TOL: f64 = 1e-12;
/// Parameters sampled per segment for chart containment.
pub const CONTAINMENT_SAMPLES: usize = 64;

/// The reparameterizer `β`: 0 on `[0, 0.1]`, 1 on `[0.9, 1]`, smooth and
/// non-decreasing in between.
pub fn beta(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(t));
    }
    Ok(smooth::beta(t))
}

/// `β` as a one-input expression.
pub fn beta_expr() -> ExprFn {
    ExprFn::from_expr(build::beta(var(0)), 1).expect("beta(x0) is well formed")
}

/// A point together with the chart it is expressed in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub chart: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub chart: usize,
    pub start: f64,
    pub end: f64,
    map: ExprFn,
    velocity: ExprFn,
}

impl Segment {
    pub fn new(chart: usize, start: f64, end: f64, map: ExprFn) -> Result<Segment> {
        if map.arity() != 1 || !matches!(map.shape(), Shape::Vector(_)) {
            return Err(Error::InvalidPath(format!(
                "segment maps take one input and return a vector, got {} inputs and {}",
                map.arity(),
                map.shape()
            )));
        }
        if !(start < end) {
            return Err(Error::InvalidPath(format!("empty segment interval [{start}, {end}]")));
        }
        let velocity = map.diff(0)?;
        Ok(Segment { chart, start, end, map, velocity })
    }

    pub fn map(&self) -> &ExprFn {
        &self.map
    }

    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.map.eval_vector(&[t])?.iter().copied().collect())
    }

    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.velocity.eval_vector(&[t])?.iter().copied().collect())
    }

    /// The same segment with its parameter replaced by `inner(t)` on `[start, end]`.
    fn substituted(&self, inner: Expr, start: f64, end: f64) -> Result<Segment> {
        Segment::new(self.chart, start, end, self.map.compose(&[inner], 1)?)
    }
}

#[derive(Clone, Debug)]
pub struct Path {
    atlas: Arc<Atlas>,
    segments: Vec<Segment>,
    sitting: f64,
}

impl Path {
    /// Validated constructor: contiguous segments covering `[0, 1]`,
    /// containment at sampled parameters, continuity across chart changes,
    /// and vanishing velocity on `[0, ε]` and `[1 − ε, 1]`.
    pub fn new(atlas: Arc<Atlas>, segments: Vec<Segment>, sitting: f64) -> Result<Path> {
        let path = Path { atlas, segments, sitting };
        path.validate()?;
        Ok(path)
    }

    fn validate(&self) -> Result<()> {
        let segs = &self.segments;
        if segs.is_empty() {
            return Err(Error::InvalidPath("a path needs at least one segment".into()));
        }
        if !(self.sitting > 0.0 && self.sitting <= 0.5) {
            return Err(Error::InvalidPath(format!("sitting radius {} outside (0, 0.5]", self.sitting)));
        }
        if segs[0].start != 0.0 || segs[segs.len() - 1].end != 1.0 {
            return Err(Error::InvalidPath("segments must cover [0, 1]".into()));
        }
        for w in segs.windows(2) {
            if w[0].end != w[1].start {
                return Err(Error::InvalidPath(format!("gap between {} and {}", w[0].end, w[1].start)));
            }
        }
        for seg in segs {
            if seg.chart >= self.atlas.charts.len() {
                return Err(Error::InvalidPath(format!("unknown chart index {}", seg.chart)));
            }
            if seg.map.shape() != Shape::Vector(self.atlas.dim) {
                return Err(Error::InvalidPath(format!(
                    "segment has shape {}, atlas dimension is {}",
                    seg.map.shape(),
                    self.atlas.dim
                )));
            }
            for k in 0..CONTAINMENT_SAMPLES {
                let t = seg.start + (seg.end - seg.start) * k as f64 / (CONTAINMENT_SAMPLES - 1) as f64;
                self.atlas.check_point(seg.chart, &seg.point(t)?)?;
            }
        }
        for w in segs.windows(2) {
            let a = ChartPoint { chart: self.chart_name(w[0].chart), point: w[0].point(w[0].end)? };
            let b = ChartPoint { chart: self.chart_name(w[1].chart), point: w[1].point(w[1].start)? };
            if !same_point(&self.atlas, &a, &b, CONTINUITY_TOL) {
                return Err(Error::InvalidPath(format!("discontinuity at t = {}: {a:?} vs {b:?}", w[0].end)));
            }
        }
        for k in 0..8 {
            let f = k as f64 / 7.0;
            for t in [f * self.sitting, 1.0 - f * self.sitting] {
                let v = self.velocity(t)?;
                let speed = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if speed > SITTING_TOL {
                    return Err(Error::InvalidPath(format!(
                        "path does not sit: speed {speed:e} at t = {t} within the sitting radius {}",
                        self.sitting
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(atlas: Arc<Atlas>, segments: Vec<Segment>, sitting: f64) -> Path {
        Path { atlas, segments, sitting }
    }

    /// The constant path `1_x`.
    pub fn constant(atlas: Arc<Atlas>, chart: &str, x: &[f64]) -> Result<Path> {
        let c = atlas.chart_index(chart)?;
        atlas.check_point(c, x)?;
        let map = ExprFn::constant_vector(x, 1);
        Path::new(atlas, vec![Segment::new(c, 0.0, 1.0, map)?], 0.5)
    }

    pub fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn sitting_radius(&self) -> f64 {
        self.sitting
    }

    fn chart_name(&self, c: usize) -> String {
        self.atlas.charts[c].name.clone()
    }

    /// Index of the segment used at `t` (the earlier one at a boundary).
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments.iter().position(|s| t <= s.end).unwrap_or(self.segments.len() - 1)
    }

    pub fn eval(&self, t: f64) -> Result<ChartPoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(t));
        }
        let seg = &self.segments[self.segment_index(t)];
        Ok(ChartPoint { chart: self.chart_name(seg.chart), point: seg.point(t)? })
    }

    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(t));
        }
        self.segments[self.segment_index(t)].velocity(t)
    }

    pub fn start(&self) -> ChartPoint {
        let s = &self.segments[0];
        ChartPoint { chart: self.chart_name(s.chart), point: s.point(0.0).expect("validated path evaluates") }
    }

    pub fn end(&self) -> ChartPoint {
        let s = &self.segments[self.segments.len() - 1];
        ChartPoint { chart: self.chart_name(s.chart), point: s.point(1.0).expect("validated path evaluates") }
    }

    pub fn is_loop(&self) -> bool {
        same_point(&self.atlas, &self.end(), &self.start(), CONTINUITY_TOL)
    }

    /// Largest chart-aware distance between the two paths at `samples` parameters.
    pub fn max_distance(&self, other: &Path, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..samples {
            let t = k as f64 / (samples - 1).max(1) as f64;
            let (a, b) = (self.eval(t)?, other.eval(t)?);
            worst = worst.max(point_distance(&self.atlas, &a, &b));
        }
        Ok(worst)
    }
}

/// Distance between chart points, mapping through an overlap when the charts differ.
pub fn point_distance(atlas: &Atlas, a: &ChartPoint, b: &ChartPoint) -> f64 {
    if a.chart == b.chart {
        return distance(&a.point, &b.point);
    }
    let (Ok(ca), Ok(cb)) = (atlas.chart_index(&a.chart), atlas.chart_index(&b.chart)) else {
        return f64::INFINITY;
    };
    atlas
        .overlaps_at(ca, cb, &a.point)
        .filter_map(|k| atlas.overlaps[k].apply(&a.point).ok())
        .map(|y| distance(&y, &b.point))
        .fold(f64::INFINITY, f64::min)
}

pub fn same_point(atlas: &Atlas, a: &ChartPoint, b: &ChartPoint, tol: f64) -> bool {
    point_distance(atlas, a, b) <= tol
}

fn same_atlas(a: &Arc<Atlas>, b: &Arc<Atlas>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `γτ`: `τ` on `[0, ½]` at double speed, then `γ` on `[½, 1]`.
pub fn concat(gamma: &Path, tau: &Path) -> Result<Path> {
    if !same_atlas(&gamma.atlas, &tau.atlas) {
        return Err(Error::EndpointMismatch("paths live on different atlases".into()));
    }
    let (join_tau, join_gamma) = (tau.end(), gamma.start());
    if !same_point(&gamma.atlas, &join_tau, &join_gamma, CONTINUITY_TOL) {
        return Err(Error::EndpointMismatch(format!(
            "tau ends at {} {:?} but gamma starts at {} {:?}",
            join_tau.chart, join_tau.point, join_gamma.chart, join_gamma.point
        )));
    }
    let mut segments = Vec::with_capacity(gamma.segments.len() + tau.segments.len());
    for s in &tau.segments {
        segments.push(s.substituted(build::mul(num(2.0), var(0)), s.start / 2.0, s.end / 2.0)?);
    }
    for s in &gamma.segments {
        let inner = build::affine(2.0, var(0), -1.0);
        segments.push(s.substituted(inner, (1.0 + s.start) / 2.0, (1.0 + s.end) / 2.0)?);
    }
    if let Some(last) = segments.last_mut() {
        last.end = 1.0;
    }
    Ok(Path::from_parts(gamma.atlas.clone(), segments, gamma.sitting.min(tau.sitting) / 2.0))
}

/// `γ⁻¹(t) = γ(1 − t)`.
pub fn reverse(gamma: &Path) -> Path {
    let segments = gamma
        .segments
        .iter()
        .rev()
        .map(|s| s.substituted(build::affine(-1.0, var(0), 1.0), 1.0 - s.end, 1.0 - s.start))
        .collect::<Result<Vec<_>>>()
        .expect("reversal keeps segments well formed");
    Path::from_parts(gamma.atlas.clone(), segments, gamma.sitting)
}

/// `σ(x, y)(t) = x + β(t)(y − x)` inside one chart.
pub fn straight_line(atlas: Arc<Atlas>, chart: &str, x: &[f64], y: &[f64]) -> Result<Path> {
    let c = atlas.chart_index(chart)?;
    if x.len() != atlas.dim || y.len() != atlas.dim {
        return Err(Error::InvalidPath(format!("points must have {} coordinates", atlas.dim)));
    }
    if !atlas.charts[c].domain.contains_segment(x, y) {
        return Err(Error::SegmentLeavesChart { chart: chart.to_string(), from: x.to_vec(), to: y.to_vec() });
    }
    let comps =
        x.iter().zip(y).map(|(a, b)| build::add(num(*a), build::mul(build::beta(var(0)), num(b - a)))).collect();
    let map = ExprFn::from_expr(Expr::Vector(comps), 1)?;
    Path::new(atlas, vec![Segment::new(c, 0.0, 1.0, map)?], FLAT_LO)
}

/// `Υ(s)(t) = γ(s β(t))` for a chart-local curve `γ` with `γ(0)` the base point.
pub fn upsilon(atlas: Arc<Atlas>, chart: &str, curve: &ExprFn, s: f64) -> Result<Path> {
    let c = atlas.chart_index(chart)?;
    if curve.arity() != 1 || curve.shape() != Shape::Vector(atlas.dim) {
        return Err(Error::InvalidPath(format!("curve must map R -> R^{}", atlas.dim)));
    }
    let map = curve.compose(&[build::mul(num(s), build::beta(var(0)))], 1)?;
    Path::new(atlas, vec![Segment::new(c, 0.0, 1.0, map)?], FLAT_LO)
}

/// Smallest `s ∈ [0, 1]` with `f(s) ≥ u`, for non-decreasing `f`.
fn invert_monotone(f: &dyn Fn(f64) -> Result<f64>, u: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(lo)? >= u {
        return Ok(0.0);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `γ ∘ φ` for a non-decreasing `φ: [0, 1] → [0, 1]` with `φ(0) = 0`, `φ(1) = 1`.
pub fn reparameterize(gamma: &Path, phi: &ExprFn, sitting: f64) -> Result<Path> {
    if phi.arity() != 1 || phi.shape() != Shape::Scalar {
        return Err(Error::InvalidPath("reparameterizations are scalar functions of one input".into()));
    }
    let f = |s: f64| phi.eval_scalar(&[s]);
    if (f(0.0)?).abs() > 1e-12 || (f(1.0)? - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPath("reparameterization must fix 0 and 1".into()));
    }
    let n = gamma.segments.len();
    let mut cuts = vec![0.0];
    for s in &gamma.segments[..n - 1] {
        cuts.push(invert_monotone(&f, s.end)?);
    }
    cuts.push(1.0);
    let mut segments = Vec::with_capacity(n);
    for (k, s) in gamma.segments.iter().enumerate() {
        if cuts[k] < cuts[k + 1] {
            segments.push(s.substituted(phi.expr().clone(), cuts[k], cuts[k + 1])?);
        }
    }
    Path::new(gamma.atlas.clone(), segments, sitting)
}

/// `γ ∘ β`.
pub fn compose_beta(gamma: &Path) -> Result<Path> {
    reparameterize(gamma, &beta_expr(), FLAT_LO.max(gamma.sitting).min(0.5))
}

/// Thin-class representative; equality is only ever witnessed.
#[derive(Clone, Debug)]
pub struct ThinClass {
    pub representative: Path,
}

pub fn class_of(gamma: &Path) -> ThinClass {
    ThinClass { representative: gamma.clone() }
}

/// One chart-local piece of a homotopy: `H(s, t)` for `s` in `[start, end]`.
#[derive(Clone, Debug)]
pub struct HomotopyPiece {
    pub chart: usize,
    pub start: f64,
    pub end: f64,
    map: ExprFn,
    ds: ExprFn,
    dt: ExprFn,
}

impl HomotopyPiece {
    pub fn new(chart: usize, start: f64, end: f64, map: ExprFn) -> Result<HomotopyPiece> {
        if map.arity() != 2 || !matches!(map.shape(), Shape::Vector(_)) {
            return Err(Error::InvalidHomotopy("pieces map (s, t) to a point".into()));
        }
        let (ds, dt) = (map.diff(0)?, map.diff(1)?);
        Ok(HomotopyPiece { chart, start, end, map, ds, dt })
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum HomotopyMap {
    /// Chart-local closed forms over fixed `s`-intervals.
    Chartwise(Vec<HomotopyPiece>),
    /// `H(s, t) = master(φ(s, t))`; breakpoints move with `t`.
    Reparam { master: Path, phi: ExprFn, phi_s: ExprFn, phi_t: ExprFn },
}

#[derive(Clone, Debug)]
pub struct Homotopy {
    atlas: Arc<Atlas>,
    map: HomotopyMap,
    collar: f64,
}

/// Outcome of [`certify_thin`]. A certificate is evidence at the sampled
/// grid only.
#[derive(Clone, Debug, Serialize)]
pub struct ThinCertificate {
    pub certified: bool,
    pub grid: usize,
    pub tolerance: f64,
    pub max_sigma2: f64,
    pub worst_point: [f64; 2],
    pub max_differential: f64,
}

impl Homotopy {
    pub fn chartwise(atlas: Arc<Atlas>, pieces: Vec<HomotopyPiece>, collar: f64) -> Result<Homotopy> {
        if pieces.is_empty() || pieces[0].start != 0.0 || pieces[pieces.len() - 1].end != 1.0 {
            return Err(Error::InvalidHomotopy("pieces must cover s in [0, 1]".into()));
        }
        if pieces.windows(2).any(|w| w[0].end != w[1].start || w[0].start >= w[0].end) {
            return Err(Error::InvalidHomotopy("pieces must be contiguous and non-empty".into()));
        }
        let h = Homotopy { atlas, map: HomotopyMap::Chartwise(pieces), collar };
        h.validate()?;
        Ok(h)
    }

    pub fn reparam(master: Path, phi: ExprFn, collar: f64) -> Result<Homotopy> {
        if phi.arity() != 2 || phi.shape() != Shape::Scalar {
            return Err(Error::InvalidHomotopy("phi maps (s, t) to a parameter".into()));
        }
        let (phi_s, phi_t) = (phi.diff(0)?, phi.diff(1)?);
        let atlas = master.atlas.clone();
        let h = Homotopy { atlas, map: HomotopyMap::Reparam { master, phi, phi_s, phi_t }, collar };
        h.validate()?;
        Ok(h)
    }

    pub fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<ChartPoint> {
        match &self.map {
            HomotopyMap::Chartwise(pieces) => {
                let p = &pieces[pieces.iter().position(|p| s <= p.end).unwrap_or(pieces.len() - 1)];
                let v = p.map.eval_vector(&[s, t])?;
                Ok(ChartPoint { chart: self.atlas.charts[p.chart].name.clone(), point: v.iter().copied().collect() })
            }
            HomotopyMap::Reparam { master, phi, .. } => master.eval(phi.eval_scalar(&[s, t])?.clamp(0.0, 1.0)),
        }
    }

    /// `(∂H/∂s, ∂H/∂t)` in the chart of the point.
    pub fn differential(&self, s: f64, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.map {
            HomotopyMap::Chartwise(pieces) => {
                let p = &pieces[pieces.iter().position(|p| s <= p.end).unwrap_or(pieces.len() - 1)];
                let a = p.ds.eval_vector(&[s, t])?.iter().copied().collect();
                let b = p.dt.eval_vector(&[s, t])?.iter().copied().collect();
                Ok((a, b))
            }
            HomotopyMap::Reparam { master, phi, phi_s, phi_t } => {
                let u = phi.eval_scalar(&[s, t])?.clamp(0.0, 1.0);
                let v = master.velocity(u)?;
                let (ps, pt) = (phi_s.eval_scalar(&[s, t])?, phi_t.eval_scalar(&[s, t])?);
                Ok((v.iter().map(|x| x * ps).collect(), v.iter().map(|x| x * pt).collect()))
            }
        }
    }

    /// The path `s ↦ H(s, t)`.
    pub fn slice(&self, t: f64) -> Result<Path> {
        match &self.map {
            HomotopyMap::Chartwise(pieces) => {
                let segments = pieces
                    .iter()
                    .map(|p| Segment::new(p.chart, p.start, p.end, p.map.compose(&[var(0), num(t)], 1)?))
                    .collect::<Result<Vec<_>>>()?;
                Path::new(self.atlas.clone(), segments, self.collar.min(0.5))
            }
            HomotopyMap::Reparam { master, phi, .. } => {
                let slice = phi.compose(&[var(0), num(t)], 1)?;
                reparameterize(master, &slice, self.collar.min(0.5))
            }
        }
    }

    /// Boundary paths `H(·, 0)` and `H(·, 1)`.
    pub fn boundary(&self) -> Result<(Path, Path)> {
        Ok((self.slice(0.0)?, self.slice(1.0)?))
    }

    fn validate(&self) -> Result<()> {
        if !(self.collar > 0.0 && self.collar < 0.5) {
            return Err(Error::InvalidHomotopy(format!("collar {} outside (0, 0.5)", self.collar)));
        }
        let (g0, _) = self.boundary()?;
        let (start, end) = (g0.start(), g0.end());
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for k in 0..=16 {
            let t = k as f64 / 16.0;
            for (s, want) in [(0.0, &start), (1.0, &end)] {
                let p = self.eval(s, t)?;
                if !same_point(&self.atlas, &p, want, CONTINUITY_TOL) {
                    return Err(Error::InvalidHomotopy(format!("endpoint moves at s = {s}, t = {t}")));
                }
            }
        }
        let c = self.collar;
        for i in 0..8 {
            let a = c * i as f64 / 7.0;
            for j in 0..=16 {
                let b = j as f64 / 16.0;
                for (s, t) in [(b, a), (b, 1.0 - a)] {
                    let (_, dt) = self.differential(s, t)?;
                    if norm(&dt) > 1e-9 {
                        return Err(Error::InvalidHomotopy(format!("moves in t inside the collar at ({s}, {t})")));
                    }
                }
                for (s, t) in [(a, b), (1.0 - a, b)] {
                    let (ds, dt) = self.differential(s, t)?;
                    if norm(&ds) > 1e-9 || norm(&dt) > 1e-9 {
                        return Err(Error::InvalidHomotopy(format!("does not sit in the collar at ({s}, {t})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Singular values of the `n × 2` matrix with columns `a`, `b`.
fn singular_values(a: &[f64], b: &[f64]) -> (f64, f64) {
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    let mut wedge = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            wedge += (a[i] * b[j] - a[j] * b[i]).powi(2);
        }
    }
    let area = wedge.sqrt();
    let trace = aa + bb;
    let disc = (trace * trace - 4.0 * area * area).max(0.0).sqrt();
    let s1 = ((trace + disc) / 2.0).sqrt();
    let s2 = if s1 > 0.0 { area / s1 } else { 0.0 };
    (s1, s2)
}

/// Checks `σ₂(dH) ≤ tol` on a `grid × grid` lattice of `[0, 1]²`. The default
/// tolerance is `1e-8 · (1 + max ‖dH‖)`.
pub fn certify_thin(h: &Homotopy, grid: usize, tol: Option<f64>) -> Result<ThinCertificate> {
    let grid = grid.max(2);
    let coords: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let rows = coords
        .par_iter()
        .map(|&s| {
            coords
                .iter()
                .map(|&t| {
                    let (a, b) = h.differential(s, t)?;
                    Ok(([s, t], singular_values(&a, &b)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_sigma2: f64 = 0.0;
    let mut worst_point = [0.0, 0.0];
    let mut max_differential: f64 = 0.0;
    for (p, (s1, s2)) in rows.into_iter().flatten() {
        max_differential = max_differential.max(s1);
        if s2 > max_sigma2 {
            max_sigma2 = s2;
            worst_point = p;
        }
    }
    let tolerance = tol.unwrap_or(1e-8 * (1.0 + max_differential));
    Ok(ThinCertificate {
        certified: max_sigma2 <= tolerance,
        grid,
        tolerance,
        max_sigma2,
        worst_point,
        max_differential,
    })
}

/// True iff `h` joins the two representatives and is certified thin.
pub fn witness_equal(c1: &ThinClass, c2: &ThinClass, h: &Homotopy, grid: usize) -> Result<bool> {
    let (g0, g1) = h.boundary()?;
    let d0 = g0.max_distance(&c1.representative, 65)?;
    let d1 = g1.max_distance(&c2.representative, 65)?;
    if d0 > CONTINUITY_TOL || d1 > CONTINUITY_TOL {
        return Err(Error::BoundaryMismatch(format!("boundary distances {d0:e} and {d1:e}")));
    }
    Ok(certify_thin(h, grid, None)?.certified)
}

/// The homotopy `γ((1 − β(t)) β(s) + β(t) s)` from `γ ∘ β` to `γ`.
pub fn reparam_homotopy(gamma: &Path) -> Result<Homotopy> {
    let (s, t) = (var(0), var(1));
    let bt = build::beta(t);
    let phi = build::add(build::mul(build::sub(num(1.0), bt.clone()), build::beta(s.clone())), build::mul(bt, s));
    let collar = gamma.sitting.min(FLAT_LO) * 0.99;
    Homotopy::reparam(gamma.clone(), ExprFn::from_expr(phi, 2)?, collar)
}

/// Smooth step from 0 to 1 centred at `c` with half-width `0.4 δ`.
fn step(s: Expr, c: f64, delta: f64) -> Expr {
    build::beta(build::affine(1.0 / delta, s, 0.5 - c / delta))
}

/// Thin homotopy from `(γτ)ρ` to `γ(τρ)`.
pub fn associativity_homotopy(gamma: &Path, tau: &Path, rho: &Path) -> Result<Homotopy> {
    let left = concat(&concat(gamma, tau)?, rho)?;
    let eps = gamma.sitting.min(tau.sitting).min(rho.sitting);
    let delta = eps / 4.0;
    let s = var(0);
    let w1 = step(s.clone(), 0.25, delta);
    let w2 = step(s.clone(), 0.5, delta);
    let one = || num(1.0);
    // Piecewise-linear map sending the right bracketing onto the left one,
    // blended smoothly inside the sitting zones.
    let p1 = build::mul(num(2.0), s.clone());
    let p2 = build::add(s.clone(), num(0.25));
    let p3 = build::affine(0.5, s.clone(), 0.5);
    let psi = build::add(
        build::add(
            build::mul(build::sub(one(), w1.clone()), p1),
            build::mul(build::mul(w1, build::sub(one(), w2.clone())), p2),
        ),
        build::mul(w2, p3),
    );
    let bt = build::beta(var(1));
    let phi = build::add(build::mul(build::sub(one(), bt.clone()), s), build::mul(bt, psi));
    Homotopy::reparam(left, ExprFn::from_expr(phi, 2)?, (eps / 4.0).min(FLAT_LO) * 0.99)
}

/// Retraction of the spur `σ⁻¹σ` (out to `z` and back) onto the constant path at `x`.
pub fn spur_homotopy(atlas: Arc<Atlas>, chart: &str, x: &[f64], z: &[f64]) -> Result<Homotopy> {
    let c = atlas.chart_index(chart)?;
    if !atlas.charts[c].domain.contains_segment(x, z) {
        return Err(Error::SegmentLeavesChart { chart: chart.to_string(), from: x.to_vec(), to: z.to_vec() });
    }
    let shrink = build::sub(num(1.0), build::beta(var(1)));
    let piece = |out: Expr, start: f64, end: f64| -> Result<HomotopyPiece> {
        let comps = x
            .iter()
            .zip(z)
            .map(|(a, b)| build::add(num(*a), build::mul(build::mul(shrink.clone(), out.clone()), num(b - a))))
            .collect();
        HomotopyPiece::new(c, start, end, ExprFn::from_expr(Expr::Vector(comps), 2)?)
    };
    let outward = build::beta(build::mul(num(2.0), var(0)));
    let back = build::beta(build::affine(-2.0, var(0), 2.0));
    Homotopy::chartwise(atlas, vec![piece(outward, 0.0, 0.5)?, piece(back, 0.5, 1.0)?], FLAT_LO / 2.0 * 0.99)
}

/// A smooth family of paths `u ↦ F(u, ·)` over a parameter box.
#[derive(Clone, Debug)]
pub struct PathFamily {
    atlas: Arc<Atlas>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    segments: Vec<(usize, f64, f64, ExprFn)>,
    sitting: f64,
}

impl PathFamily {
    /// Segment maps take `(u_0, …, u_{k−1}, t)`.
    pub fn new(
        atlas: Arc<Atlas>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        segments: Vec<(usize, f64, f64, ExprFn)>,
        sitting: f64,
    ) -> Result<PathFamily> {
        let k = lower.len();
        if k == 0 || upper.len() != k || lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(Error::InvalidPath("family parameter box is malformed".into()));
        }
        if segments.iter().any(|s| s.3.arity() != k + 1 || s.3.shape() != Shape::Vector(atlas.dim)) {
            return Err(Error::InvalidPath(format!("family maps take {} inputs and return R^{}", k + 1, atlas.dim)));
        }
        let fam = PathFamily { atlas, lower, upper, segments, sitting };
        fam.slice(&fam.lower.clone())?;
        fam.slice(&fam.upper.clone())?;
        Ok(fam)
    }

    pub fn params(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn slice(&self, u: &[f64]) -> Result<Path> {
        if u.len() != self.params() {
            return Err(Error::InvalidPath(format!("family takes {} parameters", self.params())));
        }
        let mut inputs: Vec<Expr> = u.iter().map(|v| num(*v)).collect();
        inputs.push(var(0));
        let segments = self
            .segments
            .iter()
            .map(|(c, a, b, f)| Segment::new(*c, *a, *b, f.compose(&inputs, 1)?))
            .collect::<Result<Vec<_>>>()?;
        Path::new(self.atlas.clone(), segments, self.sitting)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;

    fn plane() -> Arc<Atlas> {
        Arc::new(Atlas::single("R2", Region::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap()))
    }

    fn line(x: [f64; 2], y: [f64; 2]) -> Path {
        straight_line(plane(), "R2", &x, &y).unwrap()
    }

    #[test]
    fn beta_flat_zones_and_range() {
        assert_eq!(beta(0.05).unwrap(), 0.0);
        assert_eq!(beta(0.95).unwrap(), 1.0);
        assert!(matches!(beta(1.5), Err(Error::OutOfRange(_))));
        let mut prev = 0.0;
        for k in 0..=1000 {
            let b = beta(k as f64 / 1000.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn beta_derivative_is_continuous_across_flat_edges() {
        let h = 1e-6;
        let fd = |t: f64| (smooth::beta(t + h) - smooth::beta(t - h)) / (2.0 * h);
        for edge in [0.1, 0.9] {
            assert!((fd(edge - 1e-4) - fd(edge + 1e-4)).abs() < 1e-6);
        }
    }

    #[test]
    fn straight_lines() {
        let p = line([0.0, 0.0], [1.0, 0.0]);
        let mid = p.eval(0.5).unwrap();
        assert_eq!(mid.point, vec![smooth::beta(0.5), 0.0]);
        assert_eq!(p.start().point, vec![0.0, 0.0]);
        assert_eq!(p.end().point, vec![1.0, 0.0]);
        let c = line([0.3, 0.3], [0.3, 0.3]);
        assert!(c.velocity(0.5).unwrap().iter().all(|v| *v == 0.0));
        assert!(matches!(
            straight_line(plane(), "R2", &[0.0, 0.0], &[3.0, 0.0]),
            Err(Error::SegmentLeavesChart { .. })
        ));
    }

    #[test]
    fn concatenation_formula() {
        let tau = line([0.0, 0.0], [1.0, 0.0]);
        let gamma = line([1.0, 0.0], [1.0, 1.0]);
        let both = concat(&gamma, &tau).unwrap();
        assert_eq!(both.start().point, vec![0.0, 0.0]);
        assert_eq!(both.end().point, vec![1.0, 1.0]);
        let q = both.eval(0.25).unwrap().point;
        let t = tau.eval(0.5).unwrap().point;
        assert!(distance(&q, &t) < 1e-12);
        assert!(matches!(concat(&tau, &tau), Err(Error::EndpointMismatch(_))));
        Path::new(both.atlas.clone(), both.segments.clone(), both.sitting).unwrap();
    }

    #[test]
    fn constant_concatenation() {
        let x = Path::constant(plane(), "R2", &[0.1, 0.2]).unwrap();
        let xx = concat(&x, &x).unwrap();
        for k in 0..=10 {
            assert_eq!(xx.eval(k as f64 / 10.0).unwrap().point, vec![0.1, 0.2]);
        }
        let g = line([0.1, 0.2], [1.0, 1.0]);
        let gx = concat(&g, &x).unwrap();
        assert_eq!(gx.start().point, g.start().point);
        assert_eq!(gx.end().point, g.end().point);
    }

    #[test]
    fn reversal_is_an_involution() {
        let g = concat(&line([1.0, 0.0], [1.0, 1.0]), &line([0.0, 0.0], [1.0, 0.0])).unwrap();
        let r = reverse(&g);
        assert_eq!(r.start(), g.end());
        assert_eq!(r.end(), g.start());
        assert!(reverse(&r).max_distance(&g, 64).unwrap() < 1e-15);
        let x = Path::constant(plane(), "R2", &[0.0, 0.0]).unwrap();
        assert!(reverse(&x).max_distance(&x, 64).unwrap() == 0.0);
    }

    #[test]
    fn upsilon_family() {
        let curve = ExprFn::parse("[x0, x0^2]", 1, Shape::Vector(2)).unwrap();
        let zero = upsilon(plane(), "R2", &curve, 0.0).unwrap();
        assert!(zero.max_distance(&Path::constant(plane(), "R2", &[0.0, 0.0]).unwrap(), 32).unwrap() == 0.0);
        for s in [0.3, -0.5, 1.0] {
            let p = upsilon(plane(), "R2", &curve, s).unwrap();
            assert_eq!(p.start().point, vec![0.0, 0.0]);
            assert!(distance(&p.end().point, &[s, s * s]) < 1e-15);
        }
        assert!(matches!(upsilon(plane(), "R2", &curve, 3.0), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn constant_in_t_homotopy_is_thin() {
        let g = line([0.0, 0.0], [1.0, 0.5]);
        let map = g.segments[0].map.compose(&[var(0)], 2).unwrap();
        let h = Homotopy::chartwise(plane(), vec![HomotopyPiece::new(0, 0.0, 1.0, map).unwrap()], 0.09).unwrap();
        let cert = certify_thin(&h, 33, None).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.max_sigma2, 0.0);
        let c = class_of(&g);
        assert!(witness_equal(&c, &c, &h, 17).unwrap());
        let other = class_of(&line([0.0, 0.0], [1.0, 0.6]));
        assert!(matches!(witness_equal(&c, &other, &h, 17), Err(Error::BoundaryMismatch(_))));
    }

    #[test]
    fn area_sweeping_homotopy_is_refused() {
        let map = ExprFn::parse("[beta(x0), beta(x1) * sin(pi * beta(x0))]", 2, Shape::Vector(2)).unwrap();
        let h = Homotopy::chartwise(plane(), vec![HomotopyPiece::new(0, 0.0, 1.0, map).unwrap()], 0.09).unwrap();
        let cert = certify_thin(&h, 33, None).unwrap();
        assert!(!cert.certified);
        assert!(cert.max_sigma2 > 0.5);
        let [s, t] = cert.worst_point;
        assert!(s > 0.1 && s < 0.9 && t > 0.1 && t < 0.9);
    }

    #[test]
    fn reparameterization_is_thin() {
        let g = concat(&line([0.5, 0.5], [-1.0, 0.5]), &line([0.0, 0.0], [0.5, 0.5])).unwrap();
        let h = reparam_homotopy(&g).unwrap();
        let (g0, g1) = h.boundary().unwrap();
        assert!(g1.max_distance(&g, 101).unwrap() < 1e-12);
        assert!(g0.max_distance(&compose_beta(&g).unwrap(), 101).unwrap() < 1e-12);
        let cert = certify_thin(&h, 41, None).unwrap();
        assert!(cert.certified, "{cert:?}");
        assert!(cert.max_sigma2 <= 1e-9);
        assert!(witness_equal(&class_of(&g0), &class_of(&g), &h, 21).unwrap());
    }

    #[test]
    fn associativity_is_thin() {
        let a = line([0.0, 0.0], [1.0, 0.0]);
        let b = line([1.0, 0.0], [1.0, 1.0]);
        let c = line([1.0, 1.0], [-0.5, 1.5]);
        let h = associativity_homotopy(&c, &b, &a).unwrap();
        let (g0, g1) = h.boundary().unwrap();
        let left = concat(&concat(&c, &b).unwrap(), &a).unwrap();
        let right = concat(&c, &concat(&b, &a).unwrap()).unwrap();
        assert!(g0.max_distance(&left, 257).unwrap() < 1e-12);
        assert!(g1.max_distance(&right, 257).unwrap() < 1e-12);
        assert!(certify_thin(&h, 41, None).unwrap().certified);
    }

    #[test]
    fn spur_retracts_thinly() {
        let h = spur_homotopy(plane(), "R2", &[0.2, 0.1], &[-1.0, 1.3]).unwrap();
        let (g0, g1) = h.boundary().unwrap();
        let sigma = line([0.2, 0.1], [-1.0, 1.3]);
        assert!(g0.max_distance(&concat(&reverse(&sigma), &sigma).unwrap(), 129).unwrap() < 1e-12);
        assert!(g1.max_distance(&Path::constant(plane(), "R2", &[0.2, 0.1]).unwrap(), 33).unwrap() < 1e-15);
        assert!(certify_thin(&h, 41, None).unwrap().certified);
    }

    #[test]
    fn family_slices_are_paths() {
        let f = ExprFn::parse("[x0 * cos(2*pi*beta(x1)), x0 * sin(2*pi*beta(x1))]", 2, Shape::Vector(2)).unwrap();
        let fam = PathFamily::new(plane(), vec![0.2], vec![1.0], vec![(0, 0.0, 1.0, f)], FLAT_LO).unwrap();
        let p = fam.slice(&[0.5]).unwrap();
        assert!(p.is_loop());
        assert!(distance(&p.eval(0.5).unwrap().point, &[-0.5, 0.0]) < 1e-12);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn point() -> impl Strategy<Value = [f64; 2]> {
            [-1.5f64..1.5, -1.5f64..1.5]
        }

        fn close(a: &ChartPoint, b: &[f64]) -> bool {
            a.point.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn concat_runs_the_right_path_first(x in point(), y in point(), z in point(), t in 0.0f64..1.0) {
                let (tau, gamma) = (line(x, y), line(y, z));
                let p = concat(&gamma, &tau).unwrap();
                prop_assert!(close(&p.start(), &x));
                prop_assert!(close(&p.end(), &z));
                prop_assert!(close(&p.eval(0.5 * t).unwrap(), &tau.eval(t).unwrap().point));
                prop_assert!(close(&p.eval(0.5 + 0.5 * t).unwrap(), &gamma.eval(t).unwrap().point));
            }

            #[test]
            fn reverse_runs_backwards(x in point(), y in point(), t in 0.0f64..1.0) {
                let p = line(x, y);
                let r = reverse(&p);
                prop_assert!(close(&r.eval(t).unwrap(), &p.eval(1.0 - t).unwrap().point));
                prop_assert!(close(&reverse(&r).eval(t).unwrap(), &p.eval(t).unwrap().point));
            }

            #[test]
            fn lines_sit_at_their_endpoints(x in point(), y in point(), t in 0.0f64..0.1) {
                let p = line(x, y);
                prop_assert!(p.velocity(t).unwrap().iter().all(|v| v.abs() < 1e-12));
                prop_assert!(p.velocity(1.0 - t).unwrap().iter().all(|v| v.abs() < 1e-12));
            }

            #[test]
            fn reparam_homotopies_are_thin(x in point(), y in point()) {
                let h = reparam_homotopy(&line(x, y)).unwrap();
                let cert = certify_thin(&h, 9, None).unwrap();
                prop_assert!(cert.certified, "{cert:?}");
            }
        }
    }
}
