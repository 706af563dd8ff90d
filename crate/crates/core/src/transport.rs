//! Parallel transport along represented paths.
//!
//! Convention: in the trivialization of chart `α` the lift of `γ` is
//! `s_α(γ(t)) · g(t)` with `g' = −A_{γ(t)}(γ'(t)) g` and `g(0) = I`. At a chart
//! change from `α` to `β` at `x`, `g ↦ g_αβ(x)⁻¹ g`. The resulting element maps
//! the source fibre coordinate to the target fibre coordinate by left
//! multiplication, so `T(γτ) = T(γ) T(τ)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprFn, Shape};
use crate::geometry::{Atlas, ConnectionData, Gauge};
use crate::lie::{self, AlgebraElement, GroupElement};
use crate::path::{ChartPoint, Path, PathFamily, Segment, CONTINUITY_TOL};

/// Minimum number of steps per segment.
pub const MIN_STEPS: usize = 16;
/// Step-halving estimates above this attach a warning.
pub const WARN_ESTIMATE: f64 = 1e-8;
/// Step-halving estimates above this are an error.
pub const MAX_ESTIMATE: f64 = 1e-4;

/// A transport result expressed in the source and target trivializations.
#[derive(Clone, Debug)]
pub struct TransportMap {
    pub source: ChartPoint,
    pub target: ChartPoint,
    /// `T` with target coordinate `= T · source coordinate`. Taken from the
    /// finer of the two step-halving runs.
    pub element: GroupElement,
    /// `dist(g_N, g_2N)`.
    pub error_estimate: f64,
    pub warning: Option<String>,
    /// Accumulated rotation angle for circle groups, not reduced mod 2π.
    pub unwrapped_angle: Option<f64>,
    pub steps: usize,
}

struct Lift {
    element: GroupElement,
    angle: Option<f64>,
}

fn bracket(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Truncated `dexp⁻¹_u(v) = v − ½[u, v] + (1/12)[u, [u, v]]`.
fn dexpinv(u: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let uv = bracket(u, v);
    v - &uv * 0.5 + bracket(u, &uv) / 12.0
}

/// One RKMK4 step for `y' = M(t) y` given `M` at the start, midpoint and end.
fn rkmk4_step(h: f64, m0: &DMatrix<f64>, mh: &DMatrix<f64>, m1: &DMatrix<f64>) -> DMatrix<f64> {
    let k1 = m0 * h;
    let k2 = dexpinv(&(&k1 * 0.5), mh) * h;
    let k3 = dexpinv(&(&k2 * 0.5), mh) * h;
    let k4 = dexpinv(&k3, m1) * h;
    (k1 + (k2 + k3) * 2.0 + k4) / 6.0
}

fn generator(conn: &ConnectionData, seg: &Segment, t: f64) -> Result<DMatrix<f64>> {
    let v = seg.velocity(t)?;
    let n = conn.group().matrix_dim();
    if v.iter().all(|x| *x == 0.0) {
        return Ok(DMatrix::zeros(n, n));
    }
    let x = seg.point(t)?;
    conn.atlas().check_point(seg.chart, &x)?;
    Ok(-conn.apply_form(seg.chart, &x, &v)?)
}

/// The transition from `path`'s segment `k − 1` to segment `k`, if the chart changes.
fn handoff(conn: &ConnectionData, prev: &Segment, next: &Segment) -> Result<Option<GroupElement>> {
    if prev.chart == next.chart {
        return Ok(None);
    }
    let x = prev.point(prev.end)?;
    let y = next.point(next.start)?;
    let atlas = conn.atlas();
    let k = atlas.find_transition(prev.chart, next.chart, &x, &y, CONTINUITY_TOL).ok_or_else(|| {
        Error::InvalidPath(format!(
            "no overlap from `{}` to `{}` identifies {x:?} with {y:?}",
            atlas.charts[prev.chart].name, atlas.charts[next.chart].name
        ))
    })?;
    Ok(Some(conn.transition_at(k, &x)?))
}

fn integrate(conn: &ConnectionData, path: &Path, steps: usize) -> Result<Lift> {
    let group = conn.group();
    let circle = group.is_circle();
    let mut y = GroupElement::identity(group);
    let mut angle = 0.0;
    let segments = path.segments();
    for (k, seg) in segments.iter().enumerate() {
        if k > 0 {
            if let Some(g) = handoff(conn, &segments[k - 1], seg)? {
                if circle {
                    angle -= g.angle().expect("circle element");
                }
                y = g.inverse().mul_unchecked(&y);
            }
        }
        let h = (seg.end - seg.start) / steps as f64;
        let mut m0 = generator(conn, seg, seg.start)?;
        for i in 0..steps {
            let t = seg.start + i as f64 * h;
            let t1 = if i + 1 == steps { seg.end } else { t + h };
            let mh = generator(conn, seg, t + 0.5 * h)?;
            let m1 = generator(conn, seg, t1)?;
            let theta = rkmk4_step(h, &m0, &mh, &m1);
            if circle {
                angle += theta[(1, 0)];
            }
            y = lie::exp(&AlgebraElement::from_raw(group, theta)).mul_unchecked(&y);
            m0 = m1;
        }
    }
    Ok(Lift { element: y, angle: circle.then_some(angle) })
}

fn check_path(conn: &ConnectionData, path: &Path, steps: usize) -> Result<()> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidArgument(format!("steps must be at least {MIN_STEPS}, got {steps}")));
    }
    if !Arc::ptr_eq(conn.atlas(), path.atlas()) && **conn.atlas() != **path.atlas() {
        return Err(Error::InvalidPath("path and connection live on different atlases".into()));
    }
    Ok(())
}

/// Transport without the step-halving estimate.
pub fn transport_element(conn: &ConnectionData, path: &Path, steps: usize) -> Result<GroupElement> {
    check_path(conn, path, steps)?;
    Ok(integrate(conn, path, steps)?.element)
}

/// Parallel transport along `path` with `steps` RKMK4 steps per segment and a
/// step-halving error estimate.
pub fn transport(conn: &ConnectionData, path: &Path, steps: usize) -> Result<TransportMap> {
    check_path(conn, path, steps)?;
    let coarse = integrate(conn, path, steps)?;
    let fine = integrate(conn, path, 2 * steps)?;
    let estimate = coarse.element.dist_unchecked(&fine.element);
    if estimate > MAX_ESTIMATE {
        return Err(Error::StepTooCoarse { estimate, limit: MAX_ESTIMATE });
    }
    let warning = (estimate > WARN_ESTIMATE)
        .then(|| format!("step-halving estimate {estimate:.3e} exceeds {WARN_ESTIMATE:e}; increase steps"));
    Ok(TransportMap {
        source: path.start(),
        target: path.end(),
        element: fine.element,
        error_estimate: estimate,
        warning,
        unwrapped_angle: fine.angle,
        steps,
    })
}

/// Holonomy of a loop, expressed in the trivialization of the start chart.
pub fn holonomy(conn: &ConnectionData, path: &Path, steps: usize) -> Result<TransportMap> {
    let (start, end) = (path.start(), path.end());
    if !path.is_loop() {
        return Err(Error::NotALoop {
            start: format!("{} {:?}", start.chart, start.point),
            end: format!("{} {:?}", end.chart, end.point),
        });
    }
    let mut map = transport(conn, path, steps)?;
    if start.chart != end.chart {
        let atlas = conn.atlas();
        let (a, b) = (atlas.chart_index(&end.chart)?, atlas.chart_index(&start.chart)?);
        let k = atlas
            .find_transition(a, b, &end.point, &start.point, CONTINUITY_TOL)
            .expect("is_loop found an identifying overlap");
        let g = conn.transition_at(k, &end.point)?;
        map.element = g.inverse().mul(&map.element)?;
        if let Some(angle) = map.unwrapped_angle.as_mut() {
            *angle -= g.angle().expect("circle element");
        }
        map.target = start.clone();
    }
    Ok(map)
}

/// Transports over a tensor grid of a path family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyTable {
    pub params: Vec<Vec<f64>>,
    #[serde(skip)]
    pub elements: Vec<GroupElement>,
    /// Algebra coordinates of the logarithm of each entry; for circle groups
    /// the unwrapped angle.
    pub log_coords: Vec<Vec<f64>>,
    pub error_estimates: Vec<f64>,
    /// Largest `‖Δ²L‖ / h²` along any grid axis, if the logarithm is defined
    /// everywhere.
    pub smoothness: Option<f64>,
}

pub fn family_transport(conn: &ConnectionData, fam: &PathFamily, grid: usize, steps: usize) -> Result<FamilyTable> {
    let k = fam.params();
    let grid = grid.max(2);
    let total = grid.pow(k as u32);
    let point = |mut idx: usize| -> Vec<f64> {
        (0..k)
            .map(|j| {
                let i = idx % grid;
                idx /= grid;
                fam.lower()[j] + (fam.upper()[j] - fam.lower()[j]) * i as f64 / (grid - 1) as f64
            })
            .collect()
    };
    let params: Vec<Vec<f64>> = (0..total).map(point).collect();
    let maps = params.par_iter().map(|u| transport(conn, &fam.slice(u)?, steps)).collect::<Result<Vec<_>>>()?;
    let logs: Vec<Option<Vec<f64>>> = maps
        .iter()
        .map(|m| match m.unwrapped_angle {
            Some(a) => Some(vec![a]),
            None => lie::log(&m.element).ok().map(|l| l.coords()),
        })
        .collect();
    let smoothness = if logs.iter().all(Option::is_some) {
        let logs: Vec<&Vec<f64>> = logs.iter().map(|l| l.as_ref().expect("checked")).collect();
        let mut c: f64 = 0.0;
        for j in 0..k {
            let h = (fam.upper()[j] - fam.lower()[j]) / (grid - 1) as f64;
            let stride = grid.pow(j as u32);
            for idx in 0..total {
                let i = (idx / stride) % grid;
                if i == 0 || i + 1 == grid || h == 0.0 {
                    continue;
                }
                let (a, b, d) = (logs[idx - stride], logs[idx], logs[idx + stride]);
                let second = a.iter().zip(b).zip(d).map(|((a, b), d)| (a - 2.0 * b + d).powi(2)).sum::<f64>().sqrt();
                c = c.max(second / (h * h));
            }
        }
        Some(c)
    } else {
        None
    };
    Ok(FamilyTable {
        params,
        error_estimates: maps.iter().map(|m| m.error_estimate).collect(),
        elements: maps.into_iter().map(|m| m.element).collect(),
        log_coords: logs.into_iter().map(|l| l.unwrap_or_default()).collect(),
        smoothness,
    })
}

/// A smooth map between atlases, given chart by chart.
#[derive(Clone, Debug)]
pub struct PathMap {
    source: Arc<Atlas>,
    target: Arc<Atlas>,
    /// Per source chart: the target chart and a map `R^{dim N} → R^{dim M}`.
    charts: Vec<(usize, ExprFn)>,
}

impl PathMap {
    pub fn new(source: Arc<Atlas>, target: Arc<Atlas>, charts: Vec<(String, ExprFn)>) -> Result<PathMap> {
        if charts.len() != source.charts.len() {
            return Err(Error::shape(format!("{} source charts but {} chart maps", source.charts.len(), charts.len())));
        }
        let charts = charts
            .into_iter()
            .map(|(name, f)| {
                if f.arity() != source.dim || f.shape() != Shape::Vector(target.dim) {
                    return Err(Error::shape(format!(
                        "chart map into `{name}` must take {} inputs and return R^{}",
                        source.dim, target.dim
                    )));
                }
                Ok((target.chart_index(&name)?, f))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathMap { source, target, charts })
    }

    pub fn identity(atlas: Arc<Atlas>) -> PathMap {
        let d = atlas.dim;
        let id = ExprFn::from_expr(Expr::Vector((0..d).map(Expr::Var).collect()), d).expect("identity map");
        let charts = (0..atlas.charts.len()).map(|c| (c, id.clone())).collect();
        PathMap { source: atlas.clone(), target: atlas, charts }
    }

    pub fn source(&self) -> &Arc<Atlas> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Atlas> {
        &self.target
    }

    pub fn apply_point(&self, chart: usize, x: &[f64]) -> Result<ChartPoint> {
        let (c, f) = &self.charts[chart];
        Ok(ChartPoint {
            chart: self.target.charts[*c].name.clone(),
            point: f.eval_vector(x)?.iter().copied().collect(),
        })
    }

    /// `m ∘ γ`.
    pub fn apply(&self, path: &Path) -> Result<Path> {
        if !Arc::ptr_eq(&self.source, path.atlas()) && *self.source != **path.atlas() {
            return Err(Error::InvalidPath("path does not live on the map's source atlas".into()));
        }
        let segments = path
            .segments()
            .iter()
            .map(|s| {
                let (c, f) = &self.charts[s.chart];
                Segment::new(*c, s.start, s.end, f.compose(&s.map().components()?, 1)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Path::new(self.target.clone(), segments, path.sitting_radius())
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &PathMap) -> Result<PathMap> {
        if !Arc::ptr_eq(&inner.target, &self.source) && *inner.target != *self.source {
            return Err(Error::InvalidPath("maps are not composable".into()));
        }
        let charts = inner
            .charts
            .iter()
            .map(|(c, g)| {
                let (c2, f) = &self.charts[*c];
                Ok((*c2, f.compose(&g.components()?, inner.source.dim)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathMap { source: inner.source.clone(), target: self.target.clone(), charts })
    }
}

/// `(m*T)(γ) = T(m ∘ γ)`.
pub fn pullback_transport(m: &PathMap, conn: &ConnectionData, path: &Path, steps: usize) -> Result<TransportMap> {
    transport(conn, &m.apply(path)?, steps)
}

/// A bundle morphism `f(s_α(x) · g) = s'(m(x)) · h_α(x) · g` covering a base map `m`.
#[derive(Clone, Debug)]
pub struct BundleMorphism {
    pub base: PathMap,
    pub gauge: Gauge,
}

impl BundleMorphism {
    /// Gauge transformation over the identity base map.
    pub fn gauge(atlas: Arc<Atlas>, gauge: Gauge) -> BundleMorphism {
        BundleMorphism { base: PathMap::identity(atlas), gauge }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NaturalityReport {
    pub residual: f64,
    pub error_estimate: f64,
}

/// `dist(h(y) · T_A(γ), T_{A'}(m∘γ) · h(x))`.
pub fn check_naturality(
    f: &BundleMorphism,
    conn: &ConnectionData,
    conn2: &ConnectionData,
    path: &Path,
    steps: usize,
) -> Result<NaturalityReport> {
    conn.group().check(&f.gauge.group())?;
    conn2.group().check(&f.gauge.group())?;
    let t = transport(conn, path, steps)?;
    let t2 = pullback_transport(&f.base, conn2, path, steps)?;
    let segs = path.segments();
    let (first, last) = (&segs[0], &segs[segs.len() - 1]);
    let hx = f.gauge.at(first.chart, &first.point(0.0)?)?;
    let hy = f.gauge.at(last.chart, &last.point(1.0)?)?;
    let lhs = hy.mul(&t.element)?;
    let rhs = t2.element.mul(&hx)?;
    Ok(NaturalityReport { residual: lhs.dist(&rhs)?, error_estimate: t.error_estimate.max(t2.error_estimate) })
}

#[cfg(test)]
mod tests;
