//! Transport oracles and the inverse direction: recovering local connection
//! forms and transition cocycles from black-box transport.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cocycle::Transitions;
use crate::config::Access;
use crate::error::{Error, Result};
use crate::geometry::{halton, Atlas, ConnectionData, Location, Residual};
use crate::lie::{AlgebraElement, GroupElement, LieGroup};
use crate::path::{concat, reverse, straight_line, ChartPoint, Path, PathFamily};
use crate::transport::{transport_element, MIN_STEPS};

/// Functoriality tolerance for oracle spot checks.
pub const FUNCTORIALITY_TOL: f64 = 1e-7;
/// Refinement ladder used by reconstruction reports.
pub const RICHARDSON_H: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// A black box assigning a group element to every path of an atlas.
pub trait TransportOracle: Send + Sync {
    fn atlas(&self) -> &Arc<Atlas>;
    fn group(&self) -> LieGroup;
    fn query(&self, path: &Path) -> Result<GroupElement>;
}

/// An oracle backed by integrating a connection.
#[derive(Clone, Debug)]
pub struct ConnectionOracle {
    conn: ConnectionData,
    steps: usize,
}

/// `tp(conn)`: answers queries with `transport_element(conn, ·, steps)`.
pub fn tp(conn: &ConnectionData, steps: usize) -> Result<ConnectionOracle> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidArgument(format!("steps must be at least {MIN_STEPS}, got {steps}")));
    }
    Ok(ConnectionOracle { conn: conn.clone(), steps })
}

impl ConnectionOracle {
    pub fn connection(&self) -> &ConnectionData {
        &self.conn
    }
}

impl TransportOracle for ConnectionOracle {
    fn atlas(&self) -> &Arc<Atlas> {
        self.conn.atlas()
    }

    fn group(&self) -> LieGroup {
        self.conn.group()
    }

    fn query(&self, path: &Path) -> Result<GroupElement> {
        transport_element(&self.conn, path, self.steps)
    }
}

/// Right-multiplies every answer of `inner` by a fixed `kick`. Not functorial
/// unless `kick` is the identity; used to exercise the spot checks.
#[derive(Clone, Debug)]
pub struct PerturbedOracle<O> {
    pub inner: O,
    pub kick: GroupElement,
}

impl<O: TransportOracle> TransportOracle for PerturbedOracle<O> {
    fn atlas(&self) -> &Arc<Atlas> {
        self.inner.atlas()
    }

    fn group(&self) -> LieGroup {
        self.inner.group()
    }

    fn query(&self, path: &Path) -> Result<GroupElement> {
        self.inner.query(path)?.mul(&self.kick)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpotCheck {
    /// `dist(oracle(γτ), oracle(γ) oracle(τ))`.
    pub functoriality: Residual,
    /// `dist(oracle(const), I)`.
    pub constant: Residual,
    pub passed: bool,
}

/// Chart-local functoriality and identity checks on `pairs` composable pairs
/// of straight segments per chart. Points come from the Halton sequence
/// starting at index `seed + 1`.
pub fn spot_check(oracle: &dyn TransportOracle, pairs: usize, seed: u64) -> Result<SpotCheck> {
    let atlas = oracle.atlas().clone();
    let d = atlas.dim;
    let id = GroupElement::identity(oracle.group());
    let mut functoriality = Residual::default();
    let mut constant = Residual::default();
    for chart in &atlas.charts {
        let inner = chart.domain.shrink(1e-6);
        let point = |i: usize| -> Vec<f64> {
            halton(seed as usize + 1 + i, d)
                .iter()
                .zip(inner.lower.iter().zip(&inner.upper))
                .map(|(u, (a, b))| a + u * (b - a))
                .collect()
        };
        for i in 0..pairs {
            let (p, q, r) = (point(3 * i), point(3 * i + 1), point(3 * i + 2));
            let (Ok(tau), Ok(gamma)) =
                (straight_line(atlas.clone(), &chart.name, &p, &q), straight_line(atlas.clone(), &chart.name, &q, &r))
            else {
                continue;
            };
            let both = oracle.query(&concat(&gamma, &tau)?)?;
            let product = oracle.query(&gamma)?.mul(&oracle.query(&tau)?)?;
            functoriality.record(both.dist(&product)?, || Location { at: chart.name.clone(), point: p.clone() });
            let c = oracle.query(&Path::constant(atlas.clone(), &chart.name, &p)?)?;
            constant.record(c.dist(&id)?, || Location { at: chart.name.clone(), point: p.clone() });
        }
    }
    let passed = functoriality.worst <= FUNCTORIALITY_TOL && constant.worst <= FUNCTORIALITY_TOL;
    Ok(SpotCheck { functoriality, constant, passed })
}

/// `F(y, z) = oracle(σ(basepoint, y)) · z`.
pub fn section_family(
    oracle: &dyn TransportOracle,
    chart: &str,
    z: &GroupElement,
    basepoint: &[f64],
    y: &[f64],
) -> Result<GroupElement> {
    let sigma = straight_line(oracle.atlas().clone(), chart, basepoint, y)?;
    oracle.query(&sigma)?.mul(z)
}

/// Pointwise values of a connection form recovered from an oracle.
pub struct ReconstructedConnection<'a> {
    oracle: &'a dyn TransportOracle,
    chart: String,
    h: f64,
}

/// Recovers the local form on `chart` from the derivative of the section family.
pub fn reconstruct_connection<'a>(
    oracle: &'a dyn TransportOracle,
    chart: &str,
    h: f64,
) -> Result<ReconstructedConnection<'a>> {
    if !(h > 1e-6 && h < 1e-1) {
        return Err(Error::InvalidArgument(format!("h must lie in (1e-6, 1e-1), got {h}")));
    }
    oracle.atlas().chart_index(chart)?;
    Ok(ReconstructedConnection { oracle, chart: chart.to_string(), h })
}

impl ReconstructedConnection<'_> {
    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `A(point)(v)`. The frame `y ↦ F(y, I)` starts at the identity with
    /// derivative `−A(v)`; its central difference quotient over `point ± h v`
    /// is projected onto the Lie algebra.
    pub fn sample(&self, point: &[f64], v: &[f64]) -> Result<AlgebraElement> {
        let group = self.oracle.group();
        let id = GroupElement::identity(group);
        let shifted = |s: f64| -> Vec<f64> { point.iter().zip(v).map(|(p, w)| p + s * self.h * w).collect() };
        let plus = section_family(self.oracle, &self.chart, &id, point, &shifted(1.0))?;
        let minus = section_family(self.oracle, &self.chart, &id, point, &shifted(-1.0))?;
        let quotient: DMatrix<f64> = (plus.matrix() - minus.matrix()) / (2.0 * self.h);
        AlgebraElement::new(group, -group.project_algebra(&quotient))
    }

    /// `|A(u + v) − A(u) − A(v)|`.
    pub fn linearity_residual(&self, point: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let sum: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
        let lhs = self.sample(point, &sum)?;
        let rhs = self.sample(point, u)?.add(&self.sample(point, v)?)?;
        Ok((lhs.matrix() - rhs.matrix()).norm())
    }
}

/// Sample `(point, unit direction)` pairs inside a chart, kept at distance
/// `margin` from its boundary.
pub fn sample_pairs(atlas: &Atlas, chart: usize, samples: usize, margin: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = atlas.dim;
    let inner = atlas.charts[chart].domain.shrink(margin);
    let mut out = Vec::with_capacity(samples);
    let mut index = 1;
    while out.len() < samples && index < 1000 * (samples + 1) {
        let u = halton(index, 2 * d);
        index += 1;
        let p: Vec<f64> =
            u[..d].iter().zip(inner.lower.iter().zip(&inner.upper)).map(|(t, (a, b))| a + t * (b - a)).collect();
        if !inner.contains_within(&p, 0.0) {
            continue;
        }
        let mut v: Vec<f64> = u[d..].iter().map(|t| 2.0 * t - 1.0).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push((p, v));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartError {
    pub chart: String,
    pub max_error: f64,
    pub worst: Option<Location>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RichardsonRow {
    pub h: f64,
    pub max_error: f64,
    pub charts: Vec<ChartError>,
}

/// Reconstruction error of `tp(conn)` against the forms of `conn`.
#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub samples: usize,
    pub rows: Vec<RichardsonRow>,
    /// `error(h_{k+1}) / error(h_k)`; about `(h_{k+1}/h_k)²` in the asymptotic range.
    pub ratios: Vec<f64>,
}

/// Reconstructs every chart of `conn` from `tp(conn, steps)` at each scale in
/// `hs`, comparing at `samples` `(point, direction)` pairs per chart.
pub fn roundtrip_check(conn: &ConnectionData, hs: &[f64], samples: usize, steps: usize) -> Result<RoundtripReport> {
    let oracle = tp(conn, steps)?;
    let atlas = conn.atlas();
    let margin = hs.iter().cloned().fold(0.0, f64::max) * 1.01 + 1e-9;
    let pairs: Vec<_> = (0..atlas.charts.len()).map(|c| sample_pairs(atlas, c, samples, margin)).collect();
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let mut charts = Vec::with_capacity(atlas.charts.len());
        for (c, chart) in atlas.charts.iter().enumerate() {
            let rec = reconstruct_connection(&oracle, &chart.name, h)?;
            let mut res = Residual::default();
            for (p, v) in &pairs[c] {
                let got = rec.sample(p, v)?;
                let want = conn.apply_form(c, p, v)?;
                res.record((got.matrix() - want).norm(), || Location { at: chart.name.clone(), point: p.clone() });
            }
            charts.push(ChartError { chart: chart.name.clone(), max_error: res.worst, worst: res.location });
        }
        let max_error = charts.iter().map(|c| c.max_error).fold(0.0, f64::max);
        rows.push(RichardsonRow { h, max_error, charts });
    }
    let ratios = rows.windows(2).map(|w| w[1].max_error / w[0].max_error).collect();
    Ok(RoundtripReport { samples, rows, ratios })
}

/// Central difference `(oracle(p(s₀ + ds)) − oracle(p(s₀ − ds))) / 2ds` of a
/// one-parameter path family, as a matrix.
pub fn family_derivative(
    oracle: &dyn TransportOracle,
    family: &dyn Fn(f64) -> Result<Path>,
    s0: f64,
    ds: f64,
) -> Result<DMatrix<f64>> {
    let plus = oracle.query(&family(s0 + ds)?)?;
    let minus = oracle.query(&family(s0 - ds)?)?;
    Ok((plus.matrix() - minus.matrix()) / (2.0 * ds))
}

/// `|d/ds oracle(p(s))|` at the parameter of a one-parameter `PathFamily`
/// whose slice there is a constant loop.
pub fn constant_loop_derivative(oracle: &dyn TransportOracle, family: &PathFamily, s0: f64, ds: f64) -> Result<f64> {
    if family.params() != 1 {
        return Err(Error::InvalidArgument("expected a one-parameter family".into()));
    }
    let base = family.slice(&[s0])?;
    if !base.is_loop() {
        let label = |p: ChartPoint| format!("{} {:?}", p.chart, p.point);
        return Err(Error::NotALoop { start: label(base.start()), end: label(base.end()) });
    }
    Ok(family_derivative(oracle, &|s| family.slice(&[s]), s0, ds)?.norm())
}

/// A transition cocycle read off an oracle through access paths.
///
/// With `γ_α(x) = σ_α(a_α, x) · acc_α` running from the base point to `x` in
/// chart `α`, the value on an overlap `α → β` is
/// `g̃_αβ(x) = oracle(γ_β(τx)⁻¹ · γ_α(x))⁻¹`, where the loop switches charts at
/// `x`. For an oracle arising from a connection this equals
/// `h_α(x)⁻¹ g_αβ(x) h_β(τx)` with `h_α(x) = oracle(γ_α(x))`.
pub struct ExtractedCocycle<'a> {
    oracle: &'a dyn TransportOracle,
    access: &'a Access,
    /// Oracle answers keyed by overlap and the bit pattern of `x`.
    memo: Mutex<HashMap<(usize, Vec<u64>), GroupElement>>,
}

pub fn extract_cocycle<'a>(oracle: &'a dyn TransportOracle, access: &'a Access) -> Result<ExtractedCocycle<'a>> {
    let atlas = oracle.atlas();
    if let Some(chart) = atlas.charts.get(access.paths.len()) {
        return Err(Error::MissingAccessPath(chart.name.clone()));
    }
    for (c, p) in access.paths.iter().enumerate() {
        if p.end().chart != atlas.charts[c].name || p.start() != access.basepoint {
            return Err(Error::MissingAccessPath(atlas.charts[c].name.clone()));
        }
    }
    Ok(ExtractedCocycle { oracle, access, memo: Mutex::new(HashMap::new()) })
}

impl ExtractedCocycle<'_> {
    /// `γ_α(x)`: base point → anchor of `chart` → `x`.
    pub fn frame_path(&self, chart: usize, x: &[f64]) -> Result<Path> {
        let atlas = self.oracle.atlas();
        atlas.check_point(chart, x)?;
        let acc = &self.access.paths[chart];
        let sigma = straight_line(atlas.clone(), &atlas.charts[chart].name, &acc.end().point, x)?;
        concat(&sigma, acc)
    }

    /// `h_α(x) = oracle(γ_α(x))`.
    pub fn frame(&self, chart: usize, x: &[f64]) -> Result<GroupElement> {
        self.oracle.query(&self.frame_path(chart, x)?)
    }

    /// Sampled values on every overlap.
    pub fn sample(&self, samples: usize) -> Result<Vec<OverlapTable>> {
        let atlas = self.oracle.atlas();
        atlas
            .overlaps
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let points = o.region.sample(samples);
                let values =
                    points.iter().map(|x| Ok(rows(self.transition(k, x)?.matrix()))).collect::<Result<Vec<_>>>()?;
                Ok(OverlapTable { id: o.id.clone(), points, values })
            })
            .collect()
    }
}

impl Transitions for ExtractedCocycle<'_> {
    fn atlas(&self) -> &Arc<Atlas> {
        self.oracle.atlas()
    }

    fn group(&self) -> LieGroup {
        self.oracle.group()
    }

    fn transition(&self, overlap: usize, x: &[f64]) -> Result<GroupElement> {
        let key = (overlap, x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        if let Some(g) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(g.clone());
        }
        let atlas = self.oracle.atlas();
        let o = &atlas.overlaps[overlap];
        let y = o.apply(x)?;
        let there = self.frame_path(o.target, &y)?;
        let here = self.frame_path(o.source, x)?;
        let g = self.oracle.query(&concat(&reverse(&there), &here)?)?.inverse();
        self.memo.lock().expect("memo lock").insert(key, g.clone());
        Ok(g)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Sampled values of a transition function on one overlap.
#[derive(Clone, Debug, Serialize)]
pub struct OverlapTable {
    pub id: String,
    pub points: Vec<Vec<f64>>,
    /// Row-major matrices.
    pub values: Vec<Vec<Vec<f64>>>,
}

/// Worst `dist(h_α⁻¹ g_αβ h_β, g̃_αβ)` with `h` from the extracted frames.
pub fn cohomology_residual(
    extracted: &ExtractedCocycle<'_>,
    reference: &dyn Transitions,
    samples: usize,
) -> Result<Residual> {
    let atlas = extracted.atlas().clone();
    let mut res = Residual::default();
    for (k, o) in atlas.overlaps.iter().enumerate() {
        for x in o.region.sample(samples) {
            let y = o.apply(&x)?;
            let conj = extracted
                .frame(o.source, &x)?
                .inverse()
                .mul(&reference.transition(k, &x)?)?
                .mul(&extracted.frame(o.target, &y)?)?;
            res.record(conj.dist(&extracted.transition(k, &x)?)?, || Location { at: o.id.clone(), point: x.clone() });
        }
    }
    Ok(res)
}
