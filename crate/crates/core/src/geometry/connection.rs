use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{distance, Atlas, Location};
use crate::error::{Error, Result};
use crate::expr::{build, Expr, ExprFn, Shape};
use crate::lie::{AlgebraElement, GroupElement, LieGroup};

/// Descent presentation of a principal bundle with connection.
///
/// Convention: local sections satisfy `s_β = s_α · g_αβ` on the overlap, so
/// `A_β = Ad(g_αβ⁻¹) A_α + g_αβ⁻¹ dg_αβ` (pulled back through the transition
/// map) and `g_αβ(x) g_βγ(τ_αβ x) = g_αγ(x)`.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    atlas: Arc<Atlas>,
    group: LieGroup,
    forms: Vec<Vec<ExprFn>>,
    form_partials: Vec<Vec<Vec<ExprFn>>>,
    transitions: Vec<ExprFn>,
    transition_partials: Vec<Vec<ExprFn>>,
}

impl ConnectionData {
    /// `forms[c][i]` is the `dx^i` coefficient in chart `c`; `transitions[k]`
    /// is `g` on overlap `k`, in source coordinates.
    pub fn new(atlas: Arc<Atlas>, group: LieGroup, forms: Vec<Vec<ExprFn>>, transitions: Vec<ExprFn>) -> Result<Self> {
        let n = group.matrix_dim();
        let d = atlas.dim;
        let matrix = Shape::square(n);
        if forms.len() != atlas.charts.len() {
            return Err(Error::shape(format!("{} charts but {} local forms", atlas.charts.len(), forms.len())));
        }
        for (c, f) in forms.iter().enumerate() {
            if f.len() != d || f.iter().any(|a| a.arity() != d || a.shape() != matrix) {
                return Err(Error::shape(format!(
                    "local form on chart `{}` needs {d} coefficients of shape {matrix} in {d} inputs",
                    atlas.charts[c].name
                )));
            }
        }
        if transitions.len() != atlas.overlaps.len() {
            return Err(Error::shape(format!(
                "{} overlaps but {} transition functions",
                atlas.overlaps.len(),
                transitions.len()
            )));
        }
        for (k, g) in transitions.iter().enumerate() {
            if g.arity() != d || g.shape() != matrix {
                return Err(Error::shape(format!(
                    "transition on overlap `{}` must have shape {matrix} in {d} inputs",
                    atlas.overlaps[k].id
                )));
            }
        }
        let form_partials = forms
            .iter()
            .map(|f| f.iter().map(|a| (0..d).map(|j| a.diff(j)).collect::<Result<Vec<_>>>()).collect())
            .collect::<Result<_>>()?;
        let transition_partials =
            transitions.iter().map(|g| (0..d).map(|j| g.diff(j)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(ConnectionData { atlas, group, forms, form_partials, transitions, transition_partials })
    }

    /// Identically zero connection with identity transitions.
    pub fn trivial(atlas: Arc<Atlas>, group: LieGroup) -> Self {
        let n = group.matrix_dim();
        let d = atlas.dim;
        let zero = ExprFn::from_expr(Expr::Zeros(n, n), d).expect("zeros has a shape");
        let id = ExprFn::constant_matrix(&group.identity_matrix(), d);
        let forms = vec![vec![zero; d]; atlas.charts.len()];
        let transitions = vec![id; atlas.overlaps.len()];
        ConnectionData::new(atlas, group, forms, transitions).expect("trivial data is well formed")
    }

    pub fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    pub fn group(&self) -> LieGroup {
        self.group
    }

    pub fn forms(&self, chart: usize) -> &[ExprFn] {
        &self.forms[chart]
    }

    pub fn transition_expr(&self, overlap: usize) -> &ExprFn {
        &self.transitions[overlap]
    }

    /// Coefficients `A_i(x)`.
    pub fn form_at(&self, chart: usize, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.forms[chart].iter().map(|a| a.eval_matrix(x)).collect()
    }

    /// `A_x(v) = Σ A_i(x) v^i`.
    pub fn apply_form(&self, chart: usize, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.group.matrix_dim();
        let mut out = DMatrix::zeros(n, n);
        for (a, vi) in self.forms[chart].iter().zip(v) {
            if *vi != 0.0 {
                out += a.eval_matrix(x)? * *vi;
            }
        }
        Ok(out)
    }

    pub fn transition_at(&self, overlap: usize, x: &[f64]) -> Result<GroupElement> {
        GroupElement::new(self.group, self.transitions[overlap].eval_matrix(x)?)
    }

    fn transition_partial(&self, overlap: usize, i: usize, x: &[f64]) -> Result<DMatrix<f64>> {
        self.transition_partials[overlap][i].eval_matrix(x)
    }

    /// Replace the transition function on one overlap.
    pub fn with_transition(&self, overlap: usize, g: ExprFn) -> Result<ConnectionData> {
        let mut transitions = self.transitions.clone();
        transitions[overlap] = g;
        ConnectionData::new(self.atlas.clone(), self.group, self.forms.clone(), transitions)
    }
}

/// Worst value of a sampled residual and where it occurred.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Residual {
    pub worst: f64,
    pub location: Option<Location>,
    pub checked: usize,
}

impl Residual {
    pub fn record(&mut self, value: f64, at: impl FnOnce() -> Location) {
        self.checked += 1;
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if value > self.worst || self.location.is_none() && value >= self.worst {
            self.worst = value;
            self.location = Some(at());
        }
    }

    pub fn merge(&mut self, other: Residual) {
        self.checked += other.checked;
        if let Some(loc) = other.location {
            if other.worst > self.worst || self.location.is_none() {
                self.worst = other.worst;
                self.location = Some(loc);
            }
        }
    }
}

/// Curvature components `F_ij` at a point; `values[j][i] = -values[i][j]`.
#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub chart: String,
    pub point: Vec<f64>,
    pub values: Vec<Vec<AlgebraElement>>,
}

impl CurvatureSample {
    pub fn max_norm(&self) -> f64 {
        self.values.iter().flatten().map(AlgebraElement::norm).fold(0.0, f64::max)
    }
}

/// `F_ij = ∂_i A_j − ∂_j A_i + [A_i, A_j]` from exact derivatives.
pub fn curvature_at(conn: &ConnectionData, chart: &str, point: &[f64]) -> Result<CurvatureSample> {
    let c = conn.atlas.chart_index(chart)?;
    conn.atlas.check_point(c, point)?;
    curvature_at_index(conn, c, point)
}

fn curvature_at_index(conn: &ConnectionData, c: usize, x: &[f64]) -> Result<CurvatureSample> {
    let d = conn.atlas.dim;
    let g = conn.group;
    let a = conn.form_at(c, x)?;
    let mut values = vec![vec![AlgebraElement::zero(g); d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let di_aj = conn.form_partials[c][j][i].eval_matrix(x)?;
            let dj_ai = conn.form_partials[c][i][j].eval_matrix(x)?;
            let f = di_aj - dj_ai + &a[i] * &a[j] - &a[j] * &a[i];
            values[j][i] = AlgebraElement::from_raw(g, -&f);
            values[i][j] = AlgebraElement::from_raw(g, f);
        }
    }
    Ok(CurvatureSample { chart: conn.atlas.charts[c].name.clone(), point: x.to_vec(), values })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub flat: bool,
    pub tolerance: f64,
    pub curvature: Residual,
}

/// Whether `max ‖F_ij‖_F ≤ tol` over `samples` Halton points per chart.
pub fn is_flat(conn: &ConnectionData, samples: usize, tol: f64) -> Result<FlatnessReport> {
    let mut curvature = Residual::default();
    for (c, chart) in conn.atlas.charts.iter().enumerate() {
        let points = chart.domain.sample(samples.max(1));
        let norms = points
            .par_iter()
            .map(|x| curvature_at_index(conn, c, x).map(|s| s.max_norm()))
            .collect::<Result<Vec<_>>>()?;
        for (x, v) in points.into_iter().zip(norms) {
            curvature.record(v, || Location { at: chart.name.clone(), point: x });
        }
    }
    Ok(FlatnessReport { flat: curvature.worst <= tol, tolerance: tol, curvature })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentReport {
    /// `g_αβ g_βγ = g_αγ` on triple overlaps.
    pub cocycle: Residual,
    /// True when the cover has no triple overlaps at the sampled points.
    pub cocycle_vacuous: bool,
    /// `g_αβ(x) g_βα(τx) = I`.
    pub inverse: Residual,
    /// `A_β = Ad(g⁻¹)A_α + g⁻¹dg` after pulling back through the transition map.
    pub compatibility: Residual,
    /// `τ_βα ∘ τ_αβ = id`.
    pub maps: Residual,
    pub samples_per_overlap: usize,
}

enum Check {
    Triple(f64),
    Inverse(f64),
    Compat(f64),
    Map(f64),
}

fn overlap_checks(conn: &ConnectionData, k: usize, x: &[f64]) -> Result<Vec<Check>> {
    let atlas = &conn.atlas;
    let o = &atlas.overlaps[k];
    let y = o.apply(x)?;
    let g = conn.transition_at(k, x)?;
    let mut out = Vec::new();

    match atlas.reverse_overlap(k, x) {
        Some(r) => {
            let back = atlas.overlaps[r].apply(&y)?;
            out.push(Check::Map(distance(&back, x)));
            let h = conn.transition_at(r, &y)?;
            out.push(Check::Inverse(g.mul_unchecked(&h).dist_unchecked(&GroupElement::identity(conn.group))));
        }
        None => out.push(Check::Map(f64::INFINITY)),
    }

    for (m, om) in atlas.overlaps.iter().enumerate() {
        if om.source != o.target || om.target == o.source || !om.region.contains(&y) {
            continue;
        }
        let z = om.apply(&y)?;
        if let Some(n) = atlas.find_transition(o.source, om.target, x, &z, 1e-6) {
            let lhs = g.mul_unchecked(&conn.transition_at(m, &y)?);
            out.push(Check::Triple(lhs.dist_unchecked(&conn.transition_at(n, x)?)));
        }
    }

    let d = atlas.dim;
    let jac = o.jacobian(x)?;
    let a_src = conn.form_at(o.source, x)?;
    let a_dst = conn.form_at(o.target, &y)?;
    let gi = g.inverse();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let mut pulled = DMatrix::zeros(g.matrix().nrows(), g.matrix().ncols());
        for (kk, ak) in a_dst.iter().enumerate() {
            pulled += ak * jac[kk][i];
        }
        let expected = gi.matrix() * &a_src[i] * g.matrix() + gi.matrix() * conn.transition_partial(k, i, x)?;
        worst = worst.max((pulled - expected).norm());
    }
    out.push(Check::Compat(worst));
    Ok(out)
}

/// Samples every overlap and reports the worst residual of each descent law.
pub fn validate_descent(conn: &ConnectionData, samples: usize) -> Result<DescentReport> {
    let mut report = DescentReport {
        cocycle: Residual::default(),
        cocycle_vacuous: true,
        inverse: Residual::default(),
        compatibility: Residual::default(),
        maps: Residual::default(),
        samples_per_overlap: samples,
    };
    for (k, o) in conn.atlas.overlaps.iter().enumerate() {
        let points = o.region.sample(samples);
        let checks = points.par_iter().map(|x| overlap_checks(conn, k, x)).collect::<Result<Vec<_>>>()?;
        for (x, cs) in points.iter().zip(checks) {
            let loc = || Location { at: o.id.clone(), point: x.clone() };
            for c in cs {
                match c {
                    Check::Triple(v) => {
                        report.cocycle_vacuous = false;
                        report.cocycle.record(v, loc);
                    }
                    Check::Inverse(v) => report.inverse.record(v, loc),
                    Check::Compat(v) => report.compatibility.record(v, loc),
                    Check::Map(v) => report.maps.record(v, loc),
                }
            }
        }
    }
    Ok(report)
}

/// A chart-wise group-valued function `h_α`.
#[derive(Clone, Debug)]
pub struct Gauge {
    group: LieGroup,
    charts: Vec<ExprFn>,
}

impl Gauge {
    pub fn new(atlas: &Atlas, group: LieGroup, charts: Vec<ExprFn>) -> Result<Gauge> {
        let shape = Shape::square(group.matrix_dim());
        if charts.len() != atlas.charts.len() || charts.iter().any(|h| h.arity() != atlas.dim || h.shape() != shape) {
            return Err(Error::shape(format!("a gauge needs one {shape} function per chart")));
        }
        Ok(Gauge { group, charts })
    }

    pub fn identity(atlas: &Atlas, group: LieGroup) -> Gauge {
        let id = ExprFn::constant_matrix(&group.identity_matrix(), atlas.dim);
        Gauge { group, charts: vec![id; atlas.charts.len()] }
    }

    pub fn group(&self) -> LieGroup {
        self.group
    }

    pub fn expr(&self, chart: usize) -> &ExprFn {
        &self.charts[chart]
    }

    pub fn at(&self, chart: usize, x: &[f64]) -> Result<GroupElement> {
        GroupElement::new(self.group, self.charts[chart].eval_matrix(x)?)
    }
}

/// `A' = h A h⁻¹ − dh h⁻¹` and `g'_αβ = h_α g_αβ (h_β ∘ τ)⁻¹`, so that
/// transport changes by `T' = h(y) T h(x)⁻¹`.
pub fn gauge_transform(conn: &ConnectionData, gauge: &Gauge) -> Result<ConnectionData> {
    if gauge.group != conn.group {
        return Err(Error::GroupMismatch { left: conn.group.name(), right: gauge.group.name() });
    }
    let atlas = &conn.atlas;
    let d = atlas.dim;
    let mut forms = Vec::with_capacity(atlas.charts.len());
    for c in 0..atlas.charts.len() {
        let h = gauge.charts[c].expr().clone();
        let hinv = build::inv(h.clone());
        let mut chart_forms = Vec::with_capacity(d);
        for i in 0..d {
            let a = conn.forms[c][i].expr().clone();
            let dh = gauge.charts[c].diff(i)?.into_expr();
            let e = build::sub(build::mul(build::mul(h.clone(), a), hinv.clone()), build::mul(dh, hinv.clone()));
            chart_forms.push(ExprFn::from_expr(e, d)?);
        }
        forms.push(chart_forms);
    }
    let mut transitions = Vec::with_capacity(atlas.overlaps.len());
    for (k, o) in atlas.overlaps.iter().enumerate() {
        let h_src = gauge.charts[o.source].expr().clone();
        let h_dst = gauge.charts[o.target].compose(&o.map.components()?, d)?.into_expr();
        let e = build::mul(build::mul(h_src, conn.transitions[k].expr().clone()), build::inv(h_dst));
        transitions.push(ExprFn::from_expr(e, d)?);
    }
    ConnectionData::new(atlas.clone(), conn.group, forms, transitions)
}
