//! Cover groupoids of finite atlases and the cocycle categories over them:
//! connection cocycles (`ConnectionData`) and transport cocycles (chart-wise
//! oracles glued by group-valued `φ` on overlaps).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprFn};
use crate::geometry::{distance, Atlas, ConnectionData, Gauge, Location, Residual};
use crate::lie::{GroupElement, LieGroup};
use crate::path::{straight_line, Path, Segment};
use crate::reconstruct::{tp, ConnectionOracle, TransportOracle};

/// Default sample count per overlap region.
pub const DEFAULT_SAMPLES: usize = 64;
/// Tolerance for the cocycle and naturality laws.
pub const LAW_TOL: f64 = 1e-7;
/// Tolerance for `equivalent_objects`.
pub const EQUIVALENCE_TOL: f64 = 1e-6;
/// Homomorphism property tolerance, relative to the size of the operands.
pub const HOMOMORPHISM_TOL: f64 = 1e-9;
/// Test paths per overlap (or chart) in naturality checks.
pub const NATURALITY_PATHS: usize = 8;
/// Tolerance identifying `τ_βγ(τ_αβ x)` with `τ_αγ x` when matching triples.
const FACE_TOL: f64 = 1e-6;

/// Group-valued functions on the overlaps of an atlas.
pub trait Transitions: Send + Sync {
    fn atlas(&self) -> &Arc<Atlas>;
    fn group(&self) -> LieGroup;
    /// `g_k(x)` for `x` in source coordinates of overlap `k`.
    fn transition(&self, overlap: usize, x: &[f64]) -> Result<GroupElement>;
}

impl Transitions for ConnectionData {
    fn atlas(&self) -> &Arc<Atlas> {
        ConnectionData::atlas(self)
    }

    fn group(&self) -> LieGroup {
        ConnectionData::group(self)
    }

    fn transition(&self, overlap: usize, x: &[f64]) -> Result<GroupElement> {
        self.transition_at(overlap, x)
    }
}

/// Composable overlaps `first: α → β`, `second: β → γ` and `composite: α → γ`
/// with the sampled points of the triple overlap in `α` coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct Triple {
    pub first: usize,
    pub second: usize,
    pub composite: usize,
    pub points: Vec<Vec<f64>>,
}

/// The groupoid `Γ₁ ⇉ Γ₀` of an atlas: objects are chart points, arrows are
/// overlap identifications. Sampled once and reused by every check.
#[derive(Clone, Debug)]
pub struct CoverGroupoid {
    atlas: Arc<Atlas>,
    /// Halton samples of every overlap region.
    pub doubles: Vec<Vec<Vec<f64>>>,
    pub triples: Vec<Triple>,
    /// Worst `|τ_βγ(τ_αβ x) − τ_αγ x|` over the matched triples.
    pub face_residual: f64,
}

impl CoverGroupoid {
    pub fn new(atlas: Arc<Atlas>, samples: usize) -> Result<CoverGroupoid> {
        let doubles: Vec<_> = atlas.overlaps.iter().map(|o| o.region.sample(samples)).collect();
        let mut found: BTreeMap<(usize, usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
        let mut face_residual: f64 = 0.0;
        for (k1, o1) in atlas.overlaps.iter().enumerate() {
            for x in &doubles[k1] {
                let y = o1.apply(x)?;
                for (k2, o2) in atlas.overlaps.iter().enumerate() {
                    if o2.source != o1.target || o2.target == o1.source || !o2.region.contains(&y) {
                        continue;
                    }
                    let z = o2.apply(&y)?;
                    if let Some(k3) = atlas.find_transition(o1.source, o2.target, x, &z, FACE_TOL) {
                        face_residual = face_residual.max(distance(&atlas.overlaps[k3].apply(x)?, &z));
                        found.entry((k1, k2, k3)).or_default().push(x.clone());
                    }
                }
            }
        }
        let triples = found
            .into_iter()
            .map(|((first, second, composite), points)| Triple { first, second, composite, points })
            .collect();
        Ok(CoverGroupoid { atlas, doubles, triples, face_residual })
    }

    pub fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    /// The chart an arrow of overlap `k` starts at.
    pub fn d1(&self, k: usize) -> usize {
        self.atlas.overlaps[k].source
    }

    /// The chart an arrow of overlap `k` ends at.
    pub fn d0(&self, k: usize) -> usize {
        self.atlas.overlaps[k].target
    }
}

/// Worst residuals of the cocycle laws.
#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    /// `g_αβ(x) g_βγ(τx) = g_αγ(x)`.
    pub cocycle: Residual,
    /// True when no triple overlaps were found.
    pub cocycle_vacuous: bool,
    /// `g_αβ(x) g_βα(τx) = I`.
    pub inverse: Residual,
    pub face_residual: f64,
    pub triples: usize,
    /// Transport objects only: `oracle_β(τ∘γ) = φ(y)⁻¹ oracle_α(γ) φ(x)`.
    pub naturality: Option<Residual>,
}

impl CocycleReport {
    pub fn worst(&self) -> f64 {
        let nat = self.naturality.as_ref().map_or(0.0, |r| r.worst);
        self.cocycle.worst.max(self.inverse.worst).max(nat)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

/// Checks the cocycle and inverse laws of `t` on the sampled groupoid.
pub fn check_transitions(t: &dyn Transitions, groupoid: &CoverGroupoid) -> Result<CocycleReport> {
    let atlas = groupoid.atlas();
    let mut cocycle = Residual::default();
    for tr in &groupoid.triples {
        for x in &tr.points {
            let y = atlas.overlaps[tr.first].apply(x)?;
            let lhs = t.transition(tr.first, x)?.mul(&t.transition(tr.second, &y)?)?;
            let value = lhs.dist(&t.transition(tr.composite, x)?)?;
            cocycle.record(value, || Location {
                at: format!("{}∘{}", atlas.overlaps[tr.first].id, atlas.overlaps[tr.second].id),
                point: x.clone(),
            });
        }
    }
    let mut inverse = Residual::default();
    for (k, points) in groupoid.doubles.iter().enumerate() {
        for x in points {
            let Some(r) = atlas.reverse_overlap(k, x) else { continue };
            let y = atlas.overlaps[k].apply(x)?;
            let value = t.transition(k, x)?.mul(&t.transition(r, &y)?)?.dist(&GroupElement::identity(t.group()))?;
            inverse.record(value, || Location { at: atlas.overlaps[k].id.clone(), point: x.clone() });
        }
    }
    Ok(CocycleReport {
        cocycle,
        cocycle_vacuous: groupoid.triples.is_empty(),
        inverse,
        face_residual: groupoid.face_residual,
        triples: groupoid.triples.len(),
        naturality: None,
    })
}

/// A cocycle object for the transport category: a transport oracle on each
/// chart, glued by `φ` on overlaps.
#[derive(Clone)]
pub struct TransCocycleObject {
    atlas: Arc<Atlas>,
    group: LieGroup,
    /// Indexed by chart; each lives on a single-chart atlas.
    oracles: Vec<Arc<dyn TransportOracle>>,
    phi: Arc<dyn Transitions>,
}

impl fmt::Debug for TransCocycleObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransCocycleObject")
            .field("charts", &self.atlas.charts.len())
            .field("overlaps", &self.atlas.overlaps.len())
            .field("group", &self.group)
            .finish()
    }
}

impl Transitions for TransCocycleObject {
    fn atlas(&self) -> &Arc<Atlas> {
        &self.atlas
    }

    fn group(&self) -> LieGroup {
        self.group
    }

    fn transition(&self, overlap: usize, x: &[f64]) -> Result<GroupElement> {
        self.phi.transition(overlap, x)
    }
}

/// The single-chart atlas carrying the oracle of chart `c`.
pub fn chart_atlas(atlas: &Atlas, c: usize) -> Arc<Atlas> {
    let chart = &atlas.charts[c];
    Arc::new(Atlas::single(&chart.name, chart.domain.clone()))
}

impl TransCocycleObject {
    pub fn new(
        atlas: Arc<Atlas>,
        oracles: Vec<Arc<dyn TransportOracle>>,
        phi: Arc<dyn Transitions>,
    ) -> Result<TransCocycleObject> {
        let group = phi.group();
        if oracles.len() != atlas.charts.len() {
            return Err(Error::ShapeMismatch(format!("{} charts but {} oracles", atlas.charts.len(), oracles.len())));
        }
        if **phi.atlas() != *atlas {
            return Err(Error::ShapeMismatch("φ lives on a different atlas".into()));
        }
        for (c, o) in oracles.iter().enumerate() {
            if o.group() != group {
                return Err(Error::GroupMismatch { left: group.name(), right: o.group().name() });
            }
            if **o.atlas() != *chart_atlas(&atlas, c) {
                return Err(Error::ShapeMismatch(format!("oracle {c} is not on chart `{}`", atlas.charts[c].name)));
            }
        }
        Ok(TransCocycleObject { atlas, group, oracles, phi })
    }

    pub fn oracle(&self, chart: usize) -> &Arc<dyn TransportOracle> {
        &self.oracles[chart]
    }

    pub fn phi(&self) -> &Arc<dyn Transitions> {
        &self.phi
    }

    /// Straight test paths inside overlap `k`, in source coordinates, and their
    /// images in the target chart.
    fn overlap_paths(&self, k: usize, points: &[Vec<f64>]) -> Result<Vec<(Path, Path)>> {
        let o = &self.atlas.overlaps[k];
        let src = self.oracles[o.source].atlas();
        let dst = self.oracles[o.target].atlas();
        let mut out = Vec::new();
        for w in points.windows(2) {
            if out.len() == NATURALITY_PATHS {
                break;
            }
            if !o.region.contains_segment(&w[0], &w[1]) {
                continue;
            }
            let gamma = straight_line(src.clone(), &src.charts[0].name, &w[0], &w[1])?;
            let seg = &gamma.segments()[0];
            let map = o.map.compose(&seg.map().components()?, 1)?;
            let image =
                Path::new(dst.clone(), vec![Segment::new(0, seg.start, seg.end, map)?], gamma.sitting_radius())?;
            out.push((gamma, image));
        }
        Ok(out)
    }

    fn naturality(&self, groupoid: &CoverGroupoid) -> Result<Residual> {
        let mut res = Residual::default();
        for (k, points) in groupoid.doubles.iter().enumerate() {
            let o = &self.atlas.overlaps[k];
            for (gamma, image) in self.overlap_paths(k, points)? {
                let (x, y) = (gamma.start().point, gamma.end().point);
                let lhs = self.oracles[o.target].query(&image)?;
                let rhs = self
                    .phi
                    .transition(k, &y)?
                    .inverse()
                    .mul(&self.oracles[o.source].query(&gamma)?)?
                    .mul(&self.phi.transition(k, &x)?)?;
                res.record(lhs.dist(&rhs)?, || Location { at: o.id.clone(), point: x.clone() });
            }
        }
        Ok(res)
    }
}

/// Either kind of cocycle object. The connection side shares its
/// representation with `ConnectionData`.
#[derive(Clone, Debug)]
pub enum CocycleObject {
    Conn(ConnectionData),
    Trans(TransCocycleObject),
}

pub type ConnCocycleObject = ConnectionData;

impl CocycleObject {
    pub fn atlas(&self) -> &Arc<Atlas> {
        match self {
            CocycleObject::Conn(c) => c.atlas(),
            CocycleObject::Trans(t) => &t.atlas,
        }
    }

    pub fn group(&self) -> LieGroup {
        match self {
            CocycleObject::Conn(c) => c.group(),
            CocycleObject::Trans(t) => t.group,
        }
    }

    pub fn transitions(&self) -> &dyn Transitions {
        match self {
            CocycleObject::Conn(c) => c,
            CocycleObject::Trans(t) => t,
        }
    }
}

/// Worst residual of the cocycle law and, for transport objects, of the
/// naturality of `φ` against the chart oracles.
pub fn check_cocycle(obj: &CocycleObject, samples: usize) -> Result<CocycleReport> {
    let groupoid = CoverGroupoid::new(obj.atlas().clone(), samples)?;
    let mut report = check_transitions(obj.transitions(), &groupoid)?;
    if let CocycleObject::Trans(t) = obj {
        report.naturality = Some(t.naturality(&groupoid)?);
    }
    Ok(report)
}

/// `hol_Γ`: chart-wise transport oracles glued by the transition functions.
pub fn hol_gamma(conn: &ConnCocycleObject, steps: usize) -> Result<TransCocycleObject> {
    let atlas = conn.atlas().clone();
    let oracles = (0..atlas.charts.len())
        .map(|c| Ok(Arc::new(chart_oracle(conn, c, steps)?) as Arc<dyn TransportOracle>))
        .collect::<Result<Vec<_>>>()?;
    TransCocycleObject::new(atlas, oracles, Arc::new(conn.clone()))
}

/// A Lie group homomorphism `ρ: G → G′`, with its differential and an
/// expression-level form so that connection data can be pushed forward.
pub trait GroupHomomorphism: Send + Sync {
    fn source(&self) -> LieGroup;
    fn target(&self) -> LieGroup;
    fn apply(&self, g: &GroupElement) -> Result<GroupElement>;
    /// `dρ` on the Lie algebra, as a matrix map.
    fn differential(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `ρ` on a group-valued expression.
    fn map_group_expr(&self, e: Expr) -> Expr;
    /// `dρ` on an algebra-valued expression.
    fn map_algebra_expr(&self, e: Expr) -> Expr;
    fn name(&self) -> String;
}

#[derive(Clone, Copy, Debug)]
pub struct Identity(pub LieGroup);

impl GroupHomomorphism for Identity {
    fn source(&self) -> LieGroup {
        self.0
    }
    fn target(&self) -> LieGroup {
        self.0
    }
    fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        Ok(g.clone())
    }
    fn differential(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x.clone()
    }
    fn map_group_expr(&self, e: Expr) -> Expr {
        e
    }
    fn map_algebra_expr(&self, e: Expr) -> Expr {
        e
    }
    fn name(&self) -> String {
        format!("id_{}", self.0)
    }
}

/// `SO2 → SO3`, rotations about the third axis.
#[derive(Clone, Copy, Debug)]
pub struct AxisEmbedding;

fn embed_block(e: Expr, corner: f64) -> Expr {
    Expr::Block(Box::new([e, Expr::Zeros(2, 1), Expr::Zeros(1, 2), Expr::Matrix(vec![vec![Expr::Num(corner)]])]))
}

impl GroupHomomorphism for AxisEmbedding {
    fn source(&self) -> LieGroup {
        LieGroup::SO2
    }
    fn target(&self) -> LieGroup {
        LieGroup::SO3
    }
    fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        GroupElement::new(LieGroup::SO3, embed(g.matrix(), 1.0))
    }
    fn differential(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        embed(x, 0.0)
    }
    fn map_group_expr(&self, e: Expr) -> Expr {
        embed_block(e, 1.0)
    }
    fn map_algebra_expr(&self, e: Expr) -> Expr {
        embed_block(e, 0.0)
    }
    fn name(&self) -> String {
        "SO2→SO3".into()
    }
}

fn embed(m: &DMatrix<f64>, corner: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(3, 3);
    out.view_mut((0, 0), (2, 2)).copy_from(&m.view((0, 0), (2, 2)));
    out[(2, 2)] = corner;
    out
}

/// `det: GL(n) → GL(1)`; its differential is the trace.
#[derive(Clone, Copy, Debug)]
pub struct Determinant(pub usize);

impl GroupHomomorphism for Determinant {
    fn source(&self) -> LieGroup {
        LieGroup::GL(self.0)
    }
    fn target(&self) -> LieGroup {
        LieGroup::GL(1)
    }
    fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        GroupElement::new(LieGroup::GL(1), DMatrix::from_element(1, 1, g.matrix().determinant()))
    }
    fn differential(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x.trace())
    }
    fn map_group_expr(&self, e: Expr) -> Expr {
        Expr::Matrix(vec![vec![Expr::Det(Box::new(e))]])
    }
    fn map_algebra_expr(&self, e: Expr) -> Expr {
        Expr::Matrix(vec![vec![Expr::Trace(Box::new(e))]])
    }
    fn name(&self) -> String {
        format!("det_GL{}", self.0)
    }
}

/// Worst relative `|ρ(gh) − ρ(g)ρ(h)|` and `|ρ(I) − I|` over `pairs` seeded random pairs.
pub fn homomorphism_residual(rho: &dyn GroupHomomorphism, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = rho.apply(&GroupElement::identity(rho.source()))?;
    let mut worst = id.dist(&GroupElement::identity(rho.target()))?;
    for _ in 0..pairs {
        let g = rho.source().random_element(&mut rng, 1.0);
        let h = rho.source().random_element(&mut rng, 1.0);
        let lhs = rho.apply(&g.mul(&h)?)?;
        let rhs = rho.apply(&g)?.mul(&rho.apply(&h)?)?;
        let scale = 1.0 + lhs.matrix().norm();
        worst = worst.max(lhs.dist(&rhs)? / scale);
    }
    Ok(worst)
}

struct MappedTransitions {
    inner: Arc<dyn Transitions>,
    rho: Arc<dyn GroupHomomorphism>,
}

impl Transitions for MappedTransitions {
    fn atlas(&self) -> &Arc<Atlas> {
        self.inner.atlas()
    }
    fn group(&self) -> LieGroup {
        self.rho.target()
    }
    fn transition(&self, overlap: usize, x: &[f64]) -> Result<GroupElement> {
        self.rho.apply(&self.inner.transition(overlap, x)?)
    }
}

struct MappedOracle {
    inner: Arc<dyn TransportOracle>,
    rho: Arc<dyn GroupHomomorphism>,
}

impl TransportOracle for MappedOracle {
    fn atlas(&self) -> &Arc<Atlas> {
        self.inner.atlas()
    }
    fn group(&self) -> LieGroup {
        self.rho.target()
    }
    fn query(&self, path: &Path) -> Result<GroupElement> {
        self.rho.apply(&self.inner.query(path)?)
    }
}

/// Pushes a cocycle object forward along `ρ`, chart-wise and overlap-wise.
/// `ρ` is first checked on seeded random pairs.
pub fn induced_functor(rho: Arc<dyn GroupHomomorphism>, obj: &CocycleObject) -> Result<CocycleObject> {
    if obj.group() != rho.source() {
        return Err(Error::GroupMismatch { left: obj.group().name(), right: rho.source().name() });
    }
    let residual = homomorphism_residual(rho.as_ref(), 32, 0)?;
    if residual > HOMOMORPHISM_TOL {
        return Err(Error::NotAHomomorphism { residual });
    }
    match obj {
        CocycleObject::Conn(c) => {
            let atlas = c.atlas().clone();
            let d = atlas.dim;
            let forms = (0..atlas.charts.len())
                .map(|k| {
                    c.forms(k).iter().map(|a| ExprFn::from_expr(rho.map_algebra_expr(a.expr().clone()), d)).collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            let transitions = (0..atlas.overlaps.len())
                .map(|k| ExprFn::from_expr(rho.map_group_expr(c.transition_expr(k).expr().clone()), d))
                .collect::<Result<Vec<_>>>()?;
            Ok(CocycleObject::Conn(ConnectionData::new(atlas, rho.target(), forms, transitions)?))
        }
        CocycleObject::Trans(t) => {
            let oracles = t
                .oracles
                .iter()
                .map(|o| Arc::new(MappedOracle { inner: o.clone(), rho: rho.clone() }) as Arc<dyn TransportOracle>)
                .collect();
            let phi = Arc::new(MappedTransitions { inner: t.phi.clone(), rho: rho.clone() });
            Ok(CocycleObject::Trans(TransCocycleObject::new(t.atlas.clone(), oracles, phi)?))
        }
    }
}

/// A candidate morphism between transport cocycle objects: a group-valued
/// function `α` on each chart.
#[derive(Clone, Debug)]
pub struct CocycleMorphism {
    alpha: Gauge,
}

impl CocycleMorphism {
    pub fn new(alpha: Gauge) -> CocycleMorphism {
        CocycleMorphism { alpha }
    }

    pub fn identity(atlas: &Atlas, group: LieGroup) -> CocycleMorphism {
        CocycleMorphism { alpha: Gauge::identity(atlas, group) }
    }

    /// Constant seeded random values on each chart.
    pub fn random(atlas: &Atlas, group: LieGroup, seed: u64) -> Result<CocycleMorphism> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let charts = atlas
            .charts
            .iter()
            .map(|_| ExprFn::constant_matrix(group.random_element(&mut rng, 1.0).matrix(), atlas.dim))
            .collect();
        Ok(CocycleMorphism { alpha: Gauge::new(atlas, group, charts)? })
    }

    pub fn gauge(&self) -> &Gauge {
        &self.alpha
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// `φ_b(x) α_β(τx) = α_α(x) φ_a(x)`.
    pub square: Residual,
    /// `oracle_b(γ) α(x) = α(y) oracle_a(γ)` on straight chart paths.
    pub naturality: Residual,
}

impl EquivalenceReport {
    pub fn residual(&self) -> f64 {
        self.square.worst.max(self.naturality.worst)
    }
}

/// Whether `candidate` is a morphism `a → b` of transport cocycle objects.
pub fn equivalent_objects(
    a: &TransCocycleObject,
    b: &TransCocycleObject,
    candidate: &CocycleMorphism,
    samples: usize,
) -> Result<EquivalenceReport> {
    if a.atlas != b.atlas && *a.atlas != *b.atlas {
        return Err(Error::ShapeMismatch("objects live on different atlases".into()));
    }
    if a.group != b.group || candidate.alpha.group() != a.group {
        return Err(Error::ShapeMismatch(format!("groups {} / {} / {}", a.group, b.group, candidate.alpha.group())));
    }
    let atlas = &a.atlas;
    let alpha = &candidate.alpha;
    let mut square = Residual::default();
    for (k, o) in atlas.overlaps.iter().enumerate() {
        for x in o.region.sample(samples) {
            let y = o.apply(&x)?;
            let lhs = b.phi.transition(k, &x)?.mul(&alpha.at(o.target, &y)?)?;
            let rhs = alpha.at(o.source, &x)?.mul(&a.phi.transition(k, &x)?)?;
            square.record(lhs.dist(&rhs)?, || Location { at: o.id.clone(), point: x.clone() });
        }
    }
    let mut naturality = Residual::default();
    for (c, chart) in atlas.charts.iter().enumerate() {
        let points = chart.domain.shrink(1e-3).sample(NATURALITY_PATHS + 1);
        for w in points.windows(2) {
            let gamma = straight_line(a.oracles[c].atlas().clone(), &chart.name, &w[0], &w[1])?;
            let lhs = b.oracles[c].query(&gamma)?.mul(&alpha.at(c, &w[0])?)?;
            let rhs = alpha.at(c, &w[1])?.mul(&a.oracles[c].query(&gamma)?)?;
            naturality.record(lhs.dist(&rhs)?, || Location { at: chart.name.clone(), point: w[0].clone() });
        }
    }
    let equivalent = square.worst <= EQUIVALENCE_TOL && naturality.worst <= EQUIVALENCE_TOL;
    Ok(EquivalenceReport { equivalent, square, naturality })
}

/// `tp` of the restriction of `conn` to one chart.
pub fn chart_oracle(conn: &ConnectionData, chart: usize, steps: usize) -> Result<ConnectionOracle> {
    let local =
        ConnectionData::new(chart_atlas(conn.atlas(), chart), conn.group(), vec![conn.forms(chart).to_vec()], vec![])?;
    tp(&local, steps)
}
