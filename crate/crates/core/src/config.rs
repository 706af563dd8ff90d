//! TOML fixture files: atlas, connection, named paths, families, homotopies,
//! gauges and access paths. See `docs/fixtures.md` for the schema.

use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{ExprFn, Shape};
use crate::geometry::{Annulus, Atlas, Chart, ConnectionData, Gauge, Overlap, Region};
use crate::lie::LieGroup;
use crate::path::{
    associativity_homotopy, concat, reparam_homotopy, reverse, spur_homotopy, straight_line, upsilon, ChartPoint,
    Homotopy, HomotopyPiece, Path, PathFamily, Segment,
};

const DEFAULT_SITTING: f64 = 0.1;

/// One expression, or a list of scalar components forming a vector.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ExprSrc {
    One(String),
    Many(Vec<String>),
}

impl ExprSrc {
    fn text(&self) -> String {
        match self {
            ExprSrc::One(s) => s.clone(),
            ExprSrc::Many(v) => format!("[{}]", v.join(", ")),
        }
    }

    fn parse(&self, cx: &Consts, arity: usize, shape: Shape, at: &str) -> Result<ExprFn> {
        cx.parse(&self.text(), arity, shape).map_err(|e| e.at(at))
    }
}

/// Named scalar constants available to every expression in a fixture.
pub type Consts = BTreeMap<String, f64>;

trait ParseConst {
    fn parse(&self, src: &str, arity: usize, shape: Shape) -> Result<ExprFn>;
}

impl ParseConst for Consts {
    fn parse(&self, src: &str, arity: usize, shape: Shape) -> Result<ExprFn> {
        let f = ExprFn::parse_with(src, arity, self)?;
        if f.shape() != shape {
            return Err(Error::shape(format!("expression has shape {} but {shape} was declared", f.shape())));
        }
        Ok(f)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureSpec {
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    constants: Consts,
    atlas: AtlasSpec,
    #[serde(default)]
    connection: Option<ConnectionSpec>,
    #[serde(default)]
    paths: BTreeMap<String, PathSpec>,
    #[serde(default)]
    curves: BTreeMap<String, CurveSpec>,
    #[serde(default)]
    families: BTreeMap<String, FamilySpec>,
    #[serde(default)]
    homotopies: BTreeMap<String, HomotopySpec>,
    #[serde(default)]
    gauges: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    access: Option<AccessSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtlasSpec {
    dim: usize,
    charts: Vec<ChartSpec>,
    #[serde(default)]
    overlaps: Vec<OverlapSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartSpec {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnulusSpec {
    center: Vec<f64>,
    r_min: f64,
    r_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverlapSpec {
    id: String,
    source: String,
    target: String,
    #[serde(default)]
    lower: Option<Vec<f64>>,
    #[serde(default)]
    upper: Option<Vec<f64>>,
    #[serde(default)]
    annulus: Option<AnnulusSpec>,
    map: ExprSrc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionSpec {
    group: String,
    #[serde(default)]
    forms: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    transitions: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSpec {
    chart: String,
    map: ExprSrc,
    #[serde(default)]
    start: Option<f64>,
    #[serde(default)]
    end: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSpec {
    chart: String,
    point: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineSpec {
    chart: String,
    from: Vec<f64>,
    to: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UpsilonSpec {
    curve: String,
    s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSpec {
    #[serde(default)]
    sitting: Option<f64>,
    #[serde(default)]
    segments: Option<Vec<SegmentSpec>>,
    #[serde(default)]
    line: Option<LineSpec>,
    #[serde(default)]
    constant: Option<PointSpec>,
    #[serde(default)]
    upsilon: Option<UpsilonSpec>,
    /// `[γ, τ, …]` is `γ(τ(…))`: the last path runs first.
    #[serde(default)]
    concat: Option<Vec<String>>,
    #[serde(default)]
    reverse: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSpec {
    chart: String,
    map: ExprSrc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default)]
    sitting: Option<f64>,
    segments: Vec<SegmentSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceSpec {
    chart: String,
    start: f64,
    end: f64,
    map: ExprSrc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum HomotopySpec {
    Reparam { path: String },
    Associativity { paths: [String; 3] },
    Spur { chart: String, from: Vec<f64>, to: Vec<f64> },
    Chartwise { collar: f64, pieces: Vec<PieceSpec> },
    Master { master: String, phi: String, collar: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessSpec {
    basepoint: PointSpec,
    paths: BTreeMap<String, String>,
}

/// Paths from a common base point into every chart, used to compare
/// trivializations.
#[derive(Clone, Debug)]
pub struct Access {
    pub basepoint: ChartPoint,
    /// Indexed by chart; each path ends inside its chart.
    pub paths: Vec<Path>,
}

/// A loaded fixture.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub description: Option<String>,
    pub atlas: Arc<Atlas>,
    pub connection: Option<ConnectionData>,
    pub paths: BTreeMap<String, Path>,
    pub curves: BTreeMap<String, (String, ExprFn)>,
    pub families: BTreeMap<String, PathFamily>,
    pub homotopies: BTreeMap<String, Homotopy>,
    pub gauges: BTreeMap<String, Gauge>,
    pub access: Option<Access>,
}

impl Fixture {
    pub fn load(file: &FsPath) -> Result<Fixture> {
        let src = std::fs::read_to_string(file).map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
        let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Fixture::from_toml(&name, &src).map_err(|e| match e {
            Error::Config { path, message } => Error::Config { path: format!("{}: {path}", file.display()), message },
            other => other,
        })
    }

    pub fn from_toml(name: &str, src: &str) -> Result<Fixture> {
        Fixture::from_toml_with(name, src, &Consts::new())
    }

    /// Loads with some declared `[constants]` replaced.
    pub fn from_toml_with(name: &str, src: &str, overrides: &Consts) -> Result<Fixture> {
        let spec: FixtureSpec =
            toml::from_str(src).map_err(|e| Error::config("", e.message()).with_span(src, e.span()))?;
        build(name, spec, overrides)
    }

    pub fn connection(&self) -> Result<&ConnectionData> {
        self.connection.as_ref().ok_or_else(|| Error::config("connection", "fixture has no connection"))
    }

    pub fn path(&self, name: &str) -> Result<&Path> {
        self.paths.get(name).ok_or_else(|| Error::Unknown { kind: "path", name: name.into() })
    }

    pub fn family(&self, name: &str) -> Result<&PathFamily> {
        self.families.get(name).ok_or_else(|| Error::Unknown { kind: "family", name: name.into() })
    }

    pub fn homotopy(&self, name: &str) -> Result<&Homotopy> {
        self.homotopies.get(name).ok_or_else(|| Error::Unknown { kind: "homotopy", name: name.into() })
    }

    pub fn gauge(&self, name: &str) -> Result<&Gauge> {
        self.gauges.get(name).ok_or_else(|| Error::Unknown { kind: "gauge", name: name.into() })
    }

    pub fn access(&self) -> Result<&Access> {
        self.access.as_ref().ok_or_else(|| Error::config("access", "fixture declares no access paths"))
    }
}

fn build(name: &str, spec: FixtureSpec, overrides: &Consts) -> Result<Fixture> {
    let mut consts = spec.constants.clone();
    for (k, v) in overrides {
        if !consts.contains_key(k) {
            return Err(Error::config(format!("constants.{k}"), "override of an undeclared constant"));
        }
        consts.insert(k.clone(), *v);
    }
    for k in consts.keys() {
        let reserved = k == "pi" || k.strip_prefix('x').is_some_and(|d| d.parse::<usize>().is_ok());
        if reserved || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::config(format!("constants.{k}"), "not a usable constant name"));
        }
    }
    let cx = &consts;
    let atlas = Arc::new(build_atlas(cx, &spec.atlas)?);
    let connection = spec.connection.as_ref().map(|c| build_connection(cx, &atlas, c)).transpose()?;
    let mut curves = BTreeMap::new();
    for (key, c) in &spec.curves {
        let at = format!("curves.{key}");
        atlas.chart_index(&c.chart).map_err(|e| e.at(&format!("{at}.chart")))?;
        let f = c.map.parse(cx, 1, Shape::Vector(atlas.dim), &format!("{at}.map"))?;
        curves.insert(key.clone(), (c.chart.clone(), f));
    }
    let mut resolver = PathResolver { cx, atlas: &atlas, specs: &spec.paths, curves: &curves, done: BTreeMap::new() };
    for key in spec.paths.keys() {
        resolver.resolve(key, &mut Vec::new())?;
    }
    let paths = resolver.done;
    let mut families = BTreeMap::new();
    for (key, f) in &spec.families {
        families.insert(key.clone(), build_family(cx, &atlas, f).map_err(|e| e.at(&format!("families.{key}")))?);
    }
    let mut homotopies = BTreeMap::new();
    for (key, h) in &spec.homotopies {
        let at = format!("homotopies.{key}");
        homotopies.insert(key.clone(), build_homotopy(cx, &atlas, &paths, h).map_err(|e| e.at(&at))?);
    }
    let mut gauges = BTreeMap::new();
    for (key, g) in &spec.gauges {
        let at = format!("gauges.{key}");
        let group = connection
            .as_ref()
            .map(|c| c.group())
            .ok_or_else(|| Error::config(&at, "gauges need a connection to fix the group"))?;
        gauges.insert(key.clone(), build_gauge(cx, &atlas, group, g).map_err(|e| e.at(&at))?);
    }
    let access =
        spec.access.as_ref().map(|a| build_access(&atlas, &paths, a).map_err(|e| e.at("access"))).transpose()?;
    Ok(Fixture {
        name: name.to_string(),
        description: spec.description,
        atlas,
        connection,
        paths,
        curves,
        families,
        homotopies,
        gauges,
        access,
    })
}

fn build_atlas(cx: &Consts, spec: &AtlasSpec) -> Result<Atlas> {
    let d = spec.dim;
    let mut charts = Vec::new();
    for (i, c) in spec.charts.iter().enumerate() {
        let at = format!("atlas.charts[{i}]");
        if c.lower.len() != d {
            return Err(Error::config(format!("{at}.lower"), format!("expected {d} bounds")));
        }
        let domain = Region::new(c.lower.clone(), c.upper.clone()).map_err(|e| e.at(&at))?;
        charts.push(Chart { name: c.name.clone(), domain });
    }
    let index = |name: &str, at: String| {
        charts.iter().position(|c| c.name == name).ok_or_else(|| Error::config(at, format!("unknown chart `{name}`")))
    };
    let mut overlaps = Vec::new();
    for (i, o) in spec.overlaps.iter().enumerate() {
        let at = format!("atlas.overlaps[{i}]");
        let source = index(&o.source, format!("{at}.source"))?;
        let target = index(&o.target, format!("{at}.target"))?;
        let lower = o.lower.clone().unwrap_or_else(|| charts[source].domain.lower.clone());
        let upper = o.upper.clone().unwrap_or_else(|| charts[source].domain.upper.clone());
        let mut region = Region::new(lower, upper).map_err(|e| e.at(&at))?;
        if let Some(a) = &o.annulus {
            let annulus = Annulus { center: a.center.clone(), r_min: a.r_min, r_max: a.r_max };
            region = region.with_annulus(annulus).map_err(|e| e.at(&format!("{at}.annulus")))?;
        }
        let map = o.map.parse(cx, d, Shape::Vector(d), &format!("{at}.map"))?;
        overlaps.push(Overlap::new(o.id.clone(), source, target, region, map).map_err(|e| e.at(&at))?);
    }
    Atlas::new(d, charts, overlaps).map_err(|e| e.at("atlas"))
}

fn build_connection(cx: &Consts, atlas: &Arc<Atlas>, spec: &ConnectionSpec) -> Result<ConnectionData> {
    let group: LieGroup = spec.group.parse().map_err(|e: Error| e.at("connection.group"))?;
    let d = atlas.dim;
    let n = group.matrix_dim();
    let mut forms = Vec::new();
    for c in &atlas.charts {
        let at = format!("connection.forms.{}", c.name);
        let src = spec.forms.get(&c.name).ok_or_else(|| Error::config(&at, "missing local form"))?;
        if src.len() != d {
            return Err(Error::config(&at, format!("expected {d} coefficients, found {}", src.len())));
        }
        let chart_forms = src
            .iter()
            .enumerate()
            .map(|(i, s)| cx.parse(s, d, Shape::square(n)).map_err(|e| e.at(&format!("{at}[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        forms.push(chart_forms);
    }
    for key in spec.forms.keys() {
        atlas.chart_index(key).map_err(|e| e.at("connection.forms"))?;
    }
    let mut transitions = Vec::new();
    for o in &atlas.overlaps {
        let at = format!("connection.transitions.{}", o.id);
        let src = spec.transitions.get(&o.id).ok_or_else(|| Error::config(&at, "missing transition function"))?;
        transitions.push(cx.parse(src, d, Shape::square(n)).map_err(|e| e.at(&at))?);
    }
    for key in spec.transitions.keys() {
        atlas.overlap_index(key).map_err(|e| e.at("connection.transitions"))?;
    }
    ConnectionData::new(atlas.clone(), group, forms, transitions).map_err(|e| e.at("connection"))
}

fn build_segments(
    cx: &Consts,
    atlas: &Atlas,
    specs: &[SegmentSpec],
    arity: usize,
    at: &str,
) -> Result<Vec<(usize, f64, f64, ExprFn)>> {
    let n = specs.len();
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let at = format!("{at}.segments[{i}]");
            let chart = atlas.chart_index(&s.chart).map_err(|e| e.at(&format!("{at}.chart")))?;
            let start = s.start.unwrap_or(i as f64 / n as f64);
            let end = s.end.unwrap_or((i + 1) as f64 / n as f64);
            let map = s.map.parse(cx, arity, Shape::Vector(atlas.dim), &format!("{at}.map"))?;
            Ok((chart, start, end, map))
        })
        .collect()
}

struct PathResolver<'a> {
    cx: &'a Consts,
    atlas: &'a Arc<Atlas>,
    specs: &'a BTreeMap<String, PathSpec>,
    curves: &'a BTreeMap<String, (String, ExprFn)>,
    done: BTreeMap<String, Path>,
}

impl PathResolver<'_> {
    fn resolve(&mut self, key: &str, stack: &mut Vec<String>) -> Result<Path> {
        if let Some(p) = self.done.get(key) {
            return Ok(p.clone());
        }
        let at = format!("paths.{key}");
        if stack.iter().any(|k| k == key) {
            return Err(Error::config(at, format!("cyclic definition via {}", stack.join(" -> "))));
        }
        let spec = self.specs.get(key).ok_or_else(|| Error::config(&at, "unknown path"))?;
        stack.push(key.to_string());
        let path = self.build(spec, &at, stack)?;
        stack.pop();
        self.done.insert(key.to_string(), path.clone());
        Ok(path)
    }

    fn build(&mut self, spec: &PathSpec, at: &str, stack: &mut Vec<String>) -> Result<Path> {
        let kinds = [
            spec.segments.is_some(),
            spec.line.is_some(),
            spec.constant.is_some(),
            spec.upsilon.is_some(),
            spec.concat.is_some(),
            spec.reverse.is_some(),
        ];
        if kinds.iter().filter(|k| **k).count() != 1 {
            return Err(Error::config(at, "give exactly one of segments, line, constant, upsilon, concat, reverse"));
        }
        let atlas = self.atlas.clone();
        let wrap = |e: Error| e.at(at);
        if let Some(segs) = &spec.segments {
            let segments = build_segments(self.cx, &atlas, segs, 1, at)?
                .into_iter()
                .map(|(c, a, b, f)| Segment::new(c, a, b, f))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?;
            return Path::new(atlas, segments, spec.sitting.unwrap_or(DEFAULT_SITTING)).map_err(wrap);
        }
        if let Some(l) = &spec.line {
            return straight_line(atlas, &l.chart, &l.from, &l.to).map_err(wrap);
        }
        if let Some(c) = &spec.constant {
            return Path::constant(atlas, &c.chart, &c.point).map_err(wrap);
        }
        if let Some(u) = &spec.upsilon {
            let (chart, curve) = self
                .curves
                .get(&u.curve)
                .ok_or_else(|| Error::config(format!("{at}.upsilon.curve"), format!("unknown curve `{}`", u.curve)))?;
            return upsilon(atlas, chart, curve, u.s).map_err(wrap);
        }
        if let Some(parts) = &spec.concat {
            if parts.is_empty() {
                return Err(Error::config(format!("{at}.concat"), "empty list"));
            }
            let resolved = parts.iter().map(|p| self.resolve(p, stack)).collect::<Result<Vec<_>>>()?;
            let mut acc = resolved[resolved.len() - 1].clone();
            for p in resolved[..resolved.len() - 1].iter().rev() {
                acc = concat(p, &acc).map_err(wrap)?;
            }
            return Ok(acc);
        }
        let name = spec.reverse.as_ref().expect("one kind is set");
        Ok(reverse(&self.resolve(name, stack)?))
    }
}

fn build_family(cx: &Consts, atlas: &Arc<Atlas>, spec: &FamilySpec) -> Result<PathFamily> {
    let k = spec.lower.len();
    let segs = build_segments(cx, atlas, &spec.segments, k + 1, "")?;
    PathFamily::new(
        atlas.clone(),
        spec.lower.clone(),
        spec.upper.clone(),
        segs,
        spec.sitting.unwrap_or(DEFAULT_SITTING),
    )
}

fn build_homotopy(
    cx: &Consts,
    atlas: &Arc<Atlas>,
    paths: &BTreeMap<String, Path>,
    spec: &HomotopySpec,
) -> Result<Homotopy> {
    let get = |name: &str| paths.get(name).ok_or_else(|| Error::config("", format!("unknown path `{name}`")));
    match spec {
        HomotopySpec::Reparam { path } => reparam_homotopy(get(path)?),
        HomotopySpec::Associativity { paths: [g, t, r] } => associativity_homotopy(get(g)?, get(t)?, get(r)?),
        HomotopySpec::Spur { chart, from, to } => spur_homotopy(atlas.clone(), chart, from, to),
        HomotopySpec::Chartwise { collar, pieces } => {
            let pieces = pieces
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let at = format!("pieces[{i}]");
                    let c = atlas.chart_index(&p.chart).map_err(|e| e.at(&at))?;
                    let map = p.map.parse(cx, 2, Shape::Vector(atlas.dim), &format!("{at}.map"))?;
                    HomotopyPiece::new(c, p.start, p.end, map).map_err(|e| e.at(&at))
                })
                .collect::<Result<Vec<_>>>()?;
            Homotopy::chartwise(atlas.clone(), pieces, *collar)
        }
        HomotopySpec::Master { master, phi, collar } => {
            let phi = cx.parse(phi, 2, Shape::Scalar).map_err(|e| e.at("phi"))?;
            Homotopy::reparam(get(master)?.clone(), phi, *collar)
        }
    }
}

fn build_gauge(cx: &Consts, atlas: &Atlas, group: LieGroup, spec: &BTreeMap<String, String>) -> Result<Gauge> {
    let n = group.matrix_dim();
    let charts = atlas
        .charts
        .iter()
        .map(|c| {
            let src = spec.get(&c.name).ok_or_else(|| Error::config(&c.name, "missing gauge function"))?;
            cx.parse(src, atlas.dim, Shape::square(n)).map_err(|e| e.at(&c.name))
        })
        .collect::<Result<Vec<_>>>()?;
    Gauge::new(atlas, group, charts)
}

fn build_access(atlas: &Arc<Atlas>, paths: &BTreeMap<String, Path>, spec: &AccessSpec) -> Result<Access> {
    let c = atlas.chart_index(&spec.basepoint.chart).map_err(|e| e.at("basepoint.chart"))?;
    atlas.check_point(c, &spec.basepoint.point).map_err(|e| e.at("basepoint.point"))?;
    let basepoint = ChartPoint { chart: spec.basepoint.chart.clone(), point: spec.basepoint.point.clone() };
    let mut out = Vec::new();
    for chart in &atlas.charts {
        let at = format!("paths.{}", chart.name);
        let name = spec.paths.get(&chart.name).ok_or_else(|| Error::config(&at, "missing access path"))?;
        let p = paths.get(name).ok_or_else(|| Error::config(&at, format!("unknown path `{name}`")))?;
        if !crate::path::same_point(atlas, &p.start(), &basepoint, crate::path::CONTINUITY_TOL) {
            return Err(Error::config(&at, "access path does not start at the base point"));
        }
        if p.end().chart != chart.name {
            return Err(Error::config(&at, format!("access path must end in chart `{}`", chart.name)));
        }
        out.push(p.clone());
    }
    Ok(Access { basepoint, paths: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
[atlas]
dim = 2
charts = [{ name = "R2", lower = [-2, -2], upper = [2, 2] }]

[connection]
group = "U1"
forms = { R2 = ["zeros(2, 2)", "0.5 * [[0, -1], [1, 0]]"] }

[paths.up]
line = { chart = "R2", from = [0, 0], to = [0, 1] }

[paths.over]
segments = [{ chart = "R2", map = ["beta(x0)", "1"] }]
sitting = 0.1

[paths.both]
concat = ["over", "up"]

[paths.back]
reverse = "both"
"#;

    #[test]
    fn loads_and_composes() {
        let f = Fixture::from_toml("mini", MINI).unwrap();
        assert_eq!(f.connection().unwrap().group(), LieGroup::U1);
        let both = f.path("both").unwrap();
        assert_eq!(both.start().point, vec![0.0, 0.0]);
        assert_eq!(both.end().point, vec![1.0, 1.0]);
        assert_eq!(f.path("back").unwrap().start(), both.end());
    }

    fn err(src: &str) -> String {
        match Fixture::from_toml("bad", src) {
            Err(Error::Config { path, message }) => format!("{path}: {message}"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_schema_path() {
        let e = err(&MINI.replace("\"0.5 * [[0, -1], [1, 0]]\"", "\"0.5 * [[0, -1], [1, 0]\""));
        assert!(e.starts_with("connection.forms.R2[1]"), "{e}");
        let e = err(&MINI.replace("to = [0, 1]", "to = [0, 3]"));
        assert!(e.starts_with("paths.up"), "{e}");
        let e = err(&MINI.replace("concat = [\"over\", \"up\"]", "concat = [\"up\", \"over\"]"));
        assert!(e.starts_with("paths.both"), "{e}");
        let e = err(&MINI.replace("group = \"U1\"", "group = \"SO5\""));
        assert!(e.starts_with("connection.group"), "{e}");
        let e = err(&MINI.replace("[paths.up]", "[paths.up]\nbogus = 1"));
        assert!(e.contains("bogus"), "{e}");
        let e = err(&MINI.replace("reverse = \"both\"", "reverse = \"back\""));
        assert!(e.contains("cyclic"), "{e}");
    }
}
