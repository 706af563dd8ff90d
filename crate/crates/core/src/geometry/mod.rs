//! Chart-presented manifolds and connection descent data.

mod connection;
mod sampling;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ExprFn, Shape};

pub use connection::{
    curvature_at, gauge_transform, is_flat, validate_descent, ConnectionData, CurvatureSample, DescentReport,
    FlatnessReport, Gauge, Residual,
};
pub use sampling::{halton, radical_inverse};

/// Points within this distance of a region count as inside it.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// Optional radial constraint `r_min ≤ |x − center| ≤ r_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Annulus {
    pub center: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
}

/// An axis-aligned box, optionally intersected with an annulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub annulus: Option<Annulus>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Region> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::shape("box bounds must have equal, non-zero length"));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::shape(format!("empty box {lower:?} .. {upper:?}")));
        }
        Ok(Region { lower, upper, annulus: None })
    }

    pub fn with_annulus(mut self, annulus: Annulus) -> Result<Region> {
        if annulus.center.len() != self.dim() || !(0.0 <= annulus.r_min && annulus.r_min < annulus.r_max) {
            return Err(Error::shape("annulus needs a center of the box dimension and 0 <= r_min < r_max"));
        }
        self.annulus = Some(annulus);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_within(x, CONTAINMENT_TOL)
    }

    pub fn contains_within(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let in_box = x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| *v >= a - tol && *v <= b + tol);
        in_box
            && self.annulus.as_ref().is_none_or(|an| {
                let r = x.iter().zip(&an.center).map(|(v, c)| (v - c).powi(2)).sum::<f64>().sqrt();
                r >= an.r_min - tol && r <= an.r_max + tol
            })
    }

    /// Whether the straight segment from `x` to `y` stays inside. Exact for
    /// boxes; for annuli the radial distance is checked at 64 interior points.
    pub fn contains_segment(&self, x: &[f64], y: &[f64]) -> bool {
        if !self.contains(x) || !self.contains(y) {
            return false;
        }
        self.annulus.is_none()
            || (1..64).all(|k| {
                let s = k as f64 / 64.0;
                let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + s * (b - a)).collect();
                self.contains(&p)
            })
    }

    /// The box shrunk by `margin` on every side (annulus tightened likewise).
    pub fn shrink(&self, margin: f64) -> Region {
        Region {
            lower: self.lower.iter().map(|v| v + margin).collect(),
            upper: self.upper.iter().map(|v| v - margin).collect(),
            annulus: self.annulus.as_ref().map(|an| Annulus {
                center: an.center.clone(),
                r_min: an.r_min + margin,
                r_max: an.r_max - margin,
            }),
        }
    }

    /// The first `n` points of the Halton sequence (index ≥ 1) mapped into the
    /// box that also satisfy the annulus constraint.
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(n);
        let mut index = 1;
        while out.len() < n && index < 1000 * (n + 1) {
            let u = halton(index, d);
            index += 1;
            let p: Vec<f64> =
                u.iter().zip(self.lower.iter().zip(&self.upper)).map(|(t, (a, b))| a + t * (b - a)).collect();
            if self.contains_within(&p, 0.0) {
                out.push(p);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub domain: Region,
}

/// A directed overlap: `region` is given in source coordinates and `map`
/// sends source coordinates to target coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlap {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub region: Region,
    pub map: ExprFn,
    jacobian: Vec<ExprFn>,
}

impl Overlap {
    pub fn new(id: impl Into<String>, source: usize, target: usize, region: Region, map: ExprFn) -> Result<Overlap> {
        let dim = region.dim();
        if map.arity() != dim || map.shape() != Shape::Vector(dim) {
            return Err(Error::shape(format!("transition map must be R^{dim} -> R^{dim}, got {}", map.shape())));
        }
        let jacobian = (0..dim).map(|i| map.diff(i)).collect::<Result<_>>()?;
        Ok(Overlap { id: id.into(), source, target, region, map, jacobian })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.map.eval_vector(x)?.iter().copied().collect())
    }

    /// `J[k][i] = ∂(map_k)/∂x_i`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let cols = self.jacobian.iter().map(|d| d.eval_vector(x)).collect::<Result<Vec<_>>>()?;
        let n = cols.len();
        Ok((0..n).map(|k| (0..n).map(|i| cols[i][k]).collect()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atlas {
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub overlaps: Vec<Overlap>,
}

/// Worst residual of the atlas invariants.
#[derive(Clone, Debug, Serialize)]
pub struct AtlasReport {
    pub inverse_residual: Residual,
    pub containment_violations: Vec<Location>,
}

/// A named chart or overlap together with a point in its coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Location {
    pub at: String,
    pub point: Vec<f64>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.at, self.point)
    }
}

impl Atlas {
    pub fn new(dim: usize, charts: Vec<Chart>, overlaps: Vec<Overlap>) -> Result<Atlas> {
        for (k, c) in charts.iter().enumerate() {
            if c.domain.dim() != dim {
                return Err(Error::shape(format!("chart `{}` has dimension {}", c.name, c.domain.dim())));
            }
            if charts[..k].iter().any(|o| o.name == c.name) {
                return Err(Error::shape(format!("duplicate chart `{}`", c.name)));
            }
        }
        for (k, o) in overlaps.iter().enumerate() {
            if o.source >= charts.len() || o.target >= charts.len() || o.source == o.target {
                return Err(Error::shape(format!("overlap `{}` must join two distinct charts", o.id)));
            }
            if o.region.dim() != dim {
                return Err(Error::shape(format!("overlap `{}` has dimension {}", o.id, o.region.dim())));
            }
            if overlaps[..k].iter().any(|p| p.id == o.id) {
                return Err(Error::shape(format!("duplicate overlap `{}`", o.id)));
            }
        }
        Ok(Atlas { dim, charts, overlaps })
    }

    /// A single chart covering `domain`.
    pub fn single(name: &str, domain: Region) -> Atlas {
        Atlas { dim: domain.dim(), charts: vec![Chart { name: name.into(), domain }], overlaps: vec![] }
    }

    pub fn chart_index(&self, name: &str) -> Result<usize> {
        self.charts
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Unknown { kind: "chart", name: name.to_string() })
    }

    pub fn chart(&self, index: usize) -> &Chart {
        &self.charts[index]
    }

    pub fn overlap_index(&self, id: &str) -> Result<usize> {
        self.overlaps
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| Error::Unknown { kind: "overlap", name: id.to_string() })
    }

    pub fn check_point(&self, chart: usize, x: &[f64]) -> Result<()> {
        if self.charts[chart].domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfChart { chart: self.charts[chart].name.clone(), point: x.to_vec() })
        }
    }

    /// Overlaps from `source` to `target` whose region contains `x`.
    pub fn overlaps_at<'a>(&'a self, source: usize, target: usize, x: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
        self.overlaps
            .iter()
            .enumerate()
            .filter(move |(_, o)| o.source == source && o.target == target && o.region.contains(x))
            .map(|(k, _)| k)
    }

    /// The overlap that identifies `x` in `source` with `y` in `target`.
    pub fn find_transition(&self, source: usize, target: usize, x: &[f64], y: &[f64], tol: f64) -> Option<usize> {
        self.overlaps_at(source, target, x)
            .find(|&k| self.overlaps[k].apply(x).is_ok_and(|mapped| distance(&mapped, y) <= tol))
    }

    /// The reverse overlap of `k` at the source point `x`.
    pub fn reverse_overlap(&self, k: usize, x: &[f64]) -> Option<usize> {
        let o = &self.overlaps[k];
        let y = o.apply(x).ok()?;
        self.find_transition(o.target, o.source, &y, x, 1e-6)
    }

    /// Checks that overlap regions lie in their source chart and that
    /// transition maps are mutually inverse, at `samples` points per overlap.
    pub fn validate(&self, samples: usize) -> AtlasReport {
        let mut inverse = Residual::default();
        let mut violations = Vec::new();
        for o in &self.overlaps {
            for x in o.region.sample(samples) {
                if !self.charts[o.source].domain.contains(&x) {
                    violations.push(Location { at: o.id.clone(), point: x.clone() });
                }
                let value = match (o.apply(&x), self.reverse_overlap_any(o, &x)) {
                    (Ok(y), Some(back)) => back.apply(&y).map(|z| distance(&z, &x)).unwrap_or(f64::INFINITY),
                    _ => f64::INFINITY,
                };
                inverse.record(value, || Location { at: o.id.clone(), point: x.clone() });
            }
        }
        AtlasReport { inverse_residual: inverse, containment_violations: violations }
    }

    fn reverse_overlap_any(&self, o: &Overlap, x: &[f64]) -> Option<&Overlap> {
        let y = o.apply(x).ok()?;
        self.overlaps_at(o.target, o.source, &y).map(|k| &self.overlaps[k]).min_by(|a, b| {
            let da = a.apply(&y).map(|z| distance(&z, x)).unwrap_or(f64::INFINITY);
            let db = b.apply(&y).map(|z| distance(&z, x)).unwrap_or(f64::INFINITY);
            da.total_cmp(&db)
        })
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Region {
        Region::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn box_membership() {
        let r = unit_square();
        assert!(r.contains(&[0.5, 1.0]));
        assert!(!r.contains(&[0.5, 1.1]));
        assert!(!r.contains(&[0.5]));
        assert!(Region::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn annulus_sampling_respects_radius() {
        let r = Region::new(vec![-2.0, -2.0], vec![2.0, 2.0])
            .unwrap()
            .with_annulus(Annulus { center: vec![0.0, 0.0], r_min: 0.5, r_max: 2.0 })
            .unwrap();
        let pts = r.sample(256);
        assert_eq!(pts.len(), 256);
        for p in &pts {
            let rad = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((0.5..=2.0).contains(&rad));
        }
        assert!(!r.contains_segment(&[-1.0, 0.0], &[1.0, 0.0]));
        assert!(r.contains_segment(&[1.0, 0.0], &[1.5, 0.2]));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(unit_square().sample(50), unit_square().sample(50));
    }

    #[test]
    fn mutually_inverse_maps() {
        let shift = |d: f64| ExprFn::parse(&format!("[x0 + {d:?}, x1]"), 2, Shape::Vector(2)).unwrap();
        let a = Chart { name: "a".into(), domain: Region::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap() };
        let b = Chart { name: "b".into(), domain: Region::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap() };
        let ab = Overlap::new("ab", 0, 1, Region::new(vec![0.5, 0.0], vec![1.0, 1.0]).unwrap(), shift(-0.5)).unwrap();
        let ba = Overlap::new("ba", 1, 0, Region::new(vec![0.0, 0.0], vec![0.5, 1.0]).unwrap(), shift(0.5)).unwrap();
        let atlas = Atlas::new(2, vec![a, b], vec![ab, ba]).unwrap();
        let report = atlas.validate(64);
        assert!(report.inverse_residual.worst < 1e-15);
        assert!(report.containment_violations.is_empty());
        assert_eq!(atlas.find_transition(0, 1, &[0.75, 0.2], &[0.25, 0.2], 1e-9), Some(0));
        assert_eq!(atlas.reverse_overlap(0, &[0.75, 0.2]), Some(1));
    }
}
