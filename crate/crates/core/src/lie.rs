//! Matrix Lie groups used as structure groups.
//!
//! `U1` is realized as `SO2` (a 2×2 rotation), and `SU2` as the real 4×4
//! realification `[[A, -B], [B, A]]` of a complex matrix `A + iB`, so every
//! computation stays real.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the membership residual of any stored element.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Residual above which a product is re-projected onto the group.
pub const REPROJECT_TOL: f64 = 1e-12;
/// Logarithms are refused once the rotation angle is this close to π.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LieGroup {
    U1,
    SO2,
    SO3,
    SU2,
    GL(usize),
}

impl LieGroup {
    pub fn name(&self) -> String {
        match self {
            LieGroup::U1 => "U1".into(),
            LieGroup::SO2 => "SO2".into(),
            LieGroup::SO3 => "SO3".into(),
            LieGroup::SU2 => "SU2".into(),
            LieGroup::GL(n) => format!("GL{n}"),
        }
    }

    /// Size of the (real) matrices representing elements.
    pub fn matrix_dim(&self) -> usize {
        match self {
            LieGroup::U1 | LieGroup::SO2 => 2,
            LieGroup::SO3 => 3,
            LieGroup::SU2 => 4,
            LieGroup::GL(n) => *n,
        }
    }

    pub fn algebra_dim(&self) -> usize {
        match self {
            LieGroup::U1 | LieGroup::SO2 => 1,
            LieGroup::SO3 | LieGroup::SU2 => 3,
            LieGroup::GL(n) => n * n,
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, LieGroup::U1 | LieGroup::SO2 | LieGroup::GL(1))
    }

    /// `U1` or `SO2`, whose elements carry a signed rotation angle.
    pub fn is_circle(&self) -> bool {
        matches!(self, LieGroup::U1 | LieGroup::SO2)
    }

    pub fn identity_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.matrix_dim(), self.matrix_dim())
    }

    /// Basis of the Lie algebra, matching [`AlgebraElement::coords`].
    pub fn basis(&self) -> Vec<DMatrix<f64>> {
        let n = self.matrix_dim();
        let unit = |entries: &[(usize, usize, f64)]| {
            let mut m = DMatrix::zeros(n, n);
            for &(i, j, v) in entries {
                m[(i, j)] = v;
            }
            m
        };
        match self {
            LieGroup::U1 | LieGroup::SO2 => vec![unit(&[(1, 0, 1.0), (0, 1, -1.0)])],
            LieGroup::SO3 => vec![
                unit(&[(2, 1, 1.0), (1, 2, -1.0)]),
                unit(&[(0, 2, 1.0), (2, 0, -1.0)]),
                unit(&[(1, 0, 1.0), (0, 1, -1.0)]),
            ],
            LieGroup::SU2 => vec![
                realify(&[[0.0, 0.0], [0.0, 0.0]], &[[1.0, 0.0], [0.0, -1.0]]),
                realify(&[[0.0, 1.0], [-1.0, 0.0]], &[[0.0, 0.0], [0.0, 0.0]]),
                realify(&[[0.0, 0.0], [0.0, 0.0]], &[[0.0, 1.0], [1.0, 0.0]]),
            ],
            LieGroup::GL(n) => (0..n * n).map(|k| unit(&[(k / n, k % n, 1.0)])).collect(),
        }
    }

    /// Distance of `m` from the group; zero for members.
    pub fn membership_residual(&self, m: &DMatrix<f64>) -> f64 {
        let n = self.matrix_dim();
        if m.shape() != (n, n) || m.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        match self {
            LieGroup::GL(_) => {
                if m.clone().try_inverse().is_some() && m.determinant() != 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            LieGroup::SU2 => {
                let orth = (m.transpose() * m - self.identity_matrix()).norm();
                let j = complex_unit(2);
                let (re, im) = complex_det(m);
                orth + (m * &j - &j * m).norm() + (re - 1.0).abs() + im.abs()
            }
            _ => (m.transpose() * m - self.identity_matrix()).norm() + (m.determinant() - 1.0).abs(),
        }
    }

    /// Distance of `m` from the Lie algebra.
    pub fn algebra_residual(&self, m: &DMatrix<f64>) -> f64 {
        let n = self.matrix_dim();
        if m.shape() != (n, n) || m.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        match self {
            LieGroup::GL(_) => 0.0,
            LieGroup::SU2 => {
                let j = complex_unit(2);
                let b = m.view((2, 0), (2, 2));
                (m + m.transpose()).norm() + (m * &j - &j * m).norm() + b.trace().abs()
            }
            _ => (m + m.transpose()).norm(),
        }
    }

    /// Nearest group element: polar factor for compact groups.
    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            LieGroup::GL(_) => m.clone(),
            _ => {
                let svd = m.clone().svd(true, true);
                let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
                let mut q = u * vt;
                if *self == LieGroup::SU2 {
                    // Remove the U(1) phase: multiply by exp(-i phi / 2).
                    let (re, im) = complex_det(&q);
                    let half = -im.atan2(re) / 2.0;
                    let phase = self.identity_matrix() * half.cos() + complex_unit(2) * half.sin();
                    q = phase * q;
                }
                q
            }
        }
    }

    /// Orthogonal projection onto the Lie algebra.
    pub fn project_algebra(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            LieGroup::GL(_) => m.clone(),
            LieGroup::SU2 => {
                let j = complex_unit(2);
                let skew = (m - m.transpose()) * 0.5;
                let commuting = (&skew - &j * &skew * &j) * 0.5;
                let tr = commuting.view((2, 0), (2, 2)).trace() / 2.0;
                commuting - scaled_i(tr)
            }
            _ => (m - m.transpose()) * 0.5,
        }
    }

    pub(crate) fn check(&self, other: &LieGroup) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GroupMismatch { left: self.name(), right: other.name() })
        }
    }

    /// Random algebra element with coordinates uniform in `[-scale, scale]`.
    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let coords: Vec<f64> = (0..self.algebra_dim()).map(|_| rng.random_range(-scale..=scale)).collect();
        AlgebraElement::from_coords(*self, &coords)
    }

    /// Random group element `exp(X)` with `X` from [`LieGroup::random_algebra`].
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> GroupElement {
        exp(&self.random_algebra(rng, scale))
    }
}

/// `i * tr * diag(1, 1)` in the realified form; used to remove the trace of B.
fn scaled_i(tr: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..2 {
        m[(2 + k, k)] = tr;
        m[(k, 2 + k)] = -tr;
    }
    m
}

/// Realification of the complex matrix `re + i im`.
fn realify(re: &[[f64; 2]; 2], im: &[[f64; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = re[i][j];
            m[(i + 2, j + 2)] = re[i][j];
            m[(i + 2, j)] = im[i][j];
            m[(i, j + 2)] = -im[i][j];
        }
    }
    m
}

/// Multiplication by `i` on the realification of `C^n`.
fn complex_unit(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(n + k, k)] = 1.0;
        j[(k, n + k)] = -1.0;
    }
    j
}

/// Complex determinant of a realified 2×2 complex matrix.
fn complex_det(m: &DMatrix<f64>) -> (f64, f64) {
    let c = |i: usize, j: usize| (m[(i, j)], m[(i + 2, j)]);
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let p = mul(c(0, 0), c(1, 1));
    let q = mul(c(0, 1), c(1, 0));
    (p.0 - q.0, p.1 - q.1)
}

impl fmt::Display for LieGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LieGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "U1" => LieGroup::U1,
            "SO2" => LieGroup::SO2,
            "SO3" => LieGroup::SO3,
            "SU2" => LieGroup::SU2,
            _ => match s.strip_prefix("GL").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if (1..=8).contains(&n) => LieGroup::GL(n),
                _ => return Err(Error::Unknown { kind: "group", name: s.to_string() }),
            },
        })
    }
}

impl TryFrom<String> for LieGroup {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LieGroup> for String {
    fn from(g: LieGroup) -> String {
        g.name()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    group: LieGroup,
    matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    group: LieGroup,
    matrix: DMatrix<f64>,
}

impl GroupElement {
    /// Checked constructor; the residual must be within [`MEMBERSHIP_TOL`].
    pub fn new(group: LieGroup, matrix: DMatrix<f64>) -> Result<Self> {
        let residual = group.membership_residual(&matrix);
        if residual > MEMBERSHIP_TOL {
            return Err(Error::NotInGroup { group: group.name(), residual });
        }
        Ok(GroupElement { group, matrix })
    }

    /// Projects `matrix` onto the group first. Fails only for non-finite or
    /// singular input, or when the projection moved the matrix by more than `tol`.
    pub fn new_projected(group: LieGroup, matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let projected = group.project(&matrix);
        let moved = (&projected - &matrix).norm();
        if !(moved <= tol) {
            return Err(Error::NotInGroup { group: group.name(), residual: moved });
        }
        GroupElement::new(group, projected)
    }

    pub fn identity(group: LieGroup) -> Self {
        GroupElement { group, matrix: group.identity_matrix() }
    }

    /// Rotation by `angle` in `SO2`/`U1`.
    pub fn rotation(group: LieGroup, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        GroupElement { group, matrix: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]) }
    }

    pub fn group(&self) -> LieGroup {
        self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn residual(&self) -> f64 {
        self.group.membership_residual(&self.matrix)
    }

    /// Product, re-projected onto the group when drift exceeds [`REPROJECT_TOL`].
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        self.group.check(&other.group)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &GroupElement) -> GroupElement {
        let mut matrix = &self.matrix * &other.matrix;
        if !matches!(self.group, LieGroup::GL(_)) && self.group.membership_residual(&matrix) > REPROJECT_TOL {
            matrix = self.group.project(&matrix);
        }
        GroupElement { group: self.group, matrix }
    }

    pub fn inverse(&self) -> GroupElement {
        let matrix = match self.group {
            LieGroup::GL(_) => self.matrix.clone().try_inverse().expect("group elements are invertible"),
            _ => self.matrix.transpose(),
        };
        GroupElement { group: self.group, matrix }
    }

    /// `‖a⁻¹b − I‖_F`.
    pub fn dist(&self, other: &GroupElement) -> Result<f64> {
        self.group.check(&other.group)?;
        Ok(self.dist_unchecked(other))
    }

    pub(crate) fn dist_unchecked(&self, other: &GroupElement) -> f64 {
        if self.matrix == other.matrix {
            return 0.0;
        }
        (self.inverse().matrix * &other.matrix - self.group.identity_matrix()).norm()
    }

    /// Rotation angle in `[0, π]` (signed in `(-π, π]` for SO2/U1).
    pub fn angle(&self) -> Option<f64> {
        let m = &self.matrix;
        match self.group {
            LieGroup::U1 | LieGroup::SO2 => Some(m[(1, 0)].atan2(m[(0, 0)])),
            LieGroup::SO3 => Some(((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()),
            LieGroup::SU2 => Some((m.trace() / 4.0).clamp(-1.0, 1.0).acos()),
            LieGroup::GL(_) => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.group, self.matrix)
    }
}

impl AlgebraElement {
    pub fn new(group: LieGroup, matrix: DMatrix<f64>) -> Result<Self> {
        let residual = group.algebra_residual(&matrix);
        if residual > MEMBERSHIP_TOL {
            return Err(Error::NotInGroup { group: format!("lie({})", group.name()), residual });
        }
        Ok(AlgebraElement { group, matrix })
    }

    pub(crate) fn from_raw(group: LieGroup, matrix: DMatrix<f64>) -> Self {
        AlgebraElement { group, matrix }
    }

    pub fn zero(group: LieGroup) -> Self {
        let n = group.matrix_dim();
        AlgebraElement { group, matrix: DMatrix::zeros(n, n) }
    }

    pub fn from_coords(group: LieGroup, coords: &[f64]) -> Self {
        let mut matrix = DMatrix::zeros(group.matrix_dim(), group.matrix_dim());
        for (c, b) in coords.iter().zip(group.basis()) {
            matrix += b * *c;
        }
        AlgebraElement { group, matrix }
    }

    pub fn group(&self) -> LieGroup {
        self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn residual(&self) -> f64 {
        self.group.algebra_residual(&self.matrix)
    }

    /// Coordinates in [`LieGroup::basis`].
    pub fn coords(&self) -> Vec<f64> {
        let m = &self.matrix;
        match self.group {
            LieGroup::U1 | LieGroup::SO2 => vec![m[(1, 0)]],
            LieGroup::SO3 => vec![m[(2, 1)], m[(0, 2)], m[(1, 0)]],
            LieGroup::SU2 => vec![m[(2, 0)], m[(0, 1)], m[(2, 1)]],
            LieGroup::GL(n) => (0..n * n).map(|k| m[(k / n, k % n)]).collect(),
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.group.check(&other.group)?;
        Ok(AlgebraElement { group: self.group, matrix: &self.matrix + &other.matrix })
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement { group: self.group, matrix: &self.matrix * s }
    }

    pub fn bracket(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.group.check(&other.group)?;
        Ok(AlgebraElement { group: self.group, matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix })
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Matrix exponential by scaling and squaring with a (6, 6) Padé approximant.
pub fn expm(x: &DMatrix<f64>) -> DMatrix<f64> {
    const C: [f64; 7] = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
    let n = x.nrows();
    let norm = x.norm();
    if !norm.is_finite() {
        return DMatrix::from_element(n, n, f64::NAN);
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = x / 2f64.powi(squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let mut power = id.clone();
    let mut num = id.clone();
    let mut den = id;
    for (k, c) in C.iter().enumerate().skip(1) {
        power = &power * &a;
        num += &power * *c;
        den += &power * if k % 2 == 0 { *c } else { -*c };
    }
    let mut r = den.lu().solve(&num).expect("Padé denominator is well conditioned for ‖A‖ ≤ 1/2");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Principal matrix logarithm by inverse scaling and squaring. Returns `None`
/// when the spectrum touches the closed negative real axis.
pub fn logm(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let eig = m.clone().complex_eigenvalues();
    if eig.iter().any(|z| z.norm() == 0.0 || z.arg().abs() >= PI - CUT_LOCUS_MARGIN) {
        return None;
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut y = m.clone();
    let mut roots = 0;
    while (&y - &id).norm() > 0.25 {
        y = sqrtm(&y)?;
        roots += 1;
        if roots > 60 {
            return None;
        }
    }
    // log(Y) = 2 atanh(Z), Z = (Y - I)(Y + I)^-1
    let z = (&y - &id) * (&y + &id).try_inverse()?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..60 {
        term = &term * &z2;
        let add = &term / (2 * k + 1) as f64;
        sum += &add;
        if add.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Some(sum * 2.0 * 2f64.powi(roots))
}

/// Principal square root via the Denman–Beavers iteration.
fn sqrtm(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut y = m.clone();
    let mut z = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    for _ in 0..100 {
        let yi = y.clone().try_inverse()?;
        let zi = z.clone().try_inverse()?;
        let ny = (&y + zi) * 0.5;
        let nz = (&z + yi) * 0.5;
        let delta = (&ny - &y).norm();
        y = ny;
        z = nz;
        if delta <= 1e-15 * y.norm() {
            return Some(y);
        }
    }
    Some(y)
}

/// Group exponential. Closed forms for the compact groups, Padé otherwise.
pub fn exp(x: &AlgebraElement) -> GroupElement {
    let group = x.group;
    let m = &x.matrix;
    let matrix = match group {
        LieGroup::U1 | LieGroup::SO2 => return GroupElement::rotation(group, m[(1, 0)]),
        LieGroup::SO3 => {
            let w = [m[(2, 1)], m[(0, 2)], m[(1, 0)]];
            let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            let (a, b) = if theta < 1e-4 {
                let t2 = theta * theta;
                (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
            } else {
                (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
            };
            group.identity_matrix() + m * a + (m * m) * b
        }
        LieGroup::SU2 => {
            // X^2 = -theta^2 I for X in su(2).
            let theta = (-(m * m).trace() / 4.0).max(0.0).sqrt();
            let a = if theta < 1e-4 { 1.0 - theta * theta / 6.0 } else { theta.sin() / theta };
            group.identity_matrix() * theta.cos() + m * a
        }
        LieGroup::GL(_) => expm(m),
    };
    GroupElement { group, matrix }
}

/// Principal logarithm. Fails with [`Error::CutLocus`] within
/// [`CUT_LOCUS_MARGIN`] of rotation angle π (or of the negative real axis for GL).
pub fn log(g: &GroupElement) -> Result<AlgebraElement> {
    let group = g.group;
    let m = &g.matrix;
    let matrix = match group {
        LieGroup::U1 | LieGroup::SO2 => {
            let angle = g.angle().expect("circle groups have an angle");
            if angle.abs() > PI - CUT_LOCUS_MARGIN {
                return Err(Error::CutLocus { angle });
            }
            &group.basis()[0] * angle
        }
        LieGroup::SO3 | LieGroup::SU2 => {
            let theta = g.angle().expect("compact groups have an angle");
            if theta > PI - CUT_LOCUS_MARGIN {
                return Err(Error::CutLocus { angle: theta });
            }
            let factor = if theta < 1e-4 { 0.5 * (1.0 + theta * theta / 6.0) } else { theta / (2.0 * theta.sin()) };
            (m - m.transpose()) * factor
        }
        LieGroup::GL(_) => match logm(m) {
            Some(l) => l,
            None => {
                let angle = m.clone().complex_eigenvalues().iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
                return Err(Error::CutLocus { angle });
            }
        },
    };
    Ok(AlgebraElement { group, matrix: group.project_algebra(&matrix) })
}

/// `g X g⁻¹`.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    g.group.check(&x.group)?;
    let matrix = &g.matrix * &x.matrix * g.inverse().matrix;
    Ok(AlgebraElement { group: g.group, matrix })
}

/// Angle-valued unwrapping helper: the representative of `angle` closest to `reference`.
pub fn unwrap_near(angle: f64, reference: f64) -> f64 {
    let turns = ((reference - angle) / (2.0 * PI)).round();
    angle + turns * 2.0 * PI
}

/// Circle-group angle difference wrapped to `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GROUPS: [LieGroup; 5] = [LieGroup::U1, LieGroup::SO2, LieGroup::SO3, LieGroup::SU2, LieGroup::GL(2)];

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn identities() {
        for g in GROUPS {
            let e = exp(&AlgebraElement::zero(g));
            assert_eq!(e, GroupElement::identity(g));
            assert!(log(&e).unwrap().norm() < 1e-15);
            assert!(g.basis().iter().all(|b| g.algebra_residual(b) < 1e-15));
            assert_eq!(g.basis().len(), g.algebra_dim());
        }
    }

    #[test]
    fn so2_quarter_turn() {
        let x = AlgebraElement::from_coords(LieGroup::SO2, &[PI / 2.0]);
        let g = exp(&x);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((g.matrix() - expected).norm() < 1e-15);
        let d = GroupElement::identity(LieGroup::SO2).dist(&g).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn so2_product_adds_angles() {
        let a = GroupElement::rotation(LieGroup::SO2, 0.4);
        let b = GroupElement::rotation(LieGroup::SO2, 1.3);
        let c = a.mul(&b).unwrap();
        assert!((c.angle().unwrap() - 1.7).abs() < 1e-14);
    }

    #[test]
    fn mismatch_rejected() {
        let a = GroupElement::identity(LieGroup::SO2);
        let b = GroupElement::identity(LieGroup::SO3);
        assert!(matches!(a.mul(&b), Err(Error::GroupMismatch { .. })));
    }

    #[test]
    fn closed_forms_match_pade() {
        let mut r = rng();
        for g in [LieGroup::SO3, LieGroup::SU2] {
            for _ in 0..50 {
                let x = g.random_algebra(&mut r, 2.0);
                let closed = exp(&x);
                assert!((closed.matrix() - expm(x.matrix())).norm() < 1e-13, "{g}");
                assert!(closed.residual() < 1e-12);
            }
        }
    }

    #[test]
    fn pade_matches_series() {
        let mut r = rng();
        for _ in 0..20 {
            let x = LieGroup::GL(3).random_algebra(&mut r, 1.0);
            let mut term = DMatrix::<f64>::identity(3, 3);
            let mut sum = term.clone();
            for k in 1..40 {
                term = &term * x.matrix() / k as f64;
                sum += &term;
            }
            assert!((expm(x.matrix()) - sum).norm() < 1e-13);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let mut r = rng();
        for g in GROUPS {
            for _ in 0..50 {
                let x = g.random_algebra(&mut r, 0.8);
                let back = log(&exp(&x)).unwrap();
                assert!((back.matrix() - x.matrix()).norm() < 1e-10, "{g}");
            }
        }
    }

    #[test]
    fn cut_locus_refused() {
        let g = GroupElement::rotation(LieGroup::SO2, PI);
        assert!(matches!(log(&g), Err(Error::CutLocus { .. })));
        let x = AlgebraElement::from_coords(LieGroup::SO3, &[0.0, 0.0, PI]);
        assert!(matches!(log(&exp(&x)), Err(Error::CutLocus { .. })));
        let minus = GroupElement::new(LieGroup::SU2, -DMatrix::<f64>::identity(4, 4)).unwrap();
        assert!(matches!(log(&minus), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn adjoint_preserves_algebra() {
        let mut r = rng();
        for _ in 0..100 {
            let g = LieGroup::SO3.random_element(&mut r, 3.0);
            let x = LieGroup::SO3.random_algebra(&mut r, 3.0);
            let y = adjoint(&g, &x).unwrap();
            assert!(y.residual() < 1e-9);
        }
        let x = LieGroup::SO2.random_algebra(&mut r, 1.0);
        let y = adjoint(&GroupElement::rotation(LieGroup::SO2, 0.3), &x).unwrap();
        assert!((y.matrix() - x.matrix()).norm() < 1e-15);
    }

    #[test]
    fn dist_symmetric_on_compact_groups() {
        let mut r = rng();
        for g in [LieGroup::SO2, LieGroup::SO3, LieGroup::SU2] {
            for _ in 0..100 {
                let a = g.random_element(&mut r, 3.0);
                let b = g.random_element(&mut r, 3.0);
                assert!((a.dist(&b).unwrap() - b.dist(&a).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_restores_membership() {
        let mut r = rng();
        for g in [LieGroup::SO2, LieGroup::SO3, LieGroup::SU2] {
            let a = g.random_element(&mut r, 2.0);
            let noisy = a.matrix()
                + DMatrix::from_fn(a.matrix().nrows(), a.matrix().ncols(), |i, j| {
                    1e-6 * ((i * 7 + j * 3) as f64).sin()
                });
            let noisy = if g == LieGroup::SU2 {
                // Keep J-commutation so the polar factor stays complex-linear.
                let j = complex_unit(2);
                (&noisy - &j * &noisy * &j) * 0.5
            } else {
                noisy
            };
            let p = g.project(&noisy);
            assert!(g.membership_residual(&p) < 1e-12, "{g}");
            assert!((p - a.matrix()).norm() < 1e-5);
        }
    }

    #[test]
    fn su2_algebra_projection() {
        let mut r = rng();
        let x = LieGroup::SU2.random_algebra(&mut r, 1.0);
        let noisy = x.matrix() + DMatrix::from_fn(4, 4, |i, j| 1e-3 * ((i + 2 * j) as f64).cos());
        let p = LieGroup::SU2.project_algebra(&noisy);
        assert!(LieGroup::SU2.algebra_residual(&p) < 1e-14);
        assert!((p - x.matrix()).norm() < 1e-2);
    }

    #[test]
    fn parse_names() {
        for g in GROUPS {
            assert_eq!(g.name().parse::<LieGroup>().unwrap(), g);
        }
        assert!("GLx".parse::<LieGroup>().is_err());
    }

    fn group() -> impl Strategy<Value = LieGroup> {
        proptest::sample::select(GROUPS.to_vec())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_exp_log_roundtrip(g in group(), seed in any::<u64>(), scale in 0.01f64..1.0) {
            let x = g.random_algebra(&mut ChaCha8Rng::seed_from_u64(seed), scale);
            let e = exp(&x);
            prop_assert!(g.membership_residual(e.matrix()) < 1e-10);
            prop_assert!((log(&e).unwrap().matrix() - x.matrix()).norm() < 1e-9);
        }

        #[test]
        fn prop_group_axioms(g in group(), seed in any::<u64>()) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (g.random_element(&mut r, 2.0), g.random_element(&mut r, 2.0), g.random_element(&mut r, 2.0));
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!((left.matrix() - right.matrix()).norm() < 1e-10);
            let e = a.mul(&a.inverse()).unwrap();
            prop_assert!(e.dist(&GroupElement::identity(g)).unwrap() < 1e-10);
        }

        #[test]
        fn prop_adjoint_is_a_homomorphism(g in group(), seed in any::<u64>()) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (g.random_element(&mut r, 1.5), g.random_element(&mut r, 1.5));
            let x = g.random_algebra(&mut r, 1.0);
            let once = adjoint(&a.mul(&b).unwrap(), &x).unwrap();
            let twice = adjoint(&a, &adjoint(&b, &x).unwrap()).unwrap();
            prop_assert!((once.matrix() - twice.matrix()).norm() < 1e-9);
        }

        #[test]
        fn prop_bracket_antisymmetric(g in group(), seed in any::<u64>()) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = (g.random_algebra(&mut r, 1.0), g.random_algebra(&mut r, 1.0));
            let sum = x.bracket(&y).unwrap().add(&y.bracket(&x).unwrap()).unwrap();
            prop_assert!(sum.norm() < 1e-14);
            prop_assert!(x.bracket(&y).unwrap().residual() < 1e-12);
        }
    }
}
