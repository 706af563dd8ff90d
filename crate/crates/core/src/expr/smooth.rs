//! The smooth step `beta` and its derivatives.
//!
//! `beta` is the normalized integral of the bump `exp(-1/(u(1-u)))` where
//! `u = (t - FLAT_LO) / (FLAT_HI - FLAT_LO)`. It is exactly 0 for
//! `t <= FLAT_LO` and exactly 1 for `t >= FLAT_HI`; outside `[0, 1]` it keeps
//! those constant values so that `gamma(s * beta(t))` stays well defined.
//!
//! Derivatives of order `k >= 1` have the closed form
//! `psi(u) * N_k(u) / p(u)^m_k / (Z * W^k)` with `p(u) = u(1-u)`, which keeps
//! the expression language closed under differentiation.

use std::borrow::Cow;
use std::sync::OnceLock;

pub const FLAT_LO: f64 = 0.1;
pub const FLAT_HI: f64 = 0.9;
const WIDTH: f64 = FLAT_HI - FLAT_LO;
const CELLS: usize = 2048;

#[allow(clippy::excessive_precision)]
const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    (-1.0 / (u * (1.0 - u))).exp()
}

/// 8-point Gauss-Legendre integral of the bump over `[a, b]`.
fn bump_integral(a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (bump(mid - half * x) + bump(mid + half * x));
    }
    acc * half
}

struct Table {
    cumulative: Vec<f64>,
    total: f64,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut cumulative = Vec::with_capacity(CELLS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for j in 0..CELLS {
            let a = j as f64 / CELLS as f64;
            let b = (j + 1) as f64 / CELLS as f64;
            acc += bump_integral(a, b);
            cumulative.push(acc);
        }
        Table { cumulative, total: acc }
    })
}

fn to_u(t: f64) -> f64 {
    (t - FLAT_LO) / WIDTH
}

/// The smooth step itself.
pub fn beta(t: f64) -> f64 {
    let u = to_u(t);
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let tab = table();
    let cell = ((u * CELLS as f64) as usize).min(CELLS - 1);
    let left = cell as f64 / CELLS as f64;
    let value = (tab.cumulative[cell] + bump_integral(left, u)) / tab.total;
    value.clamp(0.0, 1.0)
}

/// Polynomial with coefficients in increasing degree.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|k| self.0.get(k).copied().unwrap_or(0.0) + other.0.get(k).copied().unwrap_or(0.0)).collect())
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }
}

/// `(N_k, m_k)` for k = 1, 2, ... (index k - 1).
fn numerators(order: usize) -> Cow<'static, [(Poly, i32)]> {
    static CACHE: OnceLock<Vec<(Poly, i32)>> = OnceLock::new();
    const CACHED: usize = 8;
    let build = |count: usize| {
        let p = Poly(vec![0.0, 1.0, -1.0]);
        let dp = Poly(vec![1.0, -2.0]);
        let p2 = p.mul(&p);
        let p_dp = p.mul(&dp);
        let mut out = vec![(Poly(vec![1.0]), 0)];
        while out.len() < count {
            let (n, m) = out.last().unwrap().clone();
            // N' = p' N + p^2 N' - m p p' N
            let next = dp.mul(&n).add(&p2.mul(&n.derivative())).add(&p_dp.mul(&n).scale(-(m as f64)));
            out.push((next, m + 2));
        }
        out
    };
    if order <= CACHED {
        Cow::Borrowed(CACHE.get_or_init(|| build(CACHED)))
    } else {
        Cow::Owned(build(order))
    }
}

/// The `order`-th derivative of `beta`; `order == 0` is `beta` itself.
pub fn beta_derivative(order: usize, t: f64) -> f64 {
    if order == 0 {
        return beta(t);
    }
    let u = to_u(t);
    let psi = bump(u);
    if psi == 0.0 {
        return 0.0;
    }
    let nums = numerators(order);
    let (n, m) = &nums[order - 1];
    let p = u * (1.0 - u);
    psi * n.eval(u) / p.powi(*m) / (table().total * WIDTH.powi(order as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fourth-order central difference.
    fn central(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h)
    }

    #[test]
    fn flat_zones() {
        assert_eq!(beta(0.05), 0.0);
        assert_eq!(beta(0.1), 0.0);
        assert_eq!(beta(0.95), 1.0);
        assert_eq!(beta(-3.0), 0.0);
        assert_eq!(beta(7.0), 1.0);
        assert!((beta(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn symmetric_about_midpoint() {
        for k in 0..200 {
            let t = k as f64 / 199.0;
            assert!((beta(t) + beta(1.0 - t) - 1.0).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for k in 1..60 {
            let t = 0.1 + 0.8 * k as f64 / 60.0;
            for order in 0..4 {
                let fd = central(|s| beta_derivative(order, s), t, 1e-4);
                let exact = beta_derivative(order + 1, t);
                assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "order {order} at {t}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_integrates_to_one() {
        // composite Simpson over the support, independent of the table
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * beta_derivative(1, i as f64 * h);
        }
        assert!((acc * h / 3.0 - 1.0).abs() < 1e-10);
    }
}
