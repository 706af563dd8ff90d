//! G-torsors modelled as labelled copies of `G` with right multiplication.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{GroupElement, LieGroup};
use crate::transport::TransportMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Torsor {
    pub group: LieGroup,
    pub label: String,
}

/// A point of a torsor.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsorPoint {
    pub torsor: Torsor,
    pub value: GroupElement,
}

/// An equivariant map `x ↦ value · x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsorMorphism {
    pub source: Torsor,
    pub target: Torsor,
    pub value: GroupElement,
}

impl fmt::Display for Torsor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-torsor `{}`", self.group, self.label)
    }
}

impl Torsor {
    pub fn new(group: LieGroup, label: impl Into<String>) -> Torsor {
        Torsor { group, label: label.into() }
    }

    pub fn point(&self, value: GroupElement) -> Result<TorsorPoint> {
        if value.group() != self.group {
            return Err(Error::GroupMismatch { left: self.group.name(), right: value.group().name() });
        }
        Ok(TorsorPoint { torsor: self.clone(), value })
    }

    pub fn identity_morphism(&self) -> TorsorMorphism {
        TorsorMorphism { source: self.clone(), target: self.clone(), value: GroupElement::identity(self.group) }
    }
}

impl TorsorPoint {
    /// The right action `x · g`.
    pub fn act(&self, g: &GroupElement) -> Result<TorsorPoint> {
        Ok(TorsorPoint { torsor: self.torsor.clone(), value: self.value.mul(g)? })
    }
}

fn same(a: &Torsor, b: &Torsor) -> Result<()> {
    if a != b {
        return Err(Error::TorsorMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// The unique `d` with `x · d = y`.
pub fn d_map(x: &TorsorPoint, y: &TorsorPoint) -> Result<GroupElement> {
    same(&x.torsor, &y.torsor)?;
    x.value.inverse().mul(&y.value)
}

impl TorsorMorphism {
    pub fn new(source: Torsor, target: Torsor, value: GroupElement) -> Result<TorsorMorphism> {
        if source.group != target.group || value.group() != source.group {
            return Err(Error::GroupMismatch { left: source.group.name(), right: value.group().name() });
        }
        Ok(TorsorMorphism { source, target, value })
    }

    pub fn apply(&self, x: &TorsorPoint) -> Result<TorsorPoint> {
        same(&self.source, &x.torsor)?;
        Ok(TorsorPoint { torsor: self.target.clone(), value: self.value.mul(&x.value)? })
    }

    pub fn inverse(&self) -> TorsorMorphism {
        TorsorMorphism { source: self.target.clone(), target: self.source.clone(), value: self.value.inverse() }
    }

    /// The fibre map of a transport result, between the fibres over its endpoints.
    pub fn from_transport(map: &TransportMap) -> TorsorMorphism {
        let label = |p: &crate::path::ChartPoint| format!("{}{:?}", p.chart, p.point);
        let group = map.element.group();
        TorsorMorphism {
            source: Torsor::new(group, label(&map.source)),
            target: Torsor::new(group, label(&map.target)),
            value: map.element.clone(),
        }
    }
}

/// `f ∘ h`.
pub fn compose(f: &TorsorMorphism, h: &TorsorMorphism) -> Result<TorsorMorphism> {
    same(&h.target, &f.source)?;
    Ok(TorsorMorphism { source: h.source.clone(), target: f.target.clone(), value: f.value.mul(&h.value)? })
}

/// `ψ_x(f) = d(x, f(x))`, multiplicative: `ψ_x(f ∘ h) = ψ_x(f) ψ_x(h)`.
pub fn psi(x: &TorsorPoint, f: &TorsorMorphism) -> Result<GroupElement> {
    same(&f.source, &f.target)?;
    d_map(x, &f.apply(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GROUPS: [LieGroup; 4] = [LieGroup::SO2, LieGroup::SO3, LieGroup::SU2, LieGroup::GL(2)];

    fn random(group: LieGroup, seed: u64) -> GroupElement {
        group.random_element(&mut ChaCha8Rng::seed_from_u64(seed), 1.0)
    }

    fn close(a: &GroupElement, b: &GroupElement) -> bool {
        (a.matrix() - b.matrix()).norm() <= 1e-12 * (1.0 + a.matrix().norm())
    }

    #[test]
    fn d_of_equal_points_is_identity() {
        let t = Torsor::new(LieGroup::SO3, "X");
        let x = t.point(random(LieGroup::SO3, 1)).unwrap();
        assert!(close(&d_map(&x, &x).unwrap(), &GroupElement::identity(LieGroup::SO3)));
        let other = Torsor::new(LieGroup::SO3, "Y").point(random(LieGroup::SO3, 2)).unwrap();
        assert!(matches!(d_map(&x, &other), Err(Error::TorsorMismatch(_))));
    }

    #[test]
    fn psi_of_identity() {
        let t = Torsor::new(LieGroup::SU2, "X");
        let x = t.point(random(LieGroup::SU2, 3)).unwrap();
        assert!(close(&psi(&x, &t.identity_morphism()).unwrap(), &GroupElement::identity(LieGroup::SU2)));
        let g = TorsorMorphism::new(t.clone(), Torsor::new(LieGroup::SU2, "Y"), random(LieGroup::SU2, 4)).unwrap();
        assert!(matches!(psi(&x, &g), Err(Error::TorsorMismatch(_))));
    }

    #[test]
    fn composition_with_identity_and_inverse() {
        let (a, b) = (Torsor::new(LieGroup::SO3, "A"), Torsor::new(LieGroup::SO3, "B"));
        let f = TorsorMorphism::new(a.clone(), b.clone(), random(LieGroup::SO3, 5)).unwrap();
        assert_eq!(compose(&b.identity_morphism(), &f).unwrap(), f);
        let round = compose(&f.inverse(), &f).unwrap();
        assert!(close(&round.value, &GroupElement::identity(LieGroup::SO3)));
        assert!(matches!(compose(&f, &f), Err(Error::TorsorMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn defining_property_and_cocycle(group in 0usize..4, s in any::<u64>()) {
            let g = GROUPS[group];
            let t = Torsor::new(g, "X");
            let x = t.point(random(g, s)).unwrap();
            let y = t.point(random(g, s ^ 1)).unwrap();
            let z = t.point(random(g, s ^ 2)).unwrap();
            let dxy = d_map(&x, &y).unwrap();
            prop_assert!(close(&x.act(&dxy).unwrap().value, &y.value));
            let h = random(g, s ^ 3);
            prop_assert!(close(&d_map(&x, &x.act(&h).unwrap()).unwrap(), &h));
            let lhs = dxy.mul(&d_map(&y, &z).unwrap()).unwrap();
            prop_assert!(close(&lhs, &d_map(&x, &z).unwrap()));
        }

        #[test]
        fn psi_is_multiplicative_and_conjugates(group in 0usize..4, s in any::<u64>()) {
            let g = GROUPS[group];
            let t = Torsor::new(g, "X");
            let x = t.point(random(g, s)).unwrap();
            let f = TorsorMorphism::new(t.clone(), t.clone(), random(g, s ^ 5)).unwrap();
            let h = TorsorMorphism::new(t.clone(), t.clone(), random(g, s ^ 6)).unwrap();
            let fh = psi(&x, &compose(&f, &h).unwrap()).unwrap();
            prop_assert!(close(&fh, &psi(&x, &f).unwrap().mul(&psi(&x, &h).unwrap()).unwrap()));
            let b = random(g, s ^ 7);
            let moved = psi(&x.act(&b).unwrap(), &f).unwrap();
            let conj = b.inverse().mul(&psi(&x, &f).unwrap()).unwrap().mul(&b).unwrap();
            prop_assert!(close(&moved, &conj));
        }

        #[test]
        fn equivariance_and_associativity(group in 0usize..4, s in any::<u64>()) {
            let g = GROUPS[group];
            let (a, b, c, d) = (Torsor::new(g, "A"), Torsor::new(g, "B"), Torsor::new(g, "C"), Torsor::new(g, "D"));
            let f = TorsorMorphism::new(a.clone(), b.clone(), random(g, s)).unwrap();
            let h = TorsorMorphism::new(b.clone(), c.clone(), random(g, s ^ 1)).unwrap();
            let k = TorsorMorphism::new(c.clone(), d.clone(), random(g, s ^ 2)).unwrap();
            let left = compose(&compose(&k, &h).unwrap(), &f).unwrap();
            let right = compose(&k, &compose(&h, &f).unwrap()).unwrap();
            prop_assert!(close(&left.value, &right.value));
            let x = a.point(random(g, s ^ 3)).unwrap();
            let r = random(g, s ^ 4);
            let one = f.apply(&x.act(&r).unwrap()).unwrap();
            let two = f.apply(&x).unwrap().act(&r).unwrap();
            prop_assert!(close(&one.value, &two.value));
        }
    }
}
