use std::f64::consts::PI;

use super::*;
use crate::geometry::{gauge_transform, Region};
use crate::lie::LieGroup;
use crate::path::{concat, reverse, straight_line, upsilon};

const E: &str = "[[0, -1], [1, 0]]";

fn plane() -> Arc<Atlas> {
    Arc::new(Atlas::single("R2", Region::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap()))
}

fn matrix(src: &str, n: usize) -> ExprFn {
    ExprFn::parse(src, 2, Shape::square(n)).unwrap()
}

fn flux(atlas: Arc<Atlas>, a: f64) -> ConnectionData {
    let forms = vec![vec![matrix("zeros(2, 2)", 2), matrix(&format!("{a} * {E}"), 2)]];
    ConnectionData::new(atlas, LieGroup::U1, forms, vec![]).unwrap()
}

fn so3_curved(atlas: Arc<Atlas>) -> ConnectionData {
    let forms = vec![vec![
        matrix("[[0, -x1, 0.3], [x1, 0, -x0], [-0.3, x0, 0]]", 3),
        matrix("[[0, 0, x0*x1], [0, 0, 1], [-x0*x1, -1, 0]]", 3),
    ]];
    ConnectionData::new(atlas, LieGroup::SO3, forms, vec![]).unwrap()
}

fn line(atlas: &Arc<Atlas>, x: [f64; 2], y: [f64; 2]) -> Path {
    straight_line(atlas.clone(), "R2", &x, &y).unwrap()
}

fn wiggle(atlas: &Arc<Atlas>, s: f64) -> Path {
    let curve = ExprFn::parse("[sin(2*x0), x0 - x0^2]", 1, Shape::Vector(2)).unwrap();
    upsilon(atlas.clone(), "R2", &curve, s).unwrap()
}

#[test]
fn zero_connection_is_identity() {
    let atlas = plane();
    let conn = ConnectionData::trivial(atlas.clone(), LieGroup::SO3);
    let t = transport(&conn, &wiggle(&atlas, 1.0), 32).unwrap();
    assert_eq!(t.element, GroupElement::identity(LieGroup::SO3));
    assert_eq!(t.error_estimate, 0.0);
}

#[test]
fn flux_matches_closed_form() {
    let atlas = plane();
    for a in [0.0, 0.5, PI] {
        let conn = flux(atlas.clone(), a);
        let t = transport(&conn, &line(&atlas, [0.0, 0.0], [0.0, 1.0]), 64).unwrap();
        let oracle = GroupElement::rotation(LieGroup::U1, -a);
        assert!(t.element.dist(&oracle).unwrap() < 1e-10, "a = {a}");
        assert!((t.unwrapped_angle.unwrap() + a).abs() < 1e-12);
        assert!(t.warning.is_none());
    }
}

#[test]
fn steps_below_minimum_are_rejected() {
    let atlas = plane();
    let conn = flux(atlas.clone(), 1.0);
    let p = line(&atlas, [0.0, 0.0], [0.0, 1.0]);
    assert!(matches!(transport(&conn, &p, 8), Err(Error::InvalidArgument(_))));
}

#[test]
fn coarse_steps_warn_or_fail() {
    let atlas = plane();
    let conn = so3_curved(atlas.clone());
    let p = concat(&line(&atlas, [1.5, -1.5], [-1.5, 1.5]), &line(&atlas, [-1.5, -1.5], [1.5, -1.5])).unwrap();
    let t = transport(&conn, &p, 48).unwrap();
    assert!(t.error_estimate > WARN_ESTIMATE);
    assert!(t.warning.is_some());
    let big = ConnectionData::new(
        atlas.clone(),
        LieGroup::SO3,
        vec![vec![
            matrix("40 * [[0, -x1, 1], [x1, 0, -x0], [-1, x0, 0]]", 3),
            matrix("40 * [[0, 0, x0], [0, 0, 1], [-x0, -1, 0]]", 3),
        ]],
        vec![],
    )
    .unwrap();
    assert!(matches!(transport(&big, &p, 16), Err(Error::StepTooCoarse { .. })));
}

#[test]
fn reverse_inverts_and_constant_is_identity() {
    let atlas = plane();
    let conn = so3_curved(atlas.clone());
    let g = wiggle(&atlas, 0.8);
    let t = transport(&conn, &g, 256).unwrap().element;
    let r = transport(&conn, &reverse(&g), 256).unwrap().element;
    assert!(r.dist(&t.inverse()).unwrap() < 1e-8);
    let c = Path::constant(atlas.clone(), "R2", &[0.3, -0.2]).unwrap();
    let id = transport(&conn, &c, 16).unwrap().element;
    assert!(id.dist(&GroupElement::identity(LieGroup::SO3)).unwrap() < 1e-10);
    let back = holonomy(&conn, &concat(&reverse(&g), &g).unwrap(), 256).unwrap();
    assert!(back.element.dist(&GroupElement::identity(LieGroup::SO3)).unwrap() < 1e-8);
}

#[test]
fn functoriality_on_concatenations() {
    let atlas = plane();
    let conn = so3_curved(atlas.clone());
    let tau = wiggle(&atlas, 0.9);
    let end = tau.end().point;
    let gamma = line(&atlas, [end[0], end[1]], [-1.0, 1.2]);
    let both = transport(&conn, &concat(&gamma, &tau).unwrap(), 256).unwrap().element;
    let product =
        transport(&conn, &gamma, 256).unwrap().element.mul(&transport(&conn, &tau, 256).unwrap().element).unwrap();
    assert!(both.dist(&product).unwrap() < 1e-7);
}

#[test]
fn fourth_order_convergence() {
    let atlas = plane();
    let conn = so3_curved(atlas.clone());
    let p = wiggle(&atlas, 1.0);
    let e1 = transport(&conn, &p, 32).unwrap().error_estimate;
    let e2 = transport(&conn, &p, 64).unwrap().error_estimate;
    assert!(e1 / e2 >= 8.0 * 0.8, "ratio {}", e1 / e2);
}

#[test]
fn holonomy_rejects_open_paths() {
    let atlas = plane();
    let conn = flux(atlas.clone(), 1.0);
    assert!(matches!(holonomy(&conn, &line(&atlas, [0.0, 0.0], [1.0, 0.0]), 32), Err(Error::NotALoop { .. })));
}

#[test]
fn pure_gauge_holonomy_is_trivial() {
    let atlas = plane();
    let x = "[[0, 0, 0], [0, 0, -1], [0, 1, 0]]";
    let y = "[[0, 0, 1], [0, 0, 0], [-1, 0, 0]]";
    let forms = vec![vec![matrix(&format!("expm(-x1 * {y}) * {x} * expm(x1 * {y})"), 3), matrix(y, 3)]];
    let conn = ConnectionData::new(atlas.clone(), LieGroup::SO3, forms, vec![]).unwrap();
    let a = line(&atlas, [0.0, 0.0], [1.0, 0.5]);
    let b = line(&atlas, [1.0, 0.5], [-0.5, 1.0]);
    let c = line(&atlas, [-0.5, 1.0], [0.0, 0.0]);
    let loop_ = concat(&c, &concat(&b, &a).unwrap()).unwrap();
    let h = holonomy(&conn, &loop_, 256).unwrap();
    assert!(h.element.dist(&GroupElement::identity(LieGroup::SO3)).unwrap() < 1e-7);
}

#[test]
fn family_of_vertical_segments() {
    let atlas = plane();
    let a = 0.7;
    let conn = flux(atlas.clone(), a);
    let f = ExprFn::parse("[0.2, x0 * beta(x1)]", 2, Shape::Vector(2)).unwrap();
    let fam = PathFamily::new(atlas.clone(), vec![0.0], vec![1.5], vec![(0, 0.0, 1.0, f)], 0.1).unwrap();
    let table = family_transport(&conn, &fam, 7, 32).unwrap();
    for (u, l) in table.params.iter().zip(&table.log_coords) {
        assert!((l[0] + a * u[0]).abs() < 1e-8);
    }
    assert!(table.smoothness.unwrap() < 1e-6);

    let c = ExprFn::parse("[0.2, beta(x1)]", 2, Shape::Vector(2)).unwrap();
    let fam = PathFamily::new(atlas, vec![0.0], vec![1.0], vec![(0, 0.0, 1.0, c)], 0.1).unwrap();
    let table = family_transport(&conn, &fam, 5, 32).unwrap();
    assert!(table.elements.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn naturality_under_gauge_transformations() {
    let atlas = plane();
    let p = wiggle(&atlas, 0.9);
    let conn = so3_curved(atlas.clone());
    let id = BundleMorphism::gauge(atlas.clone(), Gauge::identity(&atlas, LieGroup::SO3));
    assert!(check_naturality(&id, &conn, &conn, &p, 64).unwrap().residual < 1e-12);

    let h = matrix("expm([[0, -x0, x1], [x0, 0, -0.5], [-x1, 0.5, 0]])", 3);
    let gauge = Gauge::new(&atlas, LieGroup::SO3, vec![h]).unwrap();
    let moved = gauge_transform(&conn, &gauge).unwrap();
    let f = BundleMorphism::gauge(atlas.clone(), gauge);
    assert!(check_naturality(&f, &conn, &moved, &p, 256).unwrap().residual < 1e-7);

    let u1 = flux(atlas.clone(), 0.5);
    let g0 = Gauge::new(&atlas, LieGroup::U1, vec![matrix(&format!("expm(1.1 * {E})"), 2)]).unwrap();
    let moved = gauge_transform(&u1, &g0).unwrap();
    let f = BundleMorphism::gauge(atlas.clone(), g0.clone());
    let q = line(&atlas, [0.0, 0.0], [0.0, 1.0]);
    assert!(check_naturality(&f, &u1, &moved, &q, 64).unwrap().residual < 1e-8);

    let wrong = flux(atlas.clone(), 0.5 + 0.05);
    assert!(check_naturality(&f, &u1, &wrong, &q, 64).unwrap().residual >= 1e-2);
}

#[test]
fn pullbacks() {
    let atlas = plane();
    let a = 0.5;
    let conn = flux(atlas.clone(), a);
    let q = wiggle(&atlas, 0.7);
    let id = PathMap::identity(atlas.clone());
    let direct = transport(&conn, &q, 64).unwrap().element;
    assert_eq!(pullback_transport(&id, &conn, &q, 64).unwrap().element, direct);

    let constant =
        PathMap::new(atlas.clone(), atlas.clone(), vec![("R2".into(), ExprFn::constant_vector(&[0.4, 0.4], 2))])
            .unwrap();
    let t = pullback_transport(&constant, &conn, &q, 64).unwrap().element;
    assert!(t.dist(&GroupElement::identity(LieGroup::U1)).unwrap() < 1e-12);

    let line1 = Arc::new(Atlas::single("I", Region::new(vec![-1.0], vec![2.0]).unwrap()));
    let incl = PathMap::new(
        line1.clone(),
        atlas.clone(),
        vec![("R2".into(), ExprFn::parse("[0, x0]", 1, Shape::Vector(2)).unwrap())],
    )
    .unwrap();
    let seg = straight_line(line1.clone(), "I", &[0.0], &[1.0]).unwrap();
    let t = pullback_transport(&incl, &conn, &seg, 64).unwrap().element;
    assert!(t.dist(&GroupElement::rotation(LieGroup::U1, -a)).unwrap() < 1e-10);

    let shear = PathMap::new(
        atlas.clone(),
        atlas.clone(),
        vec![("R2".into(), ExprFn::parse("[0.5 * x0, 0.5 * x1 + 0.25 * x0^2]", 2, Shape::Vector(2)).unwrap())],
    )
    .unwrap();
    let composite = shear.after(&incl).unwrap();
    let one = pullback_transport(&composite, &conn, &seg, 64).unwrap().element;
    let two = transport(&conn, &shear.apply(&incl.apply(&seg).unwrap()).unwrap(), 64).unwrap().element;
    assert!(one.dist(&two).unwrap() < 1e-9);
}

mod props {
    use proptest::prelude::*;

    use super::*;

    fn point() -> impl Strategy<Value = [f64; 2]> {
        [-1.5f64..1.5, -1.5f64..1.5]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn flux_lines_match_closed_form(a in -3.0f64..3.0, x in point(), y in point()) {
            let atlas = plane();
            let conn = flux(atlas.clone(), a);
            let t = transport(&conn, &line(&atlas, x, y), 32).unwrap();
            let oracle = GroupElement::rotation(LieGroup::U1, -a * (y[1] - x[1]));
            prop_assert!(t.element.dist(&oracle).unwrap() < 1e-10);
        }

        #[test]
        fn concatenation_is_the_product(x in point(), y in point(), z in point()) {
            let atlas = plane();
            let conn = so3_curved(atlas.clone());
            let (tau, gamma) = (line(&atlas, x, y), line(&atlas, y, z));
            let both = transport(&conn, &concat(&gamma, &tau).unwrap(), 256).unwrap().element;
            let product = transport(&conn, &gamma, 128).unwrap().element.mul(&transport(&conn, &tau, 128).unwrap().element).unwrap();
            prop_assert!(both.dist(&product).unwrap() < 1e-7);
        }

        #[test]
        fn reversal_is_the_inverse(x in point(), y in point()) {
            let atlas = plane();
            let conn = so3_curved(atlas.clone());
            let p = line(&atlas, x, y);
            let t = transport(&conn, &p, 128).unwrap().element;
            let r = transport(&conn, &reverse(&p), 128).unwrap().element;
            prop_assert!(r.dist(&t.inverse()).unwrap() < 1e-8);
        }

        #[test]
        fn transport_stays_in_the_group(x in point(), y in point()) {
            let atlas = plane();
            let conn = so3_curved(atlas.clone());
            let t = transport(&conn, &line(&atlas, x, y), 64).unwrap().element;
            prop_assert!(LieGroup::SO3.membership_residual(t.matrix()) < 1e-10);
        }
    }
}
