//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines survive output capture.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use holokit::cocycle::{check_cocycle, hol_gamma, induced_functor, AxisEmbedding, CocycleObject};
use holokit::config::Fixture;
use holokit::expr::{build, ExprFn, Shape};
use holokit::fixtures;
use holokit::geometry::{gauge_transform, Gauge};
use holokit::lie::{GroupElement, LieGroup};
use holokit::path::{certify_thin, concat, reparam_homotopy, straight_line, Homotopy, Path};
use holokit::reconstruct::{
    cohomology_residual, constant_loop_derivative, extract_cocycle, roundtrip_check, tp, RICHARDSON_H,
};
use holokit::transport::{check_naturality, holonomy, transport, transport_element, BundleMorphism};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;
type Criterion<'a> = Box<dyn Fn() -> Check + 'a>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn load(name: &str) -> Result<Fixture, String> {
    fixtures::load(name).map_err(fail)
}

fn rotation(angle: f64) -> GroupElement {
    GroupElement::rotation(LieGroup::SO2, angle)
}

fn sphere_latitudes() -> Check {
    const ORACLE: &str = include_str!("../fixtures/oracles/sphere_latitudes.json");
    let oracle: serde_json::Value = serde_json::from_str(ORACLE).map_err(fail)?;
    let f = load("sphere")?;
    let conn = f.connection().map_err(fail)?;
    let (mut worst, mut worst_oracle, mut slowest) = (0.0f64, 0.0f64, Duration::ZERO);
    for (name, theta) in [("latitude_30", PI / 6.0), ("latitude_60", PI / 3.0), ("latitude_90", PI / 2.0)] {
        let start = Instant::now();
        let hol = holonomy(conn, f.path(name).map_err(fail)?, 4096).map_err(fail)?;
        slowest = slowest.max(start.elapsed());
        worst = worst.max(hol.element.dist(&rotation(2.0 * PI * (1.0 - theta.cos()))).map_err(fail)?);
        let entry = oracle["latitudes"]
            .as_array()
            .and_then(|a| a.iter().find(|e| e["path"] == name))
            .ok_or_else(|| format!("oracle has no entry for {name}"))?;
        let m: Vec<f64> = entry["matrix"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let diff = hol.element.matrix() - nalgebra::DMatrix::from_row_slice(2, 2, &m);
        worst_oracle = worst_oracle.max(diff.norm());
    }
    let pass = worst <= 1e-6 && worst_oracle <= 1e-6 && slowest <= Duration::from_secs(1);
    Ok((pass, format!("closed form {worst:.2e}, 1e6-step oracle {worst_oracle:.2e}, slowest loop {slowest:.2?}")))
}

fn abelian_flux() -> Check {
    let mut worst = 0.0f64;
    for a in [0.0, 0.5, PI] {
        let f = fixtures::load_with("plane_flux", &[("a".to_string(), a)].into()).map_err(fail)?;
        let t = transport(f.connection().map_err(fail)?, f.path("vertical").map_err(fail)?, 1024).map_err(fail)?;
        worst = worst.max(t.element.dist(&GroupElement::rotation(LieGroup::U1, -a)).map_err(fail)?);
    }
    Ok((worst <= 1e-10, format!("worst {worst:.2e} over a in {{0, 0.5, pi}}")))
}

fn thin_invariance() -> Check {
    let mut count = 0;
    let mut worst = 0.0f64;
    for name in ["sphere", "plane_flux"] {
        let f = load(name)?;
        let conn = f.connection().map_err(fail)?;
        let mut homotopies: Vec<(String, Homotopy)> =
            f.homotopies.iter().map(|(k, h)| (k.clone(), h.clone())).collect();
        for (k, p) in &f.paths {
            if [0.25, 0.5, 0.75].iter().all(|t| p.velocity(*t).is_ok_and(|v| v.iter().all(|x| *x == 0.0))) {
                continue;
            }
            homotopies.push((format!("reparam({k})"), reparam_homotopy(p).map_err(fail)?));
        }
        for (k, h) in homotopies {
            let cert = certify_thin(&h, 33, None).map_err(fail)?;
            if !cert.certified {
                return Ok((false, format!("{name}/{k} is not certified thin")));
            }
            let (g0, g1) = h.boundary().map_err(fail)?;
            let d = transport_element(conn, &g0, 512)
                .and_then(|t0| t0.dist(&transport_element(conn, &g1, 512)?))
                .map_err(fail)?;
            worst = worst.max(d);
            count += 1;
        }
    }
    Ok((count >= 20 && worst <= 1e-6, format!("{count} certified homotopies, worst {worst:.2e}")))
}

fn functoriality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut constant = 0.0f64;
    for (name, chart) in [("sphere", "N"), ("plane_flux", "R2")] {
        let f = load(name)?;
        let conn = f.connection().map_err(fail)?;
        let atlas = conn.atlas().clone();
        let point = |rng: &mut ChaCha8Rng| vec![rng.random_range(-1.4..1.4), rng.random_range(-1.4..1.4)];
        for _ in 0..25 {
            let (x, y, z) = (point(&mut rng), point(&mut rng), point(&mut rng));
            let tau = straight_line(atlas.clone(), chart, &x, &y).map_err(fail)?;
            let gamma = straight_line(atlas.clone(), chart, &y, &z).map_err(fail)?;
            let whole = transport_element(conn, &concat(&gamma, &tau).map_err(fail)?, 512).map_err(fail)?;
            let parts = transport_element(conn, &gamma, 512)
                .and_then(|g| g.mul(&transport_element(conn, &tau, 512)?))
                .map_err(fail)?;
            worst = worst.max(whole.dist(&parts).map_err(fail)?);
            pairs += 1;
        }
        let still = Path::constant(atlas, chart, &[0.3, -0.2]).map_err(fail)?;
        let id = GroupElement::identity(conn.group());
        constant = constant.max(transport_element(conn, &still, 64).map_err(fail)?.dist(&id).map_err(fail)?);
    }
    // Pairs that change charts on the sphere.
    let f = load("sphere")?;
    let conn = f.connection().map_err(fail)?;
    let tau = f.path("to_south").map_err(fail)?;
    for _ in 0..5 {
        let r = rng.random_range(0.6..1.6);
        let phi: f64 = rng.random_range(-1.2..1.2);
        let gamma =
            straight_line(conn.atlas().clone(), "S", &[1.0, 0.0], &[r * phi.cos(), r * phi.sin()]).map_err(fail)?;
        let whole = transport_element(conn, &concat(&gamma, tau).map_err(fail)?, 512).map_err(fail)?;
        let parts = transport_element(conn, &gamma, 512)
            .and_then(|g| g.mul(&transport_element(conn, tau, 512)?))
            .map_err(fail)?;
        worst = worst.max(whole.dist(&parts).map_err(fail)?);
        pairs += 1;
    }
    let pass = pairs >= 50 && worst <= 1e-7 && constant <= 1e-10;
    Ok((pass, format!("{pairs} pairs, worst {worst:.2e}; constant paths {constant:.2e}")))
}

/// `h · expm(0.5 x0 e)`, which no longer intertwines the two connections.
fn broken(gauge: &Gauge, atlas: &holokit::geometry::Atlas) -> Result<Gauge, String> {
    let kick = ExprFn::parse("expm(0.5 * x0 * [[0, -1], [1, 0]])", 2, Shape::Matrix(2, 2)).map_err(fail)?;
    let charts = (0..atlas.charts.len())
        .map(|c| ExprFn::from_expr(build::mul(gauge.expr(c).expr().clone(), kick.expr().clone()), 2))
        .collect::<holokit::Result<Vec<_>>>()
        .map_err(fail)?;
    Gauge::new(atlas, gauge.group(), charts).map_err(fail)
}

fn naturality() -> Check {
    let cases: &[(&str, &[&str])] = &[
        ("sphere", &["east", "north", "to_south", "cross", "arc_half"]),
        ("plane_flux", &["vertical", "wiggle", "square", "left"]),
        ("plane_two_chart", &["across", "right_up", "circle"]),
        ("torus", &["to_c10", "to_c11", "plaquette"]),
    ];
    let (mut worst, mut gauges, mut weakest_break) = (0.0f64, 0, f64::INFINITY);
    for (name, paths) in cases {
        let f = load(name)?;
        let conn = f.connection().map_err(fail)?;
        for gauge in f.gauges.values() {
            let moved = gauge_transform(conn, gauge).map_err(fail)?;
            let good = BundleMorphism::gauge(conn.atlas().clone(), gauge.clone());
            let bad = BundleMorphism::gauge(conn.atlas().clone(), broken(gauge, conn.atlas())?);
            let mut bad_worst = 0.0f64;
            for p in paths.iter() {
                let path = f.path(p).map_err(fail)?;
                let r = check_naturality(&good, conn, &moved, path, 512).map_err(fail)?;
                if r.residual > worst {
                    worst = r.residual;
                }
                bad_worst = bad_worst.max(check_naturality(&bad, conn, &moved, path, 512).map_err(fail)?.residual);
            }
            if bad_worst < weakest_break {
                weakest_break = bad_worst;
            }
            gauges += 1;
        }
    }
    let pass = gauges > 0 && worst <= 1e-7 && weakest_break >= 1e-2;
    Ok((pass, format!("{gauges} gauges, worst {worst:.2e}; broken morphisms fail by at least {weakest_break:.2e}")))
}

fn reconstruction() -> Check {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["plane_flux", "sphere"] {
        let f = load(name)?;
        let report = roundtrip_check(f.connection().map_err(fail)?, &RICHARDSON_H, 64, 32).map_err(fail)?;
        pass &= report.ratios.iter().all(|r| (0.2..=0.3).contains(r));
        details.push(format!("{name} ratios {:.3?}", report.ratios));
    }
    let f = load("sphere")?;
    let fine = roundtrip_check(f.connection().map_err(fail)?, &[1e-3], 100, 32).map_err(fail)?;
    let err = fine.rows[0].max_error;
    pass &= err <= 5e-4;
    details.push(format!("sphere error at h=1e-3 {err:.2e}"));
    Ok((pass, details.join("; ")))
}

fn barrett_derivative() -> Check {
    let mut worst = 0.0f64;
    for name in ["sphere", "plane_flux"] {
        let f = load(name)?;
        let oracle = tp(f.connection().map_err(fail)?, 64).map_err(fail)?;
        let d = constant_loop_derivative(&oracle, f.family("shrinking").map_err(fail)?, 0.0, 1e-4).map_err(fail)?;
        worst = worst.max(d);
    }
    Ok((worst <= 1e-5, format!("worst derivative norm {worst:.2e} at ds = 1e-4")))
}

fn cocycle_suite() -> Check {
    let mut law = 0.0f64;
    for name in ["sphere", "plane_flux", "plane_two_chart", "torus", "gl2_three_chart"] {
        let f = load(name)?;
        let obj = hol_gamma(f.connection().map_err(fail)?, 256).map_err(fail)?;
        law = law.max(check_cocycle(&CocycleObject::Trans(obj), 16).map_err(fail)?.worst());
    }
    let f = load("sphere")?;
    let conn = f.connection().map_err(fail)?;
    let oracle = tp(conn, 128).map_err(fail)?;
    let extracted = extract_cocycle(&oracle, f.access().map_err(fail)?).map_err(fail)?;
    let cohomology = cohomology_residual(&extracted, conn, 64).map_err(fail)?.worst;
    let embed = Arc::new(AxisEmbedding);
    let mut induced =
        check_cocycle(&induced_functor(embed.clone(), &CocycleObject::Conn(conn.clone())).map_err(fail)?, 64)
            .map_err(fail)?
            .worst();
    let trans = CocycleObject::Trans(hol_gamma(conn, 256).map_err(fail)?);
    induced = induced.max(check_cocycle(&induced_functor(embed, &trans).map_err(fail)?, 16).map_err(fail)?.worst());
    let pass = law <= 1e-7 && cohomology <= 1e-5 && induced <= 1e-7;
    Ok((pass, format!("hol_gamma laws {law:.2e}, extracted vs shipped {cohomology:.2e}, SO2->SO3 {induced:.2e}")))
}

/// Every fixture under every subcommand, through the binary.
const SUITE: &[(&str, &[&str])] = &[
    (
        "sphere",
        &[
            "transport",
            "holonomy",
            "sweep",
            "reconstruct",
            "extract-cocycle",
            "cocycle-check",
            "thin-check",
            "validate",
        ],
    ),
    (
        "plane_flux",
        &["transport", "sweep", "reconstruct", "extract-cocycle", "cocycle-check", "thin-check", "validate"],
    ),
    ("plane_flux_square", &["holonomy"]),
    (
        "plane_two_chart",
        &["transport", "sweep", "reconstruct", "extract-cocycle", "cocycle-check", "thin-check", "validate"],
    ),
    ("plane_two_chart_circle", &["holonomy"]),
    (
        "torus",
        &[
            "transport",
            "holonomy",
            "sweep",
            "reconstruct",
            "extract-cocycle",
            "cocycle-check",
            "thin-check",
            "validate",
        ],
    ),
    ("gl2_three_chart", &["transport", "reconstruct", "extract-cocycle", "cocycle-check", "thin-check", "validate"]),
    ("gl2_three_chart_circle", &["holonomy", "sweep"]),
];

struct SuiteRun {
    elapsed: Duration,
    failures: Vec<String>,
    mismatches: Vec<String>,
    runs: usize,
}

fn holokit(command: &str, config: &PathBuf) -> Result<(i32, Vec<u8>), String> {
    let out =
        Command::new(env!("CARGO_BIN_EXE_holokit")).args([command, "--config"]).arg(config).output().map_err(fail)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn strip_timestamp(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.contains("\"timestamp\"") && !l.starts_with("# timestamp"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_suite() -> Result<SuiteRun, String> {
    let runs_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/runs");
    let mut run = SuiteRun { elapsed: Duration::ZERO, failures: Vec::new(), mismatches: Vec::new(), runs: 0 };
    for (config, commands) in SUITE {
        let path = runs_dir.join(format!("{config}.toml"));
        for command in commands.iter() {
            let start = Instant::now();
            let (code, first) = holokit(command, &path)?;
            run.elapsed += start.elapsed();
            run.runs += 1;
            if code != 0 {
                run.failures.push(format!("{config}/{command} exited {code}"));
            }
            let (_, second) = holokit(command, &path)?;
            if strip_timestamp(&first) != strip_timestamp(&second) {
                run.mismatches.push(format!("{config}/{command}"));
            }
        }
    }
    Ok(run)
}

fn main() {
    let suite = run_suite();
    let determinism = || -> Check {
        let s = suite.as_ref().map_err(Clone::clone)?;
        Ok((s.mismatches.is_empty(), format!("{} reports rerun, mismatches: {:?}", s.runs, s.mismatches)))
    };
    let full_suite = || -> Check {
        let s = suite.as_ref().map_err(Clone::clone)?;
        let pass = s.failures.is_empty() && s.elapsed <= Duration::from_secs(60);
        Ok((pass, format!("{} runs in {:.1?}, failures: {:?}", s.runs, s.elapsed, s.failures)))
    };
    let criteria: Vec<(&str, Criterion)> = vec![
        ("sphere latitude holonomy", Box::new(sphere_latitudes)),
        ("abelian flux transport", Box::new(abelian_flux)),
        ("thin homotopy invariance", Box::new(thin_invariance)),
        ("functoriality", Box::new(functoriality)),
        ("gauge naturality", Box::new(naturality)),
        ("connection reconstruction", Box::new(reconstruction)),
        ("derivative at a constant loop", Box::new(barrett_derivative)),
        ("cocycle suite", Box::new(cocycle_suite)),
        ("deterministic reports", Box::new(determinism)),
        ("full example suite", Box::new(full_suite)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!("criterion {:>2} {:<32} {}  {detail}", i + 1, name, if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
