//! The `holokit` command line: run configs, subcommands and report output.
//!
//! A run config is a TOML file naming a fixture and the objects in it that
//! each subcommand works on. Flags override the numeric parameters.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cocycle::{
    check_cocycle, check_transitions, equivalent_objects, hol_gamma, induced_functor, AxisEmbedding, CocycleMorphism,
    CocycleObject, CoverGroupoid, Determinant, GroupHomomorphism, Identity,
};
use crate::config::{Consts, Fixture};
use crate::error::{Error, Result};
use crate::geometry::{gauge_transform, validate_descent};
use crate::lie::LieGroup;
use crate::path::certify_thin;
use crate::reconstruct::{cohomology_residual, extract_cocycle, roundtrip_check, spot_check, tp};
use crate::transport::{family_transport, holonomy, transport, TransportMap};

pub const SCHEMA_VERSION: u32 = 1;

/// Every numeric default used by the command line.
pub mod defaults {
    /// RKMK4 steps per segment for `transport`, `holonomy`, `sweep` and `thin-check`.
    pub const STEPS: usize = 1024;
    /// Steps per segment behind oracles in `reconstruct`, `extract-cocycle` and `cocycle-check`.
    pub const ORACLE_STEPS: usize = 128;
    /// Largest finite-difference scale; `reconstruct` also runs `h/2` and `h/4`.
    pub const H: f64 = 1e-2;
    /// Halton samples per chart or overlap.
    pub const SAMPLES: usize = 64;
    /// Offset into every sampled sequence.
    pub const SEED: u64 = 0;
    /// Residual threshold above which a check becomes a warning.
    pub const TOL: f64 = 1e-7;
    /// Grid points per parameter axis in `sweep`.
    pub const GRID: usize = 9;
    /// Lattice size for `thin-check`.
    pub const THIN_GRID: usize = 33;
    /// Accepted Richardson ratio band for a second-order stencil.
    pub const RATIO_BAND: (f64, f64) = (0.2, 0.3);
    /// Composable pairs per chart in oracle spot checks.
    pub const SPOT_PAIRS: usize = 8;
}

#[derive(Parser, Debug)]
#[command(name = "holokit", version, about = "Parallel transport and descent data on chart-presented bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run config (TOML) naming a fixture and the objects to use.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RKMK4 steps per path segment.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Finite-difference scale.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Sample points per chart or overlap.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Offset into the sampling sequences.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Residual above which a check warns.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Transport along the config's `path`.
    Transport,
    /// Holonomy of the config's `path`, which must be a loop.
    Holonomy,
    /// CSV of transports over the config's `family`.
    Sweep,
    /// Richardson report of connection reconstruction from transport.
    Reconstruct,
    /// Transition cocycle read off transport through the access paths.
    ExtractCocycle,
    /// Cocycle laws of the connection and its transport object.
    CocycleCheck,
    /// Thinness certificate for the config's `homotopy`.
    ThinCheck,
    /// Atlas and descent-data validation.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transport => "transport",
            Command::Holonomy => "holonomy",
            Command::Sweep => "sweep",
            Command::Reconstruct => "reconstruct",
            Command::ExtractCocycle => "extract-cocycle",
            Command::CocycleCheck => "cocycle-check",
            Command::ThinCheck => "thin-check",
            Command::Validate => "validate",
        }
    }

    pub const ALL: [Command; 8] = [
        Command::Transport,
        Command::Holonomy,
        Command::Sweep,
        Command::Reconstruct,
        Command::ExtractCocycle,
        Command::CocycleCheck,
        Command::ThinCheck,
        Command::Validate,
    ];
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunFile {
    fixture: String,
    #[serde(default)]
    constants: Consts,
    path: Option<String>,
    family: Option<String>,
    homotopy: Option<String>,
    gauge: Option<String>,
    homomorphism: Option<String>,
    steps: Option<usize>,
    h: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    grid: Option<usize>,
}

/// Numeric parameters after applying config values and flag overrides.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Params {
    pub steps: Option<usize>,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub grid: usize,
}

/// A loaded run config.
#[derive(Debug)]
pub struct RunConfig {
    pub source: PathBuf,
    pub fixture_file: String,
    pub fixture: Fixture,
    pub path: Option<String>,
    pub family: Option<String>,
    pub homotopy: Option<String>,
    pub gauge: Option<String>,
    pub homomorphism: Option<String>,
    pub params: Params,
}

impl RunConfig {
    pub fn load(file: &FsPath, cli: &Cli) -> Result<RunConfig> {
        let at = file.display().to_string();
        let src = std::fs::read_to_string(file).map_err(|e| Error::Io(format!("{at}: {e}")))?;
        let spec: RunFile =
            toml::from_str(&src).map_err(|e| Error::config(&at, e.message()).with_span(&src, e.span()))?;
        let base = file.parent().unwrap_or(FsPath::new("."));
        let fixture_path = base.join(&spec.fixture);
        let fsrc = std::fs::read_to_string(&fixture_path)
            .map_err(|e| Error::config(format!("{at}: fixture"), format!("{}: {e}", fixture_path.display())))?;
        let name = fixture_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let fixture = Fixture::from_toml_with(&name, &fsrc, &spec.constants).map_err(|e| match e {
            Error::Config { path, message } => {
                Error::Config { path: format!("{}: {path}", fixture_path.display()), message }
            }
            other => other,
        })?;
        let params = Params {
            steps: cli.steps.or(spec.steps),
            h: cli.h.or(spec.h).unwrap_or(defaults::H),
            samples: cli.samples.or(spec.samples).unwrap_or(defaults::SAMPLES),
            seed: cli.seed.or(spec.seed).unwrap_or(defaults::SEED),
            tol: cli.tol.or(spec.tol).unwrap_or(defaults::TOL),
            grid: spec.grid.unwrap_or(defaults::GRID),
        };
        if !(params.tol > 0.0) {
            return Err(Error::config(format!("{at}: tol"), "must be positive"));
        }
        if !(params.h > 0.0) {
            return Err(Error::config(format!("{at}: h"), "must be positive"));
        }
        if params.samples == 0 {
            return Err(Error::config(format!("{at}: samples"), "must be positive"));
        }
        if let Some(s) = params.steps.filter(|s| *s < crate::transport::MIN_STEPS) {
            return Err(Error::config(format!("{at}: steps"), format!("must be at least 16, got {s}")));
        }
        Ok(RunConfig {
            source: file.to_path_buf(),
            fixture_file: spec.fixture,
            fixture,
            path: spec.path,
            family: spec.family,
            homotopy: spec.homotopy,
            gauge: spec.gauge,
            homomorphism: spec.homomorphism,
            params,
        })
    }

    fn need<'a>(&self, value: &'a Option<String>, key: &str) -> Result<&'a str> {
        value
            .as_deref()
            .ok_or_else(|| Error::config(format!("{}: {key}", self.source.display()), "required by this command"))
    }

    fn steps(&self, default: usize) -> usize {
        self.params.steps.unwrap_or(default)
    }
}

/// Result of one subcommand: the report body and any accuracy warnings.
pub struct Outcome {
    pub body: String,
    pub warnings: Vec<String>,
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn reproducibility(run: &RunConfig, steps: Option<usize>) -> Value {
    json!({
        "holokit": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "fixture": run.fixture_file,
        "seed": run.params.seed,
        "parameters": {
            "steps": steps,
            "h": run.params.h,
            "samples": run.params.samples,
            "tol": run.params.tol,
            "grid": run.params.grid,
        },
    })
}

/// Pretty JSON with the timestamp as the last key, alone on its line.
fn document(command: Command, run: &RunConfig, steps: Option<usize>, result: Value) -> Result<String> {
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "fixture": run.fixture.name,
        "result": result,
        "reproducibility": reproducibility(run, steps),
    });
    let mut text = serde_json::to_string_pretty(&body).map_err(|e| Error::Io(e.to_string()))?;
    text.truncate(text.len() - 2);
    text.push_str(&format!(",\n  \"timestamp\": {}\n}}\n", timestamp()));
    Ok(text)
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn transport_json(m: &TransportMap) -> Value {
    json!({
        "source": m.source,
        "target": m.target,
        "matrix": rows(m.element.matrix()),
        "angle": m.element.angle(),
        "unwrapped_angle": m.unwrapped_angle,
        "error_estimate": m.error_estimate,
        "steps": m.steps,
        "warning": m.warning,
    })
}

fn homomorphism(name: &str, group: LieGroup) -> Result<Arc<dyn GroupHomomorphism>> {
    match name {
        "identity" => Ok(Arc::new(Identity(group))),
        "SO2->SO3" => Ok(Arc::new(AxisEmbedding)),
        "det" => match group {
            LieGroup::GL(n) => Ok(Arc::new(Determinant(n))),
            other => Err(Error::InvalidArgument(format!("det needs a GL(n) connection, got {other}"))),
        },
        other => Err(Error::Unknown { kind: "homomorphism", name: other.to_string() }),
    }
}

pub fn execute(command: Command, run: &RunConfig) -> Result<Outcome> {
    let f = &run.fixture;
    let p = &run.params;
    let mut warnings = Vec::new();
    let body = match command {
        Command::Transport | Command::Holonomy => {
            let conn = f.connection()?;
            let path = f.path(run.need(&run.path, "path")?)?;
            let steps = run.steps(defaults::STEPS);
            let map =
                if command == Command::Holonomy { holonomy(conn, path, steps)? } else { transport(conn, path, steps)? };
            warnings.extend(map.warning.clone());
            let mut result = transport_json(&map);
            result["path"] = json!(run.path);
            document(command, run, Some(steps), result)?
        }
        Command::Sweep => return sweep(run),
        Command::Reconstruct => {
            let steps = run.steps(defaults::ORACLE_STEPS);
            let hs = [p.h, p.h / 2.0, p.h / 4.0];
            let report = roundtrip_check(f.connection()?, &hs, p.samples, steps)?;
            let (lo, hi) = defaults::RATIO_BAND;
            for r in &report.ratios {
                if !(lo..=hi).contains(r) {
                    warnings.push(format!("Richardson ratio {r:.4} outside [{lo}, {hi}]"));
                }
            }
            let result = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
            document(command, run, Some(steps), result)?
        }
        Command::ExtractCocycle => {
            let conn = f.connection()?;
            let steps = run.steps(defaults::ORACLE_STEPS);
            let oracle = tp(conn, steps)?;
            let spot = spot_check(&oracle, defaults::SPOT_PAIRS, p.seed)?;
            if !spot.passed {
                warnings.push("oracle failed functoriality spot checks".into());
            }
            let extracted = extract_cocycle(&oracle, f.access()?)?;
            let groupoid = CoverGroupoid::new(f.atlas.clone(), p.samples)?;
            let laws = check_transitions(&extracted, &groupoid)?;
            let cohomology = cohomology_residual(&extracted, conn, p.samples)?;
            if !laws.passes(p.tol) {
                warnings.push(format!("extracted cocycle residual {:.3e} exceeds {:e}", laws.worst(), p.tol));
            }
            let result = json!({
                "group": conn.group().name(),
                "spot_check": spot,
                "laws": laws,
                "cohomology_residual": cohomology,
                "overlaps": extracted.sample(p.samples)?,
            });
            document(command, run, Some(steps), result)?
        }
        Command::CocycleCheck => {
            let conn = f.connection()?;
            let steps = run.steps(defaults::ORACLE_STEPS);
            let connection = check_cocycle(&CocycleObject::Conn(conn.clone()), p.samples)?;
            let hol = hol_gamma(conn, steps)?;
            let transport = check_cocycle(&CocycleObject::Trans(hol.clone()), p.samples)?;
            let mut result = json!({ "connection": connection, "transport": transport });
            let mut worst = connection.worst().max(transport.worst());
            if let Some(name) = &run.homomorphism {
                let rho = homomorphism(name, conn.group())?;
                let pushed = induced_functor(rho, &CocycleObject::Conn(conn.clone()))?;
                let report = check_cocycle(&pushed, p.samples)?;
                worst = worst.max(report.worst());
                result["induced"] = json!({ "homomorphism": name, "group": pushed.group().name(), "report": report });
            }
            if let Some(name) = &run.gauge {
                let gauge = f.gauge(name)?;
                let moved = hol_gamma(&gauge_transform(conn, gauge)?, steps)?;
                let report = equivalent_objects(&hol, &moved, &CocycleMorphism::new(gauge.clone()), p.samples)?;
                worst = worst.max(report.residual());
                result["gauge_equivalence"] = json!({ "gauge": name, "report": report });
            }
            if worst > p.tol {
                warnings.push(format!("cocycle residual {worst:.3e} exceeds {:e}", p.tol));
            }
            document(command, run, Some(steps), result)?
        }
        Command::ThinCheck => {
            let name = run.need(&run.homotopy, "homotopy")?;
            let h = f.homotopy(name)?;
            let cert = certify_thin(h, defaults::THIN_GRID, None)?;
            let mut result = json!({ "homotopy": name, "certificate": cert });
            let steps = run.steps(defaults::STEPS);
            if !cert.certified {
                warnings.push(format!("homotopy `{name}` is not certified thin (σ₂ = {:.3e})", cert.max_sigma2));
            } else if let Some(conn) = &f.connection {
                let (g0, g1) = h.boundary()?;
                let (t0, t1) = (transport(conn, &g0, steps)?, transport(conn, &g1, steps)?);
                result["boundary_residual"] = json!(t0.element.dist(&t1.element)?);
            }
            document(command, run, Some(steps), result)?
        }
        Command::Validate => {
            let atlas = f.atlas.validate(p.samples);
            let mut result = json!({ "atlas": atlas, "paths": f.paths.len(), "homotopies": f.homotopies.len() });
            if !atlas.containment_violations.is_empty() {
                warnings
                    .push(format!("{} overlap samples lie outside their chart", atlas.containment_violations.len()));
            }
            if let Some(conn) = &f.connection {
                let descent = validate_descent(conn, p.samples)?;
                let worst = descent.cocycle.worst.max(descent.inverse.worst).max(descent.compatibility.worst);
                if worst > p.tol {
                    warnings.push(format!("descent residual {worst:.3e} exceeds {:e}", p.tol));
                }
                result["descent"] = json!(descent);
            }
            document(command, run, None, result)?
        }
    };
    Ok(Outcome { body, warnings })
}

fn sweep(run: &RunConfig) -> Result<Outcome> {
    let f = &run.fixture;
    let name = run.need(&run.family, "family")?;
    let fam = f.family(name)?;
    let steps = run.steps(defaults::STEPS);
    let table = family_transport(f.connection()?, fam, run.params.grid, steps)?;
    let mut out = String::new();
    out.push_str(&format!("# holokit sweep, schema_version {SCHEMA_VERSION}\n"));
    out.push_str(&format!("# timestamp: {}\n", timestamp()));
    out.push_str(&format!("# fixture: {} ({}), family: {name}\n", f.name, run.fixture_file));
    out.push_str(&format!(
        "# holokit {}, seed {}, steps {steps}, grid {}\n",
        env!("CARGO_PKG_VERSION"),
        run.params.seed,
        run.params.grid
    ));
    if let Some(c) = table.smoothness {
        out.push_str(&format!("# smoothness: {c:e}\n"));
    }
    let k = fam.params();
    let m = table.log_coords.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (0..k).map(|j| format!("u{j}")).collect();
    header.extend((0..m).map(|j| format!("log{j}")));
    let circle = table.elements.first().is_some_and(|g| g.angle().is_some());
    if circle {
        header.push("angle".into());
    }
    header.push("error_estimate".into());
    out.push_str(&header.join(","));
    out.push('\n');
    let mut warnings = Vec::new();
    for (i, ((u, l), e)) in table.params.iter().zip(&table.log_coords).zip(&table.error_estimates).enumerate() {
        let mut cells: Vec<f64> = u.iter().chain(l).copied().collect();
        cells.extend(table.elements[i].angle().filter(|_| circle));
        cells.push(*e);
        let cells: Vec<String> =
            cells.iter().map(|x| serde_json::to_string(x).unwrap_or_else(|_| "nan".into())).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
        if *e > crate::transport::WARN_ESTIMATE {
            warnings.push(format!("step-halving estimate {e:.3e} at {u:?}"));
        }
    }
    Ok(Outcome { body: out, warnings })
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            for w in &outcome.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            if outcome.warnings.is_empty() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn run_cli(cli: &Cli) -> Result<Outcome> {
    let file = cli.config.as_ref().ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let run = RunConfig::load(file, cli)?;
    execute(cli.command, &run)
}

#[cfg(test)]
mod tests;
