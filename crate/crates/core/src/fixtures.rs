//! Fixtures shipped with the crate, embedded at compile time.

use crate::config::{Consts, Fixture};
use crate::error::Result;

pub const SPHERE: &str = include_str!("../fixtures/sphere.toml");
pub const PLANE_FLUX: &str = include_str!("../fixtures/plane_flux.toml");
pub const TORUS: &str = include_str!("../fixtures/torus.toml");
pub const GL2_THREE_CHART: &str = include_str!("../fixtures/gl2_three_chart.toml");
pub const PLANE_TWO_CHART: &str = include_str!("../fixtures/plane_two_chart.toml");

/// `(name, source)` of every shipped fixture.
pub const ALL: &[(&str, &str)] = &[
    ("sphere", SPHERE),
    ("plane_flux", PLANE_FLUX),
    ("plane_two_chart", PLANE_TWO_CHART),
    ("torus", TORUS),
    ("gl2_three_chart", GL2_THREE_CHART),
];

pub fn load(name: &str) -> Result<Fixture> {
    load_with(name, &Consts::new())
}

/// Loads a shipped fixture with constant overrides.
pub fn load_with(name: &str, overrides: &Consts) -> Result<Fixture> {
    let (_, src) = ALL
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| crate::error::Error::Unknown { kind: "fixture", name: name.to_string() })?;
    Fixture::from_toml_with(name, src, overrides)
}
