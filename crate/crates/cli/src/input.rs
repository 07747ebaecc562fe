use std::fs;
use std::path::Path;

use affine_spectra_core::coding::Point;
use affine_spectra_core::{preset, rational, Branch, Coding, SelfAffineSystem, SpectrumConstants};
use serde::Deserialize;

use crate::args::{Source, SpectrumSource};
use crate::error::CliError;

#[derive(Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum SystemJson {
    Polygon { vertices: Vec<[f64; 2]>, d: Vec<f64> },
    Branches { branches: Vec<Branch> },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn system_from_json(text: &str) -> Result<SelfAffineSystem, CliError> {
    let parsed: SystemJson = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("expected {{vertices, d}} or {{branches}}: {e}")))?;
    Ok(match parsed {
        SystemJson::Polygon { vertices, d } => SelfAffineSystem::from_polygon(&vertices, &d)?,
        SystemJson::Branches { branches } => SelfAffineSystem::from_branches(&branches)?,
    })
}

fn load(preset_name: Option<&str>, path: Option<&Path>) -> Result<SelfAffineSystem, CliError> {
    match (preset_name, path) {
        (Some(name), _) => Ok(preset(name)?),
        (None, Some(path)) => system_from_json(&read(path)?),
        (None, None) => Err(CliError::Usage("a system source is required".into())),
    }
}

pub fn system(source: &Source) -> Result<SelfAffineSystem, CliError> {
    load(source.preset.as_deref(), source.system.as_deref())
}

pub fn constants(source: &SpectrumSource) -> Result<SpectrumConstants, CliError> {
    if let Some(path) = &source.constants {
        let c: SpectrumConstants =
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("constants: {e}")))?;
        c.check()?;
        return Ok(c);
    }
    let sys = load(source.preset.as_deref(), source.system.as_deref())?;
    Ok(affine_spectra_core::compute_constants(&sys)?)
}

/// `1/3` and decimals are exact; anything else must parse as a float.
pub fn point(s: &str) -> Result<Point, CliError> {
    if let Some(q) = rational::parse(s) {
        return Ok(Point::Exact(q));
    }
    s.trim()
        .parse::<f64>()
        .map(Point::Float)
        .map_err(|_| CliError::Input(format!("not a number: {s}")))
}

pub fn coding(s: &str) -> Result<Coding, CliError> {
    Ok(Coding::parse(s)?)
}
