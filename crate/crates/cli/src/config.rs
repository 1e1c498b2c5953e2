use std::path::Path;

use donor_drp::{
    species::{SpeciesDoc, SpeciesParams},
    Error, Result,
};
use serde::Deserialize;

/// Species given by name/path or inline.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpeciesRef {
    Name(String),
    Inline(SpeciesDoc),
}

/// Run parameters read from `--config`. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: Option<SpeciesRef>,
    #[serde(rename = "gamma_e_GHz_per_T")]
    pub gamma_e: Option<f64>,
    pub output: Option<String>,
    pub roots: Option<String>,
    pub transition: Option<String>,
    /// Single field in tesla.
    #[serde(rename = "B0_T")]
    pub b0: Option<f64>,
    /// Field sweep `lo:hi:n`.
    #[serde(rename = "B")]
    pub field: Option<String>,
    pub range: Option<String>,
    pub grid: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub t: Option<String>,
    pub dimensionless: Option<bool>,
    pub axis: Option<String>,
    pub include_dark: Option<bool>,
    pub density_per_m3: Option<f64>,
    pub spacing_m: Option<f64>,
    pub radius_m: Option<f64>,
    pub r_min_m: Option<f64>,
    pub mode: Option<String>,
    pub n_realizations: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Resolves a species name or file path.
pub fn species_by_name(name: &str) -> Result<SpeciesParams> {
    if let Some(sp) = SpeciesParams::builtin(name) {
        return Ok(sp);
    }
    let path = Path::new(name);
    if path.exists() {
        return SpeciesParams::from_file(path);
    }
    Err(Error::Parameter(format!(
        "unknown species `{name}`: use Bi or a path to a species TOML file"
    )))
}

pub fn resolve_species(
    flag: Option<&str>,
    config: Option<&SpeciesRef>,
    gamma_e: Option<f64>,
) -> Result<SpeciesParams> {
    let sp = match (flag, config) {
        (Some(name), _) => species_by_name(name)?,
        (None, Some(SpeciesRef::Name(name))) => species_by_name(name)?,
        (None, Some(SpeciesRef::Inline(doc))) => doc.clone().into_params()?,
        (None, None) => SpeciesParams::bismuth(),
    };
    match gamma_e {
        Some(g) => sp.with_gamma_e(g),
        None => Ok(sp),
    }
}
