//! Optional TOML configuration, one table per subcommand:
//!
//! ```toml
//! [curve]
//! kind = "x"
//! y0 = 2.0
//! range = [0.002, 100.0]
//! n = 4096
//!
//! [invariants.bounds]
//! maurer-cartan = 1e-6
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{CurveKindArg, Format};
use crate::error::{CliError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub eval: EvalSection,
    pub curve: CurveSection,
    pub grid: GridSection,
    pub invariants: InvariantsSection,
    pub reflect: ReflectSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    pub kind: Option<CurveKindArg>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub range: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub init: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub rect: Option<[f64; 3]>,
    pub n: Option<usize>,
    pub init: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantsSection {
    pub only: Option<Vec<String>>,
    pub bounds: BTreeMap<String, f64>,
    pub rect: Option<[f64; 3]>,
    pub n: Option<usize>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReflectSection {
    pub x: Option<f64>,
    pub half_width: Option<f64>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
