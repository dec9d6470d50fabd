//! Fracture networks as JSON.
//!
//! ```json
//! {
//!   "segments": [[[0.05, 0.075], [0.35, 0.075]]],
//!   "generator": {
//!     "count": 28, "length_min": 0.15, "length_max": 0.35,
//!     "orientations_deg": [0, 90, 45], "seed": 7
//!   }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use shalegas_core::mesh::{FractureGenerator, FractureSpec, Segment};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub count: usize,
    pub length_min: f64,
    pub length_max: f64,
    pub orientations_deg: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureFile {
    #[serde(default)]
    pub segments: Vec<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorFile>,
}

impl From<&FractureFile> for FractureSpec {
    fn from(f: &FractureFile) -> Self {
        FractureSpec {
            segments: f.segments.iter().map(|s| Segment::new(s[0], s[1])).collect(),
            generator: f.generator.as_ref().map(|g| FractureGenerator {
                count: g.count,
                length_min: g.length_min,
                length_max: g.length_max,
                orientations: g.orientations_deg.iter().map(|d| d.to_radians()).collect(),
                seed: g.seed,
            }),
        }
    }
}

impl From<&FractureSpec> for FractureFile {
    fn from(s: &FractureSpec) -> Self {
        FractureFile {
            segments: s.segments.iter().map(|seg| [seg.a, seg.b]).collect(),
            generator: s.generator.as_ref().map(|g| GeneratorFile {
                count: g.count,
                length_min: g.length_min,
                length_max: g.length_max,
                orientations_deg: g.orientations.iter().map(|r| r.to_degrees()).collect(),
                seed: g.seed,
            }),
        }
    }
}

pub fn parse_fractures(text: &str, path: &Path) -> Result<FractureSpec> {
    let file: FractureFile = serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(FractureSpec::from(&file))
}

pub fn read_fractures(path: &Path) -> Result<FractureSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fractures(&text, path)
}

pub fn fractures_to_json(spec: &FractureSpec) -> String {
    serde_json::to_string_pretty(&FractureFile::from(spec)).expect("fracture file serializes")
}
