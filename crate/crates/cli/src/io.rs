//! JSON input formats: matrices and map specifications.

use std::io::Read;
use std::path::Path;

use posmap::maps::{compose, st_maps};
use posmap::{ComplexMatrix, MapRep, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{"rows": R, "cols": C, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Usage(format!(
                "matrix declared {}x{} needs {} entries, found {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.data.len()
            )));
        }
        let data = self
            .data
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        Ok(ComplexMatrix::from_row_major(self.rows, self.cols, data)?)
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m.row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// A map built from the constructions of the library. `compose` applies its
/// list right to left: `{"kind": "compose", "maps": [f, g]}` is `f ∘ g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MapSpec {
    #[serde(rename = "ad")]
    Ad { s: MatrixJson },
    #[serde(rename = "ad_transpose")]
    AdTranspose { s: MatrixJson },
    #[serde(rename = "identity")]
    Identity { dim: usize },
    #[serde(rename = "transpose")]
    Transpose { dim: usize },
    #[serde(rename = "embed_S")]
    EmbedS { r: usize, n: usize },
    #[serde(rename = "compress_T")]
    CompressT { m: usize, r: usize },
    #[serde(rename = "choi")]
    Choi {
        m: usize,
        n: usize,
        choi: MatrixJson,
    },
    #[serde(rename = "compose")]
    Compose { maps: Vec<MapSpec> },
}

impl MapSpec {
    pub fn resolve(&self) -> Result<MapRep, CliError> {
        Ok(match self {
            MapSpec::Ad { s } => MapRep::ad(&s.to_matrix()?),
            MapSpec::AdTranspose { s } => MapRep::ad_transpose(&s.to_matrix()?),
            MapSpec::Identity { dim } => MapRep::identity(positive(*dim, "dim")?),
            MapSpec::Transpose { dim } => MapRep::transpose(positive(*dim, "dim")?),
            MapSpec::EmbedS { r, n } => st_maps(*r, *n)?.0,
            MapSpec::CompressT { m, r } => st_maps(*r, *m)?.1,
            MapSpec::Choi { m, n, choi } => MapRep::from_choi(*m, *n, choi.to_matrix()?)?,
            MapSpec::Compose { maps } => {
                let mut iter = maps.iter().rev();
                let first = iter
                    .next()
                    .ok_or_else(|| CliError::Usage("compose needs at least one map".into()))?;
                let mut acc = first.resolve()?;
                for outer in iter {
                    acc = compose(&outer.resolve()?, &acc)?;
                }
                acc
            }
        })
    }
}

fn positive(value: usize, name: &str) -> Result<usize, CliError> {
    if value == 0 {
        return Err(CliError::Usage(format!("{name} must be positive")));
    }
    Ok(value)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyInput {
    pub map: MapSpec,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInput {
    pub left: MapSpec,
    pub right: MapSpec,
}

/// Reads `path`, or standard input when no path is given.
pub fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })
}
