//! On-disk instance format.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use prs_core::{KdspInstance, PrsError, PrsInstance, SlabConstraints};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kdsp: Option<KdspSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "H")]
    pub h: MatrixSpec,
    pub c: Vec<f64>,
    pub sigma: f64,
    pub p: f64,
}

/// Dense row-major rows, or `{"diag": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Dense(Vec<Vec<f64>>),
    Diagonal { diag: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub rows: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdspSpec {
    #[serde(rename = "D")]
    pub d: Vec<Vec<i64>>,
    pub k: usize,
}

#[derive(Debug)]
pub enum InputError {
    Io(String, std::io::Error),
    Parse(serde_json::Error),
    Schema(String),
    Invalid(PrsError),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(path, e) => write!(f, "cannot read {path}: {e}"),
            // serde_json messages end with "at line L column C"
            InputError::Parse(e) => write!(f, "malformed instance file: {e}"),
            InputError::Schema(msg) => write!(f, "invalid instance file: {msg}"),
            InputError::Invalid(e) => write!(f, "invalid instance: {e}"),
        }
    }
}

impl From<PrsError> for InputError {
    fn from(e: PrsError) -> Self {
        InputError::Invalid(e)
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(InputError::Parse)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(InputError::Schema(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        match (&file.problem, &file.kdsp) {
            (Some(_), None) => {}
            (None, Some(_)) => {
                if file.constraints.is_some() {
                    return Err(InputError::Schema(
                        "constraints are generated by the kdsp reduction and cannot be given".into(),
                    ));
                }
            }
            _ => {
                return Err(InputError::Schema(
                    "exactly one of `problem` and `kdsp` must be present".into(),
                ))
            }
        }
        Ok(file)
    }

    pub fn read(path: &str) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::Io(path.into(), e))?;
        Self::parse(&text)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    pub fn instance(&self) -> Result<PrsInstance, InputError> {
        let spec = self
            .problem
            .as_ref()
            .ok_or_else(|| InputError::Schema("this command needs a `problem` section".into()))?;
        let n = spec.c.len();
        let h = match &spec.h {
            MatrixSpec::Diagonal { diag } => {
                if diag.len() != n {
                    return Err(InputError::Schema(format!(
                        "H.diag has {} entries but c has {n}",
                        diag.len()
                    )));
                }
                DMatrix::from_diagonal(&DVector::from_column_slice(diag))
            }
            MatrixSpec::Dense(rows) => dense(rows, n, "H")?,
        };
        Ok(PrsInstance::new(h, DVector::from_column_slice(&spec.c), spec.sigma, spec.p)?)
    }

    pub fn constraints(&self, n: usize) -> Result<Option<SlabConstraints>, InputError> {
        let Some(spec) = &self.constraints else {
            return Ok(None);
        };
        let rows = if spec.rows.is_empty() {
            DMatrix::zeros(0, n)
        } else {
            dense(&spec.rows, n, "constraints.rows")?
        };
        Ok(Some(SlabConstraints::new(
            rows,
            DVector::from_column_slice(&spec.lower),
            DVector::from_column_slice(&spec.upper),
        )?))
    }

    pub fn kdsp(&self) -> Result<KdspInstance, InputError> {
        let spec = self
            .kdsp
            .as_ref()
            .ok_or_else(|| InputError::Schema("this command needs a `kdsp` section".into()))?;
        let n = spec.d.len();
        if spec.d.iter().any(|r| r.len() != n) {
            return Err(InputError::Schema("kdsp.D must be square".into()));
        }
        let d = DMatrix::from_fn(n, n, |i, j| spec.d[i][j]);
        Ok(KdspInstance::new(d, spec.k)?)
    }
}

fn dense(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<DMatrix<f64>, InputError> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(InputError::Schema(format!(
            "{what} row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
