//! JSON formats for states, effects and chain specifications.
//!
//! A state or effect is accepted in either picture:
//!
//! ```json
//! {"d": 2, "rho": [[[re, im], ...], ...]}
//! {"d": 2, "R": [[...], ...]}
//! ```
//!
//! `rho` rows are the complex density (or effect) matrix entries as
//! `[re, im]` pairs; `R` is the real Bloch matrix of dimension `d^2`. Both
//! forms are validated on parse. A chain is
//! `{"sources": [...], "measurements": [...]}` with operators in either
//! form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{
    bloch_to_effect, bloch_to_state, effect_to_bloch, state_to_bloch, BlochError, BlochMatrix,
    OperatorBasis, OperatorKind,
};
use crate::numerics::{ComplexMatrix, RealMatrix};
use crate::swapping::{ChainSpec, SwapError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid operator description: {0}")]
    Invalid(String),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Chain(#[from] SwapError),
}

/// One state or effect in either picture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    pub sources: Vec<OperatorJson>,
    pub measurements: Vec<OperatorJson>,
}

fn complex_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, IoError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Invalid(
            "rho must be a nonempty square matrix".into(),
        ));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m.set(i, j, C64::new(re, im));
        }
    }
    Ok(m)
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<RealMatrix, IoError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Invalid(
            "R must be a nonempty square matrix".into(),
        ));
    }
    Ok(RealMatrix::from_rows(rows.to_vec()))
}

impl OperatorJson {
    pub fn to_bloch(&self, kind: OperatorKind) -> Result<BlochMatrix, IoError> {
        let basis = OperatorBasis::cached(self.d)?;
        match (&self.rho, &self.r) {
            (Some(_), Some(_)) => Err(IoError::Invalid(
                "give either 'rho' or 'R', not both".into(),
            )),
            (None, None) => Err(IoError::Invalid("missing 'rho' or 'R'".into())),
            (Some(rows), None) => {
                let m = complex_matrix(rows)?;
                Ok(match kind {
                    OperatorKind::State => state_to_bloch(&m, basis)?,
                    OperatorKind::Effect => effect_to_bloch(&m, basis)?,
                })
            }
            (None, Some(rows)) => {
                let r = BlochMatrix::from_matrix(self.d, kind, real_matrix(rows)?)?;
                // Validate by reconstructing the operator.
                match kind {
                    OperatorKind::State => {
                        bloch_to_state(&r, basis)?;
                    }
                    OperatorKind::Effect => {
                        let e = bloch_to_effect(&r, basis)?;
                        effect_to_bloch(&e, basis)?;
                    }
                }
                Ok(r)
            }
        }
    }

    /// Bloch-picture description of an operator.
    pub fn from_bloch(r: &BlochMatrix) -> Self {
        Self {
            d: r.d(),
            rho: None,
            r: Some(matrix_rows(r.matrix())),
        }
    }
}

/// Row vectors of a real matrix, for serialization.
pub fn matrix_rows(m: &RealMatrix) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
        .collect()
}

/// Parse a state in either picture.
pub fn parse_state(json: &str) -> Result<BlochMatrix, IoError> {
    let op: OperatorJson = serde_json::from_str(json)?;
    op.to_bloch(OperatorKind::State)
}

/// Parse an effect in either picture.
pub fn parse_effect(json: &str) -> Result<BlochMatrix, IoError> {
    let op: OperatorJson = serde_json::from_str(json)?;
    op.to_bloch(OperatorKind::Effect)
}

/// Parse a chain specification.
pub fn parse_chain(json: &str) -> Result<ChainSpec, IoError> {
    let chain: ChainJson = serde_json::from_str(json)?;
    let sources = chain
        .sources
        .iter()
        .map(|s| s.to_bloch(OperatorKind::State))
        .collect::<Result<Vec<_>, _>>()?;
    let measurements = chain
        .measurements
        .iter()
        .map(|m| m.to_bloch(OperatorKind::Effect))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChainSpec::new(sources, measurements)?)
}
