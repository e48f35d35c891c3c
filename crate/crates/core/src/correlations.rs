//! The five quantum-correlation measures, computed from either picture.
//!
//! All of them are driven by the singular values `s1 >= s2 >= s3` of the
//! correlation block `T` except the concurrence, which needs the density
//! matrix itself:
//!
//! * CHSH nonlocality `B = max{0, s1^2 + s2^2 - 1}` (Horodecki criterion)
//! * F3 steering `BF3 = max{0, (s1^2 + s2^2 + s3^2 - 1) / 2}` (Costa-Angelo)
//! * usefulness for teleportation `D = max{0, (|s1| + |s2| - chi |s3| - 1) / 2}`
//!   with the signed chirality `chi = det T`
//! * concurrence `C = max{0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)}`
//!   over the spectrum of `rho (s2 x s2) rho* (s2 x s2)`
//! * quantum obesity `Omega = |det R|^(1/d^2)`, defined for any d
//!
//! Nonlocal implies steerable implies useful for teleportation implies
//! entangled; obesity upper-bounds the concurrence.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{
    bloch_to_state, state_to_bloch, BlochError, BlochMatrix, OperatorBasis, OperatorKind,
};
use crate::numerics::{
    determinant_real, herm_eigvals, psd_sqrt, singular_values_desc, ComplexMatrix,
};

#[derive(Debug, Error)]
pub enum CorrelationsError {
    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl From<BlochError> for CorrelationsError {
    fn from(e: BlochError) -> Self {
        CorrelationsError::InvalidState(e.to_string())
    }
}

impl From<crate::numerics::NumericsError> for CorrelationsError {
    fn from(e: crate::numerics::NumericsError) -> Self {
        CorrelationsError::InvalidState(e.to_string())
    }
}

/// All five measures of one two-qubit state, with the `T`-block singular
/// values and the chirality they were computed from.
///
/// Serialized field names follow the letters used throughout the CSV/JSON
/// interfaces: `B`, `BF3`, `D`, `C`, `Omega`, `s`, `chi`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    #[serde(rename = "B")]
    pub chsh: f64,
    #[serde(rename = "BF3")]
    pub steering: f64,
    #[serde(rename = "D")]
    pub teleportation: f64,
    #[serde(rename = "C")]
    pub concurrence: f64,
    #[serde(rename = "Omega")]
    pub obesity: f64,
    #[serde(rename = "s")]
    pub singular_values: [f64; 3],
    #[serde(rename = "chi")]
    pub chirality: f64,
}

impl CorrelationReport {
    /// Labels matching `as_array`.
    pub const MEASURE_NAMES: [&'static str; 5] = ["B", "BF3", "D", "C", "Omega"];

    /// The measures in their fixed order `(B, BF3, D, C, Omega)`.
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.chsh,
            self.steering,
            self.teleportation,
            self.concurrence,
            self.obesity,
        ]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn t_singular_values(r: &BlochMatrix) -> [f64; 3] {
    debug_assert_eq!(r.d(), 2);
    let s = singular_values_desc(&r.t_block());
    [s[0], s[1], s[2]]
}

/// CHSH-nonlocality measure `max{0, s1^2 + s2^2 - 1}`.
pub fn chsh_b(r: &BlochMatrix) -> f64 {
    assert_eq!(r.kind(), OperatorKind::State);
    let s = t_singular_values(r);
    (s[0] * s[0] + s[1] * s[1] - 1.0).max(0.0)
}

/// F3-steering measure `max{0, (s1^2 + s2^2 + s3^2 - 1) / 2}`.
pub fn steer_bf3(r: &BlochMatrix) -> f64 {
    assert_eq!(r.kind(), OperatorKind::State);
    let s = t_singular_values(r);
    (0.5 * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0)).max(0.0)
}

/// Usefulness-for-teleportation measure
/// `max{0, (|s1| + |s2| - chi |s3| - 1) / 2}` with signed `chi = det T`.
pub fn uft_d(r: &BlochMatrix) -> f64 {
    assert_eq!(r.kind(), OperatorKind::State);
    let s = t_singular_values(r);
    let chi = determinant_real(&r.t_block());
    (0.5 * (s[0] + s[1] - chi * s[2] - 1.0)).max(0.0)
}

/// Chirality `chi = det T`, sign included.
pub fn chirality(r: &BlochMatrix) -> f64 {
    determinant_real(&r.t_block())
}

/// Concurrence of a two-qubit density matrix.
///
/// The defining spectrum of `rho (s2 x s2) rho* (s2 x s2)` is obtained from
/// the Hermitian similar matrix `sqrt(rho) (s2 x s2) rho* (s2 x s2)
/// sqrt(rho)`, which avoids a general non-Hermitian eigensolver. Eigenvalues
/// are clamped at zero before the square roots; degenerate values keep their
/// stable descending order.
pub fn concurrence(rho: &ComplexMatrix) -> Result<f64, CorrelationsError> {
    if rho.dim() != 4 {
        return Err(CorrelationsError::InvalidState(format!(
            "concurrence needs a 4x4 two-qubit state, got dim {}",
            rho.dim()
        )));
    }
    let basis = OperatorBasis::pauli();
    let yy = crate::numerics::tensor_product(basis.op(2), basis.op(2));
    let flipped = yy.mul(&rho.conjugate()).mul(&yy);
    let root = psd_sqrt(rho).map_err(|e| CorrelationsError::InvalidState(e.to_string()))?;
    let herm = root.mul(&flipped).mul(&root).hermitize();
    let vals = herm_eigvals(&herm)?;
    let mut sqrts = vals.iter().map(|&x| x.max(0.0).sqrt());
    let first = sqrts.next().unwrap();
    let rest: f64 = sqrts.sum();
    Ok((first - rest).max(0.0))
}

/// Quantum obesity `Omega = |det R|^(1/d^2)`, defined for any local dimension.
pub fn obesity(r: &BlochMatrix) -> f64 {
    assert_eq!(r.kind(), OperatorKind::State);
    let det = determinant_real(r.matrix());
    det.abs().powf(1.0 / (r.matrix().dim() as f64))
}

/// Effect analogue of obesity, `zeta = |det N|^(1/d^2)`.
pub fn effect_zeta(n: &BlochMatrix) -> f64 {
    assert_eq!(n.kind(), OperatorKind::Effect);
    let det = determinant_real(n.matrix());
    det.abs().powf(1.0 / (n.matrix().dim() as f64))
}

/// Full report from the R-picture; the density matrix is reconstructed once
/// for the concurrence.
pub fn report_from_bloch(r: &BlochMatrix) -> Result<CorrelationReport, CorrelationsError> {
    assert_eq!(
        r.d(),
        2,
        "the measure suite is defined for two-qubit states"
    );
    let rho = bloch_to_state(r, OperatorBasis::pauli())?;
    report_internal(r, &rho)
}

/// Full report from the density picture.
pub fn report_from_density(rho: &ComplexMatrix) -> Result<CorrelationReport, CorrelationsError> {
    let r = state_to_bloch(rho, OperatorBasis::pauli())?;
    report_internal(&r, rho)
}

fn report_internal(
    r: &BlochMatrix,
    rho: &ComplexMatrix,
) -> Result<CorrelationReport, CorrelationsError> {
    let s = t_singular_values(r);
    let chi = determinant_real(&r.t_block());
    Ok(CorrelationReport {
        chsh: (s[0] * s[0] + s[1] * s[1] - 1.0).max(0.0),
        steering: (0.5 * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0)).max(0.0),
        teleportation: (0.5 * (s[0] + s[1] - chi * s[2] - 1.0)).max(0.0),
        concurrence: concurrence(rho)?,
        obesity: obesity(r),
        singular_values: s,
        chirality: chi,
    })
}
