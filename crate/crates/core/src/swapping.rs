//! The R-picture swapping calculus.
//!
//! For sources `rho_AB`, `rho_CD` and a POVM element `E_BC`, the
//! post-swapping state is a plain matrix product in the R-representation:
//!
//! ```text
//! R_AD = R_AB N_BC R_CD / [R_AB N_BC R_CD]_00
//! ```
//!
//! with the `(0,0)` element of the unnormalized product equal to the outcome
//! probability. The same formula covers qudits, and an N-source chain
//! multiplies `R N` factors left to right with a trailing identity in place
//! of the missing last measurement. Quantum obesity follows a multiplicative
//! law under this product, which gives a closed-form prediction for the
//! post-swap obesity without ever building the final state.

use thiserror::Error;

use crate::bloch::{bell_bloch, bell_effect_bloch, BlochMatrix, OperatorKind};
use crate::correlations::{effect_zeta, obesity};
use crate::numerics::RealMatrix;

/// Below this normalizer the outcome is treated as never occurring.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SwapError {
    #[error("outcome probability {0:.3e} below threshold; the outcome never occurs")]
    ZeroProbabilityOutcome(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
}

/// Post-swap state together with the probability of the measurement outcome
/// that produced it.
#[derive(Debug, Clone)]
pub struct SwapOutcome {
    pub r_ad: BlochMatrix,
    pub probability: f64,
}

fn check_triple(
    r_ab: &BlochMatrix,
    n_bc: &BlochMatrix,
    r_cd: &BlochMatrix,
) -> Result<(), SwapError> {
    if r_ab.d() != n_bc.d() || r_ab.d() != r_cd.d() {
        return Err(SwapError::DimensionMismatch(format!(
            "local dimensions {}, {}, {} must agree",
            r_ab.d(),
            n_bc.d(),
            r_cd.d()
        )));
    }
    if r_ab.kind() != OperatorKind::State || r_cd.kind() != OperatorKind::State {
        return Err(SwapError::KindMismatch("sources must be states".into()));
    }
    if n_bc.kind() != OperatorKind::Effect {
        return Err(SwapError::KindMismatch(
            "middle operator must be an effect".into(),
        ));
    }
    Ok(())
}

/// General swapping step: `R_AD = R_AB N_BC R_CD / [..]_00`, any shared `d`.
pub fn swap_bloch(
    r_ab: &BlochMatrix,
    n_bc: &BlochMatrix,
    r_cd: &BlochMatrix,
) -> Result<SwapOutcome, SwapError> {
    check_triple(r_ab, n_bc, r_cd)?;
    let product = r_ab.matrix().mul(n_bc.matrix()).mul(r_cd.matrix());
    normalize_product(r_ab.d(), product)
}

fn normalize_product(d: usize, product: RealMatrix) -> Result<SwapOutcome, SwapError> {
    let p = product.get(0, 0);
    if p <= ZERO_PROBABILITY_TOL {
        return Err(SwapError::ZeroProbabilityOutcome(p));
    }
    let r_ad = BlochMatrix::from_matrix(d, OperatorKind::State, product.scale(1.0 / p))
        .expect("normalized product has R_00 = 1");
    Ok(SwapOutcome {
        r_ad,
        probability: p,
    })
}

/// Swap a general qubit state with the Bell state `Phi_n` in CD and the Bell
/// projector `Phi_m` measured on BC.
///
/// The outcome equals `(1 x sigma_n sigma_m) rho_AB (1 x sigma_m sigma_n)` in
/// the density picture, so every local-unitary-invariant measure of the input
/// survives the swap untouched. The outcome probability is exactly 1/4.
pub fn bell_combo_swap(r_ab: &BlochMatrix, n: usize, m: usize) -> Result<SwapOutcome, SwapError> {
    if r_ab.d() != 2 {
        return Err(SwapError::DimensionMismatch(
            "Bell-combo swap is a qubit construction".into(),
        ));
    }
    swap_bloch(r_ab, &bell_effect_bloch(m), &bell_bloch(n))
}

/// Closed-form obesity of the post-swap state:
/// `Omega_AB zeta_BC Omega_CD / |[R_AB N_BC R_CD]_00|`.
pub fn predict_obesity(
    r_ab: &BlochMatrix,
    n_bc: &BlochMatrix,
    r_cd: &BlochMatrix,
) -> Result<f64, SwapError> {
    check_triple(r_ab, n_bc, r_cd)?;
    let p = r_ab
        .matrix()
        .mul(n_bc.matrix())
        .mul(r_cd.matrix())
        .get(0, 0);
    if p.abs() <= ZERO_PROBABILITY_TOL {
        return Err(SwapError::ZeroProbabilityOutcome(p));
    }
    Ok(obesity(r_ab) * effect_zeta(n_bc) * obesity(r_cd) / p.abs())
}

/// Ordered description of an N-source qubit chain: N sources, N-1
/// measurement effects between adjacent pairs.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    sources: Vec<BlochMatrix>,
    measurements: Vec<BlochMatrix>,
}

impl ChainSpec {
    pub fn new(
        sources: Vec<BlochMatrix>,
        measurements: Vec<BlochMatrix>,
    ) -> Result<Self, SwapError> {
        if sources.len() < 2 {
            return Err(SwapError::InvalidChain(format!(
                "need at least 2 sources, got {}",
                sources.len()
            )));
        }
        if measurements.len() != sources.len() - 1 {
            return Err(SwapError::InvalidChain(format!(
                "{} sources need {} measurements, got {}",
                sources.len(),
                sources.len() - 1,
                measurements.len()
            )));
        }
        for s in &sources {
            if s.d() != 2 || s.kind() != OperatorKind::State {
                return Err(SwapError::InvalidChain(
                    "sources must be two-qubit states".into(),
                ));
            }
        }
        for m in &measurements {
            if m.d() != 2 || m.kind() != OperatorKind::Effect {
                return Err(SwapError::InvalidChain(
                    "measurements must be two-qubit effects".into(),
                ));
            }
        }
        Ok(Self {
            sources,
            measurements,
        })
    }

    pub fn n(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[BlochMatrix] {
        &self.sources
    }

    pub fn measurements(&self) -> &[BlochMatrix] {
        &self.measurements
    }
}

/// End-to-end state of the chain: the product of all `R N` factors (trailing
/// measurement replaced by the 4x4 identity matrix), normalized once by its
/// `(0,0)` element.
///
/// Multiplying first and normalizing at the end is mathematically identical
/// to stepwise normalization and numerically steadier when intermediate
/// probabilities are small.
pub fn swap_chain(spec: &ChainSpec) -> Result<SwapOutcome, SwapError> {
    let mut product = RealMatrix::identity(4);
    for (i, source) in spec.sources.iter().enumerate() {
        product = product.mul(source.matrix());
        if let Some(m) = spec.measurements.get(i) {
            product = product.mul(m.matrix());
        }
    }
    normalize_product(2, product)
}

/// Closed-form obesity of the chain output: the product of all source
/// obesities and measurement zetas (trailing zeta = 1) over the absolute
/// normalizer.
pub fn predict_obesity_chain(spec: &ChainSpec) -> Result<f64, SwapError> {
    let mut product = RealMatrix::identity(4);
    let mut numerator = 1.0;
    for (i, source) in spec.sources.iter().enumerate() {
        product = product.mul(source.matrix());
        numerator *= obesity(source);
        if let Some(m) = spec.measurements.get(i) {
            product = product.mul(m.matrix());
            numerator *= effect_zeta(m);
        }
    }
    let p = product.get(0, 0);
    if p.abs() <= ZERO_PROBABILITY_TOL {
        return Err(SwapError::ZeroProbabilityOutcome(p));
    }
    Ok(numerator / p.abs())
}
