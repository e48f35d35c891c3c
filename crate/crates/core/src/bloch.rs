//! Conversions between the density-operator picture and the R-representation.
//!
//! A bipartite state on `C^d x C^d` maps to the real `(d^2 x d^2)` matrix
//! `R_ij = tr[(sigma_i x sigma_j) rho]` over an operator basis with
//! `sigma_0 = 1_d`, `tr[sigma_i] = 0` for `i >= 1` and
//! `tr[sigma_i sigma_j] = d delta_ij`. For qubits this is the Pauli basis and
//! `R` carries the familiar block form `(1, b^T; a, T)` with local vectors
//! `a`, `b` and the 3x3 correlation block `T`.
//!
//! Measurement effects use the same expansion with an extra `1/d^2`:
//! `N_kl = tr[(sigma_k x sigma_l) E] / d^2`, so that `E = sum N_kl
//! sigma_k x sigma_l` reconstructs exactly and `[R N R']_00` is the outcome
//! probability of the swap protocol. (An unnormalized effect convention
//! without the `1/d^2` also exists; it rescales `zeta` by `d^2` and the
//! normalizer by `1/d^2`, leaving every normalized post-swap state
//! unchanged. Only the normalized convention keeps probabilities summing
//! to one over a complete POVM, so it is used throughout.)

use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::numerics::{
    herm_eigvals, ComplexMatrix, NumericsError, RealMatrix, HERMITICITY_TOL, PSD_TOL,
};

/// Default absolute tolerance for `classify`.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Reconstructed states with an eigenvalue below `-NOT_A_STATE_TOL` are
/// rejected: the R matrix does not correspond to a physical state.
pub const NOT_A_STATE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("unsupported local dimension {0} (supported: 2..=4)")]
    UnsupportedDimension(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("R matrix does not correspond to a physical state (eigenvalue {0:.3e})")]
    NotAState(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

impl From<NumericsError> for BlochError {
    fn from(e: NumericsError) -> Self {
        BlochError::InvalidState(e.to_string())
    }
}

/// Hermitian operator basis `{sigma_i}` with `tr[sigma_i sigma_j] = d delta_ij`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    d: usize,
    ops: Vec<ComplexMatrix>,
    /// Sparse nonzeros of `sigma_i x sigma_j`, indexed `i * d^2 + j`.
    pairs: Vec<Vec<(usize, usize, C64)>>,
}

impl OperatorBasis {
    /// Generalized Gell-Mann basis rescaled by `sqrt(d/2)` so that
    /// `tr[sigma_i sigma_j] = d delta_ij`; for `d = 2` this is exactly the
    /// Pauli basis.
    ///
    /// Ordering is fixed for reproducibility: identity first, then the
    /// symmetric pair operators (lexicographic `j < k`), the antisymmetric
    /// pair operators, and finally the diagonal operators.
    pub fn gell_mann(d: usize) -> Result<Self, BlochError> {
        if !(2..=4).contains(&d) {
            return Err(BlochError::UnsupportedDimension(d));
        }
        let scale = (d as f64 / 2.0).sqrt();
        let mut ops = vec![ComplexMatrix::identity(d)];
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = ComplexMatrix::zeros(d);
                m.set(j, k, C64::new(scale, 0.0));
                m.set(k, j, C64::new(scale, 0.0));
                ops.push(m);
            }
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = ComplexMatrix::zeros(d);
                m.set(j, k, C64::new(0.0, -scale));
                m.set(k, j, C64::new(0.0, scale));
                ops.push(m);
            }
        }
        for l in 1..d {
            let norm = scale * (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
            let mut m = ComplexMatrix::zeros(d);
            for j in 0..l {
                m.set(j, j, C64::new(norm, 0.0));
            }
            m.set(l, l, C64::new(-(l as f64) * norm, 0.0));
            ops.push(m);
        }
        debug_assert_eq!(ops.len(), d * d);

        let mut pairs = Vec::with_capacity(d.pow(4));
        for i in 0..d * d {
            for j in 0..d * d {
                let kron = crate::numerics::tensor_product(&ops[i], &ops[j]);
                let mut nz = Vec::new();
                for r in 0..d * d {
                    for c in 0..d * d {
                        let v = kron.get(r, c);
                        if v.norm_sqr() != 0.0 {
                            nz.push((r, c, v));
                        }
                    }
                }
                pairs.push(nz);
            }
        }
        Ok(Self { d, ops, pairs })
    }

    /// Shared basis instance for a supported dimension.
    pub fn cached(d: usize) -> Result<&'static OperatorBasis, BlochError> {
        static BASES: [OnceLock<OperatorBasis>; 3] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        if !(2..=4).contains(&d) {
            return Err(BlochError::UnsupportedDimension(d));
        }
        Ok(BASES[d - 2].get_or_init(|| OperatorBasis::gell_mann(d).unwrap()))
    }

    /// The Pauli basis.
    pub fn pauli() -> &'static OperatorBasis {
        Self::cached(2).unwrap()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &ComplexMatrix {
        &self.ops[i]
    }

    /// `tr[(sigma_i x sigma_j) m]` via the cached sparse Kronecker pattern.
    fn pair_trace(&self, i: usize, j: usize, m: &ComplexMatrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(r, c, v) in &self.pairs[i * self.d * self.d + j] {
            acc += v * m.get(c, r);
        }
        acc
    }

    /// Accumulate `coeff * sigma_i x sigma_j` into `out`.
    fn pair_add(&self, i: usize, j: usize, coeff: f64, out: &mut ComplexMatrix) {
        for &(r, c, v) in &self.pairs[i * self.d * self.d + j] {
            let cur = out.get(r, c);
            out.set(r, c, cur + v * coeff);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    State,
    Effect,
}

/// R-representation of a bipartite state or effect: a real `(d^2 x d^2)`
/// matrix over the operator basis of local dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMatrix {
    d: usize,
    kind: OperatorKind,
    r: RealMatrix,
}

impl BlochMatrix {
    pub fn from_matrix(d: usize, kind: OperatorKind, r: RealMatrix) -> Result<Self, BlochError> {
        if r.dim() != d * d {
            return Err(BlochError::DimMismatch(format!(
                "R matrix dim {} does not match d^2 = {}",
                r.dim(),
                d * d
            )));
        }
        if !r.finite() {
            return Err(BlochError::InvalidState("non-finite entry in R".into()));
        }
        if kind == OperatorKind::State && (r.get(0, 0) - 1.0).abs() > 1e-9 {
            return Err(BlochError::InvalidState(format!(
                "state R matrix must have R_00 = 1, got {}",
                r.get(0, 0)
            )));
        }
        Ok(Self { d, kind, r })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.r
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r.get(i, j)
    }

    /// Local vector entry `a_i = R_{i0}`, `i` in `1..d^2`.
    pub fn a(&self, i: usize) -> f64 {
        self.r.get(i, 0)
    }

    /// Local vector entry `b_i = R_{0i}`, `i` in `1..d^2`.
    pub fn b(&self, i: usize) -> f64 {
        self.r.get(0, i)
    }

    /// Correlation block `T` (`(d^2-1) x (d^2-1)`, the 3x3 block for qubits).
    pub fn t_block(&self) -> RealMatrix {
        let n = self.d * self.d - 1;
        RealMatrix::from_fn(n, |i, j| self.r.get(i + 1, j + 1))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.r.max_abs_diff(&other.r)
    }
}

/// Hierarchy of two-qubit state classes, finest last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateClass {
    General,
    XForm,
    AlmostBellDiagonal,
    BellDiagonal,
    Bell,
}

impl std::fmt::Display for StateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StateClass::General => "general",
            StateClass::XForm => "x-form",
            StateClass::AlmostBellDiagonal => "almost-bell-diagonal",
            StateClass::BellDiagonal => "bell-diagonal",
            StateClass::Bell => "bell",
        };
        f.write_str(s)
    }
}

fn validate_state(rho: &ComplexMatrix, d: usize) -> Result<(), BlochError> {
    if rho.dim() != d * d {
        return Err(BlochError::DimMismatch(format!(
            "state has dim {}, basis expects {}",
            rho.dim(),
            d * d
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(BlochError::InvalidState(format!(
            "not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
        return Err(BlochError::InvalidState(format!("trace {} != 1", tr.re)));
    }
    let vals = herm_eigvals(rho)?;
    if let Some(&bad) = vals.iter().find(|&&x| x < -PSD_TOL) {
        return Err(BlochError::InvalidState(format!(
            "negative eigenvalue {bad:.3e}"
        )));
    }
    Ok(())
}

/// `R_ij = tr[(sigma_i x sigma_j) rho]` after validating that `rho` is a
/// state on `C^d x C^d`.
pub fn state_to_bloch(
    rho: &ComplexMatrix,
    basis: &OperatorBasis,
) -> Result<BlochMatrix, BlochError> {
    let d = basis.d();
    validate_state(rho, d)?;
    let n = d * d;
    let r = RealMatrix::from_fn(n, |i, j| basis.pair_trace(i, j, rho).re);
    BlochMatrix::from_matrix(d, OperatorKind::State, r)
}

/// `rho = (1/d^2) sum_ij R_ij sigma_i x sigma_j`; rejects R matrices whose
/// reconstruction has an eigenvalue below `-NOT_A_STATE_TOL`.
pub fn bloch_to_state(r: &BlochMatrix, basis: &OperatorBasis) -> Result<ComplexMatrix, BlochError> {
    if r.kind() != OperatorKind::State {
        return Err(BlochError::InvalidState(
            "bloch_to_state requires kind = state".into(),
        ));
    }
    if r.d() != basis.d() {
        return Err(BlochError::DimMismatch(format!(
            "R has d = {}, basis has d = {}",
            r.d(),
            basis.d()
        )));
    }
    let rho = reconstruct(r, basis, 1.0 / (basis.d() * basis.d()) as f64);
    let vals = herm_eigvals(&rho)?;
    if let Some(&bad) = vals.iter().find(|&&x| x < -NOT_A_STATE_TOL) {
        return Err(BlochError::NotAState(bad));
    }
    Ok(rho)
}

/// `N_kl = tr[(sigma_k x sigma_l) E] / d^2` after validating `0 <= E <= 1`.
pub fn effect_to_bloch(
    effect: &ComplexMatrix,
    basis: &OperatorBasis,
) -> Result<BlochMatrix, BlochError> {
    let d = basis.d();
    if effect.dim() != d * d {
        return Err(BlochError::DimMismatch(format!(
            "effect has dim {}, basis expects {}",
            effect.dim(),
            d * d
        )));
    }
    let defect = effect.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(BlochError::InvalidEffect(format!(
            "not Hermitian (defect {defect:.3e})"
        )));
    }
    let vals = herm_eigvals(effect).map_err(|e| BlochError::InvalidEffect(e.to_string()))?;
    if let Some(&bad) = vals
        .iter()
        .find(|&&x| !(-PSD_TOL..=1.0 + PSD_TOL).contains(&x))
    {
        return Err(BlochError::InvalidEffect(format!(
            "eigenvalue {bad} outside [0, 1]"
        )));
    }
    let n = d * d;
    let inv = 1.0 / (d * d) as f64;
    let r = RealMatrix::from_fn(n, |i, j| basis.pair_trace(i, j, effect).re * inv);
    BlochMatrix::from_matrix(d, OperatorKind::Effect, r)
}

/// Reconstruct `E = sum_kl N_kl sigma_k x sigma_l` from an effect R matrix.
pub fn bloch_to_effect(
    n_mat: &BlochMatrix,
    basis: &OperatorBasis,
) -> Result<ComplexMatrix, BlochError> {
    if n_mat.kind() != OperatorKind::Effect {
        return Err(BlochError::InvalidEffect(
            "bloch_to_effect requires kind = effect".into(),
        ));
    }
    if n_mat.d() != basis.d() {
        return Err(BlochError::DimMismatch(format!(
            "N has d = {}, basis has d = {}",
            n_mat.d(),
            basis.d()
        )));
    }
    Ok(reconstruct(n_mat, basis, 1.0))
}

fn reconstruct(r: &BlochMatrix, basis: &OperatorBasis, scale: f64) -> ComplexMatrix {
    let n = basis.d() * basis.d();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let coeff = r.get(i, j) * scale;
            if coeff != 0.0 {
                basis.pair_add(i, j, coeff, &mut out);
            }
        }
    }
    out
}

/// Signs of the `T` diagonal of the Bell state `Phi_n = (1 x sigma_n) Phi^-
/// (1 x sigma_n)`.
const BELL_T_DIAG: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
];

/// R-representation of the Bell state `Phi_n`; satisfies `R^2 = 1`.
pub fn bell_bloch(n: usize) -> BlochMatrix {
    assert!(n < 4, "Bell index must be in 0..=3");
    let t = BELL_T_DIAG[n];
    let r = RealMatrix::diag(&[1.0, t[0], t[1], t[2]]);
    BlochMatrix::from_matrix(2, OperatorKind::State, r).unwrap()
}

/// The Bell projector `Phi_n` viewed as a POVM element: `N = R_{Phi_n} / 4`.
pub fn bell_effect_bloch(n: usize) -> BlochMatrix {
    assert!(n < 4, "Bell index must be in 0..=3");
    let t = BELL_T_DIAG[n];
    let r = RealMatrix::diag(&[0.25, 0.25 * t[0], 0.25 * t[1], 0.25 * t[2]]);
    BlochMatrix::from_matrix(2, OperatorKind::Effect, r).unwrap()
}

/// Density matrix of the Bell state `Phi_n` in the computational basis.
pub fn bell_state_density(n: usize) -> ComplexMatrix {
    assert!(n < 4, "Bell index must be in 0..=3");
    let amps: [[f64; 4]; 4] = [
        [0.0, 1.0, -1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
    ];
    let v = amps[n];
    let norm = 0.5;
    ComplexMatrix::from_fn(4, |i, j| C64::new(v[i] * v[j] * norm, 0.0))
}

/// Finest class of the state hierarchy whose defining constraints hold within
/// `tol`; ties resolve toward the finer class.
pub fn classify(r: &BlochMatrix, tol: f64) -> StateClass {
    assert_eq!(r.d(), 2, "classify is defined for two-qubit states");
    assert_eq!(r.kind(), OperatorKind::State);
    let near = |x: f64| x.abs() <= tol;

    let x_form = near(r.a(1))
        && near(r.a(2))
        && near(r.b(1))
        && near(r.b(2))
        && near(r.get(1, 3))
        && near(r.get(2, 3))
        && near(r.get(3, 1))
        && near(r.get(3, 2));
    if !x_form {
        return StateClass::General;
    }
    let (a3, b3) = (r.a(3), r.b(3));
    if !(near(a3 - b3) || near(a3 + b3)) {
        return StateClass::XForm;
    }
    if !(near(a3) && near(b3)) {
        return StateClass::AlmostBellDiagonal;
    }
    // Bell: R orthogonal with |det T| = 1.
    let rt = r.matrix().mul(&r.matrix().transpose());
    let orthogonal = rt.max_abs_diff(&RealMatrix::identity(4)) <= tol;
    let det_t = crate::numerics::determinant_real(&r.t_block());
    if orthogonal && (det_t.abs() - 1.0).abs() <= tol {
        StateClass::Bell
    } else {
        StateClass::BellDiagonal
    }
}
