//! Brute-force density-matrix implementations of the swap, the chain and
//! local filtering, used as ground truth for every R-picture shortcut.
//!
//! Tensor legs are ordered A, B, C, D with row-major composite indexing
//! throughout; the swap rule quietly depends on that ordering, so it is fixed
//! here once and the R-picture results are checked against it.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{
    bloch_to_effect, bloch_to_state, effect_to_bloch, state_to_bloch, OperatorBasis,
};
use crate::correlations::report_from_bloch;
use crate::ensembles::{ginibre_density, random_effect, rng_stream};
use crate::numerics::{herm_eigvals, partial_trace, tensor_product, ComplexMatrix, PSD_TOL};
use crate::swapping::{predict_obesity, swap_bloch, ChainSpec, ZERO_PROBABILITY_TOL};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("outcome probability {0:.3e} below threshold; the outcome never occurs")]
    ZeroProbabilityOutcome(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("chain oracle supports N in {{2, 3}}, got {0}")]
    UnsupportedChainLength(usize),
    #[error(transparent)]
    Bloch(#[from] crate::bloch::BlochError),
}

/// Local filter pair `(f_A, f_B)` with `f^dag f <= 1` on each side.
#[derive(Debug, Clone)]
pub struct FilterPair {
    f_a: ComplexMatrix,
    f_b: ComplexMatrix,
}

impl FilterPair {
    pub fn new(f_a: ComplexMatrix, f_b: ComplexMatrix) -> Result<Self, OracleError> {
        if f_a.dim() != f_b.dim() {
            return Err(OracleError::DimMismatch(
                "filters must act on equal local dimensions".into(),
            ));
        }
        for (name, f) in [("f_A", &f_a), ("f_B", &f_b)] {
            let gram = f.adjoint().mul(f);
            let top =
                herm_eigvals(&gram).map_err(|e| OracleError::InvalidFilter(e.to_string()))?[0];
            if top > 1.0 + PSD_TOL {
                return Err(OracleError::InvalidFilter(format!(
                    "{name}^dag {name} exceeds the identity (largest eigenvalue {top})"
                )));
            }
        }
        Ok(Self { f_a, f_b })
    }

    pub fn f_a(&self) -> &ComplexMatrix {
        &self.f_a
    }

    pub fn f_b(&self) -> &ComplexMatrix {
        &self.f_b
    }
}

/// Von Neumann-Lueders swap:
/// `rho_AD = tr_BC[(rho_AB x rho_CD)(1 x E_BC x 1)] / p`.
pub fn swap_density(
    rho_ab: &ComplexMatrix,
    e_bc: &ComplexMatrix,
    rho_cd: &ComplexMatrix,
) -> Result<(ComplexMatrix, f64), OracleError> {
    let dim = rho_ab.dim();
    if rho_cd.dim() != dim || e_bc.dim() != dim {
        return Err(OracleError::DimMismatch(format!(
            "swap needs equal bipartite dims, got {}, {}, {}",
            dim,
            e_bc.dim(),
            rho_cd.dim()
        )));
    }
    let d = (dim as f64).sqrt().round() as usize;
    if d * d != dim {
        return Err(OracleError::DimMismatch(format!(
            "operator dim {dim} is not a perfect square"
        )));
    }
    let id = ComplexMatrix::identity(d);
    let big = tensor_product(rho_ab, rho_cd);
    let sandwich = tensor_product(&tensor_product(&id, e_bc), &id);
    let weighted = big.mul(&sandwich);
    let p = weighted.trace().re;
    if p <= ZERO_PROBABILITY_TOL {
        return Err(OracleError::ZeroProbabilityOutcome(p));
    }
    let reduced = partial_trace(&weighted, &[d, d, d, d], &[0, 3])
        .map_err(|e| OracleError::DimMismatch(e.to_string()))?;
    Ok((reduced.scale_re(1.0 / p).hermitize(), p))
}

/// Full 4^N-dimensional chain oracle for N = 2 or 3 qubit sources.
pub fn chain_density(
    sources: &[ComplexMatrix],
    effects: &[ComplexMatrix],
) -> Result<(ComplexMatrix, f64), OracleError> {
    let n = sources.len();
    if !(n == 2 || n == 3) {
        return Err(OracleError::UnsupportedChainLength(n));
    }
    if effects.len() != n - 1 {
        return Err(OracleError::DimMismatch(format!(
            "{n} sources need {} effects, got {}",
            n - 1,
            effects.len()
        )));
    }
    let mut state = sources[0].clone();
    for s in &sources[1..] {
        state = tensor_product(&state, s);
    }
    let id2 = ComplexMatrix::identity(2);
    let mut sandwich = id2.clone();
    for e in effects {
        sandwich = tensor_product(&sandwich, e);
    }
    sandwich = tensor_product(&sandwich, &id2);
    let weighted = state.mul(&sandwich);
    let p = weighted.trace().re;
    if p <= ZERO_PROBABILITY_TOL {
        return Err(OracleError::ZeroProbabilityOutcome(p));
    }
    let dims = vec![2usize; 2 * n];
    let reduced = partial_trace(&weighted, &dims, &[0, 2 * n - 1])
        .map_err(|e| OracleError::DimMismatch(e.to_string()))?;
    Ok((reduced.scale_re(1.0 / p).hermitize(), p))
}

/// Chain oracle driven by an R-picture `ChainSpec`.
pub fn chain_density_from_spec(spec: &ChainSpec) -> Result<(ComplexMatrix, f64), OracleError> {
    let basis = OperatorBasis::pauli();
    let sources: Vec<ComplexMatrix> = spec
        .sources()
        .iter()
        .map(|r| bloch_to_state(r, basis))
        .collect::<Result<_, _>>()?;
    let effects: Vec<ComplexMatrix> = spec
        .measurements()
        .iter()
        .map(|m| bloch_to_effect(m, basis))
        .collect::<Result<_, _>>()?;
    chain_density(&sources, &effects)
}

/// Local filtering `(f_A x f_B) rho (f_A x f_B)^dag / p`.
pub fn apply_filter(
    rho: &ComplexMatrix,
    filters: &FilterPair,
) -> Result<(ComplexMatrix, f64), OracleError> {
    let f = tensor_product(filters.f_a(), filters.f_b());
    if f.dim() != rho.dim() {
        return Err(OracleError::DimMismatch(format!(
            "filter dim {} vs state dim {}",
            f.dim(),
            rho.dim()
        )));
    }
    let filtered = f.mul(rho).mul(&f.adjoint());
    let p = filtered.trace().re;
    if p <= ZERO_PROBABILITY_TOL {
        return Err(OracleError::ZeroProbabilityOutcome(p));
    }
    Ok((filtered.scale_re(1.0 / p).hermitize(), p))
}

/// Trace distance `(1/2) tr |a - b|`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = a.sub(b).hermitize();
    let vals = herm_eigvals(&diff).expect("difference of Hermitian matrices");
    0.5 * vals.iter().map(|x| x.abs()).sum::<f64>()
}

/// Two-Pauli identity `tr[s_j s_r] = 2 delta_jr` and the four-Pauli identity
/// for `tr[s_k s_m s_s s_m]`, both checked exhaustively.
///
/// Returns the largest absolute deviation between the numerically computed
/// traces and the closed-form integer values.
pub fn pauli_identity_max_deviation() -> f64 {
    let basis = OperatorBasis::pauli();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut worst: f64 = 0.0;
    for j in 0..4 {
        for r in 0..4 {
            let tr = basis.op(j).mul(basis.op(r)).trace();
            worst = worst.max((tr.re - 2.0 * delta(j, r)).abs().max(tr.im.abs()));
        }
    }
    for k in 0..4 {
        for m in 0..4 {
            for s in 0..4 {
                let tr = basis
                    .op(k)
                    .mul(basis.op(m))
                    .mul(basis.op(s))
                    .mul(basis.op(m))
                    .trace();
                let expect = 2.0
                    * (delta(k, m) * delta(s, m) - delta(k, s) + delta(k, m) * delta(m, s))
                    + 4.0 * (delta(k, s) * delta(0, m) + delta(0, k) * delta(0, s))
                    - 8.0 * delta(0, k) * delta(0, s) * delta(0, m);
                worst = worst.max((tr.re - expect).abs().max(tr.im.abs()));
            }
        }
    }
    worst
}

/// One named deviation check of the cross-check suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: &str, trials: usize, max_deviation: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            trials,
            max_deviation,
            threshold,
            pass: max_deviation <= threshold,
        }
    }
}

/// Deviation report of the random cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub checks: Vec<CheckResult>,
}

impl CrosscheckReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

#[derive(Default, Clone, Copy)]
struct TrialDevs {
    swap_state: f64,
    swap_prob: f64,
    obesity: f64,
    cor2: f64,
    qutrit_state: f64,
    qutrit_prob: f64,
    qutrit_obesity: f64,
    chain_state: f64,
    chain_prob: f64,
    chain_obesity: f64,
}

impl TrialDevs {
    fn max(self, other: Self) -> Self {
        Self {
            swap_state: self.swap_state.max(other.swap_state),
            swap_prob: self.swap_prob.max(other.swap_prob),
            obesity: self.obesity.max(other.obesity),
            cor2: self.cor2.max(other.cor2),
            qutrit_state: self.qutrit_state.max(other.qutrit_state),
            qutrit_prob: self.qutrit_prob.max(other.qutrit_prob),
            qutrit_obesity: self.qutrit_obesity.max(other.qutrit_obesity),
            chain_state: self.chain_state.max(other.chain_state),
            chain_prob: self.chain_prob.max(other.chain_prob),
            chain_obesity: self.chain_obesity.max(other.chain_obesity),
        }
    }
}

/// Cross-check the R-picture swap, obesity prediction, Bell-combo invariance
/// and the N=3 chain against the density oracle on `n_trials` random
/// instances. Qutrit and chain checks run on a tenth of the trials (at least
/// one) since their oracles are an order of magnitude heavier.
///
/// The report is deterministic for a fixed seed regardless of worker count:
/// each trial derives its RNG from `(seed, trial index)`.
pub fn crosscheck_suite(n_trials: usize, seed: u64) -> CrosscheckReport {
    if n_trials == 0 {
        return CrosscheckReport { checks: Vec::new() };
    }
    let heavy_trials = (n_trials / 10).max(1);
    let devs = crate::par::map_indices(n_trials as u64, |i| {
        trial_devs(seed, i, i < heavy_trials as u64)
    })
    .into_iter()
    .fold(TrialDevs::default(), TrialDevs::max);

    let checks = vec![
        CheckResult::new("swap_qubit_state", n_trials, devs.swap_state, 1e-9),
        CheckResult::new("swap_qubit_probability", n_trials, devs.swap_prob, 1e-10),
        CheckResult::new("obesity_prediction_qubit", n_trials, devs.obesity, 1e-10),
        CheckResult::new("corollary2_measure_invariance", n_trials, devs.cor2, 1e-10),
        CheckResult::new("swap_qutrit_state", heavy_trials, devs.qutrit_state, 1e-9),
        CheckResult::new(
            "swap_qutrit_probability",
            heavy_trials,
            devs.qutrit_prob,
            1e-10,
        ),
        CheckResult::new(
            "obesity_prediction_qutrit",
            heavy_trials,
            devs.qutrit_obesity,
            1e-10,
        ),
        CheckResult::new("chain_n3_state", heavy_trials, devs.chain_state, 1e-9),
        CheckResult::new("chain_n3_probability", heavy_trials, devs.chain_prob, 1e-10),
        CheckResult::new(
            "obesity_prediction_chain",
            heavy_trials,
            devs.chain_obesity,
            1e-9,
        ),
    ];
    CrosscheckReport { checks }
}

fn trial_devs(seed: u64, index: u64, heavy: bool) -> TrialDevs {
    let mut rng = rng_stream(seed, index);
    let mut devs = TrialDevs::default();
    let basis = OperatorBasis::pauli();

    // Qubit swap vs oracle.
    let rho_ab = ginibre_density(4, &mut rng);
    let rho_cd = ginibre_density(4, &mut rng);
    let effect = random_effect(2, &mut rng);
    if let Ok((oracle_state, oracle_p)) = swap_density(&rho_ab, &effect, &rho_cd) {
        let r_ab = state_to_bloch(&rho_ab, basis).unwrap();
        let r_cd = state_to_bloch(&rho_cd, basis).unwrap();
        let n_bc = effect_to_bloch(&effect, basis).unwrap();
        let out = swap_bloch(&r_ab, &n_bc, &r_cd).unwrap();
        let back = bloch_to_state(&out.r_ad, basis).unwrap();
        devs.swap_state = trace_distance(&oracle_state, &back);
        devs.swap_prob = (oracle_p - out.probability).abs();
        let predicted = predict_obesity(&r_ab, &n_bc, &r_cd).unwrap();
        devs.obesity = (predicted - crate::correlations::obesity(&out.r_ad)).abs();

        // Bell-combo invariance of all five measures.
        let baseline = report_from_bloch(&r_ab).unwrap();
        let n = (index % 4) as usize;
        let m = ((index / 4) % 4) as usize;
        let combo = crate::swapping::bell_combo_swap(&r_ab, n, m).unwrap();
        let swapped = report_from_bloch(&combo.r_ad).unwrap();
        devs.cor2 = baseline.max_abs_diff(&swapped);
    }

    if heavy {
        // Qutrit swap vs oracle.
        let basis3 = OperatorBasis::cached(3).unwrap();
        let rho_ab = ginibre_density(9, &mut rng);
        let rho_cd = ginibre_density(9, &mut rng);
        let effect = random_effect(3, &mut rng);
        if let Ok((oracle_state, oracle_p)) = swap_density(&rho_ab, &effect, &rho_cd) {
            let r_ab = state_to_bloch(&rho_ab, basis3).unwrap();
            let r_cd = state_to_bloch(&rho_cd, basis3).unwrap();
            let n_bc = effect_to_bloch(&effect, basis3).unwrap();
            let out = swap_bloch(&r_ab, &n_bc, &r_cd).unwrap();
            let back = bloch_to_state(&out.r_ad, basis3).unwrap();
            devs.qutrit_state = trace_distance(&oracle_state, &back);
            devs.qutrit_prob = (oracle_p - out.probability).abs();
            let predicted = predict_obesity(&r_ab, &n_bc, &r_cd).unwrap();
            devs.qutrit_obesity = (predicted - crate::correlations::obesity(&out.r_ad)).abs();
        }

        // N = 3 chain vs the 64-dimensional oracle.
        let sources: Vec<ComplexMatrix> = (0..3).map(|_| ginibre_density(4, &mut rng)).collect();
        let effects: Vec<ComplexMatrix> = (0..2).map(|_| random_effect(2, &mut rng)).collect();
        if let Ok((oracle_state, oracle_p)) = chain_density(&sources, &effects) {
            let spec = ChainSpec::new(
                sources
                    .iter()
                    .map(|s| state_to_bloch(s, basis).unwrap())
                    .collect(),
                effects
                    .iter()
                    .map(|e| effect_to_bloch(e, basis).unwrap())
                    .collect(),
            )
            .unwrap();
            let out = crate::swapping::swap_chain(&spec).unwrap();
            let back = bloch_to_state(&out.r_ad, basis).unwrap();
            devs.chain_state = trace_distance(&oracle_state, &back);
            devs.chain_prob = (oracle_p - out.probability).abs();
            let predicted = crate::swapping::predict_obesity_chain(&spec).unwrap();
            devs.chain_obesity = (predicted - crate::correlations::obesity(&out.r_ad)).abs();
        }
    }
    devs
}
