//! Deterministic random-state generators and the named state families used
//! by the Monte-Carlo experiments.
//!
//! Reproducibility contract: every sample is a pure function of
//! `(spec, index)`. The RNG is ChaCha12 seeded from the ensemble seed with
//! the trial index as the stream number, so shards can be evaluated in any
//! order and on any number of threads without changing a single draw.
//!
//! Sampling measures (the experiments only need coverage, not a particular
//! measure): general states are Hilbert-Schmidt (Ginibre `G G^dag`
//! normalized); X-form diagonals come from a flat Dirichlet with the
//! off-diagonal moduli uniform inside their positivity bounds and uniform
//! phases; Bell-diagonal states are Dirichlet mixtures of the four Bell
//! states.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Dirichlet, StandardNormal};

use crate::bloch::{bell_bloch, BlochMatrix, OperatorKind};
use crate::filtering::XStateParams;
use crate::numerics::{herm_eigvals, tensor_product, ComplexMatrix, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    General,
    XForm,
    BellDiagonal,
    AbdCase1,
    AbdCase2,
}

impl std::str::FromStr for EnsembleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Self::General),
            "x-form" | "x_form" | "xform" => Ok(Self::XForm),
            "bell-diagonal" | "bell_diagonal" => Ok(Self::BellDiagonal),
            "abd-case1" | "abd_case1" => Ok(Self::AbdCase1),
            "abd-case2" | "abd_case2" => Ok(Self::AbdCase2),
            other => Err(format!("unknown ensemble kind '{other}'")),
        }
    }
}

/// Reproducible ensemble description: same spec, same sample stream.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub d: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, d: usize, seed: u64) -> Self {
        Self { kind, d, seed }
    }
}

/// The per-trial RNG: ChaCha12 with `stream = index` over a common seed.
pub fn rng_stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Hilbert-Schmidt random density matrix: `G G^dag / tr` with square complex
/// Ginibre `G`.
pub fn ginibre_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng));
    let h = g.mul(&g.adjoint());
    h.scale_re(1.0 / h.trace().re)
}

/// Sample a general bipartite state (`dim = d^2`) for the given trial index.
pub fn random_density(spec: &EnsembleSpec, index: u64) -> ComplexMatrix {
    debug_assert_eq!(spec.kind, EnsembleKind::General);
    let mut rng = rng_stream(spec.seed, index);
    ginibre_density(spec.d * spec.d, &mut rng)
}

fn dirichlet4(rng: &mut impl Rng) -> [f64; 4] {
    let d: Dirichlet<f64, 4> = Dirichlet::new([1.0; 4]).expect("flat Dirichlet");
    rng.sample(d)
}

fn x_from_diag(diag: [f64; 4], rng: &mut impl Rng) -> XStateParams {
    let two_pi = 2.0 * std::f64::consts::PI;
    let m14 = rng.random::<f64>() * (diag[0] * diag[3]).sqrt();
    let p14 = rng.random::<f64>() * two_pi;
    let m23 = rng.random::<f64>() * (diag[1] * diag[2]).sqrt();
    let p23 = rng.random::<f64>() * two_pi;
    XStateParams::new(diag, C64::from_polar(m14, p14), C64::from_polar(m23, p23))
        .expect("construction keeps the positivity bounds")
}

/// Random X-form state: flat Dirichlet diagonal, off-diagonals uniform in
/// modulus inside their positivity bound with uniform phases.
pub fn random_x_state(spec: &EnsembleSpec, index: u64) -> XStateParams {
    let mut rng = rng_stream(spec.seed, index);
    let mut diag = dirichlet4(&mut rng);
    match spec.kind {
        EnsembleKind::XForm => {}
        EnsembleKind::AbdCase1 => {
            let m = 0.5 * (diag[0] + diag[3]);
            diag[0] = m;
            diag[3] = m;
        }
        EnsembleKind::AbdCase2 => {
            let m = 0.5 * (diag[1] + diag[2]);
            diag[1] = m;
            diag[2] = m;
        }
        _ => panic!("random_x_state needs an X-form-family ensemble"),
    }
    x_from_diag(diag, &mut rng)
}

/// Random Bell-diagonal or almost-Bell-diagonal state in the R-picture.
pub fn random_bd_abd(spec: &EnsembleSpec, index: u64) -> BlochMatrix {
    match spec.kind {
        EnsembleKind::BellDiagonal => {
            let mut rng = rng_stream(spec.seed, index);
            let w = dirichlet4(&mut rng);
            bell_mixture_bloch(w)
        }
        EnsembleKind::AbdCase1 | EnsembleKind::AbdCase2 => random_x_state(spec, index).bloch(),
        _ => panic!("random_bd_abd needs a Bell-diagonal or ABD ensemble"),
    }
}

/// R matrix of the Bell mixture `sum w_n Phi_n`.
pub fn bell_mixture_bloch(w: [f64; 4]) -> BlochMatrix {
    let mut t = [0.0; 3];
    for (n, &wn) in w.iter().enumerate() {
        let bell = bell_bloch(n);
        for (i, ti) in t.iter_mut().enumerate() {
            *ti += wn * bell.get(i + 1, i + 1);
        }
    }
    BlochMatrix::from_matrix(
        2,
        OperatorKind::State,
        RealMatrix::diag(&[1.0, t[0], t[1], t[2]]),
    )
    .expect("Bell mixture R matrix")
}

/// Random two-qubit Bell-diagonal POVM element: a Dirichlet mixture of the
/// four Bell projectors scaled by a uniform factor in (0, 1].
pub fn random_bd_effect(rng: &mut impl Rng) -> BlochMatrix {
    let w = dirichlet4(rng);
    let scale = 1.0 - rng.random::<f64>(); // (0, 1]
    let state = bell_mixture_bloch(w);
    BlochMatrix::from_matrix(2, OperatorKind::Effect, state.matrix().scale(scale * 0.25))
        .expect("scaled Bell mixture effect")
}

/// Random POVM element on `C^d x C^d`: a Ginibre PSD matrix scaled uniformly
/// below its largest eigenvalue.
pub fn random_effect(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let h = ginibre_density(d * d, rng);
    let top = herm_eigvals(&h).expect("Ginibre density is Hermitian")[0];
    let scale = 1.0 - rng.random::<f64>(); // (0, 1]
    h.scale_re(scale / top)
}

/// Haar-random single-qubit unitary (QR of a 2x2 complex Ginibre with the
/// phase convention fixed by the R diagonal).
pub fn random_qubit_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let a = complex_normal(rng);
        let b = complex_normal(rng);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm < 1e-6 {
            continue;
        }
        // First column.
        let u00 = a / norm;
        let u10 = b / norm;
        // Orthogonal column with a random phase.
        let phase = C64::from_polar(1.0, rng.random::<f64>() * 2.0 * std::f64::consts::PI);
        let u01 = -u10.conj() * phase;
        let u11 = u00.conj() * phase;
        return ComplexMatrix::from_rows(vec![vec![u00, u01], vec![u10, u11]]);
    }
}

/// Partially entangled state with coloured noise:
/// `p |psi><psi| + (1-p) rho_A x 1/2` with
/// `|psi> = cos(theta)|00> + sin(theta)|11>` and `rho_A = tr_B |psi><psi|`.
pub fn coloured_noise(p: f64, theta: f64) -> ComplexMatrix {
    assert!((0.0..=1.0).contains(&p), "p must be in [0, 1]");
    let (ct, st) = (theta.cos(), theta.sin());
    let mut psi = ComplexMatrix::zeros(4);
    let amps = [(0usize, ct), (3usize, st)];
    for (i, ai) in amps {
        for (j, aj) in amps {
            psi.set(i, j, C64::new(ai * aj, 0.0));
        }
    }
    let rho_a = ComplexMatrix::diag(&[ct * ct, st * st]);
    let noise = tensor_product(&rho_a, &ComplexMatrix::identity(2).scale_re(0.5));
    psi.scale_re(p).add(&noise.scale_re(1.0 - p))
}

/// Werner family `p Phi^- + (1-p) 1/4`; the T block is `-p 1`.
pub fn werner(p: f64) -> ComplexMatrix {
    assert!((0.0..=1.0).contains(&p), "p must be in [0, 1]");
    crate::bloch::bell_state_density(0)
        .scale_re(p)
        .add(&ComplexMatrix::identity(4).scale_re((1.0 - p) / 4.0))
}
