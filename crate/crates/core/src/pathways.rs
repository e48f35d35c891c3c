//! Filter-before-swap (FS) vs swap-before-filter (SF) pipelines and their
//! comparison.
//!
//! FS filters each source independently to its normal form and then swaps;
//! SF swaps first and filters the post-swap state. For Bell-diagonal sources
//! and effects the two orders produce the same final state; away from that
//! family FS generally wins, and the Monte-Carlo drivers here quantify that
//! over random X-form and general two-qubit ensembles.
//!
//! Probabilities are reported for transparency but never compared: only the
//! swap probability is well-defined per branch (the normal-form map does not
//! come with a success probability), so the FS entry is the swap probability
//! of the filtered sources and the SF entry equals the plain swap branch.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{bell_effect_bloch, state_to_bloch, BlochMatrix, OperatorBasis};
use crate::correlations::{obesity, report_from_bloch, CorrelationReport, CorrelationsError};
use crate::ensembles::{
    bell_mixture_bloch, coloured_noise, random_bd_effect, random_density, random_x_state,
    rng_stream, EnsembleKind, EnsembleSpec,
};
use crate::filtering::{klm_normal_form, klm_spectrum, FilterError};
use crate::swapping::{predict_obesity, swap_bloch, SwapError, SwapOutcome};

/// FS is asserted to dominate SF only up to this slack.
pub const FS_SF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PathwayError {
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Swap(#[from] SwapError),
    #[error(transparent)]
    Correlations(#[from] CorrelationsError),
}

/// Filter both sources to their normal form, then swap.
pub fn run_fs(
    r_ab: &BlochMatrix,
    r_cd: &BlochMatrix,
    effect: &BlochMatrix,
) -> Result<SwapOutcome, PathwayError> {
    let f_ab = klm_normal_form(r_ab)?;
    let f_cd = klm_normal_form(r_cd)?;
    Ok(swap_bloch(&f_ab, effect, &f_cd)?)
}

/// Swap first, then filter the post-swap state to its normal form.
pub fn run_sf(
    r_ab: &BlochMatrix,
    r_cd: &BlochMatrix,
    effect: &BlochMatrix,
) -> Result<BlochMatrix, PathwayError> {
    let swapped = swap_bloch(r_ab, effect, r_cd)?;
    Ok(klm_normal_form(&swapped.r_ad)?)
}

/// Swap probabilities of the branches that involve a swap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchProbabilities {
    pub swapped: Option<f64>,
    pub sf: Option<f64>,
    pub fs: Option<f64>,
}

/// Correlation reports of every state in the two-pipeline comparison;
/// branches that hit a degenerate filter or a zero-probability outcome are
/// recorded as unavailable instead of failing the whole report.
#[derive(Debug, Clone, Serialize)]
pub struct PathwayReport {
    pub initial: CorrelationReport,
    pub filtered_input: Option<CorrelationReport>,
    pub swapped: Option<CorrelationReport>,
    pub sf: Option<CorrelationReport>,
    pub fs: Option<CorrelationReport>,
    pub probabilities: BranchProbabilities,
}

/// Compare the raw swap, SF and FS pipelines for one `(AB, CD, effect)`
/// triple.
pub fn compare(
    r_ab: &BlochMatrix,
    r_cd: &BlochMatrix,
    effect: &BlochMatrix,
) -> Result<PathwayReport, PathwayError> {
    let initial = report_from_bloch(r_ab)?;
    let filtered_input = klm_normal_form(r_ab)
        .ok()
        .and_then(|f| report_from_bloch(&f).ok());

    let swap_out = swap_bloch(r_ab, effect, r_cd).ok();
    let swapped = swap_out
        .as_ref()
        .and_then(|o| report_from_bloch(&o.r_ad).ok());
    let sf = swap_out
        .as_ref()
        .and_then(|o| klm_normal_form(&o.r_ad).ok())
        .and_then(|r| report_from_bloch(&r).ok());

    let fs_out = run_fs(r_ab, r_cd, effect).ok();
    let fs = fs_out
        .as_ref()
        .and_then(|o| report_from_bloch(&o.r_ad).ok());

    Ok(PathwayReport {
        initial,
        filtered_input,
        swapped,
        sf,
        fs,
        probabilities: BranchProbabilities {
            swapped: swap_out.as_ref().map(|o| o.probability),
            sf: swap_out.as_ref().map(|o| o.probability),
            fs: fs_out.as_ref().map(|o| o.probability),
        },
    })
}

/// One row of the coloured-noise scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub theta: f64,
    pub report: PathwayReport,
}

/// Scan the coloured-noise family over `theta` in `[0, pi/4]` (inclusive
/// endpoints) with both sources equal, measuring the Bell projector
/// `Phi_{effect_index}` on BC.
pub fn coloured_noise_scan(
    p: f64,
    steps: usize,
    effect_index: usize,
) -> Result<Vec<ScanRow>, PathwayError> {
    assert!(steps >= 2, "need at least two scan points");
    assert!(effect_index < 4, "Bell effect index must be in 0..=3");
    let basis = OperatorBasis::pauli();
    let effect = bell_effect_bloch(effect_index);
    let rows = crate::par::map_indices(steps as u64, |i| {
        let theta = std::f64::consts::FRAC_PI_4 * i as f64 / (steps as f64 - 1.0);
        let rho = coloured_noise(p, theta);
        let r = state_to_bloch(&rho, basis).expect("coloured-noise states are physical");
        compare(&r, &r, &effect).map(|report| ScanRow { theta, report })
    });
    rows.into_iter().collect()
}

/// One Monte-Carlo record: the FS and SF values of one measure for one
/// sample.
#[derive(Debug, Clone, Serialize)]
pub struct McRow {
    pub index: u64,
    pub measure: &'static str,
    pub fs: f64,
    pub sf: f64,
}

/// Violation statistics of `FS >= SF - tol` for one measure.
#[derive(Debug, Clone, Serialize)]
pub struct McMeasureSummary {
    pub measure: &'static str,
    pub violations: usize,
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McSummary {
    pub samples: u64,
    pub evaluated: u64,
    pub failures: u64,
    pub effect: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub measures: Vec<McMeasureSummary>,
}

/// Full Monte-Carlo output: per-sample rows plus the violation summary.
#[derive(Debug, Clone)]
pub struct McOutcome {
    pub rows: Vec<McRow>,
    pub summary: McSummary,
}

fn summarize(
    rows: &[McRow],
    names: &[&'static str],
    samples: u64,
    evaluated: u64,
    effect: usize,
    seed: u64,
) -> McSummary {
    let measures = names
        .iter()
        .map(|&name| {
            let mut violations = 0usize;
            let mut min_margin = f64::INFINITY;
            for row in rows.iter().filter(|r| r.measure == name) {
                let margin = row.fs - row.sf;
                if margin < -FS_SF_TOLERANCE {
                    violations += 1;
                }
                min_margin = min_margin.min(margin);
            }
            if min_margin == f64::INFINITY {
                min_margin = 0.0;
            }
            McMeasureSummary {
                measure: name,
                violations,
                min_margin,
            }
        })
        .collect();
    McSummary {
        samples,
        evaluated,
        failures: samples - evaluated,
        effect,
        seed,
        tolerance: FS_SF_TOLERANCE,
        measures,
    }
}

/// FS and SF reports for one pair of equal sources, with obesity evaluated
/// through the multiplicative law instead of a determinant of the final
/// matrix.
///
/// The multiplicative route (obesity and zeta of the raw inputs, swap
/// normalizer, top filter eigenvalue) keeps full relative precision even
/// when the post-swap state is nearly singular, where a determinant
/// recomputed from the product matrix has already lost the tail eigenvalues
/// to rounding in its entries.
fn fs_sf_reports(
    r: &BlochMatrix,
    effect: &BlochMatrix,
) -> Result<(CorrelationReport, CorrelationReport), PathwayError> {
    let filtered = klm_normal_form(r)?;
    let fs_out = swap_bloch(&filtered, effect, &filtered)?;
    let mut fs = report_from_bloch(&fs_out.r_ad)?;
    fs.obesity = predict_obesity(&filtered, effect, &filtered)?;

    let s_out = swap_bloch(r, effect, r)?;
    let sf_state = klm_normal_form(&s_out.r_ad)?;
    let mut sf = report_from_bloch(&sf_state)?;
    let nu0 = klm_spectrum(&s_out.r_ad)?[0];
    if nu0 > 0.0 {
        sf.obesity = predict_obesity(r, effect, r)? / nu0.sqrt();
    }
    Ok((fs, sf))
}

/// FS vs SF over random X-form sources (`rho_AB = rho_CD`), all five
/// measures, Bell projector `Phi_{effect_index}`.
pub fn montecarlo_xform(n: u64, seed: u64, effect_index: usize) -> McOutcome {
    assert!(effect_index < 4);
    let spec = EnsembleSpec::new(EnsembleKind::XForm, 2, seed);
    let effect = bell_effect_bloch(effect_index);
    let per_sample = crate::par::map_indices(n, |i| {
        let r = random_x_state(&spec, i).bloch();
        match fs_sf_reports(&r, &effect) {
            Ok((fs, sf)) => Some((i, fs, sf)),
            Err(_) => None,
        }
    });
    let mut rows = Vec::new();
    let mut evaluated = 0u64;
    for entry in per_sample.into_iter().flatten() {
        let (i, fs, sf) = entry;
        evaluated += 1;
        for (k, &name) in CorrelationReport::MEASURE_NAMES.iter().enumerate() {
            rows.push(McRow {
                index: i,
                measure: name,
                fs: fs.as_array()[k],
                sf: sf.as_array()[k],
            });
        }
    }
    let summary = summarize(
        &rows,
        &CorrelationReport::MEASURE_NAMES,
        n,
        evaluated,
        effect_index,
        seed,
    );
    McOutcome { rows, summary }
}

/// FS vs SF obesity over random general two-qubit sources
/// (`rho_AB = rho_CD`), Bell projector `Phi_{effect_index}`.
pub fn montecarlo_general_obesity(n: u64, seed: u64, effect_index: usize) -> McOutcome {
    assert!(effect_index < 4);
    let spec = EnsembleSpec::new(EnsembleKind::General, 2, seed);
    let effect = bell_effect_bloch(effect_index);
    let basis = OperatorBasis::pauli();
    let per_sample = crate::par::map_indices(n, |i| {
        let rho = random_density(&spec, i);
        let r = state_to_bloch(&rho, basis).expect("Ginibre samples are states");
        let pair = (|| -> Result<(f64, f64), PathwayError> {
            let filtered = klm_normal_form(&r)?;
            let fs = predict_obesity(&filtered, &effect, &filtered)?;
            let s_out = swap_bloch(&r, &effect, &r)?;
            let nu0 = klm_spectrum(&s_out.r_ad)?[0];
            let sf = if nu0 > 0.0 {
                predict_obesity(&r, &effect, &r)? / nu0.sqrt()
            } else {
                obesity(&klm_normal_form(&s_out.r_ad)?)
            };
            Ok((fs, sf))
        })();
        pair.ok().map(|(fs, sf)| (i, fs, sf))
    });
    let mut rows = Vec::new();
    let mut evaluated = 0u64;
    for entry in per_sample.into_iter().flatten() {
        let (i, fs, sf) = entry;
        evaluated += 1;
        rows.push(McRow {
            index: i,
            measure: "Omega",
            fs,
            sf,
        });
    }
    let summary = summarize(&rows, &["Omega"], n, evaluated, effect_index, seed);
    McOutcome { rows, summary }
}

/// Worst-case deviations of the FS = SF equality over random Bell-diagonal
/// triples (states and effect all Bell-diagonal).
#[derive(Debug, Clone, Serialize)]
pub struct Result7Deviation {
    pub trials: u64,
    pub evaluated: u64,
    pub max_state_deviation: f64,
    pub max_measure_deviation: f64,
}

/// Check that filtering before or after the swap gives the same final state
/// for Bell-diagonal triples.
pub fn result7_check(n: u64, seed: u64) -> Result7Deviation {
    let devs = crate::par::map_indices(n, |i| {
        let mut rng = rng_stream(seed, i);
        let dirichlet = |rng: &mut rand_chacha::ChaCha12Rng| -> [f64; 4] {
            use rand::Rng;
            let d: rand_distr::Dirichlet<f64, 4> = rand_distr::Dirichlet::new([1.0; 4]).unwrap();
            rng.sample(d)
        };
        let r_ab = bell_mixture_bloch(dirichlet(&mut rng));
        let r_cd = bell_mixture_bloch(dirichlet(&mut rng));
        let effect = random_bd_effect(&mut rng);
        let fs = match run_fs(&r_ab, &r_cd, &effect) {
            Ok(o) => o.r_ad,
            Err(_) => return None,
        };
        let sf = match run_sf(&r_ab, &r_cd, &effect) {
            Ok(r) => r,
            Err(_) => return None,
        };
        let state_dev = fs.max_abs_diff(&sf);
        let measure_dev = match (report_from_bloch(&fs), report_from_bloch(&sf)) {
            (Ok(a), Ok(b)) => a.max_abs_diff(&b),
            _ => return None,
        };
        Some((state_dev, measure_dev))
    });
    let mut out = Result7Deviation {
        trials: n,
        evaluated: 0,
        max_state_deviation: 0.0,
        max_measure_deviation: 0.0,
    };
    for (state_dev, measure_dev) in devs.into_iter().flatten() {
        out.evaluated += 1;
        out.max_state_deviation = out.max_state_deviation.max(state_dev);
        out.max_measure_deviation = out.max_measure_deviation.max(measure_dev);
    }
    out
}
