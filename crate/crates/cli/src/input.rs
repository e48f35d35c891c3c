//! Resolution of state/effect arguments: a path to a JSON file, or an
//! inline family spec such as `werner:0.9`, `bell:2`,
//! `coloured-noise:0.9:0.3`, `maximally-mixed`.

use std::fmt;
use std::path::Path;

use swapcorr_core::bloch::{bell_bloch, bell_effect_bloch, state_to_bloch, OperatorBasis};
use swapcorr_core::ensembles::{coloured_noise, werner};
use swapcorr_core::io::{parse_effect, parse_state};
use swapcorr_core::numerics::ComplexMatrix;
use swapcorr_core::BlochMatrix;

#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn err(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

pub fn read_file(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| err(format!("cannot read '{path}': {e}")))
}

fn parse_param(value: &str, name: &str) -> Result<f64, InputError> {
    value
        .parse::<f64>()
        .map_err(|_| err(format!("invalid {name} '{value}'")))
}

/// Build a state from a named family with explicit parameters.
pub fn family_state(
    family: &str,
    p: Option<f64>,
    theta: Option<f64>,
    n: Option<usize>,
) -> Result<BlochMatrix, InputError> {
    let basis = OperatorBasis::pauli();
    let density_to_bloch = |rho: ComplexMatrix| {
        state_to_bloch(&rho, basis).map_err(|e| err(format!("family state invalid: {e}")))
    };
    match family {
        "werner" => {
            let p = p.ok_or_else(|| err("werner needs --p"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err("werner --p must be in [0, 1]"));
            }
            density_to_bloch(werner(p))
        }
        "bell" => {
            let n = n.ok_or_else(|| err("bell needs --n (0..=3)"))?;
            if n > 3 {
                return Err(err("bell --n must be in 0..=3"));
            }
            Ok(bell_bloch(n))
        }
        "coloured-noise" => {
            let p = p.ok_or_else(|| err("coloured-noise needs --p"))?;
            let theta = theta.ok_or_else(|| err("coloured-noise needs --theta"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err("coloured-noise --p must be in [0, 1]"));
            }
            density_to_bloch(coloured_noise(p, theta))
        }
        "maximally-mixed" => density_to_bloch(ComplexMatrix::identity(4).scale_re(0.25)),
        other => Err(err(format!(
            "unknown family '{other}' (expected werner, bell, coloured-noise, maximally-mixed)"
        ))),
    }
}

/// A source given as a file path or a colon-separated family spec.
pub fn resolve_state(value: &str) -> Result<BlochMatrix, InputError> {
    if Path::new(value).exists() {
        let text = read_file(value)?;
        return parse_state(&text).map_err(|e| err(format!("'{value}': {e}")));
    }
    let mut parts = value.split(':');
    let family = parts.next().unwrap_or_default();
    let params: Vec<&str> = parts.collect();
    match (family, params.as_slice()) {
        ("werner", [p]) => family_state("werner", Some(parse_param(p, "p")?), None, None),
        ("bell", [n]) => {
            let n = n
                .parse::<usize>()
                .map_err(|_| err("bell index must be 0..=3"))?;
            family_state("bell", None, None, Some(n))
        }
        ("coloured-noise", [p, theta]) => family_state(
            "coloured-noise",
            Some(parse_param(p, "p")?),
            Some(parse_param(theta, "theta")?),
            None,
        ),
        ("maximally-mixed", []) => family_state("maximally-mixed", None, None, None),
        _ => Err(err(format!(
            "'{value}' is neither a file nor a family spec \
             (werner:P, bell:N, coloured-noise:P:THETA, maximally-mixed)"
        ))),
    }
}

/// An effect given as a Bell index (0..=3) or a file path.
pub fn resolve_effect(value: &str) -> Result<BlochMatrix, InputError> {
    if let Ok(n) = value.parse::<usize>() {
        if n > 3 {
            return Err(err("Bell effect index must be in 0..=3"));
        }
        return Ok(bell_effect_bloch(n));
    }
    let text = read_file(value)?;
    parse_effect(&text).map_err(|e| err(format!("'{value}': {e}")))
}
