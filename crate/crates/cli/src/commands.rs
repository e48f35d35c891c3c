//! Subcommand implementations.

use std::error::Error;
use std::process::ExitCode;

use serde_json::json;

use swapcorr_core::correlations::{report_from_bloch, CorrelationReport};
use swapcorr_core::filtering::{gamma_fs, gamma_sf, SfBranch, XStateParams};
use swapcorr_core::io::{matrix_rows, parse_chain};
use swapcorr_core::oracle::{crosscheck_suite, pauli_identity_max_deviation, CheckResult};
use swapcorr_core::pathways::{
    coloured_noise_scan, montecarlo_general_obesity, montecarlo_xform, result7_check, McOutcome,
    PathwayReport,
};
use swapcorr_core::swapping::{predict_obesity_chain, swap_bloch, swap_chain};

use crate::input::{family_state, resolve_effect, resolve_state, InputError};
use crate::output::{emit, fmt_f};
use crate::{
    ChainArgs, CorrelationsArgs, GammaScanArgs, McEnsemble, MontecarloArgs, OutputFormat,
    PathwaysArgs, SwapArgs, VerifyArgs,
};

type CmdResult = Result<ExitCode, Box<dyn Error>>;

const OK: ExitCode = ExitCode::SUCCESS;

fn verify_failed() -> ExitCode {
    ExitCode::from(1)
}

fn report_csv(report: &CorrelationReport) -> String {
    let mut out = String::from("B,BF3,D,C,Omega,s1,s2,s3,chi\n");
    let a = report.as_array();
    let s = report.singular_values;
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        fmt_f(a[0]),
        fmt_f(a[1]),
        fmt_f(a[2]),
        fmt_f(a[3]),
        fmt_f(a[4]),
        fmt_f(s[0]),
        fmt_f(s[1]),
        fmt_f(s[2]),
        fmt_f(report.chirality),
    ));
    out
}

pub fn correlations(args: CorrelationsArgs) -> CmdResult {
    let state = match (&args.state, &args.family) {
        (Some(path), None) => resolve_state(path)?,
        (None, Some(family)) => family_state(family, args.p, args.theta, args.n)?,
        _ => {
            return Err(Box::new(InputError(
                "give exactly one of --state or --family".into(),
            )))
        }
    };
    let report = report_from_bloch(&state)?;
    let content = match args.format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        OutputFormat::Csv => report_csv(&report),
    };
    emit(&args.out, &content)?;
    Ok(OK)
}

pub fn swap(args: SwapArgs) -> CmdResult {
    let ab = resolve_state(&args.ab)?;
    let cd = resolve_state(&args.cd)?;
    let effect = resolve_effect(&args.effect)?;
    let outcome = swap_bloch(&ab, &effect, &cd)?;
    let mut value = json!({
        "d": outcome.r_ad.d(),
        "R": matrix_rows(outcome.r_ad.matrix()),
        "probability": outcome.probability,
        "obesity": swapcorr_core::correlations::obesity(&outcome.r_ad),
        "predicted_obesity": swapcorr_core::swapping::predict_obesity(&ab, &effect, &cd)?,
    });
    // The full measure suite exists for qubits only; obesity covers qudits.
    if outcome.r_ad.d() == 2 {
        value["report"] = serde_json::to_value(report_from_bloch(&outcome.r_ad)?)?;
    }
    emit(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&value)?),
    )?;
    Ok(OK)
}

pub fn chain(args: ChainArgs) -> CmdResult {
    let text = crate::input::read_file(&args.state)?;
    let spec = parse_chain(&text)?;
    let outcome = swap_chain(&spec)?;
    let report = report_from_bloch(&outcome.r_ad)?;
    let value = json!({
        "d": outcome.r_ad.d(),
        "n_sources": spec.n(),
        "R": matrix_rows(outcome.r_ad.matrix()),
        "probability": outcome.probability,
        "predicted_obesity": predict_obesity_chain(&spec)?,
        "report": report,
    });
    emit(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&value)?),
    )?;
    Ok(OK)
}

fn scan_csv_row(out: &mut String, theta: f64, variant: &str, report: Option<&CorrelationReport>) {
    out.push_str(&fmt_f(theta));
    out.push(',');
    out.push_str(variant);
    match report {
        Some(r) => {
            for v in r.as_array() {
                out.push(',');
                out.push_str(&fmt_f(v));
            }
        }
        None => out.push_str(",nan,nan,nan,nan,nan"),
    }
    out.push('\n');
}

pub fn pathways(args: PathwaysArgs) -> CmdResult {
    if args.family != "coloured-noise" {
        return Err(Box::new(InputError(format!(
            "pathway scan supports the coloured-noise family, got '{}'",
            args.family
        ))));
    }
    if !(0.0..=1.0).contains(&args.p) {
        return Err(Box::new(InputError("--p must be in [0, 1]".into())));
    }
    if args.steps < 2 {
        return Err(Box::new(InputError("--steps must be at least 2".into())));
    }
    if args.effect > 3 {
        return Err(Box::new(InputError("--effect must be in 0..=3".into())));
    }
    let rows = coloured_noise_scan(args.p, args.steps, args.effect)?;
    let mut csv = String::from("theta,variant,B,BF3,D,C,Omega\n");
    for row in &rows {
        let r: &PathwayReport = &row.report;
        scan_csv_row(&mut csv, row.theta, "initial", Some(&r.initial));
        scan_csv_row(&mut csv, row.theta, "filtered", r.filtered_input.as_ref());
        scan_csv_row(&mut csv, row.theta, "swapped", r.swapped.as_ref());
        scan_csv_row(&mut csv, row.theta, "sf", r.sf.as_ref());
        scan_csv_row(&mut csv, row.theta, "fs", r.fs.as_ref());
    }
    emit(&args.out, &csv)?;
    Ok(OK)
}

fn montecarlo_csv(outcome: &McOutcome) -> String {
    let mut csv = String::from("index,measure,fs,sf\n");
    for row in &outcome.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.index,
            row.measure,
            fmt_f(row.fs),
            fmt_f(row.sf)
        ));
    }
    csv
}

pub fn montecarlo(args: MontecarloArgs) -> CmdResult {
    if args.n < 1 {
        return Err(Box::new(InputError("--n must be at least 1".into())));
    }
    if args.effect > 3 {
        return Err(Box::new(InputError("--effect must be in 0..=3".into())));
    }
    let outcome = match args.ensemble {
        McEnsemble::XForm => montecarlo_xform(args.n, args.seed, args.effect),
        McEnsemble::General => montecarlo_general_obesity(args.n, args.seed, args.effect),
    };
    let csv = montecarlo_csv(&outcome);
    let summary = format!("{}\n", serde_json::to_string_pretty(&outcome.summary)?);
    match &args.out {
        Some(_) => {
            emit(&args.out, &csv)?;
            print!("{summary}");
        }
        None => {
            emit(&None, &csv)?;
            eprint!("{summary}");
        }
    }
    Ok(OK)
}

pub fn gamma_scan(args: GammaScanArgs) -> CmdResult {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Box::new(InputError("--alpha must be in (0, 1)".into())));
    }
    if args.steps < 2 {
        return Err(Box::new(InputError("--steps must be at least 2".into())));
    }
    let edge = (1.0 - args.alpha) / 2.0;
    let mut csv = String::from("rho22,gamma_fs,gamma_sf_1,gamma_sf_2\n");
    let mut degenerate = 0usize;
    let mut violations = 0usize;
    for i in 0..args.steps {
        let rho22 = args.alpha * i as f64 / (args.steps as f64 - 1.0);
        let rho33 = args.alpha - rho22;
        let x = XStateParams::diagonal([edge, rho22, rho33, edge])
            .map_err(|e| InputError(e.to_string()))?;
        let fs = gamma_fs(&x).ok();
        let sf1 = gamma_sf(&x, SfBranch::One).ok();
        let sf2 = gamma_sf(&x, SfBranch::Two).ok();
        if sf1.is_none() || sf2.is_none() {
            degenerate += 1;
        }
        if let Some(fs) = fs {
            for sf in [sf1, sf2].into_iter().flatten() {
                if fs < sf - 1e-9 {
                    violations += 1;
                }
            }
        }
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(rho22),
            fmt_f(fs.unwrap_or(f64::NAN)),
            fmt_f(sf1.unwrap_or(f64::NAN)),
            fmt_f(sf2.unwrap_or(f64::NAN)),
        ));
    }
    emit(&args.out, &csv)?;
    if degenerate > 0 {
        eprintln!("{degenerate} row(s) with a degenerate SF coefficient flagged as nan");
    }
    if violations > 0 {
        eprintln!("error: Gamma_FS < Gamma_SF - 1e-9 on {violations} row(s)");
        return Ok(verify_failed());
    }
    Ok(OK)
}

pub fn verify(args: VerifyArgs) -> CmdResult {
    let mut checks: Vec<CheckResult> = crosscheck_suite(args.n_trials, args.seed).checks;

    // The exhaustive operator-algebra identities run even with zero trials.
    checks.push(CheckResult::new(
        "pauli_trace_identities",
        64 + 16,
        pauli_identity_max_deviation(),
        1e-12,
    ));
    if args.n_trials > 0 {
        let r7 = result7_check(args.n_trials as u64, args.seed);
        checks.push(CheckResult::new(
            "result7_state_equality",
            r7.evaluated as usize,
            r7.max_state_deviation,
            1e-10,
        ));
        checks.push(CheckResult::new(
            "result7_measure_equality",
            r7.evaluated as usize,
            r7.max_measure_deviation,
            1e-10,
        ));
    }

    if let Some(fault) = &args.inject_fault {
        match checks.iter_mut().find(|c| &c.name == fault) {
            Some(check) => {
                check.max_deviation = check.threshold * 10.0 + 1.0;
                check.pass = false;
            }
            None => {
                return Err(Box::new(InputError(format!(
                    "no check named '{fault}' to fault"
                ))))
            }
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    let value = json!({
        "n_trials": args.n_trials,
        "seed": args.seed,
        "pass": pass,
        "checks": checks,
    });
    emit(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&value)?),
    )?;
    if pass {
        Ok(OK)
    } else {
        let first = checks.iter().find(|c| !c.pass).unwrap();
        eprintln!(
            "verification failed: {} (deviation {:.3e} > threshold {:.3e})",
            first.name, first.max_deviation, first.threshold
        );
        Ok(verify_failed())
    }
}
