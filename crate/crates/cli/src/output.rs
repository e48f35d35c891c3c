//! Byte-stable numeric formatting and output routing.

use std::io::Write;

/// 17 significant digits, scientific notation, '.' decimal separator.
pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Write to `--out` when given, stdout otherwise.
pub fn emit(out: &Option<String>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| format!("cannot write '{path}': {e}"))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| format!("stdout: {e}"))
        }
    }
}
