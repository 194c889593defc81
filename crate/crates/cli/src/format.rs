//! Number formatting shared by the commands.

use serde_json::Value;

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// JSON number rounded to `digits`; infinities and NaN become null.
pub fn json_num(x: f64, digits: usize) -> Value {
    if x.is_finite() {
        Value::from(round_sig(x, digits))
    } else {
        Value::Null
    }
}

/// CSV field: the rounded number, or an empty field when it is missing.
pub fn csv_num(x: Option<f64>, digits: usize) -> String {
    match x {
        Some(v) if v.is_finite() => round_sig(v, digits).to_string(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        _ => String::new(),
    }
}

/// Fixed-width text cell for tables printed to the terminal.
pub fn text_num(x: f64, digits: usize) -> String {
    if x.is_finite() {
        round_sig(x, digits).to_string()
    } else {
        "-".into()
    }
}
