//! JSON emission. Non-finite numbers, which JSON cannot represent, are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};

pub fn num<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    println!("{text}");
    Ok(())
}

/// Parses a real that may be written `inf`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")),
    }
}
