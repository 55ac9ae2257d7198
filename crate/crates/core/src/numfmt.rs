//! Fixed-precision number formatting shared by the JSON and RDF writers.

use serde::Serializer;

/// Six fractional digits, rounding ties to even.
///
/// `core::fmt` rounds on the exact binary value and resolves exact decimal
/// ties to the even digit, which is the behaviour wanted here.
pub fn fixed6(value: f64) -> String {
    let s = format!("{value:.6}");
    // "-0.000000" is not a canonical decimal.
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Rounds to at most six decimal digits.
pub fn round6(value: f64) -> f64 {
    fixed6(value).parse().unwrap_or(value)
}

pub fn serialize_round6<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_f64(round6(*value))
}
