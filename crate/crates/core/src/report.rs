//! Shared report helpers.

use serde::Serializer;

/// Report schema version written at the top of every JSON report.
pub const SCHEMA_VERSION: &str = "1";

/// Serializes finite floats as numbers and infinities as `"+inf"`/`"-inf"`
/// (JSON has no infinity literal). NaN becomes `null`.
pub fn extended<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_finite() {
        serializer.serialize_f64(*value)
    } else if value.is_nan() {
        serializer.serialize_none()
    } else if *value > 0.0 {
        serializer.serialize_str("+inf")
    } else {
        serializer.serialize_str("-inf")
    }
}
