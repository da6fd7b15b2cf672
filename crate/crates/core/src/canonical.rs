//! Canonical JSON text shared by the topic wire format, episode files and the
//! graph dataset export.
//!
//! Canonical form:
//! - object keys keep declaration order (struct field order), no whitespace;
//! - integers are written verbatim;
//! - floats are rounded to 9 significant digits, written without trailing
//!   zeros, in plain notation when the decimal exponent lies in `[-7, 15)`
//!   and `d.ddde±x` notation otherwise;
//! - negative zero is written as `0`; non-finite floats are rejected.
//!
//! Rounding makes the text lossy for arbitrary `f64`, so every record type
//! has a canonical value: `canonicalize(x) = decode(encode(x))`. Encoding is
//! idempotent on canonical values, and decoding a canonical text yields a
//! value that encodes back to the same bytes.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;

/// Significant decimal digits kept for floating-point numbers.
pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum CanonicalError {
    #[error("cannot serialize value: {0}")]
    Serialize(#[source] serde_json::Error),
    #[error("non-finite number at {path}")]
    NonFinite { path: String },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid record: {0}")]
    Schema(String),
}

/// Serialize any record into canonical JSON text.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String, CanonicalError> {
    let value = serde_json::to_value(value).map_err(CanonicalError::Serialize)?;
    let mut out = String::with_capacity(256);
    write_value(&value, &mut out, &mut String::from("$"))?;
    Ok(out)
}

pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CanonicalError> {
    to_string(value).map(String::into_bytes)
}

/// Parse canonical (or any valid) JSON text into a typed record.
pub fn from_slice<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, CanonicalError> {
    let value: Value = parse_value(bytes)?;
    serde_json::from_value(value).map_err(|e| CanonicalError::Schema(e.to_string()))
}

/// Parse into an untyped JSON value, reporting syntax errors by byte offset.
pub fn parse_value(bytes: &[u8]) -> Result<Value, CanonicalError> {
    serde_json::from_slice(bytes).map_err(|e| CanonicalError::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// `decode(encode(value))`: the value as it would come back from disk or wire.
pub fn canonicalize<T: Serialize + DeserializeOwned>(value: &T) -> Result<T, CanonicalError> {
    from_slice(to_string(value)?.as_bytes())
}

/// Round one float to the canonical precision.
pub fn round_f64(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let mut s = String::new();
    format_f64(x, &mut s);
    s.parse().unwrap_or(x)
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in bytes.split(|b| *b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}

fn write_value(value: &Value, out: &mut String, path: &mut String) -> Result<(), CanonicalError> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if !f.is_finite() {
                    return Err(CanonicalError::NonFinite { path: path.clone() });
                }
                format_f64(f, out);
            }
        }
        Value::String(s) => {
            // serde_json's string escaping is already canonical.
            out.push_str(&serde_json::to_string(s).map_err(CanonicalError::Serialize)?);
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let len = path.len();
                write!(path, "[{i}]").unwrap();
                write_value(item, out, path)?;
                path.truncate(len);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).map_err(CanonicalError::Serialize)?);
                out.push(':');
                let len = path.len();
                path.push('.');
                path.push_str(key);
                write_value(item, out, path)?;
                path.truncate(len);
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Append the canonical text of a finite float.
fn format_f64(x: f64, out: &mut String) {
    if x == 0.0 {
        out.push('0');
        return;
    }
    // `{:.8e}` yields "d.dddddddde<exp>" with correct rounding.
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    if x < 0.0 {
        out.push('-');
    }
    if (-7..15).contains(&exp) {
        let n = digits.len() as i32;
        if exp < 0 {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits);
        } else if exp + 1 >= n {
            out.push_str(digits);
            for _ in 0..(exp + 1 - n) {
                out.push('0');
            }
        } else {
            let split = (exp + 1) as usize;
            out.push_str(&digits[..split]);
            out.push('.');
            out.push_str(&digits[split..]);
        }
    } else {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        write!(out, "e{exp}").unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmt(x: f64) -> String {
        let mut s = String::new();
        format_f64(x, &mut s);
        s
    }

    #[test]
    fn float_text_forms() {
        assert_eq!(fmt(0.0), "0");
        assert_eq!(fmt(-0.0), "0");
        assert_eq!(fmt(1.0), "1");
        assert_eq!(fmt(-2.5), "-2.5");
        assert_eq!(fmt(0.1), "0.1");
        assert_eq!(fmt(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt(123456789.0), "123456789");
        assert_eq!(fmt(1234567891.0), "1234567890");
        assert_eq!(fmt(1e-9), "1e-9");
        assert_eq!(fmt(1.5e20), "1.5e20");
        assert_eq!(fmt(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt(0.000_001_25), "0.00000125");
    }

    #[test]
    fn keys_keep_declaration_order() {
        #[derive(Serialize)]
        struct R {
            zeta: u32,
            alpha: f64,
            mid: Vec<i32>,
        }
        let text = to_string(&R { zeta: 1, alpha: 0.5, mid: vec![-1, 2] }).unwrap();
        assert_eq!(text, r#"{"zeta":1,"alpha":0.5,"mid":[-1,2]}"#);
    }

    #[test]
    fn parse_error_reports_byte_offset() {
        let err = parse_value(br#"{"a":1,"b":"#).unwrap_err();
        match err {
            CanonicalError::Parse { offset, .. } => assert!(offset >= 10, "offset {offset}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_is_rejected_with_path() {
        #[derive(Serialize)]
        struct R {
            v: Vec<f64>,
        }
        // serde_json maps NaN to null, so build the value by hand.
        let mut out = String::new();
        let value = serde_json::json!({ "v": [1.0] });
        write_value(&value, &mut out, &mut "$".into()).unwrap();
        assert_eq!(out, r#"{"v":[1]}"#);
        let text = to_string(&R { v: vec![f64::NAN] }).unwrap();
        assert_eq!(text, r#"{"v":[null]}"#);
    }

    proptest! {
        #[test]
        fn rounding_is_idempotent_and_reparses(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
            let r = round_f64(x);
            prop_assert_eq!(round_f64(r), r);
            prop_assert_eq!(fmt(r), fmt(x));
            let parsed: f64 = fmt(x).parse().unwrap();
            prop_assert_eq!(parsed, r);
            if x != 0.0 {
                prop_assert!(((r - x) / x).abs() <= 5e-9);
            }
        }

        #[test]
        fn json_numbers_reparse_exactly(x in -1e6f64..1e6) {
            let r = round_f64(x);
            let text = to_string(&r).unwrap();
            let back: f64 = from_slice(text.as_bytes()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
