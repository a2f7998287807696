//! JSON number formatting.
//!
//! Every float in a report is written with 17 significant digits in the
//! style of C's `%.17g`, so that values round-trip bit-exactly and reports
//! are byte-identical across runs.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Formats `v` like `%.17g`. Non-finite values become `null`.
pub fn fmt_g17(v: f64) -> String {
    fmt_g(v, 17)
}

/// Formats `v` like C's `%.{sig}g`, with `null` for non-finite values.
pub fn fmt_g(v: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if !v.is_finite() {
        return "null".to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if (-4..sig as i32).contains(&exp) {
        let (int_part, frac_part) = if exp >= 0 {
            let split = exp as usize + 1;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            ("0".to_string(), format!("{zeros}{digits}"))
        };
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        }
    }
}

fn raw(v: f64) -> Box<RawValue> {
    RawValue::from_string(fmt_g17(v)).expect("formatted float is valid JSON")
}

pub fn g17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*v).serialize(s)
}

pub fn g17_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => g17(v, s),
        None => s.serialize_none(),
    }
}

pub fn g17_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&raw(*x))?;
    }
    seq.end()
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report types always serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(2.0625), "2.0625");
        assert_eq!(fmt_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_g17(-0.25), "-0.25");
        assert_eq!(fmt_g17(30.0), "30");
        assert_eq!(fmt_g17(1e-6), "9.9999999999999995e-7");
        assert_eq!(fmt_g17(1.5e20), "1.5e20");
        assert_eq!(fmt_g17(1.25e-3), "0.00125");
        assert_eq!(fmt_g17(f64::NAN), "null");
    }

    #[test]
    fn short_precision() {
        assert_eq!(fmt_g(std::f64::consts::E.powf(2.0 / 3.0), 5), "1.9477");
        assert_eq!(fmt_g(123456.0, 5), "1.2346e5");
        assert_eq!(fmt_g(0.5, 5), "0.5");
    }

    #[test]
    fn round_trips() {
        for v in [1.0 / 3.0, std::f64::consts::E, 6.0e-7, 123456.789, 5.5, 1e-300, 1e300] {
            let back: f64 = fmt_g17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
