//! Number formatting shared by the CSV and JSON writers.

use serde_json::{Number, Value};

/// Significant digits written for every floating-point value.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to `digits` significant digits, in the shorter of fixed or
/// exponent notation, without trailing zeros. Non-finite values print as
/// `nan`, `inf` and `-inf`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// CSV field for `x`.
pub fn csv_number(x: f64) -> String {
    fmt_sig(x, SIG_DIGITS)
}

/// JSON value carrying exactly the number the CSV field shows; non-finite
/// values become `null`.
pub fn json_number(x: f64) -> Value {
    let rounded: f64 = fmt_sig(x, SIG_DIGITS).parse().unwrap_or(f64::NAN);
    Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}
