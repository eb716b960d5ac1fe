//! Numeric formatting for report output: every float is printed with 9
//! significant digits (printf `%.9g` semantics), so emitted documents
//! round-trip losslessly at that precision.

/// Format with 9 significant digits, trimming trailing zeros.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp_str) = sci.split_once('e').expect("exponent in {:.8e} output");
    let exp: i32 = exp_str.parse().expect("numeric exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };

    if exp < -4 || exp >= 9 {
        let trimmed = digits.trim_end_matches('0');
        let head = &trimmed[..1];
        let tail = &trimmed[1..];
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    } else if exp >= 0 {
        let point = (exp + 1) as usize;
        let int_part = &digits[..point];
        let frac = digits[point..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = format!("{zeros}{digits}");
        let frac = frac.trim_end_matches('0');
        format!("{sign}0.{frac}")
    }
}

/// Round a value to the 9-significant-digit print precision.
pub fn round_g9(x: f64) -> f64 {
    fmt_g9(x).parse().unwrap_or(x)
}
