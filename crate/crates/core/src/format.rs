//! Deterministic number formatting for the CSV outputs.
//!
//! CSV cells carry six significant digits in the style of C's `%.6g`
//! (fixed notation for moderate magnitudes, scientific otherwise, trailing
//! zeros stripped), so identical runs produce byte-identical files on every
//! platform.

/// Formats with six significant digits, `%.6g` style.
pub fn format_g6(x: f64) -> String {
    const SIG: usize = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // Round to SIG digits first; the exponent below reflects any carry.
    let rounded = format!("{:.*e}", SIG - 1, x);
    let (mant, exp) = rounded.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), SIG);

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp >= -4 && exp < SIG as i32 {
        if exp < 0 {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
        } else {
            let point = exp as usize + 1;
            out.push_str(&digits[..point]);
            let frac = digits[point..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push(if exp < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exp.abs()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g6_conventions() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(3.0), "3");
        assert_eq!(format_g6(100.0), "100");
        assert_eq!(format_g6(-2.5), "-2.5");
        assert_eq!(format_g6(6.434189), "6.43419");
        assert_eq!(format_g6(0.000123456), "0.000123456");
        assert_eq!(format_g6(1e-5), "1e-05");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(-4.139274e-9), "-4.13927e-09");
        assert_eq!(format_g6(999999.4), "999999");
    }

    #[test]
    fn rounding_carries_into_the_exponent() {
        assert_eq!(format_g6(0.9999996), "1");
        assert_eq!(format_g6(999999.5), "1e+06");
        assert_eq!(format_g6(9.999999e-6), "1e-05");
    }

    #[test]
    fn six_significant_digits_survive() {
        assert_eq!(format_g6(1.234564), "1.23456");
        assert_eq!(format_g6(1.234566), "1.23457");
        assert_eq!(format_g6(-0.001234564), "-0.00123456");
    }
}
