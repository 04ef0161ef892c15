//! Fixed-precision number formatting shared by every text file format.

/// Formats `v` with 9 significant digits, choosing fixed or scientific
/// notation the way C's `%.9g` does.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.8e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds `v` to the nearest double of its 9-significant-digit decimal form,
/// so that writing and re-reading it is lossless.
pub fn quantize9(v: f64) -> f64 {
    sig9(v).parse().expect("sig9 output parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_percent_g() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.1), "0.1");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(9.81), "9.81");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(9.9999999999), "10");
        assert_eq!(sig9(2.0e12), "2e12");
    }

    #[test]
    fn quantized_values_survive_text_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, -7.123456789012, 1e-9 / 7.0, 12345.678901234, -0.0] {
            let q = quantize9(v);
            let back: f64 = sig9(q).parse().unwrap();
            assert_eq!(q.to_bits(), back.to_bits(), "{v}");
        }
    }
}
