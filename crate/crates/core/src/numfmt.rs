// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed float formatting for reports and summaries.

/// C-style `%.12e`: `1.000000000000e+00`. Negative zero prints as zero.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// `re+imi` / `re-imi` with both parts in [`fmt_float`] form.
pub fn fmt_complex(re: f64, im: f64) -> String {
    let im = if im == 0.0 { 0.0 } else { im };
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", fmt_float(re), fmt_float(im.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_float(1.0), "1.000000000000e+00");
        assert_eq!(fmt_float(-0.0), "0.000000000000e+00");
        assert_eq!(fmt_float(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_float(6.02e123), "6.020000000000e+123");
        assert_eq!(fmt_complex(1.0, -0.0), "1.000000000000e+00+0.000000000000e+00i");
        assert_eq!(fmt_complex(0.0, -2.0), "0.000000000000e+00-2.000000000000e+00i");
    }
}
