//! Alternating series acceleration (Cohen, Rodriguez Villegas and Zagier) and
//! the Dirichlet eta function built on it.

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Largest number of accelerated terms; `(3 + sqrt 8)^n` must stay finite.
pub const MAX_TERMS: usize = 380;

/// `sum_{k >= 0} (-1)^k a_k` from the first `n` terms.
///
/// Exact up to `2 (3 + sqrt 8)^{-n}` times the total variation of the
/// measure whose moments are `a_k`; for `a_k = (N + k)^{-s}` that is
/// modest as long as `|Im s|` is small compared with `n`.
pub fn alternating_sum<F: Fn(usize) -> Complex64>(terms: F, n: usize) -> Complex64 {
    assert!((1..=MAX_TERMS).contains(&n), "term count {n} out of range");
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let nf = n as f64;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let kf = k as f64;
        c = b - c;
        s += terms(k) * c;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Terms needed for roughly full double precision at imaginary part `im`.
pub fn terms_for(im: f64) -> Result<usize> {
    let n = 40.0 + 1.2 * im.abs();
    if n > MAX_TERMS as f64 {
        return Err(LabError::Domain(format!(
            "alternating acceleration cannot resolve |Im s| = {} (needs more than {MAX_TERMS} terms)",
            im.abs()
        )));
    }
    Ok(n.ceil() as usize)
}

/// `eta(s) = sum_{n >= 1} (-1)^{n+1} n^{-s}`, for `Re s > 0`.
pub fn eta(s: Complex64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(LabError::Domain(format!("eta series needs Re s > 0, got s = {s}")));
    }
    Ok(alternating_tail(s, 1, 0.0, terms_for(s.im)?))
}

/// `sum_{n >= first} (-1)^{n+1} n^{-s} e^{(s - 1) shift}`.
///
/// The factor `e^{(s-1) shift}` keeps tails normalised: with `s = 1 + z` and
/// `shift = t` this is `e^{tz} sum_{n >= first} (-1)^{n+1} n^{-1} n^{-z}`.
pub fn alternating_tail(s: Complex64, first: u64, shift: f64, n: usize) -> Complex64 {
    let z = s - 1.0;
    let sign = if first % 2 == 1 { 1.0 } else { -1.0 };
    let sum = alternating_sum(
        |k| {
            let m = (first + k as u64) as f64;
            (-z * (m.ln() - shift)).exp() / m
        },
        n,
    );
    sum * sign
}

/// `log 2 = eta(1)`, from the accelerated alternating harmonic series.
pub fn ln2_oracle() -> f64 {
    alternating_sum(|k| Complex64::new(1.0 / (k as f64 + 1.0), 0.0), 60).re
}
