//! Exact rational scalars and their `p/q` string form.
//!
//! All probabilities, kernels, and laws in this crate are exact rationals;
//! floating point appears only in Monte Carlo sampling and in total-variation
//! reporting.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Rational from machine integers; panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parse `p/q` or a bare integer `p`.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let numer: BigInt = numer
        .parse()
        .map_err(|_| format!("invalid integer `{numer}` in rational `{s}`"))?;
    let denom: BigInt = denom
        .parse()
        .map_err(|_| format!("invalid integer `{denom}` in rational `{s}`"))?;
    if denom.is_zero() {
        return Err(format!("zero denominator in rational `{s}`"));
    }
    Ok(Rat::new(numer, denom))
}

/// Lowest-terms string form, omitting a denominator of 1.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational does not fit in f64")
}
