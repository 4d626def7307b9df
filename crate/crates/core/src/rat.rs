//! Exact rational arithmetic.
//!
//! Every quantity in this crate (valuations, prices, cut points, thresholds)
//! is a [`Rat`]: an arbitrary-precision rational kept in lowest terms with a
//! positive denominator. `num::BigRational` maintains exactly that normal
//! form, so it backs the alias directly; no floating point appears anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Zero;
use std::fmt;

pub type Rat = BigRational;

/// The rational `n/1`.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// The rational `p/q` in lowest terms.
///
/// Panics when `q == 0`; intended for literals in tests and examples.
/// Untrusted text goes through [`parse_rat`].
pub fn ratq(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError {
    input: String,
    reason: &'static str,
}

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for ParseRatError {}

/// Parses `"p"` or `"p/q"` (optionally signed) into a normalized rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = |reason| ParseRatError { input: s.to_owned(), reason };
    let mut parts = s.splitn(2, '/');
    let numer_text = parts.next().unwrap_or("").trim();
    let numer: BigInt = numer_text.parse().map_err(|_| err("numerator is not an integer"))?;
    let denom: BigInt = match parts.next() {
        None => BigInt::from(1),
        Some(d) => d.trim().parse().map_err(|_| err("denominator is not an integer"))?,
    };
    if denom.is_zero() {
        return Err(err("denominator is zero"));
    }
    Ok(Rat::new(numer, denom))
}

/// Formats as `"p"` for integers and `"p/q"` otherwise (lowest terms).
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}
