//! The Gaussian estimate of the middle layer,
//!
//! ```text
//! N_{n,D} ≈ sqrt(6 / (π (n² − 1) D)) · n^D,
//! ```
//!
//! which comes from the central limit theorem for a sum of `D` independent
//! uniform digits in `{0, …, n−1}` (variance `(n² − 1)/12` each). The
//! estimate is evaluated in fixed point with [`DIGITS`] digits after the
//! decimal point, since `n^D` leaves the range of `f64` quickly.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::containers::{certified_upper_bound, ContainerParams};
use crate::exact::{count_antichains, partition_count};
use crate::grid::GridBox;
use crate::num::{fmt_ratio, from_biguint, log2_big, log2_ratio, ser_biguint, ser_opt_biguint};
use crate::{Error, Limits, Result};

/// Digits after the decimal point carried by [`Decimal`].
pub const DIGITS: u32 = 60;

/// Extra digits used inside a computation and dropped at the end.
const GUARD: u32 = 10;

/// A fixed-point decimal `scaled / 10^DIGITS`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decimal {
    scaled: BigInt,
}

fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

impl Decimal {
    pub fn from_int(x: impl Into<BigInt>) -> Self {
        Decimal {
            scaled: x.into() * pow10(DIGITS),
        }
    }

    /// The raw value times `10^DIGITS`.
    pub fn scaled(&self) -> &BigInt {
        &self.scaled
    }

    pub fn is_positive(&self) -> bool {
        self.scaled.is_positive()
    }

    pub fn to_f64(&self) -> f64 {
        // keep 17 significant digits before converting
        let digits = self.scaled.abs().to_string().len() as i32;
        let drop = (digits - 17).max(0) as u32;
        let head = (&self.scaled / pow10(drop)).to_f64().unwrap_or(f64::NAN);
        head * 10f64.powi(drop as i32 - DIGITS as i32)
    }

    /// The value rounded to `sig` significant digits, in scientific form
    /// `d.ddd…e±x`.
    pub fn to_scientific(&self, sig: usize) -> String {
        if self.scaled.is_zero() {
            return "0".into();
        }
        let sign = if self.scaled.is_negative() { "-" } else { "" };
        let s = self.scaled.abs().to_string();
        let exp = s.len() as i64 - 1 - i64::from(DIGITS);
        let sig = sig.clamp(1, s.len());
        let mantissa = &s[..sig];
        let (lead, rest) = mantissa.split_at(1);
        if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        }
    }
}

impl fmt::Display for Decimal {
    /// Full fixed-point expansion with [`DIGITS`] fractional digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.scaled.sign() == Sign::Minus { "-" } else { "" };
        let s = format!("{:0>width$}", self.scaled.abs(), width = DIGITS as usize + 1);
        let (int, frac) = s.split_at(s.len() - DIGITS as usize);
        write!(f, "{sign}{int}.{frac}")
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `atan(1/x) · 10^p` by its alternating series, truncated.
fn atan_inv(x: u64, p: u32) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = pow10(p) / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// `π · 10^p` from `π = 16·atan(1/5) − 4·atan(1/239)`.
fn pi_scaled(p: u32) -> BigInt {
    let q = p + GUARD;
    (BigInt::from(16) * atan_inv(5, q) - BigInt::from(4) * atan_inv(239, q)) / pow10(GUARD)
}

/// `π` to [`DIGITS`] digits.
pub fn pi() -> Decimal {
    Decimal {
        scaled: pi_scaled(DIGITS),
    }
}

/// `sqrt(6 / (π·c))` to [`DIGITS`] digits, for a positive integer `c`.
fn gaussian_factor(c: &BigInt) -> BigInt {
    let p = DIGITS + GUARD;
    let scale = pow10(p);
    // 6/(πc) · 10^p, then its square root at scale 10^p
    let inner = BigInt::from(6) * &scale * &scale / (pi_scaled(p) * c);
    (inner * &scale).sqrt() / pow10(GUARD)
}

/// `sqrt(6/(π(n² − 1)D)) · n^D`.
pub fn clt_middle_layer(n: u32, dim: usize) -> Result<Decimal> {
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "the estimate needs n ≥ 2 (n² − 1 = 0 for n = {n})"
        )));
    }
    if dim == 0 {
        return Err(Error::Degenerate("the estimate needs D ≥ 1".into()));
    }
    let c = BigInt::from(u64::from(n) * u64::from(n) - 1) * BigInt::from(dim);
    Ok(Decimal {
        scaled: gaussian_factor(&c) * BigInt::from(n).pow(dim as u32),
    })
}

/// `|estimate − exact| / exact`.
pub fn relative_error(estimate: &Decimal, exact: &BigUint) -> Result<Decimal> {
    if exact.is_zero() {
        return Err(Error::Degenerate("relative error against zero".into()));
    }
    let exact = BigInt::from(exact.clone());
    let diff = (&estimate.scaled - &exact * pow10(DIGITS)).abs();
    Ok(Decimal { scaled: diff / exact })
}

/// The estimate next to the exact middle layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub n: u32,
    pub dim: usize,
    #[serde(serialize_with = "ser_biguint")]
    pub middle_layer: BigUint,
    pub clt_estimate: Decimal,
    pub relative_error: Decimal,
    /// `log2(count) / (sqrt(6/(Dπ))·n^{D−1})`, when a count was supplied.
    pub exponent_ratio: Option<f64>,
}

/// Header matching [`AsymptoticReport::csv_row`].
pub const CSV_HEADER: &str = "n,D,exact,estimate,relative_error";

impl AsymptoticReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            self.dim,
            self.middle_layer,
            self.clt_estimate.to_scientific(20),
            self.relative_error.to_scientific(20)
        )
    }
}

/// Builds the report; `count` is the number of antichains, if known.
pub fn asymptotic_report(n: u32, dim: usize, count: Option<&BigUint>) -> Result<AsymptoticReport> {
    let bx = GridBox::new(n, dim)?;
    let middle_layer = bx.middle_layer_size();
    let clt_estimate = clt_middle_layer(n, dim)?;
    let relative_error = relative_error(&clt_estimate, &middle_layer)?;
    let exponent_ratio = count.map(|c| log2_big(c) / headline_scale(n, dim - 1).to_f64());
    Ok(AsymptoticReport {
        n,
        dim,
        middle_layer,
        clt_estimate,
        relative_error,
        exponent_ratio,
    })
}

/// `sqrt(6/((d+1)π)) · n^d`, the leading term of `log2 P_d(n)`.
pub fn headline_scale(n: u32, d: usize) -> Decimal {
    Decimal {
        scaled: gaussian_factor(&BigInt::from(d + 1)) * BigInt::from(n).pow(d as u32),
    }
}

/// `log2 P_d(n)` placed between its lower and upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub n: u32,
    pub d: usize,
    /// `N_{n,d+1}`: `log2 P_d(n)` is at least this.
    #[serde(serialize_with = "ser_biguint")]
    pub lower_log2: BigUint,
    #[serde(serialize_with = "ser_opt_biguint")]
    pub exact_count: Option<BigUint>,
    pub exact_log2: Option<f64>,
    /// The container bound, as `"p/q"`.
    pub certified_log2_upper: String,
    pub headline_scale: Decimal,
    /// `log2` of the exact count (or the certified bound) over the scale.
    pub ratio_to_scale: f64,
    /// `2^N ≤ count`, exactly; `None` without an exact count.
    pub lower_ok: Option<bool>,
    /// The container bound is not below the lower bound nor the exact count.
    pub upper_ok: bool,
}

/// Compares `log2 P_d(n)` (exact when within `limits`) with `N_{n,d+1}`,
/// the container bound and the leading term `sqrt(6/((d+1)π))·n^d`.
pub fn theorem_main_exponent(n: u32, d: usize, limits: &Limits) -> Result<ExponentReport> {
    let bx = GridBox::new(n, d + 1)?;
    let lower = bx.middle_layer_size();
    let exact_count = if d <= 2 {
        Some(partition_count(d, n, limits)?)
    } else {
        match count_antichains(&bx, limits) {
            Ok(c) => Some(c),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        }
    };
    let bound = certified_upper_bound(&bx, &ContainerParams::standard(&bx), false, limits)?;
    let upper = bound.certified_log2_upper;
    let scale = headline_scale(n, d);
    let lower_ok = exact_count.as_ref().map(|c| *c >= BigUint::one() << lower.to_u64().unwrap_or(u64::MAX));
    let upper_ok = upper >= from_biguint(&lower)
        && exact_count
            .as_ref()
            .map_or(true, |c| crate::containers::count_within_log2(c, &upper));
    let exact_log2 = exact_count.as_ref().map(log2_big);
    Ok(ExponentReport {
        n,
        d,
        ratio_to_scale: exact_log2.unwrap_or_else(|| log2_ratio(&upper)) / scale.to_f64(),
        lower_log2: lower,
        exact_count,
        exact_log2,
        certified_log2_upper: fmt_ratio(&upper),
        headline_scale: scale,
        lower_ok,
        upper_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        assert_eq!(
            pi().to_string(),
            "3.141592653589793238462643383279502884197169399375105820974944"
        );
    }

    #[test]
    fn decimal_formatting() {
        let d = Decimal::from_int(-12);
        assert!(d.to_string().starts_with("-12.000"));
        assert_eq!(d.to_scientific(3), "-1.20e1");
        let tiny = Decimal { scaled: BigInt::from(25) };
        assert_eq!(tiny.to_string(), format!("0.{}25", "0".repeat(DIGITS as usize - 2)));
        assert_eq!(tiny.to_scientific(2), "2.5e-59");
        assert!((tiny.to_f64() - 2.5e-59).abs() < 1e-70);
    }

    #[test]
    fn estimates_match_hand_values() {
        // sqrt(6/(12π))·16 = 6.3830…
        let e = clt_middle_layer(2, 4).unwrap().to_f64();
        assert!((e - 16.0 * (0.5 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((e - 6.38).abs() < 0.01);
        let e = clt_middle_layer(3, 2).unwrap().to_f64();
        assert!((e - 3.10).abs() < 0.01);
        assert!(clt_middle_layer(1, 3).is_err());
        assert!(clt_middle_layer(3, 0).is_err());
    }

    #[test]
    fn estimate_carries_fifty_significant_digits() {
        // the integer part of the estimate at D = 300 has ~ 90 digits, so
        // the fixed-point value holds well over 50 significant ones
        let e = clt_middle_layer(2, 300).unwrap();
        assert!(e.scaled().to_string().len() >= 50 + DIGITS as usize);
        // squaring recovers 6·4^300/(3π·300) to many digits
        let sq = e.scaled() * e.scaled();
        let target = BigInt::from(6) * BigInt::from(4).pow(300) * pow10(2 * DIGITS) * pow10(DIGITS)
            / (BigInt::from(900) * pi().scaled());
        let err = (&sq - &target).abs() * pow10(50) / &target;
        assert!(err.is_zero());
    }

    #[test]
    fn relative_error_shrinks_with_dimension() {
        for n in 2..=4 {
            let small = asymptotic_report(n, 10, None).unwrap().relative_error;
            let large = asymptotic_report(n, 200, None).unwrap().relative_error;
            assert!(large < small, "n = {n}");
            assert!(large.to_f64() < 0.02);
        }
        let r = asymptotic_report(2, 100, None).unwrap();
        assert!(r.relative_error < asymptotic_report(2, 10, None).unwrap().relative_error);
    }

    #[test]
    fn report_rows() {
        let r = asymptotic_report(2, 4, Some(&168u32.into())).unwrap();
        assert_eq!(r.middle_layer, 6u32.into());
        assert!(r.relative_error.is_positive());
        assert!(r.csv_row().starts_with("2,4,6,6.3830"));
        // log2(168) / (sqrt(6/(4π))·8)
        let ratio = r.exponent_ratio.unwrap();
        assert!((ratio - 168f64.log2() / ((6.0 / (4.0 * std::f64::consts::PI)).sqrt() * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn sandwiches() {
        let limits = Limits::default();
        let r = theorem_main_exponent(2, 3, &limits).unwrap();
        assert_eq!(r.lower_log2, 6u32.into());
        assert_eq!(r.exact_count, Some(168u32.into()));
        assert_eq!(r.lower_ok, Some(true));
        assert!(r.upper_ok);

        let r = theorem_main_exponent(4, 1, &limits).unwrap();
        assert_eq!(r.lower_log2, 4u32.into());
        assert_eq!(r.exact_count, Some(70u32.into()));
        assert!((r.exact_log2.unwrap() - 6.129).abs() < 1e-3);
        assert_eq!(r.lower_ok, Some(true));
        assert!(r.upper_ok);

        let r = theorem_main_exponent(3, 2, &limits).unwrap();
        assert_eq!(r.exact_count, Some(980u32.into()));
        assert_eq!(r.lower_ok, Some(true));
    }

    #[test]
    fn large_boxes_fall_back_to_the_bound() {
        let limits = Limits {
            enumeration: 1000,
            ..Limits::default()
        };
        let r = theorem_main_exponent(2, 9, &limits).unwrap();
        assert_eq!(r.exact_count, None);
        assert_eq!(r.lower_ok, None);
        assert!(r.upper_ok);
    }
}
