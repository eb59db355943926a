//! Small helpers around exact arithmetic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(p: impl Into<BigInt>, q: impl Into<BigInt>) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn int(p: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(p.into())
}

pub fn from_biguint(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// `"p/q"`, or just `"p"` for integers.
pub fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serializes a rational as `"p/q"`.
pub(crate) fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(r))
}

/// Serializes a big integer as a decimal string.
pub(crate) fn ser_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub(crate) fn ser_opt_biguint<S: serde::Serializer>(x: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_some(&x.to_string()),
        None => s.serialize_none(),
    }
}

pub fn parse_ratio(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(int(s.trim().parse::<BigInt>().ok()?)),
    }
}

pub fn floor_u(r: &BigRational) -> BigUint {
    let f = r.floor().to_integer();
    if f.is_negative() {
        BigUint::zero()
    } else {
        f.to_biguint().unwrap()
    }
}

/// `log2(x)` as a float, accurate to about 1e-15 relative for any size of `x`.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

pub fn log2_ratio(r: &BigRational) -> f64 {
    let n = r.numer().to_biguint().expect("positive ratio");
    let d = r.denom().to_biguint().expect("positive ratio");
    log2_big(&n) - log2_big(&d)
}

const UPPER_DEN: u64 = 1_000_000_000;

/// A rational `q` with `q ≥ x`, on the grid `1e-9`, after widening by a
/// relative margin that dominates float error in `x`.
pub fn rational_above(x: f64) -> BigRational {
    let widened = x + x.abs() * 1e-12 + 1e-9;
    let scaled = (widened * UPPER_DEN as f64).ceil();
    BigRational::new(
        BigInt::from(scaled as i128),
        BigInt::from(UPPER_DEN),
    )
}

pub fn factorial(k: u32) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * j)
}

pub fn binomial(m: &BigUint, s: u64) -> BigUint {
    let mut acc = BigUint::one();
    for j in 0..s {
        if BigUint::from(j) >= *m {
            return BigUint::zero();
        }
        acc = acc * (m - BigUint::from(j)) / BigUint::from(j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_text_round_trip() {
        let r = ratio(6, 4);
        assert_eq!(fmt_ratio(&r), "3/2");
        assert_eq!(parse_ratio("3/2"), Some(r));
        assert_eq!(parse_ratio("7"), Some(int(7)));
        assert_eq!(parse_ratio("1/0"), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&BigUint::from(10u32), 2), BigUint::from(45u32));
        assert_eq!(binomial(&BigUint::from(4u32), 5), BigUint::zero());
        assert_eq!(binomial(&BigUint::from(4u32), 0), BigUint::one());
        assert_eq!(factorial(5), BigUint::from(120u32));
    }

    #[test]
    fn log2_of_huge_values() {
        let x = BigUint::one() << 300usize;
        assert!((log2_big(&x) - 300.0).abs() < 1e-12);
        let y = BigUint::from(168u32);
        assert!((log2_big(&y) - 168f64.log2()).abs() < 1e-12);
        assert!(rational_above(7.0) > int(7));
    }
}
