//! Exact integer and rational helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` over arbitrary-precision integers; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}

/// The decimal value printed for `x`, as an exact rational.
///
/// `0.05` maps to `1/20` rather than to the binary double nearest 0.05, so
/// densities typed by hand stay exact.
pub fn rational_from_decimal(x: f64) -> BigRational {
    assert!(x.is_finite(), "non-finite value {x}");
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .expect("Display of f64 is a plain decimal");
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    if negative {
        -value
    } else {
        value
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(0, 0), BigInt::from(1));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 6), BigInt::from(0));
        assert_eq!(binomial(5, -1), BigInt::from(0));
        assert_eq!(binomial(-1, 0), BigInt::from(0));
        assert_eq!(binomial(52, 5), BigInt::from(2_598_960));
    }

    #[test]
    fn binomial_beyond_u64() {
        // C(100, 50) = 100891344545564193334812497256
        let expected: BigInt = "100891344545564193334812497256".parse().unwrap();
        assert_eq!(binomial(100, 50), expected);
    }

    #[test]
    fn decimal_rationals() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(rational_from_decimal(0.05), r(1, 20));
        assert_eq!(rational_from_decimal(0.1), r(1, 10));
        assert_eq!(rational_from_decimal(1.0), r(1, 1));
        assert_eq!(rational_from_decimal(0.0), r(0, 1));
        assert_eq!(rational_from_decimal(-0.25), r(-1, 4));
    }
}
