//! Exact arithmetic shared by every other module.

mod partition;
mod poly;
mod series;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
pub use partition::{set_partitions, SetPartition};
pub use poly::IntPoly;
pub use series::PowerSeries;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: i64, k: i64) -> Result<BigInt> {
    if k < 0 || n < 0 || k > n {
        return invalid(format!("binomial({n}, {k}) requires 0 <= k <= n"));
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    Ok(acc)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `base^exp` for a possibly negative exponent, as an exact rational.
pub fn rational_pow(base: &BigRational, exp: i64) -> BigRational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.3"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_int: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(whole * &scale + frac_int, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let v: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(v))
}

pub fn to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&r.abs()).exp()
}

/// Natural log of a positive big integer, accurate to f64 precision at any size.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

/// Commutative rings the moment–cumulant transform can run over.
pub trait ExactRing: Clone {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn mul_int(&self, c: i64) -> Self;
}

impl ExactRing for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_int(&self, c: i64) -> Self {
        self * BigInt::from(c)
    }
}

impl ExactRing for IntPoly {
    fn zero() -> Self {
        IntPoly::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_int(&self, c: i64) -> Self {
        self.scale(&BigInt::from(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2).unwrap(), BigInt::from(6));
        assert_eq!(binomial(9, 0).unwrap(), BigInt::from(1));
        assert_eq!(binomial(0, 0).unwrap(), BigInt::from(1));
        assert!(binomial(3, 4).is_err());
        assert!(binomial(3, -1).is_err());
    }

    #[test]
    fn central_binomial_over_k_plus_one_is_catalan() {
        // Catalan by its own convolution C_{k+1} = Σ C_j C_{k-j}
        let mut cat = vec![BigInt::one()];
        for k in 0..20 {
            let next = (0..=k).map(|j| &cat[j] * &cat[k - j]).sum();
            cat.push(next);
        }
        for (k, c) in cat.iter().enumerate() {
            let k = k as i64;
            assert_eq!(binomial(2 * k, k).unwrap() / (k + 1), *c);
        }
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(51, 4)), "51/4");
        assert_eq!(format_rational(&ratio(66, 2)), "33");
    }

    #[test]
    fn ln_of_huge_values() {
        let big = num_traits::pow(BigUint::from(3u32), 5000);
        let expected = 5000.0 * 3f64.ln();
        assert!((ln_biguint(&big) - expected).abs() < 1e-9 * expected);
    }

    proptest! {
        #[test]
        fn rational_string_roundtrip(num in -1_000_000_000i64..1_000_000_000, den in 1i64..1_000_000_000) {
            let r = ratio(num, den);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
