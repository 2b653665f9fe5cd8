use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};

/// A formal power series truncated at an explicit inclusive order.
///
/// Binary operations on series of different orders produce a result at the
/// smaller order; nothing ever silently extends the truncation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

impl PowerSeries {
    /// Pads with zeros or truncates `coeffs` to exactly `order + 1` terms.
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        PowerSeries { coeffs }
    }

    pub fn from_integers(coeffs: &[i64], order: usize) -> Self {
        let c = coeffs
            .iter()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        Self::new(c, order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The series `x`.
    pub fn variable(order: usize) -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first coefficient where `self` and `other` differ,
    /// compared through the smaller of the two orders.
    pub fn first_mismatch(&self, other: &PowerSeries) -> Option<usize> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .position(|(a, b)| a != b)
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "truncate cannot extend a series");
        PowerSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplication by `x`, keeping the order.
    pub fn times_x(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(BigRational::zero());
        coeffs.extend_from_slice(&self.coeffs[..self.order()]);
        PowerSeries { coeffs }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal exponential via `exp' = a'·exp`. The constant term must be 0.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return invalid("exp of a series requires a zero constant term");
        }
        let order = self.order();
        let mut out = vec![BigRational::one()];
        for k in 1..=order {
            let mut s = BigRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    s += &self.coeffs[j] * &out[k - j] * BigInt::from(j);
                }
            }
            out.push(s / BigInt::from(k));
        }
        Ok(PowerSeries { coeffs: out })
    }

    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return invalid("derivative of an order-0 series is undefined");
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, a)| a * BigInt::from(i + 1))
            .collect();
        Ok(PowerSeries { coeffs })
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        PowerSeries { coeffs }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        PowerSeries { coeffs }
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

/// Cauchy product truncated at the smaller order.
impl Mul for &PowerSeries {
    type Output = PowerSeries;
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        PowerSeries { coeffs }
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use proptest::prelude::*;

    #[test]
    fn binomial_square() {
        let a = PowerSeries::from_integers(&[1, 1], 4);
        assert_eq!(&a * &a, PowerSeries::from_integers(&[1, 2, 1], 4));
    }

    #[test]
    fn multiplicative_identity() {
        let a = PowerSeries::from_integers(&[3, -1, 4, 1, 5], 4);
        assert_eq!(&a * &PowerSeries::one(4), a);
    }

    #[test]
    fn product_order_is_the_minimum() {
        let a = PowerSeries::from_integers(&[1, 1], 6);
        let b = PowerSeries::from_integers(&[1, 1], 3);
        assert_eq!((&a * &b).order(), 3);
        assert_eq!((&a + &b).order(), 3);
    }

    #[test]
    fn exp_of_zero_and_x() {
        assert_eq!(PowerSeries::zero(5).exp().unwrap(), PowerSeries::one(5));
        let e = PowerSeries::variable(4).exp().unwrap();
        let expected: Vec<_> = [1, 1, 2, 6, 24].iter().map(|&d| ratio(1, d)).collect();
        assert_eq!(e.coefficients(), expected.as_slice());
    }

    #[test]
    fn exp_rejects_constant_term() {
        assert!(PowerSeries::one(3).exp().is_err());
    }

    #[test]
    fn derivative_values() {
        let a = PowerSeries::from_integers(&[1, 2, 3], 2);
        assert_eq!(a.derivative().unwrap(), PowerSeries::from_integers(&[2, 6], 1));
        let c = PowerSeries::from_integers(&[7], 3);
        assert!(c.derivative().unwrap().is_zero());
        assert!(PowerSeries::one(0).derivative().is_err());
    }

    #[test]
    fn times_x_keeps_order() {
        let a = PowerSeries::from_integers(&[1, 2, 3], 2);
        assert_eq!(a.times_x(), PowerSeries::from_integers(&[0, 1, 2], 2));
    }

    fn series_strategy(order: usize) -> impl Strategy<Value = PowerSeries> {
        proptest::collection::vec((-20i64..20, 1i64..6), order).prop_map(move |v| {
            let mut c = vec![BigRational::zero()];
            c.extend(v.into_iter().map(|(n, d)| ratio(n, d)));
            PowerSeries::new(c, order)
        })
    }

    proptest! {
        #[test]
        fn exp_is_a_homomorphism(a in series_strategy(8), b in series_strategy(8)) {
            let lhs = (&a + &b).exp().unwrap();
            let rhs = &a.exp().unwrap() * &b.exp().unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn leibniz_rule(a in series_strategy(7), b in series_strategy(7)) {
            let lhs = (&a * &b).derivative().unwrap();
            let rhs = &(&a.derivative().unwrap() * &b.truncate(6)) + &(&a.truncate(6) * &b.derivative().unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
