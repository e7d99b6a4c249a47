//! Truncated complex Taylor series (jets) for exact high-order derivatives
//! of closed-form analytic expressions. No finite differences anywhere: a
//! k-th derivative is `k!` times the k-th jet coefficient.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Taylor coefficients `c_0 + c_1 h + ... + c_k h^k` of a function around a
/// fixed expansion point, truncated at order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The identity function `z` expanded at `z0`.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut jet = Self::constant(z0, order);
        if order >= 1 {
            jet.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    /// k-th derivative at the expansion point, `k! * c_k`.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let mut fact = 1.0f64;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.coeffs[k] * fact
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.order(), rhs.order());
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.order(), rhs.order());
        let k = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); k];
        for i in 0..k {
            if self.coeffs[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..k - i {
                out[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        Self { coeffs: out }
    }

    /// Truncated reciprocal; the constant term must be nonzero.
    pub fn recip(&self) -> Result<Self> {
        if self.coeffs[0].norm_sqr() == 0.0 {
            return Err(Error::NumericRange(
                "reciprocal of jet with zero constant term".into(),
            ));
        }
        let k = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); k];
        out[0] = 1.0 / self.coeffs[0];
        for i in 1..k {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=i {
                s += self.coeffs[j] * out[i - j];
            }
            out[i] = -s / self.coeffs[0];
        }
        Ok(Self { coeffs: out })
    }

    /// Integer power by binary exponentiation.
    pub fn powi(&self, mut n: u32) -> Self {
        let mut acc = Self::constant(Complex64::new(1.0, 0.0), self.order());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}
