use alloc::vec::Vec;

use super::{ai, airy_zero, MAX_ZERO_INDEX};
use crate::math::TAU;
use crate::quad::integrate_real;
use crate::{Error, Result};

/// Past `x = ω_k + 40` the integrand Ai²(x − ω_k) is below e^{−(4/3)·40^{3/2}}.
const TAIL: f64 = 40.0;
const L_PRIME_TOL: f64 = 1e-10;

/// Zeros ω_k of Ai(−ω) and the normalisations L'(ω_k) for k = 1..=k_max.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AiryTable {
    zeros: Vec<f64>,
    l_prime: Vec<f64>,
}

impl AiryTable {
    /// Builds the table; L'(ω_k) is computed as 2π∫₀^∞ Ai²(x − ω_k) dx.
    pub fn new(k_max: usize) -> Result<Self> {
        if k_max == 0 || k_max > MAX_ZERO_INDEX {
            return Err(Error::Range { index: k_max, max: MAX_ZERO_INDEX });
        }
        let mut zeros = Vec::with_capacity(k_max);
        let mut l_prime = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let w = airy_zero(k)?;
            let panels = 4 + 2 * k;
            let (v, _) = integrate_real(|x| {
                let a = ai(x - w);
                a * a
            }, 0.0, w + TAIL, panels, L_PRIME_TOL)?;
            zeros.push(w);
            l_prime.push(TAU * v);
        }
        Ok(Self { zeros, l_prime })
    }

    /// Wraps externally supplied values after checking ordering and signs.
    pub fn from_parts(zeros: Vec<f64>, l_prime: Vec<f64>) -> Result<Self> {
        if zeros.is_empty() || zeros.len() != l_prime.len() {
            return Err(Error::Params("zeros and l_prime must be non-empty and of equal length".into()));
        }
        if !(zeros[0] > 2.0) || zeros.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Params("zeros must be increasing with ω_1 > 2".into()));
        }
        if l_prime.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Params("l_prime values must be positive".into()));
        }
        Ok(Self { zeros, l_prime })
    }

    pub fn k_max(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn l_prime(&self) -> &[f64] {
        &self.l_prime
    }

    /// ω_k, 1-based.
    pub fn zero(&self, k: usize) -> Result<f64> {
        self.index(k).map(|i| self.zeros[i])
    }

    /// L'(ω_k), 1-based.
    pub fn l_prime_at(&self, k: usize) -> Result<f64> {
        self.index(k).map(|i| self.l_prime[i])
    }

    fn index(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.zeros.len() {
            Err(Error::Range { index: k, max: self.zeros.len() })
        } else {
            Ok(k - 1)
        }
    }
}
