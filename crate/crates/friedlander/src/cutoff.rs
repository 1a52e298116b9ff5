//! Smooth cutoffs ψ, ψ₁, ψ₂ = φ(ξ) − φ(2ξ) and χ₁.

use crate::math::exp;

#[inline]
fn f(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        exp(-1.0 / x)
    }
}

/// C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
#[inline]
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = f(x);
        a / (a + f(1.0 - x))
    }
}

/// Bump supported on [3/4, 5/4] with ψ(1) = 1.
#[inline]
pub fn psi(u: f64) -> f64 {
    let z = 4.0 * (u - 1.0);
    if z.abs() >= 1.0 {
        0.0
    } else {
        exp(1.0 - 1.0 / (1.0 - z * z))
    }
}

/// Support of [`psi`].
pub const PSI_SUPPORT: (f64, f64) = (0.75, 1.25);

/// 1 on [0, 1], 0 from 5/4 on.
#[inline]
pub fn phi(xi: f64) -> f64 {
    1.0 - smoothstep((xi - 1.0) * 4.0)
}

/// ψ₂(ξ) = φ(ξ) − φ(2ξ), supported on [1/2, 5/4].
#[inline]
pub fn psi2(xi: f64) -> f64 {
    phi(xi) - phi(2.0 * xi)
}

pub const PSI2_SUPPORT: (f64, f64) = (0.5, 1.25);

/// 0 for ω ≤ 1, 1 for ω ≥ 2.
#[inline]
pub fn chi1(omega: f64) -> f64 {
    smoothstep(omega - 1.0)
}

/// Settings for the cutoffs; ψ₁ is applied to h√λ_k.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffSpec {
    /// Apply ψ₁(h√λ_k) in the spectral integrand.
    pub psi1: bool,
    /// Apply ψ₂(α/γ); off gives the un-localised sum used by the partition check.
    pub psi2: bool,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { psi1: true, psi2: true }
    }
}

/// Σ_j ψ₂(2^j ξ) over dyadic j in the given range.
pub fn dyadic_partition(xi: f64, j_lo: i32, j_hi: i32) -> f64 {
    (j_lo..=j_hi).map(|j| psi2(xi * libm::ldexp(1.0, j))).sum()
}
