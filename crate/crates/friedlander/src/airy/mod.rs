//! Airy functions on the real line, the rotated solutions `A±`, the zeros
//! `ω_k` of `Ai(−ω)` and the phase function `L`.

mod phase;
mod real;
mod table;

pub use phase::{b_remainder, phase_l, phase_l_derivs, PhaseL};
pub use real::{ai, ai_deriv, airy, Airy};
pub use table::AiryTable;

use crate::math::{pow2_3, sqrt, C64, PI};
use crate::{Error, Result, Sign};

/// Largest zero index served by [`airy_zero`].
pub const MAX_ZERO_INDEX: usize = 2000;

/// `A±(z) = e^{∓iπ/3} Ai(e^{∓iπ/3} z)`, evaluated as `(Ai(−z) ∓ i Bi(−z))/2`.
pub fn a_pm(sign: Sign, z: f64) -> C64 {
    let a = airy(-z);
    C64::new(0.5 * a.ai, -0.5 * sign.factor() * a.bi)
}

/// The k-th zero ω_k of `Ai(−ω)`, k ≥ 1.
pub fn airy_zero(k: usize) -> Result<f64> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::Range { index: k, max: MAX_ZERO_INDEX });
    }
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    let guess = pow2_3(t) * (1.0 + 5.0 / 48.0 / (t * t));
    // zeros are at least π/√ω apart; a bracket of ±0.3 of that holds one sign change
    let half = 0.3 * PI / sqrt(guess).max(1.0);
    let (mut lo, mut hi) = (guess - half, guess + half);
    let mut flo = ai(-lo);
    if flo * ai(-hi) > 0.0 {
        return Err(Error::Domain { name: "zero bracket", value: guess, expected: "a sign change" });
    }
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        let fm = ai(-mid);
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..20 {
        let (f, fp) = ai_deriv(-w);
        // d/dω Ai(−ω) = −Ai'(−ω)
        let step = -f / fp;
        let next = (w - step).clamp(lo, hi);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * w;
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}
