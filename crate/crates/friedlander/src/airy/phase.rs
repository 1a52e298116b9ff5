//! The phase-accumulation function L(ω) = π + i log(A₋(ω)/A₊(ω)) and the
//! remainder B(u) = (4/3)ω^{3/2} + π/2 − L(ω), u = ω^{3/2}.
//!
//! With A±(ω) = (Ai(−ω) ∓ i Bi(−ω))/2 one has L(ω) = π − 2θ(ω) where
//! θ = arg(Ai(−ω) + i Bi(−ω)) is the Airy modulus–phase angle, and
//! L'(ω) = 2/(π M²(ω)) with M² = Ai²(−ω) + Bi²(−ω).

use super::real::{airy, asy_u, osc_series, X_LIM};
use crate::math::{atan, atan2, exp, pow2_3, round, sqrt, PI, TAU};
use crate::{Error, Result};

/// Below this L and its derivatives are zero to double precision.
const OMEGA_FLOOR: f64 = -30.0;

/// L(ω), L'(ω), L''(ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseL {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

fn reference_branch(omega: f64) -> f64 {
    4.0 / 3.0 * omega * sqrt(omega) + PI / 2.0
}

/// L(ω).
pub fn phase_l(omega: f64) -> f64 {
    if omega > X_LIM {
        let zeta = 2.0 / 3.0 * omega * sqrt(omega);
        let (p, q, _, _) = osc_series(zeta);
        return reference_branch(omega) - 2.0 * atan2(q, p);
    }
    if omega < -X_LIM {
        return 2.0 * atan(ai_over_bi(-omega));
    }
    let a = airy(-omega);
    if omega <= 0.0 {
        // Ai and Bi are both positive here; avoids cancelling against π
        return 2.0 * atan(a.ai / a.bi);
    }
    let l0 = PI - 2.0 * atan2(a.bi, a.ai);
    if omega < 1.0 {
        return l0;
    }
    let m = round((reference_branch(omega) - l0) / TAU);
    l0 + TAU * m
}

/// Ai(x)/Bi(x) for x > 10 from the ratio of the asymptotic series.
fn ai_over_bi(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x * sqrt(x);
    if zeta > 350.0 {
        return 0.0;
    }
    let u = asy_u();
    let (mut sa, mut sb, mut p) = (1.0, 1.0, 1.0);
    for (k, uk) in u.iter().enumerate().skip(1).take(24) {
        p /= zeta;
        let t = uk * p;
        sa += if k % 2 == 1 { -t } else { t };
        sb += t;
    }
    0.5 * exp(-2.0 * zeta) * sa / sb
}

/// L and its first two derivatives.
pub fn phase_l_derivs(omega: f64) -> PhaseL {
    if omega < OMEGA_FLOOR {
        return PhaseL { value: 0.0, d1: 0.0, d2: 0.0 };
    }
    let value = phase_l(omega);
    let a = airy(-omega);
    let m2 = a.ai * a.ai + a.bi * a.bi;
    // d/dω M²(ω) = −2(Ai Ai' + Bi Bi')(−ω)
    let s = a.ai * a.aip + a.bi * a.bip;
    PhaseL {
        value,
        d1: 2.0 / (PI * m2),
        d2: 4.0 * s / (PI * m2 * m2),
    }
}

/// B(u) for u ≥ 1 (`order` = 0), or its first/second derivative in u.
pub fn b_remainder(u: f64, order: u8) -> Result<f64> {
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::Domain { name: "u", value: u, expected: "u >= 1" });
    }
    let omega = pow2_3(u);
    match order {
        0 => {
            if omega > X_LIM {
                let (p, q, _, _) = osc_series(2.0 / 3.0 * u);
                Ok(2.0 * atan2(q, p))
            } else {
                Ok(4.0 / 3.0 * u + PI / 2.0 - phase_l(omega))
            }
        }
        1 => {
            // dB/du = (dω/du)(2ω^{1/2} − L'(ω)), dω/du = (2/3)u^{−1/3}
            let dw = 2.0 / 3.0 * omega / u;
            Ok(dw * db_domega(omega))
        }
        2 => {
            let dw = 2.0 / 3.0 * omega / u;
            let d2w = -1.0 / 3.0 * dw / u;
            let pl = phase_l_derivs(omega);
            let g1 = 1.0 / sqrt(omega) - pl.d2;
            Ok(d2w * db_domega(omega) + dw * dw * g1)
        }
        _ => Err(Error::Domain { name: "order", value: order as f64, expected: "0, 1 or 2" }),
    }
}

/// 2ω^{1/2} − L'(ω), computed without cancellation on the asymptotic side.
fn db_domega(omega: f64) -> f64 {
    let s = sqrt(omega);
    if omega > X_LIM {
        let (p, q, _, _) = osc_series(2.0 / 3.0 * omega * s);
        // L' = 2√ω / (P² + Q²)
        let n2 = p * p + q * q;
        let excess = (p - 1.0) * (p + 1.0) + q * q;
        2.0 * s * excess / n2
    } else {
        2.0 * s - phase_l_derivs(omega).d1
    }
}
