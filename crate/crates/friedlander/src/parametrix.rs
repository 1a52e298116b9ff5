//! Reflection-indexed representation `G± = Σ_N W_N` of the localised kernel.
//!
//! `W_N` carries the phase `−N·L(ω)`; summing over N reproduces the gallery-mode
//! sum exactly through the Airy–Poisson formula. This module holds the phases
//! (physical and rescaled), their critical-point algebra, single reflection
//! terms by adaptive quadrature and a batched evaluator of the whole N-sum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::airy::{ai, b_remainder, phase_l};
use crate::cutoff::{psi, smoothstep, PSI_SUPPORT};
use crate::math::{cbrt, ceil, cis, cos, floor, pairwise_sum, pow2_3, sqrt, C64, PI};
use crate::quad::{gauss_legendre, integrate_with, Integrand, PanelGrid, QuadOptions};
use crate::spectral::{KernelField, ModelParams, Provenance};
use crate::{par, Error, Result, Sign};

/// Default C₀ in the window |N| ≤ C₀|t|γ^{-1/2} + slack.
pub const WINDOW_C0: f64 = 3.0;
/// Default additive constant in the active-reflection bound.
pub const ACTIVE_CONSTANT: f64 = 8.0;
/// Below this value of u = ηλA^{3/2} the B-derivative expansion is refused.
pub const B_PRIME_MIN_U: f64 = 2.0;

const GL_ORDER: usize = 16;
const FIRST_AIRY_ZERO: f64 = 2.338_107_410_459_767;

/// Which rescaling the (T, X, Y) coordinates refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    /// Scale a: t = √a√(1+a)T, x = aX, y + t√(1+a) = a^{3/2}Y.
    Tangential,
    /// Scale γ: t = √γT, x = γX, y + t√(1+γ) = γ^{3/2}Y.
    Transverse,
}

/// One reflection term's phase: index N, model parameters and rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub n: i64,
    pub params: ModelParams,
    pub regime: Regime,
}

impl PhaseSpec {
    /// Requires λ ≥ 1 for the chosen scale.
    pub fn new(n: i64, params: ModelParams, regime: Regime) -> Result<Self> {
        params.validate()?;
        let s = Self { n, params, regime };
        if !(s.lambda() >= 1.0) {
            return Err(Error::Regime(format!("lambda = {} < 1: only the spectral path is valid", s.lambda())));
        }
        Ok(s)
    }

    /// Regime for (a, γ): tangential for a ≥ γ/4.
    pub fn natural(n: i64, params: ModelParams) -> Result<Self> {
        let regime = if params.a < params.gamma / 4.0 { Regime::Transverse } else { Regime::Tangential };
        Self::new(n, params, regime)
    }

    /// Length scale ℓ (γ or a).
    pub fn scale(&self) -> f64 {
        match self.regime {
            Regime::Tangential => self.params.a,
            Regime::Transverse => self.params.gamma,
        }
    }

    /// λ = ℓ^{3/2}/h.
    pub fn lambda(&self) -> f64 {
        let l = self.scale();
        l * sqrt(l) / self.params.h
    }

    /// t per unit T.
    pub fn time_scale(&self) -> f64 {
        let l = self.scale();
        match self.regime {
            Regime::Tangential => sqrt(l) * sqrt(1.0 + l),
            Regime::Transverse => sqrt(l),
        }
    }

    /// Factor in front of the T-term of the rescaled phase.
    fn t_factor(&self) -> f64 {
        match self.regime {
            Regime::Tangential => sqrt(1.0 + self.scale()),
            Regime::Transverse => 1.0,
        }
    }

    pub fn to_physical(&self, tt: f64, xx: f64, yy: f64) -> (f64, f64, f64) {
        let l = self.scale();
        let t = self.time_scale() * tt;
        (t, l * xx, l * sqrt(l) * yy - t * sqrt(1.0 + l))
    }

    pub fn from_physical(&self, t: f64, x: f64, y: f64) -> (f64, f64, f64) {
        let l = self.scale();
        (t / self.time_scale(), x / l, (y + t * sqrt(1.0 + l)) / (l * sqrt(l)))
    }
}

/// Φ_{N,a} and its partial derivatives in (σ, s, α, η).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFull {
    pub value: f64,
    pub d_sigma: f64,
    pub d_s: f64,
    pub d_alpha: f64,
    pub d_eta: f64,
}

/// Φ_{N,a} = y + σ³/3 + σ(x−α) + s³/3 + s(a−α) − NℏL(ℏ^{-2/3}α) + t√(1+α), ℏ = h/η.
#[allow(clippy::too_many_arguments)]
pub fn phase_full(n: i64, p: &ModelParams, t: f64, x: f64, y: f64, sigma: f64, s: f64, alpha: f64, eta: f64) -> Result<f64> {
    phase_full_grad(n, p, t, x, y, sigma, s, alpha, eta).map(|g| g.value)
}

#[allow(clippy::too_many_arguments)]
pub fn phase_full_grad(
    n: i64,
    p: &ModelParams,
    t: f64,
    x: f64,
    y: f64,
    sigma: f64,
    s: f64,
    alpha: f64,
    eta: f64,
) -> Result<PhaseFull> {
    if !(alpha > 0.0) {
        return Err(Error::Domain { name: "alpha", value: alpha, expected: "alpha > 0" });
    }
    if !(eta > 0.0) {
        return Err(Error::Domain { name: "eta", value: eta, expected: "eta > 0" });
    }
    let hbar = p.h / eta;
    let hb23 = pow2_3(hbar);
    let omega = alpha / hb23;
    let pl = crate::airy::phase_l_derivs(omega);
    let nf = n as f64;
    let root = sqrt(1.0 + alpha);
    let value = y + sigma * sigma * sigma / 3.0 + sigma * (x - alpha) + s * s * s / 3.0 + s * (p.a - alpha)
        - nf * hbar * pl.value
        + t * root;
    // ∂_η(ℏL(ℏ^{-2/3}α)) with dℏ/dη = −ℏ/η and dω/dη = (2/3)ω/η
    let d_hl = -hbar / eta * pl.value + hbar * pl.d1 * (2.0 / 3.0) * omega / eta;
    Ok(PhaseFull {
        value,
        d_sigma: sigma * sigma + x - alpha,
        d_s: s * s + p.a - alpha,
        d_alpha: -sigma - s - nf * hbar * pl.d1 / hb23 + t / (2.0 * root),
        d_eta: -nf * d_hl,
    })
}

/// Ψ and its partial derivatives in (Σ, S, A, η).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRescaled {
    pub value: f64,
    pub d_sigma: f64,
    pub d_s: f64,
    pub d_a: f64,
    pub d_eta: f64,
}

/// T-term coefficient (A−1)/(√(1+ℓA)+√(1+ℓ)) and its A-derivative 1/(2√(1+ℓA)).
fn t_term(l: f64, aa: f64) -> (f64, f64) {
    let r = sqrt(1.0 + l * aa);
    ((aa - 1.0) / (r + sqrt(1.0 + l)), 0.5 / r)
}

/// The rescaled phase Ψ_{N,a,ℓ}; `ℓ^{3/2}Ψ = ηΦ_{N,a}` at the rescaled point.
///
/// The remainder enters as (N/λ)B(ηλA^{3/2}) − Nπ/(2λ).
#[allow(clippy::too_many_arguments)]
pub fn phase_rescaled(spec: &PhaseSpec, tt: f64, xx: f64, yy: f64, sg: f64, ss: f64, aa: f64, eta: f64) -> Result<f64> {
    let l = spec.scale();
    let lam = spec.lambda();
    let nf = spec.n as f64;
    if !(aa > 0.0) {
        return Err(Error::Domain { name: "A", value: aa, expected: "A > 0" });
    }
    let (tc, _) = t_term(l, aa);
    let a3 = aa * sqrt(aa);
    let mut v = eta
        * (yy + sg * sg * sg / 3.0 + sg * (xx - aa) + ss * ss * ss / 3.0 + ss * (spec.params.a / l - aa)
            + tt * spec.t_factor() * tc
            - 4.0 / 3.0 * nf * a3);
    if spec.n != 0 {
        let u = eta * lam * a3;
        let b = b_remainder(u, 0).map_err(|_| {
            Error::Domain { name: "eta*lambda*A^(3/2)", value: u, expected: ">= 1 (shrink the gamma range)" }
        })?;
        v += nf / lam * (b - PI / 2.0);
    }
    Ok(v)
}

/// Ψ with analytic gradient; refuses u = ηλA^{3/2} < 2 when N ≠ 0.
#[allow(clippy::too_many_arguments)]
pub fn phase_rescaled_grad(
    spec: &PhaseSpec,
    tt: f64,
    xx: f64,
    yy: f64,
    sg: f64,
    ss: f64,
    aa: f64,
    eta: f64,
) -> Result<PhaseRescaled> {
    let l = spec.scale();
    let lam = spec.lambda();
    let nf = spec.n as f64;
    let value = phase_rescaled(spec, tt, xx, yy, sg, ss, aa, eta)?;
    let (tc, dtc) = t_term(l, aa);
    let sa = sqrt(aa);
    let a3 = aa * sa;
    let mut bp = 0.0;
    if spec.n != 0 {
        let u = eta * lam * a3;
        if u < B_PRIME_MIN_U {
            return Err(Error::Regime(format!("eta*lambda*A^(3/2) = {u:.4} < {B_PRIME_MIN_U}")));
        }
        bp = b_remainder(u, 1)?;
    }
    let tf = spec.t_factor();
    let bracket = yy + sg * sg * sg / 3.0 + sg * (xx - aa) + ss * ss * ss / 3.0 + ss * (spec.params.a / l - aa) + tt * tf * tc
        - 4.0 / 3.0 * nf * a3;
    Ok(PhaseRescaled {
        value,
        d_sigma: eta * (sg * sg + xx - aa),
        d_s: eta * (ss * ss + spec.params.a / l - aa),
        d_a: eta * (-sg - ss + tt * tf * dtc - 2.0 * nf * sa * (1.0 - 0.75 * bp)),
        d_eta: bracket + nf * a3 * bp,
    })
}

/// A point (T, Y, Σ, S) at which ∇Ψ vanishes for given X, A, η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub s: f64,
    pub a: f64,
    pub eta: f64,
}

/// Builds the stationary point from Σ² + X = A, S² + a/ℓ = A and the A, η equations.
pub fn stationary_point(spec: &PhaseSpec, xx: f64, aa: f64, eta: f64, sigma_sign: f64, s_sign: f64) -> Result<StationaryPoint> {
    let l = spec.scale();
    let a_over = spec.params.a / l;
    if aa < xx || aa < a_over {
        return Err(Error::Domain { name: "A", value: aa, expected: "A >= max(X, a/scale)" });
    }
    let sg = sigma_sign.signum() * sqrt(aa - xx);
    let ss = s_sign.signum() * sqrt(aa - a_over);
    let nf = spec.n as f64;
    let sa = sqrt(aa);
    let mut bp = 0.0;
    if spec.n != 0 {
        let u = eta * spec.lambda() * aa * sa;
        if u < B_PRIME_MIN_U {
            return Err(Error::Regime(format!("eta*lambda*A^(3/2) = {u:.4} < {B_PRIME_MIN_U}")));
        }
        bp = b_remainder(u, 1)?;
    }
    let (tc, dtc) = t_term(l, aa);
    let tf = spec.t_factor();
    let tt = (sg + ss + 2.0 * nf * sa * (1.0 - 0.75 * bp)) / (tf * dtc);
    let yy = 4.0 / 3.0 * nf * aa * sa * (1.0 - 0.75 * bp)
        - (tt * tf * tc + sg * sg * sg / 3.0 + sg * (xx - aa) + ss * ss * ss / 3.0 + ss * (a_over - aa));
    Ok(StationaryPoint { t: tt, x: xx, y: yy, sigma: sg, s: ss, a: aa, eta })
}

/// How [`critical_a`] obtained its root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation {
    ClosedForm,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub a_c: f64,
    pub derivation: Derivation,
    pub k: f64,
    pub w: f64,
    pub k_inf: f64,
}

/// K_∞(a) = K√(2(1+a)/(1+√(1+4K²a(1+a)))).
pub fn k_infinity(k: f64, a: f64) -> f64 {
    k * sqrt(2.0 * (1.0 + a) / (1.0 + sqrt(1.0 + 4.0 * k * k * a * (1.0 + a))))
}

/// Residual of A^{1/2} = K√((1+a)/(1+aA)) − w at A.
pub fn critical_residual(aa: f64, k: f64, w: f64, a: f64) -> f64 {
    sqrt(aa) - k * sqrt((1.0 + a) / (1.0 + a * aa)) + w
}

/// Solves A^{1/2} = K√((1+a)/(1+aA)) − w for the critical point A_c.
pub fn critical_a(k: f64, w: f64, a: f64) -> Result<CriticalPoint> {
    if !((k - 1.0).abs() <= 0.5) {
        return Err(Error::Domain { name: "K", value: k, expected: "|K - 1| <= 1/2" });
    }
    if !(w.abs() <= 3.0) {
        return Err(Error::Domain { name: "w", value: w, expected: "|w| <= 3" });
    }
    if !((0.0..=0.25).contains(&a)) {
        return Err(Error::Domain { name: "a", value: a, expected: "0 <= a <= 1/4" });
    }
    let k_inf = k_infinity(k, a);
    let closed = |z: f64, derivation| {
        if z > 0.0 {
            Ok(CriticalPoint { a_c: z * z, derivation, k, w, k_inf })
        } else {
            Err(Error::Domain { name: "A_c^(1/2)", value: z, expected: "> 0 (no critical point)" })
        }
    };
    if a == 0.0 {
        return closed(k - w, Derivation::ClosedForm);
    }
    if w == 0.0 {
        return closed(k_inf, Derivation::ClosedForm);
    }
    let c = k * sqrt(1.0 + a);
    let f = |z: f64| z + w - c / sqrt(1.0 + a * z * z);
    let df = |z: f64| {
        let q = 1.0 + a * z * z;
        1.0 + c * a * z / (q * sqrt(q))
    };
    // f is increasing for z ≥ 0; bracket [0, c] when f(0) < 0
    let (mut lo, mut hi) = (0.0, c + w.abs() + 1.0);
    if f(lo) >= 0.0 {
        return Err(Error::Domain { name: "A_c^(1/2)", value: -w, expected: "> 0 (no critical point)" });
    }
    let mut z = (k_inf - w).clamp(lo, hi);
    for _ in 0..50 {
        let fz = f(z);
        if fz < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let mut next = z - fz / df(z);
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        if fz == 0.0 || (next - z).abs() <= 4.0 * f64::EPSILON * (1.0 + z) || hi - lo <= 64.0 * f64::EPSILON * (1.0 + z) {
            return closed(next, Derivation::Newton);
        }
        z = next;
    }
    Err(Error::NonConvergence { partial: C64::new(z * z, 0.0), err_estimate: hi - lo, evaluations: 50 })
}

/// Leading-order cusp ±(√2/(3√3K))M₁^{3/2}; `None` when M₁ < 0.
pub fn cusp_locus(m1: f64, k: f64, a: f64) -> Result<Option<(f64, f64)>> {
    let _ = a;
    if m1 < 0.0 {
        return Ok(None);
    }
    if m1 > 0.1 {
        return Err(Error::Domain { name: "M1", value: m1, expected: "0 <= M1 <= 0.1" });
    }
    let m2 = sqrt(2.0) / (3.0 * sqrt(3.0) * k) * m1 * sqrt(m1);
    Ok(Some((m2, -m2)))
}

/// ∂²h̃_N/∂ξ₂² at a = 0, from ξ_{1,c} = zF₀(z), z = M₁/2 − ξ₂².
pub fn d2_htilde(xi2: f64, m1: f64, k: f64, n: i64) -> f64 {
    let q = 1.0 - 1.0 / ((n * n) as f64);
    let z = m1 / 2.0 - xi2 * xi2;
    let r = sqrt(k * k + z * q);
    let f = 1.0 / (k + r);
    let df = -q / (2.0 * r) * f * f;
    let ft = f + z * df;
    -4.0 * (z * f - 2.0 * xi2 * xi2 * ft)
}

/// Positive root of [`d2_htilde`] in ξ₂, located by scan and bisection.
pub fn degenerate_xi2(m1: f64, k: f64, n: i64) -> Option<f64> {
    if m1 <= 0.0 {
        return None;
    }
    let hi = sqrt(m1);
    let steps = 400;
    let mut prev = d2_htilde(0.0, m1, k, n);
    for i in 1..=steps {
        let x = hi * i as f64 / steps as f64;
        let v = d2_htilde(x, m1, k, n);
        if v * prev <= 0.0 {
            let (mut a, mut b) = (hi * (i - 1) as f64 / steps as f64, x);
            let mut fa = prev;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = d2_htilde(m, m1, k, n);
                if fm * fa <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = v;
    }
    None
}

/// {N : |N| ≤ C₀|t|γ^{-1/2} + slack} with C₀ = 3.
pub fn n_window(t: f64, gamma: f64, slack: u32) -> RangeInclusive<i64> {
    n_window_with(t, gamma, slack, WINDOW_C0)
}

pub fn n_window_with(t: f64, gamma: f64, slack: u32, c0: f64) -> RangeInclusive<i64> {
    let m = floor(c0 * t.abs() / sqrt(gamma)) as i64 + slack as i64;
    -m..=m
}

/// O(1) + |t|γ^{-1/2}(γ³/h²)^{-1} with the O(1) constant 8.
pub fn n_active_bound(t: f64, gamma: f64, h: f64) -> f64 {
    n_active_bound_with(t, gamma, h, ACTIVE_CONSTANT)
}

pub fn n_active_bound_with(t: f64, gamma: f64, h: f64, constant: f64) -> f64 {
    constant + t.abs() * h * h / (gamma * gamma * gamma * sqrt(gamma))
}

/// Swallowtail time 4N√a√(1+a).
pub fn caustic_times(a: f64, n: i64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain { name: "a", value: a, expected: "a > 0" });
    }
    if (n.unsigned_abs() as f64) > 1.0 / sqrt(a) {
        return Err(Error::Domain { name: "N", value: n as f64, expected: "|N| <= 1/sqrt(a)" });
    }
    Ok(4.0 * n as f64 * sqrt(a) * sqrt(1.0 + a))
}

/// χ₂(S): 1 on |S| ≤ 3, 0 from |S| ≥ 6.
pub fn chi2(s: f64) -> f64 {
    1.0 - smoothstep((s.abs() - 3.0) / 3.0)
}

/// Range of the rescaled A carrying the amplitude.
fn a_bounds(spec: &PhaseSpec) -> (f64, f64) {
    let (lo, hi) = spec.params.alpha_support();
    let l = spec.scale();
    (lo / l, hi / l)
}

struct TermAmplitude<'a> {
    spec: &'a PhaseSpec,
    lam: f64,
    l: f64,
}

impl TermAmplitude<'_> {
    /// Real factors shared by both quadratures, with ω = (ηλ)^{2/3}A.
    fn common(&self, aa: f64, eta: f64) -> Option<(f64, f64)> {
        let p = &self.spec.params;
        let alpha = self.l * aa;
        let omega = pow2_3(eta * self.lam) * aa;
        let w = psi(eta) * crate::cutoff::chi1(omega) * p.band(alpha);
        if w == 0.0 {
            return None;
        }
        let c1 = if p.cutoffs.psi1 { psi(eta * sqrt(1.0 + alpha)) } else { 1.0 };
        if c1 == 0.0 {
            return None;
        }
        Some((w * c1 * eta * eta, omega))
    }

    fn phase(&self, tt: f64, yy: f64, aa: f64, eta: f64, omega: f64) -> f64 {
        let (tc, _) = t_term(self.l, aa);
        eta * self.lam * (yy + tt * self.spec.t_factor() * tc) - self.spec.n as f64 * phase_l(omega)
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions { max_evaluations: 100_000_000, max_panels: 4096 }
}

/// W_N at rescaled (T, X, Y), in the units in which Σ_N W_N = G⁺_{h,γ}.
///
/// Both Airy integrals (in Σ and S) are collapsed; the remaining (A, η)
/// integral is done adaptively.
pub fn wave_term(spec: &PhaseSpec, tt: f64, xx: f64, yy: f64, tol: f64) -> Result<C64> {
    let amp = TermAmplitude { spec, lam: spec.lambda(), l: spec.scale() };
    let h = spec.params.h;
    let l = amp.l;
    let a_ratio = spec.params.a / l;
    let pref = l * l / (h * h * h);
    let f = |v: &[f64]| -> C64 {
        let (aa, eta) = (v[0], v[1]);
        match amp.common(aa, eta) {
            None => C64::new(0.0, 0.0),
            Some((w, omega)) => {
                let m = eta * amp.lam;
                let m23 = pow2_3(m);
                let airy2 = ai(m23 * (xx - aa)) * ai(m23 * (a_ratio - aa)) / m23;
                cis(amp.phase(tt, yy, aa, eta, omega)) * (pref * w * airy2)
            }
        }
    };
    let zero_phase = |_: &[f64]| 0.0;
    let (a_lo, a_hi) = a_bounds(spec);
    let ig = Integrand { amplitude: &f, phase: &zero_phase, lambda: 1.0, bounds: vec![(a_lo, a_hi), PSI_SUPPORT] };
    integrate_with(&ig, tol, &quad_opts()).map(|r| r.value)
}

/// ∫χ₂(S)e^{iμ(S³/3 + cS)}dS on a phase-resolving Gauss–Legendre grid.
pub fn s_integral(mu: f64, c: f64) -> f64 {
    let (x, w) = gauss_legendre(GL_ORDER);
    let span = mu * (72.0 + 6.0 * c.abs());
    let panels = (ceil(span / 2.0) as usize).max(16);
    let width = 6.0 / panels as f64;
    let mut acc = Vec::with_capacity(panels);
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let mut sum = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let s = mid + 0.5 * width * xi;
            sum += wi * chi2(s) * cos(mu * (s * s * s / 3.0 + c * s));
        }
        acc.push(sum * 0.5 * width);
    }
    // even integrand in S after taking the real part
    2.0 * crate::math::pairwise_sum_real(&acc)
}

/// W_N with the S-integral kept explicit under χ₂(S); only Σ is collapsed.
///
/// Agrees with [`wave_term`] up to the χ₂ truncation, which is below 1e-7
/// relative once ηλ ≥ 5.
pub fn wave_term_direct(spec: &PhaseSpec, tt: f64, xx: f64, yy: f64, tol: f64) -> Result<C64> {
    let amp = TermAmplitude { spec, lam: spec.lambda(), l: spec.scale() };
    let h = spec.params.h;
    let l = amp.l;
    let a_ratio = spec.params.a / l;
    let pref = l * l / (h * h * h) / (2.0 * PI);
    let f = |v: &[f64]| -> C64 {
        let (aa, eta) = (v[0], v[1]);
        match amp.common(aa, eta) {
            None => C64::new(0.0, 0.0),
            Some((w, omega)) => {
                let m = eta * amp.lam;
                let m13 = cbrt(m);
                let sv = s_integral(m, a_ratio - aa);
                cis(amp.phase(tt, yy, aa, eta, omega)) * (pref * w * sv * ai(m13 * m13 * (xx - aa)) / m13)
            }
        }
    };
    let zero_phase = |_: &[f64]| 0.0;
    let (a_lo, a_hi) = a_bounds(spec);
    let ig = Integrand { amplitude: &f, phase: &zero_phase, lambda: 1.0, bounds: vec![(a_lo, a_hi), PSI_SUPPORT] };
    integrate_with(&ig, tol, &quad_opts()).map(|r| r.value)
}

/// How many reflections the batched evaluator keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NWindow {
    /// |N| ≤ n.
    Fixed(u32),
    /// |N| ≤ C₀ t_max γ^{-1/2} + slack.
    Lemma { c0: f64, slack: u32 },
    /// Smallest n after which 16 consecutive terms stay below `tail_tol` times the term L¹ scale.
    Adaptive { tail_tol: f64, cap: u32 },
}

impl Default for NWindow {
    fn default() -> Self {
        NWindow::Adaptive { tail_tol: 1e-13, cap: 600 }
    }
}

/// Batched evaluator of Σ_N W_N on tensor grids, in physical coordinates.
#[derive(Debug, Clone)]
pub struct ParametrixModel {
    params: ModelParams,
    window: NWindow,
    /// Multiplier on the ω and η panel counts (refinement studies).
    pub refine: usize,
}

struct Grids {
    omega: PanelGrid,
    eta: PanelGrid,
    l: Vec<f64>,
}

impl ParametrixModel {
    pub fn new(params: ModelParams, window: NWindow) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, window, refine: 1 })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn omega_range(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.params.omega_support();
        // no eigenvalue below the band edge: every Poisson sample vanishes
        if hi <= FIRST_AIRY_ZERO {
            None
        } else {
            Some((lo.max(1.0), hi))
        }
    }

    fn grids(&self, n_max: u32, t_max: f64, y_max: f64) -> Option<Grids> {
        let (lo, hi) = self.omega_range()?;
        let h = self.params.h;
        let theta_max = PSI_SUPPORT.1 / h;
        let lp = crate::airy::phase_l_derivs(hi).d1.max(2.0 * sqrt(hi));
        let rate = n_max as f64 * lp + t_max * cbrt(theta_max) + 2.0 * sqrt(hi);
        let panels = (ceil(rate * (hi - lo) / 2.5) as usize).max(64) * self.refine.max(1);
        let omega = PanelGrid::new(lo, hi, panels, GL_ORDER);
        let e_rate = (t_max * 1.5 + y_max) / h;
        let e_panels = ((e_rate * (PSI_SUPPORT.1 - PSI_SUPPORT.0) / 2.0) as usize).max(48) * self.refine.max(1);
        let eta = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, e_panels, GL_ORDER);
        let l = omega.nodes.iter().map(|&w| phase_l(w)).collect();
        Some(Grids { omega, eta, l })
    }

    /// Real amplitude at (η, ω) without the x-dependent Airy factor and time phase.
    #[inline]
    fn base(&self, eta: f64, omega: f64) -> Option<(f64, f64)> {
        let p = &self.params;
        let theta = eta / p.h;
        let t23 = pow2_3(theta);
        let alpha = omega / t23;
        let band = p.band(alpha);
        if band == 0.0 {
            return None;
        }
        let c1 = if p.cutoffs.psi1 { psi(eta * sqrt(1.0 + alpha)) } else { 1.0 };
        let w = band * c1 * crate::cutoff::chi1(omega);
        if w == 0.0 {
            return None;
        }
        Some((w * t23 * ai(t23 * p.a - omega), alpha))
    }

    /// Per-node products for one (t, x): entries (j, i, value) with the ω weight folded in.
    fn cells(&self, g: &Grids, sign: Sign, t: f64, x: f64) -> Vec<Vec<(usize, C64)>> {
        let h = self.params.h;
        g.eta
            .nodes
            .iter()
            .map(|&eta| {
                if psi(eta) == 0.0 {
                    return Vec::new();
                }
                let theta = eta / h;
                let t23 = pow2_3(theta);
                g.omega
                    .nodes
                    .iter()
                    .zip(&g.omega.weights)
                    .enumerate()
                    .filter_map(|(i, (&w, &wt))| {
                        let (b, alpha) = self.base(eta, w)?;
                        let v = b * wt * ai(t23 * x - w);
                        Some((i, cis(sign.factor() * t * theta * sqrt(1.0 + alpha)) * v))
                    })
                    .collect()
            })
            .collect()
    }

    fn window_max(&self, ts: &[f64], xs: &[f64]) -> u32 {
        let t_max = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        match self.window {
            NWindow::Fixed(n) => n,
            NWindow::Lemma { c0, slack } => *n_window_with(t_max, self.params.gamma, slack, c0).end() as u32,
            NWindow::Adaptive { tail_tol, cap } => self.probe_window(t_max, xs, tail_tol, cap),
        }
    }

    /// Scans |∫e^{−iNL(ω)}f(ω)dω| on a few (t, x, η) probes.
    fn probe_window(&self, t_max: f64, xs: &[f64], tail_tol: f64, cap: u32) -> u32 {
        let Some(g) = self.grids(cap, t_max, 0.0) else { return 0 };
        let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        let x_hi = xs.iter().copied().fold(0.0f64, f64::max);
        let probes_x = [x_lo, 0.5 * (x_lo + x_hi), x_hi];
        let h = self.params.h;
        let mut mags = vec![0.0f64; cap as usize + 1];
        let mut scale = 0.0f64;
        for &t in &[0.0, t_max] {
            for &x in &probes_x {
                for &eta in &[0.8, 1.0, 1.2] {
                    let theta = eta / h;
                    let t23 = pow2_3(theta);
                    let mut f = Vec::with_capacity(g.omega.len());
                    for (i, (&w, &wt)) in g.omega.nodes.iter().zip(&g.omega.weights).enumerate() {
                        if let Some((b, alpha)) = self.base(eta, w) {
                            let v = b * wt * ai(t23 * x - w);
                            f.push((i, cis(t * theta * sqrt(1.0 + alpha)) * v));
                        }
                    }
                    scale = scale.max(f.iter().map(|(_, v)| v.norm()).sum());
                    for (n, m) in mags.iter_mut().enumerate() {
                        let s: C64 = f.iter().map(|&(i, v)| v * cis(-(n as f64) * g.l[i])).sum();
                        *m = m.max(s.norm());
                    }
                }
            }
        }
        if scale == 0.0 {
            return 0;
        }
        let run = 16usize;
        let mut quiet = 0usize;
        for (n, &m) in mags.iter().enumerate() {
            if m <= tail_tol * scale {
                quiet += 1;
                if quiet == run {
                    return (n + 1 - run) as u32;
                }
            } else {
                quiet = 0;
            }
        }
        cap
    }

    /// Largest |N| that would be used on this grid.
    pub fn n_max_for(&self, ts: &[f64], xs: &[f64]) -> u32 {
        self.window_max(ts, xs)
    }

    /// Σ_{|N| ≤ n_max} W_N on a tensor grid.
    pub fn field(&self, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64]) -> Result<KernelField> {
        let n_max = self.window_max(ts, xs);
        self.field_with_window(sign, ts, xs, ys, n_max)
    }

    pub fn field_with_window(&self, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64], n_max: u32) -> Result<KernelField> {
        if let Some(&x) = xs.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
        }
        let empty = KernelField {
            ts: ts.to_vec(),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            values: vec![C64::new(0.0, 0.0); ts.len() * xs.len() * ys.len()],
            provenance: Provenance::Parametrix,
            params: self.params,
        };
        let t_max = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let y_max = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let Some(g) = self.grids(n_max, t_max, y_max) else { return Ok(empty) };
        // Σ_{|N|≤M} e^{−iNL} = 1 + 2Σ_{N=1}^{M} cos(NL), real
        let dirichlet: Vec<f64> = g
            .l
            .iter()
            .map(|&l| 1.0 + 2.0 * (1..=n_max).map(|n| cos(n as f64 * l)).sum::<f64>())
            .collect();
        let values = self.assemble(&g, sign, ts, xs, ys, |cells| {
            cells.iter().map(|row| row.iter().map(|&(i, v)| v * dirichlet[i]).sum::<C64>()).collect()
        });
        let values: Vec<C64> = values.into_iter().flatten().collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NotFinite("parametrix field"));
        }
        Ok(KernelField { values, ..empty })
    }

    /// Per-(t, x) η-profiles reduced by `reduce`, then summed in η against e^{iyη/h}.
    fn assemble<F>(&self, g: &Grids, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64], reduce: F) -> Vec<Vec<C64>>
    where
        F: Fn(&[Vec<(usize, C64)>]) -> Vec<C64> + Sync + Send,
    {
        let h = self.params.h;
        let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        par::map(&pairs, |&(t, x)| {
            let cells = self.cells(g, sign, t, x);
            let prof = reduce(&cells);
            ys.iter()
                .map(|&y| {
                    let v: Vec<C64> = prof
                        .iter()
                        .zip(g.eta.nodes.iter().zip(&g.eta.weights))
                        .map(|(s, (&eta, &w))| s * (w * psi(eta) / h) * cis(y * eta / h))
                        .collect();
                    pairwise_sum(&v)
                })
                .collect()
        })
    }

    /// Individual terms W_N for each N in `ns`, on a tensor grid; one field per N.
    pub fn terms(&self, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64], ns: &[i64]) -> Result<Vec<KernelField>> {
        let t_max = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let y_max = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let n_top = ns.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0) as u32;
        let per = ts.len() * xs.len() * ys.len();
        let mut out: Vec<KernelField> = ns
            .iter()
            .map(|_| KernelField {
                ts: ts.to_vec(),
                xs: xs.to_vec(),
                ys: ys.to_vec(),
                values: vec![C64::new(0.0, 0.0); per],
                provenance: Provenance::Parametrix,
                params: self.params,
            })
            .collect();
        let Some(g) = self.grids(n_top, t_max, y_max) else { return Ok(out) };
        let phases: Vec<Vec<C64>> = ns.iter().map(|&n| g.l.iter().map(|&l| cis(-(n as f64) * l)).collect()).collect();
        let h = self.params.h;
        let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        let per_pair = par::map(&pairs, |&(t, x)| {
            let cells = self.cells(&g, sign, t, x);
            phases
                .iter()
                .map(|ph| {
                    let prof: Vec<C64> =
                        cells.iter().map(|row| row.iter().map(|&(i, v)| v * ph[i]).sum::<C64>()).collect();
                    ys.iter()
                        .map(|&y| {
                            let v: Vec<C64> = prof
                                .iter()
                                .zip(g.eta.nodes.iter().zip(&g.eta.weights))
                                .map(|(s, (&eta, &w))| s * (w * psi(eta) / h) * cis(y * eta / h))
                                .collect();
                            pairwise_sum(&v)
                        })
                        .collect::<Vec<C64>>()
                })
                .collect::<Vec<Vec<C64>>>()
        });
        for (pi, per_n) in per_pair.into_iter().enumerate() {
            for (ni, ys_vals) in per_n.into_iter().enumerate() {
                let start = pi * ys.len();
                out[ni].values[start..start + ys.len()].copy_from_slice(&ys_vals);
            }
        }
        Ok(out)
    }
}

/// G±_{h,γ}(t, x, y) as the reflection sum, with the adaptive window.
pub fn green_parametrix(p: &ModelParams, sign: Sign, t: f64, x: f64, y: f64) -> Result<C64> {
    let m = ParametrixModel::new(*p, NWindow::default())?;
    Ok(m.field(sign, &[t], &[x], &[y])?.values[0])
}
