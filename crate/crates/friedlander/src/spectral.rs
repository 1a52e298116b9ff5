//! Gallery eigenmodes `e_k(x, θ)` and the spectrally localised Green function
//! `G±_{h,γ}` written as a sum over modes of an η-integral.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use crate::airy::{ai, airy_zero, AiryTable};
use crate::cutoff::{phi, psi, psi2, CutoffSpec, PSI2_SUPPORT, PSI_SUPPORT};
use crate::math::{cbrt, cis, pow2_3, sqrt, C64, PI};
use crate::quad::{integrate_fn, PanelGrid};
use crate::{par, Error, Result, Sign};

const ETA_TOL: f64 = 1e-11;
const GUARD_MODES: usize = 2;
const GL_ORDER: usize = 16;

/// One frequency-localised propagator: scale h, band γ, source distance a.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub h: f64,
    pub gamma: f64,
    pub a: f64,
    pub cutoffs: CutoffSpec,
}

impl ModelParams {
    /// Checks 0 < h ≤ 1, 0 < γ ≤ 1/4 and 0 < a ≤ 2γ.
    pub fn new(h: f64, gamma: f64, a: f64) -> Result<Self> {
        let p = Self { h, gamma, a, cutoffs: CutoffSpec::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cutoffs(mut self, cutoffs: CutoffSpec) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::Params(format!("h = {} must lie in (0, 1]", self.h)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.25) {
            return Err(Error::Params(format!("gamma = {} must lie in (0, 1/4]", self.gamma)));
        }
        if !(self.a > 0.0 && self.a <= 2.0 * self.gamma) {
            return Err(Error::Params(format!("a = {} must lie in (0, 2 gamma] = (0, {}]", self.a, 2.0 * self.gamma)));
        }
        Ok(())
    }

    /// λ_γ = γ^{3/2}/h.
    pub fn lambda_gamma(&self) -> f64 {
        self.gamma * sqrt(self.gamma) / self.h
    }

    /// Range of α = ℏ^{2/3}ω on which the band cutoff can be non-zero.
    pub fn alpha_support(&self) -> (f64, f64) {
        let hi = PSI2_SUPPORT.1 * self.gamma;
        if self.cutoffs.psi2 {
            (PSI2_SUPPORT.0 * self.gamma, hi)
        } else {
            (0.0, hi)
        }
    }

    /// Range of ω on which the integrands can be non-zero, over η ∈ supp ψ.
    pub fn omega_support(&self) -> (f64, f64) {
        let (lo, hi) = self.alpha_support();
        (lo * pow2_3(PSI_SUPPORT.0 / self.h), hi * pow2_3(PSI_SUPPORT.1 / self.h))
    }

    /// True when no mode, and no ω ≥ 1, meets the band (the kernel is identically 0).
    pub fn support_empty(&self) -> bool {
        self.omega_support().1 <= 1.0
    }

    /// Band cutoff at α: ψ₂(α/γ), or φ(α/γ) when ψ₂ is switched off.
    #[inline]
    pub fn band(&self, alpha: f64) -> f64 {
        if self.cutoffs.psi2 {
            psi2(alpha / self.gamma)
        } else {
            phi(alpha / self.gamma)
        }
    }
}

/// λ_k(θ) = θ² + ω_k|θ|^{4/3}.
pub fn eigenvalue(k: usize, theta: f64) -> Result<f64> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::Domain { name: "theta", value: theta, expected: "finite and non-zero" });
    }
    let w = airy_zero(k)?;
    let t = theta.abs();
    Ok(t * t + w * t * cbrt(t))
}

/// e_k(x, θ) = √(2π)|θ|^{1/3} Ai(|θ|^{2/3}x − ω_k)/√L'(ω_k).
pub fn eigenmode(k: usize, theta: f64, x: f64) -> Result<f64> {
    Eigenmode::new(k, theta)?.eval(x)
}

/// An eigenmode with its zero and normalisation resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenmode {
    pub k: usize,
    pub theta: f64,
    pub omega: f64,
    pub l_prime: f64,
    scale: f64,
    t23: f64,
}

impl Eigenmode {
    pub fn new(k: usize, theta: f64) -> Result<Self> {
        if theta == 0.0 || !theta.is_finite() {
            return Err(Error::Domain { name: "theta", value: theta, expected: "finite and non-zero" });
        }
        let omega = airy_zero(k)?;
        let (_, aip) = crate::airy::ai_deriv(-omega);
        Ok(Self::from_zero(k, theta, omega, 2.0 * PI * aip * aip))
    }

    pub fn from_zero(k: usize, theta: f64, omega: f64, l_prime: f64) -> Self {
        let t13 = cbrt(theta.abs());
        Self { k, theta, omega, l_prime, scale: sqrt(2.0 * PI) * t13 / sqrt(l_prime), t23: t13 * t13 }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
        }
        Ok(self.scale * ai(self.t23 * x - self.omega))
    }

    /// Right end of the classically allowed region, ω_k/θ^{2/3}.
    pub fn turning_point(&self) -> f64 {
        self.omega / self.t23
    }
}

/// Where a kernel sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Provenance {
    Spectral,
    Parametrix,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Spectral => "spectral",
            Provenance::Parametrix => "parametrix",
        }
    }
}

/// Kernel samples on a (t, x, y) tensor grid, stored t-major then x then y.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<C64>,
    pub provenance: Provenance,
    pub params: ModelParams,
}

impl KernelField {
    #[inline]
    pub fn at(&self, it: usize, ix: usize, iy: usize) -> C64 {
        self.values[(it * self.xs.len() + ix) * self.ys.len() + iy]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// sup over (x, y) at each t.
    pub fn sup_per_t(&self) -> Vec<f64> {
        let block = self.xs.len() * self.ys.len();
        self.values.chunks(block.max(1)).map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max)).collect()
    }

    /// sup|G|·h²/√γ.
    pub fn normalized_sup(&self) -> f64 {
        self.sup_abs() * self.params.h * self.params.h / sqrt(self.params.gamma)
    }
}

/// Default sampling grid: t ∈ [0, 1], x ∈ [0, 2γ], y over the region swept by the wave.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl GridSpec {
    pub fn default_for(p: &ModelParams, nt: usize, nx: usize, ny: usize, t_max: f64) -> Self {
        let w = 8.0 * p.gamma * sqrt(p.gamma);
        Self {
            ts: linspace(0.0, t_max, nt),
            xs: linspace(0.0, 2.0 * p.gamma, nx),
            ys: linspace(-t_max * (1.0 + p.gamma) - w, w, ny),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Mode {
    omega: f64,
    l_prime: f64,
}

/// Gallery-mode evaluator of G±_{h,γ} for one parameter set.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    params: ModelParams,
    modes: Vec<Mode>,
}

impl SpectralModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Self::build(params)
    }

    /// No a ≤ 2γ check; used when summing over γ with a fixed source.
    fn build(params: ModelParams) -> Result<Self> {
        let (_, w_hi) = params.omega_support();
        let mut modes = Vec::new();
        if w_hi > 1.0 {
            let mut k = 1;
            let mut beyond = 0;
            while beyond < GUARD_MODES {
                let omega = airy_zero(k)?;
                if omega > w_hi {
                    beyond += 1;
                }
                modes.push(omega);
                k += 1;
            }
        }
        let k_max = modes.len();
        let table = if k_max > 0 { Some(AiryTable::new(k_max)?) } else { None };
        let modes = match table {
            Some(t) => t.zeros().iter().zip(t.l_prime()).map(|(&omega, &l_prime)| Mode { omega, l_prime }).collect(),
            None => Vec::new(),
        };
        Ok(Self { params, modes })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of modes carried, including the guard modes.
    pub fn k_max(&self) -> usize {
        self.modes.len()
    }

    /// Σ_k of the η-integrand without the e^{iyη/h} factor.
    fn mode_sum(&self, sign: Sign, t: f64, x: f64, eta: f64) -> C64 {
        let p = &self.params;
        let amp_eta = psi(eta);
        if amp_eta == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let theta = eta / p.h;
        let t13 = cbrt(theta);
        let t23 = t13 * t13;
        let hbar23 = 1.0 / t23;
        let mut acc = C64::new(0.0, 0.0);
        for m in &self.modes {
            let alpha = hbar23 * m.omega;
            let band = p.band(alpha);
            if band == 0.0 {
                continue;
            }
            let root = sqrt(1.0 + alpha);
            let cut1 = if p.cutoffs.psi1 { psi(eta * root) } else { 1.0 };
            if cut1 == 0.0 {
                continue;
            }
            let norm = 2.0 * PI * t23 / m.l_prime;
            let ek = ai(t23 * x - m.omega) * ai(t23 * p.a - m.omega) * norm;
            acc += cis(sign.factor() * t * theta * root) * (band * cut1 * ek);
        }
        acc * (amp_eta / p.h)
    }

    /// G±_{h,γ}(t, x, y) by adaptive quadrature in η.
    pub fn green(&self, sign: Sign, t: f64, x: f64, y: f64) -> Result<C64> {
        if !(x >= 0.0) {
            return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
        }
        if self.modes.is_empty() {
            return Ok(C64::new(0.0, 0.0));
        }
        let (lo, hi) = PSI_SUPPORT;
        let rate = (t.abs() * 1.5 + y.abs()) / self.params.h;
        let panels = 8 + (rate * (hi - lo) / PI) as usize;
        let h = self.params.h;
        let r = integrate_fn(|eta| self.mode_sum(sign, t, x, eta) * cis(y * eta / h), lo, hi, panels, ETA_TOL)?;
        Ok(r.value)
    }

    fn eta_grid(&self, t_abs_max: f64, y_abs_max: f64) -> PanelGrid {
        let (lo, hi) = PSI_SUPPORT;
        let rate = (t_abs_max * 1.5 + y_abs_max) / self.params.h;
        let panels = ((rate * (hi - lo) / 2.0) as usize).max(48);
        PanelGrid::new(lo, hi, panels, GL_ORDER)
    }

    /// Kernel on a tensor grid with a fixed composite Gauss–Legendre rule in η.
    pub fn field(&self, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64]) -> Result<KernelField> {
        self.field_refined(sign, ts, xs, ys, 1)
    }

    /// As [`field`](Self::field) with the η rule refined `factor` times.
    pub fn field_refined(&self, sign: Sign, ts: &[f64], xs: &[f64], ys: &[f64], factor: usize) -> Result<KernelField> {
        if let Some(&x) = xs.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
        }
        let tmax = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let ymax = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let base = self.eta_grid(tmax, ymax);
        let grid = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, factor.max(1) * base.len() / GL_ORDER, GL_ORDER);
        let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        let h = self.params.h;
        let blocks = par::map(&pairs, |&(t, x)| {
            let s: Vec<C64> =
                grid.nodes.iter().zip(&grid.weights).map(|(&eta, &w)| self.mode_sum(sign, t, x, eta) * w).collect();
            ys.iter()
                .map(|&y| {
                    let v: Vec<C64> = s.iter().zip(&grid.nodes).map(|(sv, &eta)| sv * cis(y * eta / h)).collect();
                    crate::math::pairwise_sum(&v)
                })
                .collect::<Vec<C64>>()
        });
        let values: Vec<C64> = blocks.into_iter().flatten().collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NotFinite("spectral field"));
        }
        Ok(KernelField {
            ts: ts.to_vec(),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            values,
            provenance: Provenance::Spectral,
            params: self.params,
        })
    }
}

/// G±_{h,γ}(t, x, y) for one parameter set.
pub fn green_spectral(p: &ModelParams, sign: Sign, t: f64, x: f64, y: f64) -> Result<C64> {
    SpectralModel::new(*p)?.green(sign, t, x, y)
}

/// Dyadic bands γ = 2^{-j}/4 with γ ≥ h^{2/3}.
pub fn dyadic_gammas(h: f64) -> Vec<f64> {
    let floor = pow2_3(h);
    let mut out = Vec::new();
    let mut g = 0.25;
    while g >= floor {
        out.push(g);
        g *= 0.5;
    }
    out
}

/// G±_h = Σ_γ G±_{h,γ} over the dyadic bands of [`dyadic_gammas`].
pub fn green_full(h: f64, sign: Sign, t: f64, x: f64, y: f64, a: f64) -> Result<C64> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Params(format!("h = {h} must lie in (0, 1]")));
    }
    if !(a > 0.0) {
        return Err(Error::Params(format!("a = {a} must be positive")));
    }
    let mut acc = C64::new(0.0, 0.0);
    for gamma in dyadic_gammas(h) {
        let p = ModelParams { h, gamma, a, cutoffs: CutoffSpec::default() };
        acc += SpectralModel::build(p)?.green(sign, t, x, y)?;
    }
    Ok(acc)
}

/// The same kernel with ψ₂ replaced by φ(α/(1/4)): what [`green_full`] sums to.
pub fn green_unlocalized(h: f64, sign: Sign, t: f64, x: f64, y: f64, a: f64) -> Result<C64> {
    let p = ModelParams { h, gamma: 0.25, a, cutoffs: CutoffSpec { psi1: true, psi2: false } };
    SpectralModel::build(p)?.green(sign, t, x, y)
}

/// Human-readable summary of the bands in use.
pub fn describe(p: &ModelParams) -> String {
    let (lo, hi) = p.omega_support();
    format!("h = {}, gamma = {}, a = {}, lambda_gamma = {:.4}, omega in [{lo:.4}, {hi:.4}]", p.h, p.gamma, p.a, p.lambda_gamma())
}
