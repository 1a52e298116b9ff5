//! Whispering-gallery solutions `u_k`, their reduced waves `w_k`, the x-fibred
//! convolution kernels `Γ_{x,ω_k}` and the L⁴_t L^∞ ratio of a single mode.

use alloc::vec::Vec;

use crate::airy::{ai, airy, airy_zero, MAX_ZERO_INDEX};
use crate::cutoff::{psi, smoothstep, PSI_SUPPORT};
use crate::math::{cbrt, ceil, cis, exp, ln, pairwise_sum, pairwise_sum_real, powf, sqrt, C64, PI};
use crate::quad::{integrate_fn, integrate_real, PanelGrid};
use crate::spectral::linspace;
use crate::{par, Error, Result, Sign};

const GL_ORDER: usize = 16;
const ETA_TOL: f64 = 1e-11;

/// Wide cutoff: 1 on supp ψ, vanishing outside [1/2, 3/2].
pub fn psi_wide(eta: f64) -> f64 {
    smoothstep(4.0 * (eta - 0.5)) * (1.0 - smoothstep(4.0 * (eta - 1.25)))
}

/// ∫ψ² and ∫|ψ| over its support.
pub fn psi_norms() -> (f64, f64) {
    let (lo, hi) = PSI_SUPPORT;
    let l2 = integrate_real(|e| psi(e) * psi(e), lo, hi, 8, 1e-13).map(|r| r.0).unwrap_or(f64::NAN);
    let l1 = integrate_real(psi, lo, hi, 8, 1e-13).map(|r| r.0).unwrap_or(f64::NAN);
    (l2, l1)
}

/// One gallery mode at semiclassical scale h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalleryMode {
    pub k: usize,
    pub h: f64,
    pub omega: f64,
    pub l_prime: f64,
}

impl GalleryMode {
    pub fn new(k: usize, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::Domain { name: "h", value: h, expected: "0 < h <= 1" });
        }
        if k == 0 || k > MAX_ZERO_INDEX {
            return Err(Error::Range { index: k, max: MAX_ZERO_INDEX });
        }
        let omega = airy_zero(k)?;
        let aip = airy(-omega).aip;
        Ok(Self { k, h, omega, l_prime: 2.0 * PI * aip * aip })
    }

    /// e_k(x, θ) = √(2π)θ^{1/3}Ai(θ^{2/3}x − ω_k)/√L'(ω_k).
    #[inline]
    pub fn e(&self, x: f64, theta: f64) -> f64 {
        let t13 = cbrt(theta);
        sqrt(2.0 * PI / self.l_prime) * t13 * ai(t13 * t13 * x - self.omega)
    }

    /// √λ_k(θ) = θ√(1 + ω_kθ^{-2/3}).
    #[inline]
    pub fn sqrt_lambda(&self, theta: f64) -> f64 {
        let t13 = cbrt(theta);
        theta * sqrt(1.0 + self.omega / (t13 * t13))
    }

    /// h^{2/3}ω_k: the turning point at η = 1.
    pub fn turning_scale(&self) -> f64 {
        let h13 = cbrt(self.h);
        h13 * h13 * self.omega
    }

    /// Range of ∂_η√λ_k(η/h)·h over supp ψ.
    fn group_velocities(&self) -> (f64, f64) {
        let h = self.h;
        let v = |eta: f64| {
            let d = 1e-6;
            (self.sqrt_lambda((eta + d) / h) - self.sqrt_lambda((eta - d) / h)) * h / (2.0 * d)
        };
        let vs: Vec<f64> = linspace(PSI_SUPPORT.0, PSI_SUPPORT.1, 33).into_iter().map(v).collect();
        (vs.iter().copied().fold(f64::INFINITY, f64::min), vs.iter().copied().fold(0.0, f64::max))
    }
}

fn eta_panels(t: f64, y: f64, h: f64) -> usize {
    8 + ((2.0 * t.abs() + y.abs()) / h * (PSI_SUPPORT.1 - PSI_SUPPORT.0) / PI) as usize
}

/// u_{k,±}(t, x, y) = (1/h)∫e^{±it√λ_k(η/h)}e^{iyη/h}ψ(η)e_k(x, η/h)dη.
pub fn gallery_eval(k: usize, h: f64, sign: Sign, t: f64, x: f64, y: f64) -> Result<C64> {
    let m = GalleryMode::new(k, h)?;
    if !(x >= 0.0) {
        return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
    }
    let f = |eta: f64| {
        let theta = eta / h;
        cis(sign.factor() * t * m.sqrt_lambda(theta) + y * theta) * (psi(eta) * m.e(x, theta) / h)
    };
    let (lo, hi) = PSI_SUPPORT;
    Ok(integrate_fn(f, lo, hi, eta_panels(t, y, h), ETA_TOL)?.value)
}

/// w_k(t, y) = (1/h)∫e^{i(t/h)√(η² + ω_kη^{4/3}h^{2/3})}ψ(η)e^{iyη/h}dη.
pub fn reduced_wave(k: usize, h: f64, t: f64, y: f64) -> Result<C64> {
    let m = GalleryMode::new(k, h)?;
    let f = |eta: f64| cis(t * m.sqrt_lambda(eta / h) + y * eta / h) * (psi(eta) / h);
    let (lo, hi) = PSI_SUPPORT;
    Ok(integrate_fn(f, lo, hi, eta_panels(t, y, h), ETA_TOL)?.value)
}

/// (2π/h)‖ψ‖²: the squared L² norm of u_k(t) and of w_k(t) for every t.
pub fn mode_norm_sq(h: f64) -> f64 {
    2.0 * PI / h * psi_norms().0
}

/// Γ_{x,ω_k}(y) = (1/(2πh))∫e^{iyη/h}e_k(x, η/h)ψ̃(η)dη, so that u_k(t, x, ·) = Γ_x ∗ w_k(t, ·).
pub fn gamma_kernel(k: usize, h: f64, x: f64, y: f64) -> Result<C64> {
    let m = GalleryMode::new(k, h)?;
    gamma_kernel_mode(&m, x, y)
}

fn gamma_kernel_mode(m: &GalleryMode, x: f64, y: f64) -> Result<C64> {
    let h = m.h;
    let f = |eta: f64| cis(y * eta / h) * (psi_wide(eta) * m.e(x, eta / h) / (2.0 * PI * h));
    Ok(integrate_fn(f, 0.5, 1.5, eta_panels(0.0, y, h), ETA_TOL)?.value)
}

/// Half-width of the y-window carrying Γ_{x,ω_k}.
pub fn gamma_window(m: &GalleryMode, x: f64) -> f64 {
    let h = m.h;
    (6.0 * x * cbrt(h) * sqrt(m.omega)).max(100.0 * h)
}

/// ∫|Γ_{x,ω_k}(y)|dy over [`gamma_window`], with the tail over the next window width.
pub fn gamma_kernel_l1_with_tail(k: usize, h: f64, x: f64) -> Result<(f64, f64)> {
    let m = GalleryMode::new(k, h)?;
    if !(x >= 0.0) {
        return Err(Error::Domain { name: "x", value: x, expected: "x >= 0" });
    }
    let w = gamma_window(&m, x);
    let grid = PanelGrid::new(-2.0 * w, 2.0 * w, 2 * (ceil(4.0 * w / h) as usize).max(8), GL_ORDER);
    let vals = eta_table(&m, x);
    let mut inner = Vec::new();
    let mut tail = Vec::new();
    for (&y, &wt) in grid.nodes.iter().zip(&grid.weights) {
        let g: Vec<C64> = vals.iter().map(|&(eta, c)| c * cis(y * eta / h)).collect();
        let v = wt * pairwise_sum(&g).norm();
        if y.abs() <= w {
            inner.push(v);
        } else {
            tail.push(v);
        }
    }
    Ok((pairwise_sum_real(&inner), pairwise_sum_real(&tail)))
}

/// η-nodes with the y-independent part of the Γ integrand, weights folded in.
fn eta_table(m: &GalleryMode, x: f64) -> Vec<(f64, C64)> {
    let h = m.h;
    let grid = PanelGrid::new(0.5, 1.5, 48, GL_ORDER);
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&eta, &w)| (eta, C64::new(w * psi_wide(eta) * m.e(x, eta / h) / (2.0 * PI * h), 0.0)))
        .collect()
}

pub fn gamma_kernel_l1(k: usize, h: f64, x: f64) -> Result<f64> {
    gamma_kernel_l1_with_tail(k, h, x).map(|r| r.0)
}

/// x-samples for sup_x‖Γ_x‖: up to twice the turning scale, with a log-spaced cluster near 0.
pub fn gamma_x_grid(k: usize, h: f64, n: usize) -> Result<Vec<f64>> {
    let m = GalleryMode::new(k, h)?;
    let top = 2.0 * m.turning_scale();
    Ok(linspace(top / n as f64, top, n))
}

/// (argmax x, sup_x ∫|Γ_x|dy) over [`gamma_x_grid`], refined by golden section around the best sample.
pub fn gamma_l1_sup(k: usize, h: f64, n: usize) -> Result<(f64, f64)> {
    let xs = gamma_x_grid(k, h, n)?;
    let vals: Vec<Result<f64>> = par::map(&xs, |&x| gamma_kernel_l1(k, h, x));
    let mut best = (0, 0.0);
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let step = xs[1] - xs[0];
    let (mut lo, mut hi) = ((xs[best.0] - step).max(0.0), xs[best.0] + step);
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut out = (xs[best.0], best.1);
    for _ in 0..8 {
        let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (fc, fd) = (gamma_kernel_l1(k, h, c)?, gamma_kernel_l1(k, h, d)?);
        for (x, f) in [(c, fc), (d, fd)] {
            if f > out.1 {
                out = (x, f);
            }
        }
        if fc > fd {
            hi = d;
        } else {
            lo = c;
        }
    }
    Ok(out)
}

/// Log-spaced times on (lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| exp(ln(lo) + (ln(hi) - ln(lo)) * i as f64 / n as f64)).collect()
}

/// sup_{x,y}|u_k(t)| at each t, on an (x, y) grid following the packet.
pub fn gallery_sup_profile(k: usize, h: f64, ts: &[f64]) -> Result<Vec<f64>> {
    let m = GalleryMode::new(k, h)?;
    let xs = linspace(0.0, 1.6 * m.turning_scale() + 4.0 * cbrt(h) * cbrt(h), 4 * k + 41);
    let (vmin, vmax) = m.group_velocities();
    let max_t = ts.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let rate = (2.0 * max_t + max_t * vmax + 40.0 * h) / h;
    let eg = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, ((rate * 0.5 / 2.0) as usize).max(48), GL_ORDER);
    let ek: Vec<Vec<f64>> =
        xs.iter().map(|&x| eg.nodes.iter().map(|&eta| m.e(x, eta / h)).collect()).collect();
    let rows = par::map(ts, |&t| {
        let lo = -t * vmax - 20.0 * h;
        let hi = -t * vmin + 20.0 * h;
        let ys = linspace(lo, hi, (ceil((hi - lo) / (0.25 * h)) as usize).max(2));
        let base: Vec<C64> = eg
            .nodes
            .iter()
            .zip(&eg.weights)
            .map(|(&eta, &w)| cis(t * m.sqrt_lambda(eta / h)) * (w * psi(eta) / h))
            .collect();
        let phases: Vec<Vec<C64>> = ys.iter().map(|&y| eg.nodes.iter().map(|&eta| cis(y * eta / h)).collect()).collect();
        let mut best = 0.0f64;
        for row in &ek {
            let s: Vec<C64> = base.iter().zip(row).map(|(b, e)| b * *e).collect();
            for ph in &phases {
                let v: C64 = s.iter().zip(ph).map(|(a, b)| a * b).sum();
                best = best.max(v.norm());
            }
        }
        best
    });
    Ok(rows)
}

/// Times used by the L⁴_t scans: 48 log-spaced points of (h, 1].
pub fn strichartz_times(h: f64) -> Vec<f64> {
    log_grid(h, 1.0, 48)
}

/// ‖u_k‖_{L⁴_t L^∞_{x,y}} on [`strichartz_times`].
pub fn gallery_l4_linf(k: usize, h: f64) -> Result<f64> {
    let ts = strichartz_times(h);
    let sups = gallery_sup_profile(k, h, &ts)?;
    Ok(lq_trapezoid(&ts, &sups, 4.0))
}

/// ‖u_k‖_{L⁴_t L^∞_{x,y}}·h^{3/4}/‖u_k(0)‖_{L²}.
pub fn gallery_strichartz(k: usize, h: f64) -> Result<f64> {
    Ok(gallery_l4_linf(k, h)? * powf(h, 0.75) / sqrt(mode_norm_sq(h)))
}

/// ‖w_k‖_{L⁴_t L^∞_y} on [`strichartz_times`].
pub fn reduced_wave_l4_linf(k: usize, h: f64) -> Result<f64> {
    let ts = strichartz_times(h);
    let sups: Result<Vec<f64>> = par::map(&ts, |&t| reduced_wave_sup(k, h, t)).into_iter().collect();
    Ok(lq_trapezoid(&ts, &sups?, 4.0))
}

/// (∫ f^q dt)^{1/q} by the trapezoid rule.
pub fn lq_trapezoid(ts: &[f64], f: &[f64], q: f64) -> f64 {
    let parts: Vec<f64> =
        ts.windows(2).zip(f.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (powf(v[0], q) + powf(v[1], q))).collect();
    powf(pairwise_sum_real(&parts), 1.0 / q)
}

/// sup_y|w_k(t, ·)| on a window following the packet.
pub fn reduced_wave_sup(k: usize, h: f64, t: f64) -> Result<f64> {
    let m = GalleryMode::new(k, h)?;
    let (vmin, vmax) = m.group_velocities();
    let lo = -t * vmax - 20.0 * h;
    let hi = -t * vmin + 20.0 * h;
    let eg = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, 48 + ((2.0 * t + hi.abs()) / h) as usize / 4, GL_ORDER);
    let base: Vec<C64> = eg
        .nodes
        .iter()
        .zip(&eg.weights)
        .map(|(&eta, &w)| cis(t * m.sqrt_lambda(eta / h)) * (w * psi(eta) / h))
        .collect();
    let ys = linspace(lo, hi, (ceil((hi - lo) / (0.25 * h)) as usize).max(2));
    Ok(ys
        .iter()
        .map(|&y| base.iter().zip(&eg.nodes).map(|(b, &eta)| b * cis(y * eta / h)).sum::<C64>().norm())
        .fold(0.0, f64::max))
}

/// sup_y|w_k(t)| divided by (1/h)(h/t)^{1/2}/(ω_k^{1/2}h^{1/3}).
pub fn wk_decay_constant(k: usize, h: f64, t: f64) -> Result<f64> {
    let m = GalleryMode::new(k, h)?;
    let env = sqrt(h / t) / (h * sqrt(m.omega) * cbrt(h));
    Ok(reduced_wave_sup(k, h, t)? / env)
}

/// ⟨u_k(t), u_j(t)⟩_{L²}: Plancherel in y, quadrature in x and η.
pub fn gallery_inner(k: usize, j: usize, h: f64, t: f64) -> Result<C64> {
    let a = GalleryMode::new(k, h)?;
    let b = GalleryMode::new(j, h)?;
    let eg = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, 8, GL_ORDER);
    let mut terms = Vec::with_capacity(eg.len());
    for (&eta, &w) in eg.nodes.iter().zip(&eg.weights) {
        let theta = eta / h;
        let top = (a.omega.max(b.omega) + 40.0) / pow23(theta);
        let (g, _) = integrate_real(|x| a.e(x, theta) * b.e(x, theta), 0.0, top, 4 + 2 * k.max(j), 1e-12)?;
        let ps = psi(eta);
        terms.push(cis(t * (a.sqrt_lambda(theta) - b.sqrt_lambda(theta))) * (w * ps * ps * g));
    }
    Ok(pairwise_sum(&terms) * (2.0 * PI / h))
}

fn pow23(x: f64) -> f64 {
    let c = cbrt(x);
    c * c
}

/// ∫∫|u_k(t)|²dxdy on an (x, y) grid: Gauss–Legendre in x, trapezoid in y.
pub fn gallery_norm_sq_direct(k: usize, h: f64, t: f64) -> Result<f64> {
    let m = GalleryMode::new(k, h)?;
    let x_top = (m.omega + 30.0) * pow23(h / PSI_SUPPORT.0);
    let xg = PanelGrid::new(0.0, x_top, 4 * k + 24, GL_ORDER);
    let (vmin, vmax) = m.group_velocities();
    let lo = -t * vmax - 60.0 * h;
    let hi = -t * vmin + 60.0 * h;
    let dy = 0.2 * h;
    let ny = ceil((hi - lo) / dy) as usize + 1;
    let ys = linspace(lo, hi, ny);
    let dy = ys[1] - ys[0];
    let eg = PanelGrid::new(PSI_SUPPORT.0, PSI_SUPPORT.1, 48 + ((2.0 * t + hi.abs().max(lo.abs())) / h) as usize / 4, GL_ORDER);
    let base: Vec<C64> = eg
        .nodes
        .iter()
        .zip(&eg.weights)
        .map(|(&eta, &w)| cis(t * m.sqrt_lambda(eta / h)) * (w * psi(eta) / h))
        .collect();
    let phases: Vec<Vec<C64>> = ys.iter().map(|&y| eg.nodes.iter().map(|&eta| cis(y * eta / h)).collect()).collect();
    let rows = par::map(&xg.nodes, |&x| {
        let s: Vec<C64> = base.iter().zip(&eg.nodes).map(|(b, &eta)| b * m.e(x, eta / h)).collect();
        let v: Vec<f64> =
            phases.iter().map(|ph| s.iter().zip(ph).map(|(a, b)| a * b).sum::<C64>().norm_sqr() * dy).collect();
        pairwise_sum_real(&v)
    });
    let v: Vec<f64> = rows.iter().zip(&xg.weights).map(|(r, w)| r * w).collect();
    Ok(pairwise_sum_real(&v))
}

/// Per-mode constants: each should stay bounded uniformly in k.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GalleryReport {
    pub k: usize,
    pub h: f64,
    pub omega: f64,
    /// ‖u_k‖_{L⁴L^∞}·h^{3/4}/‖u_k(0)‖.
    pub strichartz: f64,
    pub u_l4_linf: f64,
    pub w_l4_linf: f64,
    pub gamma_l1_sup: f64,
    pub gamma_argmax: f64,
    /// sup_x‖Γ_x‖_{L¹}·h^{1/3}/ω_k^{1/4}.
    pub gamma_normalized: f64,
    /// max over t ∈ (h^{1/3}, 1) of [`wk_decay_constant`].
    pub wk_constant: f64,
}

impl GalleryReport {
    /// ‖u_k‖_{L⁴L^∞} against sup_x‖Γ_x‖_{L¹}·‖w_k‖_{L⁴L^∞}.
    pub fn chain_ratio(&self) -> f64 {
        self.u_l4_linf / (self.gamma_l1_sup * self.w_l4_linf)
    }

    /// Saturation point over h^{2/3}ω_k.
    pub fn saturation_ratio(&self) -> f64 {
        let h13 = cbrt(self.h);
        self.gamma_argmax / (h13 * h13 * self.omega)
    }
}

pub fn gallery_report(k: usize, h: f64) -> Result<GalleryReport> {
    let m = GalleryMode::new(k, h)?;
    let u = gallery_l4_linf(k, h)?;
    let w = reduced_wave_l4_linf(k, h)?;
    let (gamma_argmax, gamma_l1_sup) = gamma_l1_sup(k, h, 24)?;
    let ts = log_grid(cbrt(h), 1.0, 8);
    let mut wk = 0.0f64;
    for t in ts {
        wk = wk.max(wk_decay_constant(k, h, t)?);
    }
    Ok(GalleryReport {
        k,
        h,
        omega: m.omega,
        strichartz: u * powf(h, 0.75) / sqrt(mode_norm_sq(h)),
        u_l4_linf: u,
        w_l4_linf: w,
        gamma_l1_sup,
        gamma_argmax,
        gamma_normalized: gamma_l1_sup * cbrt(h) / sqrt(sqrt(m.omega)),
        wk_constant: wk,
    })
}
