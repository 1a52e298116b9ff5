//! Cross-checks and scans: Airy–Poisson summation, spectral against reflection
//! sums, time scans of sup|G|, log–log slope fits, envelope ratios and
//! discretised Strichartz norms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::airy::{phase_l, phase_l_derivs, AiryTable};
use crate::math::{cbrt, ceil, cos, exp, ln, log10, pairwise_sum_real, powf, sqrt, C64, PI};
use crate::parametrix::{NWindow, ParametrixModel, PhaseSpec, Regime};
use crate::quad::PanelGrid;
use crate::spectral::{linspace, GridSpec, ModelParams, SpectralModel};
use crate::{par, Error, Result, Sign};

/// Which propagator a scan looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Kernel {
    Plus,
    Minus,
    /// (G⁺ + G⁻)/2.
    Cos,
}

impl Kernel {
    pub fn as_str(self) -> &'static str {
        match self {
            Kernel::Plus => "plus",
            Kernel::Minus => "minus",
            Kernel::Cos => "cos",
        }
    }
}

impl From<Sign> for Kernel {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Kernel::Plus,
            Sign::Minus => Kernel::Minus,
        }
    }
}

/// Outcome of [`airy_poisson_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    /// False when the right side vanishes and `error` is absolute.
    pub relative: bool,
    pub n_max: u32,
    pub k_max: usize,
}

/// exp(1 − 1/(1 − z²)) on |z| < 1, z = (ω − center)/(width/2).
pub fn bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |w| {
        let z = 2.0 * (w - center) / width;
        if z.abs() >= 1.0 {
            0.0
        } else {
            exp(1.0 - 1.0 / (1.0 - z * z))
        }
    }
}

/// Compares Σ_{|N|≤N_max}∫e^{−iNL(ω)}φ(ω)dω with 2πΣ_k φ(ω_k)/L'(ω_k).
pub fn airy_poisson_check(phi: &dyn Fn(f64) -> f64, support: (f64, f64), n_max: u32, k_max: usize) -> Result<PoissonCheck> {
    if n_max < 8 {
        return Err(Error::Params(format!("N_max = {n_max} must be at least 8")));
    }
    let table = AiryTable::new(k_max)?;
    let (lo, hi) = support;
    let top = table.zero(k_max)?;
    if !(lo > 0.0 && hi < top && lo < hi) {
        return Err(Error::Domain { name: "support", value: hi, expected: "0 < lo < hi < omega_kmax" });
    }
    let rhs: f64 =
        table.zeros().iter().zip(table.l_prime()).map(|(&w, &lp)| 2.0 * PI * phi(w) / lp).sum();
    let lp = phase_l_derivs(hi).d1.max(2.0 * sqrt(hi));
    let panels = (ceil(n_max as f64 * lp * (hi - lo) / 2.0) as usize).max(32);
    let grid = PanelGrid::new(lo, hi, panels, 16);
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&w, &wt)| {
            let l = phase_l(w);
            let d = 1.0 + 2.0 * (1..=n_max).map(|n| cos(n as f64 * l)).sum::<f64>();
            wt * phi(w) * d
        })
        .collect();
    let lhs = pairwise_sum_real(&terms);
    let relative = rhs != 0.0;
    let error = if relative { (lhs - rhs).abs() / rhs.abs() } else { (lhs - rhs).abs() };
    Ok(PoissonCheck { lhs, rhs, error, relative, n_max, k_max })
}

/// Outcome of [`compare_paths`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathComparison {
    pub max_abs_diff: f64,
    pub sup_spectral: f64,
    /// max|G_param − G_spec| / sup|G_spec|, or the absolute difference when G_spec ≡ 0.
    pub error: f64,
    pub relative: bool,
    pub n_max: u32,
    pub points: usize,
}

/// Reflection sum against mode sum on a grid.
pub fn compare_paths(p: &ModelParams, sign: Sign, grid: &GridSpec, window: NWindow) -> Result<PathComparison> {
    if p.lambda_gamma() < 1.0 {
        return Err(Error::Regime(format!("lambda_gamma = {} < 1", p.lambda_gamma())));
    }
    let spec = SpectralModel::new(*p)?.field(sign, &grid.ts, &grid.xs, &grid.ys)?;
    let model = ParametrixModel::new(*p, window)?;
    let n_max = model.n_max_for(&grid.ts, &grid.xs);
    let par = model.field_with_window(sign, &grid.ts, &grid.xs, &grid.ys, n_max)?;
    let max_abs_diff = spec.values.iter().zip(&par.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let sup_spectral = spec.sup_abs();
    let relative = sup_spectral > 0.0;
    let error = if relative { max_abs_diff / sup_spectral } else { max_abs_diff };
    Ok(PathComparison { max_abs_diff, sup_spectral, error, relative, n_max, points: spec.values.len() })
}

/// Reflections that matter at one time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActiveCount {
    pub t: f64,
    /// N with sup_{x,y}|W_N| above `threshold`·max_N sup_{x,y}|W_N|.
    pub active: Vec<i64>,
    pub count: usize,
    pub bound: f64,
    pub threshold: f64,
    /// sup_{x,y}|W_N| for each scanned N, from −n_scan to n_scan.
    pub sups: Vec<f64>,
}

/// Counts active N at time t over (xs, ys), scanning |N| ≤ n_scan, against n_active_bound_with(t, γ, h, constant).
pub fn active_reflections(
    p: &ModelParams,
    t: f64,
    xs: &[f64],
    ys: &[f64],
    n_scan: i64,
    threshold: f64,
    constant: f64,
) -> Result<ActiveCount> {
    let model = ParametrixModel::new(*p, NWindow::Fixed(0))?;
    let ns: Vec<i64> = (-n_scan..=n_scan).collect();
    let fields = model.terms(Sign::Plus, &[t], xs, ys, &ns)?;
    let sups: Vec<f64> = fields.iter().map(|f| f.sup_abs()).collect();
    let top = sups.iter().copied().fold(0.0, f64::max);
    let active: Vec<i64> = ns.iter().zip(&sups).filter(|(_, &s)| top > 0.0 && s > threshold * top).map(|(&n, _)| n).collect();
    Ok(ActiveCount {
        t,
        count: active.len(),
        active,
        bound: crate::parametrix::n_active_bound_with(t, p.gamma, p.h, constant),
        threshold,
        sups,
    })
}

/// sup_{x,y}|G| at one time and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupPoint {
    pub t: f64,
    pub sup: f64,
    pub x: f64,
    pub y: f64,
}

/// Sampling of the (x, y) window searched at each t.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanOptions {
    /// x spacing in units of h, capped so that at least 9 points cover [0, 2γ].
    pub dx_over_h: f64,
    /// y spacing in units of h.
    pub dy_over_h: f64,
    /// Nelder–Mead refinement from the best grid point.
    pub polish: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { dx_over_h: 1.0, dy_over_h: 0.5, polish: true }
    }
}

impl ScanOptions {
    /// Twice as many samples in each of x and y.
    pub fn doubled(self) -> Self {
        Self { dx_over_h: 0.5 * self.dx_over_h, dy_over_h: 0.5 * self.dy_over_h, ..self }
    }
}

/// y-interval swept by the localised wave at time t.
pub fn y_window(p: &ModelParams, kernel: Kernel, t: f64) -> (f64, f64) {
    let w = 4.0 * p.gamma * sqrt(p.gamma) + 10.0 * p.h;
    let fast = t.abs() * sqrt(1.0 + 1.25 * p.gamma);
    let slow = t.abs();
    match (kernel, t >= 0.0) {
        (Kernel::Cos, _) => (-fast - w, fast + w),
        (Kernel::Plus, true) | (Kernel::Minus, false) => (-fast - w, -slow + w),
        (Kernel::Minus, true) | (Kernel::Plus, false) => (slow - w, fast + w),
    }
}

fn kernel_point(model: &SpectralModel, kernel: Kernel, t: f64, x: f64, y: f64) -> Result<C64> {
    match kernel {
        Kernel::Plus => model.green(Sign::Plus, t, x, y),
        Kernel::Minus => model.green(Sign::Minus, t, x, y),
        Kernel::Cos => Ok((model.green(Sign::Plus, t, x, y)? + model.green(Sign::Minus, t, x, y)?) * 0.5),
    }
}

fn kernel_field(model: &SpectralModel, kernel: Kernel, t: f64, xs: &[f64], ys: &[f64]) -> Result<Vec<C64>> {
    let one = |s| model.field(s, &[t], xs, ys).map(|f| f.values);
    Ok(match kernel {
        Kernel::Plus => one(Sign::Plus)?,
        Kernel::Minus => one(Sign::Minus)?,
        Kernel::Cos => one(Sign::Plus)?.iter().zip(one(Sign::Minus)?).map(|(a, b)| (a + b) * 0.5).collect(),
    })
}

/// Maximises f over a 2D simplex walk; returns the best (point, value).
pub fn nelder_mead_max(f: &dyn Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2], iters: usize) -> ([f64; 2], f64) {
    let mut s: Vec<([f64; 2], f64)> = vec![start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]]
        .into_iter()
        .map(|v| (v, f(v)))
        .collect();
    for _ in 0..iters {
        s.sort_by(|a, b| b.1.total_cmp(&a.1));
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let worst = s[2].0;
        let at = |k: f64| [c[0] + k * (c[0] - worst[0]), c[1] + k * (c[1] - worst[1])];
        let r = at(1.0);
        let fr = f(r);
        if fr > s[0].1 {
            let e = at(2.0);
            let fe = f(e);
            s[2] = if fe > fr { (e, fe) } else { (r, fr) };
        } else if fr > s[1].1 {
            s[2] = (r, fr);
        } else {
            let k = at(-0.5);
            let fk = f(k);
            if fk > s[2].1 {
                s[2] = (k, fk);
            } else {
                let b = s[0].0;
                for v in s.iter_mut().skip(1) {
                    v.0 = [(v.0[0] + b[0]) / 2.0, (v.0[1] + b[1]) / 2.0];
                    v.1 = f(v.0);
                }
            }
        }
    }
    s.sort_by(|a, b| b.1.total_cmp(&a.1));
    (s[0].0, s[0].1)
}

/// sup_{x,y}|G(t, ·)| for each t, x ∈ [0, 2γ], y over [`y_window`].
pub fn sup_scan(p: &ModelParams, kernel: Kernel, ts: &[f64], opts: &ScanOptions) -> Result<Vec<SupPoint>> {
    let model = SpectralModel::new(*p)?;
    let nx = (ceil(2.0 * p.gamma / (opts.dx_over_h * p.h)) as usize + 1).max(9);
    let xs = linspace(0.0, 2.0 * p.gamma, nx);
    let dx = xs[1] - xs[0];
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let (lo, hi) = y_window(p, kernel, t);
        let dy = opts.dy_over_h * p.h;
        let ny = (ceil((hi - lo) / dy) as usize + 1).max(2);
        let ys = linspace(lo, hi, ny);
        let vals = kernel_field(&model, kernel, t, &xs, &ys)?;
        let (best, &v) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .ok_or(Error::InsufficientRange(String::from("empty scan grid")))?;
        let mut pt = SupPoint { t, sup: v.norm(), x: xs[best / ny], y: ys[best % ny] };
        if opts.polish && pt.sup > 0.0 {
            let f = |q: [f64; 2]| {
                if q[0] < 0.0 {
                    return 0.0;
                }
                kernel_point(&model, kernel, t, q[0], q[1]).map(|g| g.norm()).unwrap_or(0.0)
            };
            let ([x, y], s) = nelder_mead_max(&f, [pt.x, pt.y], [0.5 * dx, 0.5 * dy], 30);
            if s > pt.sup {
                pt = SupPoint { t, sup: s, x, y };
            }
        }
        out.push(pt);
    }
    Ok(out)
}

/// Slope fit and envelope ratio, serialised as the report schema.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayReport {
    pub envelope_name: String,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    /// Two standard errors of the OLS slope.
    pub slope_ci: f64,
    pub max_ratio: f64,
    pub grid_spec: String,
    pub params: ModelParams,
    pub pass: bool,
}

/// OLS fit y = c + s·x: (slope, intercept, standard error of the slope).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - c - slope * x) * (y - c - slope * x)).sum();
    let se = if xs.len() > 2 { sqrt(rss / (n - 2.0) / sxx) } else { f64::INFINITY };
    (slope, c, se)
}

/// Log–log slope of sup|G| against t over `t_range`; passes when within `tol` of `expected`.
pub fn decay_fit(scan: &[SupPoint], t_range: (f64, f64), expected: f64, tol: f64, params: &ModelParams) -> Result<DecayReport> {
    let pts: Vec<&SupPoint> = scan.iter().filter(|s| s.t >= t_range.0 && s.t <= t_range.1 && s.sup > 0.0).collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientRange(format!(
            "{} usable points in t in [{}, {}], need 5",
            pts.len(),
            t_range.0,
            t_range.1
        )));
    }
    let lx: Vec<f64> = pts.iter().map(|s| ln(s.t)).collect();
    let ly: Vec<f64> = pts.iter().map(|s| ln(s.sup)).collect();
    let (slope, c, se) = ols(&lx, &ly);
    let max_ratio = pts.iter().map(|s| s.sup / exp(c + slope * ln(s.t))).fold(0.0, f64::max);
    Ok(DecayReport {
        envelope_name: String::from("sup-decay"),
        fitted_slope: slope,
        expected_slope: expected,
        slope_ci: 2.0 * se,
        max_ratio,
        grid_spec: format!("{} samples on t in [{}, {}]", pts.len(), t_range.0, t_range.1),
        params: *params,
        pass: (slope - expected).abs() <= tol,
    })
}

/// Log-spaced times with `per_decade` samples per decade (inclusive ends).
pub fn log_times(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = log10(hi / lo);
    let n = (ceil(decades * per_decade as f64) as usize).max(1) + 1;
    (0..n).map(|i| lo * powf(hi / lo, i as f64 / (n - 1) as f64)).collect()
}

/// Dispersive envelopes of the reflection terms and of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Envelope {
    /// N = 0, |T| ≤ 5/2, tangential.
    DecW0a,
    /// N = 0, |T| ≤ 1, transverse.
    DecW0,
    /// Σ_{|N|≤2}|W_N|, 1 ≤ |T| ≤ 9, transverse.
    Tpp9,
    /// Kernel, 9 ≤ |T| ≤ λ², transverse.
    Eq7,
    /// 1 ≤ |N| < λ^{1/3}, |T − 4N| ≤ 1/N.
    Eq2hh,
    /// 1 ≤ |N| < λ^{1/3}, |T − 4N| ≥ 1/N.
    Eq2ff,
    /// λ^{1/3} ≤ |N| ≤ λ.
    Eq1ff,
    /// λ ≤ |N| ≤ 1/√a.
    Eq1ffGreater,
    /// |T| ≥ λ², transverse.
    Eq6,
    /// Kernel, |T| ≥ λ², transverse.
    Eq8,
}

pub const ENVELOPES: [Envelope; 10] = [
    Envelope::DecW0a,
    Envelope::DecW0,
    Envelope::Tpp9,
    Envelope::Eq7,
    Envelope::Eq2hh,
    Envelope::Eq2ff,
    Envelope::Eq1ff,
    Envelope::Eq1ffGreater,
    Envelope::Eq6,
    Envelope::Eq8,
];

impl Envelope {
    pub fn id(self) -> &'static str {
        match self {
            Envelope::DecW0a => "eq:decW0a",
            Envelope::DecW0 => "eq:decW0",
            Envelope::Tpp9 => "tpp9",
            Envelope::Eq7 => "eq:7",
            Envelope::Eq2hh => "eq:2hh",
            Envelope::Eq2ff => "eq:2ff",
            Envelope::Eq1ff => "eq:1ff",
            Envelope::Eq1ffGreater => "eq:1ff>",
            Envelope::Eq6 => "eq:6",
            Envelope::Eq8 => "eq:8",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        ENVELOPES.iter().copied().find(|e| e.id() == s)
    }

    pub fn regime(self) -> Regime {
        match self {
            Envelope::DecW0 | Envelope::Tpp9 | Envelope::Eq7 | Envelope::Eq6 | Envelope::Eq8 => Regime::Transverse,
            _ => Regime::Tangential,
        }
    }

    /// Whether the quantity is the whole kernel rather than one W_N.
    fn kernel_level(self) -> bool {
        matches!(self, Envelope::Eq7 | Envelope::Eq8)
    }

    /// Envelope value at rescaled time T for reflection N.
    pub fn value(self, spec: &PhaseSpec, tt: f64) -> f64 {
        let p = &spec.params;
        let (h, g) = (p.h, p.gamma);
        let lam = spec.lambda();
        let n = spec.n.unsigned_abs() as f64;
        let t = (spec.time_scale() * tt).abs();
        let h13 = cbrt(h);
        let d = (tt - 4.0 * spec.n as f64).abs();
        match self {
            Envelope::DecW0a | Envelope::DecW0 => sqrt(g) / (h * h) * inf1(sqrt(h / (g * t))),
            Envelope::Tpp9 => sqrt(g) / (h * h) * inf1(cbrt(h / (g * t))),
            Envelope::Eq7 => h13 * sqrt(sqrt(g)) / (h * h * sqrt(t)),
            Envelope::Eq2hh => h13 / (h * h * (sqrt(sqrt(n / cbrt(lam))) + powf(n * d, 1.0 / 6.0))),
            Envelope::Eq2ff => h13 / (h * h * (1.0 + sqrt(sqrt(n * d)))),
            Envelope::Eq1ff => h13 / (h * h * (sqrt(n / cbrt(lam)) + sqrt(sqrt(n * d)))),
            Envelope::Eq1ffGreater => h13 * cbrt(lam * lam) / (h * h * n),
            Envelope::Eq6 => g * g / (h * h * h * powf(lam, 5.0 / 6.0) * n.max(1.0)),
            Envelope::Eq8 => h13 / (h * h * lam * sqrt(lam)),
        }
    }

    /// Checks the proposition's hypotheses on N and the T-samples.
    pub fn check(self, spec: &PhaseSpec, ts: &[f64]) -> Result<()> {
        let lam = spec.lambda();
        let n = spec.n.unsigned_abs() as f64;
        let fail = |what: String| Err(Error::Regime(format!("{}: {what}", self.id())));
        if spec.regime != self.regime() {
            return fail(format!("requires the {:?} rescaling", self.regime()));
        }
        let t_abs = |f: &dyn Fn(f64) -> bool| ts.iter().all(|&t| f(t.abs()));
        let dist = |t: f64| (t - 4.0 * spec.n as f64).abs();
        match self {
            Envelope::DecW0a if spec.n != 0 || !t_abs(&|t| t <= 2.5) => fail(String::from("N = 0 and |T| <= 5/2")),
            Envelope::DecW0 if spec.n != 0 || !t_abs(&|t| t <= 1.0) => fail(String::from("N = 0 and |T| <= 1")),
            Envelope::Tpp9 if !t_abs(&|t| (1.0..=9.0).contains(&t)) => fail(String::from("1 <= |T| <= 9")),
            Envelope::Eq7 if !t_abs(&|t| t >= 9.0 && t <= lam * lam) => {
                fail(format!("9 <= |T| <= lambda^2 = {:.3}", lam * lam))
            }
            Envelope::Eq2hh | Envelope::Eq2ff if !(n >= 1.0 && n < cbrt(lam)) => {
                fail(format!("1 <= |N| < lambda^(1/3) = {:.3}", cbrt(lam)))
            }
            Envelope::Eq2hh if !ts.iter().all(|&t| dist(t) <= 1.0 / n) => fail(String::from("|T - 4N| <= 1/N")),
            Envelope::Eq2ff if !ts.iter().all(|&t| dist(t) >= 1.0 / n) => fail(String::from("|T - 4N| >= 1/N")),
            Envelope::Eq1ff if !(n >= cbrt(lam) && n <= lam) => {
                fail(format!("lambda^(1/3) = {:.3} <= |N| <= lambda = {lam:.3}", cbrt(lam)))
            }
            Envelope::Eq1ffGreater if !(n >= lam && n <= 1.0 / sqrt(spec.params.a)) => {
                fail(format!("lambda = {lam:.3} <= |N| <= 1/sqrt(a) = {:.3}", 1.0 / sqrt(spec.params.a)))
            }
            Envelope::Eq6 | Envelope::Eq8 if !t_abs(&|t| t >= lam * lam) => {
                fail(format!("|T| >= lambda^2 = {:.3}", lam * lam))
            }
            _ => Ok(()),
        }
    }

    /// Rescaled times sampled by default for reflection index n.
    pub fn default_times(self, lam: f64, n: i64, count: usize) -> Vec<f64> {
        let nf = n as f64;
        let inv = 1.0 / nf.abs().max(1.0);
        let (lo, hi) = match self {
            Envelope::DecW0a => (0.1, 2.5),
            Envelope::DecW0 => (0.1, 1.0),
            Envelope::Tpp9 => (1.0, 9.0),
            Envelope::Eq7 => (9.0, lam * lam),
            Envelope::Eq2hh => (4.0 * nf - inv, 4.0 * nf + inv),
            Envelope::Eq2ff => (4.0 * nf + inv, 4.0 * nf + inv + 3.0),
            Envelope::Eq1ff | Envelope::Eq1ffGreater => (4.0 * nf - 2.0, 4.0 * nf + 2.0),
            Envelope::Eq6 | Envelope::Eq8 => (lam * lam, lam * lam + 4.0),
        };
        linspace(lo, hi, count)
    }
}

impl Envelope {
    /// Maps T-samples valid at λ to the matching samples at λ'.
    pub fn carry_times(self, ts: &[f64], lam: f64, lam2: f64) -> Vec<f64> {
        match self {
            Envelope::Eq7 => ts.iter().map(|&t| 9.0 + (t - 9.0) * (lam2 * lam2 - 9.0) / (lam * lam - 9.0)).collect(),
            Envelope::Eq6 | Envelope::Eq8 => ts.iter().map(|&t| t + t.signum() * (lam2 * lam2 - lam * lam)).collect(),
            _ => ts.to_vec(),
        }
    }
}

fn inf1(v: f64) -> f64 {
    if v < 1.0 {
        v
    } else {
        1.0
    }
}

/// Rescaled sampling for an envelope report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeGrid {
    pub n: i64,
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    /// Y spacing; the Y range follows T and N.
    pub dy: f64,
}

impl EnvelopeGrid {
    pub fn default_for(env: Envelope, spec: &PhaseSpec) -> Self {
        let lam = spec.lambda();
        Self {
            n: spec.n,
            ts: env.default_times(lam, spec.n, 9),
            xs: linspace(0.0, 2.0, 9),
            dy: (0.5 / lam).min(0.2),
        }
    }

    /// Half the spacing in T, X and Y.
    pub fn halved(&self) -> Self {
        let refine = |v: &[f64]| {
            let mut out = Vec::with_capacity(2 * v.len());
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.extend(v.last());
            out
        };
        Self { n: self.n, ts: refine(&self.ts), xs: refine(&self.xs), dy: 0.5 * self.dy }
    }

    /// Rescaled Y interval sampled at time T.
    pub fn y_range(&self, tt: f64) -> (f64, f64) {
        let n = self.n.unsigned_abs() as f64;
        (-0.25 * tt.abs() - 2.5, 0.25 * tt.abs() + 2.0 * n + 2.5)
    }

    pub fn describe(&self) -> String {
        let (t0, t1) = (self.ts.first().copied().unwrap_or(0.0), self.ts.last().copied().unwrap_or(0.0));
        format!("N={} T:[{t0},{t1}]x{} X:{} dY={}", self.n, self.ts.len(), self.xs.len(), self.dy)
    }
}

/// max over (X, Y) at each T of the quantity the envelope bounds.
pub fn envelope_profile(env: Envelope, spec: &PhaseSpec, grid: &EnvelopeGrid) -> Result<Vec<f64>> {
    let p = spec.params;
    let l = spec.scale();
    let xs: Vec<f64> = grid.xs.iter().map(|x| x * l).collect();
    let model = ParametrixModel::new(p, NWindow::Fixed(0))?;
    let spectral = if env.kernel_level() { Some(SpectralModel::new(p)?) } else { None };
    let ns: Vec<i64> = if env == Envelope::Tpp9 { (-2..=2).collect() } else { vec![spec.n] };
    let rows = par::map(&grid.ts, |&tt| -> Result<f64> {
        let (ylo, yhi) = grid.y_range(tt);
        let ny = (ceil((yhi - ylo) / grid.dy) as usize + 1).max(2);
        let ys: Vec<f64> = linspace(ylo, yhi, ny).iter().map(|&yy| spec.to_physical(tt, 0.0, yy).2).collect();
        let t = spec.time_scale() * tt;
        if let Some(m) = &spectral {
            return Ok(m.field(Sign::Plus, &[t], &xs, &ys)?.sup_abs());
        }
        let fields = model.terms(Sign::Plus, &[t], &xs, &ys, &ns)?;
        let per = xs.len() * ys.len();
        Ok((0..per).map(|i| fields.iter().map(|f| f.values[i].norm()).sum::<f64>()).fold(0.0, f64::max))
    });
    rows.into_iter().collect()
}

/// max |quantity|/envelope over the grid, with a slope fit of log sup against log envelope.
pub fn envelope_report(env: Envelope, p: &ModelParams, grid: &EnvelopeGrid) -> Result<DecayReport> {
    let spec = PhaseSpec::new(grid.n, *p, env.regime())?;
    let natural = if p.a < p.gamma / 4.0 { Regime::Transverse } else { Regime::Tangential };
    if natural != env.regime() {
        return Err(Error::Regime(format!(
            "{}: a = {} against gamma/4 = {} selects the {natural:?} regime",
            env.id(),
            p.a,
            p.gamma / 4.0
        )));
    }
    env.check(&spec, &grid.ts)?;
    let sups = envelope_profile(env, &spec, grid)?;
    let envs: Vec<f64> = grid.ts.iter().map(|&tt| env.value(&spec, tt)).collect();
    let max_ratio = sups.iter().zip(&envs).map(|(s, e)| s / e).fold(0.0, f64::max);
    let usable: Vec<(f64, f64)> =
        sups.iter().zip(&envs).filter(|(s, _)| **s > 0.0).map(|(s, e)| (ln(*e), ln(*s))).collect();
    let spread = usable.iter().map(|u| u.0).fold(f64::NEG_INFINITY, f64::max)
        - usable.iter().map(|u| u.0).fold(f64::INFINITY, f64::min);
    let (slope, ci) = if usable.len() >= 3 && spread > 0.1 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        let (s, _, se) = ols(&xs, &ys);
        (s, 2.0 * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(DecayReport {
        envelope_name: String::from(env.id()),
        fitted_slope: slope,
        expected_slope: 1.0,
        slope_ci: ci,
        max_ratio,
        grid_spec: grid.describe(),
        params: *p,
        pass: max_ratio.is_finite() && max_ratio > 0.0,
    })
}

/// Ratio drift of an envelope report under h → h/2 and under grid halving.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeStability {
    pub base: DecayReport,
    pub half_h: DecayReport,
    pub fine_grid: DecayReport,
    pub drift_h: f64,
    pub drift_grid: f64,
    pub pass: bool,
}

fn drift(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        (a / b).max(b / a)
    } else {
        f64::INFINITY
    }
}

/// Runs [`envelope_report`] at (h, grid), (h/2, grid) and (h, grid halved); windows tied to λ² move with λ.
pub fn envelope_stability(env: Envelope, p: &ModelParams, grid: &EnvelopeGrid) -> Result<EnvelopeStability> {
    let base = envelope_report(env, p, grid)?;
    let ph = ModelParams { h: p.h / 2.0, ..*p };
    let lam = |q: &ModelParams| PhaseSpec::new(grid.n, *q, env.regime()).map(|s| s.lambda());
    let half_grid = EnvelopeGrid { ts: env.carry_times(&grid.ts, lam(p)?, lam(&ph)?), ..grid.clone() };
    let half_h = envelope_report(env, &ph, &half_grid)?;
    let fine_grid = envelope_report(env, p, &grid.halved())?;
    let drift_h = drift(base.max_ratio, half_h.max_ratio);
    let drift_grid = drift(base.max_ratio, fine_grid.max_ratio);
    Ok(EnvelopeStability { pass: drift_h < 2.0 && drift_grid < 2.0, base, half_h, fine_grid, drift_h, drift_grid })
}

/// Discretised L^q_t L^∞_{x,y} norm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrichartzScan {
    pub q: f64,
    pub norm_value: f64,
    pub h: f64,
    pub gamma: f64,
    /// norm_value·h^{1−1/q}.
    pub normalized: f64,
}

/// (∫ sup_{x,y}|G|^q dt)^{1/q} by the trapezoid rule on the scan times; q = ∞ gives the max.
pub fn strichartz_from_scan(scan: &[SupPoint], q: f64, p: &ModelParams) -> Result<StrichartzScan> {
    if !(q >= 2.0) {
        return Err(Error::Domain { name: "q", value: q, expected: "q >= 2" });
    }
    let norm_value = if q.is_infinite() {
        scan.iter().map(|s| s.sup).fold(0.0, f64::max)
    } else {
        let parts: Vec<f64> =
            scan.windows(2).map(|w| 0.5 * (w[1].t - w[0].t).abs() * (powf(w[0].sup, q) + powf(w[1].sup, q))).collect();
        powf(pairwise_sum_real(&parts), 1.0 / q)
    };
    let expo = if q.is_infinite() { 1.0 } else { 1.0 - 1.0 / q };
    Ok(StrichartzScan { q, norm_value, h: p.h, gamma: p.gamma, normalized: norm_value * powf(p.h, expo) })
}

pub fn strichartz_norm(p: &ModelParams, kernel: Kernel, q: f64, ts: &[f64], opts: &ScanOptions) -> Result<StrichartzScan> {
    let scan = sup_scan(p, kernel, ts, opts)?;
    strichartz_from_scan(&scan, q, p)
}
