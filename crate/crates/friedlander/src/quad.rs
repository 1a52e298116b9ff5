//! Adaptive Gauss–Kronrod quadrature for `∫ a(v) e^{iλφ(v)} dv` over boxes of
//! dimension 1 to 4, plus fixed composite Gauss–Legendre grids for batched
//! evaluation.
//!
//! Multi-dimensional integrals are iterated one axis at a time. The axis with
//! the fastest phase variation at the box centre becomes the innermost one.
//! Every axis starts from panels spanning at most half a period of the
//! sampled phase and is refined until the Kronrod error estimate drops below
//! `tol` times the L¹ norm of the integrand along that axis.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::math::{ceil, cis, cos, pairwise_sum, PI, C64};
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Samples of the phase per axis used to choose the starting panels.
const PHASE_SAMPLES: usize = 64;

/// An oscillatory integrand `amplitude(v)·e^{iλ·phase(v)}` on a box.
pub struct Integrand<'a> {
    pub amplitude: &'a dyn Fn(&[f64]) -> C64,
    pub phase: &'a dyn Fn(&[f64]) -> f64,
    pub lambda: f64,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub err_estimate: f64,
    pub evaluations: u64,
}

/// Budgets for one call of [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub max_evaluations: u64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { max_evaluations: 100_000_000, max_panels: 2048 }
    }
}

/// Outcome of [`refine_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineCheck {
    pub ratio: f64,
    pub converged: bool,
    pub result: QuadResult,
    pub refined: C64,
}

#[derive(Clone, Copy)]
struct Pair {
    coarse: C64,
    fine: C64,
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
    l1: f64,
}

struct Level {
    value: C64,
    fine: C64,
    err: f64,
}

struct Counter<'o> {
    evaluations: Cell<u64>,
    converged: Cell<bool>,
    opts: &'o QuadOptions,
}

impl Counter<'_> {
    fn charge(&self, n: u64) -> Result<()> {
        let e = self.evaluations.get() + n;
        self.evaluations.set(e);
        if e > self.opts.max_evaluations {
            Err(Error::NonConvergence { partial: C64::new(f64::NAN, f64::NAN), err_estimate: f64::INFINITY, evaluations: e })
        } else {
            Ok(())
        }
    }
}

fn gk15(f: &mut dyn FnMut(f64) -> Result<Pair>, a: f64, b: f64, fine: bool) -> Result<(Panel, C64)> {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut vals = [C64::new(0.0, 0.0); 15];
    let mut fines = [C64::new(0.0, 0.0); 15];
    for (j, &x) in XGK.iter().enumerate() {
        if j == 7 {
            let p = f(c)?;
            vals[14] = p.coarse;
            fines[14] = p.fine;
        } else {
            let p = f(c - hw * x)?;
            let q = f(c + hw * x)?;
            vals[2 * j] = p.coarse;
            vals[2 * j + 1] = q.coarse;
            fines[2 * j] = p.fine;
            fines[2 * j + 1] = q.fine;
        }
    }
    let wk = |j: usize| if j == 14 { WGK[7] } else { WGK[j / 2] };
    let mut k = C64::new(0.0, 0.0);
    let mut g = C64::new(0.0, 0.0);
    let mut kf = C64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for j in 0..15 {
        k += vals[j] * wk(j);
        l1 += vals[j].norm() * wk(j);
        if fine {
            kf += fines[j] * wk(j);
        }
        let node = if j == 14 { 7 } else { j / 2 };
        if node % 2 == 1 {
            g += vals[j] * WG[node / 2];
        }
    }
    let mean = k * 0.5;
    let mut resasc = 0.0;
    for j in 0..15 {
        resasc += wk(j) * (vals[j] - mean).norm();
    }
    let (k, g, resasc, l1) = (k * hw, g * hw, resasc * hw, l1 * hw);
    let mut err = (k - g).norm();
    if resasc > 0.0 && err > 0.0 {
        let r = 200.0 * err / resasc;
        err = resasc * if r < 1.0 { r * crate::math::sqrt(r) } else { 1.0 };
    }
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::NotFinite("integrand"));
    }
    Ok((Panel { a, b, value: k, err, l1 }, kf * hw))
}

/// Adaptive integration along one axis, starting from `n0` equal panels.
fn adaptive(
    f: &mut dyn FnMut(f64) -> Result<Pair>,
    a: f64,
    b: f64,
    n0: usize,
    tol: f64,
    fine: bool,
    counter: &Counter,
) -> Result<Level> {
    let n0 = n0.clamp(1, counter.opts.max_panels);
    let mut panels = Vec::with_capacity(2 * n0);
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + w * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + w };
        panels.push(gk15(f, lo, hi, false)?.0);
    }
    loop {
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let l1: f64 = panels.iter().map(|p| p.l1).sum();
        let target = tol * l1;
        if err <= target || l1 == 0.0 {
            break;
        }
        if panels.len() >= counter.opts.max_panels {
            counter.converged.set(false);
            break;
        }
        let cut = target / panels.len() as f64;
        let mut next = Vec::with_capacity(2 * panels.len());
        let mut split_any = false;
        let room = counter.opts.max_panels - panels.len();
        let mut splits = 0;
        let worst = panels.iter().map(|p| p.err).fold(0.0, f64::max);
        for p in panels {
            let eligible = p.err > cut.max(1e-3 * worst) && splits < room;
            let narrow = (p.b - p.a) <= 64.0 * f64::EPSILON * (p.a.abs() + p.b.abs());
            if eligible && !narrow {
                let m = 0.5 * (p.a + p.b);
                next.push(gk15(f, p.a, m, false)?.0);
                next.push(gk15(f, m, p.b, false)?.0);
                splits += 1;
                split_any = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            counter.converged.set(false);
            break;
        }
    }
    let values: Vec<C64> = panels.iter().map(|p| p.value).collect();
    let value = pairwise_sum(&values);
    let err = panels.iter().map(|p| p.err).sum();
    let fine_value = if fine {
        let mut halves = Vec::with_capacity(2 * panels.len());
        for p in &panels {
            let m = 0.5 * (p.a + p.b);
            halves.push(gk15(f, p.a, m, true)?.1);
            halves.push(gk15(f, m, p.b, true)?.1);
        }
        pairwise_sum(&halves)
    } else {
        value
    };
    Ok(Level { value, fine: fine_value, err })
}

struct Nested<'a, 'o> {
    ig: &'a Integrand<'a>,
    order: Vec<usize>,
    tol: f64,
    fine: bool,
    counter: Counter<'o>,
}

impl Nested<'_, '_> {
    fn starting_panels(&self, axis: usize, pt: &[f64; 4]) -> usize {
        let (a, b) = self.ig.bounds[axis];
        let dim = self.ig.bounds.len();
        let mut p = *pt;
        let mut total = 0.0;
        let mut last = 0.0;
        for i in 0..=PHASE_SAMPLES {
            p[axis] = a + (b - a) * i as f64 / PHASE_SAMPLES as f64;
            let v = self.ig.lambda * (self.ig.phase)(&p[..dim]);
            if i > 0 {
                total += (v - last).abs();
            }
            last = v;
        }
        if !total.is_finite() {
            return 1;
        }
        ceil(total / PI).max(1.0).min(self.counter.opts.max_panels as f64) as usize
    }

    fn level(&self, depth: usize, pt: [f64; 4]) -> Result<(Pair, f64)> {
        let dim = self.ig.bounds.len();
        let axis = self.order[depth];
        let (a, b) = self.ig.bounds[axis];
        let inner_tol = if depth + 1 == dim { self.tol } else { 0.1 * self.tol };
        let mut f = |v: f64| -> Result<Pair> {
            let mut p = pt;
            p[axis] = v;
            if depth + 1 == dim {
                self.counter.charge(1)?;
                let x = &p[..dim];
                let amp = (self.ig.amplitude)(x);
                if amp == C64::new(0.0, 0.0) {
                    return Ok(Pair { coarse: amp, fine: amp });
                }
                let v = amp * cis(self.ig.lambda * (self.ig.phase)(x));
                Ok(Pair { coarse: v, fine: v })
            } else {
                self.level(depth + 1, p).map(|r| r.0)
            }
        };
        let n0 = self.starting_panels(axis, &pt);
        let lvl = adaptive(&mut f, a, b, n0, inner_tol, self.fine, &self.counter)?;
        Ok((Pair { coarse: lvl.value, fine: lvl.fine }, lvl.err))
    }
}

/// Axis order, outermost first, with the fastest phase innermost.
fn axis_order(ig: &Integrand) -> Vec<usize> {
    let dim = ig.bounds.len();
    let mut centre = [0.0; 4];
    for (i, (a, b)) in ig.bounds.iter().enumerate() {
        centre[i] = 0.5 * (a + b);
    }
    let mut rate: Vec<(usize, f64)> = (0..dim)
        .map(|i| {
            let (a, b) = ig.bounds[i];
            let step = 1e-6 * (b - a).abs().max(1e-300);
            let mut p = centre;
            let mut q = centre;
            p[i] += step;
            q[i] -= step;
            let d = ((ig.phase)(&p[..dim]) - (ig.phase)(&q[..dim])) / (2.0 * step);
            (i, if d.is_finite() { (d * (b - a)).abs() } else { 0.0 })
        })
        .collect();
    rate.sort_by(|x, y| x.1.total_cmp(&y.1));
    rate.into_iter().map(|(i, _)| i).collect()
}

fn validate(ig: &Integrand, tol: f64) -> Result<()> {
    let dim = ig.bounds.len();
    if !(1..=4).contains(&dim) {
        return Err(Error::Domain { name: "dimension", value: dim as f64, expected: "1..=4" });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain { name: "tol", value: tol, expected: "tol > 0" });
    }
    if !(ig.lambda > 0.0) || !ig.lambda.is_finite() {
        return Err(Error::Domain { name: "lambda", value: ig.lambda, expected: "finite and > 0" });
    }
    for &(a, b) in &ig.bounds {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::Domain { name: "bounds", value: b - a, expected: "finite, lower <= upper" });
        }
    }
    Ok(())
}

fn run(ig: &Integrand, tol: f64, opts: &QuadOptions, fine: bool) -> Result<(Pair, u64, bool, f64)> {
    validate(ig, tol)?;
    let n = Nested {
        ig,
        order: axis_order(ig),
        tol,
        fine,
        counter: Counter { evaluations: Cell::new(0), converged: Cell::new(true), opts },
    };
    let (pair, err) = n.level(0, [0.0; 4])?;
    Ok((pair, n.counter.evaluations.get(), n.counter.converged.get(), err))
}

/// Integrates with the default budgets.
pub fn integrate(ig: &Integrand, tol: f64) -> Result<QuadResult> {
    integrate_with(ig, tol, &QuadOptions::default())
}

pub fn integrate_with(ig: &Integrand, tol: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let (pair, evaluations, converged, err_estimate) = run(ig, tol, opts, false)?;
    if !converged {
        return Err(Error::NonConvergence { partial: pair.coarse, err_estimate, evaluations });
    }
    Ok(QuadResult { value: pair.coarse, err_estimate, evaluations })
}

/// Relative change of the integral when every final panel, on every axis, is halved.
pub fn refine_check(ig: &Integrand, tol: f64) -> Result<RefineCheck> {
    refine_check_with(ig, tol, &QuadOptions::default())
}

pub fn refine_check_with(ig: &Integrand, tol: f64, opts: &QuadOptions) -> Result<RefineCheck> {
    let (pair, evaluations, converged, err_estimate) = run(ig, tol, opts, true)?;
    let diff = (pair.coarse - pair.fine).norm();
    let ratio = if diff == 0.0 { 0.0 } else { diff / pair.fine.norm() };
    Ok(RefineCheck {
        ratio,
        converged,
        result: QuadResult { value: pair.coarse, err_estimate, evaluations },
        refined: pair.fine,
    })
}

/// One-dimensional adaptive integral of a complex function on `[a, b]`.
pub fn integrate_fn(
    mut f: impl FnMut(f64) -> C64,
    a: f64,
    b: f64,
    init_panels: usize,
    tol: f64,
) -> Result<QuadResult> {
    let opts = QuadOptions::default();
    let counter = Counter { evaluations: Cell::new(0), converged: Cell::new(true), opts: &opts };
    let mut g = |x: f64| -> Result<Pair> {
        counter.charge(1)?;
        let v = f(x);
        Ok(Pair { coarse: v, fine: v })
    };
    let lvl = adaptive(&mut g, a, b, init_panels, tol, false, &counter)?;
    let evaluations = counter.evaluations.get();
    if !counter.converged.get() {
        return Err(Error::NonConvergence { partial: lvl.value, err_estimate: lvl.err, evaluations });
    }
    Ok(QuadResult { value: lvl.value, err_estimate: lvl.err, evaluations })
}

/// Real-valued version of [`integrate_fn`]; returns the value and its error estimate.
pub fn integrate_real(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    init_panels: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    let r = integrate_fn(|x| C64::new(f(x), 0.0), a, b, init_panels, tol)?;
    Ok((r.value.re, r.err_estimate))
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A fixed composite Gauss–Legendre rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelGrid {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = a + width * (p as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        Self { nodes, weights }
    }

    /// Same interval with every panel split in two.
    pub fn halved(&self, a: f64, b: f64, order: usize) -> Self {
        Self::new(a, b, 2 * self.nodes.len() / order.max(1), order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> C64) -> C64 {
        let v: Vec<C64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).collect();
        pairwise_sum(&v)
    }
}
