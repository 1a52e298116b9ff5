//! Ai, Ai', Bi, Bi' on the real line.
//!
//! On [-10, 10] the functions are carried by a table of values at nodes spaced
//! 1/4 apart and re-expanded in Taylor series around the nearest node (the
//! coefficients follow from y'' = xy). Beyond that the classical asymptotic
//! series take over; at |x| = 10 they are accurate to well below one ulp.

use crate::math::{cos, exp, sin, sqrt, PI};

pub(crate) const X_LIM: f64 = 10.0;
const STEP: f64 = 0.25;
const NODES: usize = 81;
const ZERO_NODE: usize = 40;

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_41;
const BI0: f64 = 0.614_926_627_446_000_735_15;
const BIP0: f64 = 0.448_288_357_353_826_357_91;
// Ai(10), Ai'(10); the recessive solution is marched inward from here.
const AI10: f64 = 1.104_753_255_289_868_593_4e-10;
const AIP10: f64 = -3.520_633_676_738_923_636_6e-10;

const fn node_x(j: usize) -> f64 {
    -X_LIM + STEP * j as f64
}

const fn taylor_const(x0: f64, y: f64, yp: f64, d: f64) -> (f64, f64) {
    // c[n] holds y^(n)(x0)/n!
    let mut cm1 = 0.0;
    let mut c0 = y;
    let mut c1 = yp;
    let mut sum = y + yp * d;
    let mut dsum = yp;
    let mut dn = d; // d^(n-1) for the next n
    let mut n = 0usize;
    while n < 70 {
        let c2 = (x0 * c0 + cm1) / (((n + 2) * (n + 1)) as f64);
        dsum += (n + 2) as f64 * c2 * dn;
        dn *= d;
        sum += c2 * dn;
        cm1 = c0;
        c0 = c1;
        c1 = c2;
        n += 1;
    }
    (sum, dsum)
}

const fn build_table() -> [[f64; 4]; NODES] {
    let mut t = [[0.0f64; 4]; NODES];
    t[NODES - 1][0] = AI10;
    t[NODES - 1][1] = AIP10;
    let mut j = NODES - 1;
    while j > ZERO_NODE {
        let (y, yp) = taylor_const(node_x(j), t[j][0], t[j][1], -STEP);
        t[j - 1][0] = y;
        t[j - 1][1] = yp;
        j -= 1;
    }
    t[ZERO_NODE] = [AI0, AIP0, BI0, BIP0];
    let mut j = ZERO_NODE;
    while j > 0 {
        let (y, yp) = taylor_const(node_x(j), t[j][0], t[j][1], -STEP);
        t[j - 1][0] = y;
        t[j - 1][1] = yp;
        let (y, yp) = taylor_const(node_x(j), t[j][2], t[j][3], -STEP);
        t[j - 1][2] = y;
        t[j - 1][3] = yp;
        j -= 1;
    }
    let mut j = ZERO_NODE;
    while j < NODES - 1 {
        let (y, yp) = taylor_const(node_x(j), t[j][2], t[j][3], STEP);
        t[j + 1][2] = y;
        t[j + 1][3] = yp;
        j += 1;
    }
    t
}

static TABLE: [[f64; 4]; NODES] = build_table();

pub(crate) const N_ASY: usize = 40;

const fn asy_coefficients() -> ([f64; N_ASY], [f64; N_ASY]) {
    let mut u = [0.0f64; N_ASY];
    let mut v = [0.0f64; N_ASY];
    u[0] = 1.0;
    v[0] = 1.0;
    let mut k = 1usize;
    while k < N_ASY {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
        k += 1;
    }
    (u, v)
}

static ASY: ([f64; N_ASY], [f64; N_ASY]) = asy_coefficients();

pub(crate) fn asy_u() -> &'static [f64; N_ASY] {
    &ASY.0
}

/// Values of Ai, Ai', Bi, Bi' at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airy {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

#[inline]
fn taylor(x0: f64, y: f64, yp: f64, d: f64) -> (f64, f64) {
    let mut cm1 = 0.0;
    let mut c0 = y;
    let mut c1 = yp;
    let mut sum = y + yp * d;
    let mut dsum = yp;
    let mut dn = d;
    let scale = y.abs() + yp.abs() * d.abs();
    for n in 0..48 {
        let c2 = (x0 * c0 + cm1) / (((n + 2) * (n + 1)) as f64);
        let dterm = (n + 2) as f64 * c2 * dn;
        dsum += dterm;
        dn *= d;
        let term = c2 * dn;
        sum += term;
        if n > 4 && term.abs() <= 1e-18 * scale && dterm.abs() <= 1e-18 * (yp.abs() + scale) {
            break;
        }
        cm1 = c0;
        c0 = c1;
        c1 = c2;
    }
    (sum, dsum)
}

#[inline]
fn node_of(x: f64) -> (usize, f64) {
    let j = ((x + X_LIM) / STEP + 0.5) as usize;
    let j = j.min(NODES - 1);
    (j, node_x(j))
}

/// Sums Σ s^k c_k ζ^{-k} with s = ±1 until the terms stop shrinking.
fn asy_series(c: &[f64; N_ASY], zeta: f64, alternate: bool) -> f64 {
    let mut sum = c[0];
    let mut p = 1.0;
    let mut last = f64::INFINITY;
    for (k, ck) in c.iter().enumerate().skip(1) {
        p /= zeta;
        let term = if alternate && k % 2 == 1 { -ck * p } else { ck * p };
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// P, Q, R, S of the oscillatory expansions (even/odd parts with alternating signs).
pub(crate) fn osc_series(zeta: f64) -> (f64, f64, f64, f64) {
    let (u, v) = (&ASY.0, &ASY.1);
    let (mut p, mut q, mut r, mut s) = (0.0, 0.0, 0.0, 0.0);
    let mut pw = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..N_ASY {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let tu = sign * u[k] * pw;
        let tv = sign * v[k] * pw;
        let mag = tu.abs().max(tv.abs());
        if k > 0 && mag > last {
            break;
        }
        if k % 2 == 0 {
            p += tu;
            r += tv;
        } else {
            q += tu;
            s += tv;
        }
        last = mag;
        if k > 1 && mag < 1e-18 {
            break;
        }
        pw /= zeta;
    }
    (p, q, r, s)
}

fn asymptotic(x: f64) -> Airy {
    let sqpi = sqrt(PI);
    if x > 0.0 {
        let z4 = sqrt(sqrt(x));
        let zeta = 2.0 / 3.0 * x * sqrt(x);
        let (u, v) = (&ASY.0, &ASY.1);
        let em = exp(-zeta);
        let ep = exp(zeta);
        Airy {
            ai: em / (2.0 * sqpi * z4) * asy_series(u, zeta, true),
            aip: -z4 * em / (2.0 * sqpi) * asy_series(v, zeta, true),
            bi: ep / (sqpi * z4) * asy_series(u, zeta, false),
            bip: z4 * ep / sqpi * asy_series(v, zeta, false),
        }
    } else {
        let z = -x;
        let z4 = sqrt(sqrt(z));
        let zeta = 2.0 / 3.0 * z * sqrt(z);
        let (p, q, r, s) = osc_series(zeta);
        let ph = zeta - PI / 4.0;
        let (sn, cs) = (sin(ph), cos(ph));
        Airy {
            ai: (cs * p + sn * q) / (sqpi * z4),
            aip: z4 / sqpi * (sn * r - cs * s),
            bi: (-sn * p + cs * q) / (sqpi * z4),
            bip: z4 / sqpi * (cs * r + sn * s),
        }
    }
}

/// Ai, Ai', Bi, Bi' at `x`.
pub fn airy(x: f64) -> Airy {
    if x.is_nan() {
        return Airy { ai: f64::NAN, aip: f64::NAN, bi: f64::NAN, bip: f64::NAN };
    }
    if x.abs() > X_LIM {
        return asymptotic(x);
    }
    let (j, x0) = node_of(x);
    let d = x - x0;
    let n = &TABLE[j];
    let (ai, aip) = taylor(x0, n[0], n[1], d);
    let (bi, bip) = taylor(x0, n[2], n[3], d);
    Airy { ai, aip, bi, bip }
}

/// Ai(x) and Ai'(x).
#[inline]
pub fn ai_deriv(x: f64) -> (f64, f64) {
    if x.abs() > X_LIM || x.is_nan() {
        let a = airy(x);
        return (a.ai, a.aip);
    }
    let (j, x0) = node_of(x);
    let n = &TABLE[j];
    taylor(x0, n[0], n[1], x - x0)
}

/// The Airy function Ai(x).
#[inline]
pub fn ai(x: f64) -> f64 {
    if x > 105.0 {
        return 0.0;
    }
    ai_deriv(x).0
}
