//! Scalar helpers that dispatch to `std` when it is linked and to `libm` otherwise.

pub use num_complex::Complex64 as C64;

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = core::f64::consts::TAU;

macro_rules! unary {
    ($($name:ident => $libm:ident),*) => {$(
        #[inline(always)]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            { x.$name() }
            #[cfg(not(feature = "std"))]
            { libm::$libm(x) }
        }
    )*};
}

unary!(
    sqrt => sqrt, exp => exp, ln => log, sin => sin, cos => cos, cbrt => cbrt,
    atan => atan, floor => floor, ceil => ceil, round => round, log10 => log10
);

#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        y.atan2(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

#[inline(always)]
pub fn powf(x: f64, p: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powf(p)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, p)
    }
}

#[inline(always)]
pub fn sin_cos(x: f64) -> (f64, f64) {
    #[cfg(feature = "std")]
    {
        x.sin_cos()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::sincos(x)
    }
}

/// `e^{iφ}`.
#[inline(always)]
pub fn cis(phi: f64) -> C64 {
    let (s, c) = sin_cos(phi);
    C64::new(c, s)
}

/// x^{2/3} for x ≥ 0.
#[inline(always)]
pub fn pow2_3(x: f64) -> f64 {
    let c = cbrt(x);
    c * c
}

/// x^{3/2} for x ≥ 0.
#[inline(always)]
pub fn pow3_2(x: f64) -> f64 {
    x * sqrt(x)
}

/// Pairwise (cascade) sum; the split points depend only on the length.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    match v.len() {
        0 => C64::new(0.0, 0.0),
        n if n <= 8 => v.iter().fold(C64::new(0.0, 0.0), |a, b| a + b),
        n => {
            let (l, r) = v.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        n if n <= 8 => v.iter().sum(),
        n => {
            let (l, r) = v.split_at(n / 2);
            pairwise_sum_real(l) + pairwise_sum_real(r)
        }
    }
}
