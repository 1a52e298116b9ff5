use friedlander::airy::ai;
use friedlander::cutoff::smoothstep;
use friedlander::quad::{
    gauss_legendre, integrate, integrate_fn, integrate_with, refine_check, refine_check_with, Integrand, PanelGrid,
    QuadOptions,
};
use friedlander::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn wide_bump(v: f64) -> f64 {
    // 1 on [-6, 6], 0 outside [-9, 9]
    smoothstep((v + 9.0) / 3.0) * smoothstep((9.0 - v) / 3.0)
}

#[test]
fn plane_wave_closed_form() {
    let lambda = 50.0;
    let amp = |_: &[f64]| C64::new(1.0, 0.0);
    let ph = |v: &[f64]| v[0];
    let ig = Integrand { amplitude: &amp, phase: &ph, lambda, bounds: vec![(0.0, 1.0)] };
    let r = integrate(&ig, 1e-10).unwrap();
    let exact = (C64::new(0.0, lambda).exp() - 1.0) / C64::new(0.0, lambda);
    assert!((r.value - exact).norm() / exact.norm() < 1e-8);
    assert!(r.evaluations > 0 && r.err_estimate >= 0.0);
}

#[test]
fn airy_integral_representation() {
    // ∫ e^{i(v³/3 + v)} dv = 2π Ai(1); the cutoff tail is O(1e-9) after the S³ growth
    let amp = |v: &[f64]| C64::new(wide_bump(v[0]), 0.0);
    let ph = |v: &[f64]| v[0].powi(3) / 3.0 + v[0];
    let ig = Integrand { amplitude: &amp, phase: &ph, lambda: 1.0, bounds: vec![(-9.0, 9.0)] };
    let r = integrate(&ig, 1e-10).unwrap();
    let exact = 2.0 * PI * ai(1.0);
    assert!((r.value.re - exact).abs() < 1e-6, "{} vs {exact}", r.value);
    assert!(r.value.im.abs() < 1e-9);
}

#[test]
fn fresnel_product_separates() {
    let chi = |v: f64| smoothstep((v + 3.0) / 1.5) * smoothstep((3.0 - v) / 1.5);
    let lambda = 4.0;
    let amp1 = |v: &[f64]| C64::new(chi(v[0]), 0.0);
    let ph1 = |v: &[f64]| v[0] * v[0];
    let one = integrate(&Integrand { amplitude: &amp1, phase: &ph1, lambda, bounds: vec![(-3.0, 3.0)] }, 1e-11).unwrap();
    let amp2 = |v: &[f64]| C64::new(chi(v[0]) * chi(v[1]), 0.0);
    let ph2 = |v: &[f64]| v[0] * v[0] + v[1] * v[1];
    let two = integrate(&Integrand { amplitude: &amp2, phase: &ph2, lambda, bounds: vec![(-3.0, 3.0); 2] }, 1e-9).unwrap();
    let sq = one.value * one.value;
    assert!((two.value - sq).norm() / sq.norm() < 1e-6);
}

#[test]
fn three_and_four_dimensions() {
    let amp = |v: &[f64]| C64::new(v.iter().map(|x| 1.0 - x * x).product::<f64>(), 0.0);
    let ph = |v: &[f64]| v.iter().sum::<f64>();
    let lambda: f64 = 3.0;
    // ∫_{-1}^{1} (1 − x²) e^{iλx} dx = 4(sin λ − λ cos λ)/λ³
    let one = 4.0 * (lambda.sin() - lambda * lambda.cos()) / lambda.powi(3);
    for dim in [3usize, 4] {
        let r = integrate(&Integrand { amplitude: &amp, phase: &ph, lambda, bounds: vec![(-1.0, 1.0); dim] }, 1e-8).unwrap();
        let exact = one.powi(dim as i32);
        assert!((r.value.re - exact).abs() < 1e-8 * exact.abs(), "dim {dim}: {} vs {exact}", r.value);
    }
}

#[test]
fn refine_check_converged_and_under_resolved() {
    let amp = |v: &[f64]| C64::new((1.0 - v[0] * v[0]).max(0.0), 0.0);
    let ph = |v: &[f64]| v[0];
    let tol = 1e-8;
    let ok = refine_check(&Integrand { amplitude: &amp, phase: &ph, lambda: 40.0, bounds: vec![(-1.0, 1.0)] }, tol).unwrap();
    assert!(ok.converged && ok.ratio <= 10.0 * tol, "{ok:?}");

    let opts = QuadOptions { max_panels: 4, ..QuadOptions::default() };
    let ig = Integrand { amplitude: &amp, phase: &ph, lambda: 4000.0, bounds: vec![(-1.0, 1.0)] };
    let bad = refine_check_with(&ig, tol, &opts).unwrap();
    assert!(!bad.converged && bad.ratio > 10.0 * tol, "{bad:?}");
    assert!(matches!(integrate_with(&ig, tol, &opts), Err(Error::NonConvergence { .. })));
}

#[test]
fn zero_amplitude_is_exact() {
    let amp = |_: &[f64]| C64::new(0.0, 0.0);
    let ph = |v: &[f64]| v[0] * v[1];
    let r = refine_check(&Integrand { amplitude: &amp, phase: &ph, lambda: 10.0, bounds: vec![(0.0, 1.0); 2] }, 1e-8).unwrap();
    assert_eq!(r.ratio, 0.0);
    assert_eq!(r.result.value, C64::new(0.0, 0.0));
}

#[test]
fn evaluation_cap_is_enforced() {
    let amp = |v: &[f64]| C64::new(1.0 + v[0], 0.0);
    let ph = |v: &[f64]| v[0] * v[1] * v[2];
    let opts = QuadOptions { max_evaluations: 10_000, ..QuadOptions::default() };
    let ig = Integrand { amplitude: &amp, phase: &ph, lambda: 30.0, bounds: vec![(0.0, 1.0); 3] };
    assert!(matches!(integrate_with(&ig, 1e-10, &opts), Err(Error::NonConvergence { .. })));
}

#[test]
fn nan_is_reported() {
    let amp = |v: &[f64]| C64::new(if v[0] > 0.5 { f64::NAN } else { 1.0 }, 0.0);
    let ph = |v: &[f64]| v[0];
    let ig = Integrand { amplitude: &amp, phase: &ph, lambda: 1.0, bounds: vec![(0.0, 1.0)] };
    assert!(matches!(integrate(&ig, 1e-8), Err(Error::NotFinite(_))));
}

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let (x, w) = gauss_legendre(16);
    for p in 0..32 {
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
        let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
        assert!((q - exact).abs() < 1e-14, "degree {p}");
    }
    let g = PanelGrid::new(0.0, PI, 8, 12);
    assert!((g.integrate(|t| C64::new(t.sin(), 0.0)).re - 2.0).abs() < 1e-14);
}

#[test]
fn one_dimensional_helper() {
    let r = integrate_fn(|x| C64::new(x.cos(), x.sin()), 0.0, 100.0, 4, 1e-12).unwrap();
    let exact = (C64::new(0.0, 100.0).exp() - 1.0) / C64::new(0.0, 1.0);
    assert!((r.value - exact).norm() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conjugate_phase_conjugates(lambda in 0.5f64..60.0, c in -1.0f64..1.0) {
        let amp = |v: &[f64]| C64::new((1.0 - v[0] * v[0]).powi(2), 0.0);
        let ph = move |v: &[f64]| v[0] * v[0] * v[0] + c * v[0];
        let nph = move |v: &[f64]| -(v[0] * v[0] * v[0] + c * v[0]);
        let a = integrate(&Integrand { amplitude: &amp, phase: &ph, lambda, bounds: vec![(-1.0, 1.0)] }, 1e-12).unwrap();
        let b = integrate(&Integrand { amplitude: &amp, phase: &nph, lambda, bounds: vec![(-1.0, 1.0)] }, 1e-12).unwrap();
        prop_assert!((a.value - b.value.conj()).norm() <= 1e-12);
    }

    #[test]
    fn linearity(al in -2.0f64..2.0, be in -2.0f64..2.0, lambda in 1.0f64..30.0) {
        let f = |v: &[f64]| C64::new((-v[0] * v[0]).exp(), 0.0);
        let g = |v: &[f64]| C64::new(0.0, v[0] * v[0]);
        let fg = move |v: &[f64]| f(v) * al + g(v) * be;
        let ph = |v: &[f64]| v[0].sin();
        let tol = 1e-11;
        let run = |a: &dyn Fn(&[f64]) -> C64| integrate(&Integrand { amplitude: a, phase: &ph, lambda, bounds: vec![(-2.0, 2.0)] }, tol).unwrap();
        let (rf, rg, rfg) = (run(&f), run(&g), run(&fg));
        let lhs = rfg.value;
        let rhs = rf.value * al + rg.value * be;
        let budget = rfg.err_estimate + al.abs() * rf.err_estimate + be.abs() * rg.err_estimate + 1e-14;
        prop_assert!((lhs - rhs).norm() <= budget.max(1e-12));
    }
}
