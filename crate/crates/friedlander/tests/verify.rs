use friedlander::parametrix::{NWindow, PhaseSpec, Regime};
use friedlander::spectral::{linspace, GridSpec, ModelParams};
use friedlander::verify::*;
use friedlander::{Error, Sign};
use proptest::prelude::*;

fn desk() -> ModelParams {
    ModelParams::new(0.05, 0.25, 0.2).unwrap()
}

fn small_grid(ts: Vec<f64>) -> GridSpec {
    GridSpec { ts, xs: linspace(0.0, 0.5, 5), ys: linspace(-0.8, 0.3, 12) }
}

#[test]
fn poisson_converges() {
    let w2 = friedlander::airy::airy_zero(2).unwrap();
    let phi = bump(w2, 1.0);
    let sup = (w2 - 0.5, w2 + 0.5);
    let errs: Vec<f64> =
        [8, 16, 32, 64].iter().map(|&n| airy_poisson_check(&phi, sup, n, 60).unwrap().error).collect();
    assert!(errs[2] <= 1e-4, "{errs:?}");
    assert!(errs[3] < errs[0]);
    assert!(errs.windows(2).all(|w| w[1] <= w[0] * 1.5), "{errs:?}");
}

#[test]
fn poisson_without_zeros() {
    let phi = bump(1.2, 1.0);
    let c = airy_poisson_check(&phi, (0.7, 1.7), 32, 20).unwrap();
    assert_eq!(c.rhs, 0.0);
    assert!(!c.relative);
    assert!(c.error < 1e-2);
}

#[test]
fn poisson_rejects_short_window() {
    let phi = bump(4.0, 1.0);
    assert!(matches!(airy_poisson_check(&phi, (3.5, 4.5), 4, 20), Err(Error::Params(_))));
}

#[test]
fn paths_agree_on_small_grid() {
    let p = desk();
    let g = small_grid(vec![0.0, 0.3, 0.9]);
    for sign in [Sign::Plus, Sign::Minus] {
        let c = compare_paths(&p, sign, &g, NWindow::default()).unwrap();
        assert!(c.relative);
        assert!(c.error < 1e-8, "{sign:?} {}", c.error);
        assert_eq!(c.points, 3 * 5 * 12);
    }
}

#[test]
fn clipped_window_is_visible() {
    let p = desk();
    let g = small_grid(vec![1.0]);
    let c = compare_paths(&p, Sign::Plus, &g, NWindow::Fixed(0)).unwrap();
    assert!(c.error > 1e-2, "{}", c.error);
}

#[test]
fn paths_need_large_lambda() {
    let p = ModelParams::new(0.05, 0.125, 0.05).unwrap();
    let g = small_grid(vec![0.2]);
    assert!(matches!(compare_paths(&p, Sign::Plus, &g, NWindow::default()), Err(Error::Regime(_))));
}

#[test]
fn sup_scan_resolution() {
    let p = desk();
    let ts = [0.0, 0.2, 0.6];
    let a = sup_scan(&p, Kernel::Plus, &ts, &ScanOptions::default()).unwrap();
    let b = sup_scan(&p, Kernel::Plus, &ts, &ScanOptions::default().doubled()).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u.sup - v.sup).abs() <= 0.05 * v.sup, "{u:?} {v:?}");
    }
    let m = a.iter().map(|s| s.sup).fold(0.0, f64::max);
    assert!(a[0].sup >= 0.95 * m);
}

#[test]
fn cos_kernel_is_even_in_t() {
    let p = desk();
    let opts = ScanOptions { polish: false, ..ScanOptions::default() };
    let a = sup_scan(&p, Kernel::Cos, &[0.4], &opts).unwrap()[0];
    let b = sup_scan(&p, Kernel::Cos, &[-0.4], &opts).unwrap()[0];
    assert!((a.sup - b.sup).abs() <= 1e-10 * a.sup);
}

#[test]
fn ols_recovers_line() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
    let (s, c, se) = ols(&xs, &ys);
    assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-13 && se < 1e-12);
}

#[test]
fn decay_fit_power_law() {
    let p = desk();
    let scan: Vec<SupPoint> =
        log_times(0.01, 1.0, 8).into_iter().map(|t| SupPoint { t, sup: 3.0 * t.powf(-0.5), x: 0.0, y: 0.0 }).collect();
    let r = decay_fit(&scan, (0.01, 1.0), -0.5, 0.07, &p).unwrap();
    assert!(r.pass && (r.fitted_slope + 0.5).abs() < 1e-12);
    assert!((r.max_ratio - 1.0).abs() < 1e-10);
    assert!(matches!(decay_fit(&scan, (0.5, 1.0), -0.5, 0.07, &p), Err(Error::InsufficientRange(_))));
}

#[test]
fn log_times_cover_range() {
    let t = log_times(0.01, 1.0, 5);
    assert_eq!(t.len(), 11);
    assert!((t[0] - 0.01).abs() < 1e-15 && (t[10] - 1.0).abs() < 1e-14);
}

#[test]
fn envelope_ids_round_trip() {
    for e in ENVELOPES {
        assert_eq!(Envelope::from_id(e.id()), Some(e));
    }
    assert_eq!(Envelope::from_id("eq:nope"), None);
}

#[test]
fn envelope_hypotheses() {
    let p = ModelParams::new(0.05, 0.25, 0.25).unwrap();
    let s1 = PhaseSpec::new(1, p, Regime::Tangential).unwrap();
    assert!(matches!(Envelope::Eq1ffGreater.check(&s1, &[4.0]), Err(Error::Regime(_))));
    assert!(Envelope::Eq2hh.check(&s1, &[4.0, 4.5]).is_ok());
    assert!(matches!(Envelope::Eq2hh.check(&s1, &[6.0]), Err(Error::Regime(_))));
    assert!(matches!(Envelope::Eq6.check(&s1, &[30.0]), Err(Error::Regime(_))));
    let g = EnvelopeGrid::default_for(Envelope::Eq1ff, &s1);
    let trans = ModelParams::new(0.05, 0.25, 0.05).unwrap();
    assert!(matches!(envelope_report(Envelope::Eq2hh, &trans, &g), Err(Error::Regime(_))));
}

#[test]
fn envelope_report_is_finite_and_grid_stable() {
    let p = ModelParams::new(0.05, 0.25, 0.25).unwrap();
    let spec = PhaseSpec::new(0, p, Regime::Tangential).unwrap();
    let g = EnvelopeGrid { ts: linspace(0.5, 2.5, 3), xs: linspace(0.0, 2.0, 5), ..EnvelopeGrid::default_for(Envelope::DecW0a, &spec) };
    let a = envelope_report(Envelope::DecW0a, &p, &g).unwrap();
    let b = envelope_report(Envelope::DecW0a, &p, &g.halved()).unwrap();
    assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
    assert!(b.max_ratio / a.max_ratio < 2.0 && b.max_ratio >= a.max_ratio * 0.999);
}

#[test]
fn carried_times_stay_admissible() {
    let ts = Envelope::Eq6.default_times(2.5, 2, 5);
    let moved = Envelope::Eq6.carry_times(&ts, 2.5, 5.0);
    assert!(moved.iter().all(|&t| t >= 25.0));
    let ts = Envelope::Eq7.default_times(4.0, 0, 5);
    let moved = Envelope::Eq7.carry_times(&ts, 4.0, 5.0);
    assert!((moved[0] - 9.0).abs() < 1e-12 && (moved[4] - 25.0).abs() < 1e-12);
}

#[test]
fn strichartz_limits() {
    let p = desk();
    let scan: Vec<SupPoint> =
        linspace(0.0, 1.0, 11).into_iter().map(|t| SupPoint { t, sup: 2.0, x: 0.0, y: 0.0 }).collect();
    let inf = strichartz_from_scan(&scan, f64::INFINITY, &p).unwrap();
    assert_eq!(inf.norm_value, 2.0);
    let q4 = strichartz_from_scan(&scan, 4.0, &p).unwrap();
    assert!((q4.norm_value - 2.0).abs() < 1e-14);
    assert!((q4.normalized - 2.0 * 0.05f64.powf(0.75)).abs() < 1e-14);
    assert!(strichartz_from_scan(&scan, 1.0, &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_slope_invariant_under_shift(s in -2.0f64..2.0, c in -5.0f64..5.0, d in -3.0f64..3.0) {
        let xs: Vec<f64> = (0..12).map(|i| 0.3 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| c + s * x + 1e-3 * ((i * 7 % 5) as f64 - 2.0)).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| y + d).collect();
        let (a, _, _) = ols(&xs, &ys);
        let (b, _, _) = ols(&xs, &ys2);
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak(cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
        let f = |q: [f64; 2]| -((q[0] - cx).powi(2) + 2.0 * (q[1] - cy).powi(2));
        let (q, v) = nelder_mead_max(&f, [0.0, 0.0], [0.3, 0.3], 200);
        prop_assert!(v > -1e-10);
        prop_assert!((q[0] - cx).abs() < 1e-4 && (q[1] - cy).abs() < 1e-4);
    }
}
