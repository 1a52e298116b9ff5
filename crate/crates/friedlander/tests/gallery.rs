use friedlander::gallery::*;
use friedlander::spectral::Eigenmode;
use friedlander::{Error, Sign, C64};
use proptest::prelude::*;

const H: f64 = 0.05;

#[test]
fn mode_matches_spectral_eigenmode() {
    let m = GalleryMode::new(4, H).unwrap();
    let e = Eigenmode::new(4, 21.0).unwrap();
    for x in [0.0, 0.1, 0.37, 0.9] {
        assert!((m.e(x, 21.0) - e.eval(x).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn bad_inputs() {
    assert!(matches!(GalleryMode::new(0, H), Err(Error::Range { .. })));
    assert!(matches!(GalleryMode::new(1, 0.0), Err(Error::Domain { .. })));
    assert!(gallery_eval(1, H, Sign::Plus, 0.0, -0.1, 0.0).is_err());
}

#[test]
fn l2_norm_is_conserved() {
    let exact = mode_norm_sq(H);
    for &(k, t) in &[(1usize, 0.0), (3, 0.5), (10, 1.0)] {
        let v = gallery_norm_sq_direct(k, H, t).unwrap();
        assert!((v - exact).abs() <= 1e-3 * exact, "k={k} t={t}: {v} vs {exact}");
    }
    let (l2, _) = psi_norms();
    assert!((exact - 2.0 * std::f64::consts::PI / H * l2).abs() < 1e-12 * exact);
}

#[test]
fn gram_matrix_is_diagonal() {
    let n = mode_norm_sq(H);
    for t in [0.0, 0.5] {
        for k in 1..=10 {
            for j in k..=10 {
                let g = gallery_inner(k, j, H, t).unwrap();
                let target = if k == j { C64::new(n, 0.0) } else { C64::new(0.0, 0.0) };
                assert!((g - target).norm() < 1e-6 * n, "t={t} ({k},{j}) {g}");
            }
        }
    }
}

#[test]
fn dirichlet_wall() {
    for k in [1usize, 6] {
        assert!(gallery_eval(k, H, Sign::Plus, 0.3, 0.0, -0.2).unwrap().norm() < 1e-10);
    }
}

#[test]
fn reduced_wave_norm_at_zero() {
    let (lo, hi, n) = (-10.0, 10.0, 8000);
    let dy = (hi - lo) / n as f64;
    let v: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * dy * reduced_wave(3, H, 0.0, lo + i as f64 * dy).unwrap().norm_sqr()
        })
        .sum();
    let exact = mode_norm_sq(H);
    assert!((v - exact).abs() < 1e-5 * exact, "{v} {exact}");
}

#[test]
fn mode_is_gamma_convolved_with_reduced_wave() {
    let (k, t, x, y) = (4, 0.6, 0.05, -0.55);
    let u = gallery_eval(k, H, Sign::Plus, t, x, y).unwrap();
    let (a, b, n) = (-3.0, 2.0, 4000);
    let dy = (b - a) / n as f64;
    let mut s = C64::new(0.0, 0.0);
    for i in 0..=n {
        let yp = a + i as f64 * dy;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += gamma_kernel(k, H, x, y - yp).unwrap() * reduced_wave(k, H, t, yp).unwrap() * (w * dy);
    }
    assert!((u - s).norm() < 1e-4 * u.norm(), "{u} {s}");
}

#[test]
fn minus_mode_is_conjugate_reflection() {
    let a = gallery_eval(3, H, Sign::Plus, 0.4, 0.2, -0.3).unwrap();
    let b = gallery_eval(3, H, Sign::Minus, -0.4, 0.2, -0.3).unwrap();
    assert!((a - b).norm() < 1e-12 * a.norm());
}

#[test]
fn gamma_l1_saturates_near_turning_point() {
    for k in [2usize, 5] {
        let m = GalleryMode::new(k, H).unwrap();
        let (x, v) = gamma_l1_sup(k, H, 24).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!((x - m.turning_scale()).abs() <= 0.5 * m.turning_scale(), "k={k}: {x}");
        let (_, tail) = gamma_kernel_l1_with_tail(k, H, x).unwrap();
        assert!(tail < 1e-2 * v);
    }
}

#[test]
fn reduced_wave_bounded_by_l1() {
    let (_, l1) = psi_norms();
    for t in [0.0, 0.3, 0.9] {
        assert!(reduced_wave_sup(6, H, t).unwrap() <= l1 / H * (1.0 + 1e-9));
    }
    let c = wk_decay_constant(6, H, 0.5).unwrap();
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn report_constants() {
    let r = gallery_report(2, H).unwrap();
    assert!((r.strichartz - gallery_strichartz(2, H).unwrap()).abs() < 1e-14);
    assert!(r.chain_ratio() <= 1.0 + 1e-6, "{r:?}");
    assert!((0.5..=1.5).contains(&r.saturation_ratio()), "{r:?}");
    assert!(r.gamma_normalized > 0.1 && r.gamma_normalized < 10.0);
    assert!(r.wk_constant > 0.0 && r.wk_constant.is_finite());
}

#[test]
fn strichartz_stable_in_h() {
    let a = gallery_strichartz(3, H).unwrap();
    let b = gallery_strichartz(3, H / 2.0).unwrap();
    assert!(a / b < 2.0 && b / a < 2.0);
}

#[test]
fn lq_of_constant() {
    let ts = log_grid(0.01, 1.0, 20);
    let f = vec![3.0; ts.len()];
    let v = lq_trapezoid(&ts, &f, 4.0);
    assert!((v - 3.0 * (1.0 - ts[0]).powf(0.25)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psi_wide_covers_psi(eta in 0.0f64..2.0) {
        let p = friedlander::cutoff::psi(eta);
        if p > 0.0 {
            prop_assert_eq!(psi_wide(eta), 1.0);
        }
        prop_assert!((0.0..=1.0).contains(&psi_wide(eta)));
    }

    #[test]
    fn reduced_wave_modulus_at_most_l1(k in 1usize..15, t in 0.0f64..1.0, y in -1.5f64..0.5) {
        let (_, l1) = psi_norms();
        prop_assert!(reduced_wave(k, H, t, y).unwrap().norm() <= l1 / H * (1.0 + 1e-9));
    }
}
