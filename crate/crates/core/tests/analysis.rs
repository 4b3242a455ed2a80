use proptest::prelude::*;
use roughkit::lift::{
    brownian_lift, brownian_lift_full, fbm_sample, homogeneous_norm, lyons_extend, rho_alpha, ExtendOptions,
    GaussianSimConfig, LiftMode,
};
use roughkit::path::{dyadic_grid, germ_delta_idx, uniform_grid, FnGerm, IncrementGerm};
use roughkit::sewing::{sew, sewing_bound_check};
use roughkit::young::young_integral;
use roughkit::{canonical_lift, PairFamily, RoughPath, SamplePath};

fn trig(coef: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |t| coef.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * t).sin()).sum()
}

fn smooth_lift(coef: &[f64], n: usize) -> RoughPath {
    let f = trig(coef);
    let x = SamplePath::from_fn(uniform_grid(1.0, n), 2, |t| vec![f(t), f(1.3 * t + 0.2)]).unwrap();
    canonical_lift(&x, 2, 0.45).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn holder_norm_is_absolutely_homogeneous(
        vals in prop::collection::vec(-1.0..1.0f64, 8..40),
        c in -5.0..5.0f64,
        alpha in 0.1..1.0f64,
    ) {
        let x = SamplePath::from_flat(uniform_grid(1.0, vals.len() - 1), 1, vals).unwrap();
        let base = x.holder_norm(alpha, PairFamily::All).unwrap();
        let scaled = x.scale(c).holder_norm(alpha, PairFamily::All).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn increment_germs_have_no_defect(vals in prop::collection::vec(-1.0..1.0f64, 6..20)) {
        let x = SamplePath::from_flat(uniform_grid(1.0, vals.len() - 1), 1, vals).unwrap();
        let germ = IncrementGerm(&x);
        let n = x.len();
        for i in 0..n {
            for u in i + 1..n {
                for j in u + 1..n {
                    prop_assert!(germ_delta_idx(&germ, i, u, j).unwrap()[0].abs() <= 1e-15);
                }
            }
        }
        let coarse = sew(&germ, 0, n - 1, &[0, n - 1]).unwrap();
        let fine = sew(&germ, 0, n - 1, &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert!((coarse[0] - fine[0]).abs() <= 1e-15);
    }

    #[test]
    fn young_integral_is_linear_and_additive(
        a in prop::collection::vec(-1.0..1.0f64, 3),
        b in prop::collection::vec(-1.0..1.0f64, 3),
        c in -2.0..2.0f64,
    ) {
        let times = uniform_grid(1.0, 256);
        let (fa, fb) = (trig(&a), trig(&b));
        let f1 = SamplePath::from_fn(times.clone(), 1, |t| vec![fa(t)]).unwrap();
        let f2 = SamplePath::from_fn(times.clone(), 1, |t| vec![fb(t)]).unwrap();
        let g = SamplePath::from_fn(times.clone(), 1, |t| vec![(2.0 * t).cos()]).unwrap();
        let combo = f1.add(&f2.scale(c)).unwrap();
        let lhs = young_integral(&combo, &g, 0.0, 1.0).unwrap().value()[0];
        let rhs = young_integral(&f1, &g, 0.0, 1.0).unwrap().value()[0] + c * young_integral(&f2, &g, 0.0, 1.0).unwrap().value()[0];
        prop_assert!((lhs - rhs).abs() <= 1e-10);

        let whole = young_integral(&f1, &g, 0.0, 1.0).unwrap();
        let left = young_integral(&f1, &g, 0.0, 0.375).unwrap();
        let right = young_integral(&f1, &g, 0.375, 1.0).unwrap();
        let gap = whole.cauchy_gap() + left.cauchy_gap() + right.cauchy_gap();
        prop_assert!((left.value()[0] + right.value()[0] - whole.value()[0]).abs() <= 2.0 * gap + 1e-12);
    }

    #[test]
    fn rho_is_a_pseudometric(
        a in prop::collection::vec(-1.0..1.0f64, 3),
        b in prop::collection::vec(-1.0..1.0f64, 3),
        c in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let (x, y, z) = (smooth_lift(&a, 32), smooth_lift(&b, 32), smooth_lift(&c, 32));
        let alpha = 0.45;
        prop_assert_eq!(rho_alpha(&x, &x, alpha).unwrap(), 0.0);
        let (xy, yx) = (rho_alpha(&x, &y, alpha).unwrap(), rho_alpha(&y, &x, alpha).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-12 * (1.0 + xy));
        let (xz, yz) = (rho_alpha(&x, &z, alpha).unwrap(), rho_alpha(&y, &z, alpha).unwrap());
        prop_assert!(xz <= xy + yz + 1e-10);
    }

    #[test]
    fn canonical_lift_norm_scales_between_powers(coef in prop::collection::vec(-1.0..1.0f64, 3), c in 0.1..4.0f64) {
        let f = trig(&coef);
        let x = SamplePath::from_fn(uniform_grid(1.0, 24), 2, |t| vec![f(t), t]).unwrap();
        let depth = 3;
        let base = homogeneous_norm(&canonical_lift(&x, depth, 0.5).unwrap(), 0.5);
        let scaled = homogeneous_norm(&canonical_lift(&x.scale(c), depth, 0.5).unwrap(), 0.5);
        let (lo, hi) = if c < 1.0 { (c.powi(depth as i32), c) } else { (c, c.powi(depth as i32)) };
        prop_assert!(scaled >= lo * base * (1.0 - 1e-12) && scaled <= hi * base * (1.0 + 1e-12));
    }
}

#[test]
fn young_germs_satisfy_the_maximal_inequality() {
    let times = uniform_grid(1.0, 96);
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..100 {
        let coef: Vec<f64> = (0..4).map(|_| next()).collect();
        let f = trig(&coef);
        let fv: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let germ = FnGerm::new(&times, 1, |i, j, o: &mut [f64]| o[0] = fv[i] * (fv[j] - fv[i]));
        let r = sewing_bound_check(&germ, 2.0, 0, 96).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn brownian_level_one_ignores_mode() {
    let grid = uniform_grid(1.0, 64);
    let ito = brownian_lift(&grid, 8, LiftMode::Ito, 17, 2, 0.45).unwrap();
    let strat = brownian_lift(&grid, 8, LiftMode::Strat, 17, 2, 0.45).unwrap();
    assert_eq!(ito.level_one_path(), strat.level_one_path());
    for k in 0..64 {
        let (a, b) = (ito.increments()[k].level(2), strat.increments()[k].level(2));
        let h = 0.5 / 64.0;
        assert!((b[0] - a[0] - h).abs() < 1e-15 && (b[3] - a[3] - h).abs() < 1e-15);
        assert_eq!((a[1], a[2]), (b[1], b[2]));
    }
}

#[test]
fn levy_area_variance() {
    // the area of a planar Brownian motion over [0, T] has variance T²/4;
    // piecewise-linear refinement with n_f steps gives T²/4 (1 - 1/n_f)
    let grid = uniform_grid(1.0, 16);
    let n_fine = 16.0 * 16.0;
    let areas: Vec<f64> = (0..4000)
        .map(|seed| {
            let x = brownian_lift(&grid, 16, LiftMode::Strat, seed, 2, 0.45).unwrap();
            let l2 = x.evaluate_idx(0, 16).unwrap();
            0.5 * (l2.level(2)[1] - l2.level(2)[2])
        })
        .collect();
    let sq: Vec<f64> = areas.iter().map(|a| a * a).collect();
    let m = roughkit::stats::mean(&sq);
    let se = roughkit::stats::std_err(&sq);
    let want = 0.25 * (1.0 - 1.0 / n_fine);
    assert!((m - want).abs() < 4.0 * se, "E[A^2] = {m} ± {se}, want {want}");
}

#[test]
fn brownian_extension_is_multiplicative() {
    let x = brownian_lift(&uniform_grid(1.0, 256), 16, LiftMode::Strat, 5, 2, 0.45).unwrap();
    let ext = lyons_extend(&x, 3, &ExtendOptions { refinement_levels: 3 }).unwrap();
    assert!(ext.rough.chen_residual(usize::MAX) <= 1e-10);
}

#[test]
fn half_hurst_quadratic_variation_is_flat() {
    let grid = dyadic_grid(1.0, 10);
    let levels: Vec<u32> = (1..=10).collect();
    let mut sums = vec![Vec::new(); levels.len()];
    for seed in 0..64 {
        let path = fbm_sample(&GaussianSimConfig { hurst: 0.5, times: grid.clone(), seed, dim: 1 }).unwrap();
        for (k, &n) in levels.iter().enumerate() {
            sums[k].push(path.dyadic_pvar_sum(2.0, n).unwrap());
        }
    }
    let med: Vec<f64> = sums.iter().map(|s| roughkit::stats::median(s).log2()).collect();
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let slope = roughkit::stats::linear_fit(&xs, &med).slope;
    assert!(slope.abs() < 0.1, "slope {slope}");
}

#[test]
fn brownian_fine_path_refines_the_coarse_one() {
    let grid = uniform_grid(2.0, 32);
    let b = brownian_lift_full(&grid, 4, LiftMode::Strat, 9, 3, 0.45).unwrap();
    let coarse = b.rough.level_one_path();
    let fine = b.fine.subsample(4).unwrap();
    assert!(fine.sup_distance(&coarse).unwrap() < 1e-13);
}
