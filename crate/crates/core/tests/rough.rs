use proptest::prelude::*;
use roughkit::controlled::{compose_smooth, dflat_metric, rough_integral, rough_integral_over, ControlledPath};
use roughkit::lift::{brownian_lift, rho_alpha, LiftMode};
use roughkit::path::uniform_grid;
use roughkit::rde::davie_solve;
use roughkit::{RoughPath, SmoothMap, VectorField};

fn brownian(seed: u64, mode: LiftMode) -> RoughPath {
    brownian_lift(&uniform_grid(1.0, 128), 8, mode, seed, 2, 0.45).unwrap()
}

/// `b ↦ (a_0 sin b_1 + a_1 b_2², a_2 cos(b_1 - b_2))`.
fn wave(a: [f64; 3]) -> SmoothMap {
    SmoothMap::new(2, 2, move |b| vec![a[0] * b[0].sin() + a[1] * b[1] * b[1], a[2] * (b[0] - b[1]).cos()])
        .with_derivative(move |b| {
            let s = (b[0] - b[1]).sin();
            vec![a[0] * b[0].cos(), 2.0 * a[1] * b[1], -a[2] * s, a[2] * s]
        })
}

fn controlled(x: &RoughPath, a: [f64; 3]) -> ControlledPath {
    let id = ControlledPath::identity(x.clone(), &[0.0, 0.0]).unwrap();
    compose_smooth(&wave(a), &id, 0.45).unwrap().path
}

fn coef() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rough_integral_is_linear(seed in 0u64..1000, a in coef(), b in coef()) {
        let x = brownian(seed, LiftMode::Strat);
        let (p, q) = (controlled(&x, a), controlled(&x, b));
        let sum = ControlledPath::new(x.clone(), p.y().add(q.y()).unwrap(), p.yp().add(q.yp()).unwrap()).unwrap();
        let (ip, iq, is) = (rough_integral(&p).unwrap(), rough_integral(&q).unwrap(), rough_integral(&sum).unwrap());
        for k in 0..x.times().len() {
            let (u, v, w) = (ip.integral.y().value(k), iq.integral.y().value(k), is.integral.y().value(k));
            prop_assert!((0..w.len()).all(|c| (u[c] + v[c] - w[c]).abs() <= 1e-10));
        }
    }

    #[test]
    fn rough_integral_is_additive_over_intervals(seed in 0u64..1000, a in coef(), split in 1usize..127) {
        let x = brownian(seed, LiftMode::Strat);
        let cp = controlled(&x, a);
        let u = x.times()[split];
        let whole = rough_integral_over(&cp, 0.0, 1.0).unwrap();
        let left = rough_integral_over(&cp, 0.0, u).unwrap();
        let right = rough_integral_over(&cp, u, 1.0).unwrap();
        let gap = whole.cauchy_gap + left.cauchy_gap + right.cauchy_gap;
        for c in 0..whole.value.len() {
            prop_assert!((left.value[c] + right.value[c] - whole.value[c]).abs() <= 2.0 * gap + 1e-12);
        }
    }

    #[test]
    fn composition_of_linear_maps_chains(seed in 0u64..1000, a in prop::array::uniform4(-2.0..2.0f64), b in prop::array::uniform4(-2.0..2.0f64)) {
        let x = brownian(seed, LiftMode::Strat);
        let id = ControlledPath::identity(x, &[0.3, -0.2]).unwrap();
        let (ma, mb) = (SmoothMap::linear(2, 2, a.to_vec()).unwrap(), SmoothMap::linear(2, 2, b.to_vec()).unwrap());
        let ba = vec![
            b[0] * a[0] + b[1] * a[2], b[0] * a[1] + b[1] * a[3],
            b[2] * a[0] + b[3] * a[2], b[2] * a[1] + b[3] * a[3],
        ];
        let twice = compose_smooth(&mb, &compose_smooth(&ma, &id, 0.45).unwrap().path, 0.45).unwrap().path;
        let once = compose_smooth(&SmoothMap::linear(2, 2, ba).unwrap(), &id, 0.45).unwrap().path;
        prop_assert!(twice.y().sup_distance(once.y()).unwrap() <= 1e-13);
        prop_assert!(twice.yp().sup_distance(once.yp()).unwrap() <= 1e-13);
    }
}

#[test]
fn ito_and_stratonovich_integrals_differ_by_the_trace() {
    for seed in 0..8 {
        let strat = brownian(seed, LiftMode::Strat);
        let ito = brownian(seed, LiftMode::Ito);
        let value = |x: &RoughPath| {
            let id = ControlledPath::identity(x.clone(), &[0.0, 0.0]).unwrap();
            let outer = rough_integral(&id.outer_integrand().unwrap()).unwrap().value().to_vec();
            let inner = rough_integral(&id.inner_integrand().unwrap()).unwrap().value()[0];
            (outer, inner)
        };
        let ((so, si), (io, ii)) = (value(&strat), value(&ito));
        assert!((si - ii - 1.0).abs() < 1e-12, "d T / 2 = 1, got {}", si - ii);
        for k in 0..2 {
            for l in 0..2 {
                let want = if k == l { 0.5 } else { 0.0 };
                assert!((so[k * 2 + l] - io[k * 2 + l] - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ito_and_stratonovich_davie_steps_differ_by_the_shift() {
    let grid = uniform_grid(1.0, 256);
    let h = 1.0 / 256.0;
    let f = VectorField::scalar_identity();
    for seed in 0..4 {
        let strat = davie_solve(&f, &brownian_lift(&grid, 8, LiftMode::Strat, seed, 1, 0.45).unwrap(), &[1.0]).unwrap();
        let ito = davie_solve(&f, &brownian_lift(&grid, 8, LiftMode::Ito, seed, 1, 0.45).unwrap(), &[1.0]).unwrap();
        // σ(y) = y: each step multiplies by 1 + δB + 𝕏, and 𝕏 shifts by h/2
        for k in 0..256 {
            let rs = strat.y().value(k + 1)[0] / strat.y().value(k)[0];
            let ri = ito.y().value(k + 1)[0] / ito.y().value(k)[0];
            assert!((rs - ri - 0.5 * h).abs() < 1e-13);
        }
    }
}

#[test]
fn square_composition_remainder() {
    // φ(y) = y²: R^{φ(Y)}_{s,t} = 2 Y_s R^Y_{s,t} + (δY_{s,t})²
    let x = brownian_lift(&uniform_grid(1.0, 64), 8, LiftMode::Strat, 3, 1, 0.45).unwrap();
    let id = ControlledPath::identity(x, &[0.5]).unwrap();
    let sq = compose_smooth(&SmoothMap::new(1, 1, |y| vec![y[0] * y[0]]).with_derivative(|y| vec![2.0 * y[0]]), &id, 0.45)
        .unwrap()
        .path;
    for i in 0..64 {
        for j in i + 1..=64 {
            let dy = id.y().increment_idx(i, j)[0];
            let want = 2.0 * id.y().value(i)[0] * id.remainder_idx(i, j)[0] + dy * dy;
            assert!((sq.remainder_idx(i, j)[0] - want).abs() < 1e-13);
        }
    }
}

#[test]
fn solutions_are_locally_lipschitz_in_data() {
    // C(ε) = max over 20 random directions of d♭(Y, Ỹ) / (|y - ỹ| + ρ(X, X̃))
    // at perturbation size ε; a Lipschitz dependence keeps C(ε) stable
    let sigma = VectorField::linear(2, &[vec![0.0, 1.0, -1.0, 0.0], vec![0.5, 0.0, 0.0, -0.5]]).unwrap();
    let x = brownian(11, LiftMode::Strat);
    let y0 = [1.0, 0.5];
    let base = davie_solve(&sigma, &x, &y0).unwrap();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let dirs: Vec<[f64; 3]> = (0..20).map(|_| [next(), next(), next()]).collect();
    let fit = |eps: f64| -> f64 {
        dirs.iter()
            .map(|d| {
                let xt = x.dilate(1.0 + eps * d[2]);
                let y1 = [y0[0] + eps * d[0], y0[1] + eps * d[1]];
                let other = davie_solve(&sigma, &xt, &y1).unwrap();
                let data = (eps * d[0]).hypot(eps * d[1]) + rho_alpha(&x, &xt, 0.45).unwrap();
                dflat_metric(&base.path, &other.path, 0.45).unwrap() / data
            })
            .fold(0.0, f64::max)
    };
    let c = fit(1e-3);
    assert!(c.is_finite() && c > 0.0);
    for eps in [1e-2, 3e-3, 3e-4, 1e-4] {
        let ce = fit(eps);
        assert!((ce / c - 1.0).abs() <= 0.25, "C({eps}) = {ce} against C(1e-3) = {c}");
    }
}
