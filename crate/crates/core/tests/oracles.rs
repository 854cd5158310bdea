mod common;

use common::*;
use splitmor_core::gramians::{h2_error_between, h2_norm};
use splitmor_core::linalg::{matrix_exponential, solve_lyapunov, solve_sylvester};
use splitmor_core::*;

#[test]
fn sylvester_matches_kronecker_for_small_orders() {
    let mut g = rng(11);
    for n in 1..=8 {
        for r in 1..=4 {
            let a = random_stable(&mut g, n);
            let m = random_stable(&mut g, r);
            let k = randn(&mut g, n, r);
            let y = solve_sylvester(&a, &m, &k).unwrap();
            let oracle = kron_sylvester(&a, &m, &k);
            assert!(rel(&y, &oracle) <= 1e-10, "n={n} r={r}: {:e}", rel(&y, &oracle));
        }
    }
}

#[test]
fn lyapunov_matches_kronecker_for_small_orders() {
    let mut g = rng(12);
    for n in 1..=8 {
        let a = random_stable(&mut g, n);
        let b = randn(&mut g, n, 2);
        let q = &b * b.transpose();
        let p = solve_lyapunov(&a, &q).unwrap();
        let oracle = kron_sylvester(&a, &a.transpose(), &q);
        assert!(rel(&p, &oracle) <= 1e-10, "n={n}: {:e}", rel(&p, &oracle));
    }
}

#[test]
fn lyapunov_frozen_diagonal() {
    let a = Mat::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0]));
    let p = solve_lyapunov(&a, &Mat::from_element(2, 2, 1.0)).unwrap();
    let expect = Mat::from_row_slice(2, 2, &[0.5, 1.0 / 3.0, 1.0 / 3.0, 0.25]);
    assert!(rel(&p, &expect) < 1e-14);
}

#[test]
fn exponential_matches_eigenbasis() {
    let mut g = rng(13);
    for (lambdas, pairs, t) in [
        (vec![-1.0, -0.3, -4.0], vec![(-0.5, 2.0)], 0.7),
        (vec![0.2, -2.5], vec![(-0.1, 7.0), (-1.0, 0.5)], 3.0),
        (vec![-20.0, -0.01, -5.0, -1.0], vec![], 1.5),
    ] {
        let (a, oracle) = eigen_pair(&mut g, &lambdas, &pairs, t);
        let e = matrix_exponential(&a, t).unwrap();
        assert!(rel(&e, &oracle) < 1e-10, "{:e}", rel(&e, &oracle));
    }
}

#[test]
fn exponential_frozen_value() {
    let a = Mat::from_row_slice(
        4,
        4,
        &[-1.0, 2.0, 0.0, 0.5, 0.3, -2.0, 1.0, 0.0, 0.0, -1.0, -0.5, 0.2, 0.1, 0.0, 0.4, -1.5],
    );
    let expect = Mat::from_row_slice(
        4,
        4,
        &[
            0.64850214, 0.46684787, 0.15548347, 0.14253961, 0.07058707, 0.34084474, 0.27063416, 0.02175843,
            -0.01953431, -0.26951439, 0.70885431, 0.0575377, 0.02626838, -0.01403306, 0.12067426, 0.48112219,
        ],
    );
    let e = matrix_exponential(&a, 0.5).unwrap();
    assert!((e - expect).amax() < 1e-8);
}

#[test]
fn h2_norm_frozen_value() {
    let a = Mat::from_row_slice(3, 3, &[-1.0, 0.5, 0.0, -0.5, -2.0, 0.3, 0.0, 0.2, -0.7]);
    let b = Mat::from_column_slice(3, 1, &[1.0, 0.0, 1.0]);
    let c = Mat::from_row_slice(1, 3, &[1.0, -1.0, 0.5]);
    let m = StateSpaceModel::new(a, b, c).unwrap();
    assert!((h2_norm(&m).unwrap() - 1.148351585275807).abs() < 1e-12);
}

#[test]
fn h2_norm_matches_quadrature() {
    let mut g = rng(14);
    for _ in 0..5 {
        let m = random_system(&mut g, 6, 2, 2);
        let horizon = 40.0 / -m.schur().spectral_abscissa();
        let q = h2_quadrature(m.a(), m.b(), m.c(), horizon, 20_000);
        let h2 = h2_norm(&m).unwrap();
        assert!((h2 - q).abs() <= 1e-8 * q, "{h2} vs {q}");
    }
}

#[test]
fn h2_error_matches_quadrature_of_difference() {
    let mut g = rng(15);
    for r in [1, 3, 5] {
        let m = random_system(&mut g, 7, 2, 2);
        let red = bt_reduce(&m, OrderSelection::Fixed(r)).unwrap();
        let n = m.order();
        let mut a = Mat::zeros(n + r, n + r);
        a.view_mut((0, 0), (n, n)).copy_from(m.a());
        a.view_mut((n, n), (r, r)).copy_from(&red.a);
        let mut b = Mat::zeros(n + r, 2);
        b.rows_mut(0, n).copy_from(m.b());
        b.rows_mut(n, r).copy_from(&red.b);
        let mut c = Mat::zeros(2, n + r);
        c.columns_mut(0, n).copy_from(m.c());
        c.columns_mut(n, r).copy_from(&(-&red.c));
        let rate = -m.schur().spectral_abscissa().max(red.a.complex_eigenvalues().iter().map(|l| l.re).fold(f64::MIN, f64::max));
        let q = h2_quadrature(&a, &b, &c, 40.0 / rate, 40_000);
        let e = h2_error_norm(&m, &red).unwrap();
        assert!((e - q).abs() <= 1e-7 * h2_norm(&m).unwrap(), "r={r}: {e} vs {q}");
        let plain = h2_error_between(&m, &red, None).unwrap();
        assert!((plain - e).abs() <= 1e-7 * h2_norm(&m).unwrap());
    }
}

#[test]
fn irka_first_order_frozen_optimum() {
    let a = Mat::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0]));
    let m = StateSpaceModel::new(a, Mat::from_element(2, 1, 1.0), Mat::from_element(1, 2, 1.0)).unwrap();
    let red = irka_reduce(&m, 1, IrkaOptions::default()).unwrap();
    assert!((red.a[(0, 0)] + 1.3285894536313392).abs() < 1e-6);
    let err = h2_error_norm(&m, &red).unwrap();
    assert!((err - 0.03394440794888221).abs() < 1e-8);
}

#[test]
fn irka_first_order_matches_brute_force() {
    let mut g = rng(16);
    for _ in 0..10 {
        let m = random_system(&mut g, 2, 1, 1);
        let h2 = h2_norm(&m).unwrap();
        let (_, best) = best_first_order(&m, h2);
        let red = irka_reduce(&m, 1, IrkaOptions::default()).unwrap();
        let err = h2_error_norm(&m, &red).unwrap();
        assert!((err - best).abs() <= 1e-4 * h2, "{err} vs {best}");
    }
}

#[test]
fn simulation_matches_runge_kutta() {
    let mut g = rng(17);
    let m = random_system(&mut g, 8, 2, 2);
    let amp = Vector::from_vec(vec![1.0, -0.5]);
    let smooth = |t: f64| &amp * ((-0.3 * t).exp() * (2.0 * t + 0.4).cos());
    let u = InputSignal::DecayingSinusoid {
        amplitude: amp.clone(),
        decay: 0.3,
        omega: 2.0,
        phase: 0.4,
    };
    let x0 = randn(&mut g, 8, 1).column(0).into_owned();
    let t_f = 10.0;

    // Same piecewise-linear input on both sides: only integration error remains.
    let samples = 400;
    let dt = t_f / samples as f64;
    let tr = simulate(&m, &u, &x0, t_f, dt).unwrap();
    let hold = |t: f64| {
        let k = ((t / dt).floor() as usize).min(samples - 1);
        let w = t / dt - k as f64;
        smooth(k as f64 * dt) * (1.0 - w) + smooth((k + 1) as f64 * dt) * w
    };
    let reference = rk4_outputs(&m, hold, &x0, t_f, samples, 40);
    assert!(rel(&tr.y, &reference) < 1e-9, "{:e}", rel(&tr.y, &reference));

    // Against the smooth input the hold error is second order in the step.
    let errs: Vec<f64> = [400, 800]
        .iter()
        .map(|&n| {
            let tr = simulate(&m, &u, &x0, t_f, t_f / n as f64).unwrap();
            let reference = rk4_outputs(&m, smooth, &x0, t_f, n, 8);
            rel(&tr.y, &reference)
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!((1.8..2.2).contains(&order), "observed order {order}");
}

#[test]
fn zero_input_simulation_is_exact() {
    let mut g = rng(18);
    let m = random_system(&mut g, 8, 2, 2);
    let x0 = randn(&mut g, 8, 1).column(0).into_owned();
    let tr = simulate(&m, &InputSignal::zero(2), &x0, 5.0, 0.05).unwrap();
    let reference = rk4_outputs(&m, |_| Vector::zeros(2), &x0, 5.0, 100, 50);
    assert!(rel(&tr.y, &reference) < 1e-10);
}

#[test]
fn impulse_equals_initial_state() {
    let mut g = rng(19);
    let m = random_system(&mut g, 6, 2, 1);
    let amp = Mat::from_column_slice(2, 1, &[0.7, -1.2]);
    let via_impulse = simulate(
        &m,
        &InputSignal::ImpulseTrain {
            amplitudes: amp.clone(),
            times: vec![0.0],
        },
        &Vector::zeros(6),
        4.0,
        0.01,
    )
    .unwrap();
    let x0 = m.b() * amp.column(0);
    let via_state = simulate(&m, &InputSignal::zero(2), &x0, 4.0, 0.01).unwrap();
    assert!(rel(&via_impulse.y, &via_state.y) < 1e-14);
}

#[test]
fn l2_norm_converges_under_refinement() {
    let a = Mat::from_element(1, 1, -0.5);
    let m = StateSpaceModel::new(a, Mat::from_element(1, 1, 1.0), Mat::from_element(1, 1, 1.0)).unwrap();
    let x0 = Vector::from_element(1, 1.0);
    // y = e^{-t/2}: ∫₀^∞ y² = 1
    let coarse = l2_norm(&simulate(&m, &InputSignal::zero(1), &x0, 60.0, 0.1).unwrap());
    let fine = l2_norm(&simulate(&m, &InputSignal::zero(1), &x0, 60.0, 0.01).unwrap());
    assert!((fine - 1.0).abs() < (coarse - 1.0).abs());
    assert!((fine - 1.0).abs() < 1e-5);
}

#[test]
fn quadrature_estimate_covers_l2_error() {
    // y = e^{-at} cos(ωt): ∫₀^∞ y² = 1/(4a) + a/(4(a² + ω²))
    let (a, w) = (0.1, 3.0);
    let am = Mat::from_row_slice(2, 2, &[-a, w, -w, -a]);
    let m = StateSpaceModel::new(am, Mat::zeros(2, 1), Mat::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
    let exact = (1.0 / (4.0 * a) + a / (4.0 * (a * a + w * w))).sqrt();
    for dt in [0.2, 0.1, 0.05] {
        let tr = simulate(&m, &InputSignal::zero(1), &Vector::from_vec(vec![1.0, 0.0]), 250.0, dt).unwrap();
        let err = (l2_norm(&tr) - exact).abs();
        let est = splitmor_core::simulation::l2_quadrature_error(&tr);
        assert!(err <= est && est <= 10.0 * err, "dt={dt}: error {err:e}, estimate {est:e}");
    }
}

#[test]
fn msd_traces_are_grid_converged() {
    let m = build_msd(&MsdParams::default()).unwrap();
    let n = m.order();
    let u = InputSignal::decaying(Vector::from_element(m.inputs(), 1.0), 0.05);
    let (t_f, dt) = simulation::default_horizon(&m, Some(0.05));
    for idx in [n - 1, 29] {
        let mut x0 = Vector::zeros(n);
        x0[idx] = 1.0;
        let coarse = l2_norm(&simulate(&m, &u, &x0, t_f, dt).unwrap());
        let fine = l2_norm(&simulate(&m, &u, &x0, t_f, dt / 2.0).unwrap());
        assert!((coarse - fine).abs() < 1e-4 * fine, "{coarse} vs {fine}");
    }
}
