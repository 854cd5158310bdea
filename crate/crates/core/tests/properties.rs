mod common;

use common::*;
use proptest::prelude::*;
use splitmor_core::gramians::{balance_realization, gramian_factors, hankel_spectrum, h2_norm};
use splitmor_core::linalg::solve_lyapunov;
use splitmor_core::mtx::{format_matrix_market, parse_matrix_market};
use splitmor_core::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn superposition_holds(seed in any::<u64>(), n in 2usize..12) {
        let mut g = rng(seed);
        let m = random_system(&mut g, n, 2, 2);
        let x0 = randn(&mut g, n, 1).column(0).into_owned();
        let u = InputSignal::decaying(Vector::from_vec(vec![1.0, 0.5]), 0.2);
        let both = simulate(&m, &u, &x0, 8.0, 0.02).unwrap();
        let yu = simulate(&m, &u, &Vector::zeros(n), 8.0, 0.02).unwrap();
        let yx = simulate(&m, &InputSignal::zero(2), &x0, 8.0, 0.02).unwrap();
        let sum = superpose(&yu, &yx).unwrap();
        prop_assert!(rel(&sum.y, &both.y) < 1e-12);
    }

    #[test]
    fn coordinates_round_trip(seed in any::<u64>(), n in 3usize..15, n0 in 1usize..3) {
        let mut g = rng(seed);
        let basis = InitialConditionBasis::new(randn(&mut g, n, n0)).unwrap();
        let z = randn(&mut g, n0, 1).column(0).into_owned();
        let x0 = basis.matrix() * &z;
        let back = coordinates_of(&x0, &basis).unwrap();
        prop_assert!((back - &z).norm() <= 1e-9 * z.norm().max(1.0));
    }

    #[test]
    fn hankel_values_survive_similarity(seed in any::<u64>(), n in 2usize..9) {
        let mut g = rng(seed);
        let m = random_system(&mut g, n, 2, 1);
        let t = randn(&mut g, n, n) + Mat::identity(n, n) * 4.0;
        let ti = t.clone().try_inverse().unwrap();
        let mt = StateSpaceModel::new(&t * m.a() * &ti, &t * m.b(), m.c() * &ti).unwrap();
        let s1 = hankel_spectrum(&gramian_factors(&m).unwrap()).sigma;
        let s2 = hankel_spectrum(&gramian_factors(&mt).unwrap()).sigma;
        for (a, b) in s1.iter().zip(&s2) {
            prop_assert!((a - b).abs() <= 1e-7 * s1[0], "{a} vs {b}");
        }
    }

    #[test]
    fn lyapunov_solution_is_symmetric_psd(seed in any::<u64>(), n in 1usize..20) {
        let mut g = rng(seed);
        let a = random_stable(&mut g, n);
        let b = randn(&mut g, n, 2);
        let p = solve_lyapunov(&a, &(&b * b.transpose())).unwrap();
        prop_assert_eq!(&p, &p.transpose());
        let min = p.clone().symmetric_eigen().eigenvalues.min();
        prop_assert!(min >= -1e-10 * p.norm());
        let res = &a * &p + &p * a.transpose() + &b * b.transpose();
        prop_assert!(res.norm() <= 1e-10 * (a.norm() * p.norm()).max(1.0));
    }

    #[test]
    fn bt_bound_shrinks_with_order(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_system(&mut g, 8, 2, 2);
        let mut prev = f64::INFINITY;
        for r in 1..8 {
            let red = bt_reduce(&m, OrderSelection::Fixed(r)).unwrap();
            let tail = red.tail_sum();
            prop_assert!(tail <= prev);
            prev = tail;
        }
    }

    #[test]
    fn reduced_x0_response_ignores_basis_scale(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut g = rng(seed);
        let m = random_system(&mut g, 10, 1, 1);
        let x0 = randn(&mut g, 10, 1);
        let run = |basis: InitialConditionBasis| {
            let s = split_reduce(&m, &basis, OrderSelection::Tolerance(1e-2), OrderSelection::Tolerance(1e-3), X0Method::Bt).unwrap();
            online_phase(&s, &InputSignal::zero(1), &x0.column(0).into_owned(), 10.0, 0.05).unwrap()
        };
        let y1 = run(InitialConditionBasis::new(x0.clone()).unwrap());
        let y2 = run(InitialConditionBasis::new(&x0 * c).unwrap());
        prop_assert!(rel(&y2.y, &y1.y) < 1e-8);
    }

    #[test]
    fn abt_without_basis_is_bt(seed in any::<u64>(), r in 1usize..6) {
        let mut g = rng(seed);
        let m = random_system(&mut g, 8, 2, 2);
        let bt = bt_reduce(&m, OrderSelection::Fixed(r)).unwrap();
        let abt = abt_reduce(&m, &InitialConditionBasis::empty(8), OrderSelection::Fixed(r), AbtOptions::default()).unwrap();
        for (a, b) in bt.hankel.iter().zip(&abt.hankel) {
            prop_assert!((a - b).abs() <= 1e-12 * bt.hankel[0]);
        }
        let diff = h2_error_norm(&m, &bt).unwrap() - h2_error_norm(&m, &abt).unwrap();
        prop_assert!(diff.abs() <= 1e-8 * h2_norm(&m).unwrap());
    }

    #[test]
    fn tolerance_order_rule(sigma in prop::collection::vec(1e-12f64..1.0, 1..30), tau in 1e-6f64..0.5) {
        let mut s = sigma;
        s.sort_by(|a, b| b.total_cmp(a));
        let r = order_from_tolerance(&s, tau);
        prop_assert!(r >= 1 && r <= s.len());
        if r < s.len() {
            prop_assert!(s[r] / s[0] < tau);
        }
        if r >= 1 && s[r - 1] != s.get(r).copied().unwrap_or(-1.0) {
            prop_assert!(r == 1 || s[r - 2] / s[0] >= tau);
        }
    }

    #[test]
    fn balanced_gramians_are_diagonal(seed in any::<u64>(), n in 2usize..10) {
        let mut g = rng(seed);
        let m = random_system(&mut g, n, 2, 2);
        let bal = balance_realization(&m).unwrap();
        let bm = bal.to_model().unwrap();
        let f = gramian_factors(&bm).unwrap();
        let sig = Mat::from_diagonal(&Vector::from_vec(bal.theta.clone()));
        prop_assert!(rel(&f.p, &sig) < 1e-7);
        prop_assert!(rel(&f.q, &sig) < 1e-7);
    }

    #[test]
    fn matrix_market_round_trip(seed in any::<u64>(), r in 1usize..7, c in 1usize..7) {
        let mut g = rng(seed);
        let a = randn(&mut g, r, c) * 1e3;
        let back = parse_matrix_market(&format_matrix_market(&a), "mem").unwrap();
        prop_assert_eq!(a, back);
    }
}

#[test]
fn model_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_msd(&MsdParams::with_masses(4)).unwrap();
    let basis = unit_vector_basis(8, &[2, 7]).unwrap();
    splitmor_core::mtx::save_model(dir.path(), &m, Some(&basis)).unwrap();
    let (m2, b2) = splitmor_core::mtx::load_model(dir.path()).unwrap();
    assert_eq!(m.a(), m2.a());
    assert_eq!(m.b(), m2.b());
    assert_eq!(m.c(), m2.c());
    assert_eq!(basis.matrix(), b2.unwrap().matrix());
}
