//! Reference computations shared by the integration tests.
//!
//! Every oracle here avoids the code path it checks: Kronecker products instead
//! of Bartels–Stewart, explicit eigenbases instead of Padé, quadrature and
//! Runge–Kutta instead of Gramians and exact discretization.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use splitmor_core::{Mat, StateSpaceModel, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random `A` shifted so its spectral abscissa lies in `[-1.5, -0.1]`.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = randn(rng, n, n) / (n as f64).sqrt();
    let abscissa = g
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = rng.random_range(0.1..1.5);
    g - Mat::identity(n, n) * (abscissa + margin)
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpaceModel {
    let a = random_stable(rng, n);
    let b = randn(rng, n, m);
    let c = randn(rng, p, n);
    StateSpaceModel::new(a, b, c).unwrap()
}

pub fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// `A Y + Y M + K = 0` through `(I ⊗ A + Mᵀ ⊗ I) vec(Y) = −vec(K)`.
pub fn kron_sylvester(a: &Mat, m: &Mat, k: &Mat) -> Mat {
    let (n, r) = (a.nrows(), m.nrows());
    let mut big = Mat::zeros(n * r, n * r);
    for j in 0..r {
        for i in 0..r {
            let mut blk = big.view_mut((i * n, j * n), (n, n));
            blk += Mat::identity(n, n) * m[(j, i)];
            if i == j {
                blk += a;
            }
        }
    }
    let rhs = -Vector::from_column_slice(k.as_slice());
    let y = big.lu().solve(&rhs).expect("Kronecker system is singular");
    Mat::from_column_slice(n, r, y.as_slice())
}

/// A matrix with a prescribed real eigenbasis and its exact exponential.
///
/// Eigenvalues are `lambdas` plus complex pairs `re ± i·im` realized as
/// rotation blocks, so `e^{At} = S e^{Dt} S⁻¹` is known in closed form.
pub fn eigen_pair(rng: &mut ChaCha8Rng, lambdas: &[f64], pairs: &[(f64, f64)], t: f64) -> (Mat, Mat) {
    let n = lambdas.len() + 2 * pairs.len();
    let s = randn(rng, n, n) + Mat::identity(n, n) * 3.0;
    let s_inv = s.clone().try_inverse().unwrap();
    let mut d = Mat::zeros(n, n);
    let mut ed = Mat::zeros(n, n);
    for (i, &l) in lambdas.iter().enumerate() {
        d[(i, i)] = l;
        ed[(i, i)] = (l * t).exp();
    }
    for (k, &(re, im)) in pairs.iter().enumerate() {
        let i = lambdas.len() + 2 * k;
        d[(i, i)] = re;
        d[(i + 1, i + 1)] = re;
        d[(i, i + 1)] = im;
        d[(i + 1, i)] = -im;
        let (g, (sn, cs)) = ((re * t).exp(), (im * t).sin_cos());
        ed[(i, i)] = g * cs;
        ed[(i + 1, i + 1)] = g * cs;
        ed[(i, i + 1)] = g * sn;
        ed[(i + 1, i)] = -g * sn;
    }
    (&s * d * &s_inv, &s * ed * &s_inv)
}

/// `∫₀^∞ ‖C e^{At} B‖_F² dt` by composite Simpson on `[0, T]` with `e^{AΔt}` from
/// an eigen-independent Taylor series of a tiny step.
pub fn h2_quadrature(a: &Mat, b: &Mat, c: &Mat, t_end: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = t_end / steps as f64;
    let step = taylor_exp(&(a * h));
    let mut x = b.clone();
    let mut acc = 0.0;
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (c * &x).norm_squared();
        x = &step * x;
    }
    (acc * h / 3.0).sqrt()
}

/// Truncated Taylor series, adequate for `‖M‖ ≪ 1`.
pub fn taylor_exp(m: &Mat) -> Mat {
    let n = m.nrows();
    let mut term = Mat::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * m / k as f64;
        sum += &term;
    }
    sum
}

/// Classical RK4 for `ẋ = Ax + Bu(t)`, `y = Cx`, sampled every `sub` steps.
pub fn rk4_outputs(
    m: &StateSpaceModel,
    u: impl Fn(f64) -> Vector,
    x0: &Vector,
    t_f: f64,
    samples: usize,
    sub: usize,
) -> Mat {
    use splitmor_core::Realization;
    let (a, b, c) = (m.a(), m.b(), m.c());
    let f = |t: f64, x: &Vector| a * x + b * u(t);
    let h = t_f / (samples * sub) as f64;
    let mut y = Mat::zeros(c.nrows(), samples + 1);
    let mut x = x0.clone();
    y.set_column(0, &(c * &x));
    let mut t = 0.0;
    for k in 1..=samples {
        for _ in 0..sub {
            let k1 = f(t, &x);
            let k2 = f(t + h / 2.0, &(&x + &k1 * (h / 2.0)));
            let k3 = f(t + h / 2.0, &(&x + &k2 * (h / 2.0)));
            let k4 = f(t + h, &(&x + &k3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
        }
        y.set_column(k, &(c * &x));
    }
    y
}

/// `H(s) = C (sI − A)⁻¹ B` for real `s` on a SISO model.
pub fn transfer_real(m: &StateSpaceModel, s: f64) -> f64 {
    use splitmor_core::Realization;
    let n = m.order();
    let shifted = Mat::identity(n, n) * s - m.a();
    let x = shifted.lu().solve(m.b()).unwrap();
    (m.c() * x)[(0, 0)]
}

/// Best H2 error over all first-order models `φ/(s+p)` of a SISO system.
///
/// For fixed `p` the optimal residue is `2p H(p)`, leaving
/// `‖h‖² − 2p H(p)²`; the remaining scalar problem is scanned on a log grid
/// and refined by golden-section search.
pub fn best_first_order(m: &StateSpaceModel, h2: f64) -> (f64, f64) {
    let gain = |p: f64| 2.0 * p * transfer_real(m, p).powi(2);
    let grid: Vec<f64> = (0..=4000).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 4000.0)).collect();
    let i = (0..grid.len())
        .max_by(|&i, &j| gain(grid[i]).total_cmp(&gain(grid[j])))
        .unwrap();
    let (mut lo, mut hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if gain(x1) > gain(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let p = 0.5 * (lo + hi);
    (p, (h2 * h2 - gain(p)).max(0.0).sqrt())
}
