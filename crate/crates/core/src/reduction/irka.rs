//! Iterative rational Krylov algorithm with tangential directions.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Method, ProjectionPair, ReducedModel};
use crate::error::{MorError, Result, Warning};
use crate::linalg::{real_mul, real_tr_mul, CVec, Mat, RealSchur};
use crate::model::{Realization, StateSpaceModel};

type C64 = Complex<f64>;

const STALL_ITERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrkaOptions {
    pub max_iters: usize,
    /// Stop once the relative change of the sorted shifts falls below this.
    pub shift_tol: f64,
    pub seed: u64,
    /// Number of runs; run `k` scales the initial shifts by 4, 1/4, 16, … and
    /// starts with step `2^{-k}`. The stable result with the smallest H2 error wins.
    pub starts: usize,
}

impl Default for IrkaOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            shift_tol: 1e-6,
            seed: 0,
            starts: 3,
        }
    }
}

/// Largest relative interpolation mismatch over all shifts of the final model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermiteResiduals {
    /// `‖(H − H̃)(σ) b‖ / ‖H(σ) b‖`
    pub right: f64,
    /// `‖cᵀ(H − H̃)(σ)‖ / ‖cᵀ H(σ)‖`
    pub left: f64,
    /// `|cᵀ(H' − H̃')(σ) b| / |cᵀ H'(σ) b|`
    pub derivative: f64,
}

impl HermiteResiduals {
    pub fn max(&self) -> f64 {
        self.right.max(self.left).max(self.derivative)
    }
}

/// Interpolation point with its tangential directions.
#[derive(Debug, Clone)]
pub struct Node {
    pub shift: C64,
    pub right: CVec,
    pub left: CVec,
}

impl Node {
    fn is_real(&self) -> bool {
        self.shift.im == 0.0
    }

    fn width(&self) -> usize {
        if self.is_real() {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone)]
pub struct IrkaInfo {
    pub iterations: usize,
    pub converged: bool,
    pub shift_change: f64,
    /// Interpolation data of the returned model; complex nodes stand for a conjugate pair.
    pub nodes: Vec<Node>,
    pub residuals: HermiteResiduals,
    pub reflected: usize,
}

struct Iterate {
    a: Mat,
    b: Mat,
    c: Mat,
    projection: ProjectionPair,
    nodes: Vec<Node>,
}

pub fn irka_reduce(m: &StateSpaceModel, r: usize, opts: IrkaOptions) -> Result<ReducedModel> {
    let n = m.order();
    if r >= n {
        return Err(MorError::InvalidParameter(format!(
            "IRKA order {r} must be below the system order {n}"
        )));
    }
    if opts.max_iters == 0 || opts.starts == 0 || opts.shift_tol.is_nan() || opts.shift_tol <= 0.0 {
        return Err(MorError::InvalidParameter(
            "IRKA needs max_iters > 0, starts > 0 and a positive shift tolerance".into(),
        ));
    }
    if r == 0 {
        return Ok(empty_model(m));
    }
    let at = m.schur().transpose();
    let mut best: Option<(ReducedModel, f64)> = None;
    let mut first_err = None;
    for k in 0..opts.starts {
        let exp = k.div_ceil(2) as i32 * if k % 2 == 1 { 1 } else { -1 };
        let alpha = 0.5f64.powi(k.min(6) as i32);
        let run = irka_from(m, &at, initial_nodes(m, r, opts.seed, 4f64.powi(exp)), alpha, opts).and_then(|red| {
            let err = super::h2_error_norm(m, &red)?;
            Ok((red, err))
        });
        match run {
            Ok((red, err)) => {
                log::debug!("IRKA start {k}: H2 error {err:.6e}");
                let better = best.as_ref().is_none_or(|(_, e)| err < *e);
                if better {
                    best = Some((red, err));
                }
            }
            Err(e) => {
                log::debug!("IRKA start {k} failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((red, _)) => Ok(red),
        None => Err(first_err.expect("at least one start")),
    }
}

/// One IRKA run from `nodes`, moving a fraction `alpha` of the way to the
/// mirrored poles on each step.
fn irka_from(
    m: &StateSpaceModel,
    at: &RealSchur,
    mut nodes: Vec<Node>,
    mut alpha: f64,
    opts: IrkaOptions,
) -> Result<ReducedModel> {
    let mut best: Option<(Iterate, f64, usize)> = None;
    let mut last: Option<(Iterate, f64, usize)> = None;
    let mut converged = false;
    let (mut best_change, mut stalled) = (f64::INFINITY, 0);

    for it in 1..=opts.max_iters {
        let iterate = project(m, at, nodes)?;
        let sr = RealSchur::new(&iterate.a)?;
        let next = mirrored_nodes(&iterate, &sr);
        let change = shift_change(&iterate.nodes, &next);
        log::debug!("IRKA iteration {it}: shift change {change:.3e}");
        let stable = sr.check_stable().is_ok();
        if stable && best.as_ref().is_none_or(|(_, c, _)| change < *c) {
            best = Some((clone_iterate(&iterate), change, it));
        }
        if change < opts.shift_tol && stable {
            last = Some((iterate, change, it));
            converged = true;
            break;
        }
        // A repelling fixed point makes the plain update cycle without progress;
        // shorten the step once it has stalled for a while.
        if change < 0.999 * best_change {
            best_change = change;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_ITERS {
                alpha = (alpha * 0.5).max(1.0 / 64.0);
                stalled = 0;
            }
        }
        nodes = damped_nodes(&iterate.nodes, next, alpha);
        last = Some((iterate, change, it));
    }

    let mut warnings = Vec::new();
    let (iterate, change, iterations) = if converged {
        last.expect("at least one iteration")
    } else {
        let (_, change, it) = last.as_ref().expect("at least one iteration");
        warnings.push(Warning::MaxItersExceeded {
            iterations: opts.max_iters,
            shift_change: *change,
        });
        log::warn!("IRKA stopped after {it} iterations (shift change {change:.3e})");
        // Smallest shift change seen, not the last iterate.
        let (iterate, change, _) = best.or(last).expect("at least one iteration");
        (iterate, change, opts.max_iters)
    };

    let (iterate, reflected) = stabilize(m, at, iterate)?;
    if reflected > 0 {
        warnings.push(Warning::PolesReflected { count: reflected });
    }
    let residuals = hermite_residuals(m, at, &iterate)?;
    let info = IrkaInfo {
        iterations,
        converged,
        shift_change: change,
        nodes: iterate.nodes,
        residuals,
        reflected,
    };
    Ok(ReducedModel {
        a: iterate.a,
        b: iterate.b,
        c: iterate.c,
        x0: None,
        method: Method::Irka,
        projection: iterate.projection,
        hankel: Vec::new(),
        abt: None,
        irka: Some(info),
        warnings,
    })
}

fn empty_model(m: &StateSpaceModel) -> ReducedModel {
    let n = m.order();
    ReducedModel {
        a: Mat::zeros(0, 0),
        b: Mat::zeros(0, m.inputs()),
        c: Mat::zeros(m.outputs(), 0),
        x0: None,
        method: Method::Irka,
        projection: ProjectionPair {
            v: Mat::zeros(n, 0),
            w: Mat::zeros(n, 0),
            biorthogonal: true,
        },
        hankel: Vec::new(),
        abt: None,
        irka: Some(IrkaInfo {
            iterations: 0,
            converged: true,
            shift_change: 0.0,
            nodes: Vec::new(),
            residuals: HermiteResiduals::default(),
            reflected: 0,
        }),
        warnings: Vec::new(),
    }
}

fn clone_iterate(it: &Iterate) -> Iterate {
    Iterate {
        a: it.a.clone(),
        b: it.b.clone(),
        c: it.c.clone(),
        projection: it.projection.clone(),
        nodes: it.nodes.clone(),
    }
}

/// Real shifts log-spaced over the range of eigenvalue magnitudes of `A` times
/// `factor`, random directions.
fn initial_nodes(m: &StateSpaceModel, r: usize, seed: u64, factor: f64) -> Vec<Node> {
    let mags: Vec<f64> = m.schur().eigenvalues().iter().map(|z| z.norm()).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min).max(f64::MIN_POSITIVE);
    let hi = mags.iter().copied().fold(0.0, f64::max).max(lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| -> CVec {
        CVec::from_fn(k, |_, _| C64::new(StandardNormal.sample(&mut rng), 0.0))
    };
    (0..r)
        .map(|i| {
            let t = if r == 1 { 0.5 } else { i as f64 / (r - 1) as f64 };
            let s = factor * lo * (hi / lo).powf(t);
            Node {
                shift: C64::new(s, 0.0),
                right: draw(m.inputs()),
                left: draw(m.outputs()),
            }
        })
        .collect()
}

/// Oblique projection onto the tangential Krylov spaces of `nodes`.
fn project(m: &StateSpaceModel, at: &RealSchur, nodes: Vec<Node>) -> Result<Iterate> {
    let n = m.order();
    let r: usize = nodes.iter().map(Node::width).sum();
    let mut v = Mat::zeros(n, r);
    let mut w = Mat::zeros(n, r);
    let ct = m.c().transpose();
    let mut col = 0;
    for node in &nodes {
        let vk = m.schur().solve_shifted(node.shift, &real_mul(m.b(), &node.right));
        let wk = at.solve_shifted(node.shift, &real_mul(&ct, &node.left));
        for (target, src) in [(&mut v, &vk), (&mut w, &wk)] {
            target.set_column(col, &src.map(|z| z.re));
            if !node.is_real() {
                target.set_column(col + 1, &src.map(|z| z.im));
            }
        }
        col += node.width();
    }
    let v = v.qr().q();
    let w = w.qr().q();
    let gram = w.tr_mul(&v);
    let lu = gram.lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| MorError::FactorizationFailure("IRKA bases WᵀV are singular".into()))?;
    let w_bi = &w * inv.transpose();
    let a = w_bi.tr_mul(&(m.a() * &v));
    let b = w_bi.tr_mul(m.b());
    let c = m.c() * &v;
    if a.iter().chain(b.iter()).chain(c.iter()).any(|x| !x.is_finite()) {
        return Err(MorError::NonFinite("IRKA projection"));
    }
    Ok(Iterate {
        a,
        b,
        c,
        projection: ProjectionPair {
            v,
            w: w_bi,
            biorthogonal: true,
        },
        nodes,
    })
}

/// Next interpolation data: mirrored reduced poles with residue directions.
fn mirrored_nodes(it: &Iterate, sr: &RealSchur) -> Vec<Node> {
    let srt = sr.transpose();
    let nb = sr.blocks().len();
    let mut out = Vec::with_capacity(it.a.nrows());
    for (bi, &block) in sr.blocks().iter().enumerate() {
        let eig = sr.block_eigenvalues(block);
        let reps: Vec<C64> = if eig[0].im != 0.0 {
            vec![if eig[0].im > 0.0 { eig[0] } else { eig[1] }]
        } else {
            eig
        };
        for lambda in reps {
            let x = sr.eigenvector(bi, lambda);
            let y = srt.eigenvector(nb - 1 - bi, lambda);
            out.push(Node {
                shift: -lambda,
                right: real_tr_mul(&it.b, &y),
                left: real_mul(&it.c, &x),
            });
        }
    }
    out
}

/// `old + α (new − old)` shift by shift, keeping the directions of `new`.
/// Falls back to `new` when the two sets differ in their real/complex structure.
fn damped_nodes(old: &[Node], mut new: Vec<Node>, alpha: f64) -> Vec<Node> {
    if alpha >= 1.0 || old.len() != new.len() {
        return new;
    }
    let key = |a: &Node, b: &Node| a.shift.re.total_cmp(&b.shift.re).then(a.shift.im.total_cmp(&b.shift.im));
    let mut old: Vec<&Node> = old.iter().collect();
    old.sort_by(|a, b| key(a, b));
    new.sort_by(key);
    if old.iter().zip(&new).any(|(o, n)| o.is_real() != n.is_real()) {
        return new;
    }
    for (o, n) in old.iter().zip(new.iter_mut()) {
        n.shift = o.shift + (n.shift - o.shift) * alpha;
    }
    new
}

fn expanded_shifts(nodes: &[Node]) -> Vec<C64> {
    let mut s: Vec<C64> = nodes
        .iter()
        .flat_map(|n| {
            if n.is_real() {
                vec![n.shift]
            } else {
                vec![n.shift, n.shift.conj()]
            }
        })
        .collect();
    s.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    s
}

fn shift_change(old: &[Node], new: &[Node]) -> f64 {
    let (o, n) = (expanded_shifts(old), expanded_shifts(new));
    if o.len() != n.len() {
        return f64::INFINITY;
    }
    o.iter()
        .zip(&n)
        .map(|(a, b)| (a - b).norm() / a.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Reflects unstable reduced poles across the imaginary axis once and re-projects.
fn stabilize(m: &StateSpaceModel, at: &RealSchur, it: Iterate) -> Result<(Iterate, usize)> {
    let sr = RealSchur::new(&it.a)?;
    if sr.check_stable().is_ok() {
        return Ok((it, 0));
    }
    let margin = 1e-12 * it.a.norm().max(f64::MIN_POSITIVE);
    let mut count = 0;
    let nodes: Vec<Node> = mirrored_nodes(&it, &sr)
        .into_iter()
        .map(|mut node| {
            // Pole λ sits at shift -λ; the reflected pole -conj(λ) sits at conj(λ).
            if node.shift.re <= margin {
                count += if node.is_real() { 1 } else { 2 };
                node.shift = C64::new(node.shift.re.abs().max(margin), node.shift.im);
            }
            node
        })
        .collect();
    log::warn!("reflecting {count} unstable IRKA poles");
    let it = project(m, at, nodes)?;
    RealSchur::new(&it.a)?
        .check_stable()
        .map_err(|_| MorError::UnstableIterate)?;
    Ok((it, count))
}

fn hermite_residuals(m: &StateSpaceModel, at: &RealSchur, it: &Iterate) -> Result<HermiteResiduals> {
    let sr = RealSchur::new(&it.a)?;
    let srt = sr.transpose();
    let ct = m.c().transpose();
    let crt = it.c.transpose();
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    let mut res = HermiteResiduals::default();
    for node in &it.nodes {
        let s = node.shift;
        let v = m.schur().solve_shifted(s, &real_mul(m.b(), &node.right));
        let w = at.solve_shifted(s, &real_mul(&ct, &node.left));
        let vr = sr.solve_shifted(s, &real_mul(&it.b, &node.right));
        let wr = srt.solve_shifted(s, &real_mul(&crt, &node.left));
        let hb = real_mul(m.c(), &v);
        let hb_r = real_mul(&it.c, &vr);
        let ch = real_tr_mul(m.b(), &w);
        let ch_r = real_tr_mul(&it.b, &wr);
        let d = w.dot(&v);
        let d_r = wr.dot(&vr);
        res.right = res.right.max(rel((&hb - &hb_r).norm(), hb.norm()));
        res.left = res.left.max(rel((&ch - &ch_r).norm(), ch.norm()));
        res.derivative = res.derivative.max(rel((d - d_r).norm(), d.norm()));
    }
    Ok(res)
}
