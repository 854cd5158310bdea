//! State-space realizations and initial-condition subspaces.

use std::collections::HashSet;
use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::error::{MorError, Result};
use crate::linalg::{solve_lyapunov_schur, Mat, RealSchur, Vector};

/// Read access to `(A, B, C)` shared by full and reduced models.
pub trait Realization {
    fn a(&self) -> &Mat;
    fn b(&self) -> &Mat;
    fn c(&self) -> &Mat;

    fn order(&self) -> usize {
        self.a().nrows()
    }

    fn inputs(&self) -> usize {
        self.b().ncols()
    }

    fn outputs(&self) -> usize {
        self.c().nrows()
    }
}

/// Optional names for states, inputs and outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// An asymptotically stable LTI system `ẋ = Ax + Bu`, `y = Cx`.
///
/// The real Schur form of `A` is computed once on construction (it doubles as
/// the stability check) and shared by every model derived with
/// [`StateSpaceModel::with_input`].
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    a: Mat,
    b: Mat,
    c: Mat,
    labels: Option<Labels>,
    schur: Arc<RealSchur>,
}

impl StateSpaceModel {
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<Self> {
        check_dims(&a, &b, &c)?;
        for (m, what) in [(&a, "state matrix"), (&b, "input matrix"), (&c, "output matrix")] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(MorError::NonFinite(what));
            }
        }
        let schur = RealSchur::new(&a)?;
        schur.check_stable()?;
        Ok(Self {
            a,
            b,
            c,
            labels: None,
            schur: Arc::new(schur),
        })
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    /// Same `A` and `C` with a different input map, reusing the Schur form.
    pub fn with_input(&self, b: Mat) -> Result<Self> {
        check_dims(&self.a, &b, &self.c)?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(MorError::NonFinite("input matrix"));
        }
        Ok(Self {
            a: self.a.clone(),
            b,
            c: self.c.clone(),
            labels: None,
            schur: Arc::clone(&self.schur),
        })
    }

    pub fn schur(&self) -> &RealSchur {
        &self.schur
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }
}

impl Realization for StateSpaceModel {
    fn a(&self) -> &Mat {
        &self.a
    }
    fn b(&self) -> &Mat {
        &self.b
    }
    fn c(&self) -> &Mat {
        &self.c
    }
}

fn check_dims(a: &Mat, b: &Mat, c: &Mat) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(MorError::DimensionMismatch(format!(
            "A must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Err(MorError::DimensionMismatch("A is empty".into()));
    }
    if b.nrows() != n {
        return Err(MorError::DimensionMismatch(format!(
            "B has {} rows, A has order {}",
            b.nrows(),
            n
        )));
    }
    if c.ncols() != n {
        return Err(MorError::DimensionMismatch(format!(
            "C has {} columns, A has order {}",
            c.ncols(),
            n
        )));
    }
    Ok(())
}

/// Outcome of [`validate_model`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Largest real part of the spectrum of `A`.
    pub spectral_abscissa: f64,
    pub stable: bool,
    /// Number of reachability-Gramian eigenvalues above `rank_tol · λ_max`.
    pub controllable_rank: usize,
    pub observable_rank: usize,
    /// Unit directions with Gramian eigenvalue at most `rank_tol · λ_max`.
    pub uncontrollable_directions: Vec<Vector>,
    pub unobservable_directions: Vec<Vector>,
    pub rank_tol: f64,
}

impl ValidationReport {
    pub fn controllable(&self) -> bool {
        self.uncontrollable_directions.is_empty()
    }

    pub fn observable(&self) -> bool {
        self.unobservable_directions.is_empty()
    }
}

/// Stability margin and numerical controllability/observability ranks.
pub fn validate_model(m: &StateSpaceModel) -> ValidationReport {
    const RANK_TOL: f64 = 1e-10;
    let bbt = m.b() * m.b().transpose();
    let ctc = m.c().transpose() * m.c();
    let (controllable_rank, uncontrollable_directions) = gramian_rank(m.schur(), &bbt, RANK_TOL);
    let (observable_rank, unobservable_directions) =
        gramian_rank(&m.schur().transpose(), &ctc, RANK_TOL);
    ValidationReport {
        spectral_abscissa: m.schur().spectral_abscissa(),
        stable: m.schur().check_stable().is_ok(),
        controllable_rank,
        observable_rank,
        uncontrollable_directions,
        unobservable_directions,
        rank_tol: RANK_TOL,
    }
}

/// Numerical rank of the Gramian solving `A P + P Aᵀ + G = 0` and its weak eigenvectors.
fn gramian_rank(schur: &RealSchur, g: &Mat, tol: f64) -> (usize, Vec<Vector>) {
    let Ok(p) = solve_lyapunov_schur(schur, g) else {
        return (0, Vec::new());
    };
    let eig = SymmetricEigen::new(p);
    let top = eig.eigenvalues.max();
    let weak: Vec<Vector> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(_, &lam)| top <= 0.0 || lam <= tol * top)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    (eig.eigenvalues.len() - weak.len(), weak)
}

/// Columns of `X₀` spanning the subspace that initial states are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditionBasis {
    x0: Mat,
}

impl InitialConditionBasis {
    /// Accepts an `n × n₀` matrix of full column rank; `n₀ = 0` is allowed.
    pub fn new(x0: Mat) -> Result<Self> {
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(MorError::NonFinite("initial-condition basis"));
        }
        if x0.ncols() > 0 {
            if x0.ncols() > x0.nrows() {
                return Err(MorError::RankDeficient { ratio: 0.0 });
            }
            let sv = x0.singular_values();
            let (hi, lo) = (sv.max(), sv.min());
            let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
            if ratio <= 1e-12 {
                return Err(MorError::RankDeficient { ratio });
            }
        }
        Ok(Self { x0 })
    }

    /// The trivial basis with no columns.
    pub fn empty(n: usize) -> Self {
        Self {
            x0: Mat::zeros(n, 0),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.nrows()
    }

    pub fn n0(&self) -> usize {
        self.x0.ncols()
    }

    /// Basis with column `j` multiplied by `d[j]`.
    pub fn scaled(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.n0() {
            return Err(MorError::DimensionMismatch(format!(
                "{} scale factors for {} basis columns",
                d.len(),
                self.n0()
            )));
        }
        let mut x0 = self.x0.clone();
        for (j, &s) in d.iter().enumerate() {
            x0.column_mut(j).scale_mut(s);
        }
        Self::new(x0)
    }
}

/// An initial state, given directly or in coordinates of a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    State(Vector),
    Coordinates(Vector),
}

impl InitialCondition {
    pub fn state(&self, basis: &InitialConditionBasis) -> Result<Vector> {
        match self {
            InitialCondition::State(x0) => Ok(x0.clone()),
            InitialCondition::Coordinates(z0) => {
                if z0.len() != basis.n0() {
                    return Err(MorError::DimensionMismatch(format!(
                        "{} coordinates for a basis of dimension {}",
                        z0.len(),
                        basis.n0()
                    )));
                }
                Ok(basis.matrix() * z0)
            }
        }
    }

    pub fn coordinates(&self, basis: &InitialConditionBasis) -> Result<Vector> {
        match self {
            InitialCondition::State(x0) => coordinates_of(x0, basis),
            InitialCondition::Coordinates(z0) => Ok(z0.clone()),
        }
    }
}

/// Least-squares coordinates `z₀` with `X₀ z₀ = x₀`.
pub fn coordinates_of(x0: &Vector, basis: &InitialConditionBasis) -> Result<Vector> {
    if x0.len() != basis.dim() {
        return Err(MorError::DimensionMismatch(format!(
            "state has length {}, basis has {} rows",
            x0.len(),
            basis.dim()
        )));
    }
    let xn = x0.norm();
    let z0 = if basis.n0() == 0 {
        Vector::zeros(0)
    } else {
        let qr = basis.matrix().clone().qr();
        let rhs = qr.q().tr_mul(x0);
        qr.r()
            .solve_upper_triangular(&rhs)
            .ok_or(MorError::RankDeficient { ratio: 0.0 })?
    };
    let residual = (basis.matrix() * &z0 - x0).norm();
    if residual > 1e-8 * xn {
        return Err(MorError::NotInSubspace {
            residual: residual / xn,
        });
    }
    Ok(z0)
}

/// Basis of standard unit vectors `e_i` for the 1-based `indices`.
pub fn unit_vector_basis(n: usize, indices: &[usize]) -> Result<InitialConditionBasis> {
    let mut seen = HashSet::new();
    let mut x0 = Mat::zeros(n, indices.len());
    for (j, &i) in indices.iter().enumerate() {
        if i == 0 || i > n {
            return Err(MorError::IndexOutOfRange { index: i, n });
        }
        if !seen.insert(i) {
            return Err(MorError::InvalidParameter(format!(
                "duplicate basis index {i}"
            )));
        }
        x0[(i - 1, j)] = 1.0;
    }
    InitialConditionBasis::new(x0)
}
