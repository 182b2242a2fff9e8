//! Finite-dimensional representations of the operators L, C, N and of the maps
//! psi(lambda, x) = Lx - lambda*Cx and psi_plus(s, lambda, x) = psi + s*N(x),
//! together with the builders for the diagonal example family.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on |norm(x) - 1| for inputs constrained to the unit sphere.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Condition-number ceiling below which L - lambda*C counts as invertible
/// during the construction scan.
pub const CONDITION_CEILING: f64 = 1e12;

/// Seed for the deterministic random checks run by `Perturbation` constructors.
const VALIDATION_SEED: u64 = 0x5eed_0001;

const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-5;

/// The operator pair (L, C) on an n-dimensional truncation.
///
/// Construction scans a lambda grid and rejects pairs for which L - lambda*C
/// is never invertible (condition number below `CONDITION_CEILING`), the
/// standing assumption of the whole theory.
#[derive(Clone, Debug)]
pub struct Pencil {
    dim: usize,
    l: DMatrix<f64>,
    c: DMatrix<f64>,
    compact_c: bool,
    lambda_hat0: f64,
    l_norm: f64,
    c_norm: f64,
}

impl Pencil {
    pub fn new(l: DMatrix<f64>, c: DMatrix<f64>, compact_c: bool) -> Result<Self> {
        let dim = l.nrows();
        if l.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: l.ncols(),
            });
        }
        if c.nrows() != dim || c.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.nrows(),
            });
        }
        if dim < 2 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "the truncation dimension must be greater than 1",
            });
        }

        // Invertibility scan: 65 grid points over [-10, 10].
        let mut best: Option<(f64, f64)> = None;
        for j in 0..=64 {
            let lambda = -10.0 + 20.0 * (j as f64) / 64.0;
            let m = &l - lambda * &c;
            let cond = linalg::condition_number(&m);
            if cond < CONDITION_CEILING {
                match best {
                    Some((_, c0)) if c0 <= cond => {}
                    _ => best = Some((lambda, cond)),
                }
            }
        }
        let (lambda_hat0, _) = best.ok_or_else(|| {
            Error::DegeneratePencil(
                "L - lambda*C is singular on the whole scanned grid".to_string(),
            )
        })?;
        let l_norm = linalg::spectral_norm(&l);
        let c_norm = linalg::spectral_norm(&c);
        Ok(Pencil {
            dim,
            l,
            c,
            compact_c,
            lambda_hat0,
            l_norm,
            c_norm,
        })
    }

    /// The diagonal example pencil (T_k, diag(1, 1/2, ..., 1/n)).
    pub fn tk_harmonic(k: usize, n: usize) -> Result<Self> {
        Pencil::new(build_tk(k, n)?, build_c(n)?, true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Declarative metadata: the represented infinite-dimensional C is compact.
    pub fn compact_c(&self) -> bool {
        self.compact_c
    }

    /// A lambda at which L - lambda*C was best conditioned during the
    /// construction scan.
    pub fn default_lambda_hat(&self) -> f64 {
        self.lambda_hat0
    }

    /// The matrix L - lambda*C.
    pub fn matrix_at(&self, lambda: f64) -> DMatrix<f64> {
        &self.l - lambda * &self.c
    }

    /// Scale ||L|| + |lambda| * ||C|| used by residual and rank tolerances.
    pub fn scale_at(&self, lambda: f64) -> f64 {
        self.l_norm + lambda.abs() * self.c_norm
    }

    /// psi(lambda, x) = Lx - lambda*Cx for x on the unit sphere.
    pub fn psi(&self, lambda: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_unit(x)?;
        Ok(&self.l * x - lambda * (&self.c * x))
    }

    pub(crate) fn check_unit(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let norm = x.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(())
    }
}

type EvalFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type DerivFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A C^1 perturbation N on (a neighborhood of) the unit sphere, with its
/// derivative and, when N is linear, its matrix.
///
/// Constructors verify that `derivative` matches central finite differences of
/// `evaluate` and, for linear maps, that `evaluate` agrees with the matrix on
/// random unit vectors; both checks use a fixed seed.
#[derive(Clone)]
pub struct Perturbation {
    dim: usize,
    eval: Arc<EvalFn>,
    deriv: Arc<DerivFn>,
    linear: Option<DMatrix<f64>>,
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation")
            .field("dim", &self.dim)
            .field("linear", &self.linear.is_some())
            .finish()
    }
}

impl Perturbation {
    /// Linear perturbation x -> m*x.
    pub fn linear(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.ncols(),
            });
        }
        let m_eval = m.clone();
        let m_deriv = m.clone();
        let p = Perturbation {
            dim,
            eval: Arc::new(move |x| &m_eval * x),
            deriv: Arc::new(move |_| m_deriv.clone()),
            linear: Some(m),
        };
        p.validate(VALIDATION_SEED)?;
        Ok(p)
    }

    /// General perturbation from evaluation and derivative closures. Both must
    /// accept ambient vectors in a neighborhood of the sphere.
    pub fn from_fns(
        dim: usize,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        deriv: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_fns_seeded(dim, eval, deriv, VALIDATION_SEED)
    }

    pub fn from_fns_seeded(
        dim: usize,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        deriv: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        seed: u64,
    ) -> Result<Self> {
        let p = Perturbation {
            dim,
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            linear: None,
        };
        p.validate(seed)?;
        Ok(p)
    }

    fn validate(&self, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(m) = &self.linear {
            for _ in 0..100 {
                let x = random_unit(self.dim, &mut rng);
                let by_eval = (self.eval)(&x);
                let by_matrix = m * &x;
                let err = (&by_eval - &by_matrix).norm();
                if err > 1e-12 * (1.0 + by_matrix.norm()) {
                    return Err(Error::PerturbationMismatch(format!(
                        "evaluate deviates from linear_matrix by {err:e}"
                    )));
                }
            }
        }
        for _ in 0..20 {
            let x = random_unit(self.dim, &mut rng);
            let jac = (self.deriv)(&x);
            if jac.nrows() != self.dim || jac.ncols() != self.dim {
                return Err(Error::PerturbationMismatch(
                    "derivative has wrong shape".to_string(),
                ));
            }
            let mut fd = DMatrix::zeros(self.dim, self.dim);
            for i in 0..self.dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += FD_STEP;
                xm[i] -= FD_STEP;
                let col = ((self.eval)(&xp) - (self.eval)(&xm)) / (2.0 * FD_STEP);
                fd.set_column(i, &col);
            }
            let err = (&jac - &fd).norm() / jac.norm().max(1.0);
            if err > FD_REL_TOL {
                return Err(Error::PerturbationMismatch(format!(
                    "derivative deviates from central finite differences by {err:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.deriv)(x)
    }

    pub fn linear_matrix(&self) -> Option<&DMatrix<f64>> {
        self.linear.as_ref()
    }

    /// Positively homogeneous extension |x| * N(x / |x|).
    ///
    /// At x = 0 the extension is taken to be 0, the positively homogeneous
    /// limit; continuity there is not claimed for nonlinear N.
    pub fn homogeneous_extension(&self, x: &DVector<f64>) -> DVector<f64> {
        let norm = x.norm();
        if norm == 0.0 {
            return DVector::zeros(self.dim);
        }
        (self.eval)(&(x / norm)) * norm
    }

    /// Ambient Jacobian of the homogeneous extension at x != 0:
    /// N(u) u^T + dN_u (I - u u^T) with u = x / |x|. Degree-zero homogeneous,
    /// so only derivative values on the sphere are used.
    pub fn extension_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let norm = x.norm();
        assert!(norm > 0.0, "extension jacobian undefined at 0");
        let u = x / norm;
        let nu = (self.eval)(&u);
        let du = (self.deriv)(&u);
        let projector = DMatrix::identity(self.dim, self.dim) - &u * u.transpose();
        nu * u.transpose() + du * projector
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 0.1 {
            return v / norm;
        }
    }
}

/// A pencil together with a perturbation of matching dimension.
#[derive(Clone, Debug)]
pub struct PerturbedProblem {
    pencil: Pencil,
    perturbation: Perturbation,
}

impl PerturbedProblem {
    pub fn new(pencil: Pencil, perturbation: Perturbation) -> Result<Self> {
        if pencil.dim() != perturbation.dim() {
            return Err(Error::DimensionMismatch {
                expected: pencil.dim(),
                got: perturbation.dim(),
            });
        }
        Ok(PerturbedProblem {
            pencil,
            perturbation,
        })
    }

    pub fn pencil(&self) -> &Pencil {
        &self.pencil
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    /// psi_plus(s, lambda, x) = Lx + s*N(x) - lambda*Cx for unit x.
    pub fn psi_plus(&self, s: f64, lambda: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let base = self.pencil.psi(lambda, x)?;
        Ok(base + s * self.perturbation.evaluate(x))
    }

    /// Ambient extension Lx + s*N_bar(x) - lambda*Cx, defined for any x.
    pub fn psi_plus_ambient(&self, s: f64, lambda: f64, x: &DVector<f64>) -> DVector<f64> {
        self.pencil.l() * x - lambda * (self.pencil.c() * x)
            + s * self.perturbation.homogeneous_extension(x)
    }

    /// Residual scale at (s, lambda): ||L|| + |lambda| ||C|| + |s| ||N|| with a
    /// unit floor.
    pub fn scale_at(&self, s: f64, lambda: f64) -> f64 {
        let n_scale = self
            .perturbation
            .linear_matrix()
            .map(linalg::spectral_norm)
            .unwrap_or(1.0);
        (self.pencil.scale_at(lambda) + s.abs() * n_scale).max(1.0)
    }
}

/// The diagonal operator with the first k entries 0 and the rest 1.
pub fn build_tk(k: usize, n: usize) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::InvalidTruncation { k, n });
    }
    if k >= n {
        return Err(Error::InvalidTruncation { k, n });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j && i >= k {
            1.0
        } else {
            0.0
        }
    }))
}

/// The compact diagonal operator diag(1, 1/2, ..., 1/n).
pub fn build_c(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "harmonic diagonal requires n >= 2",
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / (i as f64 + 1.0)
        } else {
            0.0
        }
    }))
}

/// The example perturbation (x1, x2, x3, x4, ...) -> (-x2, x1, -x4, x3, 0, ...).
pub fn build_paper_n(n: usize) -> Result<Perturbation> {
    if n < 4 {
        return Err(Error::InvalidTruncation { k: 4, n });
    }
    let mut m = DMatrix::zeros(n, n);
    m[(0, 1)] = -1.0;
    m[(1, 0)] = 1.0;
    m[(2, 3)] = -1.0;
    m[(3, 2)] = 1.0;
    Perturbation::linear(m)
}

/// The example problem T_k x + s N(x) = lambda C x at truncation n.
pub fn example_problem(k: usize, n: usize) -> Result<PerturbedProblem> {
    PerturbedProblem::new(Pencil::tk_harmonic(k, n)?, build_paper_n(n)?)
}
