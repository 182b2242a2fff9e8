//! Spectrum of the pencil L - lambda*C, kernel bases, and the hypothesis
//! certificates: (H2) odd kernel dimension and (H3) transversality
//! Im T intersect C(Ker T) = {0}.
//!
//! Eigenvalues are recovered through the resolvent transform: for an invertible
//! L - lambda_hat*C, the eigenvalues of the problem are lambda_hat + 1/mu where
//! mu runs over the nonzero real eigenvalues of (L - lambda_hat*C)^{-1} C.
//! Algebraic multiplicities are the cluster sizes of that eigenvalue list.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{Pencil, CONDITION_CEILING};

/// Relative singular-value tolerance for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Radius for clustering resolvent eigenvalues into one pencil eigenvalue.
pub const CLUSTER_RADIUS: f64 = 1e-6;

/// Principal-angle threshold for the transversality certificate (radians).
pub const ANGLE_TOL: f64 = 1e-6;

/// Lower bound on the smallest singular value of C restricted to a kernel
/// basis (injectivity of C on kernels).
pub const KERNEL_INJECTIVITY_TOL: f64 = 1e-10;

/// One eigenvalue of the pencil with its kernel data.
#[derive(Clone, Debug)]
pub struct EigenvalueInfo {
    pub lambda: f64,
    pub geometric_mult: usize,
    pub algebraic_mult: usize,
    /// Orthonormal basis of Ker(L - lambda*C), one column per dimension.
    pub kernel_basis: DMatrix<f64>,
}

/// Dimension of the eigensphere S_lambda: kernel dimension minus one.
pub fn eigensphere_dim(info: &EigenvalueInfo) -> usize {
    info.geometric_mult - 1
}

/// Orthonormal bases of the splittings G = G1 + G2 and H = H1 + H2 with
/// G1 = (Ker T)-perp, G2 = Ker T, H1 = Im T, H2 = C(Ker T).
#[derive(Clone, Debug)]
pub struct SubspaceSplitting {
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
}

/// Per-eigenvalue record of the hypotheses of the degree theorems.
#[derive(Clone, Debug)]
pub struct HypothesisCertificate {
    pub lambda_star: f64,
    /// Copied from the pencil metadata (H1).
    pub h1_compact: bool,
    /// Kernel dimension is odd (H2).
    pub h2_odd: bool,
    /// Smallest principal angle between Im T and C(Ker T), radians.
    pub h3_residual: f64,
    /// The intersection Im T and C(Ker T) is trivial (H3).
    pub h3_holds: bool,
    pub geometric_mult: usize,
    pub splitting: SubspaceSplitting,
}

impl HypothesisCertificate {
    /// Simple eigenpoint criterion: one-dimensional kernel with Cx* outside
    /// Im T.
    pub fn is_simple(&self) -> bool {
        self.geometric_mult == 1 && self.h3_holds
    }
}

/// The window point maximizing the smallest singular value of L - lambda*C,
/// used as the resolvent base point lambda_hat.
pub fn best_lambda_hat(pencil: &Pencil, window: (f64, f64)) -> Result<f64> {
    let (a, b) = window;
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |lambda: f64| {
        let sv = linalg::smallest_singular_value(&pencil.matrix_at(lambda));
        match best {
            Some((_, s0)) if s0 >= sv => {}
            _ => best = Some((lambda, sv)),
        }
    };
    for j in 0..=40 {
        consider(a + (b - a) * (j as f64) / 40.0);
    }
    consider(pencil.default_lambda_hat());
    let (lambda_hat, sv) = best.unwrap();
    let m = pencil.matrix_at(lambda_hat);
    if sv <= 0.0 || linalg::condition_number(&m) >= CONDITION_CEILING {
        return Err(Error::DegeneratePencil(
            "no invertible resolvent base point found in the window".to_string(),
        ));
    }
    Ok(lambda_hat)
}

/// Orthonormal basis of the numerical kernel of L - lambda*C; empty when
/// lambda is not an eigenvalue.
pub fn kernel_basis(pencil: &Pencil, lambda: f64) -> DMatrix<f64> {
    let m = pencil.matrix_at(lambda);
    linalg::kernel_at_tolerance(&m, RANK_REL_TOL * pencil.scale_at(lambda))
}

/// All eigenvalues of the pencil in the window, sorted ascending.
///
/// Eigenvalues within `CLUSTER_RADIUS` of a window endpoint are included (the
/// window is expanded by the cluster tolerance rather than failing).
pub fn pencil_eigenvalues(pencil: &Pencil, window: (f64, f64)) -> Result<Vec<EigenvalueInfo>> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::Precondition(format!("window [{a}, {b}] is empty")));
    }
    let lambda_hat = best_lambda_hat(pencil, window)?;
    let m_hat = pencil.matrix_at(lambda_hat);
    let inv = m_hat.lu().try_inverse().ok_or_else(|| {
        Error::DegeneratePencil("resolvent base point is numerically singular".to_string())
    })?;
    let resolvent = inv * pencil.c();
    let mu = resolvent.complex_eigenvalues();

    let mut lambdas: Vec<f64> = Vec::new();
    for m in mu.iter() {
        if m.norm() < 1e-14 {
            continue; // characteristic value at infinity
        }
        let lambda = lambda_hat + (1.0 / m).re;
        let imag = (1.0 / m).im;
        if imag.abs() > 1e-8 * (1.0 + lambda.abs()) {
            continue; // genuinely complex, out of scope
        }
        if lambda >= a - CLUSTER_RADIUS && lambda <= b + CLUSTER_RADIUS {
            lambdas.push(lambda);
        }
    }
    lambdas.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut infos = Vec::new();
    let mut i = 0;
    while i < lambdas.len() {
        let mut j = i + 1;
        while j < lambdas.len() && lambdas[j] - lambdas[j - 1] <= CLUSTER_RADIUS {
            j += 1;
        }
        let cluster = &lambdas[i..j];
        let algebraic_mult = cluster.len();
        let lambda0 = cluster.iter().sum::<f64>() / algebraic_mult as f64;
        i = j;

        let kernel0 = kernel_basis(pencil, lambda0);
        if kernel0.ncols() == 0 {
            continue; // spurious cluster (complex pair straddling the axis)
        }
        // One Rayleigh polish pass sharpens lambda for non-diagonal pencils.
        let lambda1 = rayleigh_polish(pencil, &kernel0, lambda0);
        let kernel1 = kernel_basis(pencil, lambda1);
        let (lambda, kernel) = if kernel1.ncols() >= kernel0.ncols() {
            (lambda1, kernel1)
        } else {
            (lambda0, kernel0)
        };

        // Injectivity of C on the kernel (a standing consequence of pencil
        // validity); failure means the pencil data is inconsistent.
        let c_kernel = pencil.c() * &kernel;
        if linalg::smallest_singular_value(&c_kernel) <= KERNEL_INJECTIVITY_TOL {
            return Err(Error::DegeneratePencil(format!(
                "C is not injective on the kernel at lambda = {lambda}"
            )));
        }

        infos.push(EigenvalueInfo {
            lambda,
            geometric_mult: kernel.ncols(),
            algebraic_mult,
            kernel_basis: kernel,
        });
    }
    Ok(infos)
}

fn rayleigh_polish(pencil: &Pencil, kernel: &DMatrix<f64>, lambda0: f64) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for j in 0..kernel.ncols() {
        let v: DVector<f64> = kernel.column(j).into();
        let cv = pencil.c() * &v;
        let lv = pencil.l() * &v;
        let denom = cv.dot(&cv);
        if denom > 1e-300 {
            acc += cv.dot(&lv) / denom;
            count += 1;
        }
    }
    if count == 0 {
        lambda0
    } else {
        acc / count as f64
    }
}

/// The hypothesis certificate at an eigenvalue lambda*.
pub fn certify(pencil: &Pencil, lambda_star: f64) -> Result<HypothesisCertificate> {
    let n = pencil.dim();
    let t = pencil.matrix_at(lambda_star);
    let scale = pencil.scale_at(lambda_star);
    let tol = RANK_REL_TOL * scale;

    let svd = t.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v");

    let mut g1_cols: Vec<DVector<f64>> = Vec::new();
    let mut g2_cols: Vec<DVector<f64>> = Vec::new();
    let mut h1_cols: Vec<DVector<f64>> = Vec::new();
    for (idx, sv) in svd.singular_values.iter().enumerate() {
        if *sv <= tol {
            g2_cols.push(v_t.row(idx).transpose());
        } else {
            g1_cols.push(v_t.row(idx).transpose());
            h1_cols.push(u.column(idx).into());
        }
    }
    if g2_cols.is_empty() {
        return Err(Error::NotAnEigenvalue {
            lambda: lambda_star,
        });
    }
    let g2 = DMatrix::from_columns(&g2_cols);
    let g1 = if g1_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&g1_cols)
    };
    let h1 = if h1_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&h1_cols)
    };

    let c_g2 = pencil.c() * &g2;
    if linalg::smallest_singular_value(&c_g2) <= KERNEL_INJECTIVITY_TOL {
        return Err(Error::DegeneratePencil(format!(
            "C is not injective on the kernel at lambda = {lambda_star}"
        )));
    }
    let h2 = linalg::orthonormal_columns(&c_g2, 1e-12);

    let h3_residual = linalg::smallest_principal_angle(&h1, &h2);
    let full_rank = linalg::rank_of_concat(&h1, &h2, RANK_REL_TOL) == n;
    let h3_holds = h3_residual > ANGLE_TOL && full_rank;

    Ok(HypothesisCertificate {
        lambda_star,
        h1_compact: pencil.compact_c(),
        h2_odd: g2.ncols() % 2 == 1,
        h3_residual,
        h3_holds,
        geometric_mult: g2.ncols(),
        splitting: SubspaceSplitting { g1, g2, h1, h2 },
    })
}
