//! Topological degree of psi on subsets (alpha, beta) x S of the cylinder:
//! oriented signs at simple eigenpoints, eigenset contributions through the
//! epsilon-perturbation of the kernel block, Leray-Schauder sign tracking, and
//! the endpoint-sign conjecture experiment.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, det_sign};
use crate::operator::Pencil;
use crate::spectrum::{self, certify, pencil_eigenvalues, CLUSTER_RADIUS};

/// Maximum number of epsilon halvings before giving up.
const MAX_EPSILON_HALVINGS: usize = 40;

/// Orientation data for the cylinder R x S^{n-1}.
///
/// The sphere rule is fixed: a tangent basis (v_1, ..., v_{n-1}) at x is
/// positive iff det[x | v_1 | ... | v_{n-1}] > 0, and cylinder bases are
/// ordered (d/d-lambda, v_1, ..., v_{n-1}). `global_sign` selects one of the
/// two orientations of psi.
#[derive(Clone, Copy, Debug)]
pub struct OrientationConvention {
    pub global_sign: i32,
}

impl Default for OrientationConvention {
    fn default() -> Self {
        OrientationConvention { global_sign: 1 }
    }
}

impl OrientationConvention {
    pub fn flipped(self) -> Self {
        OrientationConvention {
            global_sign: -self.global_sign,
        }
    }
}

/// How an eigenset contribution was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMethod {
    ComputationFormula,
    EpsilonPerturbation,
}

/// Degree of psi on an interval, with the endpoint LS signs.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub alpha: f64,
    pub beta: f64,
    pub value: i64,
    pub method: DegreeMethod,
    pub ls_sign_alpha: i32,
    pub ls_sign_beta: i32,
    /// Eigenvalues found in (alpha, beta) with their contributions.
    pub eigensets_found: Vec<(f64, i64)>,
}

/// Outcome of the endpoint-sign conjecture experiment on one interval.
#[derive(Clone, Debug, Serialize)]
pub struct ConjectureRecord {
    pub alpha: f64,
    pub beta: f64,
    pub degree_value: i64,
    pub deg_nonzero: bool,
    pub ls_sign_alpha: i32,
    pub ls_sign_beta: i32,
    pub endpoint_signs_differ: bool,
    pub agree: bool,
}

/// Sign of det(I - (lambda - lambda_hat) (L - lambda_hat C)^{-1} C), the
/// Leray-Schauder degree of the compact vector field on the unit ball.
pub fn ls_sign(pencil: &Pencil, lambda_hat: f64, lambda: f64) -> Result<i32> {
    let m_hat = pencil.matrix_at(lambda_hat);
    if det_sign(&m_hat) == 0 {
        return Err(Error::SingularArgument { lambda: lambda_hat });
    }
    let inv = m_hat
        .lu()
        .try_inverse()
        .ok_or(Error::SingularArgument { lambda: lambda_hat })?;
    let n = pencil.dim();
    let m = DMatrix::identity(n, n) - (lambda - lambda_hat) * (inv * pencil.c());
    match det_sign(&m) {
        0 => Err(Error::SingularArgument { lambda }),
        s => Ok(s),
    }
}

/// Oriented Brouwer sign of the differential of psi at a simple eigenpoint
/// (lambda, x): the determinant of d-psi on the positively oriented tangent
/// basis of the cylinder, times the global orientation sign.
///
/// d-psi(lambda-dot, x-dot) = (L - lambda C) x-dot - lambda-dot C x.
pub fn simple_eigenpoint_sign(
    pencil: &Pencil,
    lambda: f64,
    x: &DVector<f64>,
    conv: OrientationConvention,
) -> Result<i32> {
    pencil.check_unit(x)?;
    let n = pencil.dim();
    let frame = linalg::tangent_frame(x);
    let a = pencil.matrix_at(lambda);
    let mut m = DMatrix::zeros(n, n);
    m.set_column(0, &(-(pencil.c() * x)));
    for j in 0..n - 1 {
        let v: DVector<f64> = frame.column(j).into();
        m.set_column(j + 1, &(&a * v));
    }
    match det_sign(&m) {
        0 => Err(Error::DegenerateDifferential { lambda }),
        s => Ok(s * conv.global_sign.signum()),
    }
}

/// Contribution of the eigenset {lambda*} x S_lambda* to the degree of psi on
/// (alpha, beta) x S. Simple eigenvalues use the computation formula over the
/// twin eigenpoints; multiple eigenvalues go through the epsilon-perturbed
/// family, with the value required to be stable under one epsilon halving.
pub fn eigenset_contribution(
    pencil: &Pencil,
    lambda_star: f64,
    interval: (f64, f64),
    conv: OrientationConvention,
) -> Result<i64> {
    eigenset_contribution_detailed(pencil, lambda_star, interval, conv, None).map(|r| r.0)
}

pub fn eigenset_contribution_detailed(
    pencil: &Pencil,
    lambda_star: f64,
    interval: (f64, f64),
    conv: OrientationConvention,
    epsilon: Option<f64>,
) -> Result<(i64, DegreeMethod)> {
    let (alpha, beta) = interval;
    if !(alpha < lambda_star && lambda_star < beta) {
        return Err(Error::NonIsolatingInterval {
            lambda: lambda_star,
            alpha,
            beta,
        });
    }
    let margin = beta - alpha;
    let wide = pencil_eigenvalues(pencil, (alpha - margin, beta + margin))?;
    for info in &wide {
        if (info.lambda - alpha).abs() <= CLUSTER_RADIUS {
            return Err(Error::EndpointCollision { lambda: alpha });
        }
        if (info.lambda - beta).abs() <= CLUSTER_RADIUS {
            return Err(Error::EndpointCollision { lambda: beta });
        }
    }
    let inside: Vec<_> = wide
        .iter()
        .filter(|i| i.lambda > alpha && i.lambda < beta)
        .collect();
    if inside.len() != 1 || (inside[0].lambda - lambda_star).abs() > CLUSTER_RADIUS {
        return Err(Error::NonIsolatingInterval {
            lambda: lambda_star,
            alpha,
            beta,
        });
    }
    let lambda_star = inside[0].lambda;

    let cert = certify(pencil, lambda_star)?;
    if !cert.h3_holds {
        return Err(Error::TransversalityFailed {
            lambda: lambda_star,
        });
    }

    if cert.geometric_mult == 1 {
        let x: DVector<f64> = cert.splitting.g2.column(0).into();
        let s1 = simple_eigenpoint_sign(pencil, lambda_star, &x, conv)?;
        let s2 = simple_eigenpoint_sign(pencil, lambda_star, &(-&x), conv)?;
        return Ok((
            i64::from(s1) + i64::from(s2),
            DegreeMethod::ComputationFormula,
        ));
    }

    // Initial epsilon: a tenth of the room inside the isolating interval and
    // of the gap to the nearest other eigenvalue.
    let gap = wide
        .iter()
        .filter(|i| (i.lambda - lambda_star).abs() > CLUSTER_RADIUS)
        .map(|i| (i.lambda - lambda_star).abs())
        .fold(f64::INFINITY, f64::min);
    let mut eps =
        epsilon.unwrap_or_else(|| (beta - lambda_star).min(lambda_star - alpha).min(gap) / 10.0);

    for halving in 0..MAX_EPSILON_HALVINGS {
        let v1 = epsilon_contribution(pencil, &cert, lambda_star, interval, conv, eps);
        let v2 = epsilon_contribution(pencil, &cert, lambda_star, interval, conv, eps / 2.0);
        match (v1, v2) {
            (Ok(a), Ok(b)) if a == b => {
                return Ok((a, DegreeMethod::EpsilonPerturbation));
            }
            _ => {
                eps /= 2.0;
                if halving == MAX_EPSILON_HALVINGS - 1 {
                    return Err(Error::EpsilonExhausted {
                        lambda: lambda_star,
                        halvings: MAX_EPSILON_HALVINGS,
                    });
                }
            }
        }
    }
    Err(Error::EpsilonExhausted {
        lambda: lambda_star,
        halvings: MAX_EPSILON_HALVINGS,
    })
}

/// One evaluation of the epsilon-perturbed family: replace the kernel block
/// lambda* I by A-eps = diag(lambda* + eps j/(m+1)) in the split coordinates,
/// sum the twin contributions over the resulting simple eigensets, and convert
/// back through the block isomorphism Z.
fn epsilon_contribution(
    pencil: &Pencil,
    cert: &spectrum::HypothesisCertificate,
    lambda_star: f64,
    interval: (f64, f64),
    conv: OrientationConvention,
    eps: f64,
) -> Result<i64> {
    let (alpha, beta) = interval;
    let n = pencil.dim();
    let split = &cert.splitting;
    let m = cert.geometric_mult;
    let r = n - m;

    // Basis matrices: Q_G orthogonal, Q_H invertible by H3.
    let mut q_g = DMatrix::zeros(n, n);
    q_g.view_mut((0, 0), (n, r)).copy_from(&split.g1);
    q_g.view_mut((0, r), (n, m)).copy_from(&split.g2);
    let mut q_h = DMatrix::zeros(n, n);
    q_h.view_mut((0, 0), (n, r)).copy_from(&split.h1);
    q_h.view_mut((0, r), (n, m)).copy_from(&split.h2);
    let q_h_inv = q_h
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::TransversalityFailed {
            lambda: lambda_star,
        })?;

    let t = pencil.matrix_at(lambda_star);
    let t_split = &q_h_inv * &t * &q_g;
    let c_split = &q_h_inv * pencil.c() * &q_g;

    let t11 = t_split.view((0, 0), (r, r)).clone_owned();
    let c22 = c_split.view((r, r), (m, m)).clone_owned();
    let t11_inv = t11.lu().try_inverse().ok_or(Error::TransversalityFailed {
        lambda: lambda_star,
    })?;
    let c22_inv = c22.lu().try_inverse().ok_or(Error::DegeneratePencil(
        "C restricted to the kernel is numerically singular".to_string(),
    ))?;

    let mut z_split = DMatrix::zeros(n, n);
    z_split.view_mut((0, 0), (r, r)).copy_from(&t11_inv);
    z_split.view_mut((r, r), (m, m)).copy_from(&c22_inv);

    let c_hat = &z_split * &c_split;
    let c_hat_11 = c_hat.view((0, 0), (r, r)).clone_owned();
    let c_hat_21 = c_hat.view((r, 0), (m, r)).clone_owned();

    // Perturbed kernel block with distinct simple eigenvalues within eps.
    let mut a_eps = DMatrix::zeros(m, m);
    let mut targets = Vec::with_capacity(m);
    for j in 0..m {
        let delta = eps * (j as f64 + 1.0) / (m as f64 + 1.0);
        a_eps[(j, j)] = lambda_star + delta;
        targets.push(lambda_star + delta);
    }

    // eta-eps is the linear pencil family L-tilde - lambda C-tilde in the
    // split coordinates.
    let mut l_tilde = DMatrix::zeros(n, n);
    l_tilde
        .view_mut((0, 0), (r, r))
        .copy_from(&(DMatrix::identity(r, r) + lambda_star * &c_hat_11));
    l_tilde
        .view_mut((r, 0), (m, r))
        .copy_from(&(lambda_star * &c_hat_21));
    l_tilde.view_mut((r, r), (m, m)).copy_from(&a_eps);

    let mut c_tilde = DMatrix::zeros(n, n);
    c_tilde.view_mut((0, 0), (r, r)).copy_from(&c_hat_11);
    c_tilde.view_mut((r, 0), (m, r)).copy_from(&c_hat_21);
    c_tilde
        .view_mut((r, r), (m, m))
        .copy_from(&DMatrix::identity(m, m));

    let l_eps = &q_g * &l_tilde * q_g.transpose();
    let c_eps = &q_g * &c_tilde * q_g.transpose();
    let eps_pencil = Pencil::new(l_eps, c_eps, pencil.compact_c())?;

    // The degree of eta = Z psi in fixed coordinates differs from the degree
    // of psi by the sign of det Z.
    let z_ambient = &q_g * &z_split * &q_h_inv;
    let sign_z = det_sign(&z_ambient);
    if sign_z == 0 {
        return Err(Error::TransversalityFailed {
            lambda: lambda_star,
        });
    }

    // All perturbed eigenvalues in (alpha, beta) must be exactly the simple
    // targets lambda* + delta_j.
    let infos = pencil_eigenvalues(&eps_pencil, (alpha, beta))?;
    let inside: Vec<_> = infos
        .iter()
        .filter(|i| i.lambda > alpha && i.lambda < beta)
        .collect();
    if inside.len() != m {
        return Err(Error::Precondition(format!(
            "epsilon pencil has {} eigenvalues in the interval, expected {m}",
            inside.len()
        )));
    }
    let mut total = 0i64;
    for (info, target) in inside.iter().zip(targets.iter()) {
        if info.geometric_mult != 1 || (info.lambda - target).abs() > 1e-7 * (1.0 + eps) {
            return Err(Error::Precondition(
                "perturbed eigenvalue is not a simple eigenvalue at its target".to_string(),
            ));
        }
        let x: DVector<f64> = info.kernel_basis.column(0).into();
        let s1 = simple_eigenpoint_sign(&eps_pencil, info.lambda, &x, conv)?;
        let s2 = simple_eigenpoint_sign(&eps_pencil, info.lambda, &(-&x), conv)?;
        total += i64::from(s1) + i64::from(s2);
    }
    Ok(i64::from(sign_z) * total)
}

/// Degree of psi on (alpha, beta) x S by additivity over isolating
/// subintervals, with the LS signs recorded at both endpoints.
pub fn degree_on_interval(
    pencil: &Pencil,
    alpha: f64,
    beta: f64,
    conv: OrientationConvention,
) -> Result<DegreeReport> {
    degree_on_interval_with(pencil, alpha, beta, conv, None, None)
}

pub fn degree_on_interval_with(
    pencil: &Pencil,
    alpha: f64,
    beta: f64,
    conv: OrientationConvention,
    lambda_hat: Option<f64>,
    epsilon: Option<f64>,
) -> Result<DegreeReport> {
    if !(alpha < beta) {
        return Err(Error::Precondition(format!(
            "degenerate interval [{alpha}, {beta}]"
        )));
    }
    let margin = (beta - alpha).max(1.0);
    let wide = pencil_eigenvalues(pencil, (alpha - margin, beta + margin))?;
    for info in &wide {
        if (info.lambda - alpha).abs() <= CLUSTER_RADIUS {
            return Err(Error::EndpointCollision { lambda: alpha });
        }
        if (info.lambda - beta).abs() <= CLUSTER_RADIUS {
            return Err(Error::EndpointCollision { lambda: beta });
        }
    }
    let inside: Vec<f64> = wide
        .iter()
        .map(|i| i.lambda)
        .filter(|l| *l > alpha && *l < beta)
        .collect();

    // Isolating partition: midpoints between consecutive eigenvalues.
    let mut boundaries = vec![alpha];
    for w in inside.windows(2) {
        boundaries.push(0.5 * (w[0] + w[1]));
    }
    boundaries.push(beta);

    let mut eigensets_found = Vec::new();
    let mut value = 0i64;
    let mut method = DegreeMethod::ComputationFormula;
    for (idx, lambda_star) in inside.iter().enumerate() {
        let sub = (boundaries[idx], boundaries[idx + 1]);
        let (contribution, m) =
            eigenset_contribution_detailed(pencil, *lambda_star, sub, conv, epsilon)?;
        if m == DegreeMethod::EpsilonPerturbation {
            method = DegreeMethod::EpsilonPerturbation;
        }
        value += contribution;
        eigensets_found.push((*lambda_star, contribution));
    }

    let lh = match lambda_hat {
        Some(v) => v,
        None => spectrum::best_lambda_hat(pencil, (alpha, beta))?,
    };
    let ls_sign_alpha = ls_sign(pencil, lh, alpha)?;
    let ls_sign_beta = ls_sign(pencil, lh, beta)?;

    Ok(DegreeReport {
        alpha,
        beta,
        value,
        method,
        ls_sign_alpha,
        ls_sign_beta,
        eigensets_found,
    })
}

/// Compares deg(psi) != 0 against the endpoint LS-sign jump on one interval.
/// Records whether the two sides agree; never asserts the conjecture.
pub fn conjecture_check(
    pencil: &Pencil,
    alpha: f64,
    beta: f64,
    conv: OrientationConvention,
) -> Result<ConjectureRecord> {
    let report = degree_on_interval(pencil, alpha, beta, conv)?;
    let deg_nonzero = report.value != 0;
    let endpoint_signs_differ = report.ls_sign_alpha != report.ls_sign_beta;
    Ok(ConjectureRecord {
        alpha,
        beta,
        degree_value: report.value,
        deg_nonzero,
        ls_sign_alpha: report.ls_sign_alpha,
        ls_sign_beta: report.ls_sign_beta,
        endpoint_signs_differ,
        agree: deg_nonzero == endpoint_signs_differ,
    })
}
