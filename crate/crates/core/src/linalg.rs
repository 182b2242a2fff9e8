//! Dense linear-algebra helpers shared across the crate: tolerant determinant
//! signs, numerical kernels, principal angles, and tangent frames on the sphere.

use nalgebra::{DMatrix, DVector};

/// Relative singularity tolerance for LU-based determinant-sign decisions.
pub const DET_SING_REL_TOL: f64 = 1e-12;

/// Relative singular-value tolerance used when extracting null spaces of
/// rectangular (extended) Jacobians.
pub const NULLSPACE_REL_TOL: f64 = 1e-8;

/// Sign of `det(m)` decided by LU with partial pivoting.
///
/// Returns 0 when any pivot falls below `DET_SING_REL_TOL * ||m||_F`, i.e. the
/// matrix is singular at working precision.
pub fn det_sign(m: &DMatrix<f64>) -> i32 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "det_sign requires a square matrix");
    if n == 0 {
        return 1;
    }
    let scale = m.norm();
    if scale == 0.0 || !scale.is_finite() {
        return 0;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut sign: f64 = lu.p().determinant();
    for i in 0..n {
        let d = u[(i, i)];
        if d.abs() <= DET_SING_REL_TOL * scale {
            return 0;
        }
        if d < 0.0 {
            sign = -sign;
        }
    }
    if sign > 0.0 {
        1
    } else {
        -1
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(0.0, f64::max)
}

/// Smallest singular value.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Condition number sigma_max / sigma_min; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Orthonormal basis of the numerical kernel of `m` at the absolute singular
/// value threshold `tol`. Returns an `n x 0` matrix when the kernel is trivial.
pub fn kernel_at_tolerance(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd with v requested");
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for (i, sv) in svd.singular_values.iter().enumerate() {
        if *sv <= tol {
            cols.push(v_t.row(i).transpose());
        }
    }
    // A wide/square SVD lists min(r, c) singular values; any remaining
    // directions of the domain are exact kernel vectors.
    for i in svd.singular_values.len()..n {
        cols.push(v_t.row(i).transpose());
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the null space of a (possibly rectangular) matrix.
/// Rows are zero-padded so the full right singular basis is available.
pub fn nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let square = if r >= c {
        m.clone()
    } else {
        let mut padded = DMatrix::zeros(c, c);
        padded.view_mut((0, 0), (r, c)).copy_from(m);
        padded
    };
    let sigma_max = spectral_norm(&square).max(1.0);
    kernel_at_tolerance(&square, NULLSPACE_REL_TOL * sigma_max)
}

/// Orthonormalize the columns of `m` (thin QR). Columns whose component
/// orthogonal to the previous ones falls below `tol` are dropped.
pub fn orthonormal_columns(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: DVector<f64> = m.column(j).into();
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        // second Gram-Schmidt pass for orthogonality at working precision
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v / norm);
        }
    }
    if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// Smallest principal angle (radians) between the column spans of two
/// orthonormal bases. The largest singular value of `a^T b` is the cosine of
/// the smallest angle.
pub fn smallest_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || b.ncols() == 0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let product = a.transpose() * b;
    let sigma_max = spectral_norm(&product);
    sigma_max.clamp(-1.0, 1.0).acos()
}

/// Rank of `[a | b]` at a relative singular value tolerance.
pub fn rank_of_concat(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> usize {
    let n = a.nrows();
    let total = a.ncols() + b.ncols();
    let mut m = DMatrix::zeros(n, total);
    m.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    m.view_mut((0, a.ncols()), (n, b.ncols())).copy_from(b);
    let sv = m.svd(false, false).singular_values;
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * sigma_max).count()
}

/// Deterministic orthonormal tangent frame at a unit vector `x` on S^{n-1}.
///
/// The columns v_1..v_{n-1} span the tangent space x-perp, are produced by the
/// Householder reflector sending x to a signed first axis, and are sign-fixed
/// so that det[x | v_1 | ... | v_{n-1}] > 0 (outward-normal-first rule).
pub fn tangent_frame(x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    assert!(n >= 2, "tangent frame requires ambient dimension >= 2");
    let s = if x[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = x.clone();
    u[0] += s * x.norm();
    let beta = 2.0 / u.norm_squared();
    let mut frame = DMatrix::zeros(n, n - 1);
    for j in 1..n {
        let mut col = &u * (-beta * u[j]);
        col[j] += 1.0;
        frame.set_column(j - 1, &col);
    }
    // det[x | Q e_2 | ... | Q e_n] = s, so flip one column when s < 0.
    if s < 0.0 {
        frame.column_mut(0).neg_mut();
    }
    frame
}

/// Solve `j * delta = rhs`, falling back to an SVD least-squares solve when
/// the LU factorization is singular.
pub fn solve_or_least_squares(j: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if j.is_square() {
        if let Some(sol) = j.clone().lu().solve(rhs) {
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
    }
    let svd = j.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return None;
    }
    svd.solve(rhs, 1e-12 * sigma_max).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_sign_basics() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(det_sign(&id), 1);
        let mut neg = id.clone();
        neg[(0, 0)] = -2.0;
        assert_eq!(det_sign(&neg), -1);
        let sing = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0]));
        assert_eq!(det_sign(&sing), 0);
    }

    #[test]
    fn kernel_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 0.0, 2.0]));
        let k = kernel_at_tolerance(&m, 1e-10);
        assert_eq!(k.ncols(), 2);
        for j in 0..k.ncols() {
            assert!((m.clone() * k.column(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn tangent_frame_is_oriented() {
        for xdata in [
            vec![1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.6, -0.8, 0.0],
            vec![-0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2],
        ] {
            let x = DVector::from_vec(xdata);
            let x = &x / x.norm();
            let frame = tangent_frame(&x);
            let n = x.len();
            let mut full = DMatrix::zeros(n, n);
            full.set_column(0, &x);
            for j in 0..n - 1 {
                let col: DVector<f64> = frame.column(j).into();
                assert!(x.dot(&col).abs() < 1e-12);
                full.set_column(j + 1, &col);
            }
            assert_eq!(det_sign(&full), 1);
        }
    }

    #[test]
    fn principal_angle_orthogonal_subspaces() {
        let a = DMatrix::from_columns(&[DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])]);
        let b = DMatrix::from_columns(&[DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0])]);
        let angle = smallest_principal_angle(&a, &b);
        assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let angle_same = smallest_principal_angle(&a, &a);
        assert!(angle_same < 1e-7);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        // 1x3 row [1, 1, 0] has a 2-dimensional null space.
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&m);
        assert_eq!(ns.ncols(), 2);
        for j in 0..2 {
            assert!((m.clone() * ns.column(j)).norm() < 1e-10);
        }
    }
}
