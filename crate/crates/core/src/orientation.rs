//! Companion algebra in finite dimensions: every operator has finite rank, so
//! any matrix K with T + K invertible is a companion of T. Companions split
//! into two determinant-sign classes, which is all the orientation data the
//! degree computations need.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::det_sign;

/// A matrix K attached to a base operator T with T + K invertible.
#[derive(Clone, Debug)]
pub struct Companion {
    base: DMatrix<f64>,
    k: DMatrix<f64>,
}

impl Companion {
    pub fn new(base: DMatrix<f64>, k: DMatrix<f64>) -> Result<Self> {
        if !is_companion(&base, &k)? {
            return Err(Error::Precondition(
                "K is not a companion of T: T + K is singular".to_string(),
            ));
        }
        Ok(Companion { base, k })
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn sum(&self) -> DMatrix<f64> {
        &self.base + &self.k
    }
}

/// An operator together with a companion designated as positive.
#[derive(Clone, Debug)]
pub struct OrientedOperator {
    t: DMatrix<f64>,
    positive_rep: Companion,
}

impl OrientedOperator {
    pub fn new(t: DMatrix<f64>, positive_k: DMatrix<f64>) -> Result<Self> {
        let positive_rep = Companion::new(t.clone(), positive_k)?;
        Ok(OrientedOperator { t, positive_rep })
    }

    /// Natural orientation: the zero operator as positive companion. Only
    /// invertible operators admit it.
    pub fn naturally_oriented(t: DMatrix<f64>) -> Result<Self> {
        let n = t.nrows();
        Self::new(t, DMatrix::zeros(n, n))
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn positive_rep(&self) -> &Companion {
        &self.positive_rep
    }

    /// Reverse the orientation by designating a companion of the other class.
    pub fn opposite(&self) -> OrientedOperator {
        // Flipping the sign of one column of T + K flips the determinant sign,
        // so (T + K with a column negated) - T is a negative companion.
        let mut sum = self.positive_rep.sum();
        sum.column_mut(0).neg_mut();
        let k = &sum - &self.t;
        OrientedOperator {
            t: self.t.clone(),
            positive_rep: Companion {
                base: self.t.clone(),
                k,
            },
        }
    }

    /// Oriented composition self . first.
    pub fn compose(&self, first: &OrientedOperator) -> Result<OrientedOperator> {
        let k = oriented_composition_companion(
            first.t(),
            first.positive_rep.k(),
            self.t(),
            self.positive_rep.k(),
        )?;
        OrientedOperator::new(self.t() * first.t(), k)
    }
}

/// K is a companion of T when T + K is invertible.
pub fn is_companion(t: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<bool> {
    if t.shape() != k.shape() || !t.is_square() {
        return Err(Error::DimensionMismatch {
            expected: t.nrows(),
            got: k.nrows(),
        });
    }
    Ok(det_sign(&(t + k)) != 0)
}

/// Whether (T + K2)^{-1} (T + K1) has positive determinant. In finite
/// dimensions this is exactly the statement that det(T + K1) and det(T + K2)
/// share their sign, which avoids forming the inverse.
pub fn companions_equivalent(
    t: &DMatrix<f64>,
    k1: &DMatrix<f64>,
    k2: &DMatrix<f64>,
) -> Result<bool> {
    let s1 = companion_det_sign(t, k1)?;
    let s2 = companion_det_sign(t, k2)?;
    Ok(s1 == s2)
}

fn companion_det_sign(t: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<i32> {
    if t.shape() != k.shape() || !t.is_square() {
        return Err(Error::DimensionMismatch {
            expected: t.nrows(),
            got: k.nrows(),
        });
    }
    let s = det_sign(&(t + k));
    if s == 0 {
        return Err(Error::Precondition(
            "input is not a companion: T + K is singular".to_string(),
        ));
    }
    Ok(s)
}

/// Sign of an oriented operator: 0 when T is singular, +1 when the zero
/// companion belongs to the positive class, -1 otherwise.
pub fn operator_sign(op: &OrientedOperator) -> i32 {
    let st = det_sign(op.t());
    if st == 0 {
        return 0;
    }
    let sk = det_sign(&op.positive_rep.sum());
    if st == sk {
        1
    } else {
        -1
    }
}

/// The positive companion (T2 + K2)(T1 + K1) - T2 T1 of the composition T2 T1.
pub fn oriented_composition_companion(
    t1: &DMatrix<f64>,
    k1: &DMatrix<f64>,
    t2: &DMatrix<f64>,
    k2: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    companion_det_sign(t1, k1)?;
    companion_det_sign(t2, k2)?;
    if t1.nrows() != t2.ncols() {
        return Err(Error::DimensionMismatch {
            expected: t2.ncols(),
            got: t1.nrows(),
        });
    }
    Ok((t2 + k2) * (t1 + k1) - t2 * t1)
}
