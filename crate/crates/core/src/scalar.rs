//! Scalar algebra shared by symbolic, numeric and jet-valued tensors.

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::expr::Expr;

pub trait Ring: Clone + Send + Sync + std::fmt::Debug {
    fn zero() -> Self;
    fn constant(value: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, k: f64) -> Self;
    /// Numeric value when one is available without further input.
    fn approx(&self) -> Option<f64>;

    fn one() -> Self {
        Self::constant(1.0)
    }
}

pub trait Field: Ring {
    fn div(&self, rhs: &Self) -> Self;

    /// Inverse of a square matrix given row-major as `rows[i][j]`.
    fn invert_matrix(rows: &[Vec<Self>]) -> Result<Vec<Vec<Self>>> {
        adjugate_inverse(rows)
    }
}

/// Scalars that can be differentiated along chart coordinates.
pub trait Smooth: Field {
    fn partial(&self, coord: usize) -> Self;
}

/// Sum of `terms` with zero-skipping, for sparse component sums.
pub fn sum_products<S: Ring>(terms: impl IntoIterator<Item = (S, S)>) -> S {
    let mut acc = S::zero();
    for (a, b) in terms {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        acc = acc.add(&a.mul(&b));
    }
    acc
}

fn determinant<S: Ring>(m: &[Vec<S>]) -> S {
    let n = m.len();
    match n {
        0 => S::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = S::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor(m, 0, j);
                let term = m[0][j].mul(&determinant(&minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

fn minor<S: Clone>(m: &[Vec<S>], row: usize, col: usize) -> Vec<Vec<S>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
        .collect()
}

/// Cofactor inverse. Exact for symbolic entries; cost grows factorially,
/// which is fine for the small charts this crate works with.
pub fn adjugate_inverse<S: Field>(m: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(GeometryError::Dimension(n, m.first().map_or(0, Vec::len)));
    }
    let det = determinant(m);
    if det.is_zero() || det.approx() == Some(0.0) {
        return Err(GeometryError::Singular("zero determinant".into()));
    }
    let mut inv = vec![vec![S::zero(); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            // inv[i][j] = cofactor(j, i) / det
            let c = determinant(&minor(m, j, i));
            if c.is_zero() {
                continue;
            }
            let c = if (i + j) % 2 == 0 { c } else { c.neg() };
            *slot = c.div(&det);
        }
    }
    Ok(inv)
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn constant(value: f64) -> Self {
        value
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn approx(&self) -> Option<f64> {
        Some(*self)
    }
}

impl Field for f64 {
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn invert_matrix(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let m = to_dmatrix(rows);
        if !m.is_square() {
            return Err(GeometryError::Dimension(m.nrows(), m.ncols()));
        }
        let inv = m.lu().try_inverse().ok_or_else(|| GeometryError::Singular("LU pivot vanished".into()))?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::Singular("non-finite inverse".into()));
        }
        Ok(from_dmatrix(&inv))
    }
}

impl Ring for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn constant(value: f64) -> Self {
        Expr::constant(value)
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Expr::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Expr::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Expr::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn scale(&self, k: f64) -> Self {
        Expr::scale(self, k)
    }
    fn approx(&self) -> Option<f64> {
        self.as_const()
    }
}

impl Field for Expr {
    fn div(&self, rhs: &Self) -> Self {
        Expr::div(self, rhs)
    }
}

impl Smooth for Expr {
    fn partial(&self, coord: usize) -> Self {
        self.diff_index(coord)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_matches_lu() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let a = adjugate_inverse(&m).unwrap();
        let b = f64::invert_matrix(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(adjugate_inverse(&m).is_err());
        assert!(f64::invert_matrix(&m).is_err());
    }

    #[test]
    fn symbolic_diagonal_inverse_stays_small() {
        let x = Expr::coord(0, "x");
        let e = x.exp();
        let m = vec![vec![e.clone(), Expr::zero()], vec![Expr::zero(), Expr::one()]];
        let inv = adjugate_inverse(&m).unwrap();
        assert!(inv[0][1].is_zero());
        let v = inv[0][0].eval_coords(&[0.3], &Default::default()).unwrap();
        assert!((v - (-0.3f64).exp()).abs() < 1e-15);
    }
}
