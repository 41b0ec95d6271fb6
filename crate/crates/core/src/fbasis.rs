//! Pointwise f-basis `{e_1, fe_1, …, e_n, fe_n, ξ}` built from eigenvectors
//! of `Q` restricted to `ker η`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeometryError, Result};
use crate::report::CheckResult;
use crate::structure::{mat_residual, Algebra, LocalGeometry};

/// Relative width of an eigenvalue cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
const NEGLIGIBLE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FBasis {
    pub point: Vec<f64>,
    pub e: Vec<DVector<f64>>,
    pub fe: Vec<DVector<f64>>,
    pub xi: DVector<f64>,
    /// `λ_i = g(fe_i, fe_i)`, descending.
    pub eigenvalues: Vec<f64>,
}

fn inner(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

/// g-orthonormalizes `candidates` after projecting out `against` (assumed
/// g-orthonormal), keeping at most `want` vectors.
fn orthonormalize(
    g: &DMatrix<f64>,
    candidates: impl IntoIterator<Item = DVector<f64>>,
    against: &[DVector<f64>],
    want: usize,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for mut v in candidates {
        if out.len() == want {
            break;
        }
        let scale = inner(g, &v, &v).sqrt();
        for u in against.iter().chain(out.iter()) {
            let c = inner(g, u, &v);
            v -= u * c;
        }
        let norm = inner(g, &v, &v).sqrt();
        if norm > NEGLIGIBLE * scale.max(1.0) {
            out.push(v / norm);
        }
    }
    out
}

fn sign_fix(mut v: DVector<f64>) -> DVector<f64> {
    let scale = v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale.max(1e-300)) {
        if *first < 0.0 {
            v = -v;
        }
    }
    v
}

/// Runs the iterative construction at one point: a unit eigenvector `e` of
/// `Q` on the current subspace (largest eigenvalue first), then `fe`, then
/// the orthogonal complement of `span{e, fe}`.
pub fn f_basis(geo: &LocalGeometry) -> Result<FBasis> {
    let a = Algebra::at(geo);
    let dim = a.g.nrows();
    if dim % 2 == 0 {
        return Err(GeometryError::EvenDimension(dim));
    }
    let n = (dim - 1) / 2;
    let xi_norm = inner(&a.g, &a.xi, &a.xi).sqrt();
    let xi_unit = &a.xi / xi_norm;
    let coords = (0..dim).map(|k| {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        &v - &a.xi * a.eta[k]
    });
    let mut basis = orthonormalize(&a.g, coords, std::slice::from_ref(&xi_unit), 2 * n);
    if basis.len() != 2 * n {
        return Err(GeometryError::Eigen(format!("ker η has dimension {} instead of {}", basis.len(), 2 * n)));
    }
    let gq = &a.g * &a.q;
    let mut e_list = Vec::with_capacity(n);
    let mut fe_list = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for _ in 0..n {
        let k = basis.len();
        let b = DMatrix::from_columns(&basis);
        let c = b.transpose() * &gq * &b;
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(c, 1e-14, 10_000).ok_or_else(|| GeometryError::Eigen("no convergence".into()))?;
        if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
            if min <= 0.0 {
                return Err(GeometryError::IndefiniteQ(min));
            }
        }
        let (top_idx, top) = eig.eigenvalues.iter().cloned().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let cluster: Vec<usize> = (0..k).filter(|&i| (eig.eigenvalues[i] - top).abs() <= CLUSTER_TOL * top.abs().max(1.0)).collect();
        let coeffs = if cluster.len() == 1 {
            eig.eigenvectors.column(top_idx).into_owned()
        } else {
            // Project coordinate fields onto the eigenspace; the first one with
            // a non-negligible component picks the vector.
            let vs: Vec<DVector<f64>> = cluster.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
            let mut chosen = None;
            for kk in 0..dim {
                let mut unit = DVector::zeros(dim);
                unit[kk] = 1.0;
                let ck = b.transpose() * &a.g * &unit;
                let proj = vs.iter().fold(DVector::zeros(k), |acc, v| acc + v * v.dot(&ck));
                if proj.norm() > 1e-6 {
                    chosen = Some(proj);
                    break;
                }
            }
            chosen.ok_or_else(|| GeometryError::Eigen("empty eigenspace projection".into()))?
        };
        let e = &b * coeffs;
        let e = sign_fix(&e / inner(&a.g, &e, &e).sqrt());
        let fe = &a.f * &e;
        let lambda = inner(&a.g, &fe, &fe);
        let fe_unit = &fe / lambda.sqrt();
        let rest = orthonormalize(&a.g, basis.clone(), &[e.clone(), fe_unit], k - 2);
        e_list.push(e);
        fe_list.push(fe);
        lambdas.push(top);
        basis = rest;
    }
    Ok(FBasis { point: geo.point.values().to_vec(), e: e_list, fe: fe_list, xi: a.xi.clone(), eigenvalues: lambdas })
}

impl FBasis {
    /// `{e_i, fe_i/√λ_i, ξ}` as columns.
    pub fn normalized_columns(&self) -> DMatrix<f64> {
        let mut cols = Vec::new();
        for (i, e) in self.e.iter().enumerate() {
            cols.push(e.clone());
            cols.push(&self.fe[i] / self.eigenvalues[i].sqrt());
        }
        cols.push(self.xi.clone());
        DMatrix::from_columns(&cols)
    }

    /// `Σ λ_i (e_i⊗e_i♭ + u_i⊗u_i♭) + ξ⊗η` with `u_i = fe_i/√λ_i`.
    pub fn reconstruct_q(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let flat = |v: &DVector<f64>| (g * v).transpose();
        let mut q = &self.xi * flat(&self.xi);
        for (i, e) in self.e.iter().enumerate() {
            q += (e * flat(e)) * self.eigenvalues[i] + &self.fe[i] * flat(&self.fe[i]);
        }
        q
    }
}

/// Gram matrix, `g(fe_i, fe_i) = λ_i`, `Qe_i = λ_ie_i` and `Q` reconstruction.
pub fn check_f_basis(geos: &[LocalGeometry], tol: f64) -> Vec<CheckResult> {
    let mut c = crate::structure::Checker::new(geos, tol);
    c.check("fbasis.gram", "Gram{e_i, fe_i/√λ_i, ξ} = I", |geo| {
        let fb = f_basis(geo)?;
        let m = fb.normalized_columns();
        let g = Algebra::at(geo).g;
        let n = m.ncols();
        Ok(mat_residual(&(m.transpose() * g * &m), &DMatrix::identity(n, n)))
    });
    c.check("fbasis.f_norms", "g(fe_i, fe_i) = λ_i", |geo| {
        let fb = f_basis(geo)?;
        let g = Algebra::at(geo).g;
        let got: Vec<f64> = fb.fe.iter().map(|v| inner(&g, v, v)).collect();
        Ok(crate::tensor::normalized_residual(&got, &fb.eigenvalues))
    });
    c.check("fbasis.eigenvectors", "Qe_i = λ_i e_i", |geo| {
        let fb = f_basis(geo)?;
        let q = Algebra::at(geo).q;
        Ok(fb.e.iter().zip(&fb.eigenvalues).map(|(e, l)| crate::structure::vec_residual(&(&q * e), &(e * *l))).fold(0.0, f64::max))
    });
    c.check("fbasis.q_reconstruction", "Q = Σλ_i(e_i⊗e_i♭ + u_i⊗u_i♭) + ξ⊗η", |geo| {
        let fb = f_basis(geo)?;
        let a = Algebra::at(geo);
        Ok(mat_residual(&fb.reconstruct_q(&a.g), &a.q))
    });
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::kenmotsu_model;

    fn model_geo(c: f64) -> LocalGeometry {
        let (b, _) = kenmotsu_model(2, 1.0, c).unwrap();
        let p = b.sample_points(1, 3).unwrap();
        b.local(&p[0]).unwrap()
    }

    #[test]
    fn repeated_eigenvalue_forms_one_cluster() {
        let fb = f_basis(&model_geo(0.5)).unwrap();
        assert_eq!(fb.e.len(), 2);
        assert!(fb.eigenvalues.iter().all(|l| (l - 1.5).abs() < 1e-12));
    }

    #[test]
    fn frame_is_orthonormal_and_rebuilds_q() {
        let geo = model_geo(3.0);
        let fb = f_basis(&geo).unwrap();
        let g = crate::structure::matrix(geo.g());
        let frame = fb.normalized_columns();
        assert!(mat_residual(&(frame.transpose() * &g * &frame), &DMatrix::identity(5, 5)) < 1e-12);
        assert!(mat_residual(&fb.reconstruct_q(&g), &crate::structure::matrix(&geo.q)) < 1e-12);
    }
}
