//! Weak β-Kenmotsu validation and the curvature identities it implies.

use crate::error::{GeometryError, Result};
use crate::forms::{calibrated_kappa, d0, d1, d2, wedge11, wedge12};
use crate::jet::Jet;
use crate::report::{spread, CheckResult, Status};
use crate::riemann::covariant_derivative;
use crate::scalar::{Ring, Smooth};
use crate::structure::{
    delta, nijenhuis, residual_against, tensor_residual, validate_wacs, values, zero_residual, Checker, LocalGeometry,
    Snapshot, WacsBundle,
};
use crate::tensor::{normalized_residual, Tensor};

/// Spread and derivative bound below which `β` counts as constant.
pub const BETA_CONSTANT_TOL: f64 = 1e-9;

pub const COSYMPLECTIC: &str = "weak cosymplectic, not β-Kenmotsu";

/// `(spread of β, max |dβ|)` over the samples.
pub fn beta_variation(geos: &[LocalGeometry]) -> Result<(f64, f64)> {
    let mut vals = Vec::with_capacity(geos.len());
    let mut grad = 0.0f64;
    for geo in geos {
        let b = geo.beta.as_ref().ok_or(GeometryError::MissingBeta)?;
        vals.push(b.value());
        for k in 0..geo.dim() {
            grad = grad.max(b.partial(k).value().abs());
        }
    }
    Ok((spread(&vals), grad))
}

pub fn beta_is_constant(geos: &[LocalGeometry]) -> Result<bool> {
    let (s, d) = beta_variation(geos)?;
    Ok(s <= BETA_CONSTANT_TOL && d <= BETA_CONSTANT_TOL)
}

/// Mean of `β` over the samples.
pub fn beta_mean(geos: &[LocalGeometry]) -> Result<f64> {
    let vals: Result<Vec<f64>> = geos.iter().map(|g| g.beta_value()).collect();
    Ok(crate::report::mean(&vals?))
}

/// Validates `(∇_X f)Y = β{g(fX,Y)ξ − η(Y)fX}` and its consequences. The
/// weak almost contact axioms are checked first; if they fail, the
/// β-Kenmotsu checks are skipped.
pub fn validate_beta_kenmotsu(bundle: &WacsBundle, geos: &[LocalGeometry], tol: f64) -> Result<Vec<CheckResult>> {
    if bundle.beta().is_none() {
        return Err(GeometryError::MissingBeta);
    }
    let mut out = validate_wacs(bundle, geos, tol)?;
    let axioms_hold = out.iter().all(|c| c.status != Status::Fail);
    out.extend(beta_kenmotsu_checks(geos, tol, if axioms_hold { None } else { Some("weak almost contact axioms fail".into()) }));
    Ok(out)
}

/// The β-Kenmotsu checks without the axiom precondition.
pub fn beta_kenmotsu_checks(geos: &[LocalGeometry], tol: f64, skip: Option<String>) -> Vec<CheckResult> {
    let mut c = Checker::new(geos, tol);
    c.skip = skip;
    if c.skip.is_none() {
        let max_beta = geos.iter().map(|g| g.beta_value().map(f64::abs)).collect::<Result<Vec<f64>>>();
        match max_beta {
            Ok(v) if v.iter().cloned().fold(0.0, f64::max) <= tol => {
                c.push(CheckResult::failed("kenmotsu.beta_nonzero", "β ≠ 0", tol, COSYMPLECTIC));
            }
            Ok(v) => c.push(CheckResult::info("kenmotsu.beta_nonzero", "β ≠ 0", v.iter().cloned().fold(f64::INFINITY, f64::min))),
            Err(e) => c.push(CheckResult::failed("kenmotsu.beta_nonzero", "β ≠ 0", tol, e.to_string())),
        }
    } else {
        c.push(CheckResult::skipped("kenmotsu.beta_nonzero", "β ≠ 0", tol, c.skip.clone().unwrap()));
    }
    c.check("kenmotsu.nabla_f", "(∇_X f)Y = β{g(fX,Y)ξ − η(Y)fX}", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rhs = Tensor::from_fn(s.dim, 1, 2, |i| {
            let (a, bb, m) = (i[0], i[1], i[2]);
            b * (s.phi(bb, m) * s.xi[a] - s.eta[bb] * s.f.get(&[a, m]))
        });
        Ok(residual_against(geo.nabla_f(), &rhs))
    });
    c.check("kenmotsu.nabla_xi", "∇_X ξ = β{X − η(X)ξ}", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rhs = Tensor::from_fn(s.dim, 1, 1, |i| b * (delta(i[0], i[1]) - s.eta[i[1]] * s.xi[i[0]]));
        Ok(residual_against(&covariant_derivative(&geo.xi, geo.gamma()), &rhs))
    });
    c.check("kenmotsu.nabla_eta", "(∇_X η)Y = β{g(X,Y) − η(X)η(Y)}", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rhs = Tensor::from_fn(s.dim, 0, 2, |i| b * (s.g.get(&[i[1], i[0]]) - s.eta[i[1]] * s.eta[i[0]]));
        Ok(residual_against(&covariant_derivative(&geo.eta, geo.gamma()), &rhs))
    });
    c.check("kenmotsu.nabla_q", "(∇_X Q)Y = −β{η(Y)Q̃X + g(Q̃X,Y)ξ}", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rhs = Tensor::from_fn(s.dim, 1, 2, |i| {
            let (a, bb, m) = (i[0], i[1], i[2]);
            -b * (s.eta[bb] * s.qt.get(&[a, m]) + s.gqt(bb, m) * s.xi[a])
        });
        Ok(residual_against(geo.nabla_q(), &rhs))
    });
    c.check("kenmotsu.lie_xi_g", "ℒ_ξ g = 2β{g − η⊗η}", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rhs = Tensor::from_fn(s.dim, 0, 2, |i| 2.0 * b * (s.g.get(i) - s.eta[i[0]] * s.eta[i[1]]));
        Ok(residual_against(&crate::riemann::lie_derivative(geo.g(), &geo.xi), &rhs))
    });
    c.check("kenmotsu.d_eta", "dη = 0", |geo| Ok(zero_residual(&d1(&geo.eta)?)));
    c.check("kenmotsu.n1", "N1 = 0", |geo| Ok(zero_residual(&nijenhuis(geo)?.n1)));
    c.check("kenmotsu.nabla_xi_f", "∇_ξ f = 0", |geo| {
        Ok(zero_residual(&crate::riemann::covariant_along(geo.nabla_f(), geo.xi.data())))
    });
    c.check("kenmotsu.nabla_xi_q", "∇_ξ Q = 0", |geo| {
        Ok(zero_residual(&crate::riemann::covariant_along(geo.nabla_q(), geo.xi.data())))
    });
    c.check("kenmotsu.trace_q_gradient", "d(trace Q) = 0", |geo| {
        let tr = (0..geo.dim()).fold(Jet::zero(), |acc, i| acc.add(geo.q.get(&[i, i])));
        Ok((0..geo.dim()).map(|k| tr.partial(k).value().abs()).fold(0.0, f64::max))
    });
    if c.skip.is_none() {
        let traces: Vec<f64> = geos.iter().map(|g| (0..g.dim()).map(|i| g.q.get(&[i, i]).value()).sum()).collect();
        c.push(CheckResult::from_residual("kenmotsu.trace_q_constant", "spread of trace Q = 0", spread(&traces), tol));
    } else {
        c.push(CheckResult::skipped("kenmotsu.trace_q_constant", "spread of trace Q = 0", tol, c.skip.clone().unwrap()));
    }
    c.check("kenmotsu.dbeta_wedge_eta", "dβ∧η = 0", |geo| {
        let b = geo.beta.as_ref().ok_or(GeometryError::MissingBeta)?;
        Ok(zero_residual(&wedge11(&d0(b, geo.dim()), &geo.eta)?))
    });
    c.check("kenmotsu.d_phi", "dΦ = 2β η∧Φ", |geo| {
        let b = geo.beta_value()?;
        let phi = geo.fundamental_form();
        let lhs = d2(&phi)?;
        let rhs = wedge12(&geo.eta, &phi, calibrated_kappa())?.scale(2.0 * b);
        Ok(tensor_residual(&lhs, &rhs))
    });
    c.out
}

/// Curvature invariants of any metric: metricity, symmetries, Bianchi.
pub fn check_riemann_invariants(geos: &[LocalGeometry], tol: f64) -> Vec<CheckResult> {
    let mut c = Checker::new(geos, tol);
    c.check("curvature.metricity", "∇g = 0", |geo| Ok(zero_residual(&covariant_derivative(geo.g(), geo.gamma()))));
    c.check("curvature.pair_antisymmetry", "R_{X,Y} = −R_{Y,X}", |geo| {
        let r = values(&geo.curvature().riemann);
        let swapped = Tensor::from_fn(geo.dim(), 1, 3, |i| -r.get(&[i[0], i[2], i[1], i[3]]));
        Ok(crate::structure::residual(&r, &swapped))
    });
    c.check("curvature.first_bianchi", "R_{X,Y}Z + R_{Y,Z}X + R_{Z,X}Y = 0", |geo| {
        let r = values(&geo.curvature().riemann);
        let sum = Tensor::from_fn(geo.dim(), 1, 3, |i| {
            let (a, x, y, z) = (i[0], i[1], i[2], i[3]);
            r.get(&[a, x, y, z]) + r.get(&[a, y, z, x]) + r.get(&[a, z, x, y])
        });
        let scale = r.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        Ok(sum.data().iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale)
    });
    c.check("curvature.ricci_symmetric", "Ric(X,Y) = Ric(Y,X)", |geo| {
        let r = values(&geo.curvature().ricci);
        let t = Tensor::from_fn(geo.dim(), 0, 2, |i| *r.get(&[i[1], i[0]]));
        Ok(crate::structure::residual(&r, &t))
    });
    c.out
}

/// β-Kenmotsu curvature identities; they assume constant β and are skipped
/// otherwise.
pub fn check_kenmotsu_curvature(geos: &[LocalGeometry], tol: f64, skip: Option<String>) -> Vec<CheckResult> {
    let mut c = Checker::new(geos, tol);
    c.skip = skip;
    if c.skip.is_none() {
        match beta_variation(geos) {
            Ok((s, d)) if s > BETA_CONSTANT_TOL || d > BETA_CONSTANT_TOL => {
                c.skip = Some(format!("β is not constant (spread {s:e}, |dβ| {d:e})"));
            }
            Err(e) => c.skip = Some(e.to_string()),
            _ => {}
        }
    }
    c.check("curvature.ricci_xi", "Ric♯ξ = −2nβ²ξ", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let rs = values(&geo.curvature().ricci_sharp);
        let lhs: Vec<f64> = (0..s.dim).map(|a| (0..s.dim).map(|m| rs.get(&[a, m]) * s.xi[m]).sum()).collect();
        let rhs: Vec<f64> = s.xi.iter().map(|x| -2.0 * s.n as f64 * b * b * x).collect();
        Ok(normalized_residual(&lhs, &rhs))
    });
    c.check("curvature.r_xy_xi", "R_{X,Y}ξ = β²{η(X)Y − η(Y)X}", |geo| {
        let s = Snapshot::of(geo);
        let b2 = s.beta()?.powi(2);
        let r = values(&geo.curvature().riemann);
        let lhs = Tensor::from_fn(s.dim, 1, 2, |i| (0..s.dim).map(|c| r.get(&[i[0], i[1], i[2], c]) * s.xi[c]).sum());
        let rhs = Tensor::from_fn(s.dim, 1, 2, |i| {
            let (a, x, y) = (i[0], i[1], i[2]);
            b2 * (s.eta[x] * delta(a, y) - s.eta[y] * delta(a, x))
        });
        Ok(crate::structure::residual(&lhs, &rhs))
    });
    c.check("curvature.r_x_xi_z", "R_{X,ξ}Z = β²{g(X,Z)ξ − η(Z)X}", |geo| {
        let s = Snapshot::of(geo);
        let b2 = s.beta()?.powi(2);
        let r = values(&geo.curvature().riemann);
        let lhs = Tensor::from_fn(s.dim, 1, 2, |i| (0..s.dim).map(|c| r.get(&[i[0], i[1], c, i[2]]) * s.xi[c]).sum());
        let rhs = Tensor::from_fn(s.dim, 1, 2, |i| {
            let (a, x, z) = (i[0], i[1], i[2]);
            b2 * (s.g.get(&[x, z]) * s.xi[a] - s.eta[z] * delta(a, x))
        });
        Ok(crate::structure::residual(&lhs, &rhs))
    });
    c.check("curvature.nabla_xi_ricci", "(∇_ξ Ric♯)X = −2βRic♯X − 4nβ³X", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let nf = 2.0 * s.n as f64;
        let rs = values(&geo.curvature().ricci_sharp);
        let lhs = values(&crate::riemann::covariant_along(geo.nabla_ricci_sharp(), geo.xi.data()));
        let rhs = Tensor::from_fn(s.dim, 1, 1, |i| -2.0 * b * rs.get(i) - 2.0 * nf * b.powi(3) * delta(i[0], i[1]));
        Ok(crate::structure::residual(&lhs, &rhs))
    });
    c.check("curvature.nabla_x_ricci_xi", "(∇_X Ric♯)ξ = −βRic♯X − 2nβ³X", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let nf = 2.0 * s.n as f64;
        let rs = values(&geo.curvature().ricci_sharp);
        let nr = values(geo.nabla_ricci_sharp());
        let lhs = Tensor::from_fn(s.dim, 1, 1, |i| (0..s.dim).map(|bb| nr.get(&[i[0], bb, i[1]]) * s.xi[bb]).sum());
        let rhs = Tensor::from_fn(s.dim, 1, 1, |i| -b * rs.get(i) - nf * b.powi(3) * delta(i[0], i[1]));
        Ok(crate::structure::residual(&lhs, &rhs))
    });
    c.check("curvature.xi_r", "ξ(r) = −2β(r + 2n(2n+1)β²)", |geo| {
        let s = Snapshot::of(geo);
        let b = s.beta()?;
        let nf = 2.0 * s.n as f64;
        let r = &geo.curvature().scalar;
        let lhs: f64 = (0..s.dim).map(|k| r.partial(k).value() * s.xi[k]).sum();
        let rhs = -2.0 * b * (r.value() + nf * (nf + 1.0) * b * b);
        Ok(normalized_residual(&[lhs], &[rhs]))
    });
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{kenmotsu_model, perturbed_model};

    fn geos(b: &WacsBundle) -> Vec<LocalGeometry> {
        b.locals(&b.sample_points(6, 1).unwrap()).unwrap()
    }

    #[test]
    fn model_beta_is_constant() {
        let (b, _) = kenmotsu_model(1, -0.7, 0.0).unwrap();
        let g = geos(&b);
        assert!(beta_is_constant(&g).unwrap());
        assert!((beta_mean(&g).unwrap() + 0.7).abs() < 1e-15);
    }

    #[test]
    fn model_passes_every_kenmotsu_check() {
        let (b, _) = kenmotsu_model(1, 1.0, 0.5).unwrap();
        let checks = validate_beta_kenmotsu(&b, &geos(&b), 1e-8).unwrap();
        assert!(checks.iter().all(|c| c.status != Status::Fail));
        assert!(checks.iter().any(|c| c.name == "kenmotsu.nabla_f"));
    }

    #[test]
    fn skip_reason_is_propagated() {
        let b = perturbed_model(1, 1.0, 0.0, 0.2).unwrap();
        let checks = beta_kenmotsu_checks(&geos(&b), 1e-8, Some("because".into()));
        assert!(checks.iter().all(|c| c.status == Status::Skipped && c.detail.as_deref() == Some("because")));
    }

    #[test]
    fn missing_beta_is_an_error() {
        let (b, _) = kenmotsu_model(1, 1.0, 0.0).unwrap();
        let b = b.with_beta(None).unwrap();
        assert!(matches!(validate_beta_kenmotsu(&b, &geos(&b), 1e-8), Err(GeometryError::MissingBeta)));
    }
}
