//! Explicit manifolds: the weak β-Kenmotsu model, flat weak Kähler bases,
//! warped products over them, and perturbed negative controls.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::expr::{parse_expr, Expr, Params};
use crate::soliton::SolitonData;
use crate::structure::{covector_field, vector_field, BundleFields, WacsBundle};
use crate::tensor::{Chart, Tensor, TensorField};

fn range(field: &str, message: impl Into<String>) -> GeometryError {
    GeometryError::Range { field: field.into(), message: message.into() }
}

fn check_model_params(n: usize, beta: f64, c: f64) -> Result<()> {
    if n < 1 {
        return Err(range("n", "must be at least 1"));
    }
    if !beta.is_finite() || beta == 0.0 {
        return Err(range("beta", "must be finite and nonzero"));
    }
    if !c.is_finite() || c <= -1.0 {
        return Err(range("c", "must be greater than -1"));
    }
    Ok(())
}

fn diagonal(dim: usize, entries: impl Fn(usize) -> Expr) -> TensorField {
    Tensor::from_fn(dim, 0, 2, |i| if i[0] == i[1] { entries(i[0]) } else { Expr::zero() })
}

fn unit_vector(dim: usize, k: usize) -> Vec<Expr> {
    (0..dim).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()
}

fn model_fields(n: usize, beta: f64, c: f64, q_first: f64) -> (Chart, BundleFields) {
    let dim = 2 * n + 1;
    let chart = Chart::numbered(dim);
    let t = chart.coord(dim - 1);
    let conformal = t.scale(2.0 * beta).exp();
    let g = diagonal(dim, |i| if i + 1 == dim { Expr::one() } else { conformal.clone() });
    let s = (1.0 + c).sqrt();
    let f = Tensor::from_fn(dim, 1, 1, |i| {
        let (a, b) = (i[0], i[1]);
        if b < n && a == n + b {
            Expr::constant(s)
        } else if a < n && b == n + a {
            Expr::constant(-s)
        } else {
            Expr::zero()
        }
    });
    let q = Tensor::from_fn(dim, 1, 1, |i| match (i[0], i[1]) {
        (0, 0) => Expr::constant(q_first),
        (a, b) if a == b && a + 1 < dim => Expr::constant(1.0 + c),
        (a, b) if a == b => Expr::one(),
        _ => Expr::zero(),
    });
    let fields = BundleFields {
        g,
        f,
        q,
        xi: vector_field(unit_vector(dim, dim - 1)),
        eta: covector_field(unit_vector(dim, dim - 1)),
        beta: Some(Expr::constant(beta)),
    };
    (chart, fields)
}

/// The model on `ℝ^{2n+1}` with orthonormal frame `e_i = e^{−βx_{2n+1}}∂_i`,
/// `Q = (1+c)` on `ker η`, and its soliton `V = ξ`, `λ = −μ = β − (1+c)β²`.
pub fn kenmotsu_model(n: usize, beta: f64, c: f64) -> Result<(WacsBundle, SolitonData)> {
    check_model_params(n, beta, c)?;
    let (chart, fields) = model_fields(n, beta, c, 1.0 + c);
    let id = format!("kenmotsu_model(n={n}, beta={beta}, c={c})");
    let bundle = WacsBundle::new(id, chart, fields, Params::new())?;
    let dim = 2 * n + 1;
    let lambda = beta - (1.0 + c) * beta * beta;
    let soliton = SolitonData::vector(vector_field(unit_vector(dim, dim - 1)), lambda, -lambda);
    Ok((bundle, soliton))
}

/// The model with `Q` multiplied by `1 + ε` on the first `ker η` slot only.
pub fn perturbed_model(n: usize, beta: f64, c: f64, epsilon: f64) -> Result<WacsBundle> {
    check_model_params(n, beta, c)?;
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(range("epsilon", "must be nonnegative"));
    }
    let (chart, fields) = model_fields(n, beta, c, (1.0 + c) * (1.0 + epsilon));
    let id = format!("perturbed_model(n={n}, beta={beta}, c={c}, epsilon={epsilon})");
    WacsBundle::new(id, chart, fields, Params::new())
}

/// Flat `ℝ^{2m}` with the parallel structure `J = ⊕ c_i J_std`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatWeakKaehler {
    pub scales: Vec<f64>,
    /// `J[a][b]`, constant; `J∂_{2i} = c_i∂_{2i+1}`.
    pub j: Vec<Vec<f64>>,
}

impl FlatWeakKaehler {
    pub fn dim(&self) -> usize {
        2 * self.scales.len()
    }

    /// `−J² = diag(c_1², c_1², c_2², …)`.
    pub fn q(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|a| (0..d).map(|b| -(0..d).map(|m| self.j[a][m] * self.j[m][b]).sum::<f64>()).collect())
            .collect()
    }
}

pub fn flat_weak_kaehler(scales: &[f64]) -> Result<FlatWeakKaehler> {
    if scales.is_empty() {
        return Err(range("scales", "need at least one scale"));
    }
    if let Some(k) = scales.iter().position(|c| !c.is_finite() || *c == 0.0) {
        return Err(range(&format!("scales[{k}]"), "must be finite and nonzero"));
    }
    let d = 2 * scales.len();
    let mut j = vec![vec![0.0; d]; d];
    for (i, &c) in scales.iter().enumerate() {
        j[2 * i + 1][2 * i] = c;
        j[2 * i][2 * i + 1] = -c;
    }
    Ok(FlatWeakKaehler { scales: scales.to_vec(), j })
}

/// Coordinates `x1..x{2m}, t` of a warped product over a `2m`-dimensional base.
pub fn warped_chart(m: usize) -> Chart {
    let mut names: Vec<String> = (1..=2 * m).map(|i| format!("x{i}")).collect();
    names.push("t".into());
    Chart::new(names, None).expect("valid warped chart")
}

const SIGMA_PROBES: usize = 257;

/// `ℝ ×_σ M̄` with `g = dt² ⊕ σ(t)²ḡ`, `f = J`, `Q = 1 ⊕ −J²`, `ξ = ∂_t`,
/// and `β = σ'/σ`. `sigma` must depend on `t` only.
pub fn warped_product(base: &FlatWeakKaehler, sigma: &Expr, chart: &Chart) -> Result<WacsBundle> {
    let d = base.dim();
    let dim = d + 1;
    if chart.dim() != dim {
        return Err(GeometryError::Dimension(dim, chart.dim()));
    }
    let mut used = std::collections::BTreeSet::new();
    sigma.collect_params(&mut used);
    if let Some(p) = used.into_iter().next() {
        return Err(range("sigma", format!("unbound parameter `{p}`")));
    }
    for k in 0..d {
        if !sigma.diff_index(k).is_zero() {
            return Err(range("sigma", format!("must depend on `{}` only", chart.names()[d])));
        }
    }
    let (lo, hi) = chart.domain()[d];
    for s in 0..SIGMA_PROBES {
        let t = lo + (hi - lo) * s as f64 / (SIGMA_PROBES - 1) as f64;
        let mut at = vec![0.0; dim];
        at[d] = t;
        let v = sigma.eval_coords(&at, &Params::new())?;
        if !(v > 0.0) {
            return Err(range("sigma", format!("must be positive on the domain; σ({t}) = {v}")));
        }
    }
    let s2 = sigma.powf(2.0);
    let g = diagonal(dim, |i| if i == d { Expr::one() } else { s2.clone() });
    let f = Tensor::from_fn(dim, 1, 1, |i| if i[0] < d && i[1] < d { Expr::constant(base.j[i[0]][i[1]]) } else { Expr::zero() });
    let qb = base.q();
    let q = Tensor::from_fn(dim, 1, 1, |i| match (i[0], i[1]) {
        (a, b) if a < d && b < d => Expr::constant(qb[a][b]),
        (a, b) if a == d && b == d => Expr::one(),
        _ => Expr::zero(),
    });
    let beta = sigma.diff_index(d).div(sigma);
    let fields = BundleFields {
        g,
        f,
        q,
        xi: vector_field(unit_vector(dim, d)),
        eta: covector_field(unit_vector(dim, d)),
        beta: Some(beta),
    };
    let id = format!("warped_product(scales={:?}, sigma={sigma})", base.scales);
    WacsBundle::new(id, chart.clone(), fields, Params::new())
}

/// JSON-facing description of a zoo manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZooSpec {
    KenmotsuModel {
        n: i64,
        beta: f64,
        c: f64,
    },
    /// `sigma` is an expression in `t` and may use the parameter `beta`;
    /// it defaults to `exp(beta*t)`.
    WarpedProduct {
        scales: Vec<f64>,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        sigma: Option<String>,
    },
    /// The metric product `ℝ × M̄` (`σ = 1`), a weak cosymplectic manifold.
    FlatWeakKaehlerBase {
        scales: Vec<f64>,
    },
    PerturbedModel {
        n: i64,
        beta: f64,
        c: f64,
        epsilon: f64,
    },
}

fn as_n(n: i64) -> Result<usize> {
    if n < 1 {
        return Err(range("n", format!("must be at least 1, got {n}")));
    }
    Ok(n as usize)
}

impl ZooSpec {
    /// Builds the bundle and its attached soliton (model only).
    pub fn build(&self, domain: Option<Vec<(f64, f64)>>) -> Result<(WacsBundle, Option<SolitonData>)> {
        let (bundle, soliton) = match self {
            ZooSpec::KenmotsuModel { n, beta, c } => {
                let (b, s) = kenmotsu_model(as_n(*n)?, *beta, *c)?;
                (b, Some(s))
            }
            ZooSpec::PerturbedModel { n, beta, c, epsilon } => (perturbed_model(as_n(*n)?, *beta, *c, *epsilon)?, None),
            ZooSpec::WarpedProduct { scales, beta, sigma } => {
                let base = flat_weak_kaehler(scales)?;
                let mut chart = warped_chart(scales.len());
                if let Some(d) = &domain {
                    chart = chart.with_domain(d.clone())?;
                }
                let text = match (sigma, beta) {
                    (Some(s), _) => s.clone(),
                    (None, Some(_)) => "exp(beta*t)".to_string(),
                    (None, None) => return Err(range("sigma", "give `sigma` or `beta`")),
                };
                let params: Vec<String> = beta.iter().map(|_| "beta".to_string()).collect();
                let e = parse_expr(&text, chart.names(), &params)?;
                let bound: Params = beta.iter().map(|b| ("beta".to_string(), *b)).collect();
                if let Some(b) = beta {
                    if *b == 0.0 || !b.is_finite() {
                        return Err(range("beta", "must be finite and nonzero"));
                    }
                }
                (warped_product(&base, &e.bind_params(&bound), &chart)?, None)
            }
            ZooSpec::FlatWeakKaehlerBase { scales } => {
                let base = flat_weak_kaehler(scales)?;
                let mut chart = warped_chart(scales.len());
                if let Some(d) = &domain {
                    chart = chart.with_domain(d.clone())?;
                }
                let b = warped_product(&base, &Expr::one(), &chart)?;
                (b.with_id(format!("flat_weak_kaehler_base(scales={scales:?})")), None)
            }
        };
        let bundle = match (domain, self) {
            (Some(d), ZooSpec::KenmotsuModel { .. } | ZooSpec::PerturbedModel { .. }) => {
                let chart = bundle.chart().clone().with_domain(d)?;
                WacsBundle::new(bundle.id().to_string(), chart, bundle.fields().clone(), Params::new())?
            }
            _ => bundle,
        };
        Ok((bundle, soliton))
    }
}

/// Zoo bundles used by cross-manifold tests: models, warped products with
/// mixed and equal scales.
pub fn standard_zoo() -> Result<Vec<WacsBundle>> {
    let mut out = Vec::new();
    for n in [1usize, 2] {
        for beta in [1.0, -0.7] {
            for c in [0.0, 0.5, 3.0] {
                out.push(kenmotsu_model(n, beta, c)?.0);
            }
        }
    }
    for (scales, beta) in [(vec![2.0, 3.0], 1.0), (vec![2.0, 3.0], -0.7), (vec![1.0], 1.0), (vec![0.5, 1.5, 2.5], 0.8)] {
        let spec = ZooSpec::WarpedProduct { scales, beta: Some(beta), sigma: None };
        out.push(spec.build(None)?.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_f_has_constant_coordinate_components() {
        let (b, s) = kenmotsu_model(2, -0.7, 0.5).unwrap();
        assert!(b.fields().f.data().iter().all(|e| e.as_const().is_some()));
        assert!((s.lambda - (-0.7 - 1.5 * 0.49)).abs() < 1e-15);
        assert_eq!(s.lambda, -s.mu);
    }

    #[test]
    fn model_soliton_constants() {
        let (_, s) = kenmotsu_model(1, 1.0, 3.0).unwrap();
        assert_eq!((s.lambda, s.mu), (-3.0, 3.0));
    }

    #[test]
    fn classical_model_has_identity_q() {
        let (b, _) = kenmotsu_model(2, 1.0, 0.0).unwrap();
        let q = &b.fields().q;
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(q.get(&[i, j]).as_const(), Some(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn range_errors_name_the_field() {
        for (r, field) in [
            (kenmotsu_model(0, 1.0, 0.0).map(|_| ()), "n"),
            (kenmotsu_model(1, 0.0, 0.0).map(|_| ()), "beta"),
            (kenmotsu_model(1, 1.0, -1.0).map(|_| ()), "c"),
            (perturbed_model(1, 1.0, 0.0, -0.1).map(|_| ()), "epsilon"),
            (flat_weak_kaehler(&[2.0, 0.0]).map(|_| ()), "scales[1]"),
        ] {
            match r {
                Err(GeometryError::Range { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected range error for {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn weak_kaehler_base_q() {
        let base = flat_weak_kaehler(&[2.0, 3.0]).unwrap();
        let q = base.q();
        let diag: Vec<f64> = (0..4).map(|i| q[i][i]).collect();
        assert_eq!(diag, vec![4.0, 4.0, 9.0, 9.0]);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(base.j[a][b], -base.j[b][a]);
            }
        }
    }

    #[test]
    fn sigma_must_be_positive() {
        let base = flat_weak_kaehler(&[1.0]).unwrap();
        let chart = warped_chart(1);
        let t = chart.coord(2);
        assert!(matches!(warped_product(&base, &t, &chart), Err(GeometryError::Range { .. })));
    }

    #[test]
    fn zoo_spec_builds_model() {
        let s = ZooSpec::KenmotsuModel { n: 2, beta: 1.0, c: 0.5 };
        let (b, sol) = s.build(None).unwrap();
        assert_eq!(b.dim(), 5);
        assert!(sol.is_some());
        assert!(matches!(ZooSpec::KenmotsuModel { n: -1, beta: 1.0, c: 0.0 }.build(None), Err(GeometryError::Range { .. })));
    }
}
