//! Levi-Civita geometry in components: Christoffel symbols, covariant and
//! Lie derivatives, curvature, Hessians.
//!
//! Conventions:
//! - `∇_{∂_j}∂_k = Γ^a_{jk} ∂_a`.
//! - `riemann[a; i, j, k]` is the `a`-component of `R(∂_i, ∂_j)∂_k` with
//!   `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
//! - `Ric(Y,Z) = trace(X ↦ R(X,Y)Z)`, i.e. `Ric_{jk} = R^i_{ijk}`.
//!
//! Every function is generic over [`Smooth`], so the same code runs on
//! symbolic expressions and on jets.

use crate::error::Result;
use crate::scalar::{sum_products, Field, Smooth};
use crate::tensor::Tensor;

/// Metric, its inverse and Christoffel symbols.
#[derive(Debug, Clone)]
pub struct MetricData<S> {
    pub g: Tensor<S>,
    pub g_inv: Tensor<S>,
    pub gamma: Tensor<S>,
}

impl<S: Smooth> MetricData<S> {
    pub fn new(g: Tensor<S>) -> Result<MetricData<S>> {
        g.expect_valence(0, 2)?;
        let inv_rows = S::invert_matrix(&g.to_rows())?;
        let g_inv = Tensor::from_rows(2, 0, inv_rows)?;
        let gamma = christoffel(&g, &g_inv);
        Ok(MetricData { g, g_inv, gamma })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
pub fn christoffel<S: Smooth>(g: &Tensor<S>, g_inv: &Tensor<S>) -> Tensor<S> {
    let n = g.dim();
    let dg = partial_derivative(g); // dg[i, j, l] = ∂_l g_ij
    let first_kind = Tensor::from_fn(n, 0, 3, |idx| {
        let (i, j, l) = (idx[0], idx[1], idx[2]);
        let s = dg.get(&[j, l, i]).add(dg.get(&[i, l, j])).sub(dg.get(&[i, j, l]));
        s.scale(0.5)
    });
    Tensor::from_fn(n, 1, 2, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        sum_products((0..n).map(|l| (g_inv.get(&[k, l]).clone(), first_kind.get(&[i, j, l]).clone())))
    })
}

/// Coordinate partial derivative; the direction becomes the last lower slot.
pub fn partial_derivative<S: Smooth>(t: &Tensor<S>) -> Tensor<S> {
    let n = t.dim();
    let rank = t.rank();
    Tensor::from_fn(n, t.upper(), t.lower() + 1, |idx| t.get(&idx[..rank]).partial(idx[rank]))
}

/// Levi-Civita covariant derivative; the direction becomes the last lower slot.
/// `(∇T)^{a..}_{b..;m} = ∂_m T + Σ_upper Γ^a_{m p} T^{p..} − Σ_lower Γ^p_{m b} T_{..p..}`.
pub fn covariant_derivative<S: Smooth>(t: &Tensor<S>, gamma: &Tensor<S>) -> Tensor<S> {
    let n = t.dim();
    let (r, s) = (t.upper(), t.lower());
    let rank = r + s;
    let mut scratch = vec![0usize; rank];
    Tensor::from_fn(n, r, s + 1, |idx| {
        let m = idx[rank];
        let base = &idx[..rank];
        let mut acc = t.get(base).partial(m);
        for slot in 0..rank {
            scratch.copy_from_slice(base);
            for p in 0..n {
                scratch[slot] = p;
                let comp = t.get(&scratch);
                if comp.is_zero() {
                    continue;
                }
                if slot < r {
                    let c = gamma.get(&[base[slot], m, p]);
                    if !c.is_zero() {
                        acc = acc.add(&c.mul(comp));
                    }
                } else {
                    let c = gamma.get(&[p, m, base[slot]]);
                    if !c.is_zero() {
                        acc = acc.sub(&c.mul(comp));
                    }
                }
            }
        }
        acc
    })
}

/// Directional covariant derivative `∇_X T` (contracts the derivative slot with `X`).
pub fn covariant_along<S: Smooth>(nabla_t: &Tensor<S>, x: &[S]) -> Tensor<S> {
    let n = nabla_t.dim();
    let rank = nabla_t.rank() - 1;
    let mut full = vec![0usize; rank + 1];
    Tensor::from_fn(n, nabla_t.upper(), nabla_t.lower() - 1, |idx| {
        full[..rank].copy_from_slice(idx);
        sum_products((0..n).map(|m| {
            full[rank] = m;
            (nabla_t.get(&full).clone(), x[m].clone())
        }))
    })
}

/// Curvature tensor, Ricci tensor, Ricci endomorphism and scalar curvature.
#[derive(Debug, Clone)]
pub struct CurvatureData<S> {
    pub riemann: Tensor<S>,
    pub ricci: Tensor<S>,
    pub ricci_sharp: Tensor<S>,
    pub scalar: S,
}

/// `R^a_{ijk} = ∂_iΓ^a_{jk} − ∂_jΓ^a_{ik} + Γ^a_{im}Γ^m_{jk} − Γ^a_{jm}Γ^m_{ik}`.
pub fn riemann<S: Smooth>(gamma: &Tensor<S>) -> Tensor<S> {
    let n = gamma.dim();
    let dgamma = partial_derivative(gamma); // [a; j, k, i] = ∂_i Γ^a_jk
    Tensor::from_fn(n, 1, 3, |idx| {
        let (a, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = dgamma.get(&[a, j, k, i]).sub(dgamma.get(&[a, i, k, j]));
        for m in 0..n {
            let x = gamma.get(&[a, i, m]);
            let y = gamma.get(&[m, j, k]);
            if !x.is_zero() && !y.is_zero() {
                acc = acc.add(&x.mul(y));
            }
            let x = gamma.get(&[a, j, m]);
            let y = gamma.get(&[m, i, k]);
            if !x.is_zero() && !y.is_zero() {
                acc = acc.sub(&x.mul(y));
            }
        }
        acc
    })
}

pub fn curvature<S: Smooth>(metric: &MetricData<S>) -> Result<CurvatureData<S>> {
    let riemann = riemann(&metric.gamma);
    let ricci = riemann.contract(0, 0)?;
    let ricci_sharp = raise_first(&ricci, &metric.g_inv);
    let scalar = ricci_sharp.contract(0, 0)?.as_scalar().clone();
    Ok(CurvatureData { riemann, ricci, ricci_sharp, scalar })
}

/// `(g⁻¹ B)^a_b = g^{am} B_{mb}` for a (0,2) tensor `B`.
pub fn raise_first<S: Field>(b: &Tensor<S>, g_inv: &Tensor<S>) -> Tensor<S> {
    let n = b.dim();
    Tensor::from_fn(n, 1, 1, |i| sum_products((0..n).map(|m| (g_inv.get(&[i[0], m]).clone(), b.get(&[m, i[1]]).clone()))))
}

/// `(g A)_{ab} = g_{am} A^m_b` for a (1,1) tensor `A`.
pub fn lower_first<S: Field>(a: &Tensor<S>, g: &Tensor<S>) -> Tensor<S> {
    let n = a.dim();
    Tensor::from_fn(n, 0, 2, |i| sum_products((0..n).map(|m| (g.get(&[i[0], m]).clone(), a.get(&[m, i[1]]).clone()))))
}

/// Lie derivative of an arbitrary tensor along a vector field `v` (components `v^a`).
/// `(ℒ_V T) = V^m ∂_m T − Σ_upper T^{..m..} ∂_m V^a + Σ_lower T_{..m..} ∂_b V^m`.
pub fn lie_derivative<S: Smooth>(t: &Tensor<S>, v: &Tensor<S>) -> Tensor<S> {
    let n = t.dim();
    let (r, s) = (t.upper(), t.lower());
    let rank = r + s;
    let dv: Vec<Vec<S>> = (0..n).map(|a| (0..n).map(|m| v.data()[a].partial(m)).collect()).collect(); // dv[a][m] = ∂_m V^a
    let dt = partial_derivative(t);
    let mut scratch = vec![0usize; rank];
    let mut full = vec![0usize; rank + 1];
    Tensor::from_fn(n, r, s, |idx| {
        full[..rank].copy_from_slice(idx);
        let mut acc = sum_products((0..n).map(|m| {
            full[rank] = m;
            (v.data()[m].clone(), dt.get(&full).clone())
        }));
        for slot in 0..rank {
            scratch.copy_from_slice(idx);
            for m in 0..n {
                scratch[slot] = m;
                let comp = t.get(&scratch);
                if comp.is_zero() {
                    continue;
                }
                if slot < r {
                    let d = &dv[idx[slot]][m];
                    if !d.is_zero() {
                        acc = acc.sub(&comp.mul(d));
                    }
                } else {
                    let d = &dv[m][idx[slot]];
                    if !d.is_zero() {
                        acc = acc.add(&comp.mul(d));
                    }
                }
            }
        }
        acc
    })
}

/// Lie bracket `[X,Y]^a = X^m ∂_m Y^a − Y^m ∂_m X^a`.
pub fn lie_bracket<S: Smooth>(x: &[S], y: &[S]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|a| {
            let p = sum_products((0..n).map(|m| (x[m].clone(), y[a].partial(m))));
            let q = sum_products((0..n).map(|m| (y[m].clone(), x[a].partial(m))));
            p.sub(&q)
        })
        .collect()
}

/// Lie derivative of the connection, `(ℒ_V∇)(∂_i, ∂_j) = L^a_{ij} ∂_a`:
/// `L^a_{ij} = ∂_i∂_jV^a + V^m∂_mΓ^a_{ij} − Γ^m_{ij}∂_mV^a + Γ^a_{mj}∂_iV^m + Γ^a_{im}∂_jV^m`.
pub fn lie_connection<S: Smooth>(v: &Tensor<S>, gamma: &Tensor<S>) -> Tensor<S> {
    let n = v.dim();
    let vv = v.data();
    let dv: Vec<Vec<S>> = (0..n).map(|a| (0..n).map(|m| vv[a].partial(m)).collect()).collect();
    let dgamma = partial_derivative(gamma);
    Tensor::from_fn(n, 1, 2, |idx| {
        let (a, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = dv[a][j].partial(i);
        acc = acc.add(&sum_products((0..n).map(|m| (vv[m].clone(), dgamma.get(&[a, i, j, m]).clone()))));
        acc = acc.sub(&sum_products((0..n).map(|m| (gamma.get(&[m, i, j]).clone(), dv[a][m].clone()))));
        acc = acc.add(&sum_products((0..n).map(|m| (gamma.get(&[a, m, j]).clone(), dv[m][i].clone()))));
        acc.add(&sum_products((0..n).map(|m| (gamma.get(&[a, i, m]).clone(), dv[m][j].clone()))))
    })
}

/// Yano's formula `(ℒ_V R)^a_{ijk} = (∇L)^a_{jk;i} − (∇L)^a_{ik;j}` from
/// `L = ℒ_V∇`.
pub fn lie_curvature_from_connection<S: Smooth>(lie_conn: &Tensor<S>, gamma: &Tensor<S>) -> Tensor<S> {
    let n = lie_conn.dim();
    let nabla = covariant_derivative(lie_conn, gamma);
    Tensor::from_fn(n, 1, 3, |idx| {
        let (a, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
        nabla.get(&[a, j, k, i]).sub(nabla.get(&[a, i, k, j]))
    })
}

/// `Hess_v(∂_i,∂_j) = ∂_i∂_j v − Γ^m_{ij} ∂_m v`.
pub fn hessian<S: Smooth>(v: &S, gamma: &Tensor<S>) -> Tensor<S> {
    let n = gamma.dim();
    let dv: Vec<S> = (0..n).map(|m| v.partial(m)).collect();
    Tensor::from_fn(n, 0, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        dv[j].partial(i).sub(&sum_products((0..n).map(|m| (gamma.get(&[m, i, j]).clone(), dv[m].clone()))))
    })
}

/// `∇v = g⁻¹ dv`.
pub fn gradient<S: Smooth>(v: &S, g_inv: &Tensor<S>) -> Tensor<S> {
    let n = g_inv.dim();
    let dv: Vec<S> = (0..n).map(|m| v.partial(m)).collect();
    Tensor::from_fn(n, 1, 0, |i| sum_products((0..n).map(|m| (g_inv.get(&[i[0], m]).clone(), dv[m].clone()))))
}

/// `(ℒ_Z g)(X,Y) = g(∇_X Z, Y) + g(X, ∇_Y Z)` in components.
pub fn lie_metric_via_connection<S: Smooth>(z: &Tensor<S>, metric: &MetricData<S>) -> Tensor<S> {
    let n = z.dim();
    let nz = covariant_derivative(z, &metric.gamma); // [a; m] = (∇_m Z)^a
    let g = &metric.g;
    Tensor::from_fn(n, 0, 2, |idx| {
        let (x, y) = (idx[0], idx[1]);
        let p = sum_products((0..n).map(|a| (nz.get(&[a, x]).clone(), g.get(&[a, y]).clone())));
        let q = sum_products((0..n).map(|a| (g.get(&[x, a]).clone(), nz.get(&[a, y]).clone())));
        p.add(&q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Expr, Params};
    use crate::jet::{DerivativeTable, Jet, JetSpace};
    use crate::tensor::normalized_residual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn sym_metric(rows: &[&[&str]]) -> Tensor<Expr> {
        let n = rows.len();
        let c = names(n);
        let r = rows.iter().map(|row| row.iter().map(|s| parse_expr(s, &c, &[]).unwrap()).collect()).collect();
        Tensor::from_rows(0, 2, r).unwrap()
    }

    fn jet_metric(g: &Tensor<Expr>, at: &[f64]) -> MetricData<Jet> {
        let space = JetSpace::shared(g.dim());
        let gj = g.map(|e| DerivativeTable::new(e, space.clone(), 3).jet_at(at, &Params::new()).unwrap());
        MetricData::new(gj).unwrap()
    }

    fn values(t: &Tensor<Jet>) -> Vec<f64> {
        t.data().iter().map(Jet::value).collect()
    }

    fn generic_metric() -> Tensor<Expr> {
        sym_metric(&[
            &["2 + sin(x1*x2)", "0.3*x3", "0.1*exp(x1)"],
            &["0.3*x3", "1.5 + x1^2", "0.2*cos(x2)"],
            &["0.1*exp(x1)", "0.2*cos(x2)", "1 + x2^2*x3^2"],
        ])
    }

    #[test]
    fn flat_metric_has_no_connection() {
        let g = sym_metric(&[&["1", "0"], &["0", "1"]]);
        let m = MetricData::new(g).unwrap();
        assert!(m.gamma.data().iter().all(|e| e.is_zero()));
        let c = curvature(&m).unwrap();
        assert!(c.riemann.data().iter().all(|e| e.is_zero()));
    }

    #[test]
    fn symbolic_and_jet_christoffel_agree() {
        let g = generic_metric();
        let sym = MetricData::new(g.clone()).unwrap();
        let at = [0.2, -0.1, 0.3];
        let jet = jet_metric(&g, &at);
        let p = Params::new();
        let sv: Vec<f64> = sym.gamma.data().iter().map(|e| e.eval_coords(&at, &p).unwrap()).collect();
        assert!(normalized_residual(&sv, &values(&jet.gamma)) < 1e-13);
    }

    #[test]
    fn curvature_symmetries_on_generic_metric() {
        let g = generic_metric();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let at: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let m = jet_metric(&g, &at);
            let metricity = covariant_derivative(&m.g, &m.gamma);
            assert!(values(&metricity).iter().all(|v| v.abs() < 1e-12));
            let c = curvature(&m).unwrap();
            let r = values(&c.riemann);
            let n = 3;
            let at4 = |a: usize, i: usize, j: usize, k: usize| r[((a * n + i) * n + j) * n + k];
            let gv = values(&m.g);
            for a in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            assert!((at4(a, i, j, k) + at4(a, j, i, k)).abs() < 1e-12);
                            let bianchi = at4(a, i, j, k) + at4(a, j, k, i) + at4(a, k, i, j);
                            assert!(bianchi.abs() < 1e-11);
                            // R_{bijk} antisymmetric in (b, k)
                            let low = |b: usize, k: usize| (0..n).map(|c| gv[b * n + c] * at4(c, i, j, k)).sum::<f64>();
                            assert!((low(a, k) + low(k, a)).abs() < 1e-11);
                        }
                    }
                }
            }
            let ric = values(&c.ricci);
            for i in 0..n {
                for j in 0..n {
                    assert!((ric[i * n + j] - ric[j * n + i]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn lie_derivative_of_metric_two_ways() {
        let g = generic_metric();
        let c = names(3);
        let space = JetSpace::shared(3);
        let at = [0.1, 0.25, -0.2];
        let vsym = ["x2*x3", "sin(x1)", "1 + x1*x2"].map(|s| parse_expr(s, &c, &[]).unwrap());
        let v = Tensor::from_vector(1, 0, vsym.iter().map(|e| DerivativeTable::new(e, space.clone(), 3).jet_at(&at, &Params::new()).unwrap()).collect()).unwrap();
        let m = jet_metric(&g, &at);
        let a = lie_derivative(&m.g, &v);
        let b = lie_metric_via_connection(&v, &m);
        assert!(normalized_residual(&values(&a), &values(&b)) < 1e-12);
    }

    #[test]
    fn lie_connection_is_symmetric_and_matches_definition() {
        // (ℒ_V∇)(X,Y) = [V, ∇_X Y] − ∇_{[V,X]}Y − ∇_X [V,Y] on coordinate fields,
        // computed here with symbolic expressions and evaluated.
        let g = generic_metric();
        let c = names(3);
        let sym = MetricData::new(g).unwrap();
        let vsym: Vec<Expr> = ["x2*x3", "sin(x1)", "1 + x1*x2"].iter().map(|s| parse_expr(s, &c, &[]).unwrap()).collect();
        let v = Tensor::from_vector(1, 0, vsym.clone()).unwrap();
        let l = lie_connection(&v, &sym.gamma);
        let at = [0.1, 0.25, -0.2];
        let p = Params::new();
        let n = 3;
        let coord = |i: usize| -> Vec<Expr> { (0..n).map(|a| Expr::constant(if a == i { 1.0 } else { 0.0 })).collect() };
        let nabla = |x: &[Expr], y: &[Expr]| -> Vec<Expr> {
            (0..n)
                .map(|a| {
                    let d = sum_products((0..n).map(|m| (x[m].clone(), y[a].partial(m))));
                    let mut acc = d;
                    for i in 0..n {
                        for j in 0..n {
                            acc = acc.add(&x[i].mul(&y[j]).mul(sym.gamma.get(&[a, i, j])));
                        }
                    }
                    acc
                })
                .collect()
        };
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (coord(i), coord(j));
                let t1 = lie_bracket(&vsym, &nabla(&x, &y));
                let t2 = nabla(&lie_bracket(&vsym, &x), &y);
                let t3 = nabla(&x, &lie_bracket(&vsym, &y));
                for a in 0..n {
                    let want = t1[a].sub(&t2[a]).sub(&t3[a]).eval_coords(&at, &p).unwrap();
                    let got = l.get(&[a, i, j]).eval_coords(&at, &p).unwrap();
                    assert!((want - got).abs() < 1e-12, "{a}{i}{j}: {want} vs {got}");
                    let sym_ij = l.get(&[a, j, i]).eval_coords(&at, &p).unwrap();
                    assert!((got - sym_ij).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn yano_formula_matches_direct_lie_derivative_of_curvature() {
        let g = generic_metric();
        let c = names(3);
        let at = [-0.3, 0.2, 0.15];
        let space = JetSpace::shared(3);
        let m = jet_metric(&g, &at);
        let vsym = ["x2*x3", "sin(x1)", "1 + x1*x2"].map(|s| parse_expr(s, &c, &[]).unwrap());
        let v = Tensor::from_vector(1, 0, vsym.iter().map(|e| DerivativeTable::new(e, space.clone(), 3).jet_at(&at, &Params::new()).unwrap()).collect()).unwrap();
        let curv = curvature(&m).unwrap();
        let direct = lie_derivative(&curv.riemann, &v);
        let yano = lie_curvature_from_connection(&lie_connection(&v, &m.gamma), &m.gamma);
        assert!(normalized_residual(&values(&direct), &values(&yano)) < 1e-11);
    }

    #[test]
    fn hessian_of_quadratic_on_flat_space() {
        let c = names(3);
        let g = sym_metric(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
        let m = MetricData::new(g.clone()).unwrap();
        let v = parse_expr("0.5*(x1^2 + x2^2 + x3^2)", &c, &[]).unwrap();
        let h = hessian(&v, &m.gamma);
        for (a, b) in h.data().iter().zip(g.data()) {
            assert_eq!(a.eval_coords(&[0.3, 0.1, 0.2], &Params::new()).unwrap(), b.as_const().unwrap());
        }
        let k = Expr::constant(3.0);
        assert!(hessian(&k, &m.gamma).data().iter().all(|e| e.is_zero()));
        assert!(gradient(&k, &m.g_inv).data().iter().all(|e| e.is_zero()));
    }
}
