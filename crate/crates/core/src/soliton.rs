//! *-η-Ricci solitons: residuals, Lie derivatives of the connection and the
//! curvature along the potential field, the constants proposition, contact
//! fields, Einstein fits and the theorem harnesses.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{GeometryError, Result};
use crate::expr::{Expr, Point};
use crate::jet::{DerivativeTable, Jet, JetSpace};
use crate::kenmotsu::beta_variation;
use crate::report::{collect_over, max_over, mean, spread, CheckResult, Predicate, TheoremVerdict};
use crate::riemann::{self, covariant_derivative};
use crate::scalar::{Ring, Smooth};
use crate::star::{fit_eta_einstein, star_ricci_sym};
use crate::structure::{
    delta, residual, values, Checker, LocalGeometry, Snapshot, WacsBundle, FIELD_ORDER,
};
use crate::tensor::{normalized_residual, Tensor, TensorField};

/// Jet order for a potential function: its gradient carries `FIELD_ORDER`.
pub const POTENTIAL_ORDER: usize = FIELD_ORDER + 1;

#[derive(Debug, Clone)]
pub enum PotentialField {
    Vector(TensorField),
    /// `V = ∇v`.
    Potential(Expr),
}

#[derive(Debug, Clone)]
pub struct SolitonData {
    pub field: PotentialField,
    pub lambda: f64,
    pub mu: f64,
}

impl SolitonData {
    pub fn vector(v: TensorField, lambda: f64, mu: f64) -> SolitonData {
        SolitonData { field: PotentialField::Vector(v), lambda, mu }
    }

    pub fn potential(v: Expr, lambda: f64, mu: f64) -> SolitonData {
        SolitonData { field: PotentialField::Potential(v), lambda, mu }
    }

    pub fn is_gradient(&self) -> bool {
        matches!(self.field, PotentialField::Potential(_))
    }
}

/// The potential field at one sample point, with lazily computed Lie data.
#[derive(Debug)]
pub struct SolitonPoint<'a> {
    pub geo: &'a LocalGeometry,
    pub v: Tensor<Jet>,
    pub potential: Option<Jet>,
    pub lambda: f64,
    pub mu: f64,
    lie_g: OnceLock<Tensor<Jet>>,
    nabla_lie_g: OnceLock<Tensor<Jet>>,
    lie_conn: OnceLock<Tensor<Jet>>,
    lie_r: OnceLock<Tensor<Jet>>,
}

impl<'a> SolitonPoint<'a> {
    /// `ℒ_V g`.
    pub fn lie_g(&self) -> &Tensor<Jet> {
        self.lie_g.get_or_init(|| riemann::lie_derivative(self.geo.g(), &self.v))
    }

    /// `(∇_Z ℒ_V g)(X,Y)` as `[x, y, z]`.
    pub fn nabla_lie_g(&self) -> &Tensor<Jet> {
        self.nabla_lie_g.get_or_init(|| covariant_derivative(self.lie_g(), self.geo.gamma()))
    }

    /// `(ℒ_V∇)(∂_i,∂_j) = L^a_{ij}`, as `[a; i, j]`.
    pub fn lie_conn(&self) -> &Tensor<Jet> {
        self.lie_conn.get_or_init(|| riemann::lie_connection(&self.v, self.geo.gamma()))
    }

    /// `ℒ_V R`, as `[a; i, j, k]`.
    pub fn lie_r(&self) -> &Tensor<Jet> {
        self.lie_r.get_or_init(|| riemann::lie_derivative(&self.geo.curvature().riemann, &self.v))
    }

    pub fn lie_eta(&self) -> Tensor<f64> {
        values(&riemann::lie_derivative(&self.geo.eta, &self.v))
    }

    pub fn lie_xi(&self) -> Tensor<f64> {
        values(&riemann::lie_derivative(&self.geo.xi, &self.v))
    }
}

/// Evaluates the potential field at every sample point.
pub fn soliton_points<'a>(
    bundle: &WacsBundle,
    soliton: &SolitonData,
    points: &[Point],
    geos: &'a [LocalGeometry],
) -> Result<Vec<SolitonPoint<'a>>> {
    let space = JetSpace::shared(bundle.dim());
    let make = |v: Tensor<Jet>, potential: Option<Jet>, geo: &'a LocalGeometry| SolitonPoint {
        geo,
        v,
        potential,
        lambda: soliton.lambda,
        mu: soliton.mu,
        lie_g: OnceLock::new(),
        nabla_lie_g: OnceLock::new(),
        lie_conn: OnceLock::new(),
        lie_r: OnceLock::new(),
    };
    match &soliton.field {
        PotentialField::Vector(v) => {
            v.expect_valence(1, 0)?;
            if v.dim() != bundle.dim() {
                return Err(GeometryError::Dimension(bundle.dim(), v.dim()));
            }
            let tables = v.map(|e| DerivativeTable::new(&e.bind_params(bundle.params()), space.clone(), FIELD_ORDER));
            points
                .iter()
                .zip(geos)
                .map(|(p, geo)| {
                    let jets = tables.try_map(|t| t.jet_at(p.values(), &Default::default()))?;
                    Ok(make(jets, None, geo))
                })
                .collect()
        }
        PotentialField::Potential(e) => points
            .iter()
            .zip(geos)
            .map(|(p, geo)| {
                let v = bundle.scalar_jet(e, POTENTIAL_ORDER, p)?;
                let grad = riemann::gradient(&v, &geo.metric.g_inv);
                Ok(make(grad, Some(v), geo))
            })
            .collect(),
    }
}

/// `½ℒ_V g + sym Ric* − λg − μη⊗η` as `(lhs, rhs)`.
pub fn soliton_sides(sp: &SolitonPoint) -> (Tensor<f64>, Tensor<f64>) {
    let s = Snapshot::of(sp.geo);
    let lg = values(sp.lie_g());
    let rs = star_ricci_sym(sp.geo);
    let lhs = Tensor::from_fn(s.dim, 0, 2, |i| 0.5 * lg.get(i) + rs.get(i));
    let rhs = Tensor::from_fn(s.dim, 0, 2, |i| sp.lambda * s.g.get(i) + sp.mu * s.eta[i[0]] * s.eta[i[1]]);
    (lhs, rhs)
}

pub fn soliton_residual(sp: &SolitonPoint) -> f64 {
    let (l, r) = soliton_sides(sp);
    residual(&l, &r)
}

/// `½(ℒ_V g)(X,Y) + Ric(X,QY) = λg(X,Y) − (2n−1)β²g(X,QY) + (μ−β²)η(X)η(Y)`.
pub fn soliton_residual_expanded(sp: &SolitonPoint) -> Result<f64> {
    let s = Snapshot::of(sp.geo);
    let b2 = s.beta()?.powi(2);
    let k = 2.0 * s.n as f64 - 1.0;
    let lg = values(sp.lie_g());
    let ric = values(&sp.geo.curvature().ricci);
    let lhs = Tensor::from_fn(s.dim, 0, 2, |i| {
        let rq: f64 = (0..s.dim).map(|c| ric.get(&[i[0], c]) * s.q.get(&[c, i[1]])).sum();
        0.5 * lg.get(i) + rq
    });
    let rhs = Tensor::from_fn(s.dim, 0, 2, |i| {
        sp.lambda * s.g.get(i) - k * b2 * s.gq(i[0], i[1]) + (sp.mu - b2) * s.eta[i[0]] * s.eta[i[1]]
    });
    Ok(residual(&lhs, &rhs))
}

/// `‖[Ric♯, Q]‖`, normalized.
pub fn ricci_q_commutator(geo: &LocalGeometry) -> f64 {
    let s = Snapshot::of(geo);
    let rs = values(&geo.curvature().ricci_sharp);
    let rq = Tensor::from_fn(s.dim, 1, 1, |i| (0..s.dim).map(|c| rs.get(&[i[0], c]) * s.q.get(&[c, i[1]])).sum());
    let qr = Tensor::from_fn(s.dim, 1, 1, |i| (0..s.dim).map(|c| s.q.get(&[i[0], c]) * rs.get(&[c, i[1]])).sum());
    residual(&rq, &qr)
}

/// Soliton equation residuals, then (if the equation holds) the identity
/// chain for `ℒ_V∇` and `ℒ_V R` and the constants proposition.
pub fn check_soliton(points: &[SolitonPoint], tol: f64, skip: Option<String>) -> Vec<CheckResult> {
    let mut c: Checker<SolitonPoint> = Checker::new(points, tol);
    c.skip = skip;
    if c.skip.is_none() {
        if let Some(reason) = constant_beta_reason(points) {
            c.skip = Some(reason);
        }
    }
    let ok = c.check("soliton.equation", "½ℒ_V g + Ric* = λg + μη⊗η", |sp| Ok(soliton_residual(sp)));
    c.check("soliton.equation_expanded", "½ℒ_V g + Ric(X,QY) = λg − (2n−1)β²g(X,QY) + (μ−β²)η⊗η", soliton_residual_expanded);
    if c.skip.is_none() {
        let comm = max_over(points, |sp| Ok(ricci_q_commutator(sp.geo))).unwrap_or(f64::INFINITY);
        c.push(CheckResult::info("soliton.ricci_q_commutator", "‖[Ric♯, Q]‖", comm));
        let asym = max_over(points, |sp| Ok(crate::star::star_asymmetry(sp.geo))).unwrap_or(f64::INFINITY);
        c.push(CheckResult::info("soliton.star_asymmetry", "‖Ric* − Ric*ᵀ‖ (symmetric part used)", asym));
    }
    if c.skip.is_none() && !ok {
        c.skip = Some("soliton equation does not hold".into());
    }
    c.check("soliton.connection_symmetric", "(ℒ_V∇)(X,Y) = (ℒ_V∇)(Y,X)", |sp| {
        let l = values(sp.lie_conn());
        let t = Tensor::from_fn(l.dim(), 1, 2, |i| *l.get(&[i[0], i[2], i[1]]));
        Ok(residual(&l, &t))
    });
    c.check("soliton.nabla_lie_g", "(∇_Zℒ_V g)(X,Y) = −2(∇_Z Ric)(X,QY) − 2Ric(X,(∇_Z Q)Y) − 2(2n−1)β²g(X,(∇_Z Q)Y) + 2β(μ−β²){g(X,Z)η(Y) + g(Y,Z)η(X) − 2η(X)η(Y)η(Z)}", nabla_lie_g_identity);
    c.check("soliton.lie_g_connection", "(∇_Zℒ_V g)(X,Y) = g((ℒ_V∇)(Z,X),Y) + g((ℒ_V∇)(Z,Y),X)", |sp| {
        let s = Snapshot::of(sp.geo);
        let l = values(sp.lie_conn());
        let d = s.dim;
        let lhs = values(sp.nabla_lie_g());
        let rhs = Tensor::from_fn(d, 0, 3, |i| {
            let (x, y, z) = (i[0], i[1], i[2]);
            (0..d).map(|a| l.get(&[a, z, x]) * s.g.get(&[a, y]) + l.get(&[a, z, y]) * s.g.get(&[a, x])).sum()
        });
        Ok(residual(&lhs, &rhs))
    });
    c.check("soliton.connection_cyclic", "2g((ℒ_V∇)(X,Y),Z) = (∇_Xℒ_V g)(Y,Z) + (∇_Yℒ_V g)(Z,X) − (∇_Zℒ_V g)(X,Y)", |sp| {
        let s = Snapshot::of(sp.geo);
        let l = values(sp.lie_conn());
        let n = values(sp.nabla_lie_g());
        let d = s.dim;
        let lhs = Tensor::from_fn(d, 0, 3, |i| {
            let (x, y, z) = (i[0], i[1], i[2]);
            2.0 * (0..d).map(|a| l.get(&[a, x, y]) * s.g.get(&[a, z])).sum::<f64>()
        });
        let rhs = Tensor::from_fn(d, 0, 3, |i| {
            let (x, y, z) = (i[0], i[1], i[2]);
            n.get(&[y, z, x]) + n.get(&[z, x, y]) - n.get(&[x, y, z])
        });
        Ok(residual(&lhs, &rhs))
    });
    c.check("soliton.connection_formula", "g((ℒ_V∇)(X,Y),Z) = (∇_Z Ric)(X,QY) − (∇_X Ric)(Y,QZ) − (∇_Y Ric)(Z,QX) + 2β(μ−β²)η(Z){g(X,Y) − η(X)η(Y)} + ε(X,Y,Z)", connection_formula_identity);
    c.check("soliton.connection_xi", "(ℒ_V∇)(X,ξ) = 2βRic♯QX + 4nβ³QX", connection_xi_identity);
    c.check("soliton.yano", "(ℒ_V R)_{X,Y}Z = (∇_X ℒ_V∇)(Y,Z) − (∇_Y ℒ_V∇)(X,Z)", |sp| {
        let yano = riemann::lie_curvature_from_connection(sp.lie_conn(), sp.geo.gamma());
        Ok(crate::structure::tensor_residual(sp.lie_r(), &yano))
    });
    c.check("soliton.lie_r_xi", "(ℒ_V R)_{X,Y}ξ = 2β{(∇_X Ric♯)QY − (∇_Y Ric♯)QX} + 2β²{η(X)Ric♯Y − η(Y)Ric♯X} + 4β²{η(X)Ric♯Q̃Y − η(Y)Ric♯Q̃X} + 4nβ⁴{η(X)Y − η(Y)X} + 8nβ⁴{η(X)Q̃Y − η(Y)Q̃X}", lie_r_xi_identity);
    c.check("soliton.lie_r_x_xi_xi", "(ℒ_V R)_{X,ξ}ξ = 0", |sp| {
        let (lhs, scale) = lie_r_x_xi_xi(sp);
        Ok(lhs.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale)
    });
    // Proposition on the soliton constants.
    c.check("proposition.lambda_plus_mu", "λ + μ = 0", |sp| Ok((sp.lambda + sp.mu).abs()));
    c.check("proposition.lie_eta_xi", "(ℒ_V η)(ξ) = 0", |sp| {
        let s = Snapshot::of(sp.geo);
        let le = sp.lie_eta();
        Ok((0..s.dim).map(|i| le.data()[i] * s.xi[i]).sum::<f64>().abs())
    });
    c.check("proposition.eta_lie_xi", "η(ℒ_V ξ) = 0", |sp| {
        let s = Snapshot::of(sp.geo);
        let lx = sp.lie_xi();
        Ok((0..s.dim).map(|i| lx.data()[i] * s.eta[i]).sum::<f64>().abs())
    });
    c.check("proposition.lie_eta_lie_xi", "(ℒ_V η)(X) = g(X, ℒ_V ξ)", |sp| {
        let s = Snapshot::of(sp.geo);
        let lx = sp.lie_xi();
        let rhs: Vec<f64> = (0..s.dim).map(|x| (0..s.dim).map(|a| s.g.get(&[x, a]) * lx.data()[a]).sum()).collect();
        Ok(normalized_residual(sp.lie_eta().data(), &rhs))
    });
    c.check("proposition.lie_g_xi", "(ℒ_V g)(X,ξ) = 2(λ+μ)η(X)", |sp| {
        let s = Snapshot::of(sp.geo);
        let lg = values(sp.lie_g());
        let lhs: Vec<f64> = (0..s.dim).map(|x| (0..s.dim).map(|c| lg.get(&[x, c]) * s.xi[c]).sum()).collect();
        let rhs: Vec<f64> = s.eta.iter().map(|e| 2.0 * (sp.lambda + sp.mu) * e).collect();
        Ok(normalized_residual(&lhs, &rhs))
    });
    c.check("proposition.lie_eta_cartan", "ℒ_V η = d(η(V)) + 2ι_V dη", |sp| {
        let geo = sp.geo;
        let n = geo.dim();
        let eta_v = (0..n).fold(Jet::zero(), |acc, a| acc.add(&geo.eta.data()[a].mul(&sp.v.data()[a])));
        let d_eta = crate::forms::d1(&geo.eta)?;
        let rhs: Vec<f64> = (0..n)
            .map(|x| eta_v.partial(x).value() + 2.0 * (0..n).map(|i| sp.v.data()[i].value() * d_eta.get(&[i, x]).value()).sum::<f64>())
            .collect();
        Ok(normalized_residual(sp.lie_eta().data(), &rhs))
    });
    c.out
}

fn constant_beta_reason(points: &[SolitonPoint]) -> Option<String> {
    let geos: Vec<&LocalGeometry> = points.iter().map(|sp| sp.geo).collect();
    let mut vals = Vec::new();
    let mut grad = 0.0f64;
    for g in geos {
        match &g.beta {
            None => return Some(GeometryError::MissingBeta.to_string()),
            Some(b) => {
                vals.push(b.value());
                for k in 0..g.dim() {
                    grad = grad.max(b.partial(k).value().abs());
                }
            }
        }
    }
    let s = spread(&vals);
    if s > crate::kenmotsu::BETA_CONSTANT_TOL || grad > crate::kenmotsu::BETA_CONSTANT_TOL {
        Some(GeometryError::NonConstantBeta(s.max(grad)).to_string())
    } else {
        None
    }
}

fn nabla_lie_g_identity(sp: &SolitonPoint) -> Result<f64> {
    let s = Snapshot::of(sp.geo);
    let b = s.beta()?;
    let b2 = b * b;
    let k = 2.0 * s.n as f64 - 1.0;
    let d = s.dim;
    let nric = values(sp.geo.nabla_ricci());
    let nq = values(sp.geo.nabla_q());
    let ric = values(&sp.geo.curvature().ricci);
    let lhs = values(sp.nabla_lie_g());
    let rhs = Tensor::from_fn(d, 0, 3, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        let t1: f64 = (0..d).map(|c| nric.get(&[x, c, z]) * s.q.get(&[c, y])).sum();
        let t2: f64 = (0..d).map(|a| ric.get(&[x, a]) * nq.get(&[a, y, z])).sum();
        let t3: f64 = (0..d).map(|a| s.g.get(&[x, a]) * nq.get(&[a, y, z])).sum();
        let t4 = s.g.get(&[x, z]) * s.eta[y] + s.g.get(&[y, z]) * s.eta[x] - 2.0 * s.eta[x] * s.eta[y] * s.eta[z];
        -2.0 * t1 - 2.0 * t2 - 2.0 * k * b2 * t3 + 2.0 * b * (sp.mu - b2) * t4
    });
    Ok(residual(&lhs, &rhs))
}

fn connection_formula_identity(sp: &SolitonPoint) -> Result<f64> {
    let s = Snapshot::of(sp.geo);
    let b = s.beta()?;
    let b2 = b * b;
    let k = 2.0 * s.n as f64 - 1.0;
    let d = s.dim;
    let nric = values(sp.geo.nabla_ricci());
    let nq = values(sp.geo.nabla_q());
    let ric = values(&sp.geo.curvature().ricci);
    let l = values(sp.lie_conn());
    // (∇_Z Ric)(X, QY) with nabla layout [x, c, z]
    let dric_q = |z: usize, x: usize, y: usize| -> f64 { (0..d).map(|c| nric.get(&[x, c, z]) * s.q.get(&[c, y])).sum() };
    // T(X, (∇_Z Q)Y) for T = Ric and T = g
    let ric_dq = |x: usize, z: usize, y: usize| -> f64 { (0..d).map(|a| ric.get(&[x, a]) * nq.get(&[a, y, z])).sum() };
    let g_dq = |x: usize, z: usize, y: usize| -> f64 { (0..d).map(|a| s.g.get(&[x, a]) * nq.get(&[a, y, z])).sum() };
    let lhs = Tensor::from_fn(d, 0, 3, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        (0..d).map(|a| l.get(&[a, x, y]) * s.g.get(&[a, z])).sum()
    });
    let rhs = Tensor::from_fn(d, 0, 3, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        let eps = ric_dq(x, z, y) - ric_dq(z, y, x) - ric_dq(y, x, z) + k * b2 * (g_dq(x, z, y) - g_dq(z, y, x) - g_dq(y, x, z));
        dric_q(z, x, y) - dric_q(x, y, z) - dric_q(y, z, x)
            + 2.0 * b * (sp.mu - b2) * s.eta[z] * (s.g.get(&[x, y]) - s.eta[x] * s.eta[y])
            + eps
    });
    Ok(residual(&lhs, &rhs))
}

fn connection_xi_identity(sp: &SolitonPoint) -> Result<f64> {
    let s = Snapshot::of(sp.geo);
    let b = s.beta()?;
    let nf = s.n as f64;
    let d = s.dim;
    let l = values(sp.lie_conn());
    let rs = values(&sp.geo.curvature().ricci_sharp);
    let lhs = Tensor::from_fn(d, 1, 1, |i| (0..d).map(|c| l.get(&[i[0], i[1], c]) * s.xi[c]).sum());
    let rhs = Tensor::from_fn(d, 1, 1, |i| {
        let (a, x) = (i[0], i[1]);
        let rq: f64 = (0..d).map(|c| rs.get(&[a, c]) * s.q.get(&[c, x])).sum();
        2.0 * b * rq + 4.0 * nf * b.powi(3) * s.q.get(&[a, x])
    });
    Ok(residual(&lhs, &rhs))
}

fn lie_r_xi_identity(sp: &SolitonPoint) -> Result<f64> {
    let s = Snapshot::of(sp.geo);
    let b = s.beta()?;
    let nf = s.n as f64;
    let d = s.dim;
    let lr = values(sp.lie_r());
    let rs = values(&sp.geo.curvature().ricci_sharp);
    let nrs = values(sp.geo.nabla_ricci_sharp());
    let lhs = Tensor::from_fn(d, 1, 2, |i| (0..d).map(|c| lr.get(&[i[0], i[1], i[2], c]) * s.xi[c]).sum());
    // (∇_X Ric♯)QY with nabla layout [a; c, x]
    let drq = |a: usize, x: usize, y: usize| -> f64 { (0..d).map(|c| nrs.get(&[a, c, x]) * s.q.get(&[c, y])).sum() };
    let rqt = |a: usize, y: usize| -> f64 { (0..d).map(|c| rs.get(&[a, c]) * s.qt.get(&[c, y])).sum() };
    let rhs = Tensor::from_fn(d, 1, 2, |i| {
        let (a, x, y) = (i[0], i[1], i[2]);
        let (ex, ey) = (s.eta[x], s.eta[y]);
        2.0 * b * (drq(a, x, y) - drq(a, y, x))
            + 2.0 * b * b * (ex * rs.get(&[a, y]) - ey * rs.get(&[a, x]))
            + 4.0 * b * b * (ex * rqt(a, y) - ey * rqt(a, x))
            + 4.0 * nf * b.powi(4) * (ex * delta(a, y) - ey * delta(a, x))
            + 8.0 * nf * b.powi(4) * (ex * s.qt.get(&[a, y]) - ey * s.qt.get(&[a, x]))
    });
    Ok(residual(&lhs, &rhs))
}

/// Components of `(ℒ_V R)_{X,ξ}ξ` and the magnitude scale of `ℒ_V R`.
fn lie_r_x_xi_xi(sp: &SolitonPoint) -> (Vec<f64>, f64) {
    let s = Snapshot::of(sp.geo);
    let d = s.dim;
    let lr = values(sp.lie_r());
    let mut out = vec![0.0; d * d];
    for a in 0..d {
        for x in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                for k in 0..d {
                    acc += lr.get(&[a, x, c, k]) * s.xi[c] * s.xi[k];
                }
            }
            out[a * d + x] = acc;
        }
    }
    let scale = lr.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (out, scale)
}

/// `‖(ℒ_V R)_{X,ξ}ξ‖`, normalized by `max(1, |ℒ_V R|)`.
pub fn lie_r_x_xi_xi_residual(sp: &SolitonPoint) -> f64 {
    let (v, scale) = lie_r_x_xi_xi(sp);
    v.iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale
}

/// Gradient-soliton checks; only meaningful when the soliton has a potential.
pub fn check_gradient_soliton(points: &[SolitonPoint], tol: f64, skip: Option<String>) -> Vec<CheckResult> {
    let mut c: Checker<SolitonPoint> = Checker::new(points, tol);
    c.skip = skip;
    if c.skip.is_none() {
        if let Some(reason) = constant_beta_reason(points) {
            c.skip = Some(reason);
        } else if points.iter().any(|sp| sp.potential.is_none()) {
            c.skip = Some("soliton has no potential function".into());
        }
    }
    c.check("gradient.hessian_lie", "Hess_v = ½ℒ_{∇v} g", |sp| {
        let v = sp.potential.as_ref().ok_or_else(|| GeometryError::Slot("no potential".into()))?;
        let h = values(&riemann::hessian(v, sp.geo.gamma()));
        let lg = values(sp.lie_g()).scale(0.5);
        Ok(residual(&h, &lg))
    });
    let ok = c.check("gradient.equation", "Hess_v + Ric* = λg + μη⊗η", gradient_residual);
    c.check("gradient.operator_form", "∇_X∇v + Ric♯QX = λX − (2n−1)β²QX + (μ−β²)η(X)ξ", |sp| {
        let s = Snapshot::of(sp.geo);
        let b2 = s.beta()?.powi(2);
        let k = 2.0 * s.n as f64 - 1.0;
        let d = s.dim;
        let nv = values(&covariant_derivative(&sp.v, sp.geo.gamma()));
        let rs = values(&sp.geo.curvature().ricci_sharp);
        let lhs = Tensor::from_fn(d, 1, 1, |i| nv.get(i) + (0..d).map(|c| rs.get(&[i[0], c]) * s.q.get(&[c, i[1]])).sum::<f64>());
        let rhs = Tensor::from_fn(d, 1, 1, |i| {
            let (a, x) = (i[0], i[1]);
            sp.lambda * delta(a, x) - k * b2 * s.q.get(&[a, x]) + (sp.mu - b2) * s.eta[x] * s.xi[a]
        });
        Ok(residual(&lhs, &rhs))
    });
    if c.skip.is_none() && !ok {
        c.skip = Some("gradient soliton equation does not hold".into());
    }
    c.check("gradient.curvature_potential", "R_{X,Y}∇v = (∇_Y P)X − (∇_X P)Y + (2n−1)β²{(∇_Y Q)X − (∇_X Q)Y} + (μ−β²)β{η(Y)X − η(X)Y}, P = Ric♯Q", |sp| {
        let s = Snapshot::of(sp.geo);
        let b = s.beta()?;
        let k = 2.0 * s.n as f64 - 1.0;
        let d = s.dim;
        let geo = sp.geo;
        let p = crate::tensor::compose(&geo.curvature().ricci_sharp, &geo.q)?;
        let np = values(&covariant_derivative(&p, geo.gamma()));
        let nq = values(geo.nabla_q());
        let r = values(&geo.curvature().riemann);
        let v: Vec<f64> = sp.v.data().iter().map(Jet::value).collect();
        let lhs = Tensor::from_fn(d, 1, 2, |i| (0..d).map(|c| r.get(&[i[0], i[1], i[2], c]) * v[c]).sum());
        let rhs = Tensor::from_fn(d, 1, 2, |i| {
            let (a, x, y) = (i[0], i[1], i[2]);
            np.get(&[a, x, y]) - np.get(&[a, y, x]) + k * b * b * (nq.get(&[a, x, y]) - nq.get(&[a, y, x]))
                + (sp.mu - b * b) * b * (s.eta[y] * delta(a, x) - s.eta[x] * delta(a, y))
        });
        Ok(residual(&lhs, &rhs))
    });
    c.check("gradient.curvature_xi", "g(R_{X,Y}∇v, ξ) = −β²{η(X)Y(v) − η(Y)X(v)}", |sp| {
        let s = Snapshot::of(sp.geo);
        let b2 = s.beta()?.powi(2);
        let d = s.dim;
        let pot = sp.potential.as_ref().ok_or_else(|| GeometryError::Slot("no potential".into()))?;
        let dv: Vec<f64> = (0..d).map(|k| pot.partial(k).value()).collect();
        let r = values(&sp.geo.curvature().riemann);
        let v: Vec<f64> = sp.v.data().iter().map(Jet::value).collect();
        let lhs = Tensor::from_fn(d, 0, 2, |i| {
            let (x, y) = (i[0], i[1]);
            let mut acc = 0.0;
            for a in 0..d {
                let w: f64 = (0..d).map(|c| r.get(&[a, x, y, c]) * v[c]).sum();
                acc += w * s.eta[a];
            }
            acc
        });
        let rhs = Tensor::from_fn(d, 0, 2, |i| -b2 * (s.eta[i[0]] * dv[i[1]] - s.eta[i[1]] * dv[i[0]]));
        Ok(residual(&lhs, &rhs))
    });
    c.check("gradient.potential_collinear", "η(X)Y(v) − η(Y)X(v) = 0", |sp| {
        let s = Snapshot::of(sp.geo);
        let d = s.dim;
        let pot = sp.potential.as_ref().ok_or_else(|| GeometryError::Slot("no potential".into()))?;
        let dv: Vec<f64> = (0..d).map(|k| pot.partial(k).value()).collect();
        let t = Tensor::from_fn(d, 0, 2, |i| s.eta[i[0]] * dv[i[1]] - s.eta[i[1]] * dv[i[0]]);
        Ok(crate::structure::zero_residual_f64(&t))
    });
    c.out
}

pub fn gradient_residual(sp: &SolitonPoint) -> Result<f64> {
    let v = sp.potential.as_ref().ok_or_else(|| GeometryError::Slot("no potential".into()))?;
    let s = Snapshot::of(sp.geo);
    let h = values(&riemann::hessian(v, sp.geo.gamma()));
    let rs = star_ricci_sym(sp.geo);
    let lhs = Tensor::from_fn(s.dim, 0, 2, |i| h.get(i) + rs.get(i));
    let rhs = Tensor::from_fn(s.dim, 0, 2, |i| sp.lambda * s.g.get(i) + sp.mu * s.eta[i[0]] * s.eta[i[1]]);
    Ok(residual(&lhs, &rhs))
}

/// Einstein and η-Einstein fits of `Ric` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinFit {
    pub r: f64,
    /// `λ_E = r / dim`.
    pub lambda_e: f64,
    pub einstein_residual: f64,
    pub eta_lambda: f64,
    pub eta_mu: f64,
    pub eta_residual: f64,
}

pub fn einstein_fit(geo: &LocalGeometry) -> EinsteinFit {
    let s = Snapshot::of(geo);
    let ric = values(&geo.curvature().ricci);
    let r = geo.curvature().scalar.value();
    let lambda_e = r / s.dim as f64;
    let model = s.g.scale(lambda_e);
    let (eta_lambda, eta_mu, eta_residual) = fit_eta_einstein(&s, &ric, r);
    EinsteinFit { r, lambda_e, einstein_residual: residual(&ric, &model), eta_lambda, eta_mu, eta_residual }
}

/// Einstein diagnostics; the η-Einstein coefficient formula is asserted
/// only where the fit holds and `β` is given.
pub fn check_einstein(geos: &[LocalGeometry], tol: f64, skip: Option<String>) -> Vec<CheckResult> {
    let mut c = Checker::new(geos, tol);
    let fits: Vec<EinsteinFit> = geos.iter().map(einstein_fit).collect();
    let worst = |f: fn(&EinsteinFit) -> f64| fits.iter().map(f).fold(0.0, f64::max);
    c.push(CheckResult::info("einstein.residual", "Ric = λ_E g", worst(|f| f.einstein_residual)));
    c.push(CheckResult::info("einstein.lambda", "λ_E = r/(2n+1)", mean(&fits.iter().map(|f| f.lambda_e).collect::<Vec<_>>())));
    c.push(CheckResult::info("einstein.scalar", "r", mean(&fits.iter().map(|f| f.r).collect::<Vec<_>>())));
    let eta = worst(|f| f.eta_residual);
    c.push(CheckResult::info("einstein.eta_residual", "Ric = λg + μη⊗η", eta));
    let coefficients = "λ = r/2n + β², μ = −(r/2n + (2n+1)β²)";
    if let Some(reason) = skip {
        c.push(CheckResult::skipped("einstein.eta_coefficients", coefficients, tol, reason));
    } else if eta <= tol {
        c.check("einstein.eta_coefficients", coefficients, |geo| {
            let fit = einstein_fit(geo);
            let s = Snapshot::of(geo);
            let b2 = s.beta()?.powi(2);
            let nn = 2.0 * s.n as f64;
            Ok(normalized_residual(&[fit.eta_lambda, fit.eta_mu], &[fit.r / nn + b2, -(fit.r / nn + (nn + 1.0) * b2)]))
        });
    } else {
        c.push(CheckResult::skipped("einstein.eta_coefficients", coefficients, tol, "Ric is not η-Einstein"));
    }
    c.out
}

/// Contact test: `σ = (ℒ_V η)(ξ)` and the residual `‖ℒ_V η − ση‖`.
pub fn contact_field_test(sp: &SolitonPoint) -> (f64, f64) {
    let s = Snapshot::of(sp.geo);
    let le = sp.lie_eta();
    let sigma: f64 = (0..s.dim).map(|i| le.data()[i] * s.xi[i]).sum();
    let target: Vec<f64> = s.eta.iter().map(|e| sigma * e).collect();
    (sigma, normalized_residual(le.data(), &target))
}

/// Quantities shared by the theorem harnesses.
struct Common {
    hypotheses: Vec<Predicate>,
    fits: Vec<EinsteinFit>,
    beta: f64,
    n: usize,
}

fn einstein_conclusions(common: &Common, tol: f64) -> Vec<Predicate> {
    let b2 = common.beta * common.beta;
    let nn = 2.0 * common.n as f64;
    let ein = common.fits.iter().map(|f| f.einstein_residual).fold(0.0, f64::max);
    let lam = common.fits.iter().map(|f| (f.lambda_e + nn * b2).abs()).fold(0.0, f64::max);
    let r = common.fits.iter().map(|f| (f.r + nn * (nn + 1.0) * b2).abs()).fold(0.0, f64::max);
    vec![
        Predicate::new("einstein", ein, tol),
        Predicate::new("lambda_E = -2n beta^2", lam / (1.0 + nn * b2), tol),
        Predicate::new("r = -2n(2n+1) beta^2", r / (1.0 + nn * (nn + 1.0) * b2), tol),
    ]
}

fn observed_einstein(common: &Common) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("lambda_E".into(), mean(&common.fits.iter().map(|f| f.lambda_e).collect::<Vec<_>>()));
    m.insert("r".into(), mean(&common.fits.iter().map(|f| f.r).collect::<Vec<_>>()));
    m
}

/// Hypothesis/conclusion verdicts for the constants proposition and the four
/// Einstein theorems. `kenmotsu_residual` is the worst β-Kenmotsu residual
/// (infinite if validation failed). Conclusions use `10·tol`.
pub fn theorem_harness(points: &[SolitonPoint], kenmotsu_residual: f64, tol: f64) -> Result<Vec<TheoremVerdict>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let tol_c = 10.0 * tol;
    let geos: Vec<&LocalGeometry> = points.iter().map(|sp| sp.geo).collect();
    let n = geos[0].n();
    let (beta_spread, dbeta) = {
        let owned: Vec<f64> = geos.iter().map(|g| g.beta_value()).collect::<Result<_>>()?;
        let grad = geos
            .iter()
            .map(|g| (0..g.dim()).map(|k| g.beta.as_ref().map_or(0.0, |b| b.partial(k).value().abs())).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        (spread(&owned), grad)
    };
    let beta = mean(&geos.iter().map(|g| g.beta_value()).collect::<Result<Vec<_>>>()?);
    let soliton = max_over(points, |sp| Ok(soliton_residual(sp)))?;
    let mut hyps = vec![
        Predicate::new("weak beta-Kenmotsu", kenmotsu_residual, tol),
        Predicate::new("beta constant", beta_spread.max(dbeta), tol),
        Predicate::new("beta nonzero", if beta.abs() > tol { 0.0 } else { f64::INFINITY }, tol),
        Predicate::new("*-eta-Ricci soliton", soliton, tol),
    ];
    let fits: Vec<EinsteinFit> = collect_over(points, |sp| Ok(einstein_fit(sp.geo)))?;
    let common = Common { hypotheses: hyps.clone(), fits, beta, n };
    let mut verdicts = Vec::new();

    // Constants proposition.
    let lie_eta_xi = max_over(points, |sp| Ok(contact_field_test(sp).0.abs()))?;
    let eta_lie_xi = max_over(points, |sp| {
        let s = Snapshot::of(sp.geo);
        Ok((0..s.dim).map(|i| sp.lie_xi().data()[i] * s.eta[i]).sum::<f64>().abs())
    })?;
    let lm = (points[0].lambda + points[0].mu).abs();
    let mut obs = BTreeMap::new();
    obs.insert("lambda_plus_mu".into(), points[0].lambda + points[0].mu);
    verdicts.push(TheoremVerdict::new(
        "proposition_constants",
        "a weak β-Kenmotsu *-η-Ricci soliton has λ + μ = 0 and (ℒ_V η)(ξ) = η(ℒ_V ξ) = 0",
        common.hypotheses.clone(),
        vec![
            Predicate::new("lambda + mu = 0", lm, tol_c),
            Predicate::new("(L_V eta)(xi) = 0", lie_eta_xi, tol_c),
            Predicate::new("eta(L_V xi) = 0", eta_lie_xi, tol_c),
        ],
        obs,
    ));

    // η-Einstein ⇒ Einstein.
    let eta_res = common.fits.iter().map(|f| f.eta_residual).fold(0.0, f64::max);
    hyps = common.hypotheses.clone();
    hyps.push(Predicate::new("eta-Einstein", eta_res, tol));
    verdicts.push(TheoremVerdict::new(
        "einstein_from_eta_einstein",
        "an η-Einstein weak β-Kenmotsu *-η-Ricci soliton is Einstein with r = −2n(2n+1)β²",
        hyps,
        einstein_conclusions(&common, tol_c),
        observed_einstein(&common),
    ));

    // Contact potential field.
    let contact: Vec<(f64, f64)> = collect_over(points, |sp| Ok(contact_field_test(sp)))?;
    let contact_res = contact.iter().map(|c| c.1).fold(0.0, f64::max);
    let sigma_max = contact.iter().map(|c| c.0.abs()).fold(0.0, f64::max);
    hyps = common.hypotheses.clone();
    hyps.push(Predicate::new("V contact", contact_res, tol));
    let mut concl = vec![Predicate::new("sigma = 0", sigma_max, tol_c)];
    concl.extend(einstein_conclusions(&common, tol_c));
    let mut obs = observed_einstein(&common);
    obs.insert("sigma".into(), mean(&contact.iter().map(|c| c.0).collect::<Vec<_>>()));
    verdicts.push(TheoremVerdict::new(
        "einstein_from_contact_potential",
        "if V is a contact vector field, it is strictly contact and g is Einstein with r = −2n(2n+1)β²",
        hyps,
        concl,
        obs,
    ));

    // V collinear with ξ.
    let coll: Vec<(f64, f64)> = collect_over(points, |sp| {
        let s = Snapshot::of(sp.geo);
        let v: Vec<f64> = sp.v.data().iter().map(Jet::value).collect();
        let gv: f64 = (0..s.dim).map(|i| (0..s.dim).map(|j| s.g.get(&[i, j]) * v[i] * s.xi[j]).sum::<f64>()).sum();
        let gxx: f64 = (0..s.dim).map(|i| (0..s.dim).map(|j| s.g.get(&[i, j]) * s.xi[i] * s.xi[j]).sum::<f64>()).sum();
        let delta = gv / gxx;
        let target: Vec<f64> = s.xi.iter().map(|x| delta * x).collect();
        Ok((delta, normalized_residual(&v, &target)))
    })?;
    let deltas: Vec<f64> = coll.iter().map(|c| c.0).collect();
    let coll_res = coll.iter().map(|c| c.1).fold(0.0, f64::max);
    let min_delta = deltas.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    hyps = common.hypotheses.clone();
    hyps.push(Predicate::new("V = delta xi", coll_res, tol));
    hyps.push(Predicate::new("delta nonzero", if min_delta > tol { 0.0 } else { f64::INFINITY }, tol));
    let mut concl = vec![Predicate::new("delta constant", spread(&deltas), tol_c)];
    concl.extend(einstein_conclusions(&common, tol_c));
    let mut obs = observed_einstein(&common);
    obs.insert("delta".into(), mean(&deltas));
    obs.insert("delta_spread".into(), spread(&deltas));
    verdicts.push(TheoremVerdict::new(
        "einstein_from_collinear_potential",
        "if V = δξ with δ ≠ 0, then δ is constant and g is Einstein with r = −2n(2n+1)β²",
        hyps,
        concl,
        obs,
    ));

    // Gradient soliton.
    if points.iter().all(|sp| sp.potential.is_some()) {
        let grad_res = max_over(points, gradient_residual)?;
        let grad_coll = max_over(points, |sp| {
            let s = Snapshot::of(sp.geo);
            let v: Vec<f64> = sp.v.data().iter().map(Jet::value).collect();
            let gv: f64 = (0..s.dim).map(|i| (0..s.dim).map(|j| s.g.get(&[i, j]) * v[i] * s.xi[j]).sum::<f64>()).sum();
            let target: Vec<f64> = s.xi.iter().map(|x| gv * x).collect();
            Ok(normalized_residual(&v, &target))
        })?;
        let mut hyps: Vec<Predicate> =
            common.hypotheses.iter().filter(|p| p.name != "*-eta-Ricci soliton").cloned().collect();
        hyps.push(Predicate::new("gradient *-eta-Ricci soliton", grad_res, tol));
        let mut concl = vec![Predicate::new("grad v collinear with xi", grad_coll, tol_c)];
        concl.extend(einstein_conclusions(&common, tol_c));
        let mut obs = observed_einstein(&common);
        obs.insert("delta".into(), mean(&deltas));
        obs.insert("delta_spread".into(), spread(&deltas));
        obs.insert("collinear_residual".into(), grad_coll);
        verdicts.push(TheoremVerdict::new(
            "einstein_from_gradient_soliton",
            "a gradient *-η-Ricci soliton with β ≠ 0 has ∇v = δξ and g is Einstein with r = −2n(2n+1)β²",
            hyps,
            concl,
            obs,
        ));
    }
    Ok(verdicts)
}

/// `Some(reason)` when the soliton checks cannot apply because `β` varies.
pub fn beta_gate(geos: &[LocalGeometry]) -> Option<String> {
    match beta_variation(geos) {
        Ok((s, d)) if s > crate::kenmotsu::BETA_CONSTANT_TOL || d > crate::kenmotsu::BETA_CONSTANT_TOL => {
            Some(GeometryError::NonConstantBeta(s.max(d)).to_string())
        }
        Ok(_) => None,
        Err(e) => Some(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::kenmotsu_model;

    #[test]
    fn model_einstein_fit() {
        let (b, _) = kenmotsu_model(2, 1.0, 3.0).unwrap();
        let geo = b.local(&b.sample_points(1, 5).unwrap()[0]).unwrap();
        let fit = einstein_fit(&geo);
        assert!((fit.lambda_e + 4.0).abs() < 1e-10);
        assert!((fit.r + 20.0).abs() < 1e-10);
        assert!(fit.einstein_residual < 1e-12);
    }

    #[test]
    fn constant_beta_has_no_gate() {
        let (b, _) = kenmotsu_model(1, -0.7, 0.0).unwrap();
        let geos = b.locals(&b.sample_points(4, 5).unwrap()).unwrap();
        assert!(beta_gate(&geos).is_none());
    }

    #[test]
    fn potential_uses_one_more_order() {
        assert_eq!(POTENTIAL_ORDER, FIELD_ORDER + 1);
        let s = SolitonData::potential(Expr::one(), 0.0, 0.0);
        assert!(s.is_gradient());
    }
}
