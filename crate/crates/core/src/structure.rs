//! Weak almost contact metric bundles `(f, Q, ξ, η, g)`, their pointwise
//! jet geometry, axiom validation and Nijenhuis tensors.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{EvalError, GeometryError, Result};
use crate::expr::{Expr, Params, Point};
use crate::jet::{DerivativeTable, Jet, JetSpace};
use crate::report::{max_over, CheckResult};
use crate::riemann::{self, CurvatureData, MetricData};
use crate::scalar::{sum_products, Ring};
use crate::tensor::{normalized_residual, Chart, Tensor, TensorField};

/// Jet order used for bundle fields. Curvature derivatives and Lie
/// derivatives of curvature need three derivatives of the metric.
pub const FIELD_ORDER: usize = 3;

/// Points whose metric determinant is smaller than this are redrawn.
pub const DEGENERATE_DET: f64 = 1e-12;

/// The symbolic fields of a bundle, before validation.
#[derive(Debug, Clone)]
pub struct BundleFields {
    pub g: TensorField,
    pub f: TensorField,
    pub q: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
    pub beta: Option<Expr>,
}

#[derive(Debug)]
struct FieldTables {
    g: Tensor<DerivativeTable>,
    f: Tensor<DerivativeTable>,
    q: Tensor<DerivativeTable>,
    xi: Tensor<DerivativeTable>,
    eta: Tensor<DerivativeTable>,
    beta: Option<DerivativeTable>,
}

/// One weak almost contact metric manifold on a single chart.
#[derive(Debug)]
pub struct WacsBundle {
    id: String,
    chart: Chart,
    params: Params,
    fields: BundleFields,
    tables: OnceLock<FieldTables>,
}

fn bind_tensor(t: &TensorField, params: &Params) -> TensorField {
    t.map(|e| e.bind_params(params))
}

impl WacsBundle {
    /// Validates valences and dimensions and substitutes `params`. Axioms
    /// are not checked here, so negative controls can be built.
    pub fn new(id: impl Into<String>, chart: Chart, fields: BundleFields, params: Params) -> Result<WacsBundle> {
        let dim = chart.dim();
        let expect = |t: &TensorField, up: usize, low: usize| -> Result<()> {
            t.expect_valence(up, low)?;
            if t.dim() != dim {
                return Err(GeometryError::Dimension(dim, t.dim()));
            }
            Ok(())
        };
        expect(&fields.g, 0, 2)?;
        expect(&fields.f, 1, 1)?;
        expect(&fields.q, 1, 1)?;
        expect(&fields.xi, 1, 0)?;
        expect(&fields.eta, 0, 1)?;
        let bound = BundleFields {
            g: bind_tensor(&fields.g, &params),
            f: bind_tensor(&fields.f, &params),
            q: bind_tensor(&fields.q, &params),
            xi: bind_tensor(&fields.xi, &params),
            eta: bind_tensor(&fields.eta, &params),
            beta: fields.beta.as_ref().map(|b| b.bind_params(&params)),
        };
        let mut free = BTreeSet::new();
        for t in [&bound.g, &bound.f, &bound.q, &bound.xi, &bound.eta] {
            t.data().iter().for_each(|e| e.collect_params(&mut free));
        }
        if let Some(b) = &bound.beta {
            b.collect_params(&mut free);
        }
        if let Some(name) = free.into_iter().next() {
            return Err(EvalError::Unbound(name).into());
        }
        Ok(WacsBundle { id: id.into(), chart, params, fields: bound, tables: OnceLock::new() })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `n` with `dim = 2n + 1`; errors on even dimension.
    pub fn n(&self) -> Result<usize> {
        let d = self.dim();
        if d % 2 == 0 {
            return Err(GeometryError::EvenDimension(d));
        }
        Ok((d - 1) / 2)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn fields(&self) -> &BundleFields {
        &self.fields
    }

    pub fn beta(&self) -> Option<&Expr> {
        self.fields.beta.as_ref()
    }

    /// Copy with a replaced `β` (or none).
    pub fn with_beta(&self, beta: Option<Expr>) -> Result<WacsBundle> {
        let mut fields = self.fields.clone();
        fields.beta = beta;
        WacsBundle::new(self.id.clone(), self.chart.clone(), fields, self.params.clone())
    }

    pub fn with_id(mut self, id: impl Into<String>) -> WacsBundle {
        self.id = id.into();
        self
    }

    fn tables(&self) -> &FieldTables {
        self.tables.get_or_init(|| {
            let space = JetSpace::shared(self.dim());
            let table = |t: &TensorField| t.map(|e| DerivativeTable::new(e, space.clone(), FIELD_ORDER));
            FieldTables {
                g: table(&self.fields.g),
                f: table(&self.fields.f),
                q: table(&self.fields.q),
                xi: table(&self.fields.xi),
                eta: table(&self.fields.eta),
                beta: self.fields.beta.as_ref().map(|b| DerivativeTable::new(b, space.clone(), FIELD_ORDER)),
            }
        })
    }

    /// Metric components at a point, numerically.
    pub fn metric_at(&self, values: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.fields.g.get(&[i, j]).eval_coords(values, &Params::new())?;
            }
        }
        Ok(m)
    }

    /// Seeded uniform samples in the chart box, skipping points where the
    /// metric is degenerate or cannot be evaluated.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let limit = 1000 * count.max(1);
        while out.len() < count {
            attempts += 1;
            if attempts > limit {
                return Err(GeometryError::Singular(format!("could not find {count} non-degenerate sample points")));
            }
            let values: Vec<f64> =
                self.chart.domain().iter().map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo }).collect();
            match self.metric_at(&values) {
                Ok(m) if m.determinant().abs() >= DEGENERATE_DET => out.push(self.chart.point(values)?),
                _ => continue,
            }
        }
        Ok(out)
    }

    pub fn local(&self, point: &Point) -> Result<LocalGeometry> {
        LocalGeometry::new(self, point)
    }

    pub fn locals(&self, points: &[Point]) -> Result<Vec<LocalGeometry>> {
        points.par_iter().map(|p| self.local(p)).collect()
    }

    /// Jets of an extra scalar field at a point, e.g. a soliton potential.
    pub fn scalar_jet(&self, e: &Expr, order: usize, point: &Point) -> Result<Jet> {
        let e = e.bind_params(&self.params);
        let table = DerivativeTable::new(&e, JetSpace::shared(self.dim()), order);
        Ok(table.jet_at(point.values(), &Params::new())?)
    }
}

/// Everything known about a bundle at one sample point, as jets.
#[derive(Debug)]
pub struct LocalGeometry {
    pub point: Point,
    pub metric: MetricData<Jet>,
    pub f: Tensor<Jet>,
    pub q: Tensor<Jet>,
    pub xi: Tensor<Jet>,
    pub eta: Tensor<Jet>,
    pub beta: Option<Jet>,
    curvature: OnceLock<CurvatureData<Jet>>,
    nabla_f: OnceLock<Tensor<Jet>>,
    nabla_q: OnceLock<Tensor<Jet>>,
    nabla_ricci: OnceLock<Tensor<Jet>>,
    nabla_ricci_sharp: OnceLock<Tensor<Jet>>,
    star_ricci: OnceLock<Tensor<Jet>>,
}

impl LocalGeometry {
    fn new(bundle: &WacsBundle, point: &Point) -> Result<LocalGeometry> {
        if point.dim() != bundle.dim() {
            return Err(GeometryError::Dimension(bundle.dim(), point.dim()));
        }
        let t = bundle.tables();
        let at = point.values();
        let p = Params::new();
        let jets = |tt: &Tensor<DerivativeTable>| tt.try_map(|d| d.jet_at(at, &p));
        let g = jets(&t.g)?;
        let metric = MetricData::new(g)?;
        Ok(LocalGeometry {
            point: point.clone(),
            metric,
            f: jets(&t.f)?,
            q: jets(&t.q)?,
            xi: jets(&t.xi)?,
            eta: jets(&t.eta)?,
            beta: t.beta.as_ref().map(|b| b.jet_at(at, &p)).transpose()?,
            curvature: OnceLock::new(),
            nabla_f: OnceLock::new(),
            nabla_q: OnceLock::new(),
            nabla_ricci: OnceLock::new(),
            nabla_ricci_sharp: OnceLock::new(),
            star_ricci: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `n` with `dim = 2n + 1` (floor for even dimensions).
    pub fn n(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn g(&self) -> &Tensor<Jet> {
        &self.metric.g
    }

    pub fn gamma(&self) -> &Tensor<Jet> {
        &self.metric.gamma
    }

    pub fn beta_value(&self) -> Result<f64> {
        Ok(self.beta.as_ref().ok_or(GeometryError::MissingBeta)?.value())
    }

    pub fn curvature(&self) -> &CurvatureData<Jet> {
        self.curvature.get_or_init(|| riemann::curvature(&self.metric).expect("curvature slots are valid"))
    }

    /// `(∇f)[a; b, m] = ((∇_m f)∂_b)^a`.
    pub fn nabla_f(&self) -> &Tensor<Jet> {
        self.nabla_f.get_or_init(|| riemann::covariant_derivative(&self.f, self.gamma()))
    }

    pub fn nabla_q(&self) -> &Tensor<Jet> {
        self.nabla_q.get_or_init(|| riemann::covariant_derivative(&self.q, self.gamma()))
    }

    pub fn nabla_ricci(&self) -> &Tensor<Jet> {
        self.nabla_ricci.get_or_init(|| riemann::covariant_derivative(&self.curvature().ricci, self.gamma()))
    }

    pub fn nabla_ricci_sharp(&self) -> &Tensor<Jet> {
        self.nabla_ricci_sharp.get_or_init(|| riemann::covariant_derivative(&self.curvature().ricci_sharp, self.gamma()))
    }

    /// `Ric*(∂_i,∂_j) = ½ Σ f^b_j f^c_k R^k_{ibc}` (trace of `Z ↦ R(X, fY) fZ`).
    pub fn star_ricci(&self) -> &Tensor<Jet> {
        self.star_ricci.get_or_init(|| {
            let n = self.dim();
            let r = &self.curvature().riemann;
            // fr[k; i, b, k'] = Σ_c R^k_{ibc} f^c_{k'}
            let fr = Tensor::from_fn(n, 1, 3, |idx| {
                let (k, i, b, kk) = (idx[0], idx[1], idx[2], idx[3]);
                sum_products((0..n).map(|c| (r.get(&[k, i, b, c]).clone(), self.f.get(&[c, kk]).clone())))
            });
            Tensor::from_fn(n, 0, 2, |idx| {
                let (i, j) = (idx[0], idx[1]);
                let mut acc = Jet::zero();
                for b in 0..n {
                    let fb = self.f.get(&[b, j]);
                    if fb.is_zero() {
                        continue;
                    }
                    let tr = (0..n).fold(Jet::zero(), |a, k| a.add(fr.get(&[k, i, b, k])));
                    acc = acc.add(&fb.mul(&tr));
                }
                acc.scale(0.5)
            })
        })
    }

    /// `Φ_ij = g(∂_i, f∂_j)`.
    pub fn fundamental_form(&self) -> Tensor<Jet> {
        riemann::lower_first(&self.f, self.g())
    }

    /// `Q̃ = Q − id`.
    pub fn q_tilde(&self) -> Tensor<Jet> {
        self.q.sub(&Tensor::identity(self.dim())).expect("same valence")
    }
}

/// Numeric value of a jet tensor.
pub fn values(t: &Tensor<Jet>) -> Tensor<f64> {
    t.map(Jet::value)
}

/// Rank-2 tensor as a matrix (`m[(i, j)] = t[i, j]`).
pub fn matrix(t: &Tensor<Jet>) -> DMatrix<f64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| t.get(&[i, j]).value())
}

pub fn vector(t: &Tensor<Jet>) -> DVector<f64> {
    DVector::from_iterator(t.dim(), t.data().iter().map(Jet::value))
}

pub fn mat_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    normalized_residual(a.as_slice(), b.as_slice())
}

pub fn vec_residual(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    normalized_residual(a.as_slice(), b.as_slice())
}

pub fn tensor_residual(a: &Tensor<Jet>, b: &Tensor<Jet>) -> f64 {
    normalized_residual(values(a).data(), values(b).data())
}

/// Residual of a tensor against zero.
pub fn zero_residual(a: &Tensor<Jet>) -> f64 {
    let v = values(a);
    normalized_residual(v.data(), &vec![0.0; v.data().len()])
}

/// Numeric pointwise data used by the algebraic axioms.
pub struct Algebra {
    pub g: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
}

impl Algebra {
    pub fn at(geo: &LocalGeometry) -> Algebra {
        Algebra { g: matrix(geo.g()), f: matrix(&geo.f), q: matrix(&geo.q), xi: vector(&geo.xi), eta: vector(&geo.eta) }
    }
}

/// Runs named pointwise checks; when `skip` is set every check is recorded
/// as skipped with that reason instead of being evaluated.
pub(crate) struct Checker<'a, T = LocalGeometry> {
    pub geos: &'a [T],
    pub tol: f64,
    pub out: Vec<CheckResult>,
    pub skip: Option<String>,
}

impl<'a, T: Sync> Checker<'a, T> {
    pub fn new(geos: &'a [T], tol: f64) -> Checker<'a, T> {
        Checker { geos, tol, out: Vec::new(), skip: None }
    }

    pub fn check(&mut self, name: &str, identity: &str, f: impl Fn(&T) -> Result<f64> + Sync + Send) -> bool {
        self.check_tol(name, identity, self.tol, f)
    }

    pub fn check_tol(
        &mut self,
        name: &str,
        identity: &str,
        tol: f64,
        f: impl Fn(&T) -> Result<f64> + Sync + Send,
    ) -> bool {
        if let Some(reason) = &self.skip {
            self.out.push(CheckResult::skipped(name, identity, tol, reason.clone()));
            return false;
        }
        let r = CheckResult::from_outcome(name, identity, max_over(self.geos, f), tol);
        let ok = r.passed();
        self.out.push(r);
        ok
    }

    pub fn push(&mut self, r: CheckResult) {
        self.out.push(r);
    }
}

/// Numeric values of the structure tensors at one point.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub dim: usize,
    pub n: usize,
    pub g: Tensor<f64>,
    pub g_inv: Tensor<f64>,
    pub f: Tensor<f64>,
    pub q: Tensor<f64>,
    /// `Q̃ = Q − id`.
    pub qt: Tensor<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub beta: Option<f64>,
}

impl Snapshot {
    pub fn of(geo: &LocalGeometry) -> Snapshot {
        let q = values(&geo.q);
        let qt = Tensor::from_fn(geo.dim(), 1, 1, |i| q.get(i) - delta(i[0], i[1]));
        Snapshot {
            dim: geo.dim(),
            n: geo.n(),
            g: values(geo.g()),
            g_inv: values(&geo.metric.g_inv),
            f: values(&geo.f),
            q,
            qt,
            xi: values(&geo.xi).data().to_vec(),
            eta: values(&geo.eta).data().to_vec(),
            beta: geo.beta.as_ref().map(Jet::value),
        }
    }

    pub fn beta(&self) -> Result<f64> {
        self.beta.ok_or(GeometryError::MissingBeta)
    }

    /// `g(∂_i, Q∂_j)`.
    pub fn gq(&self, i: usize, j: usize) -> f64 {
        (0..self.dim).map(|c| self.g.get(&[i, c]) * self.q.get(&[c, j])).sum()
    }

    /// `g(∂_i, Q̃∂_j)`.
    pub fn gqt(&self, i: usize, j: usize) -> f64 {
        (0..self.dim).map(|c| self.g.get(&[i, c]) * self.qt.get(&[c, j])).sum()
    }

    /// `Φ_ij = g(∂_i, f∂_j)`.
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        (0..self.dim).map(|c| self.g.get(&[i, c]) * self.f.get(&[c, j])).sum()
    }
}

pub fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Residual between a jet tensor and a numeric tensor of the same layout.
pub fn residual_against(a: &Tensor<Jet>, b: &Tensor<f64>) -> f64 {
    normalized_residual(values(a).data(), b.data())
}

/// Residual between two numeric tensors.
pub fn residual(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    normalized_residual(a.data(), b.data())
}

/// Residual of a numeric tensor against zero.
pub fn zero_residual_f64(a: &Tensor<f64>) -> f64 {
    normalized_residual(a.data(), &vec![0.0; a.data().len()])
}

/// Singular values above `1e−8·σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * max).count()
}

/// Algebraic axioms of a weak almost contact metric structure at every point.
pub fn validate_wacs(bundle: &WacsBundle, geos: &[LocalGeometry], tol: f64) -> Result<Vec<CheckResult>> {
    let n = bundle.n()?;
    let mut c = Checker::new(geos, tol);
    c.check("wacs.metric_positive_definite", "g > 0", |geo| {
        let g = matrix(geo.g());
        let sym = mat_residual(&g, &g.transpose());
        Ok(if g.cholesky().is_some() { sym } else { f64::INFINITY })
    });
    c.check("wacs.f_squared", "f² = −Q + η⊗ξ", |geo| {
        let a = Algebra::at(geo);
        Ok(mat_residual(&(&a.f * &a.f), &(-&a.q + &a.xi * a.eta.transpose())))
    });
    c.check("wacs.eta_xi", "η(ξ) = 1", |geo| {
        let a = Algebra::at(geo);
        Ok((a.eta.dot(&a.xi) - 1.0).abs())
    });
    c.check("wacs.q_xi", "Qξ = ξ", |geo| {
        let a = Algebra::at(geo);
        Ok(vec_residual(&(&a.q * &a.xi), &a.xi))
    });
    c.check("wacs.compatible_metric", "g(fX,fY) = g(X,QY) − η(X)η(Y)", |geo| {
        let a = Algebra::at(geo);
        Ok(mat_residual(&(a.f.transpose() * &a.g * &a.f), &(&a.g * &a.q - &a.eta * a.eta.transpose())))
    });
    c.check("wacs.f_skew", "g(fX,Y) = −g(X,fY)", |geo| {
        let a = Algebra::at(geo);
        let gf = &a.g * &a.f;
        Ok(mat_residual(&gf, &(-gf.transpose())))
    });
    c.check("wacs.q_self_adjoint", "g(QX,Y) = g(X,QY)", |geo| {
        let a = Algebra::at(geo);
        let gq = &a.g * &a.q;
        Ok(mat_residual(&gq, &gq.transpose()))
    });
    c.check("wacs.f_xi", "fξ = 0", |geo| {
        let a = Algebra::at(geo);
        Ok(vec_residual(&(&a.f * &a.xi), &DVector::zeros(a.xi.len())))
    });
    c.check("wacs.eta_f", "η∘f = 0", |geo| {
        let a = Algebra::at(geo);
        Ok(vec_residual(&(a.f.transpose() * &a.eta), &DVector::zeros(a.eta.len())))
    });
    c.check("wacs.q_f_commute", "[Q, f] = 0", |geo| {
        let a = Algebra::at(geo);
        Ok(mat_residual(&(&a.q * &a.f), &(&a.f * &a.q)))
    });
    c.check("wacs.eta_q", "η∘Q = η", |geo| {
        let a = Algebra::at(geo);
        Ok(vec_residual(&(a.q.transpose() * &a.eta), &a.eta))
    });
    c.check("wacs.eta_metric_dual", "η(X) = g(X,ξ)", |geo| {
        let a = Algebra::at(geo);
        Ok(vec_residual(&a.eta, &(&a.g * &a.xi)))
    });
    c.check("wacs.f_rank", "rank f = 2n", move |geo| {
        let r = numeric_rank(&matrix(&geo.f));
        Ok((r as f64 - 2.0 * n as f64).abs())
    });
    c.check("wacs.f_norm_nonnegative", "g(fX,fX) = g(X,QX) − η(X)² ≥ 0", |geo| {
        let a = Algebra::at(geo);
        let m = &a.g * &a.q - &a.eta * a.eta.transpose();
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = eig.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        Ok((-min).max(0.0) / scale)
    });
    Ok(c.out)
}

/// The four Nijenhuis-type tensors at a point.
#[derive(Debug, Clone)]
pub struct Nijenhuis {
    /// `[f,f] + 2dη⊗ξ`, layout `[a; i, j]`.
    pub n1: Tensor<Jet>,
    /// `(ℒ_{fX}η)(Y) − (ℒ_{fY}η)(X)`.
    pub n2: Tensor<Jet>,
    /// `ℒ_ξ f`.
    pub n3: Tensor<Jet>,
    /// `ℒ_ξ η`.
    pub n4: Tensor<Jet>,
    /// `η([Q̃X, fY])` on coordinate fields.
    pub n2_bracket: Tensor<Jet>,
    /// The torsion `[f,f]` alone.
    pub torsion: Tensor<Jet>,
}

pub fn nijenhuis(geo: &LocalGeometry) -> Result<Nijenhuis> {
    use crate::scalar::Smooth;
    let n = geo.dim();
    let f = &geo.f;
    let df = riemann::partial_derivative(f); // [a; b, m] = ∂_m f^a_b
    let torsion = Tensor::from_fn(n, 1, 2, |idx| {
        let (a, i, j) = (idx[0], idx[1], idx[2]);
        let t1 = sum_products((0..n).map(|m| (f.get(&[m, i]).clone(), df.get(&[a, j, m]).clone())));
        let t2 = sum_products((0..n).map(|m| (f.get(&[m, j]).clone(), df.get(&[a, i, m]).clone())));
        let t3 = sum_products((0..n).map(|m| (f.get(&[a, m]).clone(), df.get(&[m, i, j]).clone())));
        let t4 = sum_products((0..n).map(|m| (f.get(&[a, m]).clone(), df.get(&[m, j, i]).clone())));
        t1.sub(&t2).add(&t3).sub(&t4)
    });
    let d_eta = crate::forms::d1(&geo.eta)?;
    let n1 = Tensor::from_fn(n, 1, 2, |idx| {
        let (a, i, j) = (idx[0], idx[1], idx[2]);
        torsion.get(idx).add(&d_eta.get(&[i, j]).mul(&geo.xi.data()[a]).scale(2.0))
    });
    let eta = geo.eta.data();
    // (ℒ_{f∂_i}η)(∂_j) = f^m_i ∂_m η_j + η_a ∂_j f^a_i
    let lie_f_eta = |i: usize, j: usize| -> Jet {
        let p = sum_products((0..n).map(|m| (f.get(&[m, i]).clone(), eta[j].partial(m))));
        let q = sum_products((0..n).map(|a| (eta[a].clone(), df.get(&[a, i, j]).clone())));
        p.add(&q)
    };
    let n2 = Tensor::from_fn(n, 0, 2, |idx| lie_f_eta(idx[0], idx[1]).sub(&lie_f_eta(idx[1], idx[0])));
    let qt = geo.q_tilde();
    let dqt = riemann::partial_derivative(&qt);
    // [Q̃∂_i, f∂_j]^a = Q̃^m_i ∂_m f^a_j − f^m_j ∂_m Q̃^a_i
    let n2_bracket = Tensor::from_fn(n, 0, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        sum_products((0..n).map(|a| {
            let x = sum_products((0..n).map(|m| (qt.get(&[m, i]).clone(), df.get(&[a, j, m]).clone())));
            let y = sum_products((0..n).map(|m| (f.get(&[m, j]).clone(), dqt.get(&[a, i, m]).clone())));
            (eta[a].clone(), x.sub(&y))
        }))
    });
    let n3 = riemann::lie_derivative(f, &geo.xi);
    let n4 = riemann::lie_derivative(&geo.eta, &geo.xi);
    Ok(Nijenhuis { n1, n2, n3, n4, n2_bracket, torsion })
}

/// Normality-related checks: `N1 = 0` and the consequences it implies.
pub fn check_nijenhuis(geos: &[LocalGeometry], tol: f64) -> Vec<CheckResult> {
    let mut c = Checker::new(geos, tol);
    let normal = c.check("nijenhuis.n1", "N1 = [f,f] + 2dη⊗ξ = 0", |geo| Ok(zero_residual(&nijenhuis(geo)?.n1)));
    if normal {
        c.check("nijenhuis.n3", "N3 = ℒ_ξ f = 0", |geo| Ok(zero_residual(&nijenhuis(geo)?.n3)));
        c.check("nijenhuis.n4", "N4 = ℒ_ξ η = 0", |geo| Ok(zero_residual(&nijenhuis(geo)?.n4)));
        c.check("nijenhuis.n2", "N2(X,Y) = η([Q̃X, fY])", |geo| {
            let nj = nijenhuis(geo)?;
            Ok(tensor_residual(&nj.n2, &nj.n2_bracket))
        });
    } else {
        for (name, id) in [("nijenhuis.n3", "N3 = ℒ_ξ f = 0"), ("nijenhuis.n4", "N4 = ℒ_ξ η = 0"), ("nijenhuis.n2", "N2(X,Y) = η([Q̃X, fY])")] {
            c.push(CheckResult::skipped(name, id, tol, "structure is not normal (N1 ≠ 0)"));
        }
    }
    c.out
}

/// Symbolic fundamental form `Φ_ij = g_ia f^a_j`.
pub fn fundamental_form(bundle: &WacsBundle) -> TensorField {
    riemann::lower_first(&bundle.fields().f, &bundle.fields().g)
}

/// Convenience: share an expression list as a vector field.
pub fn vector_field(comps: Vec<Expr>) -> TensorField {
    Tensor::from_vector(1, 0, comps).expect("rank-1")
}

pub fn covector_field(comps: Vec<Expr>) -> TensorField {
    Tensor::from_vector(0, 1, comps).expect("rank-1")
}

/// Names of a chart as a shared list.
pub fn chart_names(chart: &Chart) -> Arc<[String]> {
    chart.shared_names()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{kenmotsu_model, perturbed_model};

    #[test]
    fn sampling_is_reproducible() {
        let (b, _) = kenmotsu_model(1, 1.0, 0.0).unwrap();
        let a = b.sample_points(5, 9).unwrap();
        let c = b.sample_points(5, 9).unwrap();
        assert_eq!(a.iter().map(|p| p.values().to_vec()).collect::<Vec<_>>(), c.iter().map(|p| p.values().to_vec()).collect::<Vec<_>>());
    }

    #[test]
    fn model_has_vanishing_nijenhuis_parts() {
        let (b, _) = kenmotsu_model(1, 1.0, 0.5).unwrap();
        let geo = b.local(&b.sample_points(1, 0).unwrap()[0]).unwrap();
        let nj = nijenhuis(&geo).unwrap();
        assert!(zero_residual(&nj.n1) < 1e-12);
        assert!(zero_residual(&nj.n4) < 1e-12);
    }

    #[test]
    fn perturbation_breaks_f_squared() {
        let b = perturbed_model(1, 1.0, 0.0, 0.1).unwrap();
        let geos = b.locals(&b.sample_points(2, 0).unwrap()).unwrap();
        let checks = validate_wacs(&b, &geos, 1e-8).unwrap();
        let f2 = checks.iter().find(|c| c.name == "wacs.f_squared").unwrap();
        assert!(!f2.passed());
    }

    #[test]
    fn rank_of_projection() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
        assert_eq!(numeric_rank(&m), 2);
    }
}
