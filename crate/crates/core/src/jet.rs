//! Truncated multivariate Taylor series ("jets") around a sample point.
//!
//! A jet of order `p` stores the Taylor coefficients `c_α = ∂^α u / α!`
//! for all multi-indices `|α| ≤ p`. Products truncate to the smaller order
//! and each partial derivative lowers the order by one, so every value that
//! is eventually read back (the constant coefficient) is exact up to
//! floating-point roundoff. Input fields are turned into jets from exact
//! symbolic derivatives, see [`DerivativeTable`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{EvalError, GeometryError, Result};
use crate::expr::{Expr, Params};
use crate::scalar::{Field, Ring, Smooth};

/// Highest jet order any space supports.
pub const MAX_ORDER: usize = 4;

#[derive(Debug)]
pub struct JetSpace {
    dim: usize,
    monomials: Vec<Vec<u8>>,
    /// `order_len[k]` = number of monomials of degree ≤ k.
    order_len: Vec<usize>,
    /// `(i, j, k)` with `mono_i + mono_j = mono_k`, sorted by degree of `k`.
    products: Vec<(u32, u32, u32)>,
    product_len: Vec<usize>,
    /// `shifts[c][k] = (index of mono_k + e_c, mono_k[c] + 1)` for degree ≤ MAX_ORDER − 1.
    shifts: Vec<Vec<(u32, f64)>>,
    /// `mono_k = mono_parent + e_coord` for every non-constant monomial.
    parent: Vec<Option<(usize, usize)>>,
    factorial: Vec<f64>,
}

impl JetSpace {
    fn build(dim: usize) -> JetSpace {
        let mut monomials: Vec<Vec<u8>> = Vec::new();
        let mut order_len = Vec::with_capacity(MAX_ORDER + 1);
        for deg in 0..=MAX_ORDER {
            let mut current = vec![0u8; dim];
            push_degree(&mut monomials, &mut current, 0, deg);
            order_len.push(monomials.len());
        }
        let index: HashMap<Vec<u8>, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let degree = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree(a) + degree(b) > MAX_ORDER {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        products.sort_by_key(|&(_, _, k)| (degree(&monomials[k as usize]), k));
        let product_len = (0..=MAX_ORDER)
            .map(|p| products.iter().take_while(|&&(_, _, k)| degree(&monomials[k as usize]) <= p).count())
            .collect();

        let mut shifts = vec![Vec::new(); dim];
        for (c, table) in shifts.iter_mut().enumerate() {
            for m in &monomials[..order_len[MAX_ORDER - 1]] {
                let mut up = m.clone();
                up[c] += 1;
                table.push((index[&up] as u32, (m[c] + 1) as f64));
            }
        }

        let parent = monomials
            .iter()
            .map(|m| {
                let c = m.iter().position(|&e| e > 0)?;
                let mut down = m.clone();
                down[c] -= 1;
                Some((index[&down], c))
            })
            .collect();
        let factorial = monomials
            .iter()
            .map(|m| m.iter().map(|&e| (1..=e as u32).product::<u32>() as f64).product())
            .collect();

        JetSpace { dim, monomials, order_len, products, product_len, shifts, parent, factorial }
    }

    /// Shared space for a chart dimension.
    pub fn shared(dim: usize) -> Arc<JetSpace> {
        static SPACES: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
        let map = SPACES.get_or_init(Default::default);
        let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(dim).or_insert_with(|| Arc::new(JetSpace::build(dim))).clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self, order: usize) -> usize {
        self.order_len[order]
    }

    pub fn monomial(&self, k: usize) -> &[u8] {
        &self.monomials[k]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, slot: usize, remaining: usize) {
    if slot + 1 == current.len() {
        current[slot] = remaining as u8;
        out.push(current.clone());
        current[slot] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e as u8;
        push_degree(out, current, slot + 1, remaining - e);
    }
    current[slot] = 0;
}

#[derive(Clone, Debug)]
pub enum Jet {
    /// Exact constant: every derivative vanishes.
    Const(f64),
    Series { space: Arc<JetSpace>, order: usize, coeffs: Vec<f64> },
}

impl Jet {
    pub fn series(space: Arc<JetSpace>, order: usize, coeffs: Vec<f64>) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        assert_eq!(coeffs.len(), space.len(order), "coefficient count does not match order");
        Jet::Series { space, order, coeffs }
    }

    /// The coordinate function `x_c − x_c(p)` plus `value`.
    pub fn variable(space: Arc<JetSpace>, order: usize, coord: usize, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = value;
        if order > 0 {
            coeffs[1 + coord] = 1.0;
        }
        Jet::series(space, order, coeffs)
    }

    pub fn value(&self) -> f64 {
        match self {
            Jet::Const(v) => *v,
            Jet::Series { coeffs, .. } => coeffs[0],
        }
    }

    /// Order of the series; `None` for exact constants.
    pub fn order(&self) -> Option<usize> {
        match self {
            Jet::Const(_) => None,
            Jet::Series { order, .. } => Some(*order),
        }
    }

    /// `∂^α u` at the expansion point for the monomial with index `k`.
    pub fn derivative(&self, k: usize) -> f64 {
        match self {
            Jet::Const(v) => {
                if k == 0 {
                    *v
                } else {
                    0.0
                }
            }
            Jet::Series { space, coeffs, .. } => coeffs[k] * space.factorial[k],
        }
    }

    fn zip(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        match (self, rhs) {
            (Jet::Const(a), Jet::Const(b)) => Jet::Const(f(*a, *b)),
            (Jet::Const(a), Jet::Series { space, order, coeffs }) => {
                let mut out: Vec<f64> = coeffs.iter().map(|&c| f(0.0, c)).collect();
                out[0] = f(*a, coeffs[0]);
                Jet::Series { space: space.clone(), order: *order, coeffs: out }
            }
            (Jet::Series { space, order, coeffs }, Jet::Const(b)) => {
                let mut out = coeffs.clone();
                out[0] = f(coeffs[0], *b);
                Jet::Series { space: space.clone(), order: *order, coeffs: out }
            }
            (Jet::Series { space, order: p, coeffs: a }, Jet::Series { order: q, coeffs: b, .. }) => {
                let order = (*p).min(*q);
                let len = space.len(order);
                let out = a[..len].iter().zip(&b[..len]).map(|(&x, &y)| f(x, y)).collect();
                Jet::Series { space: space.clone(), order, coeffs: out }
            }
        }
    }

    /// Multiplicative inverse; non-finite if the value vanishes.
    pub fn recip(&self) -> Jet {
        match self {
            Jet::Const(v) => Jet::Const(1.0 / v),
            Jet::Series { space, order, coeffs } => {
                let a0 = coeffs[0];
                let mut u = coeffs.iter().map(|c| -c / a0).collect::<Vec<_>>();
                u[0] = 0.0;
                let u = Jet::Series { space: space.clone(), order: *order, coeffs: u };
                // 1/a = (1/a0) Σ u^k, u nilpotent of index order + 1
                let mut acc = Jet::Const(1.0);
                let mut power = Jet::Const(1.0);
                for _ in 0..*order {
                    power = Ring::mul(&power, &u);
                    acc = Ring::add(&acc, &power);
                }
                acc.scale(1.0 / a0)
            }
        }
    }
}

impl Ring for Jet {
    fn zero() -> Self {
        Jet::Const(0.0)
    }
    fn constant(value: f64) -> Self {
        Jet::Const(value)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Jet::Const(v) if *v == 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
    fn mul(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Jet::Const(a), Jet::Const(b)) => Jet::Const(a * b),
            (Jet::Const(a), s) | (s, Jet::Const(a)) => s.scale(*a),
            (Jet::Series { space, order: p, coeffs: a }, Jet::Series { order: q, coeffs: b, .. }) => {
                let order = (*p).min(*q);
                let mut out = vec![0.0; space.len(order)];
                for &(i, j, k) in &space.products[..space.product_len[order]] {
                    out[k as usize] += a[i as usize] * b[j as usize];
                }
                Jet::Series { space: space.clone(), order, coeffs: out }
            }
        }
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn scale(&self, k: f64) -> Self {
        match self {
            Jet::Const(v) => Jet::Const(v * k),
            Jet::Series { space, order, coeffs } => {
                Jet::Series { space: space.clone(), order: *order, coeffs: coeffs.iter().map(|c| c * k).collect() }
            }
        }
    }
    fn approx(&self) -> Option<f64> {
        Some(self.value())
    }
}

impl Field for Jet {
    fn div(&self, rhs: &Self) -> Self {
        Ring::mul(self, &rhs.recip())
    }

    /// Series inverse around the numeric inverse `A0` of the value matrix:
    /// `M⁻¹ = Σ_k (−1)^k A0 (N A0)^k` with `N = M − M(p)` nilpotent.
    fn invert_matrix(rows: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Dimension(n, rows.first().map_or(0, Vec::len)));
        }
        let values: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(Jet::value).collect()).collect();
        let a0 = f64::invert_matrix(&values)?;
        let order = rows.iter().flatten().filter_map(Jet::order).min();
        let a0_jet: Vec<Vec<Jet>> = a0.iter().map(|r| r.iter().map(|&v| Jet::Const(v)).collect()).collect();
        let Some(order) = order else {
            return Ok(a0_jet);
        };
        let nil: Vec<Vec<Jet>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| match e {
                        Jet::Const(_) => Jet::Const(0.0),
                        Jet::Series { .. } => Ring::sub(e, &Jet::Const(e.value())),
                    })
                    .collect()
            })
            .collect();
        let na = mat_mul(&nil, &a0_jet);
        let mut term = a0_jet.clone();
        let mut acc = a0_jet;
        for k in 1..=order {
            term = mat_mul(&term, &na);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..n {
                for j in 0..n {
                    acc[i][j] = Ring::add(&acc[i][j], &term[i][j].scale(sign));
                }
            }
        }
        Ok(acc)
    }
}

fn mat_mul<S: Ring>(a: &[Vec<S>], b: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| crate::scalar::sum_products((0..b.len()).map(|k| (a[i][k].clone(), b[k][j].clone()))))
                .collect()
        })
        .collect()
}

impl Smooth for Jet {
    /// Panics if the series has order zero: the engine sizes jet orders so
    /// that this never happens, and silently returning zero would be wrong.
    fn partial(&self, coord: usize) -> Self {
        match self {
            Jet::Const(_) => Jet::Const(0.0),
            Jet::Series { space, order, coeffs } => {
                assert!(*order > 0, "jet order exhausted while differentiating");
                let len = space.len(order - 1);
                let out = space.shifts[coord][..len].iter().map(|&(idx, fac)| fac * coeffs[idx as usize]).collect();
                Jet::Series { space: space.clone(), order: order - 1, coeffs: out }
            }
        }
    }
}

/// All partial derivatives `∂^α e` with `|α| ≤ order` of one expression,
/// computed symbolically once and evaluated at each sample point.
#[derive(Debug, Clone)]
pub struct DerivativeTable {
    space: Arc<JetSpace>,
    order: usize,
    derivs: Option<Vec<Expr>>,
    constant: Option<Expr>,
}

impl DerivativeTable {
    pub fn new(e: &Expr, space: Arc<JetSpace>, order: usize) -> DerivativeTable {
        assert!(order <= MAX_ORDER);
        if e.is_coordinate_free() {
            return DerivativeTable { space, order, derivs: None, constant: Some(e.clone()) };
        }
        let len = space.len(order);
        let mut derivs: Vec<Expr> = Vec::with_capacity(len);
        derivs.push(e.clone());
        for k in 1..len {
            let (p, c) = space.parent[k].expect("non-constant monomial has a parent");
            let d = derivs[p].diff_index(c);
            derivs.push(d);
        }
        DerivativeTable { space, order, derivs: Some(derivs), constant: None }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn jet_at(&self, coords: &[f64], params: &Params) -> Result<Jet, EvalError> {
        if let Some(c) = &self.constant {
            return Ok(Jet::Const(c.eval_coords(coords, params)?));
        }
        let derivs = self.derivs.as_ref().expect("table has either constant or derivatives");
        let mut coeffs = Vec::with_capacity(derivs.len());
        for (k, d) in derivs.iter().enumerate() {
            coeffs.push(if d.is_zero() { 0.0 } else { d.eval_coords(coords, params)? / self.space.factorial[k] });
        }
        Ok(Jet::Series { space: self.space.clone(), order: self.order, coeffs })
    }
}
