//! Charts and valence-(r,s) tensors in the coordinate basis.
//!
//! Component layout: the `r` contravariant indices come first, then the
//! `s` covariant ones, stored row-major. A derivative (partial or covariant)
//! appends its direction as the last covariant index.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{EvalError, GeometryError, Result};
use crate::expr::{Expr, Params, Point};
use crate::scalar::{sum_products, Ring};

/// A single coordinate chart with a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Arc<[String]>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub const DEFAULT_BOX: (f64, f64) = (-0.5, 0.5);

    pub fn new(names: Vec<String>, domain: Option<Vec<(f64, f64)>>) -> Result<Chart> {
        if names.is_empty() {
            return Err(GeometryError::Chart("no coordinates".into()));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(GeometryError::Chart(format!("duplicate coordinate `{n}`")));
            }
        }
        let domain = domain.unwrap_or_else(|| vec![Self::DEFAULT_BOX; names.len()]);
        if domain.len() != names.len() {
            return Err(GeometryError::Dimension(names.len(), domain.len()));
        }
        for (n, (lo, hi)) in names.iter().zip(&domain) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(GeometryError::Chart(format!("empty interval [{lo}, {hi}] for `{n}`")));
            }
        }
        Ok(Chart { names: names.into(), domain })
    }

    /// Coordinates `x1..x{dim}` on the default box.
    pub fn numbered(dim: usize) -> Chart {
        Chart::new((1..=dim).map(|i| format!("x{i}")).collect(), None).expect("valid numbered chart")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shared_names(&self) -> Arc<[String]> {
        self.names.clone()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Chart> {
        self = Chart::new(self.names.to_vec(), Some(domain))?;
        Ok(self)
    }

    pub fn coord(&self, index: usize) -> Expr {
        Expr::coord(index, self.names[index].clone())
    }

    pub fn point(&self, values: Vec<f64>) -> Result<Point, EvalError> {
        Point::new(self.names.clone(), values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    dim: usize,
    upper: usize,
    lower: usize,
    data: Vec<S>,
}

pub type TensorField = Tensor<Expr>;
pub type EvaluatedTensor = Tensor<f64>;

impl<S> Tensor<S> {
    pub fn from_data(dim: usize, upper: usize, lower: usize, data: Vec<S>) -> Result<Tensor<S>> {
        let expected = dim.pow((upper + lower) as u32);
        if data.len() != expected {
            return Err(GeometryError::Dimension(expected, data.len()));
        }
        Ok(Tensor { dim, upper, lower, data })
    }

    pub fn from_fn(dim: usize, upper: usize, lower: usize, mut f: impl FnMut(&[usize]) -> S) -> Tensor<S> {
        let rank = upper + lower;
        let len = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < dim {
                    break;
                }
                idx[slot] = 0;
            }
        }
        Tensor { dim, upper, lower, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: S) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Tensor<T> {
        Tensor { dim: self.dim, upper: self.upper, lower: self.lower, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<T, E>(&self, f: impl FnMut(&S) -> std::result::Result<T, E>) -> std::result::Result<Tensor<T>, E> {
        let data = self.data.iter().map(f).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Tensor { dim: self.dim, upper: self.upper, lower: self.lower, data })
    }

    pub fn expect_valence(&self, upper: usize, lower: usize) -> Result<()> {
        if self.upper != upper || self.lower != lower {
            return Err(GeometryError::Valence {
                expected_upper: upper,
                expected_lower: lower,
                found_upper: self.upper,
                found_lower: self.lower,
            });
        }
        Ok(())
    }

    /// Components of a rank-2 tensor as rows.
    pub fn to_rows(&self) -> Vec<Vec<S>>
    where
        S: Clone,
    {
        assert_eq!(self.rank(), 2, "to_rows needs a rank-2 tensor");
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }
}

impl<S: Ring> Tensor<S> {
    pub fn zeros(dim: usize, upper: usize, lower: usize) -> Tensor<S> {
        Tensor::from_fn(dim, upper, lower, |_| S::zero())
    }

    pub fn scalar(dim: usize, value: S) -> Tensor<S> {
        Tensor { dim, upper: 0, lower: 0, data: vec![value] }
    }

    /// Identity endomorphism, valence (1,1).
    pub fn identity(dim: usize) -> Tensor<S> {
        Tensor::from_fn(dim, 1, 1, |i| if i[0] == i[1] { S::one() } else { S::zero() })
    }

    pub fn from_rows(upper: usize, lower: usize, rows: Vec<Vec<S>>) -> Result<Tensor<S>> {
        if upper + lower != 2 {
            return Err(GeometryError::Slot("from_rows builds rank-2 tensors".into()));
        }
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GeometryError::Dimension(dim, rows.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0)));
        }
        Tensor::from_data(dim, upper, lower, rows.into_iter().flatten().collect())
    }

    pub fn from_vector(upper: usize, lower: usize, comps: Vec<S>) -> Result<Tensor<S>> {
        if upper + lower != 1 {
            return Err(GeometryError::Slot("from_vector builds rank-1 tensors".into()));
        }
        let dim = comps.len();
        Tensor::from_data(dim, upper, lower, comps)
    }

    pub fn as_scalar(&self) -> &S {
        assert_eq!(self.rank(), 0, "not a scalar");
        &self.data[0]
    }

    /// `a·self + b·other`.
    pub fn add_scaled(&self, other: &Tensor<S>, a: f64, b: f64) -> Result<Tensor<S>> {
        other.expect_valence(self.upper, self.lower)?;
        if self.dim != other.dim {
            return Err(GeometryError::Dimension(self.dim, other.dim));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| match (x.is_zero(), y.is_zero()) {
                (true, true) => S::zero(),
                (true, false) => y.scale(b),
                (false, true) => x.scale(a),
                (false, false) => x.scale(a).add(&y.scale(b)),
            })
            .collect();
        Ok(Tensor { dim: self.dim, upper: self.upper, lower: self.lower, data })
    }

    pub fn add(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.add_scaled(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.add_scaled(other, 1.0, -1.0)
    }

    pub fn scale(&self, k: f64) -> Tensor<S> {
        self.map(|x| x.scale(k))
    }

    pub fn mul_scalar(&self, s: &S) -> Tensor<S> {
        self.map(|x| if x.is_zero() { S::zero() } else { x.mul(s) })
    }

    /// Outer product with index order `[A.upper, B.upper, A.lower, B.lower]`.
    pub fn tensor_product(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        if self.dim != other.dim {
            return Err(GeometryError::Dimension(self.dim, other.dim));
        }
        let (au, al, bu, bl) = (self.upper, self.lower, other.upper, other.lower);
        Ok(Tensor::from_fn(self.dim, au + bu, al + bl, |idx| {
            let mut ia = Vec::with_capacity(au + al);
            let mut ib = Vec::with_capacity(bu + bl);
            ia.extend_from_slice(&idx[..au]);
            ib.extend_from_slice(&idx[au..au + bu]);
            ia.extend_from_slice(&idx[au + bu..au + bu + al]);
            ib.extend_from_slice(&idx[au + bu + al..]);
            let x = self.get(&ia);
            let y = other.get(&ib);
            if x.is_zero() || y.is_zero() {
                S::zero()
            } else {
                x.mul(y)
            }
        }))
    }

    /// Trace over one contravariant and one covariant slot. Slots are counted
    /// within their own group (`upper_slot < r`, `lower_slot < s`).
    pub fn contract(&self, upper_slot: usize, lower_slot: usize) -> Result<Tensor<S>> {
        if upper_slot >= self.upper {
            return Err(GeometryError::Slot(format!("upper slot {upper_slot} out of range (r = {})", self.upper)));
        }
        if lower_slot >= self.lower {
            return Err(GeometryError::Slot(format!("lower slot {lower_slot} out of range (s = {})", self.lower)));
        }
        let u = upper_slot;
        let l = self.upper + lower_slot;
        Ok(Tensor::from_fn(self.dim, self.upper - 1, self.lower - 1, |idx| {
            let mut full = Vec::with_capacity(idx.len() + 2);
            full.extend_from_slice(idx);
            // insert the summed slots in increasing position order
            full.insert(u, 0);
            full.insert(l, 0);
            let mut acc = S::zero();
            for m in 0..self.dim {
                full[u] = m;
                full[l] = m;
                let v = self.get(&full);
                if !v.is_zero() {
                    acc = acc.add(v);
                }
            }
            acc
        }))
    }

    /// Swaps two covariant slots.
    pub fn swap_lower(&self, a: usize, b: usize) -> Result<Tensor<S>> {
        if a >= self.lower || b >= self.lower {
            return Err(GeometryError::Slot(format!("lower slots {a},{b} out of range (s = {})", self.lower)));
        }
        let (pa, pb) = (self.upper + a, self.upper + b);
        Ok(Tensor::from_fn(self.dim, self.upper, self.lower, |idx| {
            let mut j = idx.to_vec();
            j.swap(pa, pb);
            self.get(&j).clone()
        }))
    }

    /// Evaluates every slot against explicit vectors/covectors, returning a
    /// scalar: `T(ω_1, …, ω_r, X_1, …, X_s)`.
    pub fn apply(&self, covectors: &[&[S]], vectors: &[&[S]]) -> S {
        assert_eq!(covectors.len(), self.upper);
        assert_eq!(vectors.len(), self.lower);
        let args: Vec<&[S]> = covectors.iter().chain(vectors).copied().collect();
        let mut acc = S::zero();
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        for v in &self.data {
            if !v.is_zero() {
                let mut term = v.clone();
                for (slot, &i) in idx.iter().enumerate() {
                    if term.is_zero() {
                        break;
                    }
                    let w = &args[slot][i];
                    term = if w.is_zero() { S::zero() } else { term.mul(w) };
                }
                if !term.is_zero() {
                    acc = acc.add(&term);
                }
            }
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < self.dim {
                    break;
                }
                idx[slot] = 0;
            }
        }
        acc
    }
}

/// Matrix product of two (1,1) tensors as endomorphisms: `(A∘B)^a_b = A^a_m B^m_b`.
pub fn compose<S: Ring>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Tensor<S>> {
    a.expect_valence(1, 1)?;
    b.expect_valence(1, 1)?;
    let n = a.dim();
    Ok(Tensor::from_fn(n, 1, 1, |i| {
        sum_products((0..n).map(|m| (a.get(&[i[0], m]).clone(), b.get(&[m, i[1]]).clone())))
    }))
}

/// Componentwise evaluation of a symbolic tensor at a point.
pub fn tensor_eval(t: &TensorField, p: &Point, params: &Params) -> Result<EvaluatedTensor> {
    Ok(t.try_map(|e| e.eval(p, params))?)
}

impl EvaluatedTensor {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Relative residual `max|A−B| / max(1, max|A|, max|B|)`; non-finite inputs
/// give `f64::INFINITY`.
pub fn normalized_residual(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut diff = 0.0f64;
    let mut scale = 1.0f64;
    for (x, y) in a.iter().zip(b) {
        if !(x.is_finite() && y.is_finite()) {
            return f64::INFINITY;
        }
        diff = diff.max((x - y).abs());
        scale = scale.max(x.abs()).max(y.abs());
    }
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_tensor(dim: usize, upper: usize, lower: usize) -> impl Strategy<Value = Tensor<f64>> {
        proptest::collection::vec(-10.0..10.0f64, dim.pow((upper + lower) as u32))
            .prop_map(move |d| Tensor::from_data(dim, upper, lower, d).unwrap())
    }

    #[test]
    fn trace_of_identity() {
        let id = Tensor::<f64>::identity(5);
        assert_eq!(*id.contract(0, 0).unwrap().as_scalar(), 5.0);
    }

    #[test]
    fn contraction_of_outer_product_is_pairing() {
        let u = Tensor::from_vector(1, 0, vec![1.0, 2.0, 3.0]).unwrap();
        let w = Tensor::from_vector(0, 1, vec![0.5, -1.0, 4.0]).unwrap();
        let p = u.tensor_product(&w).unwrap();
        assert_eq!((p.upper(), p.lower()), (1, 1));
        assert!((p.contract(0, 0).unwrap().as_scalar() - 10.5).abs() < 1e-12);
    }

    #[test]
    fn contraction_slot_errors() {
        let t = Tensor::<f64>::zeros(3, 0, 2);
        assert!(t.contract(0, 0).is_err());
        let t = Tensor::<f64>::zeros(3, 1, 1);
        assert!(t.contract(0, 1).is_err());
        assert!(t.add(&Tensor::zeros(3, 0, 2)).is_err());
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(vec!["x".into(), "x".into()], None).is_err());
        assert!(Chart::new(vec!["x".into()], Some(vec![(1.0, 0.0)])).is_err());
        assert_eq!(Chart::numbered(3).domain(), &[(-0.5, 0.5); 3]);
    }

    proptest! {
        #[test]
        fn contraction_is_linear(a in arb_tensor(3, 1, 2), b in arb_tensor(3, 1, 2), s in -3.0..3.0f64, t in -3.0..3.0f64) {
            let lhs = a.add_scaled(&b, s, t).unwrap().contract(0, 1).unwrap();
            let ca = a.contract(0, 1).unwrap();
            let cb = b.contract(0, 1).unwrap();
            let rhs = ca.add_scaled(&cb, s, t).unwrap();
            prop_assert!(normalized_residual(lhs.data(), rhs.data()) <= 1e-12);
        }

        #[test]
        fn outer_product_contracts_to_pairing(u in proptest::collection::vec(-5.0..5.0f64, 4), w in proptest::collection::vec(-5.0..5.0f64, 4)) {
            let pairing: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
            let ut = Tensor::from_vector(1, 0, u).unwrap();
            let wt = Tensor::from_vector(0, 1, w).unwrap();
            let c = *ut.tensor_product(&wt).unwrap().contract(0, 0).unwrap().as_scalar();
            prop_assert!((c - pairing).abs() <= 1e-12 * (1.0 + pairing.abs()));
        }

        #[test]
        fn adding_zero_multiple_is_identity(a in arb_tensor(3, 1, 1), b in arb_tensor(3, 1, 1)) {
            let c = a.add_scaled(&b, 1.0, 0.0).unwrap();
            prop_assert_eq!(c, a);
        }
    }
}
