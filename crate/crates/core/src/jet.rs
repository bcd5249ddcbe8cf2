//! Truncated bivariate Taylor series.
//!
//! Coefficients are stored in graded order: degree `d` occupies indices
//! `d(d+1)/2 .. d(d+1)/2 + d`, entry `b` inside a degree block is the
//! coefficient of `du^(d-b) dv^b`. Coefficients are Taylor coefficients,
//! i.e. `∂u^a ∂v^b f / (a! b!)`. Truncating a jet to a lower order is a
//! prefix slice, which makes mixed-order arithmetic cheap.

use nalgebra::{DMatrix, DVector};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

pub const MAX_ORDER: usize = 24;

#[inline]
pub fn ncoef(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[inline]
pub fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Exponent pair `(a, b)` of coefficient `k`.
#[inline]
pub fn exponents(k: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    let b = k - d * (d + 1) / 2;
    (d - b, b)
}

pub(crate) struct Layout {
    /// `(i, j, k)` with `e(i) + e(j) = e(k)` and total degree within the order.
    pub triples: Vec<(u16, u16, u16)>,
}

pub(crate) fn layout(order: usize) -> &'static Layout {
    static TABLES: OnceLock<Vec<Layout>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_ORDER)
            .map(|q| {
                let n = ncoef(q);
                let mut triples = Vec::new();
                for i in 0..n {
                    let (a1, b1) = exponents(i);
                    for j in 0..n {
                        let (a2, b2) = exponents(j);
                        if a1 + b1 + a2 + b2 <= q {
                            triples.push((i as u16, j as u16, index(a1 + a2, b1 + b2) as u16));
                        }
                    }
                }
                Layout { triples }
            })
            .collect()
    });
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    &tables[order]
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Scalar jet.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        Jet { order, c: vec![0.0; ncoef(order)] }
    }

    pub fn constant(x: f64, order: usize) -> Self {
        let mut j = Jet::zero(order);
        j.c[0] = x;
        j
    }

    /// The coordinate function `u` expanded at `u0`.
    pub fn var_u(u0: f64, order: usize) -> Self {
        let mut j = Jet::constant(u0, order);
        if order > 0 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn var_v(v0: f64, order: usize) -> Self {
        let mut j = Jet::constant(v0, order);
        if order > 0 {
            j.c[2] = 1.0;
        }
        j
    }

    pub fn from_coeffs(order: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), ncoef(order));
        Jet { order, c }
    }

    /// Builds a jet from partial derivatives `∂u^a ∂v^b`, listed in graded order.
    pub fn from_partials(order: usize, partials: &[f64]) -> Self {
        assert_eq!(partials.len(), ncoef(order));
        let c = partials
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let (a, b) = exponents(k);
                p / (factorial(a) * factorial(b))
            })
            .collect();
        Jet { order, c }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            0.0
        } else {
            self.c[index(a, b)]
        }
    }

    /// `∂u^a ∂v^b` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.coeff(a, b) * factorial(a) * factorial(b)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let q = order.min(self.order);
        Jet { order: q, c: self.c[..ncoef(q)].to_vec() }
    }

    pub fn du(&self) -> Jet {
        self.deriv(0)
    }

    pub fn dv(&self) -> Jet {
        self.deriv(1)
    }

    /// Derivative along axis 0 (u) or 1 (v).
    pub fn deriv(&self, axis: usize) -> Jet {
        if self.order == 0 {
            return Jet::zero(0);
        }
        let q = self.order - 1;
        let mut out = Jet::zero(q);
        for k in 0..ncoef(q) {
            let (a, b) = exponents(k);
            out.c[k] = if axis == 0 {
                (a + 1) as f64 * self.c[index(a + 1, b)]
            } else {
                (b + 1) as f64 * self.c[index(a, b + 1)]
            };
        }
        out
    }

    /// Polynomial value at offset `(du, dv)` from the expansion point.
    pub fn eval(&self, du: f64, dv: f64) -> f64 {
        let mut acc = 0.0;
        for d in (0..=self.order).rev() {
            let mut row = 0.0;
            let base = d * (d + 1) / 2;
            // Horner in the ratio is unstable near du = 0, so sum directly.
            for b in 0..=d {
                row += self.c[base + b] * du.powi((d - b) as i32) * dv.powi(b as i32);
            }
            acc += row;
        }
        acc
    }

    /// Re-expansion at offset `(du, dv)`, truncated to the same order.
    pub fn shift(&self, du: f64, dv: f64) -> Jet {
        let mut out = Jet::zero(self.order);
        for k in 0..self.c.len() {
            let (a2, b2) = exponents(k);
            let ck = self.c[k];
            if ck == 0.0 {
                continue;
            }
            for a in 0..=a2 {
                let wa = binomial(a2, a) * du.powi((a2 - a) as i32);
                for b in 0..=b2 {
                    let wb = binomial(b2, b) * dv.powi((b2 - b) as i32);
                    out.c[index(a, b)] += ck * wa * wb;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { order: self.order, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let q = self.order.min(other.order);
        let mut out = Jet::zero(q);
        for &(i, j, k) in &layout(q).triples {
            out.c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        out
    }

    /// `Σ_k w[k] (self - self(0))^k`, i.e. composition with a univariate series.
    pub fn compose(&self, w: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let n = w.len().min(self.order + 1);
        let mut acc = Jet::constant(w[n - 1], self.order);
        for k in (0..n - 1).rev() {
            acc = acc.mul(&h);
            acc.c[0] += w[k];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        let w: Vec<f64> = (0..=self.order).map(|k| e / factorial(k)).collect();
        self.compose(&w)
    }

    pub fn sin(&self) -> Jet {
        let x = self.c[0];
        let w: Vec<f64> = (0..=self.order)
            .map(|k| (x + k as f64 * std::f64::consts::FRAC_PI_2).sin() / factorial(k))
            .collect();
        self.compose(&w)
    }

    pub fn cos(&self) -> Jet {
        let x = self.c[0];
        let w: Vec<f64> = (0..=self.order)
            .map(|k| (x + k as f64 * std::f64::consts::FRAC_PI_2).cos() / factorial(k))
            .collect();
        self.compose(&w)
    }

    pub fn sinh(&self) -> Jet {
        let x = self.c[0];
        let w: Vec<f64> = (0..=self.order)
            .map(|k| if k % 2 == 0 { x.sinh() } else { x.cosh() } / factorial(k))
            .collect();
        self.compose(&w)
    }

    pub fn cosh(&self) -> Jet {
        let x = self.c[0];
        let w: Vec<f64> = (0..=self.order)
            .map(|k| if k % 2 == 0 { x.cosh() } else { x.sinh() } / factorial(k))
            .collect();
        self.compose(&w)
    }

    /// Real power `x^p` for positive base value.
    pub fn powf(&self, p: f64) -> Jet {
        let x = self.c[0];
        let mut w = Vec::with_capacity(self.order + 1);
        let mut coef = 1.0;
        for k in 0..=self.order {
            w.push(coef * x.powf(p - k as f64));
            coef *= (p - k as f64) / (k + 1) as f64;
        }
        self.compose(&w)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let x = self.c[0];
        let w: Vec<f64> = (0..=self.order)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * x.powi(-(k as i32) - 1))
            .collect();
        self.compose(&w)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let q = self.order.min(o.order);
        let c = (0..ncoef(q)).map(|k| self.c[k] + o.c[k]).collect();
        Jet { order: q, c }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let q = self.order.min(o.order);
        let c = (0..ncoef(q)).map(|k| self.c[k] - o.c[k]).collect();
        Jet { order: q, c }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        Jet::mul(self, o)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        &self + &o
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        &self - &o
    }
}

/// Complex scalar jet, used for holomorphic polynomial generators.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn constant(re: f64, im: f64, order: usize) -> Self {
        CJet { re: Jet::constant(re, order), im: Jet::constant(im, order) }
    }

    /// `z = u + i v` expanded at `(u0, v0)`.
    pub fn z(u0: f64, v0: f64, order: usize) -> Self {
        CJet { re: Jet::var_u(u0, order), im: Jet::var_v(v0, order) }
    }

    pub fn add(&self, o: &CJet) -> CJet {
        CJet { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn mul(&self, o: &CJet) -> CJet {
        CJet {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn scale(&self, re: f64, im: f64) -> CJet {
        CJet {
            re: &self.re.scale(re) - &self.im.scale(im),
            im: &self.re.scale(im) + &self.im.scale(re),
        }
    }

    /// `Σ_k c_k z^k` with complex coefficients `(re, im)`.
    pub fn polynomial(z: &CJet, coeffs: &[(f64, f64)]) -> CJet {
        let order = z.re.order();
        let mut acc = CJet::constant(0.0, 0.0, order);
        for &(cr, ci) in coeffs.iter().rev() {
            acc = acc.mul(z);
            acc.re = acc.re.add_const(cr);
            acc.im = acc.im.add_const(ci);
        }
        acc
    }
}

/// Vector-valued jet: column `k` of `m` holds the vector coefficient `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct VJet {
    order: usize,
    m: DMatrix<f64>,
}

impl VJet {
    pub fn zero(dim: usize, order: usize) -> Self {
        VJet { order, m: DMatrix::zeros(dim, ncoef(order)) }
    }

    pub fn from_components(comps: &[Jet]) -> Self {
        let order = comps.iter().map(|j| j.order).min().unwrap_or(0);
        let n = ncoef(order);
        let m = DMatrix::from_fn(comps.len(), n, |i, k| comps[i].c[k]);
        VJet { order, m }
    }

    pub fn constant(v: &DVector<f64>, order: usize) -> Self {
        let mut out = VJet::zero(v.len(), order);
        out.m.set_column(0, v);
        out
    }

    pub fn from_matrix(order: usize, m: DMatrix<f64>) -> Self {
        assert_eq!(m.ncols(), ncoef(order));
        VJet { order, m }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn component(&self, i: usize) -> Jet {
        Jet { order: self.order, c: self.m.row(i).iter().copied().collect() }
    }

    pub fn value(&self) -> DVector<f64> {
        self.m.column(0).into_owned()
    }

    pub fn coeff(&self, a: usize, b: usize) -> DVector<f64> {
        if a + b > self.order {
            DVector::zeros(self.dim())
        } else {
            self.m.column(index(a, b)).into_owned()
        }
    }

    pub fn partial(&self, a: usize, b: usize) -> DVector<f64> {
        self.coeff(a, b) * (factorial(a) * factorial(b))
    }

    pub fn truncate(&self, order: usize) -> VJet {
        let q = order.min(self.order);
        VJet { order: q, m: self.m.columns(0, ncoef(q)).into_owned() }
    }

    pub fn deriv(&self, axis: usize) -> VJet {
        if self.order == 0 {
            return VJet::zero(self.dim(), 0);
        }
        let q = self.order - 1;
        let mut out = VJet::zero(self.dim(), q);
        for k in 0..ncoef(q) {
            let (a, b) = exponents(k);
            let (src, f) = if axis == 0 { (index(a + 1, b), a + 1) } else { (index(a, b + 1), b + 1) };
            out.m.set_column(k, &(self.m.column(src) * f as f64));
        }
        out
    }

    pub fn du(&self) -> VJet {
        self.deriv(0)
    }

    pub fn dv(&self) -> VJet {
        self.deriv(1)
    }

    /// Mixed partial jet `∂u^a ∂v^b`.
    pub fn derivs(&self, a: usize, b: usize) -> VJet {
        let mut out = self.clone();
        for _ in 0..a {
            out = out.du();
        }
        for _ in 0..b {
            out = out.dv();
        }
        out
    }

    pub fn eval(&self, du: f64, dv: f64) -> DVector<f64> {
        let mut w = DVector::zeros(self.m.ncols());
        for k in 0..w.len() {
            let (a, b) = exponents(k);
            w[k] = du.powi(a as i32) * dv.powi(b as i32);
        }
        &self.m * w
    }

    pub fn shift(&self, du: f64, dv: f64) -> VJet {
        let comps: Vec<Jet> = (0..self.dim()).map(|i| self.component(i).shift(du, dv)).collect();
        VJet::from_components(&comps)
    }

    pub fn dot(&self, o: &VJet) -> Jet {
        let q = self.order.min(o.order);
        let n = ncoef(q);
        let g = self.m.columns(0, n).transpose() * o.m.columns(0, n);
        let mut out = Jet::zero(q);
        for &(i, j, k) in &layout(q).triples {
            out.c[k as usize] += g[(i as usize, j as usize)];
        }
        out
    }

    pub fn norm_sq(&self) -> Jet {
        self.dot(self)
    }

    /// Product with a scalar jet.
    pub fn mul_scalar(&self, s: &Jet) -> VJet {
        let q = self.order.min(s.order);
        let mut out = VJet::zero(self.dim(), q);
        for &(i, j, k) in &layout(q).triples {
            let si = s.c[i as usize];
            if si == 0.0 {
                continue;
            }
            let mut col = out.m.column_mut(k as usize);
            col.axpy(si, &self.m.column(j as usize), 1.0);
        }
        out
    }

    pub fn scale(&self, s: f64) -> VJet {
        VJet { order: self.order, m: &self.m * s }
    }

    pub fn add(&self, o: &VJet) -> VJet {
        let q = self.order.min(o.order);
        let n = ncoef(q);
        VJet { order: q, m: self.m.columns(0, n) + o.m.columns(0, n) }
    }

    pub fn sub(&self, o: &VJet) -> VJet {
        let q = self.order.min(o.order);
        let n = ncoef(q);
        VJet { order: q, m: self.m.columns(0, n) - o.m.columns(0, n) }
    }

    /// Left multiplication by a constant matrix.
    pub fn transform(&self, a: &DMatrix<f64>) -> VJet {
        VJet { order: self.order, m: a * &self.m }
    }

    /// Concatenation of components.
    pub fn stack(parts: &[&VJet]) -> VJet {
        let order = parts.iter().map(|p| p.order).min().unwrap_or(0);
        let n = ncoef(order);
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        let mut m = DMatrix::zeros(dim, n);
        let mut r = 0;
        for p in parts {
            m.view_mut((r, 0), (p.dim(), n)).copy_from(&p.m.columns(0, n));
            r += p.dim();
        }
        VJet { order, m }
    }

    /// `self / |self|`.
    pub fn normalized(&self) -> VJet {
        let inv = self.norm_sq().powf(-0.5);
        self.mul_scalar(&inv)
    }
}

/// Matrix-valued jet, coefficient-major.
#[derive(Clone, Debug)]
pub struct MJet {
    order: usize,
    c: Vec<DMatrix<f64>>,
}

impl MJet {
    pub fn zero(rows: usize, cols: usize, order: usize) -> Self {
        MJet { order, c: vec![DMatrix::zeros(rows, cols); ncoef(order)] }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        let mut out = MJet::zero(n, n, order);
        out.c[0] = DMatrix::identity(n, n);
        out
    }

    pub fn from_entries(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> Jet) -> Self {
        let jets: Vec<Jet> = (0..rows * cols).map(|k| entry(k / cols, k % cols)).collect();
        let order = jets.iter().map(|j| j.order).min().unwrap_or(0);
        let mut out = MJet::zero(rows, cols, order);
        for (k, j) in jets.iter().enumerate() {
            for (t, m) in out.c.iter_mut().enumerate() {
                m[(k / cols, k % cols)] = j.c[t];
            }
        }
        out
    }

    /// Columns given as vector jets.
    pub fn from_columns(cols: &[&VJet]) -> Self {
        let order = cols.iter().map(|v| v.order).min().unwrap_or(0);
        let rows = cols.first().map(|v| v.dim()).unwrap_or(0);
        let mut out = MJet::zero(rows, cols.len(), order);
        for (t, m) in out.c.iter_mut().enumerate() {
            for (j, v) in cols.iter().enumerate() {
                m.set_column(j, &v.m.column(t));
            }
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.c[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.c[0].ncols()
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.c
    }

    pub fn value(&self) -> &DMatrix<f64> {
        &self.c[0]
    }

    pub fn entry(&self, i: usize, j: usize) -> Jet {
        Jet { order: self.order, c: self.c.iter().map(|m| m[(i, j)]).collect() }
    }

    pub fn column(&self, j: usize) -> VJet {
        let mut m = DMatrix::zeros(self.rows(), self.c.len());
        for (t, c) in self.c.iter().enumerate() {
            m.set_column(t, &c.column(j));
        }
        VJet { order: self.order, m }
    }

    pub fn truncate(&self, order: usize) -> MJet {
        let q = order.min(self.order);
        MJet { order: q, c: self.c[..ncoef(q)].to_vec() }
    }

    pub fn deriv(&self, axis: usize) -> MJet {
        if self.order == 0 {
            return MJet::zero(self.rows(), self.cols(), 0);
        }
        let q = self.order - 1;
        let c = (0..ncoef(q))
            .map(|k| {
                let (a, b) = exponents(k);
                if axis == 0 {
                    &self.c[index(a + 1, b)] * (a + 1) as f64
                } else {
                    &self.c[index(a, b + 1)] * (b + 1) as f64
                }
            })
            .collect();
        MJet { order: q, c }
    }

    pub fn eval(&self, du: f64, dv: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows(), self.cols());
        for (k, m) in self.c.iter().enumerate() {
            let (a, b) = exponents(k);
            out += m * (du.powi(a as i32) * dv.powi(b as i32));
        }
        out
    }

    pub fn mul(&self, o: &MJet) -> MJet {
        let q = self.order.min(o.order);
        let mut out = MJet::zero(self.rows(), o.cols(), q);
        for &(i, j, k) in &layout(q).triples {
            out.c[k as usize].gemm(1.0, &self.c[i as usize], &o.c[j as usize], 1.0);
        }
        out
    }

    pub fn add(&self, o: &MJet) -> MJet {
        let q = self.order.min(o.order);
        MJet { order: q, c: (0..ncoef(q)).map(|k| &self.c[k] + &o.c[k]).collect() }
    }

    pub fn sub(&self, o: &MJet) -> MJet {
        let q = self.order.min(o.order);
        MJet { order: q, c: (0..ncoef(q)).map(|k| &self.c[k] - &o.c[k]).collect() }
    }

    /// Left and right multiplication by constant matrices.
    pub fn sandwich(&self, left: &DMatrix<f64>, right: &DMatrix<f64>) -> MJet {
        MJet { order: self.order, c: self.c.iter().map(|m| left * m * right).collect() }
    }

    pub fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> MJet {
        MJet { order: self.order, c: self.c.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.amax()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for k in 0..ncoef(10) {
            let (a, b) = exponents(k);
            assert_eq!(index(a, b), k);
        }
    }

    #[test]
    fn product_rule_and_trig_identity() {
        let u = Jet::var_u(0.3, 7);
        let v = Jet::var_v(-0.2, 7);
        let x = &(&u * &v) + &u.scale(2.0);
        let s = x.sin();
        let c = x.cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!((one.value() - 1.0).abs() < 1e-14);
        for k in 1..one.coeffs().len() {
            assert!(one.coeffs()[k].abs() < 1e-13);
        }
        let ch = x.cosh();
        let sh = x.sinh();
        let one = &(&ch * &ch) - &(&sh * &sh);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn sqrt_recip_exp() {
        let u = Jet::var_u(0.7, 6);
        let v = Jet::var_v(0.1, 6);
        let x = (&(&u * &u) + &v).add_const(1.0);
        let r = x.sqrt();
        let back = &r * &r;
        assert!((&back - &x).max_abs() < 1e-13);
        assert!((&x.recip() * &x).add_const(-1.0).max_abs() < 1e-13);
        // d/du exp(x) = exp(x) * dx/du
        let e = x.exp();
        let lhs = e.du();
        let rhs = e.truncate(5).mul(&x.du());
        assert!((&lhs - &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn partials_of_sin_product() {
        // f = sin(u) cos(v) at (0.4, 0.9); ∂u²∂v f = -sin(u) * -sin(v)
        let (u0, v0) = (0.4f64, 0.9f64);
        let f = &Jet::var_u(u0, 5).sin() * &Jet::var_v(v0, 5).cos();
        let expect = u0.sin() * v0.sin();
        assert!((f.partial(2, 1) - expect).abs() < 1e-13);
        assert!((f.partial(0, 3) - u0.sin() * v0.sin()).abs() < 1e-13);
    }

    #[test]
    fn shift_matches_reexpansion() {
        let (u0, v0) = (0.2, 0.5);
        let (du, dv) = (0.05, -0.03);
        let f = |u: Jet, v: Jet| (&u * &v).exp();
        let a = f(Jet::var_u(u0, 8), Jet::var_v(v0, 8)).shift(du, dv);
        let b = f(Jet::var_u(u0 + du, 8), Jet::var_v(v0 + dv, 8));
        // truncation error of the shifted series is O(h^{K+1-d})
        for k in 0..ncoef(3) {
            assert!((a.coeffs()[k] - b.coeffs()[k]).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn complex_polynomial_is_holomorphic() {
        let z = CJet::z(0.3, 0.4, 6);
        let p = CJet::polynomial(&z, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.5), (0.2, -0.1)]);
        // Cauchy-Riemann
        assert!((&p.re.du() - &p.im.dv()).max_abs() < 1e-13);
        assert!((&p.re.dv() + &p.im.du()).max_abs() < 1e-13);
    }

    #[test]
    fn vjet_dot_matches_componentwise() {
        let u = Jet::var_u(0.1, 5);
        let v = Jet::var_v(0.2, 5);
        let a = VJet::from_components(&[u.sin(), v.cos(), &u * &v]);
        let b = VJet::from_components(&[v.exp(), u.clone(), v.sinh()]);
        let d = a.dot(&b);
        let expect = &(&(&u.sin() * &v.exp()) + &(&v.cos() * &u)) + &(&(&u * &v) * &v.sinh());
        assert!((&d - &expect).max_abs() < 1e-14);
        let n = a.normalized();
        let one = n.norm_sq();
        assert!(one.add_const(-1.0).max_abs() < 1e-13);
    }

    #[test]
    fn mjet_product_rule() {
        let u = Jet::var_u(0.1, 5);
        let v = Jet::var_v(0.2, 5);
        let a = MJet::from_entries(2, 2, |i, j| match (i, j) {
            (0, 0) => u.cos(),
            (0, 1) => v.clone(),
            (1, 0) => &u * &v,
            _ => v.exp(),
        });
        let b = MJet::from_entries(2, 2, |i, j| if i == j { u.sin() } else { v.scale(0.5) });
        let ab = a.mul(&b);
        let lhs = ab.deriv(0);
        let rhs = a.deriv(0).mul(&b).add(&a.mul(&b.deriv(0)));
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        assert!((ab.entry(0, 1).value() - (u.cos().value() * 0.1 + 0.2 * 0.1f64.sin())).abs() < 1e-14);
    }
}
