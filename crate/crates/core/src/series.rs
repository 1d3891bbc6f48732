//! Truncated multivariate power series on the unit polydisc.
//!
//! A [`PolySeries`] stores the Taylor coefficients `a_α` of an analytic
//! function on `U^n` for all multi-indices in a box `α_j ≤ D_j`, densely and
//! in lexicographic order (first coordinate most significant). Alongside the
//! coefficients it carries `tail_bound`, an upper bound on the sup-norm over
//! the closed polydisc of the part of the function that was discarded when
//! the series was truncated. Polynomials have `tail_bound == 0`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, Error, Result};

/// Hard per-axis degree cap used when raising kernel truncations.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// Upper limit on the number of stored coefficients of one series.
pub const MAX_COEFFICIENTS: usize = 1 << 24;

/// An element of `Z_+^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `|α| = Σ α_j`.
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// `α! = Π α_j!` as a float (may overflow to infinity).
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| (1..=a).map(|k| k as f64).product::<f64>()).product()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Strictly positive weight vector `q = (q_1, …, q_n)` selecting `H_q(U^n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("weight vector must be non-empty".into()));
        }
        if let Some(bad) = entries.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return Err(Error::InvalidParameter(format!("weight entries must be finite and > 0, got {bad}")));
        }
        Ok(Self(entries))
    }

    /// The scalar weight `(q, …, q)` in dimension `n`.
    pub fn scalar(q: f64, n: usize) -> Result<Self> {
        Self::new(vec![q; n])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Returns the common value when all entries coincide.
    pub fn as_scalar(&self) -> Option<f64> {
        let first = self.0[0];
        self.0.iter().all(|&q| q == first).then_some(first)
    }

    /// Componentwise sum of several weight vectors of the same dimension.
    pub fn sum(weights: &[WeightVector]) -> Result<Self> {
        let first = weights.first().ok_or_else(|| Error::InvalidParameter("cannot sum an empty list of weights".into()))?;
        let mut acc = vec![0.0; first.dim()];
        for w in weights {
            if w.dim() != first.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: w.dim() });
            }
            for (a, q) in acc.iter_mut().zip(&w.0) {
                *a += q;
            }
        }
        Self::new(acc)
    }
}

/// Shifted factorial `(q)_β = q (q+1) ⋯ (q+β-1)`, with `(q)_0 = 1`.
///
/// Overflow yields `+inf`; callers check finiteness.
pub fn pochhammer(q: f64, beta: usize) -> f64 {
    let mut acc = 1.0;
    for k in 0..beta {
        acc *= q + k as f64;
    }
    acc
}

/// `(q)_α = Π (q_j)_{α_j}`.
pub fn pochhammer_multi(q: &WeightVector, alpha: &MultiIndex) -> Result<f64> {
    if q.dim() != alpha.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: alpha.dim() });
    }
    Ok(q.0.iter().zip(&alpha.0).map(|(&qj, &aj)| pochhammer(qj, aj)).product())
}

/// Truncated Taylor expansion of an analytic function on `U^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySeries {
    degree: Vec<usize>,
    strides: Vec<usize>,
    coeffs: Vec<Complex64>,
    tail_bound: f64,
}

fn strides_for(degree: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; degree.len()];
    for j in (0..degree.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * (degree[j + 1] + 1);
    }
    strides
}

fn box_len(degree: &[usize]) -> Result<usize> {
    let mut len: usize = 1;
    for &d in degree {
        len = len
            .checked_mul(d + 1)
            .filter(|&l| l <= MAX_COEFFICIENTS)
            .ok_or_else(|| Error::DegreeCap(format!("coefficient box {degree:?} is too large")))?;
    }
    Ok(len)
}

impl PolySeries {
    /// The zero series with the given per-axis degree cap.
    pub fn zeros(degree: Vec<usize>) -> Result<Self> {
        if degree.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let len = box_len(&degree)?;
        Ok(Self { strides: strides_for(&degree), degree, coeffs: vec![Complex64::new(0.0, 0.0); len], tail_bound: 0.0 })
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        let mut s = Self::zeros(vec![0; n])?;
        s.coeffs[0] = c;
        Ok(s)
    }

    pub fn one(n: usize) -> Result<Self> {
        Self::constant(n, Complex64::new(1.0, 0.0))
    }

    /// `c · z^α` with the degree box equal to `α`.
    pub fn monomial(alpha: &MultiIndex, c: Complex64) -> Result<Self> {
        let mut s = Self::zeros(alpha.entries().to_vec())?;
        s.set_coeff(alpha, c)?;
        Ok(s)
    }

    /// Builds a series from explicit terms; missing indices are zero.
    pub fn from_terms<I>(degree: Vec<usize>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zeros(degree)?;
        for (alpha, c) in terms {
            let idx = s.index_of(&alpha)?;
            s.coeffs[idx] += c;
        }
        Ok(s)
    }

    /// One-variable polynomial from coefficients in increasing degree.
    pub fn univariate(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient list".into()));
        }
        let degree = vec![coeffs.len() - 1];
        Ok(Self { strides: vec![1], degree, coeffs, tail_bound: 0.0 })
    }

    /// Dense constructor; `coeffs` are in lexicographic order over the box.
    pub fn from_dense(degree: Vec<usize>, coeffs: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        let len = box_len(&degree)?;
        if coeffs.len() != len {
            return Err(Error::InvalidParameter(format!("expected {len} coefficients, got {}", coeffs.len())));
        }
        if degree.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::InvalidParameter(format!("tail bound must be non-negative, got {tail_bound}")));
        }
        Ok(Self { strides: strides_for(&degree), degree, coeffs, tail_bound })
    }

    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    /// Per-axis degree cap `D`.
    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail_bound(mut self, tail: f64) -> Self {
        self.tail_bound = tail;
        self
    }

    /// Dense coefficients in lexicographic order.
    pub fn dense(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn index_of(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: alpha.dim() });
        }
        let mut idx = 0;
        for ((&a, &d), &s) in alpha.0.iter().zip(&self.degree).zip(&self.strides) {
            if a > d {
                return Err(Error::DegreeOutOfRange { alpha: alpha.0.clone(), cap: self.degree.clone() });
            }
            idx += a * s;
        }
        Ok(idx)
    }

    fn alpha_of(&self, mut idx: usize) -> MultiIndex {
        let mut alpha = vec![0; self.dim()];
        for (a, &s) in alpha.iter_mut().zip(&self.strides) {
            *a = idx / s;
            idx %= s;
        }
        MultiIndex(alpha)
    }

    /// Coefficient of `z^α`; zero outside the stored box.
    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        match self.index_of(alpha) {
            Ok(i) => self.coeffs[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, alpha: &MultiIndex, c: Complex64) -> Result<()> {
        let i = self.index_of(alpha)?;
        self.coeffs[i] = c;
        Ok(())
    }

    /// All stored terms in lexicographic order, zeros included.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (self.alpha_of(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Coefficient 1-norm, an upper bound for `sup |f|` on the closed polydisc.
    pub fn coeff_one_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn coeff_two_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest exponent per axis among nonzero coefficients.
    pub fn effective_degree(&self) -> Vec<usize> {
        let mut eff = vec![0; self.dim()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re != 0.0 || c.im != 0.0 {
                for (e, a) in eff.iter_mut().zip(self.alpha_of(i).0) {
                    *e = (*e).max(a);
                }
            }
        }
        eff
    }

    /// Copies the coefficients into a larger (or equal) degree box.
    pub fn resized(&self, degree: Vec<usize>) -> Result<Self> {
        if degree.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: degree.len() });
        }
        let mut out = Self::zeros(degree)?;
        let mut dropped = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let alpha = self.alpha_of(i);
            match out.index_of(&alpha) {
                Ok(j) => out.coeffs[j] = c,
                Err(_) => dropped += c.norm(),
            }
        }
        out.tail_bound = self.tail_bound + dropped;
        Ok(out)
    }

    /// Evaluates `Σ a_α z^α` by nested Horner in lexicographic order.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        if z.iter().any(|zj| zj.norm() > 1.0 + 1e-12) {
            return Err(Error::OutsideDomain { point: fmt_point(z), reason: "|z_j| must not exceed 1" });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without the closed-polydisc check (used for dilations and
    /// for polynomials, which are entire).
    pub fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        self.horner(0, 0, z)
    }

    fn horner(&self, axis: usize, offset: usize, z: &[Complex64]) -> Complex64 {
        let d = self.degree[axis];
        let stride = self.strides[axis];
        let mut acc = Complex64::new(0.0, 0.0);
        if axis + 1 == self.dim() {
            for k in (0..=d).rev() {
                acc = acc * z[axis] + self.coeffs[offset + k];
            }
        } else {
            for k in (0..=d).rev() {
                acc = acc * z[axis] + self.horner(axis + 1, offset + k * stride, z);
            }
        }
        acc
    }

    /// Evaluates on the tensor grid `nodes[0] × ⋯ × nodes[n-1]`.
    ///
    /// The output is row-major over node indices (first axis slowest). Axes
    /// are contracted one at a time by Horner's rule, last axis first.
    pub fn eval_grid(&self, nodes: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
        if nodes.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: nodes.len() });
        }
        let n = self.dim();
        let mut dims: Vec<usize> = self.degree.iter().map(|d| d + 1).collect();
        let mut data = self.coeffs.clone();
        for axis in (0..n).rev() {
            let outer: usize = dims[..axis].iter().product();
            let inner: usize = dims[axis + 1..].iter().product();
            let d = dims[axis];
            let m = nodes[axis].len();
            let mut next = vec![Complex64::new(0.0, 0.0); outer * m * inner];
            for o in 0..outer {
                for (mi, &x) in nodes[axis].iter().enumerate() {
                    let dst = (o * m + mi) * inner;
                    for k in (0..d).rev() {
                        let src = (o * d + k) * inner;
                        for i in 0..inner {
                            next[dst + i] = next[dst + i] * x + data[src + i];
                        }
                    }
                }
            }
            data = next;
            dims[axis] = m;
        }
        Ok(data)
    }

    /// Coefficient-wise `self + other`; the result box is the union of boxes.
    pub fn add(&self, other: &PolySeries) -> Result<PolySeries> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &PolySeries) -> Result<PolySeries> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &PolySeries, sign: Complex64) -> Result<PolySeries> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let degree: Vec<usize> = self.degree.iter().zip(&other.degree).map(|(a, b)| *a.max(b)).collect();
        let mut out = self.resized(degree)?;
        for (i, &c) in other.coeffs.iter().enumerate() {
            let j = out.index_of(&other.alpha_of(i))?;
            out.coeffs[j] += sign * c;
        }
        out.tail_bound = self.tail_bound + other.tail_bound;
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> PolySeries {
        PolySeries {
            degree: self.degree.clone(),
            strides: self.strides.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            tail_bound: self.tail_bound * c.norm(),
        }
    }

    /// `f(r_1 z_1, …, r_n z_n)`; the tail bound is kept (dilation does not
    /// increase the sup over the closed polydisc when `r_j ≤ 1`).
    pub fn dilate(&self, radii: &[f64]) -> Result<PolySeries> {
        if radii.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: radii.len() });
        }
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let alpha = self.alpha_of(i);
            let factor: f64 = alpha.0.iter().zip(radii).map(|(&a, &r)| r.powi(a as i32)).product();
            *c *= factor;
        }
        Ok(out)
    }

    /// Product with the exact degree box `D_f + D_g`.
    pub fn multiply(&self, other: &PolySeries) -> Result<PolySeries> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let cap: Vec<usize> = self.degree.iter().zip(&other.degree).map(|(a, b)| a + b).collect();
        self.multiply_capped(other, &cap)
    }

    /// Product truncated to the degree box `cap`.
    ///
    /// The tail bound of the result is
    /// `t_f S_g + t_g S_f + t_f t_g + (1-norm of dropped coefficients)` with
    /// `S` the coefficient 1-norm.
    pub fn multiply_capped(&self, other: &PolySeries, cap: &[usize]) -> Result<PolySeries> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        if cap.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: cap.len() });
        }
        let full: Vec<usize> = self.degree.iter().zip(&other.degree).map(|(a, b)| a + b).collect();
        let mut prod = PolySeries::zeros(full.clone())?;
        let n = self.dim();
        let mut a_alpha = vec![0usize; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let mut rem = i;
            for (x, &s) in a_alpha.iter_mut().zip(&self.strides) {
                *x = rem / s;
                rem %= s;
            }
            let base: usize = a_alpha.iter().zip(&prod.strides).map(|(x, s)| x * s).sum();
            for (j, &b) in other.coeffs.iter().enumerate() {
                let mut rem = j;
                let mut off = base;
                for (s_other, s_prod) in other.strides.iter().zip(&prod.strides) {
                    off += (rem / s_other) * s_prod;
                    rem %= s_other;
                }
                prod.coeffs[off] += a * b;
            }
        }
        let s_f = self.coeff_one_norm();
        let s_g = other.coeff_one_norm();
        let propagated = self.tail_bound * s_g + other.tail_bound * s_f + self.tail_bound * other.tail_bound;
        let target: Vec<usize> = full.iter().zip(cap).map(|(a, b)| *a.min(b)).collect();
        let mut out = if target == full { prod } else { prod.resized(target)? };
        out.tail_bound += propagated;
        Ok(out)
    }

    /// Substitutes fixed values for the axes in `kept` (strictly increasing)
    /// and returns the polynomial in the remaining variables, in order.
    pub fn restrict(&self, kept: &[usize], values: &[Complex64]) -> Result<PolySeries> {
        let n = self.dim();
        if kept.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: kept.len(), got: values.len() });
        }
        if kept.is_empty() || kept.len() >= n || kept.windows(2).any(|w| w[0] >= w[1]) || kept[kept.len() - 1] >= n {
            return Err(Error::InvalidParameter(format!("kept axes {kept:?} must be increasing with 1 <= k < n = {n}")));
        }
        let free: Vec<usize> = (0..n).filter(|j| !kept.contains(j)).collect();
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(kept.len());
        for (&axis, &v) in kept.iter().zip(values) {
            let mut p = Vec::with_capacity(self.degree[axis] + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=self.degree[axis] {
                p.push(acc);
                acc *= v;
            }
            powers.push(p);
        }
        let mut out = PolySeries::zeros(free.iter().map(|&j| self.degree[j]).collect())?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let alpha = self.alpha_of(i);
            let factor: Complex64 = kept.iter().zip(&powers).map(|(&axis, p)| p[alpha.0[axis]]).product();
            let off: usize = free.iter().zip(&out.strides).map(|(&j, s)| alpha.0[j] * s).sum();
            out.coeffs[off] += c * factor;
        }
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    /// Serializes to the coefficient file format.
    pub fn to_coeff_file(&self) -> CoeffFile {
        let coeffs = self
            .terms()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(alpha, c)| CoeffRecord { alpha: alpha.0, re: c.re, im: c.im })
            .collect();
        CoeffFile { dim: self.dim(), degree: self.degree.clone(), coeffs, tail_bound: Some(self.tail_bound).filter(|t| *t > 0.0) }
    }

    pub fn from_coeff_file(file: &CoeffFile) -> Result<PolySeries> {
        if file.dim == 0 || file.degree.len() != file.dim {
            return Err(Error::Parse(format!("dim {} does not match degree list of length {}", file.dim, file.degree.len())));
        }
        let mut out = PolySeries::zeros(file.degree.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut seen = vec![false; out.coeffs.len()];
        for rec in &file.coeffs {
            if !(rec.re.is_finite() && rec.im.is_finite()) {
                return Err(Error::Parse(format!("non-finite coefficient at {:?}", rec.alpha)));
            }
            let idx = out.index_of(&MultiIndex(rec.alpha.clone())).map_err(|e| Error::Parse(e.to_string()))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Parse(format!("duplicate multi-index {:?}", rec.alpha)));
            }
            out.coeffs[idx] = Complex64::new(rec.re, rec.im);
        }
        if let Some(t) = file.tail_bound {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Parse(format!("invalid tail bound {t}")));
            }
            out.tail_bound = t;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::json::to_string(&self.to_coeff_file())?)
    }

    pub fn from_json(text: &str) -> Result<PolySeries> {
        let file: CoeffFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_coeff_file(&file)
    }
}

/// On-disk coefficient document. Missing multi-indices are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffFile {
    pub dim: usize,
    pub degree: Vec<usize>,
    pub coeffs: Vec<CoeffRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffRecord {
    pub alpha: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// Magnitudes `(q)_k / k! · r^k` of the one-variable binomial series of
/// `(1 - r z)^(-q)` for `k ≤ degree`.
fn binomial_magnitudes(q: f64, r: f64, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut c = 1.0;
    for k in 0..=degree {
        out.push(c);
        c *= r * (q + k as f64) / (k as f64 + 1.0);
    }
    out
}

/// Rigorous bound for `Σ_{k > D} (q)_k / k! · r^k`.
///
/// Successive term ratios are `r (q+k)/(k+1)`; for `k ≥ D+1` they are bounded
/// by `ρ = r · max((q+D+1)/(D+2), 1)`, so the tail is at most
/// `c_{D+1} / (1 - ρ)`. Returns `None` while `ρ ≥ 1`.
fn binomial_tail(q: f64, r: f64, degree: usize, last: f64) -> Option<f64> {
    if r == 0.0 {
        return Some(0.0);
    }
    let d = degree as f64;
    let first_dropped = last * r * (q + d) / (d + 1.0);
    let rho = r * ((q + d + 1.0) / (d + 2.0)).max(1.0);
    (rho < 1.0).then(|| first_dropped / (1.0 - rho))
}

/// Truncated expansion of `K_q(z, w) = Π (1 - z_j conj(w_j))^(-q_j)`.
///
/// The coefficient of `z^α` is `(q)_α / α! · conj(w)^α`. Starting from
/// `min_degree`, each axis degree is raised until its geometric tail bound is
/// below `tol / n`; axes are then raised further until the combined bound
/// `Π (S_j + t_j) - Π S_j` on the closed polydisc is below `tol`.
pub fn kernel_series(q: &WeightVector, w: &[Complex64], min_degree: &MultiIndex, tol: f64) -> Result<PolySeries> {
    kernel_series_capped(q, w, min_degree, tol, DEFAULT_DEGREE_CAP)
}

pub fn kernel_series_capped(
    q: &WeightVector,
    w: &[Complex64],
    min_degree: &MultiIndex,
    tol: f64,
    cap: usize,
) -> Result<PolySeries> {
    let n = q.dim();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    if min_degree.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: min_degree.dim() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if w.iter().any(|wj| !(wj.norm() < 1.0)) {
        return Err(Error::OutsideDomain { point: fmt_point(w), reason: "kernel parameter must satisfy |w_j| < 1" });
    }
    let radii: Vec<f64> = w.iter().map(|wj| wj.norm()).collect();
    let mut degree: Vec<usize> = min_degree.entries().to_vec();
    let axis_tail = |j: usize, d: usize| -> Option<(f64, f64)> {
        let mags = binomial_magnitudes(q.0[j], radii[j], d);
        let sum: f64 = mags.iter().sum();
        binomial_tail(q.0[j], radii[j], d, mags[d]).map(|t| (sum, t))
    };
    let mut parts = Vec::with_capacity(n);
    for j in 0..n {
        loop {
            if degree[j] > cap {
                return Err(Error::DegreeCap(format!("tolerance {tol:e} unreachable within degree cap {cap} on axis {j}")));
            }
            match axis_tail(j, degree[j]) {
                Some((s, t)) if t < tol / n as f64 => {
                    parts.push((s, t));
                    break;
                }
                _ => degree[j] += 1,
            }
        }
    }
    let combined = |parts: &[(f64, f64)]| -> f64 {
        let full: f64 = parts.iter().map(|(s, t)| s + t).product();
        let kept: f64 = parts.iter().map(|(s, _)| s).product();
        (full - kept).max(parts.iter().map(|(_, t)| *t).fold(0.0, f64::max))
    };
    while combined(&parts) >= tol {
        let worst = (0..n)
            .max_by(|&a, &b| {
                let ca = parts[a].1 * (0..n).filter(|&i| i != a).map(|i| parts[i].0 + parts[i].1).product::<f64>();
                let cb = parts[b].1 * (0..n).filter(|&i| i != b).map(|i| parts[i].0 + parts[i].1).product::<f64>();
                ca.total_cmp(&cb)
            })
            .expect("n >= 1");
        degree[worst] += 1;
        if degree[worst] > cap {
            return Err(Error::DegreeCap(format!("tolerance {tol:e} unreachable within degree cap {cap}")));
        }
        parts[worst] = axis_tail(worst, degree[worst]).expect("tail stays geometric once below tol");
    }
    let axes: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let wbar = w[j].conj();
            let mut c = Complex64::new(1.0, 0.0);
            let mut v = Vec::with_capacity(degree[j] + 1);
            for k in 0..=degree[j] {
                v.push(c);
                c *= wbar * ((q.0[j] + k as f64) / (k as f64 + 1.0));
            }
            v
        })
        .collect();
    let tail = combined(&parts);
    let mut out = PolySeries::zeros(degree)?;
    for i in 0..out.coeffs.len() {
        let alpha = out.alpha_of(i);
        out.coeffs[i] = alpha.0.iter().zip(&axes).map(|(&a, v)| v[a]).product();
    }
    out.tail_bound = tail;
    Ok(out)
}

/// Closed-form `Π (1 - z_j conj(w_j))^(-q_j)` on the principal branch.
pub fn kernel_eval(q: &WeightVector, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if z.len() != q.dim() || w.len() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: z.len().min(w.len()) });
    }
    if z.iter().chain(w).any(|x| !(x.norm() < 1.0)) {
        return Err(Error::OutsideDomain { point: fmt_point(z), reason: "kernel evaluation needs |z_j|, |w_j| < 1" });
    }
    Ok(z.iter().zip(w).zip(&q.0).map(|((zj, wj), &qj)| (Complex64::new(1.0, 0.0) - zj * wj.conj()).powf(-qj)).product())
}

/// Which extremal family to expand.
#[derive(Clone, Debug, PartialEq)]
pub enum Extremal {
    /// `K_q(·, w)`, the equality case of the Hilbert-space product inequality.
    Hilbert(WeightVector),
    /// `K(·, w)^(2/p)` with the Cauchy–Szegő kernel, the equality case of the
    /// Hardy-space product inequality.
    HardyPower { p: f64, n: usize },
}

pub fn extremal_function(variant: &Extremal, w: &[Complex64], tol: f64) -> Result<PolySeries> {
    match variant {
        Extremal::Hilbert(q) => kernel_series(q, w, &MultiIndex::zeros(q.dim()), tol),
        Extremal::HardyPower { p, n } => {
            if !(*p > 0.0) {
                return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
            }
            let q = WeightVector::scalar(2.0 / p, *n)?;
            kernel_series(&q, w, &MultiIndex::zeros(*n), tol)
        }
    }
}
