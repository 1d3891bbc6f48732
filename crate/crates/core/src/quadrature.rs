//! Tensor quadrature for the Haar measure `m_n` on `T^n` and for the
//! normalized weighted measures `dA_{q-2}` (and their products) on `U^n`.
//!
//! Every rule is a tensor product of one-axis rules. Values are produced in
//! row-major node order (first axis slowest) and reduced by contracting the
//! last axis first, sequentially, so results do not depend on how the
//! pointwise evaluations were scheduled.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, Error, Result};
use crate::series::PolySeries;

/// Quadrature resolution and convergence policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Initial angular points per axis (`N`).
    pub grid: usize,
    /// Initial radial points per axis (`R`).
    pub radial: usize,
    /// Largest angular resolution the adaptive loop may reach.
    pub max_grid: usize,
    /// Largest radial resolution the adaptive loop may reach.
    pub max_radial: usize,
    /// Largest total number of tensor nodes for one evaluation.
    pub max_nodes: usize,
    /// Relative change between successive doublings accepted as converged.
    pub rel_tol: f64,
    /// Use Neumaier-compensated accumulation in reductions.
    pub compensated: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { grid: 32, radial: 16, max_grid: 8192, max_radial: 512, max_nodes: 1 << 22, rel_tol: 1e-10, compensated: false }
    }
}

/// Value of an integral together with its error bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Absolute error estimate: zero for exact rules, otherwise the last
    /// change between successive refinements.
    pub error: f64,
    pub grid: usize,
    pub radial: usize,
    pub converged: bool,
}

impl Estimate {
    fn exact(value: f64, grid: usize, radial: usize) -> Self {
        Self { value, error: 0.0, grid, radial, converged: true }
    }
}

/// One-axis rule: nodes in the closed disc with positive weights summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    /// `N` equally spaced points `e^{2πi(k + offset)/N}` with weight `1/N`.
    pub fn circle(points: usize, offset: f64) -> Self {
        let nodes = (0..points).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + offset) / points as f64)).collect();
        Self { nodes, weights: vec![1.0 / points as f64; points] }
    }

    /// Product rule for `dA_{q-2}` with `R` radial and `N` angular points.
    /// Nodes are ordered radius-major.
    pub fn disc(q: f64, radial: usize, angular: usize) -> Result<Self> {
        let (t, w) = gauss_jacobi_unit(radial, q - 2.0)?;
        let circle = Self::circle(angular, 0.0);
        let mut nodes = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        for (ti, wi) in t.iter().zip(&w) {
            let r = ti.sqrt();
            for (z, wa) in circle.nodes.iter().zip(&circle.weights) {
                nodes.push(z * r);
                weights.push(wi * wa);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Haar measure rule on `T^n`: tensor grid of `N`-th roots of unity.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusRule {
    dim: usize,
    points_per_axis: usize,
    axis: AxisRule,
}

impl TorusRule {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        Self::with_offset(dim, points_per_axis, 0.0)
    }

    /// Grid rotated by `offset / N` of a turn.
    pub fn with_offset(dim: usize, points_per_axis: usize, offset: f64) -> Result<Self> {
        if dim == 0 || points_per_axis == 0 {
            return Err(Error::InvalidParameter("torus rule needs n >= 1 and N >= 1".into()));
        }
        Ok(Self { dim, points_per_axis, axis: AxisRule::circle(points_per_axis, offset) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn axis(&self) -> &AxisRule {
        &self.axis
    }

    pub fn tensor(&self) -> TensorRule {
        TensorRule { axes: vec![self.axis.clone(); self.dim] }
    }

    pub fn integrate<F>(&self, integrand: F) -> Result<f64>
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        self.tensor().integrate(integrand, false)
    }
}

/// Rule for the product measure `ν_n = dA_{q-2} × ⋯ × dA_{q-2}` on `U^n`.
///
/// For `q = 1` the measure is the Haar measure on the torus and the rule
/// delegates to a [`TorusRule`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscRule {
    dim: usize,
    q: f64,
    radial: usize,
    angular: usize,
    axis: AxisRule,
}

impl DiscRule {
    pub fn new(dim: usize, q: f64, radial: usize, angular: usize) -> Result<Self> {
        if dim == 0 || radial == 0 || angular == 0 {
            return Err(Error::InvalidParameter("disc rule needs n, R, N >= 1".into()));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("weighted measure needs q >= 1, got {q}")));
        }
        let axis = if q == 1.0 { AxisRule::circle(angular, 0.0) } else { AxisRule::disc(q, radial, angular)? };
        Ok(Self { dim, q, radial, angular, axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn radial(&self) -> usize {
        self.radial
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    pub fn axis(&self) -> &AxisRule {
        &self.axis
    }

    pub fn tensor(&self) -> TensorRule {
        TensorRule { axes: vec![self.axis.clone(); self.dim] }
    }

    pub fn integrate<F>(&self, integrand: F) -> Result<f64>
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        self.tensor().integrate(integrand, false)
    }
}

/// A general tensor-product rule.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorRule {
    pub axes: Vec<AxisRule>,
}

impl TensorRule {
    pub fn node_count(&self) -> usize {
        self.axes.iter().map(AxisRule::len).product()
    }

    pub fn axis_nodes(&self) -> Vec<Vec<Complex64>> {
        self.axes.iter().map(|a| a.nodes.clone()).collect()
    }

    fn node_at(&self, mut idx: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.axes.len()];
        for (j, axis) in self.axes.iter().enumerate().rev() {
            out[j] = axis.nodes[idx % axis.len()];
            idx /= axis.len();
        }
        out
    }

    /// Pointwise integrand; evaluations run in parallel, the reduction is
    /// sequential in the fixed node order.
    pub fn integrate<F>(&self, integrand: F, compensated: bool) -> Result<f64>
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let values: Vec<f64> = (0..self.node_count()).into_par_iter().map(|i| integrand(&self.node_at(i))).collect();
        self.reduce(&values, compensated)
    }

    pub fn integrate_complex<F>(&self, integrand: F, compensated: bool) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let values: Vec<Complex64> = (0..self.node_count()).into_par_iter().map(|i| integrand(&self.node_at(i))).collect();
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        Ok(Complex64::new(self.reduce(&re, compensated)?, self.reduce(&im, compensated)?))
    }

    /// Weighted sum of values given in row-major node order.
    pub fn reduce(&self, values: &[f64], compensated: bool) -> Result<f64> {
        if values.len() != self.node_count() {
            return Err(Error::DimensionMismatch { expected: self.node_count(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { value: values[i], node: fmt_point(&self.node_at(i)) });
        }
        let mut data = values.to_vec();
        for axis in self.axes.iter().rev() {
            let m = axis.len();
            data = data
                .chunks_exact(m)
                .map(|chunk| {
                    let terms = chunk.iter().zip(&axis.weights).map(|(v, w)| v * w);
                    if compensated {
                        neumaier_sum(terms)
                    } else {
                        terms.sum()
                    }
                })
                .collect();
        }
        Ok(data[0])
    }
}

fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Gauss rule with `r` nodes for the probability measure
/// `(a+1)(1-t)^a dt` on `[0, 1]`, `a > -1`.
///
/// Golub–Welsch: eigenvalues of the Jacobi matrix of the Jacobi weight
/// `(1-x)^a` on `[-1, 1]` give the nodes; squared first components of the
/// normalized eigenvectors give the weights (the measure has unit mass).
pub fn gauss_jacobi_unit(r: usize, a: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if r == 0 {
        return Err(Error::InvalidParameter("radial rule needs at least one node".into()));
    }
    if !(a > -1.0) {
        return Err(Error::InvalidParameter(format!("Jacobi exponent must exceed -1, got {a}")));
    }
    let b = 0.0;
    let ab = a + b;
    let mut diag = vec![0.0; r];
    let mut off = vec![0.0; r];
    diag[0] = (b - a) / (ab + 2.0);
    for k in 1..r {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = (b * b - a * a) / (s * (s + 2.0));
        let num = 4.0 * kf * (kf + a) * (kf + b) * (kf + ab);
        let den = s * s * (s + 1.0) * (s - 1.0);
        off[k] = (num / den).sqrt();
    }
    let (x, first) = symmetric_tridiagonal_eigen(diag, off)?;
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(&first).map(|(xi, vi)| ((1.0 + xi) / 2.0, vi * vi)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs.into_iter().unzip())
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix,
/// tracking only the first row of the eigenvector matrix.
///
/// `off[k]` couples rows `k-1` and `k`; `off[0]` is ignored.
fn symmetric_tridiagonal_eigen(mut d: Vec<f64>, off: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[1..]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::InvalidParameter("tridiagonal eigensolver did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// `∫_{T^n} |f(ζ)|^p dm_n(ζ)` with the convergence policy of `cfg`.
///
/// For even integer `p`, `|f|^p` is a trigonometric polynomial and the rule
/// with `N > max(2D, pD/2)` points per axis is exact. Otherwise `N` is
/// doubled until two successive values agree to `cfg.rel_tol`.
pub fn torus_power_mean(f: &PolySeries, p: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
    }
    let n = f.dim();
    let dmax = f.effective_degree().into_iter().max().unwrap_or(0);
    let eval = |points: usize| -> Result<f64> {
        let rule = TorusRule::new(n, points)?.tensor();
        let values: Vec<f64> = f.eval_grid(&rule.axis_nodes())?.iter().map(|v| v.norm().powf(p)).collect();
        rule.reduce(&values, cfg.compensated)
    };
    if is_even_integer(p) {
        let points = (2 * dmax + 1).max((p as usize) * dmax / 2 + 1);
        return Ok(Estimate::exact(eval(points)?, points, 0));
    }
    adaptive(cfg, n, (2 * dmax + 2).max(cfg.grid), 0, |g, _| eval(g))
}

pub(crate) fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64).is_multiple_of(2) && p > 0.0 && p < 1e6
}

/// Doubling loop shared by the torus and disc routines. `radial == 0` marks a
/// torus-only refinement. When a full doubling would exceed the node budget
/// the largest refinement that fits is used, provided it grows the rule by at
/// least a factor 1.1.
pub(crate) fn adaptive<F>(cfg: &QuadratureConfig, n: usize, grid: usize, radial: usize, mut eval: F) -> Result<Estimate>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let per_axis_cap = (cfg.max_nodes as f64).powf(1.0 / n as f64);
    let refine = |g: usize, r: usize| -> Option<(usize, usize)> {
        let mut s = 2.0f64.min(cfg.max_grid as f64 / g as f64);
        if r > 0 {
            s = s.min(cfg.max_radial as f64 / r as f64).min((per_axis_cap / (g * r) as f64).sqrt());
        } else {
            s = s.min(per_axis_cap / g as f64);
        }
        if s < 1.1 {
            return None;
        }
        let g2 = ((g as f64 * s).floor() as usize).max(g + 1);
        let r2 = if r > 0 { ((r as f64 * s).floor() as usize).max(r + 1) } else { 0 };
        Some((g2, r2))
    };
    let (mut g, mut r) = (grid.max(1), radial);
    let mut prev = eval(g, r)?;
    let mut last_diff = f64::INFINITY;
    loop {
        let Some((g2, r2)) = refine(g, r) else {
            return Ok(Estimate { value: prev, error: last_diff, grid: g, radial: r, converged: false });
        };
        let next = eval(g2, r2)?;
        let diff = (next - prev).abs();
        if diff <= cfg.rel_tol * next.abs() || (next == 0.0 && prev == 0.0) {
            return Ok(Estimate { value: next, error: diff, grid: g2, radial: r2, converged: true });
        }
        prev = next;
        last_diff = diff;
        g = g2;
        r = r2;
    }
}

/// `‖f‖_p^p = ∫_{T^n} |f|^p dm_n` for a polynomial `f`.
pub fn hardy_norm_pow(f: &PolySeries, p: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    torus_power_mean(f, p, cfg)
}

/// `‖f‖_p = sup_r M_p(f, r)`, attained on the torus for polynomials.
pub fn hardy_norm(f: &PolySeries, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(hardy_norm_pow(f, p, cfg)?.value.powf(1.0 / p))
}

/// `M_p(f, r) = (∫_{T^n} |f(rζ)|^p dm_n)^{1/p}`.
pub fn mp_at_radius(f: &PolySeries, p: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("radius must lie in [0, 1], got {r}")));
    }
    let dilated = f.dilate(&vec![r; f.dim()])?;
    hardy_norm(&dilated, p, cfg)
}

/// `∫ |f|^2 dν_n` with the exact rule for the squared modulus of a
/// polynomial: `N = 2D+1` angular and `R = ⌊D/2⌋+1` radial points per axis.
pub fn disc_square_mean(f: &PolySeries, q: f64) -> Result<Estimate> {
    let dmax = f.effective_degree().into_iter().max().unwrap_or(0);
    let angular = 2 * dmax + 1;
    let radial = dmax / 2 + 1;
    let rule = DiscRule::new(f.dim(), q, radial, angular)?.tensor();
    let values: Vec<f64> = f.eval_grid(&rule.axis_nodes())?.iter().map(|v| v.norm_sqr()).collect();
    Ok(Estimate::exact(rule.reduce(&values, false)?, angular, radial))
}
