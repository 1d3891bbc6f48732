//! One-variable factorization: polynomial roots, finite Blaschke products,
//! outer functions from boundary moduli, Riesz factorization `f = B h` and
//! branches of `h^β` for zero-free `h`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{hardy_norm_pow, is_even_integer, QuadratureConfig, TorusRule};
use crate::series::PolySeries;

/// Width of the band around the unit circle in which roots are rejected.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Relative residual accepted when certifying a root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// Outer functions refuse evaluation for `|z| ≥ 1 - OUTER_EVAL_GUARD`.
pub const OUTER_EVAL_GUARD: f64 = 1e-9;

const ABERTH_MAX_ITER: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootLocation {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    /// `|f(root)| / Σ |a_k| |root|^k`.
    pub residual: f64,
    pub location: RootLocation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn inside(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots.iter().filter(|r| r.location == RootLocation::Inside).map(|r| r.value)
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Root> + '_ {
        self.roots.iter().filter(|r| r.location == RootLocation::Boundary)
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

fn univariate_coeffs(f: &PolySeries) -> Result<Vec<Complex64>> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    let mut coeffs = f.dense().to_vec();
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
        coeffs.pop();
    }
    if coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return Err(Error::ZeroInput);
    }
    Ok(coeffs)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        horner(coeffs, z).norm() / scale
    }
}

fn classify(z: Complex64) -> RootLocation {
    let r = z.norm();
    if r < 1.0 - BOUNDARY_BAND {
        RootLocation::Inside
    } else if r <= 1.0 + BOUNDARY_BAND {
        RootLocation::Boundary
    } else {
        RootLocation::Outside
    }
}

/// Aberth–Ehrlich simultaneous iteration on a polynomial with nonzero
/// constant term, followed by Newton polishing.
fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let radius = (0..d).map(|k| (coeffs[k] / lead).norm().powf(1.0 / (d - k) as f64)).fold(0.0, f64::max).max(1e-3);
    let mut z: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / d as f64 + 0.4)).collect();
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = horner_with_derivative(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(coeffs, *zi);
            let cand = *zi - p / dp;
            if cand.is_finite() && horner(coeffs, cand).norm() < p.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    z
}

/// All roots of a one-variable polynomial, with multiplicity, each certified
/// by `|f(a)| ≤ 1e-10 · Σ |c_k| |a|^k` (for `|a| ≤ 1` this is at most
/// `1e-10` times the coefficient 1-norm).
pub fn polynomial_roots(f: &PolySeries) -> Result<RootSet> {
    let coeffs = univariate_coeffs(f)?;
    let origin = coeffs.iter().take_while(|c| c.re == 0.0 && c.im == 0.0).count();
    let reduced = &coeffs[origin..];
    let mut values: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); origin];
    values.extend(aberth(reduced));
    let mut roots = Vec::with_capacity(values.len());
    for v in values {
        let residual = backward_error(&coeffs, v);
        if !(residual <= ROOT_RESIDUAL_TOL) {
            return Err(Error::RootResidual { root: format!("{v}"), residual, threshold: ROOT_RESIDUAL_TOL });
        }
        roots.push(Root { value: v, residual, location: classify(v) });
    }
    roots.sort_by(|a, b| a.value.norm().total_cmp(&b.value.norm()).then(a.value.arg().total_cmp(&b.value.arg())));
    Ok(RootSet { roots })
}

/// Finite Blaschke product `z^k Π (|a|/a)(a - z)/(1 - conj(a) z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    origin_order: usize,
}

impl BlaschkeProduct {
    /// Zeros equal to `0` are counted into the origin factor `z^k`.
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        let mut nonzero = Vec::with_capacity(zeros.len());
        let mut origin_order = 0;
        for a in zeros {
            if a.re == 0.0 && a.im == 0.0 {
                origin_order += 1;
            } else if !(a.norm() < 1.0 - BOUNDARY_BAND) {
                return Err(Error::BoundaryRoot { root: format!("{a}"), delta: BOUNDARY_BAND });
            } else {
                nonzero.push(a);
            }
        }
        Ok(Self { zeros: nonzero, origin_order })
    }

    /// `B ≡ 1`.
    pub fn identity() -> Self {
        Self { zeros: Vec::new(), origin_order: 0 }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn origin_order(&self) -> usize {
        self.origin_order
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = z.powu(self.origin_order as u32);
        for a in &self.zeros {
            acc *= (a.norm() / a) * (a - z) / (one - a.conj() * z);
        }
        acc
    }
}

/// Positive samples `U(ζ_k)` at `ζ_k = e^{2πik/N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryModulus {
    samples: Vec<f64>,
}

impl BoundaryModulus {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("boundary modulus needs at least one sample".into()));
        }
        if let Some((k, v)) = samples.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("sample {k} must be finite and positive, got {v}")));
        }
        Ok(Self { samples })
    }

    pub fn from_fn<F: Fn(Complex64) -> f64>(points: usize, modulus: F) -> Result<Self> {
        Self::new((0..points).map(|k| modulus(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64))).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Parses the two-column text format: `angle_fraction value` per line,
    /// fractions `k/N` in increasing order starting at `0`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(a), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            let a: f64 = a.parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let v: f64 = v.parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            rows.push((a, v));
        }
        let n = rows.len();
        for (k, (a, _)) in rows.iter().enumerate() {
            if !(0.0..1.0).contains(a) || (a - k as f64 / n as f64).abs() > 1e-9 {
                return Err(Error::Parse(format!("row {k}: angle fraction {a} is not {k}/{n}")));
            }
        }
        Self::new(rows.into_iter().map(|(_, v)| v).collect()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let n = self.samples.len();
        let mut out = String::new();
        for (k, v) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{:.16e} {:.16e}", k as f64 / n as f64, v);
        }
        out
    }
}

/// `f(z) = exp{∫_T (ζ+z)/(ζ-z) log U(ζ) dm_1(ζ)}` by the trapezoid rule on
/// the sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterFunction {
    nodes: Vec<Complex64>,
    log_samples: Vec<f64>,
}

impl OuterFunction {
    pub fn new(modulus: &BoundaryModulus) -> Self {
        let n = modulus.len();
        let nodes = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
        Self { nodes, log_samples: modulus.samples().iter().map(|v| v.ln()).collect() }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0 - OUTER_EVAL_GUARD) {
            return Err(Error::OutsideDomain { point: vec![format!("{z}")], reason: "outer function needs |z| < 1 - 1e-9" });
        }
        let n = self.nodes.len() as f64;
        let exponent: Complex64 =
            self.nodes.iter().zip(&self.log_samples).map(|(zeta, l)| (zeta + z) / (zeta - z) * *l).sum::<Complex64>() / n;
        Ok(exponent.exp())
    }

    /// `max_k ||f(r ζ_k)| - U(ζ_k)| / U(ζ_k)` at `r = 1 - 10/N`.
    pub fn boundary_deviation(&self) -> Result<f64> {
        let n = self.nodes.len();
        let r = (1.0 - 10.0 / n as f64).max(0.0);
        let mut worst: f64 = 0.0;
        for (zeta, l) in self.nodes.iter().zip(&self.log_samples) {
            let u = l.exp();
            worst = worst.max((self.eval(zeta * r)?.norm() - u).abs() / u);
        }
        Ok(worst)
    }
}

/// Outcome of `f = B h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszFactorization {
    pub roots: RootSet,
    pub blaschke: BlaschkeProduct,
    /// Zero-free factor, a polynomial whose zeros all lie outside the closed disc.
    #[serde(skip)]
    pub h: Option<PolySeries>,
    pub p: f64,
    pub f_norm: f64,
    /// `‖h‖_p` from the same boundary samples as `f_norm`.
    pub norm_check: f64,
    pub grid: usize,
}

impl RieszFactorization {
    pub fn h(&self) -> &PolySeries {
        self.h.as_ref().expect("factorization always carries h")
    }

    pub fn eval_h(&self, z: Complex64) -> Complex64 {
        self.h().eval_unchecked(&[z])
    }
}

fn deflate(coeffs: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    let mut carry = coeffs[d];
    for k in (0..d).rev() {
        out[k] = carry;
        carry = coeffs[k] + root * carry;
    }
    out
}

/// Riesz factorization of a one-variable polynomial.
pub fn riesz_factorize(f: &PolySeries, p: f64, cfg: &QuadratureConfig) -> Result<RieszFactorization> {
    let coeffs = univariate_coeffs(f)?;
    let roots = polynomial_roots(f)?;
    if let Some(r) = roots.boundary().next() {
        return Err(Error::BoundaryRoot { root: format!("{}", r.value), delta: BOUNDARY_BAND });
    }
    let inside: Vec<Complex64> = roots.inside().collect();
    let blaschke = BlaschkeProduct::new(inside.clone())?;

    let mut reduced: Vec<Complex64> = coeffs[blaschke.origin_order()..].to_vec();
    let mut nonzero: Vec<Complex64> = inside.iter().copied().filter(|a| a.norm() > 0.0).collect();
    nonzero.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let one = Complex64::new(1.0, 0.0);
    let mut unimodular = one;
    for &a in &nonzero {
        reduced = deflate(&reduced, a);
        unimodular *= -a / a.norm();
    }
    let mut h = PolySeries::univariate(reduced)?;
    for &a in &nonzero {
        h = h.multiply(&PolySeries::univariate(vec![one, -a.conj()])?)?;
    }
    let h = h.scale(unimodular);

    let f_est = hardy_norm_pow(f, p, cfg)?;
    let h_pow = if is_even_integer(p) {
        hardy_norm_pow(&h, p, cfg)?.value
    } else {
        let rule = TorusRule::new(1, f_est.grid)?.tensor();
        let values: Vec<f64> = h.eval_grid(&rule.axis_nodes())?.iter().map(|v| v.norm().powf(p)).collect();
        rule.reduce(&values, cfg.compensated)?
    };
    Ok(RieszFactorization {
        roots,
        blaschke,
        h: Some(h),
        p,
        f_norm: f_est.value.powf(1.0 / p),
        norm_check: h_pow.powf(1.0 / p),
        grid: f_est.grid,
    })
}

/// `min_k |h(r e^{2πik/N})|`.
pub fn min_modulus_on_circle<F: Fn(Complex64) -> Complex64>(h: F, radius: f64, points: usize) -> f64 {
    (0..points)
        .map(|k| h(Complex64::from_polar(radius, 2.0 * PI * k as f64 / points as f64)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// A branch of `h^β = exp(β log h)` for zero-free `h`, with `arg h` tracked
/// continuously along the segment from `0` to `z` starting from the principal
/// argument of `h(0)`.
pub struct FractionalPower<F> {
    h: F,
    beta: f64,
    arg0: f64,
}

const PHASE_STEP_LIMIT: f64 = PI / 4.0;
const PHASE_MAX_DEPTH: u32 = 40;

impl<F: Fn(Complex64) -> Complex64> FractionalPower<F> {
    pub fn new(h: F, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent must be positive, got {beta}")));
        }
        let h0 = h(Complex64::new(0.0, 0.0));
        if !(h0.norm() > 0.0) {
            return Err(Error::ZeroCrossing("0".into()));
        }
        let arg0 = h0.arg();
        Ok(Self { h, beta, arg0 })
    }

    fn track(&self, z: Complex64, t0: f64, t1: f64, v0: Complex64, v1: Complex64, depth: u32) -> Result<f64> {
        let delta = (v1 / v0).arg();
        if delta.abs() <= PHASE_STEP_LIMIT {
            return Ok(delta);
        }
        if depth >= PHASE_MAX_DEPTH {
            return Err(Error::ZeroCrossing(format!("{}", z * t1)));
        }
        let tm = 0.5 * (t0 + t1);
        let vm = (self.h)(z * tm);
        if !(vm.norm() > 0.0) || !vm.is_finite() {
            return Err(Error::ZeroCrossing(format!("{}", z * tm)));
        }
        Ok(self.track(z, t0, tm, v0, vm, depth + 1)? + self.track(z, tm, t1, vm, v1, depth + 1)?)
    }

    /// Continuous `log h(z)`.
    pub fn log(&self, z: Complex64) -> Result<Complex64> {
        const STEPS: usize = 32;
        let mut v = (self.h)(Complex64::new(0.0, 0.0));
        let mut phase = self.arg0;
        for k in 1..=STEPS {
            let t0 = (k - 1) as f64 / STEPS as f64;
            let t1 = k as f64 / STEPS as f64;
            let next = (self.h)(z * t1);
            if !(next.norm() > 0.0) || !next.is_finite() {
                return Err(Error::ZeroCrossing(format!("{}", z * t1)));
            }
            phase += self.track(z, t0, t1, v, next, 0)?;
            v = next;
        }
        Ok(Complex64::new(v.norm().ln(), phase))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.log(z)? * self.beta).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(lead: Complex64, roots: &[Complex64]) -> PolySeries {
        let mut f = PolySeries::constant(1, lead).unwrap();
        for &r in roots {
            f = f.multiply(&PolySeries::univariate(vec![-r, c(1.0, 0.0)]).unwrap()).unwrap();
        }
        f
    }

    #[test]
    fn roots_examples() {
        let f = PolySeries::univariate(vec![c(-0.5, 0.0), c(1.0, 0.0)]).unwrap();
        let r = polynomial_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].value - c(0.5, 0.0)).norm() < 1e-15);

        let z2 = PolySeries::univariate(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = polynomial_roots(&z2).unwrap();
        assert_eq!(r.values(), vec![c(0.0, 0.0), c(0.0, 0.0)]);

        let f = from_roots(c(1.0, 0.0), &[c(0.3, 0.0), c(2.0, 0.0)]);
        let r = polynomial_roots(&f).unwrap();
        assert_eq!(r.roots[0].location, RootLocation::Inside);
        assert_eq!(r.roots[1].location, RootLocation::Outside);
        assert!((r.roots[0].value - c(0.3, 0.0)).norm() < 1e-13);
        assert!((r.roots[1].value - c(2.0, 0.0)).norm() < 1e-12);
        for root in &r.roots {
            assert!(f.eval_unchecked(&[root.value]).norm() < 1e-10 * f.coeff_one_norm() * root.value.norm().max(1.0).powi(2));
        }
    }

    #[test]
    fn roots_errors() {
        assert!(matches!(polynomial_roots(&PolySeries::zeros(vec![3]).unwrap()), Err(Error::ZeroInput)));
        let f = from_roots(c(1.0, 0.0), &[c(0.0, 1.0)]);
        let r = polynomial_roots(&f).unwrap();
        assert_eq!(r.roots[0].location, RootLocation::Boundary);
        assert!(matches!(riesz_factorize(&f, 2.0, &QuadratureConfig::default()), Err(Error::BoundaryRoot { .. })));
    }

    #[test]
    fn repeated_root_is_certified() {
        let f = from_roots(c(2.0, 1.0), &[c(0.5, 0.1), c(0.5, 0.1), c(-0.2, 0.7)]);
        let r = polynomial_roots(&f).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert!(r.roots.iter().all(|x| x.residual <= ROOT_RESIDUAL_TOL));
    }

    #[test]
    fn blaschke_examples() {
        let b = BlaschkeProduct::identity();
        assert_eq!(b.eval(c(0.3, 0.4)), c(1.0, 0.0));
        let b = BlaschkeProduct::new(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(b.eval(c(0.3, 0.4)), c(0.3, 0.4));
        let b = BlaschkeProduct::new(vec![c(0.5, 0.0)]).unwrap();
        assert_eq!(b.eval(c(0.5, 0.0)).norm(), 0.0);
        for k in 0..512 {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 512.0);
            assert!((b.eval(zeta).norm() - 1.0).abs() < 1e-12);
        }
        assert!(BlaschkeProduct::new(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn outer_function_examples() {
        let u = BoundaryModulus::from_fn(256, |_| 3.0).unwrap();
        let f = OuterFunction::new(&u);
        assert!((f.eval(c(0.4, -0.3)).unwrap() - c(3.0, 0.0)).norm() < 1e-12);

        // A boundary zero makes log U singular; the trapezoid error is O(1/N).
        let err = |n: usize| {
            let u = BoundaryModulus::from_fn(n, |z| (c(1.0, 0.0) + z).norm()).unwrap();
            let f = OuterFunction::new(&u);
            (0..20)
                .map(|k| {
                    let z = Complex64::from_polar(0.9 * k as f64 / 20.0, 0.7 * k as f64);
                    (f.eval(z).unwrap().norm() - (c(1.0, 0.0) + z).norm()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e4) = (err(1024), err(4096));
        assert!(e4 < 2e-2 && e4 < 0.3 * e1, "{e1} {e4}");

        let u = BoundaryModulus::from_fn(1024, |z| (z - c(0.5, 0.0)).norm()).unwrap();
        let f = OuterFunction::new(&u);
        assert!((f.eval(c(0.0, 0.0)).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(f.eval(c(1.0, 0.0)).is_err());
        assert!(f.boundary_deviation().unwrap() < 0.1);
    }

    #[test]
    fn outer_majorizes_log_subharmonic_modulus() {
        // U = |z - 0.5| is log-subharmonic; its outer majorant is |1 - 0.5 z|.
        let u = BoundaryModulus::from_fn(2048, |z| (z - c(0.5, 0.0)).norm()).unwrap();
        let f = OuterFunction::new(&u);
        for k in 0..50 {
            let z = Complex64::from_polar(0.95 * ((k % 10) as f64 / 10.0), 0.37 * k as f64);
            let fz = f.eval(z).unwrap().norm();
            assert!((z - c(0.5, 0.0)).norm() <= fz + 1e-12);
            assert!((fz - (c(1.0, 0.0) - 0.5 * z).norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_modulus_text_round_trip_and_errors() {
        let u = BoundaryModulus::from_fn(16, |z| 1.5 + z.re).unwrap();
        let back = BoundaryModulus::parse(&u.to_text()).unwrap();
        assert_eq!(u, back);
        assert!(BoundaryModulus::parse("0 1\n0.5 0\n").is_err());
        assert!(BoundaryModulus::parse("0 1\n0.3 1\n").is_err());
        assert!(BoundaryModulus::parse("0 1 2\n").is_err());
        assert!(BoundaryModulus::parse("# header\n\n0 2\n0.5 1\n").is_ok());
    }

    #[test]
    fn riesz_examples() {
        let cfg = QuadratureConfig::default();
        let f = PolySeries::univariate(vec![c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let fac = riesz_factorize(&f, 1.0, &cfg).unwrap();
        assert_eq!(fac.blaschke, BlaschkeProduct::identity());
        assert!((fac.h().coeff_two_norm() - f.coeff_two_norm()).abs() < 1e-14);
        assert!((fac.eval_h(c(0.3, 0.1)) - f.eval_unchecked(&[c(0.3, 0.1)])).norm() < 1e-14);

        let f = PolySeries::univariate(vec![c(-0.5, 0.0), c(1.0, 0.0)]).unwrap();
        let fac = riesz_factorize(&f, 2.0, &cfg).unwrap();
        assert_eq!(fac.blaschke.zeros().len(), 1);
        assert!(min_modulus_on_circle(|z| fac.eval_h(z), 0.999, 1024) > 0.0);

        let f = from_roots(c(1.0, 0.0), &[c(0.0, 0.0), c(0.5, 0.0)]);
        for p in [1.0, 2.0, 4.0] {
            let fac = riesz_factorize(&f, p, &cfg).unwrap();
            assert!((fac.norm_check - fac.f_norm).abs() < 1e-8, "p={p}");
            for z in [c(0.2, 0.3), c(-0.7, 0.1)] {
                let bh = fac.blaschke.eval(z) * fac.eval_h(z);
                assert!((bh - f.eval_unchecked(&[z])).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn fractional_power_examples() {
        let fp = FractionalPower::new(|_| c(4.0, 0.0), 0.5).unwrap();
        assert!((fp.eval(c(0.3, 0.2)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);

        let h = |z: Complex64| (c(1.0, 0.0) - 0.5 * z).powi(-2);
        let fp = FractionalPower::new(h, 0.5).unwrap();
        for k in 0..100 {
            let z = Complex64::from_polar(0.99 * (k as f64 / 100.0).sqrt(), 2.3 * k as f64);
            let expect = (c(1.0, 0.0) - 0.5 * z).inv();
            assert!((fp.eval(z).unwrap() - expect).norm() < 1e-10);
        }

        // |h^β|^{p/β} = |h|^p pointwise, so the boundary means agree.
        let h = |z: Complex64| c(2.0, 0.0) + z;
        let fp = FractionalPower::new(h, 0.5).unwrap();
        let rule = TorusRule::new(1, 256).unwrap();
        let lhs = rule.integrate(|z| fp.eval(z[0]).unwrap().norm().powf(2.0 / 0.5)).unwrap();
        let rhs = rule.integrate(|z| h(z[0]).norm_sqr()).unwrap();
        assert!((lhs - rhs).abs() < 1e-8);
    }

    #[test]
    fn fractional_power_tracks_winding_branch() {
        // h(z) = exp(3iz)-like phase growth: h = (1 - 0.9 z)^{-4} has arg up to ~4·1.1.
        let h = |z: Complex64| (c(1.0, 0.0) - c(0.0, 0.9) * z).powi(-4);
        let fp = FractionalPower::new(h, 0.25).unwrap();
        let z = c(0.95, 0.0);
        let expect = (c(1.0, 0.0) - c(0.0, 0.9) * z).inv();
        assert!((fp.eval(z).unwrap() - expect).norm() < 1e-10);
    }

    #[test]
    fn fractional_power_detects_zero() {
        let h = |z: Complex64| z - c(0.5, 0.0);
        let fp = FractionalPower::new(h, 0.5).unwrap();
        assert!(matches!(fp.eval(c(0.9, 0.0)), Err(Error::ZeroCrossing(_))));
    }

    #[test]
    fn fractional_power_composition() {
        let h = |z: Complex64| c(1.5, 0.5) + z * z * c(0.3, -0.2) + z;
        let b1 = 0.7;
        let b2 = 1.9;
        let inner = FractionalPower::new(h, b1).unwrap();
        let outer = FractionalPower::new(|z| inner.eval(z).unwrap(), b2).unwrap();
        let direct = FractionalPower::new(h, b1 * b2).unwrap();
        for k in 0..40 {
            let z = Complex64::from_polar(0.9 * k as f64 / 40.0, 1.1 * k as f64);
            assert!((outer.eval(z).unwrap() - direct.eval(z).unwrap()).norm() < 1e-10);
        }
    }
}
