//! Both sides of each sharp inequality, their gap, and a verdict.
//!
//! Every computation returns a [`GapReport`]. The violation threshold stays
//! tight (`1e-10` relative plus propagated quadrature error); equality is
//! judged against a separate, looser threshold that also absorbs the
//! truncation of non-polynomial extremals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::hq_norm_series;
use crate::quadrature::{adaptive, hardy_norm_pow, is_even_integer, DiscRule, Estimate, QuadratureConfig, TorusRule};
use crate::series::{PolySeries, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    BurbeaHilbert,
    MainProduct,
    EqualFunction,
    Carleman,
    CarlemanDouble,
    Isoperimetric,
    Logsub,
    PhiMain,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::BurbeaHilbert,
        InequalityId::MainProduct,
        InequalityId::EqualFunction,
        InequalityId::Carleman,
        InequalityId::CarlemanDouble,
        InequalityId::Isoperimetric,
        InequalityId::Logsub,
        InequalityId::PhiMain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::BurbeaHilbert => "burbea_hilbert",
            InequalityId::MainProduct => "main_product",
            InequalityId::EqualFunction => "equal_function",
            InequalityId::Carleman => "carleman",
            InequalityId::CarlemanDouble => "carleman_double",
            InequalityId::Isoperimetric => "isoperimetric",
            InequalityId::Logsub => "logsub",
            InequalityId::PhiMain => "phi_main",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown inequality '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Equality,
    Violated,
}

/// Relative thresholds for violation and equality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Violation threshold, relative to `max(1, |rhs|)`.
    pub violation: f64,
    /// Equality threshold, relative to `|rhs|`.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { violation: 1e-10, equality: 1e-6 }
    }
}

/// Quadrature and tolerance settings shared by all gap computations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub quadrature: QuadratureConfig,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureUsed {
    pub grid: usize,
    pub radial: usize,
    pub error: f64,
    pub converged: bool,
}

impl From<&Estimate> for QuadratureUsed {
    fn from(e: &Estimate) -> Self {
        Self { grid: e.grid, radial: e.radial, error: e.error, converged: e.converged }
    }
}

/// What went into a gap computation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InputsDigest {
    pub dim: usize,
    pub functions: usize,
    pub degrees: Vec<Vec<usize>>,
    pub exponents: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub measure_q: Option<f64>,
    pub tail_bounds: Vec<f64>,
    pub lhs_quadrature: Option<QuadratureUsed>,
    pub rhs_quadrature: Vec<QuadratureUsed>,
    /// FNV-1a hash of the coefficients and exponents.
    pub coefficient_hash: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub inequality: InequalityId,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub equality_tolerance: f64,
    pub verdict: Verdict,
    pub converged: bool,
    /// `None` for certified runs, otherwise a label such as `uncertified-(†)`.
    pub certification: Option<String>,
    pub inputs: InputsDigest,
}

impl GapReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.inputs.seed = Some(seed);
        self
    }

    pub fn relative_gap(&self) -> f64 {
        if self.rhs == 0.0 {
            self.gap.abs()
        } else {
            self.gap / self.rhs
        }
    }
}

pub const UNCERTIFIED: &str = "uncertified-(†)";

struct Sides {
    lhs: f64,
    lhs_err: f64,
    rhs: f64,
    rhs_err: f64,
    truncation: f64,
    converged: bool,
}

fn finish(id: InequalityId, s: Sides, tol: &Tolerances, inputs: InputsDigest) -> GapReport {
    let gap = s.rhs - s.lhs;
    let tolerance = tol.violation * s.rhs.abs().max(1.0) + s.lhs_err + s.rhs_err;
    let equality_tolerance = (tol.equality * s.rhs.abs() + s.truncation).max(tolerance);
    let verdict = if gap < -tolerance {
        Verdict::Violated
    } else if gap.abs() <= equality_tolerance {
        Verdict::Equality
    } else {
        Verdict::Holds
    };
    let ratio = if s.rhs != 0.0 {
        s.lhs / s.rhs
    } else if s.lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    GapReport {
        inequality: id,
        lhs: s.lhs,
        rhs: s.rhs,
        gap,
        ratio,
        tolerance,
        equality_tolerance,
        verdict,
        converged: s.converged,
        certification: None,
        inputs,
    }
}

impl Sides {
    fn scaled(self, factor: f64) -> Self {
        Self {
            lhs: self.lhs * factor,
            lhs_err: self.lhs_err * factor,
            rhs: self.rhs * factor,
            rhs_err: self.rhs_err * factor,
            truncation: self.truncation * factor,
            converged: self.converged,
        }
    }
}

fn fnv1a(parts: impl Iterator<Item = u64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for word in parts {
        for b in word.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

fn digest(functions: &[&PolySeries], exponents: &[f64], weights: &[Vec<f64>], measure_q: Option<f64>) -> InputsDigest {
    let words = functions
        .iter()
        .flat_map(|f| {
            std::iter::once(f.dim() as u64)
                .chain(f.degree().iter().map(|&d| d as u64))
                .chain(f.dense().iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]))
        })
        .chain(exponents.iter().map(|p| p.to_bits()))
        .chain(weights.iter().flatten().map(|q| q.to_bits()));
    InputsDigest {
        dim: functions.first().map_or(0, |f| f.dim()),
        functions: functions.len(),
        degrees: functions.iter().map(|f| f.degree().to_vec()).collect(),
        exponents: exponents.to_vec(),
        weights: weights.to_vec(),
        measure_q,
        tail_bounds: functions.iter().map(|f| f.tail_bound()).collect(),
        lhs_quadrature: None,
        rhs_quadrature: Vec::new(),
        coefficient_hash: fnv1a(words),
        seed: None,
    }
}

/// First-order effect of truncation tails on `Π ‖f_j‖^{p_j}`.
fn truncation_term(functions: &[&PolySeries], exponents: &[f64], rhs: f64) -> f64 {
    let rel: f64 = functions
        .iter()
        .zip(exponents)
        .filter(|(f, _)| f.tail_bound() > 0.0)
        .map(|(f, p)| p.max(1.0) * f.tail_bound() / f.coeff_two_norm().max(f64::MIN_POSITIVE))
        .sum();
    2.0 * rel * rhs.abs()
}

fn check_tuple(functions: &[&PolySeries], count: usize) -> Result<usize> {
    if functions.len() < 2 {
        return Err(Error::InvalidParameter(format!("need m >= 2 functions, got {}", functions.len())));
    }
    if count != functions.len() {
        return Err(Error::DimensionMismatch { expected: functions.len(), got: count });
    }
    let n = functions[0].dim();
    if let Some(f) = functions.iter().find(|f| f.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
    }
    Ok(n)
}

fn check_exponents(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter(format!("exponents must be positive, got {bad}")));
    }
    Ok(())
}

/// `lhs = rhs = 0` whenever one factor vanishes identically.
fn zero_report(id: InequalityId, tol: &Tolerances, inputs: InputsDigest) -> GapReport {
    finish(id, Sides { lhs: 0.0, lhs_err: 0.0, rhs: 0.0, rhs_err: 0.0, truncation: 0.0, converged: true }, tol, inputs)
}

/// Pointwise factor `(Σ_i |g_i|)^e`.
struct Factor<'a> {
    terms: Vec<&'a PolySeries>,
    exponent: f64,
}

impl Factor<'_> {
    fn degree(&self) -> usize {
        self.terms.iter().flat_map(|g| g.effective_degree()).max().unwrap_or(0)
    }

    fn exact_even(&self) -> bool {
        self.terms.len() == 1 && is_even_integer(self.exponent)
    }

    fn values(&self, nodes: &[Vec<Complex64>]) -> Result<Vec<f64>> {
        let mut sum: Option<Vec<f64>> = None;
        for g in &self.terms {
            let v = g.eval_grid(nodes)?;
            match sum.as_mut() {
                None => {
                    sum = Some(if self.terms.len() == 1 && is_even_integer(self.exponent) {
                        let k = (self.exponent / 2.0) as i32;
                        return Ok(v.iter().map(|x| x.norm_sqr().powi(k)).collect());
                    } else {
                        v.iter().map(|x| x.norm()).collect()
                    })
                }
                Some(s) => s.iter_mut().zip(&v).for_each(|(a, x)| *a += x.norm()),
            }
        }
        let e = self.exponent;
        Ok(sum.unwrap_or_default().into_iter().map(|s| if e == 1.0 { s } else { s.powf(e) }).collect())
    }
}

type Combine<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// `∫ combine(F_1, …, F_m) dν_n` over `U^n` with `dA_{q-2}` on each axis;
/// `combine = None` is the product.
fn disc_mean(factors: &[Factor<'_>], n: usize, q: f64, cfg: &QuadratureConfig, combine: Option<Combine<'_>>) -> Result<Estimate> {
    let dg: f64 = factors.iter().map(|f| f.exponent * f.degree() as f64 / 2.0).sum();
    let dg = dg.ceil() as usize;
    let eval = |g: usize, r: usize| -> Result<f64> {
        let rule = DiscRule::new(n, q, r.max(1), g)?.tensor();
        let nodes = rule.axis_nodes();
        let columns = factors.iter().map(|f| f.values(&nodes)).collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = (0..rule.node_count())
            .map(|i| match combine {
                None => columns.iter().map(|c| c[i]).product(),
                Some(phi) => {
                    let x: Vec<f64> = columns.iter().map(|c| c[i]).collect();
                    phi(&x)
                }
            })
            .collect();
        rule.reduce(&values, cfg.compensated)
    };
    let radial_used = |r: usize| if q == 1.0 { 0 } else { r };
    if combine.is_none() && factors.iter().all(Factor::exact_even) {
        let (g, r) = (dg + 1, dg / 2 + 1);
        return Ok(Estimate { value: eval(g, r)?, error: 0.0, grid: g, radial: radial_used(r), converged: true });
    }
    let dmax = factors.iter().map(Factor::degree).max().unwrap_or(0);
    let g0 = cfg.grid.max(dmax + 2);
    let r0 = if q == 1.0 { 0 } else { cfg.radial.max(dmax / 2 + 2) };
    adaptive(cfg, n, g0, r0, eval)
}

/// `∫_{T^n} (Σ_i |g_i|)^e dm_n`.
fn torus_mean(factor: &Factor<'_>, n: usize, cfg: &QuadratureConfig) -> Result<Estimate> {
    if factor.terms.len() == 1 {
        return hardy_norm_pow(factor.terms[0], factor.exponent, cfg);
    }
    let dg = factor.degree();
    adaptive(cfg, n, cfg.grid.max(2 * dg + 2), 0, |g, _| {
        let rule = TorusRule::new(n, g)?.tensor();
        rule.reduce(&factor.values(&rule.axis_nodes())?, cfg.compensated)
    })
}

fn product_of_estimates(estimates: &[Estimate]) -> (f64, f64, bool) {
    let value: f64 = estimates.iter().map(|e| e.value).product();
    let rel: f64 = estimates.iter().filter(|e| e.value > 0.0).map(|e| e.error / e.value).sum();
    (value, value * rel, estimates.iter().all(|e| e.converged))
}

/// `‖Π f_j‖_q ≤ Π ‖f_j‖_{q_j}` with `q = Σ q_j`, all norms from coefficients.
pub fn burbea_hilbert_gap(functions: &[PolySeries], weights: &[WeightVector], cfg: &GapConfig) -> Result<GapReport> {
    let fs: Vec<&PolySeries> = functions.iter().collect();
    let n = check_tuple(&fs, weights.len())?;
    if let Some(w) = weights.iter().find(|w| w.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: w.dim() });
    }
    let wv: Vec<Vec<f64>> = weights.iter().map(|w| w.entries().to_vec()).collect();
    let inputs = digest(&fs, &[], &wv, None);
    let tol = &cfg.tolerances;
    if fs.iter().any(|f| f.is_zero()) {
        return Ok(zero_report(InequalityId::BurbeaHilbert, tol, inputs));
    }
    let mut product = functions[0].clone();
    for f in &functions[1..] {
        product = product.multiply(f)?;
    }
    let q = WeightVector::sum(weights)?;
    let lhs = hq_norm_series(&product, &q)?;
    let norms = functions.iter().zip(weights).map(|(f, w)| hq_norm_series(f, w)).collect::<Result<Vec<_>>>()?;
    let rhs: f64 = norms.iter().product();
    let ones = vec![1.0; fs.len()];
    let sides = Sides { lhs, lhs_err: 0.0, rhs, rhs_err: 0.0, truncation: truncation_term(&fs, &ones, rhs), converged: true };
    Ok(finish(InequalityId::BurbeaHilbert, sides, tol, inputs))
}

fn product_gap(
    id: InequalityId,
    fs: &[&PolySeries],
    exponents: &[f64],
    q: f64,
    factor: f64,
    cfg: &GapConfig,
) -> Result<GapReport> {
    let n = check_tuple(fs, exponents.len())?;
    check_exponents(exponents)?;
    let mut inputs = digest(fs, exponents, &[], Some(q));
    let tol = &cfg.tolerances;
    if fs.iter().any(|f| f.is_zero()) {
        return Ok(zero_report(id, tol, inputs));
    }
    let factors: Vec<Factor<'_>> = fs.iter().zip(exponents).map(|(f, &p)| Factor { terms: vec![*f], exponent: p }).collect();
    let lhs = disc_mean(&factors, n, q, &cfg.quadrature, None)?;
    let norms = fs.iter().zip(exponents).map(|(f, &p)| hardy_norm_pow(f, p, &cfg.quadrature)).collect::<Result<Vec<_>>>()?;
    let (rhs, rhs_err, rhs_conv) = product_of_estimates(&norms);
    inputs.lhs_quadrature = Some((&lhs).into());
    inputs.rhs_quadrature = norms.iter().map(Into::into).collect();
    let sides = Sides {
        lhs: lhs.value,
        lhs_err: lhs.error,
        rhs,
        rhs_err,
        truncation: truncation_term(fs, exponents, rhs),
        converged: lhs.converged && rhs_conv,
    };
    Ok(finish(id, sides.scaled(factor), tol, inputs))
}

/// `∫_{U^n} Π |f_j|^{p_j} dA_{m-2} ≤ Π ‖f_j‖_{p_j}^{p_j}` with the
/// normalized measures.
pub fn main_product_gap(functions: &[PolySeries], exponents: &[f64], cfg: &GapConfig) -> Result<GapReport> {
    let fs: Vec<&PolySeries> = functions.iter().collect();
    product_gap(InequalityId::MainProduct, &fs, exponents, functions.len() as f64, 1.0, cfg)
}

/// `(m-1)/π ∫_U |f|^{mp} (1-|z|²)^{m-2} dA ≤ ‖f‖_p^{mp}`, the main product
/// inequality with `m` equal factors.
pub fn equal_function_gap(f: &PolySeries, p: f64, m: usize, cfg: &GapConfig) -> Result<GapReport> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    let fs = vec![f; m];
    product_gap(InequalityId::EqualFunction, &fs, &vec![p; m], m as f64, 1.0, cfg)
}

/// `4π ∫_U |f|^{2p} dA ≤ (∫_T |f|^p |dζ|)²` in area and arclength units.
pub fn carleman_gap(f: &PolySeries, p: f64, cfg: &GapConfig) -> Result<GapReport> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    product_gap(InequalityId::Carleman, &[f, f], &[p, p], 2.0, 4.0 * PI * PI, cfg)
}

/// `4π ∫_U |f_1||f_2| dA ≤ ∫_T |f_1||dζ| · ∫_T |f_2||dζ|`.
pub fn carleman_double_gap(f1: &PolySeries, f2: &PolySeries, cfg: &GapConfig) -> Result<GapReport> {
    for f in [f1, f2] {
        if f.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
        }
    }
    product_gap(InequalityId::CarlemanDouble, &[f1, f2], &[1.0, 1.0], 2.0, 4.0 * PI * PI, cfg)
}

/// `4π Area ≤ Length²` for the image of the disc under a conformal map with
/// derivative `f'`: Area `= ∫_U |f'|² dA`, Length `= ∫_T |f'| |dζ|`.
pub fn isoperimetric_analytic(derivative: &PolySeries, cfg: &GapConfig) -> Result<GapReport> {
    let mut report = carleman_double_gap(derivative, derivative, cfg)?;
    report.inequality = InequalityId::Isoperimetric;
    Ok(report)
}

/// Shoelace area (absolute value) and perimeter of a closed polygon whose
/// last sample repeats the first.
pub fn polygon_area_length(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter("closed curve needs at least three distinct samples".into()));
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    let scale = points.iter().map(|(x, y)| x.abs().max(y.abs())).fold(1.0, f64::max);
    if (first.0 - last.0).hypot(first.1 - last.1) > 1e-12 * scale {
        return Err(Error::InvalidParameter("open curve: last sample must repeat the first".into()));
    }
    let mut twice_area = 0.0;
    let mut length = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        twice_area += x0 * y1 - x1 * y0;
        length += (x1 - x0).hypot(y1 - y0);
    }
    Ok((0.5 * twice_area.abs(), length))
}

/// Samples `curve(2πk/N)` for `k = 0..=N`, closing the polygon exactly.
pub fn sample_closed_curve<F: Fn(f64) -> (f64, f64)>(curve: F, samples: usize) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = (0..samples).map(|k| curve(2.0 * PI * k as f64 / samples as f64)).collect();
    if let Some(&p0) = pts.first() {
        pts.push(p0);
    }
    pts
}

/// `4π Area ≤ Length²` for a sampled closed curve. Self-intersection is not
/// checked.
pub fn isoperimetric_sampled(points: &[(f64, f64)], cfg: &GapConfig) -> Result<GapReport> {
    let (area, length) = polygon_area_length(points)?;
    let inputs = InputsDigest {
        dim: 2,
        functions: 0,
        degrees: vec![vec![points.len() - 1]],
        coefficient_hash: fnv1a(points.iter().flat_map(|(x, y)| [x.to_bits(), y.to_bits()])),
        ..InputsDigest::default()
    };
    let sides =
        Sides { lhs: 4.0 * PI * area, lhs_err: 0.0, rhs: length * length, rhs_err: 0.0, truncation: 0.0, converged: true };
    Ok(finish(InequalityId::Isoperimetric, sides, &cfg.tolerances, inputs))
}

/// `U = (Σ_i |g_i|)^e` with analytic `g_i`: a log-subharmonic function.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSubharmonic {
    terms: Vec<PolySeries>,
    exponent: f64,
}

impl LogSubharmonic {
    pub fn new(terms: Vec<PolySeries>, exponent: f64) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidParameter("log-subharmonic function needs at least one term".into()));
        };
        if let Some(g) = terms.iter().find(|g| g.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), got: g.dim() });
        }
        check_exponents(&[exponent])?;
        Ok(Self { terms, exponent })
    }

    /// `|f|`.
    pub fn modulus(f: PolySeries) -> Self {
        Self { terms: vec![f], exponent: 1.0 }
    }

    pub fn terms(&self) -> &[PolySeries] {
        &self.terms
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(PolySeries::is_zero)
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.terms.iter().map(|g| g.eval_unchecked(z).norm()).sum::<f64>().powf(self.exponent)
    }

    fn factor(&self) -> Factor<'_> {
        Factor { terms: self.terms.iter().collect(), exponent: self.exponent }
    }
}

/// `∫_{U^n} Π U_j dA_{q-2} ≤ Π ‖U_j‖_1`. Certified when `q = m`.
pub fn logsub_gap(functions: &[LogSubharmonic], mu_q: f64, cfg: &GapConfig) -> Result<GapReport> {
    if functions.len() < 2 {
        return Err(Error::InvalidParameter(format!("need m >= 2 functions, got {}", functions.len())));
    }
    if !(mu_q >= 1.0 && mu_q.is_finite()) {
        return Err(Error::InvalidParameter(format!("measure parameter q must be >= 1, got {mu_q}")));
    }
    let n = functions[0].dim();
    if let Some(u) = functions.iter().find(|u| u.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    let all: Vec<&PolySeries> = functions.iter().flat_map(|u| u.terms.iter()).collect();
    let exps: Vec<f64> = functions.iter().map(|u| u.exponent).collect();
    let mut inputs = digest(&all, &exps, &[], Some(mu_q));
    let tol = &cfg.tolerances;
    let m = functions.len();
    let mut report = if functions.iter().any(LogSubharmonic::is_zero) {
        zero_report(InequalityId::Logsub, tol, inputs)
    } else {
        let factors: Vec<Factor<'_>> = functions.iter().map(LogSubharmonic::factor).collect();
        let lhs = disc_mean(&factors, n, mu_q, &cfg.quadrature, None)?;
        let means = factors.iter().map(|f| torus_mean(f, n, &cfg.quadrature)).collect::<Result<Vec<_>>>()?;
        let (rhs, rhs_err, rhs_conv) = product_of_estimates(&means);
        inputs.lhs_quadrature = Some((&lhs).into());
        inputs.rhs_quadrature = means.iter().map(Into::into).collect();
        let trunc = functions
            .iter()
            .map(|u| {
                let fs: Vec<&PolySeries> = u.terms.iter().collect();
                truncation_term(&fs, &vec![u.exponent; fs.len()], 1.0)
            })
            .sum::<f64>()
            * rhs;
        let sides =
            Sides { lhs: lhs.value, lhs_err: lhs.error, rhs, rhs_err, truncation: trunc, converged: lhs.converged && rhs_conv };
        finish(InequalityId::Logsub, sides, tol, inputs)
    };
    if mu_q != m as f64 {
        report.certification = Some(UNCERTIFIED.to_string());
    }
    Ok(report)
}

/// A symmetric combination `Φ(x_1, …, x_m)` of nonnegative arguments,
/// expected to be continuous, increasing in each variable and zero when any
/// argument is zero.
pub trait Phi: Sync {
    fn name(&self) -> &str;
    fn arity(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;

    /// Only the product is certified.
    fn is_product(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiProduct {
    arity: usize,
}

impl PhiProduct {
    pub fn new(arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidParameter(format!("product Φ needs arity >= 2, got {arity}")));
        }
        Ok(Self { arity })
    }
}

impl Phi for PhiProduct {
    fn name(&self) -> &str {
        "product"
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().product()
    }

    fn is_product(&self) -> bool {
        true
    }
}

/// `min(x_1, …, x_m)`: monotone and vanishing, but uncertified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiMin {
    pub arity: usize,
}

impl Phi for PhiMin {
    fn name(&self) -> &str {
        "min"
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A user-supplied `Φ`.
pub struct PhiFn<F> {
    pub name: String,
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Phi for PhiFn<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

const PHI_PROBE_SEED: u64 = 0x5eed_f0f1;
const PHI_PROBE_TUPLES: usize = 64;

/// Spot-checks the contract on seeded positive tuples: finite values,
/// vanishing when one argument is zero, and no decrease when one argument
/// grows.
pub fn probe_phi(phi: &dyn Phi) -> Result<()> {
    let m = phi.arity();
    let mut rng = ChaCha8Rng::seed_from_u64(PHI_PROBE_SEED);
    for _ in 0..PHI_PROBE_TUPLES {
        let x: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.gen_range(-2.0..1.0))).collect();
        let v = phi.eval(&x);
        if !v.is_finite() {
            return Err(Error::PhiContract(format!("non-finite value at {x:?}")));
        }
        let slack = 1e-12 * v.abs().max(1.0);
        for j in 0..m {
            let mut y = x.clone();
            y[j] = 0.0;
            let zero = phi.eval(&y);
            if !(zero.abs() <= slack) {
                return Err(Error::PhiContract(format!("Φ{y:?} = {zero} is not zero")));
            }
            y[j] = x[j] * (1.0 + rng.gen_range(0.01..1.0));
            let up = phi.eval(&y);
            if !(up >= v - slack) {
                return Err(Error::PhiContract(format!("Φ decreases in argument {j} at {x:?}")));
            }
        }
    }
    Ok(())
}

/// `∫ Φ(|f_1|^{p_1}, …, |f_m|^{p_m}) dν_n ≤ Φ(‖f_1‖_{p_1}^{p_1}, …)` with
/// `dν_n` built from `dA_{q-2}`. Certified only for the product with `q = m`.
pub fn phi_main_gap(functions: &[PolySeries], exponents: &[f64], phi: &dyn Phi, mu_q: f64, cfg: &GapConfig) -> Result<GapReport> {
    let fs: Vec<&PolySeries> = functions.iter().collect();
    let m = fs.len();
    if phi.arity() != m {
        return Err(Error::DimensionMismatch { expected: phi.arity(), got: m });
    }
    let certified = phi.is_product() && mu_q == m as f64;
    if phi.is_product() {
        let mut report = product_gap(InequalityId::PhiMain, &fs, exponents, mu_q, 1.0, cfg)?;
        if !certified {
            report.certification = Some(UNCERTIFIED.to_string());
        }
        return Ok(report);
    }
    probe_phi(phi)?;
    let n = check_tuple(&fs, exponents.len())?;
    check_exponents(exponents)?;
    let mut inputs = digest(&fs, exponents, &[], Some(mu_q));
    let tol = &cfg.tolerances;
    let mut report = if fs.iter().any(|f| f.is_zero()) {
        zero_report(InequalityId::PhiMain, tol, inputs)
    } else {
        let factors: Vec<Factor<'_>> = fs.iter().zip(exponents).map(|(f, &p)| Factor { terms: vec![*f], exponent: p }).collect();
        let combine = |x: &[f64]| phi.eval(x);
        let lhs = disc_mean(&factors, n, mu_q, &cfg.quadrature, Some(&combine))?;
        let norms = fs.iter().zip(exponents).map(|(f, &p)| hardy_norm_pow(f, p, &cfg.quadrature)).collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = norms.iter().map(|e| e.value).collect();
        let rhs = phi.eval(&values);
        let rhs_err: f64 = (0..m)
            .map(|j| {
                let mut up = values.clone();
                up[j] += norms[j].error;
                (phi.eval(&up) - rhs).abs()
            })
            .sum();
        inputs.lhs_quadrature = Some((&lhs).into());
        inputs.rhs_quadrature = norms.iter().map(Into::into).collect();
        let sides = Sides {
            lhs: lhs.value,
            lhs_err: lhs.error,
            rhs,
            rhs_err,
            truncation: truncation_term(&fs, exponents, rhs),
            converged: lhs.converged && norms.iter().all(|e| e.converged),
        };
        finish(InequalityId::PhiMain, sides, tol, inputs)
    };
    report.certification = Some(UNCERTIFIED.to_string());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{extremal_function, Extremal, MultiIndex};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn uni(coeffs: &[f64]) -> PolySeries {
        PolySeries::univariate(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn z_pow(k: usize) -> PolySeries {
        PolySeries::monomial(&MultiIndex::new(vec![k]), c(1.0, 0.0)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ids_round_trip() {
        for id in InequalityId::ALL {
            assert_eq!(id.as_str().parse::<InequalityId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.as_str()));
        }
        assert!("nope".parse::<InequalityId>().is_err());
    }

    #[test]
    fn verdict_precedence() {
        let tol = Tolerances::default();
        let mk = |lhs, rhs| {
            finish(
                InequalityId::MainProduct,
                Sides { lhs, rhs, lhs_err: 0.0, rhs_err: 0.0, truncation: 0.0, converged: true },
                &tol,
                InputsDigest::default(),
            )
        };
        assert_eq!(mk(1.0, 1.0).verdict, Verdict::Equality);
        assert_eq!(mk(0.5, 1.0).verdict, Verdict::Holds);
        assert_eq!(mk(1.0 + 1e-8, 1.0).verdict, Verdict::Violated);
        assert_eq!(mk(1.0 + 1e-11, 1.0).verdict, Verdict::Equality);
        assert_eq!(mk(0.0, 0.0).ratio, 0.0);
    }

    #[test]
    fn burbea_hilbert_examples() {
        let cfg = GapConfig::default();
        let q1 = WeightVector::scalar(1.0, 1).unwrap();
        let one = PolySeries::one(1).unwrap();
        let r = burbea_hilbert_gap(&[one.clone(), one], &[q1.clone(), q1.clone()], &cfg).unwrap();
        assert_eq!((r.lhs, r.rhs, r.verdict), (1.0, 1.0, Verdict::Equality));

        let r = burbea_hilbert_gap(&[z_pow(1), z_pow(1)], &[q1.clone(), q1.clone()], &cfg).unwrap();
        assert!((r.lhs - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.rhs, 1.0);
        assert_eq!(r.verdict, Verdict::Holds);

        let q15 = WeightVector::scalar(1.5, 1).unwrap();
        let w = [c(0.5, 0.0)];
        let f1 = extremal_function(&Extremal::Hilbert(q1.clone()), &w, 1e-12).unwrap();
        let f2 = extremal_function(&Extremal::Hilbert(q15.clone()), &w, 1e-12).unwrap();
        let r = burbea_hilbert_gap(&[f1, f2], &[q1, q15], &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        assert!(r.relative_gap().abs() < 1e-10);
    }

    #[test]
    fn main_product_examples() {
        let cfg = GapConfig::default();
        let one = PolySeries::one(1).unwrap();
        let r = main_product_gap(&[one.clone(), one], &[1.0, 3.0], &cfg).unwrap();
        assert!(rel(r.lhs, 1.0) < 1e-13 && rel(r.rhs, 1.0) < 1e-13, "{r:?}");
        assert_eq!(r.verdict, Verdict::Equality);

        let f = uni(&[1.0, 1.0]);
        let r = main_product_gap(&[f.clone(), f], &[1.0, 1.0], &cfg).unwrap();
        assert!(rel(r.lhs, 1.5) < 1e-12);
        assert!(rel(r.rhs, (4.0 / PI).powi(2)) < 1e-6);
        assert_eq!(r.verdict, Verdict::Holds);

        for p in [1.0, 2.0, 3.0] {
            let e = extremal_function(&Extremal::HardyPower { p, n: 1 }, &[c(0.4, 0.0)], 1e-12).unwrap();
            let r = main_product_gap(&[e.clone(), e], &[p, p], &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Equality, "p={p} {r:?}");
        }
    }

    #[test]
    fn zero_factor_gives_equality() {
        let cfg = GapConfig::default();
        let r = main_product_gap(&[PolySeries::zeros(vec![2]).unwrap(), uni(&[1.0, 2.0])], &[1.0, 1.0], &cfg).unwrap();
        assert_eq!((r.lhs, r.rhs, r.verdict), (0.0, 0.0, Verdict::Equality));
    }

    #[test]
    fn equal_function_examples() {
        let cfg = GapConfig::default();
        let r = equal_function_gap(&uni(&[1.0, 1.0]), 1.0, 2, &cfg).unwrap();
        assert!(rel(r.lhs, 1.5) < 1e-12);
        for m in [2, 3, 4] {
            let p = 1.5;
            let e = extremal_function(&Extremal::HardyPower { p, n: 1 }, &[c(0.5, 0.0)], 1e-12).unwrap();
            let r = equal_function_gap(&e, p, m, &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::Equality, "m={m} {r:?}");
        }
    }

    #[test]
    fn carleman_examples_and_consistency() {
        let cfg = GapConfig::default();
        let r = carleman_gap(&PolySeries::one(1).unwrap(), 1.0, &cfg).unwrap();
        assert!(rel(r.lhs, 4.0 * PI * PI) < 1e-12 && rel(r.rhs, 4.0 * PI * PI) < 1e-12);
        let r = carleman_gap(&z_pow(1), 2.0, &cfg).unwrap();
        assert!(rel(r.lhs, 4.0 * PI * PI / 3.0) < 1e-12);
        assert!((r.ratio - 1.0 / 3.0).abs() < 1e-12);

        let f = uni(&[0.3, -1.0, 0.25]);
        for p in [1.0, 2.0] {
            let a = carleman_gap(&f, p, &cfg).unwrap();
            let b = equal_function_gap(&f, p, 2, &cfg).unwrap();
            assert!(rel(a.lhs, 4.0 * PI * PI * b.lhs) < 1e-12);
            assert!(rel(a.rhs, 4.0 * PI * PI * b.rhs) < 1e-12);
        }
    }

    #[test]
    fn carleman_double_examples() {
        let cfg = GapConfig::default();
        let one = PolySeries::one(1).unwrap();
        let r = carleman_double_gap(&one, &one, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        let r = carleman_double_gap(&one, &z_pow(1), &cfg).unwrap();
        // |z| is not smooth at the origin; Gauss convergence is algebraic.
        assert!(rel(r.lhs, 4.0 * PI * 2.0 * PI / 3.0) < 1e-8, "{r:?}");
        assert!(rel(r.rhs, 4.0 * PI * PI) < 1e-12);
        assert_eq!(r.verdict, Verdict::Holds);
        let e = extremal_function(&Extremal::HardyPower { p: 1.0, n: 1 }, &[c(0.3, 0.2)], 1e-12).unwrap();
        let r = carleman_double_gap(&e, &e, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
    }

    #[test]
    fn isoperimetric_examples() {
        let cfg = GapConfig::default();
        let r = isoperimetric_analytic(&PolySeries::one(1).unwrap(), &cfg).unwrap();
        assert!(rel(r.lhs, 4.0 * PI * PI) < 1e-12 && rel(r.rhs, 4.0 * PI * PI) < 1e-12);
        assert_eq!(r.verdict, Verdict::Equality);
        let r = isoperimetric_analytic(&uni(&[1.0, 0.2]), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.gap > 0.0);

        let pts = sample_closed_curve(|t| (2.0 * t.cos(), t.sin()), 1 << 16);
        let (area, length) = polygon_area_length(&pts).unwrap();
        assert!(rel(area, 2.0 * PI) < 1e-8);
        assert!((length - 9.688448220547675).abs() < 1e-6);
        let r = isoperimetric_sampled(&pts, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(isoperimetric_sampled(&pts[..pts.len() - 1], &cfg).is_err());
    }

    #[test]
    fn logsub_examples() {
        let cfg = GapConfig::default();
        let one = LogSubharmonic::modulus(PolySeries::one(1).unwrap());
        let r = logsub_gap(&[one.clone(), one], 2.0, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        assert!(r.certification.is_none());

        let u = LogSubharmonic::modulus(uni(&[1.0, 1.0]));
        let a = logsub_gap(&[u.clone(), u], 2.0, &cfg).unwrap();
        let b = carleman_double_gap(&uni(&[1.0, 1.0]), &uni(&[1.0, 1.0]), &cfg).unwrap();
        assert!(rel(4.0 * PI * PI * a.lhs, b.lhs) < 1e-12);
        assert!(rel(4.0 * PI * PI * a.rhs, b.rhs) < 1e-12);
        assert_eq!(a.verdict, Verdict::Holds);

        let k = extremal_function(&Extremal::HardyPower { p: 2.0, n: 1 }, &[c(0.4, 0.1)], 1e-12).unwrap();
        let u = LogSubharmonic::new(vec![k], 2.0).unwrap();
        let r = logsub_gap(&[u.clone(), u.clone()], 2.0, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Equality, "{r:?}");
        let r = logsub_gap(&[u.clone(), u], 3.0, &cfg).unwrap();
        assert_eq!(r.certification.as_deref(), Some(UNCERTIFIED));

        let sum = LogSubharmonic::new(vec![uni(&[0.5, 1.0]), uni(&[0.0, 0.0, 1.0])], 1.0).unwrap();
        let r = logsub_gap(&[sum.clone(), sum], 2.0, &cfg).unwrap();
        assert_ne!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn phi_main_examples() {
        let cfg = GapConfig::default();
        let f = uni(&[0.7, -0.2, 0.4]);
        let g = uni(&[1.0, 0.5]);
        let prod = PhiProduct::new(2).unwrap();
        let a = phi_main_gap(&[f.clone(), g.clone()], &[1.0, 2.0], &prod, 2.0, &cfg).unwrap();
        let b = main_product_gap(&[f.clone(), g.clone()], &[1.0, 2.0], &cfg).unwrap();
        assert_eq!((a.lhs, a.rhs, a.verdict), (b.lhs, b.rhs, b.verdict));
        assert!(a.certification.is_none());

        let r = phi_main_gap(&[z_pow(1), z_pow(1)], &[2.0, 2.0], &prod, 2.0, &cfg).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-14, "{r:?}");

        let r = phi_main_gap(&[f, g], &[1.0, 1.0], &PhiMin { arity: 2 }, 2.0, &cfg).unwrap();
        assert_eq!(r.certification.as_deref(), Some(UNCERTIFIED));
        assert!(r.lhs.is_finite() && r.rhs.is_finite());

        let bad = PhiFn { name: "sum".into(), arity: 2, f: |x: &[f64]| x.iter().sum() };
        assert!(matches!(probe_phi(&bad), Err(Error::PhiContract(_))));
        let dec = PhiFn { name: "inv".into(), arity: 2, f: |x: &[f64]| x[0] * x[1] / (1.0 + x[0] * x[0] * x[0]) };
        assert!(matches!(probe_phi(&dec), Err(Error::PhiContract(_))));
    }

    #[test]
    fn perturbed_extremal_has_positive_gap() {
        let cfg = GapConfig::default();
        for p in [1.0, 2.0] {
            let e = extremal_function(&Extremal::HardyPower { p, n: 1 }, &[c(0.4, 0.0)], 1e-12).unwrap();
            let d = e.degree()[0];
            let bumped = e.add(&PolySeries::monomial(&MultiIndex::new(vec![d]), c(1e-2, 0.0)).unwrap()).unwrap();
            let r = carleman_gap(&bumped, p, &cfg).unwrap();
            assert!(r.gap > 1e-8, "p={p} gap={}", r.gap);
        }
    }
}
