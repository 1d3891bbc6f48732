//! Generalized Hardy norms, restricted norms and the pointwise growth bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, Error, Result};
use crate::quadrature::{adaptive, hardy_norm_pow, is_even_integer, AxisRule, Estimate, QuadratureConfig, TensorRule};
use crate::series::{MultiIndex, PolySeries, WeightVector};

/// Denominator floor in relative discrepancies.
pub const EPS_FLOOR: f64 = 1e-300;

/// Relative slack granted to the growth bound for rounding.
const GROWTH_REL_TOL: f64 = 1e-10;

/// `α!/(q)_α = Π_j Π_{i=1}^{α_j} i/(q_j+i-1)`, accumulated as ratios.
fn hq_weight(q: &WeightVector, alpha: &MultiIndex) -> Result<f64> {
    let mut w = 1.0;
    for (&qj, &aj) in q.entries().iter().zip(alpha.entries()) {
        for i in 1..=aj {
            w *= i as f64 / (qj + i as f64 - 1.0);
        }
    }
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::WeightOverflow(alpha.entries().to_vec()))
    }
}

fn check_dim(f: &PolySeries, q: &WeightVector) -> Result<()> {
    if f.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: f.dim() });
    }
    Ok(())
}

/// `‖f‖_q = (Σ α!/(q)_α |a_α|²)^{1/2}` in lexicographic order.
pub fn hq_norm_series(f: &PolySeries, q: &WeightVector) -> Result<f64> {
    check_dim(f, q)?;
    let mut acc = 0.0;
    for (alpha, a) in f.terms() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let w = hq_weight(q, &alpha)?;
        acc += w * a.norm_sqr();
        if !acc.is_finite() {
            return Err(Error::WeightOverflow(alpha.entries().to_vec()));
        }
    }
    Ok(acc.sqrt())
}

/// `⟨f, g⟩_q = Σ α!/(q)_α a_α conj(b_α)`.
pub fn hq_inner(f: &PolySeries, g: &PolySeries, q: &WeightVector) -> Result<Complex64> {
    check_dim(f, q)?;
    check_dim(g, q)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (alpha, a) in f.terms() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let b = g.coeff(&alpha);
        acc += a * b.conj() * hq_weight(q, &alpha)?;
    }
    Ok(acc)
}

/// `(∫ |f|² dν)^{1/2}` for the product of `dA_{q_j-2}` (Haar measure on axes
/// with `q_j = 1`), using the rule that is exact for `|f|²`.
pub fn hq_norm_integral(f: &PolySeries, q: &WeightVector) -> Result<f64> {
    Ok(square_integral(f, q)?.value.sqrt())
}

/// Same as [`hq_norm_integral`] with an explicit rule.
pub fn hq_norm_integral_with(f: &PolySeries, rule: &TensorRule) -> Result<f64> {
    if rule.axes.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: rule.axes.len() });
    }
    let values: Vec<f64> = f.eval_grid(&rule.axis_nodes())?.iter().map(|v| v.norm_sqr()).collect();
    Ok(rule.reduce(&values, false)?.sqrt())
}

fn square_integral(f: &PolySeries, q: &WeightVector) -> Result<Estimate> {
    check_dim(f, q)?;
    if let Some(bad) = q.entries().iter().find(|&&qj| qj < 1.0) {
        return Err(Error::InvalidParameter(format!("integral representation is only available for q >= 1, got {bad}")));
    }
    let eff = f.effective_degree();
    let axes = eff
        .iter()
        .zip(q.entries())
        .map(|(&d, &qj)| if qj == 1.0 { Ok(AxisRule::circle(2 * d + 1, 0.0)) } else { AxisRule::disc(qj, d / 2 + 1, 2 * d + 1) })
        .collect::<Result<Vec<_>>>()?;
    let rule = TensorRule { axes };
    let values: Vec<f64> = f.eval_grid(&rule.axis_nodes())?.iter().map(|v| v.norm_sqr()).collect();
    let dmax = eff.into_iter().max().unwrap_or(0);
    Ok(Estimate { value: rule.reduce(&values, false)?, error: 0.0, grid: 2 * dmax + 1, radial: dmax / 2 + 1, converged: true })
}

/// Both routes to `‖f‖_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub series_value: f64,
    pub integral_value: Option<f64>,
    pub relative_discrepancy: Option<f64>,
}

pub fn norm_report(f: &PolySeries, q: &WeightVector) -> Result<NormReport> {
    let series_value = hq_norm_series(f, q)?;
    let integral_value = if q.entries().iter().all(|&qj| qj >= 1.0) { Some(hq_norm_integral(f, q)?) } else { None };
    let relative_discrepancy = integral_value.map(|iv| (series_value - iv).abs() / series_value.max(EPS_FLOOR));
    Ok(NormReport { series_value, integral_value, relative_discrepancy })
}

/// `U(z'') = ‖f(·, z'')‖_p^p`, the H^p norm (to the p-th power) of the
/// restriction of `f` obtained by fixing the coordinates on `kept` axes.
#[derive(Clone, Debug)]
pub struct RestrictedNorm<'a> {
    f: &'a PolySeries,
    p: f64,
    kept: Vec<usize>,
    cfg: QuadratureConfig,
}

/// Result of comparing `‖U‖_1` with `‖f‖_p^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedNormReport {
    pub kept_axes: Vec<usize>,
    pub p: f64,
    pub pl1_norm: f64,
    pub full_norm_pow: f64,
    pub relative_discrepancy: f64,
    pub converged: bool,
}

/// One sub-mean-value probe of `log U` on a circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubMeanProbe {
    pub center_log: f64,
    pub circle_mean_log: f64,
    pub radius: f64,
    pub points: usize,
}

impl SubMeanProbe {
    pub fn holds(&self, slack: f64) -> bool {
        self.center_log <= self.circle_mean_log + slack
    }
}

impl<'a> RestrictedNorm<'a> {
    pub fn new(f: &'a PolySeries, p: f64, kept: Vec<usize>, cfg: QuadratureConfig) -> Result<Self> {
        let n = f.dim();
        if kept.is_empty() || kept.len() >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= n-1 kept axes, got k = {} with n = {n}", kept.len())));
        }
        if kept.windows(2).any(|w| w[0] >= w[1]) || kept.iter().any(|&j| j >= n) {
            return Err(Error::InvalidParameter(format!("kept axes {kept:?} must be strictly increasing and < {n}")));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
        }
        Ok(Self { f, p, kept, cfg })
    }

    pub fn kept_axes(&self) -> &[usize] {
        &self.kept
    }

    /// `U(z'')` with its quadrature bookkeeping.
    pub fn eval_estimate(&self, z_kept: &[Complex64]) -> Result<Estimate> {
        if z_kept.iter().any(|z| z.norm() > 1.0 + 1e-12) {
            return Err(Error::OutsideDomain { point: fmt_point(z_kept), reason: "restricted norm needs |z_j| <= 1" });
        }
        let g = self.f.restrict(&self.kept, z_kept)?;
        hardy_norm_pow(&g, self.p, &self.cfg)
    }

    pub fn eval(&self, z_kept: &[Complex64]) -> Result<f64> {
        Ok(self.eval_estimate(z_kept)?.value)
    }

    /// `‖U‖_1`, the Haar mean of `U` over the kept torus.
    pub fn pl1_norm(&self) -> Result<Estimate> {
        let k = self.kept.len();
        let dmax = self.kept.iter().map(|&j| self.f.effective_degree()[j]).max().unwrap_or(0);
        let mean_at = |points: usize| -> Result<f64> {
            let rule = TensorRule { axes: vec![AxisRule::circle(points, 0.0); k] };
            let count = rule.node_count();
            let values = (0..count)
                .into_par_iter()
                .map(|i| {
                    let mut idx = i;
                    let mut z = vec![Complex64::new(0.0, 0.0); k];
                    for j in (0..k).rev() {
                        z[j] = rule.axes[j].nodes[idx % points];
                        idx /= points;
                    }
                    self.eval(&z)
                })
                .collect::<Result<Vec<f64>>>()?;
            rule.reduce(&values, self.cfg.compensated)
        };
        if is_even_integer(self.p) {
            let points = (2 * dmax + 1).max((self.p as usize) * dmax / 2 + 1);
            return Ok(Estimate { value: mean_at(points)?, error: 0.0, grid: points, radial: 0, converged: true });
        }
        let cfg = QuadratureConfig { max_nodes: self.cfg.max_nodes.min(1 << 14), ..self.cfg.clone() };
        adaptive(&cfg, k, (2 * dmax + 2).max(self.cfg.grid), 0, |g, _| mean_at(g))
    }

    /// Compares `‖U‖_1` against `‖f‖_p^p` computed on the full torus.
    pub fn check(&self) -> Result<RestrictedNormReport> {
        let pl1 = self.pl1_norm()?;
        let full = hardy_norm_pow(self.f, self.p, &self.cfg)?;
        Ok(RestrictedNormReport {
            kept_axes: self.kept.clone(),
            p: self.p,
            pl1_norm: pl1.value,
            full_norm_pow: full.value,
            relative_discrepancy: (pl1.value - full.value).abs() / full.value.max(EPS_FLOOR),
            converged: pl1.converged && full.converged,
        })
    }

    /// Sub-mean-value probe for `log U` on the circle
    /// `θ ↦ (z''_j + ρ e^{iθ})_j` sampled at `points` equally spaced angles.
    pub fn submean_probe(&self, center: &[Complex64], radius: f64, points: usize) -> Result<SubMeanProbe> {
        if center.len() != self.kept.len() {
            return Err(Error::DimensionMismatch { expected: self.kept.len(), got: center.len() });
        }
        if center.iter().any(|z| z.norm() + radius >= 1.0) || !(radius > 0.0) || points == 0 {
            return Err(Error::InvalidParameter("probe circle must lie inside the polydisc".into()));
        }
        let center_log = self.eval(center)?.ln();
        let logs = (0..points)
            .into_par_iter()
            .map(|k| {
                let shift = Complex64::from_polar(radius, 2.0 * PI * k as f64 / points as f64);
                let z: Vec<Complex64> = center.iter().map(|c| c + shift).collect();
                Ok(self.eval(&z)?.ln())
            })
            .collect::<Result<Vec<f64>>>()?;
        let circle_mean_log = logs.iter().sum::<f64>() / points as f64;
        Ok(SubMeanProbe { center_log, circle_mean_log, radius, points })
    }
}

/// `|F(z)|^p ≤ ‖F‖_p^p / Π (1 - |z_j|²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn growth_bound_check(f: &PolySeries, p: f64, z: &[Complex64], cfg: &QuadratureConfig) -> Result<GrowthBound> {
    if z.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: z.len() });
    }
    if z.iter().any(|zj| !(zj.norm() < 1.0)) {
        return Err(Error::OutsideDomain { point: fmt_point(z), reason: "growth bound needs |z_j| < 1" });
    }
    let lhs = f.eval_unchecked(z).norm().powf(p);
    let norm = hardy_norm_pow(f, p, cfg)?;
    let denom: f64 = z.iter().map(|zj| 1.0 - zj.norm_sqr()).product();
    let rhs = norm.value / denom;
    let tolerance = GROWTH_REL_TOL * rhs + norm.error.min(norm.value) / denom;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(GrowthBound { lhs, rhs, ratio, tolerance, holds: lhs <= rhs + tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::hardy_norm;
    use crate::series::{extremal_function, kernel_series, Extremal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mono(alpha: Vec<usize>) -> PolySeries {
        PolySeries::monomial(&MultiIndex::new(alpha), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn series_norm_examples() {
        let q1 = WeightVector::scalar(1.0, 1).unwrap();
        for k in 0..8 {
            assert!((hq_norm_series(&mono(vec![k]), &q1).unwrap() - 1.0).abs() < 1e-15);
        }
        for q in [0.3, 1.0, 2.5] {
            let w = WeightVector::scalar(q, 2).unwrap();
            assert_eq!(hq_norm_series(&PolySeries::one(2).unwrap(), &w).unwrap(), 1.0);
        }
        let q2 = WeightVector::scalar(2.0, 1).unwrap();
        assert!((hq_norm_series(&mono(vec![1]), &q2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(hq_norm_series(&PolySeries::zeros(vec![3]).unwrap(), &q2).unwrap(), 0.0);
    }

    #[test]
    fn series_norm_overflow_is_reported() {
        let q = WeightVector::scalar(1e-300, 1).unwrap();
        let err = hq_norm_series(&mono(vec![3]), &q).unwrap_err();
        assert!(matches!(err, Error::WeightOverflow(ref a) if a == &vec![3]));
    }

    #[test]
    fn integral_norm_examples() {
        for q in [1.0, 2.0, 3.5] {
            let w = WeightVector::scalar(q, 1).unwrap();
            assert!((hq_norm_integral(&PolySeries::one(1).unwrap(), &w).unwrap() - 1.0).abs() < 1e-14);
        }
        let q2 = WeightVector::scalar(2.0, 1).unwrap();
        assert!((hq_norm_integral(&mono(vec![1]), &q2).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        let q1 = WeightVector::scalar(1.0, 2).unwrap();
        assert!((hq_norm_integral(&mono(vec![1, 1]), &q1).unwrap() - 1.0).abs() < 1e-14);
        let half = WeightVector::scalar(0.5, 1).unwrap();
        assert!(hq_norm_integral(&mono(vec![1]), &half).is_err());
        let rep = norm_report(&mono(vec![2]), &half).unwrap();
        assert!(rep.integral_value.is_none());
    }

    #[test]
    fn q_one_matches_hardy_two_norm() {
        let f = PolySeries::from_terms(
            vec![2, 3],
            [
                (MultiIndex::new(vec![0, 0]), c(0.2, 0.1)),
                (MultiIndex::new(vec![1, 3]), c(-1.0, 0.5)),
                (MultiIndex::new(vec![2, 1]), c(0.0, 0.7)),
            ],
        )
        .unwrap();
        let q = WeightVector::scalar(1.0, 2).unwrap();
        let a = hq_norm_series(&f, &q).unwrap();
        let b = hardy_norm(&f, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn reproducing_property() {
        let q = WeightVector::new(vec![1.0, 2.5]).unwrap();
        let f = PolySeries::from_terms(
            vec![3, 2],
            [
                (MultiIndex::new(vec![0, 0]), c(0.2, 0.1)),
                (MultiIndex::new(vec![3, 1]), c(-1.0, 0.5)),
                (MultiIndex::new(vec![2, 2]), c(0.0, 0.7)),
            ],
        )
        .unwrap();
        let w = [c(0.3, -0.5), c(-0.6, 0.2)];
        let k = kernel_series(&q, &w, &MultiIndex::zeros(2), 1e-12).unwrap();
        let ip = hq_inner(&f, &k, &q).unwrap();
        assert!((ip - f.eval(&w).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn restricted_norm_examples() {
        let cfg = QuadratureConfig::default();
        let z1 = mono(vec![1, 0]);
        let u = RestrictedNorm::new(&z1, 1.5, vec![1], cfg.clone()).unwrap();
        assert!((u.eval(&[c(0.3, 0.4)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((u.pl1_norm().unwrap().value - 1.0).abs() < 1e-12);

        let z2 = mono(vec![0, 1]);
        for p in [0.7, 2.0, 3.0] {
            let u = RestrictedNorm::new(&z2, p, vec![1], cfg.clone()).unwrap();
            let z = c(0.3, -0.4);
            assert!((u.eval(&[z]).unwrap() - z.norm().powf(p)).abs() < 1e-12);
            assert!((u.pl1_norm().unwrap().value - 1.0).abs() < 1e-12);
        }

        let f = PolySeries::from_terms(
            vec![1, 1],
            [(MultiIndex::new(vec![0, 0]), c(1.0, 0.0)), (MultiIndex::new(vec![1, 1]), c(1.0, 0.0))],
        )
        .unwrap();
        let u = RestrictedNorm::new(&f, 2.0, vec![1], cfg.clone()).unwrap();
        let z = c(0.6, 0.0);
        assert!((u.eval(&[z]).unwrap() - 1.36).abs() < 1e-12);
        let rep = u.check().unwrap();
        assert!((rep.pl1_norm - 2.0).abs() < 1e-12);
        assert!((rep.full_norm_pow - 2.0).abs() < 1e-12);

        assert!(RestrictedNorm::new(&f, 2.0, vec![], cfg.clone()).is_err());
        assert!(RestrictedNorm::new(&f, 2.0, vec![0, 1], cfg).is_err());
    }

    #[test]
    fn growth_bound_examples() {
        let cfg = QuadratureConfig::default();
        let one = PolySeries::one(2).unwrap();
        let z = [c(0.5, 0.0), c(0.0, 0.3)];
        let g = growth_bound_check(&one, 1.3, &z, &cfg).unwrap();
        assert!((g.lhs - 1.0).abs() < 1e-15);
        assert!((g.rhs - 1.0 / (0.75 * 0.91)).abs() < 1e-12);
        assert!(g.holds);

        let zf = mono(vec![1]);
        let g = growth_bound_check(&zf, 2.0, &[c(0.5, 0.0)], &cfg).unwrap();
        assert!((g.lhs - 0.25).abs() < 1e-15);
        assert!((g.rhs - 1.0 / 0.75).abs() < 1e-12);
        assert!(g.holds);
    }

    #[test]
    fn growth_bound_tight_at_extremal() {
        let cfg = QuadratureConfig::default();
        for p in [0.5, 1.0, 2.0, 3.0] {
            let z = [c(0.4, 0.2)];
            let mut prev = 0.0;
            for tol in [1e-3, 1e-6, 1e-9] {
                let f = extremal_function(&Extremal::HardyPower { p, n: 1 }, &z, tol).unwrap();
                let g = growth_bound_check(&f, p, &z, &cfg).unwrap();
                assert!(g.holds, "p={p} tol={tol}: {g:?}");
                assert!(g.ratio >= prev - 1e-12);
                prev = g.ratio;
            }
            assert!(prev > 1.0 - 1e-6, "p={p}: ratio {prev}");
        }
    }
}
