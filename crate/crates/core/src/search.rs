//! Derivative-free maximization of `lhs/rhs` over small function families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{
    burbea_hilbert_gap, carleman_double_gap, carleman_gap, equal_function_gap, isoperimetric_analytic, logsub_gap,
    main_product_gap, phi_main_gap, GapConfig, GapReport, InequalityId, LogSubharmonic, PhiProduct,
};
use crate::series::{extremal_function, Extremal, MultiIndex, PolySeries, WeightVector};

/// Tail tolerance for kernel-family members.
pub const KERNEL_TAIL_TOL: f64 = 1e-10;

/// Which inequality to evaluate and with which parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTarget {
    pub inequality: InequalityId,
    /// Number of factors `m`.
    pub m: usize,
    /// Dimension `n`.
    pub n: usize,
    /// `p_j` for the Hardy-type inequalities (the logsub exponents for `logsub`).
    pub exponents: Vec<f64>,
    /// Scalar `q_j` per factor for the Hilbert-space inequality.
    pub weights: Vec<f64>,
}

impl SearchTarget {
    /// Defaults: `m = 2`, `p_j = 2`, `q_j = 1`; one-variable inequalities use `n = 1`.
    pub fn new(inequality: InequalityId, n: usize) -> Self {
        let one_variable = matches!(
            inequality,
            InequalityId::EqualFunction | InequalityId::Carleman | InequalityId::CarlemanDouble | InequalityId::Isoperimetric
        );
        let exponents = match inequality {
            InequalityId::CarlemanDouble | InequalityId::Isoperimetric => vec![1.0, 1.0],
            _ => vec![2.0, 2.0],
        };
        Self { inequality, m: 2, n: if one_variable { 1 } else { n }, exponents, weights: vec![1.0, 1.0] }
    }

    pub fn with_exponents(mut self, p: Vec<f64>) -> Self {
        self.m = p.len();
        self.weights.resize(p.len(), 1.0);
        self.exponents = p;
        self
    }

    pub fn with_weights(mut self, q: Vec<f64>) -> Self {
        self.m = q.len();
        self.exponents.resize(q.len(), 2.0);
        self.weights = q;
        self
    }

    /// Number of independent functions the inequality takes.
    pub fn free_functions(&self) -> usize {
        match self.inequality {
            InequalityId::EqualFunction | InequalityId::Carleman | InequalityId::Isoperimetric => 1,
            InequalityId::CarlemanDouble => 2,
            _ => self.m,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 || self.exponents.len() != self.m || self.weights.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "target needs m >= 2 with m exponents and m weights (m = {}, {} exponents, {} weights)",
                self.m,
                self.exponents.len(),
                self.weights.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension n must be >= 1".into()));
        }
        Ok(())
    }

    /// Gap report for the given functions.
    pub fn evaluate(&self, functions: &[PolySeries], cfg: &GapConfig) -> Result<GapReport> {
        self.validate()?;
        if functions.len() != self.free_functions() {
            return Err(Error::DimensionMismatch { expected: self.free_functions(), got: functions.len() });
        }
        let p = &self.exponents;
        match self.inequality {
            InequalityId::BurbeaHilbert => {
                let q = self.weights.iter().map(|&q| WeightVector::scalar(q, self.n)).collect::<Result<Vec<_>>>()?;
                burbea_hilbert_gap(functions, &q, cfg)
            }
            InequalityId::MainProduct => main_product_gap(functions, p, cfg),
            InequalityId::EqualFunction => equal_function_gap(&functions[0], p[0], self.m, cfg),
            InequalityId::Carleman => carleman_gap(&functions[0], p[0], cfg),
            InequalityId::CarlemanDouble => carleman_double_gap(&functions[0], &functions[1], cfg),
            InequalityId::Isoperimetric => isoperimetric_analytic(&functions[0], cfg),
            InequalityId::Logsub => {
                let us =
                    functions.iter().zip(p).map(|(f, &e)| LogSubharmonic::new(vec![f.clone()], e)).collect::<Result<Vec<_>>>()?;
                logsub_gap(&us, self.m as f64, cfg)
            }
            InequalityId::PhiMain => phi_main_gap(functions, p, &PhiProduct::new(self.m)?, self.m as f64, cfg),
        }
    }

    /// The extremal family member for each free function at parameter `w`,
    /// expanded to `tol`. For `logsub` this is `K_w^{2/e}`, so `U = |K_w|^2`.
    pub fn kernel_member(&self, w: &[Complex64], tol: f64) -> Result<Vec<PolySeries>> {
        self.validate()?;
        (0..self.free_functions())
            .map(|j| {
                let variant = match self.inequality {
                    InequalityId::BurbeaHilbert => Extremal::Hilbert(WeightVector::scalar(self.weights[j], self.n)?),
                    _ => Extremal::HardyPower { p: self.exponents[j], n: self.n },
                };
                extremal_function(&variant, w, tol)
            })
            .collect()
    }
}

/// The family searched over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    /// Free complex coefficients up to `degree` on each axis, coefficient
    /// 2-norm of each function in `[1e-8, norm_cap]`.
    CoefficientBall { degree: usize, norm_cap: f64 },
    /// Kernel-family members with `|w_j| ≤ rho`.
    KernelFamily { rho: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub family: Family,
    pub target: SearchTarget,
}

const MIN_NORM: f64 = 1e-8;

impl SearchSpace {
    pub fn coefficient_ball(target: SearchTarget, degree: usize) -> Self {
        Self { family: Family::CoefficientBall { degree, norm_cap: 10.0 }, target }
    }

    pub fn kernel_family(target: SearchTarget, rho: f64) -> Self {
        Self { family: Family::KernelFamily { rho }, target }
    }

    fn coeffs_per_function(&self, degree: usize) -> usize {
        (degree + 1).pow(self.target.n as u32)
    }

    /// Number of real parameters.
    pub fn dimension(&self) -> usize {
        match self.family {
            Family::CoefficientBall { degree, .. } => 2 * self.coeffs_per_function(degree) * self.target.free_functions(),
            Family::KernelFamily { .. } => 2 * self.target.n,
        }
    }

    /// Symmetric box `[-b, b]` on every parameter.
    pub fn bound(&self) -> f64 {
        match self.family {
            Family::CoefficientBall { norm_cap, .. } => norm_cap,
            Family::KernelFamily { rho } => rho,
        }
    }

    /// Parameters to functions, or `None` when the point is rejected.
    pub fn decode(&self, x: &[f64]) -> Option<Vec<PolySeries>> {
        if x.len() != self.dimension() || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        match self.family {
            Family::CoefficientBall { degree, norm_cap } => {
                let per = self.coeffs_per_function(degree);
                x.chunks_exact(2 * per)
                    .map(|chunk| {
                        let coeffs: Vec<Complex64> = chunk.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                        if !(MIN_NORM..=norm_cap).contains(&norm) {
                            return None;
                        }
                        PolySeries::from_dense(vec![degree; self.target.n], coeffs, 0.0).ok()
                    })
                    .collect()
            }
            Family::KernelFamily { rho } => {
                let w: Vec<Complex64> = x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                if w.iter().any(|wj| wj.norm() > rho) {
                    return None;
                }
                self.target.kernel_member(&w, KERNEL_TAIL_TOL).ok()
            }
        }
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.dimension();
        match self.family {
            Family::CoefficientBall { degree, norm_cap } => {
                let per = 2 * self.coeffs_per_function(degree);
                let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for chunk in x.chunks_exact_mut(per) {
                    let norm = chunk.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let target = 0.5 * norm_cap * rng.gen_range(0.2..1.0);
                    chunk.iter_mut().for_each(|v| *v *= target / norm.max(MIN_NORM));
                }
                x
            }
            Family::KernelFamily { rho } => (0..self.target.n)
                .flat_map(|_| {
                    let r = rho * rng.gen_range(0.0f64..1.0).sqrt();
                    let t = rng.gen_range(0.0..std::f64::consts::TAU);
                    [r * t.cos(), r * t.sin()]
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SearchOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self { budget, restarts: 5, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub inequality: InequalityId,
    pub space: SearchSpace,
    pub best_ratio: f64,
    pub best_parameters: Vec<f64>,
    pub evaluations: usize,
    pub rejected: usize,
    pub converged: bool,
    /// Relative coefficient-space distance from the optimizer to the closest
    /// kernel-family member after optimal complex scaling.
    pub nearest_kernel_distance: f64,
    pub seed: u64,
}

struct RestartOutcome {
    best_x: Vec<f64>,
    best_ratio: f64,
    evaluations: usize,
    rejected: usize,
    converged: bool,
}

/// Minimizes `f` from the simplex `simplex` using at most `budget`
/// evaluations. Returns `(best point, best value, evaluations, converged)`.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, simplex: Vec<Vec<f64>>, budget: usize) -> (Vec<f64>, f64, usize, bool) {
    let d = simplex.len() - 1;
    let mut evals = 0;
    let mut pts: Vec<(Vec<f64>, f64)> = simplex
        .into_iter()
        .map(|x| {
            evals += 1;
            let v = f(&x);
            (x, v)
        })
        .collect();
    let mut converged = false;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while evals < budget {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (pts[0].1, pts[d].1);
        let size = pts[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= 1e-13 * best.abs().max(1e-300) && size < 1e-9 {
            converged = true;
            break;
        }
        let centroid: Vec<f64> =
            (0..pts[0].0.len()).map(|i| pts[..d].iter().map(|(x, _)| x[i]).sum::<f64>() / d as f64).collect();
        let reflect = combine(&centroid, &pts[d].0, -1.0);
        let fr = f(&reflect);
        evals += 1;
        if fr < pts[0].1 {
            let expand = combine(&centroid, &pts[d].0, -2.0);
            let fe = f(&expand);
            evals += 1;
            pts[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < pts[d - 1].1 {
            pts[d] = (reflect, fr);
        } else {
            let (contract, fc) = if fr < pts[d].1 {
                let c = combine(&centroid, &reflect, 0.5);
                let v = f(&c);
                (c, v)
            } else {
                let c = combine(&centroid, &pts[d].0, 0.5);
                let v = f(&c);
                (c, v)
            };
            evals += 1;
            if fc < pts[d].1.min(fr) {
                pts[d] = (contract, fc);
            } else {
                let x0 = pts[0].0.clone();
                for p in pts[1..].iter_mut() {
                    if evals >= budget {
                        break;
                    }
                    let x = combine(&x0, &p.0, 0.5);
                    let v = f(&x);
                    evals += 1;
                    *p = (x, v);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = pts.swap_remove(0);
    (x, v, evals, converged)
}

fn restart(space: &SearchSpace, cfg: &GapConfig, budget: usize, seed: u64, index: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let d = space.dimension();
    let bound = space.bound();
    let mut rejected = 0;
    let mut objective = |x: &[f64]| -> f64 {
        let clamped: Vec<f64> = x.iter().map(|v| v.clamp(-bound, bound)).collect();
        match space.decode(&clamped).and_then(|fs| space.target.evaluate(&fs, cfg).ok()) {
            Some(r) if r.ratio.is_finite() => -r.ratio,
            _ => {
                rejected += 1;
                f64::INFINITY
            }
        }
    };
    let x0 = space.random_point(&mut rng);
    let step = 0.1 * bound / (d as f64).sqrt().max(1.0);
    let mut simplex = vec![x0.clone()];
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += if rng.gen_bool(0.5) { step } else { -step };
        simplex.push(x);
    }
    let (x, v, evaluations, converged) = nelder_mead(&mut objective, simplex, budget);
    let best_x: Vec<f64> = x.iter().map(|v| v.clamp(-bound, bound)).collect();
    RestartOutcome { best_x, best_ratio: -v, evaluations, rejected, converged }
}

/// Seeded Nelder–Mead ascent of `lhs/rhs` with restarts. Restarts run in
/// parallel and are merged in restart order.
pub fn maximize_ratio(space: &SearchSpace, options: &SearchOptions, cfg: &GapConfig) -> Result<SearchResult> {
    space.target.validate()?;
    let d = space.dimension();
    if options.budget < 50 * d {
        return Err(Error::InvalidParameter(format!("budget {} is below 50 x dimension = {}", options.budget, 50 * d)));
    }
    if options.restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let per = (options.budget / options.restarts).max(d + 2);
    let outcomes: Vec<RestartOutcome> =
        (0..options.restarts).into_par_iter().map(|k| restart(space, cfg, per, options.seed, k)).collect();
    let evaluations: usize = outcomes.iter().map(|o| o.evaluations).sum();
    let rejected: usize = outcomes.iter().map(|o| o.rejected).sum();
    if 2 * rejected > evaluations {
        return Err(Error::DegenerateSearch { rejected, evaluations });
    }
    let best = outcomes
        .iter()
        .filter(|o| o.best_ratio.is_finite())
        .fold(None::<&RestartOutcome>, |acc, o| match acc {
            Some(a) if a.best_ratio >= o.best_ratio => Some(a),
            _ => Some(o),
        })
        .ok_or(Error::DegenerateSearch { rejected, evaluations })?;
    let functions = space.decode(&best.best_x).ok_or(Error::DegenerateSearch { rejected, evaluations })?;
    Ok(SearchResult {
        inequality: space.target.inequality,
        space: space.clone(),
        best_ratio: best.best_ratio,
        best_parameters: best.best_x.clone(),
        evaluations,
        rejected,
        converged: outcomes.iter().any(|o| o.converged),
        nearest_kernel_distance: nearest_kernel_distance(&space.target, &functions)?,
        seed: options.seed,
    })
}

/// `(q)_α/α! conj(w)^α` on the degree box of `like`.
fn kernel_on_box(q: f64, w: &[Complex64], like: &PolySeries) -> Result<PolySeries> {
    let axes: Vec<Vec<Complex64>> = w
        .iter()
        .zip(like.degree())
        .map(|(wj, &d)| {
            let mut c = Complex64::new(1.0, 0.0);
            (0..=d)
                .map(|k| {
                    let out = c;
                    c *= wj.conj() * ((q + k as f64) / (k as f64 + 1.0));
                    out
                })
                .collect()
        })
        .collect();
    let terms = like.terms().map(|(alpha, _)| {
        let v: Complex64 = alpha.entries().iter().zip(&axes).map(|(&a, ax)| ax[a]).product();
        (alpha, v)
    });
    PolySeries::from_terms(like.degree().to_vec(), terms.collect::<Vec<(MultiIndex, Complex64)>>())
}

fn kernel_exponent(target: &SearchTarget, j: usize) -> f64 {
    match target.inequality {
        InequalityId::BurbeaHilbert => target.weights[j],
        _ => 2.0 / target.exponents[j],
    }
}

/// `min_w sqrt(Σ_j min_c ‖f_j - c g_{j,w}‖² / Σ_j ‖f_j‖²)` over `|w_j| ≤ 0.95`,
/// with `g_{j,w}` the kernel-family member truncated to the box of `f_j`.
pub fn nearest_kernel_distance(target: &SearchTarget, functions: &[PolySeries]) -> Result<f64> {
    let n = target.n;
    let total: f64 = functions.iter().map(|f| f.coeff_two_norm().powi(2)).sum();
    if total == 0.0 {
        return Err(Error::ZeroInput);
    }
    let residual = |x: &[f64]| -> f64 {
        let w: Vec<Complex64> = x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        if w.iter().any(|wj| wj.norm() > 0.95) {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for (j, f) in functions.iter().enumerate() {
            let Ok(g) = kernel_on_box(kernel_exponent(target, j), &w, f) else { return f64::INFINITY };
            let gg: f64 = g.dense().iter().map(|c| c.norm_sqr()).sum();
            let fg: Complex64 = f.dense().iter().zip(g.dense()).map(|(a, b)| a * b.conj()).sum();
            acc += f.coeff_two_norm().powi(2) - fg.norm_sqr() / gg;
        }
        (acc.max(0.0) / total).sqrt()
    };
    let mut best = f64::INFINITY;
    let starts: [f64; 5] = [0.0, 0.3, -0.3, 0.6, -0.6];
    for (k, &s) in starts.iter().enumerate() {
        let x0: Vec<f64> = (0..2 * n).map(|i| if i % 2 == 0 { s } else { 0.1 * (k as f64 - 2.0) }).collect();
        let mut simplex = vec![x0.clone()];
        for i in 0..2 * n {
            let mut x = x0.clone();
            x[i] += 0.1;
            simplex.push(x);
        }
        let mut f = |x: &[f64]| residual(x);
        let (_, v, _, _) = nelder_mead(&mut f, simplex, 200 * n);
        best = best.min(v);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub parameter: f64,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

/// `ratio(path(t))` at `t = a + (b-a) k/(samples-1)`. Decoder or gap errors
/// are recorded per sample.
pub fn ratio_profile<P>(
    target: &SearchTarget,
    path: P,
    range: (f64, f64),
    samples: usize,
    cfg: &GapConfig,
) -> Result<Vec<ProfilePoint>>
where
    P: Fn(f64) -> Result<Vec<PolySeries>> + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("profile needs at least one sample".into()));
    }
    let (a, b) = range;
    Ok((0..samples)
        .into_par_iter()
        .map(|k| {
            let t = if samples == 1 { a } else { a + (b - a) * k as f64 / (samples - 1) as f64 };
            match path(t).and_then(|fs| target.evaluate(&fs, cfg)) {
                Ok(r) => ProfilePoint { parameter: t, ratio: Some(r.ratio), error: None },
                Err(e) => ProfilePoint { parameter: t, ratio: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

/// Path `w = t` (real, on every axis) through the kernel family.
pub fn kernel_path(target: &SearchTarget) -> impl Fn(f64) -> Result<Vec<PolySeries>> + Sync + '_ {
    move |t| target.kernel_member(&vec![Complex64::new(t, 0.0); target.n], KERNEL_TAIL_TOL)
}

/// Path `(1-t)·K_w^{2/p} + t·z^k` (first axis) from a kernel member toward a monomial.
pub fn mixing_path(target: &SearchTarget, w: f64, k: usize) -> impl Fn(f64) -> Result<Vec<PolySeries>> + Sync + '_ {
    move |t| {
        let kernel = target.kernel_member(&vec![Complex64::new(w, 0.0); target.n], KERNEL_TAIL_TOL)?;
        let mut alpha = vec![0; target.n];
        alpha[0] = k;
        let mono = PolySeries::monomial(&MultiIndex::new(alpha), Complex64::new(t, 0.0))?;
        kernel.iter().map(|g| g.scale(Complex64::new(1.0 - t, 0.0)).add(&mono)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureConfig;

    fn cheap() -> GapConfig {
        GapConfig { quadrature: QuadratureConfig { max_nodes: 1 << 16, ..QuadratureConfig::default() }, ..GapConfig::default() }
    }

    #[test]
    fn decoder_rejects_outside_points() {
        let space = SearchSpace::coefficient_ball(SearchTarget::new(InequalityId::Carleman, 1), 1);
        assert_eq!(space.dimension(), 4);
        assert!(space.decode(&[1.0, 0.0, 0.5, 0.0]).is_some());
        assert!(space.decode(&[0.0; 4]).is_none());
        assert!(space.decode(&[10.0, 10.0, 0.0, 0.0]).is_none());
        let space = SearchSpace::kernel_family(SearchTarget::new(InequalityId::Carleman, 1), 0.6);
        assert!(space.decode(&[0.7, 0.0]).is_none());
        assert!(space.decode(&[0.3, 0.3]).is_some());
    }

    #[test]
    fn kernel_family_ratio_is_one() {
        let space = SearchSpace::kernel_family(SearchTarget::new(InequalityId::Carleman, 1), 0.6);
        let res = maximize_ratio(&space, &SearchOptions::new(100, 7), &cheap()).unwrap();
        assert!((res.best_ratio - 1.0).abs() < 1e-6, "{}", res.best_ratio);
        assert!(res.nearest_kernel_distance < 1e-6);
    }

    #[test]
    fn coefficient_ball_degree_one_matches_grid_oracle() {
        // f = a + bz, p = 2: ratio = (x² + 2xy + y²/3) / (x + y)² with x = |a|², y = |b|².
        let oracle = |x: f64, y: f64| (x * x + 2.0 * x * y + y * y / 3.0) / (x + y).powi(2);
        let mut grid_best: f64 = 0.0;
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                if x + y > 0.0 {
                    grid_best = grid_best.max(oracle(x, y));
                }
            }
        }
        assert_eq!(grid_best, 1.0);
        let target = SearchTarget::new(InequalityId::Carleman, 1);
        let f = PolySeries::univariate(vec![Complex64::new(1.2, 0.3), Complex64::new(0.0, 0.7)]).unwrap();
        let r = target.evaluate(&[f], &cheap()).unwrap();
        let (x, y) = (1.2f64.powi(2) + 0.09, 0.49);
        assert!((r.ratio - oracle(x, y)).abs() < 1e-12);

        let space = SearchSpace::coefficient_ball(target, 1);
        let res = maximize_ratio(&space, &SearchOptions::new(400, 3), &cheap()).unwrap();
        assert!(res.best_ratio <= 1.0 + 1e-6);
        assert!(res.best_ratio > 1.0 - 1e-4, "{}", res.best_ratio);
        let fs = space.decode(&res.best_parameters).unwrap();
        let c = fs[0].dense();
        assert!(c[1].norm() < 1e-2 * c[0].norm());
    }

    #[test]
    fn search_is_deterministic() {
        let space = SearchSpace::coefficient_ball(SearchTarget::new(InequalityId::MainProduct, 1), 2);
        let opts = SearchOptions::new(50 * space.dimension(), 11);
        let a = maximize_ratio(&space, &opts, &cheap()).unwrap();
        let b = maximize_ratio(&space, &opts, &cheap()).unwrap();
        assert_eq!(crate::json::to_string(&a).unwrap(), crate::json::to_string(&b).unwrap());
        assert!(a.best_ratio <= 1.0 + 1e-6);
    }

    #[test]
    fn budget_and_degenerate_errors() {
        let space = SearchSpace::coefficient_ball(SearchTarget::new(InequalityId::Carleman, 1), 3);
        assert!(maximize_ratio(&space, &SearchOptions::new(10, 0), &cheap()).is_err());
        let bad = SearchSpace { family: Family::CoefficientBall { degree: 1, norm_cap: 1e-9 }, ..space };
        assert!(matches!(maximize_ratio(&bad, &SearchOptions::new(400, 0), &cheap()), Err(Error::DegenerateSearch { .. })));
    }

    #[test]
    fn profiles() {
        let target = SearchTarget::new(InequalityId::Carleman, 1);
        let cfg = cheap();
        let pts = ratio_profile(&target, kernel_path(&target), (0.0, 0.9), 7, &cfg).unwrap();
        for p in &pts {
            assert!((p.ratio.unwrap() - 1.0).abs() < 1e-6, "{p:?}");
        }
        let pts = ratio_profile(&target, mixing_path(&target, 0.4, 3), (0.0, 1.0), 6, &cfg).unwrap();
        assert!((pts[0].ratio.unwrap() - 1.0).abs() < 1e-6);
        for p in &pts[1..] {
            assert!(p.ratio.unwrap() < 1.0 - 1e-6, "{p:?}");
        }
        let one = PolySeries::one(1).unwrap();
        let pts = ratio_profile(&target, |_| Ok(vec![one.clone()]), (0.0, 1.0), 4, &cfg).unwrap();
        assert!(pts.windows(2).all(|w| w[0].ratio == w[1].ratio));
    }

    #[test]
    fn nearest_kernel_distance_quotients_scaling() {
        let target = SearchTarget::new(InequalityId::Carleman, 1);
        let k = target.kernel_member(&[Complex64::new(0.3, -0.2)], 1e-12).unwrap();
        let scaled = k[0].scale(Complex64::new(-2.0, 5.0));
        assert!(nearest_kernel_distance(&target, &[scaled]).unwrap() < 1e-6);
        let z3 = PolySeries::monomial(&MultiIndex::new(vec![3]), Complex64::new(1.0, 0.0)).unwrap();
        assert!(nearest_kernel_distance(&target, &[z3]).unwrap() > 0.5);
    }
}
