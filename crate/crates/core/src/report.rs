//! Run configuration, seeded random functions, command dispatch and the
//! machine-readable run report.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{min_modulus_on_circle, riesz_factorize, BoundaryModulus, OuterFunction};
use crate::inequalities::{GapConfig, GapReport, InequalityId, Tolerances, Verdict};
use crate::norms::norm_report;
use crate::quadrature::{hardy_norm, QuadratureConfig};
use crate::search::{
    kernel_path, maximize_ratio, mixing_path, ratio_profile, ProfilePoint, SearchOptions, SearchResult, SearchSpace, SearchTarget,
};
use crate::series::{PolySeries, WeightVector};

/// Identifies the report layout; bumped on incompatible changes.
pub const REPORT_SCHEMA: &str = "polydisc-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Sweep,
    Extremal,
    Factor,
    Norms,
    Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLaw {
    UniformDisc,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchFamily {
    KernelFamily,
    CoefficientBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfilePath {
    /// `w = t` through the kernel family.
    Kernel,
    /// `(1-t) K_w^{2/p} + t z^3` at `w = 0.4`.
    Mixing,
}

/// Everything that determines a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub inequalities: Vec<InequalityId>,
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    /// `p_j`; a single value is repeated `m` times.
    pub p: Vec<f64>,
    /// `q_j`; a single value is repeated `m` times.
    pub q: Vec<f64>,
    pub quadrature: QuadratureConfig,
    pub tolerances: Tolerances,
    pub trials: usize,
    pub seed: u64,
    pub law: CoefficientLaw,
    pub family: SearchFamily,
    /// Search budget; `0` means `50 × dimension`.
    pub budget: usize,
    pub restarts: usize,
    pub rho: f64,
    pub path: ProfilePath,
    pub samples: usize,
    pub inputs: Vec<PathBuf>,
    pub modulus: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Adds wall-clock time to the report (which then differs between runs).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Verify,
            inequalities: vec![InequalityId::Carleman],
            n: 1,
            m: 2,
            degree: 3,
            p: vec![2.0],
            q: vec![1.0],
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            trials: 10,
            seed: 0,
            law: CoefficientLaw::UniformDisc,
            family: SearchFamily::KernelFamily,
            budget: 0,
            restarts: 5,
            rho: 0.6,
            path: ProfilePath::Kernel,
            samples: 11,
            inputs: Vec::new(),
            modulus: None,
            output: None,
            timing: false,
        }
    }
}

impl RunConfig {
    fn expand(values: &[f64], m: usize, what: &str) -> Result<Vec<f64>> {
        match values.len() {
            1 => Ok(vec![values[0]; m]),
            k if k == m => Ok(values.to_vec()),
            k => Err(Error::InvalidParameter(format!("expected 1 or m = {m} values for {what}, got {k}"))),
        }
    }

    fn gap_config(&self) -> GapConfig {
        GapConfig { quadrature: self.quadrature.clone(), tolerances: self.tolerances }
    }

    /// The evaluation target for one inequality.
    pub fn target(&self, id: InequalityId) -> Result<SearchTarget> {
        let m = match id {
            InequalityId::Carleman | InequalityId::CarlemanDouble | InequalityId::Isoperimetric => 2,
            _ => self.m,
        };
        let mut t = SearchTarget::new(id, self.n);
        t.m = m;
        t.weights = Self::expand(&self.q, m, "q")?;
        t.exponents = match id {
            InequalityId::CarlemanDouble | InequalityId::Isoperimetric => vec![1.0; m],
            InequalityId::EqualFunction | InequalityId::Carleman => vec![self.p[0]; m],
            _ => Self::expand(&self.p, m, "p")?,
        };
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if self.m < 2 {
            return Err(Error::InvalidParameter(format!("m must be >= 2, got {}", self.m)));
        }
        if self.p.is_empty() || self.p.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!("exponents p must be positive, got {:?}", self.p)));
        }
        if self.q.is_empty() || self.q.iter().any(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(Error::InvalidParameter(format!("weights q must be positive, got {:?}", self.q)));
        }
        if self.inequalities.is_empty()
            && matches!(self.command, Command::Verify | Command::Sweep | Command::Extremal | Command::Profile)
        {
            return Err(Error::InvalidParameter("no inequality selected".into()));
        }
        if !(self.tolerances.violation >= 0.0 && self.tolerances.equality >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be nonnegative".into()));
        }
        for id in &self.inequalities {
            self.target(*id)?;
        }
        Ok(())
    }
}

/// Seeded random polynomial with `(degree+1)^n` i.i.d. coefficients, never
/// identically zero.
pub fn generate_random_function(seed: u64, n: usize, degree: usize, law: CoefficientLaw) -> Result<PolySeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (degree + 1).checked_pow(n as u32).ok_or_else(|| Error::DegreeCap(format!("({degree}+1)^{n} coefficients")))?;
    loop {
        let coeffs: Vec<Complex64> = (0..count)
            .map(|_| match law {
                CoefficientLaw::UniformDisc => {
                    let r = rng.gen_range(0.0f64..1.0).sqrt();
                    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
                }
                CoefficientLaw::Gaussian => {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                }
            })
            .collect();
        let f = PolySeries::from_dense(vec![degree; n], coeffs, 0.0)?;
        if !f.is_zero() {
            return Ok(f);
        }
    }
}

/// Seed of function `j` in trial `t` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize, j: usize) -> u64 {
    let mut z = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (j as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub source: String,
    pub q: Vec<f64>,
    pub series_value: f64,
    pub integral_value: Option<f64>,
    pub relative_discrepancy: Option<f64>,
    /// `(p, ‖f‖_p)` pairs.
    pub hardy: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub source: String,
    pub p: f64,
    pub roots: Vec<Complex64>,
    pub inside_zeros: Vec<Complex64>,
    pub origin_order: usize,
    pub f_norm: f64,
    pub h_norm: f64,
    pub relative_discrepancy: f64,
    pub min_modulus_h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub source: String,
    pub samples: usize,
    pub value_at_zero: Complex64,
    pub boundary_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub inequality: InequalityId,
    pub path: ProfilePath,
    pub points: Vec<ProfilePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Gap(GapReport),
    Norm(NormRecord),
    Search(SearchResult),
    Factor(FactorRecord),
    Outer(OuterRecord),
    Profile(ProfileRecord),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub holds: usize,
    pub equality: usize,
    pub violated: usize,
}

impl Summary {
    fn tally(records: &[Record]) -> Self {
        let mut s = Summary { records: records.len(), ..Summary::default() };
        for r in records {
            if let Record::Gap(g) = r {
                match g.verdict {
                    Verdict::Holds => s.holds += 1,
                    Verdict::Equality => s.equality += 1,
                    Verdict::Violated => s.violated += 1,
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    /// `0` when nothing was violated, `2` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.violated > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::json::to_string(self)?)
    }

    /// Tab-separated `inequality, parameter, ratio` rows of all profile records.
    pub fn profile_table(&self) -> String {
        let mut out = String::from("inequality\tparameter\tratio\n");
        for r in &self.records {
            if let Record::Profile(p) = r {
                for pt in &p.points {
                    let ratio = pt.ratio.map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
                    let _ = writeln!(out, "{}\t{:.16e}\t{}", p.inequality, pt.parameter, ratio);
                }
            }
        }
        out
    }
}

fn load_inputs(paths: &[PathBuf]) -> Result<Vec<(String, PolySeries)>> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            let f = PolySeries::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            Ok((p.display().to_string(), f))
        })
        .collect()
}

fn verify(cfg: &RunConfig) -> Result<Vec<Record>> {
    let inputs = load_inputs(&cfg.inputs)?;
    let gap = cfg.gap_config();
    let mut out = Vec::new();
    for &id in &cfg.inequalities {
        let target = cfg.target(id)?;
        let k = target.free_functions();
        let functions: Vec<PolySeries> = if inputs.is_empty() {
            vec![PolySeries::one(target.n)?; k]
        } else if inputs.len() == 1 {
            vec![inputs[0].1.clone(); k]
        } else if inputs.len() == k {
            inputs.iter().map(|(_, f)| f.clone()).collect()
        } else {
            return Err(Error::InvalidParameter(format!("{id} takes {k} functions, got {} input files", inputs.len())));
        };
        out.push(Record::Gap(target.evaluate(&functions, &gap)?));
    }
    Ok(out)
}

fn sweep(cfg: &RunConfig) -> Result<Vec<Record>> {
    let gap = cfg.gap_config();
    let mut out = Vec::new();
    for &id in &cfg.inequalities {
        let target = cfg.target(id)?;
        let records = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let fs = (0..target.free_functions())
                    .map(|j| generate_random_function(trial_seed(cfg.seed, t, j), target.n, cfg.degree, cfg.law))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Record::Gap(target.evaluate(&fs, &gap)?.with_seed(trial_seed(cfg.seed, t, 0))))
            })
            .collect::<Result<Vec<_>>>()?;
        out.extend(records);
    }
    Ok(out)
}

fn extremal(cfg: &RunConfig) -> Result<Vec<Record>> {
    let gap = cfg.gap_config();
    let mut out = Vec::new();
    for &id in &cfg.inequalities {
        let target = cfg.target(id)?;
        let space = match cfg.family {
            SearchFamily::KernelFamily => SearchSpace::kernel_family(target, cfg.rho),
            SearchFamily::CoefficientBall => SearchSpace::coefficient_ball(target, cfg.degree),
        };
        let budget = if cfg.budget == 0 { 50 * space.dimension() } else { cfg.budget };
        let options = SearchOptions { budget, restarts: cfg.restarts, seed: cfg.seed };
        out.push(Record::Search(maximize_ratio(&space, &options, &gap)?));
    }
    Ok(out)
}

fn sources(cfg: &RunConfig, n: usize) -> Result<Vec<(String, PolySeries)>> {
    if cfg.inputs.is_empty() {
        (0..cfg.trials)
            .map(|t| {
                let seed = trial_seed(cfg.seed, t, 0);
                Ok((format!("random:{seed}"), generate_random_function(seed, n, cfg.degree, cfg.law)?))
            })
            .collect()
    } else {
        load_inputs(&cfg.inputs)
    }
}

fn factor(cfg: &RunConfig) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (source, f) in sources(cfg, 1)? {
        for &p in &cfg.p {
            let fac = riesz_factorize(&f, p, &cfg.quadrature)?;
            out.push(Record::Factor(FactorRecord {
                source: source.clone(),
                p,
                roots: fac.roots.values(),
                inside_zeros: fac.blaschke.zeros().to_vec(),
                origin_order: fac.blaschke.origin_order(),
                f_norm: fac.f_norm,
                h_norm: fac.norm_check,
                relative_discrepancy: (fac.norm_check - fac.f_norm).abs() / fac.f_norm,
                min_modulus_h: min_modulus_on_circle(|z| fac.eval_h(z), 0.999, 1024),
            }));
        }
    }
    if let Some(path) = &cfg.modulus {
        let u = BoundaryModulus::parse(&fs::read_to_string(path)?)?;
        let outer = OuterFunction::new(&u);
        out.push(Record::Outer(OuterRecord {
            source: path.display().to_string(),
            samples: u.len(),
            value_at_zero: outer.eval(Complex64::new(0.0, 0.0))?,
            boundary_deviation: outer.boundary_deviation()?,
        }));
    }
    Ok(out)
}

fn norms(cfg: &RunConfig) -> Result<Vec<Record>> {
    let q = if cfg.q.len() == 1 { vec![cfg.q[0]; cfg.n] } else { cfg.q.clone() };
    let weight = WeightVector::new(q.clone())?;
    let items = sources(cfg, cfg.n)?;
    items
        .into_par_iter()
        .map(|(source, f)| {
            let rep = norm_report(&f, &weight)?;
            let hardy = cfg.p.iter().map(|&p| Ok((p, hardy_norm(&f, p, &cfg.quadrature)?))).collect::<Result<Vec<_>>>()?;
            Ok(Record::Norm(NormRecord {
                source,
                q: q.clone(),
                series_value: rep.series_value,
                integral_value: rep.integral_value,
                relative_discrepancy: rep.relative_discrepancy,
                hardy,
            }))
        })
        .collect()
}

fn profile(cfg: &RunConfig) -> Result<Vec<Record>> {
    let gap = cfg.gap_config();
    let mut out = Vec::new();
    for &id in &cfg.inequalities {
        let target = cfg.target(id)?;
        let points = match cfg.path {
            ProfilePath::Kernel => ratio_profile(&target, kernel_path(&target), (0.0, 0.9), cfg.samples, &gap)?,
            ProfilePath::Mixing => ratio_profile(&target, mixing_path(&target, 0.4, 3), (0.0, 1.0), cfg.samples, &gap)?,
        };
        out.push(Record::Profile(ProfileRecord { inequality: id, path: cfg.path, points }));
    }
    Ok(out)
}

/// Executes the configured command and assembles the report.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let records = match cfg.command {
        Command::Verify => verify(cfg)?,
        Command::Sweep => sweep(cfg)?,
        Command::Extremal => extremal(cfg)?,
        Command::Factor => factor(cfg)?,
        Command::Norms => norms(cfg)?,
        Command::Profile => profile(cfg)?,
    };
    let summary = Summary::tally(&records);
    Ok(RunReport {
        schema: REPORT_SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        records,
        summary,
        wall_clock_seconds: cfg.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Writes `contents` through a temporary file in the same directory and a
/// rename, so readers never see a partial file.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
