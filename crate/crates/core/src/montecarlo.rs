//! Streaming Monte-Carlo estimators, the exact-versus-sampled comparison
//! harness, concentration tail experiments and the pure-state residual scan.
//!
//! Work is split into fixed chunks of [`CHUNK`] samples; chunk `i` draws from
//! stream `base + i`. Chunks run in parallel and their statistics are merged
//! in chunk order, so results are bit-identical for any thread count.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedforms::{self, CoefficientVector};
use crate::functionals::{omega_vector, DensityMatrix, Observable, ObservablePair, UncertaintyValues};
use crate::sampling::{self, SeededStream};
use crate::twirl::Spectrum;
use crate::{Error, Result};

/// Samples per stream.
pub const CHUNK: u64 = 1024;

/// Two-sided z threshold for accepting a Monte-Carlo estimate.
/// Relative roundoff floor on standard errors.
pub const SE_FLOOR: f64 = 1e-12;

pub const Z_THRESHOLD: f64 = 5.0;

/// Relative ε grid for concentration experiments, in units of `‖A‖²‖B‖²`.
pub const EPSILON_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.4, 0.8];

/// One-pass mean and variance accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pairwise combination of two accumulators.
    pub fn merge(&self, other: &Welford) -> Welford {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        Welford { n, mean: self.mean + delta * nb / nf, m2: self.m2 + other.m2 + delta * delta * na * nb / nf }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn result(&self) -> EstimateResult {
        EstimateResult { mean: self.mean, std_error: self.std_error(), n: self.n, target: None, z: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub target: Option<f64>,
    pub z: Option<f64>,
}

impl EstimateResult {
    /// Attaches `target` and computes `z`. The standard error is floored at
    /// `1e-12·max(|target|, 1)` so that estimates of a (near-)constant
    /// function are judged on roundoff, not on a vanishing spread.
    pub fn with_target(mut self, target: f64) -> Self {
        let diff = self.mean - target;
        let floor = SE_FLOOR * target.abs().max(1.0);
        let z = if diff.abs() <= floor {
            0.0
        } else {
            diff / self.std_error.max(floor)
        };
        self.target = Some(target);
        self.z = Some(z);
        self
    }

    /// `|z| ≤ 5`, or `true` when no target is attached.
    pub fn passes(&self) -> bool {
        self.z.map_or(true, |z| z.abs() <= Z_THRESHOLD)
    }
}

/// Distribution of states to sample.
#[derive(Clone, Debug, PartialEq)]
pub enum Ensemble {
    /// Haar-random pure states in dimension `d`.
    Pure(usize),
    /// Hilbert–Schmidt density matrices in dimension `d`.
    HilbertSchmidt(usize),
    /// `UΛU†` with `U` Haar.
    Isospectral(Spectrum),
}

impl Ensemble {
    pub fn dimension(&self) -> usize {
        match self {
            Ensemble::Pure(d) | Ensemble::HilbertSchmidt(d) => *d,
            Ensemble::Isospectral(s) => s.dimension(),
        }
    }

    pub fn draw(&self, s: &mut SeededStream) -> Sample {
        match self {
            Ensemble::Pure(d) => Sample::Pure(sampling::haar_pure_state(*d, s)),
            Ensemble::HilbertSchmidt(d) => Sample::Mixed(sampling::hs_density(*d, s)),
            Ensemble::Isospectral(spec) => Sample::Mixed(sampling::isospectral(spec, s)),
        }
    }
}

/// One sampled state.
#[derive(Clone, Debug)]
pub enum Sample {
    Pure(DVector<Complex64>),
    Mixed(DensityMatrix),
}

impl Sample {
    pub fn uncertainty(&self, pair: &ObservablePair) -> Result<UncertaintyValues> {
        match self {
            Sample::Pure(psi) => pair.evaluate_pure(psi),
            Sample::Mixed(rho) => pair.evaluate(rho),
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            Sample::Pure(psi) => DensityMatrix::from_pure(psi),
            Sample::Mixed(rho) => Ok(rho.clone()),
        }
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    if threads == 0 {
        return Err(Error::InvalidArgument("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))
}

fn chunk_bounds(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK)).map(|i| (i, CHUNK.min(n - i * CHUNK))).collect()
}

fn evaluation_error(index: u64, e: Error) -> Error {
    match e {
        Error::Evaluation { .. } => e,
        other => Error::Evaluation { index, message: other.to_string() },
    }
}

/// Estimates the means of `W` functionals evaluated on the same samples.
pub fn estimate_many<const W: usize, F>(
    ensemble: &Ensemble,
    n: u64,
    stream: &SeededStream,
    threads: usize,
    eval: F,
) -> Result<[EstimateResult; W]>
where
    F: Fn(&Sample) -> Result<[f64; W]> + Sync,
{
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let pool = thread_pool(threads)?;
    let partials: Vec<[Welford; W]> = pool.install(|| {
        chunk_bounds(n)
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut s = stream.derive(chunk);
                let mut acc = [Welford::default(); W];
                for j in 0..len {
                    let sample = ensemble.draw(&mut s);
                    let values = eval(&sample).map_err(|e| evaluation_error(chunk * CHUNK + j, e))?;
                    for (a, v) in acc.iter_mut().zip(values) {
                        a.push(v);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let merged = partials.iter().fold([Welford::default(); W], |acc, part| std::array::from_fn(|i| acc[i].merge(&part[i])));
    Ok(std::array::from_fn(|i| merged[i].result()))
}

/// Estimates the mean of one functional.
pub fn estimate<F>(ensemble: &Ensemble, n: u64, stream: &SeededStream, threads: usize, eval: F) -> Result<EstimateResult>
where
    F: Fn(&Sample) -> Result<f64> + Sync,
{
    let [r] = estimate_many(ensemble, n, stream, threads, |s| Ok([eval(s)?]))?;
    Ok(r)
}

/// Evaluates `W` functionals on `n` samples and returns every value in sample order.
pub fn sample_values<const W: usize, F>(
    ensemble: &Ensemble,
    n: u64,
    stream: &SeededStream,
    threads: usize,
    eval: F,
) -> Result<Vec<[f64; W]>>
where
    F: Fn(&Sample) -> Result<[f64; W]> + Sync,
{
    let pool = thread_pool(threads)?;
    let chunks: Vec<Vec<[f64; W]>> = pool.install(|| {
        chunk_bounds(n)
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut s = stream.derive(chunk);
                (0..len)
                    .map(|j| eval(&ensemble.draw(&mut s)).map_err(|e| evaluation_error(chunk * CHUNK + j, e)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Stream-id blocks keeping the ensembles of one comparison independent.
const BLOCK: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub quantity: String,
    pub estimate: EstimateResult,
}

impl CompareRow {
    pub fn passes(&self) -> bool {
        self.estimate.passes()
    }
}

fn exact_and_estimate(
    ensemble: Ensemble,
    pair: &ObservablePair,
    coeffs: &[(&str, CoefficientVector)],
    n: u64,
    stream: &SeededStream,
    threads: usize,
) -> Result<Vec<CompareRow>> {
    let omega = omega_vector(pair.a(), pair.b())?;
    let [product, bound] = estimate_many(&ensemble, n, stream, threads, |s| {
        let v = s.uncertainty(pair)?;
        Ok([v.product, v.lower_bound])
    })?;
    coeffs
        .iter()
        .map(|(name, c)| {
            let target = closedforms::assemble_average(c, &omega)?;
            let est = if c.family.is_product() { product } else { bound };
            Ok(CompareRow { quantity: name.to_string(), estimate: est.with_target(target) })
        })
        .collect()
}

/// Compares exact averages of the uncertainty product and of `L₀` with
/// Monte-Carlo estimates over pure states, the Hilbert–Schmidt ensemble, and
/// the isospectral orbit of `spectrum` (product only).
pub fn compare_all(
    a: &Observable,
    b: &Observable,
    spectrum: &Spectrum,
    n: u64,
    stream: &SeededStream,
    threads: usize,
) -> Result<Vec<CompareRow>> {
    let d = a.dimension();
    if d < 2 {
        return Err(Error::Domain { d, what: "comparison (d ≥ 2)".into() });
    }
    if spectrum.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, got: spectrum.dimension() });
    }
    let pair = ObservablePair::new(a, b)?;
    let (u, l) = closedforms::pure_coefficients(d)?;
    let mut rows = exact_and_estimate(
        Ensemble::Pure(d),
        &pair,
        &[("pure_product", u), ("pure_l0", l)],
        n,
        &stream.derive(0),
        threads,
    )?;
    rows.extend(exact_and_estimate(
        Ensemble::HilbertSchmidt(d),
        &pair,
        &[
            ("hs_product", closedforms::hs_product_coefficients(d)?),
            ("hs_l0", closedforms::hs_bound_coefficients(d)?),
        ],
        n,
        &stream.derive(BLOCK),
        threads,
    )?);
    let iso = closedforms::omega_iso(spectrum)?;
    let omega = omega_vector(a, b)?;
    let target = closedforms::assemble_average(&iso, &omega)?;
    let est = estimate(&Ensemble::Isospectral(spectrum.clone()), n, &stream.derive(2 * BLOCK), threads, |s| {
        Ok(s.uncertainty(&pair)?.product)
    })?;
    rows.push(CompareRow { quantity: "iso_product".into(), estimate: est.with_target(target) });
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub epsilon: f64,
    /// Empirical `Pr{f − f̄ ≥ ε}`.
    pub upper: f64,
    /// Empirical `Pr{f − f̄ ≤ −ε}`.
    pub lower: f64,
    /// Empirical `Pr{|f − f̄| ≥ ε}`.
    pub two_sided: f64,
    /// Proven bound on `two_sided`.
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub binomial_se: f64,
    /// Empirical frequency within three binomial standard errors of the bound.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub ensemble: String,
    pub d: usize,
    pub n: u64,
    pub lipschitz: f64,
    pub mean: f64,
    pub points: Vec<TailPoint>,
}

impl ConcentrationReport {
    pub fn holds(&self) -> bool {
        self.points.iter().all(|p| p.holds)
    }
}

fn norm_scale(a: &Observable, b: &Observable) -> f64 {
    let (na, nb) = (a.operator_norm(), b.operator_norm());
    na * na * nb * nb
}

/// Default ε values `EPSILON_GRID · ‖A‖²‖B‖²`.
pub fn default_epsilons(a: &Observable, b: &Observable) -> Vec<f64> {
    let s = norm_scale(a, b);
    EPSILON_GRID.iter().map(|e| e * s).collect()
}

fn tail_points(values: &[f64], mean: f64, epsilons: &[f64], bound: impl Fn(f64) -> f64) -> Vec<TailPoint> {
    let n = values.len() as f64;
    epsilons
        .iter()
        .map(|&eps| {
            let upper = values.iter().filter(|&&v| v - mean >= eps).count() as f64 / n;
            let lower = values.iter().filter(|&&v| v - mean <= -eps).count() as f64 / n;
            let two_sided = upper + lower;
            let bound = bound(eps);
            let p = bound.min(1.0);
            let binomial_se = (p * (1.0 - p) / n).sqrt();
            TailPoint { epsilon: eps, upper, lower, two_sided, bound, binomial_se, holds: two_sided <= bound + 3.0 * binomial_se }
        })
        .collect()
}

fn check_sample_count(n: u64) -> Result<()> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!("concentration experiments need n ≥ 1000, got {n}")));
    }
    Ok(())
}

/// Tails of `Φ(U) = ΔA²ΔB²` at `UΛU†` around its exact mean.
///
/// Each one-sided tail is bounded by `exp(−dε²/(4L²))` with
/// `L = 32‖A‖²‖B‖²`; the reported bound is twice that, for the two-sided
/// frequency.
pub fn concentration_iso(
    spectrum: &Spectrum,
    a: &Observable,
    b: &Observable,
    n: u64,
    epsilons: &[f64],
    stream: &SeededStream,
    threads: usize,
) -> Result<ConcentrationReport> {
    check_sample_count(n)?;
    let d = spectrum.dimension();
    let pair = ObservablePair::new(a, b)?;
    let mean = closedforms::assemble_average(&closedforms::omega_iso(spectrum)?, &omega_vector(a, b)?)?;
    let values: Vec<f64> =
        sample_values(&Ensemble::Isospectral(spectrum.clone()), n, stream, threads, |s| Ok([s.uncertainty(&pair)?.product]))?
            .into_iter()
            .map(|[v]| v)
            .collect();
    let lipschitz = 32.0 * norm_scale(a, b);
    let one_sided = |eps: f64| (-(d as f64) * eps * eps / (4.0 * lipschitz * lipschitz)).exp();
    let mut points = tail_points(&values, mean, epsilons, |eps| 2.0 * one_sided(eps));
    for p in &mut points {
        let b = one_sided(p.epsilon).min(1.0);
        let se = (b * (1.0 - b) / n as f64).sqrt();
        p.holds &= p.upper <= b + 3.0 * se && p.lower <= b + 3.0 * se;
    }
    Ok(ConcentrationReport { ensemble: "iso".into(), d, n, lipschitz, mean, points })
}

fn levy_bound(sphere_dim: f64, lipschitz: f64, eps: f64) -> f64 {
    let pi3 = std::f64::consts::PI.powi(3);
    2.0 * (-(sphere_dim + 1.0) * eps * eps / (9.0 * pi3 * lipschitz * lipschitz * std::f64::consts::LN_2)).exp()
}

/// Tails of the uncertainty product over Haar pure states:
/// `Pr{|f − f̄| ≥ ε} ≤ 2exp(−dε²/(1296π³‖A‖⁴‖B‖⁴ ln 2))`.
pub fn concentration_pure(
    a: &Observable,
    b: &Observable,
    n: u64,
    epsilons: &[f64],
    stream: &SeededStream,
    threads: usize,
) -> Result<ConcentrationReport> {
    check_sample_count(n)?;
    let d = a.dimension();
    let pair = ObservablePair::new(a, b)?;
    let (u, _) = closedforms::pure_coefficients(d)?;
    let mean = closedforms::assemble_average(&u, &omega_vector(a, b)?)?;
    let values: Vec<f64> = sample_values(&Ensemble::Pure(d), n, stream, threads, |s| Ok([s.uncertainty(&pair)?.product]))?
        .into_iter()
        .map(|[v]| v)
        .collect();
    let lipschitz = 12.0 * std::f64::consts::SQRT_2 * norm_scale(a, b);
    // Unit sphere of ℂ^d is the real (2d−1)-sphere.
    let points = tail_points(&values, mean, epsilons, |eps| levy_bound(2.0 * d as f64 - 1.0, lipschitz, eps));
    Ok(ConcentrationReport { ensemble: "pure".into(), d, n, lipschitz, mean, points })
}

/// Hilbert–Schmidt variant: the purification lives on the unit sphere of
/// `ℂ^{d²}`, so `d²` replaces `d` in the exponent.
pub fn concentration_hs(
    a: &Observable,
    b: &Observable,
    n: u64,
    epsilons: &[f64],
    stream: &SeededStream,
    threads: usize,
) -> Result<ConcentrationReport> {
    check_sample_count(n)?;
    let d = a.dimension();
    let pair = ObservablePair::new(a, b)?;
    let mean = closedforms::assemble_average(&closedforms::hs_product_coefficients(d)?, &omega_vector(a, b)?)?;
    let values: Vec<f64> =
        sample_values(&Ensemble::HilbertSchmidt(d), n, stream, threads, |s| Ok([s.uncertainty(&pair)?.product]))?
            .into_iter()
            .map(|[v]| v)
            .collect();
    let lipschitz = 12.0 * std::f64::consts::SQRT_2 * norm_scale(a, b);
    let points = tail_points(&values, mean, epsilons, |eps| levy_bound(2.0 * (d * d) as f64 - 1.0, lipschitz, eps));
    Ok(ConcentrationReport { ensemble: "hs".into(), d, n, lipschitz, mean, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualScan {
    pub d: usize,
    pub n: u64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// Samples with `product − L₀ < −1e−9`.
    pub violations: u64,
    pub histogram: Vec<HistogramBin>,
}

/// Distribution of `ΔA²ΔB² − L₀` over Haar pure states.
pub fn residual_scan(
    a: &Observable,
    b: &Observable,
    n: u64,
    bins: usize,
    stream: &SeededStream,
    threads: usize,
) -> Result<ResidualScan> {
    if n < 1 || bins == 0 {
        return Err(Error::InvalidArgument("residual scan needs n ≥ 1 and at least one bin".into()));
    }
    let d = a.dimension();
    let pair = ObservablePair::new(a, b)?;
    let mut values: Vec<f64> = sample_values(&Ensemble::Pure(d), n, stream, threads, |s| {
        let v = s.uncertainty(&pair)?;
        Ok([v.product - v.lower_bound])
    })?
    .into_iter()
    .map(|[v]| v)
    .collect();
    values.sort_by(f64::total_cmp);
    let (min, max) = (values[0], values[values.len() - 1]);
    let median = values[values.len() / 2];
    let width = (max - min) / bins as f64;
    let mut histogram: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin { lo: min + width * i as f64, hi: min + width * (i + 1) as f64, count: 0 })
        .collect();
    for v in &values {
        let i = if width > 0.0 { (((v - min) / width) as usize).min(bins - 1) } else { 0 };
        histogram[i].count += 1;
    }
    let violations = values.iter().filter(|&&v| v < -1e-9).count() as u64;
    Ok(ResidualScan { d, n, min, median, max, violations, histogram })
}
