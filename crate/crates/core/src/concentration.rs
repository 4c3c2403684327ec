//! Monte Carlo and closed-form probes of concentration properties: simplex
//! norm tails, Beta-interval bounds on single entries, the exponential entry
//! law, density ratios, projection distances, trace functions of Hermitian
//! matrices, and concentration of truncated log-determinants.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{augment_minus_f, DoublyStochasticMatrix};
use crate::error::{Error, Result};
use crate::linalg::symeig::hermitian_eigenvalues;
use crate::linalg::Lu;
use crate::matrix::ComplexMatrix;
use crate::rng::RngStream;
use crate::samplers::{hit_and_run_chain, sample_simplex, ChainConfig, TruncatedExponentialSpec};
use crate::spectral::{
    circular_potential, count_eigs_in_interval, singular_values_complex, truncated_log_sum, LogAbsDet, TruncationConfig,
};
use crate::stats::{ks_one_sample, mean, std_dev, std_error};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n: usize,
    pub trials: usize,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            trials,
            constants: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn constant(&self, name: &str, default: f64) -> f64 {
        self.constants.get(name).copied().unwrap_or(default)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub threshold: f64,
    pub empirical_prob: f64,
    pub bound_claimed: f64,
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
}

/// Empirical `P(||x|| >= C / sqrt(n))` for `x` uniform on the simplex,
/// judged against `max(exp(-0.1 sqrt(n)), 5 / trials)`.
pub fn simplex_norm_tail(cfg: &ProbeConfig) -> Result<TailReport> {
    cfg.validate()?;
    if cfg.n < 4 {
        return Err(Error::InvalidInput(format!("n = {} must be >= 4", cfg.n)));
    }
    let c = cfg.constant("C", 3.0);
    let n = cfg.n as f64;
    let threshold = c / n.sqrt();
    let mut rng = RngStream::new(cfg.seed);
    let mut hits = 0;
    for _ in 0..cfg.trials {
        let x = sample_simplex(cfg.n, &mut rng)?;
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= threshold {
            hits += 1;
        }
    }
    let empirical_prob = hits as f64 / cfg.trials as f64;
    let bound_claimed = (-0.1 * n.sqrt()).exp().max(5.0 / cfg.trials as f64);
    Ok(TailReport {
        threshold,
        empirical_prob,
        bound_claimed,
        pass: empirical_prob <= bound_claimed,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Empirical `E||x||^2` and `E x_1 x_2` on the simplex with their exact values
/// `2/(n+1)` and `1/(n(n+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexMoments {
    pub norm_sq_mean: f64,
    pub norm_sq_se: f64,
    pub norm_sq_expected: f64,
    pub cross_mean: f64,
    pub cross_se: f64,
    pub cross_expected: f64,
}

impl SimplexMoments {
    /// Both means within `k` standard errors of their exact values.
    pub fn within(&self, k: f64) -> bool {
        (self.norm_sq_mean - self.norm_sq_expected).abs() <= k * self.norm_sq_se
            && (self.cross_mean - self.cross_expected).abs() <= k * self.cross_se
    }
}

pub fn simplex_moments(n: usize, trials: usize, rng: &mut RngStream) -> Result<SimplexMoments> {
    if n < 2 || trials < 2 {
        return Err(Error::InvalidInput("need n >= 2 and trials >= 2".into()));
    }
    let mut sq = Vec::with_capacity(trials);
    let mut cross = Vec::with_capacity(trials);
    for _ in 0..trials {
        let x = sample_simplex(n, rng)?;
        sq.push(x.iter().map(|v| v * v).sum());
        cross.push(x[0] * x[1]);
    }
    let nf = n as f64;
    Ok(SimplexMoments {
        norm_sq_mean: mean(&sq),
        norm_sq_se: std_error(&sq),
        norm_sq_expected: 2.0 / (nf + 1.0),
        cross_mean: mean(&cross),
        cross_se: std_error(&cross),
        cross_expected: 1.0 / (nf * (nf + 1.0)),
    })
}

/// `P(a <= x_1 <= b) = (1-a)^{n-1} - (1-b)^{n-1}` for `x_1 ~ Beta(1, n-1)`,
/// with `a, b` clamped to `[0, 1]`.
pub fn beta_interval_between(n: usize, a: f64, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n = {n} must be >= 2")));
    }
    if !(a <= b) {
        return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
    }
    let (a, b) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
    let k = (n - 1) as i32;
    Ok((1.0 - a).powi(k) - (1.0 - b).powi(k))
}

/// [`beta_interval_between`] with `a = n^{-B}` and `b = min(B ln n, 1)`.
pub fn beta_interval_prob(n: usize, big_b: f64) -> Result<f64> {
    if !(big_b > 0.0) {
        return Err(Error::InvalidInput("B must be positive".into()));
    }
    let nf = n as f64;
    beta_interval_between(n, nf.powf(-big_b), (big_b * nf.ln()).min(1.0))
}

/// KS distance of `n x_11` samples from `Exp(1)`.
pub fn entry_law_test(samples: &[f64]) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::InvalidInput(format!(
            "need >= 100 samples, got {}",
            samples.len()
        )));
    }
    Ok(ks_one_sample(samples, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }))
}

/// Largest ratio of bin frequencies, DS sample over simplex sample, using
/// `bins` equal-mass bins cut from the simplex sample.
pub fn density_ratio_probe(ds: &[f64], simplex: &[f64], bins: usize) -> Result<f64> {
    if ds.len() < 1000 || simplex.len() < 1000 {
        return Err(Error::InvalidInput("need >= 1000 samples in each set".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidInput("need at least two bins".into()));
    }
    let mut sorted = simplex.to_vec();
    sorted.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..bins).map(|k| sorted[k * sorted.len() / bins]).collect();
    let bin_of = |x: f64| edges.partition_point(|e| *e < x);
    let mut ref_counts = vec![0usize; bins];
    for &x in simplex {
        ref_counts[bin_of(x)] += 1;
    }
    let mut ds_counts = vec![0usize; bins];
    for &x in ds {
        ds_counts[bin_of(x)] += 1;
    }
    let mut worst: f64 = 0.0;
    for (bin, (&r, &d)) in ref_counts.iter().zip(&ds_counts).enumerate() {
        if r == 0 {
            return Err(Error::EmptyBin { bin });
        }
        let ratio = (d as f64 / ds.len() as f64) / (r as f64 / simplex.len() as f64);
        worst = worst.max(ratio);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subspace {
    /// Span of the first `d` coordinate vectors.
    Coordinate,
    /// Orthonormalized Gaussian frame.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub tail: TailReport,
    pub mean_norm: f64,
    pub sigma: f64,
    pub k: f64,
}

fn orthonormal_frame(d: usize, n: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    while frame.len() < d {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &frame {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            frame.push(v);
        }
    }
    frame
}

/// Distance-to-subspace tail for `y + f` with `y_i = ytilde_i - 1`, `ytilde`
/// truncated exponential. Reports `P(||pi_V(y + f)|| < sqrt(2) sigma sqrt(d)/2 - K - t)`
/// against `exp(-t^2 / (16 K^2))` plus a slack of 0.02, where `K = 10 ln n`.
/// The constant `t` defaults to `4K`.
pub fn projection_distance_probe(
    d: usize,
    f: &[f64],
    subspace: Subspace,
    cfg: &ProbeConfig,
) -> Result<ProjectionReport> {
    cfg.validate()?;
    let n = cfg.n;
    if f.len() != n {
        return Err(Error::Dimension(format!("offset has length {}, expected {n}", f.len())));
    }
    if d == 0 || d + 10 > n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= d <= n - 10, got d = {d}, n = {n}"
        )));
    }
    let spec = TruncatedExponentialSpec::new(n)?;
    let sigma = spec.variance().sqrt();
    let k = 10.0 * (n as f64).ln();
    let t = cfg.constant("t", 4.0 * k);
    let threshold = 2f64.sqrt() * sigma * (d as f64).sqrt() / 2.0 - k - t;
    let bound = (-t * t / (16.0 * k * k)).exp();
    let rng = RngStream::new(cfg.seed);
    let frame = match subspace {
        Subspace::Coordinate => None,
        Subspace::Random => Some(orthonormal_frame(d, n, &mut rng.split("frame"))),
    };
    let mut trial_rng = rng.split("trials");
    let mut below = 0;
    let mut norms = Vec::with_capacity(cfg.trials);
    let mut y = vec![0.0; n];
    for _ in 0..cfg.trials {
        for (yi, fi) in y.iter_mut().zip(f) {
            *yi = spec.sample(&mut trial_rng) - 1.0 + fi;
        }
        let norm = match &frame {
            None => y[..d].iter().map(|v| v * v).sum::<f64>().sqrt(),
            Some(q) => q
                .iter()
                .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt(),
        };
        if norm < threshold {
            below += 1;
        }
        norms.push(norm);
    }
    let empirical_prob = below as f64 / cfg.trials as f64;
    Ok(ProjectionReport {
        tail: TailReport {
            threshold,
            empirical_prob,
            bound_claimed: bound,
            pass: empirical_prob <= bound + 0.02,
            trials: cfg.trials,
            seed: cfg.seed,
        },
        mean_norm: mean(&norms),
        sigma,
        k,
    })
}

/// Scalar functions applied to Hermitian spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum GTag {
    Square,
    Abs,
    Huber {
        delta: f64,
    },
    /// `x -> ln max(eps, x^2)`; Lipschitz but not convex.
    LogMaxEps {
        eps: f64,
    },
    /// Convex majorant part `g1` of the split `LogMaxEps = g1 - g2`.
    LogMaxEpsConvex {
        eps: f64,
    },
    /// Convex correction `g2 = g1 - LogMaxEps`.
    LogMaxEpsCorrection {
        eps: f64,
    },
}

impl GTag {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            GTag::Square => x * x,
            GTag::Abs => x.abs(),
            GTag::Huber { delta } => {
                let a = x.abs();
                if a <= delta {
                    0.5 * x * x
                } else {
                    delta * (a - 0.5 * delta)
                }
            }
            GTag::LogMaxEps { eps } => eps.max(x * x).ln(),
            GTag::LogMaxEpsConvex { eps } => {
                let r = eps.sqrt();
                eps.ln() + 2.0 * (x.abs() - r).max(0.0) / r
            }
            GTag::LogMaxEpsCorrection { eps } => {
                let r = eps.sqrt();
                let a = x.abs();
                if a <= r {
                    0.0
                } else {
                    2.0 * (a - r) / r - 2.0 * (a / r).ln()
                }
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, GTag::LogMaxEps { .. })
    }

    /// Lipschitz constant on `[-radius, radius]`.
    pub fn lipschitz(&self, radius: f64) -> f64 {
        match *self {
            GTag::Square => 2.0 * radius,
            GTag::Abs => 1.0,
            GTag::Huber { delta } => delta,
            GTag::LogMaxEps { eps } | GTag::LogMaxEpsConvex { eps } | GTag::LogMaxEpsCorrection { eps } => {
                2.0 / eps.sqrt()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match *self {
            GTag::Huber { delta } => delta,
            GTag::LogMaxEps { eps } | GTag::LogMaxEpsConvex { eps } | GTag::LogMaxEpsCorrection { eps } => eps,
            _ => 1.0,
        };
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("{self:?}: parameter must be positive")));
        }
        Ok(())
    }
}

fn check_hermitian(m: &ComplexMatrix, name: &str, size: usize) -> Result<()> {
    if m.rows() != size || m.cols() != size {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {size}x{size}",
            m.rows(),
            m.cols()
        )));
    }
    let tol = 1e-12 * m.frobenius_norm().max(1.0);
    for i in 0..size {
        for j in 0..=i {
            if (m.get(i, j) - m.get(j, i).conj()).norm() > tol {
                return Err(Error::InvalidInput(format!("{name} is not Hermitian at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn combine(a: &ComplexMatrix, wa: f64, b: &ComplexMatrix, wb: f64, f: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        a.get(i, j) * wa + b.get(i, j) * wb + f.get(i, j)
    })
}

fn trace_g(g: &GTag, m: &ComplexMatrix) -> Result<(f64, f64)> {
    let ev = hermitian_eigenvalues(&m.to_rows())?;
    let radius = ev.iter().fold(0.0f64, |r, v| r.max(v.abs()));
    Ok((ev.iter().map(|&x| g.eval(x)).sum(), radius))
}

/// `tr g(U+F) + tr g(V+F) - 2 tr g((U+V)/2 + F)`; nonnegative for convex `g`.
pub fn trace_convexity_check(g: &GTag, u: &ComplexMatrix, v: &ComplexMatrix, f: &ComplexMatrix) -> Result<f64> {
    g.validate()?;
    if !g.is_convex() {
        return Err(Error::InvalidInput(format!(
            "{g:?} is not convex; check its convex parts separately"
        )));
    }
    let size = u.rows();
    check_hermitian(u, "U", size)?;
    check_hermitian(v, "V", size)?;
    check_hermitian(f, "F", size)?;
    let (a, _) = trace_g(g, &combine(u, 1.0, v, 0.0, f))?;
    let (b, _) = trace_g(g, &combine(u, 0.0, v, 1.0, f))?;
    let (c, _) = trace_g(g, &combine(u, 0.5, v, 0.5, f))?;
    Ok(a + b - 2.0 * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    /// `|tr g(M1/sqrt(s) + F) - tr g(M2/sqrt(s) + F)| / ||M1 - M2||_HS`.
    pub ratio: f64,
    /// `||g||_L` on the spectral range involved.
    pub lipschitz: f64,
}

impl LipschitzCheck {
    pub fn passes(&self, slack: f64) -> bool {
        self.ratio <= 2.0 * self.lipschitz + slack
    }
}

pub fn trace_lipschitz_check(
    g: &GTag,
    m1: &ComplexMatrix,
    m2: &ComplexMatrix,
    f: &ComplexMatrix,
    n_scale: usize,
) -> Result<LipschitzCheck> {
    g.validate()?;
    if n_scale == 0 {
        return Err(Error::InvalidInput("n_scale must be >= 1".into()));
    }
    let size = m1.rows();
    check_hermitian(m1, "M1", size)?;
    check_hermitian(m2, "M2", size)?;
    check_hermitian(f, "F", size)?;
    let w = 1.0 / (n_scale as f64).sqrt();
    let zero = ComplexMatrix::zeros(size, size);
    let (a, ra) = trace_g(g, &combine(m1, w, &zero, 0.0, f))?;
    let (b, rb) = trace_g(g, &combine(m2, w, &zero, 0.0, f))?;
    let diff = combine(m1, 1.0, m2, -1.0, &zero).frobenius_norm();
    let ratio = if diff == 0.0 { 0.0 } else { (a - b).abs() / diff };
    Ok(LipschitzCheck {
        ratio,
        lipschitz: g.lipschitz(ra.max(rb)),
    })
}

/// Random Hermitian matrix with i.i.d. standard Gaussian real and imaginary
/// parts above the diagonal and real Gaussian diagonal, times `scale`.
pub fn random_hermitian(size: usize, scale: f64, rng: &mut RngStream) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 0..size {
        let d: f64 = rng.sample(StandardNormal);
        m.set(i, i, Complex64::new(scale * d, 0.0));
        for j in i + 1..size {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im) * scale;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogdetSample {
    /// `(1/n) sum_{sigma^2 >= eps} ln sigma` over the augmented matrix.
    pub truncated: f64,
    /// `(1/n) ln |det|` of the augmented matrix.
    pub full: LogAbsDet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogdetStats {
    pub mean: f64,
    pub stddev: f64,
    pub potential: f64,
    pub abs_diff: f64,
    /// Largest `|truncated - full|` over nonsingular samples.
    pub max_truncation_gap: f64,
    pub singular_excluded: usize,
    pub samples: Vec<LogdetSample>,
}

/// Truncated log-sum of the augmented matrix `sqrt(n) X` with first row
/// `sqrt(n)` and `z0` removed from the lower diagonal, for one sample.
pub fn logdet_sample(x: &DoublyStochasticMatrix, z0: Complex64, cfg: &TruncationConfig) -> Result<LogdetSample> {
    let n = x.n();
    let m = augment_minus_f(x, z0, (n as f64).sqrt())?;
    let sv = singular_values_complex(m.matrix());
    let truncated = truncated_log_sum(&sv, cfg)?;
    let lu = Lu::factor(&m.matrix().to_rows())?;
    let full = if lu.is_singular() {
        LogAbsDet {
            value: f64::NEG_INFINITY,
            is_singular: true,
        }
    } else {
        LogAbsDet {
            value: lu.log_det().0 / n as f64,
            is_singular: false,
        }
    };
    Ok(LogdetSample { truncated, full })
}

/// Mean and spread of [`logdet_sample`] over `samples`, excluding samples
/// whose augmented matrix is exactly singular.
pub fn logdet_statistics(
    samples: &[DoublyStochasticMatrix],
    z0: Complex64,
    cfg: &TruncationConfig,
) -> Result<LogdetStats> {
    let all: Vec<LogdetSample> = samples
        .iter()
        .map(|x| logdet_sample(x, z0, cfg))
        .collect::<Result<_>>()?;
    let kept: Vec<f64> = all
        .iter()
        .filter(|s| !s.full.is_singular)
        .map(|s| s.truncated)
        .collect();
    let gap = all
        .iter()
        .filter(|s| !s.full.is_singular)
        .map(|s| (s.truncated - s.full.value).abs())
        .fold(0.0, f64::max);
    let m = mean(&kept);
    let potential = circular_potential(z0);
    Ok(LogdetStats {
        mean: m,
        stddev: std_dev(&kept),
        potential,
        abs_diff: (m - potential).abs(),
        max_truncation_gap: gap,
        singular_excluded: all.len() - kept.len(),
        samples: all,
    })
}

pub fn logdet_concentration_probe(
    chain: &ChainConfig,
    z0: Complex64,
    samples: usize,
    cfg: &TruncationConfig,
    rng: &mut RngStream,
) -> Result<LogdetStats> {
    if samples < 10 {
        return Err(Error::InvalidInput(format!("need >= 10 samples, got {samples}")));
    }
    let out = hit_and_run_chain(chain, samples, rng)?;
    logdet_statistics(&out.samples, z0, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NjReport {
    pub counts: Vec<usize>,
    pub bound: f64,
    pub passes: usize,
    pub total: usize,
}

/// Eigenvalues of `H = M* M` for the augmented matrix `M` in `[lo, hi]`,
/// compared with `factor * n * (hi - lo)`.
pub fn nj_probe(samples: &[DoublyStochasticMatrix], z0: Complex64, lo: f64, hi: f64, factor: f64) -> Result<NjReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let n = samples[0].n();
    let bound = factor * n as f64 * (hi - lo);
    let mut counts = Vec::with_capacity(samples.len());
    for x in samples {
        let m = augment_minus_f(x, z0, (x.n() as f64).sqrt())?;
        let sq = singular_values_complex(m.matrix()).squares();
        counts.push(count_eigs_in_interval(&sq, lo, hi)?);
    }
    let passes = counts.iter().filter(|&&c| c as f64 <= bound).count();
    Ok(NjReport {
        total: counts.len(),
        counts,
        bound,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    #[test]
    fn simplex_tail_examples() {
        let cfg = ProbeConfig::new(100, 2000, 41);
        let r = simplex_norm_tail(&cfg).unwrap();
        assert!(r.pass && r.empirical_prob == 0.0);
        let r = simplex_norm_tail(&cfg.clone().with("C", 0.0)).unwrap();
        assert_eq!(r.empirical_prob, 1.0);
        assert!(!r.pass);
        assert!(simplex_norm_tail(&ProbeConfig::new(3, 10, 0)).is_err());
    }

    #[test]
    fn simplex_cross_moment_n3() {
        let mut rng = RngStream::new(42);
        let m = simplex_moments(3, 100_000, &mut rng).unwrap();
        assert!((m.cross_mean - 1.0 / 12.0).abs() < 0.002);
        assert!(m.within(4.0));
    }

    #[test]
    fn beta_interval_examples() {
        assert!((beta_interval_between(2, 0.2, 0.5).unwrap() - 0.3).abs() < 1e-15);
        let p = beta_interval_prob(10, 5.0).unwrap();
        assert!((p - (1.0 - 1e-5f64).powi(9)).abs() < 1e-15);
        assert!((p - 0.99991).abs() < 1e-5);
        for n in [10usize, 100, 1000] {
            let p = beta_interval_prob(n, 4.0).unwrap();
            assert!(1.0 - p <= (n as f64).powf(-2.0), "n={n}");
        }
        assert!(beta_interval_between(5, 0.5, 0.2).is_err());
    }

    #[test]
    fn beta_interval_matches_monte_carlo() {
        let n = 10;
        let (a, b) = (0.02, 0.3);
        let exact = beta_interval_between(n, a, b).unwrap();
        let mut rng = RngStream::new(43);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                let x = sample_simplex(n, &mut rng).unwrap()[0];
                (a..=b).contains(&x)
            })
            .count();
        let p = hits as f64 / trials as f64;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((p - exact).abs() < 3.0 * se);
    }

    #[test]
    fn entry_law_examples() {
        let mut rng = RngStream::new(44);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.exponential()).collect();
        let d = entry_law_test(&xs).unwrap();
        assert!(d < 0.02 && d < crate::stats::ks_critical_value(10_000, 0.01));
        assert!(entry_law_test(&[5.0; 200]).unwrap() > 0.99);
        assert!(entry_law_test(&[1.0; 10]).is_err());
    }

    #[test]
    fn density_ratio_examples() {
        let mut rng = RngStream::new(45);
        let a: Vec<f64> = (0..20_000).map(|_| sample_simplex(20, &mut rng).unwrap()[0]).collect();
        let b: Vec<f64> = (0..20_000).map(|_| sample_simplex(20, &mut rng).unwrap()[0]).collect();
        let r = density_ratio_probe(&a, &b, 20).unwrap();
        assert!((0.85..1.2).contains(&r), "{r}");
        let degenerate = vec![b[0]; 2000];
        assert!(density_ratio_probe(&degenerate, &b, 20).unwrap() > 2f64.sqrt() * 3.0);
        let lumpy = vec![0.5; 2000];
        assert!(matches!(
            density_ratio_probe(&a, &lumpy, 4),
            Err(Error::EmptyBin { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let n = 200;
        let f = vec![0.0; n];
        let cfg = ProbeConfig::new(n, 4000, 46);
        let r = projection_distance_probe(100, &f, Subspace::Coordinate, &cfg).unwrap();
        assert!((r.mean_norm / (r.sigma * 10.0) - 1.0).abs() < 0.05);
        assert!(r.tail.threshold < 0.0 && r.tail.empirical_prob == 0.0 && r.tail.pass);
        let r50 = projection_distance_probe(50, &f, Subspace::Random, &cfg).unwrap();
        let r100 = projection_distance_probe(100, &f, Subspace::Random, &cfg).unwrap();
        assert!((r100.mean_norm / r50.mean_norm / 2f64.sqrt() - 1.0).abs() < 0.05);
        assert!(projection_distance_probe(195, &f, Subspace::Random, &cfg).is_err());
    }

    #[test]
    fn g_tag_split_reassembles() {
        let eps = 0.01;
        let g = GTag::LogMaxEps { eps };
        let g1 = GTag::LogMaxEpsConvex { eps };
        let g2 = GTag::LogMaxEpsCorrection { eps };
        for k in -300..=300 {
            let x = k as f64 / 100.0;
            assert!((g.eval(x) - (g1.eval(x) - g2.eval(x))).abs() < 1e-12);
        }
        assert_eq!(g.lipschitz(1.0), 20.0);
    }

    #[test]
    fn log_max_eps_is_not_convex() {
        let g = GTag::LogMaxEps { eps: 0.01 };
        // Midpoint convexity fails at 0.5, 1.5.
        assert!(g.eval(0.5) + g.eval(1.5) < 2.0 * g.eval(1.0));
        let z = ComplexMatrix::zeros(2, 2);
        assert!(trace_convexity_check(&g, &z, &z, &z).is_err());
    }

    #[test]
    fn convexity_examples() {
        let mut rng = RngStream::new(47);
        for _ in 0..50 {
            let (u, v, f) = (
                random_hermitian(5, 1.0, &mut rng),
                random_hermitian(5, 1.0, &mut rng),
                random_hermitian(5, 1.0, &mut rng),
            );
            assert!(trace_convexity_check(&GTag::Square, &u, &v, &f).unwrap() >= -1e-12);
            assert!(trace_convexity_check(&GTag::Abs, &u, &v, &f).unwrap() >= -1e-9);
            assert!(trace_convexity_check(&GTag::Square, &u, &u, &f).unwrap().abs() < 1e-12);
        }
        let bad = ComplexMatrix::from_real(DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap());
        assert!(trace_convexity_check(&GTag::Abs, &bad, &bad, &bad).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let mut rng = RngStream::new(48);
        let g = GTag::LogMaxEps { eps: 0.01 };
        for _ in 0..50 {
            let (m1, m2, f) = (
                random_hermitian(8, 1.0, &mut rng),
                random_hermitian(8, 1.0, &mut rng),
                random_hermitian(8, 0.3, &mut rng),
            );
            let r = trace_lipschitz_check(&GTag::Abs, &m1, &m2, &f, 8).unwrap();
            assert!(r.ratio <= 2.0 + 1e-9);
            let r = trace_lipschitz_check(&g, &m1, &m2, &f, 8).unwrap();
            assert!(r.ratio <= 40.0 + 1e-9);
        }
        let m = random_hermitian(4, 1.0, &mut rng);
        let r = trace_lipschitz_check(&GTag::Abs, &m, &m, &m, 4).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn logdet_degenerate_center() {
        let j = DoublyStochasticMatrix::uniform_center(10);
        let cfg = TruncationConfig::for_n(10);
        let s = logdet_sample(&j, Complex64::new(0.0, 0.0), &cfg).unwrap();
        assert!(s.truncated.is_finite());
        assert!(s.full.is_singular && s.full.value == f64::NEG_INFINITY);
        let stats = logdet_statistics(&[j], Complex64::new(0.0, 0.0), &cfg).unwrap();
        assert_eq!(stats.singular_excluded, 1);
    }

    #[test]
    fn nj_counts_small() {
        let mut rng = RngStream::new(49);
        let out = hit_and_run_chain(&ChainConfig::new(30), 5, &mut rng).unwrap();
        let r = nj_probe(&out.samples, Complex64::new(2.0, 0.0), 0.0, 0.2, 10.0).unwrap();
        assert_eq!(r.passes, 5);
        assert_eq!(r.bound, 60.0);
    }
}
