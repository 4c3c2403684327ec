use std::collections::BTreeMap;
use std::time::Instant;

use birkhoff_spectra::concentration::{logdet_statistics, nj_probe};
use birkhoff_spectra::littlewood_offord::{small_ball_exact, small_ball_mc, Atom, AtomLaw};
use birkhoff_spectra::samplers::rejection_sample_ds;
use birkhoff_spectra::spectral::{
    circular_potential, eigenvalues, esd_circular_distance, quarter_circle_distance, singular_values,
    singular_values_complex, ComplexSpectrum, SingularSpectrum,
};
use birkhoff_spectra::stats::{ks_one_sample, ks_two_sample, mean};
use birkhoff_spectra::{
    center_and_scale, hit_and_run_chain, hs_norm_sq_bar, reduce_bar, shifted_bar, DoublyStochasticMatrix, RngStream,
};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, SCHEMA};
use crate::error::{CliError, Result};
use crate::report::{Artifact, Criterion, ExperimentReport, RunInfo, Statistics};

const REJECTION_TRIES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
    pub save_samples: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            save_samples: false,
        }
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    root: RngStream,
    stats: Statistics,
    artifacts: Vec<Artifact>,
}

impl Run<'_> {
    fn stream(&mut self, label: &str) -> RngStream {
        let s = self.root.split(label);
        self.stats.seeds.push(s.record());
        s
    }

    fn put(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.stats.aggregate.insert(key.to_string(), value);
        }
    }

    fn per_sample(&mut self, key: &str, values: Vec<f64>) {
        let kept = values.into_iter().filter(|v| v.is_finite()).collect();
        self.stats.per_sample.insert(key.to_string(), kept);
    }

    fn criterion(&mut self, key: &str, c: Criterion) {
        self.stats.criteria.insert(key.to_string(), c);
    }

    fn artifact(&mut self, file_name: &str, contents: String) {
        self.artifacts.push(Artifact {
            file_name: file_name.to_string(),
            contents,
        });
    }

    /// Split the requested samples across independent chains, one stream
    /// `chain-<i>` each, and concatenate them in chain order.
    fn chain_samples(&mut self) -> Result<Vec<DoublyStochasticMatrix>> {
        let chain = self.cfg.chain_config();
        let total = self.cfg.samples;
        let chains = self.cfg.chain.chains.min(total);
        let jobs: Vec<(RngStream, usize)> = (0..chains)
            .map(|i| {
                (
                    self.stream(&format!("chain-{i}")),
                    total / chains + usize::from(i < total % chains),
                )
            })
            .collect();
        let outputs = jobs
            .into_par_iter()
            .map(|(mut rng, count)| hit_and_run_chain(&chain, count, &mut rng))
            .collect::<birkhoff_spectra::Result<Vec<_>>>()?;
        let steps: u64 = outputs.iter().map(|o| o.diagnostics.steps).sum();
        let degenerate: u64 = outputs.iter().map(|o| o.diagnostics.degenerate_chords).sum();
        let chord = mean(
            &outputs
                .iter()
                .map(|o| o.diagnostics.mean_chord_length)
                .collect::<Vec<_>>(),
        );
        self.put("chain_burn_in", chain.burn_in as f64);
        self.put("chain_thin", chain.thin as f64);
        self.put("chain_steps", steps as f64);
        self.put("chain_degenerate_chords", degenerate as f64);
        self.put("chain_mean_chord_length", chord);
        let samples: Vec<DoublyStochasticMatrix> = outputs.into_iter().flat_map(|o| o.samples).collect();
        if self.opts.save_samples {
            for (k, x) in samples.iter().enumerate() {
                self.artifact(&format!("samples/sample-{k:05}.csv"), x.matrix().to_csv());
            }
        }
        Ok(samples)
    }
}

fn par_map<T, F>(samples: &[DoublyStochasticMatrix], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&DoublyStochasticMatrix) -> birkhoff_spectra::Result<T> + Sync + Send,
{
    Ok(samples
        .par_iter()
        .map(f)
        .collect::<birkhoff_spectra::Result<Vec<T>>>()?)
}

fn exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

fn circular(run: &mut Run) -> Result<()> {
    let root_n = (run.cfg.n as f64).sqrt();
    let samples = run.chain_samples()?;
    let spectra = par_map(&samples, |x| eigenvalues(&reduce_bar(x).into_matrix().scale(root_n)))?;
    run.per_sample(
        "spectral_radius",
        spectra
            .iter()
            .map(|s| s.values.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect(),
    );
    let pooled = ComplexSpectrum::pooled(&spectra);
    let d = esd_circular_distance(&pooled)?;
    run.put("radial_ks", d.radial_ks);
    run.put("angular_ks", d.angular_ks);
    run.put("marginal_ks", d.marginal_ks);
    run.put("eigenvalue_count", d.sample_size as f64);
    run.criterion("radial_ks", Criterion::below(d.radial_ks, 0.08));
    run.criterion("angular_ks", Criterion::below(d.angular_ks, 0.08));
    run.criterion("marginal_ks", Criterion::below(d.marginal_ks, 0.08));
    run.artifact("eigenvalues.csv", pooled.to_csv());
    Ok(())
}

fn quarter(run: &mut Run) -> Result<()> {
    let samples = run.chain_samples()?;
    let spectra = par_map(&samples, |x| Ok(singular_values(&center_and_scale(x))))?;
    run.per_sample("largest_singular_value", spectra.iter().map(|s| s.max()).collect());
    let pooled = SingularSpectrum::pooled(&spectra);
    let ks = quarter_circle_distance(&pooled)?;
    run.put("quarter_circle_ks", ks);
    run.criterion("quarter_circle_ks", Criterion::below(ks, 0.08));
    run.artifact("singular_values.csv", pooled.to_csv());
    Ok(())
}

fn potential(run: &mut Run) -> Result<()> {
    let n = run.cfg.n as f64;
    let z0 = run.cfg.z0_or_default();
    let samples = run.chain_samples()?;
    let spectra = par_map(&samples, |x| Ok(singular_values_complex(&shifted_bar(x, z0))))?;
    let values: Vec<f64> = spectra
        .iter()
        .map(|s| s.values().iter().map(|v| v.ln()).sum::<f64>() / n)
        .collect();
    let f = circular_potential(z0);
    let worst = values.iter().map(|v| (v - f).abs()).fold(0.0, f64::max);
    run.put("potential", f);
    run.put("mean", mean(&values));
    run.put("max_abs_deviation", worst);
    run.criterion("max_abs_deviation", Criterion::below(worst, 0.1));
    run.per_sample("log_abs_det_per_n", values);
    run.artifact("singular_values.csv", SingularSpectrum::pooled(&spectra).to_csv());
    Ok(())
}

fn entry_law(run: &mut Run) -> Result<()> {
    let n = run.cfg.n as f64;
    let xs: Vec<f64> = run.chain_samples()?.iter().map(|x| n * x.get(0, 0)).collect();
    let ks = ks_one_sample(&xs, exp_cdf);
    run.put("mean", mean(&xs));
    run.put("exp_ks", ks);
    run.criterion("exp_ks", Criterion::below(ks, 0.1));
    run.per_sample("n_x11", xs);
    Ok(())
}

fn singularity(run: &mut Run) -> Result<()> {
    let z0 = run.cfg.z0_or_default();
    let floor = (run.cfg.n as f64).powi(-10);
    let samples = run.chain_samples()?;
    let sigmas = par_map(&samples, |x| Ok(singular_values_complex(&shifted_bar(x, z0)).min()))?;
    let smallest = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    run.put("smallest_sigma", smallest);
    run.put("floor", floor);
    run.criterion("smallest_sigma", Criterion::above(smallest, floor));
    run.artifact("singular_values.csv", SingularSpectrum::new(sigmas.clone())?.to_csv());
    run.per_sample("sigma_min", sigmas);
    Ok(())
}

fn hs_bound(run: &mut Run) -> Result<()> {
    let hs: Vec<f64> = run.chain_samples()?.iter().map(hs_norm_sq_bar).collect();
    let above = hs.iter().filter(|&&v| v > 4.0).count() as f64;
    let m = mean(&hs);
    run.put("mean", m);
    run.put("max", hs.iter().copied().fold(0.0, f64::max));
    run.put("samples_above_4", above);
    run.criterion("samples_above_4", Criterion::at_most(above, 0.0));
    run.criterion("mean", Criterion::within(m, 1.5, 2.5));
    run.per_sample("hs_norm_sq", hs);
    Ok(())
}

fn central_binomial_prob(n: usize) -> f64 {
    let k = n / 2;
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64) / 2f64.powi(n as i32)
}

fn smallball(run: &mut Run) -> Result<()> {
    let n = run.cfg.n;
    let b = vec![1.0; n];
    let exact = small_ball_exact(&b, 0.0, Atom::BernoulliPm1)?.rho;
    let oracle = central_binomial_prob(n);
    let scaled = exact * (n as f64).sqrt();
    run.put("rho_exact", exact);
    run.put("rho_binomial", oracle);
    run.put("rho_sqrt_n", scaled);
    run.criterion("rho_sqrt_n", Criterion::within(scaled, 0.75, 0.85));
    run.criterion("exact_vs_binomial", Criterion::at_most((exact - oracle).abs(), 1e-12));
    let trials = run.cfg.samples;
    if trials >= 1000 {
        let mut rng = run.stream("smallball-mc");
        let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mc = small_ball_mc(&bc, 0.0, &AtomLaw::Discrete(vec![-1.0, 1.0]), trials, &mut rng)?;
        let se = mc.std_error.unwrap_or(0.0);
        run.put("rho_mc", mc.rho);
        run.put("rho_mc_std_error", se);
        let tol = 5.0 * se + 1.0 / trials as f64;
        run.criterion("mc_vs_exact", Criterion::at_most((mc.rho - exact).abs(), tol));
    }
    Ok(())
}

fn concentration(run: &mut Run) -> Result<()> {
    let z0 = run.cfg.z0_or_default();
    let trunc = run.cfg.truncation_config();
    let samples = run.chain_samples()?;
    let stats = logdet_statistics(&samples, z0, &trunc)?;
    let width = 0.2;
    let nj = nj_probe(&samples, z0, 0.0, width, 10.0)?;
    run.put("epsilon", trunc.epsilon);
    run.put("mean", stats.mean);
    run.put("stddev", stats.stddev);
    run.put("potential", stats.potential);
    run.put("abs_diff", stats.abs_diff);
    run.put("max_truncation_gap", stats.max_truncation_gap);
    run.put("singular_excluded", stats.singular_excluded as f64);
    run.put("nj_bound", nj.bound);
    run.put("nj_interval_width", width);
    run.criterion("stddev", Criterion::below(stats.stddev, 0.05));
    run.criterion("abs_diff", Criterion::below(stats.abs_diff, 0.1));
    run.criterion("nj_failures", Criterion::at_most((nj.total - nj.passes) as f64, 0.0));
    run.per_sample("truncated_log_sum", stats.samples.iter().map(|s| s.truncated).collect());
    run.per_sample("full_log_det", stats.samples.iter().map(|s| s.full.value).collect());
    run.per_sample("nj_count", nj.counts.iter().map(|&c| c as f64).collect());
    Ok(())
}

fn transference(run: &mut Run) -> Result<()> {
    let n = run.cfg.n;
    let mut rng = run.stream("rejection");
    let mut exact = Vec::with_capacity(run.cfg.samples);
    for _ in 0..run.cfg.samples {
        match rejection_sample_ds(n, REJECTION_TRIES, &mut rng)? {
            Some(x) => exact.push(x),
            None => {
                return Err(CliError::Config(format!(
                    "rejection sampler accepted nothing in {REJECTION_TRIES} tries at n = {n}"
                )))
            }
        }
    }
    let chain = run.chain_samples()?;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        for j in 1..n {
            let a: Vec<f64> = exact.iter().map(|x| x.get(i, j)).collect();
            let b: Vec<f64> = chain.iter().map(|x| x.get(i, j)).collect();
            let d = ks_two_sample(&a, &b);
            run.put(&format!("ks_{i}{j}"), d);
            worst = worst.max(d);
        }
    }
    run.put("max_corner_ks", worst);
    run.criterion("max_corner_ks", Criterion::below(worst, 0.05));
    Ok(())
}

/// Run one experiment. Statistics depend only on `cfg`, never on the worker
/// count: every chain has its own stream and results are gathered in order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let workers = opts.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let root = RngStream::new(cfg.seed);
    let mut run = Run {
        cfg,
        opts,
        stats: Statistics {
            seeds: vec![root.record()],
            ..Statistics::default()
        },
        root,
        artifacts: Vec::new(),
    };
    pool.install(|| match cfg.experiment {
        Experiment::Circular => circular(&mut run),
        Experiment::Quarter => quarter(&mut run),
        Experiment::Potential => potential(&mut run),
        Experiment::EntryLaw => entry_law(&mut run),
        Experiment::Singularity => singularity(&mut run),
        Experiment::HsBound => hs_bound(&mut run),
        Experiment::Smallball => smallball(&mut run),
        Experiment::Concentration => concentration(&mut run),
        Experiment::TransferenceXcheck => transference(&mut run),
    })?;
    let mut stats = run.stats;
    stats.pass = stats.criteria.values().all(|c| c.pass);
    let versions = BTreeMap::from([
        ("birkhoff-spectra".to_string(), birkhoff_spectra::VERSION.to_string()),
        (
            "birkhoff-spectra-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
    ]);
    Ok(ExperimentReport {
        schema: SCHEMA.to_string(),
        config: cfg.clone(),
        statistics: stats,
        run: RunInfo {
            wall_clock_secs: start.elapsed().as_secs_f64(),
            workers,
            versions,
        },
        artifacts: run.artifacts,
    })
}
