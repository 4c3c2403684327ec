use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use experiments::{read_config, run_experiment, write_report, CliError, Experiment, ExperimentConfig, RunOptions};
use num_complex::Complex64;

/// Run one experiment on random doubly stochastic matrices and write a JSON
/// report plus raw spectra.
///
/// Exit status: 0 all criteria pass, 1 some criterion fails, 2 bad
/// configuration, 3 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "birkhoff-spectra", version)]
struct Args {
    /// circular, quarter, potential, entry-law, singularity, hs-bound,
    /// smallball, concentration or transference-xcheck. Optional with --config.
    experiment: Option<String>,

    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    n: Option<usize>,

    #[arg(long)]
    samples: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, allow_hyphen_values = true)]
    z0_re: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    z0_im: Option<f64>,

    #[arg(long)]
    burnin: Option<usize>,

    #[arg(long)]
    thin: Option<usize>,

    /// Independent chains to split the samples across.
    #[arg(long)]
    chains: Option<usize>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Output directory; defaults to $BIRKHOFF_SPECTRA_OUT/<run> or runs/<run>.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write every sampled matrix as CSV under samples/.
    #[arg(long)]
    save_samples: bool,
}

const DEFAULT_SEED: u64 = 42;

fn build_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let named = args.experiment.as_deref().map(Experiment::parse).transpose()?;
    let mut cfg = match (&args.config, named) {
        (Some(path), named) => {
            let cfg = read_config(path)?;
            if let Some(e) = named {
                if e != cfg.experiment {
                    return Err(CliError::Config(format!(
                        "command line names `{e}` but {} configures `{}`",
                        path.display(),
                        cfg.experiment
                    )));
                }
            }
            cfg
        }
        (None, Some(e)) => ExperimentConfig::new(e, DEFAULT_SEED),
        (None, None) => return Err(CliError::Config("name an experiment or pass --config".into())),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.z0_re.is_some() || args.z0_im.is_some() {
        let base = cfg.z0_or_default();
        cfg.z0 = Some(Complex64::new(
            args.z0_re.unwrap_or(base.re),
            args.z0_im.unwrap_or(base.im),
        ));
    }
    if let Some(b) = args.burnin {
        cfg.chain.burn_in = Some(b);
    }
    if let Some(t) = args.thin {
        cfg.chain.thin = Some(t);
    }
    if let Some(c) = args.chains {
        cfg.chain.chains = c;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<bool, CliError> {
    let cfg = build_config(args)?;
    let opts = RunOptions {
        workers: args.workers,
        save_samples: args.save_samples,
    };
    let report = run_experiment(&cfg, &opts)?;
    let path = write_report(&report, &cfg.resolved_out_dir())?;
    for (name, c) in &report.statistics.criteria {
        let value = c.value.map_or_else(|| "non-finite".to_string(), |v| format!("{v:.6}"));
        println!(
            "{} {name}: {value} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.threshold
        );
    }
    println!("report: {}", path.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
