use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nmor::config::Variant;
use nmor::harness::{analyze_external, run_field_sweep, run_time_trace, trace_correlation};
use nmor::io::{
    output_path, write_correlation_csv, write_manifest, write_noise_csv, write_sweep_csv, write_trace_csv, Manifest,
};
use nmor::{ExperimentConfig, HarnessError};

#[derive(Parser, Debug)]
#[command(name = "nmor", version, about = "Intensity correlations of polarization components after a Λ-type vapor cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the magnetic field: T, φ and G²(0) per field.
    Sweep(Common),
    /// Simulate one detector record at a single field.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Field in gauss; defaults to trace.field_gauss.
        #[arg(long)]
        field: Option<f64>,
    },
    /// Correlate an external (t, S1, S2) CSV file.
    Correlate {
        #[command(flatten)]
        common: Common,
        /// Input trace.
        input: PathBuf,
        /// Reference levels S01 and S02 without resonant absorption.
        #[arg(long, num_args = 2, value_names = ["S01", "S02"])]
        reference: Option<Vec<f64>>,
    },
    /// Run the built-in oracle and identity checks.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Paper,
    Derived,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.noise.seed = seed;
        }
        if let Some(n) = self.realizations {
            cfg.noise.realizations = n;
        }
        if let Some(v) = self.variant {
            cfg.model.variant = match v {
                VariantArg::Paper => Variant::Paper,
                VariantArg::Derived => Variant::Derived,
            };
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.display().to_string();
        }
        cfg.validate()?;
        let dir = PathBuf::from(&cfg.output.dir);
        Ok((cfg, dir))
    }
}

fn finish(dir: &Path, manifest: &Manifest) -> Result<(), HarnessError> {
    write_manifest(&output_path(dir, "manifest.json")?, manifest)
}

fn sweep(common: &Common) -> Result<(), HarnessError> {
    let (cfg, dir) = common.load()?;
    let outcome = run_field_sweep(&cfg);
    let path = output_path(&dir, "sweep.csv")?;
    write_sweep_csv(&path, &outcome.rows)?;
    finish(&dir, &Manifest::new("sweep", &cfg, cfg.seeds(), vec!["sweep.csv".into()]))?;
    eprintln!("wrote {} rows to {}", outcome.rows.len(), path.display());
    outcome.failure.map_or(Ok(()), Err)
}

fn trace(common: &Common, field: Option<f64>) -> Result<(), HarnessError> {
    let (cfg, dir) = common.load()?;
    let b = field.unwrap_or(cfg.trace.field_gauss);
    let run = run_time_trace(&cfg, b, cfg.noise.seed)?;
    write_trace_csv(&output_path(&dir, "trace.csv")?, &run.pair)?;
    write_noise_csv(&output_path(&dir, "noise.csv")?, &run.noise)?;
    let mut files = vec!["trace.csv".to_string(), "noise.csv".to_string()];
    let cf = trace_correlation(&cfg, &run);
    if let Ok(cf) = &cf {
        write_correlation_csv(&output_path(&dir, "correlation.csv")?, cf)?;
        files.push("correlation.csv".into());
    }
    finish(&dir, &Manifest::new("trace", &cfg, vec![run.seed], files))?;
    eprintln!("B = {b} G: T = {:.6}, phi = {:.6} rad", run.transmission, run.phi);
    cf.map(|_| ())
}

fn correlate(common: &Common, input: &Path, reference: Option<&[f64]>) -> Result<(), HarnessError> {
    let (cfg, dir) = common.load()?;
    let tau = cfg.trace.tau_max();
    let refs = reference.map(|r| (r[0], r[1]));
    let (cf, summary) = analyze_external(input, cfg.trace.window(), (-tau, tau), refs)?;
    write_correlation_csv(&output_path(&dir, "correlation.csv")?, &cf)?;
    finish(&dir, &Manifest::new("correlate", &cfg, Vec::new(), vec!["correlation.csv".into()]))?;
    eprintln!("{} samples, dt = {:e} s, G2(0) = {:.6}", summary.samples, summary.dt, summary.g2_zero);
    if let (Some(t), Some(phi)) = (summary.transmission, summary.phi) {
        eprintln!("T = {t:.6}, phi = {phi:.6} rad");
    }
    Ok(())
}

fn validate(seed: u64) -> ExitCode {
    let checks = nmor::validate::run_checks(seed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(common) => sweep(common),
        Command::Trace { common, field } => trace(common, *field),
        Command::Correlate { common, input, reference } => correlate(common, input, reference.as_deref()),
        Command::Validate { seed } => return validate(*seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
