use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfmodel::experiments::{self, ExperimentConfig, ExperimentKind, RunReport};
use lfmodel::Error;

#[derive(Parser)]
#[command(name = "lfmodel", version, about = "Random-matrix models and elliptic-curve zero statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw eigenangle samples from an ensemble.
    Sample(Common),
    /// Binned zero statistic of an ensemble with its analytic overlay.
    Density(Common),
    /// One-level density of a curve family split by root number.
    EcFamily(Common),
    /// Moment ladder and growth-exponent fit.
    Moments(Common),
    /// Per-bin and KS comparison of two reports.
    Compare(Common),
    /// Tabulate analytic densities.
    Analytic(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) => 2,
        Error::MissingZeros { .. } | Error::UndeterminedSign { .. } | Error::NeedMoreCoefficients { .. } => 3,
        Error::UnsupportedRootNumber { .. }
        | Error::UnsupportedSize(_)
        | Error::SingularCurve { .. }
        | Error::BadPrime { .. } => 4,
    }
}

fn kind_for(command: &Command, config: &ExperimentConfig) -> ExperimentKind {
    match command {
        Command::Sample(_) => ExperimentKind::Sample,
        Command::Density(_) => ExperimentKind::EnsembleDensity,
        Command::EcFamily(_) => ExperimentKind::EcDensity,
        Command::Compare(_) => ExperimentKind::Compare,
        Command::Analytic(_) => ExperimentKind::Analytic,
        Command::Moments(_) => match config.experiment {
            Some(k @ (ExperimentKind::EnsembleMoments | ExperimentKind::EcMoments)) => k,
            _ if config.family.is_some() => ExperimentKind::EcMoments,
            _ => ExperimentKind::EnsembleMoments,
        },
    }
}

fn execute(command: &Command, common: &Common) -> Result<RunReport, Error> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let raw = ExperimentConfig::from_path(&common.config)?;
    let kind = kind_for(command, &raw);
    let config = raw.resolve(Some(kind), common.seed)?;
    if kind != ExperimentKind::Sample {
        let report = experiments::run(&config)?;
        report.write(&common.out)?;
        return Ok(report);
    }
    let start = std::time::Instant::now();
    let (mut report, samples) = experiments::run_sample(&config)?;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report.write(&common.out)?;
    std::fs::write(common.out.join("samples.csv"), experiments::samples_to_csv(&samples))?;
    Ok(report)
}

fn describe(report: &RunReport) {
    for d in &report.discrepancies {
        eprintln!("{} vs {}: max discrepancy {:.2} se (bin {})", d.density, d.overlay, d.max, d.worst_bin);
    }
    for f in &report.families {
        eprintln!(
            "{}: {} considered, {} used, dropped {:?}",
            f.name, f.considered, f.used, f.dropped
        );
    }
    for m in &report.moments {
        if let Some(fit) = &m.fit {
            eprintln!(
                "{} k={}: exponent {:.3} [{:.3}, {:.3}] ({})",
                m.name, m.k, fit.exponent, fit.ci_low, fit.ci_high, fit.note
            );
        }
    }
    if let Some(c) = &report.comparison {
        for row in &c.rows {
            eprintln!(
                "{}: max |z| {:.2}, KS p {:?}, distinguishable {}",
                row.density, row.max_abs_z, row.ks_p_value, row.distinguishable
            );
        }
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:.3} > {}", c.name, c.value, c.threshold);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Sample(c)
        | Command::Density(c)
        | Command::EcFamily(c)
        | Command::Moments(c)
        | Command::Compare(c)
        | Command::Analytic(c) => c,
    };
    match execute(&cli.command, common) {
        Ok(report) => {
            describe(&report);
            if report.all_checks_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::MissingZeros { sign_changes: 1, argument: 2 }), 3);
        assert_eq!(exit_code(&Error::UnsupportedRootNumber { p: 3 }), 4);
    }

    #[test]
    fn moments_kind_follows_sections() {
        let c = ExperimentConfig::from_toml_str("[family]\nkind = \"f1\"\nx = 100\n").unwrap();
        assert_eq!(kind_for(&Command::Moments(dummy()), &c), ExperimentKind::EcMoments);
        let c = ExperimentConfig::from_toml_str("seed = 1").unwrap();
        assert_eq!(kind_for(&Command::Moments(dummy()), &c), ExperimentKind::EnsembleMoments);
    }

    fn dummy() -> Common {
        Common { config: PathBuf::new(), seed: None, out: PathBuf::new(), threads: None }
    }
}
