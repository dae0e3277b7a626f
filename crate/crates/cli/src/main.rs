use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hlvfair_cli::{
    cmd_run, cmd_sweep, cmd_synth, cmd_temp_sweep, cmd_validate, CliError, ExperimentSpec,
};

/// Human label variation and fairness experiments.
#[derive(Parser)]
#[command(name = "hlvfair", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset against its schema and print subset statistics.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
    /// Write a synthetic dataset, its schema and provenance.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Experiment spec whose `synth` section is used.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train every method for every run and write a report.
    Run(Experiment),
    /// Compare HLV methods with MV across sampled aggregation configurations.
    Sweep(Experiment),
    /// Train SL over a temperature grid.
    TempSweep(Experiment),
}

#[derive(Args)]
struct Experiment {
    /// JSON experiment spec; flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    dataset: Option<PathBuf>,
    #[arg(long, requires = "dataset")]
    schema: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    n_configs: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    resamples: Option<usize>,
    /// Comma-separated temperatures.
    #[arg(long, value_delimiter = ',')]
    tau_grid: Option<Vec<f64>>,
}

impl Experiment {
    fn spec(self) -> Result<ExperimentSpec, CliError> {
        let mut spec = match &self.spec {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        if self.dataset.is_some() {
            spec.dataset = self.dataset;
            spec.schema = self.schema;
            spec.synth = None;
        }
        if self.out.is_some() {
            spec.out = self.out;
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if self.workers.is_some() {
            spec.workers = self.workers;
        }
        if let Some(n) = self.n_configs {
            spec.sweep.n_configs = n;
        }
        if let Some(a) = self.alpha {
            spec.sweep.alpha = a;
        }
        if let Some(r) = self.resamples {
            spec.sweep.resamples = r;
        }
        if let Some(grid) = self.tau_grid {
            spec.tau_grid = grid;
        }
        Ok(spec)
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { dataset, schema } => {
            let v = cmd_validate(&dataset, &schema)?;
            print!("{}", v.report);
            for w in &v.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Synth { out, spec, seed } => {
            let mut cfg = match spec {
                Some(path) => ExperimentSpec::load(&path)?.synth.unwrap_or_default(),
                None => Default::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let ds = cmd_synth(&cfg, &out)?;
            println!("wrote {} instances to {}", ds.len(), out.display());
        }
        Command::Run(exp) => {
            let outputs = cmd_run(&exp.spec()?)?;
            println!(
                "{:<6} {:>5} {:>8} {:>8} {:>10} {:>10}",
                "method", "runs", "perf", "fair", "p_perf", "p_fair"
            );
            for r in &outputs.report.rows {
                let p = |p: Option<f64>, sig: Option<bool>| match (p, sig) {
                    (Some(p), Some(s)) => format!("{p:.4}{}", if s { "*" } else { " " }),
                    _ => "-".into(),
                };
                println!(
                    "{:<6} {:>5} {:>8.4} {:>8.4} {:>10} {:>10}",
                    r.method.as_str(),
                    r.runs,
                    r.perf,
                    r.fair,
                    p(r.p_perf, r.significant_perf),
                    p(r.p_fair, r.significant_fair)
                );
            }
        }
        Command::Sweep(exp) => {
            let outputs = cmd_sweep(&exp.spec()?)?;
            for m in &outputs.methods {
                for s in m.summary.iter().filter(|s| s.bucket == "overall") {
                    println!(
                        "{:<5} MV not fairer in {:.3} of {} configurations (95% CI {:.3}-{:.3})",
                        m.method.as_str(),
                        s.frac_not_baseline_fairer.unwrap_or(f64::NAN),
                        s.n,
                        s.ci_low.unwrap_or(f64::NAN),
                        s.ci_high.unwrap_or(f64::NAN)
                    );
                }
            }
        }
        Command::TempSweep(exp) => {
            let outputs = cmd_temp_sweep(&exp.spec()?)?;
            println!("{:>8} {:>8} {:>8}", "tau", "perf", "fair");
            for s in &outputs.summary {
                println!("{:>8} {:>8.4} {:>8.4}", s.tau, s.perf_mean, s.fair_mean);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
