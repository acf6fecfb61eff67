use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqsep_lab::audit::run_audit;
use sqsep_lab::certify::certify;
use sqsep_lab::output::{output_path, write_csv, write_json};
use sqsep_lab::separation::run_separation;
use sqsep_lab::sweep::run_sweep;
use sqsep_lab::{ExperimentConfig, LabError, Learner, Overrides, Resolved};

#[derive(Parser)]
#[command(name = "sqsep", version, about = "Certificates, separation runs and privacy audits for the hard SQ family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Write the construction certificate; exit 1 if a check fails.
    Certify,
    /// Run the learners on sampled members of the family.
    Separation,
    /// Audit every registered randomizer and run an end-to-end estimate.
    AuditLdp,
    /// Certify a grid of (gamma, r).
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Lowdeg,
    Perceptron,
}

#[derive(Args)]
struct Flags {
    /// JSON or TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    r: Option<f64>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    query_budget: Option<usize>,
    /// `inf` selects the passthrough channel.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    n_users: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_a: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    learners: Option<Vec<LearnerArg>>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            gamma: self.gamma,
            r: self.r,
            d: self.d,
            tau: self.tau,
            query_budget: self.query_budget,
            epsilon: self.epsilon,
            n_users: self.n_users,
            seed: self.seed,
            n_a: self.n_a,
            learners: self.learners.as_ref().map(|v| {
                v.iter()
                    .map(|l| match l {
                        LearnerArg::Lowdeg => Learner::Lowdeg,
                        LearnerArg::Perceptron => Learner::Perceptron,
                    })
                    .collect()
            }),
            output_dir: self.output_dir.clone(),
        }
    }
}

fn resolve(flags: &Flags) -> Result<Resolved, LabError> {
    let base = match &flags.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    base.apply(&flags.overrides()).resolve()
}

/// `Ok(true)` when every check passed.
fn run(cli: &Cli) -> Result<bool, LabError> {
    let res = resolve(&cli.flags)?;
    match cli.command {
        Command::Certify => {
            let cert = certify(&res)?;
            let path = output_path(&res, "certificate.json")?;
            write_json(&path, &cert)?;
            for c in &cert.checks {
                println!("{:<32} {:<4} value={:e} limit={:e}", c.name, if c.passed { "ok" } else { "FAIL" }, c.value, c.limit);
            }
            if !cert.passed {
                eprintln!("failed checks: {}", cert.failed().join(", "));
            }
            println!("wrote {}", path.display());
            Ok(cert.passed)
        }
        Command::Separation => {
            let report = run_separation(&res)?;
            let csv = output_path(&res, "separation.csv")?;
            let json = output_path(&res, "separation_summary.json")?;
            write_csv(&csv, &report.rows)?;
            write_json(&json, &report.summary)?;
            for (learner, acc) in &report.summary.mean_accuracy {
                println!("{learner:<24} mean accuracy {acc:.4}");
            }
            if let Some(g) = report.summary.gap {
                println!("gap {g:.4}");
            }
            if let Some(f) = report.summary.identical_fraction {
                println!("identical transcripts {f:.4}");
            }
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Command::AuditLdp => {
            let report = run_audit(&res)?;
            let path = output_path(&res, "audit_ldp.json")?;
            write_json(&path, &report)?;
            if let Some(n) = &report.notice {
                println!("notice: {n}");
            }
            for a in &report.audits {
                println!("{:<40} claimed={:?} audited={:.15}", a.randomizer, a.claimed, a.audited);
            }
            let e = &report.end_to_end;
            println!("end-to-end {} estimate {:.6} (se {:.6})", e.query, e.estimate, e.std_error);
            println!("wrote {}", path.display());
            Ok(report.passed)
        }
        Command::Sweep => {
            let rows = run_sweep(&res)?;
            let path = output_path(&res, "sweep.csv")?;
            write_csv(&path, &rows)?;
            for r in &rows {
                println!("gamma={:<6} r={:<6} {}", r.gamma, r.r, r.status);
            }
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
