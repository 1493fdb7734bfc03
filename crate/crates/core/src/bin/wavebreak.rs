use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavebreak::harness::checks::{write_profile_check, write_seed_check};
use wavebreak::harness::{emit_plotdata, output_root, parse_overrides, run_single, run_sweep, RunConfig, Verdict, OUTPUT_ENV};

#[derive(Parser)]
#[command(name = "wavebreak", version, about = "Wave breaking experiments for the 1D shallow water equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file (dotted keys such as `seed.m = 100`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// burgers-oracle, paper-seed, topo-sine or physical.
    #[arg(long)]
    preset: Option<String>,
    /// Seed amplitude bound M.
    #[arg(long = "M")]
    m: Option<f64>,
    /// Seed time scale delta.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Sweep worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Run directory name below the output root.
    #[arg(long)]
    name: Option<String>,
    /// Any configuration key, as key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output root; defaults to $WAVEBREAK_OUT or ./runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> wavebreak::Result<RunConfig> {
        let mut pairs = Vec::new();
        if let Some(p) = &self.preset {
            pairs.push(("preset".to_string(), p.clone()));
        }
        if let Some(v) = self.m {
            pairs.push(("seed.m".into(), v.to_string()));
        }
        if let Some(v) = self.delta {
            pairs.push(("seed.delta".into(), v.to_string()));
        }
        if let Some(v) = self.nodes {
            pairs.push(("grid.nodes".into(), v.to_string()));
        }
        if let Some(v) = self.workers {
            pairs.push(("sweep.workers".into(), v.to_string()));
        }
        if let Some(v) = &self.name {
            pairs.push(("output.name".into(), format!("\"{v}\"")));
        }
        pairs.extend(parse_overrides(&self.set)?);
        RunConfig::resolve(self.config.as_deref(), &pairs)
    }

    fn root(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(output_root)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its artifacts and verdict.
    Simulate(ConfigArgs),
    /// Lifespan sweep over eps and beta*.
    Sweep(ConfigArgs),
    /// Build the configured seed and check its admissibility.
    VerifySeed(ConfigArgs),
    /// Check the profile identities and bounds.
    ProfileCheck {
        /// Points per sign (total 2n + 1).
        #[arg(long, default_value_t = 5000)]
        half_points: usize,
        #[arg(long, default_value_t = 1e6)]
        y_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot-ready tables into a finished run directory.
    Plotdata {
        run_dir: PathBuf,
    },
}

fn report(verdict: &Verdict, dir: &std::path::Path) -> ExitCode {
    for i in &verdict.items {
        let state = match (i.evaluated, i.pass) {
            (false, _) => "SKIP",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!("{state} {:<12} {:<26} {}", i.id, i.name, i.detail);
    }
    println!("output: {}", dir.display());
    if verdict.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> wavebreak::Result<ExitCode> {
        match cli.command {
            Command::Simulate(a) | Command::Sweep(a) | Command::VerifySeed(a) if a.print_config => {
                print!("{}", a.resolve()?.to_toml()?);
                Ok(ExitCode::SUCCESS)
            }
            Command::Simulate(a) => {
                let cfg = a.resolve()?;
                let outcome = run_single(&cfg, &a.root())?;
                if let Some((stage, msg)) = &outcome.manifest.failure {
                    eprintln!("stage `{stage}` failed: {msg}");
                }
                Ok(report(&outcome.verdict, &outcome.dir))
            }
            Command::Sweep(a) => {
                let cfg = a.resolve()?;
                let outcome = run_sweep(&cfg, &a.root())?;
                for r in &outcome.rows {
                    println!("{:<10} eps {:<6} beta* {:<6} T* {:?} {}", r.axis, r.eps, r.beta_star, r.t_star, r.status);
                }
                Ok(report(&outcome.verdict, &outcome.dir))
            }
            Command::VerifySeed(a) => {
                let cfg = a.resolve()?;
                let dir = a.root().join(format!("{}-seed", cfg.output.name));
                let (rep, verdict) = write_seed_check(&cfg, &dir)?;
                for c in &rep.checks {
                    println!("{:<22} worst ratio {:.4} at y = {:.3e}{}", c.name, c.worst_ratio, c.worst_y, if c.pass { "" } else { "  FAIL" });
                }
                Ok(report(&verdict, &dir))
            }
            Command::ProfileCheck { half_points, y_max, out } => {
                let dir = out.unwrap_or_else(output_root).join("profile-check");
                let (rep, verdict) = write_profile_check(&dir, half_points, y_max)?;
                for c in &rep.bounds.checks {
                    println!("{:<30} violations {} worst ratio {:.4}", c.name, c.violations, c.worst_ratio);
                }
                Ok(report(&verdict, &dir))
            }
            Command::Plotdata { run_dir } => {
                let index = emit_plotdata(&run_dir)?;
                for f in &index.emitted {
                    println!("wrote {f}");
                }
                for (f, why) in &index.absent {
                    println!("absent {f}: {why}");
                }
                Ok(ExitCode::SUCCESS)
            }
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("(output root is taken from --out or ${OUTPUT_ENV})");
            ExitCode::from(2)
        }
    }
}
