use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uccd_core::bench::{format_table, run_points, scan_pec, write_csv, write_outputs, Method, PointSummary, RunConfig};

#[derive(Parser)]
#[command(name = "uccd", version, about = "UCC doubles with perturbative singles corrections, with CC and FCI references")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single point on one FCIDUMP.
    Run(Common),
    /// Potential energy scan over the systems of a config, warm-starting VQE.
    Scan(Common),
    /// Percent-correlation table over the systems of a config.
    Table(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// FCIDUMP input; replaces any inputs from the config.
    #[arg(long)]
    fcidump: Option<PathBuf>,
    /// Method label such as UCCD, tUCCD[6S] or CCSD; repeatable, replaces the config list.
    #[arg(long = "method")]
    methods: Vec<Method>,
    /// Frozen core orbitals for inputs that do not set their own.
    #[arg(long)]
    frozen: Option<usize>,
    /// CSV output path ("-" for stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.fcidump {
            cfg.fcidump = Some(path.clone());
            cfg.systems.clear();
        }
        if !self.methods.is_empty() {
            cfg.methods = self.methods.clone();
        }
        if let Some(n) = self.frozen {
            cfg.frozen = n;
        }
        if cfg.methods.is_empty() {
            bail!("no methods given; use --method or a config file");
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, common: &Common, points: &[PointSummary]) -> Result<()> {
    let mut out_cfg = cfg.clone();
    match common.out.as_deref() {
        Some(p) if p.as_os_str() == "-" => {
            out_cfg.output.csv = None;
            write_csv(points, std::io::stdout().lock())?;
        }
        Some(p) => out_cfg.output.csv = Some(p.to_path_buf()),
        None => {}
    }
    write_outputs(&out_cfg, points)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (common, points, cfg) = match &cli.command {
        Command::Run(c) => {
            let cfg = c.config()?;
            if cfg.points().len() != 1 {
                bail!("run takes exactly one input; use scan or table for several");
            }
            (c, run_points(&cfg, false)?, cfg)
        }
        Command::Scan(c) => {
            let cfg = c.config()?;
            (c, scan_pec(&cfg)?, cfg)
        }
        Command::Table(c) => {
            let cfg = c.config()?;
            (c, run_points(&cfg, false)?, cfg)
        }
    };
    emit(&cfg, common, &points)?;
    let to_stdout = common.out.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        let mut stdout = std::io::stdout().lock();
        match &cli.command {
            Command::Run(_) => {
                let p = &points[0];
                writeln!(stdout, "{}: E_HF = {:.10}  E_FCI = {:.10}  dimension {}", p.tag, p.e_hf, p.e_fci, p.dimension)?;
                for r in &p.results {
                    let flag = if r.converged { "" } else { "  (not converged)" };
                    writeln!(stdout, "{:<12} {:>18.10} {:>9.3}%{flag}", r.method.to_string(), r.e_total, r.pct_corr)?;
                    if let Some(b) = r.correction_breakdown {
                        writeln!(stdout, "{:<12} e4s {:.3e}  e5 {:.3e}  e6 {:.3e}", "", b.e4s, b.e5, b.e6)?;
                    }
                }
            }
            _ => write!(stdout, "{}", format_table(&points, &cfg.methods))?,
        }
    }
    Ok(points.iter().all(|p| p.all_converged()))
}
