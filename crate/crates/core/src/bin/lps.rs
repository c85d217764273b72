use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lps_core::harness::{self, table1, RunOverrides, Scenario};
use lps_core::Result;

#[derive(Parser)]
#[command(
    name = "lps",
    version,
    about = "Limited processor-sharing loss systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the scenario's closed-form results.
    Analytic(Common),
    /// Simulate the scenario and print estimates.
    Simulate(Common),
    /// Simulate and check each closed-form result against the estimates.
    Compare(Common),
    /// Run the limited system and its unlimited twin on one input path.
    Couple(Common),
    /// Reproduce the loss-probability table.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Arrivals to simulate, warmup included.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    replications: Option<u64>,
    /// Directory for CSV/JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the event trace (single replication only).
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            horizon: self.horizon,
            warmup: self.warmup,
            replications: self.replications,
            seed: self.seed,
        }
    }
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Table1 { out } => {
            let rows = table1::compute()?;
            let extra = table1::supplementary()?;
            print!("{}", table1::render(&rows));
            print!("{}", table1::render_supplementary(&extra));
            if let Some(dir) = out_dir(&out)? {
                table1::write_csv(&dir.join("table1.csv"), &table1::cells(&rows))?;
                write_json(&dir.join("table1_supplementary.json"), &extra)?;
            }
            Ok(true)
        }
        Command::Analytic(c) => {
            let scenario = Scenario::load(&c.config)?;
            let results = scenario
                .formulas
                .iter()
                .map(|f| scenario.evaluate(*f))
                .collect::<Result<Vec<_>>>()?;
            print!("{}", harness::render_analytic(&scenario, &results));
            if let Some(dir) = out_dir(&c.out)? {
                write_json(&dir.join("analytic.json"), &results)?;
            }
            Ok(true)
        }
        Command::Simulate(c) => {
            let scenario = Scenario::load(&c.config)?;
            let params = scenario.params(&c.overrides());
            let est = harness::simulate(&scenario, &params, c.trace)?;
            print!("{}", harness::render_estimates(&est));
            if let Some(dir) = out_dir(&c.out)? {
                write_json(&dir.join("estimates.json"), &est)?;
                if c.trace {
                    std::fs::write(dir.join("trace.txt"), est.trace.join("\n") + "\n")?;
                }
            } else if c.trace {
                for line in &est.trace {
                    println!("{line}");
                }
            }
            Ok(true)
        }
        Command::Compare(c) => {
            let scenario = Scenario::load(&c.config)?;
            let params = scenario.params(&c.overrides());
            let report = harness::compare(&scenario, &params)?;
            print!("{}", harness::render_comparison(&report));
            if let Some(dir) = out_dir(&c.out)? {
                write_json(&dir.join("compare.json"), &report)?;
            }
            Ok(report.pass())
        }
        Command::Couple(c) => {
            let scenario = Scenario::load(&c.config)?;
            let params = scenario.params(&c.overrides());
            let outcome = harness::couple(&scenario, &params)?;
            print!("{}", harness::render_coupling(&outcome));
            if let Some(dir) = out_dir(&c.out)? {
                write_json(&dir.join("couple.json"), &outcome)?;
            }
            Ok(outcome.ok())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
