//! `opkernel`: verify covariance relations from JSON specs, run the built-in
//! scenarios, and dump composed kernels.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opkernel::config::{ComposeSpec, Overrides, VerifySpec};
use opkernel::covariance::CheckContext;
use opkernel::fixtures::run_fixture;
use opkernel::Error;

const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "opkernel", version, about = "Kernel conditions for AB = B F(A) between integral operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checker named in a spec file.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        ov: OverrideArgs,
        /// Directory for report.json and residual.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario and print its expected-vs-observed table.
    Fixture {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compose, iterate or apply a polynomial to kernels.
    Compose {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        panel_width: Option<f64>,
    },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    tol_eps: Option<f64>,
    #[arg(long)]
    tol_measure: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    panel_width: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl OverrideArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            eps_value: self.tol_eps,
            eps_measure: self.tol_measure,
            nodes_per_panel: self.nodes,
            max_panel_width: self.panel_width,
            seed: self.seed,
        }
    }
}

fn init_threads() {
    let n = std::env::var("OPKERNEL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn verify(spec: &Path, ov: Overrides, out: Option<&Path>) -> Result<u8, Error> {
    let src = fs::read_to_string(spec)?;
    let spec = VerifySpec::from_json(&src)?;
    let report = spec.run(&ov)?;
    let json = report.to_json()?;
    println!("{json}");
    if let Some(dir) = out {
        let mut csv = Vec::new();
        report.write_csv(&mut csv)?;
        write_file(dir, "report.json", json.as_bytes())?;
        write_file(dir, "residual.csv", &csv)?;
    }
    Ok(report.verdict.exit_code() as u8)
}

fn fixture(name: &str, seed: Option<u64>, out: Option<&Path>) -> Result<u8, Error> {
    let ctx = CheckContext { seed: seed.unwrap_or(0), ..CheckContext::default() };
    let outcome = run_fixture(name, &ctx)?;
    print!("{}", outcome.table());
    if let Some(dir) = out {
        write_file(dir, "fixture.json", serde_json::to_string_pretty(&outcome)?.as_bytes())?;
    }
    Ok(outcome.primary().verdict.exit_code() as u8)
}

fn compose(spec: &Path, out: &Path, nodes: Option<usize>, panel_width: Option<f64>) -> Result<u8, Error> {
    let src = fs::read_to_string(spec)?;
    let spec = ComposeSpec::from_json(&src)?;
    let ov = Overrides { nodes_per_panel: nodes, max_panel_width: panel_width, ..Overrides::default() };
    let result = spec.run(&ov)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    let bounds = serde_json::to_string_pretty(&result.bounds)?;
    write_file(out, "kernel.csv", &csv)?;
    write_file(out, "bounds.json", bounds.as_bytes())?;
    println!("{bounds}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { 0 });
        }
    };
    init_threads();
    let result = match &cli.command {
        Command::Verify { spec, ov, out } => verify(spec, ov.overrides(), out.as_deref()),
        Command::Fixture { name, out, seed } => fixture(name, *seed, out.as_deref()),
        Command::Compose { spec, out, nodes, panel_width } => compose(spec, out, *nodes, *panel_width),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
