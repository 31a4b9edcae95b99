use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use disconn::functor::DirectionalDerivativeSpec;
use disconn::quadrature::QuadratureSpec;
use disconn::scenario::{run_scenario, verify_all, Format, RunOptions};

#[derive(Parser)]
#[command(name = "disconn", version, about = "Run connection and discrete-connection verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and print its report.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every scenario in a directory.
    VerifyAll {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Args)]
struct Opts {
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Base step of the diagonal derivatives [default: scenario value, else 1e-4].
    #[arg(long)]
    fd_step: Option<f64>,
    /// Richardson levels [default: scenario value, else 2].
    #[arg(long)]
    fd_levels: Option<usize>,
    #[arg(long, default_value_t = 8)]
    quadrature_order: usize,
    #[arg(long, default_value_t = 16)]
    quadrature_panels: usize,
    /// Start point of primitives, comma separated chart coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    base_point: Option<Vec<f64>>,
    /// standard | euclidean | round
    #[arg(long)]
    metric: Option<String>,
    /// straight_line | exponential | stereographic
    #[arg(long)]
    retraction: Option<String>,
    #[arg(long)]
    domain_radius: Option<f64>,
    /// Include per-check wall time (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

impl Opts {
    fn run_options(&self) -> Result<(RunOptions, Format), String> {
        let derivative = match (self.fd_step, self.fd_levels) {
            (None, None) => None,
            (step, levels) => {
                let d = DirectionalDerivativeSpec::default();
                let spec = DirectionalDerivativeSpec::new(step.unwrap_or(d.base_step), levels.unwrap_or(d.richardson_levels));
                Some(spec.map_err(|e| e.to_string())?)
            }
        };
        let quadrature = QuadratureSpec::new(self.quadrature_order, self.quadrature_panels).map_err(|e| e.to_string())?;
        let format = match self.format {
            OutputFormat::Table => Format::Table,
            OutputFormat::Json => Format::Json,
        };
        Ok((
            RunOptions {
                derivative,
                quadrature,
                base_point: self.base_point.clone(),
                metric: self.metric.clone(),
                retraction: self.retraction.clone(),
                domain_radius: self.domain_radius,
                timings: self.timings,
            },
            format,
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, path, all) = match &cli.command {
        Command::Run { scenario, opts } => (opts, scenario, false),
        Command::VerifyAll { dir, opts } => (opts, dir, true),
    };
    let (options, format) = match opts.run_options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !all {
        return match run_scenario(path, &options) {
            Ok(report) => {
                print!("{}", report.render(format));
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let results = match verify_all(path, &options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut code = 0;
    let mut reports = Vec::new();
    for (file, result) in results {
        match result {
            Ok(report) => {
                code = code.max(report.exit_code());
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: {}: {e}", file.display());
                code = 2;
            }
        }
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize")),
        Format::Table => {
            let tables: Vec<String> = reports.iter().map(|r| r.render(Format::Table)).collect();
            print!("{}", tables.join("\n"));
        }
    }
    ExitCode::from(code as u8)
}
