use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cartan::expr;
use cartan::families::{component_basis, TruncatedAlgebra};
use cartan::scalar;
use cartan::verify::{self, CheckReport, Manifest, Status, SuiteParams};
use cartan::{Family, FamilyConfig};

/// Exact computations in Cartan-type Lie superalgebras of vector fields.
#[derive(Parser)]
#[command(name = "cartan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// W, S, H, K, HO, KO, SHO or SKO.
    #[arg(long)]
    family: Family,
    /// Number of even indeterminates.
    #[arg(long)]
    m: usize,
    /// Number of odd indeterminates.
    #[arg(long)]
    n: usize,
    /// SKO parameter, e.g. `2/3`.
    #[arg(long, value_parser = parse_rational)]
    lambda: Option<cartan::Scalar>,
}

impl ConfigArgs {
    fn config(&self) -> cartan::Result<FamilyConfig> {
        let c = FamilyConfig::new(self.family, self.m, self.n)?;
        Ok(match &self.lambda {
            Some(l) => c.with_lambda(l.clone()),
            None => c,
        })
    }
}

/// The configuration flags of `verify`, optional because `verify all` takes
/// its configurations from the manifest.
#[derive(Args, Clone)]
struct MaybeConfigArgs {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_rational)]
    lambda: Option<cartan::Scalar>,
}

impl MaybeConfigArgs {
    fn require(self) -> Option<ConfigArgs> {
        Some(ConfigArgs {
            family: self.family?,
            m: self.m?,
            n: self.n?,
            lambda: self.lambda,
        })
    }
}

fn parse_rational(s: &str) -> Result<cartan::Scalar, String> {
    scalar::parse(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression and print its canonical form.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(allow_hyphen_values = true)]
        expression: String,
    },
    /// Print a basis of one graded component.
    Basis {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
    },
    /// Dump components and structure constants of a truncated window.
    Algebra {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1)]
        max_degree: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite, or `all` with a manifest.
    Verify {
        suite: String,
        #[command(flatten)]
        cfg: MaybeConfigArgs,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        codomain_max: Option<i64>,
        /// Manifest for `verify all`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Hom-structure pipeline and print its report.
    SolveHom {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 2)]
        codomain_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Run(cartan::Error),
}

impl From<cartan::Error> for Failure {
    fn from(e: cartan::Error) -> Self {
        Failure::Run(e)
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summary_line(r: &CheckReport) -> String {
    let label = r.config.as_ref().map(|c| c.label.as_str()).unwrap_or("-");
    format!(
        "{:<14} {:<14} {} ({} ms)",
        r.suite, label, r.status, r.elapsed_ms
    )
}

fn run(cli: Cli) -> Result<Status, Failure> {
    match cli.command {
        Command::Eval { cfg, expression } => {
            let c = cfg.config()?;
            let value = expr::eval_str(&expression, &c)?;
            println!("{}", expr::odd_header(&c));
            println!("{value}");
            Ok(Status::Pass)
        }
        Command::Basis { cfg, degree } => {
            let c = cfg.config()?;
            let comp = component_basis(&c, degree)?;
            println!("{}", expr::odd_header(&c));
            println!("# degree {degree}, dimension {}", comp.dim());
            for b in comp.basis() {
                println!("{b}");
            }
            Ok(Status::Pass)
        }
        Command::Algebra {
            cfg,
            max_degree,
            out,
        } => {
            let c = cfg.config()?;
            let alg = TruncatedAlgebra::components(&c, max_degree)?.with_structure_constants()?;
            emit(&alg.report(), out.as_deref())?;
            Ok(Status::Pass)
        }
        Command::Verify {
            suite,
            cfg,
            samples,
            seed,
            codomain_max,
            manifest,
            out,
        } => {
            if suite == "all" {
                let path = manifest
                    .ok_or_else(|| Failure::Usage("`verify all` needs --manifest".into()))?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let manifest: Manifest = toml::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let reports = verify::run_manifest(&manifest);
                for r in &reports {
                    eprintln!("{}", summary_line(r));
                }
                let status = verify::overall(&reports);
                eprintln!("overall: {status} ({} checks)", reports.len());
                emit(&reports, out.as_deref())?;
                return Ok(status);
            }
            if !verify::SUITES.contains(&suite.as_str()) {
                return Err(Failure::Run(cartan::Error::UnknownSuite(suite)));
            }
            let cfg = cfg
                .require()
                .ok_or_else(|| Failure::Usage("--family, --m and --n are required".into()))?;
            let c = cfg.config()?;
            let mut params = SuiteParams::default();
            if let Some(s) = samples {
                params.samples = s;
            }
            if let Some(s) = seed {
                params.seed = s;
            }
            if let Some(d) = codomain_max {
                params.codomain_max = d;
            }
            let report = verify::run_suite(&suite, &c, &params)?;
            eprintln!("{}", summary_line(&report));
            emit(&report, out.as_deref())?;
            Ok(report.status)
        }
        Command::SolveHom {
            cfg,
            codomain_max,
            out,
        } => {
            let c = cfg.config()?;
            let params = SuiteParams {
                codomain_max,
                ..SuiteParams::default()
            };
            let report = verify::run_suite("hom-solve", &c, &params)?;
            eprintln!("{}", summary_line(&report));
            emit(&report, out.as_deref())?;
            Ok(report.status)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
