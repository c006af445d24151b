use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bf_cli::commands::{self, Golden, MuSpec};
use bf_cli::config::{parse_coeffs, parse_dimensions, Backend, RunConfig, RunReport, THREADS_VAR};
use bf_cli::{CliError, Outcome, Result};
use bf_core::loops::{Family, Parity};
use bf_numeric::Tolerances;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bfcohom", version, about = "Symbolic and numeric checks for BF theory and its loop observables")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// JSON file overriding numeric tolerances (kebab-case keys).
    #[arg(long, global = true)]
    tolerances: Option<PathBuf>,
    /// Suppress the human summary on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Abstract,
    Gl2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

#[derive(Args)]
struct SeqArgs {
    /// Comma-separated λ₁, λ₂, … (rationals or parameter names).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Comma-separated μ₁, μ₂, …, or `auto` for the closedness conditions.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Master equation, Laplacian, superfield variations and the BRST tower.
    VerifyMaster {
        /// Dimensions: `4`, `3..6` or `3,5`.
        #[arg(long, default_value = "3..6")]
        n: String,
        #[arg(long, value_enum, default_value = "abstract")]
        backend: BackendArg,
    },
    /// Component expansion of an observable family.
    Expand {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u32,
        #[arg(long = "K", short = 'K', default_value_t = 2)]
        order: usize,
        #[command(flatten)]
        seqs: SeqArgs,
        /// Compare against a golden snapshot.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Write the snapshot instead of comparing.
        #[arg(long, requires = "golden")]
        bless: bool,
    },
    /// `(d ± 𝛅)𝓗 = 0` at truncation order K, with the auxiliary identities.
    Closedness {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u32,
        #[arg(long = "K", short = 'K', default_value_t = 2)]
        order: usize,
        #[command(flatten)]
        seqs: SeqArgs,
    },
    /// Closedness conditions on the coefficient sequences.
    Theorem4 {
        #[arg(long, value_enum)]
        parity: ParityArg,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
    /// Holonomy of a fixture connection along a curve, and h_1..h_k at n = 3.
    Holonomy {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Gauss linking integral between a framed curve and its companion.
    Linking {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Symbolic h_1 instantiated with fixture data against the numeric h_1.
    Crosscheck {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        fixture: PathBuf,
    },
}

fn family(s: &str) -> Result<Family> {
    Ok(s.parse::<Family>()?)
}

fn mu_spec(s: &Option<String>) -> Result<MuSpec> {
    Ok(match s.as_deref() {
        None => MuSpec::Default,
        Some("auto") => MuSpec::Auto,
        Some(x) => MuSpec::Explicit(parse_coeffs(x)?),
    })
}

fn load_tolerances(path: &Option<PathBuf>) -> Result<Tolerances> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().map_err(|_| CliError::Argument(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Argument(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(RunConfig, Outcome)> {
    configure_threads()?;
    let tol = load_tolerances(&cli.tolerances)?;
    Ok(match &cli.command {
        Command::VerifyMaster { n, backend } => {
            let dims = parse_dimensions(n)?;
            let backend = match backend {
                BackendArg::Abstract => Backend::Abstract,
                BackendArg::Gl2 => Backend::Gl2,
            };
            let mut cfg = RunConfig::new("verify-master", tol);
            cfg.set("n", &dims).set("backend", backend);
            (cfg, commands::verify_master(&dims, backend)?)
        }
        Command::Expand { family: f, n, order, seqs, golden, bless } => {
            let f = family(f)?;
            let lambda = seqs.lambda.as_deref().map(parse_coeffs).transpose()?;
            let s = commands::sequences(*n, f, lambda, mu_spec(&seqs.mu)?)?;
            let mut cfg = RunConfig::new("expand", tol);
            cfg.set("family", f).set("n", n).set("order", order);
            cfg.set("lambda", bf_cli::config::coeff_strings(&s.lambda)).set("mu", bf_cli::config::coeff_strings(&s.mu));
            let text;
            let g = match golden {
                None => Golden::None,
                Some(p) if *bless => Golden::Bless(p),
                Some(p) => {
                    text = cfg.read_input(p)?;
                    Golden::Compare(p, &text)
                }
            };
            let out = commands::expand(*n, f, *order, &s, g)?;
            (cfg, out)
        }
        Command::Closedness { family: f, n, order, seqs } => {
            let f = family(f)?;
            let lambda = seqs.lambda.as_deref().map(parse_coeffs).transpose()?;
            let s = commands::sequences(*n, f, lambda, mu_spec(&seqs.mu)?)?;
            let mut cfg = RunConfig::new("closedness", tol);
            cfg.set("family", f).set("n", n).set("order", order);
            cfg.set("lambda", bf_cli::config::coeff_strings(&s.lambda)).set("mu", bf_cli::config::coeff_strings(&s.mu));
            (cfg, commands::closedness(*n, f, *order, &s)?)
        }
        Command::Theorem4 { parity, lambda, mu } => {
            let parity = match parity {
                ParityArg::Odd => Parity::Odd,
                ParityArg::Even => Parity::Even,
            };
            let lambda = parse_coeffs(lambda)?;
            let mu = mu.as_deref().map(parse_coeffs).transpose()?;
            let mut cfg = RunConfig::new("theorem4", tol);
            cfg.set("parity", parity).set("lambda", bf_cli::config::coeff_strings(&lambda));
            if let Some(m) = &mu {
                cfg.set("mu", bf_cli::config::coeff_strings(m));
            }
            (cfg, commands::theorem4(parity, lambda, mu)?)
        }
        Command::Holonomy { curve, fixture, k } => {
            let mut cfg = RunConfig::new("holonomy", tol.clone());
            cfg.set("k", k);
            let c = commands::load_curve(&mut cfg, curve, &tol)?;
            let f = commands::load_fixture(&mut cfg, fixture)?;
            let out = commands::holonomy_cmd(&c, &f, *k, &tol)?;
            (cfg, out)
        }
        Command::Linking { curve, epsilon, grid } => {
            let mut cfg = RunConfig::new("linking", tol.clone());
            cfg.set("epsilon", epsilon).set("grid", grid);
            let c = commands::load_curve(&mut cfg, curve, &tol)?;
            let out = commands::linking(&c, *epsilon, *grid, &tol)?;
            (cfg, out)
        }
        Command::Crosscheck { curve, fixture } => {
            let mut cfg = RunConfig::new("crosscheck", tol.clone());
            let c = commands::load_curve(&mut cfg, curve, &tol)?;
            let f = commands::load_fixture(&mut cfg, fixture)?;
            let out = commands::crosscheck(&c, &f, &tol)?;
            (cfg, out)
        }
    })
}

fn emit(path: Option<&Path>, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, outcome) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("bfcohom: {e}");
            return ExitCode::from(2);
        }
    };
    if !cli.quiet {
        for line in &outcome.summary {
            eprintln!("{line}");
        }
        eprintln!("{}", if outcome.passed { "PASS" } else { "FAIL" });
    }
    let passed = outcome.passed;
    if let Err(e) = emit(cli.output.as_deref(), &RunReport::new(cfg, outcome)) {
        eprintln!("bfcohom: {e}");
        return ExitCode::from(2);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
