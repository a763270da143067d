use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use fracsmooth_core::exponent;
use fracsmooth_core::harness::{to_csv, SuiteOutput};
use fracsmooth_core::{
    best_approx, build_gallery, check_condition, lambda_beta_transform, modulus, run_catalog,
    summarize, EmbeddingParams, GalleryParams, ModulusConfig, MultiplierSpec, SequenceDescriptor,
    SuiteId, TrigPoly, VerifyConfig, Witness,
};

#[derive(Parser)]
#[command(
    name = "fracsmooth",
    version,
    about = "Fractional smoothness of periodic functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fractional modulus of smoothness ω_α(f, δ)_p.
    Modulus {
        /// TrigPoly as JSON text or a path to a JSON file.
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        alpha: f64,
        /// Exponent p ≥ 1 or "inf".
        #[arg(long)]
        p: String,
        #[arg(long)]
        delta: f64,
    },
    /// (λ, β)-transform of a polynomial.
    Transform {
        #[arg(long = "fn")]
        function: String,
        /// SequenceDescriptor as JSON text or a path.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        beta: f64,
    },
    /// Best approximation E_n(f)_p with its minimiser.
    Bestapprox {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: String,
    },
    /// Numeric and closed-form verdict for one embedding condition.
    EmbedCheck {
        /// EmbeddingParams as JSON text or a path.
        #[arg(long)]
        params: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        condition: u8,
    },
    /// Truncated extremal function with its metadata.
    Gallery {
        /// f1 … f12, f3p for F3'.
        #[arg(long)]
        which: String,
        /// GalleryParams as JSON text or a path; defaults apply when absent.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        trunc: usize,
    },
    /// Runs inequality suites and prints the per-suite summary.
    Verify {
        /// A suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// VerifyConfig JSON overriding default suite specs.
        #[arg(long)]
        config: Option<String>,
        /// Report destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn read_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with(['{', '[', '"']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {what} from {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {what}"))
}

fn parse_p(s: &str) -> Result<f64> {
    exponent::parse(s).ok_or_else(|| anyhow!("invalid exponent {s}"))
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Modulus {
            function,
            alpha,
            p,
            delta,
        } => {
            let f: TrigPoly = read_json(&function, "function")?;
            let v = modulus(&f, alpha, delta, parse_p(&p)?, &ModulusConfig::default())?;
            println!("{}", fracsmooth_core::harness::format_f64(v));
        }
        Command::Transform {
            function,
            lambda,
            beta,
        } => {
            let f: TrigPoly = read_json(&function, "function")?;
            let l: SequenceDescriptor = read_json(&lambda, "lambda")?;
            let g = lambda_beta_transform(&f, &MultiplierSpec::new(l, beta))?;
            print_json(&g)?;
        }
        Command::Bestapprox { function, n, p } => {
            let f: TrigPoly = read_json(&function, "function")?;
            let a = best_approx(&f, n, parse_p(&p)?)?;
            print_json(&json!({ "value": a.value, "argmin": a.argmin }))?;
        }
        Command::EmbedCheck { params, condition } => {
            let pr: EmbeddingParams = read_json(&params, "params")?;
            let rep = check_condition(&pr, condition)?;
            print_json(&rep)?;
        }
        Command::Gallery {
            which,
            params,
            trunc,
        } => {
            let w: Witness = which.parse()?;
            let pr: GalleryParams = match params {
                Some(s) => read_json(&s, "params")?,
                None => GalleryParams::default(),
            };
            print_json(&build_gallery(w, &pr, trunc)?)?;
        }
        Command::Verify {
            suite,
            config,
            out,
            format,
        } => {
            let cfg: VerifyConfig = match config {
                Some(s) => read_json(&s, "config")?,
                None => VerifyConfig::default(),
            };
            cfg.validate()?;
            let ids: Vec<SuiteId> = if suite.eq_ignore_ascii_case("all") {
                SuiteId::ALL.to_vec()
            } else {
                suite
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<fracsmooth_core::Result<_>>()?
            };
            let specs: Vec<_> = ids.iter().map(|&id| cfg.spec_for(id)).collect();
            let reports = run_catalog(&specs)?;
            let summary = summarize(&reports);
            let pass = summary.all_pass();
            let body = match format {
                Format::Csv => to_csv(&reports),
                Format::Json => {
                    serde_json::to_string_pretty(&SuiteOutput {
                        reports,
                        summary: summary.clone(),
                    })? + "\n"
                }
            };
            match out {
                Some(path) => std::fs::write(&path, body)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{body}"),
            }
            eprintln!("{}", serde_json::to_string_pretty(&summary)?);
            return Ok(pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
