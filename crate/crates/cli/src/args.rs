use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(
    name = "qz",
    version,
    about = "Zeros of Askey-Wilson and q-Racah polynomials and the matrices built from them"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zeros of the polynomial
    Zeros(Common),
    /// Entries of the zero-built matrix
    Matrix(Common),
    /// Eigenvalues of the matrix matched against the closed-form spectrum
    Spectrum(Common),
    /// Run every verification check
    Verify(Common),
    /// Integrate the zero flow from a perturbed equilibrium
    Flow {
        #[command(flatten)]
        common: Common,
        /// Size of the initial perturbation
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// End time (default: 0.5 / Frobenius norm of the matrix)
        #[arg(long)]
        t_end: Option<f64>,
        /// Largest step (default: t_end / 20)
        #[arg(long)]
        dt_max: Option<f64>,
    },
    /// Verify a seeded grid of random parameter sets
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of parameter sets; degrees cycle through 1..=N
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Aw,
    Racah,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(short = 'a', value_parser = parse_complex)]
    pub a: Option<Complex64>,
    #[arg(short = 'b', value_parser = parse_complex)]
    pub b: Option<Complex64>,
    #[arg(short = 'c', value_parser = parse_complex)]
    pub c: Option<Complex64>,
    #[arg(short = 'd', value_parser = parse_complex)]
    pub d: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    pub alpha: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    pub beta: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    pub gamma: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    pub delta: Option<Complex64>,
    #[arg(short = 'q', value_parser = parse_complex)]
    pub q: Complex64,
    /// Degree (maximum degree for `sweep`)
    #[arg(short = 'N')]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Override a named tolerance, e.g. `--tol spectrum=1e-5`
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    /// Record wall-clock time in the report (otherwise 0, keeping output reproducible)
    #[arg(long)]
    pub timing: bool,
}

/// Accepts `1.5`, `-2`, `0.3i`, `1+0.3i`, `2-1e-3i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let v: Complex64 = t.parse().map_err(|_| format!("`{s}` is not a real or complex number"))?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(parse_complex("1+0.3i").unwrap(), Complex64::new(1.0, 0.3));
        assert_eq!(parse_complex("2-1i").unwrap(), Complex64::new(2.0, -1.0));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("inf").is_err());
    }

    #[test]
    fn tolerance_pairs() {
        assert_eq!(parse_tol("spectrum=1e-5").unwrap(), ("spectrum".to_string(), 1e-5));
        assert!(parse_tol("spectrum").is_err());
    }
}
