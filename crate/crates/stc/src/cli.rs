use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stc_core::Complex64;

#[derive(Debug, Parser)]
#[command(name = "stc", version, about = "Numerical checks of sufficient conditions for strong close-to-convexity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one theorem instance on a disk grid.
    Check(CheckArgs),
    /// Probe max-modulus points of w on circles.
    Jack(JackArgs),
    /// Verify the log-derivative identity behind w in both directions.
    Identity(IdentityArgs),
    /// Repeat a check over a range of one parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    /// Truncation order of every series.
    #[arg(long, default_value_t = stc_core::DEFAULT_ORDER)]
    pub order: usize,
    /// Seed for randomized constructors that do not name one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct PairArgs {
    #[arg(long, value_name = "SPEC")]
    pub f: String,
    #[arg(long, value_name = "SPEC")]
    pub g: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
}

#[derive(Clone, Debug, Args)]
pub struct TheoremArgs {
    /// Theorem number, 1 to 5.
    #[arg(long)]
    pub theorem: u32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// `RE` or `RE,IM`.
    #[arg(long, default_value = "0.5", value_parser = parse_delta, allow_negative_numbers = true)]
    pub delta: Complex64,
    /// Required by theorems 3 and 5.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Used by theorem 2.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Class index; defaults to min(n1, n2) detected from f and g.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridShape {
    pub radii: usize,
    pub angles: usize,
}

#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    /// `RADIIxANGLES`.
    #[arg(long, default_value = "64x512", value_parser = parse_grid)]
    pub grid: GridShape,
    #[arg(long, default_value_t = stc_core::R_MAX)]
    pub rmax: f64,
}

#[derive(Clone, Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub theorem: TheoremArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct JackArgs {
    /// w constructor; otherwise w comes from --f, --g and --mu.
    #[arg(long, value_name = "SPEC")]
    pub w: Option<String>,
    #[arg(long, value_name = "SPEC", requires = "g", conflicts_with = "w")]
    pub f: Option<String>,
    #[arg(long, value_name = "SPEC", requires = "f")]
    pub g: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Use the reciprocal ratio g/(z f') when w comes from a pair.
    #[arg(long)]
    pub reciprocal: bool,
    /// Comma-separated circle radii.
    #[arg(long, default_value = "0.25,0.5,0.75,0.9", value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = stc_core::jack::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = stc_core::jack::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct IdentityArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Largest residual coefficient accepted.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub check: CheckArgs,
    /// One of mu, beta, gamma, delta, delta_im, rho, alpha, n.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub step: f64,
    /// Write one row per parameter value here.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

pub fn parse_delta(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("'{t}' is not a finite number"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

pub fn parse_grid(s: &str) -> Result<GridShape, String> {
    let (r, a) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid '{s}' must look like RADIIxANGLES"))?;
    let count = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a count"));
    Ok(GridShape { radii: count(r)?, angles: count(a)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_value_formats() {
        assert_eq!(parse_delta("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_delta("-1, 2e-1").unwrap(), Complex64::new(-1.0, 0.2));
        assert!(parse_delta("x").is_err());
        assert_eq!(parse_grid("64x512").unwrap(), GridShape { radii: 64, angles: 512 });
        assert!(parse_grid("64").is_err());
    }

    #[test]
    fn check_defaults() {
        let cli = Cli::try_parse_from(["stc", "check", "--theorem", "1", "--f", "identity", "--g", "identity"]).unwrap();
        let Command::Check(c) = cli.command else { panic!() };
        assert_eq!(c.grid.grid, GridShape { radii: 64, angles: 512 });
        assert_eq!(c.grid.rmax, 0.995);
        assert_eq!(c.common.order, 128);
        assert_eq!(c.theorem.delta, Complex64::new(0.5, 0.0));
        assert_eq!((c.pair.mu, c.theorem.beta, c.theorem.gamma, c.theorem.alpha), (1.0, 1.0, 1.0, 0.0));
        assert_eq!(c.theorem.rho, None);
    }
}
