//! Command-line front end: parses a potential spec and subcommand, runs the
//! corresponding pipeline and serializes the results as CSV or JSON.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};

use genairy::cli::{
    self, CliError, CurveKind, OutputFormat, RunConfig, Subcommand, WeylConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "genairy",
    about = "Resolvent and semigroup norms of generalised Airy operators -d/dx + W(x)",
    version
)]
struct Cli {
    /// JSON file holding a full run configuration (overrides the subcommand)
    #[arg(long, value_name = "PATH")]
    config: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    SchrodingerReal,
    SchrodingerImag,
    DwLog,
    DwPow2n,
}

impl From<KindArg> for CurveKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SchrodingerReal => CurveKind::SchrodingerReal,
            KindArg::SchrodingerImag => CurveKind::SchrodingerImag,
            KindArg::DwLog => CurveKind::DwLog,
            KindArg::DwPow2n => CurveKind::DwPow2n,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output path; '-' writes to standard output
    #[arg(long, short, default_value = "-")]
    output: String,
    /// Seed for the power-iteration start vector
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PotentialArg {
    /// Potential spec, family:exponent (pow:2, logpow:1.5, exppow:1)
    #[arg(long)]
    potential: String,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Check the structural assumptions on a sampled tail
    Validate {
        #[command(flatten)]
        potential: PotentialArg,
        /// Right end of the sampled interval (x0, x_max]
        #[arg(long, default_value_t = 1e3)]
        x_max: f64,
        /// Number of log-spaced sample points
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Turning point, action integral and window data per lambda
    Profile {
        #[command(flatten)]
        potential: PotentialArg,
        /// Spectral parameters, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Four estimates of log ||(A - lambda)^{-1}|| per lambda
    Resolvent {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        /// Grid points per Laplace width rho
        #[arg(long, default_value_t = 20)]
        points_per_rho: usize,
        /// Sample count for the Schur supremum
        #[arg(long, default_value_t = 2000)]
        schur_grid_n: usize,
        /// Fail instead of omitting the numeric norm when the guard trips
        #[arg(long)]
        require_numeric: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// log ||S_t|| and the norm-attaining point per t
    Semigroup {
        #[command(flatten)]
        potential: PotentialArg,
        /// Times, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pseudospectral level curves
    Levelcurve {
        /// Curve family
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Formula exponent (V_p, p, or n depending on the kind)
        #[arg(long)]
        exponent: Option<f64>,
        /// Potential spec (schrodinger-imag only)
        #[arg(long)]
        potential: Option<String>,
        /// Pseudospectral level
        #[arg(long)]
        epsilon: f64,
        /// Parameter range lo:hi
        #[arg(long, value_parser = parse_range)]
        range: (f64, f64),
        /// Number of samples
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenvalues of the comparison operator and the Weyl-exponent fit
    Weyl {
        /// Exponent p of A_p (builds H_{2p} = -d^2/dx^2 + |x|^{2p} + 1)
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4000)]
        grid_n: usize,
        /// Domain half-length; derived from the containment rule if omitted
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Laplace window integral against its leading-order value per lambda
    Laplace {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        /// Exponential weight M in the integrand e^{M f_lambda}
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("range must be lo:hi, got '{s}'"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("bad range start: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad range end: {e}"))?;
    Ok((lo, hi))
}

fn apply_output(cfg: &mut RunConfig, out: OutputArgs) {
    cfg.output_format = out.format.into();
    cfg.output_path = out.output;
    cfg.seed = out.seed;
}

fn to_run_config(command: Command) -> RunConfig {
    match command {
        Command::Validate {
            potential,
            x_max,
            samples,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Validate);
            cfg.potential = Some(potential.potential);
            cfg.x_max = x_max;
            cfg.validation_samples = samples;
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Profile {
            potential,
            lambda,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Profile);
            cfg.potential = Some(potential.potential);
            cfg.lambda_list = Some(lambda);
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Resolvent {
            potential,
            lambda,
            points_per_rho,
            schur_grid_n,
            require_numeric,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Resolvent);
            cfg.potential = Some(potential.potential);
            cfg.lambda_list = Some(lambda);
            cfg.grid.points_per_rho = points_per_rho;
            cfg.grid.schur_grid_n = schur_grid_n;
            cfg.require_numeric = require_numeric;
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Semigroup { potential, t, out } => {
            let mut cfg = RunConfig::new(Subcommand::Semigroup);
            cfg.potential = Some(potential.potential);
            cfg.t_list = Some(t);
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Levelcurve {
            kind,
            exponent,
            potential,
            epsilon,
            range,
            samples,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Levelcurve);
            cfg.curve_kind = Some(kind.into());
            cfg.curve_exponent = exponent;
            cfg.potential = potential;
            cfg.epsilon = Some(epsilon);
            cfg.range = Some(range);
            cfg.n_samples = samples;
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Weyl {
            p,
            grid_n,
            l,
            k_max,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Weyl);
            cfg.weyl = WeylConfig { p, grid_n, l, k_max };
            apply_output(&mut cfg, out);
            cfg
        }
        Command::Laplace {
            potential,
            lambda,
            m,
            out,
        } => {
            let mut cfg = RunConfig::new(Subcommand::Laplace);
            cfg.potential = Some(potential.potential);
            cfg.lambda_list = Some(lambda);
            cfg.laplace_m = m;
            apply_output(&mut cfg, out);
            cfg
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let config = if let Some(path) = args.config {
        match cli::load_config(&path) {
            Ok(cfg) => cfg,
            Err(e) => return fail(e),
        }
    } else {
        match args.command {
            Some(command) => to_run_config(command),
            None => {
                return fail(CliError::InvalidConfig(
                    "a subcommand or --config is required (see --help)".into(),
                ))
            }
        }
    };
    match cli::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.machine_line());
    ExitCode::from(2)
}
