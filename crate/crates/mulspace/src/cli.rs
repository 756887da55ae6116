//! Argument parsing, dispatch and output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mulspace_core::fixtures::EnsembleKind;
use mulspace_core::norms::HardyMethod;
use mulspace_core::verify::{Mode, RatioParams};

use crate::commands::{self, AtomArgs, EnsembleArgs, Family, NormArgs, Output, VerifyArgs};
use crate::config::{load_config, parse_real, Format, Overrides, RunConfig};
use crate::error::{CliError, ErrorDoc, EXIT_USAGE, EXIT_VALIDATION};

fn real(text: &str) -> Result<f64, String> {
    parse_real(text).ok_or_else(|| format!("`{text}` is not a number"))
}

#[derive(Debug, Parser)]
#[command(
    name = "mulspace",
    version,
    about = "Fourier multipliers, dyadic and uniform decompositions, and norm-equivalence experiments on FFT grids",
    after_help = "Settings are resolved as: built-in defaults, then the --config file, then flags \
                  (MULSPACE_THREADS stands in for --threads)."
)]
struct Cli {
    /// Flat `key = value` configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads, 0 = one per core; 1 gives bitwise-reproducible output [default: 0]
    #[arg(long, global = true, env = "MULSPACE_THREADS")]
    threads: Option<usize>,
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Spatial dimension, 1 or 2 [default: 1]
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Points per axis N, a power of two >= 8 [default: 4096 in 1D, 512 in 2D]
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Box half-width L; accepts multiples of pi such as `64pi` [default: 64pi in 1D, 16pi in 2D]
    #[arg(long, global = true, value_parser = real, allow_negative_numbers = true)]
    half_width: Option<f64>,
    /// Smallest dyadic scale j [default: -20]
    #[arg(long, global = true, allow_negative_numbers = true)]
    jmin: Option<i32>,
    /// Largest dyadic scale j [default: 20]
    #[arg(long, global = true, allow_negative_numbers = true)]
    jmax: Option<i32>,
    /// Dyadic cutoff transition window, in (0.5, 1] [default: 1]
    #[arg(long, global = true)]
    transition_window: Option<f64>,
    /// Lattice box radius K of the uniform partition check [default: 16]
    #[arg(long, global = true)]
    lattice_radius: Option<i64>,
    #[command(subcommand)]
    command: Option<Command>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            dim: self.dim,
            points: self.points,
            half_width: self.half_width,
            j_min: self.jmin,
            j_max: self.jmax,
            transition_window: self.transition_window,
            lattice_radius: self.lattice_radius,
            format: self.format,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HardyArg {
    Riesz,
    Maximal,
}

impl From<HardyArg> for HardyMethod {
    fn from(h: HardyArg) -> Self {
        match h {
            HardyArg::Riesz => HardyMethod::Riesz,
            HardyArg::Maximal => HardyMethod::Maximal,
        }
    }
}

/// Ensemble selection shared by `gen` and `verify`.
#[derive(Debug, Args)]
struct EnsembleOpts {
    /// band_limited, h1_atom or gaussian_mix
    #[arg(long, default_value = "band_limited")]
    kind: String,
    /// Number of members
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Ensemble seed; member i draws from stream i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frequency band of band_limited members: ball:R, box:H or annulus:R1,R2
    #[arg(long, default_value = "ball:4")]
    band: String,
    /// Atom cube side, or Gaussian width scale, in units of x
    #[arg(long, default_value = "1", value_parser = real)]
    atom_scale: f64,
}

impl EnsembleOpts {
    fn resolve(&self) -> Result<EnsembleArgs, CliError> {
        Ok(EnsembleArgs {
            kind: EnsembleKind::parse(&self.kind)?,
            count: self.count,
            seed: self.seed,
            band: commands::parse_band(&self.band)?,
            atom_scale: self.atom_scale,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure the partition-of-unity defect at random points
    PartitionCheck {
        #[arg(long, value_enum, default_value_t = Family::Dyadic)]
        family: Family,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Evaluate a norm of a stored grid function
    Norm {
        /// JSON norm descriptor, e.g. '{"family":"Besov","p":2,"q":1,"s":0.5}'
        #[arg(long)]
        spec: String,
        /// MSGF file; its grid replaces the configured one
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = HardyArg::Riesz)]
        hardy_method: HardyArg,
        /// Dyadic scales 2^l, |l| <= levels, of the maximal Hardy estimator
        #[arg(long, default_value_t = 10)]
        hardy_levels: u32,
        /// STFT x-stride in nodes [default: 1 in 1D, 4 in 2D]
        #[arg(long)]
        stft_stride: Option<usize>,
    },
    /// Condition table of the dyadic pieces of a symbol
    Check {
        /// Catalog symbol, e.g. `mihlin_poly:1`
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        s: f64,
        /// Exponent of the M^{p,1}_s column; `inf` allowed
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Kernel L1 norms, Bernstein ratios and tails per scale
    Kernel {
        #[arg(long)]
        symbol: String,
        /// Tail radii, comma separated [default: those of 4,8,16,32 below L/2]
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Direct Hörmander integral against the piecewise bound
    Hormander {
        #[arg(long)]
        symbol: String,
        /// Node offsets `k` (first axis) or `k0:k1`, comma separated [default: 2^l nodes while |y| < L/8]
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<String>,
    },
    /// Write an input ensemble as MSGF files plus manifest.json
    Gen {
        #[command(flatten)]
        ensemble: EnsembleOpts,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Ratio experiment: prop32, herz16, pnorm17, embed110, toft_chain or atom_transfer
    Verify {
        #[arg(long)]
        mode: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "1")]
        q: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        /// Symbol for the piece modes (herz16, pnorm17) and atom_transfer
        #[arg(long)]
        symbol: Option<String>,
        #[command(flatten)]
        ensemble: EnsembleOpts,
        /// atom_transfer: atom cube sides, comma separated
        #[arg(long, value_delimiter = ',', value_parser = real)]
        atom_scales: Vec<f64>,
        /// atom_transfer: dyadic scales of the maximal Hardy estimator
        #[arg(long, default_value_t = 10)]
        hardy_levels: u32,
    },
    /// L2 operator norm by power iteration
    Opnorm {
        #[arg(long)]
        symbol: String,
        /// Minimum number of power steps (at least 16)
        #[arg(long, default_value_t = 64)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::PartitionCheck {
            family,
            samples,
            seed,
        } => commands::partition_check(config, *family, *samples, *seed),
        Command::Norm {
            spec,
            input,
            hardy_method,
            hardy_levels,
            stft_stride,
        } => commands::norm(
            config,
            &NormArgs {
                spec,
                input,
                hardy_method: (*hardy_method).into(),
                hardy_levels: *hardy_levels,
                stft_stride: *stft_stride,
            },
        ),
        Command::Check { symbol, s, p } => {
            commands::check(config, symbol, *s, commands::parse_p("p", p)?)
        }
        Command::Kernel { symbol, radii } => commands::kernel(config, symbol, radii),
        Command::Hormander { symbol, y } => commands::hormander(config, symbol, y),
        Command::Gen { ensemble, out } => commands::gen(config, &ensemble.resolve()?, out),
        Command::Verify {
            mode,
            p,
            q,
            s,
            symbol,
            ensemble,
            atom_scales,
            hardy_levels,
        } => {
            if mode.trim() == "atom_transfer" {
                let symbol = symbol.as_deref().ok_or_else(|| {
                    CliError::validation("symbol", "atom_transfer needs --symbol")
                })?;
                let scales = if atom_scales.is_empty() {
                    vec![ensemble.atom_scale]
                } else {
                    atom_scales.clone()
                };
                return commands::atom_transfer(
                    config,
                    &AtomArgs {
                        symbol,
                        count: ensemble.count,
                        seed: ensemble.seed,
                        scales: &scales,
                        hardy_levels: *hardy_levels,
                    },
                );
            }
            let mode = Mode::parse(mode)?;
            let params = RatioParams {
                p: commands::parse_p("p", p)?,
                q: commands::parse_p("q", q)?,
                s: *s,
            };
            commands::verify(
                config,
                &VerifyArgs {
                    mode,
                    params,
                    ensemble: ensemble.resolve()?,
                    symbol: symbol.as_deref(),
                },
            )
        }
        Command::Opnorm {
            symbol,
            iterations,
            seed,
        } => commands::opnorm(config, symbol, *iterations, *seed),
    }
}

/// Renders an output in the configured format.
pub fn render(output: &Output) -> Result<Vec<u8>, CliError> {
    match output.config.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&output.document())
                .map_err(|e| CliError::validation("report", e.to_string()))?;
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let fail = |e: csv::Error| CliError::validation("format", e.to_string());
            w.write_record(&output.table.header).map_err(fail)?;
            for row in &output.table.rows {
                w.write_record(row).map_err(fail)?;
            }
            w.into_inner()
                .map_err(|e| CliError::validation("format", e.to_string()))
        }
    }
}

fn execute(cli: &Cli) -> Result<(Output, Vec<u8>), CliError> {
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| CliError::Usage("no subcommand given; see `mulspace --help`".into()))?;
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => Overrides::default(),
    };
    let overrides = file.merge(cli.overrides());
    let config = RunConfig::resolve(&overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(overrides.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::validation("threads", e.to_string()))?;
    let output = pool.install(|| dispatch(command, &config))?;
    let bytes = render(&output)?;
    Ok((output, bytes))
}

/// The argument a clap error refers to, without dashes and with `_` for `-`.
fn clap_field(e: &clap::Error) -> String {
    match e.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(arg)) => {
            let name = arg.split_whitespace().next().unwrap_or(arg);
            let name = name.split('=').next().unwrap_or(name);
            name.trim_start_matches('-').replace('-', "_")
        }
        _ => "argv".into(),
    }
}

fn write_error(stderr: &mut dyn Write, err: &CliError) {
    let doc = ErrorDoc {
        error: &err.to_string(),
        field: err.field(),
    };
    let _ = writeln!(
        stderr,
        "{}",
        serde_json::to_string(&doc).expect("error serializes")
    );
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
                _ => {
                    let message = e.render().to_string();
                    let message = message
                        .lines()
                        .next()
                        .unwrap_or("")
                        .trim_start_matches("error: ");
                    write_error(stderr, &CliError::validation(clap_field(&e), message));
                    EXIT_VALIDATION
                }
            };
        }
    };
    match execute(&cli) {
        Ok((output, bytes)) => {
            for w in &output.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            if let Err(e) = stdout.write_all(&bytes).and_then(|_| stdout.flush()) {
                write_error(stderr, &CliError::io(std::path::Path::new("<stdout>"), e));
                return crate::error::EXIT_IO;
            }
            0
        }
        Err(err) => {
            write_error(stderr, &err);
            err.exit_code()
        }
    }
}
