//! Argument and config-file handling.
//!
//! Flags select the scenario (users, surface size or sweep, SNR or
//! sweep, coefficients), the Monte-Carlo budget, and the output path. A
//! `--config` file can supply the same settings as `key=value` lines,
//! with command-line flags taking precedence. Exactly one quantity must
//! be swept per run.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use irs_cf_core::{
    AOConfig, CoefficientVector, EvalConfig, GaussianInt, MethodId, PhaseDrawMode, SweepSpec,
    SweepVariable, SystemParams,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_USERS: usize = 2;
pub const DEFAULT_REALIZATIONS: usize = 100;
pub const DEFAULT_INITS: usize = 10;
pub const DEFAULT_RANDOM_SAMPLES: usize = 10;
pub const DEFAULT_MAX_AO_ITERS: usize = 50;

/// How the program should terminate after a failed start-up.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or settings; exit code 2.
    Usage(String),
    /// Could not read a config file; exit code 1.
    Io(String),
    /// `--help` or `--version`; print and exit 0.
    HelpOrVersion(clap::Error),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

/// Raw flag values before merging with the config file. Every scenario
/// field is optional here so that "absent" and "explicitly set" stay
/// distinguishable during the merge.
#[derive(Parser, Debug, Default, Clone)]
#[command(
    name = "irs-cf-sim",
    version,
    about = "Monte-Carlo sweeps of computation rates for surface-assisted compute-and-forward",
    after_help = "Exactly one of --sweep-m / --sweep-snr-db must be given (directly or via \
                  --config). The CSV header echoes the resolved flags; rerunning them with the \
                  same version reproduces the file byte for byte."
)]
struct RawArgs {
    /// Number of users K
    #[arg(long)]
    users: Option<usize>,

    /// Fixed number of reflecting elements M (when sweeping SNR)
    #[arg(long, conflicts_with = "sweep_m")]
    irs_elements: Option<usize>,

    /// Sweep over element counts, e.g. 4,8,16,32
    #[arg(long, value_delimiter = ',')]
    sweep_m: Option<Vec<usize>>,

    /// Fixed SNR in dB (when sweeping M)
    #[arg(long, conflicts_with = "sweep_snr_db", allow_hyphen_values = true)]
    snr_db: Option<f64>,

    /// Sweep over SNR values in dB, e.g. 0,5,10,15,20
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sweep_snr_db: Option<Vec<f64>>,

    /// Decoded integer coefficients, e.g. "1+0i,1+0i" (default all ones)
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,

    /// Methods to evaluate (comma list of ao-avg, ao-max, no-irs,
    /// rndphz-avg, rndphz-max; default all)
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,

    /// Channel realizations per sweep point
    #[arg(long)]
    realizations: Option<usize>,

    /// Optimizer starting points per realization
    #[arg(long)]
    inits: Option<usize>,

    /// Random-phase draws per realization
    #[arg(long)]
    random_samples: Option<usize>,

    /// Master seed for all random streams
    #[arg(long)]
    seed: Option<u64>,

    /// Remove the direct user-to-relay links (blocked-path scenario)
    #[arg(long)]
    no_direct_link: bool,

    /// Reuse the optimizer starting points as the random-phase draws
    /// (makes optimized-vs-random comparisons per-draw)
    #[arg(long)]
    shared_draws: bool,

    /// Maximum alternating-optimization rounds
    #[arg(long)]
    max_ao_iters: Option<usize>,

    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,

    /// Config file with key=value lines (same keys as the long flags);
    /// flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,

    /// Print progress to stderr (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Fully resolved run settings. Everything needed to reproduce a run,
/// and exactly what the CSV header echoes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub users: usize,
    pub axis: SweepAxis,
    pub coeffs: CoefficientVector,
    /// Sorted by name, deduplicated.
    pub methods: Vec<MethodId>,
    pub realizations: usize,
    pub inits: usize,
    pub random_samples: usize,
    pub seed: u64,
    pub direct_link: bool,
    pub shared_draws: bool,
    pub max_ao_iters: usize,
    pub out_path: PathBuf,
    pub format: OutputFormat,
    pub verbosity: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Sweep surface sizes at fixed SNR.
    OverM { values: Vec<usize>, snr_db: f64 },
    /// Sweep SNR (dB) at fixed surface size.
    OverSnrDb {
        values: Vec<f64>,
        num_irs_elements: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
}

/// Parse command-line arguments (and the config file they may point
/// at) into a resolved [`RunConfig`].
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = RawArgs::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::HelpOrVersion(e),
        _ => CliError::usage(one_line(&e)),
    })?;

    let mut merged = cli.clone();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config file {}: {e}", path.display())))?;
        let file = parse_config_file(&text, &path.display().to_string())?;
        merged = merge(cli, file);
    }
    resolve(merged)
}

/// First line of a clap error, without the trailing usage blurb.
fn one_line(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
    line.trim_start_matches("error: ").to_string()
}

/// Read `key=value` lines into the same shape as the raw flags. Keys
/// match the long flag names. Blank lines and `#` comments are skipped.
fn parse_config_file(text: &str, origin: &str) -> Result<RawArgs, CliError> {
    let mut out = RawArgs::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "{origin}:{}: expected key=value, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| {
            CliError::usage(format!(
                "{origin}:{}: invalid value `{value}` for {what}",
                lineno + 1
            ))
        };
        match key {
            "users" => out.users = Some(value.parse().map_err(|_| bad("users"))?),
            "irs-elements" => {
                out.irs_elements = Some(value.parse().map_err(|_| bad("irs-elements"))?)
            }
            "sweep-m" => {
                let mut v = Vec::new();
                for part in value.split(',') {
                    v.push(part.trim().parse().map_err(|_| bad("sweep-m"))?);
                }
                out.sweep_m = Some(v);
            }
            "snr-db" => out.snr_db = Some(value.parse().map_err(|_| bad("snr-db"))?),
            "sweep-snr-db" => {
                let mut v = Vec::new();
                for part in value.split(',') {
                    v.push(part.trim().parse().map_err(|_| bad("sweep-snr-db"))?);
                }
                out.sweep_snr_db = Some(v);
            }
            "coeffs" => out.coeffs = Some(value.to_string()),
            "methods" => {
                out.methods = Some(value.split(',').map(|s| s.trim().to_string()).collect())
            }
            "realizations" => {
                out.realizations = Some(value.parse().map_err(|_| bad("realizations"))?)
            }
            "inits" => out.inits = Some(value.parse().map_err(|_| bad("inits"))?),
            "random-samples" => {
                out.random_samples = Some(value.parse().map_err(|_| bad("random-samples"))?)
            }
            "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "no-direct-link" => {
                out.no_direct_link = value.parse().map_err(|_| bad("no-direct-link"))?
            }
            "shared-draws" => {
                out.shared_draws = value.parse().map_err(|_| bad("shared-draws"))?
            }
            "max-ao-iters" => {
                out.max_ao_iters = Some(value.parse().map_err(|_| bad("max-ao-iters"))?)
            }
            "out" => out.out = Some(PathBuf::from(value)),
            other => {
                return Err(CliError::usage(format!(
                    "{origin}:{}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Command-line flags win over config-file values. The two sweepable
/// quantities (surface size, SNR) merge as units: touching either form
/// of one on the command line drops both of that quantity's config-file
/// entries, so a config sweep can be pinned from the command line and
/// vice versa.
fn merge(cli: RawArgs, file: RawArgs) -> RawArgs {
    let cli_sets_m_axis = cli.irs_elements.is_some() || cli.sweep_m.is_some();
    let cli_sets_snr_axis = cli.snr_db.is_some() || cli.sweep_snr_db.is_some();
    RawArgs {
        users: cli.users.or(file.users),
        irs_elements: if cli_sets_m_axis {
            cli.irs_elements
        } else {
            file.irs_elements
        },
        sweep_m: if cli_sets_m_axis { cli.sweep_m } else { file.sweep_m },
        snr_db: if cli_sets_snr_axis { cli.snr_db } else { file.snr_db },
        sweep_snr_db: if cli_sets_snr_axis {
            cli.sweep_snr_db
        } else {
            file.sweep_snr_db
        },
        coeffs: cli.coeffs.or(file.coeffs),
        methods: cli.methods.or(file.methods),
        realizations: cli.realizations.or(file.realizations),
        inits: cli.inits.or(file.inits),
        random_samples: cli.random_samples.or(file.random_samples),
        seed: cli.seed.or(file.seed),
        no_direct_link: cli.no_direct_link || file.no_direct_link,
        shared_draws: cli.shared_draws || file.shared_draws,
        max_ao_iters: cli.max_ao_iters.or(file.max_ao_iters),
        out: cli.out.or(file.out),
        config: cli.config,
        verbose: cli.verbose,
    }
}

fn positive(what: &str, value: Option<usize>, default: usize) -> Result<usize, CliError> {
    let v = value.unwrap_or(default);
    if v < 1 {
        Err(CliError::usage(format!("{what} must be at least 1")))
    } else {
        Ok(v)
    }
}

fn resolve(args: RawArgs) -> Result<RunConfig, CliError> {
    let users = positive("--users", args.users, DEFAULT_USERS)?;
    let realizations = positive("--realizations", args.realizations, DEFAULT_REALIZATIONS)?;
    let inits = positive("--inits", args.inits, DEFAULT_INITS)?;
    let random_samples =
        positive("--random-samples", args.random_samples, DEFAULT_RANDOM_SAMPLES)?;
    let max_ao_iters = positive("--max-ao-iters", args.max_ao_iters, DEFAULT_MAX_AO_ITERS)?;

    let axis = match (args.sweep_m, args.sweep_snr_db) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "--sweep-m and --sweep-snr-db cannot both be given; pick one sweep variable",
            ))
        }
        (None, None) => {
            return Err(CliError::usage(
                "exactly one of --sweep-m and --sweep-snr-db is required",
            ))
        }
        (Some(values), None) => {
            if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::usage(
                    "--sweep-m values must be non-empty and strictly increasing",
                ));
            }
            if args.irs_elements.is_some() {
                return Err(CliError::usage(
                    "--irs-elements conflicts with --sweep-m; the surface size is swept",
                ));
            }
            let snr_db = args.snr_db.ok_or_else(|| {
                CliError::usage("--snr-db is required when sweeping over --sweep-m")
            })?;
            if !snr_db.is_finite() {
                return Err(CliError::usage("--snr-db must be finite"));
            }
            SweepAxis::OverM { values, snr_db }
        }
        (None, Some(values)) => {
            if values.is_empty()
                || values.iter().any(|v| !v.is_finite())
                || values.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(CliError::usage(
                    "--sweep-snr-db values must be finite and strictly increasing",
                ));
            }
            if args.snr_db.is_some() {
                return Err(CliError::usage(
                    "--snr-db conflicts with --sweep-snr-db; the SNR is swept",
                ));
            }
            let num_irs_elements = args.irs_elements.ok_or_else(|| {
                CliError::usage("--irs-elements is required when sweeping over --sweep-snr-db")
            })?;
            SweepAxis::OverSnrDb {
                values,
                num_irs_elements,
            }
        }
    };

    let coeffs = match &args.coeffs {
        Some(text) => parse_coeff_list(text, users)?,
        None => CoefficientVector::ones(users)
            .map_err(|e| CliError::usage(format!("--users: {e}")))?,
    };

    let methods: Vec<MethodId> = match &args.methods {
        Some(names) => {
            let mut set = BTreeSet::new();
            for name in names {
                let m: MethodId = name
                    .parse()
                    .map_err(|e| CliError::usage(format!("--methods: {e}")))?;
                set.insert(m);
            }
            set.into_iter().collect()
        }
        None => MethodId::ALL.to_vec(),
    };

    let out_path = args
        .out
        .ok_or_else(|| CliError::usage("--out is required (output CSV path)"))?;

    Ok(RunConfig {
        users,
        axis,
        coeffs,
        methods,
        realizations,
        inits,
        random_samples,
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        direct_link: !args.no_direct_link,
        shared_draws: args.shared_draws,
        max_ao_iters,
        out_path,
        format: OutputFormat::Csv,
        verbosity: args.verbose,
    })
}

/// Parse a comma-separated list of complex-integer literals of the form
/// `<int>[+|-]<int>i` (whitespace ignored), checking the count against
/// the user count.
pub fn parse_coeff_list(text: &str, users: usize) -> Result<CoefficientVector, CliError> {
    let mut entries = Vec::new();
    for part in text.split(',') {
        entries.push(parse_coeff_entry(part)?);
    }
    if entries.len() != users {
        return Err(CliError::usage(format!(
            "--coeffs has {} entries but --users is {users}",
            entries.len()
        )));
    }
    CoefficientVector::new(entries)
        .map_err(|_| CliError::usage("--coeffs must not be the all-zero vector"))
}

fn parse_coeff_entry(part: &str) -> Result<GaussianInt, CliError> {
    let malformed = || {
        CliError::usage(format!(
            "--coeffs: malformed complex-integer literal `{}` (expected like 1+0i or -2-3i)",
            part.trim()
        ))
    };
    let compact: String = part.chars().filter(|c| !c.is_whitespace()).collect();
    let body = compact.strip_suffix('i').ok_or_else(malformed)?;
    // The separating sign is the last +/- that is not the leading sign
    // of the real part.
    let split = body
        .get(1..)
        .and_then(|tail| tail.rfind(['+', '-']))
        .map(|i| i + 1)
        .ok_or_else(malformed)?;
    let re: i64 = body[..split].parse().map_err(|_| malformed())?;
    let im: i64 = body[split..].parse().map_err(|_| malformed())?;
    Ok(GaussianInt::new(re, im))
}

impl RunConfig {
    /// The flag list this configuration is equivalent to, echoed into
    /// the CSV header. Parsing it back yields this config again (with
    /// verbosity reset; progress chatter is not part of the result).
    pub fn flags_echo(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "--users {}", self.users);
        match &self.axis {
            SweepAxis::OverM { values, snr_db } => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let _ = write!(s, " --sweep-m {} --snr-db {}", list.join(","), snr_db);
            }
            SweepAxis::OverSnrDb {
                values,
                num_irs_elements,
            } => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let _ = write!(
                    s,
                    " --irs-elements {} --sweep-snr-db {}",
                    num_irs_elements,
                    list.join(",")
                );
            }
        }
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let _ = write!(
            s,
            " --coeffs {} --methods {} --realizations {} --inits {} --random-samples {} --seed {} --max-ao-iters {}",
            self.coeffs,
            methods.join(","),
            self.realizations,
            self.inits,
            self.random_samples,
            self.seed,
            self.max_ao_iters,
        );
        if !self.direct_link {
            s.push_str(" --no-direct-link");
        }
        if self.shared_draws {
            s.push_str(" --shared-draws");
        }
        let _ = write!(s, " --out {}", self.out_path.display());
        s
    }

    /// Translate into the library's sweep description.
    pub fn to_sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let (variable, base_m, base_snr_db) = match &self.axis {
            SweepAxis::OverM { values, snr_db } => (
                SweepVariable::NumIrsElements(values.clone()),
                values[0],
                *snr_db,
            ),
            SweepAxis::OverSnrDb {
                values,
                num_irs_elements,
            } => (
                SweepVariable::SnrDb(values.clone()),
                *num_irs_elements,
                values[0],
            ),
        };
        let base = SystemParams::new(
            self.users,
            base_m,
            irs_cf_core::snr_db_to_linear(base_snr_db),
            self.coeffs.clone(),
            self.direct_link,
        )
        .map_err(|e| CliError::usage(e.to_string()))?;
        let eval = EvalConfig {
            num_chnl_realz: self.realizations,
            num_init_point: self.inits,
            n_random_phase: self.random_samples,
            ao: AOConfig {
                max_ao_iters: self.max_ao_iters,
                ..AOConfig::default()
            },
            master_seed: self.seed,
            methods: self.methods.iter().copied().collect(),
            phase_draws: if self.shared_draws {
                PhaseDrawMode::Shared
            } else {
                PhaseDrawMode::Independent
            },
        };
        Ok(SweepSpec {
            base,
            variable,
            eval,
        })
    }
}
