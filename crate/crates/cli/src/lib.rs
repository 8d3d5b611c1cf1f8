//! Command-line front end: bound evaluation, quasi-perfect verification,
//! Monte Carlo simulation, exhaustive code search and desk-scale figure data.
//!
//! Every subcommand reads its parameters from an optional key-value config
//! file (`key = value` per line, `#` comments) and then from flags, which
//! override the file. Keys are the long flag names (`eps`, `delta`, `M`, `n`,
//! `D`, ...).

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod figures;
pub mod input;

pub use commands::{cmd_bound, cmd_search, cmd_simulate, cmd_verify};
pub use figures::{cmd_figure, Figure};

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Hypothesis(_) => 4,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<qpcodes::Error> for CliError {
    fn from(e: qpcodes::Error) -> Self {
        use qpcodes::Error as E;
        let msg = e.to_string();
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(msg),
            E::NotSymmetric | E::NotSymmetryPreserving | E::Dominance { .. } => CliError::Hypothesis(msg),
            E::Witness(_) => CliError::Failed(msg),
            _ => CliError::Config(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qpcodes", version, about = "Meta-converse bounds, quasi-perfect codes and exact error probabilities")]
pub struct Cli {
    /// Key-value config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Arithmetic backend; default is rational when any input is a fraction.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate lower bounds over a range of block lengths (CSV).
    Bound(BoundArgs),
    /// Classify a code as perfect / quasi-perfect and compare Pe with the bound.
    Verify(VerifyArgs),
    /// Monte Carlo error probability of a code (JSON).
    Simulate(SimulateArgs),
    /// Exhaustive search for the best binary code.
    Search(SearchArgs),
    /// Desk-scale figure data (CSV plus a gnuplot script).
    Figure(FigureArgs),
}

#[derive(Debug, Default, Args)]
pub struct BoundArgs {
    /// erasure_error | mds | metaconverse | lossy_uniform | lossy_code | jscc
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Block length(s): `4`, `2..6` or `2,3,5`.
    #[arg(long)]
    pub n: Option<String>,
    /// eq39 (binary rule, alias `binary`) | scan | erasure_limit | explicit table such as `1 1 0 0`.
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long = "D")]
    pub d: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub code: Option<String>,
    /// Source distribution for `jscc`, e.g. `1/2 3/10 1/5`.
    #[arg(long)]
    pub source: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Auxiliary output measure: auto | uniform | qstar.
    #[arg(long)]
    pub aux: Option<String>,
    #[arg(long)]
    pub psi: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// Reed-Solomon code `m,n,k` over GF(2^m).
    #[arg(long)]
    pub rs: Option<String>,
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// ml | bd
    #[arg(long)]
    pub decoder: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// channel | lossy
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long = "D")]
    pub d: Option<String>,
    #[arg(long)]
    pub budget: Option<String>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    #[arg(long)]
    pub n: Option<String>,
    /// Companion gnuplot script path (default: `<out>.gp` when `--out` is set).
    #[arg(long)]
    pub script: Option<PathBuf>,
}

/// Merged parameters of one invocation.
#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub workers: usize,
    pub trials: Option<u64>,
}

impl Settings {
    /// Builds settings from config-file text and flag values (flags win).
    pub fn from_parts(
        config_text: Option<&str>,
        flags: Vec<(&str, Option<String>)>,
        mode: Option<Mode>,
        seed: Option<u64>,
        workers: Option<usize>,
        trials: Option<u64>,
    ) -> CliResult<Self> {
        let mut values = match config_text {
            Some(text) => input::parse_key_values(text)?,
            None => BTreeMap::new(),
        };
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        let seed = match seed {
            Some(s) => Some(s),
            None => values.get("seed").map(|s| parse_field::<u64>("seed", s)).transpose()?,
        };
        let workers = match workers {
            Some(w) => w,
            None => values.get("workers").map(|s| parse_field::<usize>("workers", s)).transpose()?.unwrap_or(1),
        };
        let trials = match trials {
            Some(t) => Some(t),
            None => values.get("trials").map(|s| parse_field::<u64>("trials", s)).transpose()?,
        };
        let explicit = match mode {
            Some(m) => Some(m),
            None => match values.get("mode").map(String::as_str) {
                Some("rational") => Some(Mode::Rational),
                Some("float") => Some(Mode::Float),
                Some(other) => return Err(CliError::Config(format!("mode: expected rational or float, got `{other}`"))),
                None => None,
            },
        };
        if workers == 0 {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        let mut s = Self { values, mode: explicit.unwrap_or(Mode::Float), seed, workers, trials };
        if explicit.is_none() && s.has_fraction() {
            s.mode = Mode::Rational;
        }
        Ok(s)
    }

    /// Whether a numeric input (flag, config entry or channel file) is
    /// written as a fraction.
    fn has_fraction(&self) -> bool {
        const NUMERIC: [&str; 5] = ["eps", "delta", "D", "source", "q"];
        if NUMERIC.iter().any(|k| self.get(k).is_some_and(|v| v.contains('/'))) {
            return true;
        }
        self.get("channel")
            .and_then(|path| std::fs::read_to_string(path).ok())
            .and_then(|text| input::parse_key_values(&text).ok())
            .is_some_and(|kv| kv.iter().any(|(k, v)| k != "kind" && v.contains('/')))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key).ok_or_else(|| CliError::Config(format!("{key}: missing (pass --{key} or set it in the config file)")))
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(key: &str, text: &str) -> CliResult<T> {
    text.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse `{text}`")))
}

/// Output of one invocation: the main document and an optional companion
/// plotting script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub script: Option<String>,
}

fn flag_pairs(command: &Command) -> Vec<(&'static str, Option<String>)> {
    match command {
        Command::Bound(a) => vec![
            ("family", a.family.clone()),
            ("q", a.q.clone()),
            ("eps", a.eps.clone()),
            ("delta", a.delta.clone()),
            ("M", a.m.clone()),
            ("n", a.n.clone()),
            ("psi", a.psi.clone()),
            ("D", a.d.clone()),
            ("channel", a.channel.clone()),
            ("code", a.code.clone()),
            ("source", a.source.clone()),
        ],
        Command::Verify(a) => vec![
            ("code", a.code.clone()),
            ("channel", a.channel.clone()),
            ("q", a.q.clone()),
            ("eps", a.eps.clone()),
            ("delta", a.delta.clone()),
            ("aux", a.aux.clone()),
            ("psi", a.psi.clone()),
        ],
        Command::Simulate(a) => vec![
            ("rs", a.rs.clone()),
            ("code", a.code.clone()),
            ("channel", a.channel.clone()),
            ("eps", a.eps.clone()),
            ("delta", a.delta.clone()),
            ("decoder", a.decoder.clone()),
        ],
        Command::Search(a) => vec![
            ("n", a.n.clone()),
            ("M", a.m.clone()),
            ("channel", a.channel.clone()),
            ("eps", a.eps.clone()),
            ("delta", a.delta.clone()),
            ("objective", a.objective.clone()),
            ("D", a.d.clone()),
            ("budget", a.budget.clone()),
        ],
        Command::Figure(a) => vec![("n", a.n.clone())],
    }
}

/// Parses the configuration of `cli` and runs its subcommand.
pub fn run(cli: &Cli) -> CliResult<Output> {
    let config_text = match &cli.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let settings =
        Settings::from_parts(config_text.as_deref(), flag_pairs(&cli.command), cli.mode, cli.seed, cli.workers, cli.trials)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start {} workers: {e}", settings.workers)))?;
    pool.install(|| dispatch(cli, &settings))
}

fn dispatch(cli: &Cli, settings: &Settings) -> CliResult<Output> {
    match &cli.command {
        Command::Bound(_) => cmd_bound(settings).map(|text| Output { text, script: None }),
        Command::Verify(_) => cmd_verify(settings).map(|text| Output { text, script: None }),
        Command::Simulate(_) => cmd_simulate(settings).map(|text| Output { text, script: None }),
        Command::Search(_) => cmd_search(settings).map(|text| Output { text, script: None }),
        Command::Figure(a) => {
            let data_name = cli
                .out
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("{}.csv", a.which.name()));
            cmd_figure(settings, a.which, &data_name)
        }
    }
}

/// Convenience wrapper: parse `args` (including the program name) and run.
pub fn run_args<I, T>(args: I) -> CliResult<Output>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    run(&cli)
}
