//! Configuration resolution: defaults, then the optional config file,
//! then command-line flags (flags win).
//!
//! The config file is plain `key = value` text, one pair per line, `#`
//! comments allowed. Keys match the long flag names; see the README for
//! the full schema.

use std::path::{Path, PathBuf};

use clap::Args;

use crate::CliError;

/// Output encoding for emitted tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!(
                "format must be 'csv' or 'json', got '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Sweep parameter for the avgrate command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Alpha1,
    WeakProb,
}

impl SweepVar {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "alpha1" => Ok(SweepVar::Alpha1),
            "p" => Ok(SweepVar::WeakProb),
            other => Err(CliError::Config(format!(
                "sweep must be 'alpha1' or 'p', got '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::Alpha1 => "alpha1",
            SweepVar::WeakProb => "p",
        }
    }
}

/// All flags shared by the subcommands; every field is optional so the
/// config file can fill the gaps.
#[derive(Debug, Args)]
pub struct CliOpts {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Channel power gains, ascending, comma-separated (linear scale).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Per-state probabilities, comma-separated; must sum to 1.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Transmit power budget P (linear; noise variance 1).
    #[arg(long)]
    pub power: Option<f64>,
    /// Power fractions, row-major over (u,v); shared by both users.
    #[arg(long, value_delimiter = ',')]
    pub allocation: Option<Vec<f64>>,
    /// Optional second-user fractions (asymmetric allocation).
    #[arg(long, value_delimiter = ',')]
    pub allocation2: Option<Vec<f64>>,
    /// Output file path; stdout when omitted. Relative paths resolve
    /// under $MACBC_OUT_DIR when that variable is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Simplex grid resolution for searches.
    #[arg(long)]
    pub grid: Option<f64>,
    /// Number of envelope samples per frontier.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Include the outer-bound envelope in frontier output.
    #[arg(long)]
    pub include_outer: bool,
    /// Sweep variable for avgrate: alpha1 or p.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub sweep_start: Option<f64>,
    #[arg(long)]
    pub sweep_stop: Option<f64>,
    #[arg(long)]
    pub sweep_step: Option<f64>,
    /// Weak-state probability for alpha1 sweeps.
    #[arg(long)]
    pub p: Option<f64>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Seed for simulation and seeded checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream rates, row-major, comma-separated (simulate).
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    /// File holding a square grid of stream rates (check, simulate).
    #[arg(long)]
    pub rates_file: Option<PathBuf>,
    /// Number of seeded allocations for reduce-check.
    #[arg(long)]
    pub count: Option<usize>,
    /// Use the literal cross-state set (reduce-check comparison mode).
    #[arg(long)]
    pub strict_j2: bool,
    /// Disable the local refinement pass after the grid search.
    #[arg(long)]
    pub no_refine: bool,
}

/// Fully resolved settings with defaults applied.
#[derive(Debug, Clone)]
pub struct Settings {
    pub alphas: Vec<f64>,
    pub probs: Vec<f64>,
    pub power: f64,
    pub allocation: Option<Vec<f64>>,
    pub allocation2: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub grid: f64,
    pub samples: usize,
    pub include_outer: bool,
    pub sweep: SweepVar,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_step: f64,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub rates: Option<Vec<f64>>,
    pub rates_file: Option<PathBuf>,
    pub count: usize,
    pub strict_j2: bool,
    pub refine: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            alphas: vec![0.25, 1.0],
            probs: vec![0.4, 0.6],
            power: 10.0,
            allocation: None,
            allocation2: None,
            output: None,
            format: OutputFormat::Csv,
            grid: 0.02,
            samples: 101,
            include_outer: false,
            sweep: SweepVar::Alpha1,
            sweep_start: 0.25,
            sweep_stop: 1.0,
            sweep_step: 0.05,
            p: 0.2,
            trials: 200_000,
            seed: 7,
            rates: None,
            rates_file: None,
            count: 200,
            strict_j2: false,
            refine: true,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: invalid number '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|t| parse_f64(key, t)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::Config(format!(
            "{key}: expected true/false, got '{other}'"
        ))),
    }
}

impl Settings {
    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(opts: &CliOpts) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &opts.config {
            s.apply_file(path)?;
        }
        s.apply_flags(opts)?;
        if let (Some(out), Ok(dir)) = (&s.output, std::env::var("MACBC_OUT_DIR")) {
            if out.is_relative() && !dir.is_empty() {
                s.output = Some(Path::new(&dir).join(out));
            }
        }
        Ok(s)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.apply_pair(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(())
    }

    fn apply_pair(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "alphas" => self.alphas = parse_list(key, value)?,
            "probs" => self.probs = parse_list(key, value)?,
            "power" => self.power = parse_f64(key, value)?,
            "allocation" => self.allocation = Some(parse_list(key, value)?),
            "allocation2" => self.allocation2 = Some(parse_list(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = OutputFormat::parse(value)?,
            "grid" => self.grid = parse_f64(key, value)?,
            "samples" => {
                self.samples = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("samples: invalid count '{value}'")))?
            }
            "include-outer" => self.include_outer = parse_bool(key, value)?,
            "sweep" => self.sweep = SweepVar::parse(value)?,
            "sweep-start" => self.sweep_start = parse_f64(key, value)?,
            "sweep-stop" => self.sweep_stop = parse_f64(key, value)?,
            "sweep-step" => self.sweep_step = parse_f64(key, value)?,
            "p" => self.p = parse_f64(key, value)?,
            "trials" => {
                self.trials = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("trials: invalid count '{value}'")))?
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("seed: invalid seed '{value}'")))?
            }
            "rates" => self.rates = Some(parse_list(key, value)?),
            "rates-file" => self.rates_file = Some(PathBuf::from(value)),
            "count" => {
                self.count = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("count: invalid count '{value}'")))?
            }
            "strict-j2" => self.strict_j2 = parse_bool(key, value)?,
            "refine" => self.refine = parse_bool(key, value)?,
            other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, o: &CliOpts) -> Result<(), CliError> {
        if let Some(v) = &o.alphas {
            self.alphas = v.clone();
        }
        if let Some(v) = &o.probs {
            self.probs = v.clone();
        }
        if let Some(v) = o.power {
            self.power = v;
        }
        if let Some(v) = &o.allocation {
            self.allocation = Some(v.clone());
        }
        if let Some(v) = &o.allocation2 {
            self.allocation2 = Some(v.clone());
        }
        if let Some(v) = &o.output {
            self.output = Some(v.clone());
        }
        if let Some(v) = &o.format {
            self.format = OutputFormat::parse(v)?;
        }
        if let Some(v) = o.grid {
            self.grid = v;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if o.include_outer {
            self.include_outer = true;
        }
        if let Some(v) = &o.sweep {
            self.sweep = SweepVar::parse(v)?;
        }
        if let Some(v) = o.sweep_start {
            self.sweep_start = v;
        }
        if let Some(v) = o.sweep_stop {
            self.sweep_stop = v;
        }
        if let Some(v) = o.sweep_step {
            self.sweep_step = v;
        }
        if let Some(v) = o.p {
            self.p = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.rates {
            self.rates = Some(v.clone());
        }
        if let Some(v) = &o.rates_file {
            self.rates_file = Some(v.clone());
        }
        if let Some(v) = o.count {
            self.count = v;
        }
        if o.strict_j2 {
            self.strict_j2 = true;
        }
        if o.no_refine {
            self.refine = false;
        }
        Ok(())
    }

    /// Resolved configuration as key/value pairs, for the reproducibility
    /// header every command prints.
    pub fn describe(&self, command: &str) -> Vec<(String, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = vec![
            ("command".to_string(), command.to_string()),
            ("alphas".to_string(), list(&self.alphas)),
            ("probs".to_string(), list(&self.probs)),
            ("power".to_string(), format!("{}", self.power)),
            ("grid".to_string(), format!("{}", self.grid)),
            ("samples".to_string(), format!("{}", self.samples)),
            (
                "include-outer".to_string(),
                format!("{}", self.include_outer),
            ),
            ("sweep".to_string(), self.sweep.name().to_string()),
            ("sweep-start".to_string(), format!("{}", self.sweep_start)),
            ("sweep-stop".to_string(), format!("{}", self.sweep_stop)),
            ("sweep-step".to_string(), format!("{}", self.sweep_step)),
            ("p".to_string(), format!("{}", self.p)),
            ("trials".to_string(), format!("{}", self.trials)),
            ("seed".to_string(), format!("{}", self.seed)),
            ("count".to_string(), format!("{}", self.count)),
            ("strict-j2".to_string(), format!("{}", self.strict_j2)),
            ("refine".to_string(), format!("{}", self.refine)),
            ("format".to_string(), self.format.name().to_string()),
        ];
        if let Some(a) = &self.allocation {
            out.push(("allocation".to_string(), list(a)));
        }
        if let Some(a) = &self.allocation2 {
            out.push(("allocation2".to_string(), list(a)));
        }
        if let Some(r) = &self.rates {
            out.push(("rates".to_string(), list(r)));
        }
        if let Some(f) = &self.rates_file {
            out.push(("rates-file".to_string(), f.display().to_string()));
        }
        if let Some(o) = &self.output {
            out.push(("output".to_string(), o.display().to_string()));
        }
        out
    }
}
