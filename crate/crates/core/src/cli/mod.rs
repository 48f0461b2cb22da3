//! Command-line front end. Each subcommand resolves its settings from flags,
//! then an optional TOML file, then built-in defaults, and writes CSV or JSON.

pub mod config;
pub mod output;
pub mod reports;
pub mod tables;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::classify::MonteCarlo;
use crate::dp_bounds::PrivacyBudget;
use crate::error::{Error, Result};
use crate::mechanism::{Attack, AttackScenario, Bounds, Dataset, LinearQuery, QueryKind};
use config::{default_output_path, FileConfig, Format, SweepConfig};
use reports::LaplacePair;

pub use reports::{run_classify, run_compose, run_divergence, run_mechanism};
pub use tables::{run_bounds_table, run_sweep, BoundsRow, SweepRow};

pub const DEFAULT_M_GRID: [usize; 5] = [10, 20, 30, 40, 50];
pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_SHARDS: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "chernoff-dp", version, about = "KL-DP and Chernoff-DP metrics for Laplace mechanisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and numeric divergences for one attack scenario (JSON)
    Divergence {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// KL bound, Chernoff upper bound and optimal priors per epsilon
    Bounds {
        /// Comma-separated values in (0, 1)
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Divergence table over (epsilon, delta_mu multiplier, theta)
    Sweep {
        #[command(flatten)]
        flags: SweepArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Monte Carlo error rates of the likelihood-ratio attacker and fitted exponents (JSON)
    Classify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        shards: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sequential composition of budgets, optionally verified on Laplace pairs (JSON)
    Compose {
        /// EPSILON or EPSILON,DELTA; repeatable
        #[arg(long = "budget", required = true, value_parser = parse_budget)]
        budgets: Vec<PrivacyBudget>,
        /// MU0,B0,MU1,B1; repeatable, at most 3
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<LaplacePair>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Release a query on a dataset file before and after a one-record attack (JSON)
    Mechanism {
        /// One value per line
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "sum")]
        query: QueryArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        hi: f64,
        /// Insert a record with this value
        #[arg(long, allow_hyphen_values = true, conflicts_with = "delete", required_unless_present = "delete")]
        insert: Option<f64>,
        /// Delete the record at this index
        #[arg(long)]
        delete: Option<usize>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Sweep flags; unset ones fall back to the `[sweep]` section.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub multipliers: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    #[arg(long)]
    pub sensitivity: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl SweepArgs {
    pub fn resolve(self, file: &FileConfig) -> SweepConfig {
        let f = file.sweep.clone();
        let d = SweepConfig::default();
        let format = self.format.or(f.format).unwrap_or(d.format);
        SweepConfig {
            epsilon_grid: self.epsilons.or(f.epsilon_grid).unwrap_or(d.epsilon_grid),
            delta_mu_multipliers: self.multipliers.or(f.delta_mu_multipliers).unwrap_or(d.delta_mu_multipliers),
            theta_values: self.thetas.or(f.theta_values).unwrap_or(d.theta_values),
            sensitivity: self.sensitivity.or(f.sensitivity).unwrap_or(d.sensitivity),
            output_path: self.output.or(f.output_path).unwrap_or_else(|| default_output_path("sweep", format)),
            format,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum QueryArg {
    Sum,
    Count,
}

/// Scenario flags; unset ones fall back to the `[scenario]` section.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sensitivity: Option<f64>,
    /// Absolute mean shift of the attacked release
    #[arg(long, allow_hyphen_values = true, conflicts_with = "multiplier")]
    pub delta_mu: Option<f64>,
    /// Mean shift in units of the sensitivity
    #[arg(long, allow_hyphen_values = true)]
    pub multiplier: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Prior probability of the null hypothesis
    #[arg(long)]
    pub prior_alpha: Option<f64>,
}

impl ScenarioArgs {
    /// Defaults: epsilon 0.5, sensitivity 1, shift of one sensitivity, theta 1, prior 0.5.
    pub fn resolve(&self, file: &FileConfig) -> Result<AttackScenario> {
        let f = &file.scenario;
        let epsilon = self.epsilon.or(f.epsilon).unwrap_or(0.5);
        let sensitivity = self.sensitivity.or(f.sensitivity).unwrap_or(1.0);
        let delta_mu = match (self.delta_mu, self.multiplier) {
            (Some(d), _) => d,
            (None, Some(m)) => m * sensitivity,
            (None, None) => f.delta_mu.unwrap_or(f.multiplier.unwrap_or(1.0) * sensitivity),
        };
        let theta = self.theta.or(f.theta).unwrap_or(1.0);
        let prior_alpha = self.prior_alpha.or(f.prior_alpha).unwrap_or(0.5);
        AttackScenario::new(epsilon, sensitivity, delta_mu, theta, prior_alpha)
    }
}

fn parse_numbers(s: &str, n: std::ops::RangeInclusive<usize>) -> std::result::Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if !n.contains(&v.len()) {
        return Err(format!("expected {} to {} comma-separated numbers", n.start(), n.end()));
    }
    Ok(v)
}

fn parse_budget(s: &str) -> std::result::Result<PrivacyBudget, String> {
    let v = parse_numbers(s, 1..=2)?;
    PrivacyBudget::new(v[0], v.get(1).copied().unwrap_or(0.0)).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> std::result::Result<LaplacePair, String> {
    let v = parse_numbers(s, 4..=4)?;
    let pair = LaplacePair { mu0: v[0], b0: v[1], mu1: v[2], b1: v[3] };
    pair.distributions().map_err(|e| e.to_string())?;
    Ok(pair)
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    path.as_deref().map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

fn write_report<T: Serialize>(value: &T, output: Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            output::write_json(value, output::create_output(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => output::write_json(value, std::io::stdout().lock())?,
    }
    Ok(())
}

fn write_table_file<T: Serialize>(rows: &[T], format: Format, path: &std::path::Path) -> Result<()> {
    let mut out = output::create_output(path)?;
    output::write_table(rows, format, &mut out)?;
    out.flush()?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Divergence { scenario, config, output } => {
            let s = scenario.resolve(&load_config(&config)?)?;
            write_report(&run_divergence(&s)?, output)
        }
        Command::Bounds { epsilons, config, format, output } => {
            let file = load_config(&config)?;
            let grid = epsilons.or(file.sweep.epsilon_grid).unwrap_or_else(config::default_epsilon_grid);
            let format = format.unwrap_or_default();
            let path = output.unwrap_or_else(|| default_output_path("bounds", format));
            write_table_file(&run_bounds_table(&grid)?, format, &path)
        }
        Command::Sweep { flags, config } => {
            let cfg = flags.resolve(&load_config(&config)?);
            write_table_file(&run_sweep(&cfg)?, cfg.format, &cfg.output_path)
        }
        Command::Classify { scenario, seed, m_grid, trials, shards, config, output } => {
            let file = load_config(&config)?;
            let s = scenario.resolve(&file)?;
            let c = &file.classify;
            let m_grid = m_grid.or(c.m_grid.clone()).unwrap_or_else(|| DEFAULT_M_GRID.to_vec());
            let trials = trials.or(c.trials).unwrap_or(DEFAULT_TRIALS);
            let mc = MonteCarlo::new(seed, shards.or(c.shards).unwrap_or(DEFAULT_SHARDS))?;
            let report = run_classify(&s, &m_grid, trials, &mc)?;
            let path = output.unwrap_or_else(|| default_output_path("classify", Format::Json));
            write_report(&report, Some(path))
        }
        Command::Compose { budgets, pairs, output } => write_report(&run_compose(&budgets, &pairs)?, output),
        Command::Mechanism { data, query, lo, hi, insert, delete, epsilon, theta, seed, output } => {
            let bounds = Bounds::new(lo, hi)?;
            let kind = match query {
                QueryArg::Sum => QueryKind::Sum,
                QueryArg::Count => QueryKind::Count,
            };
            let q = LinearQuery::new(kind, bounds)?;
            let file = std::fs::File::open(&data)?;
            let d = Dataset::read_from(std::io::BufReader::new(file), bounds)?;
            let attack = match (insert, delete) {
                (Some(v), _) => Attack::Insert(v),
                (None, Some(i)) => Attack::Delete(i),
                (None, None) => return Err(Error::Config("one of --insert or --delete is required".into())),
            };
            write_report(&run_mechanism(&d, &q, attack, epsilon, theta, seed)?, output)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn scenario_precedence() {
        let file = FileConfig::parse("[scenario]\nepsilon = 0.8\nmultiplier = 2.0\ntheta = 1.5\n").unwrap();
        let s = ScenarioArgs::default().resolve(&file).unwrap();
        assert_eq!((s.epsilon, s.delta_mu, s.theta), (0.8, 2.0, 1.5));
        let flags = ScenarioArgs { epsilon: Some(0.3), multiplier: Some(3.0), sensitivity: Some(2.0), ..Default::default() };
        let s = flags.resolve(&file).unwrap();
        assert_eq!((s.epsilon, s.delta_mu, s.theta), (0.3, 6.0, 1.5));
    }

    #[test]
    fn sweep_precedence() {
        let file = FileConfig::parse("[sweep]\nepsilon_grid = [0.1]\ntheta_values = [2.0]\n").unwrap();
        let flags = SweepArgs { epsilons: Some(vec![0.2, 0.3]), format: Some(Format::Json), ..Default::default() };
        let cfg = flags.resolve(&file);
        assert_eq!(cfg.epsilon_grid, vec![0.2, 0.3]);
        assert_eq!(cfg.theta_values, vec![2.0]);
        assert_eq!(cfg.delta_mu_multipliers, vec![1.0, 2.0, 3.0]);
        assert!(cfg.output_path.to_string_lossy().ends_with("sweep.json"));
    }

    #[test]
    fn budget_and_pair_parsers() {
        assert_eq!(parse_budget("1.5").unwrap(), PrivacyBudget::pure(1.5).unwrap());
        assert_eq!(parse_budget("1, 0.01").unwrap().delta, 0.01);
        assert!(parse_budget("-1").is_err());
        assert!(parse_budget("1,2,3").is_err());
        assert!(parse_pair("0,1,1,1").is_ok());
        assert!(parse_pair("0,0,1,1").is_err());
    }

    #[test]
    fn seed_is_required_for_classify() {
        assert_eq!(run_with(["chernoff-dp", "classify", "--trials", "1000"]), 2);
    }
}
