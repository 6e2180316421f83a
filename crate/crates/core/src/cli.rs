//! `gtwc` command-line front end.
//!
//! Settings come from built-in defaults, then an optional `key = value` file
//! (`--config`), then command-line flags; later sources win. Every command writes one
//! CSV table to `--out` (stdout when absent).
//!
//! Exit codes: 0 success, 1 invalid input, 2 an optimizer run hit its iteration cap
//! (results are still written).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::baselines::{
    one_way_baseline, open_loop, open_loop_objective, FeedbackParity, OneWayConfig,
};
use crate::error::{Error, Result};
use crate::model::{
    per_use_energy, transmit_powers, ChannelParams, EncoderPair, PowerReport, Targets,
};
use crate::optimizer::{
    check_conjecture, sample_conjecture_instance, two_way_optimize, OptimizerConfig,
};
use crate::simulator::{run_exchange, MessageModel, SimConfig, SimulationReport};

#[derive(Debug, Parser)]
#[command(
    name = "gtwc",
    version,
    about = "Linear feedback coding for the Gaussian two-way channel",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Design one encoder pair and report its powers and SNRs.
    Optimize,
    /// Objective of every scheme over a grid of alpha values.
    SweepAlpha,
    /// Objective of every scheme over a grid of blocklengths.
    SweepN,
    /// Per-channel-use power breakdown of one design.
    Profile,
    /// Monte-Carlo simulation of a designed or loaded encoder pair.
    Simulate,
    /// Sample random feedback matrices and test the eigenvalue bounds.
    CheckConjecture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SchemeArg {
    OpenLoop,
    OneWay,
    #[default]
    TwoWay,
}

impl SchemeArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::OpenLoop => "open-loop",
            Self::OneWay => "one-way",
            Self::TwoWay => "two-way",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MessageArg {
    Gaussian,
    Binary,
}

/// Raw settings; every field is optional so a config file and the flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Settings {
    /// `key = value` settings file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long = "sigma1-sq", global = true)]
    pub sigma1_sq: Option<f64>,
    #[arg(long = "sigma2-sq", global = true)]
    pub sigma2_sq: Option<f64>,
    #[arg(long, global = true)]
    pub eta1: Option<f64>,
    #[arg(long, global = true)]
    pub eta2: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long = "max-outer", global = true)]
    pub max_outer: Option<usize>,
    #[arg(long = "max-inner", global = true)]
    pub max_inner: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long = "message-model", value_enum, global = true)]
    pub message_model: Option<MessageArg>,
    #[arg(long, value_enum, global = true)]
    pub baseline: Option<SchemeArg>,
    /// Parity of the echo uses in the one-way baseline.
    #[arg(long, value_enum, global = true)]
    pub parity: Option<ParityArg>,
    /// Comma-separated sweep grid (alpha values or blocklengths).
    #[arg(long, global = true)]
    pub values: Option<String>,
    /// Number of random instances for check-conjecture.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Encoder CSV to simulate instead of designing one.
    #[arg(long, global = true)]
    pub encoder: Option<PathBuf>,
    /// Where `optimize` writes the designed encoder.
    #[arg(long = "encoder-out", global = true)]
    pub encoder_out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, false)
        .map_err(|_| Error::InvalidInput(format!("invalid value '{value}' for key '{key}'")))
}

impl Settings {
    /// Parses a `key = value` file. Blank lines and `#` comments are skipped; keys may use
    /// `-` or `_`.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected key = value", lineno + 1))
            })?;
            s.set(&key.trim().replace('-', "_"), value.trim())?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n" => self.n = Some(parse_value(key, v)?),
            "sigma1_sq" => self.sigma1_sq = Some(parse_value(key, v)?),
            "sigma2_sq" => self.sigma2_sq = Some(parse_value(key, v)?),
            "eta1" => self.eta1 = Some(parse_value(key, v)?),
            "eta2" => self.eta2 = Some(parse_value(key, v)?),
            "alpha" => self.alpha = Some(parse_value(key, v)?),
            "restarts" => self.restarts = Some(parse_value(key, v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "eps" => self.eps = Some(parse_value(key, v)?),
            "max_outer" => self.max_outer = Some(parse_value(key, v)?),
            "max_inner" => self.max_inner = Some(parse_value(key, v)?),
            "trials" => self.trials = Some(parse_value(key, v)?),
            "message_model" => self.message_model = Some(parse_enum(key, v)?),
            "baseline" => self.baseline = Some(parse_enum(key, v)?),
            "parity" => self.parity = Some(parse_enum(key, v)?),
            "values" => self.values = Some(v.to_string()),
            "samples" => self.samples = Some(parse_value(key, v)?),
            "encoder" => self.encoder = Some(PathBuf::from(v)),
            "encoder_out" => self.encoder_out = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            other => return Err(Error::InvalidInput(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Fields set in `top` replace those of `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: top.$f.or(self.$f)),* } };
        }
        pick!(
            config, n, sigma1_sq, sigma2_sq, eta1, eta2, alpha, restarts, seed, eps,
            max_outer, max_inner, trials, message_model, baseline, parity, values, samples,
            encoder, encoder_out, out
        )
    }

    /// Loads the config file named by `--config` (if any) underneath these flags.
    pub fn with_file(self) -> Result<Settings> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
                })?;
                Ok(Settings::parse_file(&text)?.overlay(self))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Alpha,
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ChannelParams,
    pub targets: Targets,
    pub optimizer: OptimizerConfig,
    pub one_way: OneWayConfig,
    pub sim: SimConfig,
    pub scheme: SchemeArg,
    pub sweep: Option<Sweep>,
    pub samples: u64,
    pub encoder: Option<PathBuf>,
    pub encoder_out: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

pub const DEFAULT_ALPHA_GRID: [f64; 13] = [
    0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| parse_value::<f64>("values", t.trim()))
        .collect()
}

impl ExperimentConfig {
    pub fn resolve(s: &Settings, command: Command) -> Result<Self> {
        let params = ChannelParams::new(
            s.n.unwrap_or(7),
            s.sigma1_sq.unwrap_or(1.0),
            s.sigma2_sq.unwrap_or(0.5),
        )?;
        let targets = Targets::new(
            s.eta1.unwrap_or(10.0),
            s.eta2.unwrap_or(10.0),
            s.alpha.unwrap_or(0.8),
        )?;
        let seed = s.seed.unwrap_or(1);
        let defaults = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            eps: s.eps.unwrap_or(defaults.eps),
            max_outer: s.max_outer.unwrap_or(defaults.max_outer),
            max_inner: s.max_inner.unwrap_or(defaults.max_inner),
            restarts: s.restarts.unwrap_or(defaults.restarts),
            seed,
            fp: defaults.fp,
        };
        optimizer.validate()?;
        let one_way = OneWayConfig {
            parity: match s.parity {
                Some(ParityArg::Odd) => FeedbackParity::Odd,
                _ => FeedbackParity::Even,
            },
            seed,
            fp: defaults.fp,
        };
        let sim = SimConfig::new(s.trials.unwrap_or(1_000_000), seed).with_message_model(
            match s.message_model {
                Some(MessageArg::Binary) => MessageModel::Binary,
                _ => MessageModel::Gaussian,
            },
        );
        sim.validate()?;

        let sweep = match command {
            Command::SweepAlpha => {
                let values = match &s.values {
                    Some(v) => parse_list(v)?,
                    None => DEFAULT_ALPHA_GRID.to_vec(),
                };
                for &a in &values {
                    let t = targets.with_alpha(a)?;
                    if !t.last_use_regime(&params) {
                        return Err(Error::BelowThreshold {
                            alpha: a,
                            threshold: Targets::last_use_threshold(&params),
                        });
                    }
                }
                Some(Sweep {
                    variable: SweepVariable::Alpha,
                    values,
                })
            }
            Command::SweepN => {
                let values = match &s.values {
                    Some(v) => parse_list(v)?,
                    None => (2..=9).map(f64::from).collect(),
                };
                for &v in &values {
                    if v.fract() != 0.0 || v < 2.0 {
                        return Err(Error::InvalidInput(format!(
                            "blocklength must be an integer >= 2, got {v}"
                        )));
                    }
                }
                Some(Sweep {
                    variable: SweepVariable::N,
                    values,
                })
            }
            _ => None,
        };

        Ok(Self {
            params,
            targets,
            optimizer,
            one_way,
            sim,
            scheme: s.baseline.unwrap_or_default(),
            sweep,
            samples: s.samples.unwrap_or(1000),
            encoder: s.encoder.clone(),
            encoder_out: s.encoder_out.clone(),
            output_path: s.out.clone(),
        })
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let fixed = format!("{v:.*}", (11 - exp) as usize);
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

/// An in-memory CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Numerical(format!("csv encoding failed: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidInput(format!("cannot write to stdout: {e}"))),
    }
}

/// Encoder entries as `name,row,col,value` with 1-based indices: vectors use column 1,
/// matrices list their strictly lower entries in row-major order.
pub fn encoder_table(enc: &EncoderPair) -> Table {
    let mut t = Table::new(vec!["name", "row", "col", "value"]);
    let vector = |t: &mut Table, name: &str, v: &DVector<f64>| {
        for (k, x) in v.iter().enumerate() {
            t.push(vec![name.into(), (k + 1).to_string(), "1".into(), fmt_g(*x)]);
        }
    };
    let matrix = |t: &mut Table, name: &str, m: &DMatrix<f64>| {
        for r in 1..m.nrows() {
            for c in 0..r {
                t.push(vec![
                    name.into(),
                    (r + 1).to_string(),
                    (c + 1).to_string(),
                    fmt_g(m[(r, c)]),
                ]);
            }
        }
    };
    vector(&mut t, "g1", enc.g1());
    matrix(&mut t, "f1", enc.f1());
    vector(&mut t, "g2", enc.g2());
    matrix(&mut t, "f2", enc.f2());
    t
}

/// Reads an encoder written by [`encoder_table`].
pub fn parse_encoder_csv(text: &str) -> Result<EncoderPair> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::InvalidInput(format!("bad encoder csv: {e}")))?;
        if rec.len() != 4 {
            return Err(Error::InvalidInput("encoder csv rows need 4 fields".into()));
        }
        let row: usize = parse_value("row", &rec[1])?;
        let col: usize = parse_value("col", &rec[2])?;
        let value: f64 = parse_value("value", &rec[3])?;
        if row == 0 || col == 0 {
            return Err(Error::InvalidInput("encoder indices are 1-based".into()));
        }
        entries.push((rec[0].to_string(), row - 1, col - 1, value));
    }
    let n = entries
        .iter()
        .filter(|e| e.0 == "g1")
        .map(|e| e.1 + 1)
        .max()
        .ok_or_else(|| Error::InvalidInput("encoder csv has no g1 entries".into()))?;
    let mut g1 = DVector::zeros(n);
    let mut g2 = DVector::zeros(n);
    let mut f1 = DMatrix::zeros(n, n);
    let mut f2 = DMatrix::zeros(n, n);
    for (name, r, c, v) in entries {
        let in_range = r < n && c < n;
        match name.as_str() {
            "g1" if in_range && c == 0 => g1[r] = v,
            "g2" if in_range && c == 0 => g2[r] = v,
            "f1" if in_range && c < r => f1[(r, c)] = v,
            "f2" if in_range && c < r => f2[(r, c)] = v,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unexpected encoder entry {name}[{}, {}]",
                    r + 1,
                    c + 1
                )))
            }
        }
    }
    EncoderPair::new(g1, f1, g2, f2)
}

/// An encoder pair designed by one of the schemes, with its powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub enc: EncoderPair,
    pub powers: PowerReport,
    pub restart_index: Option<usize>,
    pub converged: bool,
}

pub fn design(
    scheme: SchemeArg,
    params: &ChannelParams,
    targets: &Targets,
    cfg: &ExperimentConfig,
) -> Result<Design> {
    match scheme {
        SchemeArg::TwoWay => {
            let r = two_way_optimize(params, targets, &cfg.optimizer)?;
            Ok(Design {
                enc: r.enc,
                powers: r.powers,
                restart_index: Some(r.restart_index),
                converged: r.converged,
            })
        }
        SchemeArg::OneWay | SchemeArg::OpenLoop => {
            let enc = if scheme == SchemeArg::OneWay {
                one_way_baseline(params, targets, &cfg.one_way)?
            } else {
                open_loop(params, targets)
            };
            let powers = transmit_powers(&enc, params, targets.alpha())?;
            Ok(Design {
                enc,
                powers,
                restart_index: None,
                converged: true,
            })
        }
    }
}

/// Output of a command: the table to write and whether an optimizer run hit its cap.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub table: Table,
    pub cap_hit: bool,
}

pub fn cmd_optimize(cfg: &ExperimentConfig) -> Result<(CommandOutput, EncoderPair)> {
    let d = design(cfg.scheme, &cfg.params, &cfg.targets, cfg)?;
    let mut t = Table::new(vec![
        "scheme", "n", "alpha", "objective", "p1", "p2", "snr1", "snr2", "restart_index",
        "converged",
    ]);
    t.push(vec![
        cfg.scheme.as_str().into(),
        cfg.params.n().to_string(),
        fmt_g(cfg.targets.alpha()),
        fmt_g(d.powers.weighted),
        fmt_g(d.powers.p1),
        fmt_g(d.powers.p2),
        fmt_g(d.powers.snr1),
        fmt_g(d.powers.snr2),
        d.restart_index.map_or(String::new(), |r| r.to_string()),
        d.converged.to_string(),
    ]);
    Ok((
        CommandOutput {
            table: t,
            cap_hit: !d.converged,
        },
        d.enc,
    ))
}

fn sweep_row(
    params: &ChannelParams,
    targets: &Targets,
    cfg: &ExperimentConfig,
) -> Result<(Vec<String>, bool)> {
    let two = design(SchemeArg::TwoWay, params, targets, cfg)?;
    let one = design(SchemeArg::OneWay, params, targets, cfg)?;
    Ok((
        vec![
            fmt_g(two.powers.weighted),
            fmt_g(open_loop_objective(params, targets)),
            fmt_g(one.powers.weighted),
        ],
        !two.converged,
    ))
}

pub fn cmd_sweep_alpha(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let values = cfg.sweep.as_ref().map_or(&DEFAULT_ALPHA_GRID[..], |s| &s.values);
    let mut t = Table::new(vec!["alpha", "obj_two_way", "obj_open_loop", "obj_one_way"]);
    let mut cap_hit = false;
    for &a in values {
        let targets = cfg.targets.with_alpha(a)?;
        let (cols, hit) = sweep_row(&cfg.params, &targets, cfg)?;
        cap_hit |= hit;
        let mut row = vec![fmt_g(a)];
        row.extend(cols);
        t.push(row);
    }
    Ok(CommandOutput { table: t, cap_hit })
}

pub fn cmd_sweep_n(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let default: Vec<f64> = (2..=9).map(f64::from).collect();
    let values = cfg.sweep.as_ref().map_or(&default, |s| &s.values);
    let mut t = Table::new(vec!["n", "obj_two_way", "obj_open_loop", "obj_one_way"]);
    let mut cap_hit = false;
    for &v in values {
        let n = v as usize;
        let params = cfg.params.with_n(n)?;
        let (cols, hit) = sweep_row(&params, &cfg.targets, cfg)?;
        cap_hit |= hit;
        let mut row = vec![n.to_string()];
        row.extend(cols);
        t.push(row);
    }
    Ok(CommandOutput { table: t, cap_hit })
}

/// Per-use energies: message parts `g[k]^2` and everything the feedback adds on top.
pub fn profile_table(enc: &EncoderPair, params: &ChannelParams) -> Table {
    let (e1, e2) = per_use_energy(enc, params);
    let mut t = Table::new(vec!["k", "g1_power", "f1_power", "g2_power", "f2_power"]);
    for k in 0..enc.n() {
        let g1 = enc.g1()[k].powi(2);
        let g2 = enc.g2()[k].powi(2);
        t.push(vec![
            (k + 1).to_string(),
            fmt_g(g1),
            fmt_g(e1[k] - g1),
            fmt_g(g2),
            fmt_g(e2[k] - g2),
        ]);
    }
    t
}

pub fn cmd_profile(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = design(cfg.scheme, &cfg.params, &cfg.targets, cfg)?;
    Ok(CommandOutput {
        table: profile_table(&d.enc, &cfg.params),
        cap_hit: !d.converged,
    })
}

pub fn simulation_table(rep: &SimulationReport, analytic: &PowerReport) -> Table {
    let mut t = Table::new(vec![
        "trials", "seed", "message_model", "p1", "emp_p1", "emp_p1_stderr", "p2", "emp_p2",
        "emp_p2_stderr", "snr1", "emp_snr1", "emp_snr1_stderr", "snr2", "emp_snr2",
        "emp_snr2_stderr", "bias1", "bias1_stderr", "bias2", "bias2_stderr", "err1",
        "err1_stderr", "err2", "err2_stderr",
    ]);
    let opt = |e: Option<crate::simulator::Estimate>| match e {
        Some(e) => [fmt_g(e.value), fmt_g(e.stderr)],
        None => [String::new(), String::new()],
    };
    let [e1, e1s] = opt(rep.err1);
    let [e2, e2s] = opt(rep.err2);
    t.push(vec![
        rep.trials.to_string(),
        rep.seed.to_string(),
        rep.message_model.as_str().into(),
        fmt_g(analytic.p1),
        fmt_g(rep.emp_p1.value),
        fmt_g(rep.emp_p1.stderr),
        fmt_g(analytic.p2),
        fmt_g(rep.emp_p2.value),
        fmt_g(rep.emp_p2.stderr),
        fmt_g(analytic.snr1),
        fmt_g(rep.emp_snr1.value),
        fmt_g(rep.emp_snr1.stderr),
        fmt_g(analytic.snr2),
        fmt_g(rep.emp_snr2.value),
        fmt_g(rep.emp_snr2.stderr),
        fmt_g(rep.bias1.value),
        fmt_g(rep.bias1.stderr),
        fmt_g(rep.bias2.value),
        fmt_g(rep.bias2.stderr),
        e1,
        e1s,
        e2,
        e2s,
    ]);
    t
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let (enc, params, cap_hit) = match &cfg.encoder {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
            })?;
            let enc = parse_encoder_csv(&text)?;
            let params = cfg.params.with_n(enc.n())?;
            (enc, params, false)
        }
        None => {
            let d = design(cfg.scheme, &cfg.params, &cfg.targets, cfg)?;
            (d.enc, cfg.params, !d.converged)
        }
    };
    let analytic = transmit_powers(&enc, &params, cfg.targets.alpha())?;
    let rep = run_exchange(&enc, &params, &cfg.sim)?;
    Ok(CommandOutput {
        table: simulation_table(&rep, &analytic),
        cap_hit,
    })
}

pub const CONJECTURE_ALPHAS: [f64; 3] = [0.4, 0.6, 0.8];

pub fn cmd_check_conjecture(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let mut t = Table::new(vec![
        "sample", "seed", "n", "alpha", "nu_min", "lower_ok", "upper_ok",
    ]);
    let seed = cfg.optimizer.seed;
    let mut violations = 0;
    for s in 0..cfg.samples {
        let inst = sample_conjecture_instance(&cfg.params, 3..=8, &CONJECTURE_ALPHAS, seed, s)?;
        let c = check_conjecture(&inst.f1, &inst.f2, &inst.params, inst.alpha)?;
        if !(c.lower_ok && c.upper_ok) {
            violations += 1;
            log::warn!("sample {s}: smallest eigenvalue {} outside the bounds", c.nu_min);
        }
        t.push(vec![
            s.to_string(),
            seed.to_string(),
            inst.params.n().to_string(),
            fmt_g(inst.alpha),
            fmt_g(c.nu_min),
            c.lower_ok.to_string(),
            c.upper_ok.to_string(),
        ]);
    }
    log::info!("{violations} of {} samples violate the bounds", cfg.samples);
    Ok(CommandOutput {
        table: t,
        cap_hit: false,
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> ExitCode {
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: the optimizer hit its iteration cap; results were written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether any optimizer run hit its iteration cap.
pub fn execute(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let settings = cli.settings.with_file()?;
    let cfg = ExperimentConfig::resolve(&settings, cli.command)?;
    let out = match cli.command {
        Command::Optimize => {
            let (out, enc) = cmd_optimize(&cfg)?;
            if let Some(p) = &cfg.encoder_out {
                write_output(Some(p), &encoder_table(&enc).to_csv()?)?;
            }
            out
        }
        Command::SweepAlpha => cmd_sweep_alpha(&cfg)?,
        Command::SweepN => cmd_sweep_n(&cfg)?,
        Command::Profile => cmd_profile(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::CheckConjecture => cmd_check_conjecture(&cfg)?,
    };
    write_output(cfg.output_path.as_deref(), &out.table.to_csv()?)?;
    Ok(out.cap_hit)
}

/// Sizes the global worker pool from `GTWC_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GTWC_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidInput(format!("GTWC_THREADS must be a positive integer, got '{v}'")))?;
    // a pool may already exist when called twice in one process; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
