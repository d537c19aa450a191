//! Experiment configuration, figure runners and CSV output.
//!
//! Configuration is plain text: `[section]` headers followed by
//! `key = value` lines, with `#` comments. Every CSV written here starts
//! with the full configuration as `#@ ` lines, so an output file can be
//! passed back as `--config` to reproduce itself.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::analysis::{
    closed_form_dt, AnalysisOptions, NoiseMode, QuadraticConstants, SinrModel, Window,
    DEFAULT_DOPPLER_ORDER,
};
use crate::channel::{ExpUScattering, DEFAULT_TAU_MAX_RATIO};
use crate::error::{HmtError, Result};
use crate::hexmod::{alpha_for_rho, LatticeParams};
use crate::montecarlo::{
    sweep, Executor, PointFlags, Receiver, SweepAxis, SweepRow, TrialConfig, DEFAULT_PATH_COUNT,
    DEFAULT_TRIALS,
};
use crate::numerics::from_db;

/// Prefix of configuration lines embedded in CSV headers.
pub const CONFIG_PREFIX: &str = "#@ ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Sweep,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig2" => Some(Figure::Fig2),
            "fig3" => Some(Figure::Fig3),
            "fig4" => Some(Figure::Fig4),
            "fig5" => Some(Figure::Fig5),
            "sweep" => Some(Figure::Sweep),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxisKind {
    SnrDb,
    Vartheta,
    RmsErrorRatio,
}

impl SweepAxisKind {
    fn name(&self) -> &'static str {
        match self {
            SweepAxisKind::SnrDb => "snr_db",
            SweepAxisKind::Vartheta => "vartheta",
            SweepAxisKind::RmsErrorRatio => "rms_error_ratio",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "snr_db" => Some(SweepAxisKind::SnrDb),
            "vartheta" => Some(SweepAxisKind::Vartheta),
            "rms_error_ratio" => Some(SweepAxisKind::RmsErrorRatio),
            _ => None,
        }
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub figure: Figure,
    pub seed: u64,

    pub symbol_period: f64,
    pub subcarrier_spacing: f64,
    pub sigma: f64,

    pub tau_rms: f64,
    pub tau_max_ratio: f64,
    pub path_count: usize,

    pub trials: usize,
    pub symbol_power: f64,
    pub snr_db: Vec<f64>,

    pub noise_mode: NoiseMode,
    pub exclude_coset2_origin: bool,
    pub eq26: QuadraticConstants,
    pub window_m: usize,
    pub window_n: usize,
    pub doppler_order: usize,

    // recorded, not used by the coefficient-domain estimator
    pub subcarriers: usize,
    pub pulse_length: usize,
    pub sample_interval: f64,
    pub carrier_frequency: f64,

    pub fig2_varthetas: Vec<f64>,
    pub fig2_half_span: f64,
    pub fig3_varthetas: Vec<f64>,
    pub fig4_vartheta: f64,
    pub fig4_ratios: Vec<f64>,
    pub fig5_varthetas: Vec<f64>,
    pub fig5_snr_db: f64,

    pub sweep_axis: SweepAxisKind,
    pub sweep_values: Vec<f64>,
    pub sweep_receivers: Vec<Receiver>,
    pub sweep_vartheta: f64,
    pub sweep_snr_db: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let (t, f) = (1e-4, 25e3);
        Self {
            figure: Figure::Fig3,
            seed: 1,
            symbol_period: t,
            subcarrier_spacing: f,
            sigma: t / (3f64.sqrt() * f),
            tau_rms: 2e-5,
            tau_max_ratio: DEFAULT_TAU_MAX_RATIO,
            path_count: DEFAULT_PATH_COUNT,
            trials: DEFAULT_TRIALS,
            symbol_power: 1.0,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            noise_mode: NoiseMode::Physical,
            exclude_coset2_origin: false,
            eq26: QuadraticConstants::Derived,
            window_m: 4,
            window_n: 4,
            doppler_order: DEFAULT_DOPPLER_ORDER,
            subcarriers: 40,
            pulse_length: 600,
            sample_interval: 1e-6,
            carrier_frequency: 5e9,
            fig2_varthetas: vec![0.1, 0.04],
            fig2_half_span: 3e-4,
            fig3_varthetas: vec![0.07, 0.2],
            fig4_vartheta: 0.2,
            fig4_ratios: vec![0.5, 0.75, 1.0, 1.25, 1.5],
            fig5_varthetas: vec![0.04, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35],
            fig5_snr_db: 20.0,
            sweep_axis: SweepAxisKind::SnrDb,
            sweep_values: vec![0.0, 10.0, 20.0, 30.0],
            sweep_receivers: vec![Receiver::Tpr, Receiver::MaxSinr, Receiver::UpperBound],
            sweep_vartheta: 0.2,
            sweep_snr_db: 20.0,
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_scalar<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{value}`"))
}

fn parse_positive(value: &str) -> std::result::Result<f64, String> {
    let v: f64 = parse_scalar(value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{value}` must be positive and finite"))
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let x: f64 = parse_scalar(s)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("`{s}` is not finite"))
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    if v.is_empty() {
        return Err("list is empty".into());
    }
    Ok(v)
}

fn parse_count(value: &str) -> std::result::Result<usize, String> {
    let v: usize = parse_scalar(value)?;
    if v == 0 {
        return Err("must be at least 1".into());
    }
    Ok(v)
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

impl ExperimentConfig {
    fn set(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        match (section, key) {
            ("run", "figure") => {
                self.figure = Figure::parse(value).ok_or(format!("unknown figure `{value}`"))?
            }
            ("run", "seed") => self.seed = parse_scalar(value)?,
            ("lattice", "symbol_period") => self.symbol_period = parse_positive(value)?,
            ("lattice", "subcarrier_spacing") => self.subcarrier_spacing = parse_positive(value)?,
            ("lattice", "sigma") => self.sigma = parse_positive(value)?,
            ("channel", "tau_rms") => self.tau_rms = parse_positive(value)?,
            ("channel", "tau_max_ratio") => self.tau_max_ratio = parse_positive(value)?,
            ("channel", "path_count") => self.path_count = parse_count(value)?,
            ("simulation", "trials") => self.trials = parse_count(value)?,
            ("simulation", "symbol_power") => self.symbol_power = parse_positive(value)?,
            ("simulation", "snr_db") => self.snr_db = parse_list(value)?,
            ("receiver", "noise_mode") => {
                self.noise_mode =
                    NoiseMode::parse(value).ok_or(format!("unknown noise mode `{value}`"))?
            }
            ("receiver", "exclude_coset2_origin") => {
                self.exclude_coset2_origin = parse_bool(value)?
            }
            ("receiver", "eq26") => {
                self.eq26 = QuadraticConstants::parse(value)
                    .ok_or(format!("unknown constant set `{value}`"))?
            }
            ("receiver", "window_m") => self.window_m = parse_scalar(value)?,
            ("receiver", "window_n") => self.window_n = parse_scalar(value)?,
            ("receiver", "doppler_order") => self.doppler_order = parse_count(value)?,
            ("provenance", "subcarriers") => self.subcarriers = parse_count(value)?,
            ("provenance", "pulse_length") => self.pulse_length = parse_count(value)?,
            ("provenance", "sample_interval") => self.sample_interval = parse_positive(value)?,
            ("provenance", "carrier_frequency") => self.carrier_frequency = parse_positive(value)?,
            ("fig2", "varthetas") => self.fig2_varthetas = parse_list(value)?,
            ("fig2", "half_span") => self.fig2_half_span = parse_positive(value)?,
            ("fig3", "varthetas") => self.fig3_varthetas = parse_list(value)?,
            ("fig4", "vartheta") => self.fig4_vartheta = parse_positive(value)?,
            ("fig4", "ratios") => self.fig4_ratios = parse_list(value)?,
            ("fig5", "varthetas") => self.fig5_varthetas = parse_list(value)?,
            ("fig5", "snr_db") => self.fig5_snr_db = parse_scalar(value)?,
            ("sweep", "axis") => {
                self.sweep_axis =
                    SweepAxisKind::parse(value).ok_or(format!("unknown sweep axis `{value}`"))?
            }
            ("sweep", "values") => self.sweep_values = parse_list(value)?,
            ("sweep", "receivers") => {
                let r: Vec<Receiver> = value
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(|s| Receiver::parse(s).ok_or(format!("unknown receiver `{s}`")))
                    .collect::<std::result::Result<_, _>>()?;
                if r.is_empty() {
                    return Err("no receivers".into());
                }
                self.sweep_receivers = r;
            }
            ("sweep", "vartheta") => self.sweep_vartheta = parse_positive(value)?,
            ("sweep", "snr_db") => self.sweep_snr_db = parse_scalar(value)?,
            _ => return Err(format!("unknown key `{key}` in section [{section}]")),
        }
        Ok(())
    }

    /// Parses configuration text on top of the defaults. If the text holds
    /// `#@ ` lines (a CSV written by this tool), only those are read.
    pub fn parse(text: &str) -> Result<Self> {
        let embedded = text
            .lines()
            .any(|l| l.starts_with(CONFIG_PREFIX.trim_end()));
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut seen: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| HmtError::Config {
                line: line_no,
                message,
            };
            let line = if embedded {
                match raw.strip_prefix(CONFIG_PREFIX.trim_end()) {
                    Some(rest) => rest.trim(),
                    None => continue,
                }
            } else {
                raw.trim()
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                    .trim();
                const SECTIONS: [&str; 11] = [
                    "run",
                    "lattice",
                    "channel",
                    "simulation",
                    "receiver",
                    "provenance",
                    "fig2",
                    "fig3",
                    "fig4",
                    "fig5",
                    "sweep",
                ];
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if section.is_empty() {
                return Err(err(format!("key `{key}` outside of any section")));
            }
            if seen.iter().any(|(s, k)| s == &section && k == key) {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
            seen.push((section.clone(), key.to_string()));
            cfg.set(&section, key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks.
    pub fn validate(&self) -> Result<()> {
        let err = |message: String| HmtError::Config { line: 0, message };
        self.lattice().map_err(|e| err(e.to_string()))?;
        if self.tau_max_ratio < crate::channel::MIN_TAU_MAX_RATIO {
            return Err(err(format!(
                "tau_max_ratio {} below the minimum {}",
                self.tau_max_ratio,
                crate::channel::MIN_TAU_MAX_RATIO
            )));
        }
        if self.fig4_ratios.iter().any(|&r| r <= 0.0) {
            return Err(err("fig4 ratios must be positive".into()));
        }
        Ok(())
    }

    /// Text form; [`ExperimentConfig::parse`] of it returns `self`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let receivers: Vec<&str> = self.sweep_receivers.iter().map(|r| r.name()).collect();
        let _ = write!(
            s,
            "[run]\nfigure = {}\nseed = {}\n\
             [lattice]\nsymbol_period = {:?}\nsubcarrier_spacing = {:?}\nsigma = {:?}\n\
             [channel]\ntau_rms = {:?}\ntau_max_ratio = {:?}\npath_count = {}\n\
             [simulation]\ntrials = {}\nsymbol_power = {:?}\nsnr_db = {}\n\
             [receiver]\nnoise_mode = {}\nexclude_coset2_origin = {}\neq26 = {}\n\
             window_m = {}\nwindow_n = {}\ndoppler_order = {}\n\
             [provenance]\nsubcarriers = {}\npulse_length = {}\nsample_interval = {:?}\ncarrier_frequency = {:?}\n\
             [fig2]\nvarthetas = {}\nhalf_span = {:?}\n\
             [fig3]\nvarthetas = {}\n\
             [fig4]\nvartheta = {:?}\nratios = {}\n\
             [fig5]\nvarthetas = {}\nsnr_db = {:?}\n\
             [sweep]\naxis = {}\nvalues = {}\nreceivers = {}\nvartheta = {:?}\nsnr_db = {:?}\n",
            self.figure.name(),
            self.seed,
            self.symbol_period,
            self.subcarrier_spacing,
            self.sigma,
            self.tau_rms,
            self.tau_max_ratio,
            self.path_count,
            self.trials,
            self.symbol_power,
            fmt_list(&self.snr_db),
            self.noise_mode.name(),
            self.exclude_coset2_origin,
            self.eq26.name(),
            self.window_m,
            self.window_n,
            self.doppler_order,
            self.subcarriers,
            self.pulse_length,
            self.sample_interval,
            self.carrier_frequency,
            fmt_list(&self.fig2_varthetas),
            self.fig2_half_span,
            fmt_list(&self.fig3_varthetas),
            self.fig4_vartheta,
            fmt_list(&self.fig4_ratios),
            fmt_list(&self.fig5_varthetas),
            self.fig5_snr_db,
            self.sweep_axis.name(),
            fmt_list(&self.sweep_values),
            receivers.join(", "),
            self.sweep_vartheta,
            self.sweep_snr_db,
        );
        s
    }

    pub fn lattice(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.symbol_period, self.subcarrier_spacing, self.sigma)
    }

    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            window: Window {
                m: self.window_m,
                n: self.window_n,
            },
            noise_mode: self.noise_mode,
            exclude_coset2_origin: self.exclude_coset2_origin,
            doppler_order: self.doppler_order,
            constants: self.eq26,
        }
    }

    /// Channel with the configured `τ_rms` and `τ_max` at spread factor
    /// `vartheta`.
    pub fn scattering(&self, vartheta: f64) -> Result<ExpUScattering> {
        ExpUScattering::from_spread_factor(vartheta, self.tau_rms, self.tau_max_ratio)
    }

    pub fn trial_config(&self, vartheta: f64, snr_db: f64) -> Result<TrialConfig> {
        let mut cfg = TrialConfig::new(self.lattice()?, self.scattering(vartheta)?);
        cfg.symbol_power = self.symbol_power;
        cfg.noise_power = self.symbol_power / from_db(snr_db);
        cfg.path_count = self.path_count;
        cfg.trials = self.trials;
        cfg.master_seed = self.seed;
        cfg.options = self.options();
        Ok(cfg)
    }

    fn other_noise_mode(&self) -> NoiseMode {
        match self.noise_mode {
            NoiseMode::Paper => NoiseMode::Physical,
            NoiseMode::Physical => NoiseMode::Paper,
        }
    }
}

/// A finished table: header comments, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Some row carries a failure flag.
    pub has_failures: bool,
}

impl CsvTable {
    fn new(columns: &[&str]) -> Self {
        Self {
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            has_failures: false,
        }
    }

    /// Full file text: config block, notes, column header, rows.
    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# hmt {} v{}",
            cfg.figure.name(),
            env!("CARGO_PKG_VERSION")
        );
        for line in cfg.render().lines() {
            let _ = writeln!(out, "{CONFIG_PREFIX}{line}");
        }
        let _ = writeln!(
            out,
            "# notice: delay truncation tau_max = {} x tau_rms is assumed when converting the spread factor vartheta = tau_max * f_d",
            cfg.tau_max_ratio
        );
        let _ = writeln!(
            out,
            "# flags: noise_mode={} exclude_coset2_origin={} eq26={} seed={}",
            cfg.noise_mode.name(),
            cfg.exclude_coset2_origin,
            cfg.eq26.name(),
            cfg.seed
        );
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[idx].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

fn db(x: f64) -> String {
    format!("{x:.6}")
}

fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

/// `0.1 → "0p10"`.
pub fn value_tag(x: f64) -> String {
    format!("{x:.2}").replace('.', "p").replace('-', "m")
}

/// Fig. 2: TPR pulse and Max-SINR receiver pulses for pulse-matched
/// channels at the configured spread factors.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let params = cfg.lattice()?;
    let alpha = alpha_for_rho(params.rho)?;
    let pulse = params.pulse();
    let mut columns = vec!["t_s".to_string(), "tpr_pulse".to_string()];
    let mut table = CsvTable::new(&[]);
    let mut dts = Vec::new();
    for &v in &cfg.fig2_varthetas {
        let s = ExpUScattering::matched_to_pulse(v, params.sigma, alpha, cfg.tau_max_ratio)?;
        let cf = closed_form_dt(params.sigma, s.tau_rms, cfg.eq26);
        table.notes.push(format!(
            "vartheta={v} tau_rms={} f_d={} dt={} fallback={}",
            sci(s.tau_rms),
            sci(s.doppler_max),
            sci(cf.dt),
            cf.fallback
        ));
        columns.push(format!("maxsinr_pulse_theta_{}", value_tag(v)));
        dts.push(cf.dt);
    }
    table
        .notes
        .push(format!("alpha={alpha} rho={}", params.rho));
    table.columns = columns;
    let ts = cfg.sample_interval;
    let half = (cfg.fig2_half_span / ts).round() as i64;
    for k in -half..=half {
        let t = k as f64 * ts;
        let mut row = vec![sci(t), sci(pulse.eval(t))];
        row.extend(dts.iter().map(|dt| sci(pulse.eval(t - dt))));
        table.rows.push(row);
    }
    Ok(table)
}

fn report_pair(rows: &[SweepRow], value: f64) -> (&SweepRow, &SweepRow) {
    let find = |r: Receiver| {
        rows.iter()
            .find(|x| x.receiver == r && x.axis_value.to_bits() == value.to_bits())
            .expect("receiver evaluated")
    };
    (find(Receiver::Tpr), find(Receiver::MaxSinr))
}

fn status(flags: &[&PointFlags]) -> (String, bool) {
    let mut all = PointFlags::default();
    for f in flags {
        all.merge(f);
    }
    (all.status(), all.is_failure())
}

/// Theoretical SINR in the other noise mode.
fn alt_theory(cfg: &ExperimentConfig, tc: &TrialConfig, dt: f64) -> f64 {
    let options = AnalysisOptions {
        noise_mode: cfg.other_noise_mode(),
        ..tc.options
    };
    SinrModel::new(tc.params, tc.scattering, options).sinr_db(tc.symbol_power, tc.noise_power, dt)
}

/// Fig. 3: SINR against `σ_c²/σ_w²` at each configured spread factor.
pub fn run_fig3(cfg: &ExperimentConfig, exec: &Executor) -> Result<CsvTable> {
    let alt = cfg.other_noise_mode().name();
    let tpr_alt = format!("tpr_theory_{alt}_db");
    let max_alt = format!("maxsinr_theory_{alt}_db");
    let mut table = CsvTable::new(&[
        "vartheta",
        "snr_db",
        "tpr_theory_db",
        "maxsinr_theory_db",
        "ub_db",
        "tpr_emp_db",
        "maxsinr_emp_db",
        "ci_db",
        &tpr_alt,
        &max_alt,
        "maxsinr_dt_s",
        "status",
    ]);
    for &v in &cfg.fig3_varthetas {
        let template = cfg.trial_config(v, cfg.snr_db[0])?;
        let rows = sweep(
            &template,
            &SweepAxis::SnrDb(cfg.snr_db.clone()),
            &[Receiver::Tpr, Receiver::MaxSinr],
            exec,
        )?;
        for &snr in &cfg.snr_db {
            let (tpr, max) = report_pair(&rows, snr);
            let (st, fail) = status(&[&tpr.report.flags, &max.report.flags]);
            table.has_failures |= fail;
            let tc = template.with_snr_db(snr);
            table.rows.push(vec![
                format!("{v}"),
                format!("{snr}"),
                db(tpr.report.theoretical_sinr_db),
                db(max.report.theoretical_sinr_db),
                db(max.report.upper_bound_db),
                db(tpr.report.empirical_sinr_db),
                db(max.report.empirical_sinr_db),
                db(tpr.report.ci_halfwidth_db.max(max.report.ci_halfwidth_db)),
                db(alt_theory(cfg, &tc, tpr.report.dt_used)),
                db(alt_theory(cfg, &tc, max.report.dt_used)),
                sci(max.report.dt_used),
                st,
            ]);
        }
    }
    Ok(table)
}

/// Fig. 4: Max-SINR receiver with a mis-estimated RMS delay spread.
pub fn run_fig4(cfg: &ExperimentConfig, exec: &Executor) -> Result<CsvTable> {
    let tags: Vec<String> = cfg.fig4_ratios.iter().map(|&r| value_tag(r)).collect();
    let mut columns = vec!["snr_db".to_string()];
    columns.extend(tags.iter().map(|t| format!("ratio_{t}_db")));
    columns.extend(tags.iter().map(|t| format!("ratio_{t}_emp_db")));
    columns.push("ci_db".into());
    columns.push("status".into());
    let mut table = CsvTable::new(&[]);
    table.columns = columns;
    table.notes.push(format!(
        "vartheta={} ; ratio = estimated tau_rms / true tau_rms",
        cfg.fig4_vartheta
    ));
    for &snr in &cfg.snr_db {
        let template = cfg.trial_config(cfg.fig4_vartheta, snr)?;
        let rows = sweep(
            &template,
            &SweepAxis::RmsErrorRatio(cfg.fig4_ratios.clone()),
            &[Receiver::MaxSinr],
            exec,
        )?;
        let (st, fail) = status(&rows.iter().map(|r| &r.report.flags).collect::<Vec<_>>());
        table.has_failures |= fail;
        let mut row = vec![format!("{snr}")];
        row.extend(rows.iter().map(|r| db(r.report.theoretical_sinr_db)));
        row.extend(rows.iter().map(|r| db(r.report.empirical_sinr_db)));
        row.push(db(rows
            .iter()
            .map(|r| r.report.ci_halfwidth_db)
            .fold(0.0, f64::max)));
        row.push(st);
        table.rows.push(row);
    }
    Ok(table)
}

/// Fig. 5: SINR against the spread factor at fixed `σ_c²/σ_w²`.
pub fn run_fig5(cfg: &ExperimentConfig, exec: &Executor) -> Result<CsvTable> {
    let alt = cfg.other_noise_mode().name();
    let tpr_alt = format!("tpr_{alt}_db");
    let max_alt = format!("maxsinr_{alt}_db");
    let mut table = CsvTable::new(&[
        "vartheta",
        "tpr_db",
        "maxsinr_db",
        "ub_db",
        "tpr_emp_db",
        "maxsinr_emp_db",
        "ci_db",
        &tpr_alt,
        &max_alt,
        "maxsinr_dt_s",
        "status",
    ]);
    table.notes.push(format!("snr_db={}", cfg.fig5_snr_db));
    let template = cfg.trial_config(cfg.fig5_varthetas[0], cfg.fig5_snr_db)?;
    let rows = sweep(
        &template,
        &SweepAxis::Vartheta(cfg.fig5_varthetas.clone()),
        &[Receiver::Tpr, Receiver::MaxSinr],
        exec,
    )?;
    for &v in &cfg.fig5_varthetas {
        let (tpr, max) = report_pair(&rows, v);
        let (st, fail) = status(&[&tpr.report.flags, &max.report.flags]);
        table.has_failures |= fail;
        let (ta, ma) = match cfg.trial_config(v, cfg.fig5_snr_db) {
            Ok(tc) => (
                alt_theory(cfg, &tc, tpr.report.dt_used),
                alt_theory(cfg, &tc, max.report.dt_used),
            ),
            Err(_) => (f64::NAN, f64::NAN),
        };
        table.rows.push(vec![
            format!("{v}"),
            db(tpr.report.theoretical_sinr_db),
            db(max.report.theoretical_sinr_db),
            db(max.report.upper_bound_db),
            db(tpr.report.empirical_sinr_db),
            db(max.report.empirical_sinr_db),
            db(tpr.report.ci_halfwidth_db.max(max.report.ci_halfwidth_db)),
            db(ta),
            db(ma),
            sci(max.report.dt_used),
            st,
        ]);
    }
    Ok(table)
}

/// Generic sweep: one row per (axis value, receiver).
pub fn run_sweep(cfg: &ExperimentConfig, exec: &Executor) -> Result<CsvTable> {
    let axis = match cfg.sweep_axis {
        SweepAxisKind::SnrDb => SweepAxis::SnrDb(cfg.sweep_values.clone()),
        SweepAxisKind::Vartheta => SweepAxis::Vartheta(cfg.sweep_values.clone()),
        SweepAxisKind::RmsErrorRatio => SweepAxis::RmsErrorRatio(cfg.sweep_values.clone()),
    };
    let template = cfg.trial_config(cfg.sweep_vartheta, cfg.sweep_snr_db)?;
    let rows = sweep(&template, &axis, &cfg.sweep_receivers, exec)?;
    let mut table = CsvTable::new(&[
        axis.name(),
        "receiver",
        "dt_s",
        "theory_db",
        "emp_db",
        "ub_db",
        "signal_power",
        "interference_power",
        "noise_power",
        "ci_db",
        "status",
    ]);
    for r in rows {
        let f = &r.report;
        table.has_failures |= f.flags.is_failure();
        table.rows.push(vec![
            format!("{}", r.axis_value),
            r.receiver.name().into(),
            sci(f.dt_used),
            db(f.theoretical_sinr_db),
            db(f.empirical_sinr_db),
            db(f.upper_bound_db),
            sci(f.signal_power),
            sci(f.interference_power),
            sci(f.noise_power),
            db(f.ci_halfwidth_db),
            f.flags.status(),
        ]);
    }
    Ok(table)
}

/// Runs the figure named in `cfg`.
pub fn run_figure(cfg: &ExperimentConfig, exec: &Executor) -> Result<CsvTable> {
    match cfg.figure {
        Figure::Fig2 => run_fig2(cfg),
        Figure::Fig3 => run_fig3(cfg, exec),
        Figure::Fig4 => run_fig4(cfg, exec),
        Figure::Fig5 => run_fig5(cfg, exec),
        Figure::Sweep => run_sweep(cfg, exec),
    }
}
