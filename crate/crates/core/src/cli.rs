//! Run configuration and CSV reports for the `qsc` binary.
//!
//! Settings come from command-line flags and, optionally, a flat
//! `key = value` file using the flag names as keys. Flags win over the file;
//! `QSC_SEED` supplies the seed when neither sets one.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, ValueEnum};

use crate::coding::{analytic_fidelity, Protocol, SourceParam};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::{
    estimate_f1, estimate_f2, simulate_counts_with, simulate_second_step_with, CountRecord,
    DetectorConfig, FidelityEstimate, ImperfectionConfig,
};

pub const SEED_ENV: &str = "QSC_SEED";
pub const DEFAULT_ALPHA_SQ: f64 = 0.9046;
pub const DEFAULT_GRID: GridSpec = GridSpec {
    start: 0.5,
    stop: 1.0,
    steps: 11,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Fidelity table over a grid of alpha^2
    Sweep,
    /// One sweep row at a single alpha^2
    Point,
    /// Per-codeword detector counts and the P1 estimate
    Histogram,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Mode as ValueEnum>::from_str(s, true).map_err(|_| Error::Parse(format!("unknown mode {s:?}")))
    }
}

/// Inclusive, evenly spaced grid written `start:stop:steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn single(alpha_sq: f64) -> Self {
        Self {
            start: alpha_sq,
            stop: alpha_sq,
            steps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| x > 0.0 && x <= 1.0;
        if !in_range(self.start) || !in_range(self.stop) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds {}..{} must lie in (0, 1]",
                self.start, self.stop
            )));
        }
        if self.steps == 0 || self.start > self.stop {
            return Err(Error::InvalidParameter(format!("empty grid {self}")));
        }
        if self.steps == 1 && self.start != self.stop {
            return Err(Error::InvalidParameter(format!(
                "grid {self} has one step but distinct bounds"
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid must be start:stop:steps, got {s:?}"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let grid = Self {
            start: start.parse().map_err(|_| bad())?,
            stop: stop.parse().map_err(|_| bad())?,
            steps: steps.parse().map_err(|_| bad())?,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Comma-separated protocol list, e.g. `P1,P3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolSet(Vec<Protocol>);

impl ProtocolSet {
    pub fn all() -> Self {
        Self(Protocol::ALL.to_vec())
    }

    pub fn contains(&self, p: Protocol) -> bool {
        self.0.contains(&p)
    }
}

impl FromStr for ProtocolSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let p: Protocol = part.parse()?;
            if !set.contains(&p) {
                set.push(p);
            }
        }
        if set.is_empty() {
            return Err(Error::Parse("empty protocol list".into()));
        }
        // canonical column order
        set.sort_by_key(|p| Protocol::ALL.iter().position(|q| q == p));
        Ok(Self(set))
    }
}

fn parse_value<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

/// Every setting is optional so flags, file and defaults can be layered.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Settings {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Single alpha^2 (point/histogram modes)
    #[arg(long = "alpha-sq")]
    pub alpha_sq: Option<f64>,
    /// alpha^2 grid as start:stop:steps (sweep mode)
    #[arg(long, value_parser = parse_value::<GridSpec>)]
    pub grid: Option<GridSpec>,
    /// Comma-separated subset of P1,P2,P3
    #[arg(long, value_parser = parse_value::<ProtocolSet>)]
    pub protocols: Option<ProtocolSet>,
    /// Photons per codeword; 0 disables simulation in sweeps
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Detector quantum efficiency
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Dark counts per second per detector
    #[arg(long = "dark-rate")]
    pub dark_rate: Option<f64>,
    /// Interferometer fringe visibility
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Detector gate time in seconds
    #[arg(long = "gate-time")]
    pub gate_time: Option<f64>,
    /// Source photon flux in photons per second
    #[arg(long = "signal-rate")]
    pub signal_rate: Option<f64>,
    /// Relative accuracy of the P2 second-step photon matching
    #[arg(long = "count-accuracy")]
    pub count_accuracy: Option<f64>,
    /// Report D4 and D5 as one column (histogram mode)
    #[arg(long = "merge-d45")]
    pub merge_d45: Option<bool>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Settings {
    /// Parses a flat `key = value` file. Keys are flag names without dashes
    /// (`alpha-sq` or `alpha_sq`); `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim().replace('_', "-"), value.trim());
            let err = |e: String| Error::Parse(format!("line {}: {key}: {e}", lineno + 1));
            match key.as_str() {
                "mode" => s.mode = Some(parse_value(value).map_err(err)?),
                "alpha-sq" => s.alpha_sq = Some(parse_value(value).map_err(err)?),
                "grid" => s.grid = Some(parse_value(value).map_err(err)?),
                "protocols" => s.protocols = Some(parse_value(value).map_err(err)?),
                "trials" => s.trials = Some(parse_value(value).map_err(err)?),
                "seed" => s.seed = Some(parse_value(value).map_err(err)?),
                "efficiency" => s.efficiency = Some(parse_value(value).map_err(err)?),
                "dark-rate" => s.dark_rate = Some(parse_value(value).map_err(err)?),
                "visibility" => s.visibility = Some(parse_value(value).map_err(err)?),
                "gate-time" => s.gate_time = Some(parse_value(value).map_err(err)?),
                "signal-rate" => s.signal_rate = Some(parse_value(value).map_err(err)?),
                "count-accuracy" => s.count_accuracy = Some(parse_value(value).map_err(err)?),
                "merge-d45" => s.merge_d45 = Some(parse_value(value).map_err(err)?),
                "out" => s.out = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Field-wise `self.or(lower)`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            mode: self.mode.or(lower.mode),
            alpha_sq: self.alpha_sq.or(lower.alpha_sq),
            grid: self.grid.or(lower.grid),
            protocols: self.protocols.or(lower.protocols),
            trials: self.trials.or(lower.trials),
            seed: self.seed.or(lower.seed),
            efficiency: self.efficiency.or(lower.efficiency),
            dark_rate: self.dark_rate.or(lower.dark_rate),
            visibility: self.visibility.or(lower.visibility),
            gate_time: self.gate_time.or(lower.gate_time),
            signal_rate: self.signal_rate.or(lower.signal_rate),
            count_accuracy: self.count_accuracy.or(lower.count_accuracy),
            merge_d45: self.merge_d45.or(lower.merge_d45),
            out: self.out.or(lower.out),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qsc",
    version,
    about = "Three-qubit quantum source coding: fidelity sweeps and simulated photon counts"
)]
pub struct Cli {
    /// Flat key = value file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub grid: GridSpec,
    pub protocols: ProtocolSet,
    pub detector: DetectorConfig,
    pub imperfections: ImperfectionConfig,
    pub trials_per_label: u64,
    pub seed: u64,
    pub merge_d45: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Fills unset values with defaults: the typical detector and
    /// interferometer figures and one gate's worth of photons per codeword.
    pub fn resolve(settings: Settings, env_seed: Option<&str>) -> Result<Self> {
        let mode = settings.mode.unwrap_or(Mode::Sweep);
        let grid = match (mode, settings.grid, settings.alpha_sq) {
            (Mode::Sweep, Some(g), _) => g,
            (Mode::Sweep, None, Some(a)) => GridSpec::single(a),
            (Mode::Sweep, None, None) => DEFAULT_GRID,
            (_, Some(_), _) => {
                return Err(Error::Usage(format!(
                    "--grid applies to sweep mode only; use --alpha-sq for {mode:?}"
                )))
            }
            (_, None, a) => GridSpec::single(a.unwrap_or(DEFAULT_ALPHA_SQ)),
        };
        grid.validate()?;
        let typical_det = DetectorConfig::typical();
        let typical_imp = ImperfectionConfig::typical();
        let detector = DetectorConfig {
            efficiency: settings.efficiency.unwrap_or(typical_det.efficiency),
            dark_rate: settings.dark_rate.unwrap_or(typical_det.dark_rate),
            gate_time: settings.gate_time.unwrap_or(typical_det.gate_time),
            signal_rate: settings.signal_rate.unwrap_or(typical_det.signal_rate),
        };
        detector.validate()?;
        let imperfections = ImperfectionConfig {
            visibility: settings.visibility.unwrap_or(typical_imp.visibility),
            second_step_count_accuracy: settings
                .count_accuracy
                .unwrap_or(typical_imp.second_step_count_accuracy),
        };
        imperfections.validate()?;
        let seed = match (settings.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(env)) => env.trim().parse().map_err(|_| {
                Error::Parse(format!("{SEED_ENV} must be an unsigned integer, got {env:?}"))
            })?,
            (None, None) => 0,
        };
        Ok(Self {
            mode,
            grid,
            protocols: settings.protocols.unwrap_or_else(ProtocolSet::all),
            detector,
            imperfections,
            trials_per_label: settings
                .trials
                .unwrap_or_else(|| detector.photons_per_gate()),
            seed,
            merge_d45: settings.merge_d45.unwrap_or(false),
            out: settings.out,
        })
    }
}

/// Seed for the `index`-th grid point; index 0 keeps the run seed.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One alpha^2 grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub alpha_sq: f64,
    /// Closed-form fidelity per protocol, in `Protocol::ALL` order.
    pub analytic: [Option<f64>; 3],
    pub f1_sim: Option<FidelityEstimate>,
    pub f2_sim: Option<FidelityEstimate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub protocols: ProtocolSet,
    pub simulated: bool,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["alpha_sq".to_string()];
        for p in Protocol::ALL {
            if self.protocols.contains(p) {
                h.push(format!("F{}_analytic", &p.to_string()[1..]));
            }
        }
        if self.simulated {
            for p in [Protocol::P1, Protocol::P2] {
                if self.protocols.contains(p) {
                    let n = &p.to_string()[1..];
                    h.push(format!("F{n}_sim"));
                    h.push(format!("F{n}_err"));
                }
            }
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for row in &self.rows {
            let mut fields = vec![row.alpha_sq.to_string()];
            fields.extend(row.analytic.iter().flatten().map(f64::to_string));
            if self.simulated {
                for est in [row.f1_sim, row.f2_sim].into_iter().flatten() {
                    fields.push(est.value.to_string());
                    fields.push(est.std_error.to_string());
                }
            }
            w.write_record(fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    /// Parses [`SweepTable::to_csv`] output. The trial count of simulated
    /// estimates is not part of the table and comes back as zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let has = |col: &str| header.iter().any(|h| h == col);
        let protocols: Vec<Protocol> = Protocol::ALL
            .into_iter()
            .filter(|p| has(&format!("F{}_analytic", &p.to_string()[1..])))
            .collect();
        if protocols.is_empty() {
            return Err(Error::Parse("sweep table has no analytic columns".into()));
        }
        let table = SweepTable {
            protocols: ProtocolSet(protocols),
            simulated: has("F1_sim") || has("F2_sim"),
            rows: Vec::new(),
        };
        if table.header() != header {
            return Err(Error::Parse(format!("unexpected sweep header {header:?}")));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let mut values = record.iter().map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {f:?}")))
            });
            let mut next = || values.next().expect("csv rows match header width");
            let alpha_sq = next()?;
            let mut analytic = [None; 3];
            for (slot, p) in analytic.iter_mut().zip(Protocol::ALL) {
                if table.protocols.contains(p) {
                    *slot = Some(next()?);
                }
            }
            let mut sim = [None, None];
            if table.simulated {
                for (slot, p) in sim.iter_mut().zip([Protocol::P1, Protocol::P2]) {
                    if table.protocols.contains(p) {
                        *slot = Some(FidelityEstimate {
                            value: next()?,
                            std_error: next()?,
                            n_trials: 0,
                        });
                    }
                }
            }
            rows.push(SweepRow {
                alpha_sq,
                analytic,
                f1_sim: sim[0],
                f2_sim: sim[1],
            });
        }
        Ok(SweepTable { rows, ..table })
    }
}

fn sweep_point(config: &RunConfig, index: usize, alpha_sq: f64, exec: Execution) -> Result<SweepRow> {
    let param = SourceParam::from_alpha_sq(alpha_sq)?;
    let analytic = Protocol::ALL.map(|p| {
        config
            .protocols
            .contains(p)
            .then(|| analytic_fidelity(&param, p))
    });
    let wants_sim = config.trials_per_label > 0
        && (config.protocols.contains(Protocol::P1) || config.protocols.contains(Protocol::P2));
    let (mut f1_sim, mut f2_sim) = (None, None);
    if wants_sim {
        let seed = point_seed(config.seed, index);
        let first = simulate_counts_with(
            &param,
            &config.detector,
            &config.imperfections,
            config.trials_per_label,
            seed,
            exec,
        )?;
        if config.protocols.contains(Protocol::P1) {
            f1_sim = Some(estimate_f1(&first)?);
        }
        if config.protocols.contains(Protocol::P2) {
            let second = simulate_second_step_with(
                &param,
                &first,
                &config.detector,
                &config.imperfections,
                seed,
                exec,
            )?;
            f2_sim = Some(estimate_f2(&first, &second)?);
        }
    }
    Ok(SweepRow {
        alpha_sq,
        analytic,
        f1_sim,
        f2_sim,
    })
}

pub fn run_sweep(config: &RunConfig) -> Result<SweepTable> {
    run_sweep_with(config, Execution::default())
}

/// Analytic fidelities, plus simulated P1/P2 estimates when
/// `trials_per_label > 0`. Rows follow grid order.
pub fn run_sweep_with(config: &RunConfig, exec: Execution) -> Result<SweepTable> {
    config.grid.validate()?;
    let points = config.grid.points();
    let rows = exec
        .map_indexed(points.len(), |i| sweep_point(config, i, points[i], exec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        protocols: config.protocols.clone(),
        simulated: config.trials_per_label > 0 && rows.iter().any(|r| r.f1_sim.is_some() || r.f2_sim.is_some()),
        rows,
    })
}

/// Per-codeword counts with the P1 estimate as a footer row.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramReport {
    pub alpha_sq: f64,
    pub counts: CountRecord,
    pub estimate: FidelityEstimate,
}

pub const FOOTER_TAG: &str = "F1ex";

impl HistogramReport {
    /// Header `label,D0..D6`, eight codeword rows, then
    /// `F1ex,value,std_error,n_trials,F=0.933±0.006` padded to the table width.
    pub fn to_csv(&self) -> String {
        let header = self.counts.header();
        let width = header.len();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for row in self.counts.csv_rows() {
            w.write_record(row).expect("in-memory write");
        }
        let mut footer = vec![FOOTER_TAG.to_string()];
        footer.extend(self.estimate.csv_fields());
        footer.push(self.estimate.to_string());
        footer.resize(width, String::new());
        w.write_record(footer).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }

    /// Reads back counts and estimate; `alpha_sq` is not stored in the file
    /// and must be supplied.
    pub fn from_csv(text: &str, alpha_sq: f64) -> Result<Self> {
        let counts = CountRecord::from_csv(text)?;
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_reader(text.as_bytes());
        let footer = reader
            .records()
            .filter_map(std::result::Result::ok)
            .find(|r| r.get(0) == Some(FOOTER_TAG))
            .ok_or_else(|| Error::Parse("histogram has no estimate footer".into()))?;
        let fields: Vec<&str> = footer.iter().skip(1).take(3).collect();
        Ok(Self {
            alpha_sq,
            counts,
            estimate: FidelityEstimate::from_csv_fields(&fields)?,
        })
    }
}

pub fn run_histogram(config: &RunConfig) -> Result<HistogramReport> {
    run_histogram_with(config, Execution::default())
}

pub fn run_histogram_with(config: &RunConfig, exec: Execution) -> Result<HistogramReport> {
    if config.trials_per_label == 0 {
        return Err(Error::EmptyRun);
    }
    let alpha_sq = config.grid.start;
    let param = SourceParam::from_alpha_sq(alpha_sq)?;
    let counts = simulate_counts_with(
        &param,
        &config.detector,
        &config.imperfections,
        config.trials_per_label,
        config.seed,
        exec,
    )?;
    let estimate = estimate_f1(&counts)?;
    let counts = if config.merge_d45 {
        counts.merge_d45()
    } else {
        counts
    };
    Ok(HistogramReport {
        alpha_sq,
        counts,
        estimate,
    })
}

/// Runs the configured mode and returns the CSV text.
pub fn run(config: &RunConfig) -> Result<String> {
    match config.mode {
        Mode::Sweep | Mode::Point => run_sweep(config).map(|t| t.to_csv()),
        Mode::Histogram => run_histogram(config).map(|h| h.to_csv()),
    }
}
