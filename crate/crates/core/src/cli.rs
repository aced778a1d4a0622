//! Command-line front end.
//!
//! Every subcommand wraps one library operation, writes its outputs under
//! `--out-dir` and drops a `<command>.provenance.json` next to them with
//! the fully resolved arguments.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diagnostics::{
    popularity_half_life, probe_degree_correlations, probe_scatter, write_scatter_csv,
};
use crate::error::{Error, Result};
use crate::eventlog::{load_events, EventLog, IngestConfig};
use crate::experiment::{
    calibrate, evaluate, run_pipeline, ExperimentConfig, Provenance, SweepResult,
};
use crate::metrics::{write_reports_csv, DEFAULT_LIST_LEN};
use crate::probes::{random_probe, time_probe, ProbeSplit};
use crate::recommenders::{
    write_recommendations, DegreeIncrease, Method, Ranking, RecommendationList, Workspace,
    DEFAULT_EPSILON,
};
use crate::synthgen::{generate, GenParams};
use crate::time::{parse_duration, TimeUnit, Timestamp};

#[derive(Debug, Parser)]
#[command(
    name = "netrec",
    version,
    about = "Network-based recommendation with time-aware evaluation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Master seed; overrides any seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config (experiment config, generator params or ingest config).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a raw interaction file into a canonical event file.
    Ingest(IngestArgs),
    /// Generate a synthetic log with preferential attachment and aging.
    Synth(SynthArgs),
    /// Build a random or time probe split.
    Split(SplitArgs),
    /// Produce top-L recommendation lists.
    Recommend(RecommendArgs),
    /// Calibrate then evaluate (or evaluate supplied parameters).
    Evaluate(EvaluateArgs),
    /// Sweep parameter grids on calibration probes.
    Calibrate(CalibrateArgs),
    /// Probe degree correlations and popularity half-life.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Tab,
    Comma,
}

impl Delimiter {
    fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }
}

/// Where to read events from and how.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Delimiter::Tab)]
    pub delimiter: Delimiter,
    #[arg(long)]
    pub header: bool,
    /// Native time unit of the timestamps (second, minute, hour, day, step).
    #[arg(long, default_value = "step")]
    pub time_unit: String,
}

impl InputArgs {
    fn ingest_config(&self) -> Result<IngestConfig> {
        Ok(IngestConfig {
            delimiter: self.delimiter.as_char(),
            has_header: self.header,
            time_unit: self.time_unit.parse()?,
            ..IngestConfig::default()
        })
    }

    fn load(&self) -> Result<EventLog> {
        load_events(&self.input, &self.ingest_config()?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Zero-based user, item and timestamp column indices.
    #[arg(long, value_parser = parse_columns, value_name = "USER,ITEM,TIME")]
    pub columns: Option<[usize; 3]>,
    #[arg(long)]
    pub rating_column: Option<usize>,
    /// Drop records rated below this value.
    #[arg(long, requires = "rating_column")]
    pub rating_threshold: Option<f64>,
    /// Keep raw timestamps instead of shifting the earliest to 0.
    #[arg(long)]
    pub no_rebase: bool,
    #[arg(long, default_value = "events.tsv")]
    pub out: PathBuf,
}

fn parse_columns(s: &str) -> std::result::Result<[usize; 3], String> {
    let cols = s
        .split(',')
        .map(|c| c.trim().parse::<usize>().map_err(|e| format!("'{c}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    cols.try_into()
        .map_err(|v: Vec<usize>| format!("expected three column indices, got {}", v.len()))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub arrival_rate: Option<f64>,
    #[arg(long)]
    pub events_per_step: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub decay_mean: Option<f64>,
    /// Disable relevance decay.
    #[arg(long)]
    pub no_aging: bool,
    #[arg(long, default_value = "events.tsv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Time,
    Random,
}

/// Probe construction shared by `split` and `diagnose`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, value_enum, default_value_t = SplitKind::Time)]
    pub kind: SplitKind,
    /// Probe time as a fraction of T_m (values in (0, 1]) or, with
    /// `--tp-absolute`, in native units.
    #[arg(long, default_value_t = 0.9)]
    pub tp: f64,
    #[arg(long)]
    pub tp_absolute: bool,
    /// Probe span, e.g. `1d`, `1h` or a bare native count.
    #[arg(long, default_value = "1")]
    pub delta_p: String,
    /// Random probe fraction.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
}

impl ProbeArgs {
    fn probe_time(&self, log: &EventLog) -> Result<Timestamp> {
        if self.tp_absolute {
            return Ok(self.tp as Timestamp);
        }
        if !(self.tp > 0.0 && self.tp <= 1.0) {
            return Err(Error::invalid(
                "--tp must lie in (0, 1] unless --tp-absolute is set",
            ));
        }
        Ok(((self.tp * log.max_time() as f64).round() as Timestamp).max(1))
    }

    fn build(&self, log: &EventLog, seed: u64) -> Result<ProbeSplit> {
        match self.kind {
            SplitKind::Random => random_probe(log, self.fraction, seed),
            SplitKind::Time => {
                let delta = parse_duration(&self.delta_p, log.time_unit())?;
                time_probe(log, self.probe_time(log)?, delta)
            }
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Probs,
    Heats,
    Hybrid,
    Sims,
    Di,
    Tprobs,
    Thybrid,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodName::Probs)]
    pub method: MethodName,
    /// Window for temporal methods, e.g. `20d`.
    #[arg(long, default_value = "1")]
    pub tau: String,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Training cut as a fraction of T_m; all data when omitted.
    #[arg(long)]
    pub cut: Option<f64>,
    #[arg(short = 'L', long = "list-len", default_value_t = DEFAULT_LIST_LEN)]
    pub list_len: usize,
    /// Restrict to these user ids (repeatable); all active users otherwise.
    #[arg(long = "user")]
    pub users: Vec<String>,
    #[arg(long, default_value = "recommendations")]
    pub out: String,
}

impl RecommendArgs {
    fn method(&self, unit: TimeUnit) -> Result<Method> {
        let tau = || parse_duration(&self.tau, unit);
        Ok(match self.method {
            MethodName::Probs => Method::ProbS,
            MethodName::Heats => Method::HeatS,
            MethodName::Hybrid => Method::Hybrid {
                lambda: self.lambda,
            },
            MethodName::Sims => Method::SimS {
                theta: self.theta,
                lambda: self.lambda,
            },
            MethodName::Di => Method::DegreeIncrease { tau: tau()? },
            MethodName::Tprobs => Method::TProbS { tau: tau()? },
            MethodName::Thybrid => Method::THybrid {
                tau: tau()?,
                lambda: self.lambda,
            },
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long, default_value = "calibration")]
    pub out: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    /// Calibration JSON from `calibrate`; calibrates first when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "report")]
    pub out: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub probe: ProbeArgs,
    #[arg(long, default_value = "1")]
    pub tau: String,
    /// Degree floor for the half-life statistic.
    #[arg(long, default_value_t = 1)]
    pub min_degree: usize,
    #[arg(long, default_value = "diagnostics")]
    pub out: String,
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_entry() -> i32 {
    main_with_args(std::env::args_os())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    fs::create_dir_all(&g.out_dir).map_err(|e| Error::io(&g.out_dir, e))?;
    match &cli.command {
        Command::Ingest(a) => ingest(g, a),
        Command::Synth(a) => synth(g, a),
        Command::Split(a) => split(g, a),
        Command::Recommend(a) => recommend(g, a),
        Command::Calibrate(a) => calibrate_cmd(g, a),
        Command::Evaluate(a) => evaluate_cmd(g, a),
        Command::Diagnose(a) => diagnose(g, a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunRecord<'a, A: Serialize, X: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    global: &'a GlobalArgs,
    args: &'a A,
    resolved: X,
}

fn provenance<A: Serialize, X: Serialize>(
    g: &GlobalArgs,
    command: &'static str,
    args: &A,
    resolved: X,
) -> Result<()> {
    let record = RunRecord {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        global: g,
        args,
        resolved,
    };
    write_json(
        &g.out_dir.join(format!("{command}.provenance.json")),
        &record,
    )
}

fn ingest(g: &GlobalArgs, a: &IngestArgs) -> Result<()> {
    let mut cfg = match &g.config {
        Some(path) => read_toml::<IngestConfig>(path)?,
        None => a.input.ingest_config()?,
    };
    if let Some(cols) = &a.columns {
        cfg.user_column = cols[0];
        cfg.item_column = cols[1];
        cfg.timestamp_column = cols[2];
    }
    if a.rating_column.is_some() {
        cfg.rating_column = a.rating_column;
        cfg.rating_threshold = a.rating_threshold;
    }
    if a.no_rebase {
        cfg.rebase = false;
    }
    let log = load_events(&a.input.input, &cfg)?;
    let out = g.out_dir.join(&a.out);
    log.write_file(&out, b'\t')?;
    write_json(&g.out_dir.join("ingest.summary.json"), &log.summary())?;
    provenance(g, "ingest", a, &cfg)
}

fn synth(g: &GlobalArgs, a: &SynthArgs) -> Result<()> {
    let mut params = match &g.config {
        Some(path) => read_toml::<GenParams>(path)?,
        None => GenParams::default(),
    };
    if let Some(v) = a.users {
        params.n_users = v;
    }
    if let Some(v) = a.items {
        params.n_items_initial = v;
    }
    if let Some(v) = a.arrival_rate {
        params.item_arrival_rate = v;
    }
    if let Some(v) = a.events_per_step {
        params.events_per_step = v;
    }
    if let Some(v) = a.steps {
        params.total_steps = v;
    }
    if let Some(v) = a.decay_mean {
        params.decay_mean = Some(v);
    }
    if a.no_aging {
        params.decay_mean = None;
    }
    if let Some(seed) = g.seed {
        params.seed = seed;
    }
    let log = generate(&params)?;
    log.write_file(g.out_dir.join(&a.out), b'\t')?;
    write_json(&g.out_dir.join("synth.params.json"), &params)?;
    provenance(g, "synth", a, &params)
}

fn split(g: &GlobalArgs, a: &SplitArgs) -> Result<()> {
    let log = a.input.load()?;
    let seed = g.seed.unwrap_or(0);
    let split = a.probe.build(&log, seed)?;
    if split.is_empty() {
        eprintln!("warning: probe is empty; metrics on this split are undefined");
    }
    write_split_events(&g.out_dir.join("training.tsv"), &log, &split, false)?;
    write_split_events(&g.out_dir.join("probe.tsv"), &log, &split, true)?;
    let descriptor = split.descriptor();
    write_json(&g.out_dir.join("split.json"), &descriptor)?;
    provenance(g, "split", a, &descriptor)
}

fn write_split_events(path: &Path, log: &EventLog, split: &ProbeSplit, probe: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .from_writer(create(path)?);
    let mut row = |u, i, t: Timestamp| {
        w.write_record([
            log.user_id(u),
            log.item_id(i),
            &(t + log.origin()).to_string(),
        ])
    };
    if probe {
        for e in &split.probe {
            row(e.user, e.item, e.timestamp)?;
        }
    } else {
        let times: HashMap<(u32, u32), Timestamp> = log
            .events()
            .iter()
            .map(|e| ((e.user, e.item), e.timestamp))
            .collect();
        for (u, i) in split.training.edges() {
            row(u, i, times[&(u, i)])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn recommend(g: &GlobalArgs, a: &RecommendArgs) -> Result<()> {
    let log = a.input.load()?;
    let cut = match a.cut {
        None => log.max_time() + 1,
        Some(f) if f > 0.0 && f <= 1.0 => ((f * log.max_time() as f64).round() as Timestamp).max(1),
        Some(f) => return Err(Error::invalid(format!("--cut {f} must lie in (0, 1]"))),
    };
    if a.list_len == 0 {
        return Err(Error::invalid("list length must be at least 1"));
    }
    let snapshot = log.snapshot(cut);
    let method = a.method(log.time_unit())?;
    method.validate(&snapshot, a.epsilon)?;
    let users: Vec<u32> = if a.users.is_empty() {
        (0..log.user_count() as u32)
            .filter(|&u| snapshot.user_degree(u) > 0)
            .collect()
    } else {
        a.users
            .iter()
            .map(|id| {
                log.user_index(id)
                    .ok_or_else(|| Error::invalid(format!("unknown user '{id}'")))
            })
            .collect::<Result<_>>()?
    };
    let increase = match method.tau() {
        Some(tau) => Some(DegreeIncrease::compute(&snapshot, tau, a.epsilon)?),
        None => None,
    };
    let mut ws = Workspace::new();
    let mut lists: Vec<RecommendationList> = Vec::with_capacity(users.len());
    for &u in &users {
        let scores = match (method, &increase) {
            (Method::DegreeIncrease { .. }, Some(di)) => di.scores_for(u),
            (Method::TProbS { .. }, Some(di)) => di.reweight(ws.probs(&snapshot, u)),
            (Method::THybrid { lambda, .. }, Some(di)) => {
                di.reweight(ws.hybrid(&snapshot, u, lambda)?)
            }
            (Method::ProbS, _) => ws.probs(&snapshot, u),
            (other, _) => other.scores(&snapshot, u, a.epsilon)?,
        };
        lists.push(Ranking::new(&scores, &snapshot).top(a.list_len));
    }
    match g.format {
        Format::Csv => {
            let path = g.out_dir.join(format!("{}.tsv", a.out));
            let mut w = create(&path)?;
            write_recommendations(&mut w, &log, &lists, b'\t')?;
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Entry<'a> {
                user_id: &'a str,
                items: Vec<&'a str>,
                scores: &'a [f64],
            }
            let entries: Vec<Entry<'_>> = lists
                .iter()
                .map(|l| Entry {
                    user_id: log.user_id(l.user),
                    items: l.items.iter().map(|&i| log.item_id(i)).collect(),
                    scores: &l.scores,
                })
                .collect();
            write_json(&g.out_dir.join(format!("{}.json", a.out)), &entries)?;
        }
    }
    #[derive(Serialize)]
    struct Resolved {
        method: Method,
        cut_time: Timestamp,
        users: usize,
    }
    provenance(
        g,
        "recommend",
        a,
        Resolved {
            method,
            cut_time: cut,
            users: users.len(),
        },
    )
}

fn experiment_config(g: &GlobalArgs) -> Result<ExperimentConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <experiment.toml> is required".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if g.threads.is_some() {
        cfg.threads = g.threads;
    }
    Ok(cfg)
}

fn calibrate_cmd(g: &GlobalArgs, a: &CalibrateArgs) -> Result<()> {
    let cfg = experiment_config(g)?;
    let log = cfg.dataset.load()?;
    let sweep = calibrate(&cfg, &log)?;
    write_json(&g.out_dir.join(format!("{}.json", a.out)), &sweep)?;
    if g.format == Format::Csv {
        let path = g.out_dir.join(format!("{}.csv", a.out));
        let mut w = create(&path)?;
        write_reports_csv(&mut w, &sweep.phase.rows)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    provenance(g, "calibrate", a, Provenance::new(&cfg, &log))
}

fn evaluate_cmd(g: &GlobalArgs, a: &EvaluateArgs) -> Result<()> {
    let cfg = experiment_config(g)?;
    let log = cfg.dataset.load()?;
    let report = match &a.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let sweep: SweepResult = serde_json::from_str(&text)?;
            let mut report = evaluate(&cfg, &log, &sweep.chosen())?;
            report.no_time_method = sweep.best_time_unaware().map(|p| p.label.clone());
            report
        }
        None => {
            let result = run_pipeline(&cfg, &log)?;
            write_json(&g.out_dir.join("calibration.json"), &result.calibration)?;
            result.evaluation
        }
    };
    write_json(&g.out_dir.join(format!("{}.json", a.out)), &report)?;
    if g.format == Format::Csv {
        let path = g.out_dir.join(format!("{}.csv", a.out));
        let mut w = create(&path)?;
        report.write_summary_csv(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        let rows_path = g.out_dir.join(format!("{}.rows.csv", a.out));
        let mut w = create(&rows_path)?;
        let mut rows = report.time_phase.rows.clone();
        if let Some(r) = &report.random_phase {
            rows.extend(r.rows.iter().cloned());
        }
        write_reports_csv(&mut w, &rows)?;
        w.flush().map_err(|e| Error::io(&rows_path, e))?;
    }
    provenance(g, "evaluate", a, Provenance::new(&cfg, &log))
}

fn diagnose(g: &GlobalArgs, a: &DiagnoseArgs) -> Result<()> {
    let log = a.input.load()?;
    let split = a.probe.build(&log, g.seed.unwrap_or(0))?;
    let tau = parse_duration(&a.tau, log.time_unit())?;
    let correlations = probe_degree_correlations(&split, tau)?;
    let half_life = popularity_half_life(&log, a.min_degree);

    #[derive(Serialize)]
    struct Diagnostics {
        split: crate::probes::SplitDescriptor,
        correlations: crate::diagnostics::ProbeCorrelations,
        half_life: crate::diagnostics::HalfLifeStats,
        time_unit: TimeUnit,
    }
    let out = Diagnostics {
        split: split.descriptor(),
        correlations,
        half_life,
        time_unit: log.time_unit(),
    };
    write_json(&g.out_dir.join(format!("{}.json", a.out)), &out)?;
    let path = g.out_dir.join(format!("{}.scatter.csv", a.out));
    let mut w = create(&path)?;
    write_scatter_csv(&mut w, &log, &probe_scatter(&split, tau)?)?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    provenance(g, "diagnose", a, &out.split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(main_with_args(["netrec", "synth", "--bogus"]), 2);
        assert_eq!(main_with_args(["netrec", "frobnicate"]), 2);
    }
}
