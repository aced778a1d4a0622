//! Calibration sweeps and out-of-sample evaluation over sampled probes.
//!
//! Calibration draws probe times from an early window (default
//! `[0.8, 0.9] * T_m`), scores every method at every grid point and keeps
//! the recall-maximizing parameters per method. Evaluation reruns the
//! chosen parameters on probe times from the final window (default
//! `[0.9 T_m, T_m - delta_P]`) and adds ProbS on random probes for
//! comparison.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{load_events, EventLog, IngestConfig, LogSummary, UserIdx};
use crate::metrics::{
    evaluate_user, summarize, ColdPolicy, EvalOptions, MetricSummary, MetricsReport, NewUserPolicy,
    UserOutcome,
};
use crate::probes::{child_seed, draw_times, random_probe, time_probe, ProbeSplit};
use crate::recommenders::{DegreeIncrease, Method, ScoreVector, Workspace, DEFAULT_EPSILON};
use crate::synthgen::{generate, GenParams};
use crate::time::{parse_duration, TimeUnit, Timestamp};

/// Method families; parameters come from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    ProbS,
    HeatS,
    Hybrid,
    SimS,
    #[serde(rename = "di")]
    DegreeIncrease,
    TProbS,
    THybrid,
}

impl MethodKind {
    pub const ALL: [MethodKind; 7] = [
        MethodKind::ProbS,
        MethodKind::HeatS,
        MethodKind::Hybrid,
        MethodKind::SimS,
        MethodKind::DegreeIncrease,
        MethodKind::TProbS,
        MethodKind::THybrid,
    ];

    pub fn of(method: &Method) -> Self {
        match method {
            Method::ProbS => MethodKind::ProbS,
            Method::HeatS => MethodKind::HeatS,
            Method::Hybrid { .. } => MethodKind::Hybrid,
            Method::SimS { .. } => MethodKind::SimS,
            Method::DegreeIncrease { .. } => MethodKind::DegreeIncrease,
            Method::TProbS { .. } => MethodKind::TProbS,
            Method::THybrid { .. } => MethodKind::THybrid,
        }
    }

    pub fn is_temporal(self) -> bool {
        matches!(
            self,
            MethodKind::DegreeIncrease | MethodKind::TProbS | MethodKind::THybrid
        )
    }
}

/// A duration in a config file: bare native units or a string like `"1d"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DurationSpec {
    Native(i64),
    Text(String),
}

impl DurationSpec {
    pub fn resolve(&self, unit: TimeUnit) -> Result<Timestamp> {
        match self {
            DurationSpec::Native(n) if *n > 0 => Ok(*n),
            DurationSpec::Native(n) => {
                Err(Error::invalid(format!("duration {n} must be positive")))
            }
            DurationSpec::Text(s) => parse_duration(s, unit),
        }
    }
}

impl From<i64> for DurationSpec {
    fn from(v: i64) -> Self {
        DurationSpec::Native(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetSource {
    File {
        path: PathBuf,
        #[serde(default)]
        ingest: IngestConfig,
    },
    Synthetic(GenParams),
}

impl DatasetSource {
    pub fn load(&self) -> Result<EventLog> {
        match self {
            DatasetSource::File { path, ingest } => load_events(path, ingest),
            DatasetSource::Synthetic(params) => generate(params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamGrid {
    pub tau: Vec<DurationSpec>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            tau: [1, 2, 5, 10, 20, 50, 100]
                .into_iter()
                .map(DurationSpec::Native)
                .collect(),
            lambda: (0..=10).map(|k| k as f64 / 10.0).collect(),
            theta: vec![0.5, 0.75, 1.0, 1.25, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub methods: Vec<MethodKind>,
    pub grid: ParamGrid,
    pub epsilon: f64,
    pub list_len: usize,
    pub delta_p: DurationSpec,
    pub calibration_range: [f64; 2],
    pub evaluation_range: [f64; 2],
    pub probes: usize,
    pub random_fraction: f64,
    pub random_probes: usize,
    pub seed: u64,
    pub cold_items: ColdPolicy,
    pub new_users: NewUserPolicy,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::Synthetic(GenParams::default()),
            methods: MethodKind::ALL.to_vec(),
            grid: ParamGrid::default(),
            epsilon: DEFAULT_EPSILON,
            list_len: 50,
            delta_p: DurationSpec::Native(1),
            calibration_range: [0.8, 0.9],
            evaluation_range: [0.9, 1.0],
            probes: 100,
            random_fraction: 0.1,
            random_probes: 10,
            seed: 0,
            cold_items: ColdPolicy::Keep,
            new_users: NewUserPolicy::Include,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a TOML config; relative dataset paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let (DatasetSource::File { path, .. }, Some(base)) = (&mut cfg.dataset, base) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            list_len: self.list_len,
            cold_items: self.cold_items,
            new_users: self.new_users,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [clo, chi] = self.calibration_range;
        let [elo, ehi] = self.evaluation_range;
        for v in [clo, chi, elo, ehi] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(
                    "probe-time ranges must lie within [0, 1]".into(),
                ));
            }
        }
        if clo > chi || elo > ehi {
            return Err(Error::Config("probe-time ranges must be ordered".into()));
        }
        if chi > elo {
            return Err(Error::Config(
                "calibration range must end before the evaluation range starts".into(),
            ));
        }
        if self.probes == 0 {
            return Err(Error::Config("need at least one probe per phase".into()));
        }
        if self.list_len == 0 {
            return Err(Error::Config("list length must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if !(self.random_fraction > 0.0 && self.random_fraction < 1.0) {
            return Err(Error::Config(
                "random probe fraction must lie in (0, 1)".into(),
            ));
        }
        let needs = |k: MethodKind| self.methods.contains(&k);
        if (needs(MethodKind::DegreeIncrease)
            || needs(MethodKind::TProbS)
            || needs(MethodKind::THybrid))
            && self.grid.tau.is_empty()
        {
            return Err(Error::Config(
                "temporal methods need a non-empty tau grid".into(),
            ));
        }
        if (needs(MethodKind::Hybrid) || needs(MethodKind::SimS) || needs(MethodKind::THybrid))
            && self.grid.lambda.is_empty()
        {
            return Err(Error::Config(
                "hybrid methods need a non-empty lambda grid".into(),
            ));
        }
        if needs(MethodKind::SimS) && self.grid.theta.is_empty() {
            return Err(Error::Config("SimS needs a non-empty theta grid".into()));
        }
        Ok(())
    }

    /// Every (method, parameter point) of the sweep.
    pub fn grid_points(&self, unit: TimeUnit) -> Result<Vec<Method>> {
        let taus = self
            .grid
            .tau
            .iter()
            .map(|t| t.resolve(unit))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for kind in &self.methods {
            match kind {
                MethodKind::ProbS => out.push(Method::ProbS),
                MethodKind::HeatS => out.push(Method::HeatS),
                MethodKind::Hybrid => out.extend(
                    self.grid
                        .lambda
                        .iter()
                        .map(|&lambda| Method::Hybrid { lambda }),
                ),
                MethodKind::SimS => {
                    for &theta in &self.grid.theta {
                        for &lambda in &self.grid.lambda {
                            out.push(Method::SimS { theta, lambda });
                        }
                    }
                }
                MethodKind::DegreeIncrease => {
                    out.extend(taus.iter().map(|&tau| Method::DegreeIncrease { tau }))
                }
                MethodKind::TProbS => out.extend(taus.iter().map(|&tau| Method::TProbS { tau })),
                MethodKind::THybrid => {
                    for &tau in &taus {
                        for &lambda in &self.grid.lambda {
                            out.push(Method::THybrid { tau, lambda });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Integer bounds for calibration probe times. The upper bound keeps
    /// every calibration probe window clear of the evaluation window.
    pub fn calibration_bounds(
        &self,
        max_time: Timestamp,
        delta: Timestamp,
    ) -> Result<(Timestamp, Timestamp)> {
        let tm = max_time as f64;
        let lo = ((self.calibration_range[0] * tm) - 1e-9).ceil().max(1.0) as Timestamp;
        let eval_lo = self.evaluation_bounds(max_time, delta)?.0;
        let hi = (((self.calibration_range[1] * tm) + 1e-9).floor() as Timestamp)
            .min(eval_lo - delta)
            .min(max_time - delta);
        if lo > hi {
            return Err(Error::Experiment(format!(
                "calibration window is empty for T_m = {max_time} and span {delta}"
            )));
        }
        Ok((lo, hi))
    }

    pub fn evaluation_bounds(
        &self,
        max_time: Timestamp,
        delta: Timestamp,
    ) -> Result<(Timestamp, Timestamp)> {
        let tm = max_time as f64;
        let lo = ((self.evaluation_range[0] * tm) - 1e-9).ceil().max(1.0) as Timestamp;
        let hi =
            (((self.evaluation_range[1] * tm) + 1e-9).floor() as Timestamp).min(max_time - delta);
        if lo > hi {
            return Err(Error::Experiment(format!(
                "evaluation window is empty for T_m = {max_time} and span {delta}"
            )));
        }
        Ok((lo, hi))
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Seed stream tags so phases never share child seeds.
const CALIBRATION_STREAM: u64 = 0xC0;
const EVALUATION_STREAM: u64 = 0xE0;
const RANDOM_STREAM: u64 = 0xA0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum BaseKey {
    ProbS,
    HeatS,
    Hybrid(u64),
    SimS(u64, u64),
}

fn base_key(method: &Method) -> Option<BaseKey> {
    match *method {
        Method::ProbS | Method::TProbS { .. } => Some(BaseKey::ProbS),
        Method::HeatS => Some(BaseKey::HeatS),
        Method::Hybrid { lambda } | Method::THybrid { lambda, .. } => Some(if lambda == 1.0 {
            BaseKey::ProbS
        } else if lambda == 0.0 {
            BaseKey::HeatS
        } else {
            BaseKey::Hybrid(lambda.to_bits())
        }),
        Method::SimS { theta, lambda } => Some(BaseKey::SimS(theta.to_bits(), lambda.to_bits())),
        Method::DegreeIncrease { .. } => None,
    }
}

fn compute_base(
    ws: &mut Workspace,
    split: &ProbeSplit,
    user: UserIdx,
    key: BaseKey,
) -> Result<ScoreVector> {
    let s = &split.training;
    match key {
        BaseKey::ProbS => Ok(ws.probs(s, user)),
        BaseKey::HeatS => Ok(ws.heats(s, user)),
        BaseKey::Hybrid(l) => ws.hybrid(s, user, f64::from_bits(l)),
        BaseKey::SimS(t, l) => ws.sims(s, user, f64::from_bits(t), f64::from_bits(l)),
    }
}

/// Metrics of each method on one split, in `methods` order. `None` marks
/// a split on which metrics are undefined (no participating probe entry).
pub fn evaluate_split(
    split: &ProbeSplit,
    methods: &[Method],
    epsilon: f64,
    options: &EvalOptions,
) -> Result<Option<Vec<MetricSummary>>> {
    let snapshot = &split.training;
    for m in methods {
        m.validate(snapshot, epsilon)?;
    }
    let probe: Vec<(UserIdx, Vec<u32>)> = split
        .probe_by_user()
        .into_iter()
        .filter_map(|(u, items)| options.filter_probe(snapshot, u, &items).map(|v| (u, v)))
        .collect();
    if probe.is_empty() {
        return Ok(None);
    }

    let mut increases: BTreeMap<Timestamp, DegreeIncrease> = BTreeMap::new();
    for tau in methods.iter().filter_map(Method::tau) {
        if let std::collections::btree_map::Entry::Vacant(slot) = increases.entry(tau) {
            slot.insert(DegreeIncrease::compute(snapshot, tau, epsilon)?);
        }
    }

    let mut outcomes: Vec<Vec<UserOutcome>> = vec![Vec::with_capacity(probe.len()); methods.len()];
    let mut ws = Workspace::new();
    let mut bases: HashMap<BaseKey, ScoreVector> = HashMap::new();
    for (user, items) in &probe {
        bases.clear();
        for (m, method) in methods.iter().enumerate() {
            let scores = match (base_key(method), method.tau()) {
                (None, Some(tau)) => increases[&tau].scores_for(*user),
                (Some(key), tau) => {
                    let base = match bases.entry(key) {
                        Entry::Occupied(e) => e.into_mut(),
                        Entry::Vacant(e) => e.insert(compute_base(&mut ws, split, *user, key)?),
                    };
                    match tau {
                        Some(tau) => increases[&tau].reweight(base.clone()),
                        None => base.clone(),
                    }
                }
                (None, None) => unreachable!("every method has a base or a window"),
            };
            outcomes[m].push(evaluate_user(&scores, snapshot, items, options.list_len));
        }
    }
    outcomes
        .iter()
        .map(|o| summarize(o))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and population standard deviation, summed in slice order.
    pub fn of(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Stat {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub label: String,
    pub method: Method,
    pub probes: usize,
    pub recall: Stat,
    pub ranking_score: Stat,
    pub k_r: Stat,
}

fn summarize_point(method: Method, runs: &[MetricSummary]) -> PointSummary {
    let pick = |f: fn(&MetricSummary) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
    PointSummary {
        label: method.label(),
        method,
        probes: runs.len(),
        recall: pick(|m| m.recall),
        ranking_score: pick(|m| m.ranking_score),
        k_r: pick(|m| m.avg_degree),
    }
}

/// Outcome of one phase over many probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub points: Vec<PointSummary>,
    pub probe_times: Vec<Timestamp>,
    pub skipped_probes: usize,
    pub rows: Vec<MetricsReport>,
}

impl PhaseResult {
    pub fn skip_rate(&self) -> f64 {
        if self.probe_times.is_empty() {
            0.0
        } else {
            self.skipped_probes as f64 / self.probe_times.len() as f64
        }
    }

    pub fn point(&self, method: &Method) -> Option<&PointSummary> {
        self.points.iter().find(|p| &p.method == method)
    }
}

fn report_row(
    method: &Method,
    list_len: usize,
    m: &MetricSummary,
    split: &ProbeSplit,
) -> MetricsReport {
    MetricsReport {
        method: method.name().to_string(),
        tau: method.tau(),
        lambda: method.lambda(),
        theta: method.theta(),
        list_len,
        recall: m.recall,
        ranking_score: m.ranking_score,
        k_r: m.avg_degree,
        users: m.users,
        probe: split.descriptor(),
    }
}

/// Runs `methods` over a list of splits built lazily by `make_split`,
/// in parallel across splits, reducing in split-index order.
fn run_phase<F>(
    n_splits: usize,
    probe_times: Vec<Timestamp>,
    make_split: F,
    methods: &[Method],
    config: &ExperimentConfig,
) -> Result<PhaseResult>
where
    F: Fn(usize) -> Result<ProbeSplit> + Sync,
{
    let options = config.eval_options();
    let per_split: Vec<Result<(ProbeSplit, Option<Vec<MetricSummary>>)>> =
        config.pool()?.install(|| {
            (0..n_splits)
                .into_par_iter()
                .map(|k| {
                    let split = make_split(k)?;
                    if split.is_empty() {
                        return Ok((split, None));
                    }
                    let res = evaluate_split(&split, methods, config.epsilon, &options)?;
                    Ok((split, res))
                })
                .collect()
        });

    let mut runs: Vec<Vec<MetricSummary>> = vec![Vec::new(); methods.len()];
    let mut rows = Vec::new();
    let mut skipped = 0;
    for item in per_split {
        let (split, res) = item?;
        match res {
            None => skipped += 1,
            Some(summaries) => {
                for (m, s) in summaries.into_iter().enumerate() {
                    rows.push(report_row(&methods[m], config.list_len, &s, &split));
                    runs[m].push(s);
                }
            }
        }
    }
    if skipped == n_splits {
        return Err(Error::Experiment("every probe was empty".into()));
    }
    Ok(PhaseResult {
        points: methods
            .iter()
            .zip(&runs)
            .map(|(m, r)| summarize_point(*m, r))
            .collect(),
        probe_times,
        skipped_probes: skipped,
        rows,
    })
}

/// Runs methods on `count` time probes drawn from `[lo, hi]`.
pub fn run_time_probes(
    log: &EventLog,
    methods: &[Method],
    config: &ExperimentConfig,
    bounds: (Timestamp, Timestamp),
    delta: Timestamp,
    seed: u64,
) -> Result<PhaseResult> {
    let times = draw_times(bounds.0, bounds.1, config.probes, seed)?;
    let t = times.clone();
    run_phase(
        times.len(),
        times,
        |k| time_probe(log, t[k], delta),
        methods,
        config,
    )
}

/// Runs methods on `config.random_probes` random probes.
pub fn run_random_probes(
    log: &EventLog,
    methods: &[Method],
    config: &ExperimentConfig,
) -> Result<PhaseResult> {
    let stream = child_seed(config.seed, RANDOM_STREAM);
    run_phase(
        config.random_probes,
        Vec::new(),
        |k| random_probe(log, config.random_fraction, child_seed(stream, k as u64)),
        methods,
        config,
    )
}

/// Recall-maximizing point: ties go to smaller tau, then lambda, then theta.
fn better(a: &PointSummary, b: &PointSummary) -> bool {
    let key = |p: &PointSummary| {
        (
            p.method.tau().unwrap_or(0),
            p.method.lambda().unwrap_or(0.0),
            p.method.theta().unwrap_or(0.0),
        )
    };
    match a.recall.mean.total_cmp(&b.recall.mean) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                == std::cmp::Ordering::Less
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub phase: PhaseResult,
    /// Best point per method family, in config order.
    pub optima: Vec<PointSummary>,
    pub delta_p: Timestamp,
    pub seed: u64,
}

impl SweepResult {
    pub fn chosen(&self) -> Vec<Method> {
        self.optima.iter().map(|p| p.method).collect()
    }

    /// The time-unaware method with the highest calibration recall.
    pub fn best_time_unaware(&self) -> Option<&PointSummary> {
        self.optima.iter().filter(|p| !p.method.is_temporal()).fold(
            None,
            |best: Option<&PointSummary>, p| match best {
                Some(b) if !better(p, b) => Some(b),
                _ => Some(p),
            },
        )
    }
}

pub fn select_optima(points: &[PointSummary]) -> Vec<PointSummary> {
    let mut best: BTreeMap<usize, (MethodKind, PointSummary)> = BTreeMap::new();
    let mut order: HashMap<MethodKind, usize> = HashMap::new();
    for p in points {
        let kind = MethodKind::of(&p.method);
        let next = order.len();
        let slot = *order.entry(kind).or_insert(next);
        match best.get(&slot) {
            Some((_, b)) if !better(p, b) => {}
            _ => {
                best.insert(slot, (kind, p.clone()));
            }
        }
    }
    best.into_values().map(|(_, p)| p).collect()
}

/// Sweeps every grid point on calibration probes.
pub fn calibrate(config: &ExperimentConfig, log: &EventLog) -> Result<SweepResult> {
    config.validate()?;
    let delta = config.delta_p.resolve(log.time_unit())?;
    let methods = config.grid_points(log.time_unit())?;
    let bounds = config.calibration_bounds(log.max_time(), delta)?;
    let seed = child_seed(config.seed, CALIBRATION_STREAM);
    let phase = run_time_probes(log, &methods, config, bounds, delta, seed)?;
    let optima = select_optima(&phase.points);
    Ok(SweepResult {
        phase,
        optima,
        delta_p: delta,
        seed: config.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub probe_kind: String,
    pub label: String,
    pub method: Method,
    pub probes: usize,
    pub recall: Stat,
    pub ranking_score: Stat,
    pub k_r: Stat,
}

impl EvaluationRow {
    fn from_point(kind: &str, p: &PointSummary) -> Self {
        EvaluationRow {
            probe_kind: kind.to_string(),
            label: p.label.clone(),
            method: p.method,
            probes: p.probes,
            recall: p.recall,
            ranking_score: p.ranking_score,
            k_r: p.k_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<EvaluationRow>,
    pub time_phase: PhaseResult,
    pub random_phase: Option<PhaseResult>,
    /// Label of the best time-unaware method, when known from calibration.
    pub no_time_method: Option<String>,
    pub delta_p: Timestamp,
}

impl EvaluationReport {
    pub fn row(&self, probe_kind: &str, method: &Method) -> Option<&EvaluationRow> {
        self.rows
            .iter()
            .find(|r| r.probe_kind == probe_kind && &r.method == method)
    }

    /// Table-style summary: probe kind, method, recall, ranking score, k_R.
    pub fn write_summary_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "probe",
            "method",
            "recall",
            "recall_std",
            "ranking_score",
            "k_r",
            "probes",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.probe_kind.clone(),
                r.label.clone(),
                r.recall.mean.to_string(),
                r.recall.std.to_string(),
                r.ranking_score.mean.to_string(),
                r.k_r.mean.to_string(),
                r.probes.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }
}

/// Out-of-sample evaluation of `chosen` on evaluation-window time probes,
/// plus ProbS on random probes when `config.random_probes > 0`.
pub fn evaluate(
    config: &ExperimentConfig,
    log: &EventLog,
    chosen: &[Method],
) -> Result<EvaluationReport> {
    config.validate()?;
    if chosen.is_empty() {
        return Err(Error::Config("no methods to evaluate".into()));
    }
    let delta = config.delta_p.resolve(log.time_unit())?;
    let bounds = config.evaluation_bounds(log.max_time(), delta)?;
    let seed = child_seed(config.seed, EVALUATION_STREAM);
    let time_phase = run_time_probes(log, chosen, config, bounds, delta, seed)?;
    let mut rows: Vec<EvaluationRow> = time_phase
        .points
        .iter()
        .map(|p| EvaluationRow::from_point("time", p))
        .collect();
    let random_phase = if config.random_probes > 0 {
        let phase = run_random_probes(log, &[Method::ProbS], config)?;
        rows.insert(0, EvaluationRow::from_point("random", &phase.points[0]));
        Some(phase)
    } else {
        None
    };
    Ok(EvaluationReport {
        rows,
        time_phase,
        random_phase,
        no_time_method: None,
        delta_p: delta,
    })
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub dataset: LogSummary,
}

impl Provenance {
    pub fn new(config: &ExperimentConfig, log: &EventLog) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            dataset: log.summary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub provenance: Provenance,
    pub calibration: SweepResult,
    pub evaluation: EvaluationReport,
}

/// Calibration followed by evaluation at the calibrated optima.
pub fn run_pipeline(config: &ExperimentConfig, log: &EventLog) -> Result<PipelineResult> {
    let calibration = calibrate(config, log)?;
    let mut evaluation = evaluate(config, log, &calibration.chosen())?;
    evaluation.no_time_method = calibration.best_time_unaware().map(|p| p.label.clone());
    Ok(PipelineResult {
        provenance: Provenance::new(config, log),
        calibration,
        evaluation,
    })
}
