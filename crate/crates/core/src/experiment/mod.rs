//! Experiment runner behind the command-line tool.
//!
//! Layout of a study directory:
//!
//! ```text
//! out/
//!   manifest.json  config.json  study.json  summary.csv
//!   overlay_{loss,q_p,q_h}.svg            (several regimes only)
//!   <regime>/
//!     aggregate.csv  {loss,q_p,q_h}.svg  projection.svg  h_axes.svg
//!     trial_000/
//!       manifest.json  context.json  checkpoint.json  curve.csv  clouds.json
//!       projection.svg  h_axes.svg
//! ```

pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Preset};

use crate::analysis::{self, EvalGrid};
use crate::env::{MotorGrid, Scene, SceneFile, SCENE_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::exploration::dataset::DATASET_SCHEMA_VERSION;
use crate::exploration::{generate, Dataset, ExplorationKind, Normalization};
use crate::model::{
    LearningCurve, PredictiveModel, Trainer, TrainingCheckpoint, TRAINING_CHECKPOINT_VERSION,
};
use crate::nn::checkpoint::NETWORK_CHECKPOINT_VERSION;
use crate::plot::{self, LinePlot, PairedScatter, Scale, Series};
use crate::rng::{Rng, Stream};

pub const AGGREGATE_HEADER: &str = "epoch,loss_mean,loss_std,q_p_mean,q_p_std,q_h_mean,q_h_std";
pub const SUMMARY_HEADER: &str = "exploration,trial,seed,status,final_loss,final_q_p,final_q_h,collapse,stopped_at";
/// Allowed gap between a re-evaluation and the recorded curve.
pub const EVAL_TOLERANCE: f64 = 1e-12;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(Error::io_at(path))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::io_at(path))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(Error::io_at(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

fn regime_dir(kind: ExplorationKind) -> String {
    kind.as_str().to_ascii_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaVersions {
    pub dataset: u32,
    pub scene: u32,
    pub network_checkpoint: u32,
    pub training_checkpoint: u32,
}

impl SchemaVersions {
    fn current() -> Self {
        Self {
            dataset: DATASET_SCHEMA_VERSION,
            scene: SCENE_SCHEMA_VERSION,
            network_checkpoint: NETWORK_CHECKPOINT_VERSION,
            training_checkpoint: TRAINING_CHECKPOINT_VERSION,
        }
    }
}

/// Ties every file of a directory to the configuration and seeds that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub schema_versions: SchemaVersions,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
}

impl Manifest {
    fn new(config: &ExperimentConfig, seeds: Vec<u64>, mut files: Vec<String>) -> Result<Self> {
        files.sort();
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash()?,
            seeds,
            schema_versions: SchemaVersions::current(),
            config: config.clone(),
            files,
        })
    }
}

/// What `eval` needs to rebuild the evaluation grid of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunContext {
    pub exploration: ExplorationKind,
    pub seed: u64,
    pub scene: SceneFile,
    pub norm: Normalization,
}

impl RunContext {
    pub fn eval_grid(&self) -> Result<EvalGrid> {
        EvalGrid::new(&MotorGrid::regular(&self.scene.scene)?, &self.norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenDataSummary {
    pub path: PathBuf,
    pub valid: usize,
    pub attempted: u64,
    pub discarded: u64,
    pub translations: u64,
}

/// The scene, raw dataset and seed of one trial.
pub fn trial_data(config: &ExperimentConfig, kind: ExplorationKind, seed: u64) -> Result<(Scene, Dataset)> {
    let scene = Scene::random(config.setup, &mut Rng::stream(seed, Stream::Scene))?;
    let data = generate(&scene, kind, config.n_transitions, seed, &mut Rng::stream(seed, Stream::Exploration))?;
    Ok((scene, data))
}

/// Generates the dataset of trial 0 and writes it with its scene.
pub fn cmd_gen_data(config: &ExperimentConfig, out: &Path) -> Result<GenDataSummary> {
    config.validate()?;
    create_dir(out)?;
    let seed = config.trial_seed(0);
    let (scene, data) = trial_data(config, config.exploration, seed)?;
    let path = out.join("dataset.smds");
    data.save(&path)?;
    SceneFile::new(scene, seed).save(&out.join("scene.json"))?;
    let manifest = Manifest::new(config, vec![seed], vec!["dataset.smds".into(), "scene.json".into()])?;
    write_json(&out.join("manifest.json"), &manifest)?;
    let p = data.provenance();
    Ok(GenDataSummary {
        path,
        valid: data.len(),
        attempted: p.attempted,
        discarded: p.discarded,
        translations: p.translations,
    })
}

/// Final state of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub exploration: ExplorationKind,
    pub trial: usize,
    pub seed: u64,
    /// `"ok"` or the error message.
    pub status: String,
    pub final_loss: Option<f64>,
    pub final_q_p: Option<f64>,
    pub final_q_h: Option<f64>,
    pub collapse: Option<f64>,
    pub stopped_at: Option<u64>,
    #[serde(skip)]
    pub curve: Option<LearningCurve>,
}

impl TrialOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(exploration: ExplorationKind, trial: usize, seed: u64, err: &Error) -> Self {
        Self {
            exploration,
            trial,
            seed,
            status: err.to_string(),
            final_loss: None,
            final_q_p: None,
            final_q_h: None,
            collapse: None,
            stopped_at: None,
            curve: None,
        }
    }
}

fn projection_plot(title: &str, clouds: &analysis::CloudExport) -> PairedScatter {
    let pick = |rows: &[Vec<f64>]| rows.iter().map(|r| [r[0], r.get(1).copied().unwrap_or(0.0)]).collect();
    PairedScatter {
        title: title.into(),
        reference: pick(&clouds.p),
        reference_label: "P".into(),
        other: pick(&clouds.h_proj_p),
        other_label: "H projected on P".into(),
    }
}

fn write_cloud_plots(dir: &Path, title: &str, clouds: &analysis::CloudExport) -> Result<()> {
    write(&dir.join("projection.svg"), projection_plot(title, clouds).to_svg())?;
    write(&dir.join("h_axes.svg"), plot::pairwise_axes_svg(&format!("{title}: h"), &clouds.h, 3))
}

/// Trains on a prepared dataset inside `dir`, checkpointing at every snapshot.
/// With `resume`, continues from `dir/checkpoint.json` when present.
pub fn train_run(
    config: &ExperimentConfig,
    data: &Dataset,
    trial: usize,
    dir: &Path,
    resume: bool,
) -> Result<TrialOutcome> {
    create_dir(dir)?;
    let prov = data.provenance().clone();
    let data = match data.norm() {
        Some(_) => data.clone(),
        None => data.normalize()?,
    };
    let context = RunContext {
        exploration: prov.exploration,
        seed: prov.seed,
        scene: prov.scene.clone(),
        norm: data.norm().expect("normalized above").clone(),
    };
    write_json(&dir.join("context.json"), &context)?;
    let grid = context.eval_grid()?;
    let mut train_cfg = config.train.clone();
    train_cfg.seed = prov.seed;

    let ck_path = dir.join("checkpoint.json");
    let mut trainer = if resume && ck_path.exists() {
        let ck = TrainingCheckpoint::load(&ck_path)?;
        if ck.config != train_cfg {
            return Err(Error::Provenance(format!("{} was written with a different configuration", ck_path.display())));
        }
        Trainer::from_checkpoint(&ck)?
    } else {
        let mut init = Rng::stream(prov.seed, Stream::Init);
        let model =
            PredictiveModel::new(data.motor_dim(), data.sensory_dim(), config.dim_h, config.activation, &mut init)?;
        Trainer::new(model, train_cfg)?
    };
    let tmp = dir.join("checkpoint.json.tmp");
    let curve = trainer.run(&data, &grid, |t| {
        t.checkpoint().save(&tmp)?;
        std::fs::rename(&tmp, &ck_path).map_err(Error::io_at(&ck_path))
    })?;
    write(&dir.join("curve.csv"), curve.to_csv())?;
    let eval = analysis::evaluate(&trainer.model, &grid)?;
    let clouds = eval.clouds(&grid);
    write_json(&dir.join("clouds.json"), &clouds)?;
    write_cloud_plots(dir, &format!("{} trial {trial}", prov.exploration), &clouds)?;
    let collapse = analysis::collapse_ratio(&eval.h, &grid.labels).ok();
    let manifest = Manifest::new(
        config,
        vec![prov.seed],
        ["checkpoint.json", "clouds.json", "context.json", "curve.csv", "h_axes.svg", "projection.svg"]
            .map(String::from)
            .to_vec(),
    )?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    let last = curve.last().copied();
    Ok(TrialOutcome {
        exploration: prov.exploration,
        trial,
        seed: prov.seed,
        status: "ok".into(),
        final_loss: last.map(|r| r.loss),
        final_q_p: last.map(|r| r.q_p),
        final_q_h: last.map(|r| r.q_h),
        collapse,
        stopped_at: trainer.stopped_at(),
        curve: Some(curve),
    })
}

/// Trains on a dataset file written by [`cmd_gen_data`].
pub fn cmd_train(config: &ExperimentConfig, dataset: &Path, out: &Path, resume: bool) -> Result<TrialOutcome> {
    config.validate()?;
    let data = Dataset::load(dataset)?;
    let prov = data.provenance();
    if prov.setup != config.setup || prov.exploration != config.exploration {
        return Err(Error::Provenance(format!(
            "dataset is {} / {} but the configuration asks for {} / {}",
            prov.setup.as_str(),
            prov.exploration,
            config.setup.as_str(),
            config.exploration
        )));
    }
    train_run(config, &data, 0, out, resume)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub epoch: u64,
    pub q_p: f64,
    pub q_h: f64,
    pub collapse: Option<f64>,
    pub clouds: analysis::CloudExport,
}

/// Re-evaluates the checkpoint of a training run directory. When `scene` is
/// given it must be the scene the run was trained in.
pub fn cmd_eval(run_dir: &Path, scene: Option<&Path>) -> Result<EvalReport> {
    let ck = TrainingCheckpoint::load(&run_dir.join("checkpoint.json"))?;
    let context: RunContext = serde_json::from_str(&read(&run_dir.join("context.json"))?)?;
    if let Some(path) = scene {
        let given = SceneFile::load(path)?;
        if given.scene.untranslated() != context.scene.scene || given.setup != context.scene.setup {
            return Err(Error::Provenance(format!(
                "{} is not the scene this model was trained in",
                path.display()
            )));
        }
    }
    let grid = context.eval_grid()?;
    let model = ck.model()?;
    let eval = analysis::evaluate(&model, &grid)?;
    let row = ck
        .curve
        .last()
        .ok_or_else(|| Error::Provenance("checkpoint has no evaluation snapshot".into()))?;
    let gap = (eval.report.q_p - row.q_p).abs().max((eval.report.q_h - row.q_h).abs());
    if gap.is_nan() || gap > EVAL_TOLERANCE {
        return Err(Error::Provenance(format!(
            "re-evaluation differs from the recorded curve by {gap:e}; norm or scene do not match the checkpoint"
        )));
    }
    let report = EvalReport {
        epoch: row.epoch,
        q_p: eval.report.q_p,
        q_h: eval.report.q_h,
        collapse: analysis::collapse_ratio(&eval.h, &grid.labels).ok(),
        clouds: eval.clouds(&grid),
    };
    write_json(&run_dir.join("eval.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub epoch: u64,
    pub loss_mean: f64,
    pub loss_std: f64,
    pub q_p_mean: f64,
    pub q_p_std: f64,
    pub q_h_mean: f64,
    pub q_h_std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-epoch mean and spread over curves recorded at the same epochs.
pub fn aggregate(curves: &[&LearningCurve]) -> Result<Vec<AggregateRow>> {
    let Some(first) = curves.first() else {
        return Ok(Vec::new());
    };
    if curves.iter().any(|c| c.rows.len() != first.rows.len()) {
        return Err(Error::Shape("curves have different numbers of snapshots".into()));
    }
    (0..first.rows.len())
        .map(|i| {
            let epoch = first.rows[i].epoch;
            if curves.iter().any(|c| c.rows[i].epoch != epoch) {
                return Err(Error::Shape(format!("curves disagree on snapshot {i} epoch")));
            }
            let col = |f: fn(&crate::model::CurveRow) -> f64| -> Vec<f64> { curves.iter().map(|c| f(&c.rows[i])).collect() };
            let (loss_mean, loss_std) = mean_std(&col(|r| r.loss));
            let (q_p_mean, q_p_std) = mean_std(&col(|r| r.q_p));
            let (q_h_mean, q_h_std) = mean_std(&col(|r| r.q_h));
            Ok(AggregateRow { epoch, loss_mean, loss_std, q_p_mean, q_p_std, q_h_mean, q_h_std })
        })
        .collect()
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch, r.loss_mean, r.loss_std, r.q_p_mean, r.q_p_std, r.q_h_mean, r.q_h_std
        ));
    }
    out
}

pub fn parse_aggregate_csv(text: &str) -> Result<Vec<AggregateRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(AGGREGATE_HEADER) {
        return Err(Error::Config(format!("aggregate CSV must start with `{AGGREGATE_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let f: Vec<f64> = line.split(',').map(str::parse).collect::<Result<_, _>>().map_err(|_| {
                Error::Config(format!("aggregate CSV line {}: not numeric", n + 2))
            })?;
            if f.len() != 7 {
                return Err(Error::Config(format!("aggregate CSV line {}: expected 7 fields", n + 2)));
            }
            Ok(AggregateRow {
                epoch: f[0] as u64,
                loss_mean: f[1],
                loss_std: f[2],
                q_p_mean: f[3],
                q_p_std: f[4],
                q_h_mean: f[5],
                q_h_std: f[6],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Measure {
    Loss,
    Qp,
    Qh,
}

impl Measure {
    const ALL: [Measure; 3] = [Measure::Loss, Measure::Qp, Measure::Qh];

    fn name(self) -> &'static str {
        match self {
            Measure::Loss => "loss",
            Measure::Qp => "q_p",
            Measure::Qh => "q_h",
        }
    }

    fn pick(self, r: &AggregateRow) -> (f64, f64) {
        match self {
            Measure::Loss => (r.loss_mean, r.loss_std),
            Measure::Qp => (r.q_p_mean, r.q_p_std),
            Measure::Qh => (r.q_h_mean, r.q_h_std),
        }
    }
}

fn measure_plot(measure: Measure, series: &[(String, &[AggregateRow])]) -> LinePlot {
    LinePlot {
        title: format!("{} (mean ± std)", measure.name()),
        x_label: "epoch".into(),
        y_label: measure.name().into(),
        y_scale: Scale::Log,
        series: series
            .iter()
            .map(|(label, rows)| Series {
                label: label.clone(),
                x: rows.iter().map(|r| r.epoch as f64).collect(),
                y: rows.iter().map(|r| measure.pick(r).0).collect(),
                spread: Some(rows.iter().map(|r| measure.pick(r).1).collect()),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub exploration: ExplorationKind,
    pub trials: Vec<TrialOutcome>,
    pub aggregate: Vec<AggregateRow>,
    pub median_final_q_p: Option<f64>,
    pub median_final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config_hash: String,
    pub regimes: Vec<RegimeReport>,
}

impl StudyReport {
    pub fn regime(&self, kind: ExplorationKind) -> Option<&RegimeReport> {
        self.regimes.iter().find(|r| r.exploration == kind)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn summary_csv(report: &StudyReport) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in &report.regimes {
        for t in &r.trials {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.exploration,
                t.trial,
                t.seed,
                if t.is_ok() { "ok" } else { "failed" },
                opt(t.final_loss),
                opt(t.final_q_p),
                opt(t.final_q_h),
                opt(t.collapse),
                t.stopped_at.map_or(String::new(), |e| e.to_string()),
            ));
        }
    }
    out
}

fn run_trial(config: &ExperimentConfig, kind: ExplorationKind, trial: usize, dir: &Path) -> TrialOutcome {
    let seed = config.trial_seed(trial);
    let result = trial_data(config, kind, seed).and_then(|(_, data)| train_run(config, &data, trial, dir, false));
    result.unwrap_or_else(|e| TrialOutcome::failed(kind, trial, seed, &e))
}

/// Runs every trial of every regime, at most `jobs` at a time, and writes
/// per-trial artifacts, aggregates, plots and a summary.
pub fn cmd_study(config: &ExperimentConfig, out: &Path, jobs: usize) -> Result<StudyReport> {
    config.validate()?;
    create_dir(out)?;
    let regimes = config.regimes();
    let work: Vec<(ExplorationKind, usize)> =
        regimes.iter().flat_map(|&k| (0..config.trials).map(move |t| (k, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        work.par_iter()
            .map(|&(kind, t)| {
                let dir = out.join(regime_dir(kind)).join(format!("trial_{t:03}"));
                run_trial(config, kind, t, &dir)
            })
            .collect()
    });
    if outcomes.iter().all(|o| !o.is_ok()) {
        let first = outcomes.first().map_or_else(String::new, |o| o.status.clone());
        return Err(Error::Config(format!("every trial failed; first error: {first}")));
    }

    let mut by_regime: BTreeMap<usize, Vec<TrialOutcome>> = BTreeMap::new();
    for o in outcomes {
        let idx = regimes.iter().position(|&k| k == o.exploration).expect("regime listed");
        by_regime.entry(idx).or_default().push(o);
    }
    let mut files = vec!["config.json".to_string(), "study.json".into(), "summary.csv".into()];
    let mut reports = Vec::new();
    for (idx, trials) in by_regime {
        let kind = regimes[idx];
        let sub = regime_dir(kind);
        let dir = out.join(&sub);
        let curves: Vec<&LearningCurve> = trials.iter().filter_map(|t| t.curve.as_ref()).collect();
        let agg = aggregate(&curves)?;
        write(&dir.join("aggregate.csv"), aggregate_csv(&agg))?;
        files.push(format!("{sub}/aggregate.csv"));
        for m in Measure::ALL {
            let name = format!("{}.svg", m.name());
            write(&dir.join(&name), measure_plot(m, &[(kind.to_string(), &agg)]).to_svg())?;
        }
        if let Some(t) = trials.iter().find(|t| t.is_ok()) {
            let trial_dir = dir.join(format!("trial_{:03}", t.trial));
            let clouds: analysis::CloudExport = serde_json::from_str(&read(&trial_dir.join("clouds.json"))?)?;
            write_cloud_plots(&dir, &format!("{kind} trial {}", t.trial), &clouds)?;
        }
        for t in &trials {
            if t.is_ok() {
                for f in ["checkpoint.json", "clouds.json", "context.json", "curve.csv", "manifest.json"] {
                    files.push(format!("{sub}/trial_{:03}/{f}", t.trial));
                }
            }
        }
        let ok: Vec<&TrialOutcome> = trials.iter().filter(|t| t.is_ok()).collect();
        let finals = |f: fn(&TrialOutcome) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|t| f(t)).collect() };
        reports.push(RegimeReport {
            exploration: kind,
            median_final_q_p: median(&finals(|t| t.final_q_p)),
            median_final_loss: median(&finals(|t| t.final_loss)),
            trials,
            aggregate: agg,
        });
    }
    if reports.len() > 1 {
        for m in Measure::ALL {
            let series: Vec<(String, &[AggregateRow])> =
                reports.iter().map(|r| (r.exploration.to_string(), r.aggregate.as_slice())).collect();
            write(&out.join(format!("overlay_{}.svg", m.name())), measure_plot(m, &series).to_svg())?;
        }
    }
    let report = StudyReport { config_hash: config.hash()?, regimes: reports };
    write(&out.join("config.json"), config.to_json()? + "\n")?;
    write_json(&out.join("study.json"), &report)?;
    write(&out.join("summary.csv"), summary_csv(&report))?;
    let seeds = (0..config.trials).map(|t| config.trial_seed(t)).collect();
    write_json(&out.join("manifest.json"), &Manifest::new(config, seeds, files)?)?;
    Ok(report)
}

/// Redraws the SVG figures under `dir` from its CSV and JSON artifacts.
/// Returns the files written.
pub fn cmd_plot(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    plot_dir(dir, &mut written)?;
    Ok(written)
}

fn plot_dir(dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let label = dir.file_name().map_or_else(String::new, |n| n.to_string_lossy().to_uppercase());
    let agg_path = dir.join("aggregate.csv");
    if agg_path.exists() {
        let rows = parse_aggregate_csv(&read(&agg_path)?)?;
        for m in Measure::ALL {
            let path = dir.join(format!("{}.svg", m.name()));
            write(&path, measure_plot(m, &[(label.clone(), &rows)]).to_svg())?;
            written.push(path);
        }
    }
    let curve_path = dir.join("curve.csv");
    if curve_path.exists() {
        let curve = LearningCurve::from_csv(&read(&curve_path)?)?;
        let rows: Vec<AggregateRow> = curve
            .rows
            .iter()
            .map(|r| AggregateRow {
                epoch: r.epoch,
                loss_mean: r.loss,
                loss_std: 0.0,
                q_p_mean: r.q_p,
                q_p_std: 0.0,
                q_h_mean: r.q_h,
                q_h_std: 0.0,
            })
            .collect();
        let path = dir.join("curve.svg");
        let series = [("loss".to_string(), rows.as_slice())];
        let mut p = measure_plot(Measure::Loss, &series);
        for (name, m) in [("q_p", Measure::Qp), ("q_h", Measure::Qh)] {
            let mut s = measure_plot(m, &series).series.remove(0);
            s.label = name.into();
            p.series.push(s);
        }
        for s in &mut p.series {
            s.spread = None;
        }
        p.title = "learning curve".into();
        p.y_label = "value".into();
        write(&path, p.to_svg())?;
        written.push(path);
    }
    let clouds_path = dir.join("clouds.json");
    if clouds_path.exists() {
        let clouds: analysis::CloudExport = serde_json::from_str(&read(&clouds_path)?)?;
        let parent = dir.parent().and_then(Path::file_name).map_or_else(String::new, |n| n.to_string_lossy().to_uppercase());
        write_cloud_plots(dir, &format!("{parent} {}", dir.file_name().unwrap_or_default().to_string_lossy()), &clouds)?;
        written.push(dir.join("projection.svg"));
        written.push(dir.join("h_axes.svg"));
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(Error::io_at(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut overlay: Vec<(String, Vec<AggregateRow>)> = Vec::new();
    for sub in &subdirs {
        plot_dir(sub, written)?;
        let agg = sub.join("aggregate.csv");
        if agg.exists() {
            let name = sub.file_name().unwrap_or_default().to_string_lossy().to_uppercase();
            overlay.push((name, parse_aggregate_csv(&read(&agg)?)?));
        }
    }
    // a study directory keeps its regime order
    let config_path = dir.join("config.json");
    if config_path.exists() {
        let config: ExperimentConfig = serde_json::from_str(&read(&config_path)?)?;
        let order: Vec<String> = config.regimes().iter().map(|k| k.to_string()).collect();
        overlay.sort_by_key(|(n, _)| order.iter().position(|o| o == n).unwrap_or(order.len()));
    }
    if overlay.len() > 1 {
        let series: Vec<(String, &[AggregateRow])> = overlay.iter().map(|(n, r)| (n.clone(), r.as_slice())).collect();
        for m in Measure::ALL {
            let path = dir.join(format!("overlay_{}.svg", m.name()));
            write(&path, measure_plot(m, &series).to_svg())?;
            written.push(path);
        }
    }
    Ok(())
}
