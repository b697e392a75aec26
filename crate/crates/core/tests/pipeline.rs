use std::path::Path;
use std::process::Command;

use sensorimotor_core::env::{Scene, SceneFile, SetupKind};
use sensorimotor_core::experiment::{
    self, cmd_eval, cmd_gen_data, cmd_plot, cmd_study, cmd_train, ExperimentConfig, Manifest, Preset, AGGREGATE_HEADER,
};
use sensorimotor_core::exploration::dataset::Dataset;
use sensorimotor_core::exploration::ExplorationKind;
use sensorimotor_core::model::{LearningCurve, PredictiveModel, Trainer, TrainingCheckpoint, CURVE_HEADER};
use sensorimotor_core::rng::{Rng, Stream};
use sensorimotor_core::Error;

fn tiny(setup: SetupKind, kind: ExplorationKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(Preset::Desk);
    c.setup = setup;
    c.exploration = kind;
    c.n_transitions = 1000;
    c.trials = 2;
    c.base_seed = 11;
    c.train.max_epochs = 300;
    c.train.eval_every = 100;
    c.train.decay_epochs = 300;
    c
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn gen_data_counts_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(SetupKind::GridWorld, ExplorationKind::Mm);
    let a = cmd_gen_data(&cfg, &dir.path().join("a")).unwrap();
    assert_eq!((a.valid, a.discarded), (1000, 0));
    let b = cmd_gen_data(&cfg, &dir.path().join("b")).unwrap();
    for f in ["dataset.smds", "scene.json", "manifest.json"] {
        assert_eq!(read(&dir.path().join("a").join(f)), read(&dir.path().join("b").join(f)), "{f}");
    }
    assert_eq!(Dataset::load(&b.path).unwrap().len(), 1000);

    let arm = cmd_gen_data(&tiny(SetupKind::ArmDistance, ExplorationKind::Mmt), &dir.path().join("arm")).unwrap();
    assert_eq!(arm.valid, 1000);
    assert!(arm.discarded > 0);
    assert_eq!(arm.attempted, 1000 + arm.discarded);
}

#[test]
fn manifest_hash_tracks_config() {
    let cfg = tiny(SetupKind::GridWorld, ExplorationKind::Mm);
    let same = tiny(SetupKind::GridWorld, ExplorationKind::Mm);
    assert_eq!(cfg.hash().unwrap(), same.hash().unwrap());
    let mut other = cfg.clone();
    other.train.max_epochs = 400;
    assert_ne!(cfg.hash().unwrap(), other.hash().unwrap());
    let mut other = cfg.clone();
    other.base_seed += 1;
    assert_ne!(cfg.hash().unwrap(), other.hash().unwrap());

    let dir = tempfile::tempdir().unwrap();
    cmd_gen_data(&cfg, dir.path()).unwrap();
    let m: Manifest = serde_json::from_slice(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(m.config_hash, cfg.hash().unwrap());
    assert_eq!(m.seeds, vec![11]);
    assert_eq!(m.config, cfg);
}

#[test]
fn train_eval_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(SetupKind::GridWorld, ExplorationKind::Mmt);
    let data_dir = dir.path().join("data");
    let summary = cmd_gen_data(&cfg, &data_dir).unwrap();

    let full = dir.path().join("full");
    let outcome = cmd_train(&cfg, &summary.path, &full, false).unwrap();
    assert!(outcome.is_ok());
    let csv = String::from_utf8(read(&full.join("curve.csv"))).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CURVE_HEADER);
    assert_eq!(CURVE_HEADER, "epoch,loss,q_p,q_h,lr,wall_time_s");
    let curve = LearningCurve::from_csv(&csv).unwrap();
    assert_eq!(curve.rows.iter().map(|r| r.epoch).collect::<Vec<_>>(), vec![100, 200, 300]);

    // eval reproduces the last row and checks the scene
    let report = cmd_eval(&full, Some(&data_dir.join("scene.json"))).unwrap();
    let last = curve.last().unwrap();
    assert!((report.q_p - last.q_p).abs() <= 1e-12 && (report.q_h - last.q_h).abs() <= 1e-12);
    assert_eq!(report.epoch, 300);
    let json: serde_json::Value = serde_json::from_slice(&read(&full.join("eval.json"))).unwrap();
    for key in ["epoch", "q_p", "q_h", "collapse", "clouds"] {
        assert!(json.get(key).is_some(), "eval.json lacks {key}");
    }
    for key in ["m", "h", "p", "h_proj_p", "p_proj_h", "labels", "map_h_to_p", "map_p_to_h"] {
        assert!(json["clouds"].get(key).is_some(), "clouds lack {key}");
    }
    let wrong = dir.path().join("wrong.json");
    SceneFile::new(Scene::random(SetupKind::GridWorld, &mut Rng::new(999)).unwrap(), 999).save(&wrong).unwrap();
    assert!(matches!(cmd_eval(&full, Some(&wrong)), Err(Error::Provenance(_))));

    // interrupted run: stop after the first snapshot, as a crash would
    let part = dir.path().join("part");
    std::fs::create_dir_all(&part).unwrap();
    let data = Dataset::load(&summary.path).unwrap().normalize().unwrap();
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = data.provenance().seed;
    let model = PredictiveModel::new(3, 4, cfg.dim_h, cfg.activation, &mut Rng::stream(train_cfg.seed, Stream::Init))
        .unwrap();
    let mut trainer = Trainer::new(model, train_cfg).unwrap();
    let ctx: experiment::RunContext = serde_json::from_slice(&read(&full.join("context.json"))).unwrap();
    let grid = ctx.eval_grid().unwrap();
    let err = trainer
        .run(&data, &grid, |t| {
            t.checkpoint().save(&part.join("checkpoint.json"))?;
            Err(Error::Config("interrupted".into()))
        })
        .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert_eq!(TrainingCheckpoint::load(&part.join("checkpoint.json")).unwrap().epoch, 100);

    let resumed = cmd_train(&cfg, &summary.path, &part, true).unwrap();
    assert_eq!(read(&part.join("curve.csv")), read(&full.join("curve.csv")));
    assert_eq!(read(&part.join("clouds.json")), read(&full.join("clouds.json")));
    assert_eq!(resumed.final_q_p, outcome.final_q_p);

    // resuming under a different training config is refused
    let mut changed = cfg.clone();
    changed.train.lr_start = 2e-3;
    assert!(matches!(cmd_train(&changed, &summary.path, &part, true), Err(Error::Provenance(_))));
    // and a dataset from another regime is refused outright
    let mut other = cfg.clone();
    other.exploration = ExplorationKind::Mm;
    assert!(matches!(cmd_train(&other, &summary.path, &dir.path().join("x"), false), Err(Error::Provenance(_))));
}

#[test]
fn study_layout_aggregates_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(SetupKind::GridWorld, ExplorationKind::Mmt);
    cfg.compare = vec![ExplorationKind::Mm];
    cfg.trials = 3;
    cfg.n_transitions = 500;
    cfg.train.max_epochs = 200;
    let report = cmd_study(&cfg, dir.path(), 2).unwrap();
    assert_eq!(report.regimes.len(), 2);
    for (sub, kind) in [("mmt", ExplorationKind::Mmt), ("mm", ExplorationKind::Mm)] {
        let r = report.regime(kind).unwrap();
        assert_eq!(r.trials.len(), 3);
        for t in 0..3 {
            assert!(dir.path().join(sub).join(format!("trial_{t:03}")).join("curve.csv").exists());
        }
        assert!(!dir.path().join(sub).join("trial_003").exists());
        let agg_text = String::from_utf8(read(&dir.path().join(sub).join("aggregate.csv"))).unwrap();
        assert_eq!(agg_text.lines().next().unwrap(), AGGREGATE_HEADER);
        let agg = experiment::parse_aggregate_csv(&agg_text).unwrap();
        for (i, row) in agg.iter().enumerate() {
            let vals: Vec<f64> = (0..3)
                .map(|t| {
                    let p = dir.path().join(sub).join(format!("trial_{t:03}/curve.csv"));
                    LearningCurve::from_csv(&String::from_utf8(read(&p)).unwrap()).unwrap().rows[i].q_p
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / 3.0;
            assert!((row.q_p_mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        }
        for f in ["loss.svg", "q_p.svg", "q_h.svg", "projection.svg", "h_axes.svg"] {
            assert!(dir.path().join(sub).join(f).exists(), "{sub}/{f}");
        }
    }
    for m in ["loss", "q_p", "q_h"] {
        assert!(dir.path().join(format!("overlay_{m}.svg")).exists());
    }
    let summary = String::from_utf8(read(&dir.path().join("summary.csv"))).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);

    let before = read(&dir.path().join("overlay_q_p.svg"));
    std::fs::remove_file(dir.path().join("overlay_q_p.svg")).unwrap();
    let written = cmd_plot(dir.path()).unwrap();
    assert!(written.iter().any(|p| p.ends_with("overlay_q_p.svg")));
    assert!(dir.path().join("mm/trial_001/curve.svg").exists());
    // plots are redrawn from the CSVs, so the overlay comes back unchanged
    assert!(read(&dir.path().join("overlay_q_p.svg")) == before);
}

#[test]
fn failing_trials_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(SetupKind::GridWorld, ExplorationKind::Mm);
    cfg.train.divergence_threshold = 1e-12;
    let err = cmd_study(&cfg, dir.path(), 1).unwrap_err();
    assert!(err.to_string().contains("every trial failed"), "{err}");
}

#[test]
fn cli_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_sensorimotor");
    let out = dir.path().join("data");
    let status = Command::new(bin)
        .args(["gen-data", "--out"])
        .arg(&out)
        .args(["--seed", "3", "--n_transitions", "400", "--exploration=MM"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(String::from_utf8_lossy(&status.stdout).contains("400"));
    let m: Manifest = serde_json::from_slice(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(m.config.base_seed, 3);
    assert_eq!(m.config.exploration, ExplorationKind::Mm);

    let run = dir.path().join("run");
    let status = Command::new(bin)
        .args(["train", "--data"])
        .arg(out.join("dataset.smds"))
        .arg("--out")
        .arg(&run)
        .args(["--seed", "3", "--n_transitions", "400", "--exploration", "MM", "--train.max_epochs", "200"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let status = Command::new(bin).arg("eval").arg(&run).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let bad = Command::new(bin).args(["gen-data", "--out"]).arg(&out).args(["--no_such_field", "1"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("no_such_field"));
}
