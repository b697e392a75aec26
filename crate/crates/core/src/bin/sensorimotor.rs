use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sensorimotor_core::experiment::{self, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "sensorimotor", version, about = "Sensorimotor prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config; fields left out keep their preset values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// Base seed; trial k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Field overrides such as `--train.max_epochs 1000` or `--exploration=MM`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--FIELD VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => None,
        };
        let mut pairs = parse_overrides(&self.overrides)?;
        if let Some(seed) = self.seed {
            pairs.push(("base_seed".into(), seed.to_string()));
        }
        if self.preset == Preset::Paper {
            eprintln!("note: the paper preset trains for up to 2e6 epochs per trial; expect many hours");
        }
        Ok(ExperimentConfig::resolve(self.preset, text.as_deref(), &pairs)?)
    }
}

fn parse_overrides(raw: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        let Some(name) = arg.strip_prefix("--") else {
            bail!("unexpected argument `{arg}`; overrides look like --field.name value");
        };
        match name.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().with_context(|| format!("--{name} needs a value"))?;
                out.push((name.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset with its scene.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Train one model on a generated dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from the checkpoint in --out.
        #[arg(long)]
        resume: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run all trials of one or more exploration regimes.
    Study {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Re-evaluate the checkpoint of a training run.
    Eval {
        /// Directory written by `train` or a study trial.
        run: PathBuf,
        /// Scene file the run must have been trained in.
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Redraw SVG figures from the CSV/JSON outputs under a directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::GenData { out, cfg } => {
            let config = cfg.resolve()?;
            let s = experiment::cmd_gen_data(&config, &out)?;
            println!(
                "{}: {} valid transitions, {} attempted, {} discarded, {} translations",
                s.path.display(),
                s.valid,
                s.attempted,
                s.discarded,
                s.translations
            );
        }
        Command::Train { data, out, resume, cfg } => {
            let config = cfg.resolve()?;
            let o = experiment::cmd_train(&config, &data, &out, resume)
                .with_context(|| format!("training into {} (last checkpoint kept there)", out.display()))?;
            println!(
                "final loss {:e}  Q_p {:.6}  Q_h {:.6}{}",
                o.final_loss.unwrap_or(f64::NAN),
                o.final_q_p.unwrap_or(f64::NAN),
                o.final_q_h.unwrap_or(f64::NAN),
                o.stopped_at.map_or(String::new(), |e| format!("  (stopped at epoch {e})"))
            );
        }
        Command::Study { out, jobs, cfg } => {
            let config = cfg.resolve()?;
            let report = experiment::cmd_study(&config, &out, jobs)?;
            println!("{:<6} {:>6} {:>12} {:>12}", "regime", "ok", "median Q_p", "median loss");
            for r in &report.regimes {
                let ok = r.trials.iter().filter(|t| t.is_ok()).count();
                println!(
                    "{:<6} {:>3}/{:<2} {:>12.3e} {:>12.3e}",
                    r.exploration.as_str(),
                    ok,
                    r.trials.len(),
                    r.median_final_q_p.unwrap_or(f64::NAN),
                    r.median_final_loss.unwrap_or(f64::NAN)
                );
                for t in r.trials.iter().filter(|t| !t.is_ok()) {
                    eprintln!("  trial {} failed: {}", t.trial, t.status);
                }
            }
        }
        Command::Eval { run, scene } => {
            let r = experiment::cmd_eval(&run, scene.as_deref())?;
            println!("epoch {}  Q_p {:.6e}  Q_h {:.6e}", r.epoch, r.q_p, r.q_h);
            if let Some(c) = r.collapse {
                println!("redundancy collapse {c:.4}");
            }
        }
        Command::Plot { out } => {
            for p in experiment::cmd_plot(&out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
