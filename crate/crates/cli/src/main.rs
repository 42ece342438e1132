//! `csimeta`: command-line driver for the CSI feedback meta-learning
//! pipeline.
//!
//! Subcommands cover the whole workflow: synthesize a meta task environment,
//! meta-train the feedback autoencoder (from a dataset file or regenerated
//! on the fly), generate seeded target-scenario channels, augment them via
//! statistical profiles, retrain on a target dataset, and evaluate a
//! checkpoint. Exit codes: 0 success, 2 configuration error, 3 I/O or
//! format error, 4 numeric failure.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use csi_meta::augment::{augment_channel, estimate_profile, StatProfile};
use csi_meta::autoencoder::{Model, TrainState};
use csi_meta::channel::{extract_csi, gen_multipath_channel, time_to_freq};
use csi_meta::csi::{sgcs, CsiMatrix};
use csi_meta::dataio;
use csi_meta::error::{Error, Result};
use csi_meta::metaenv::build_meta_env;
use csi_meta::metatrain::{reptile_step, target_retrain};
use csi_meta::rng::RngStream;

use csi_meta_cli::config::{roles, ExperimentConfig};
use csi_meta_cli::provenance::Provenance;
use csi_meta_cli::report::EvalReport;

#[derive(Parser)]
#[command(name = "csimeta", version, about = "CSI feedback meta-learning pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the meta task environment into a dataset file.
    GenMetaEnv {
        #[command(flatten)]
        config: ConfigArg,
        /// Output dataset (kind 0, with a task boundary table).
        #[arg(long)]
        out: PathBuf,
    },
    /// Meta-train the autoencoder with serial Reptile updates.
    MetaTrain {
        #[command(flatten)]
        config: ConfigArg,
        /// Task environment dataset produced by gen-meta-env.
        #[arg(long, conflicts_with = "stream")]
        env: Option<PathBuf>,
        /// Regenerate the task stream from the seed instead of reading a file.
        #[arg(long)]
        stream: bool,
        /// Output checkpoint.
        #[arg(long)]
        out: PathBuf,
        /// Per-task CSV log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Generate seeded target-scenario channels.
    GenSeeds {
        #[command(flatten)]
        config: ConfigArg,
        /// Scenario name from the config's [scenario.*] tables.
        #[arg(long)]
        scenario: String,
        /// Output dataset (kind 1, grouped per UE).
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's UE count.
        #[arg(long)]
        ues: Option<usize>,
        /// Override the scenario's slots per UE.
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Augment seeded channels into a target CSI dataset.
    Augment {
        #[command(flatten)]
        config: ConfigArg,
        /// Seeded channel dataset (kind 1, grouped per UE).
        #[arg(long)]
        seeds: PathBuf,
        /// Output CSI dataset (kind 0, grouped per UE).
        #[arg(long)]
        out: PathBuf,
        /// Override [augment].n_aug.
        #[arg(long)]
        n_aug: Option<usize>,
        /// Write the estimated per-UE profiles for reuse.
        #[arg(long)]
        profile_out: Option<PathBuf>,
        /// Reuse previously estimated profiles instead of estimating.
        #[arg(long)]
        profile_in: Option<PathBuf>,
    },
    /// Retrain a checkpoint (or a fresh model) on a target dataset.
    Retrain {
        #[command(flatten)]
        config: ConfigArg,
        /// Starting checkpoint.
        #[arg(long, conflicts_with = "init_random")]
        checkpoint: Option<PathBuf>,
        /// Start from a fresh random initialization instead.
        #[arg(long)]
        init_random: bool,
        /// Target CSI dataset (kind 0).
        #[arg(long)]
        data: PathBuf,
        /// Held-out test dataset; defaults to a seeded split of --data.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Output checkpoint.
        #[arg(long)]
        out: PathBuf,
        /// Convergence CSV (step, train_loss, best_test_sgcs).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Report steps-to-threshold for this best-so-far SGCS target.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Evaluate a checkpoint on a CSI dataset and emit a JSON report.
    Eval {
        /// Checkpoint to evaluate.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Evaluation dataset (kind 0).
        #[arg(long)]
        data: PathBuf,
        /// Score targets against themselves (pipeline sanity check).
        #[arg(long)]
        bypass: bool,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config used only to stamp provenance.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidArgument(_) => 2,
        Error::Io(_) | Error::Format(_) => 3,
        Error::DegenerateInput(_) | Error::NumericFailure(_) => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenMetaEnv { config, out } => gen_meta_env(&config.config, &out),
        Command::MetaTrain {
            config,
            env,
            stream,
            out,
            log,
        } => meta_train_cmd(&config.config, env.as_deref(), stream, &out, log.as_deref()),
        Command::GenSeeds {
            config,
            scenario,
            out,
            ues,
            slots,
        } => gen_seeds(&config.config, &scenario, &out, ues, slots),
        Command::Augment {
            config,
            seeds,
            out,
            n_aug,
            profile_out,
            profile_in,
        } => augment_cmd(
            &config.config,
            &seeds,
            &out,
            n_aug,
            profile_out.as_deref(),
            profile_in.as_deref(),
        ),
        Command::Retrain {
            config,
            checkpoint,
            init_random,
            data,
            test,
            out,
            log,
            threshold,
        } => retrain_cmd(
            &config.config,
            checkpoint.as_deref(),
            init_random,
            &data,
            test.as_deref(),
            &out,
            log.as_deref(),
            threshold,
        ),
        Command::Eval {
            checkpoint,
            data,
            bypass,
            out,
            config,
        } => eval_cmd(&checkpoint, &data, bypass, out.as_deref(), config.as_deref()),
    }
}

fn gen_meta_env(config_path: &Path, out: &Path) -> Result<()> {
    let (cfg, raw) = ExperimentConfig::load(config_path)?;
    let basis = cfg.build_basis()?;
    let env_cfg = cfg.meta_env_config();
    let root = RngStream::from_seed(cfg.seeds.base).child(roles::META_ENV);
    let mut samples = Vec::new();
    let mut groups = Vec::new();
    for task in build_meta_env(&env_cfg, &basis, &root) {
        let task = task?;
        let start = samples.len() as u64;
        samples.extend(task.samples);
        groups.push((start, samples.len() as u64 - start));
    }
    if samples.is_empty() {
        return Err(Error::invalid_config("environment has no tasks (t = 0)"));
    }
    dataio::write_csi_dataset(out, &samples, Some(&groups))?;
    Provenance::new(&raw, cfg.seeds.base, "gen-meta-env").write_sidecar(out)?;
    println!(
        "wrote {} tasks / {} samples to {}",
        groups.len(),
        samples.len(),
        out.display()
    );
    Ok(())
}

fn meta_train_cmd(
    config_path: &Path,
    env: Option<&Path>,
    stream: bool,
    out: &Path,
    log: Option<&Path>,
) -> Result<()> {
    let (cfg, raw) = ExperimentConfig::load(config_path)?;
    if env.is_none() && !stream {
        return Err(Error::invalid_argument("need --env FILE or --stream"));
    }
    let meta_cfg = cfg.meta_config();
    let model = Model::init(
        cfg.model_config(),
        &mut RngStream::from_seed(cfg.seeds.base).child(roles::MODEL_INIT),
    )?;
    let mut state = TrainState::new(
        model,
        cfg.train.inner_lr,
        RngStream::from_seed(cfg.seeds.base).child(roles::META_TRAIN),
    );

    // Either source yields the same task sequence for one seed, so the log
    // and checkpoint are identical between file and stream mode.
    let tasks: Box<dyn Iterator<Item = Result<Vec<CsiMatrix>>>> = if let Some(env_path) = env {
        let (samples, groups) = dataio::read_csi_dataset(env_path)?;
        let groups =
            groups.ok_or_else(|| Error::format("environment dataset lacks a task boundary table"))?;
        Box::new(GroupIter {
            samples,
            groups,
            next: 0,
        })
    } else {
        let basis = cfg.build_basis()?;
        let env_cfg = cfg.meta_env_config();
        let root = RngStream::from_seed(cfg.seeds.base).child(roles::META_ENV);
        Box::new(StreamAdapter {
            env_cfg,
            basis,
            root,
            next_task: 0,
        })
    };

    let mut log_rows = String::new();
    let mut count = 0usize;
    for (j, task) in tasks.enumerate() {
        let samples = task?;
        let t0 = Instant::now();
        let post = reptile_step(&mut state, &samples, &meta_cfg, j as u64)?;
        let ms = t0.elapsed().as_millis();
        log_rows.push_str(&format!("{j},{post},{ms}\n"));
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid_argument("task stream yielded no tasks"));
    }
    dataio::write_checkpoint(out, &state.model)?;
    let prov = Provenance::new(&raw, cfg.seeds.base, "meta-train");
    prov.write_sidecar(out)?;
    if let Some(log_path) = log {
        let mut text = prov.csv_comments();
        text.push_str("task,post_adaptation_loss,wall_time_ms\n");
        text.push_str(&log_rows);
        std::fs::write(log_path, text)?;
    }
    println!("meta-trained on {count} tasks -> {}", out.display());
    Ok(())
}

/// Iterator over record groups of a loaded dataset.
struct GroupIter {
    samples: Vec<CsiMatrix>,
    groups: Vec<(u64, u64)>,
    next: usize,
}

impl Iterator for GroupIter {
    type Item = Result<Vec<CsiMatrix>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.groups.len() {
            return None;
        }
        let (start, len) = self.groups[self.next];
        self.next += 1;
        let (start, len) = (start as usize, len as usize);
        if start + len > self.samples.len() {
            return Some(Err(Error::format("group table exceeds record count")));
        }
        Some(Ok(self.samples[start..start + len].to_vec()))
    }
}

/// Regenerates the task stream lazily; owns what the environment iterator
/// borrows.
struct StreamAdapter {
    env_cfg: csi_meta::metaenv::MetaEnvConfig,
    basis: csi_meta::basis::BasisSet,
    root: RngStream,
    next_task: usize,
}

impl Iterator for StreamAdapter {
    type Item = Result<Vec<CsiMatrix>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_task >= self.env_cfg.task_count {
            return None;
        }
        let j = self.next_task;
        self.next_task = j + 1;
        let item = build_meta_env(&self.env_cfg, &self.basis, &self.root)
            .nth(j)
            .expect("task index in range");
        Some(item.map(|t| t.samples))
    }
}

fn gen_seeds(
    config_path: &Path,
    scenario: &str,
    out: &Path,
    ues: Option<usize>,
    slots: Option<usize>,
) -> Result<()> {
    let (cfg, raw) = ExperimentConfig::load(config_path)?;
    let section = cfg.scenario(scenario)?;
    let n_ue = ues.unwrap_or(section.n_ue);
    let n_slot = slots.unwrap_or(section.n_slot);
    if n_ue == 0 || n_slot == 0 {
        return Err(Error::invalid_config("need at least one UE and one slot"));
    }
    let root = RngStream::from_seed(cfg.seeds.base)
        .child(roles::SEED_GEN)
        .child(section.seed);
    let mut channels = Vec::with_capacity(n_ue * n_slot);
    let mut groups = Vec::with_capacity(n_ue);
    for ue in 0..n_ue {
        let scene = cfg.ue_scenario(section, ue)?;
        let ue_rng = root.child(ue as u64);
        let start = channels.len() as u64;
        for slot in 0..n_slot {
            let mut rng = ue_rng.child(slot as u64);
            channels.push(gen_multipath_channel(&scene, &mut rng)?);
        }
        groups.push((start, n_slot as u64));
    }
    dataio::write_channel_dataset(out, &channels, Some(&groups))?;
    Provenance::new(&raw, cfg.seeds.base, "gen-seeds").write_sidecar(out)?;
    println!(
        "wrote {n_ue} UEs x {n_slot} slots ({} channels) to {}",
        channels.len(),
        out.display()
    );
    Ok(())
}

fn augment_cmd(
    config_path: &Path,
    seeds: &Path,
    out: &Path,
    n_aug: Option<usize>,
    profile_out: Option<&Path>,
    profile_in: Option<&Path>,
) -> Result<()> {
    let (cfg, raw) = ExperimentConfig::load(config_path)?;
    let n_aug = n_aug.unwrap_or(cfg.augment.n_aug);
    if n_aug == 0 {
        return Err(Error::invalid_config("n_aug must be >= 1"));
    }
    let profiles: Vec<StatProfile> = if let Some(path) = profile_in {
        dataio::read_profiles(path)?
    } else {
        let (channels, groups) = dataio::read_channel_dataset(seeds)?;
        let groups =
            groups.ok_or_else(|| Error::format("seed dataset lacks a per-UE group table"))?;
        let mut profiles = Vec::with_capacity(groups.len());
        for (q, &(start, len)) in groups.iter().enumerate() {
            let (start, len) = (start as usize, len as usize);
            if start + len > channels.len() {
                return Err(Error::format("group table exceeds record count"));
            }
            profiles.push(estimate_profile(&channels[start..start + len], q as u64)?);
        }
        profiles
    };
    if let Some(path) = profile_out {
        dataio::write_profiles(path, &profiles)?;
        Provenance::new(&raw, cfg.seeds.base, "augment").write_sidecar(path)?;
    }

    let root = RngStream::from_seed(cfg.seeds.base).child(roles::AUGMENT);
    let mut samples = Vec::with_capacity(profiles.len() * n_aug);
    let mut out_groups = Vec::with_capacity(profiles.len());
    for (q, profile) in profiles.iter().enumerate() {
        let ue_rng = root.child(q as u64);
        let start = samples.len() as u64;
        for i in 0..n_aug {
            let mut rng = ue_rng.child(i as u64);
            let h = augment_channel(profile, &mut rng)?;
            let hf = time_to_freq(&h, cfg.system.n_sc)?;
            let (w, _) = extract_csi(&hf, cfg.system.n_gran)?;
            samples.push(w);
        }
        out_groups.push((start, n_aug as u64));
    }
    dataio::write_csi_dataset(out, &samples, Some(&out_groups))?;
    Provenance::new(&raw, cfg.seeds.base, "augment").write_sidecar(out)?;
    println!(
        "augmented {} UEs x {n_aug} -> {} samples at {}",
        profiles.len(),
        samples.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn retrain_cmd(
    config_path: &Path,
    checkpoint: Option<&Path>,
    init_random: bool,
    data: &Path,
    test: Option<&Path>,
    out: &Path,
    log: Option<&Path>,
    threshold: Option<f64>,
) -> Result<()> {
    let (cfg, raw) = ExperimentConfig::load(config_path)?;
    let model = match (checkpoint, init_random) {
        (Some(path), false) => dataio::read_checkpoint(path)?,
        (None, true) => Model::init(
            cfg.model_config(),
            &mut RngStream::from_seed(cfg.seeds.base).child(roles::MODEL_INIT),
        )?,
        _ => return Err(Error::invalid_argument("need --checkpoint FILE or --init-random")),
    };
    let (all, _) = dataio::read_csi_dataset(data)?;
    let (train, test_set): (Vec<CsiMatrix>, Vec<CsiMatrix>) = if let Some(test_path) = test {
        let (t, _) = dataio::read_csi_dataset(test_path)?;
        (all, t)
    } else {
        // Seeded shuffle split keyed off the base seed.
        let mut idx: Vec<usize> = (0..all.len()).collect();
        let mut rng = RngStream::from_seed(cfg.seeds.base).child(roles::SPLIT);
        for i in (1..idx.len()).rev() {
            let j = rng.uniform_below(i + 1);
            idx.swap(i, j);
        }
        let n_test = ((all.len() as f64) * cfg.retrain.test_fraction).ceil() as usize;
        let n_test = n_test.max(1).min(all.len().saturating_sub(1).max(1));
        let test_set: Vec<CsiMatrix> = idx[..n_test].iter().map(|&i| all[i].clone()).collect();
        let train: Vec<CsiMatrix> = idx[n_test..].iter().map(|&i| all[i].clone()).collect();
        (train, test_set)
    };

    let mut state = TrainState::new(
        model,
        cfg.retrain.lr,
        RngStream::from_seed(cfg.seeds.base).child(roles::RETRAIN),
    );
    let retrain_cfg = cfg.retrain_config(threshold);
    let outcome = target_retrain(&mut state, &train, &test_set, &retrain_cfg)?;

    dataio::write_checkpoint(out, &state.model)?;
    let prov = Provenance::new(&raw, cfg.seeds.base, "retrain");
    prov.write_sidecar(out)?;

    if let Some(log_path) = log {
        let mut text = prov.csv_comments();
        text.push_str(&format!(
            "# train={} test={} steps={} threshold={}\n",
            train.len(),
            test_set.len(),
            retrain_cfg.steps,
            retrain_cfg
                .threshold
                .map(|t| t.to_string())
                .unwrap_or_else(|| "none".into()),
        ));
        text.push_str("step,train_loss,best_test_sgcs\n");
        let mut loss_iter = outcome.train_losses.iter().peekable();
        let mut window: Vec<f64> = Vec::new();
        for &(step, best) in &outcome.curve {
            while let Some(&&(s, l)) = loss_iter.peek() {
                if s <= step {
                    window.push(l);
                    loss_iter.next();
                } else {
                    break;
                }
            }
            let train_loss = if window.is_empty() {
                f64::NAN
            } else {
                window.iter().sum::<f64>() / window.len() as f64
            };
            window.clear();
            text.push_str(&format!("{step},{train_loss},{best}\n"));
        }
        std::fs::write(log_path, text)?;
    }

    match (retrain_cfg.threshold, outcome.steps_to_threshold) {
        (Some(t), Some(s)) => println!("steps_to_threshold[{t}]={s}"),
        (Some(t), None) => println!("steps_to_threshold[{t}]=unreached"),
        _ => {}
    }
    println!(
        "retrained {} steps, best test sgcs {:.4} -> {}",
        retrain_cfg.steps,
        outcome.final_best(),
        out.display()
    );
    Ok(())
}

fn eval_cmd(
    checkpoint: &Path,
    data: &Path,
    bypass: bool,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<()> {
    let model = dataio::read_checkpoint(checkpoint)?;
    let (samples, _) = dataio::read_csi_dataset(data)?;
    if samples.is_empty() {
        return Err(Error::invalid_argument("empty evaluation dataset"));
    }
    let mut scores = Vec::with_capacity(samples.len());
    for w in &samples {
        let score = if bypass {
            sgcs(w, w)?
        } else {
            sgcs(w, &model.autoencode(w)?)?
        };
        scores.push(score);
    }
    let config_bytes = match config {
        Some(path) => std::fs::read(path)?,
        None => Vec::new(),
    };
    let prov = Provenance::new(&config_bytes, 0, "eval");
    let report = EvalReport::from_scores(
        scores,
        model.cfg.feedback_bits,
        model.cfg.bits_per_dim,
        bypass,
        prov,
    );
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::format(format!("{e}")))?
        + "\n";
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => {
            std::io::stdout().write_all(json.as_bytes())?;
        }
    }
    Ok(())
}
