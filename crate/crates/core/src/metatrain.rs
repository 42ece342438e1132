//! Reptile meta-training over the task environment and target-scenario
//! retraining.
//!
//! The meta update is the serial Reptile rule: adapt a clone of the current
//! parameters for `g` inner steps on one task, then blend
//! `theta <- theta + eps * (theta' - theta)`. Inner optimizer moments are
//! task-local and the outer state's moments are reset after every task, so
//! no optimizer memory leaks across the blend. The `eps = 0` and `eps = 1`
//! endpoints are implemented as exact copies, not arithmetic, so they are
//! bit-identical by construction.

use crate::autoencoder::TrainState;
use crate::csi::CsiMatrix;
use crate::error::{Error, Result};

/// Meta-training knobs.
#[derive(Debug, Clone)]
pub struct MetaConfig {
    /// Meta step size in (0, 1].
    pub epsilon: f64,
    /// Inner steps per task.
    pub inner_steps: usize,
    /// Inner-loop Adam learning rate.
    pub inner_lr: f64,
    /// Inner-loop batch size.
    pub inner_batch: usize,
}

impl MetaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid_config("epsilon must lie in [0, 1]"));
        }
        if self.inner_steps == 0 {
            return Err(Error::invalid_config("inner_steps must be >= 1"));
        }
        if self.inner_batch == 0 {
            return Err(Error::invalid_config("inner_batch must be >= 1"));
        }
        if self.inner_lr <= 0.0 {
            return Err(Error::invalid_config("inner_lr must be positive"));
        }
        Ok(())
    }
}

/// Per-task log row of a meta-training run.
#[derive(Debug, Clone, Copy)]
pub struct TaskLog {
    pub task_index: usize,
    /// Mean loss over the whole task after the inner adaptation (before the
    /// blend), i.e. the negative post-adaptation SGCS.
    pub post_adaptation_loss: f64,
}

/// One Reptile update on a task's samples. `ordinal` is the task's position
/// in the serial stream; the inner loop draws its batches from
/// `state.rng.child(ordinal)`, which makes file-backed and regenerated task
/// streams bit-equivalent. Returns the post-adaptation loss.
pub fn reptile_step(
    state: &mut TrainState,
    samples: &[CsiMatrix],
    cfg: &MetaConfig,
    ordinal: u64,
) -> Result<f64> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::invalid_argument("task has no samples"));
    }
    let mut inner = TrainState::new(state.model.clone(), cfg.inner_lr, state.rng.child(ordinal));
    inner.train_steps(samples, cfg.inner_steps, cfg.inner_batch)?;
    let refs: Vec<&CsiMatrix> = samples.iter().collect();
    let (post_loss, _) = inner.model.loss_and_grad(&refs)?;

    if cfg.epsilon == 1.0 {
        state.model.params = inner.model.params;
    } else if cfg.epsilon != 0.0 {
        let eps = cfg.epsilon;
        for (p, q) in state
            .model
            .params
            .blocks_mut()
            .zip(inner.model.params.blocks())
        {
            for (a, b) in p.w.iter_mut().zip(q.w.iter()) {
                *a += eps * (*b - *a);
            }
            for (a, b) in p.b.iter_mut().zip(q.b.iter()) {
                *a += eps * (*b - *a);
            }
        }
    }
    // Inner moments are task-local; the outer state never accumulates any.
    state.reset_optimizer();
    Ok(post_loss)
}

/// Serial Reptile pass over a task stream. Task order is part of the
/// reproducibility contract; tasks are consumed strictly in stream order.
pub fn meta_train<I>(env: I, cfg: &MetaConfig, state: &mut TrainState) -> Result<Vec<TaskLog>>
where
    I: IntoIterator<Item = Result<Vec<CsiMatrix>>>,
{
    cfg.validate()?;
    let mut logs = Vec::new();
    for (j, task) in env.into_iter().enumerate() {
        let samples = task?;
        let post = reptile_step(state, &samples, cfg, j as u64)?;
        logs.push(TaskLog {
            task_index: j,
            post_adaptation_loss: post,
        });
    }
    if logs.is_empty() {
        return Err(Error::invalid_argument("task stream yielded no tasks"));
    }
    Ok(logs)
}

/// Target-retraining knobs.
#[derive(Debug, Clone)]
pub struct RetrainConfig {
    /// Step budget.
    pub steps: usize,
    /// Evaluate the test SGCS every this many steps.
    pub eval_every: usize,
    pub batch_size: usize,
    /// Best-so-far SGCS target; reaching it records the step index.
    pub threshold: Option<f64>,
    /// Stop as soon as the threshold is reached.
    pub stop_at_threshold: bool,
}

impl RetrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eval_every == 0 {
            return Err(Error::invalid_config("eval_every must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid_config("batch_size must be >= 1"));
        }
        Ok(())
    }
}

/// Result of a retraining run.
#[derive(Debug, Clone)]
pub struct RetrainOutcome {
    /// `(step, best-so-far test SGCS)` at every evaluation point, starting
    /// with the initial evaluation at step 0. Nondecreasing by construction.
    pub curve: Vec<(usize, f64)>,
    /// First step at which the best-so-far SGCS reached the threshold.
    pub steps_to_threshold: Option<usize>,
    /// `(step, training batch loss)` per executed step.
    pub train_losses: Vec<(usize, f64)>,
}

impl RetrainOutcome {
    pub fn final_best(&self) -> f64 {
        self.curve.last().map(|&(_, v)| v).unwrap_or(f64::NAN)
    }
}

/// Fine-tunes a (meta-initialized or fresh) model on target-scenario samples,
/// tracking the best test SGCS seen so far.
pub fn target_retrain(
    state: &mut TrainState,
    train: &[CsiMatrix],
    test: &[CsiMatrix],
    cfg: &RetrainConfig,
) -> Result<RetrainOutcome> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid_argument("train and test sets must be nonempty"));
    }
    let mut best = state.model.mean_sgcs(test)?;
    let mut curve = vec![(0usize, best)];
    let mut train_losses = Vec::new();
    let mut steps_to_threshold = match cfg.threshold {
        Some(t) if best >= t => Some(0),
        _ => None,
    };
    if !(cfg.stop_at_threshold && steps_to_threshold.is_some()) {
        for step in 1..=cfg.steps {
            let loss = state.train_steps(train, 1, cfg.batch_size)?;
            train_losses.push((step, loss));
            if step % cfg.eval_every == 0 || step == cfg.steps {
                let sgcs_now = state.model.mean_sgcs(test)?;
                if sgcs_now > best {
                    best = sgcs_now;
                }
                curve.push((step, best));
                if steps_to_threshold.is_none() {
                    if let Some(t) = cfg.threshold {
                        if best >= t {
                            steps_to_threshold = Some(step);
                            if cfg.stop_at_threshold {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(RetrainOutcome {
        curve,
        steps_to_threshold,
        train_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{Activation, Model, ModelConfig, QuantizerMode};
    use crate::basis::dft_basis;
    use crate::cmatrix::CMatrix;
    use crate::metaenv::{build_meta_env, MetaEnvConfig};
    use crate::rng::RngStream;

    fn desk_model(seed: u64) -> Model {
        let cfg = ModelConfig {
            n_tx: 8,
            n_subbands: 8,
            hidden: vec![64],
            feedback_bits: 32,
            bits_per_dim: 2,
            activation: Activation::Tanh,
            quantizer: QuantizerMode::Uniform,
        };
        Model::init(cfg, &mut RngStream::from_seed(seed)).unwrap()
    }

    fn desk_env_cfg(t: usize) -> MetaEnvConfig {
        MetaEnvConfig {
            task_count: t,
            max_ues: 4,
            max_slots: 4,
            l_task: 4,
            m_task: 4,
            alpha: 0.75,
            beta: 0.75,
            incomplete_basis: None,
        }
    }

    fn random_csi(rng: &mut RngStream, n_t: usize, n_sb: usize) -> CsiMatrix {
        let m = CMatrix::from_fn(n_t, n_sb, |_, _| rng.complex_normal());
        CsiMatrix::from_unnormalized(m).unwrap()
    }

    fn one_task(seed: u64) -> Vec<CsiMatrix> {
        let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
        let cfg = desk_env_cfg(1);
        build_meta_env(&cfg, &basis, &RngStream::from_seed(seed))
            .next()
            .unwrap()
            .unwrap()
            .samples
    }

    fn meta_cfg(eps: f64) -> MetaConfig {
        MetaConfig {
            epsilon: eps,
            inner_steps: 8,
            inner_lr: 1e-3,
            inner_batch: 4,
        }
    }

    #[test]
    fn epsilon_zero_keeps_parameters_bit_exact() {
        let samples = one_task(1);
        let mut state = TrainState::new(desk_model(2), 1e-3, RngStream::from_seed(3));
        let before = state.model.params.clone();
        reptile_step(&mut state, &samples, &meta_cfg(0.0), 0).unwrap();
        assert_eq!(state.model.params, before);
    }

    #[test]
    fn epsilon_one_equals_inner_result_bit_exact() {
        let samples = one_task(4);
        let mut state = TrainState::new(desk_model(5), 1e-3, RngStream::from_seed(6));
        // Reproduce the inner loop exactly as reptile_step derives it.
        let cfg = meta_cfg(1.0);
        let mut inner = TrainState::new(state.model.clone(), cfg.inner_lr, state.rng.child(0));
        inner.train_steps(&samples, cfg.inner_steps, cfg.inner_batch).unwrap();
        reptile_step(&mut state, &samples, &cfg, 0).unwrap();
        assert_eq!(state.model.params, inner.model.params);
    }

    #[test]
    fn quarter_blend_matches_formula() {
        let samples = one_task(7);
        let mut state = TrainState::new(desk_model(8), 1e-3, RngStream::from_seed(9));
        let theta = state.model.params.clone();
        let cfg = meta_cfg(0.25);
        let mut inner = TrainState::new(state.model.clone(), cfg.inner_lr, state.rng.child(0));
        inner.train_steps(&samples, cfg.inner_steps, cfg.inner_batch).unwrap();
        reptile_step(&mut state, &samples, &cfg, 0).unwrap();
        let mut moved = 0usize;
        for ((p, q), r) in state
            .model
            .params
            .blocks()
            .zip(theta.blocks())
            .zip(inner.model.params.blocks())
        {
            for k in 0..p.w.len() {
                let expect = q.w[k] + 0.25 * (r.w[k] - q.w[k]);
                assert!((p.w[k] - expect).abs() <= 1e-12);
                if p.w[k] != q.w[k] {
                    moved += 1;
                }
            }
        }
        assert!(moved > 0, "inner loop did not move any parameter");
    }

    #[test]
    fn single_task_meta_train_is_one_reptile_step() {
        let samples = one_task(10);
        let cfg = meta_cfg(0.25);
        let mut a = TrainState::new(desk_model(11), 1e-3, RngStream::from_seed(12));
        let mut b = a.clone();
        meta_train(vec![Ok(samples.clone())], &cfg, &mut a).unwrap();
        reptile_step(&mut b, &samples, &cfg, 0).unwrap();
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn meta_train_is_seed_deterministic() {
        let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
        let env_cfg = desk_env_cfg(6);
        let cfg = meta_cfg(0.25);
        let run = || {
            let mut state = TrainState::new(desk_model(13), 1e-3, RngStream::from_seed(14));
            let env = build_meta_env(&env_cfg, &basis, &RngStream::from_seed(15))
                .map(|t| t.map(|task| task.samples));
            meta_train(env, &cfg, &mut state).unwrap();
            state.model.params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn post_adaptation_loss_improves_over_stream() {
        // Learning-curve check: the mean post-adaptation SGCS over the last
        // 50 tasks beats the first 50.
        let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
        let env_cfg = desk_env_cfg(300);
        let cfg = MetaConfig {
            epsilon: 0.25,
            inner_steps: 32,
            inner_lr: 1e-3,
            inner_batch: 8,
        };
        let mut state = TrainState::new(desk_model(16), 1e-3, RngStream::from_seed(17));
        let env = build_meta_env(&env_cfg, &basis, &RngStream::from_seed(18))
            .map(|t| t.map(|task| task.samples));
        let logs = meta_train(env, &cfg, &mut state).unwrap();
        assert_eq!(logs.len(), 300);
        let head: f64 = logs[..50].iter().map(|l| -l.post_adaptation_loss).sum::<f64>() / 50.0;
        let tail: f64 = logs[250..].iter().map(|l| -l.post_adaptation_loss).sum::<f64>() / 50.0;
        assert!(
            tail > head,
            "post-adaptation sgcs no better: first-50 {head:.4}, last-50 {tail:.4}"
        );
    }

    #[test]
    fn retrain_zero_budget_has_only_initial_evaluation() {
        let mut rng = RngStream::from_seed(19);
        let data: Vec<CsiMatrix> = (0..8).map(|_| random_csi(&mut rng, 8, 8)).collect();
        let mut state = TrainState::new(desk_model(20), 1e-3, RngStream::from_seed(21));
        let cfg = RetrainConfig {
            steps: 0,
            eval_every: 5,
            batch_size: 4,
            threshold: None,
            stop_at_threshold: false,
        };
        let out = target_retrain(&mut state, &data[..4], &data[4..], &cfg).unwrap();
        assert_eq!(out.curve.len(), 1);
        assert_eq!(out.curve[0].0, 0);
        assert!(out.train_losses.is_empty());
    }

    #[test]
    fn retrain_curve_is_monotone_and_thresholds() {
        let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
        let env_cfg = desk_env_cfg(1);
        let task = build_meta_env(&env_cfg, &basis, &RngStream::from_seed(22))
            .next()
            .unwrap()
            .unwrap();
        // Retrain directly on the task samples; any improvement works.
        let mut state = TrainState::new(desk_model(23), 1e-3, RngStream::from_seed(24));
        let cfg = RetrainConfig {
            steps: 120,
            eval_every: 10,
            batch_size: 8,
            threshold: Some(0.4),
            stop_at_threshold: false,
        };
        let n = task.samples.len();
        let split = (n / 2).max(1);
        let out = target_retrain(&mut state, &task.samples[..split], &task.samples[split..], &cfg).unwrap();
        for pair in out.curve.windows(2) {
            assert!(pair[1].1 >= pair[0].1, "best-so-far regressed: {pair:?}");
            assert!(pair[1].0 > pair[0].0);
        }
        if let Some(s) = out.steps_to_threshold {
            let at = out.curve.iter().find(|&&(step, _)| step >= s).unwrap();
            assert!(at.1 >= 0.4);
        }
    }

    #[test]
    fn retrain_early_stop_truncates() {
        let mut rng = RngStream::from_seed(25);
        let data: Vec<CsiMatrix> = (0..10).map(|_| random_csi(&mut rng, 8, 8)).collect();
        let mut state = TrainState::new(desk_model(26), 1e-3, RngStream::from_seed(27));
        // Threshold 0 is met by the initial evaluation.
        let cfg = RetrainConfig {
            steps: 50,
            eval_every: 5,
            batch_size: 4,
            threshold: Some(0.0),
            stop_at_threshold: true,
        };
        let out = target_retrain(&mut state, &data[..5], &data[5..], &cfg).unwrap();
        assert_eq!(out.steps_to_threshold, Some(0));
        assert_eq!(out.curve.len(), 1);
        assert!(out.train_losses.is_empty());
    }
}
