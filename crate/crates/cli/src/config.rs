//! Experiment configuration: a TOML document mirroring the simulation
//! parameter table, schema-validated with unknown keys rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use csi_meta::autoencoder::{Activation, ModelConfig, QuantizerMode};
use csi_meta::basis::{dft_basis, smt_basis, svd_basis, BasisSet};
use csi_meta::channel::ScenarioConfig;
use csi_meta::error::{Error, Result};
use csi_meta::metaenv::MetaEnvConfig;
use csi_meta::metatrain::{MetaConfig, RetrainConfig};
use csi_meta::rng::RngStream;

/// Child-stream roles off the base seed, one per pipeline stage. Keeping the
/// derivation fixed is what makes file-backed and regenerated runs agree.
pub mod roles {
    pub const META_ENV: u64 = 1;
    pub const MODEL_INIT: u64 = 2;
    pub const META_TRAIN: u64 = 3;
    pub const SEED_GEN: u64 = 4;
    pub const AUGMENT: u64 = 5;
    pub const RETRAIN: u64 = 6;
    pub const SPLIT: u64 = 7;
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_sc: usize,
    pub n_gran: usize,
    pub n_h: usize,
    pub n_v: usize,
    pub polarization: String,
    pub n_r: usize,
}

impl SystemSection {
    pub fn dual_pol(&self) -> bool {
        self.polarization == "dual"
    }

    pub fn n_t(&self) -> usize {
        self.n_h * self.n_v * if self.dual_pol() { 2 } else { 1 }
    }

    pub fn n_sb(&self) -> usize {
        self.n_sc / self.n_gran
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub method: String,
    #[serde(default)]
    pub o_h: Option<usize>,
    #[serde(default)]
    pub o_v: Option<usize>,
    #[serde(default)]
    pub p: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaSection {
    pub t: usize,
    pub epsilon: f64,
    pub g: usize,
    pub n_ue_max: usize,
    pub n_slot_max: usize,
    pub l_task: usize,
    pub m_task: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub incomplete_s: Option<usize>,
    #[serde(default)]
    pub incomplete_f: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub b: usize,
    pub b_q: usize,
    pub activation: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub inner_lr: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrainSection {
    pub steps: usize,
    pub eval_every: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub test_fraction: f64,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub stop_at_threshold: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSection {
    pub base: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub n_aug: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub seed: u64,
    pub n_d: usize,
    pub decay: f64,
    pub rays_per_tap: usize,
    pub n_ue: usize,
    pub n_slot: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub basis: BasisSection,
    pub meta: MetaSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub retrain: RetrainSection,
    pub seeds: SeedsSection,
    pub augment: AugmentSection,
    #[serde(default)]
    pub scenario: BTreeMap<String, ScenarioSection>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::invalid_config("config is not valid UTF-8"))?;
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::invalid_config(format!("{e}")))?;
        cfg.validate()?;
        Ok((cfg, bytes))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.n_gran == 0 || s.n_sc % s.n_gran != 0 {
            return Err(Error::invalid_config(format!(
                "n_sc {} must be a positive multiple of n_gran {}",
                s.n_sc, s.n_gran
            )));
        }
        if !matches!(s.polarization.as_str(), "single" | "dual") {
            return Err(Error::invalid_config("polarization must be 'single' or 'dual'"));
        }
        match self.basis.method.as_str() {
            "dft" => {
                let (o_h, o_v) = (self.basis.o_h.unwrap_or(1), self.basis.o_v.unwrap_or(1));
                if let Some(p) = self.basis.p {
                    if p != o_h * o_v {
                        return Err(Error::invalid_config(format!(
                            "p {} must equal o_h * o_v = {}",
                            p,
                            o_h * o_v
                        )));
                    }
                }
            }
            "svd" | "smt" => {
                if self.basis.p.unwrap_or(0) == 0 {
                    return Err(Error::invalid_config("svd/smt basis needs p >= 1"));
                }
            }
            other => {
                return Err(Error::invalid_config(format!("unknown basis method '{other}'")));
            }
        }
        if !matches!(self.model.activation.as_str(), "tanh" | "relu") {
            return Err(Error::invalid_config("activation must be 'tanh' or 'relu'"));
        }
        if self.model.b_q == 0 || self.model.b % self.model.b_q != 0 {
            return Err(Error::invalid_config("b must be a positive multiple of b_q"));
        }
        if !(0.0 < self.retrain.test_fraction && self.retrain.test_fraction < 1.0) {
            return Err(Error::invalid_config("test_fraction must lie in (0, 1)"));
        }
        if self.meta.l_task == 0 || self.meta.l_task > s.n_t() {
            return Err(Error::invalid_config(format!(
                "l_task {} outside 1..={}",
                self.meta.l_task,
                s.n_t()
            )));
        }
        if self.meta.m_task == 0 || self.meta.m_task > s.n_sb() {
            return Err(Error::invalid_config(format!(
                "m_task {} outside 1..={}",
                self.meta.m_task,
                s.n_sb()
            )));
        }
        for (name, sc) in &self.scenario {
            if sc.n_d == 0 || sc.n_d > s.n_sc {
                return Err(Error::invalid_config(format!(
                    "scenario '{name}': n_d {} outside 1..={}",
                    sc.n_d, s.n_sc
                )));
            }
            if sc.n_ue == 0 || sc.n_slot == 0 {
                return Err(Error::invalid_config(format!(
                    "scenario '{name}': n_ue and n_slot must be >= 1"
                )));
            }
        }
        Ok(())
    }

    /// Builds the basis set configured in `[basis]`. Random methods draw
    /// from the base seed's META_ENV sibling stream so the basis is fixed
    /// once per run seed.
    pub fn build_basis(&self) -> Result<BasisSet> {
        let s = &self.system;
        let n_sb = s.n_sb();
        let single = match self.basis.method.as_str() {
            "dft" => {
                let o_h = self.basis.o_h.unwrap_or(1);
                let o_v = self.basis.o_v.unwrap_or(1);
                dft_basis(s.n_h, s.n_v, n_sb, o_h, o_v)?
            }
            "svd" => {
                let rng = RngStream::from_seed(self.seeds.base).child(roles::META_ENV).child(u64::MAX);
                svd_basis(s.n_h, s.n_v, n_sb, self.basis.p.unwrap(), &rng)?
            }
            "smt" => {
                let rng = RngStream::from_seed(self.seeds.base).child(roles::META_ENV).child(u64::MAX);
                smt_basis(s.n_h, s.n_v, n_sb, self.basis.p.unwrap(), &rng)?
            }
            _ => unreachable!("validated"),
        };
        Ok(if s.dual_pol() {
            single.with_dual_polarization()
        } else {
            single
        })
    }

    pub fn meta_env_config(&self) -> MetaEnvConfig {
        let incomplete = match (self.meta.incomplete_s, self.meta.incomplete_f) {
            (None, None) => None,
            (s, f) => Some((
                s.unwrap_or(self.system.n_t()),
                f.unwrap_or(self.system.n_sb()),
            )),
        };
        MetaEnvConfig {
            task_count: self.meta.t,
            max_ues: self.meta.n_ue_max,
            max_slots: self.meta.n_slot_max,
            l_task: self.meta.l_task,
            m_task: self.meta.m_task,
            alpha: self.meta.alpha,
            beta: self.meta.beta,
            incomplete_basis: incomplete,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n_tx: self.system.n_t(),
            n_subbands: self.system.n_sb(),
            hidden: self.model.hidden.clone(),
            feedback_bits: self.model.b,
            bits_per_dim: self.model.b_q,
            activation: if self.model.activation == "relu" {
                Activation::Relu
            } else {
                Activation::Tanh
            },
            quantizer: QuantizerMode::Uniform,
        }
    }

    pub fn meta_config(&self) -> MetaConfig {
        MetaConfig {
            epsilon: self.meta.epsilon,
            inner_steps: self.meta.g,
            inner_lr: self.train.inner_lr,
            inner_batch: self.train.batch_size,
        }
    }

    pub fn retrain_config(&self, threshold_override: Option<f64>) -> RetrainConfig {
        RetrainConfig {
            steps: self.retrain.steps,
            eval_every: self.retrain.eval_every,
            batch_size: self.retrain.batch_size,
            threshold: threshold_override.or(self.retrain.threshold),
            stop_at_threshold: self.retrain.stop_at_threshold,
        }
    }

    pub fn scenario(&self, name: &str) -> Result<&ScenarioSection> {
        self.scenario
            .get(name)
            .ok_or_else(|| Error::invalid_config(format!("scenario '{name}' not in config")))
    }

    /// Per-UE channel geometry of a named scenario: each UE gets its own
    /// angle structure derived from the scenario seed.
    pub fn ue_scenario(&self, section: &ScenarioSection, ue: usize) -> Result<ScenarioConfig> {
        let id = RngStream::from_seed(section.seed).child(ue as u64).key();
        ScenarioConfig::synthetic(
            id,
            self.system.n_r,
            self.system.n_h,
            self.system.n_v,
            self.system.dual_pol(),
            section.n_d,
            section.decay,
            section.rays_per_tap,
        )
    }
}
