//! Multi-seed probe of the desk-scale experiment: prints timings, retraining
//! curves, and the comparisons the acceptance suite asserts, so thresholds
//! and budgets can be chosen from data.

use std::time::Instant;

use csi_meta::augment::build_target_dataset;
use csi_meta::autoencoder::{Activation, Model, ModelConfig, QuantizerMode, TrainState};
use csi_meta::basis::dft_basis;
use csi_meta::channel::{extract_csi, gen_multipath_channel, time_to_freq, ScenarioConfig};
use csi_meta::csi::CsiMatrix;
use csi_meta::metaenv::{build_meta_env, MetaEnvConfig};
use csi_meta::metatrain::{meta_train, target_retrain, MetaConfig, RetrainConfig};
use csi_meta::rng::RngStream;

const N_SC: usize = 32;
const N_GRAN: usize = 4;

fn model_config() -> ModelConfig {
    ModelConfig {
        n_tx: 8,
        n_subbands: 8,
        hidden: vec![128, 64],
        feedback_bits: 32,
        bits_per_dim: 2,
        activation: Activation::Tanh,
        quantizer: QuantizerMode::Uniform,
    }
}

fn env_config(incomplete: bool) -> MetaEnvConfig {
    MetaEnvConfig {
        task_count: 500,
        max_ues: 4,
        max_slots: 4,
        l_task: 4,
        m_task: 4,
        alpha: 0.75,
        beta: 0.75,
        incomplete_basis: if incomplete { Some((4, 4)) } else { None },
    }
}

fn scenario(kind: u64) -> ScenarioConfig {
    match kind {
        0 => ScenarioConfig::synthetic(59, 2, 4, 2, false, 3, 0.8, 8).unwrap(),
        _ => ScenarioConfig::synthetic(101, 2, 4, 2, false, 6, 2.5, 8).unwrap(),
    }
}

struct TargetData {
    seeds_csi: Vec<CsiMatrix>,
    augmented: Vec<CsiMatrix>,
    test: Vec<CsiMatrix>,
}

fn make_target(kind: u64, seed: u64) -> TargetData {
    let cfg = scenario(kind);
    let root = RngStream::from_seed(seed).child(40 + kind);
    let n_ue = 8;
    let n_seed_slots = 10;
    let n_test_slots = 25;
    let mut per_ue = Vec::new();
    let mut seeds_csi = Vec::new();
    let mut test = Vec::new();
    for ue in 0..n_ue {
        let ue_rng = root.child(ue);
        let mut slots = Vec::new();
        for slot in 0..(n_seed_slots + n_test_slots) {
            let mut rng = ue_rng.child(slot as u64);
            let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
            let hf = time_to_freq(&h, N_SC).unwrap();
            let (w, _) = extract_csi(&hf, N_GRAN).unwrap();
            if slot < n_seed_slots {
                seeds_csi.push(w);
                slots.push(h);
            } else {
                test.push(w);
            }
        }
        per_ue.push(slots);
    }
    let augmented = build_target_dataset(&per_ue, 100, N_SC, N_GRAN, &root.child(999)).unwrap();
    TargetData {
        seeds_csi,
        augmented,
        test,
    }
}

fn retrain_curve(
    model: Model,
    train: &[CsiMatrix],
    test: &[CsiMatrix],
    steps: usize,
    eval_every: usize,
    lr: f64,
    seed: u64,
) -> Vec<(usize, f64)> {
    let mut state = TrainState::new(model, lr, RngStream::from_seed(seed));
    let cfg = RetrainConfig {
        steps,
        eval_every,
        batch_size: 16,
        threshold: None,
        stop_at_threshold: false,
    };
    target_retrain(&mut state, train, test, &cfg).unwrap().curve
}

fn crossings(curve: &[(usize, f64)]) -> String {
    let mut out = String::new();
    for tau in [0.70, 0.75, 0.80] {
        let cross = curve
            .iter()
            .find(|&&(_, v)| v >= tau)
            .map(|&(s, _)| s as i64)
            .unwrap_or(-1);
        out.push_str(&format!(" x{tau}={cross}"));
    }
    out
}

fn at(curve: &[(usize, f64)], step: usize) -> f64 {
    curve.iter().filter(|&&(s, _)| s <= step).last().unwrap().1
}

fn main() {
    let seeds: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    for seed in if seeds.is_empty() { vec![1] } else { seeds } {
        run_seed(seed);
    }
}

fn run_seed(seed: u64) {
    println!("===== seed {seed} =====");
    let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
    let meta_cfg = MetaConfig {
        epsilon: 0.25,
        inner_steps: 32,
        inner_lr: 1e-3,
        inner_batch: 16,
    };

    let t0 = Instant::now();
    let mut full_state = TrainState::new(
        Model::init(model_config(), &mut RngStream::from_seed(seed).child(1)).unwrap(),
        1e-3,
        RngStream::from_seed(seed).child(2),
    );
    let full_env_cfg = env_config(false);
    let env = build_meta_env(&full_env_cfg, &basis, &RngStream::from_seed(seed).child(3))
        .map(|t| t.map(|task| task.samples));
    meta_train(env, &meta_cfg, &mut full_state).unwrap();
    println!("meta-train full: {:.1}s", t0.elapsed().as_secs_f64());

    let t1 = Instant::now();
    let mut lacking_state = TrainState::new(
        Model::init(model_config(), &mut RngStream::from_seed(seed).child(1)).unwrap(),
        1e-3,
        RngStream::from_seed(seed).child(2),
    );
    let lack_env_cfg = env_config(true);
    let env = build_meta_env(&lack_env_cfg, &basis, &RngStream::from_seed(seed).child(3))
        .map(|t| t.map(|task| task.samples));
    meta_train(env, &meta_cfg, &mut lacking_state).unwrap();
    println!("meta-train lacking: {:.1}s", t1.elapsed().as_secs_f64());

    let random_model = Model::init(model_config(), &mut RngStream::from_seed(seed).child(7)).unwrap();

    let mut abl_full = Vec::new();
    let mut abl_lack = Vec::new();
    let mut fin_aug = Vec::new();
    let mut fin_seed = Vec::new();
    for kind in 0..2u64 {
        let data = make_target(kind, seed);
        let t = Instant::now();
        // Criterion 7 race: slow lr, fine cadence.
        let meta_race = retrain_curve(full_state.model.clone(), &data.augmented, &data.test, 1200, 2, 1e-4, 100 + kind);
        let rand_race = retrain_curve(random_model.clone(), &data.augmented, &data.test, 1200, 2, 1e-4, 200 + kind);
        // Criterion 9 ablation at short budget, same slow lr.
        let lack_short = retrain_curve(lacking_state.model.clone(), &data.augmented, &data.test, 100, 2, 1e-4, 300 + kind);
        // Criterion 8 final-quality runs at the fast lr.
        let meta_aug = retrain_curve(full_state.model.clone(), &data.augmented, &data.test, 1500, 25, 1e-3, 400 + kind);
        let meta_seeds = retrain_curve(full_state.model.clone(), &data.seeds_csi, &data.test, 1500, 25, 1e-3, 500 + kind);
        println!("scenario {kind} ({:.1}s):", t.elapsed().as_secs_f64());
        println!("  race meta start {:.3}{}", meta_race[0].1, crossings(&meta_race));
        println!("  race rand start {:.3}{}", rand_race[0].1, crossings(&rand_race));
        println!(
            "  ablation @100: full {:.4} lack {:.4} | @50: full {:.4} lack {:.4} | @20: full {:.4} lack {:.4}",
            at(&meta_race, 100),
            at(&lack_short, 100),
            at(&meta_race, 50),
            at(&lack_short, 50),
            at(&meta_race, 20),
            at(&lack_short, 20),
        );
        println!(
            "  final: meta+aug {:.4} meta+seeds {:.4}",
            meta_aug.last().unwrap().1,
            meta_seeds.last().unwrap().1
        );
        abl_full.push(at(&meta_race, 100));
        abl_lack.push(at(&lack_short, 100));
        fin_aug.push(meta_aug.last().unwrap().1);
        fin_seed.push(meta_seeds.last().unwrap().1);
    }
    println!(
        "  summary: ablation mean full {:.4} lack {:.4} | final mean aug {:.4} seeds {:.4} | total {:.1}s",
        (abl_full[0] + abl_full[1]) / 2.0,
        (abl_lack[0] + abl_lack[1]) / 2.0,
        (fin_aug[0] + fin_aug[1]) / 2.0,
        (fin_seed[0] + fin_seed[1]) / 2.0,
        t0.elapsed().as_secs_f64()
    );
}
