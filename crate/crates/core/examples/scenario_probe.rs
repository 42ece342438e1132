//! Probes candidate target scenarios: base azimuth, DFT-index energy split
//! (kept half {1..4} vs missing half {5..8} of each spatial group), and
//! threshold-crossing behaviour of meta vs random retraining.

use csi_meta::basis::dft_basis;
use csi_meta::channel::{extract_csi, gen_multipath_channel, time_to_freq, ScenarioConfig};
use csi_meta::cmatrix::CMatrix;
use csi_meta::rng::RngStream;

fn main() {
    let basis = dft_basis(4, 2, 8, 2, 2).unwrap();
    for id in [811u64, 229, 5, 17, 23, 31, 47, 59, 101, 137, 211, 307, 401, 503] {
        let cfg = ScenarioConfig::synthetic(id, 2, 4, 2, false, 4, 1.5, 8).unwrap();
        let az: Vec<f64> = cfg.taps.iter().map(|t| t.mean_aod_az).collect();
        // Energy of the test eigenvectors per spatial basis index, averaged
        // over groups and samples.
        let root = RngStream::from_seed(42).child(id);
        let mut energy = vec![0.0f64; 8];
        for i in 0..60 {
            let mut rng = root.child(i);
            let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
            let hf = time_to_freq(&h, 32).unwrap();
            let (w, _) = extract_csi(&hf, 4).unwrap();
            for s in &basis.spatial_groups {
                let e = s.hermitian().mul(w.matrix());
                for v in 0..8 {
                    for l in 0..8 {
                        energy[v] += e.get(v, l).norm_sqr();
                    }
                }
            }
        }
        let total: f64 = energy.iter().sum();
        let kept: f64 = energy[..4].iter().sum::<f64>() / total;
        let hist: Vec<String> = energy.iter().map(|e| format!("{:.2}", e / total)).collect();
        println!(
            "id {id:4}: az {:+.2}..{:+.2}  kept-half {:.2}  hist [{}]",
            az.iter().cloned().fold(f64::INFINITY, f64::min),
            az.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            kept,
            hist.join(" ")
        );
        let _ = CMatrix::zeros(1, 1);
    }
}
