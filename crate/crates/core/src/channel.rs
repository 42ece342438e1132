//! Parametric multipath time-domain channel generation and the
//! frequency-domain / subband eigenvector extraction pipeline.
//!
//! The generator is a desk-scale clustered-delay stand-in: each delay tap is
//! a sum of ray steering-vector outer products with CN(0,1) gains, an
//! exponential power-delay profile, and Laplacian angular spreads around
//! per-tap mean departure/arrival angles. Scenario identity (the angle and
//! delay structure) is pinned by `scenario_id`; channel realizations then
//! come from an explicit [`RngStream`].

use std::f64::consts::{PI, TAU};

use crate::cmatrix::{dominant_eigenpair, C64, CMatrix};
use crate::csi::CsiMatrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Time-domain downlink channel: `n_d` delay taps of `n_r x n_t` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChannel {
    pub taps: Vec<CMatrix>,
    pub scenario_id: u64,
}

impl TimeChannel {
    pub fn n_r(&self) -> usize {
        self.taps[0].rows()
    }

    pub fn n_t(&self) -> usize {
        self.taps[0].cols()
    }

    pub fn n_delays(&self) -> usize {
        self.taps.len()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.taps.iter().map(|t| t.frobenius_norm().powi(2)).sum()
    }
}

/// Frequency-domain channel: one `n_r x n_t` matrix per subcarrier.
#[derive(Debug, Clone)]
pub struct FreqChannel {
    pub carriers: Vec<CMatrix>,
}

impl FreqChannel {
    pub fn n_subcarriers(&self) -> usize {
        self.carriers.len()
    }
}

/// Angle cluster and power of a single delay tap.
#[derive(Debug, Clone)]
pub struct TapProfile {
    /// Mean tap power; all powers in a scenario sum to 1.
    pub power: f64,
    pub mean_aod_az: f64,
    pub mean_aod_zen: f64,
    pub az_spread: f64,
    pub zen_spread: f64,
    pub mean_aoa: f64,
    pub aoa_spread: f64,
}

/// Static description of one deployment scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario_id: u64,
    pub n_r: usize,
    pub n_h: usize,
    pub n_v: usize,
    /// Two antenna polarizations double the transmit dimension.
    pub dual_pol: bool,
    pub rays_per_tap: usize,
    pub taps: Vec<TapProfile>,
}

impl ScenarioConfig {
    pub fn n_t(&self) -> usize {
        self.n_h * self.n_v * if self.dual_pol { 2 } else { 1 }
    }

    pub fn n_delays(&self) -> usize {
        self.taps.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_h == 0 || self.n_v == 0 {
            return Err(Error::invalid_config("antenna counts must be >= 1"));
        }
        if self.taps.is_empty() {
            return Err(Error::invalid_config("need at least one delay tap"));
        }
        if self.rays_per_tap == 0 {
            return Err(Error::invalid_config("rays_per_tap must be >= 1"));
        }
        let total: f64 = self.taps.iter().map(|t| t.power).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_config(format!("tap powers sum to {total}, expected 1")));
        }
        for (d, t) in self.taps.iter().enumerate() {
            if t.power < 0.0 {
                return Err(Error::invalid_config(format!("tap {d} has negative power")));
            }
            if t.az_spread <= 0.0 || t.zen_spread <= 0.0 || t.aoa_spread <= 0.0 {
                return Err(Error::invalid_config(format!("tap {d} has non-positive spread")));
            }
        }
        Ok(())
    }

    /// Synthetic scenario with an exponential power-delay profile whose angle
    /// structure is derived deterministically from `scenario_id`. `decay` is
    /// the profile decay constant in taps (small = short delay spread).
    pub fn synthetic(
        scenario_id: u64,
        n_r: usize,
        n_h: usize,
        n_v: usize,
        dual_pol: bool,
        n_d: usize,
        decay: f64,
        rays_per_tap: usize,
    ) -> Result<Self> {
        if n_d == 0 {
            return Err(Error::invalid_config("n_d must be >= 1"));
        }
        if decay <= 0.0 {
            return Err(Error::invalid_config("decay must be positive"));
        }
        let mut angle_rng = RngStream::from_seed(scenario_id ^ 0x5EED_5CE0_A210_0000);
        let base_az = (angle_rng.uniform_f64() - 0.5) * (2.0 * PI / 3.0);
        let base_zen = PI / 2.0 + (angle_rng.uniform_f64() - 0.5) * (PI / 6.0);
        let base_aoa = (angle_rng.uniform_f64() - 0.5) * PI;
        let az_spread = 0.04 + 0.10 * angle_rng.uniform_f64();
        let zen_spread = 0.02 + 0.05 * angle_rng.uniform_f64();
        let aoa_spread = 0.10 + 0.20 * angle_rng.uniform_f64();

        let raw: Vec<f64> = (0..n_d).map(|d| (-(d as f64) / decay).exp()).collect();
        let total: f64 = raw.iter().sum();
        let taps = (0..n_d)
            .map(|d| TapProfile {
                power: raw[d] / total,
                mean_aod_az: base_az + (angle_rng.uniform_f64() - 0.5) * 0.5,
                mean_aod_zen: base_zen + (angle_rng.uniform_f64() - 0.5) * 0.2,
                az_spread,
                zen_spread,
                mean_aoa: base_aoa + (angle_rng.uniform_f64() - 0.5) * 0.8,
                aoa_spread,
            })
            .collect();
        let cfg = Self {
            scenario_id,
            n_r,
            n_h,
            n_v,
            dual_pol,
            rays_per_tap,
            taps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Transmit steering vector over the `n_h x n_v` port grid (half-wavelength
/// spacing), horizontal index on the slow axis to match the basis layout.
fn tx_steering(n_h: usize, n_v: usize, az: f64, zen: f64) -> Vec<C64> {
    let kh = PI * az.sin() * zen.sin();
    let kv = PI * zen.cos();
    let mut v = Vec::with_capacity(n_h * n_v);
    for m in 0..n_h {
        for q in 0..n_v {
            v.push(C64::from_polar(1.0, kh * m as f64 + kv * q as f64));
        }
    }
    v
}

fn rx_steering(n_r: usize, aoa: f64) -> Vec<C64> {
    let k = PI * aoa.sin();
    (0..n_r).map(|r| C64::from_polar(1.0, k * r as f64)).collect()
}

/// Draws one time-domain channel realization. The expectation of
/// `||H||_F^2` over realizations equals `n_r * n_t`.
pub fn gen_multipath_channel(cfg: &ScenarioConfig, rng: &mut RngStream) -> Result<TimeChannel> {
    cfg.validate()?;
    let n_r = cfg.n_r;
    let n_ap = cfg.n_h * cfg.n_v;
    let n_t = cfg.n_t();
    let n_pol = if cfg.dual_pol { 2 } else { 1 };
    let mut taps = Vec::with_capacity(cfg.taps.len());
    for tap in &cfg.taps {
        let mut h = CMatrix::zeros(n_r, n_t);
        let scale = (tap.power / cfg.rays_per_tap as f64).sqrt();
        for _ in 0..cfg.rays_per_tap {
            let az = tap.mean_aod_az + rng.laplacian(tap.az_spread);
            let zen = tap.mean_aod_zen + rng.laplacian(tap.zen_spread);
            let aoa = tap.mean_aoa + rng.laplacian(tap.aoa_spread);
            let a = tx_steering(cfg.n_h, cfg.n_v, az, zen);
            let b = rx_steering(n_r, aoa);
            for pol in 0..n_pol {
                let gain = rng.complex_normal() * scale;
                for r in 0..n_r {
                    let br = b[r] * gain;
                    for t in 0..n_ap {
                        let v = h.get(r, pol * n_ap + t);
                        h.set(r, pol * n_ap + t, v + br * a[t].conj());
                    }
                }
            }
        }
        taps.push(h);
    }
    Ok(TimeChannel {
        taps,
        scenario_id: cfg.scenario_id,
    })
}

/// DFT over the delay dimension: `H_k = sum_d H_d exp(-j 2 pi k d / n_sc)`
/// for subcarriers `k = 0..n_sc-1`.
pub fn time_to_freq(h: &TimeChannel, n_sc: usize) -> Result<FreqChannel> {
    if n_sc < h.n_delays() {
        return Err(Error::invalid_argument(format!(
            "n_sc {} smaller than delay count {}",
            n_sc,
            h.n_delays()
        )));
    }
    let (n_r, n_t) = (h.n_r(), h.n_t());
    let mut carriers = Vec::with_capacity(n_sc);
    for k in 0..n_sc {
        let mut hk = CMatrix::zeros(n_r, n_t);
        for (d, tap) in h.taps.iter().enumerate() {
            let phase = C64::from_polar(1.0, -TAU * (k as f64) * (d as f64) / (n_sc as f64));
            hk = hk.add(&tap.scale(phase));
        }
        carriers.push(hk);
    }
    Ok(FreqChannel { carriers })
}

/// Per-subband principal eigenvector extraction.
///
/// For each group of `n_gran` subcarriers, averages the Gram matrices
/// `H_k^H H_k` and extracts the dominant eigenpair. The eigenvector phase is
/// canonicalized (largest-magnitude entry real positive) so the output is
/// deterministic despite the inherent phase ambiguity; SGCS is invariant to
/// that convention.
pub fn extract_csi(h_f: &FreqChannel, n_gran: usize) -> Result<(CsiMatrix, Vec<f64>)> {
    let n_sc = h_f.n_subcarriers();
    if n_gran == 0 || n_sc % n_gran != 0 {
        return Err(Error::invalid_argument(format!(
            "n_gran {n_gran} does not divide subcarrier count {n_sc}"
        )));
    }
    let n_sb = n_sc / n_gran;
    let n_t = h_f.carriers[0].cols();
    let mut w = CMatrix::zeros(n_t, n_sb);
    let mut eigenvalues = Vec::with_capacity(n_sb);
    for l in 0..n_sb {
        let mut a = CMatrix::zeros(n_t, n_t);
        for k in l * n_gran..(l + 1) * n_gran {
            a = a.add(&h_f.carriers[k].gram());
        }
        let a = a.scale(C64::new(1.0 / n_gran as f64, 0.0));
        let (lambda, v) = dominant_eigenpair(&a, 1e-12, 10_000)
            .map_err(|e| Error::numeric(format!("subband {l}: {e}")))?;
        for r in 0..n_t {
            w.set(r, l, v[r]);
        }
        eigenvalues.push(lambda);
    }
    Ok((CsiMatrix::from_unnormalized(w)?, eigenvalues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csi::sgcs;

    fn single_ray_config(power_taps: Vec<f64>) -> ScenarioConfig {
        let taps = power_taps
            .into_iter()
            .map(|p| TapProfile {
                power: p,
                mean_aod_az: 0.4,
                mean_aod_zen: PI / 2.0,
                az_spread: 1e-9,
                zen_spread: 1e-9,
                mean_aoa: -0.2,
                aoa_spread: 1e-9,
            })
            .collect();
        ScenarioConfig {
            scenario_id: 1,
            n_r: 2,
            n_h: 4,
            n_v: 2,
            dual_pol: false,
            rays_per_tap: 1,
            taps,
        }
    }

    #[test]
    fn single_ray_tap_is_rank_one_with_uniform_modulus() {
        let cfg = single_ray_config(vec![1.0]);
        let mut rng = RngStream::from_seed(100);
        let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let tap = &h.taps[0];
        // All entries share one modulus, so ||H||_F^2 = n_r*n_t*|h_00|^2.
        let m0 = tap.get(0, 0).norm();
        for r in 0..2 {
            for t in 0..8 {
                assert!((tap.get(r, t).norm() - m0).abs() < 1e-12);
            }
        }
        let f2 = tap.frobenius_norm().powi(2);
        assert!((f2 - 16.0 * m0 * m0).abs() < 1e-9);
        // Rank 1: second eigenvalue of the Gram matrix vanishes.
        let (svals, _) = crate::cmatrix::hermitian_eigen(&tap.gram()).unwrap();
        assert!(svals[1].abs() <= 1e-10 * svals[0].abs());
    }

    #[test]
    fn frobenius_normalization_contract() {
        let cfg = ScenarioConfig::synthetic(7, 2, 4, 2, false, 4, 1.5, 6).unwrap();
        let root = RngStream::from_seed(55);
        let n = 10_000;
        let mut acc = 0.0;
        for i in 0..n {
            let mut rng = root.child(i);
            let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
            acc += h.frobenius_sq();
        }
        let ratio = acc / (n as f64 * (2 * 8) as f64);
        assert!((0.97..=1.03).contains(&ratio), "E||H||^2/(NrNt) = {ratio}");
    }

    #[test]
    fn different_scenarios_have_distinct_dominant_eigenvectors() {
        let a = ScenarioConfig::synthetic(11, 2, 4, 2, false, 3, 1.0, 8).unwrap();
        let b = ScenarioConfig::synthetic(29, 2, 4, 2, false, 3, 1.0, 8).unwrap();
        let mean_w = |cfg: &ScenarioConfig, seed: u64| -> CsiMatrix {
            let root = RngStream::from_seed(seed);
            let mut acc = CMatrix::zeros(8, 1);
            for i in 0..200 {
                let mut rng = root.child(i);
                let h = gen_multipath_channel(cfg, &mut rng).unwrap();
                let hf = time_to_freq(&h, 8).unwrap();
                let (w, _) = extract_csi(&hf, 8).unwrap();
                acc = acc.add(&w.matrix().select_columns(&[0]));
            }
            CsiMatrix::from_unnormalized(acc).unwrap()
        };
        let wa = mean_w(&a, 1);
        let wb = mean_w(&b, 2);
        let overlap = sgcs(&wa, &wb).unwrap();
        assert!(overlap < 0.9, "scenarios too similar: sgcs {overlap}");
    }

    #[test]
    fn single_tap_is_frequency_flat() {
        let cfg = single_ray_config(vec![1.0]);
        let mut rng = RngStream::from_seed(3);
        let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let hf = time_to_freq(&h, 16).unwrap();
        for k in 1..16 {
            let d = hf.carriers[k].sub(&hf.carriers[0]).max_abs();
            assert!(d < 1e-12, "carrier {k} deviates by {d}");
        }
    }

    #[test]
    fn parseval_identity() {
        let cfg = ScenarioConfig::synthetic(5, 2, 4, 2, false, 5, 2.0, 4).unwrap();
        let mut rng = RngStream::from_seed(17);
        let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let n_sc = 24;
        let hf = time_to_freq(&h, n_sc).unwrap();
        let freq_energy: f64 = hf.carriers.iter().map(|c| c.frobenius_norm().powi(2)).sum();
        let time_energy = h.frobenius_sq();
        let rel = (freq_energy - n_sc as f64 * time_energy).abs() / (n_sc as f64 * time_energy);
        assert!(rel < 1e-6, "parseval relative error {rel}");
    }

    #[test]
    fn dft_is_linear() {
        let cfg = ScenarioConfig::synthetic(5, 2, 2, 2, false, 3, 2.0, 4).unwrap();
        let mut rng = RngStream::from_seed(23);
        let h1 = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let h2 = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let (a, b) = (C64::new(0.7, -0.3), C64::new(-1.1, 0.2));
        let combo = TimeChannel {
            taps: h1
                .taps
                .iter()
                .zip(h2.taps.iter())
                .map(|(x, y)| x.scale(a).add(&y.scale(b)))
                .collect(),
            scenario_id: 5,
        };
        let f_combo = time_to_freq(&combo, 8).unwrap();
        let f1 = time_to_freq(&h1, 8).unwrap();
        let f2 = time_to_freq(&h2, 8).unwrap();
        for k in 0..8 {
            let expect = f1.carriers[k].scale(a).add(&f2.carriers[k].scale(b));
            assert!(f_combo.carriers[k].sub(&expect).max_abs() < 1e-12);
        }
    }

    #[test]
    fn extract_csi_rank_one_flat_channel() {
        // H_k = u v^H for all k: principal eigenvector is v/||v||,
        // eigenvalue ||u||^2 ||v||^2.
        let u = vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.8)];
        let v = vec![
            C64::new(0.2, -0.1),
            C64::new(1.0, 0.0),
            C64::new(-0.5, 0.4),
            C64::new(0.0, 0.9),
        ];
        let h = CMatrix::from_fn(2, 4, |r, c| u[r] * v[c].conj());
        let hf = FreqChannel {
            carriers: vec![h; 8],
        };
        let (w, vals) = extract_csi(&hf, 4).unwrap();
        assert_eq!(w.n_subbands(), 2);
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for l in 0..2 {
            assert!((vals[l] - nu * nv).abs() < 1e-9 * nu * nv);
            let col = w.matrix().column(l);
            let inner: C64 = col.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            assert!((inner.norm() / nv.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rayleigh_quotient_oracle() {
        let cfg = ScenarioConfig::synthetic(9, 3, 4, 1, false, 4, 1.5, 5).unwrap();
        let mut rng = RngStream::from_seed(41);
        let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let hf = time_to_freq(&h, 8).unwrap();
        let (w, vals) = extract_csi(&hf, 4).unwrap();
        let mut probe = RngStream::from_seed(42);
        for l in 0..2 {
            let mut a = CMatrix::zeros(4, 4);
            for k in l * 4..(l + 1) * 4 {
                a = a.add(&hf.carriers[k].gram());
            }
            let a = a.scale(C64::new(0.25, 0.0));
            let col = w.matrix().column(l);
            let aw = a.matvec(&col);
            let quad: C64 = col.iter().zip(aw.iter()).map(|(x, y)| x.conj() * y).sum();
            assert!((quad.re - vals[l]).abs() < 1e-8 * vals[l].max(1.0));
            for _ in 0..100 {
                let x = crate::rng::complex_gaussian(&mut probe, 4).unwrap();
                let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
                let ax = a.matvec(&x);
                let q: C64 = x.iter().zip(ax.iter()).map(|(p, y)| p.conj() * y).sum();
                assert!(q.re / nx <= vals[l] * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn table_dimensions_give_thirteen_subbands() {
        let cfg = ScenarioConfig::synthetic(2, 4, 8, 2, true, 6, 2.0, 3).unwrap();
        assert_eq!(cfg.n_t(), 32);
        let mut rng = RngStream::from_seed(77);
        let h = gen_multipath_channel(&cfg, &mut rng).unwrap();
        let hf = time_to_freq(&h, 624).unwrap();
        let (w, vals) = extract_csi(&hf, 48).unwrap();
        assert_eq!(w.n_subbands(), 13);
        assert_eq!(w.n_tx(), 32);
        assert_eq!(vals.len(), 13);
        assert!(vals.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn n_gran_must_divide() {
        let hf = FreqChannel {
            carriers: vec![CMatrix::zeros(2, 2); 10],
        };
        assert!(extract_csi(&hf, 3).is_err());
    }
}
