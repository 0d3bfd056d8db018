//! Seeded synthetic test signals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Parameters of a stationary harmonic signal in white Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub f0: f64,
    pub order: usize,
    pub sample_rate: f64,
    pub duration: f64,
    /// `f64::INFINITY` disables the noise.
    pub snr_db: f64,
    /// `(α_k, β_k)` per harmonic; random-phase `1/k` amplitudes if absent.
    pub weights: Option<Vec<(f64, f64)>>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { f0: 200.0, order: 3, sample_rate: 16000.0, duration: 1.0, snr_db: f64::INFINITY, weights: None, seed: 0 }
    }
}

/// `Σ_k α_k cos(kωm) + β_k sin(kωm)` for `m = 0…n−1`.
pub fn harmonic_signal(f0: f64, sample_rate: f64, n: usize, weights: &[(f64, f64)]) -> Result<Vec<f64>> {
    if weights.len() as f64 * f0 >= sample_rate / 2.0 || !(f0 > 0.0) {
        return Err(Error::Config(format!(
            "{} harmonics of {f0} Hz exceed the Nyquist frequency {}",
            weights.len(),
            sample_rate / 2.0
        )));
    }
    let omega = 2.0 * std::f64::consts::PI * f0 / sample_rate;
    Ok((0..n)
        .map(|m| {
            weights
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    let phase = (k + 1) as f64 * omega * m as f64;
                    a * phase.cos() + b * phase.sin()
                })
                .sum()
        })
        .collect())
}

/// Unit-variance white Gaussian noise.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// AR noise `x[m] = Σ a_i x[m−i] + w[m]` driven by unit white noise, after a
/// burn-in long enough to forget the zero initial state.
pub fn ar_noise(coeffs: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let burn = 4096;
    let w = white_noise(n + burn, seed);
    let mut x = vec![0.0; n + burn];
    for m in 0..x.len() {
        let mut v = w[m];
        for (i, &a) in coeffs.iter().enumerate() {
            if m > i {
                v += a * x[m - i - 1];
            }
        }
        x[m] = v;
    }
    x.split_off(burn)
}

pub fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `signal + g·noise` with `g` chosen so the measured SNR is `snr_db`.
pub fn mix_at_snr(signal: &[f64], noise: &[f64], snr_db: f64) -> Vec<f64> {
    assert_eq!(signal.len(), noise.len());
    if snr_db == f64::INFINITY {
        return signal.to_vec();
    }
    let pn = mean_power(noise);
    let g = if pn > 0.0 { (mean_power(signal) / pn / 10f64.powf(snr_db / 10.0)).sqrt() } else { 0.0 };
    signal.iter().zip(noise).map(|(s, w)| s + g * w).collect()
}

/// Harmonic signal plus white noise at the requested SNR.
pub fn synth_signal(cfg: &SynthConfig) -> Result<Vec<f64>> {
    if cfg.order == 0 || !(cfg.duration > 0.0) || !(cfg.sample_rate > 0.0) || cfg.snr_db.is_nan() {
        return Err(Error::Config("synthesis needs K ≥ 1, positive duration and sample rate".into()));
    }
    let n = (cfg.duration * cfg.sample_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = match &cfg.weights {
        Some(w) if w.len() != cfg.order => {
            return Err(Error::Config(format!("{} weight pairs given for K = {}", w.len(), cfg.order)))
        }
        Some(w) => w.clone(),
        None => (1..=cfg.order)
            .map(|k| {
                let phase = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                (phase.cos() / k as f64, phase.sin() / k as f64)
            })
            .collect(),
    };
    let clean = harmonic_signal(cfg.f0, cfg.sample_rate, n, &weights)?;
    let noise = white_noise(n, rng.random());
    Ok(mix_at_snr(&clean, &noise, cfg.snr_db))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_power_matches_weights() {
        let w = vec![(1.0, 0.0), (0.5, 0.5), (0.0, 0.3)];
        let cfg = SynthConfig { weights: Some(w.clone()), ..Default::default() };
        let x = synth_signal(&cfg).unwrap();
        let expect: f64 = w.iter().map(|(a, b)| (a * a + b * b) / 2.0).sum();
        assert!((mean_power(&x) / expect - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_db_is_measured_as_zero_db() {
        let cfg = SynthConfig { snr_db: 0.0, seed: 3, ..Default::default() };
        let x = synth_signal(&cfg).unwrap();
        let clean = synth_signal(&SynthConfig { snr_db: f64::INFINITY, ..cfg.clone() }).unwrap();
        let noise: Vec<f64> = x.iter().zip(&clean).map(|(a, b)| a - b).collect();
        let snr = 10.0 * (mean_power(&clean) / mean_power(&noise)).log10();
        assert!(snr.abs() < 0.2);
    }

    #[test]
    fn seeded() {
        let cfg = SynthConfig { snr_db: 5.0, seed: 11, ..Default::default() };
        assert_eq!(synth_signal(&cfg).unwrap(), synth_signal(&cfg).unwrap());
        let other = SynthConfig { seed: 12, ..cfg.clone() };
        assert_ne!(synth_signal(&cfg).unwrap(), synth_signal(&other).unwrap());
    }

    #[test]
    fn nyquist_violation_rejected() {
        let cfg = SynthConfig { f0: 3000.0, order: 3, sample_rate: 16000.0, ..Default::default() };
        assert!(matches!(synth_signal(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn ar1_noise_has_expected_lag_one_correlation() {
        let x = ar_noise(&[0.9], 50_000, 1);
        let r0: f64 = x.iter().map(|v| v * v).sum();
        let r1: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
        assert!((r1 / r0 - 0.9).abs() < 0.02);
    }
}
