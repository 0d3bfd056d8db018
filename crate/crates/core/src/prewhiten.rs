//! Linear-prediction prewhitening.
//!
//! The noise autocorrelation comes either from a noise-only reference
//! recording or from a minimum-statistics floor of the smoothed frame
//! periodogram. Levinson-Durbin turns it into AR coefficients and each frame
//! is passed through the FIR inverse filter `1 − Σ a_i z^{−i}`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Real};
use crate::signal::Frame;

/// Reflection coefficients may exceed one in magnitude by this much before
/// the autocorrelation is declared indefinite.
const REFLECTION_SLACK: f64 = 1e-10;

/// Bias compensation for the minimum of the smoothed periodogram over the
/// tracking window, measured on stationary noise.
pub const MIN_STAT_BIAS: f64 = 1.75;

/// PSD bins below this fraction of the mean are raised to it.
const PSD_FLOOR: f64 = 1e-10;

/// Half-width, in DFT bins, of the moving average applied across frequency.
pub const FREQ_SMOOTH_BINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhitenMode {
    Off,
    KnownNoise,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhitenConfig<T> {
    pub lp_order: usize,
    pub mode: WhitenMode,
    /// Recursive smoothing factor of the adaptive periodogram.
    pub smoothing: T,
    /// Number of frames the adaptive minimum looks back over.
    pub min_window: usize,
    /// Noise-only samples for [`WhitenMode::KnownNoise`].
    pub noise_reference: Option<Vec<T>>,
}

impl<T: Real> Default for WhitenConfig<T> {
    fn default() -> Self {
        Self { lp_order: 30, mode: WhitenMode::Off, smoothing: T::lit(0.8), min_window: 150, noise_reference: None }
    }
}

impl<T: Real> WhitenConfig<T> {
    pub fn validate(&self, frame_len: usize) -> Result<()> {
        if self.mode == WhitenMode::Off {
            return Ok(());
        }
        if self.lp_order == 0 || self.lp_order >= frame_len {
            return Err(Error::Config(format!(
                "LP order must lie in [1, {}), got {}",
                frame_len, self.lp_order
            )));
        }
        if !(self.smoothing > T::zero() && self.smoothing < T::one()) {
            return Err(Error::Config(format!("PSD smoothing must lie in (0, 1), got {}", self.smoothing)));
        }
        if self.min_window == 0 {
            return Err(Error::Config("minimum-statistics window must be at least one frame".into()));
        }
        if self.mode == WhitenMode::KnownNoise {
            match &self.noise_reference {
                None => return Err(Error::Config("known-noise whitening needs a noise reference".into())),
                Some(r) if r.len() <= self.lp_order => {
                    return Err(Error::Config("noise reference is shorter than the LP order".into()))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Solves the Yule-Walker equations for `r.len() − 1` AR coefficients.
///
/// Returns `(a, e)` with `x̂[m] = Σ a_i x[m−i]` and `e` the final prediction
/// error power.
pub fn levinson_durbin<T: Real>(r: &[T]) -> Result<(Vec<T>, T)> {
    let r0 = *r.first().ok_or_else(|| Error::EmptyInput("autocorrelation is empty".into()))?;
    if !(r0 > T::zero()) || r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalInstability(format!("autocorrelation lag 0 must be positive, got {r0}")));
    }
    let p = r.len() - 1;
    let mut a = vec![T::zero(); p];
    let mut prev = vec![T::zero(); p];
    let mut e = r0;
    let slack = T::one() + T::lit(REFLECTION_SLACK);
    for i in 1..=p {
        if e <= T::epsilon() * r0 {
            // perfectly predictable: higher orders add nothing
            break;
        }
        let mut acc = KahanSum::new();
        acc.add(r[i]);
        for j in 1..i {
            acc.add(-a[j - 1] * r[i - j]);
        }
        let k = acc.value() / e;
        if !(k.abs() <= slack) {
            return Err(Error::NumericalInstability(format!(
                "reflection coefficient {k} at order {i}: autocorrelation is not positive definite"
            )));
        }
        prev[..i - 1].copy_from_slice(&a[..i - 1]);
        for j in 1..i {
            a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
        }
        a[i - 1] = k;
        e = (e * (T::one() - k * k)).max(T::zero());
    }
    Ok((a, e))
}

/// Biased sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation<T: Real>(x: &[T], max_lag: usize) -> Vec<T> {
    let n = T::from_count(x.len());
    (0..=max_lag)
        .map(|lag| {
            let mut s = KahanSum::new();
            for m in lag..x.len() {
                s.add(x[m] * x[m - lag]);
            }
            s.value() / n
        })
        .collect()
}

/// FIR inverse filter `e[m] = y[m] − Σ a_i y[m−i]` with zero initial state.
pub fn prewhiten_frame<T: Real>(frame: &Frame<T>, ar_coeffs: &[T]) -> Frame<T> {
    let y = frame.samples();
    let out = (0..y.len())
        .map(|m| {
            let mut v = y[m];
            for (i, &a) in ar_coeffs.iter().enumerate().take(m) {
                v -= a * y[m - i - 1];
            }
            v
        })
        .collect();
    frame.with_samples(out)
}

/// Recursively smoothed periodogram with a sliding per-bin minimum.
pub struct NoiseEstimator<T: Real> {
    frame_len: usize,
    nfft: usize,
    window: Vec<T>,
    window_power: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    smoothed: Option<Vec<T>>,
    frames: usize,
    history: VecDeque<Vec<T>>,
    known: Option<Vec<T>>,
}

impl<T: Real> fmt::Debug for NoiseEstimator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseEstimator")
            .field("frame_len", &self.frame_len)
            .field("nfft", &self.nfft)
            .field("frames", &self.frames)
            .finish()
    }
}

impl<T: Real> NoiseEstimator<T> {
    pub fn new(frame_len: usize) -> Self {
        let nfft = (2 * frame_len).next_power_of_two();
        let window: Vec<T> = (0..frame_len)
            .map(|m| {
                let x = T::lit(2.0) * T::PI() * T::from_count(m) / T::from_count(frame_len);
                T::lit(0.5) * (T::one() - x.cos())
            })
            .collect();
        let window_power = window.iter().fold(T::zero(), |acc, &w| acc + w * w);
        let mut planner = FftPlanner::new();
        Self {
            frame_len,
            nfft,
            window,
            window_power,
            forward: planner.plan_fft_forward(nfft),
            inverse: planner.plan_fft_inverse(nfft),
            smoothed: None,
            frames: 0,
            history: VecDeque::new(),
            known: None,
        }
    }

    pub fn dft_size(&self) -> usize {
        self.nfft
    }

    pub fn frames_seen(&self) -> usize {
        self.frames
    }

    /// Windowed periodogram on bins `0..=nfft/2`, scaled so its expectation
    /// approximates the noise PSD.
    fn periodogram(&self, y: &[T]) -> Vec<T> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.nfft];
        for (b, (&x, &w)) in buf.iter_mut().zip(y.iter().zip(&self.window)) {
            b.re = x * w;
        }
        self.forward.process(&mut buf);
        let raw: Vec<T> = buf[..=self.nfft / 2].iter().map(|c| c.norm_sqr() / self.window_power).collect();
        // the spectrum is even, so reflect at DC and Nyquist
        let last = raw.len() - 1;
        let at = |i: isize| -> T {
            let j = if i < 0 { -i } else if i as usize > last { 2 * last as isize - i } else { i };
            raw[j as usize]
        };
        let h = FREQ_SMOOTH_BINS as isize;
        let taps = T::from_count(2 * FREQ_SMOOTH_BINS + 1);
        (0..=last as isize).map(|k| (-h..=h).fold(T::zero(), |acc, d| acc + at(k + d)) / taps).collect()
    }

    /// Feeds one frame and returns the current PSD estimate on bins
    /// `0..=nfft/2`.
    ///
    /// The first frames are averaged with equal weights until the running
    /// weight reaches `smoothing`; only later estimates enter the minimum.
    pub fn observe(&mut self, y: &[T], smoothing: T, window: usize) -> Vec<T> {
        assert_eq!(y.len(), self.frame_len);
        let p = self.periodogram(y);
        self.frames += 1;
        let beta = smoothing.min(T::one() - T::from_count(self.frames).recip());
        let s = match self.smoothed.take() {
            None => p,
            Some(prev) => prev.iter().zip(&p).map(|(&a, &b)| beta * a + (T::one() - beta) * b).collect(),
        };
        if beta >= smoothing {
            self.history.push_back(s.clone());
            while self.history.len() > window {
                self.history.pop_front();
            }
        }
        self.smoothed = Some(s);
        self.psd()
    }

    /// Bias-corrected per-bin minimum over the stored window, or the running
    /// average while still warming up.
    pub fn psd(&self) -> Vec<T> {
        if self.history.is_empty() {
            return self.smoothed.clone().unwrap_or_else(|| vec![T::zero(); self.nfft / 2 + 1]);
        }
        let bins = self.nfft / 2 + 1;
        let mut floor = vec![T::infinity(); bins];
        for s in &self.history {
            for (f, &v) in floor.iter_mut().zip(s) {
                *f = f.min(v);
            }
        }
        let bias = T::lit(MIN_STAT_BIAS);
        floor.iter_mut().for_each(|f| *f *= bias);
        floor
    }

    /// Autocorrelation lags `0..=max_lag` of a one-sided PSD.
    pub fn psd_autocorrelation(&self, psd: &[T], max_lag: usize) -> Vec<T> {
        let n = self.nfft;
        let mean = psd.iter().fold(T::zero(), |a, &v| a + v) / T::from_count(psd.len());
        let floor = mean * T::lit(PSD_FLOOR);
        let mut buf: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let idx = if k <= n / 2 { k } else { n - k };
                Complex::new(psd[idx].max(floor), T::zero())
            })
            .collect();
        self.inverse.process(&mut buf);
        let scale = T::from_count(n).recip();
        buf[..=max_lag].iter().map(|c| c.re * scale).collect()
    }
}

/// Noise autocorrelation for the current frame, lags `0..=lp_order`.
pub fn estimate_noise_autocorr<T: Real>(
    frame: &Frame<T>,
    cfg: &WhitenConfig<T>,
    state: &mut NoiseEstimator<T>,
) -> Result<Vec<T>> {
    match cfg.mode {
        WhitenMode::Off => Err(Error::Config("noise estimation requested with whitening off".into())),
        WhitenMode::KnownNoise => {
            if let Some(r) = &state.known {
                if r.len() == cfg.lp_order + 1 {
                    return Ok(r.clone());
                }
            }
            let reference = cfg
                .noise_reference
                .as_ref()
                .ok_or_else(|| Error::Config("known-noise whitening needs a noise reference".into()))?;
            let r = autocorrelation(reference, cfg.lp_order);
            state.known = Some(r.clone());
            Ok(r)
        }
        WhitenMode::Adaptive => {
            let psd = state.observe(frame.samples(), cfg.smoothing, cfg.min_window);
            Ok(state.psd_autocorrelation(&psd, cfg.lp_order))
        }
    }
}

/// Per-frame whitening stage owned by a tracker.
#[derive(Debug)]
pub struct Prewhitener<T: Real> {
    cfg: WhitenConfig<T>,
    state: NoiseEstimator<T>,
    fixed: Option<Vec<T>>,
}

impl<T: Real> Prewhitener<T> {
    pub fn new(cfg: WhitenConfig<T>, frame_len: usize) -> Result<Self> {
        cfg.validate(frame_len)?;
        let mut state = NoiseEstimator::new(frame_len);
        let fixed = if cfg.mode == WhitenMode::KnownNoise {
            let dummy = Frame::new(vec![T::zero(); frame_len], 0, T::zero(), T::one())?;
            let r = estimate_noise_autocorr(&dummy, &cfg, &mut state)?;
            Some(levinson_durbin(&r)?.0)
        } else {
            None
        };
        Ok(Self { cfg, state, fixed })
    }

    pub fn config(&self) -> &WhitenConfig<T> {
        &self.cfg
    }

    pub fn estimator(&self) -> &NoiseEstimator<T> {
        &self.state
    }

    /// Whitens one frame, updating the adaptive state first.
    pub fn process(&mut self, frame: &Frame<T>) -> Result<Frame<T>> {
        match self.cfg.mode {
            WhitenMode::Off => Ok(frame.clone()),
            WhitenMode::KnownNoise => Ok(prewhiten_frame(frame, self.fixed.as_deref().unwrap_or(&[]))),
            WhitenMode::Adaptive => {
                if !(frame.energy() > T::zero()) {
                    return Ok(frame.clone());
                }
                let r = estimate_noise_autocorr(frame, &self.cfg, &mut self.state)?;
                let (a, _) = levinson_durbin(&r)?;
                Ok(prewhiten_frame(frame, &a))
            }
        }
    }
}
