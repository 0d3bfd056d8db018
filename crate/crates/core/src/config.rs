//! End-to-end configuration and the one-call analysis entry point.

use crate::error::{Error, Result};
use crate::likelihood::GPriorConfig;
use crate::prewhiten::{Prewhitener, WhitenConfig, WhitenMode};
use crate::scalar::Real;
use crate::signal::{frame_signal, make_pitch_grid, samples_for_ms, PitchGrid};
use crate::tracker::{build_transitions, PitchEstimate, Tracker, TransitionModel};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackConfig<T> {
    pub f_min: T,
    pub f_max: T,
    /// Pitch-grid DFT size `F`.
    pub dft_size: usize,
    pub k_max: usize,
    pub frame_ms: T,
    pub hop_ms: T,
    pub delta: T,
    /// `None` selects `16π²/f_s²`.
    pub sigma_omega2: Option<T>,
    pub sigma_k2: T,
    pub p_u1_given_u0: T,
    pub p_u0_given_u1: T,
    pub whiten: WhitenConfig<T>,
}

impl<T: Real> Default for TrackConfig<T> {
    fn default() -> Self {
        Self {
            f_min: T::lit(70.0),
            f_max: T::lit(400.0),
            dft_size: 16384,
            k_max: 10,
            frame_ms: T::lit(25.0),
            hop_ms: T::lit(10.0),
            delta: T::lit(4.0),
            sigma_omega2: None,
            sigma_k2: T::one(),
            p_u1_given_u0: T::lit(0.4),
            p_u0_given_u1: T::lit(0.3),
            whiten: WhitenConfig::default(),
        }
    }
}

impl<T: Real> TrackConfig<T> {
    pub fn sigma_omega2_at(&self, f_s: T) -> T {
        self.sigma_omega2.unwrap_or_else(|| T::lit(16.0) * T::PI() * T::PI() / (f_s * f_s))
    }

    pub fn frame_len(&self, f_s: T) -> usize {
        samples_for_ms(self.frame_ms, f_s)
    }

    pub fn grid(&self, f_s: T) -> Result<PitchGrid<T>> {
        make_pitch_grid(self.f_min, self.f_max, f_s, self.dft_size, self.k_max)
    }

    pub fn transitions(&self, grid: &PitchGrid<T>) -> Result<TransitionModel<T>> {
        build_transitions(
            grid,
            self.sigma_omega2_at(grid.sample_rate()),
            self.sigma_k2,
            self.p_u1_given_u0,
            self.p_u0_given_u1,
        )
    }

    /// Checks every setting against sample rate `f_s`.
    pub fn validate(&self, f_s: T) -> Result<()> {
        if !(self.frame_ms > T::zero()) || !(self.hop_ms > T::zero()) {
            return Err(Error::Config("frame and hop lengths must be positive".into()));
        }
        if samples_for_ms(self.hop_ms, f_s) == 0 {
            return Err(Error::Config("hop is shorter than one sample".into()));
        }
        let m = self.frame_len(f_s);
        if m <= 2 * self.k_max {
            return Err(Error::Config(format!(
                "a {m}-sample frame cannot fit {} harmonics; raise frame_ms or lower k_max",
                self.k_max
            )));
        }
        if self.dft_size <= m {
            return Err(Error::Config(format!("DFT size {} must exceed the frame length {m}", self.dft_size)));
        }
        GPriorConfig::new(self.delta)?;
        self.whiten.validate(m)?;
        let grid = self.grid(f_s)?;
        self.transitions(&grid)?;
        Ok(())
    }

    pub fn build_tracker(&self, f_s: T) -> Result<Tracker<T>> {
        self.validate(f_s)?;
        let grid = self.grid(f_s)?;
        let transitions = self.transitions(&grid)?;
        let m = self.frame_len(f_s);
        let tracker = Tracker::new(grid, transitions, GPriorConfig::new(self.delta)?, m)?;
        Ok(match self.whiten.mode {
            WhitenMode::Off => tracker,
            _ => tracker.with_prewhitener(Prewhitener::new(self.whiten.clone(), m)?),
        })
    }
}

/// Frames `samples` and tracks them with a fresh tracker.
pub fn analyze<T: Real>(samples: &[T], f_s: T, cfg: &TrackConfig<T>) -> Result<Vec<PitchEstimate>> {
    let mut tracker = cfg.build_tracker(f_s)?;
    let frames = frame_signal(samples, f_s, cfg.frame_ms, cfg.hop_ms)?;
    frames.iter().map(|f| tracker.step(f)).collect()
}
