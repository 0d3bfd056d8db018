//! Bayesian pitch tracking with a harmonic signal model.
//!
//! Every frame is scored against all `(pitch, harmonic order)` states of a
//! discrete grid and against a noise-only state with closed-form marginal
//! likelihoods. A first-order Markov recursion with a memory of the last
//! voiced frame turns the scores into posteriors, which are decoded by MAP.
//!
//! ```
//! use harmotrack::{analyze, synth_signal, SynthConfig, TrackConfig};
//!
//! let x = synth_signal(&SynthConfig { f0: 200.0, order: 3, snr_db: 10.0, ..Default::default() }).unwrap();
//! let track = analyze(&x, 16000.0, &TrackConfig::default()).unwrap();
//! let voiced = track.iter().filter(|e| e.voiced && (e.f0 - 200.0).abs() < 2.0).count();
//! assert!(voiced > track.len() * 9 / 10);
//! ```
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the `*64` and `*32`
//! aliases name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audio;
pub mod config;
pub mod error;
pub mod eval;
pub mod likelihood;
mod linalg;
pub mod output;
pub mod prewhiten;
pub mod scalar;
pub mod signal;
pub mod synth;
pub mod tracker;

pub use audio::{read_audio, write_audio, WavEncoding};
pub use config::{analyze, TrackConfig};
pub use error::{Error, Result};
pub use eval::{eval_ger, eval_mae, eval_ter, evaluate, oracle_voicing, GroundTruth, Metrics, TruthEntry};
pub use likelihood::{
    likelihood_surface, log_gauss_2f1_b1, log_null_likelihood, log_voiced_likelihood, GPriorConfig,
    LikelihoodSurface,
};
pub use output::{format_csv, parse_csv, plot_data, read_track, write_track, TrackFormat};
pub use prewhiten::{
    estimate_noise_autocorr, levinson_durbin, prewhiten_frame, NoiseEstimator, Prewhitener, WhitenConfig,
    WhitenMode,
};
pub use scalar::Real;
pub use signal::{
    build_basis, coefficient_estimate, fit_ratio, fit_ratio_grid, frame_signal, make_pitch_grid, FitRatioEngine,
    FitRatioSurface, Frame, HarmonicBasis, PitchGrid,
};
pub use synth::{synth_signal, SynthConfig};
pub use tracker::{
    build_transitions, flat_transitions, initial_prior, map_estimate, predict, track, update, update_memory,
    PitchEstimate, Prediction, StatePosterior, Tracker, TransitionModel, VoicedMemory,
};

pub type Frame64 = Frame<f64>;
pub type PitchGrid64 = PitchGrid<f64>;
pub type TransitionModel64 = TransitionModel<f64>;
pub type StatePosterior64 = StatePosterior<f64>;
pub type LikelihoodSurface64 = LikelihoodSurface<f64>;
pub type TrackConfig64 = TrackConfig<f64>;
pub type Tracker64 = Tracker<f64>;

pub type Frame32 = Frame<f32>;
pub type PitchGrid32 = PitchGrid<f32>;
pub type TransitionModel32 = TransitionModel<f32>;
pub type StatePosterior32 = StatePosterior<f32>;
pub type LikelihoodSurface32 = LikelihoodSurface<f32>;
pub type TrackConfig32 = TrackConfig<f32>;
pub type Tracker32 = Tracker<f32>;
