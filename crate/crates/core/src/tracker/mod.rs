//! Forward recursion over `{voiced(ω, K)} ∪ {unvoiced}`.
//!
//! Each frame runs predict → update → MAP → memory update. Voiced mass is
//! stored as a `grid_size × k_max` matrix, column `k − 1` for order `k`;
//! entries above a pitch's valid order are always zero.

mod transitions;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use transitions::{build_transitions, flat_transitions, TransitionModel, BAND_SIGMAS};

use crate::error::{Error, Result};
use crate::likelihood::{likelihood_surface, GPriorConfig, LikelihoodSurface};
use crate::prewhiten::Prewhitener;
use crate::scalar::{KahanSum, Real};
use crate::signal::{FitRatioEngine, Frame, PitchGrid};

/// Joint pmf over voiced states and the unvoiced state.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePosterior<T> {
    pub voiced: Array2<T>,
    pub p_unvoiced: T,
    pub frame_index: usize,
}

/// Predictions share the posterior layout.
pub type Prediction<T> = StatePosterior<T>;

impl<T: Real> StatePosterior<T> {
    /// `p_unvoiced + Σ voiced`.
    pub fn total_mass(&self) -> T {
        let mut s = KahanSum::new();
        s.add(self.p_unvoiced);
        for &v in self.voiced.iter() {
            s.add(v);
        }
        s.value()
    }

    /// Maximum voiced entry `(grid index, order)`; ties go to the lower
    /// pitch, then the lower order. `None` if all voiced mass is zero.
    pub fn voiced_argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, T)> = None;
        for ((i, j), &v) in self.voiced.indexed_iter() {
            if v > T::zero() && best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, j + 1, v));
            }
        }
        best.map(|(i, k, _)| (i, k))
    }
}

/// `p(ω_m, K_m | Y_m, u_m = 1)` for the latest voiced frame `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoicedMemory<T> {
    pub dist: Array2<T>,
    pub valid: bool,
}

impl<T: Real> VoicedMemory<T> {
    /// Uniform over the valid states of `grid`; `valid` stays false.
    pub fn uniform(grid: &PitchGrid<T>) -> Self {
        Self { dist: uniform_valid(grid), valid: false }
    }
}

fn uniform_valid<T: Real>(grid: &PitchGrid<T>) -> Array2<T> {
    let w = T::from_count(grid.valid_state_count()).recip();
    Array2::from_shape_fn((grid.len(), grid.k_max()), |(i, k)| if grid.is_valid(i, k + 1) { w } else { T::zero() })
}

/// `p(u₁ = 0) = 0.5`, the remaining half spread uniformly over valid states.
pub fn initial_prior<T: Real>(grid: &PitchGrid<T>) -> StatePosterior<T> {
    let half = T::lit(0.5);
    StatePosterior { voiced: uniform_valid(grid).mapv(|v| v * half), p_unvoiced: half, frame_index: 0 }
}

/// One-step prediction `p(x_n | Y_{n−1})`.
pub fn predict<T: Real>(prev: &StatePosterior<T>, memory: &VoicedMemory<T>, t: &TransitionModel<T>) -> Prediction<T> {
    let (g, k_max) = (t.grid_size(), t.k_max());
    let a_omega = t.a_omega();
    let a_k = t.a_k();
    let norm = t.source_norm();
    let mask = t.mask();

    // pitch step: u[j, k] = Σ_i A_ω[i, j] · prev[i, k] / norm[i, k]
    let mut u = Array2::<T>::zeros((g, k_max));
    for i in 0..g {
        let (lo, hi) = t.band(i);
        for k in 0..k_max {
            let p = prev.voiced[[i, k]];
            if p == T::zero() || !mask[[i, k]] {
                continue;
            }
            let s = p / norm[[i, k]];
            for j in lo..=hi {
                u[[j, k]] += a_omega[[i, j]] * s;
            }
        }
    }

    let [[p00, p01], [p10, p11]] = t.a_u();
    let pu = prev.p_unvoiced;
    let mut voiced = Array2::<T>::zeros((g, k_max));
    for j in 0..g {
        for l in 0..k_max {
            if !mask[[j, l]] {
                continue;
            }
            let mut s = T::zero();
            for k in 0..k_max {
                s += u[[j, k]] * a_k[[k, l]];
            }
            voiced[[j, l]] = p11 * s + p01 * pu * memory.dist[[j, l]];
        }
    }
    StatePosterior { voiced, p_unvoiced: p00 * pu + p10 * (T::one() - pu), frame_index: prev.frame_index + 1 }
}

/// Bayes update with one log-sum-exp normalizer.
///
/// If no state has both positive prediction and finite likelihood, the
/// prediction is returned renormalized.
pub fn update<T: Real>(prediction: &Prediction<T>, surface: &LikelihoodSurface<T>) -> StatePosterior<T> {
    let ll = surface.log_voiced();
    let log_null = surface.log_null();
    let mut peak = T::neg_infinity();
    for (&p, &l) in prediction.voiced.iter().zip(ll.iter()) {
        if p > T::zero() && l.is_finite() {
            peak = peak.max(p.ln() + l);
        }
    }
    let null_term = if prediction.p_unvoiced > T::zero() && log_null.is_finite() {
        prediction.p_unvoiced.ln() + log_null
    } else {
        T::neg_infinity()
    };
    peak = peak.max(null_term);

    let frame_index = surface.frame_index();
    if !peak.is_finite() {
        let total = prediction.total_mass();
        if !(total > T::zero()) {
            return StatePosterior {
                voiced: Array2::zeros(prediction.voiced.dim()),
                p_unvoiced: T::one(),
                frame_index,
            };
        }
        return StatePosterior {
            voiced: prediction.voiced.mapv(|v| v / total),
            p_unvoiced: prediction.p_unvoiced / total,
            frame_index,
        };
    }

    let mut voiced = Array2::<T>::zeros(prediction.voiced.dim());
    let mut z = KahanSum::new();
    for ((out, &p), &l) in voiced.iter_mut().zip(prediction.voiced.iter()).zip(ll.iter()) {
        if p > T::zero() && l.is_finite() {
            *out = (p.ln() + l - peak).exp();
            z.add(*out);
        }
    }
    let mut p_unvoiced = if null_term.is_finite() { (null_term - peak).exp() } else { T::zero() };
    z.add(p_unvoiced);
    let z = z.value();
    voiced.mapv_inplace(|v| v / z);
    p_unvoiced /= z;
    StatePosterior { voiced, p_unvoiced, frame_index }
}

/// Per-frame decision, reported in `f64` regardless of the working scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchEstimate {
    pub frame_index: usize,
    pub time: f64,
    pub voiced: bool,
    pub f0: f64,
    pub order: usize,
    pub p_unvoiced: f64,
    /// Voiced-state argmax whatever the voicing decision, for oracle-voicing
    /// evaluation. Zero when no voiced state carries mass.
    #[serde(skip, default)]
    pub candidate_f0: f64,
    #[serde(skip, default)]
    pub candidate_order: usize,
}

/// MAP decision: voiced iff `p_unvoiced < 0.5`.
pub fn map_estimate<T: Real>(post: &StatePosterior<T>, grid: &PitchGrid<T>, time: T) -> PitchEstimate {
    let voiced = post.p_unvoiced < T::lit(0.5);
    let (candidate_f0, candidate_order) = match post.voiced_argmax() {
        Some((i, k)) => (grid.frequency_hz(i).as_f64(), k),
        None => (0.0, 0),
    };
    let voiced = voiced && candidate_order > 0;
    PitchEstimate {
        frame_index: post.frame_index,
        time: time.as_f64(),
        voiced,
        f0: if voiced { candidate_f0 } else { 0.0 },
        order: if voiced { candidate_order } else { 0 },
        p_unvoiced: post.p_unvoiced.as_f64(),
        candidate_f0,
        candidate_order,
    }
}

/// Replaces the memory with the normalized voiced posterior of a voiced
/// frame; otherwise returns it unchanged.
pub fn update_memory<T: Real>(post: &StatePosterior<T>, memory: &VoicedMemory<T>) -> VoicedMemory<T> {
    if post.p_unvoiced < T::lit(0.5) {
        let mass = T::one() - post.p_unvoiced;
        VoicedMemory { dist: post.voiced.mapv(|v| v / mass), valid: true }
    } else {
        memory.clone()
    }
}

/// Everything the tracker computed for one frame.
#[derive(Debug, Clone)]
pub struct StepOutput<T> {
    pub estimate: PitchEstimate,
    pub prediction: Prediction<T>,
    pub surface: LikelihoodSurface<T>,
    pub posterior: StatePosterior<T>,
}

/// Sequential tracker owning the recursion state.
#[derive(Debug)]
pub struct Tracker<T: Real> {
    grid: PitchGrid<T>,
    transitions: TransitionModel<T>,
    prior: GPriorConfig<T>,
    engine: FitRatioEngine<T>,
    whitener: Option<Prewhitener<T>>,
    use_memory: bool,
    posterior: Option<StatePosterior<T>>,
    memory: VoicedMemory<T>,
}

impl<T: Real> Tracker<T> {
    pub fn new(grid: PitchGrid<T>, transitions: TransitionModel<T>, prior: GPriorConfig<T>, frame_len: usize) -> Result<Self> {
        if transitions.grid_size() != grid.len() || transitions.k_max() != grid.k_max() {
            return Err(Error::Config("transition model does not match the pitch grid".into()));
        }
        let engine = FitRatioEngine::new(&grid, frame_len)?;
        let memory = VoicedMemory::uniform(&grid);
        Ok(Self { grid, transitions, prior, engine, whitener: None, use_memory: true, posterior: None, memory })
    }

    pub fn with_prewhitener(mut self, whitener: Prewhitener<T>) -> Self {
        self.whitener = Some(whitener);
        self
    }

    /// Always predicts unvoiced→voiced moves from the uniform distribution.
    pub fn without_voiced_memory(mut self) -> Self {
        self.use_memory = false;
        self
    }

    pub fn grid(&self) -> &PitchGrid<T> {
        &self.grid
    }

    pub fn transitions(&self) -> &TransitionModel<T> {
        &self.transitions
    }

    pub fn frame_len(&self) -> usize {
        self.engine.frame_len()
    }

    pub fn posterior(&self) -> Option<&StatePosterior<T>> {
        self.posterior.as_ref()
    }

    pub fn memory(&self) -> &VoicedMemory<T> {
        &self.memory
    }

    /// Mean removal, then whitening if configured.
    pub fn prepare(&mut self, frame: &Frame<T>) -> Result<Frame<T>> {
        if frame.len() != self.frame_len() {
            return Err(Error::Config(format!(
                "frame has {} samples, tracker expects {}",
                frame.len(),
                self.frame_len()
            )));
        }
        let centred = frame.mean_removed();
        match self.whitener.as_mut() {
            Some(w) => w.process(&centred),
            None => Ok(centred),
        }
    }

    /// Likelihood surface of an already prepared frame.
    pub fn surface(&self, prepared: &Frame<T>) -> Result<LikelihoodSurface<T>> {
        let degenerate = || LikelihoodSurface::degenerate(self.grid.len(), self.grid.k_max(), prepared.index());
        let r2 = match self.engine.compute(prepared.samples()) {
            Ok(r2) => r2,
            Err(Error::DegenerateFrame) => return Ok(degenerate()),
            Err(e) => return Err(e),
        };
        match likelihood_surface(prepared, &r2, &self.prior) {
            Err(Error::DegenerateFrame) => Ok(degenerate()),
            other => other,
        }
    }

    pub fn step(&mut self, frame: &Frame<T>) -> Result<PitchEstimate> {
        self.step_detailed(frame).map(|out| out.estimate)
    }

    pub fn step_detailed(&mut self, frame: &Frame<T>) -> Result<StepOutput<T>> {
        let raw_energy = frame.energy();
        let prepared = self.prepare(frame)?;
        let surface = if prepared.energy() <= T::epsilon() * raw_energy {
            LikelihoodSurface::degenerate(self.grid.len(), self.grid.k_max(), frame.index())
        } else {
            self.surface(&prepared)?
        };

        let mut prediction = match &self.posterior {
            None => initial_prior(&self.grid),
            Some(prev) if self.use_memory => predict(prev, &self.memory, &self.transitions),
            Some(prev) => predict(prev, &VoicedMemory::uniform(&self.grid), &self.transitions),
        };
        prediction.frame_index = frame.index();
        let posterior = update(&prediction, &surface);
        let estimate = map_estimate(&posterior, &self.grid, frame.start_time());
        self.memory = update_memory(&posterior, &self.memory);
        self.posterior = Some(posterior.clone());
        Ok(StepOutput { estimate, prediction, surface, posterior })
    }
}

/// Runs a fresh tracker over `frames`.
pub fn track<T: Real>(
    frames: &[Frame<T>],
    grid: &PitchGrid<T>,
    transitions: &TransitionModel<T>,
    cfg: &GPriorConfig<T>,
) -> Result<Vec<PitchEstimate>> {
    let first = frames.first().ok_or_else(|| Error::EmptyInput("no frames to track".into()))?;
    if frames.iter().any(|f| f.sample_rate() != first.sample_rate()) {
        return Err(Error::Config("frames have inconsistent sample rates".into()));
    }
    if first.sample_rate() != grid.sample_rate() {
        return Err(Error::Config("frame sample rate differs from the pitch grid".into()));
    }
    let mut tracker = Tracker::new(grid.clone(), transitions.clone(), *cfg, first.len())?;
    frames.iter().map(|f| tracker.step(f)).collect()
}
