//! Closed-form marginal likelihoods of the voiced and null models.
//!
//! With a Jeffreys prior on the noise variance, a g-prior on the harmonic
//! weights and the hyper-prior `p(g) = ((δ−2)/2)(1+g)^{−δ/2}`, the voiced
//! evidence relative to the null evidence `m_M(y)` depends on the frame
//! only through the fit ratio `R²`.

mod hyp2f1;

use ndarray::Array2;
use statrs::function::gamma::ln_gamma;

pub use hyp2f1::{hyp2f1_route, log_gauss_2f1_b1, Hyp2f1Route, SERIES_ITERATION_CAP};

use crate::error::{Error, Result};
use crate::scalar::{energy, Real};
use crate::signal::{FitRatioSurface, Frame};

/// Hyper-prior parameter `δ` of the g-prior mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GPriorConfig<T> {
    delta: T,
}

impl<T: Real> GPriorConfig<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !(delta > T::lit(2.0)) || !delta.is_finite() {
            return Err(Error::Config(format!("g-prior delta must exceed 2, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// `log((δ−2)/(2K+δ−2))`, the order penalty at `R² = 0`.
    pub fn log_order_penalty(&self, k: usize) -> T {
        let two = T::lit(2.0);
        ((self.delta - two) / (two * T::from_count(k) + self.delta - two)).ln()
    }
}

impl<T: Real> Default for GPriorConfig<T> {
    fn default() -> Self {
        Self { delta: T::lit(4.0) }
    }
}

/// `log m_M(y) = log Γ(M/2) − (M/2)·log(π‖y‖²)`.
pub fn log_null_likelihood<T: Real>(y: &[T]) -> Result<T> {
    let e = energy(y);
    if !(e > T::zero()) {
        return Err(Error::DegenerateFrame);
    }
    let half_m = y.len() as f64 / 2.0;
    let v = ln_gamma(half_m) - half_m * (std::f64::consts::PI * e.as_f64()).ln();
    Ok(T::lit(v))
}

/// `log p(y | ω, K, u = 1)` from the fit ratio of state `(ω, K)`.
pub fn log_voiced_likelihood<T: Real>(
    r2: T,
    k: usize,
    m: usize,
    cfg: &GPriorConfig<T>,
    log_null: T,
) -> Result<T> {
    if k == 0 || m <= 2 * k {
        return Err(Error::Underdetermined { rows: m, cols: 2 * k });
    }
    if !(r2 >= T::zero() && r2 < T::one()) {
        return Err(Error::Domain { z: r2.as_f64() });
    }
    let two = T::lit(2.0);
    let a = T::from_count(m) / two;
    let c = (two * T::from_count(k) + cfg.delta()) / two;
    Ok(log_null + cfg.log_order_penalty(k) + log_gauss_2f1_b1(a, c, r2)?)
}

/// Per-frame log-likelihoods of all voiced states plus the null state.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodSurface<T> {
    log_voiced: Array2<T>,
    log_null: T,
    frame_index: usize,
    degenerate: bool,
}

impl<T: Real> LikelihoodSurface<T> {
    pub fn new(log_voiced: Array2<T>, log_null: T, frame_index: usize) -> Self {
        Self { log_voiced, log_null, frame_index, degenerate: false }
    }

    /// Surface of a zero-energy frame: every voiced state is impossible and
    /// the null state carries all the evidence.
    pub fn degenerate(grid_size: usize, k_max: usize, frame_index: usize) -> Self {
        Self {
            log_voiced: Array2::from_elem((grid_size, k_max), T::neg_infinity()),
            log_null: T::zero(),
            frame_index,
            degenerate: true,
        }
    }

    pub fn log_voiced(&self) -> &Array2<T> {
        &self.log_voiced
    }

    /// Log-likelihood at grid index `i`, 1-based order `k`.
    pub fn get(&self, i: usize, k: usize) -> T {
        self.log_voiced[[i, k - 1]]
    }

    pub fn log_null(&self) -> T {
        self.log_null
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Maximum-likelihood voiced state `(grid index, order)`; ties go to the
    /// lower pitch, then the lower order.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, T)> = None;
        for ((i, j), &v) in self.log_voiced.indexed_iter() {
            if v == T::neg_infinity() || v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, j + 1, v));
            }
        }
        best.map(|(i, k, _)| (i, k))
    }
}

/// Applies [`log_voiced_likelihood`] over a fit-ratio surface; absent
/// states get `−∞`.
pub fn likelihood_surface<T: Real>(
    frame: &Frame<T>,
    r2: &FitRatioSurface<T>,
    cfg: &GPriorConfig<T>,
) -> Result<LikelihoodSurface<T>> {
    let log_null = log_null_likelihood(frame.samples())?;
    let m = frame.len();
    let (g, k_max) = (r2.grid_size(), r2.k_max());
    let two = T::lit(2.0);
    let a = T::from_count(m) / two;
    let mut out = Array2::from_elem((g, k_max), T::neg_infinity());
    for k in 1..=k_max {
        if m <= 2 * k {
            continue;
        }
        let c = (two * T::from_count(k) + cfg.delta()) / two;
        let base = log_null + cfg.log_order_penalty(k);
        for i in 0..g {
            if let Some(z) = r2.get(i, k) {
                out[[i, k - 1]] = base + log_gauss_2f1_b1(a, c, z)?;
            }
        }
    }
    Ok(LikelihoodSurface::new(out, log_null, frame.index()))
}
