//! Fit ratios for every `(pitch, order)` candidate of a grid.
//!
//! `ZᵀZ` depends only on `(ω, K, M)`, so its factors are computed once per
//! grid. Columns are ordered `[c₁, d₁, c₂, d₂, …]`, which makes the basis of
//! order `K` the leading `2K` columns of the order-`k_max` basis. A single
//! Cholesky factor per pitch then serves every order: the whitened
//! correlations `w = L⁻¹ Zᵀy` accumulate `‖P_K y‖²` two entries at a time.
//! `Zᵀy` for all pitches comes from one zero-padded `F`-point FFT, since
//! `Σ_m y_m e^{-i·kω_f·m}` is DFT bin `k·f`.

use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::basis::{clamp_fit_ratio, PINV_REL_TOL};
use super::grid::PitchGrid;
use crate::error::{Error, Result};
use crate::linalg::{pinv_sqrt_rows, Cholesky};
use crate::scalar::{dot, energy, KahanSum, Real};

/// `R²` for every grid state; entries with `kω ≥ π` are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRatioSurface<T> {
    values: Array2<T>,
}

impl<T: Real> FitRatioSurface<T> {
    /// Surface from a `grid_size × k_max` matrix; NaN marks absent states.
    pub fn from_matrix(values: Array2<T>) -> Self {
        Self { values }
    }

    /// `R²` at grid index `i` and 1-based order `k`.
    pub fn get(&self, i: usize, k: usize) -> Option<T> {
        let v = self.values[[i, k - 1]];
        (!v.is_nan()).then_some(v)
    }

    pub fn grid_size(&self) -> usize {
        self.values.nrows()
    }

    pub fn k_max(&self) -> usize {
        self.values.ncols()
    }

    /// Raw matrix, NaN at absent states.
    pub fn matrix(&self) -> &Array2<T> {
        &self.values
    }

    /// `(grid index, order, R²)` of the largest present entry.
    pub fn argmax(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for ((i, j), &v) in self.values.indexed_iter() {
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, j + 1, v));
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
struct PitchFactor<T> {
    bin: usize,
    order: usize,
    chol: Cholesky<T>,
    /// Orders covered by `chol`.
    chol_orders: usize,
    /// Pseudo-inverse rows for orders above `chol_orders`, lowest first.
    fallback: Vec<Vec<Vec<T>>>,
}

/// Precomputed state for evaluating `R²` over a grid at a fixed frame length.
pub struct FitRatioEngine<T: Real> {
    frame_len: usize,
    k_max: usize,
    factors: Vec<PitchFactor<T>>,
    fft: Arc<dyn Fft<T>>,
    dft_size: usize,
}

impl<T: Real> std::fmt::Debug for FitRatioEngine<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FitRatioEngine")
            .field("frame_len", &self.frame_len)
            .field("k_max", &self.k_max)
            .field("grid_size", &self.factors.len())
            .field("dft_size", &self.dft_size)
            .finish()
    }
}

/// `Σ_{m=1}^{M} cos(θm)` and `Σ sin(θm)` for `θ = jω`, `j = 0…2K`.
fn harmonic_sums<T: Real>(omega: T, k: usize, m: usize) -> (Vec<T>, Vec<T>) {
    let mut cs = Vec::with_capacity(2 * k + 1);
    let mut ss = Vec::with_capacity(2 * k + 1);
    for j in 0..=2 * k {
        let theta = T::from_count(j) * omega;
        let mut c = KahanSum::new();
        let mut s = KahanSum::new();
        for t in 1..=m {
            let phase = theta * T::from_count(t);
            c.add(phase.cos());
            s.add(phase.sin());
        }
        cs.push(c.value());
        ss.push(s.value());
    }
    (cs, ss)
}

/// Interleaved Gram matrix of order `k` (size `2k`).
fn interleaved_gram<T: Real>(cs: &[T], ss: &[T], k: usize) -> Vec<T> {
    let n = 2 * k;
    let half = T::lit(0.5);
    let mut g = vec![T::zero(); n * n];
    for p in 1..=k {
        for q in 1..=k {
            let diff = p.abs_diff(q);
            let sum = p + q;
            // sign of sin((q - p)θ)
            let sin_diff = if q >= p { ss[q - p] } else { -ss[p - q] };
            let cc = half * (cs[diff] + cs[sum]);
            let dd = half * (cs[diff] - cs[sum]);
            // Σ cos(pθm) sin(qθm)
            let cd = half * (ss[sum] + sin_diff);
            let (ic, is) = (2 * (p - 1), 2 * (p - 1) + 1);
            let (jc, js) = (2 * (q - 1), 2 * (q - 1) + 1);
            g[ic * n + jc] = cc;
            g[is * n + js] = dd;
            g[ic * n + js] = cd;
            g[js * n + ic] = cd;
        }
    }
    g
}

fn leading_block<T: Real>(g: &[T], n: usize, r: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        out.extend_from_slice(&g[i * n..i * n + r]);
    }
    out
}

impl<T: Real> FitRatioEngine<T> {
    pub fn new(grid: &PitchGrid<T>, frame_len: usize) -> Result<Self> {
        if frame_len < 2 {
            return Err(Error::Config("frame length must be at least 2".into()));
        }
        if grid.dft_size() <= frame_len {
            return Err(Error::Config(format!(
                "DFT size {} must exceed the frame length {frame_len}",
                grid.dft_size()
            )));
        }
        if frame_len < 2 * grid.k_max() {
            return Err(Error::Underdetermined { rows: frame_len, cols: 2 * grid.k_max() });
        }
        let factors = (0..grid.len())
            .map(|i| {
                let omega = grid.omega(i);
                let order = grid.valid_order(i);
                let n = 2 * order;
                let (cs, ss) = harmonic_sums(omega, order, frame_len);
                let gram = interleaved_gram(&cs, &ss, order);
                let trace = (0..n).fold(T::zero(), |a, j| a + gram[j * n + j]);
                let chol = Cholesky::partial(&gram, n, T::lit(PINV_REL_TOL) * trace);
                let chol_orders = chol.rank() / 2;
                let fallback = ((chol_orders + 1)..=order)
                    .map(|k| {
                        let block = leading_block(&gram, n, 2 * k);
                        pinv_sqrt_rows(&block, 2 * k, T::lit(PINV_REL_TOL))
                    })
                    .collect();
                PitchFactor { bin: grid.bin(i), order, chol, chol_orders, fallback }
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(grid.dft_size());
        Ok(Self { frame_len, k_max: grid.k_max(), factors, fft, dft_size: grid.dft_size() })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// Number of (pitch, order) states whose Gram matrix needed the
    /// pseudo-inverse path.
    pub fn fallback_states(&self) -> usize {
        self.factors.iter().map(|f| f.fallback.len()).sum()
    }

    /// `R²` for all grid states of frame `y`.
    pub fn compute(&self, y: &[T]) -> Result<FitRatioSurface<T>> {
        if y.len() != self.frame_len {
            return Err(Error::Config(format!(
                "frame has {} samples, engine expects {}",
                y.len(),
                self.frame_len
            )));
        }
        let total = energy(y);
        if !(total > T::zero()) {
            return Err(Error::DegenerateFrame);
        }
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.dft_size];
        for (m, &v) in y.iter().enumerate() {
            buf[m + 1] = Complex::new(v, T::zero());
        }
        self.fft.process(&mut buf);

        let mut values = Array2::from_elem((self.factors.len(), self.k_max), T::nan());
        let mut b = Vec::with_capacity(2 * self.k_max);
        for (i, pf) in self.factors.iter().enumerate() {
            b.clear();
            for k in 1..=pf.order {
                let x = buf[k * pf.bin];
                b.push(x.re);
                b.push(-x.im);
            }
            let head = 2 * pf.chol_orders;
            let w = pf.chol.forward(&b[..head]);
            let mut acc = T::zero();
            for k in 1..=pf.chol_orders {
                acc += w[2 * k - 2] * w[2 * k - 2] + w[2 * k - 1] * w[2 * k - 1];
                values[[i, k - 1]] = clamp_fit_ratio(acc / total);
            }
            for (offset, rows) in pf.fallback.iter().enumerate() {
                let k = pf.chol_orders + 1 + offset;
                let proj = rows
                    .iter()
                    .map(|r| dot(r, &b[..2 * k]))
                    .fold(T::zero(), |a, v| a + v * v);
                values[[i, k - 1]] = clamp_fit_ratio(proj / total);
            }
        }
        Ok(FitRatioSurface { values })
    }
}

/// One-shot `R²` over a grid; build a [`FitRatioEngine`] to amortize setup
/// across frames.
pub fn fit_ratio_grid<T: Real>(y: &[T], grid: &PitchGrid<T>) -> Result<FitRatioSurface<T>> {
    FitRatioEngine::new(grid, y.len())?.compute(y)
}
