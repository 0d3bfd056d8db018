use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::PitchGrid;

/// Gaussian kernels are truncated beyond this many standard deviations.
pub const BAND_SIGMAS: f64 = 5.0;

/// Row-stochastic transition matrices for pitch, order and voicing, plus the
/// per-source normalizers that restrict voiced→voiced moves to valid states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel<T> {
    a_omega: Array2<T>,
    band: Vec<(usize, usize)>,
    a_k: Array2<T>,
    a_u: [[T; 2]; 2],
    sigma_omega2: T,
    sigma_k2: T,
    mask: Array2<bool>,
    source_norm: Array2<T>,
}

impl<T: Real> TransitionModel<T> {
    /// Pitch transitions, `[i, j] = p(ω_j | ω_i)`.
    pub fn a_omega(&self) -> &Array2<T> {
        &self.a_omega
    }

    /// Order transitions, `[k−1, l−1] = p(K = l | K = k)`.
    pub fn a_k(&self) -> &Array2<T> {
        &self.a_k
    }

    /// Voicing transitions, rows indexed by the previous voicing state.
    pub fn a_u(&self) -> [[T; 2]; 2] {
        self.a_u
    }

    pub fn sigma_omega2(&self) -> T {
        self.sigma_omega2
    }

    pub fn sigma_k2(&self) -> T {
        self.sigma_k2
    }

    /// Columns `[lo, hi]` holding the nonzero entries of pitch row `i`.
    pub fn band(&self, i: usize) -> (usize, usize) {
        self.band[i]
    }

    /// Validity mask, `[i, k−1]`.
    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    /// Mass that source state `(i, k)` sends to valid targets before
    /// renormalization; zero at invalid sources.
    pub fn source_norm(&self) -> &Array2<T> {
        &self.source_norm
    }

    /// `p(voiced → voiced)` restricted to valid targets, summing to one over
    /// `(j, l)` for each valid source `(i, k)` (orders 1-based).
    pub fn voiced_kernel(&self, i: usize, k: usize, j: usize, l: usize) -> T {
        if !self.mask[[i, k - 1]] || !self.mask[[j, l - 1]] {
            return T::zero();
        }
        self.a_omega[[i, j]] * self.a_k[[k - 1, l - 1]] / self.source_norm[[i, k - 1]]
    }

    pub fn grid_size(&self) -> usize {
        self.a_omega.nrows()
    }

    pub fn k_max(&self) -> usize {
        self.a_k.nrows()
    }
}

fn gaussian_rows<T: Real>(points: &[T], sigma2: T) -> (Array2<T>, Vec<(usize, usize)>) {
    let n = points.len();
    let mut a = Array2::zeros((n, n));
    let mut band = Vec::with_capacity(n);
    let reach = T::lit(BAND_SIGMAS) * sigma2.sqrt();
    let two_var = T::lit(2.0) * sigma2;
    for i in 0..n {
        let mut lo = i;
        let mut hi = i;
        let mut total = T::zero();
        for j in 0..n {
            let d = points[j] - points[i];
            if d.abs() <= reach {
                let w = (-(d * d) / two_var).exp();
                a[[i, j]] = w;
                total += w;
                lo = lo.min(j);
                hi = hi.max(j);
            }
        }
        for j in lo..=hi {
            a[[i, j]] /= total;
        }
        band.push((lo, hi));
    }
    (a, band)
}

fn check_probability<T: Real>(name: &str, p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {p}")))
    }
}

/// Builds `A^ω`, `A^K` and `A^u`.
///
/// Both variances may be `+∞`, which yields uniform rows.
pub fn build_transitions<T: Real>(
    grid: &PitchGrid<T>,
    sigma_omega2: T,
    sigma_k2: T,
    p_u1_given_u0: T,
    p_u0_given_u1: T,
) -> Result<TransitionModel<T>> {
    if !(sigma_omega2 > T::zero()) || !(sigma_k2 > T::zero()) {
        return Err(Error::Config("transition variances must be positive".into()));
    }
    check_probability("p(u=1|u=0)", p_u1_given_u0)?;
    check_probability("p(u=0|u=1)", p_u0_given_u1)?;

    let (a_omega, band) = gaussian_rows(grid.omegas(), sigma_omega2);
    let orders: Vec<T> = (1..=grid.k_max()).map(T::from_count).collect();
    let (a_k, _) = gaussian_rows(&orders, sigma_k2);
    let a_u = [
        [T::one() - p_u1_given_u0, p_u1_given_u0],
        [p_u0_given_u1, T::one() - p_u0_given_u1],
    ];

    let (g, k_max) = (grid.len(), grid.k_max());
    let mask = Array2::from_shape_fn((g, k_max), |(i, k)| grid.is_valid(i, k + 1));
    // reach[j, k] = Σ_l mask[j, l] · A_K[k, l]
    let reach = Array2::from_shape_fn((g, k_max), |(j, k)| {
        (0..k_max).filter(|&l| mask[[j, l]]).fold(T::zero(), |acc, l| acc + a_k[[k, l]])
    });
    let mut source_norm = Array2::zeros((g, k_max));
    for i in 0..g {
        let (lo, hi) = band[i];
        for k in 0..k_max {
            if !mask[[i, k]] {
                continue;
            }
            source_norm[[i, k]] = (lo..=hi).fold(T::zero(), |acc, j| acc + a_omega[[i, j]] * reach[[j, k]]);
        }
    }
    Ok(TransitionModel { a_omega, band, a_k, a_u, sigma_omega2, sigma_k2, mask, source_norm })
}

/// Transitions under which every frame is judged on its own likelihood.
pub fn flat_transitions<T: Real>(grid: &PitchGrid<T>) -> Result<TransitionModel<T>> {
    build_transitions(grid, T::infinity(), T::infinity(), T::lit(0.5), T::lit(0.5))
}
