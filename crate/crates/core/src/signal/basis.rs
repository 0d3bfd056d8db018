use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{pinv_sqrt_rows, Cholesky};
use crate::scalar::{dot, energy, KahanSum, Real};

/// Eigenvalues below this fraction of the Gram trace are treated as null.
pub(crate) const PINV_REL_TOL: f64 = 1e-10;

/// `M × 2K` matrix `[c(ω)…c(Kω), d(ω)…d(Kω)]` with `c_j(ω)[m] = cos(jωm)`,
/// `d_j(ω)[m] = sin(jωm)` for `m = 1…M`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicBasis<T> {
    z: Array2<T>,
    omega: T,
    order: usize,
}

impl<T: Real> HarmonicBasis<T> {
    pub fn matrix(&self) -> &Array2<T> {
        &self.z
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.z.nrows()
    }

    /// `Zᵀ y`.
    pub fn correlate(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows());
        (0..self.z.ncols())
            .map(|j| {
                let col = self.z.column(j);
                let mut s = KahanSum::new();
                for (&zij, &yi) in col.iter().zip(y) {
                    s.add(zij * yi);
                }
                s.value()
            })
            .collect()
    }

    /// `ZᵀZ`, row-major.
    pub fn gram(&self) -> Vec<T> {
        let n = self.z.ncols();
        let mut g = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = KahanSum::new();
                for (&a, &b) in self.z.column(i).iter().zip(self.z.column(j).iter()) {
                    s.add(a * b);
                }
                g[i * n + j] = s.value();
                g[j * n + i] = s.value();
            }
        }
        g
    }

    /// `Z a`.
    pub fn synthesize(&self, a: &[T]) -> Vec<T> {
        assert_eq!(a.len(), self.z.ncols());
        self.z
            .rows()
            .into_iter()
            .map(|row| dot(row.as_slice().expect("standard layout"), a))
            .collect()
    }
}

/// Builds the harmonic basis for pitch `omega` (radians/sample) and order `k`.
pub fn build_basis<T: Real>(omega: T, k: usize, m: usize) -> Result<HarmonicBasis<T>> {
    if k == 0 || !(omega > T::zero()) || !(T::from_count(k) * omega < T::PI()) {
        return Err(Error::InvalidState { omega: omega.as_f64(), order: k });
    }
    if m < 2 * k {
        return Err(Error::Underdetermined { rows: m, cols: 2 * k });
    }
    let z = Array2::from_shape_fn((m, 2 * k), |(row, col)| {
        let harmonic = T::from_count(col % k + 1);
        let phase = harmonic * omega * T::from_count(row + 1);
        if col < k {
            phase.cos()
        } else {
            phase.sin()
        }
    });
    Ok(HarmonicBasis { z, omega, order: k })
}

fn gram_tolerance<T: Real>(gram: &[T], n: usize) -> T {
    let trace = (0..n).fold(T::zero(), |acc, i| acc + gram[i * n + i]);
    T::lit(PINV_REL_TOL) * trace
}

/// Least-squares weights `â = (ZᵀZ)⁻¹ Zᵀ y`.
pub fn coefficient_estimate<T: Real>(y: &[T], basis: &HarmonicBasis<T>) -> Result<Vec<T>> {
    let n = basis.z.ncols();
    let gram = basis.gram();
    let chol = Cholesky::full(&gram, n, gram_tolerance(&gram, n)).ok_or(Error::Singular)?;
    Ok(chol.solve(&basis.correlate(y)))
}

/// `yᵀ Z â`, the energy of the projection of `y` onto `span(Z)`.
///
/// Uses the Cholesky solve when `ZᵀZ` is well conditioned and an
/// eigenvalue-thresholded pseudo-inverse otherwise.
pub fn projected_energy<T: Real>(y: &[T], omega: T, k: usize) -> Result<T> {
    let basis = build_basis(omega, k, y.len())?;
    let n = 2 * k;
    let b = basis.correlate(y);
    let gram = basis.gram();
    let tol = gram_tolerance(&gram, n);
    match Cholesky::full(&gram, n, tol) {
        Some(chol) => Ok(energy(&chol.forward(&b))),
        None => {
            let rows = pinv_sqrt_rows(&gram, n, T::lit(PINV_REL_TOL));
            Ok(rows.iter().map(|w| dot(w, &b)).map(|v| v * v).fold(T::zero(), |a, v| a + v))
        }
    }
}

/// Fit ratio `R²(ω, K) = yᵀZâ / yᵀy`, clamped to `[0, 1 − 1e-12]`.
pub fn fit_ratio<T: Real>(y: &[T], omega: T, k: usize) -> Result<T> {
    let total = energy(y);
    if !(total > T::zero()) {
        return Err(Error::DegenerateFrame);
    }
    let r2 = projected_energy(y, omega, k)? / total;
    Ok(clamp_fit_ratio(r2))
}

#[inline]
pub(crate) fn clamp_fit_ratio<T: Real>(r2: T) -> T {
    r2.max(T::zero()).min(T::fit_ratio_ceiling())
}
