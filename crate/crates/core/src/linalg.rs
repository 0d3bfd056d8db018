//! Dense helpers for the small symmetric systems built per pitch candidate.
//!
//! Matrices are row-major `n × n` slices. The largest system is
//! `2·k_max` square, so nothing here needs blocking.

use crate::scalar::{KahanSum, Real};

/// Lower-triangular Cholesky factor, possibly covering only a leading block.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky<T> {
    l: Vec<T>,
    n: usize,
    rank: usize,
}

impl<T: Real> Cholesky<T> {
    /// Factors the leading block of `a` until a pivot falls to `tol` or below.
    ///
    /// `rank()` reports how many leading pivots succeeded; the factor of any
    /// leading `r × r` block with `r <= rank()` is exact.
    pub(crate) fn partial(a: &[T], n: usize, tol: T) -> Self {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![T::zero(); n * n];
        let mut rank = n;
        'outer: for j in 0..n {
            let mut d = KahanSum::new();
            d.add(a[j * n + j]);
            for p in 0..j {
                d.add(-l[j * n + p] * l[j * n + p]);
            }
            let d = d.value();
            if !(d > tol) {
                rank = j;
                break 'outer;
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = KahanSum::new();
                s.add(a[i * n + j]);
                for p in 0..j {
                    s.add(-l[i * n + p] * l[j * n + p]);
                }
                l[i * n + j] = s.value() / ljj;
            }
        }
        Self { l, n, rank }
    }

    pub(crate) fn full(a: &[T], n: usize, tol: T) -> Option<Self> {
        let c = Self::partial(a, n, tol);
        (c.rank == n).then_some(c)
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Entry `(i, j)` of the factor, `j <= i < rank`.
    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize) -> T {
        self.l[i * self.n + j]
    }

    /// Solves `L w = b` over the leading `b.len()` rows.
    pub(crate) fn forward(&self, b: &[T]) -> Vec<T> {
        let m = b.len();
        assert!(m <= self.rank);
        let mut w = vec![T::zero(); m];
        for i in 0..m {
            let mut s = b[i];
            for p in 0..i {
                s -= self.at(i, p) * w[p];
            }
            w[i] = s / self.at(i, i);
        }
        w
    }

    /// Solves `A x = b` with the full factor.
    pub(crate) fn solve(&self, b: &[T]) -> Vec<T> {
        let n = b.len();
        assert_eq!(n, self.n);
        assert_eq!(self.rank, self.n);
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in (i + 1)..n {
                s -= self.at(p, i) * x[p];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the eigenvectors as rows of an `n × n` matrix.
pub(crate) fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = m.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
    let tiny = T::epsilon() * T::epsilon() * scale.max(T::min_positive_value());
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vpk = v[p * n + k];
                    let vqk = v[q * n + k];
                    v[p * n + k] = c * vpk - s * vqk;
                    v[q * n + k] = s * vpk + c * vqk;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    (values, v)
}

/// Rows `v_j / sqrt(λ_j)` for all eigenpairs with `λ_j > rel_tol · trace`.
///
/// For `b = Zᵀy`, the squared norm of `W b` is `yᵀ Z (ZᵀZ)⁺ Zᵀ y`.
pub(crate) fn pinv_sqrt_rows<T: Real>(a: &[T], n: usize, rel_tol: T) -> Vec<Vec<T>> {
    let trace = (0..n).fold(T::zero(), |acc, i| acc + a[i * n + i]);
    let (values, vectors) = symmetric_eigen(a, n);
    values
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam > rel_tol * trace)
        .map(|(j, &lam)| {
            let s = lam.sqrt();
            vectors[j * n..(j + 1) * n].iter().map(|&x| x / s).collect()
        })
        .collect()
}
