use crate::error::{Error, Result};
use crate::scalar::Real;

/// Margin keeping the highest harmonic strictly below Nyquist.
const NYQUIST_MARGIN: f64 = 1e-9;

/// Candidate pitches on the DFT-bin lattice `ω = 2πf/F`, with per-bin
/// maximum harmonic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchGrid<T> {
    dft_size: usize,
    bin_lo: usize,
    bin_hi: usize,
    omegas: Vec<T>,
    valid_orders: Vec<usize>,
    f_min: T,
    f_max: T,
    k_max: usize,
    sample_rate: T,
}

impl<T: Real> PitchGrid<T> {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn dft_size(&self) -> usize {
        self.dft_size
    }

    /// Inclusive DFT bin range `[f_lo, f_hi]`.
    pub fn bin_range(&self) -> (usize, usize) {
        (self.bin_lo, self.bin_hi)
    }

    /// DFT bin of grid point `i`.
    pub fn bin(&self, i: usize) -> usize {
        self.bin_lo + i
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    pub fn omega(&self, i: usize) -> T {
        self.omegas[i]
    }

    pub fn frequency_hz(&self, i: usize) -> T {
        self.omegas[i] * self.sample_rate / T::TAU()
    }

    pub fn f_min(&self) -> T {
        self.f_min
    }

    pub fn f_max(&self) -> T {
        self.f_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn valid_order(&self, i: usize) -> usize {
        self.valid_orders[i]
    }

    pub fn valid_orders(&self) -> &[usize] {
        &self.valid_orders
    }

    /// Whether state `(i, k)` (order `k` is 1-based) keeps `kω < π`.
    pub fn is_valid(&self, i: usize, k: usize) -> bool {
        k >= 1 && k <= self.valid_orders[i]
    }

    pub fn valid_state_count(&self) -> usize {
        self.valid_orders.iter().sum()
    }

    /// Grid index whose frequency is nearest `hz`.
    pub fn nearest_index(&self, hz: T) -> usize {
        let target = hz * T::TAU() / self.sample_rate;
        let mut best = 0;
        for (i, &w) in self.omegas.iter().enumerate() {
            if (w - target).abs() < (self.omegas[best] - target).abs() {
                best = i;
            }
        }
        best
    }
}

/// Discretizes `[f_min, f_max]` onto the bins of an `F`-point DFT.
pub fn make_pitch_grid<T: Real>(
    f_min: T,
    f_max: T,
    f_s: T,
    dft_size: usize,
    k_max: usize,
) -> Result<PitchGrid<T>> {
    if !(f_min > T::zero() && f_min < f_max && f_max < f_s / T::lit(2.0)) {
        return Err(Error::Config(format!(
            "pitch range must satisfy 0 < f_min < f_max < f_s/2 (got {f_min}, {f_max}, f_s {f_s})"
        )));
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    if dft_size < 4 {
        return Err(Error::Config(format!("DFT size {dft_size} too small")));
    }
    let size = T::from_count(dft_size);
    let lo = (size * f_min / f_s).ceil().to_usize().unwrap_or(0);
    let hi = (size * f_max / f_s).floor().to_usize().unwrap_or(0);
    if lo == 0 || hi < lo {
        return Err(Error::Config(format!(
            "pitch range [{f_min}, {f_max}] Hz contains no bins of a {dft_size}-point DFT"
        )));
    }
    let limit = T::PI() - T::lit(NYQUIST_MARGIN);
    let mut omegas = Vec::with_capacity(hi - lo + 1);
    let mut valid_orders = Vec::with_capacity(hi - lo + 1);
    for bin in lo..=hi {
        let omega = T::TAU() * T::from_count(bin) / size;
        let order = (limit / omega).floor().to_usize().unwrap_or(0).min(k_max);
        if order == 0 {
            return Err(Error::Config(format!("bin {bin} has its first harmonic above Nyquist")));
        }
        omegas.push(omega);
        valid_orders.push(order);
    }
    Ok(PitchGrid {
        dft_size,
        bin_lo: lo,
        bin_hi: hi,
        omegas,
        valid_orders,
        f_min,
        f_max,
        k_max,
        sample_rate: f_s,
    })
}
