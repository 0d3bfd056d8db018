use crate::error::{Error, Result};
use crate::scalar::{energy, Real};

/// A contiguous, unwindowed block of `M` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    samples: Vec<T>,
    index: usize,
    start_time: T,
    sample_rate: T,
}

impl<T: Real> Frame<T> {
    /// `index` is zero-based; `start_time` is in seconds.
    pub fn new(samples: Vec<T>, index: usize, start_time: T, sample_rate: T) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Config(format!(
                "frame needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("frame {index} contains non-finite samples")));
        }
        if !(sample_rate > T::zero()) {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        Ok(Self { samples, index, start_time, sample_rate })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn start_time(&self) -> T {
        self.start_time
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn energy(&self) -> T {
        energy(&self.samples)
    }

    /// Same frame with new samples (length must match).
    pub fn with_samples(&self, samples: Vec<T>) -> Self {
        assert_eq!(samples.len(), self.samples.len());
        Self { samples, ..self.clone() }
    }

    /// Copy with the sample mean removed.
    pub fn mean_removed(&self) -> Self {
        let n = T::from_count(self.samples.len());
        let mean = self.samples.iter().fold(T::zero(), |a, &x| a + x) / n;
        self.with_samples(self.samples.iter().map(|&x| x - mean).collect())
    }
}

/// Number of samples for a duration in milliseconds at `f_s`.
pub fn samples_for_ms<T: Real>(ms: T, f_s: T) -> usize {
    (ms * f_s / T::lit(1000.0)).round().to_usize().unwrap_or(0)
}

/// Slices `audio` into rectangular frames of `frame_ms` every `hop_ms`.
///
/// A trailing partial frame is dropped.
pub fn frame_signal<T: Real>(audio: &[T], f_s: T, frame_ms: T, hop_ms: T) -> Result<Vec<Frame<T>>> {
    if !(frame_ms > T::zero()) || !(hop_ms > T::zero()) {
        return Err(Error::Config("frame and hop durations must be positive".into()));
    }
    if !(f_s > T::zero()) {
        return Err(Error::Config("sample rate must be positive".into()));
    }
    let m = samples_for_ms(frame_ms, f_s);
    let hop = samples_for_ms(hop_ms, f_s);
    if m < 2 || hop == 0 {
        return Err(Error::Config(format!(
            "frame of {m} samples / hop of {hop} samples is too short"
        )));
    }
    if audio.len() < m {
        return Err(Error::EmptyInput(format!(
            "audio has {} samples, one frame needs {m}",
            audio.len()
        )));
    }
    let count = (audio.len() - m) / hop + 1;
    (0..count)
        .map(|i| {
            let start = i * hop;
            Frame::new(
                audio[start..start + m].to_vec(),
                i,
                T::from_count(start) / f_s,
                f_s,
            )
        })
        .collect()
}
