//! Mono WAV input and output.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample encoding used by [`write_audio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn format_error(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {what}", path.display()))
}

/// Reads a mono 16-bit PCM or 32-bit float WAV file, returning samples in
/// `[−1, 1]` and the sample rate.
pub fn read_audio<T: Real>(path: impl AsRef<Path>) -> Result<(Vec<T>, T)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(std::io::BufReader::new(file))
        .map_err(|e| format_error(path, format!("not a readable WAV file ({e})")))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(format_error(path, format!("{} channels, only mono is supported", spec.channels)));
    }
    let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| T::lit(f64::from(v) / 32768.0)))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| T::lit(f64::from(v))))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Int, bits) => return Err(format_error(path, format!("unsupported codec: {bits}-bit integer PCM"))),
        (SampleFormat::Float, bits) => return Err(format_error(path, format!("unsupported codec: {bits}-bit float"))),
    }
    .map_err(|e| format_error(path, e))?;
    if samples.is_empty() {
        return Err(format_error(path, "no audio samples"));
    }
    Ok((samples, T::lit(f64::from(spec.sample_rate))))
}

/// Writes mono samples; 16-bit output is clipped to the representable range.
pub fn write_audio<T: Real>(path: impl AsRef<Path>, samples: &[T], sample_rate: u32, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let spec = match encoding {
        WavEncoding::Pcm16 => WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int },
        WavEncoding::Float32 => WavSpec { channels: 1, sample_rate, bits_per_sample: 32, sample_format: SampleFormat::Float },
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => format_error(path, other),
    };
    let mut writer = WavWriter::create(path, spec).map_err(wrap)?;
    for &x in samples {
        let x = x.as_f64();
        match encoding {
            WavEncoding::Pcm16 => writer.write_sample((x * 32768.0).round().clamp(-32768.0, 32767.0) as i16),
            WavEncoding::Float32 => writer.write_sample(x as f32),
        }
        .map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm_scaling_convention() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("half.wav");
        let spec = WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        w.write_sample(16384i16).unwrap();
        w.write_sample(-32768i16).unwrap();
        w.finalize().unwrap();
        let (x, fs) = read_audio::<f64>(&p).unwrap();
        assert_eq!(x, vec![0.5, -1.0]);
        assert_eq!(fs, 8000.0);
    }

    #[test]
    fn empty_file_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.wav");
        std::fs::write(&p, b"").unwrap();
        assert!(matches!(read_audio::<f64>(&p), Err(Error::Format(_))));
    }

    #[test]
    fn header_without_samples_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nodata.wav");
        write_audio::<f64>(&p, &[], 16000, WavEncoding::Pcm16).unwrap();
        assert!(matches!(read_audio::<f64>(&p), Err(Error::Format(_))));
    }

    #[test]
    fn stereo_and_24_bit_rejected_with_codec_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let spec = WavSpec { channels: 2, sample_rate: 8000, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_audio::<f64>(&p), Err(Error::Format(m)) if m.contains("2 channels")));

        let spec = WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 24, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&p, spec).unwrap();
        w.write_sample(5i32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_audio::<f64>(&p), Err(Error::Format(m)) if m.contains("24-bit integer PCM")));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(read_audio::<f64>("/nonexistent/x.wav"), Err(Error::Io { .. })));
    }
}
