//! WAV reading and writing.
//!
//! Reads 16-bit PCM and 32-bit float, writes 32-bit float so that fixed-seed
//! runs reproduce bit-identical files.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::path::Path;

/// Reads a WAV file into per-channel sample buffers plus its sample rate.
pub fn read_wav<T: Scalar>(path: &Path) -> Result<(Vec<Vec<T>>, u32)> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Audio("wav has zero channels".into()));
    }
    let interleaved: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| T::of(v as f64 / 32768.0)))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| T::of(v as f64)))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Audio(format!(
                "unsupported wav format {fmt:?} {bits}-bit; expected 16-bit PCM or 32-bit float"
            )))
        }
    };
    let frames = interleaved.len() / channels;
    let mut out = vec![Vec::with_capacity(frames); channels];
    for (i, s) in interleaved.into_iter().enumerate() {
        out[i % channels].push(s);
    }
    Ok((out, spec.sample_rate))
}

/// Writes per-channel buffers as a 32-bit float WAV.
pub fn write_wav<T: Scalar>(path: &Path, channels: &[Vec<T>], sample_rate: u32) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::Audio("refusing to write a wav with no channels".into()));
    }
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::Dimension("channels differ in length".into()));
    }
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for i in 0..len {
        for ch in channels {
            writer.write_sample(ch[i].to_f64() as f32)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_wav_round_trips_bit_exactly() {
        let dir = std::env::temp_dir().join("trisep_audio_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.wav");
        let left: Vec<f32> = (0..100).map(|i| (i as f32 * 0.01).sin()).collect();
        let right: Vec<f32> = (0..100).map(|i| (i as f32 * 0.02).cos()).collect();
        write_wav(&path, &[left.clone(), right.clone()], 16000).unwrap();
        let (read, rate) = read_wav::<f32>(&path).unwrap();
        assert_eq!(rate, 16000);
        assert_eq!(read[0], left);
        assert_eq!(read[1], right);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn pcm16_is_scaled_to_unit_range() {
        let dir = std::env::temp_dir().join("trisep_audio_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pcm.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(i16::MIN).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(16384i16).unwrap();
        w.finalize().unwrap();
        let (read, _) = read_wav::<f64>(&path).unwrap();
        assert_eq!(read[0], vec![-1.0, 0.0, 0.5]);
        std::fs::remove_file(&path).ok();
    }
}
