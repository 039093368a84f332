//! Matched filtering in fast time and radar data cube assembly.
//!
//! The matched filter is the same-size cross-correlation
//! C[k] = sum_n s[n] h*[n - k], k in [0, len(s)), computed in the
//! transform domain with enough zero padding to make the correlation
//! linear. Lag k indexes absolute delay, so an echo arriving tau seconds
//! after transmit peaks at k = tau / sample_interval and the cube's range
//! axis calibrates directly as r = c k dt / 2.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scene::ChannelData;
use crate::waveform::{LfmSpec, SampledWaveform};
use crate::SPEED_OF_LIGHT_M_S as C;

/// Matched-filter output for one channel.
#[derive(Debug, Clone)]
pub struct MatchedFilterOutput {
    /// C[k] over lags k = 0 .. signal length - 1.
    pub values: Vec<Complex64>,
    pub lag_interval_s: f64,
}

/// Matched-filter outputs for a set of scene channels, loopback excluded.
#[derive(Debug, Clone)]
pub struct CompressedChannels {
    pub outputs: Vec<MatchedFilterOutput>,
    pub channel_ids: Vec<u32>,
}

/// Complex samples over [range bin x pulse x channel]. Stored channel-major
/// (channel outermost, then pulse, then range bin), matching the cube file
/// layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarDataCube {
    pub n_range: usize,
    pub n_pulse: usize,
    pub n_channel: usize,
    /// Range extent of one fast-time bin: c * dt / 2.
    pub range_bin_m: f64,
    pub pri_s: f64,
    pub channel_ids: Vec<u32>,
    pub data: Vec<Complex64>,
}

impl RadarDataCube {
    #[inline]
    pub fn index(&self, range: usize, pulse: usize, channel: usize) -> usize {
        (channel * self.n_pulse + pulse) * self.n_range + range
    }

    #[inline]
    pub fn at(&self, range: usize, pulse: usize, channel: usize) -> Complex64 {
        self.data[self.index(range, pulse, channel)]
    }

    /// Slow-time vector (one sample per pulse) at a range bin and channel.
    pub fn slow_time(&self, range: usize, channel: usize) -> Vec<Complex64> {
        (0..self.n_pulse)
            .map(|p| self.at(range, p, channel))
            .collect()
    }

    /// Fast-time sample interval implied by the range calibration.
    pub fn sample_interval_s(&self) -> f64 {
        2.0 * self.range_bin_m / C
    }

    /// Center range of a bin, meters.
    pub fn bin_range_m(&self, range: usize) -> f64 {
        range as f64 * self.range_bin_m
    }

    /// Pack raw (uncompressed) channels as a single-pulse cube so captures
    /// can be dumped and replayed through the standalone pipeline stages.
    pub fn from_raw_channels(channels: &ChannelData) -> Result<RadarDataCube> {
        channels.validate()?;
        let n = channels.len();
        let dt = channels.sample_interval_s();
        let mut data = Vec::with_capacity(n * channels.n_channels());
        for ch in &channels.channels {
            data.extend_from_slice(&ch.samples);
        }
        Ok(RadarDataCube {
            n_range: n,
            n_pulse: 1,
            n_channel: channels.n_channels(),
            range_bin_m: C * dt / 2.0,
            pri_s: n as f64 * dt,
            channel_ids: channels.channel_ids.clone(),
            data,
        })
    }

    /// Inverse of `from_raw_channels`. `loopback_last` marks the final
    /// channel as the loopback reference (the dump convention used by the
    /// simulate stage).
    pub fn to_raw_channels(&self, loopback_last: bool) -> Result<ChannelData> {
        if self.n_pulse != 1 {
            return Err(Error::Mismatch(format!(
                "raw channel cube must have one pulse, found {}",
                self.n_pulse
            )));
        }
        let dt = self.sample_interval_s();
        let channels: Vec<SampledWaveform> = (0..self.n_channel)
            .map(|c| {
                let start = self.index(0, 0, c);
                SampledWaveform {
                    samples: self.data[start..start + self.n_range].to_vec(),
                    sample_interval_s: dt,
                    start_time_s: 0.0,
                }
            })
            .collect();
        let loopback_id = if loopback_last {
            self.channel_ids.last().copied()
        } else {
            None
        };
        let data = ChannelData {
            channels,
            channel_ids: self.channel_ids.clone(),
            loopback_id,
        };
        data.validate()?;
        Ok(data)
    }
}

/// Same-size matched filter C[k] = sum_n s[n] h*[n - k] for k in
/// [0, len(signal)).
pub fn matched_filter(
    signal: &SampledWaveform,
    reference: &SampledWaveform,
) -> Result<MatchedFilterOutput> {
    if signal.is_empty() || reference.is_empty() {
        return Err(Error::Empty("matched filter needs non-empty inputs".into()));
    }
    let dt = signal.sample_interval_s;
    if (reference.sample_interval_s - dt).abs() > 1e-15 * dt {
        return Err(Error::Mismatch(format!(
            "sample intervals differ: {} vs {}",
            dt, reference.sample_interval_s
        )));
    }
    if reference.len() > signal.len() {
        return Err(Error::Mismatch(format!(
            "reference ({}) longer than signal ({})",
            reference.len(),
            signal.len()
        )));
    }
    let n = signal.len();
    let nfft = (n + reference.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nfft);
    let ifft = planner.plan_fft_inverse(nfft);

    let mut sig = vec![Complex64::new(0.0, 0.0); nfft];
    sig[..n].copy_from_slice(&signal.samples);
    let mut refr = vec![Complex64::new(0.0, 0.0); nfft];
    refr[..reference.len()].copy_from_slice(&reference.samples);
    fft.process(&mut sig);
    fft.process(&mut refr);
    for (s, r) in sig.iter_mut().zip(&refr) {
        *s *= r.conj();
    }
    ifft.process(&mut sig);
    let scale = 1.0 / nfft as f64;
    let values = sig[..n].iter().map(|v| v * scale).collect();
    Ok(MatchedFilterOutput {
        values,
        lag_interval_s: dt,
    })
}

/// Pull the matched-filter reference out of the loopback capture (first
/// pulse only, unit energy) when one is present, otherwise fall back to the
/// supplied ideal pulse, also unit-normalized.
pub fn select_reference(
    channels: &ChannelData,
    spec: &LfmSpec,
    ideal_pulse: &SampledWaveform,
) -> Result<SampledWaveform> {
    if let Some(idx) = channels.loopback_index() {
        let lb = &channels.channels[idx];
        let n = spec.samples_per_pulse().min(lb.len());
        let pulse = SampledWaveform {
            samples: lb.samples[..n].to_vec(),
            sample_interval_s: lb.sample_interval_s,
            start_time_s: 0.0,
        };
        pulse.unit_energy()
    } else {
        ideal_pulse.unit_energy()
    }
}

/// Matched-filter every scene channel against `reference`; the loopback
/// channel is excluded from the imaging set.
pub fn compress_channels(
    channels: &ChannelData,
    reference: &SampledWaveform,
) -> Result<CompressedChannels> {
    channels.validate()?;
    let scene = channels.scene_channels();
    if scene.is_empty() {
        return Err(Error::Empty("no scene channels to compress".into()));
    }
    let mut outputs = Vec::with_capacity(scene.len());
    let mut channel_ids = Vec::with_capacity(scene.len());
    for (id, ch) in scene {
        outputs.push(matched_filter(ch, reference)?);
        channel_ids.push(id);
    }
    Ok(CompressedChannels {
        outputs,
        channel_ids,
    })
}

/// Reshape each channel's lag axis into [samples-per-PRI x pulse count].
///
/// Output lengths beyond `pulse_count * samples_per_pri` are rejected
/// unless `truncate_excess` is set; shorter outputs are always rejected.
pub fn build_data_cube(
    compressed: &CompressedChannels,
    spec: &LfmSpec,
    truncate_excess: bool,
) -> Result<RadarDataCube> {
    if compressed.outputs.is_empty() {
        return Err(Error::Empty("no compressed channels".into()));
    }
    spec.validate()?;
    let spp = spec.samples_per_pri();
    let required = spp * spec.pulse_count;
    let len = compressed.outputs[0].values.len();
    for out in &compressed.outputs {
        if out.values.len() != len {
            return Err(Error::Mismatch("compressed channel lengths differ".into()));
        }
    }
    if len < required {
        return Err(Error::Mismatch(format!(
            "channel length {len} shorter than {} pulses x {spp} samples",
            spec.pulse_count
        )));
    }
    if len > required && !truncate_excess {
        return Err(Error::Mismatch(format!(
            "channel length {len} does not divide into {} pulses x {spp} samples; \
             pass truncate_excess to drop the tail",
            spec.pulse_count
        )));
    }
    let dt = compressed.outputs[0].lag_interval_s;
    let n_channel = compressed.outputs.len();
    let mut data = Vec::with_capacity(required * n_channel);
    for out in &compressed.outputs {
        for p in 0..spec.pulse_count {
            data.extend_from_slice(&out.values[p * spp..(p + 1) * spp]);
        }
    }
    Ok(RadarDataCube {
        n_range: spp,
        n_pulse: spec.pulse_count,
        n_channel,
        range_bin_m: C * dt / 2.0,
        pri_s: spec.pri_s,
        channel_ids: compressed.channel_ids.clone(),
        data,
    })
}
