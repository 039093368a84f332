//! Transmit waveform generation: LFM pulses, pulse trains, and seeded
//! complex Gaussian noise.
//!
//! All waveforms are complex baseband sequences. The LFM chirp is
//! spectrum-centered: its instantaneous frequency sweeps from -B/2 to +B/2
//! so the matched-filter peak is phase-neutral and the carrier is applied
//! conceptually at upconversion.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};

/// Parameters of the LFM pulse train.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfmSpec {
    /// Carrier frequency in Hz (applied at upconversion, not at baseband).
    pub carrier_frequency_hz: f64,
    /// Swept bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Single pulse duration in seconds.
    pub pulse_width_s: f64,
    /// Sample interval in seconds (complex baseband).
    pub sample_interval_s: f64,
    /// Pulse repetition interval in seconds.
    pub pri_s: f64,
    /// Number of pulses in the train.
    pub pulse_count: usize,
    /// Total waveform duration in seconds.
    pub total_duration_s: f64,
}

impl Default for LfmSpec {
    /// 38 GHz carrier, 100 MHz sweep, 10 us pulses at 50 us PRI, ten pulses
    /// over 500 us, sampled at 100 MSa/s.
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 38e9,
            bandwidth_hz: 100e6,
            pulse_width_s: 10e-6,
            sample_interval_s: 10e-9,
            pri_s: 50e-6,
            pulse_count: 10,
            total_duration_s: 500e-6,
        }
    }
}

impl LfmSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.bandwidth_hz, "bandwidth_hz")?;
        ensure_positive(self.pulse_width_s, "pulse_width_s")?;
        ensure_positive(self.sample_interval_s, "sample_interval_s")?;
        if self.pulse_width_s > self.pri_s {
            return Err(Error::invalid(
                "pulse_width_s",
                format!(
                    "pulse width {} s exceeds PRI {} s",
                    self.pulse_width_s, self.pri_s
                ),
            ));
        }
        // One-sample slack on the total-duration bound.
        let limit = self.total_duration_s + self.sample_interval_s;
        if self.pulse_count as f64 * self.pri_s > limit {
            return Err(Error::invalid(
                "total_duration_s",
                format!(
                    "{} pulses at PRI {} s do not fit in {} s",
                    self.pulse_count, self.pri_s, self.total_duration_s
                ),
            ));
        }
        // Complex baseband Nyquist.
        if self.sample_interval_s > 1.0 / self.bandwidth_hz {
            return Err(Error::invalid(
                "sample_interval_s",
                format!(
                    "{} s violates Nyquist for bandwidth {} Hz",
                    self.sample_interval_s, self.bandwidth_hz
                ),
            ));
        }
        Ok(())
    }

    /// Samples in one pulse.
    pub fn samples_per_pulse(&self) -> usize {
        (self.pulse_width_s / self.sample_interval_s).round() as usize
    }

    /// Samples in one pulse repetition interval.
    pub fn samples_per_pri(&self) -> usize {
        (self.pri_s / self.sample_interval_s).round() as usize
    }

    /// Samples in the full train.
    pub fn total_samples(&self) -> usize {
        (self.total_duration_s / self.sample_interval_s).round() as usize
    }

    /// Time-bandwidth product of a single pulse.
    pub fn time_bandwidth_product(&self) -> f64 {
        self.pulse_width_s * self.bandwidth_hz
    }
}

/// Parameters of a white complex Gaussian noise stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Variance of the complex samples (linear power).
    pub power: f64,
    pub sample_interval_s: f64,
    pub duration_s: f64,
    /// Fully determines the sequence.
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.power, "power")?;
        ensure_positive(self.sample_interval_s, "sample_interval_s")?;
        ensure_positive(self.duration_s, "duration_s")?;
        Ok(())
    }
}

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<Complex64>,
    pub sample_interval_s: f64,
    pub start_time_s: f64,
}

impl SampledWaveform {
    pub fn new(samples: Vec<Complex64>, sample_interval_s: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("waveform has no samples".into()));
        }
        ensure_positive(sample_interval_s, "sample_interval_s")?;
        if samples
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(Error::invalid("samples", "contain NaN or infinite values"));
        }
        Ok(Self {
            samples,
            sample_interval_s,
            start_time_s: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval_s
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Returns a copy scaled to unit energy.
    pub fn unit_energy(&self) -> Result<SampledWaveform> {
        let e = self.energy();
        if e <= 0.0 {
            return Err(Error::Empty("cannot normalize an all-zero waveform".into()));
        }
        let scale = 1.0 / e.sqrt();
        Ok(SampledWaveform {
            samples: self.samples.iter().map(|s| s * scale).collect(),
            sample_interval_s: self.sample_interval_s,
            start_time_s: self.start_time_s,
        })
    }
}

/// Generate one baseband LFM pulse of unit amplitude.
///
/// Phase is phi(t) = 2 pi (-(B/2) t + (B/2T) t^2) for t in [0, T), so the
/// instantaneous frequency sweeps -B/2 -> +B/2 and crosses zero at t = T/2.
pub fn generate_lfm(spec: &LfmSpec) -> Result<SampledWaveform> {
    spec.validate()?;
    let n = spec.samples_per_pulse();
    if n == 0 {
        return Err(Error::invalid(
            "pulse_width_s",
            "shorter than one sample interval",
        ));
    }
    let b = spec.bandwidth_hz;
    let t_total = spec.pulse_width_s;
    let dt = spec.sample_interval_s;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let phase = 2.0 * PI * (-(b / 2.0) * t + (b / (2.0 * t_total)) * t * t);
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(SampledWaveform {
        samples,
        sample_interval_s: dt,
        start_time_s: 0.0,
    })
}

/// Repeat `pulse` every PRI, zero-filled between pulse end and the next PRI,
/// for `pulse_count` periods; total length is `round(total_duration / dt)`.
pub fn build_pulse_train(pulse: &SampledWaveform, spec: &LfmSpec) -> Result<SampledWaveform> {
    spec.validate()?;
    let spp = spec.samples_per_pri();
    if pulse.len() > spp {
        return Err(Error::invalid(
            "pulse_width_s",
            format!(
                "pulse ({} samples) longer than PRI ({} samples)",
                pulse.len(),
                spp
            ),
        ));
    }
    let total = spec.total_samples();
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    for p in 0..spec.pulse_count {
        let start = p * spp;
        for (i, &s) in pulse.samples.iter().enumerate() {
            if start + i >= total {
                break;
            }
            samples[start + i] = s;
        }
    }
    Ok(SampledWaveform {
        samples,
        sample_interval_s: spec.sample_interval_s,
        start_time_s: 0.0,
    })
}

/// Generate i.i.d. circularly-symmetric complex Gaussian samples with
/// variance `spec.power`. Identical seed, identical sequence.
pub fn generate_noise(spec: &NoiseSpec) -> Result<SampledWaveform> {
    spec.validate()?;
    let n = (spec.duration_s / spec.sample_interval_s).round() as usize;
    if n == 0 {
        return Err(Error::invalid(
            "duration_s",
            "shorter than one sample interval",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = (spec.power / 2.0).sqrt();
    let samples = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    Ok(SampledWaveform {
        samples,
        sample_interval_s: spec.sample_interval_s,
        start_time_s: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_38ghz() -> LfmSpec {
        LfmSpec::default()
    }

    #[test]
    fn lfm_pulse_has_expected_length() {
        // 10 us pulse sampled every 10 ns -> 1000 samples.
        let pulse = generate_lfm(&spec_38ghz()).unwrap();
        assert_eq!(pulse.len(), 1000);
    }

    #[test]
    fn lfm_time_bandwidth_product() {
        assert!((spec_38ghz().time_bandwidth_product() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn lfm_unit_magnitude_everywhere() {
        let pulse = generate_lfm(&spec_38ghz()).unwrap();
        for s in &pulse.samples {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lfm_instantaneous_frequency_zero_at_midpulse() {
        // The phase is quadratic in t, so a central difference of the
        // unwrapped phase recovers the instantaneous frequency exactly.
        let spec = spec_38ghz();
        let pulse = generate_lfm(&spec).unwrap();
        let mid = pulse.len() / 2;
        let dphi = (pulse.samples[mid + 1] * pulse.samples[mid - 1].conj()).arg();
        let freq = dphi / (2.0 * 2.0 * PI * spec.sample_interval_s);
        assert!(
            freq.abs() < 1e-6 * spec.bandwidth_hz,
            "instantaneous frequency at T/2 was {freq} Hz"
        );
    }

    #[test]
    fn lfm_sweeps_minus_half_b_to_plus_half_b() {
        let spec = spec_38ghz();
        let pulse = generate_lfm(&spec).unwrap();
        let dt = spec.sample_interval_s;
        let f_start = (pulse.samples[1] * pulse.samples[0].conj()).arg() / (2.0 * PI * dt);
        let n = pulse.len();
        let f_end = (pulse.samples[n - 1] * pulse.samples[n - 2].conj()).arg() / (2.0 * PI * dt);
        assert!((f_start + spec.bandwidth_hz / 2.0).abs() < 0.01 * spec.bandwidth_hz);
        assert!((f_end - spec.bandwidth_hz / 2.0).abs() < 0.01 * spec.bandwidth_hz);
    }

    #[test]
    fn lfm_autocorrelation_peaks_at_zero_lag_with_sample_count() {
        let pulse = generate_lfm(&spec_38ghz()).unwrap();
        let n = pulse.len();
        // Direct autocorrelation at a few lags.
        let acf = |lag: usize| -> f64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lag..n {
                acc += pulse.samples[i] * pulse.samples[i - lag].conj();
            }
            acc.norm()
        };
        let peak = acf(0);
        assert!((peak - n as f64).abs() < 1e-9 * n as f64);
        for lag in [1usize, 3, 10, 100, 500] {
            assert!(acf(lag) < peak, "lag {lag} not below zero-lag peak");
        }
    }

    #[test]
    fn lfm_rejects_non_nyquist_sampling() {
        let spec = LfmSpec {
            sample_interval_s: 20e-9,
            ..spec_38ghz()
        };
        assert!(matches!(
            generate_lfm(&spec),
            Err(Error::InvalidParameter {
                name: "sample_interval_s",
                ..
            })
        ));
    }

    #[test]
    fn lfm_rejects_nonpositive_width_and_bandwidth() {
        assert!(generate_lfm(&LfmSpec {
            pulse_width_s: 0.0,
            ..spec_38ghz()
        })
        .is_err());
        assert!(generate_lfm(&LfmSpec {
            bandwidth_hz: -1.0,
            ..spec_38ghz()
        })
        .is_err());
    }

    #[test]
    fn pulse_train_timing_matches_pri_grid() {
        // 10 pulses, PRI 50 us, 10 ns sampling -> 50 000 samples with pulse
        // starts at 0, 5000, ..., 45 000.
        let spec = spec_38ghz();
        let pulse = generate_lfm(&spec).unwrap();
        let train = build_pulse_train(&pulse, &spec).unwrap();
        assert_eq!(train.len(), 50_000);
        let spp = spec.samples_per_pri();
        let npulse = pulse.len();
        for p in 0..spec.pulse_count {
            let start = p * spp;
            assert_eq!(&train.samples[start..start + npulse], &pulse.samples[..]);
            for i in start + npulse..start + spp {
                assert_eq!(train.samples[i], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn single_pulse_train_is_pulse_then_zeros() {
        let spec = LfmSpec {
            pulse_count: 1,
            total_duration_s: 50e-6,
            ..spec_38ghz()
        };
        let pulse = generate_lfm(&spec).unwrap();
        let train = build_pulse_train(&pulse, &spec).unwrap();
        assert_eq!(train.len(), 5000);
        assert_eq!(&train.samples[..1000], &pulse.samples[..]);
        assert!(train.samples[1000..].iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn train_energy_is_pulse_count_times_pulse_energy() {
        let spec = spec_38ghz();
        let pulse = generate_lfm(&spec).unwrap();
        let train = build_pulse_train(&pulse, &spec).unwrap();
        let expect = spec.pulse_count as f64 * pulse.energy();
        assert!((train.energy() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn train_rejects_pulse_longer_than_pri() {
        let spec = spec_38ghz();
        let long = SampledWaveform::new(
            vec![Complex64::new(1.0, 0.0); spec.samples_per_pri() + 1],
            spec.sample_interval_s,
        )
        .unwrap();
        assert!(build_pulse_train(&long, &spec).is_err());
    }

    #[test]
    fn noise_is_deterministic_for_a_seed() {
        let spec = NoiseSpec {
            power: 1.0,
            sample_interval_s: 10e-9,
            duration_s: 10e-6,
            seed: 0xfeed_beef,
        };
        let a = generate_noise(&spec).unwrap();
        let b = generate_noise(&spec).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn noise_sample_variance_near_configured_power() {
        let spec = NoiseSpec {
            power: 1.0,
            sample_interval_s: 1e-8,
            duration_s: 1e-2, // 1e6 samples
            seed: 17,
        };
        let w = generate_noise(&spec).unwrap();
        assert_eq!(w.len(), 1_000_000);
        let var = w.energy() / w.len() as f64;
        assert!((var - 1.0).abs() < 0.01, "sample variance {var}");
        // Mean magnitude bounded by ~3 sigma / sqrt(N).
        let mean = w.samples.iter().sum::<Complex64>() / w.len() as f64;
        assert!(mean.norm() < 5e-3, "mean magnitude {}", mean.norm());
    }

    #[test]
    fn independent_seeds_decorrelate() {
        let base = NoiseSpec {
            power: 1.0,
            sample_interval_s: 1e-8,
            duration_s: 1e-2,
            seed: 1,
        };
        let a = generate_noise(&base).unwrap();
        let b = generate_noise(&NoiseSpec { seed: 2, ..base }).unwrap();
        let cross: Complex64 = a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| x * y.conj())
            .sum();
        let norm = (a.energy() * b.energy()).sqrt();
        assert!(cross.norm() / norm < 0.01);
    }

    #[test]
    fn noise_rejects_nonpositive_power() {
        let spec = NoiseSpec {
            power: 0.0,
            sample_interval_s: 1e-8,
            duration_s: 1e-6,
            seed: 0,
        };
        assert!(generate_noise(&spec).is_err());
    }
}
