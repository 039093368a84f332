//! Shared measurement oracles for integration tests. Everything here is
//! independent of the library's transform-domain implementations: direct
//! sums, dense evaluations, and interpolated crossings only.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::path::PathBuf;

/// Direct-sum matched filter C[k] = sum_n s[n] h*[n-k], the oracle twin of
/// the library's transform-domain path.
pub fn matched_filter_direct(signal: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let n = signal.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, r) in reference.iter().enumerate() {
                if k + m < n {
                    acc += signal[k + m] * r.conj();
                }
            }
            acc
        })
        .collect()
}

/// Band-limited interpolation of a sequence by spectral zero padding;
/// returns magnitudes at `factor` times the input rate.
pub fn interpolate_magnitude(x: &[Complex64], factor: usize) -> Vec<f64> {
    let n = x.len().next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..x.len()].copy_from_slice(x);
    planner.plan_fft_forward(n).process(&mut buf);
    let m = n * factor;
    let mut up = vec![Complex64::new(0.0, 0.0); m];
    up[..n / 2].copy_from_slice(&buf[..n / 2]);
    up[m - n / 2..].copy_from_slice(&buf[n / 2..]);
    planner.plan_fft_inverse(m).process(&mut up);
    up.iter().map(|v| v.norm()).collect()
}

/// Peak sidelobe level in dB relative to the mainlobe: walk out of the
/// mainlobe to the first local minimum on each side, then take the largest
/// remaining magnitude.
pub fn peak_sidelobe_db(mags: &[f64]) -> f64 {
    let (ipk, &pk) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let mut right = ipk;
    while right + 1 < mags.len() && mags[right + 1] < mags[right] {
        right += 1;
    }
    let mut left = ipk;
    while left > 0 && mags[left - 1] < mags[left] {
        left -= 1;
    }
    let side = mags[..left]
        .iter()
        .chain(&mags[right..])
        .fold(0.0f64, |a, &b| a.max(b));
    20.0 * (side / pk).log10()
}

/// Full width of the magnitude curve at `level` times its peak, found by
/// linear interpolation of the crossings, in samples of the curve.
pub fn width_at_level(mags: &[f64], level: f64) -> f64 {
    let (ipk, &pk) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let thr = pk * level;
    let mut hi = ipk;
    while mags[hi] > thr {
        hi += 1;
    }
    let right = (hi - 1) as f64 + (mags[hi - 1] - thr) / (mags[hi - 1] - mags[hi]);
    let mut lo = ipk;
    while mags[lo] > thr {
        lo -= 1;
    }
    let left = lo as f64 + (thr - mags[lo]) / (mags[lo + 1] - mags[lo]);
    right - left
}

/// Path to a bundled scenario config.
pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Run a named check, print one PASS/FAIL line, and propagate failure.
pub fn criterion(name: &str, check: impl FnOnce() -> Result<(), String>) {
    match check() {
        Ok(()) => println!("ACCEPTANCE {name}: PASS"),
        Err(msg) => {
            println!("ACCEPTANCE {name}: FAIL - {msg}");
            panic!("acceptance criterion {name} failed: {msg}");
        }
    }
}
