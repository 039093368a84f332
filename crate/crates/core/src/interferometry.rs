//! Visibility estimation by cross-correlation, analytic visibilities for
//! oracle checks, and image reconstruction on direction-cosine grids.
//!
//! Sign conventions: the forward map from scene intensity to visibility
//! uses e^{+j2pi(u alpha + v beta)}; reconstruction inverts with
//! e^{-j2pi(u alpha + v beta)}. Estimators keep both orderings of every
//! receiver pair, so Hermitian symmetry V(-u,-v) = V*(u,v) holds exactly
//! (bitwise) rather than being imposed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::compression::RadarDataCube;
use crate::error::{Error, Result};
use crate::geometry::{uv_key, ArrayGeometry, SamplingFunction};
use crate::image::ImageGrid;
use crate::scene::ChannelData;
use crate::waveform::SampledWaveform;

/// How a visibility set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilitySource {
    /// Full-capture cross-correlation of raw channels.
    RawCorrelation,
    /// Slow-time cross-correlation at one range bin of the data cube.
    PerRangeBin,
    /// Direct evaluation of the scene's Fourier transform.
    Analytic,
}

/// One visibility measurement at a spatial-frequency point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilitySample {
    pub u: f64,
    pub v: f64,
    pub value: Complex64,
    /// Redundant baselines averaged into this sample (weight used during
    /// reconstruction, mirroring the sampling function).
    pub multiplicity: u32,
}

/// Visibility samples plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySet {
    pub samples: Vec<VisibilitySample>,
    pub source: VisibilitySource,
    /// Samples averaged per correlation (capture length or pulse count).
    pub integration_samples: usize,
}

impl VisibilitySet {
    pub fn sample_at(&self, u: f64, v: f64) -> Option<&VisibilitySample> {
        self.samples
            .iter()
            .find(|s| uv_key(s.u, s.v) == uv_key(u, v))
    }

    /// Value at the origin (total received power for estimated sets).
    pub fn zero_spacing(&self) -> Option<Complex64> {
        self.sample_at(0.0, 0.0).map(|s| s.value)
    }
}

/// Evaluate the scene visibility of a set of point sources at one
/// spatial-frequency point:
///
/// V(u, v) = sum_t I_t e^{+j2pi(u alpha_t + v beta_t)}
///
/// `targets` are (alpha, beta, intensity) with |alpha|, |beta| <= 1.
pub fn analytic_visibility(targets: &[(f64, f64, f64)], u: f64, v: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(alpha, beta, intensity) in targets {
        acc += intensity * Complex64::from_polar(1.0, 2.0 * PI * (u * alpha + v * beta));
    }
    acc
}

/// Analytic visibilities evaluated on every point of a sampling function.
pub fn analytic_visibility_set(
    targets: &[(f64, f64, f64)],
    sampling: &SamplingFunction,
) -> VisibilitySet {
    let samples = sampling
        .points
        .iter()
        .map(|p| VisibilitySample {
            u: p.u,
            v: p.v,
            value: analytic_visibility(targets, p.u, p.v),
            multiplicity: p.multiplicity,
        })
        .collect();
    VisibilitySet {
        samples,
        source: VisibilitySource::Analytic,
        integration_samples: 0,
    }
}

/// Group contribution: (min id, max id, first id, value). The id triple is
/// the canonical sort key within a merged baseline group.
type PairContribution = (u32, u32, u32, Complex64);

/// Cross-correlate every ordered channel pair and merge redundant baselines
/// by averaging. Within a merged group, contributions are summed in a
/// canonical order (by unordered pair id) so a group and its negated twin
/// accumulate mirrored sequences and stay exact conjugates.
fn correlate_ordered_pairs(
    series: &[Vec<Complex64>],
    positions: &[(f64, f64)],
    lambda: f64,
    source: VisibilitySource,
) -> VisibilitySet {
    let n_ch = series.len();
    let n_avg = series[0].len();
    let inv_n = 1.0 / n_avg as f64;

    let mut groups: BTreeMap<(i64, i64), (f64, f64, Vec<PairContribution>)> = BTreeMap::new();
    for a in 0..n_ch {
        for b in 0..n_ch {
            if a == b {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (sa, sb) in series[a].iter().zip(&series[b]) {
                acc += sa * sb.conj();
            }
            let value = acc * inv_n;
            let u = (positions[a].0 - positions[b].0) / lambda;
            let v = (positions[a].1 - positions[b].1) / lambda;
            let (lo, hi) = (a.min(b) as u32, a.max(b) as u32);
            groups
                .entry(uv_key(u, v))
                .or_insert_with(|| (u, v, Vec::new()))
                .2
                .push((lo, hi, a as u32, value));
        }
    }

    // Zero spacing: mean per-channel power (self-pairs).
    let power: f64 = series
        .iter()
        .flat_map(|s| s.iter())
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        * inv_n
        / n_ch as f64;
    groups
        .entry((0, 0))
        .or_insert_with(|| (0.0, 0.0, Vec::new()))
        .2
        .insert(0, (0, 0, 0, Complex64::new(power, 0.0)));
    let zero_extra = (n_ch - 1) as u32; // self-pair count beyond the one entry

    let mut samples = Vec::with_capacity(groups.len());
    for (key, (u, v, mut contributions)) in groups {
        contributions.sort_by_key(|c| (c.0, c.1, c.2));
        let sum: Complex64 = contributions.iter().map(|c| c.3).sum();
        let count = contributions.len() as u32;
        let value = sum / f64::from(count);
        let multiplicity = if key == (0, 0) {
            count + zero_extra
        } else {
            count
        };
        samples.push(VisibilitySample {
            u,
            v,
            value,
            multiplicity,
        });
    }
    VisibilitySet {
        samples,
        source,
        integration_samples: n_avg,
    }
}

fn receiver_positions(
    geometry: &ArrayGeometry,
    expected_channels: usize,
) -> Result<Vec<(f64, f64)>> {
    let rx = geometry.receivers();
    if rx.len() < 2 {
        return Err(Error::Empty(format!(
            "visibility estimation needs at least 2 receivers, found {}",
            rx.len()
        )));
    }
    if rx.len() != expected_channels {
        return Err(Error::Mismatch(format!(
            "{expected_channels} scene channels but {} receiver elements; channels map to \
             receivers in geometry order",
            rx.len()
        )));
    }
    Ok(rx.iter().map(|e| (e.x_m, e.y_m)).collect())
}

/// Estimate visibilities from the raw full-length captures:
/// V_ab = (1/N) sum_n s_a[n] s_b*[n], assigned to the pair's baseline.
pub fn estimate_visibilities_raw(
    channels: &ChannelData,
    geometry: &ArrayGeometry,
) -> Result<VisibilitySet> {
    channels.validate()?;
    let scene: Vec<Vec<Complex64>> = channels
        .scene_channels()
        .into_iter()
        .map(|(_, w)| w.samples.clone())
        .collect();
    let positions = receiver_positions(geometry, scene.len())?;
    Ok(correlate_ordered_pairs(
        &scene,
        &positions,
        geometry.wavelength_m,
        VisibilitySource::RawCorrelation,
    ))
}

/// Same estimator as the raw path, but correlating the slow-time vectors
/// (one sample per pulse) at a single range bin.
pub fn estimate_visibilities_per_range_bin(
    cube: &RadarDataCube,
    geometry: &ArrayGeometry,
    bin: usize,
) -> Result<VisibilitySet> {
    if bin >= cube.n_range {
        return Err(Error::OutOfRange(format!(
            "range bin {bin} outside cube with {} bins",
            cube.n_range
        )));
    }
    if cube.n_pulse == 1 {
        log::warn!("slow-time correlation over a single pulse degenerates to a one-sample product");
    }
    let series: Vec<Vec<Complex64>> = (0..cube.n_channel)
        .map(|c| cube.slow_time(bin, c))
        .collect();
    let positions = receiver_positions(geometry, series.len())?;
    Ok(correlate_ordered_pairs(
        &series,
        &positions,
        geometry.wavelength_m,
        VisibilitySource::PerRangeBin,
    ))
}

/// Reconstruct an image by direct summation:
///
/// I_r(alpha, beta) = sum over samples of
///     multiplicity * V(u, v) * e^{-j2pi(u alpha + v beta)}
pub fn reconstruct_image(
    vis: &VisibilitySet,
    alpha_axis: &[f64],
    beta_axis: &[f64],
) -> Result<ImageGrid> {
    if vis.samples.is_empty() {
        return Err(Error::Empty("visibility set has no samples".into()));
    }
    let mut img = ImageGrid::zeros(alpha_axis.to_vec(), beta_axis.to_vec())?;
    let cols = beta_axis.len();
    let mut wa = vec![Complex64::new(0.0, 0.0); alpha_axis.len()];
    let mut wb = vec![Complex64::new(0.0, 0.0); cols];
    for s in &vis.samples {
        let weighted = s.value * f64::from(s.multiplicity);
        for (w, &alpha) in wa.iter_mut().zip(alpha_axis) {
            *w = Complex64::from_polar(1.0, -2.0 * PI * s.u * alpha);
        }
        for (w, &beta) in wb.iter_mut().zip(beta_axis) {
            *w = Complex64::from_polar(1.0, -2.0 * PI * s.v * beta);
        }
        for (i, &a) in wa.iter().enumerate() {
            let row_factor = weighted * a;
            let row = &mut img.values[i * cols..(i + 1) * cols];
            for (cell, &b) in row.iter_mut().zip(&wb) {
                *cell += row_factor * b;
            }
        }
    }
    Ok(img)
}

/// Per-range-bin visibility estimation followed by a 1D reconstruction
/// along alpha, stacked into a (range, alpha) image. `max_bins` limits the
/// range window (the full fast-time axis is processed when `None`).
pub fn range_azimuth_image(
    cube: &RadarDataCube,
    geometry: &ArrayGeometry,
    alpha_axis: &[f64],
    max_bins: Option<usize>,
) -> Result<ImageGrid> {
    let n_bins = max_bins.unwrap_or(cube.n_range).min(cube.n_range);
    if n_bins == 0 {
        return Err(Error::Empty("no range bins selected".into()));
    }
    let ranges: Vec<f64> = (0..n_bins).map(|b| cube.bin_range_m(b)).collect();
    let mut img = ImageGrid::zeros(ranges, alpha_axis.to_vec())?;
    for bin in 0..n_bins {
        let vis = estimate_visibilities_per_range_bin(cube, geometry, bin)?;
        let row = reconstruct_image(&vis, alpha_axis, &[0.0])?;
        for j in 0..alpha_axis.len() {
            *img.at_mut(bin, j) = row.at(j, 0);
        }
    }
    Ok(img)
}

/// Subtract each scene channel's projection onto `reference` (experimental
/// removal of the spatially coherent LFM component before raw-path
/// estimation). The loopback channel is left untouched.
pub fn remove_channel_component(
    channels: &ChannelData,
    reference: &SampledWaveform,
) -> Result<ChannelData> {
    channels.validate()?;
    if reference.len() != channels.len() {
        return Err(Error::Mismatch(format!(
            "reference length {} != channel length {}",
            reference.len(),
            channels.len()
        )));
    }
    let ref_energy = reference.energy();
    if ref_energy <= 0.0 {
        return Err(Error::Empty("projection reference is all zero".into()));
    }
    let mut out = channels.clone();
    for (ch, id) in out.channels.iter_mut().zip(&out.channel_ids) {
        if Some(*id) == channels.loopback_id {
            continue;
        }
        let inner: Complex64 = ch
            .samples
            .iter()
            .zip(&reference.samples)
            .map(|(s, r)| s * r.conj())
            .sum();
        let coeff = inner / ref_energy;
        for (s, r) in ch.samples.iter_mut().zip(&reference.samples) {
            *s -= coeff * r;
        }
    }
    Ok(out)
}
