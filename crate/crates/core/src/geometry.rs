//! Antenna array layout, baseline enumeration, point spread function, and
//! angular resolution / field-of-view figures.
//!
//! Baselines are expressed in wavelengths: an ordered receiver pair (i, j)
//! samples the spatial frequency u = (x_i - x_j) / lambda,
//! v = (y_i - y_j) / lambda. Both orderings are kept, so every sampling
//! function is closed under negation and visibility sets built on it are
//! Hermitian by construction.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};
use crate::image::ImageGrid;

/// What an array element does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementRole {
    /// Scene receiver; participates in baselines.
    Receiver,
    /// Incoherent noise transmitter.
    NoiseTx,
    /// Pulsed LFM transmitter.
    LfmTx,
    /// Receive channel fed directly with the transmitted LFM.
    Loopback,
}

/// One antenna element in the array plane (z = 0).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub role: ElementRole,
}

/// Element layout plus the carrier wavelength.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub elements: Vec<Element>,
    pub wavelength_m: f64,
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.wavelength_m, "wavelength_m")?;
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.elements {
            if !e.x_m.is_finite() || !e.y_m.is_finite() {
                return Err(Error::invalid(
                    "elements",
                    format!("element {} has non-finite position", e.id),
                ));
            }
            if !seen.insert(e.id) {
                return Err(Error::invalid(
                    "elements",
                    format!("duplicate element id {}", e.id),
                ));
            }
        }
        if self
            .elements
            .iter()
            .filter(|e| e.role == ElementRole::Loopback)
            .count()
            > 1
        {
            return Err(Error::invalid("elements", "more than one loopback channel"));
        }
        Ok(())
    }

    /// Non-rejecting checks for valid 2D incoherent illumination: at least
    /// three noise transmitters and exactly one LFM transmitter. Degenerate
    /// research configurations only draw warnings.
    pub fn illumination_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let noise = self.role_count(ElementRole::NoiseTx);
        if noise < 3 {
            warnings.push(format!(
                "{noise} noise transmitter(s); at least 3 are needed for incoherent 2D illumination"
            ));
        }
        let lfm = self.role_count(ElementRole::LfmTx);
        if lfm != 1 {
            warnings.push(format!("{lfm} LFM transmitters; expected exactly 1"));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        warnings
    }

    pub fn role_count(&self, role: ElementRole) -> usize {
        self.elements.iter().filter(|e| e.role == role).count()
    }

    /// Elements with the given role, in declaration order.
    pub fn with_role(&self, role: ElementRole) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(move |e| e.role == role)
    }

    pub fn receivers(&self) -> Vec<&Element> {
        self.with_role(ElementRole::Receiver).collect()
    }

    pub fn loopback(&self) -> Option<&Element> {
        self.with_role(ElementRole::Loopback).next()
    }

    pub fn element(&self, id: u32) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// Carrier frequency implied by the wavelength.
    pub fn carrier_frequency_hz(&self) -> f64 {
        crate::SPEED_OF_LIGHT_M_S / self.wavelength_m
    }
}

/// One sampled spatial-frequency point with its redundancy count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvPoint {
    pub u: f64,
    pub v: f64,
    /// Number of ordered receiver pairs (or self-pairs at the origin)
    /// mapping to this point.
    pub multiplicity: u32,
}

/// The set of spatial-frequency points measured by all baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingFunction {
    pub points: Vec<UvPoint>,
}

impl SamplingFunction {
    /// Total multiplicity over all points (receiver_count^2 for a full
    /// ordered enumeration including self-pairs).
    pub fn total_multiplicity(&self) -> u64 {
        self.points.iter().map(|p| u64::from(p.multiplicity)).sum()
    }
}

/// Spatial-frequency points closer than this (dimensionless, in wavelengths)
/// are merged as one redundant baseline.
pub const UV_MERGE_QUANTUM: f64 = 1e-9;

pub(crate) fn uv_key(u: f64, v: f64) -> (i64, i64) {
    (
        (u / UV_MERGE_QUANTUM).round() as i64,
        (v / UV_MERGE_QUANTUM).round() as i64,
    )
}

/// Enumerate all ordered receiver pairs into the sampling function.
///
/// Duplicates merge with multiplicity; the zero spacing appears once with
/// multiplicity equal to the receiver count (self-pairs). The result is
/// sorted by (u, v) and closed under negation.
pub fn compute_baselines(geometry: &ArrayGeometry) -> Result<SamplingFunction> {
    geometry.validate()?;
    let rx = geometry.receivers();
    if rx.len() < 2 {
        return Err(Error::Empty(format!(
            "baselines need at least 2 receivers, found {}",
            rx.len()
        )));
    }
    let lambda = geometry.wavelength_m;
    let mut merged: BTreeMap<(i64, i64), (f64, f64, u32)> = BTreeMap::new();
    merged.insert((0, 0), (0.0, 0.0, rx.len() as u32));
    for a in &rx {
        for b in &rx {
            if a.id == b.id {
                continue;
            }
            let u = (a.x_m - b.x_m) / lambda;
            let v = (a.y_m - b.y_m) / lambda;
            merged
                .entry(uv_key(u, v))
                .and_modify(|e| e.2 += 1)
                .or_insert((u, v, 1));
        }
    }
    let points = merged
        .into_values()
        .map(|(u, v, multiplicity)| UvPoint { u, v, multiplicity })
        .collect();
    Ok(SamplingFunction { points })
}

/// Evaluate the point spread function of a sampling function on a
/// direction-cosine grid:
///
/// PSF(alpha, beta) = sum over points of multiplicity * e^{-j2pi(u alpha + v beta)}
///
/// The value itself is the imager's intensity response to a point source
/// (for a full ordered enumeration it equals |array factor|^2), so
/// half-power widths are read at PSF magnitude = 0.5 * peak.
pub fn compute_psf(
    sampling: &SamplingFunction,
    alpha_axis: &[f64],
    beta_axis: &[f64],
) -> Result<ImageGrid> {
    if sampling.points.is_empty() {
        return Err(Error::Empty("sampling function has no points".into()));
    }
    if alpha_axis.iter().chain(beta_axis).any(|c| c.abs() > 1.0) {
        return Err(Error::OutOfRange(
            "direction-cosine grid extends beyond [-1, 1]".into(),
        ));
    }
    let mut img = ImageGrid::zeros(alpha_axis.to_vec(), beta_axis.to_vec())?;
    for (i, &alpha) in alpha_axis.iter().enumerate() {
        for (j, &beta) in beta_axis.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &sampling.points {
                let phase = -2.0 * PI * (p.u * alpha + p.v * beta);
                acc += f64::from(p.multiplicity) * Complex64::from_polar(1.0, phase);
            }
            *img.at_mut(i, j) = acc;
        }
    }
    Ok(img)
}

/// Per-axis angular resolution and unambiguous field of view.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisResolution {
    /// Half-power beamwidth 0.88 lambda / D, radians.
    pub hpbw_rad: f64,
    /// Unambiguous half-extent lambda / (2 d) in direction cosine, clamped
    /// to 1 (the full visible region).
    pub fov_half: f64,
    /// Largest receiver-pair extent D along this axis, meters.
    pub extent_m: f64,
    /// Smallest nonzero receiver spacing d along this axis, meters.
    pub min_spacing_m: f64,
}

/// Resolution report for the two direction-cosine axes. An axis with no
/// receiver extent is reported absent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub alpha: Option<AxisResolution>,
    pub beta: Option<AxisResolution>,
}

fn axis_resolution(coords: &[f64], lambda: f64) -> Option<AxisResolution> {
    let mut sorted = coords.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let extent = sorted.last()? - sorted.first()?;
    if extent <= 0.0 {
        return None;
    }
    let min_spacing = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    Some(AxisResolution {
        hpbw_rad: 0.88 * lambda / extent,
        fov_half: (lambda / (2.0 * min_spacing)).min(1.0),
        extent_m: extent,
        min_spacing_m: min_spacing,
    })
}

/// Angular resolution (0.88 lambda / D per axis, D the largest receiver
/// extent) and field of view (lambda / 2d per axis, d the smallest nonzero
/// receiver spacing).
pub fn resolution_and_fov(geometry: &ArrayGeometry) -> Result<ResolutionReport> {
    geometry.validate()?;
    let rx = geometry.receivers();
    if rx.len() < 2 {
        return Err(Error::Empty(format!(
            "resolution needs at least 2 receivers, found {}",
            rx.len()
        )));
    }
    let xs: Vec<f64> = rx.iter().map(|e| e.x_m).collect();
    let ys: Vec<f64> = rx.iter().map(|e| e.y_m).collect();
    let report = ResolutionReport {
        alpha: axis_resolution(&xs, geometry.wavelength_m),
        beta: axis_resolution(&ys, geometry.wavelength_m),
    };
    if report.alpha.is_none() && report.beta.is_none() {
        return Err(Error::Empty("no receiver extent on either axis".into()));
    }
    Ok(report)
}

/// Build the 24-element half-wavelength line used throughout the tests,
/// centered on the origin, plus standard transmitters.
pub fn linear_array(n_receivers: usize, spacing_m: f64, wavelength_m: f64) -> ArrayGeometry {
    let mut elements: Vec<Element> = (0..n_receivers)
        .map(|i| Element {
            id: i as u32,
            x_m: (i as f64 - (n_receivers as f64 - 1.0) / 2.0) * spacing_m,
            y_m: 0.0,
            role: ElementRole::Receiver,
        })
        .collect();
    let half_span = (n_receivers as f64 - 1.0) / 2.0 * spacing_m;
    let tx_offset = half_span + 8.0 * spacing_m;
    let next = n_receivers as u32;
    elements.push(Element {
        id: next,
        x_m: -tx_offset,
        y_m: 0.0,
        role: ElementRole::NoiseTx,
    });
    elements.push(Element {
        id: next + 1,
        x_m: tx_offset,
        y_m: 0.0,
        role: ElementRole::NoiseTx,
    });
    elements.push(Element {
        id: next + 2,
        x_m: 0.0,
        y_m: tx_offset,
        role: ElementRole::NoiseTx,
    });
    elements.push(Element {
        id: next + 3,
        x_m: 0.0,
        y_m: -tx_offset,
        role: ElementRole::LfmTx,
    });
    ArrayGeometry {
        elements,
        wavelength_m,
    }
}
