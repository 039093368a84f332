//! JSON scenario schema and validation.
//!
//! Keys carry explicit units in their names (`*_hz`, `*_m`, `*_s`); nothing
//! is inferred. Unknown keys are rejected so typos surface as schema errors
//! naming the offending key.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Element, ElementRole};
use crate::scene::{LossModel, PointTarget, Scene};
use crate::waveform::LfmSpec;
use crate::SPEED_OF_LIGHT_M_S as C;

/// Scenario-level noise transmitter settings. The default keeps
/// noise and LFM at equal unit power.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-transmitter linear power (variance of the complex samples).
    #[serde(default = "default_noise_power")]
    pub power: f64,
}

fn default_noise_power() -> f64 {
    1.0
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            power: default_noise_power(),
        }
    }
}

/// Geometry with an optional wavelength; when omitted it derives from the
/// LFM carrier.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    pub elements: Vec<Element>,
}

/// Target placement: either Cartesian meters or range plus direction
/// cosines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetConfig {
    Cartesian {
        x_m: f64,
        y_m: f64,
        z_m: f64,
        #[serde(default = "default_reflectivity")]
        reflectivity_amplitude: f64,
        #[serde(default)]
        reflectivity_phase_rad: f64,
    },
    Directional {
        range_m: f64,
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default = "default_reflectivity")]
        reflectivity_amplitude: f64,
        #[serde(default)]
        reflectivity_phase_rad: f64,
    },
}

fn default_reflectivity() -> f64 {
    1.0
}

impl TargetConfig {
    fn to_target(&self, index: usize) -> Result<PointTarget> {
        let (target, amplitude) = match *self {
            TargetConfig::Cartesian {
                x_m,
                y_m,
                z_m,
                reflectivity_amplitude,
                reflectivity_phase_rad,
            } => (
                PointTarget {
                    position_m: [x_m, y_m, z_m],
                    reflectivity_re: (reflectivity_amplitude * reflectivity_phase_rad.cos()),
                    reflectivity_im: (reflectivity_amplitude * reflectivity_phase_rad.sin()),
                },
                reflectivity_amplitude,
            ),
            TargetConfig::Directional {
                range_m,
                alpha,
                beta,
                reflectivity_amplitude,
                reflectivity_phase_rad,
            } => {
                if alpha * alpha + beta * beta > 1.0 {
                    return Err(Error::config(
                        format!("scene.targets[{index}].alpha"),
                        "alpha^2 + beta^2 exceeds 1",
                    ));
                }
                if range_m <= 0.0 {
                    return Err(Error::config(
                        format!("scene.targets[{index}].range_m"),
                        "must be positive",
                    ));
                }
                (
                    PointTarget::at_direction(
                        range_m,
                        alpha,
                        beta,
                        Complex64::from_polar(reflectivity_amplitude, reflectivity_phase_rad),
                    ),
                    reflectivity_amplitude,
                )
            }
        };
        if amplitude < 0.0 {
            return Err(Error::config(
                format!("scene.targets[{index}].reflectivity_amplitude"),
                "must be non-negative",
            ));
        }
        Ok(target)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    #[serde(default)]
    pub receiver_noise_power: f64,
    #[serde(default)]
    pub propagation_loss: LossModel,
}

/// Source of the azimuth-elevation visibility set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AzElSource {
    /// Cross-correlate the raw full-length captures.
    #[default]
    Raw,
    /// Slow-time correlation at the strongest range bin of the cube.
    RangeBinAuto,
    /// Slow-time correlation at a fixed range bin.
    RangeBin(usize),
}

/// Matched-filter reference selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Loopback capture when one exists, ideal waveform otherwise.
    #[default]
    Auto,
    /// Always the ideal generated waveform.
    Ideal,
    /// Require the loopback capture; error when the capture lacks one.
    Loopback,
}

/// Optional amplitude taper on the matched-filter reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    #[default]
    None,
    Hamming,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessingConfig {
    /// Grid points per direction-cosine axis.
    pub grid_size: usize,
    /// Alpha half-extent of image grids; defaults to the geometry's field
    /// of view.
    pub alpha_half_extent: Option<f64>,
    pub beta_half_extent: Option<f64>,
    /// Range window of the range-azimuth product, meters.
    pub max_range_m: Option<f64>,
    pub azel_source: AzElSource,
    pub reference: ReferenceSource,
    pub taper: Taper,
    /// Apply per-path carrier phase during synthesis.
    pub carrier_phase: bool,
    /// Subtract the projection onto the clean LFM train from every scene
    /// channel before raw-path estimation (experimental).
    pub remove_lfm_component: bool,
    pub seed: u64,
    /// Local maxima listed per image product in the run report.
    pub report_peaks: usize,
    /// Peak-mask half-width along range, bins.
    pub peak_mask_range_bins: usize,
    /// Peak-mask half-width across direction cosine, in resolution cells.
    pub peak_mask_resolution_cells: f64,
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        Self {
            grid_size: 256,
            alpha_half_extent: None,
            beta_half_extent: None,
            max_range_m: None,
            azel_source: AzElSource::default(),
            reference: ReferenceSource::default(),
            taper: Taper::default(),
            carrier_phase: true,
            remove_lfm_component: false,
            seed: 0,
            report_peaks: 3,
            peak_mask_range_bins: 2,
            peak_mask_resolution_cells: 1.0,
        }
    }
}

/// Pipeline products that can be selected in `outputs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    Psf,
    RawCube,
    Cube,
    RangeAzimuth,
    AzimuthElevation,
    VisibilitiesCsv,
}

impl ProductKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            ProductKind::Psf => "psf",
            ProductKind::RawCube => "raw_cube",
            ProductKind::Cube => "cube",
            ProductKind::RangeAzimuth => "range_azimuth",
            ProductKind::AzimuthElevation => "azimuth_elevation",
            ProductKind::VisibilitiesCsv => "visibilities",
        }
    }
}

/// Full scenario description consumed by the pipeline and the CLI stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lfm: LfmSpec,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub geometry: GeometryConfig,
    pub scene: SceneConfig,
    #[serde(default)]
    pub processing: ProcessingConfig,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<ProductKind>,
}

fn default_outputs() -> Vec<ProductKind> {
    vec![ProductKind::RangeAzimuth, ProductKind::Psf]
}

/// A schema-validated scenario with derived quantities resolved.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub lfm: LfmSpec,
    pub noise_power: f64,
    pub geometry: ArrayGeometry,
    pub scene: Scene,
    pub processing: ProcessingConfig,
    pub outputs: Vec<ProductKind>,
    pub warnings: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<ScenarioConfig> {
        serde_json::from_str(text).map_err(|e| Error::config("<scenario json>", e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<ScenarioConfig> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Validate everything and resolve derived values (wavelength, targets).
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        self.lfm.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                Error::config(format!("lfm.{name}"), reason)
            }
            other => other,
        })?;
        if !self.noise.power.is_finite() || self.noise.power <= 0.0 {
            return Err(Error::config("noise.power", "must be positive"));
        }

        let derived_lambda = C / self.lfm.carrier_frequency_hz;
        let wavelength_m = match self.geometry.wavelength_m {
            None => derived_lambda,
            Some(w) => {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::config("geometry.wavelength_m", "must be positive"));
                }
                if (w - derived_lambda).abs() > 1e-6 * derived_lambda {
                    return Err(Error::config(
                        "geometry.wavelength_m",
                        format!(
                            "{} m conflicts with lfm.carrier_frequency_hz (implies {} m)",
                            w, derived_lambda
                        ),
                    ));
                }
                w
            }
        };
        let geometry = ArrayGeometry {
            elements: self.geometry.elements.clone(),
            wavelength_m,
        };
        geometry.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                Error::config(format!("geometry.{name}"), reason)
            }
            other => other,
        })?;
        if geometry.receivers().len() < 2 {
            return Err(Error::config(
                "geometry.elements",
                "need at least 2 receiver elements",
            ));
        }
        if geometry.loopback().is_some() && geometry.role_count(ElementRole::LfmTx) == 0 {
            return Err(Error::config(
                "geometry.elements",
                "a loopback channel requires an lfm_tx element",
            ));
        }

        let mut targets = Vec::with_capacity(self.scene.targets.len());
        for (i, t) in self.scene.targets.iter().enumerate() {
            targets.push(t.to_target(i)?);
        }
        if self.scene.receiver_noise_power < 0.0 {
            return Err(Error::config(
                "scene.receiver_noise_power",
                "must be non-negative",
            ));
        }
        let scene = Scene {
            targets,
            receiver_noise_power: self.scene.receiver_noise_power,
            loss_model: self.scene.propagation_loss,
        };

        let p = &self.processing;
        if p.grid_size < 2 {
            return Err(Error::config("processing.grid_size", "must be at least 2"));
        }
        for (key, extent) in [
            ("processing.alpha_half_extent", p.alpha_half_extent),
            ("processing.beta_half_extent", p.beta_half_extent),
        ] {
            if let Some(e) = extent {
                if !e.is_finite() || e <= 0.0 || e > 1.0 {
                    return Err(Error::config(key, "must lie in (0, 1]"));
                }
            }
        }
        if let Some(r) = p.max_range_m {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::config("processing.max_range_m", "must be positive"));
            }
        }
        if p.report_peaks == 0 {
            return Err(Error::config(
                "processing.report_peaks",
                "must be at least 1",
            ));
        }

        let needs_lfm = self.outputs.iter().any(|o| {
            matches!(
                o,
                ProductKind::RangeAzimuth | ProductKind::Cube | ProductKind::RawCube
            )
        });
        if needs_lfm && geometry.role_count(ElementRole::LfmTx) == 0 {
            return Err(Error::config(
                "geometry.elements",
                "selected outputs require an lfm_tx element",
            ));
        }

        let warnings = geometry.illumination_warnings();
        Ok(ResolvedScenario {
            lfm: self.lfm.clone(),
            noise_power: self.noise.power,
            geometry,
            scene,
            processing: self.processing.clone(),
            outputs: self.outputs.clone(),
            warnings,
        })
    }
}
