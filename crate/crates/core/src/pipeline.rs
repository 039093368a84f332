//! Scenario-driven pipeline: waveforms -> scene -> compression -> imaging,
//! with product files and a JSON run report.
//!
//! The single-shot pipeline passes stage boundaries through the cube file
//! codec (`io::quantize_cube`), so chaining the standalone `simulate`,
//! `compress`, and `image` stages over files produces byte-identical
//! products.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::compression::{build_data_cube, compress_channels, select_reference, RadarDataCube};
use crate::config::{
    AzElSource, ProductKind, ReferenceSource, ResolvedScenario, ScenarioConfig, Taper,
};
use crate::error::{Error, Result};
use crate::geometry::{compute_baselines, compute_psf, resolution_and_fov, ResolutionReport};
use crate::image::{linspace, ImageGrid};
use crate::interferometry::{
    estimate_visibilities_per_range_bin, estimate_visibilities_raw, range_azimuth_image,
    reconstruct_image, remove_channel_component, VisibilitySet,
};
use crate::io;
use crate::scene::{synthesize_received, transmit_waveforms, ChannelData, SynthesisOptions};
use crate::waveform::{build_pulse_train, generate_lfm, SampledWaveform};

/// On-disk formats for image products. Cubes are always binary and
/// visibility sets always CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Bin,
    Csv,
    Pgm,
}

impl FileFormat {
    pub fn all() -> Vec<FileFormat> {
        vec![FileFormat::Bin, FileFormat::Csv, FileFormat::Pgm]
    }

    fn extension(self) -> &'static str {
        match self {
            FileFormat::Bin => "bin",
            FileFormat::Csv => "csv",
            FileFormat::Pgm => "pgm",
        }
    }
}

/// dB floor of PGM exports.
pub const PGM_FLOOR_DB: f64 = -40.0;

/// Options governing one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub out_dir: PathBuf,
    pub formats: Vec<FileFormat>,
    pub seed_override: Option<u64>,
    pub grid_override: Option<usize>,
}

impl PipelineOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            formats: vec![FileFormat::Bin],
            seed_override: None,
            grid_override: None,
        }
    }
}

/// One reported image maximum.
#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub magnitude: f64,
    /// 20 log10(peak / median magnitude); absent for an all-zero background.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_to_background_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductReport {
    pub name: String,
    pub files: Vec<String>,
    pub peaks: Vec<PeakReport>,
}

/// Parameters resolved from the scenario, echoed for the record.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedParameters {
    pub wavelength_m: f64,
    pub carrier_frequency_hz: f64,
    pub range_bin_m: f64,
    pub samples_per_pri: usize,
    pub pulse_count: usize,
    pub scene_channels: usize,
    pub has_loopback: bool,
    pub grid_size: usize,
    pub alpha_half_extent: f64,
    pub beta_half_extent: f64,
}

/// JSON run report. Timings vary run to run; product files do not.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub parameters: ResolvedParameters,
    pub resolution: ResolutionReport,
    pub warnings: Vec<String>,
    pub products: Vec<ProductReport>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn product(&self, name: &str) -> Option<&ProductReport> {
        self.products.iter().find(|p| p.name == name)
    }
}

/// Generate transmit waveforms and synthesize every receiver channel.
pub fn stage_simulate(resolved: &ResolvedScenario, seed: u64) -> Result<ChannelData> {
    let pulse = generate_lfm(&resolved.lfm)?;
    let train = build_pulse_train(&pulse, &resolved.lfm)?;
    let tx = transmit_waveforms(&resolved.geometry, &train, resolved.noise_power, seed)?;
    let options = SynthesisOptions {
        carrier_phase: resolved.processing.carrier_phase,
    };
    synthesize_received(&resolved.scene, &resolved.geometry, &tx, seed, &options)
}

/// Matched-filter reference per the configured source and taper.
pub fn stage_reference(
    resolved: &ResolvedScenario,
    channels: &ChannelData,
) -> Result<SampledWaveform> {
    let ideal = generate_lfm(&resolved.lfm)?;
    let mut reference = match resolved.processing.reference {
        ReferenceSource::Auto => select_reference(channels, &resolved.lfm, &ideal)?,
        ReferenceSource::Ideal => ideal.unit_energy()?,
        ReferenceSource::Loopback => {
            if channels.loopback_index().is_none() {
                return Err(Error::Mismatch(
                    "reference source `loopback` but the capture has no loopback channel".into(),
                ));
            }
            select_reference(channels, &resolved.lfm, &ideal)?
        }
    };
    if resolved.processing.taper == Taper::Hamming {
        let n = reference.len();
        for (i, s) in reference.samples.iter_mut().enumerate() {
            let w = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1).max(1) as f64).cos();
            *s *= w;
        }
        reference = reference.unit_energy()?;
    }
    Ok(reference)
}

/// Compress scene channels and assemble the calibrated data cube.
pub fn stage_compress(
    resolved: &ResolvedScenario,
    channels: &ChannelData,
) -> Result<RadarDataCube> {
    let reference = stage_reference(resolved, channels)?;
    let compressed = compress_channels(channels, &reference)?;
    build_data_cube(&compressed, &resolved.lfm, false)
}

/// Direction-cosine axis extents: configured value, else the geometry's
/// field of view, else the full visible region.
pub fn grid_extents(resolved: &ResolvedScenario) -> (f64, f64) {
    let report = resolution_and_fov(&resolved.geometry).ok();
    let fov_alpha = report.as_ref().and_then(|r| r.alpha.map(|a| a.fov_half));
    let fov_beta = report.as_ref().and_then(|r| r.beta.map(|b| b.fov_half));
    let alpha = resolved
        .processing
        .alpha_half_extent
        .or(fov_alpha)
        .unwrap_or(1.0);
    let beta = resolved
        .processing
        .beta_half_extent
        .or(fov_beta)
        .unwrap_or(alpha);
    (alpha, beta)
}

/// Alpha axis used by the cross-range products.
pub fn alpha_axis(resolved: &ResolvedScenario) -> Vec<f64> {
    let (alpha, _) = grid_extents(resolved);
    linspace(-alpha, alpha, resolved.processing.grid_size)
}

fn beta_axis(resolved: &ResolvedScenario) -> Vec<f64> {
    let (_, beta) = grid_extents(resolved);
    linspace(-beta, beta, resolved.processing.grid_size)
}

/// Range bins covered by the configured range window.
pub fn range_window_bins(resolved: &ResolvedScenario, cube: &RadarDataCube) -> usize {
    match resolved.processing.max_range_m {
        Some(max_range) => {
            (((max_range / cube.range_bin_m).floor() as usize) + 1).min(cube.n_range)
        }
        None => cube.n_range,
    }
}

/// Range-azimuth product from a compressed cube.
pub fn stage_range_azimuth(resolved: &ResolvedScenario, cube: &RadarDataCube) -> Result<ImageGrid> {
    if cube.n_pulse != resolved.lfm.pulse_count {
        return Err(Error::Mismatch(format!(
            "cube has {} pulses but the scenario expects {}; run the compress stage first",
            cube.n_pulse, resolved.lfm.pulse_count
        )));
    }
    let bins = range_window_bins(resolved, cube);
    range_azimuth_image(cube, &resolved.geometry, &alpha_axis(resolved), Some(bins))
}

/// Range bin with the highest total energy (deterministic auto selection
/// for the per-bin azimuth-elevation path).
pub fn strongest_range_bin(cube: &RadarDataCube, max_bins: usize) -> usize {
    let bins = max_bins.min(cube.n_range);
    let mut best = (0usize, -1.0f64);
    for r in 0..bins {
        let mut energy = 0.0;
        for c in 0..cube.n_channel {
            for p in 0..cube.n_pulse {
                energy += cube.at(r, p, c).norm_sqr();
            }
        }
        if energy > best.1 {
            best = (r, energy);
        }
    }
    best.0
}

/// Azimuth-elevation product plus the visibility set behind it.
pub fn stage_azimuth_elevation(
    resolved: &ResolvedScenario,
    raw_channels: Option<&ChannelData>,
    cube: Option<&RadarDataCube>,
) -> Result<(ImageGrid, VisibilitySet)> {
    let vis = match resolved.processing.azel_source {
        AzElSource::Raw => {
            let channels = raw_channels.ok_or_else(|| {
                Error::Mismatch(
                    "azimuth-elevation from raw correlation needs raw channel data \
                     (a single-pulse cube dump)"
                        .into(),
                )
            })?;
            if resolved.processing.remove_lfm_component {
                let pulse = generate_lfm(&resolved.lfm)?;
                let train = build_pulse_train(&pulse, &resolved.lfm)?;
                let cleaned = remove_channel_component(channels, &train)?;
                estimate_visibilities_raw(&cleaned, &resolved.geometry)?
            } else {
                estimate_visibilities_raw(channels, &resolved.geometry)?
            }
        }
        AzElSource::RangeBinAuto => {
            let cube = cube.ok_or_else(|| {
                Error::Mismatch("azimuth-elevation per range bin needs a compressed cube".into())
            })?;
            let bin = strongest_range_bin(cube, range_window_bins(resolved, cube));
            estimate_visibilities_per_range_bin(cube, &resolved.geometry, bin)?
        }
        AzElSource::RangeBin(bin) => {
            let cube = cube.ok_or_else(|| {
                Error::Mismatch("azimuth-elevation per range bin needs a compressed cube".into())
            })?;
            estimate_visibilities_per_range_bin(cube, &resolved.geometry, bin)?
        }
    };
    let img = reconstruct_image(&vis, &alpha_axis(resolved), &beta_axis(resolved))?;
    Ok((img, vis))
}

/// PSF of the configured geometry on the standard grid.
pub fn stage_psf(resolved: &ResolvedScenario) -> Result<ImageGrid> {
    let sampling = compute_baselines(&resolved.geometry)?;
    compute_psf(&sampling, &alpha_axis(resolved), &beta_axis(resolved))
}

/// Peak list for a report: `axis1_is_range` selects (range, alpha) naming,
/// otherwise (alpha, beta).
fn image_peaks(
    img: &ImageGrid,
    axis1_is_range: bool,
    count: usize,
    excl1: usize,
    excl2: usize,
) -> Vec<PeakReport> {
    let median = img.median_magnitude();
    img.dominant_peaks(count, excl1, excl2)
        .into_iter()
        .filter(|p| p.magnitude > 0.0)
        .map(|p| {
            let ptb = if median > 0.0 {
                Some(20.0 * (p.magnitude / median).log10())
            } else {
                None
            };
            if axis1_is_range {
                PeakReport {
                    range_m: Some(p.axis1_value),
                    alpha: Some(p.axis2_value),
                    beta: None,
                    magnitude: p.magnitude,
                    peak_to_background_db: ptb,
                }
            } else {
                PeakReport {
                    range_m: None,
                    alpha: Some(p.axis1_value),
                    beta: Some(p.axis2_value),
                    magnitude: p.magnitude,
                    peak_to_background_db: ptb,
                }
            }
        })
        .collect()
}

/// Half-width of the peak exclusion mask, in grid cells, for an axis with
/// step `axis_step` and beamwidth `hpbw`.
fn mask_cells(hpbw: Option<f64>, axis_step: f64, cells: f64) -> usize {
    match hpbw {
        Some(h) if axis_step > 0.0 => ((cells * h / axis_step).ceil() as usize).max(1),
        _ => 1,
    }
}

fn write_image_product(
    out_dir: &Path,
    stem: &str,
    img: &ImageGrid,
    formats: &[FileFormat],
) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for fmt in formats {
        let path = out_dir.join(format!("{stem}.{}", fmt.extension()));
        match fmt {
            FileFormat::Bin => io::write_image(&path, img)?,
            FileFormat::Csv => io::write_image_csv(&path, img)?,
            FileFormat::Pgm => io::write_pgm(&path, img, PGM_FLOOR_DB)?,
        }
        files.push(path.display().to_string());
    }
    Ok(files)
}

/// Execute the full chain for a scenario and write the selected products.
pub fn run_pipeline(config: &ScenarioConfig, options: &PipelineOptions) -> Result<RunReport> {
    let mut resolved = config.resolve()?;
    if let Some(seed) = options.seed_override {
        resolved.processing.seed = seed;
    }
    if let Some(grid) = options.grid_override {
        if grid < 2 {
            return Err(Error::config("processing.grid_size", "must be at least 2"));
        }
        resolved.processing.grid_size = grid;
    }
    let seed = resolved.processing.seed;
    std::fs::create_dir_all(&options.out_dir)?;

    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut time = |name: &str, t: Instant| {
        timings.insert(name.to_string(), t.elapsed().as_secs_f64() * 1e3);
    };

    let wants = |kind: ProductKind| resolved.outputs.contains(&kind);
    let mut products: Vec<ProductReport> = Vec::new();

    // Synthesis, then the raw-capture stage boundary.
    let t = Instant::now();
    let channels = stage_simulate(&resolved, seed)?;
    time("simulate", t);
    let has_loopback = channels.loopback_id.is_some();
    let raw_cube = io::quantize_cube(&RadarDataCube::from_raw_channels(&channels)?)?;
    let channels = raw_cube.to_raw_channels(has_loopback)?;
    if wants(ProductKind::RawCube) {
        let path = options.out_dir.join("raw_cube.bin");
        io::write_cube(&path, &raw_cube)?;
        products.push(ProductReport {
            name: "raw_cube".into(),
            files: vec![path.display().to_string()],
            peaks: vec![],
        });
    }

    // Compression stage boundary, only when something downstream needs it.
    let needs_cube = wants(ProductKind::Cube)
        || wants(ProductKind::RangeAzimuth)
        || (wants(ProductKind::AzimuthElevation)
            && resolved.processing.azel_source != AzElSource::Raw);
    let cube = if needs_cube {
        let t = Instant::now();
        let cube = io::quantize_cube(&stage_compress(&resolved, &channels)?)?;
        time("compress", t);
        if wants(ProductKind::Cube) {
            let path = options.out_dir.join("cube.bin");
            io::write_cube(&path, &cube)?;
            products.push(ProductReport {
                name: "cube".into(),
                files: vec![path.display().to_string()],
                peaks: vec![],
            });
        }
        Some(cube)
    } else {
        None
    };

    let resolution = resolution_and_fov(&resolved.geometry)?;
    let hpbw_alpha = resolution.alpha.map(|a| a.hpbw_rad);
    let hpbw_beta = resolution.beta.map(|b| b.hpbw_rad);
    let n_peaks = resolved.processing.report_peaks;
    let mask_res_cells = resolved.processing.peak_mask_resolution_cells;

    if wants(ProductKind::Psf) {
        let t = Instant::now();
        let img = stage_psf(&resolved)?;
        time("psf", t);
        let files = write_image_product(&options.out_dir, "psf", &img, &options.formats)?;
        products.push(ProductReport {
            name: "psf".into(),
            files,
            peaks: image_peaks(&img, false, 1, 0, 0),
        });
    }

    if wants(ProductKind::RangeAzimuth) {
        let cube = cube.as_ref().expect("cube computed for range-azimuth");
        let t = Instant::now();
        let img = stage_range_azimuth(&resolved, cube)?;
        time("range_azimuth", t);
        let files = write_image_product(&options.out_dir, "range_azimuth", &img, &options.formats)?;
        let alpha_step = if img.axis2.len() > 1 {
            img.axis2[1] - img.axis2[0]
        } else {
            0.0
        };
        let peaks = image_peaks(
            &img,
            true,
            n_peaks,
            resolved.processing.peak_mask_range_bins,
            mask_cells(hpbw_alpha, alpha_step, mask_res_cells),
        );
        products.push(ProductReport {
            name: "range_azimuth".into(),
            files,
            peaks,
        });
    }

    let mut azel_vis: Option<VisibilitySet> = None;
    if wants(ProductKind::AzimuthElevation) {
        let t = Instant::now();
        let (img, vis) = stage_azimuth_elevation(&resolved, Some(&channels), cube.as_ref())?;
        time("azimuth_elevation", t);
        azel_vis = Some(vis);
        let files = write_image_product(
            &options.out_dir,
            "azimuth_elevation",
            &img,
            &options.formats,
        )?;
        let step1 = if img.axis1.len() > 1 {
            img.axis1[1] - img.axis1[0]
        } else {
            0.0
        };
        let step2 = if img.axis2.len() > 1 {
            img.axis2[1] - img.axis2[0]
        } else {
            0.0
        };
        let peaks = image_peaks(
            &img,
            false,
            n_peaks,
            mask_cells(hpbw_alpha, step1, mask_res_cells),
            mask_cells(hpbw_beta.or(hpbw_alpha), step2, mask_res_cells),
        );
        products.push(ProductReport {
            name: "azimuth_elevation".into(),
            files,
            peaks,
        });
    }

    if wants(ProductKind::VisibilitiesCsv) {
        let t = Instant::now();
        let vis = match azel_vis {
            Some(v) => v,
            None => estimate_visibilities_raw(&channels, &resolved.geometry)?,
        };
        time("visibilities", t);
        let path = options.out_dir.join("visibilities.csv");
        io::write_visibilities_csv(&path, &vis)?;
        products.push(ProductReport {
            name: "visibilities".into(),
            files: vec![path.display().to_string()],
            peaks: vec![],
        });
    }

    let (alpha_half, beta_half) = grid_extents(&resolved);
    let report = RunReport {
        seed,
        parameters: ResolvedParameters {
            wavelength_m: resolved.geometry.wavelength_m,
            carrier_frequency_hz: resolved.geometry.carrier_frequency_hz(),
            range_bin_m: crate::SPEED_OF_LIGHT_M_S * resolved.lfm.sample_interval_s / 2.0,
            samples_per_pri: resolved.lfm.samples_per_pri(),
            pulse_count: resolved.lfm.pulse_count,
            scene_channels: channels.scene_channels().len(),
            has_loopback,
            grid_size: resolved.processing.grid_size,
            alpha_half_extent: alpha_half,
            beta_half_extent: beta_half,
        },
        resolution,
        warnings: resolved.warnings.clone(),
        products,
        timings_ms: timings,
    };
    io::atomic_write(
        &options.out_dir.join("report.json"),
        report.to_json_pretty().as_bytes(),
    )?;
    Ok(report)
}

/// Complex value helper for report assertions in tests.
pub fn magnitude_db(value: Complex64, reference: f64) -> f64 {
    20.0 * (value.norm() / reference).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{linear_array, ElementRole};

    fn small_config() -> ScenarioConfig {
        let lambda = crate::SPEED_OF_LIGHT_M_S / 38e9;
        let mut geom = linear_array(8, lambda / 2.0, lambda);
        // Give the array a loopback channel on the last receiver.
        let last = geom
            .elements
            .iter_mut()
            .filter(|e| e.role == ElementRole::Receiver)
            .last()
            .unwrap();
        last.role = ElementRole::Loopback;
        let json = serde_json::json!({
            "lfm": {
                "carrier_frequency_hz": 38e9,
                "bandwidth_hz": 100e6,
                "pulse_width_s": 10e-6,
                "sample_interval_s": 10e-9,
                "pri_s": 50e-6,
                "pulse_count": 10,
                "total_duration_s": 500e-6
            },
            "geometry": { "elements": serde_json::to_value(&geom.elements).unwrap() },
            "scene": {
                "targets": [ {"range_m": 6.0, "alpha": 0.0, "reflectivity_amplitude": 1.0} ],
                "receiver_noise_power": 1e-6
            },
            "processing": { "grid_size": 65, "max_range_m": 15.0, "seed": 7 },
            "outputs": ["psf", "range_azimuth", "azimuth_elevation", "visibilities_csv",
                        "cube", "raw_cube"]
        });
        ScenarioConfig::from_json_str(&json.to_string()).unwrap()
    }

    #[test]
    fn pipeline_writes_selected_products_and_reports_peaks() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        let report = run_pipeline(&config, &PipelineOptions::new(dir.path())).unwrap();
        for name in [
            "psf",
            "range_azimuth",
            "azimuth_elevation",
            "visibilities",
            "cube",
            "raw_cube",
        ] {
            assert!(report.product(name).is_some(), "missing product {name}");
        }
        for p in &report.products {
            for f in &p.files {
                assert!(std::path::Path::new(f).exists(), "missing file {f}");
            }
        }
        let ra = report.product("range_azimuth").unwrap();
        let peak = &ra.peaks[0];
        // Boresight target at 6 m.
        assert!((peak.range_m.unwrap() - 6.0).abs() <= 1.5);
        assert!(peak.alpha.unwrap().abs() < 0.1);
        assert!(std::path::Path::new(&dir.path().join("report.json")).exists());
    }

    #[test]
    fn same_seed_runs_are_byte_identical() {
        let config = small_config();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_pipeline(&config, &PipelineOptions::new(dir_a.path())).unwrap();
        run_pipeline(&config, &PipelineOptions::new(dir_b.path())).unwrap();
        for name in [
            "range_azimuth.bin",
            "azimuth_elevation.bin",
            "psf.bin",
            "visibilities.csv",
            "cube.bin",
            "raw_cube.bin",
        ] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "product {name} differs between identical runs");
        }
    }

    #[test]
    fn seed_override_changes_noise_products() {
        let config = small_config();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_pipeline(&config, &PipelineOptions::new(dir_a.path())).unwrap();
        let mut opts = PipelineOptions::new(dir_b.path());
        opts.seed_override = Some(12345);
        let report = run_pipeline(&config, &opts).unwrap();
        assert_eq!(report.seed, 12345);
        let a = std::fs::read(dir_a.path().join("raw_cube.bin")).unwrap();
        let b = std::fs::read(dir_b.path().join("raw_cube.bin")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn staged_chain_matches_single_shot() {
        // simulate -> file -> compress -> file -> image equals the
        // pipeline's range-azimuth product byte for byte.
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        let report = run_pipeline(&config, &PipelineOptions::new(dir.path())).unwrap();
        let _ = report;

        let resolved = config.resolve().unwrap();
        let staged = tempfile::tempdir().unwrap();
        // Stage 1: simulate and dump.
        let channels = stage_simulate(&resolved, resolved.processing.seed).unwrap();
        let raw_path = staged.path().join("raw.bin");
        io::write_cube(
            &raw_path,
            &RadarDataCube::from_raw_channels(&channels).unwrap(),
        )
        .unwrap();
        // Stage 2: reload, compress, dump.
        let raw = io::read_cube(&raw_path).unwrap();
        let channels2 = raw.to_raw_channels(true).unwrap();
        let cube = stage_compress(&resolved, &channels2).unwrap();
        let cube_path = staged.path().join("cube.bin");
        io::write_cube(&cube_path, &cube).unwrap();
        // Stage 3: reload and image.
        let cube2 = io::read_cube(&cube_path).unwrap();
        let img = stage_range_azimuth(&resolved, &cube2).unwrap();
        let img_path = staged.path().join("range_azimuth.bin");
        io::write_image(&img_path, &img).unwrap();

        let single = std::fs::read(dir.path().join("range_azimuth.bin")).unwrap();
        let chained = std::fs::read(&img_path).unwrap();
        assert_eq!(single, chained);
    }

    #[test]
    fn per_range_bin_azel_source_localizes_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config();
        config.processing.azel_source = crate::config::AzElSource::RangeBinAuto;
        config.outputs = vec![ProductKind::AzimuthElevation, ProductKind::Cube];
        let report = run_pipeline(&config, &PipelineOptions::new(dir.path())).unwrap();
        let azel = report.product("azimuth_elevation").unwrap();
        // Boresight target: peak near alpha = 0 on the auto-selected bin.
        assert!(azel.peaks[0].alpha.unwrap().abs() < 0.15);
    }

    #[test]
    fn taper_reduces_range_sidelobes() {
        let mut config = small_config();
        config.processing.taper = Taper::Hamming;
        let resolved = config.resolve().unwrap();
        let channels = stage_simulate(&resolved, 7).unwrap();
        let tapered = stage_reference(&resolved, &channels).unwrap();
        let plain = {
            let mut c2 = config.clone();
            c2.processing.taper = Taper::None;
            stage_reference(&c2.resolve().unwrap(), &channels).unwrap()
        };
        // The tapered reference trades peak gain for sidelobe level; both
        // stay unit energy.
        assert!((tapered.energy() - 1.0).abs() < 1e-9);
        assert!((plain.energy() - 1.0).abs() < 1e-9);
        assert!(tapered.samples[0].norm() < plain.samples[0].norm());
    }
}
