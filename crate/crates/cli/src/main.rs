//! `aim3d`: scenario-driven front end for the imaging pipeline.
//!
//! Subcommands run the full chain (`pipeline`) or one stage at a time
//! (`psf`, `simulate`, `compress`, `image`), exchanging intermediate
//! artifacts through the binary cube and image formats so every stage is
//! inspectable and replayable.
//!
//! Exit codes: 2 config/schema violation, 3 processing failure, 4 I/O or
//! file-format failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aim3d_core::compression::RadarDataCube;
use aim3d_core::config::{AzElSource, ReferenceSource, ScenarioConfig};
use aim3d_core::error::Error;
use aim3d_core::io;
use aim3d_core::pipeline::{
    self, FileFormat, PipelineOptions, ProductReport, RunReport, PGM_FLOOR_DB,
};

#[derive(Parser)]
#[command(
    name = "aim3d",
    about = "Hybrid interferometric / pulse-compression 3D imaging simulator",
    version
)]
struct Cli {
    /// Suppress the JSON report on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Bin,
    Csv,
    Pgm,
    All,
}

impl FormatArg {
    fn formats(self) -> Vec<FileFormat> {
        match self {
            FormatArg::Bin => vec![FileFormat::Bin],
            FormatArg::Csv => vec![FileFormat::Csv],
            FormatArg::Pgm => vec![FileFormat::Pgm],
            FormatArg::All => FileFormat::all(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RefArg {
    /// Loopback when present, ideal otherwise.
    Auto,
    /// Ideal generated waveform.
    Lfm,
    /// Require the loopback capture.
    Loopback,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ImageMode {
    RangeAzimuth,
    AzEl,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full waveform -> scene -> compression -> imaging chain.
    Pipeline {
        #[command(flatten)]
        config: ConfigArg,
        /// Directory for product files and report.json.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override processing.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override processing.grid_size.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Bin)]
        format: FormatArg,
    },
    /// Point spread function of the configured geometry.
    Psf {
        #[command(flatten)]
        config: ConfigArg,
        /// Output image path (extension follows --format).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Bin)]
        format: FormatArg,
    },
    /// Synthesize receiver captures and dump them as a raw (single-pulse)
    /// cube, loopback channel last.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Matched-filter a raw cube into the calibrated radar data cube.
    Compress {
        /// Raw cube from `simulate`.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Matched-filter reference selection.
        #[arg(long = "ref", value_enum)]
        reference: Option<RefArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an image from a cube file.
    Image {
        /// Compressed cube (range-azimuth, per-bin az-el) or raw cube
        /// (az-el from raw correlation).
        #[arg(long)]
        cube: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum)]
        mode: ImageMode,
        /// Range bin for the per-bin az-el path (defaults to the scenario's
        /// azel_source).
        #[arg(long)]
        range_bin: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Bin)]
        format: FormatArg,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        Error::Io(_) | Error::Format(_) => 4,
        _ => 3,
    }
}

fn emit_report(report: &RunReport, quiet: bool) {
    if !quiet {
        println!("{}", report.to_json_pretty());
    }
}

fn emit_product(product: &ProductReport, quiet: bool) {
    if !quiet {
        println!(
            "{}",
            serde_json::to_string_pretty(product).expect("product serializes")
        );
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    ScenarioConfig::from_json_file(path)
}

/// Write one image in the selected formats, returning the files written.
fn write_image_as(
    out: &Path,
    img: &aim3d_core::image::ImageGrid,
    formats: &[FileFormat],
) -> Result<Vec<String>, Error> {
    let mut files = Vec::new();
    for fmt in formats {
        let path = match fmt {
            FileFormat::Bin => out.with_extension("bin"),
            FileFormat::Csv => out.with_extension("csv"),
            FileFormat::Pgm => out.with_extension("pgm"),
        };
        match fmt {
            FileFormat::Bin => io::write_image(&path, img)?,
            FileFormat::Csv => io::write_image_csv(&path, img)?,
            FileFormat::Pgm => io::write_pgm(&path, img, PGM_FLOOR_DB)?,
        }
        files.push(path.display().to_string());
    }
    Ok(files)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pipeline {
            config,
            out_dir,
            seed,
            grid,
            format,
        } => {
            let cfg = load_config(&config.config)?;
            let options = PipelineOptions {
                out_dir,
                formats: format.formats(),
                seed_override: seed,
                grid_override: grid,
            };
            let report = pipeline::run_pipeline(&cfg, &options)?;
            emit_report(&report, cli.quiet);
            Ok(())
        }
        Command::Psf {
            config,
            out,
            grid,
            format,
        } => {
            let cfg = load_config(&config.config)?;
            let mut resolved = cfg.resolve()?;
            if let Some(g) = grid {
                resolved.processing.grid_size = g;
            }
            let img = pipeline::stage_psf(&resolved)?;
            let files = write_image_as(&out, &img, &format.formats())?;
            let peak = img.peak();
            emit_product(
                &ProductReport {
                    name: "psf".into(),
                    files,
                    peaks: vec![aim3d_core::pipeline::PeakReport {
                        range_m: None,
                        alpha: Some(peak.axis1_value),
                        beta: Some(peak.axis2_value),
                        magnitude: peak.magnitude,
                        peak_to_background_db: None,
                    }],
                },
                cli.quiet,
            );
            Ok(())
        }
        Command::Simulate { config, out, seed } => {
            let cfg = load_config(&config.config)?;
            let mut resolved = cfg.resolve()?;
            if let Some(s) = seed {
                resolved.processing.seed = s;
            }
            let channels = pipeline::stage_simulate(&resolved, resolved.processing.seed)?;
            let cube = RadarDataCube::from_raw_channels(&channels)?;
            io::write_cube(&out, &cube)?;
            emit_product(
                &ProductReport {
                    name: "raw_cube".into(),
                    files: vec![out.display().to_string()],
                    peaks: vec![],
                },
                cli.quiet,
            );
            Ok(())
        }
        Command::Compress {
            input,
            config,
            reference,
            out,
        } => {
            let cfg = load_config(&config.config)?;
            let mut resolved = cfg.resolve()?;
            if let Some(r) = reference {
                resolved.processing.reference = match r {
                    RefArg::Auto => ReferenceSource::Auto,
                    RefArg::Lfm => ReferenceSource::Ideal,
                    RefArg::Loopback => ReferenceSource::Loopback,
                };
            }
            let raw = io::read_cube(&input)?;
            let has_loopback = resolved.geometry.loopback().is_some();
            let channels = raw.to_raw_channels(has_loopback)?;
            let cube = pipeline::stage_compress(&resolved, &channels)?;
            io::write_cube(&out, &cube)?;
            emit_product(
                &ProductReport {
                    name: "cube".into(),
                    files: vec![out.display().to_string()],
                    peaks: vec![],
                },
                cli.quiet,
            );
            Ok(())
        }
        Command::Image {
            cube,
            config,
            mode,
            range_bin,
            out,
            grid,
            format,
        } => {
            let cfg = load_config(&config.config)?;
            let mut resolved = cfg.resolve()?;
            if let Some(g) = grid {
                resolved.processing.grid_size = g;
            }
            let cube_data = io::read_cube(&cube)?;
            let (name, img) = match mode {
                ImageMode::RangeAzimuth => (
                    "range_azimuth",
                    pipeline::stage_range_azimuth(&resolved, &cube_data)?,
                ),
                ImageMode::AzEl => {
                    if let Some(bin) = range_bin {
                        resolved.processing.azel_source = AzElSource::RangeBin(bin);
                    }
                    let raw_channels = if cube_data.n_pulse == 1 {
                        let has_loopback = resolved.geometry.loopback().is_some();
                        Some(cube_data.to_raw_channels(has_loopback)?)
                    } else {
                        None
                    };
                    let (img, _) = pipeline::stage_azimuth_elevation(
                        &resolved,
                        raw_channels.as_ref(),
                        Some(&cube_data),
                    )?;
                    ("azimuth_elevation", img)
                }
            };
            let files = write_image_as(&out, &img, &format.formats())?;
            let peak = img.peak();
            let median = img.median_magnitude();
            let is_range = mode == ImageMode::RangeAzimuth;
            emit_product(
                &ProductReport {
                    name: name.into(),
                    files,
                    peaks: vec![aim3d_core::pipeline::PeakReport {
                        range_m: is_range.then_some(peak.axis1_value),
                        alpha: Some(if is_range {
                            peak.axis2_value
                        } else {
                            peak.axis1_value
                        }),
                        beta: (!is_range).then_some(peak.axis2_value),
                        magnitude: peak.magnitude,
                        peak_to_background_db: (median > 0.0)
                            .then(|| 20.0 * (peak.magnitude / median).log10()),
                    }],
                },
                cli.quiet,
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
