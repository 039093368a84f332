//! Hybrid 3D millimeter-wave imaging simulator.
//!
//! Cross-range (azimuth/elevation) imaging comes from Fourier-domain
//! interferometry over a sparse receive array illuminated by incoherent
//! noise transmitters; down-range imaging comes from pulse compression of a
//! known LFM waveform transmitted alongside the noise. The crate covers
//! waveform generation, array geometry and PSF analysis, received-signal
//! synthesis, matched filtering into a radar data cube, visibility
//! estimation and image reconstruction, plus the scenario pipeline and file
//! formats behind the `aim3d` CLI.

pub mod compression;
pub mod config;
pub mod error;
pub mod geometry;
pub mod image;
pub mod interferometry;
pub mod io;
pub mod pipeline;
pub mod scene;
pub mod waveform;

/// Exact SI speed of light, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

pub use error::{Error, Result};
