//! Product file codecs.
//!
//! Image grid ("AIMG1"): magic, little-endian u32 rows and cols, four f64
//! axis extents (axis1 min/max, axis2 min/max), then row-major complex
//! samples as f32 re / f32 im pairs. Axes are regenerated as uniform
//! linspaces between the stored extents on read, so only uniform grids
//! round-trip; all grids produced by this crate are uniform.
//!
//! Data cube ("AIMC1"): magic, u32 triple (range, pulse, channel), f64
//! range_bin_m, f64 pri_s, then interleaved f32 complex samples,
//! channel-major (channel outermost, then pulse, then range). Channel ids
//! are not stored; readers assign 0..n-1.
//!
//! Visibility CSV: header `u,v,re,im,multiplicity`, one sample per line,
//! shortest-round-trip float formatting so rewriting a parsed file is
//! byte-identical.
//!
//! All writers go through a temp file in the target directory plus an
//! atomic rename.

use byteorder::{ByteOrder, LittleEndian};
use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::compression::RadarDataCube;
use crate::error::{Error, Result};
use crate::image::{linspace, ImageGrid};
use crate::interferometry::{VisibilitySample, VisibilitySet, VisibilitySource};

const IMAGE_MAGIC: &[u8; 5] = b"AIMG1";
const CUBE_MAGIC: &[u8; 5] = b"AIMC1";

/// Write `bytes` to `path` via a temp file and rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("path {} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    let mut b = [0u8; 4];
    LittleEndian::write_u32(&mut b, v);
    buf.extend_from_slice(&b);
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    let mut b = [0u8; 8];
    LittleEndian::write_f64(&mut b, v);
    buf.extend_from_slice(&b);
}

fn push_c32(buf: &mut Vec<u8>, v: Complex64) {
    let mut b = [0u8; 4];
    LittleEndian::write_f32(&mut b, v.re as f32);
    buf.extend_from_slice(&b);
    LittleEndian::write_f32(&mut b, v.im as f32);
    buf.extend_from_slice(&b);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("file truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(LittleEndian::read_u32(self.take(4)?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(LittleEndian::read_f64(self.take(8)?))
    }

    fn c32(&mut self) -> Result<Complex64> {
        let s = self.take(8)?;
        Ok(Complex64::new(
            f64::from(LittleEndian::read_f32(&s[..4])),
            f64::from(LittleEndian::read_f32(&s[4..])),
        ))
    }
}

pub fn image_to_bytes(img: &ImageGrid) -> Vec<u8> {
    let mut buf = Vec::with_capacity(5 + 8 + 32 + img.values.len() * 8);
    buf.extend_from_slice(IMAGE_MAGIC);
    push_u32(&mut buf, img.rows() as u32);
    push_u32(&mut buf, img.cols() as u32);
    push_f64(&mut buf, *img.axis1.first().unwrap());
    push_f64(&mut buf, *img.axis1.last().unwrap());
    push_f64(&mut buf, *img.axis2.first().unwrap());
    push_f64(&mut buf, *img.axis2.last().unwrap());
    for v in &img.values {
        push_c32(&mut buf, *v);
    }
    buf
}

pub fn image_from_bytes(bytes: &[u8]) -> Result<ImageGrid> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(5)? != IMAGE_MAGIC {
        return Err(Error::Format("missing AIMG1 magic".into()));
    }
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let a1 = (r.f64()?, r.f64()?);
    let a2 = (r.f64()?, r.f64()?);
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        values.push(r.c32()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after image payload".into()));
    }
    ImageGrid::from_values(
        linspace(a1.0, a1.1, rows),
        linspace(a2.0, a2.1, cols),
        values,
    )
}

pub fn write_image(path: &Path, img: &ImageGrid) -> Result<()> {
    atomic_write(path, &image_to_bytes(img))
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    image_from_bytes(&fs::read(path)?)
}

pub fn cube_to_bytes(cube: &RadarDataCube) -> Vec<u8> {
    let mut buf = Vec::with_capacity(5 + 12 + 16 + cube.data.len() * 8);
    buf.extend_from_slice(CUBE_MAGIC);
    push_u32(&mut buf, cube.n_range as u32);
    push_u32(&mut buf, cube.n_pulse as u32);
    push_u32(&mut buf, cube.n_channel as u32);
    push_f64(&mut buf, cube.range_bin_m);
    push_f64(&mut buf, cube.pri_s);
    for v in &cube.data {
        push_c32(&mut buf, *v);
    }
    buf
}

pub fn cube_from_bytes(bytes: &[u8]) -> Result<RadarDataCube> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(5)? != CUBE_MAGIC {
        return Err(Error::Format("missing AIMC1 magic".into()));
    }
    let n_range = r.u32()? as usize;
    let n_pulse = r.u32()? as usize;
    let n_channel = r.u32()? as usize;
    let range_bin_m = r.f64()?;
    let pri_s = r.f64()?;
    let count = n_range
        .checked_mul(n_pulse)
        .and_then(|x| x.checked_mul(n_channel))
        .ok_or_else(|| Error::Format("cube dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(r.c32()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after cube payload".into()));
    }
    Ok(RadarDataCube {
        n_range,
        n_pulse,
        n_channel,
        range_bin_m,
        pri_s,
        channel_ids: (0..n_channel as u32).collect(),
        data,
    })
}

pub fn write_cube(path: &Path, cube: &RadarDataCube) -> Result<()> {
    atomic_write(path, &cube_to_bytes(cube))
}

pub fn read_cube(path: &Path) -> Result<RadarDataCube> {
    cube_from_bytes(&fs::read(path)?)
}

/// Pass a cube through the file encoding without touching disk. Stage
/// boundaries inside the single-shot pipeline use this so chained
/// standalone stages and one `pipeline` invocation produce identical bytes.
pub fn quantize_cube(cube: &RadarDataCube) -> Result<RadarDataCube> {
    let mut q = cube_from_bytes(&cube_to_bytes(cube))?;
    q.channel_ids = cube.channel_ids.clone();
    Ok(q)
}

pub fn visibilities_to_csv(vis: &VisibilitySet) -> String {
    let mut out = String::from("u,v,re,im,multiplicity\n");
    for s in &vis.samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.u, s.v, s.value.re, s.value.im, s.multiplicity
        ));
    }
    out
}

pub fn visibilities_from_csv(text: &str) -> Result<VisibilitySet> {
    let mut lines = text.lines();
    match lines.next() {
        Some("u,v,re,im,multiplicity") => {}
        _ => return Err(Error::Format("missing visibility CSV header".into())),
    }
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Format(format!(
                "visibility CSV line {}: expected 5 fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Format(format!("visibility CSV line {}: {e}", lineno + 2)))
        };
        samples.push(VisibilitySample {
            u: parse(fields[0])?,
            v: parse(fields[1])?,
            value: Complex64::new(parse(fields[2])?, parse(fields[3])?),
            multiplicity: fields[4]
                .parse()
                .map_err(|e| Error::Format(format!("visibility CSV line {}: {e}", lineno + 2)))?,
        });
    }
    Ok(VisibilitySet {
        samples,
        source: VisibilitySource::RawCorrelation,
        integration_samples: 0,
    })
}

pub fn write_visibilities_csv(path: &Path, vis: &VisibilitySet) -> Result<()> {
    atomic_write(path, visibilities_to_csv(vis).as_bytes())
}

pub fn read_visibilities_csv(path: &Path) -> Result<VisibilitySet> {
    visibilities_from_csv(&fs::read_to_string(path)?)
}

/// 8-bit binary PGM of the magnitude image: dB-scaled, normalized to the
/// peak, floored at `floor_db` (normally -40).
pub fn image_to_pgm(img: &ImageGrid, floor_db: f64) -> Vec<u8> {
    let mags = img.magnitude();
    let peak = mags.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    for m in mags {
        let pixel = if peak <= 0.0 || m <= 0.0 {
            0u8
        } else {
            let db = 20.0 * (m / peak).log10();
            let scaled = (db - floor_db) / (-floor_db) * 255.0;
            scaled.clamp(0.0, 255.0).round() as u8
        };
        out.push(pixel);
    }
    out
}

pub fn write_pgm(path: &Path, img: &ImageGrid, floor_db: f64) -> Result<()> {
    atomic_write(path, &image_to_pgm(img, floor_db))
}

/// Plain-text CSV of an image: axis2 values across the header row, axis1
/// values leading each line, cells as `re+imj`.
pub fn image_to_csv(img: &ImageGrid) -> String {
    let mut out = String::from("axis1\\axis2");
    for b in &img.axis2 {
        out.push_str(&format!(",{b}"));
    }
    out.push('\n');
    for (i, a) in img.axis1.iter().enumerate() {
        out.push_str(&format!("{a}"));
        for j in 0..img.cols() {
            let v = img.at(i, j);
            out.push_str(&format!(
                ",{}{}{}j",
                v.re,
                if v.im < 0.0 { "" } else { "+" },
                v.im
            ));
        }
        out.push('\n');
    }
    out
}

pub fn write_image_csv(path: &Path, img: &ImageGrid) -> Result<()> {
    atomic_write(path, image_to_csv(img).as_bytes())
}
