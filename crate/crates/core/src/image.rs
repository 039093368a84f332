//! Intensity grids over direction cosines or (range, direction cosine).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex-valued image over two axes, row-major `[axis1.len() x axis2.len()]`.
///
/// For an azimuth-elevation image `axis1` holds alpha and `axis2` beta
/// (direction cosines); for a range-azimuth image `axis1` holds range in
/// meters and `axis2` alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// One detected local maximum of an image.
#[derive(Debug, Clone, Copy)]
pub struct ImagePeak {
    pub index1: usize,
    pub index2: usize,
    pub axis1_value: f64,
    pub axis2_value: f64,
    pub magnitude: f64,
}

impl ImageGrid {
    pub fn zeros(axis1: Vec<f64>, axis2: Vec<f64>) -> Result<Self> {
        if axis1.is_empty() || axis2.is_empty() {
            return Err(Error::Empty("image axes must be non-empty".into()));
        }
        let values = vec![Complex64::new(0.0, 0.0); axis1.len() * axis2.len()];
        Ok(Self {
            axis1,
            axis2,
            values,
        })
    }

    pub fn from_values(axis1: Vec<f64>, axis2: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::Mismatch(format!(
                "value count {} does not match {} x {} grid",
                values.len(),
                axis1.len(),
                axis2.len()
            )));
        }
        Ok(Self {
            axis1,
            axis2,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.axis1.len()
    }

    pub fn cols(&self) -> usize {
        self.axis2.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.axis2.len() + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.values[i * self.axis2.len() + j]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Location and value of the global magnitude maximum.
    pub fn peak(&self) -> ImagePeak {
        let mut best = (0usize, 0.0f64);
        for (i, v) in self.values.iter().enumerate() {
            let m = v.norm();
            if m > best.1 {
                best = (i, m);
            }
        }
        let (index1, index2) = (best.0 / self.axis2.len(), best.0 % self.axis2.len());
        ImagePeak {
            index1,
            index2,
            axis1_value: self.axis1[index1],
            axis2_value: self.axis2[index2],
            magnitude: best.1,
        }
    }

    /// Median of the magnitude image. Used as the background level for
    /// peak-to-background reporting.
    pub fn median_magnitude(&self) -> f64 {
        let mut mags = self.magnitude();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = mags.len();
        if n % 2 == 1 {
            mags[n / 2]
        } else {
            0.5 * (mags[n / 2 - 1] + mags[n / 2])
        }
    }

    /// Greedy extraction of up to `count` local maxima. After accepting a
    /// peak, cells within `excl1` rows AND `excl2` columns of it are
    /// excluded, so nearby responses that differ strongly along one axis
    /// (e.g. adjacent range bins at distinct angles) are still reported.
    pub fn dominant_peaks(&self, count: usize, excl1: usize, excl2: usize) -> Vec<ImagePeak> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .norm()
                .partial_cmp(&self.values[a].norm())
                .unwrap()
        });
        let cols = self.axis2.len();
        let mut peaks: Vec<ImagePeak> = Vec::new();
        for idx in order {
            if peaks.len() >= count {
                break;
            }
            let (i, j) = (idx / cols, idx % cols);
            let masked = peaks
                .iter()
                .any(|p| i.abs_diff(p.index1) <= excl1 && j.abs_diff(p.index2) <= excl2);
            if masked {
                continue;
            }
            peaks.push(ImagePeak {
                index1: i,
                index2: j,
                axis1_value: self.axis1[i],
                axis2_value: self.axis2[j],
                magnitude: self.values[idx].norm(),
            });
        }
        peaks
    }
}

/// `n` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let step = (max - min) / (n - 1) as f64;
    (0..n).map(|i| min + i as f64 * step).collect()
}

/// Centers of `n` equal cells tiling `[min, max]`.
pub fn cell_centers(min: f64, max: f64, n: usize) -> Vec<f64> {
    let step = (max - min) / n as f64;
    (0..n).map(|i| min + (i as f64 + 0.5) * step).collect()
}
