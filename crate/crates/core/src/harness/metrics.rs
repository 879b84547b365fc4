use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::Area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{estimates} estimates for {truths} truths")]
pub struct LengthMismatch {
    pub estimates: usize,
    pub truths: usize,
}

/// `sqrt(Σ |x̂_i - x_i|² / N)` over 3D positions matched by index.
pub fn compute_rms(estimates: &[[f64; 3]], truths: &[[f64; 3]]) -> Result<f64, LengthMismatch> {
    if estimates.len() != truths.len() {
        return Err(LengthMismatch {
            estimates: estimates.len(),
            truths: truths.len(),
        });
    }
    if estimates.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (0..3).map(|a| (e[a] - t[a]).powi(2)).sum::<f64>())
        .sum();
    Ok((sum / estimates.len() as f64).sqrt())
}

/// Mean, extremes and median of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self {
            count: n,
            mean: sorted.iter().sum::<f64>() / n as f64,
            min: sorted[0],
            max: sorted[n - 1],
            median,
        })
    }
}

/// 2D visit counts of observer positions on a square grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMap {
    pub origin: [f64; 2],
    pub bin_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `counts[iy * nx + ix]`.
    pub counts: Vec<u64>,
}

impl HeatMap {
    pub fn new(area: &Area, bin_size: f64) -> Self {
        let nx = ((area.width() / bin_size).ceil() as usize).max(1);
        let ny = ((area.height() / bin_size).ceil() as usize).max(1);
        Self {
            origin: [area.x_min, area.y_min],
            bin_size,
            nx,
            ny,
            counts: vec![0; nx * ny],
        }
    }

    /// Bin of a point; points on the far edge fall into the last bin.
    pub fn bin_of(&self, x: f64, y: f64) -> (usize, usize) {
        let ix = ((x - self.origin[0]) / self.bin_size).floor().max(0.0) as usize;
        let iy = ((y - self.origin[1]) / self.bin_size).floor().max(0.0) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    pub fn add(&mut self, x: f64, y: f64) {
        let (ix, iy) = self.bin_of(x, y);
        self.counts[iy * self.nx + ix] += 1;
    }

    pub fn get(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.nx + ix]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Visits in bins lying entirely within `radius` of `center`.
    pub fn visits_within(&self, center: [f64; 2], radius: f64) -> u64 {
        let mut total = 0;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let x0 = self.origin[0] + ix as f64 * self.bin_size;
                let y0 = self.origin[1] + iy as f64 * self.bin_size;
                let far_x = (x0 - center[0]).abs().max((x0 + self.bin_size - center[0]).abs());
                let far_y = (y0 - center[1]).abs().max((y0 + self.bin_size - center[1]).abs());
                if far_x.hypot(far_y) < radius {
                    total += self.get(ix, iy);
                }
            }
        }
        total
    }
}
