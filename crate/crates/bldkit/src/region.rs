use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;

/// A compact evaluation domain: an axis-aligned box or a closed ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box {
        center: Vec<f64>,
        half_widths: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl Region {
    /// Axis-aligned box given per-axis `[lo, hi]` bounds.
    pub fn bounding_box(bounds: &[(f64, f64)]) -> Result<Self> {
        let center: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let half_widths: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (hi - lo)).collect();
        Self::aligned_box(center, half_widths)
    }

    pub fn aligned_box(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        if center.is_empty() || center.len() != half_widths.len() {
            return Err(Error::InvalidConfig(
                "box center and extents must share a dimension n >= 1".into(),
            ));
        }
        if half_widths.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidConfig(
                "box extents must be strictly positive".into(),
            ));
        }
        Ok(Region::Box {
            center,
            half_widths,
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidConfig("ball needs dimension n >= 1".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(
                "ball radius must be strictly positive".into(),
            ));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Region::Box { center, .. } | Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Region::Box { center, .. } | Region::Ball { center, .. } => center,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Region::Box { half_widths, .. } => 2.0 * geom::norm(half_widths),
            Region::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Distance from `x` to the boundary; negative when `x` lies outside.
    pub fn interior_margin(&self, x: &[f64]) -> f64 {
        match self {
            Region::Box {
                center,
                half_widths,
            } => x
                .iter()
                .zip(center)
                .zip(half_widths)
                .map(|((xi, ci), wi)| wi - (xi - ci).abs())
                .fold(f64::INFINITY, f64::min),
            Region::Ball { center, radius } => radius - geom::dist(x, center),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.interior_margin(x) >= 0.0
    }

    /// Per-axis `[lo, hi]` of the smallest enclosing box.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Region::Box {
                center,
                half_widths,
            } => center
                .iter()
                .zip(half_widths)
                .map(|(c, w)| (c - w, c + w))
                .collect(),
            Region::Ball { center, radius } => {
                center.iter().map(|c| (c - radius, c + radius)).collect()
            }
        }
    }

    /// Uniform lattice of `resolution` points per axis, inset by `margin`,
    /// restricted to points actually inside the region.
    pub fn grid_points(&self, resolution: usize, margin: f64) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let bounds = self.bounds();
        let axes: Vec<Vec<f64>> = bounds
            .iter()
            .map(|(lo, hi)| {
                (0..resolution)
                    .map(|i| {
                        let lo = lo + margin;
                        let hi = hi - margin;
                        if resolution == 1 {
                            0.5 * (lo + hi)
                        } else {
                            lo + (hi - lo) * i as f64 / (resolution - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let mut points = Vec::new();
        let mut index = vec![0usize; n];
        loop {
            let p: Vec<f64> = (0..n).map(|a| axes[a][index[a]]).collect();
            if self.interior_margin(&p) >= margin {
                points.push(p);
            }
            // odometer increment over the n-dimensional index
            let mut axis = 0;
            loop {
                index[axis] += 1;
                if index[axis] < resolution {
                    break;
                }
                index[axis] = 0;
                axis += 1;
                if axis == n {
                    return points;
                }
            }
        }
    }
}
