//! Solid cones: membership and Lebesgue measure.
//!
//! `Cone(r, δ)` is the set of vectors of norm at most `r` making an angle of
//! at most `δ` with a fixed unit axis, anchored at an apex. Its measure
//! scales as `rⁿ`; closed forms cover n ≤ 3 and seeded rejection sampling
//! covers higher dimensions.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;

pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub apex: Vec<f64>,
    /// Unit axis direction.
    pub axis: Vec<f64>,
    pub radius: f64,
    /// Half-angle in (0, π].
    pub half_angle: f64,
}

impl ConeSpec {
    pub fn new(apex: Vec<f64>, axis: Vec<f64>, radius: f64, half_angle: f64) -> Result<Self> {
        if apex.len() != axis.len() || apex.is_empty() {
            return Err(Error::InvalidConfig(
                "cone apex and axis must share a dimension n >= 1".into(),
            ));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig("cone radius must be positive".into()));
        }
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::PI) {
            return Err(Error::InvalidConfig(
                "cone half-angle must lie in (0, pi]".into(),
            ));
        }
        let axis = geom::normalized(&axis)
            .ok_or_else(|| Error::InvalidConfig("cone axis must be nonzero".into()))?;
        Ok(ConeSpec {
            apex,
            axis,
            radius,
            half_angle,
        })
    }

    pub fn dimension(&self) -> usize {
        self.apex.len()
    }
}

/// Closed membership test; the apex itself belongs to the cone.
pub fn cone_contains(cone: &ConeSpec, h: &[f64]) -> bool {
    let rel = geom::sub(h, &cone.apex);
    let norm = geom::norm(&rel);
    if norm == 0.0 {
        return true;
    }
    if norm > cone.radius {
        return false;
    }
    geom::angle_between(&rel, &cone.axis) <= cone.half_angle
}

/// How a measure value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeMeasure {
    pub value: f64,
    pub method: MeasureMethod,
    /// One Monte Carlo standard error; zero for closed forms.
    pub std_error: f64,
    pub samples: u64,
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = π^(n/2) / Γ(n/2 + 1), via the two-step recurrence V_n = 2π/n · V_{n−2}
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Lebesgue measure of the cone, with defaults for the sampled path.
pub fn cone_measure(cone: &ConeSpec) -> ConeMeasure {
    cone_measure_with(cone, DEFAULT_MC_SAMPLES, 0)
}

/// Lebesgue measure of the cone; `samples`/`seed` control the Monte Carlo
/// path used for n ≥ 4 (closed forms ignore them).
pub fn cone_measure_with(cone: &ConeSpec, samples: u64, seed: u64) -> ConeMeasure {
    let n = cone.dimension();
    let r = cone.radius;
    let d = cone.half_angle;
    let closed = match n {
        1 => Some(if d >= std::f64::consts::PI { 2.0 * r } else { r }),
        2 => Some(d * r * r),
        3 => Some(2.0 * std::f64::consts::PI / 3.0 * (1.0 - d.cos()) * r.powi(3)),
        _ => None,
    };
    if let Some(value) = closed {
        return ConeMeasure {
            value,
            method: MeasureMethod::ClosedForm,
            std_error: 0.0,
            samples: 0,
        };
    }

    // Rejection sampling in the bounding ball. Only the direction matters for
    // acceptance, so draw uniform directions and count those inside the cap.
    let mut rng = StdRng::seed_from_u64(seed);
    let cos_bound = d.cos();
    let mut hits: u64 = 0;
    let mut dir = vec![0.0; n];
    for _ in 0..samples {
        loop {
            for x in dir.iter_mut() {
                *x = standard_normal(&mut rng);
            }
            if geom::norm(&dir) > 1e-12 {
                break;
            }
        }
        let cos = geom::dot(&dir, &cone.axis) / geom::norm(&dir);
        if cos >= cos_bound {
            hits += 1;
        }
    }
    let ball = unit_ball_volume(n) * r.powi(n as i32);
    let p = hits as f64 / samples as f64;
    ConeMeasure {
        value: ball * p,
        method: MeasureMethod::MonteCarlo,
        std_error: ball * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    }
}

/// Box–Muller; avoids pulling in a distributions crate for one density.
fn standard_normal(rng: &mut StdRng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}
