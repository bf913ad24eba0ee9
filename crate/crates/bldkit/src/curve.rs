//! Curves, their lengths, and length distortion under a mapping.
//!
//! Lengths of curved images are computed as inscribed-polyline lengths under
//! uniform dyadic refinement. Inscribed lengths are monotone nondecreasing,
//! so the stopping rule (relative increase between successive levels) is a
//! stopping rule only, not a convergence proof; `LengthResult::converged`
//! reflects exactly that rule.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::mapping::MappingSpec;

/// Division guard for zero-length curves.
pub const ZERO_LENGTH_EPS: f64 = 1e-15;
/// Default relative tolerance for image lengths.
pub const DEFAULT_LENGTH_TOL: f64 = 1e-6;
/// Default cap on dyadic refinement (doublings per curve piece).
pub const MAX_DOUBLINGS: u32 = 20;

pub type CurveFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// A curve in ℝⁿ.
#[derive(Clone)]
pub enum CurveSpec {
    /// Ordered vertices, consecutive ones distinct.
    Polyline(Vec<Vec<f64>>),
    /// `map: [0,1] → ℝⁿ`, sampled from `initial_samples` intervals.
    Parametric {
        dimension: usize,
        map: CurveFn,
        initial_samples: usize,
    },
    /// `γ(t) = base + t·direction` for `t ∈ [0, length]`, direction unit.
    Segment {
        base: Vec<f64>,
        direction: Vec<f64>,
        length: f64,
    },
}

impl fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Polyline(v) => write!(f, "Polyline({} vertices)", v.len()),
            CurveSpec::Parametric {
                dimension,
                initial_samples,
                ..
            } => write!(f, "Parametric(n={dimension}, n0={initial_samples})"),
            CurveSpec::Segment {
                base,
                direction,
                length,
            } => write!(f, "Segment({base:?} + t*{direction:?}, len {length})"),
        }
    }
}

impl CurveSpec {
    pub fn polyline(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidConfig(
                "polyline needs at least two vertices".into(),
            ));
        }
        for pair in vertices.windows(2) {
            if geom::dist(&pair[0], &pair[1]) == 0.0 {
                return Err(Error::InvalidConfig(
                    "polyline has repeated consecutive vertices".into(),
                ));
            }
        }
        Ok(CurveSpec::Polyline(vertices))
    }

    pub fn segment(base: Vec<f64>, direction: Vec<f64>, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidConfig(
                "segment length must be positive".into(),
            ));
        }
        let direction = geom::normalized(&direction)
            .ok_or_else(|| Error::InvalidConfig("segment direction must be nonzero".into()))?;
        Ok(CurveSpec::Segment {
            base,
            direction,
            length,
        })
    }

    pub fn segment_between(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let dir = geom::sub(&b, &a);
        let len = geom::norm(&dir);
        Self::segment(a, dir, len)
    }

    pub fn parametric(dimension: usize, initial_samples: usize, map: CurveFn) -> Self {
        CurveSpec::Parametric {
            dimension,
            map,
            initial_samples: initial_samples.max(1),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            CurveSpec::Polyline(v) => v[0].len(),
            CurveSpec::Parametric { dimension, .. } => *dimension,
            CurveSpec::Segment { base, .. } => base.len(),
        }
    }

    /// Point at normalized parameter `t ∈ [0,1]` (polylines by arc fraction
    /// of the parameter, uniform across edges).
    pub fn point_at(&self, t: f64, out: &mut [f64]) {
        match self {
            CurveSpec::Polyline(v) => {
                let edges = (v.len() - 1) as f64;
                let scaled = (t.clamp(0.0, 1.0) * edges).min(edges - f64::EPSILON);
                let idx = scaled.floor() as usize;
                let local = scaled - idx as f64;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = v[idx][k] + local * (v[idx + 1][k] - v[idx][k]);
                }
            }
            CurveSpec::Parametric { map, .. } => map(t, out),
            CurveSpec::Segment {
                base,
                direction,
                length,
            } => {
                let s = t.clamp(0.0, 1.0) * length;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = base[k] + s * direction[k];
                }
            }
        }
    }
}

/// Result of a length computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthResult {
    pub value: f64,
    pub refinement_levels: u32,
    pub converged: bool,
    pub estimated_error: f64,
}

impl LengthResult {
    fn exact(value: f64) -> Self {
        LengthResult {
            value,
            refinement_levels: 0,
            converged: true,
            estimated_error: 0.0,
        }
    }

    fn merge(self, other: LengthResult) -> LengthResult {
        LengthResult {
            value: self.value + other.value,
            refinement_levels: self.refinement_levels.max(other.refinement_levels),
            converged: self.converged && other.converged,
            estimated_error: self.estimated_error + other.estimated_error,
        }
    }
}

/// Inscribed-polyline length of the embedded arc `t ∈ [0,1] ↦ eval(t)`,
/// refined dyadically from `initial` intervals.
fn refine_length<E>(dimension: usize, initial: usize, tol: f64, mut eval: E) -> Result<LengthResult>
where
    E: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let n = dimension;
    let mut count = initial + 1;
    let mut pts = vec![0.0; count * n];
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let (lo, hi) = (i * n, (i + 1) * n);
        eval(t, &mut pts[lo..hi])?;
    }
    let chord_sum = |pts: &[f64], count: usize| -> f64 {
        let mut total = 0.0;
        for i in 1..count {
            let a = &pts[(i - 1) * n..i * n];
            let b = &pts[i * n..(i + 1) * n];
            total += geom::dist(a, b);
        }
        total
    };
    let mut value = chord_sum(&pts, count);
    let mut levels = 0u32;
    loop {
        if levels >= MAX_DOUBLINGS {
            return Ok(LengthResult {
                value,
                refinement_levels: levels,
                converged: false,
                // no stable increase to extrapolate from; report the rule's scale
                estimated_error: tol * value.max(ZERO_LENGTH_EPS),
            });
        }
        let new_count = 2 * (count - 1) + 1;
        let mut refined = vec![0.0; new_count * n];
        for i in 0..new_count {
            let (lo, hi) = (i * n, (i + 1) * n);
            if i % 2 == 0 {
                let (slo, shi) = ((i / 2) * n, (i / 2 + 1) * n);
                refined[lo..hi].copy_from_slice(&pts[slo..shi]);
            } else {
                let t = i as f64 / (new_count - 1) as f64;
                eval(t, &mut refined[lo..hi])?;
            }
        }
        let refined_value = chord_sum(&refined, new_count);
        let increase = (refined_value - value).max(0.0);
        pts = refined;
        count = new_count;
        value = refined_value;
        levels += 1;
        // remaining tail of a (at worst) halving increase sequence
        let estimated_error = 2.0 * increase;
        if estimated_error / value.max(ZERO_LENGTH_EPS) < tol {
            return Ok(LengthResult {
                value,
                refinement_levels: levels,
                converged: true,
                estimated_error,
            });
        }
    }
}

/// Length of the curve itself.
///
/// Polylines and segments are exact; parametric curves refine dyadically
/// until the relative increase between levels drops below `tol`.
pub fn curve_length(curve: &CurveSpec, tol: f64) -> Result<LengthResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("length tolerance must be positive".into()));
    }
    match curve {
        CurveSpec::Polyline(v) => {
            let total = v.windows(2).map(|p| geom::dist(&p[0], &p[1])).sum();
            Ok(LengthResult::exact(total))
        }
        CurveSpec::Segment { length, .. } => Ok(LengthResult::exact(*length)),
        CurveSpec::Parametric {
            dimension,
            map,
            initial_samples,
        } => refine_length(*dimension, *initial_samples, tol, |t, out| {
            map(t, out);
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation { point: out.to_vec() });
            }
            Ok(())
        }),
    }
}

fn eval_image(f: &MappingSpec, t: f64, domain_point: &[f64], out: &mut [f64]) -> Result<()> {
    if !f.domain.contains(domain_point) {
        return Err(Error::DomainExit { t });
    }
    f.eval_into(domain_point, out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            point: domain_point.to_vec(),
        });
    }
    Ok(())
}

/// Length of `f ∘ γ`.
///
/// A polyline is imaged edge by edge (the image of a straight segment need
/// not be straight), so splitting a polyline at a vertex changes nothing.
pub fn image_length(f: &MappingSpec, curve: &CurveSpec, tol: f64) -> Result<LengthResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("length tolerance must be positive".into()));
    }
    let n = f.dimension;
    match curve {
        CurveSpec::Polyline(v) => {
            for (i, vertex) in v.iter().enumerate() {
                if !f.domain.contains(vertex) {
                    return Err(Error::DomainExit {
                        t: i as f64 / (v.len() - 1) as f64,
                    });
                }
            }
            let mut total = LengthResult::exact(0.0);
            let mut scratch = vec![0.0; n];
            for pair in v.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let piece = refine_length(n, 1, tol, |t, out| {
                    for k in 0..n {
                        scratch[k] = a[k] + t * (b[k] - a[k]);
                    }
                    eval_image(f, t, &scratch, out)
                })?;
                total = total.merge(piece);
            }
            Ok(total)
        }
        CurveSpec::Segment {
            base,
            direction,
            length,
        } => {
            let mut scratch = vec![0.0; n];
            refine_length(n, 1, tol, |t, out| {
                for k in 0..n {
                    scratch[k] = base[k] + t * length * direction[k];
                }
                eval_image(f, t, &scratch, out)
            })
        }
        CurveSpec::Parametric {
            dimension,
            map,
            initial_samples,
        } => {
            let mut scratch = vec![0.0; *dimension];
            refine_length(n, *initial_samples, tol, |t, out| {
                map(t, &mut scratch);
                eval_image(f, t, &scratch, out)
            })
        }
    }
}

/// A distortion ratio with a certified enclosure.
///
/// Inscribed lengths underestimate, so the enclosure widens each length by
/// its own error estimate before dividing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
    pub domain_length: LengthResult,
    pub image_length: LengthResult,
}

impl RatioEstimate {
    pub fn converged(&self) -> bool {
        self.domain_length.converged && self.image_length.converged
    }
}

pub fn distortion_ratio_certified(
    f: &MappingSpec,
    curve: &CurveSpec,
    tol: f64,
) -> Result<RatioEstimate> {
    let domain_length = curve_length(curve, tol)?;
    if domain_length.value <= ZERO_LENGTH_EPS {
        return Err(Error::DegenerateCurve(ZERO_LENGTH_EPS));
    }
    let img = image_length(f, curve, tol)?;
    let (lg, eg) = (domain_length.value, domain_length.estimated_error);
    let (li, ei) = (img.value, img.estimated_error);
    Ok(RatioEstimate {
        ratio: li / lg,
        lo: li / (lg + eg),
        hi: (li + ei) / lg.max(ZERO_LENGTH_EPS),
        domain_length,
        image_length: img,
    })
}

/// `ℓ(f∘γ) / ℓ(γ)`.
pub fn distortion_ratio(f: &MappingSpec, curve: &CurveSpec, tol: f64) -> Result<f64> {
    Ok(distortion_ratio_certified(f, curve, tol)?.ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn polyline_length_is_exact() {
        let c = CurveSpec::polyline(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let r = curve_length(&c, 1e-9).unwrap();
        assert_eq!(r.value, 5.0);
        assert!(r.converged);
        assert_eq!(r.estimated_error, 0.0);
    }

    #[test]
    fn segment_length_is_exact() {
        let c = CurveSpec::segment(vec![1.0, 1.0], vec![0.0, 1.0], 0.7).unwrap();
        let r = curve_length(&c, 1e-9).unwrap();
        assert_eq!(r.value, 0.7);
        assert!(r.converged);
    }

    #[test]
    fn circle_circumference() {
        let c = CurveSpec::parametric(
            2,
            16,
            Arc::new(|t: f64, out: &mut [f64]| {
                out[0] = (TAU * t).cos();
                out[1] = (TAU * t).sin();
            }),
        );
        let r = curve_length(&c, 1e-8).unwrap();
        assert!(r.converged);
        assert!((r.value - TAU).abs() < 1e-6, "got {}", r.value);
        assert!(r.value <= TAU + 1e-12, "inscribed length cannot exceed the arc");
    }

    #[test]
    fn folding_halves_nothing() {
        // the image of the straight crossing segment is a V of the same length
        let f = gallery::folding();
        let c = CurveSpec::segment_between(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let r = image_length(&f, &c, 1e-6).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6 * 2.0, "got {}", r.value);
        let ratio = distortion_ratio(&f, &c, 1e-6).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_maps_polyline_to_itself() {
        let f = gallery::identity(2);
        let c = CurveSpec::polyline(vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![-0.3, 0.4]]).unwrap();
        let own = curve_length(&c, 1e-9).unwrap().value;
        let img = image_length(&f, &c, 1e-9).unwrap();
        assert_relative_eq!(img.value, own, max_relative = 1e-9);
    }

    #[test]
    fn linear_segment_image() {
        let f = gallery::diagonal(&[2.0, 0.5]).unwrap();
        let c = CurveSpec::segment_between(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let r = image_length(&f, &c, 1e-9).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
        let along_y = CurveSpec::segment(vec![0.0, -0.5], vec![0.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(
            distortion_ratio(&f, &along_y, 1e-9).unwrap(),
            0.5,
            max_relative = 1e-9
        );
    }

    #[test]
    fn identity_circle_ratio() {
        let f = gallery::identity(2);
        let circle = CurveSpec::parametric(
            2,
            16,
            Arc::new(|t: f64, out: &mut [f64]| {
                out[0] = 0.8 * (TAU * t).cos();
                out[1] = 0.8 * (TAU * t).sin();
            }),
        );
        let est = distortion_ratio_certified(&f, &circle, 1e-8).unwrap();
        assert!((est.ratio - 1.0).abs() < 1e-8);
        assert!(est.lo <= 1.0 && 1.0 <= est.hi + 1e-12);
    }

    #[test]
    fn domain_exit_reports_parameter() {
        let f = gallery::identity(2);
        let c = CurveSpec::segment_between(vec![0.0, 0.0], vec![3.0, 0.0]).unwrap();
        match image_length(&f, &c, 1e-6) {
            Err(Error::DomainExit { t }) => assert!(t > 0.3 && t <= 1.0),
            other => panic!("expected domain exit, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_curve_rejected() {
        let f = gallery::identity(2);
        let c = CurveSpec::parametric(
            2,
            4,
            Arc::new(|_t: f64, out: &mut [f64]| {
                out[0] = 0.1;
                out[1] = 0.1;
            }),
        );
        assert!(matches!(
            distortion_ratio(&f, &c, 1e-6),
            Err(Error::DegenerateCurve(_))
        ));
    }

    #[test]
    fn reparametrized_segment_agrees() {
        let f = gallery::folding();
        let tol = 1e-6;
        let seg = CurveSpec::segment(vec![-0.6, 0.1], vec![1.0, 0.0], 1.2).unwrap();
        let par = CurveSpec::parametric(
            2,
            1,
            Arc::new(|t: f64, out: &mut [f64]| {
                out[0] = -0.6 + 1.2 * t;
                out[1] = 0.1;
            }),
        );
        let a = distortion_ratio(&f, &seg, tol).unwrap();
        let b = distortion_ratio(&f, &par, tol).unwrap();
        assert!((a - b).abs() <= 2.0 * tol, "{a} vs {b}");
    }

    #[test]
    fn split_polyline_preserves_totals() {
        let f = gallery::shear(0.5).unwrap();
        let tol = 1e-7;
        let whole = CurveSpec::polyline(vec![vec![-0.5, -0.5], vec![0.5, 0.25]]).unwrap();
        let split = CurveSpec::polyline(vec![
            vec![-0.5, -0.5],
            vec![0.0, -0.125],
            vec![0.5, 0.25],
        ])
        .unwrap();
        let lw = curve_length(&whole, tol).unwrap().value;
        let ls = curve_length(&split, tol).unwrap().value;
        assert_relative_eq!(lw, ls, max_relative = 1e-12);
        let iw = image_length(&f, &whole, tol).unwrap().value;
        let is = image_length(&f, &split, tol).unwrap().value;
        assert!((iw - is).abs() <= 2.0 * tol * iw.max(1.0));
    }

    #[test]
    fn quarter_turn_arc_under_winding() {
        // winding doubles angular speed: a quarter arc at radius 1 maps onto
        // a half arc, doubling the length
        let f = gallery::winding(2).unwrap();
        let arc = CurveSpec::parametric(
            2,
            16,
            Arc::new(|t: f64, out: &mut [f64]| {
                let th = 0.25 * PI * t + 0.1;
                out[0] = th.cos();
                out[1] = th.sin();
            }),
        );
        let est = distortion_ratio_certified(&f, &arc, 1e-8).unwrap();
        assert!((est.ratio - 2.0).abs() < 1e-5, "got {}", est.ratio);
    }
}
