//! Mapping representation and pointwise derivative sampling.
//!
//! A [`MappingSpec`] bundles an evaluable map `ℝⁿ → ℝⁿ` with its domain, an
//! optional closed-form Jacobian, and a smoothness hint. Derivatives are
//! sampled per point as [`JacobianSample`]s carrying singular values and the
//! determinant, either from the closed form or from central finite
//! differences with a step-halving stability check.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geom;
use crate::region::Region;

/// Default finite-difference step, as a fraction of the region diameter.
pub const FD_STEP_FACTOR: f64 = 1e-5;
/// Relative disagreement between steps h and h/2 (and the one-sided stencils)
/// above which a finite-difference sample is flagged unreliable.
pub const FD_INSTABILITY: f64 = 0.10;

pub type MapFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type LocusFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Where the map may fail to be differentiable.
#[derive(Clone)]
pub enum SmoothnessHint {
    /// Differentiable everywhere on the domain.
    Smooth,
    /// Differentiable except on a declared locus; `distance` returns the
    /// distance from a point to that locus and `exclusion_radius` is how far
    /// around it pointwise derivative claims should be suppressed (0 means
    /// "a couple of stencil widths").
    NonsmoothOnLocus {
        distance: LocusFn,
        exclusion_radius: f64,
    },
    Unknown,
}

impl fmt::Debug for SmoothnessHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothnessHint::Smooth => write!(f, "Smooth"),
            SmoothnessHint::NonsmoothOnLocus {
                exclusion_radius, ..
            } => write!(f, "NonsmoothOnLocus(r={exclusion_radius})"),
            SmoothnessHint::Unknown => write!(f, "Unknown"),
        }
    }
}

/// An evaluable mapping `ℝⁿ → ℝⁿ` on a region.
#[derive(Clone)]
pub struct MappingSpec {
    pub name: String,
    pub dimension: usize,
    pub domain: Region,
    evaluate: MapFn,
    analytic_jacobian: Option<JacobianFn>,
    pub smoothness: SmoothnessHint,
}

impl fmt::Debug for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("domain", &self.domain)
            .field("analytic_jacobian", &self.analytic_jacobian.is_some())
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl MappingSpec {
    pub fn new(name: impl Into<String>, domain: Region, evaluate: MapFn) -> Self {
        MappingSpec {
            name: name.into(),
            dimension: domain.dimension(),
            domain,
            evaluate,
            analytic_jacobian: None,
            smoothness: SmoothnessHint::Unknown,
        }
    }

    pub fn with_jacobian(mut self, jac: JacobianFn) -> Self {
        self.analytic_jacobian = Some(jac);
        self
    }

    pub fn with_smoothness(mut self, hint: SmoothnessHint) -> Self {
        self.smoothness = hint;
        self
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.analytic_jacobian.is_some()
    }

    /// Evaluates into a caller-provided buffer; hot loops reuse the buffer.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.evaluate)(x, out);
    }

    /// Evaluates and checks the output is finite.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension];
        (self.evaluate)(x, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation { point: x.to_vec() });
        }
        Ok(out)
    }

    pub fn analytic_jacobian_at(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.analytic_jacobian.as_ref().map(|j| j(x))
    }

    /// Default finite-difference step for this map's domain.
    pub fn default_fd_step(&self) -> f64 {
        FD_STEP_FACTOR * self.domain.diameter()
    }

    /// Effective half-width of the declared nonsmooth band, given the
    /// finite-difference step in use.
    pub fn locus_exclusion(&self, fd_step: f64) -> Option<(LocusFn, f64)> {
        match &self.smoothness {
            SmoothnessHint::NonsmoothOnLocus {
                distance,
                exclusion_radius,
            } => Some((distance.clone(), exclusion_radius.max(2.0 * fd_step))),
            _ => None,
        }
    }

    /// True when `x` falls inside the declared nonsmooth band.
    pub fn on_declared_locus(&self, x: &[f64], fd_step: f64) -> bool {
        match self.locus_exclusion(fd_step) {
            Some((distance, radius)) => distance(x) < radius,
            None => false,
        }
    }
}

/// How a Jacobian sample was obtained and whether it can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleReliability {
    /// Closed-form Jacobian.
    Analytic,
    /// Finite differences, stable under step halving.
    FdStable,
    /// Finite differences disagreeing across stencils; do not trust pointwise.
    FdUnstable,
}

/// Pointwise derivative data: matrix, singular values, determinant.
#[derive(Debug, Clone)]
pub struct JacobianSample {
    pub point: Vec<f64>,
    pub matrix: DMatrix<f64>,
    /// Descending, all nonnegative.
    pub singular_values: Vec<f64>,
    pub determinant: f64,
    pub reliability: SampleReliability,
}

impl JacobianSample {
    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("n >= 1")
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn is_reliable(&self) -> bool {
        self.reliability != SampleReliability::FdUnstable
    }

    /// Right singular vector paired with the smallest singular value, with a
    /// canonical sign so repeated runs agree.
    pub fn weakest_stretch_direction(&self) -> Vec<f64> {
        let n = self.matrix.nrows();
        let svd = self.matrix.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let weakest = order[n - 1];
        geom::canonical_sign(v_t.row(weakest).iter().copied().collect())
    }
}

fn sorted_singular_values(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn sample_from_matrix(
    point: &[f64],
    matrix: DMatrix<f64>,
    reliability: SampleReliability,
) -> JacobianSample {
    let singular_values = sorted_singular_values(&matrix);
    let determinant = matrix.determinant();
    JacobianSample {
        point: point.to_vec(),
        matrix,
        singular_values,
        determinant,
        reliability,
    }
}

/// Central-difference Jacobian: column i is (f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h.
fn central_difference(f: &MappingSpec, x: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let n = f.dimension;
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut probe = x.to_vec();
    let mut matrix = DMatrix::zeros(n, n);
    for col in 0..n {
        probe[col] = x[col] + step;
        f.eval_into(&probe, &mut plus);
        probe[col] = x[col] - step;
        f.eval_into(&probe, &mut minus);
        probe[col] = x[col];
        for row in 0..n {
            let v = (plus[row] - minus[row]) / (2.0 * step);
            if !v.is_finite() {
                return Err(Error::Evaluation { point: probe });
            }
            matrix[(row, col)] = v;
        }
    }
    Ok(matrix)
}

/// One-sided (forward) difference, used only to cross-check stability.
fn forward_difference(f: &MappingSpec, x: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let n = f.dimension;
    let mut plus = vec![0.0; n];
    let mut here = vec![0.0; n];
    let mut probe = x.to_vec();
    f.eval_into(x, &mut here);
    let mut matrix = DMatrix::zeros(n, n);
    for col in 0..n {
        probe[col] = x[col] + step;
        f.eval_into(&probe, &mut plus);
        probe[col] = x[col];
        for row in 0..n {
            let v = (plus[row] - here[row]) / step;
            if !v.is_finite() {
                return Err(Error::Evaluation { point: probe });
            }
            matrix[(row, col)] = v;
        }
    }
    Ok(matrix)
}

fn relative_matrix_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(b.amax()).max(1e-12);
    (a - b).amax() / scale
}

/// Samples the derivative of `f` at `x`.
///
/// Uses the closed form when present; otherwise central differences at
/// `step`, flagged unreliable when the h vs h/2 stencils (or the one-sided
/// stencil, which catches symmetric kinks) disagree by more than
/// [`FD_INSTABILITY`].
pub fn jacobian_at(f: &MappingSpec, x: &[f64], step: f64) -> Result<JacobianSample> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig("fd step must be positive".into()));
    }
    let margin = f.domain.interior_margin(x);
    if margin < step {
        return Err(Error::BoundaryMargin {
            point: x.to_vec(),
            margin,
            needed: step,
        });
    }
    if let Some(matrix) = f.analytic_jacobian_at(x) {
        return Ok(sample_from_matrix(x, matrix, SampleReliability::Analytic));
    }
    let coarse = central_difference(f, x, step)?;
    let fine = central_difference(f, x, step / 2.0)?;
    let forward = forward_difference(f, x, step / 2.0)?;
    let unstable = relative_matrix_gap(&coarse, &fine) > FD_INSTABILITY
        || relative_matrix_gap(&fine, &forward) > FD_INSTABILITY;
    let reliability = if unstable {
        SampleReliability::FdUnstable
    } else {
        SampleReliability::FdStable
    };
    Ok(sample_from_matrix(x, fine, reliability))
}

/// Extremal stretch factors `(σ_min, σ_max)` of a sample.
pub fn singular_bounds(sample: &JacobianSample) -> (f64, f64) {
    (sample.sigma_min(), sample.sigma_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use approx::assert_relative_eq;

    fn identity_fd() -> MappingSpec {
        // no analytic Jacobian on purpose: exercises the FD path
        let domain = Region::bounding_box(&[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        MappingSpec::new(
            "identity_fd",
            domain,
            Arc::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x)),
        )
    }

    #[test]
    fn identity_jacobian() {
        let f = identity_fd();
        let s = jacobian_at(&f, &[0.3, -0.1], 1e-5).unwrap();
        assert_relative_eq!(s.matrix[(0, 0)], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.matrix[(1, 1)], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.matrix[(0, 1)], 0.0, epsilon = 1e-9);
        assert_eq!(s.singular_values.len(), 2);
        assert_relative_eq!(s.singular_values[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.singular_values[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.determinant, 1.0, epsilon = 1e-9);
        assert_eq!(s.reliability, SampleReliability::FdStable);
    }

    #[test]
    fn folding_jacobian_signs() {
        let f = gallery::folding();
        let right = jacobian_at(&f, &[1.0, 0.5], 1e-5).unwrap();
        assert_relative_eq!(right.determinant, 1.0, epsilon = 1e-12);
        let left = jacobian_at(&f, &[-1.0, 0.5], 1e-5).unwrap();
        assert_relative_eq!(left.determinant, -1.0, epsilon = 1e-12);
        assert_relative_eq!(left.matrix[(0, 0)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(left.matrix[(1, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn folding_fd_near_fold_is_flagged() {
        // strip the analytic Jacobian so the fold is probed numerically
        let g = gallery::folding();
        let domain = g.domain.clone();
        let f = MappingSpec::new(
            "folding_fd",
            domain,
            Arc::new(|x: &[f64], out: &mut [f64]| {
                out[0] = x[0].abs();
                out[1] = x[1];
            }),
        );
        let on_fold = jacobian_at(&f, &[0.0, 0.2], 1e-5).unwrap();
        assert_eq!(on_fold.reliability, SampleReliability::FdUnstable);
        let near_fold = jacobian_at(&f, &[4e-6, 0.2], 1e-5).unwrap();
        assert_eq!(near_fold.reliability, SampleReliability::FdUnstable);
        let off_fold = jacobian_at(&f, &[0.5, 0.2], 1e-5).unwrap();
        assert_eq!(off_fold.reliability, SampleReliability::FdStable);
    }

    #[test]
    fn diagonal_singular_values() {
        let f = gallery::diagonal(&[2.0, 0.5]).unwrap();
        let s = jacobian_at(&f, &[0.1, 0.2], 1e-5).unwrap();
        assert_relative_eq!(s.singular_values[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.singular_values[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.determinant, 1.0, epsilon = 1e-12);
        assert_eq!(singular_bounds(&s), (0.5, 2.0));
    }

    #[test]
    fn boundary_margin_enforced() {
        let f = identity_fd();
        let err = jacobian_at(&f, &[1.0 - 1e-7, 0.0], 1e-5).unwrap_err();
        assert!(matches!(err, Error::BoundaryMargin { .. }));
    }

    #[test]
    fn det_matches_singular_value_product() {
        for f in gallery::gallery().iter().map(|e| &e.mapping) {
            let fd = f.default_fd_step();
            for p in f.domain.grid_points(7, 0.05 * f.domain.diameter()) {
                if f.on_declared_locus(&p, fd) {
                    continue;
                }
                let s = jacobian_at(f, &p, fd).unwrap();
                let product: f64 = s.singular_values.iter().product();
                assert_relative_eq!(
                    s.determinant.abs(),
                    product,
                    max_relative = 1e-9,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn weakest_direction_of_squeeze() {
        let f = gallery::diagonal(&[0.1, 1.0]).unwrap();
        let s = jacobian_at(&f, &[0.5, 0.5], 1e-5).unwrap();
        let h0 = s.weakest_stretch_direction();
        assert_relative_eq!(h0[0].abs(), 1.0, epsilon = 1e-12);
        assert!(h0[0] > 0.0, "canonical sign");
        assert_relative_eq!(h0[1], 0.0, epsilon = 1e-12);
    }
}
