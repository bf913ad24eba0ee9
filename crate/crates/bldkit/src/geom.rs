//! Small dense-vector helpers used throughout the crate.
//!
//! Points and directions are plain `&[f64]` slices so that report types stay
//! serializable; matrix work is delegated to `nalgebra` where it matters.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Returns `a / ‖a‖`, or `None` when the norm underflows.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n < 1e-300 {
        None
    } else {
        Some(a.iter().map(|x| x / n).collect())
    }
}

/// Angle between two nonzero vectors, in [0, π].
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Flips the vector so its largest-magnitude component is positive.
///
/// Singular vectors come out of the decomposition with arbitrary sign; a
/// canonical sign keeps downstream searches deterministic.
pub fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let lead = v
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if v.get(lead).copied().unwrap_or(0.0) < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}

/// An orthonormal basis of the hyperplane orthogonal to `axis` (assumed unit).
///
/// Gram–Schmidt over the standard basis, skipping the axis-dominant vector.
pub fn orthonormal_complement(axis: &[f64]) -> Vec<Vec<f64>> {
    let n = axis.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // remove the axis component, then previously accepted directions
        let a = dot(&v, axis);
        for (k, x) in v.iter_mut().enumerate() {
            *x -= a * axis[k];
        }
        for b in &basis {
            let c = dot(&v, b);
            for (k, x) in v.iter_mut().enumerate() {
                *x -= c * b[k];
            }
        }
        if let Some(u) = normalized(&v) {
            if norm(&v) > 1e-8 {
                basis.push(u);
                if basis.len() == n - 1 {
                    break;
                }
            }
        }
    }
    basis
}

/// Lexicographic comparison of two points, used for deterministic tie-breaks.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let axis = normalized(&[1.0, 2.0, -0.5]).unwrap();
        let basis = orthonormal_complement(&axis);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!((norm(b) - 1.0).abs() < 1e-12);
            assert!(dot(b, &axis).abs() < 1e-12);
        }
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-12);
    }

    #[test]
    fn canonical_sign_flips_negative_lead() {
        let v = canonical_sign(vec![-0.8, 0.1]);
        assert!(v[0] > 0.0);
        let w = canonical_sign(vec![0.3, -0.9]);
        assert!(w[1] > 0.0);
    }
}
