//! Small dense numerical primitives used by calibration and triangulation.

mod lm;
mod poly;

pub use lm::{
    finite_difference_jacobian, lm_minimize, FnProblem, LeastSquaresProblem, LmOutcome,
    LmSettings, Termination,
};
pub use poly::{real_roots, Polynomial, MAX_DEGREE};

use nalgebra::{DMatrix, DVector};

/// Unit vector `v` minimizing `|A v|`, with its largest-magnitude
/// component made positive.
///
/// Works through the SVD of `A` (padded with zero rows when `A` is wide),
/// never through `A^T A`.
pub fn smallest_singular_vector(a: &DMatrix<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    assert!(n >= 1, "matrix needs at least one column");
    let padded;
    let a = if m < n {
        padded = a.clone().resize_vertically(n, 0.0);
        &padded
    } else {
        a
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let idx = svd.singular_values.imin();
    let mut v: DVector<f64> = v_t.row(idx).transpose();
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    fix_sign(&mut v);
    v
}

/// Flips `v` so that its largest-magnitude component is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let idx = v.iamax();
    if v[idx] < 0.0 {
        v.neg_mut();
    }
}
