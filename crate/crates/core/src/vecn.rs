//! Small helpers for vectors of runtime dimension stored as `&[f64]` slices.
//!
//! Points of a polyline are kept in one flat buffer (vertex-major), so all
//! geometric kernels operate on slices instead of owned vectors. None of
//! these helpers allocate.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

/// out += s * a
#[inline]
pub fn axpy(s: f64, a: &[f64], out: &mut [f64]) {
    for (o, x) in out.iter_mut().zip(a) {
        *o += s * x;
    }
}

/// Squared norm of the exterior product `a ∧ b`, valid in any dimension:
/// |a ∧ b|² = |a|²|b|² − ⟨a,b⟩² (Gram determinant). Equals the squared
/// cross-product norm for dimension 3. Clamped at zero against rounding.
#[inline]
pub fn wedge_norm_sq(a: &[f64], b: &[f64]) -> f64 {
    let g = norm_sq(a) * norm_sq(b) - dot(a, b).powi(2);
    g.max(0.0)
}

/// Distance of two parameters on the unit circle R/Z; always in [0, 1/2].
#[inline]
pub fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}
