//! Closest-point queries between line segments in arbitrary ambient dimension.

/// Squared distance between segments [p0,p1] and [q0,q1] together with the
/// clamped closest-point parameters (s, t) in [0,1]².
///
/// Standard quadratic minimization with clamping; degenerate (point-like)
/// segments are handled by the same formulas because the denominators are
/// guarded.
pub fn segment_distance_sq(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> (f64, f64, f64) {
    let dim = p0.len();
    debug_assert!(p1.len() == dim && q0.len() == dim && q1.len() == dim);

    // d1 = p1-p0, d2 = q1-q0, r = p0-q0
    let mut a = 0.0; // |d1|^2
    let mut e = 0.0; // |d2|^2
    let mut b = 0.0; // d1 . d2
    let mut c = 0.0; // d1 . r
    let mut f = 0.0; // d2 . r
    for i in 0..dim {
        let d1 = p1[i] - p0[i];
        let d2 = q1[i] - q0[i];
        let r = p0[i] - q0[i];
        a += d1 * d1;
        e += d2 * d2;
        b += d1 * d2;
        c += d1 * r;
        f += d2 * r;
    }

    let mut s;
    let mut t;
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        s = 0.0;
        t = 0.0;
    } else if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else if e <= f64::MIN_POSITIVE {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else {
        let denom = a * e - b * b;
        s = if denom > 0.0 {
            ((b * f - c * e) / denom).clamp(0.0, 1.0)
        } else {
            0.0 // parallel: any s works, pick the p0 end
        };
        t = (b * s + f) / e;
        if t < 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else if t > 1.0 {
            t = 1.0;
            s = ((b - c) / a).clamp(0.0, 1.0);
        }
    }

    let mut d2 = 0.0;
    for i in 0..dim {
        let cp = p0[i] + s * (p1[i] - p0[i]);
        let cq = q0[i] + t * (q1[i] - q0[i]);
        d2 += (cp - cq) * (cp - cq);
    }
    (d2, s, t)
}

/// Distance between two segments.
pub fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    segment_distance_sq(p0, p1, q0, q1).0.sqrt()
}

/// Brute-force lower bound used to sanity check `segment_distance` in tests:
/// sample both segments on a uniform grid and take the minimal distance.
#[cfg(test)]
pub fn sampled_segment_distance(
    p0: &[f64],
    p1: &[f64],
    q0: &[f64],
    q1: &[f64],
    samples: usize,
) -> f64 {
    use crate::vecn;
    let dim = p0.len();
    let mut best = f64::INFINITY;
    let mut cp = vec![0.0; dim];
    let mut cq = vec![0.0; dim];
    for i in 0..=samples {
        let s = i as f64 / samples as f64;
        for k in 0..dim {
            cp[k] = p0[k] + s * (p1[k] - p0[k]);
        }
        for j in 0..=samples {
            let t = j as f64 / samples as f64;
            for k in 0..dim {
                cq[k] = q0[k] + t * (q1[k] - q0[k]);
            }
            best = best.min(vecn::dist(&cp, &cq));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments_touch() {
        let (d2, s, t) = segment_distance_sq(
            &[-1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0],
            &[0.0, 1.0, 0.0],
        );
        assert!(d2 < 1e-30);
        assert!((s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn skew_segments_distance() {
        // closest approach 1 along z
        let d = segment_distance(
            &[-1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, -1.0, 1.0],
            &[0.0, 1.0, 1.0],
        );
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_and_degenerate() {
        let d = segment_distance(
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 1.0, 0.0],
        );
        assert!((d - 1.0).abs() < 1e-12);
        // point against segment
        let d = segment_distance(
            &[0.5, 2.0, 0.0],
            &[0.5, 2.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
        );
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_dense_sampling() {
        let cases = [
            (
                [0.3, -0.2, 0.5],
                [1.0, 0.8, -0.1],
                [0.0, 1.0, 0.2],
                [-0.5, 0.1, 0.9],
            ),
            (
                [0.0, 0.0, 0.0],
                [1.0, 1.0, 1.0],
                [2.0, 0.0, 0.0],
                [2.0, 1.0, 3.0],
            ),
        ];
        for (p0, p1, q0, q1) in cases {
            let exact = segment_distance(&p0, &p1, &q0, &q1);
            let sampled = sampled_segment_distance(&p0, &p1, &q0, &q1, 400);
            assert!(exact <= sampled + 1e-12, "exact {exact} sampled {sampled}");
            assert!(sampled - exact < 2e-3, "exact {exact} sampled {sampled}");
        }
    }
}
