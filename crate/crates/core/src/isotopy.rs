//! Certification that the linear homotopy between two polylines is a
//! level-preserving isotopy, which guarantees knot-class preservation.
//!
//! For F(u,λ) = (1−λ) P(u) + λ Q(u) three conditions are checked:
//! edge lengths bounded away from zero for all λ, turning angles bounded
//! away from π for all λ, and absence of self-intersections of the swept
//! surface in R³ × [0,1]. The edge-length bound is exact (per-edge quadratic
//! minimization in closed form), angles are sampled with a safety margin,
//! and the sweep is tested by continuous collision detection: for each
//! non-adjacent edge pair the coplanarity condition det[w, e1, e2](λ) = 0
//! is a cubic in λ whose admissible roots are probed for segment contact.
//! Numerical degeneracies resolve conservatively towards "collision".

use rayon::prelude::*;

use crate::error::{CurveError, Result};
use crate::geometry::Polyline;
use crate::segments::segment_distance;
use crate::vecn;

/// Margins for `certify_isotopy`, relative quantities scaled by the curve
/// diameter.
#[derive(Debug, Clone, Copy)]
pub struct IsotopyPolicy {
    /// Edge lengths along the homotopy must stay above this fraction of the
    /// diameter.
    pub edge_floor_rel: f64,
    /// Turning angles must stay below π minus this margin (radians).
    pub angle_margin: f64,
    /// Number of λ subdivisions for the sampled angle check.
    pub angle_samples: usize,
    /// Segment contact threshold as a fraction of the diameter.
    pub contact_tol_rel: f64,
}

impl Default for IsotopyPolicy {
    fn default() -> Self {
        Self {
            edge_floor_rel: 1e-9,
            angle_margin: 0.1,
            angle_samples: 16,
            contact_tol_rel: 1e-9,
        }
    }
}

/// Outcome of the three isotopy checks for one candidate step.
#[derive(Debug, Clone)]
pub struct HomotopyCertificate {
    pub passed: bool,
    pub min_edge_length_over_lambda: f64,
    pub max_turning_angle_over_lambda: f64,
    pub first_collision_lambda: Option<f64>,
    pub failing_pair: Option<(usize, usize)>,
}

fn require_same_partition(p: &Polyline, q: &Polyline) -> Result<()> {
    if p.partition() != q.partition() || p.dim() != q.dim() {
        return Err(CurveError::PartitionMismatch);
    }
    Ok(())
}

/// Exact minimum over λ ∈ [0,1] and all edges of the blended edge length
/// |a_I + λ b_I| with a_I the edge vector of P and b_I the difference of the
/// edge vectors of Q and P.
pub fn min_edge_length_over_homotopy(p: &Polyline, q: &Polyline) -> Result<f64> {
    require_same_partition(p, q)?;
    let n = p.len();
    let dim = p.dim();
    let mut best = f64::INFINITY;
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    for e in 0..n {
        let (pd, pu) = (
            p.point(p.partition().edge_down(e)),
            p.point(p.partition().edge_up(e)),
        );
        let (qd, qu) = (
            q.point(q.partition().edge_down(e)),
            q.point(q.partition().edge_up(e)),
        );
        for i in 0..dim {
            a[i] = pu[i] - pd[i];
            b[i] = (qu[i] - qd[i]) - a[i];
        }
        let bb = vecn::norm_sq(&b);
        let lambda = if bb > 0.0 {
            (-vecn::dot(&a, &b) / bb).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut len_sq = 0.0;
        for i in 0..dim {
            let x = a[i] + lambda * b[i];
            len_sq += x * x;
        }
        best = best.min(len_sq.sqrt());
    }
    Ok(best)
}

/// Maximum turning angle over all vertices at λ ∈ {0, 1/samples, …, 1}.
pub fn max_turning_angle_over_homotopy(p: &Polyline, q: &Polyline, samples: usize) -> Result<f64> {
    require_same_partition(p, q)?;
    let samples = samples.max(1);
    let mut worst: f64 = 0.0;
    let mut blended = vec![0.0; p.points_flat().len()];
    for step in 0..=samples {
        let lambda = step as f64 / samples as f64;
        for (slot, (x, y)) in blended
            .iter_mut()
            .zip(p.points_flat().iter().zip(q.points_flat()))
        {
            *slot = (1.0 - lambda) * x + lambda * y;
        }
        let slice = p.with_points(blended.clone())?;
        let angles = slice.turning_angles()?;
        worst = worst.max(angles.into_iter().fold(0.0, f64::max));
    }
    Ok(worst)
}

/// Linearly moving segment: endpoints at λ = 0 and λ = 1.
#[derive(Debug, Clone, Copy)]
pub struct MovingSegment<'a> {
    pub start0: &'a [f64],
    pub end0: &'a [f64],
    pub start1: &'a [f64],
    pub end1: &'a [f64],
}

#[inline]
fn lerp3(a: &[f64], b: &[f64], t: f64) -> [f64; 3] {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

#[inline]
fn det3(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Real roots of c3 x³ + c2 x² + c1 x + c0 clamped to [0, 1], with graceful
/// degradation to the quadratic/linear case when leading coefficients are
/// negligible. Roots are Newton-polished on the original polynomial.
fn cubic_roots_in_unit_interval(c0: f64, c1: f64, c2: f64, c3: f64, out: &mut Vec<f64>) {
    out.clear();
    let magnitude = c0.abs().max(c1.abs()).max(c2.abs()).max(c3.abs());
    if magnitude == 0.0 {
        return;
    }
    let eps = 1e-12 * magnitude;
    let eval = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let deriv = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let mut push = |root: f64| {
        let mut x = root;
        for _ in 0..3 {
            let d = deriv(x);
            if d.abs() > 0.0 {
                let step = eval(x) / d;
                if step.is_finite() {
                    x -= step;
                }
            }
        }
        if (-1e-9..=1.0 + 1e-9).contains(&x) {
            out.push(x.clamp(0.0, 1.0));
        }
    };

    if c3.abs() <= eps {
        if c2.abs() <= eps {
            if c1.abs() > eps {
                push(-c0 / c1);
            }
            return;
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable pairing
            let q = -0.5 * (c1 + c1.signum() * sq);
            if q != 0.0 {
                push(q / c2);
                push(c0 / q);
            } else {
                push(0.0);
            }
        }
        return;
    }

    // depressed cubic t^3 + pt + q with x = t - c2/(3 c3)
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc >= 0.0 {
        // three real roots (trigonometric form); p <= 0 here
        let m = (-p / 3.0).max(0.0).sqrt();
        if m == 0.0 {
            push(-shift);
        } else {
            let arg = (3.0 * q / (2.0 * p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            for k in 0..3 {
                let t = 2.0 * m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                push(t - shift);
            }
        }
    } else {
        // one real root (Cardano)
        let d = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-q / 2.0 + d).cbrt();
        let v = (-q / 2.0 - d).cbrt();
        push(u + v - shift);
    }
}

const COARSE_CANDIDATES: usize = 32;
const DENSE_COPLANAR_SAMPLES: usize = 1024;

/// Earliest λ ∈ [0,1] at which the two linearly moving segments come within
/// `tol` of each other, if any.
///
/// For 3-dimensional segments the candidate instants are the roots of the
/// coplanarity cubic, the roots of its derivative, a coarse λ grid and the
/// endpoints; persistent coplanarity (identically vanishing cubic, e.g.
/// planar configurations) falls back to a dense grid. Other ambient
/// dimensions use the dense grid directly.
pub fn moving_segments_collision(s1: &MovingSegment, s2: &MovingSegment, tol: f64) -> Option<f64> {
    let dim = s1.start0.len();
    if dim != 3 {
        return dense_contact_scan(s1, s2, tol, DENSE_COPLANAR_SAMPLES);
    }

    // swept bounding-box prefilter
    for i in 0..3 {
        let min1 = s1.start0[i]
            .min(s1.end0[i])
            .min(s1.start1[i])
            .min(s1.end1[i]);
        let max1 = s1.start0[i]
            .max(s1.end0[i])
            .max(s1.start1[i])
            .max(s1.end1[i]);
        let min2 = s2.start0[i]
            .min(s2.end0[i])
            .min(s2.start1[i])
            .min(s2.end1[i]);
        let max2 = s2.start0[i]
            .max(s2.end0[i])
            .max(s2.start1[i])
            .max(s2.end1[i]);
        if min1 > max2 + tol || min2 > max1 + tol {
            return None;
        }
    }

    // coplanarity determinant det[w, e1, e2](λ), every column affine in λ
    let col = |a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]| {
        let base = [b0[0] - a0[0], b0[1] - a0[1], b0[2] - a0[2]];
        let slope = [
            (b1[0] - a1[0]) - base[0],
            (b1[1] - a1[1]) - base[1],
            (b1[2] - a1[2]) - base[2],
        ];
        (base, slope)
    };
    let (w0, w1) = col(s1.start0, s1.start1, s2.start0, s2.start1);
    let (e10, e11) = col(s1.start0, s1.start1, s1.end0, s1.end1);
    let (e20, e21) = col(s2.start0, s2.start1, s2.end0, s2.end1);

    let c0 = det3(&w0, &e10, &e20);
    let c1 = det3(&w1, &e10, &e20) + det3(&w0, &e11, &e20) + det3(&w0, &e10, &e21);
    let c2 = det3(&w1, &e11, &e20) + det3(&w1, &e10, &e21) + det3(&w0, &e11, &e21);
    let c3 = det3(&w1, &e11, &e21);

    let extent = [&w0, &w1, &e10, &e11, &e20, &e21]
        .iter()
        .map(|v| vecn::norm(*v))
        .fold(0.0, f64::max);
    let det_scale = extent * extent * extent;
    if c0.abs().max(c1.abs()).max(c2.abs()).max(c3.abs()) <= 1e-12 * det_scale {
        // persistently (near) coplanar; probe densely
        return dense_contact_scan(s1, s2, tol, DENSE_COPLANAR_SAMPLES);
    }

    let mut candidates: Vec<f64> = Vec::with_capacity(COARSE_CANDIDATES + 8);
    candidates.push(0.0);
    candidates.push(1.0);
    for i in 1..COARSE_CANDIDATES {
        candidates.push(i as f64 / COARSE_CANDIDATES as f64);
    }
    let mut roots = Vec::new();
    cubic_roots_in_unit_interval(c0, c1, c2, c3, &mut roots);
    candidates.extend_from_slice(&roots);
    // stationary instants of the determinant catch grazing passes
    cubic_roots_in_unit_interval(c1, 2.0 * c2, 3.0 * c3, 0.0, &mut roots);
    candidates.extend_from_slice(&roots);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    candidates
        .iter()
        .find(|&&lambda| contact_at(s1, s2, lambda, tol))
        .copied()
}

fn contact_at(s1: &MovingSegment, s2: &MovingSegment, lambda: f64, tol: f64) -> bool {
    let a0 = lerp3(s1.start0, s1.start1, lambda);
    let a1 = lerp3(s1.end0, s1.end1, lambda);
    let b0 = lerp3(s2.start0, s2.start1, lambda);
    let b1 = lerp3(s2.end0, s2.end1, lambda);
    segment_distance(&a0, &a1, &b0, &b1) <= tol
}

fn dense_contact_scan(
    s1: &MovingSegment,
    s2: &MovingSegment,
    tol: f64,
    samples: usize,
) -> Option<f64> {
    let dim = s1.start0.len();
    let mut a0 = vec![0.0; dim];
    let mut a1 = vec![0.0; dim];
    let mut b0 = vec![0.0; dim];
    let mut b1 = vec![0.0; dim];
    for step in 0..=samples {
        let lambda = step as f64 / samples as f64;
        for i in 0..dim {
            a0[i] = s1.start0[i] + lambda * (s1.start1[i] - s1.start0[i]);
            a1[i] = s1.end0[i] + lambda * (s1.end1[i] - s1.end0[i]);
            b0[i] = s2.start0[i] + lambda * (s2.start1[i] - s2.start0[i]);
            b1[i] = s2.end0[i] + lambda * (s2.end1[i] - s2.end0[i]);
        }
        if segment_distance(&a0, &a1, &b0, &b1) <= tol {
            return Some(lambda);
        }
    }
    None
}

/// Interior overlap of two edges sharing a vertex: a fold-back, i.e. the
/// outgoing edge doubles back onto the incoming one. `a` and `b` point from
/// the shared vertex to the two far endpoints.
fn shared_vertex_fold(a: &[f64], b: &[f64]) -> bool {
    let wedge = vecn::wedge_norm_sq(a, b);
    let na = vecn::norm_sq(a);
    let nb = vecn::norm_sq(b);
    wedge <= 1e-18 * na * nb && vecn::dot(a, b) > 0.0
}

struct EdgePair {
    first: usize,
    second: usize,
    adjacent: bool,
}

fn edge_pairs(n: usize) -> Vec<EdgePair> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            pairs.push(EdgePair {
                first: i,
                second: j,
                adjacent,
            });
        }
    }
    pairs
}

fn pair_collision(
    p: &Polyline,
    q: &Polyline,
    pair: &EdgePair,
    tol: f64,
) -> Option<(f64, (usize, usize))> {
    let part = p.partition();
    let (d1, u1) = (part.edge_down(pair.first), part.edge_up(pair.first));
    let (d2, u2) = (part.edge_down(pair.second), part.edge_up(pair.second));
    if pair.adjacent {
        // shared vertex: look for interior overlap (fold-back) only
        let (shared, far1, far2) = if u1 == d2 {
            (u1, d1, u2)
        } else {
            (d1, u1, d2) // wrap-around pair (0, n-1)
        };
        let dim = p.dim();
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        for step in 0..=COARSE_CANDIDATES {
            let lambda = step as f64 / COARSE_CANDIDATES as f64;
            for i in 0..dim {
                let sh = (1.0 - lambda) * p.point(shared)[i] + lambda * q.point(shared)[i];
                a[i] = (1.0 - lambda) * p.point(far1)[i] + lambda * q.point(far1)[i] - sh;
                b[i] = (1.0 - lambda) * p.point(far2)[i] + lambda * q.point(far2)[i] - sh;
            }
            if shared_vertex_fold(&a, &b) {
                return Some((lambda, (pair.first, pair.second)));
            }
        }
        return None;
    }
    let s1 = MovingSegment {
        start0: p.point(d1),
        end0: p.point(u1),
        start1: q.point(d1),
        end1: q.point(u1),
    };
    let s2 = MovingSegment {
        start0: p.point(d2),
        end0: p.point(u2),
        start1: q.point(d2),
        end1: q.point(u2),
    };
    moving_segments_collision(&s1, &s2, tol).map(|lambda| (lambda, (pair.first, pair.second)))
}

fn earliest(
    a: Option<(f64, (usize, usize))>,
    b: Option<(f64, (usize, usize))>,
) -> Option<(f64, (usize, usize))> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(x), Some(y)) => {
            if (y.0, y.1) < (x.0, x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

fn swept_collision_with_tol(
    p: &Polyline,
    q: &Polyline,
    tol: f64,
) -> Result<Option<(f64, (usize, usize))>> {
    require_same_partition(p, q)?;
    let pairs = edge_pairs(p.len());
    let hit = pairs
        .par_iter()
        .fold(
            || None,
            |acc, pair| earliest(acc, pair_collision(p, q, pair, tol)),
        )
        .reduce(|| None, earliest);
    Ok(hit)
}

/// Earliest collision of the swept surface of the homotopy from `p` to `q`,
/// reported as (λ, edge pair) in (λ, pair-index) lexicographic order. The
/// contact threshold is 1e−9 of the larger curve diameter.
pub fn swept_collision_check(p: &Polyline, q: &Polyline) -> Result<Option<(f64, (usize, usize))>> {
    let tol = 1e-9 * p.diameter().max(q.diameter());
    swept_collision_with_tol(p, q, tol)
}

/// Static self-intersection test: returns a touching segment pair if any
/// non-adjacent pair comes within `tol`, or an adjacent pair folds back.
pub fn self_intersection(p: &Polyline, tol: f64) -> Option<(usize, usize)> {
    let part = p.partition();
    for pair in edge_pairs(p.len()) {
        let (d1, u1) = (part.edge_down(pair.first), part.edge_up(pair.first));
        let (d2, u2) = (part.edge_down(pair.second), part.edge_up(pair.second));
        if pair.adjacent {
            let (shared, far1, far2) = if u1 == d2 { (u1, d1, u2) } else { (d1, u1, d2) };
            let dim = p.dim();
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            vecn::sub(p.point(far1), p.point(shared), &mut a);
            vecn::sub(p.point(far2), p.point(shared), &mut b);
            if shared_vertex_fold(&a, &b) {
                return Some((pair.first, pair.second));
            }
        } else if segment_distance(p.point(d1), p.point(u1), p.point(d2), p.point(u2)) <= tol {
            return Some((pair.first, pair.second));
        }
    }
    None
}

/// Run the three homotopy checks with the policy's margins. The checks run
/// in order (edge floor, angles, sweep) and stop at the first failure.
pub fn certify_isotopy(
    p: &Polyline,
    q: &Polyline,
    policy: &IsotopyPolicy,
) -> Result<HomotopyCertificate> {
    require_same_partition(p, q)?;
    let scale = p.diameter().max(q.diameter());
    let edge_floor = policy.edge_floor_rel * scale;
    let contact_tol = policy.contact_tol_rel * scale;

    let min_edge = min_edge_length_over_homotopy(p, q)?;
    if min_edge <= edge_floor {
        return Ok(HomotopyCertificate {
            passed: false,
            min_edge_length_over_lambda: min_edge,
            // conservative sentinel: angles are unreliable near degeneracy
            max_turning_angle_over_lambda: std::f64::consts::PI,
            first_collision_lambda: None,
            failing_pair: None,
        });
    }

    let max_angle = max_turning_angle_over_homotopy(p, q, policy.angle_samples)?;
    if max_angle >= std::f64::consts::PI - policy.angle_margin {
        return Ok(HomotopyCertificate {
            passed: false,
            min_edge_length_over_lambda: min_edge,
            max_turning_angle_over_lambda: max_angle,
            first_collision_lambda: None,
            failing_pair: None,
        });
    }

    let collision = swept_collision_with_tol(p, q, contact_tol)?;
    Ok(HomotopyCertificate {
        passed: collision.is_none(),
        min_edge_length_over_lambda: min_edge,
        max_turning_angle_over_lambda: max_angle,
        first_collision_lambda: collision.map(|(l, _)| l),
        failing_pair: collision.map(|(_, pair)| pair),
    })
}
