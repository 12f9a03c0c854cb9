//! Discrete generalized integral Menger energy and its analytic differential.
//!
//! The energy of a closed polyline sums, over unordered triples of pairwise
//! distinct edges, the local contribution
//!
//! ```text
//! W(I1,I2,I3) = l_1 * l_2 * l_3 / R^(p,q)(m_1, m_2, m_3),   q = 2,
//! ```
//!
//! where l_i are spatial edge lengths and m_i spatial edge midpoints. The
//! kernel is the decoupled-exponent generalization of the circumcircle
//! diameter: with the circumcircle radius of three points given by
//! R(x,y,z) = |x−y||y−z||z−x| / (2 |(y−x) ∧ (z−x)|), splitting the exponents
//! of numerator and denominator yields
//!
//! ```text
//! 1 / R^(p,q)(x,y,z) = |(y−x) ∧ (z−x)|^q / (|x−y| |y−z| |z−x|)^p,
//! ```
//!
//! which for q = p recovers (2/diameter)^p, i.e. M_p = 2^p M^(p,p). The
//! wedge norm is evaluated through the Gram determinant, so any ambient
//! dimension n ≥ 2 is supported; for n = 3 it is the cross-product norm.
//! Collinear point triples have vanishing wedge and contribute zero (the
//! continuous extension); only (nearly) coincident points are an error.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{CurveError, Result};
use crate::geometry::Polyline;
use crate::vecn;

/// Proven admissible range for the exponent p in the Hilbert case q = 2.
pub const P_RANGE: (f64, f64) = (7.0 / 3.0, 8.0 / 3.0);

/// Exponent pair and degeneracy guard for the energy. q is fixed at 2.
#[derive(Debug, Clone, Copy)]
pub struct EnergyParams {
    p: f64,
    degenerate_threshold: f64,
}

impl EnergyParams {
    /// Parameters with p restricted to the admissible interval (7/3, 8/3).
    pub fn new(p: f64) -> Result<Self> {
        if !(p > P_RANGE.0 && p < P_RANGE.1) {
            return Err(CurveError::InvalidParams(format!(
                "p = {p} outside the admissible interval (7/3, 8/3)"
            )));
        }
        Ok(Self {
            p,
            degenerate_threshold: 1e-12,
        })
    }

    /// Parameters without the range restriction, for experimentation.
    pub fn unrestricted(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(CurveError::InvalidParams(format!(
                "p must be a positive finite number, got {p}"
            )));
        }
        Ok(Self {
            p,
            degenerate_threshold: 1e-12,
        })
    }

    pub fn with_degenerate_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(CurveError::InvalidParams(format!(
                "degenerate threshold must be positive, got {threshold}"
            )));
        }
        self.degenerate_threshold = threshold;
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        2.0
    }

    /// Degeneracy guard below which a pairwise point distance is treated as
    /// a collision. Curve-level operations scale it by the curve diameter.
    pub fn degenerate_threshold(&self) -> f64 {
        self.degenerate_threshold
    }

    /// Full differentiability order s = (3/2) p − 2 of the flow space; the
    /// Gagliardo kernel exponent is 2s − 1 = 3p − 5.
    pub fn sobolev_order(&self) -> f64 {
        1.5 * self.p - 2.0
    }

    /// Scaling exponent of the energy: E(μP) = μ^(7−3p) E(P).
    pub fn homogeneity_exponent(&self) -> f64 {
        7.0 - 3.0 * self.p
    }
}

/// Energy value together with its differential in the vertex basis
/// (degree of freedom (v, i) at index v·n + i) and the number of evaluated
/// unordered triples.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub value: f64,
    pub differential: DVector<f64>,
    pub triple_count: usize,
}

#[inline]
fn guarded_distances(x: &[f64], y: &[f64], z: &[f64], threshold: f64) -> Result<(f64, f64, f64)> {
    let dxy = vecn::dist(x, y);
    let dyz = vecn::dist(y, z);
    let dzx = vecn::dist(z, x);
    let dmin = dxy.min(dyz).min(dzx);
    if dmin <= threshold {
        return Err(CurveError::MidpointCollision {
            dist: dmin,
            threshold,
        });
    }
    Ok((dxy, dyz, dzx))
}

#[inline]
fn kernel_guarded(x: &[f64], y: &[f64], z: &[f64], p: f64, threshold: f64) -> Result<f64> {
    let (dxy, dyz, dzx) = guarded_distances(x, y, z, threshold)?;
    let mut aa = 0.0;
    let mut bb = 0.0;
    let mut ab = 0.0;
    for i in 0..x.len() {
        let a = y[i] - x[i];
        let b = z[i] - x[i];
        aa += a * a;
        bb += b * b;
        ab += a * b;
    }
    let wedge_sq = (aa * bb - ab * ab).max(0.0);
    Ok(wedge_sq / (dxy * dyz * dzx).powf(p))
}

/// Kernel value and its gradients with respect to the three points.
///
/// With S = |(y−x) ∧ (z−x)|² and D = (|x−y||y−z||z−x|)^p the kernel is
/// K = S / D; the gradients follow from
/// ∇_y S = 2(|b|² a − ⟨a,b⟩ b), ∇_z S = 2(|a|² b − ⟨a,b⟩ a),
/// ∇_x S = −∇_y S − ∇_z S (a = y−x, b = z−x) and the logarithmic
/// derivative of D through the three pair distances.
#[inline]
#[allow(clippy::too_many_arguments)]
fn kernel_gradient(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    p: f64,
    threshold: f64,
    gx: &mut [f64],
    gy: &mut [f64],
    gz: &mut [f64],
) -> Result<f64> {
    let (dxy, dyz, dzx) = guarded_distances(x, y, z, threshold)?;
    let mut aa = 0.0;
    let mut bb = 0.0;
    let mut ab = 0.0;
    for i in 0..x.len() {
        let a = y[i] - x[i];
        let b = z[i] - x[i];
        aa += a * a;
        bb += b * b;
        ab += a * b;
    }
    let wedge_sq = (aa * bb - ab * ab).max(0.0);
    let denom = (dxy * dyz * dzx).powf(p);
    let k = wedge_sq / denom;
    let kp = k * p;
    for i in 0..x.len() {
        let a = y[i] - x[i];
        let b = z[i] - x[i];
        let c = z[i] - y[i];
        let dys = 2.0 * (bb * a - ab * b);
        let dzs = 2.0 * (aa * b - ab * a);
        let dxs = -dys - dzs;
        let ua = a / (dxy * dxy);
        let ub = b / (dzx * dzx);
        let uc = c / (dyz * dyz);
        gx[i] = dxs / denom + kp * (ua + ub);
        gy[i] = dys / denom - kp * (ua - uc);
        gz[i] = dzs / denom - kp * (uc + ub);
    }
    Ok(k)
}

/// The inverse generalized circumcircle kernel 1/R^(p,2)(x, y, z).
///
/// The degeneracy guard of `params` is applied as an absolute distance here;
/// curve-level operations scale it by the curve diameter instead.
pub fn kernel_rpq_inverse(x: &[f64], y: &[f64], z: &[f64], params: &EnergyParams) -> Result<f64> {
    if x.len() != y.len() || y.len() != z.len() {
        return Err(CurveError::DimensionMismatch {
            expected: x.len(),
            got: y.len().max(z.len()),
        });
    }
    kernel_guarded(x, y, z, params.p, params.degenerate_threshold)
}

struct EdgeData {
    lengths: Vec<f64>,
    midpoints: Vec<f64>, // flat, dim-stride
    threshold: f64,
}

fn edge_data(p: &Polyline, params: &EnergyParams) -> EdgeData {
    let n = p.len();
    let dim = p.dim();
    let mut lengths = Vec::with_capacity(n);
    let mut midpoints = vec![0.0; n * dim];
    for e in 0..n {
        lengths.push(p.edge_length(e));
        let down = p.point(p.partition().edge_down(e));
        let up = p.point(p.partition().edge_up(e));
        for i in 0..dim {
            midpoints[e * dim + i] = 0.5 * (down[i] + up[i]);
        }
    }
    EdgeData {
        lengths,
        midpoints,
        threshold: params.degenerate_threshold * p.diameter(),
    }
}

/// Local contribution W(I1, I2, I3) of one unordered triple of pairwise
/// distinct edges. Indices are canonically sorted before evaluation, so the
/// result is bitwise identical under all permutations.
pub fn local_contribution(
    p: &Polyline,
    e1: usize,
    e2: usize,
    e3: usize,
    params: &EnergyParams,
) -> Result<f64> {
    if e1 == e2 || e2 == e3 || e1 == e3 {
        return Err(CurveError::NonDistinctEdges(e1, e2, e3));
    }
    let mut idx = [e1, e2, e3];
    idx.sort_unstable();
    let data = edge_data(p, params);
    let dim = p.dim();
    let m = |e: usize| &data.midpoints[e * dim..(e + 1) * dim];
    let k = kernel_guarded(m(idx[0]), m(idx[1]), m(idx[2]), params.p, data.threshold)?;
    Ok(data.lengths[idx[0]] * data.lengths[idx[1]] * data.lengths[idx[2]] * k)
}

/// Total discrete Menger energy: the sum over ordered triples of pairwise
/// distinct edges, evaluated as 6 times the sum over unordered triples.
///
/// The triple loop is parallelized over the outermost edge index; partial
/// sums are merged in fixed index order, so the result does not depend on
/// the number of worker threads.
pub fn total_energy(p: &Polyline, params: &EnergyParams) -> Result<f64> {
    let data = edge_data(p, params);
    Ok(6.0 * sum_unordered_triples(p, params, &data)?)
}

fn sum_unordered_triples(p: &Polyline, params: &EnergyParams, data: &EdgeData) -> Result<f64> {
    let n = p.len();
    let dim = p.dim();
    let pp = params.p;
    let partials: Result<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mi = &data.midpoints[i * dim..(i + 1) * dim];
            let li = data.lengths[i];
            let mut acc = 0.0;
            for j in (i + 1)..n {
                let mj = &data.midpoints[j * dim..(j + 1) * dim];
                let lij = li * data.lengths[j];
                for k in (j + 1)..n {
                    let mk = &data.midpoints[k * dim..(k + 1) * dim];
                    let kv = kernel_guarded(mi, mj, mk, pp, data.threshold)?;
                    acc += lij * data.lengths[k] * kv;
                }
            }
            Ok(acc)
        })
        .collect();
    Ok(partials?.iter().sum())
}

/// Energy value and analytic differential, assembled by scatter-add of the
/// closed-form partials of W over all unordered triples (times 6 for the
/// ordered sum). Parallelized like `total_energy` with a deterministic merge.
pub fn energy_differential(p: &Polyline, params: &EnergyParams) -> Result<EnergyReport> {
    let n = p.len();
    let dim = p.dim();
    let data = edge_data(p, params);
    // unit edge vectors; requires a regular polyline
    let mut tangents = vec![0.0; n * dim];
    for e in 0..n {
        let t = p.unit_edge_vector(e)?;
        tangents[e * dim..(e + 1) * dim].copy_from_slice(&t);
    }
    let pp = params.p;

    let partials: Result<Vec<(f64, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut grad = vec![0.0; n * dim];
            let mut gm = vec![0.0; 3 * dim];
            let mut energy = 0.0;
            let mi = &data.midpoints[i * dim..(i + 1) * dim];
            for j in (i + 1)..n {
                let mj = &data.midpoints[j * dim..(j + 1) * dim];
                for k in (j + 1)..n {
                    let mk = &data.midpoints[k * dim..(k + 1) * dim];
                    let (g0, rest) = gm.split_at_mut(dim);
                    let (g1, g2) = rest.split_at_mut(dim);
                    let kv = kernel_gradient(mi, mj, mk, pp, data.threshold, g0, g1, g2)?;
                    let (li, lj, lk) = (data.lengths[i], data.lengths[j], data.lengths[k]);
                    let lll = li * lj * lk;
                    energy += lll * kv;
                    for (t, &e) in [i, j, k].iter().enumerate() {
                        // d l_e: -tau at the lower, +tau at the upper vertex;
                        // the midpoint moves with factor 1/2 at both.
                        let others = lll / data.lengths[e] * kv;
                        let tau = &tangents[e * dim..(e + 1) * dim];
                        let gmid = &gm[t * dim..(t + 1) * dim];
                        let down = p.partition().edge_down(e) * dim;
                        let up = p.partition().edge_up(e) * dim;
                        for c in 0..dim {
                            let mid_term = 0.5 * lll * gmid[c];
                            grad[down + c] += -others * tau[c] + mid_term;
                            grad[up + c] += others * tau[c] + mid_term;
                        }
                    }
                }
            }
            Ok((energy, grad))
        })
        .collect();

    let partials = partials?;
    let mut value = 0.0;
    let mut differential = DVector::<f64>::zeros(n * dim);
    for (e, g) in &partials {
        value += e;
        for (slot, x) in differential.iter_mut().zip(g) {
            *slot += x;
        }
    }
    value *= 6.0;
    differential *= 6.0;
    Ok(EnergyReport {
        value,
        differential,
        triple_count: n * (n - 1) * (n - 2) / 6,
    })
}

/// Central finite differences of the total energy per vertex coordinate;
/// the independent oracle for `energy_differential`.
pub fn finite_difference_differential(
    p: &Polyline,
    params: &EnergyParams,
    h: f64,
) -> Result<DVector<f64>> {
    if !(h > 0.0) {
        return Err(CurveError::InvalidParams(format!(
            "finite difference step must be positive, got {h}"
        )));
    }
    let n = p.len();
    let dim = p.dim();
    let mut out = DVector::<f64>::zeros(n * dim);
    let mut pts = p.points_flat().to_vec();
    for dof in 0..n * dim {
        let orig = pts[dof];
        pts[dof] = orig + h;
        let plus = total_energy(&p.with_points(pts.clone())?, params)?;
        pts[dof] = orig - h;
        let minus = total_energy(&p.with_points(pts.clone())?, params)?;
        pts[dof] = orig;
        out[dof] = (plus - minus) / (2.0 * h);
    }
    Ok(out)
}
