//! Polygonal-curve data model: partitions of the periodic parameter domain,
//! closed polylines in R^n, and discrete geometric diagnostics.

use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CurveError, Result};
use crate::segments::segment_distance;
use crate::vecn;

pub use crate::vecn::periodic_distance;

/// Subdivision of the periodic parameter domain R/Z into edges.
///
/// Vertex parameters are strictly increasing in [0,1); edge `i` is the
/// interval [u_i, u_{i+1}) with the last edge wrapping around to u_0 + 1.
/// Edge parameter lengths are stored explicitly so that the uniform
/// partition has every |I| equal to 1/N exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    vertex_params: Vec<f64>,
    edge_lengths: Vec<f64>,
}

impl Partition {
    pub fn new(vertex_params: Vec<f64>) -> Result<Self> {
        let n = vertex_params.len();
        if n < 3 {
            return Err(CurveError::InvalidParams(format!(
                "partition needs at least 3 vertices, got {n}"
            )));
        }
        for (i, &u) in vertex_params.iter().enumerate() {
            if !u.is_finite() || !(0.0..1.0).contains(&u) {
                return Err(CurveError::InvalidParams(format!(
                    "vertex parameter {i} = {u} outside [0,1)"
                )));
            }
            if i > 0 && u <= vertex_params[i - 1] {
                return Err(CurveError::InvalidParams(format!(
                    "vertex parameters must be strictly increasing at index {i}"
                )));
            }
        }
        let mut edge_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let len = if i + 1 < n {
                vertex_params[i + 1] - vertex_params[i]
            } else {
                vertex_params[0] + 1.0 - vertex_params[n - 1]
            };
            if len <= 0.0 {
                return Err(CurveError::InvalidParams(format!(
                    "edge {i} has nonpositive parameter length {len}"
                )));
            }
            edge_lengths.push(len);
        }
        let total: f64 = edge_lengths.iter().sum();
        if (total - 1.0).abs() > 1e-14 * n as f64 {
            return Err(CurveError::InvalidParams(format!(
                "edge parameter lengths sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            vertex_params,
            edge_lengths,
        })
    }

    /// Uniform partition with vertex parameters i/N and |I| = 1/N exactly.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(CurveError::InvalidParams(format!(
                "partition needs at least 3 vertices, got {n}"
            )));
        }
        let vertex_params = (0..n).map(|i| i as f64 / n as f64).collect();
        let edge_lengths = vec![1.0 / n as f64; n];
        Ok(Self {
            vertex_params,
            edge_lengths,
        })
    }

    /// Number of vertices (equal to the number of edges).
    pub fn len(&self) -> usize {
        self.vertex_params.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex_param(&self, v: usize) -> f64 {
        self.vertex_params[v]
    }

    pub fn vertex_params(&self) -> &[f64] {
        &self.vertex_params
    }

    /// Parameter length |I| of edge `e`.
    pub fn edge_param_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    /// Parameter midpoint m(I) of edge `e`, reduced mod 1.
    pub fn edge_param_midpoint(&self, e: usize) -> f64 {
        (self.vertex_params[e] + 0.5 * self.edge_lengths[e]).rem_euclid(1.0)
    }

    /// Vertex index of the left endpoint of edge `e`.
    #[inline]
    pub fn edge_down(&self, e: usize) -> usize {
        e
    }

    /// Vertex index of the right endpoint of edge `e`.
    #[inline]
    pub fn edge_up(&self, e: usize) -> usize {
        (e + 1) % self.len()
    }

    /// Hash of the bit patterns of all parameters; identifies the partition.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for u in &self.vertex_params {
            u.to_bits().hash(&mut h);
        }
        for l in &self.edge_lengths {
            l.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Closed polygonal curve: one point in R^n per partition vertex, identified
/// with its periodic piecewise-linear interpolation.
///
/// Construction does not require positive edge lengths; operations that do
/// (tangents, angles, strains) report `DegenerateEdge` themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    partition: Partition,
    points: Vec<f64>,
    dim: usize,
}

impl Polyline {
    pub fn new(partition: Partition, points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(CurveError::InvalidParams(format!(
                "ambient dimension must be at least 2, got {dim}"
            )));
        }
        if points.len() != partition.len() * dim {
            return Err(CurveError::DimensionMismatch {
                expected: partition.len() * dim,
                got: points.len(),
            });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(CurveError::InvalidParams(
                "polyline points must be finite".into(),
            ));
        }
        Ok(Self {
            partition,
            points,
            dim,
        })
    }

    /// Polyline over the uniform partition from explicit 3-d vertices.
    pub fn uniform_from_rows(rows: &[[f64; 3]]) -> Result<Self> {
        let partition = Partition::uniform(rows.len())?;
        let points = rows.iter().flatten().copied().collect();
        Self::new(partition, points, 3)
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    #[inline]
    pub fn point(&self, v: usize) -> &[f64] {
        &self.points[v * self.dim..(v + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    /// New polyline with the same partition and dimension, different points.
    pub fn with_points(&self, points: Vec<f64>) -> Result<Self> {
        Self::new(self.partition.clone(), points, self.dim)
    }

    /// Spatial length of edge `e`: |P(↑I) − P(↓I)|.
    pub fn edge_length(&self, e: usize) -> f64 {
        vecn::dist(
            self.point(self.partition.edge_up(e)),
            self.point(self.partition.edge_down(e)),
        )
    }

    /// Unit edge vector τ_P(I) of edge `e`.
    pub fn unit_edge_vector(&self, e: usize) -> Result<Vec<f64>> {
        let len = self.edge_length(e);
        if len == 0.0 {
            return Err(CurveError::DegenerateEdge { edge: e });
        }
        let down = self.point(self.partition.edge_down(e));
        let up = self.point(self.partition.edge_up(e));
        Ok(up.iter().zip(down).map(|(a, b)| (a - b) / len).collect())
    }

    /// Spatial midpoint m_P(I) and parameter midpoint m(I) of edge `e`.
    pub fn midpoints(&self, e: usize) -> (Vec<f64>, f64) {
        let down = self.point(self.partition.edge_down(e));
        let up = self.point(self.partition.edge_up(e));
        let spatial = up.iter().zip(down).map(|(a, b)| 0.5 * (a + b)).collect();
        (spatial, self.partition.edge_param_midpoint(e))
    }

    pub fn is_regular(&self) -> bool {
        (0..self.len()).all(|e| self.edge_length(e) > 0.0)
    }

    pub fn total_length(&self) -> f64 {
        (0..self.len()).map(|e| self.edge_length(e)).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        (0..self.len())
            .map(|e| self.edge_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.len())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Maximal pairwise vertex distance; scale reference for tolerances.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(vecn::dist(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Turning angle at every vertex: angle between the unit edge vectors of
    /// the incoming and outgoing edge, with the cosine clamped to [−1,1].
    pub fn turning_angles(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let mut tangents = Vec::with_capacity(n);
        for e in 0..n {
            tangents.push(self.unit_edge_vector(e)?);
        }
        let mut angles = Vec::with_capacity(n);
        for v in 0..n {
            let prev = &tangents[(v + n - 1) % n];
            let cur = &tangents[v];
            angles.push(vecn::dot(prev, cur).clamp(-1.0, 1.0).acos());
        }
        Ok(angles)
    }

    /// Trapezoidal barycenter ½ Σ_I (P(↓I)+P(↑I)) |I|.
    pub fn barycenter(&self) -> Vec<f64> {
        let n = self.len();
        let mut bary = vec![0.0; self.dim];
        for e in 0..n {
            let w = 0.5 * self.partition.edge_param_length(e);
            vecn::axpy(w, self.point(self.partition.edge_down(e)), &mut bary);
            vecn::axpy(w, self.point(self.partition.edge_up(e)), &mut bary);
        }
        bary
    }

    /// Discrete bilipschitz constant: minimum of chord length over periodic
    /// parameter distance across all distinct vertex pairs. This vertex-pair
    /// quotient is an upper bound for the continuum infimum and serves as an
    /// embeddedness diagnostic.
    pub fn bilipschitz_constant(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let du = periodic_distance(
                    self.partition.vertex_param(i),
                    self.partition.vertex_param(j),
                );
                best = best.min(vecn::dist(self.point(i), self.point(j)) / du);
            }
        }
        best
    }

    /// Smallest eigenvalue of the tangent-spread operator
    /// Θ_P = Σ_I (Id − τ_P(I) τ_P(I)ᵀ) |I|, a symmetric n×n matrix with
    /// eigenvalues in [0, 1] since the parameter measure is 1.
    pub fn theta_min_eigenvalue(&self) -> Result<f64> {
        let dim = self.dim;
        let mut theta = DMatrix::<f64>::zeros(dim, dim);
        for e in 0..self.len() {
            let tau = self.unit_edge_vector(e)?;
            let w = self.partition.edge_param_length(e);
            for i in 0..dim {
                theta[(i, i)] += w;
                for j in 0..dim {
                    theta[(i, j)] -= w * tau[i] * tau[j];
                }
            }
        }
        let eig = theta.symmetric_eigen();
        Ok(eig
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
            .max(0.0))
    }

    /// Discrete Lipschitz constant of the unit tangent in the angular metric:
    /// max over distinct edge pairs of the spherical distance of the unit edge
    /// vectors divided by the periodic distance of the parameter midpoints.
    pub fn tangent_lipschitz_angular(&self) -> Result<f64> {
        let n = self.len();
        let mut tangents = Vec::with_capacity(n);
        for e in 0..n {
            tangents.push(self.unit_edge_vector(e)?);
        }
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let angle = vecn::dot(&tangents[i], &tangents[j])
                    .clamp(-1.0, 1.0)
                    .acos();
                let du = periodic_distance(
                    self.partition.edge_param_midpoint(i),
                    self.partition.edge_param_midpoint(j),
                );
                if du > 0.0 {
                    best = best.max(angle / du);
                }
            }
        }
        Ok(best)
    }
}

/// Lower bound for the smallest eigenvalue of the tangent-spread operator of
/// a closed curve whose unit tangent is α-Hölder with constant
/// `holder_constant` in the angular metric:
/// π²/(2+1/α)² · (π/((2+4α)·C))^{1/α}.
pub fn theta_spread_lower_bound(holder_constant: f64, alpha: f64) -> f64 {
    if holder_constant <= 0.0 {
        return f64::INFINITY;
    }
    let pi = std::f64::consts::PI;
    (pi / (2.0 + 1.0 / alpha)).powi(2)
        * (pi / ((2.0 + 4.0 * alpha) * holder_constant)).powf(1.0 / alpha)
}

/// Summary of the discrete geometric diagnostics of a regular polyline.
#[derive(Debug, Clone)]
pub struct GeometryDiagnostics {
    pub bilipschitz: f64,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub max_turning_angle: f64,
    pub total_length: f64,
    pub barycenter: Vec<f64>,
    pub theta_min_eigenvalue: f64,
}

impl GeometryDiagnostics {
    pub fn compute(p: &Polyline) -> Result<Self> {
        let angles = p.turning_angles()?;
        Ok(Self {
            bilipschitz: p.bilipschitz_constant(),
            min_edge_length: p.min_edge_length(),
            max_edge_length: p.max_edge_length(),
            max_turning_angle: angles.iter().fold(0.0, |a: f64, &b| a.max(b)),
            total_length: p.total_length(),
            barycenter: p.barycenter(),
            theta_min_eigenvalue: p.theta_min_eigenvalue()?,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// (a,b) torus knot sampled at N uniform parameters:
/// t ↦ ((R + r cos 2πbt) cos 2πat, (R + r cos 2πbt) sin 2πat, r sin 2πbt).
///
/// Requires gcd(a,b) = 1 (b = 0 with a = 1 yields the planar circle of
/// radius R + r), N ≥ 3 and R > r > 0.
pub fn generate_torus_knot(a: i64, b: i64, n: usize, major: f64, minor: f64) -> Result<Polyline> {
    if a < 0 || b < 0 {
        return Err(CurveError::InvalidParams(
            "torus knot winding numbers must be nonnegative".into(),
        ));
    }
    if gcd(a as u64, b as u64) != 1 {
        return Err(CurveError::InvalidParams(format!(
            "torus knot windings must be coprime, got ({a}, {b})"
        )));
    }
    if !(major > minor && minor > 0.0) {
        return Err(CurveError::InvalidParams(format!(
            "torus radii must satisfy R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    let partition = Partition::uniform(n)?;
    let tau = std::f64::consts::TAU;
    let mut points = Vec::with_capacity(3 * n);
    for i in 0..n {
        let t = i as f64 / n as f64;
        let (sa, ca) = (tau * a as f64 * t).sin_cos();
        let (sb, cb) = (tau * b as f64 * t).sin_cos();
        let rho = major + minor * cb;
        points.push(rho * ca);
        points.push(rho * sa);
        points.push(minor * sb);
    }
    Polyline::new(partition, points, 3)
}

/// Square knot (connected sum of a right- and a left-handed trefoil) with N
/// vertices, N even and at least 16.
///
/// Two mirror-image trefoils are placed left and right of the yz-plane, one
/// vertex facing the gap is removed from each, and the open ends are joined
/// by two bridge segments. Of the two possible bridge pairings the one with
/// the larger bridge separation is used.
pub fn generate_square_knot(n: usize) -> Result<Polyline> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(CurveError::InvalidParams(format!(
            "square knot needs an even vertex count of at least 16, got {n}"
        )));
    }
    let m = n / 2 + 1; // vertices per trefoil before removing the cut vertex
    let trefoil = generate_torus_knot(2, 3, m, 2.0, 1.0)?;
    let offset = 4.0;

    let mut left = Vec::with_capacity(m); // x shifted by -offset
    let mut right = Vec::with_capacity(m); // mirrored (z negated), +offset
    for v in 0..m {
        let p = trefoil.point(v);
        left.push([p[0] - offset, p[1], p[2]]);
        right.push([p[0] + offset, p[1], -p[2]]);
    }

    // cut vertices facing the gap
    let cut_left = (0..m)
        .max_by(|&i, &j| left[i][0].total_cmp(&left[j][0]))
        .unwrap();
    let cut_right = (0..m)
        .min_by(|&i, &j| right[i][0].total_cmp(&right[j][0]))
        .unwrap();

    let left_arc: Vec<[f64; 3]> = (1..m).map(|k| left[(cut_left + k) % m]).collect();
    let forward: Vec<[f64; 3]> = (1..m).map(|k| right[(cut_right + k) % m]).collect();
    let backward: Vec<[f64; 3]> = forward.iter().rev().copied().collect();

    // The two bridges connect the ends of the arcs; pick the pairing whose
    // bridges stay farther apart.
    let separation = |arc: &[[f64; 3]]| {
        let b1 = (*left_arc.last().unwrap(), arc[0]);
        let b2 = (*arc.last().unwrap(), left_arc[0]);
        segment_distance(&b1.0, &b1.1, &b2.0, &b2.1)
    };
    let right_arc = if separation(&forward) >= separation(&backward) {
        forward
    } else {
        backward
    };

    let mut rows = left_arc;
    rows.extend(right_arc);
    debug_assert_eq!(rows.len(), n);
    Polyline::uniform_from_rows(&rows)
}

/// Perturb every vertex coordinate by an independent uniform sample from
/// [−amplitude, amplitude].
///
/// Reproducible across platforms: a ChaCha8 stream seeded from `seed` (via
/// the standard SplitMix64 expansion) yields one u64 per coordinate, mapped
/// to [0,1) by taking the top 53 bits.
pub fn add_vertex_noise(p: &Polyline, amplitude: f64, seed: u64) -> Result<Polyline> {
    if !(amplitude >= 0.0) {
        return Err(CurveError::InvalidParams(format!(
            "noise amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = p.points_flat().to_vec();
    for x in &mut points {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        *x += amplitude * (2.0 * u - 1.0);
    }
    p.with_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn unit_square() -> Polyline {
        Polyline::uniform_from_rows(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn regular_ngon(n: usize) -> Polyline {
        let rows: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        Polyline::uniform_from_rows(&rows).unwrap()
    }

    #[test]
    fn edge_lengths_of_unit_square() {
        let p = unit_square();
        for e in 0..4 {
            assert_eq!(p.edge_length(e), 1.0);
        }
    }

    #[test]
    fn duplicate_points_give_zero_edge() {
        let p = Polyline::uniform_from_rows(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
            .unwrap();
        assert_eq!(p.edge_length(0), 0.0);
        assert!(!p.is_regular());
        assert!(matches!(
            p.unit_edge_vector(0),
            Err(CurveError::DegenerateEdge { edge: 0 })
        ));
    }

    #[test]
    fn equilateral_triangle_scaled_edges() {
        let s = 2.0;
        let h = s * 3f64.sqrt() / 2.0;
        let p = Polyline::uniform_from_rows(&[[0.0, 0.0, 0.0], [s, 0.0, 0.0], [s / 2.0, h, 0.0]])
            .unwrap();
        for e in 0..3 {
            assert!((p.edge_length(e) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_edge_vectors() {
        let p = unit_square();
        assert_eq!(p.unit_edge_vector(0).unwrap(), vec![1.0, 0.0, 0.0]);
        let q = Polyline::uniform_from_rows(&[[0.0, 0.0, 0.0], [3.0, 4.0, 0.0], [0.0, 4.0, 0.0]])
            .unwrap();
        let t = q.unit_edge_vector(0).unwrap();
        assert!((t[0] - 0.6).abs() < 1e-15 && (t[1] - 0.8).abs() < 1e-15);
        assert!((vecn::norm(&t) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn midpoints_of_edges() {
        let p = unit_square();
        let (spatial, param) = p.midpoints(0);
        assert_eq!(spatial, vec![0.5, 0.0, 0.0]);
        assert_eq!(param, 0.125);

        // wrapping edge [0.875, 1) ∪ [0, 0.125) has parameter midpoint 0
        let part = Partition::new(vec![0.125, 0.375, 0.625, 0.875]).unwrap();
        assert_eq!(part.edge_param_midpoint(3), 0.0);

        let tri = Partition::uniform(3).unwrap();
        assert!((tri.edge_param_midpoint(0) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn bilipschitz_of_unit_square() {
        let p = unit_square();
        let expected = 8f64.sqrt(); // opposite vertices: sqrt(2) / (1/2)
        assert!((p.bilipschitz_constant() - expected).abs() < 1e-12);
    }

    #[test]
    fn bilipschitz_zero_for_coincident_vertices() {
        let p = Polyline::uniform_from_rows(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [-1.0, 0.5, 0.0],
        ])
        .unwrap();
        assert_eq!(p.bilipschitz_constant(), 0.0);
    }

    #[test]
    fn bilipschitz_is_positively_homogeneous() {
        for mu in [0.5, 3.0] {
            let p = regular_ngon(7);
            let scaled = p
                .with_points(p.points_flat().iter().map(|x| mu * x).collect())
                .unwrap();
            assert!(
                (scaled.bilipschitz_constant() - mu * p.bilipschitz_constant()).abs() < 1e-12 * mu
            );
        }
    }

    #[test]
    fn turning_angles_square_hexagon_collinear() {
        let p = unit_square();
        for a in p.turning_angles().unwrap() {
            assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        }
        let hexagon = regular_ngon(6);
        for a in hexagon.turning_angles().unwrap() {
            assert!((a - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
        }
        // collinear consecutive edges turn by 0 at the middle vertices
        let p = Polyline::uniform_from_rows(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
            [1.5, 2.0, 0.0],
        ])
        .unwrap();
        let angles = p.turning_angles().unwrap();
        assert!(angles[1].abs() < 1e-12 && angles[2].abs() < 1e-12);
    }

    #[test]
    fn barycenter_square_and_translation() {
        let p = unit_square();
        let b = p.barycenter();
        assert!((b[0] - 0.5).abs() < 1e-15 && (b[1] - 0.5).abs() < 1e-15 && b[2].abs() < 1e-15);

        let c = [0.3, -1.7, 2.5];
        let translated = p
            .with_points(
                p.points_flat()
                    .chunks(3)
                    .flat_map(|row| [row[0] + c[0], row[1] + c[1], row[2] + c[2]])
                    .collect(),
            )
            .unwrap();
        let bt = translated.barycenter();
        for i in 0..3 {
            assert!((bt[i] - b[i] - c[i]).abs() < 1e-14);
        }

        // all vertices equal: barycenter is that point
        let q = Polyline::uniform_from_rows(&[[2.0, 1.0, -3.0]; 5]).unwrap();
        let bq = q.barycenter();
        for (got, want) in bq.iter().zip([2.0, 1.0, -3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_eigenvalues_of_square() {
        // tangents alternate ±e1, ±e2: Θ = diag(1/2, 1/2, 1), min 1/2
        let p = unit_square();
        assert!((p.theta_min_eigenvalue().unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn theta_invariant_under_rotation() {
        let p = generate_torus_knot(2, 3, 40, 2.0, 1.0).unwrap();
        let a = 0.7f64;
        let (s, c) = a.sin_cos();
        let rotated = p
            .with_points(
                p.points_flat()
                    .chunks(3)
                    .flat_map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]])
                    .collect(),
            )
            .unwrap();
        let lhs = p.theta_min_eigenvalue().unwrap();
        let rhs = rotated.theta_min_eigenvalue().unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn theta_bound_holds_for_torus_knots() {
        for (a, b) in [(2i64, 3i64), (3, 2), (5, 3)] {
            let p = generate_torus_knot(a, b, 96, 2.0, 1.0).unwrap();
            let lam = p.theta_min_eigenvalue().unwrap();
            let c = p.tangent_lipschitz_angular().unwrap();
            let bound = theta_spread_lower_bound(c, 1.0);
            assert!(
                lam >= bound,
                "({a},{b}): lambda_min {lam} below bound {bound}"
            );
        }
    }

    #[test]
    fn closed_curve_tangent_identity() {
        let p = generate_torus_knot(3, 2, 50, 2.0, 0.8).unwrap();
        let mut sum = [0.0; 3];
        for e in 0..p.len() {
            let t = p.unit_edge_vector(e).unwrap();
            vecn::axpy(p.edge_length(e), &t, &mut sum);
        }
        assert!(vecn::norm(&sum) < 1e-12);
    }

    #[test]
    fn torus_knot_generator() {
        // b = 0 with a = 1: planar circle of radius R + r
        let circle = generate_torus_knot(1, 0, 12, 2.0, 1.0).unwrap();
        for v in 0..12 {
            let p = circle.point(v);
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((rho - 3.0).abs() < 1e-12 && p[2].abs() < 1e-15);
        }

        let trefoil = generate_torus_knot(2, 3, 48, 2.0, 1.0).unwrap();
        assert!(trefoil.is_regular());
        assert!(trefoil.min_edge_length() > 0.0);

        assert!(matches!(
            generate_torus_knot(2, 4, 48, 2.0, 1.0),
            Err(CurveError::InvalidParams(_))
        ));
        assert!(generate_torus_knot(5, 3, 240, 2.0, 1.0).is_ok());
        assert!(matches!(
            generate_torus_knot(2, 3, 2, 2.0, 1.0),
            Err(CurveError::InvalidParams(_))
        ));
    }

    #[test]
    fn vertex_noise_contracts() {
        let p = generate_square_knot(600).unwrap();
        let same = add_vertex_noise(&p, 0.0, 7).unwrap();
        assert_eq!(p.points_flat(), same.points_flat());

        let a = add_vertex_noise(&p, 0.05, 42).unwrap();
        let b = add_vertex_noise(&p, 0.05, 42).unwrap();
        assert_eq!(a.points_flat(), b.points_flat());

        let c = add_vertex_noise(&p, 0.05, 43).unwrap();
        assert_ne!(a.points_flat(), c.points_flat());

        assert!(a.is_regular());
    }

    #[test]
    fn square_knot_is_regular_and_balanced() {
        let p = generate_square_knot(120).unwrap();
        assert_eq!(p.len(), 120);
        assert!(p.is_regular());
        // the two summands sit on either side of the yz-plane
        let xs: Vec<f64> = p.points_flat().chunks(3).map(|r| r[0]).collect();
        assert!(xs.iter().cloned().fold(f64::INFINITY, f64::min) < -4.0);
        assert!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 4.0);
    }

    #[test]
    fn partition_invariants() {
        let part = Partition::uniform(17).unwrap();
        let total: f64 = (0..17).map(|e| part.edge_param_length(e)).sum();
        assert!((total - 1.0).abs() <= 1e-14 * 17.0);
        for e in 0..17 {
            assert_eq!(part.edge_param_length(e), 1.0 / 17.0);
        }
        assert!(Partition::uniform(2).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 1.0]).is_err());
    }

    #[test]
    fn diagnostics_of_square() {
        let d = GeometryDiagnostics::compute(&unit_square()).unwrap();
        assert_eq!(d.min_edge_length, 1.0);
        assert_eq!(d.max_edge_length, 1.0);
        assert!((d.total_length - 4.0).abs() < 1e-15);
        assert!((d.max_turning_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((d.bilipschitz - 8f64.sqrt()).abs() < 1e-12);
        assert!((d.theta_min_eigenvalue - 0.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn periodic_distance_symmetric_and_bounded(a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let d1 = periodic_distance(a, b);
            let d2 = periodic_distance(b, a);
            prop_assert!((d1 - d2).abs() < 1e-15);
            prop_assert!((0.0..=0.5 + 1e-15).contains(&d1));
        }

        #[test]
        fn barycenter_translation_equivariant(
            c in proptest::array::uniform3(-10.0..10.0f64),
            seed in 0u64..1000,
        ) {
            let p = add_vertex_noise(&regular_ngon(9), 0.3, seed).unwrap();
            let b = p.barycenter();
            let t = p.with_points(
                p.points_flat().chunks(3).flat_map(|r| [r[0]+c[0], r[1]+c[1], r[2]+c[2]]).collect()
            ).unwrap();
            let bt = t.barycenter();
            for i in 0..3 {
                prop_assert!((bt[i] - b[i] - c[i]).abs() < 1e-13);
            }
        }
    }
}
