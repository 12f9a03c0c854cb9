//! Logarithmic edge-strain constraint, its sparse Jacobian, and the
//! barycenter constraint map.
//!
//! The strain of edge I is log(l_P(I) / |I|); keeping it fixed along the
//! flow pins the parametrization speed of every edge. The barycenter map
//! complements it so that the saddle-point system has full rank.

use nalgebra::{DMatrix, DVector};

use crate::error::{CurveError, Result};
use crate::geometry::{Partition, Polyline};

/// Per-edge logarithmic strain values.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainVector {
    values: DVector<f64>,
}

impl StrainVector {
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Entrywise log of the edge speed ratio l_P(I)/|I|.
pub fn log_strain(p: &Polyline) -> Result<StrainVector> {
    let n = p.len();
    let mut values = DVector::<f64>::zeros(n);
    for e in 0..n {
        let len = p.edge_length(e);
        if len <= 0.0 {
            return Err(CurveError::DegenerateEdge { edge: e });
        }
        values[e] = (len / p.partition().edge_param_length(e)).ln();
    }
    Ok(StrainVector { values })
}

/// Sparse Jacobian of the strain map: N rows (edges) by n·N columns (vertex
/// coordinates), with exactly 2·n·N structurally nonzero entries. Row I
/// carries −τ_P(I)ᵀ/l_P(I) in the columns of ↓I and +τ_P(I)ᵀ/l_P(I) in the
/// columns of ↑I.
#[derive(Debug, Clone)]
pub struct StrainJacobian {
    n_edges: usize,
    dim: usize,
    down: Vec<usize>,
    up: Vec<usize>,
    /// τ_P(I)/l_P(I) per edge, flat with `dim` stride.
    coeffs: Vec<f64>,
}

pub fn log_strain_jacobian(p: &Polyline) -> Result<StrainJacobian> {
    let n = p.len();
    let dim = p.dim();
    let mut down = Vec::with_capacity(n);
    let mut up = Vec::with_capacity(n);
    let mut coeffs = vec![0.0; n * dim];
    for e in 0..n {
        let len = p.edge_length(e);
        if len <= 0.0 {
            return Err(CurveError::DegenerateEdge { edge: e });
        }
        let tau = p.unit_edge_vector(e)?;
        for i in 0..dim {
            coeffs[e * dim + i] = tau[i] / len;
        }
        down.push(p.partition().edge_down(e));
        up.push(p.partition().edge_up(e));
    }
    Ok(StrainJacobian {
        n_edges: n,
        dim,
        down,
        up,
        coeffs,
    })
}

impl StrainJacobian {
    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of structurally nonzero entries (2·n·N).
    pub fn nnz(&self) -> usize {
        2 * self.dim * self.n_edges
    }

    /// Degrade the Jacobian in place; lets tests exercise rank-deficient
    /// saddle systems that cannot arise from regular polylines.
    #[cfg(test)]
    pub(crate) fn zero_out(&mut self) {
        self.coeffs.fill(0.0);
    }

    /// Row `e` as (down vertex, up vertex, τ/l coefficients).
    pub fn row(&self, e: usize) -> (usize, usize, &[f64]) {
        (
            self.down[e],
            self.up[e],
            &self.coeffs[e * self.dim..(e + 1) * self.dim],
        )
    }

    /// Matrix-vector product with a vertex field of length n·N.
    pub fn apply(&self, field: &DVector<f64>) -> Result<DVector<f64>> {
        let cols = self.n_edges * self.dim;
        if field.len() != cols {
            return Err(CurveError::DimensionMismatch {
                expected: cols,
                got: field.len(),
            });
        }
        let mut out = DVector::<f64>::zeros(self.n_edges);
        for e in 0..self.n_edges {
            let mut acc = 0.0;
            for i in 0..self.dim {
                let c = self.coeffs[e * self.dim + i];
                acc += c * (field[self.up[e] * self.dim + i] - field[self.down[e] * self.dim + i]);
            }
            out[e] = acc;
        }
        Ok(out)
    }

    /// Transposed product with edge multipliers of length N.
    pub fn apply_transpose(&self, multipliers: &DVector<f64>) -> Result<DVector<f64>> {
        if multipliers.len() != self.n_edges {
            return Err(CurveError::DimensionMismatch {
                expected: self.n_edges,
                got: multipliers.len(),
            });
        }
        let mut out = DVector::<f64>::zeros(self.n_edges * self.dim);
        for e in 0..self.n_edges {
            let lam = multipliers[e];
            for i in 0..self.dim {
                let c = self.coeffs[e * self.dim + i];
                out[self.up[e] * self.dim + i] += lam * c;
                out[self.down[e] * self.dim + i] -= lam * c;
            }
        }
        Ok(out)
    }

    /// Dense N × (n·N) representation, for assembly and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.n_edges, self.n_edges * self.dim);
        for e in 0..self.n_edges {
            for i in 0..self.dim {
                let c = self.coeffs[e * self.dim + i];
                m[(e, self.down[e] * self.dim + i)] = -c;
                m[(e, self.up[e] * self.dim + i)] = c;
            }
        }
        m
    }
}

/// Dense n × (n·N) barycenter Jacobian: vertex v carries the weight
/// ½(|I_left(v)| + |I_right(v)|) in each coordinate row; rows sum to 1.
#[derive(Debug, Clone)]
pub struct BarycenterJacobian {
    dim: usize,
    weights: Vec<f64>,
}

pub fn barycenter_jacobian(partition: &Partition, dim: usize) -> BarycenterJacobian {
    let n = partition.len();
    let mut weights = vec![0.0; n];
    for e in 0..n {
        let half = 0.5 * partition.edge_param_length(e);
        weights[partition.edge_down(e)] += half;
        weights[partition.edge_up(e)] += half;
    }
    BarycenterJacobian { dim, weights }
}

impl BarycenterJacobian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn vertex_weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Apply to a vertex field; on point fields this is the barycenter.
    pub fn apply(&self, field: &DVector<f64>) -> Result<DVector<f64>> {
        let cols = self.weights.len() * self.dim;
        if field.len() != cols {
            return Err(CurveError::DimensionMismatch {
                expected: cols,
                got: field.len(),
            });
        }
        let mut out = DVector::<f64>::zeros(self.dim);
        for (v, &w) in self.weights.iter().enumerate() {
            for i in 0..self.dim {
                out[i] += w * field[v * self.dim + i];
            }
        }
        Ok(out)
    }

    pub fn apply_transpose(&self, mu: &DVector<f64>) -> Result<DVector<f64>> {
        if mu.len() != self.dim {
            return Err(CurveError::DimensionMismatch {
                expected: self.dim,
                got: mu.len(),
            });
        }
        let mut out = DVector::<f64>::zeros(self.weights.len() * self.dim);
        for (v, &w) in self.weights.iter().enumerate() {
            for i in 0..self.dim {
                out[v * self.dim + i] = w * mu[i];
            }
        }
        Ok(out)
    }
}

/// ℓ∞ deviation of the strain of `p` from a reference strain.
pub fn constraint_violation(p: &Polyline, reference: &StrainVector) -> Result<f64> {
    if reference.len() != p.len() {
        return Err(CurveError::DimensionMismatch {
            expected: p.len(),
            got: reference.len(),
        });
    }
    let strain = log_strain(p)?;
    Ok((strain.values - &reference.values).amax())
}
