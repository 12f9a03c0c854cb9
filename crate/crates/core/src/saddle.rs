//! Assembly and factorization of the symmetric saddle-point (KKT) matrix
//!
//! ```text
//! A = | J   Bᵀ  Cᵀ |
//!     | B   0   0  |
//!     | C   0   0  |
//! ```
//!
//! coupling the Gagliardo metric J with the strain Jacobian B and the
//! barycenter map C. The right-hand side (DE, 0, 0) yields the projected
//! gradient; (0, violation, 0) yields a feasibility-restoration update.
//! One dense LU factorization with partial pivoting is computed per flow
//! step and shared by all solves of that step.
//!
//! Degree-of-freedom ordering: the primal block is vertex-major and
//! coordinate-minor (dof (v, i) at index v·n + i), followed by N edge
//! multipliers, followed by n barycenter multipliers.

use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};

use crate::constraints::{BarycenterJacobian, StrainJacobian};
use crate::error::{CurveError, Result};
use crate::metric::GagliardoMatrix;

/// Assembled (and optionally factorized) saddle-point system of dimension
/// (n+1)·N + n.
pub struct SaddleSystem {
    n_vertices: usize,
    ambient_dim: usize,
    matrix: DMatrix<f64>,
    factorization: Option<LU<f64, Dyn, Dyn>>,
    /// Symmetric Jacobi equilibration factors applied before factorizing;
    /// the metric and constraint blocks differ by many orders of magnitude.
    row_scale: Vec<f64>,
    pivot_ratio: f64,
    base_point_fingerprint: u64,
    factorize_count: u32,
    solve_count: AtomicU64,
}

/// Assemble the saddle matrix from the metric and the two constraint maps
/// evaluated at the current base point.
pub fn assemble_saddle(
    j: &GagliardoMatrix,
    b: &StrainJacobian,
    c: &BarycenterJacobian,
) -> Result<SaddleSystem> {
    let n = j.n_vertices();
    let dim = j.dim();
    if b.n_edges() != n || c.n_vertices() != n {
        return Err(CurveError::DimensionMismatch {
            expected: n,
            got: if b.n_edges() != n {
                b.n_edges()
            } else {
                c.n_vertices()
            },
        });
    }
    if b.dim() != dim || c.dim() != dim {
        return Err(CurveError::DimensionMismatch {
            expected: dim,
            got: if b.dim() != dim { b.dim() } else { c.dim() },
        });
    }

    let primal = n * dim;
    let total = primal + n + dim;
    let mut a = DMatrix::<f64>::zeros(total, total);

    // metric block, expanded block-diagonally over the spatial components
    let block = j.block();
    for v in 0..n {
        for w in 0..n {
            let val = block[(v, w)];
            for i in 0..dim {
                a[(v * dim + i, w * dim + i)] = val;
            }
        }
    }
    // strain rows/columns
    for e in 0..n {
        let (down, up, coeffs) = b.row(e);
        let r = primal + e;
        for i in 0..dim {
            a[(r, down * dim + i)] = -coeffs[i];
            a[(r, up * dim + i)] = coeffs[i];
            a[(down * dim + i, r)] = -coeffs[i];
            a[(up * dim + i, r)] = coeffs[i];
        }
    }
    // barycenter rows/columns
    for v in 0..n {
        let w = c.vertex_weight(v);
        for i in 0..dim {
            let r = primal + n + i;
            a[(r, v * dim + i)] = w;
            a[(v * dim + i, r)] = w;
        }
    }

    let mut h = std::collections::hash_map::DefaultHasher::new();
    j.assembled_for().hash(&mut h);
    for e in 0..n {
        let (_, _, coeffs) = b.row(e);
        for x in coeffs {
            x.to_bits().hash(&mut h);
        }
    }

    Ok(SaddleSystem {
        n_vertices: n,
        ambient_dim: dim,
        matrix: a,
        factorization: None,
        row_scale: Vec::new(),
        pivot_ratio: f64::NAN,
        base_point_fingerprint: h.finish(),
        factorize_count: 0,
        solve_count: AtomicU64::new(0),
    })
}

impl SaddleSystem {
    /// Total dimension (n+1)·N + n.
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn base_point_fingerprint(&self) -> u64 {
        self.base_point_fingerprint
    }

    pub fn is_factorized(&self) -> bool {
        self.factorization.is_some()
    }

    /// Number of factorizations computed on this system (0 or 1).
    pub fn factorize_count(&self) -> u32 {
        self.factorize_count
    }

    /// Number of back-substitution solves served by the factorization.
    pub fn solve_count(&self) -> u64 {
        self.solve_count.load(Ordering::Relaxed)
    }

    /// Ratio of the smallest to the largest pivot magnitude seen by the
    /// factorization; a crude conditioning diagnostic.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    /// Dense LU factorization with partial (row) pivoting of the
    /// symmetrically equilibrated matrix. Subsequent solves are
    /// back-substitutions only.
    pub fn factorize(&mut self) -> Result<()> {
        let total = self.dimension();
        let mut scale = vec![1.0; total];
        for (i, s) in scale.iter_mut().enumerate() {
            let m = self.matrix.row(i).amax();
            if m > 0.0 {
                *s = 1.0 / m.sqrt();
            }
        }
        let mut scaled = self.matrix.clone();
        for r in 0..total {
            for c in 0..total {
                scaled[(r, c)] *= scale[r] * scale[c];
            }
        }
        let lu = scaled.lu();
        let u = lu.u();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for i in 0..total {
            let d = u[(i, i)].abs();
            min_pivot = min_pivot.min(d);
            max_pivot = max_pivot.max(d);
        }
        let ratio = if max_pivot > 0.0 {
            min_pivot / max_pivot
        } else {
            0.0
        };
        self.pivot_ratio = ratio;
        if ratio <= f64::EPSILON * total as f64 {
            return Err(CurveError::SingularSystem { pivot_ratio: ratio });
        }
        self.row_scale = scale;
        self.factorization = Some(lu);
        self.factorize_count += 1;
        Ok(())
    }

    fn solve_raw(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let lu = self
            .factorization
            .as_ref()
            .ok_or(CurveError::NotFactorized)?;
        // A x = b  <=>  (D A D) (D^-1 x) = D b with the equilibration D
        let scaled_rhs = DVector::from_iterator(
            rhs.len(),
            rhs.iter().zip(&self.row_scale).map(|(b, s)| b * s),
        );
        let y = lu.solve(&scaled_rhs).ok_or(CurveError::SingularSystem {
            pivot_ratio: self.pivot_ratio,
        })?;
        let x = DVector::from_iterator(y.len(), y.iter().zip(&self.row_scale).map(|(y, s)| y * s));
        self.solve_count.fetch_add(1, Ordering::Relaxed);
        Ok(x)
    }

    fn split(&self, x: DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let primal = self.n_vertices * self.ambient_dim;
        let g = DVector::from_column_slice(&x.as_slice()[..primal]);
        let lambda = DVector::from_column_slice(&x.as_slice()[primal..primal + self.n_vertices]);
        let mu = DVector::from_column_slice(&x.as_slice()[primal + self.n_vertices..]);
        (g, lambda, mu)
    }

    /// Solve A (g, λ, μ) = (differential, 0, 0): g is the projected gradient,
    /// J-orthogonal projection of the metric gradient onto the null space of
    /// both constraint Jacobians.
    pub fn solve_projected_gradient(
        &self,
        differential: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let primal = self.n_vertices * self.ambient_dim;
        if differential.len() != primal {
            return Err(CurveError::DimensionMismatch {
                expected: primal,
                got: differential.len(),
            });
        }
        let mut rhs = DVector::<f64>::zeros(self.dimension());
        rhs.rows_mut(0, primal).copy_from(differential);
        Ok(self.split(self.solve_raw(&rhs)?))
    }

    /// Solve A (v, λ, μ) = (0, violation, 0): v is the restoration update,
    /// J-orthogonal to the constraint null space at the base point.
    pub fn solve_restoration(
        &self,
        violation: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        if violation.len() != self.n_vertices {
            return Err(CurveError::DimensionMismatch {
                expected: self.n_vertices,
                got: violation.len(),
            });
        }
        let primal = self.n_vertices * self.ambient_dim;
        let mut rhs = DVector::<f64>::zeros(self.dimension());
        rhs.rows_mut(primal, self.n_vertices).copy_from(violation);
        Ok(self.split(self.solve_raw(&rhs)?))
    }
}
