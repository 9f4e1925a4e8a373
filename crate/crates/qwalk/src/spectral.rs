//! Spectral decomposition of real symmetric matrices into distinct eigenvalues
//! with orthogonal projectors, and the transition matrix U(t) = exp(i t M).
//!
//! With M = sum_j theta_j F_j over distinct eigenvalues, the walk factors as
//! U(t) = sum_j e^{i t theta_j} F_j, which is the representation every
//! transfer computation in this crate runs on. Eigenvalues within a cluster
//! tolerance (relative to the spectral diameter) are merged into a single
//! projector; this is what makes supports and strong cospectrality robust for
//! matrices with exact multiplicities computed in floating point.

use nalgebra::SymmetricEigen;

use crate::{Complex64, ComplexMatrix, RealMatrix, RealVector, CLUSTER_TOL, SUPPORT_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("matrix is not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),
    #[error("matrix is empty or not square")]
    BadShape,
    #[error(
        "eigenvalue clustering is ambiguous: clusters separated by {gap:.3e} \
         exceed the tolerance {tol:.3e} but sit within 10 eps of each other"
    )]
    ClusterAmbiguous { gap: f64, tol: f64 },
    #[error("cluster tolerance must be a finite non-negative number")]
    BadTolerance,
}

/// M = sum_j eigenvalues[j] * projectors[j], eigenvalues strictly increasing.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<RealMatrix>,
    /// Absolute merge tolerance that was applied.
    cluster_tol: f64,
    n: usize,
}

/// Decomposes a symmetric matrix, merging eigenvalues whose gaps are at most
/// `rel_cluster_tol` times the spectral diameter.
pub fn eigendecompose(
    m: &RealMatrix,
    rel_cluster_tol: f64,
) -> Result<SpectralDecomposition, SpectralError> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(SpectralError::BadShape);
    }
    if !(rel_cluster_tol >= 0.0) || !rel_cluster_tol.is_finite() {
        return Err(SpectralError::BadTolerance);
    }
    let scale = m.amax().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(SpectralError::NotSymmetric(asym));
    }

    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let diameter = sorted[n - 1] - sorted[0];
    let tol_abs = rel_cluster_tol * diameter;

    // Group consecutive eigenvalues with gaps <= tol_abs.
    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    let mut boundaries: Vec<f64> = Vec::new();
    for k in 1..n {
        let gap = sorted[k] - sorted[k - 1];
        if gap <= tol_abs {
            clusters.last_mut().unwrap().push(order[k]);
        } else {
            boundaries.push(gap);
            clusters.push(vec![order[k]]);
        }
    }
    let eps_guard = 10.0 * f64::EPSILON * sorted[n - 1].abs().max(sorted[0].abs()).max(1.0);
    for &gap in &boundaries {
        if gap < eps_guard {
            return Err(SpectralError::ClusterAmbiguous { gap, tol: tol_abs });
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let theta = cluster.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cluster.len() as f64;
        let mut f = RealMatrix::zeros(n, n);
        for &i in cluster {
            let v = eig.eigenvectors.column(i);
            f.syger(1.0, &v, &v, 1.0);
        }
        // syger fills the lower triangle; mirror it.
        for r in 0..n {
            for c in (r + 1)..n {
                f[(r, c)] = f[(c, r)];
            }
        }
        eigenvalues.push(theta);
        projectors.push(f);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        cluster_tol: tol_abs,
        n,
    })
}

/// Decomposition with the default relative cluster tolerance.
pub fn eigendecompose_default(m: &RealMatrix) -> Result<SpectralDecomposition, SpectralError> {
    eigendecompose(m, CLUSTER_TOL)
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct eigenvalues.
    pub fn num_distinct(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[RealMatrix] {
        &self.projectors
    }

    pub fn projector(&self, j: usize) -> &RealMatrix {
        &self.projectors[j]
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Multiplicity of the j-th distinct eigenvalue (trace of its projector).
    pub fn multiplicity(&self, j: usize) -> usize {
        self.projectors[j].trace().round() as usize
    }

    pub fn spectral_diameter(&self) -> f64 {
        self.eigenvalues.last().unwrap() - self.eigenvalues.first().unwrap()
    }

    /// sum_j theta_j F_j; equals the input up to eigensolver accuracy.
    pub fn reconstruct(&self) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.n, self.n);
        for (theta, f) in self.eigenvalues.iter().zip(&self.projectors) {
            m += f * *theta;
        }
        m
    }

    /// U(t) = sum_j e^{i t theta_j} F_j. Symmetric unitary for real symmetric
    /// input.
    pub fn transition_matrix(&self, t: f64) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(self.n, self.n);
        for (theta, f) in self.eigenvalues.iter().zip(&self.projectors) {
            let phase = Complex64::from_polar(1.0, t * theta);
            for r in 0..self.n {
                for c in 0..self.n {
                    u[(r, c)] += phase * f[(r, c)];
                }
            }
        }
        u
    }

    /// Per-eigenvalue transfer coefficients c_j = y^T F_j x, so that the
    /// amplitude y^T U(t) x is sum_j c_j e^{i t theta_j}. Precomputing these
    /// makes time-grid scans O(#eigenvalues) per point.
    pub fn transfer_coefficients(&self, x: &RealVector, y: &RealVector) -> Vec<f64> {
        self.projectors.iter().map(|f| (y.transpose() * f * x)[(0, 0)]).collect()
    }

    /// Indices j with ||F_j x|| > support_tol.
    pub fn support_indices(&self, x: &RealVector, support_tol: f64) -> Vec<usize> {
        self.projectors
            .iter()
            .enumerate()
            .filter(|(_, f)| (*f * x).norm() > support_tol)
            .map(|(j, _)| j)
            .collect()
    }

    /// Eigenvalue support of a state: distinct eigenvalues whose projector
    /// does not annihilate it.
    pub fn eigenvalue_support(&self, x: &RealVector, support_tol: f64) -> Vec<f64> {
        self.support_indices(x, support_tol)
            .into_iter()
            .map(|j| self.eigenvalues[j])
            .collect()
    }

    /// A state supported on a single eigenvalue only acquires a global phase;
    /// it never transfers anywhere.
    pub fn is_fixed_state(&self, x: &RealVector) -> bool {
        self.support_indices(x, SUPPORT_TOL).len() == 1
    }
}
