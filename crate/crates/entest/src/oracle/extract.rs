//! Optimal projective measurement read off the eigenstructure of a
//! numerically averaged state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::DensityOperator;

/// Default eigenvalue clustering tolerance: far above quadrature roundoff
/// and the Monte Carlo noise of a 10^6-sample run, far below the spectral
/// gaps at a generic reference point.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;

/// Recommended reference point for extraction, away from the degenerate
/// ends b = 0 and b = 1.
pub const REFERENCE_B: f64 = 0.3;

/// Mutually orthogonal projectors resolving the identity on the support of
/// the averaged state, one per distinct eigenvalue, sorted by decreasing
/// block dimension (decreasing spin).
#[derive(Debug, Clone)]
pub struct ProjectivePovm {
    projectors: Vec<DMatrix<Complex64>>,
    block_dims: Vec<usize>,
}

impl ProjectivePovm {
    pub fn projectors(&self) -> &[DMatrix<Complex64>] {
        &self.projectors
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn outcome_count(&self) -> usize {
        self.projectors.len()
    }

    /// P_k^2 = P_k, P_k P_l = 0, all within 1e-9.
    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.projectors.iter().enumerate() {
            let idem = p * p - p;
            let defect = idem.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > 1e-9 {
                return Err(Error::InvalidPovm(format!(
                    "projector {k} idempotency defect {defect:.2e}"
                )));
            }
            for (l, q) in self.projectors.iter().enumerate().skip(k + 1) {
                let cross = p * q;
                let defect = cross.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if defect > 1e-9 {
                    return Err(Error::InvalidPovm(format!(
                        "projectors {k},{l} overlap {defect:.2e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Diagonalizes rho, clusters its eigenvalues by absolute gap, drops the
/// numerical null space, and returns one projector per surviving cluster.
///
/// Extraction should happen at a generic parameter value (see
/// [`REFERENCE_B`]): near b = 0 gaps can shrink and at b = 1 the lower
/// blocks vanish into the null space.
pub fn extract_povm(rho: &DensityOperator, cluster_tol: f64) -> Result<ProjectivePovm> {
    let eig = rho.matrix().clone().symmetric_eigen();
    let dim = rho.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    // Clusters of indices with eigenvalue gaps below the tolerance.
    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    let mut gaps: Vec<f64> = Vec::new();
    for win in order.windows(2) {
        let gap = eig.eigenvalues[win[0]] - eig.eigenvalues[win[1]];
        if gap > cluster_tol {
            gaps.push(gap);
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(win[1]);
    }

    // Drop trailing clusters that are numerically zero: the complement of
    // the symmetric subspace.
    while let Some(last) = clusters.last() {
        let mean: f64 =
            last.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / last.len() as f64;
        if mean.abs() < cluster_tol {
            clusters.pop();
            gaps.pop();
        } else {
            break;
        }
    }
    if clusters.is_empty() {
        return Err(Error::InvalidPovm("state has empty support".into()));
    }

    // Gap hygiene: every surviving separation must clear 10x the tolerance,
    // otherwise the clustering is ambiguous at this parameter value.
    if let Some(&gap) = gaps
        .iter()
        .filter(|g| g.is_finite())
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if gap < 10.0 * cluster_tol {
            return Err(Error::AmbiguousClustering {
                gap,
                tol: cluster_tol,
            });
        }
    }

    let mut povm: Vec<(usize, DMatrix<Complex64>)> = clusters
        .into_iter()
        .map(|members| {
            let mut p = DMatrix::<Complex64>::zeros(dim, dim);
            for &idx in &members {
                let v = eig.eigenvectors.column(idx);
                for i in 0..dim {
                    for k in 0..dim {
                        p[(i, k)] += v[i] * v[k].conj();
                    }
                }
            }
            (members.len(), p)
        })
        .collect();
    povm.sort_by_key(|entry| std::cmp::Reverse(entry.0));

    let (block_dims, projectors) = povm.into_iter().unzip();
    Ok(ProjectivePovm {
        projectors,
        block_dims,
    })
}
