//! Brute-force numerical oracle.
//!
//! Everything the closed-form spectrum promises is rebuilt here the hard
//! way: dense matrices, explicit group integration, eigendecomposition.
//! Desk-scale only — the two-sided average caps at N = 4 (dimension 256).

mod average;
mod extract;
mod su2;
mod verify;

pub use average::{haar_average_state, haar_average_state_isotropic, AverageMethod};
pub use extract::{extract_povm, ProjectivePovm};
pub use su2::{euler_su2, random_su2, Su2Quadrature};
pub use verify::{
    commutator_check, symmetric_subspace_leakage, verify_spectrum, CommutatorCheck, VerifyReport,
    VerifyRow,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::check_unit_interval;

/// Hermiticity tolerance for density operators.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-one tolerance.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues may dip this far below zero before validation fails.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hard cap on the two-sided oracle: 4^N <= 256.
pub const MAX_GLOBAL_COPIES: u32 = 4;

/// A normalized state vector.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: DVector<Complex64>,
}

impl PureState {
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange {
                name: "state norm",
                value: norm,
                lo: 1.0 - 1e-12,
                hi: 1.0 + 1e-12,
            });
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// |psi><psi| as a dense matrix.
    pub fn projector(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, k| self.amps[i] * self.amps[k].conj())
    }

    /// The N-fold tensor power of the amplitude vector.
    pub fn tensor_power(&self, n: u32) -> DVector<Complex64> {
        tensor_power(&self.amps, n)
    }
}

pub(crate) fn tensor_power(v: &DVector<Complex64>, n: u32) -> DVector<Complex64> {
    let mut out = v.clone();
    for _ in 1..n {
        out = kron_vec(&out, v);
    }
    out
}

fn kron_vec(a: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (k, &bk) in b.iter().enumerate() {
            out[i * b.len() + k] = ai * bk;
        }
    }
    out
}

/// A dense Hermitian trace-one operator.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: DMatrix<Complex64>,
}

impl DensityOperator {
    pub(crate) fn from_matrix(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }

    /// Hermitian within 1e-12, trace one within 1e-10, eigenvalues above
    /// -1e-10.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for k in i..d {
                let delta = self.mat[(i, k)] - self.mat[(k, i)].conj();
                if delta.norm() > HERMITICITY_TOL {
                    return Err(Error::OutOfRange {
                        name: "hermiticity defect",
                        value: delta.norm(),
                        lo: 0.0,
                        hi: HERMITICITY_TOL,
                    });
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::OutOfRange {
                name: "trace",
                value: tr.re,
                lo: 1.0 - TRACE_TOL,
                hi: 1.0 + TRACE_TOL,
            });
        }
        let min = self
            .eigenvalues_descending()
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::OutOfRange {
                name: "minimum eigenvalue",
                value: min,
                lo: -POSITIVITY_TOL,
                hi: f64::INFINITY,
            });
        }
        Ok(())
    }

    /// Real eigenvalues of the Hermitian part, largest first.
    pub fn eigenvalues_descending(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    /// tr(P rho).real for a projector or any Hermitian operator P.
    pub fn overlap(&self, op: &DMatrix<Complex64>) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc += op[(i, k)] * self.mat[(k, i)];
            }
        }
        acc.re
    }

    /// Spectral norm of the commutator with another operator.
    pub fn commutator_norm(&self, other: &DensityOperator) -> f64 {
        let c = &self.mat * &other.mat - &other.mat * &self.mat;
        spectral_norm(&c)
    }
}

pub(crate) fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// The spin-up ket along a Bloch direction.
pub fn bloch_ket(direction: [f64; 3]) -> DVector<Complex64> {
    let [x, y, z] = direction;
    let r = (x * x + y * y + z * z).sqrt();
    let theta = (z / r).acos();
    let phi = y.atan2(x);
    DVector::from_vec(vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
}

fn antipodal_ket(direction: [f64; 3]) -> DVector<Complex64> {
    bloch_ket([-direction[0], -direction[1], -direction[2]])
}

/// The two-qubit pure state with Schmidt parameter b along the given local
/// directions, with the relative phase left explicit.
///
/// Directions are normalized; a deviation from unit length beyond 1e-8 is
/// logged as a warning.
pub fn schmidt_state(b: f64, a_dir: [f64; 3], b_dir: [f64; 3], phase: f64) -> Result<PureState> {
    check_unit_interval("b", b)?;
    let a_dir = normalize_direction(a_dir)?;
    let b_dir = normalize_direction(b_dir)?;
    let up = Complex64::new(((1.0 + b) / 2.0).sqrt(), 0.0);
    let down = Complex64::from_polar(((1.0 - b) / 2.0).sqrt(), phase);
    let ka = bloch_ket(a_dir);
    let kb = bloch_ket(b_dir);
    let ma = antipodal_ket(a_dir);
    let mb = antipodal_ket(b_dir);
    let mut amps = DVector::zeros(4);
    for i in 0..2 {
        for k in 0..2 {
            amps[2 * i + k] = up * ka[i] * kb[k] + down * ma[i] * mb[k];
        }
    }
    PureState::new(amps)
}

fn normalize_direction(dir: [f64; 3]) -> Result<[f64; 3]> {
    let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::OutOfRange {
            name: "direction norm",
            value: r,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    if (r - 1.0).abs() > 1e-8 {
        log::warn!("direction vector has norm {r}; normalizing");
    }
    Ok([dir[0] / r, dir[1] / r, dir[2] / r])
}

/// Reduced single-qubit state of a two-qubit pure state, side A.
pub fn reduced_state_a(state: &PureState) -> DMatrix<Complex64> {
    let amps = state.amplitudes();
    let mut out = DMatrix::zeros(2, 2);
    for i in 0..2 {
        for ip in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += amps[2 * i + k] * amps[2 * ip + k].conj();
            }
            out[(i, ip)] = acc;
        }
    }
    out
}

/// Bloch vector of a single-qubit density matrix.
pub fn bloch_vector(rho: &DMatrix<Complex64>) -> [f64; 3] {
    let x = (rho[(0, 1)] + rho[(1, 0)]).re;
    let y = -(rho[(0, 1)] - rho[(1, 0)]).im;
    let z = (rho[(0, 0)] - rho[(1, 1)]).re;
    [x, y, z]
}
