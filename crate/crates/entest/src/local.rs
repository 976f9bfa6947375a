//! Estimation of the degree of mixing of a single-qubit mixed state from N
//! copies, using only one party's halves.
//!
//! Tracing out the second party leaves N copies of a qubit whose Bloch
//! modulus is the same parameter b. The single-group average decomposes
//! into spin-j multiplets; equivalent multiplets share one eigenvalue, and
//! the outcome probabilities coincide with the two-party case block by
//! block, so entanglement can be estimated optimally by this purely local
//! strategy.

use nalgebra::{DMatrix, Matrix2};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gain::{expected_gain_report, GainReport};
use crate::oracle::{random_su2, AverageMethod, DensityOperator, Su2Quadrature};
use crate::prior::PriorDensity;
use crate::spectrum::{check_unit_interval, Spectrum};
use crate::spin::{self, HalfSpin};

/// Dimension guard: 2^N <= 256.
pub const MAX_LOCAL_COPIES: u32 = 8;

/// One eigenvalue of the locally averaged state, shared across all
/// equivalent spin-j multiplets.
#[derive(Debug, Clone)]
pub struct LocalSpectralBlock {
    n: u32,
    j: HalfSpin,
    copies: BigUint,
    copies_f64: f64,
}

impl LocalSpectralBlock {
    pub fn j(&self) -> HalfSpin {
        self.j
    }

    /// Number of equivalent spin-j multiplets.
    pub fn copies(&self) -> &BigUint {
        &self.copies
    }

    /// Dimension 2j+1 of each multiplet.
    pub fn copy_dim(&self) -> u64 {
        self.j.multiplet_dim()
    }

    /// Total eigenvalue multiplicity d_j (2j+1).
    pub fn total_dim_approx(&self) -> f64 {
        self.copies_f64 * self.copy_dim() as f64
    }

    /// Total eigenvalue weight across all equivalent multiplets; identical
    /// to the two-party block weight as a function of b.
    pub fn eigenvalue_weight(&self, b: f64) -> f64 {
        // same m-resolved monomial sums as the global decomposition
        crate::spectrum::block_weight(self.n, self.j, b)
            .expect("block parameters validated at construction")
    }

    /// The shared eigenvalue of each state in the sector.
    pub fn shared_eigenvalue(&self, b: f64) -> f64 {
        self.eigenvalue_weight(b) / self.total_dim_approx()
    }
}

/// The spin sectors of the locally averaged N-copy qubit state.
pub fn local_spectrum(n: u32) -> Result<Vec<LocalSpectralBlock>> {
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    spin::spins_for(n)
        .into_iter()
        .map(|j| {
            let copies = spin::path_multiplicity(n, j)?;
            let copies_f64 = spin::biguint_to_f64(&copies)?;
            Ok(LocalSpectralBlock {
                n,
                j,
                copies,
                copies_f64,
            })
        })
        .collect()
}

/// Single-group average of N copies of the mixed qubit with Bloch modulus
/// b, in dimension 2^N.
pub fn local_haar_average(
    n: u32,
    b: f64,
    method: AverageMethod,
    budget: u64,
    seed: u64,
) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    if n > MAX_LOCAL_COPIES {
        return Err(Error::OracleDimension {
            n,
            dim: 2usize.saturating_pow(n),
            limit: 2usize.pow(MAX_LOCAL_COPIES),
        });
    }
    check_unit_interval("b", b)?;
    let dim = 2usize.pow(n);
    let reference = Matrix2::new(
        Complex64::new((1.0 + b) / 2.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new((1.0 - b) / 2.0, 0.0),
    );
    let mat = match method {
        AverageMethod::EulerQuadrature => {
            let rule = Su2Quadrature::for_copies(n);
            let partials: Vec<DMatrix<Complex64>> = rule
                .elements()
                .par_chunks(rule.len().div_ceil(64).max(1))
                .map(|chunk| {
                    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                    for (u, w) in chunk {
                        let rotated = u * reference * u.adjoint();
                        acc += kron_matrix_power(&rotated, n) * Complex64::new(*w, 0.0);
                    }
                    acc
                })
                .collect();
            partials
                .into_iter()
                .fold(DMatrix::zeros(dim, dim), |a, b| a + b)
        }
        AverageMethod::MonteCarlo => {
            let samples = budget.max(1);
            let streams = 64u64;
            let chunk = samples.div_ceil(streams);
            let partials: Vec<DMatrix<Complex64>> = (0..streams)
                .into_par_iter()
                .map(|stream| {
                    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                    let start = stream * chunk;
                    if start < samples {
                        let count = chunk.min(samples - start);
                        let mut rng = ChaCha12Rng::seed_from_u64(seed);
                        rng.set_stream(stream);
                        for _ in 0..count {
                            let u = random_su2(&mut rng);
                            let rotated = u * reference * u.adjoint();
                            acc += kron_matrix_power(&rotated, n);
                        }
                    }
                    acc
                })
                .collect();
            partials
                .into_iter()
                .fold(DMatrix::zeros(dim, dim), |a, b| a + b)
                / Complex64::new(samples as f64, 0.0)
        }
    };
    Ok(DensityOperator::from_matrix(mat))
}

/// Expected gain of the optimal local strategy: projections onto the
/// eigenvalue sectors of the locally averaged state.
pub fn local_gain(n: u32, prior: &PriorDensity) -> Result<GainReport> {
    local_gain_with_nodes(n, prior, crate::quad::DEFAULT_NODES)
}

/// Like [`local_gain`], starting the node-doubling refinement at a caller
/// chosen quadrature order (at least 2).
pub fn local_gain_with_nodes(
    n: u32,
    prior: &PriorDensity,
    start_nodes: usize,
) -> Result<GainReport> {
    let blocks = local_spectrum(n)?;
    let weights: Vec<_> = blocks
        .iter()
        .map(|blk| {
            let blk = blk.clone();
            move |b: f64| blk.eigenvalue_weight(b)
        })
        .collect();
    let weight_refs: Vec<&dyn Fn(f64) -> f64> =
        weights.iter().map(|w| w as &dyn Fn(f64) -> f64).collect();
    let exact = exact_local_marginals(n, prior);
    expected_gain_report(n, &weight_refs, exact, prior, start_nodes)
}

fn exact_local_marginals(n: u32, prior: &PriorDensity) -> Option<Vec<BigRational>> {
    // The weight functions coincide with the two-party blocks, so the exact
    // machinery is shared.
    let spec = Spectrum::new(n).ok()?;
    crate::gain::exact_marginals(&spec, prior)
}

fn kron_matrix_power(m: &Matrix2<Complex64>, n: u32) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_fn(2, 2, |i, k| m[(i, k)]);
    for _ in 1..n {
        out = kron_dense(&out, m);
    }
    out
}

fn kron_dense(a: &DMatrix<Complex64>, b: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let mut out = DMatrix::zeros(ar * 2, ac * 2);
    for i in 0..ar {
        for k in 0..ac {
            for bi in 0..2 {
                for bk in 0..2 {
                    out[(2 * i + bi, 2 * k + bk)] = a[(i, k)] * b[(bi, bk)];
                }
            }
        }
    }
    out
}
