//! Group averages of N-copy states, by Monte Carlo or deterministic
//! quadrature.
//!
//! Sample batches are independent and merge by matrix addition. Each batch
//! owns a disjoint counter-mode stream of one seeded generator, and partial
//! sums are reduced in a fixed order, so results are bit-reproducible
//! regardless of thread count.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::check_unit_interval;

use super::su2::{random_su2, Su2Quadrature};
use super::{schmidt_state, DensityOperator, PureState, MAX_GLOBAL_COPIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMethod {
    MonteCarlo,
    /// Product Euler-angle rule over both local groups. Exact to roundoff
    /// for this integrand, but the grid squares: capped at N = 3.
    EulerQuadrature,
}

pub const MAX_QUADRATURE_COPIES: u32 = 3;

/// Number of independent RNG streams (and error batches) for Monte Carlo.
pub(crate) const MC_STREAMS: u64 = 64;

/// Per-stream Monte Carlo sums of |Phi><Phi|, kept separate so callers can
/// form both the full average and batch-resolved error estimates without a
/// second pass over the samples.
pub(crate) struct McPartials {
    dim: usize,
    /// Flat row-major accumulators, one per stream with count > 0.
    sums: Vec<Vec<Complex64>>,
    counts: Vec<u64>,
    total: u64,
}

impl McPartials {
    pub(crate) fn batch_count(&self) -> usize {
        self.sums.len()
    }

    /// The average over one stream's samples.
    pub(crate) fn batch_matrix(&self, idx: usize) -> DMatrix<Complex64> {
        let scale = Complex64::new(1.0 / self.counts[idx] as f64, 0.0);
        DMatrix::from_fn(self.dim, self.dim, |i, k| {
            self.sums[idx][i * self.dim + k] * scale
        })
    }

    /// The full-budget average.
    pub(crate) fn merged(&self) -> DensityOperator {
        let mut flat = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for sum in &self.sums {
            for (dst, src) in flat.iter_mut().zip(sum) {
                *dst += src;
            }
        }
        let scale = Complex64::new(1.0 / self.total as f64, 0.0);
        let mat = DMatrix::from_fn(self.dim, self.dim, |i, k| flat[i * self.dim + k] * scale);
        DensityOperator::from_matrix(mat)
    }
}

/// Runs the two-sided Monte Carlo average once, returning per-stream sums.
pub(crate) fn monte_carlo_partials(
    n: u32,
    b: f64,
    budget: u64,
    seed: u64,
) -> Result<McPartials> {
    check_copies(n, AverageMethod::MonteCarlo)?;
    check_unit_interval("b", b)?;
    let psi = reference_state(b);
    let dim = 4usize.pow(n);
    let samples = budget.max(1);
    let chunk = samples.div_ceil(MC_STREAMS);
    let raw: Vec<(Vec<Complex64>, u64)> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let start = stream * chunk;
            if start >= samples {
                return (Vec::new(), 0);
            }
            let count = chunk.min(samples - start);
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut phi = vec![Complex64::new(0.0, 0.0); dim];
            for _ in 0..count {
                let ua = random_su2(&mut rng);
                let ub = random_su2(&mut rng);
                rotated_copy_into(&psi, &ua, &ub, n, &mut phi);
                accumulate_outer_flat(&mut acc, &phi, dim, 1.0);
            }
            (acc, count)
        })
        .collect();
    let mut sums = Vec::new();
    let mut counts = Vec::new();
    let mut total = 0;
    for (acc, count) in raw {
        if count > 0 {
            sums.push(acc);
            counts.push(count);
            total += count;
        }
    }
    Ok(McPartials {
        dim,
        sums,
        counts,
        total,
    })
}

/// The N-copy effective state at entanglement parameter b: the average of
/// (U_A (x) U_B |psi(b)><psi(b)| U_A^+ (x) U_B^+)^(x)N over both local
/// groups. The relative phase of the Schmidt form is absorbed by the
/// integration, so two SU(2) factors suffice.
pub fn haar_average_state(
    n: u32,
    b: f64,
    method: AverageMethod,
    budget: u64,
    seed: u64,
) -> Result<DensityOperator> {
    check_copies(n, method)?;
    check_unit_interval("b", b)?;
    match method {
        AverageMethod::MonteCarlo => Ok(monte_carlo_partials(n, b, budget, seed)?.merged()),
        AverageMethod::EulerQuadrature => {
            let psi = reference_state(b);
            let dim = 4usize.pow(n);
            let rule = Su2Quadrature::for_copies(n);
            let pairs: Vec<(usize, usize)> = (0..rule.len())
                .flat_map(|i| (0..rule.len()).map(move |k| (i, k)))
                .collect();
            let partials: Vec<Vec<Complex64>> = pairs
                .par_chunks(pairs.len().div_ceil(256).max(1))
                .map(|chunk| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
                    let mut phi = vec![Complex64::new(0.0, 0.0); dim];
                    for &(i, k) in chunk {
                        let (ua, wa) = &rule.elements()[i];
                        let (ub, wb) = &rule.elements()[k];
                        rotated_copy_into(&psi, ua, ub, n, &mut phi);
                        accumulate_outer_flat(&mut acc, &phi, dim, wa * wb);
                    }
                    acc
                })
                .collect();
            let mut flat = vec![Complex64::new(0.0, 0.0); dim * dim];
            for part in partials {
                for (dst, src) in flat.iter_mut().zip(&part) {
                    *dst += src;
                }
            }
            let mat = DMatrix::from_fn(dim, dim, |i, k| flat[i * dim + k]);
            Ok(DensityOperator::from_matrix(mat))
        }
    }
}

/// The same average in the explicit four-parameter form: isotropic local
/// Bloch directions and a uniform relative phase. Cross-checks that the
/// two-group parameterization absorbs the phase.
pub fn haar_average_state_isotropic(
    n: u32,
    b: f64,
    budget: u64,
    seed: u64,
) -> Result<DensityOperator> {
    check_copies(n, AverageMethod::MonteCarlo)?;
    check_unit_interval("b", b)?;
    let dim = 4usize.pow(n);
    let samples = budget.max(1);
    let chunk = samples.div_ceil(MC_STREAMS);
    let partials: Vec<Vec<Complex64>> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let start = stream * chunk;
            if start >= samples {
                return Vec::new();
            }
            let count = chunk.min(samples - start);
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            for _ in 0..count {
                let a_dir = random_direction(&mut rng);
                let b_dir = random_direction(&mut rng);
                let phase = std::f64::consts::TAU * rng.gen::<f64>();
                let state =
                    schmidt_state(b, a_dir, b_dir, phase).expect("sampled arguments are valid");
                let phi = state.tensor_power(n);
                accumulate_outer_flat(&mut acc, phi.as_slice(), dim, 1.0);
            }
            acc
        })
        .collect();
    let mut flat = vec![Complex64::new(0.0, 0.0); dim * dim];
    for part in partials {
        for (dst, src) in flat.iter_mut().zip(&part) {
            *dst += src;
        }
    }
    let scale = Complex64::new(1.0 / samples as f64, 0.0);
    let mat = DMatrix::from_fn(dim, dim, |i, k| flat[i * dim + k] * scale);
    Ok(DensityOperator::from_matrix(mat))
}

fn check_copies(n: u32, method: AverageMethod) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    let limit = match method {
        AverageMethod::MonteCarlo => MAX_GLOBAL_COPIES,
        AverageMethod::EulerQuadrature => MAX_QUADRATURE_COPIES,
    };
    if n > limit {
        return Err(Error::OracleDimension {
            n,
            dim: 4usize.saturating_pow(n),
            limit: 4usize.pow(limit),
        });
    }
    Ok(())
}

/// The reference two-qubit state sqrt(x)|00> + sqrt(y)|11>.
fn reference_state(b: f64) -> PureState {
    let mut amps = DVector::zeros(4);
    amps[0] = Complex64::new(((1.0 + b) / 2.0).sqrt(), 0.0);
    amps[3] = Complex64::new(((1.0 - b) / 2.0).sqrt(), 0.0);
    PureState::new(amps).expect("reference state is normalized")
}

/// ((U_A (x) U_B) psi)^(x)n written into a scratch buffer.
fn rotated_copy_into(
    psi: &PureState,
    ua: &Matrix2<Complex64>,
    ub: &Matrix2<Complex64>,
    n: u32,
    out: &mut [Complex64],
) {
    let amps = psi.amplitudes();
    let mut rotated = [Complex64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for k in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for ip in 0..2 {
                for kp in 0..2 {
                    acc += ua[(i, ip)] * ub[(k, kp)] * amps[2 * ip + kp];
                }
            }
            rotated[2 * i + k] = acc;
        }
    }
    out[..4].copy_from_slice(&rotated);
    let mut len = 4usize;
    for _ in 1..n {
        // out[0..len] (x) rotated, built backwards to stay in place
        for i in (0..len).rev() {
            let v = out[i];
            for k in 0..4 {
                out[i * 4 + k] = v * rotated[k];
            }
        }
        len *= 4;
    }
}

/// acc += w * phi phi^+ on a flat row-major buffer, upper triangle mirrored.
fn accumulate_outer_flat(acc: &mut [Complex64], phi: &[Complex64], dim: usize, w: f64) {
    for i in 0..dim {
        let base = phi[i] * w;
        let row = i * dim;
        for k in i..dim {
            let v = base * phi[k].conj();
            acc[row + k] += v;
            if k != i {
                acc[k * dim + i] += v.conj();
            }
        }
    }
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = std::f64::consts::TAU * rng.gen::<f64>();
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}
