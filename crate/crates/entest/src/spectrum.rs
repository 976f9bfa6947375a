//! Spectral decomposition of the N-copy effective state.
//!
//! The group average of N copies of a two-qubit pure state with Schmidt
//! parameter b is block diagonal, one block per total-spin label j. Each
//! block carries the weight
//!
//! ```text
//! w_j(b) = d_j * sum_{m = -j..j} x^(N/2 + m) * y^(N/2 - m),
//!     x = (1 + b)/2,  y = (1 - b)/2,
//! ```
//!
//! where d_j counts the equivalent spin-j irreps. The weights are evaluated
//! in this (x, y) monomial basis: every term is nonnegative, so there is no
//! cancellation even at N = 80 and beyond, unlike the expanded polynomial in
//! b whose coefficients alternate in sign with magnitude ~C(80, 40).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::spin::{self, HalfSpin};

/// One eigenvalue block of the N-copy effective state.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    n: u32,
    j: HalfSpin,
    copies: BigUint,
    copies_f64: f64,
    block_dim: u64,
}

impl SpectralBlock {
    fn new(n: u32, j: HalfSpin) -> Result<Self> {
        let copies = spin::path_multiplicity(n, j)?;
        let copies_f64 = spin::biguint_to_f64(&copies)?;
        Ok(Self {
            n,
            j,
            copies,
            copies_f64,
            block_dim: spin::block_dimension(j),
        })
    }

    pub fn j(&self) -> HalfSpin {
        self.j
    }

    /// d_j: number of equivalent spin-j irreps in the N-fold coupling.
    pub fn copies(&self) -> &BigUint {
        &self.copies
    }

    pub fn copies_approx(&self) -> f64 {
        self.copies_f64
    }

    /// n_j = (2j+1)^2, the dimension of the eigenspace.
    pub fn block_dim(&self) -> u64 {
        self.block_dim
    }

    /// The weight n_j * lambda_j(b). Caller must supply b in [0, 1].
    pub fn weight(&self, b: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&b));
        self.copies_f64 * monomial_sum(self.n, self.j.twice(), b)
    }

    /// The eigenvalue lambda_j(b) shared by all n_j states of the block.
    pub fn eigenvalue(&self, b: f64) -> f64 {
        self.weight(b) / self.block_dim as f64
    }

    /// Exact moment of the weight against b^q: integral of b^q w_j(b) over [0, 1].
    pub fn exact_weight_moment(&self, q: u32) -> BigRational {
        let copies = BigRational::from_integer(BigInt::from(self.copies.clone()));
        copies * exact_monomial_moment_sum(self.n, self.j.twice(), q)
    }
}

/// The complete ordered block list for N copies, j descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: u32,
    blocks: Vec<SpectralBlock>,
}

impl Spectrum {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpectrum);
        }
        let blocks = spin::spins_for(n)
            .into_iter()
            .map(|j| SpectralBlock::new(n, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// Number of measurement outcomes, floor(N/2) + 1.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, index: usize) -> Result<&SpectralBlock> {
        self.blocks.get(index).ok_or(Error::BlockIndex {
            index,
            count: self.blocks.len(),
        })
    }
}

/// The weight n_j lambda_j(b) for spin j in the N-copy decomposition.
pub fn block_weight(n: u32, j: HalfSpin, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    if !j.is_compatible_with(n) {
        return Err(Error::IncompatibleSpin {
            n,
            twice_j: j.twice(),
        });
    }
    check_unit_interval("b", b)?;
    let copies = spin::biguint_to_f64(&spin::path_multiplicity(n, j)?)?;
    Ok(copies * monomial_sum(n, j.twice(), b))
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// sum_{m = -j..j} x^(N/2+m) y^(N/2-m) with x = (1+b)/2, y = (1-b)/2.
fn monomial_sum(n: u32, twice_j: u32, b: f64) -> f64 {
    let x = (1.0 + b) / 2.0;
    let y = (1.0 - b) / 2.0;
    let mut total = 0.0;
    // 2m runs over -2j..2j in steps of 2; exponents (n + 2m)/2 and (n - 2m)/2.
    let mut twice_m = -(twice_j as i64);
    while twice_m <= twice_j as i64 {
        let up = ((n as i64 + twice_m) / 2) as i32;
        let down = ((n as i64 - twice_m) / 2) as i32;
        total += x.powi(up) * y.powi(down);
        twice_m += 2;
    }
    total
}

/// Exact integral of b^q sum_m x^(N/2+m) y^(N/2-m) over b in [0, 1].
///
/// Uses integral b^s (1-b)^c db = s! c! / (s+c+1)!, expanding only the
/// (1+b)^a factor so every term is positive.
fn exact_monomial_moment_sum(n: u32, twice_j: u32, q: u32) -> BigRational {
    let mut total = BigRational::zero();
    let mut twice_m = -(twice_j as i64);
    while twice_m <= twice_j as i64 {
        let a = ((n as i64 + twice_m) / 2) as u64;
        let c = ((n as i64 - twice_m) / 2) as u64;
        total += exact_shifted_beta_moment(u64::from(q), a, c);
        twice_m += 2;
    }
    // The 1/2^n from x^a y^c = (1+b)^a (1-b)^c / 2^(a+c).
    total / BigRational::from_integer(BigInt::from(2u32).pow(n))
}

/// integral_0^1 b^q (1+b)^a (1-b)^c db, exactly.
fn exact_shifted_beta_moment(q: u64, a: u64, c: u64) -> BigRational {
    let mut total = BigRational::zero();
    for i in 0..=a {
        let s = q + i;
        // integral b^s (1-b)^c = 1 / ((s+c+1) * C(s+c, s))
        let denom = BigInt::from(s + c + 1) * BigInt::from(spin::binomial(s + c, s));
        total += BigRational::new(BigInt::from(spin::binomial(a, i)), denom);
    }
    total
}
