//! Spin labels and the combinatorics of coupling N spin-1/2 systems.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An SU(2) total-spin label j, stored as the integer 2j so that half-integer
/// spins need no fractional arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfSpin {
    twice: u32,
}

impl HalfSpin {
    pub fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// The stored integer 2j.
    pub fn twice(self) -> u32 {
        self.twice
    }

    /// j as a float.
    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Dimension 2j+1 of a single spin-j multiplet.
    pub fn multiplet_dim(self) -> u64 {
        u64::from(self.twice) + 1
    }

    /// Whether this spin occurs in the coupling of `n` spin-1/2 systems:
    /// 2j <= n and 2j = n (mod 2).
    pub fn is_compatible_with(self, n: u32) -> bool {
        self.twice <= n && (n - self.twice).is_multiple_of(2)
    }
}

impl fmt::Display for HalfSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut out = BigUint::from(1u32);
    for i in 0..k {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// Number of equivalent spin-j irreps in the decomposition of n coupled
/// spin-1/2 systems: C(n, n/2 - j) - C(n, n/2 - j - 1).
///
/// Exact big-integer arithmetic: at n = 80 the central values exceed u64.
pub fn path_multiplicity(n: u32, j: HalfSpin) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    if !j.is_compatible_with(n) {
        return Err(Error::IncompatibleSpin {
            n,
            twice_j: j.twice(),
        });
    }
    let k = u64::from((n - j.twice()) / 2);
    let head = binomial(u64::from(n), k);
    let tail = if k >= 1 {
        binomial(u64::from(n), k - 1)
    } else {
        BigUint::zero()
    };
    Ok(head - tail)
}

/// Dimension (2j+1)^2 of the {j (x) j} eigenspace block.
pub fn block_dimension(j: HalfSpin) -> u64 {
    let d = j.multiplet_dim();
    d * d
}

/// Dimension (N+3)(N+2)(N+1)/6 of the symmetric subspace of N two-qubit copies.
pub fn symmetric_dimension(n: u32) -> u64 {
    let n = u64::from(n);
    (n + 3) * (n + 2) * (n + 1) / 6
}

/// All spins appearing in the n-copy decomposition, j descending from n/2
/// down to (n mod 2)/2.
pub fn spins_for(n: u32) -> Vec<HalfSpin> {
    let mut out = Vec::with_capacity(n as usize / 2 + 1);
    let mut twice = n;
    loop {
        out.push(HalfSpin::from_twice(twice));
        if twice < 2 {
            break;
        }
        twice -= 2;
    }
    out
}

pub(crate) fn biguint_to_f64(v: &BigUint) -> Result<f64> {
    v.to_f64()
        .filter(|x| x.is_finite())
        .ok_or(Error::NumericRange("multiplicity exceeds f64 range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Independent oracle: count coupling paths by walking the spin ladder
    /// one spin-1/2 at a time.
    fn multiplicities_by_recursion(n: u32) -> BTreeMap<u32, BigUint> {
        let mut cur: BTreeMap<u32, BigUint> = BTreeMap::new();
        cur.insert(1, BigUint::from(1u32));
        for _ in 1..n {
            let mut next: BTreeMap<u32, BigUint> = BTreeMap::new();
            for (&tj, count) in &cur {
                let ups = if tj == 0 { vec![1] } else { vec![tj - 1, tj + 1] };
                for t in ups {
                    *next.entry(t).or_insert_with(BigUint::zero) += count.clone();
                }
            }
            cur = next;
        }
        cur
    }

    #[test]
    fn multiplicity_matches_recursion_oracle() {
        for n in 1..=12u32 {
            let oracle = multiplicities_by_recursion(n);
            for j in spins_for(n) {
                assert_eq!(
                    path_multiplicity(n, j).unwrap(),
                    oracle[&j.twice()],
                    "n={n} 2j={}",
                    j.twice()
                );
            }
        }
    }

    #[test]
    fn multiplicity_worked_values() {
        assert_eq!(
            path_multiplicity(3, HalfSpin::from_twice(1)).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            path_multiplicity(1, HalfSpin::from_twice(1)).unwrap(),
            BigUint::from(1u32)
        );
        // Frozen from the spin-coupling path recursion above and from a
        // Casimir-multiplicity count on (C^2)^{(x)4}.
        assert_eq!(
            path_multiplicity(4, HalfSpin::from_twice(2)).unwrap(),
            BigUint::from(3u32)
        );
    }

    #[test]
    fn multiplicity_rejects_incompatible_spins() {
        assert!(matches!(
            path_multiplicity(3, HalfSpin::from_twice(2)),
            Err(Error::IncompatibleSpin { .. })
        ));
        assert!(matches!(
            path_multiplicity(2, HalfSpin::from_twice(4)),
            Err(Error::IncompatibleSpin { .. })
        ));
    }

    #[test]
    fn path_count_identity_is_exact_up_to_n_80() {
        for n in 1..=80u32 {
            let mut total = BigUint::zero();
            for j in spins_for(n) {
                total += path_multiplicity(n, j).unwrap() * BigUint::from(j.multiplet_dim());
            }
            assert_eq!(total, BigUint::from(2u32).pow(n), "n={n}");
        }
    }

    #[test]
    fn block_dimensions() {
        assert_eq!(block_dimension(HalfSpin::from_twice(3)), 16);
        assert_eq!(block_dimension(HalfSpin::from_twice(1)), 4);
        assert_eq!(block_dimension(HalfSpin::from_twice(0)), 1);
    }

    #[test]
    fn symmetric_dimension_values() {
        assert_eq!(symmetric_dimension(1), 4);
        assert_eq!(symmetric_dimension(2), 10);
        assert_eq!(symmetric_dimension(3), 20);
    }

    #[test]
    fn spins_descend_with_correct_parity() {
        assert_eq!(
            spins_for(4).iter().map(|j| j.twice()).collect::<Vec<_>>(),
            vec![4, 2, 0]
        );
        assert_eq!(
            spins_for(5).iter().map(|j| j.twice()).collect::<Vec<_>>(),
            vec![5, 3, 1]
        );
    }

    #[test]
    fn display_uses_half_integer_notation() {
        assert_eq!(HalfSpin::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfSpin::from_twice(4).to_string(), "2");
    }
}
