//! Block-abstracted POVMs and the optimality bound they can never beat.
//!
//! Because the effective state is block diagonal with b-independent
//! eigenspaces, any measurement strategy enters the gain only through the
//! matrix q[k][j] = trace of element k restricted to block j. Resolution of
//! the identity on the support becomes a column-sum constraint.

use rand::Rng;

use crate::error::{Error, Result};
use crate::prior::PriorDensity;
use crate::quad::{GaussLegendre, CONVERGENCE_TOL, DEFAULT_NODES};
use crate::spectrum::Spectrum;

const COLUMN_SUM_TOL: f64 = 1e-10;

/// An arbitrary measurement reduced to its block traces.
#[derive(Debug, Clone)]
pub struct AbstractPovm {
    /// Rows = outcomes, columns = blocks (j descending).
    q: Vec<Vec<f64>>,
}

impl AbstractPovm {
    /// Validates entries >= 0 and column sums equal to the block dimensions.
    pub fn new(q: Vec<Vec<f64>>, spec: &Spectrum) -> Result<Self> {
        let m = spec.block_count();
        if q.is_empty() {
            return Err(Error::InvalidPovm("no outcomes".into()));
        }
        for (k, row) in q.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidPovm(format!(
                    "row {k} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| v.is_nan() || v < 0.0) {
                return Err(Error::InvalidPovm(format!(
                    "row {k} has negative or non-finite entry {bad}"
                )));
            }
        }
        for (jx, block) in spec.blocks().iter().enumerate() {
            let col: f64 = q.iter().map(|row| row[jx]).sum();
            let want = block.block_dim() as f64;
            if (col - want).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidPovm(format!(
                    "column {jx} sums to {col}, expected n_j = {want}"
                )));
            }
        }
        Ok(Self { q })
    }

    /// The minimal optimal strategy: one outcome per block, element k being
    /// the full n_k-dimensional projector.
    pub fn optimal_projective(spec: &Spectrum) -> Self {
        let m = spec.block_count();
        let q = (0..m)
            .map(|k| {
                (0..m)
                    .map(|jx| {
                        if jx == k {
                            spec.blocks()[jx].block_dim() as f64
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self { q }
    }

    /// A single outcome absorbing every block: learns nothing.
    pub fn uninformative(spec: &Spectrum) -> Self {
        Self {
            q: vec![spec
                .blocks()
                .iter()
                .map(|blk| blk.block_dim() as f64)
                .collect()],
        }
    }

    /// A random valid strategy: each block dimension is split across
    /// `outcomes` rows by normalized exponential draws.
    pub fn random<R: Rng + ?Sized>(spec: &Spectrum, outcomes: usize, rng: &mut R) -> Self {
        let m = spec.block_count();
        let mut q = vec![vec![0.0; m]; outcomes.max(1)];
        for (jx, block) in spec.blocks().iter().enumerate() {
            let draws: Vec<f64> = (0..outcomes.max(1))
                .map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln())
                .collect();
            let total: f64 = draws.iter().sum();
            for (k, d) in draws.iter().enumerate() {
                q[k][jx] = block.block_dim() as f64 * d / total;
            }
        }
        Self { q }
    }

    /// Splits row `k` into two rows `t * row` and `(1 - t) * row`. Such a
    /// proportional refinement carries no extra information.
    pub fn refine_proportionally(&self, k: usize, t: f64) -> Result<Self> {
        if k >= self.q.len() {
            return Err(Error::InvalidPovm(format!("no outcome {k}")));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidPovm(format!("split fraction {t}")));
        }
        let mut q = self.q.clone();
        let row = q.remove(k);
        q.push(row.iter().map(|v| v * t).collect());
        q.push(row.iter().map(|v| v * (1.0 - t)).collect());
        Ok(Self { q })
    }

    pub fn outcome_count(&self) -> usize {
        self.q.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// p(k|b) = sum_j lambda_j(b) q[k][j].
    pub fn outcome_probability(&self, spec: &Spectrum, k: usize, b: f64) -> Result<f64> {
        let row = self.q.get(k).ok_or(Error::BlockIndex {
            index: k,
            count: self.q.len(),
        })?;
        Ok(row
            .iter()
            .zip(spec.blocks())
            .map(|(&qkj, block)| qkj * block.eigenvalue(b))
            .sum())
    }
}

/// Expected gain in bits of an arbitrary strategy. Bounded above by the
/// optimal projective gain.
pub fn povm_gain(povm: &AbstractPovm, spec: &Spectrum, prior: &PriorDensity) -> Result<f64> {
    // Re-validate against this spectrum: the povm may have been built for
    // another block structure.
    let povm = AbstractPovm::new(povm.q.clone(), spec)?;
    let probs: Vec<_> = (0..povm.outcome_count())
        .map(|k| {
            let povm = povm.clone();
            let spec = spec.clone();
            move |b: f64| povm.outcome_probability(&spec, k, b).unwrap_or(0.0)
        })
        .collect();

    let marginals: Vec<f64> = probs
        .iter()
        .map(|pk| {
            crate::quad::integrate_to_convergence(
                |rule| rule.integrate(|b| prior.density(b) * pk(b)),
                DEFAULT_NODES,
                1e-12,
            )
            .value
        })
        .collect();

    let total = |rule: &GaussLegendre| -> f64 {
        rule.integrate(|b| {
            let f = prior.density(b);
            if f <= 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for (pk, &p) in probs.iter().zip(&marginals) {
                let v = pk(b);
                if v > 0.0 && p > 0.0 {
                    s += v * (v.ln() - p.ln());
                }
            }
            f * s
        })
    };

    let out = crate::quad::integrate_to_convergence(total, DEFAULT_NODES, CONVERGENCE_TOL);
    Ok(out.value / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::average_gain;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn optimal_projective_matches_average_gain() {
        let prior = PriorDensity::quadratic();
        for n in [2u32, 3, 5] {
            let spec = Spectrum::new(n).unwrap();
            let optimal = AbstractPovm::optimal_projective(&spec);
            let g = povm_gain(&optimal, &spec, &prior).unwrap();
            let want = average_gain(&spec, &prior).unwrap().average_gain_bits;
            assert_abs_diff_eq!(g, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn uninformative_strategy_gains_nothing() {
        let prior = PriorDensity::quadratic();
        let spec = Spectrum::new(4).unwrap();
        let povm = AbstractPovm::uninformative(&spec);
        let g = povm_gain(&povm, &spec, &prior).unwrap();
        assert!(g.abs() < 1e-12, "g={g}");
    }

    #[test]
    fn random_strategies_respect_the_bound() {
        let prior = PriorDensity::quadratic();
        let spec = Spectrum::new(2).unwrap();
        let bound = average_gain(&spec, &prior).unwrap().average_gain_bits;
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..25 {
            let povm = AbstractPovm::random(&spec, 4, &mut rng);
            let g = povm_gain(&povm, &spec, &prior).unwrap();
            assert!(g <= bound + 1e-9, "g={g} bound={bound}");
            assert!(g >= -1e-12);
        }
    }

    #[test]
    fn proportional_refinement_leaves_gain_unchanged() {
        let prior = PriorDensity::quadratic();
        let spec = Spectrum::new(3).unwrap();
        let base = AbstractPovm::optimal_projective(&spec);
        let refined = base.refine_proportionally(0, 0.37).unwrap();
        let g0 = povm_gain(&base, &spec, &prior).unwrap();
        let g1 = povm_gain(&refined, &spec, &prior).unwrap();
        assert_abs_diff_eq!(g0, g1, epsilon = 1e-10);
        assert_eq!(refined.outcome_count(), base.outcome_count() + 1);
    }

    #[test]
    fn validation_rejects_malformed_matrices() {
        let spec = Spectrum::new(2).unwrap();
        // wrong column sums
        assert!(matches!(
            AbstractPovm::new(vec![vec![9.0, 0.5]], &spec),
            Err(Error::InvalidPovm(_))
        ));
        // negative entry
        assert!(matches!(
            AbstractPovm::new(vec![vec![10.0, -1.0], vec![-1.0, 2.0]], &spec),
            Err(Error::InvalidPovm(_))
        ));
        // wrong width
        assert!(matches!(
            AbstractPovm::new(vec![vec![9.0]], &spec),
            Err(Error::InvalidPovm(_))
        ));
        // valid
        assert!(AbstractPovm::new(vec![vec![4.5, 0.25], vec![4.5, 0.75]], &spec).is_ok());
    }
}
