//! Priors to posteriors: outcome marginals, Kullback gains, and the optimal
//! expected information gain for the minimal projective strategy.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prior::PriorDensity;
use crate::quad::{GaussLegendre, CONVERGENCE_TOL, DEFAULT_NODES};
use crate::spectrum::{check_unit_interval, Spectrum};

const MAX_DOUBLINGS: u32 = 6;

/// Expected-gain report for one copy count.
///
/// All gains are in bits; the internal entropy integrals run in nats and are
/// divided by ln 2 once at the end. `quad_error` is the change in the average
/// gain across the last node doubling.
#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub n: u32,
    /// Outcome marginals p(k), index 0 = highest spin block.
    pub marginals: Vec<f64>,
    /// Exact marginals when the prior is polynomial.
    #[serde(serialize_with = "serialize_rationals")]
    pub exact_marginals: Option<Vec<BigRational>>,
    /// Per-outcome Kullback gains K[f_k, f] in bits.
    pub outcome_gains_bits: Vec<f64>,
    /// Average expected gain in bits.
    pub average_gain_bits: f64,
    pub quad_error: f64,
    pub nodes_used: usize,
}

fn serialize_rationals<S: serde::Serializer>(
    v: &Option<Vec<BigRational>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    match v {
        None => s.serialize_none(),
        Some(list) => {
            let mut seq = s.serialize_seq(Some(list.len()))?;
            for r in list {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }
    }
}

/// p(k|b): the probability of outcome k (0-based block index) for the
/// minimal projective strategy, equal to the block weight.
pub fn outcome_probability(spec: &Spectrum, k: usize, b: f64) -> Result<f64> {
    check_unit_interval("b", b)?;
    Ok(spec.block(k)?.weight(b))
}

/// p(k) = integral f(b) p(k|b) db. Exact rational arithmetic for polynomial
/// priors, quadrature otherwise.
pub fn marginal_probability(spec: &Spectrum, k: usize, prior: &PriorDensity) -> Result<f64> {
    let block = spec.block(k)?;
    if let Some(exact) = prior.exact_block_integral(block) {
        return exact
            .to_f64()
            .ok_or(Error::NumericRange("marginal does not fit in f64"));
    }
    let prior = prior.clone();
    let block = block.clone();
    Ok(crate::quad::integrate_to_convergence(
        move |rule| rule.integrate(|b| prior.density(b) * block.weight(b)),
        DEFAULT_NODES,
        1e-12,
    )
    .value)
}

/// All outcome marginals in exact arithmetic, when the prior is polynomial.
pub fn exact_marginals(spec: &Spectrum, prior: &PriorDensity) -> Option<Vec<BigRational>> {
    spec.blocks()
        .iter()
        .map(|block| prior.exact_block_integral(block))
        .collect()
}

/// The Bayes posterior f(b|k) = p(k|b) f(b) / p(k).
pub fn posterior(prior: &PriorDensity, spec: &Spectrum, k: usize) -> Result<PriorDensity> {
    let block = spec.block(k)?.clone();
    if let (Some(coeffs), Some(norm)) = (
        prior.polynomial_coeffs(),
        prior.exact_block_integral(spec.block(k)?),
    ) {
        if norm.is_zero() {
            return Err(Error::UndefinedPosterior);
        }
        return Ok(PriorDensity::tilted(coeffs, block, norm));
    }
    let p = marginal_probability(spec, k, prior)?;
    if p <= 0.0 {
        return Err(Error::UndefinedPosterior);
    }
    let base = prior.clone();
    let dens = move |b: f64| base.density(b) * block.weight(b) / p;
    // Bound for rejection sampling: coarse grid maximum with headroom.
    let bound = (0..=512)
        .map(|i| dens(i as f64 / 512.0))
        .fold(0.0f64, f64::max)
        * 1.5
        + 1e-9;
    PriorDensity::from_fn(dens, bound)
}

/// Kullback gain K[f_k, f] in bits for a single observed outcome.
pub fn outcome_gain(prior: &PriorDensity, posterior: &PriorDensity) -> Result<f64> {
    Ok(crate::prior::relative_entropy_bits(posterior, prior))
}

/// Expected gain of the optimal projective strategy, with per-outcome detail.
pub fn average_gain(spec: &Spectrum, prior: &PriorDensity) -> Result<GainReport> {
    average_gain_with_nodes(spec, prior, DEFAULT_NODES)
}

/// Like [`average_gain`], starting the node-doubling refinement at a caller
/// chosen quadrature order (at least 2).
pub fn average_gain_with_nodes(
    spec: &Spectrum,
    prior: &PriorDensity,
    start_nodes: usize,
) -> Result<GainReport> {
    let weights: Vec<_> = spec
        .blocks()
        .iter()
        .map(|block| {
            let block = block.clone();
            move |b: f64| block.weight(b)
        })
        .collect();
    let weight_refs: Vec<&dyn Fn(f64) -> f64> =
        weights.iter().map(|w| w as &dyn Fn(f64) -> f64).collect();
    let exact = exact_marginals(spec, prior);
    expected_gain_report(spec.n(), &weight_refs, exact, prior, start_nodes)
}

/// Shared engine: expected gain for a family of outcome-probability
/// functions that resolve unity under the prior. Used by both the global
/// (entanglement) and local (mixing) strategies.
pub(crate) fn expected_gain_report(
    n: u32,
    weights: &[&dyn Fn(f64) -> f64],
    exact_marginals: Option<Vec<BigRational>>,
    prior: &PriorDensity,
    start_nodes: usize,
) -> Result<GainReport> {
    if start_nodes < 2 {
        return Err(Error::OutOfRange {
            name: "quadrature nodes",
            value: start_nodes as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    if let Some(exact) = &exact_marginals {
        let total: BigRational = exact.iter().sum();
        debug_assert!(total.is_one(), "exact marginals must resolve unity");
    }
    let marginals: Vec<f64> = match &exact_marginals {
        Some(exact) => exact
            .iter()
            .map(|r| {
                r.to_f64()
                    .ok_or(Error::NumericRange("marginal does not fit in f64"))
            })
            .collect::<Result<Vec<_>>>()?,
        None => {
            let mut out = Vec::with_capacity(weights.len());
            for w in weights {
                let v = crate::quad::integrate_to_convergence(
                    |rule| rule.integrate(|b| prior.density(b) * w(b)),
                    start_nodes,
                    1e-12,
                )
                .value;
                out.push(v);
            }
            out
        }
    };

    // K-bar in nats at a given rule: sum_k int f(b) w_k(b) ln(w_k(b)/p_k) db.
    let total_nats = |rule: &GaussLegendre| -> f64 {
        rule.integrate(|b| {
            let f = prior.density(b);
            if f <= 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for (w, &p) in weights.iter().zip(&marginals) {
                let wb = w(b);
                if wb > 0.0 && p > 0.0 {
                    s += wb * (wb.ln() - p.ln());
                }
            }
            f * s
        })
    };

    let mut order = start_nodes.max(2);
    let mut prev = total_nats(&GaussLegendre::new(order));
    let mut quad_error = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        order *= 2;
        let next = total_nats(&GaussLegendre::new(order));
        quad_error = (next - prev).abs();
        prev = next;
        if quad_error < CONVERGENCE_TOL {
            break;
        }
    }

    let final_rule = GaussLegendre::new(order);
    let outcome_gains_bits: Vec<f64> = weights
        .iter()
        .zip(&marginals)
        .map(|(w, &p)| {
            if p <= 0.0 {
                return 0.0;
            }
            let nats = final_rule.integrate(|b| {
                let f = prior.density(b);
                let wb = w(b);
                if f <= 0.0 || wb <= 0.0 {
                    0.0
                } else {
                    f * wb * (wb.ln() - p.ln())
                }
            });
            nats / p / std::f64::consts::LN_2
        })
        .collect();

    Ok(GainReport {
        n,
        marginals,
        exact_marginals,
        outcome_gains_bits,
        average_gain_bits: prev / std::f64::consts::LN_2,
        quad_error: quad_error / std::f64::consts::LN_2,
        nodes_used: order,
    })
}

/// Least-squares line of gain against log2(N).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    /// Bits per doubling of the copy count.
    pub slope: f64,
    pub intercept: f64,
}

/// Fits gain = slope * log2(N) + intercept over the supplied points.
/// The asymptotic regime needs at least two distinct points with N >= 40.
pub fn fit_asymptote(points: &[(u32, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientFitData("at least two points"));
    }
    if points.iter().filter(|(n, _)| *n >= 40).count() < 2 {
        return Err(Error::InsufficientFitData(
            "at least two points with N >= 40",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| f64::from(*n).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, g)| *g).collect();
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let var: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if var == 0.0 {
        return Err(Error::InsufficientFitData("two distinct N values"));
    }
    let cov: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = cov / var;
    Ok(LineFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}
