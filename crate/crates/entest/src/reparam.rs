//! Reparametrization of the estimated quantity.
//!
//! The Kullback gain is invariant under any bijective relabeling b' = h(b)
//! of the parameter, so the gain computed for b applies verbatim to every
//! monotone entanglement measure. `reparametrized_gain` recomputes the gain
//! entirely in the transformed variable as an independent cross-check.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::prior::PriorDensity;
use crate::quad::{GaussLegendre, CONVERGENCE_TOL, DEFAULT_NODES};
use crate::spectrum::Spectrum;

type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly monotone, differentiable map on [0, 1].
#[derive(Clone)]
pub struct ParamMap {
    map: MapFn,
    derivative: Option<MapFn>,
}

impl ParamMap {
    pub fn identity() -> Self {
        Self {
            map: Arc::new(|b| b),
            derivative: Some(Arc::new(|_| 1.0)),
        }
    }

    /// The entanglement of formation of the pure state, expressed through
    /// the Schmidt amplitudes c+- = sqrt((1 +- b)/2):
    /// h(b) = -c+ log2 c+ - c- log2 c-.
    pub fn entanglement_of_formation() -> Self {
        let map = |b: f64| {
            let up = ((1.0 + b) / 2.0).sqrt();
            let down = ((1.0 - b) / 2.0).sqrt();
            let mut out = -up * up.log2();
            if down > 0.0 {
                out -= down * down.log2();
            }
            out
        };
        let derivative = |b: f64| {
            let up = ((1.0 + b) / 2.0).sqrt();
            let down = ((1.0 - b) / 2.0).sqrt();
            let inv_ln2 = std::f64::consts::LOG2_E;
            let mut out = -(up.log2() + inv_ln2) / (4.0 * up);
            if down > 0.0 {
                out += (down.log2() + inv_ln2) / (4.0 * down);
            } else {
                out = f64::NEG_INFINITY;
            }
            out
        };
        Self {
            map: Arc::new(map),
            derivative: Some(Arc::new(derivative)),
        }
    }

    /// The smaller Schmidt coefficient c- = sqrt((1 - b)/2), a monotone
    /// entanglement measure for the single-copy regime.
    pub fn smaller_schmidt_coefficient() -> Self {
        let map = |b: f64| ((1.0 - b) / 2.0).sqrt();
        let derivative = |b: f64| {
            let c = ((1.0 - b) / 2.0).sqrt();
            if c > 0.0 {
                -1.0 / (4.0 * c)
            } else {
                f64::NEG_INFINITY
            }
        };
        Self {
            map: Arc::new(map),
            derivative: Some(Arc::new(derivative)),
        }
    }

    /// A map given only by its values; the derivative falls back to central
    /// finite differences.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            map: Arc::new(f),
            derivative: None,
        }
    }

    /// A map with an analytic derivative.
    pub fn with_derivative<F, D>(f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            map: Arc::new(f),
            derivative: Some(Arc::new(df)),
        }
    }

    pub fn eval(&self, b: f64) -> f64 {
        (self.map)(b)
    }

    pub fn derivative(&self, b: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(b),
            None => {
                let step = 1e-6;
                let lo = (b - step).max(0.0);
                let hi = (b + step).min(1.0);
                ((self.map)(hi) - (self.map)(lo)) / (hi - lo)
            }
        }
    }

    fn validate_strictly_monotone(&self) -> Result<bool> {
        let grid = 1024;
        let first = self.eval(0.0);
        let last = self.eval(1.0);
        if !first.is_finite() || !last.is_finite() || first == last {
            return Err(Error::NonMonotoneMap);
        }
        let increasing = last > first;
        let mut prev = first;
        for i in 1..=grid {
            let v = self.eval(i as f64 / grid as f64);
            if !v.is_finite() || (increasing && v <= prev) || (!increasing && v >= prev) {
                return Err(Error::NonMonotoneMap);
            }
            prev = v;
        }
        Ok(increasing)
    }

    /// Inverts by bisection; assumes a monotone map and t inside its range.
    fn invert(&self, t: f64, increasing: bool) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            let below = if increasing { v < t } else { v > t };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Recomputes the expected gain with the parameter relabeled as b' = h(b),
/// integrating in b'-space with the pushed-forward prior
/// f'(b') = f(b) / |h'(b)|. Agrees with `average_gain` up to quadrature.
pub fn reparametrized_gain(
    spec: &Spectrum,
    prior: &PriorDensity,
    map: &ParamMap,
) -> Result<f64> {
    let increasing = map.validate_strictly_monotone()?;
    let t0 = map.eval(0.0);
    let t1 = map.eval(1.0);
    let (lo, hi) = if increasing { (t0, t1) } else { (t1, t0) };

    let transformed = |t: f64, weight_of: &dyn Fn(f64) -> f64| -> f64 {
        let b = map.invert(t, increasing);
        let slope = map.derivative(b).abs();
        if !(slope.is_finite() && slope > 0.0) {
            return 0.0;
        }
        prior.density(b) * weight_of(b) / slope
    };

    // Marginals recomputed in the transformed variable; they coincide with
    // the b-space marginals up to quadrature error.
    let marginals: Vec<f64> = spec
        .blocks()
        .iter()
        .map(|block| {
            crate::quad::integrate_to_convergence(
                |rule: &GaussLegendre| {
                    rule.integrate_over(lo, hi, |t| transformed(t, &|b| block.weight(b)))
                },
                DEFAULT_NODES,
                1e-12,
            )
            .value
        })
        .collect();

    let total = |rule: &GaussLegendre| -> f64 {
        rule.integrate_over(lo, hi, |t| {
            let b = map.invert(t, increasing);
            let slope = map.derivative(b).abs();
            if !(slope.is_finite() && slope > 0.0) {
                return 0.0;
            }
            let f = prior.density(b);
            if f <= 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for (block, &p) in spec.blocks().iter().zip(&marginals) {
                let w = block.weight(b);
                if w > 0.0 && p > 0.0 {
                    s += w * (w.ln() - p.ln());
                }
            }
            f * s / slope
        })
    };

    let out = crate::quad::integrate_to_convergence(total, DEFAULT_NODES, CONVERGENCE_TOL);
    Ok(out.value / std::f64::consts::LN_2)
}
