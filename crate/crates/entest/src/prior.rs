//! Prior densities on the parameter b in [0, 1].

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_convergence, GaussLegendre, DEFAULT_NODES};
use crate::spectrum::SpectralBlock;

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone)]
enum Inner {
    /// sum_q coeffs[q] * b^q with exact rational coefficients.
    Polynomial { coeffs: Arc<Vec<BigRational>> },
    /// base(b) * w_{n,j}(b) / norm: the posterior of a polynomial prior
    /// after observing the outcome of block j. Evaluation keeps the weight
    /// in its stable monomial form instead of expanding the product.
    Tilted {
        base: Arc<Vec<BigRational>>,
        block: Arc<SpectralBlock>,
        norm: BigRational,
    },
    /// Arbitrary callable with a supplied upper bound for rejection sampling.
    Generic {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        bound: f64,
    },
}

/// A probability density on b in [0, 1].
///
/// Polynomial densities carry exact rational coefficients so that outcome
/// marginals can be integrated in exact arithmetic; anything else falls back
/// to quadrature.
#[derive(Clone)]
pub struct PriorDensity {
    inner: Inner,
}

impl fmt::Debug for PriorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Inner::Polynomial { coeffs } => write!(f, "PriorDensity::Polynomial({coeffs:?})"),
            Inner::Tilted { block, norm, .. } => {
                write!(f, "PriorDensity::Tilted(j={}, norm={norm})", block.j())
            }
            Inner::Generic { bound, .. } => write!(f, "PriorDensity::Generic(bound={bound})"),
        }
    }
}

impl PriorDensity {
    /// The unbiased density 3b^2 induced by the isotropic state distribution.
    pub fn quadratic() -> Self {
        let coeffs = vec![
            BigRational::zero(),
            BigRational::zero(),
            BigRational::from_integer(BigInt::from(3)),
        ];
        Self {
            inner: Inner::Polynomial {
                coeffs: Arc::new(coeffs),
            },
        }
    }

    /// The flat density f(b) = 1.
    pub fn uniform() -> Self {
        Self {
            inner: Inner::Polynomial {
                coeffs: Arc::new(vec![BigRational::one()]),
            },
        }
    }

    /// A polynomial density sum_q coeffs[q] b^q. Must integrate to exactly 1
    /// and be nonnegative on [0, 1].
    pub fn from_rational_coeffs(coeffs: Vec<BigRational>) -> Result<Self> {
        let mut total = BigRational::zero();
        for (q, c) in coeffs.iter().enumerate() {
            total += c / BigRational::from_integer(BigInt::from(q as u64 + 1));
        }
        if total != BigRational::one() {
            return Err(Error::InvalidPrior(format!(
                "polynomial integrates to {total}, not 1"
            )));
        }
        let prior = Self {
            inner: Inner::Polynomial {
                coeffs: Arc::new(coeffs),
            },
        };
        for i in 0..=400 {
            let b = i as f64 / 400.0;
            if prior.density(b) < -1e-12 {
                return Err(Error::InvalidPrior(format!("negative density at b={b}")));
            }
        }
        Ok(prior)
    }

    /// A polynomial density from float coefficients, converted exactly
    /// (every finite f64 is a rational).
    pub fn from_f64_coeffs(coeffs: &[f64]) -> Result<Self> {
        let rat = coeffs
            .iter()
            .map(|&c| {
                BigRational::from_f64(c)
                    .ok_or_else(|| Error::InvalidPrior(format!("non-finite coefficient {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational_coeffs(rat)
    }

    /// An arbitrary density. `bound` must dominate f on [0, 1]; it drives
    /// rejection sampling. Normalization is checked by quadrature.
    pub fn from_fn<F>(f: F, bound: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let check = {
            let f = Arc::clone(&f);
            integrate_to_convergence(move |rule| rule.integrate(|b| f(b)), DEFAULT_NODES, 1e-12)
        };
        if (check.value - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPrior(format!(
                "density integrates to {:.12}, not 1",
                check.value
            )));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidPrior(format!("invalid bound {bound}")));
        }
        Ok(Self {
            inner: Inner::Generic { f, bound },
        })
    }

    pub(crate) fn tilted(
        base: Arc<Vec<BigRational>>,
        block: SpectralBlock,
        norm: BigRational,
    ) -> Self {
        Self {
            inner: Inner::Tilted {
                base,
                block: Arc::new(block),
                norm,
            },
        }
    }

    /// Whether moments of this density are available in exact arithmetic.
    pub fn is_exact(&self) -> bool {
        !matches!(self.inner, Inner::Generic { .. })
    }

    /// Pointwise density value.
    pub fn density(&self, b: f64) -> f64 {
        match &self.inner {
            Inner::Polynomial { coeffs } => eval_poly_f64(coeffs, b),
            Inner::Tilted { base, block, norm } => {
                eval_poly_f64(base, b) * block.weight(b) / norm.to_f64().unwrap_or(f64::NAN)
            }
            Inner::Generic { f, .. } => f(b),
        }
    }

    /// Exact integral of b^q against this density, when available.
    pub fn exact_moment(&self, q: u32) -> Option<BigRational> {
        match &self.inner {
            Inner::Polynomial { coeffs } => {
                let mut total = BigRational::zero();
                for (p, c) in coeffs.iter().enumerate() {
                    total += c / BigRational::from_integer(BigInt::from(p as u64 + q as u64 + 1));
                }
                Some(total)
            }
            Inner::Tilted { base, block, norm } => {
                let mut total = BigRational::zero();
                for (p, c) in base.iter().enumerate() {
                    total += c * block.exact_weight_moment(p as u32 + q);
                }
                Some(total / norm.clone())
            }
            Inner::Generic { .. } => None,
        }
    }

    /// Exact integral of this density against the block weight w_{n,j}(b),
    /// when the density is polynomial. This is the outcome marginal p(k).
    pub(crate) fn exact_block_integral(&self, block: &SpectralBlock) -> Option<BigRational> {
        match &self.inner {
            Inner::Polynomial { coeffs } => {
                let mut total = BigRational::zero();
                for (q, c) in coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        total += c * block.exact_weight_moment(q as u32);
                    }
                }
                Some(total)
            }
            _ => None,
        }
    }

    pub(crate) fn polynomial_coeffs(&self) -> Option<Arc<Vec<BigRational>>> {
        match &self.inner {
            Inner::Polynomial { coeffs } => Some(Arc::clone(coeffs)),
            _ => None,
        }
    }

    /// Draws one b from the density. Polynomial densities invert the exact
    /// CDF (closed form for a pure monomial, bisection otherwise); generic
    /// densities use rejection sampling against the supplied bound.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            Inner::Polynomial { coeffs } => {
                let u: f64 = rng.gen();
                sample_polynomial(coeffs, u)
            }
            Inner::Tilted { .. } => {
                // CDF of base * weight is monotone; invert it numerically
                // through the density itself.
                let u: f64 = rng.gen();
                invert_cdf_by_quadrature(self, u)
            }
            Inner::Generic { f, bound } => loop {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen::<f64>() * bound;
                if y <= f(x) {
                    return x;
                }
            },
        }
    }

    /// integral of the density minus 1, by exact arithmetic or quadrature.
    pub fn normalization_defect(&self) -> f64 {
        if let Some(total) = self.exact_moment(0) {
            (total - BigRational::one()).to_f64().unwrap_or(f64::NAN)
        } else {
            let f = self.clone();
            integrate_to_convergence(
                move |rule| rule.integrate(|b| f.density(b)),
                DEFAULT_NODES,
                1e-12,
            )
            .value
                - 1.0
        }
    }
}

/// Relative entropy between two priors in bits: integral f' ln(f'/f) / ln 2.
///
/// The integrand is extended by zero wherever f' vanishes.
pub fn relative_entropy_bits(posterior: &PriorDensity, prior: &PriorDensity) -> f64 {
    let post = posterior.clone();
    let pri = prior.clone();
    let out = integrate_to_convergence(
        move |rule| {
            rule.integrate(|b| {
                let p = post.density(b);
                if p <= 0.0 {
                    0.0
                } else {
                    p * (p.ln() - pri.density(b).ln())
                }
            })
        },
        DEFAULT_NODES,
        crate::quad::CONVERGENCE_TOL,
    );
    out.value / std::f64::consts::LN_2
}

fn eval_poly_f64(coeffs: &[BigRational], b: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * b + c.to_f64().unwrap_or(f64::NAN);
    }
    acc
}

fn sample_polynomial(coeffs: &[BigRational], u: f64) -> f64 {
    // CDF(b) = sum_q c_q b^(q+1) / (q+1)
    let cdf_coeffs: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(q, c)| c.to_f64().unwrap_or(f64::NAN) / (q as f64 + 1.0))
        .collect();
    let nonzero: Vec<usize> = cdf_coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 0.0)
        .map(|(q, _)| q)
        .collect();
    if nonzero.len() == 1 {
        // pure monomial c b^q: CDF = b^(q+1), so b = u^(1/(q+1))
        let q = nonzero[0];
        return u.powf(1.0 / (q as f64 + 1.0));
    }
    let cdf = |b: f64| -> f64 {
        let mut acc = 0.0;
        for c in cdf_coeffs.iter().rev() {
            acc = acc * b + c;
        }
        acc * b
    };
    bisect_monotone(&cdf, u)
}

fn invert_cdf_by_quadrature(density: &PriorDensity, u: f64) -> f64 {
    let rule = GaussLegendre::new(400);
    let cdf = |b: f64| -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        rule.integrate_over(0.0, b, |x| density.density(x))
    };
    bisect_monotone(&cdf, u)
}

fn bisect_monotone(cdf: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
