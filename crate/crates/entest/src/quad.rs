//! Gauss-Legendre quadrature on [0, 1] with node-doubling refinement.

/// A Gauss-Legendre rule remapped to [0, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Default starting order for the refinement loop.
pub const DEFAULT_NODES: usize = 200;
/// Successive doublings stop once the integral moves by less than this.
pub const CONVERGENCE_TOL: f64 = 1e-9;
const MAX_DOUBLINGS: u32 = 6;

impl GaussLegendre {
    /// Computes the order-n rule by Newton iteration on the Legendre
    /// recurrence, then maps nodes and weights from [-1, 1] to [0, 1].
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "quadrature order must be at least 2");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th root of P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(order, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        for i in 0..order {
            nodes[i] = (nodes[i] + 1.0) / 2.0;
            weights[i] /= 2.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrates over [lo, hi] by affine rescaling of the [0, 1] rule.
    pub fn integrate_over<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let span = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * span * f(lo + span * x))
            .sum()
    }
}

/// Result of a node-doubling refinement.
#[derive(Debug, Clone, Copy)]
pub struct Converged {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub nodes_used: usize,
}

/// Doubles the rule order starting from `start` until two successive values
/// agree within `tol` (or the doubling budget runs out).
pub fn integrate_to_convergence<F: Fn(&GaussLegendre) -> f64>(
    eval: F,
    start: usize,
    tol: f64,
) -> Converged {
    let mut order = start.max(2);
    let mut prev = eval(&GaussLegendre::new(order));
    let mut error_estimate = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        order *= 2;
        let next = eval(&GaussLegendre::new(order));
        error_estimate = (next - prev).abs();
        prev = next;
        if error_estimate < tol {
            break;
        }
    }
    Converged {
        value: prev,
        error_estimate,
        nodes_used: order,
    }
}

/// x ln(x) extended by zero, the convention used in every entropy integrand.
pub fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the highest exact degree for 8 nodes
        let exact = 1.0 / 16.0;
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(15)), exact, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [2, 5, 64, 200, 801] {
            let rule = GaussLegendre::new(order);
            let total: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
            assert!(rule.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn handles_entropy_type_endpoints() {
        // int_0^1 x ln x dx = -1/4; integrand continuous but with ln-singular slope
        let out = integrate_to_convergence(|rule| rule.integrate(x_ln_x), 50, 1e-12);
        assert_abs_diff_eq!(out.value, -0.25, epsilon = 1e-11);
        assert!(out.error_estimate < 1e-10);
    }

    #[test]
    fn rescaled_interval() {
        let rule = GaussLegendre::new(16);
        assert_abs_diff_eq!(
            rule.integrate_over(-1.0, 2.0, |x| x * x),
            3.0,
            epsilon = 1e-13
        );
    }
}
