//! SU(2) sampling and deterministic quadrature over the group.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;

use crate::quad::GaussLegendre;

/// One Haar-random SU(2) element, via a uniform unit quaternion
/// (Marsaglia's method on the 3-sphere).
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<Complex64> {
    let (a, b) = loop {
        let a = 2.0 * rng.gen::<f64>() - 1.0;
        let b = 2.0 * rng.gen::<f64>() - 1.0;
        let s = a * a + b * b;
        if s < 1.0 {
            break (a, b);
        }
    };
    let (c, d, s2) = loop {
        let c = 2.0 * rng.gen::<f64>() - 1.0;
        let d = 2.0 * rng.gen::<f64>() - 1.0;
        let s = c * c + d * d;
        if s > 0.0 && s < 1.0 {
            break (c, d, s);
        }
    };
    let scale = ((1.0 - (a * a + b * b)) / s2).sqrt();
    quaternion_to_su2(a, b, c * scale, d * scale)
}

/// w + i(x sx + y sy + z sz) for a unit quaternion (w, x, y, z).
fn quaternion_to_su2(w: f64, x: f64, y: f64, z: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(w, z),
        Complex64::new(y, x),
        Complex64::new(-y, x),
        Complex64::new(w, -z),
    )
}

/// Rz(alpha) Ry(beta) Rz(gamma) in the spin-1/2 representation.
pub fn euler_su2(alpha: f64, beta: f64, gamma: f64) -> Matrix2<Complex64> {
    let rz = |ang: f64| {
        Matrix2::new(
            Complex64::from_polar(1.0, -ang / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, ang / 2.0),
        )
    };
    let (s, c) = ((beta / 2.0).sin(), (beta / 2.0).cos());
    let ry = Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    );
    rz(alpha) * ry * rz(gamma)
}

/// A deterministic Haar-measure rule on SU(2) in Euler angles.
///
/// For a conjugation integrand built from N spin-1/2 factors and their
/// adjoints, the alpha and gamma dependence is a trigonometric polynomial
/// with harmonics up to N, so a uniform grid with more than N points
/// integrates those angles exactly. The beta integral (with its sin beta
/// Haar weight) is an entire trigonometric polynomial handled by
/// Gauss-Legendre to machine precision.
#[derive(Debug, Clone)]
pub struct Su2Quadrature {
    elements: Vec<(Matrix2<Complex64>, f64)>,
}

impl Su2Quadrature {
    /// A rule exact for integrands of harmonic degree `n` per angle.
    pub fn for_copies(n: u32) -> Self {
        let circle = (n + 3) as usize;
        let polar = (2 * n + 10) as usize;
        Self::with_orders(circle, polar)
    }

    pub fn with_orders(circle_points: usize, polar_order: usize) -> Self {
        let rule = GaussLegendre::new(polar_order);
        let tau = std::f64::consts::TAU;
        let mut elements =
            Vec::with_capacity(circle_points * circle_points * polar_order);
        for ia in 0..circle_points {
            let alpha = tau * ia as f64 / circle_points as f64;
            for (node, w) in rule.nodes().iter().zip(rule.weights()) {
                let beta = std::f64::consts::PI * node;
                // Haar: dalpha/2pi * sin(beta)/2 dbeta * dgamma/2pi
                let wb = w * std::f64::consts::PI * beta.sin() / 2.0;
                for ig in 0..circle_points {
                    let gamma = tau * ig as f64 / circle_points as f64;
                    let weight = wb / (circle_points * circle_points) as f64;
                    elements.push((euler_su2(alpha, beta, gamma), weight));
                }
            }
        }
        Self { elements }
    }

    pub fn elements(&self) -> &[(Matrix2<Complex64>, f64)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
