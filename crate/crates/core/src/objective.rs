//! Smooth, strongly convex quadratics and their Fenchel conjugates.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::vertex::Vector;

/// Value, gradient and conjugate access for the smooth part of the objective.
///
/// Only quadratics ship, but the oracles and bound checks are written
/// against this trait.
pub trait ConvexObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    /// `g*(y) = max_x yᵀx − g(x)`.
    fn conjugate_value(&self, y: &Vector) -> f64;
    /// The maximizer in the definition of `g*(y)`.
    fn conjugate_gradient(&self, y: &Vector) -> Vector;
    /// `(α, β)`: strong-convexity and smoothness moduli of `g`.
    fn moduli(&self) -> (f64, f64);
}

/// `g(x) = ½ xᵀPx + bᵀx` with `P` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    p: DMatrix<f64>,
    b: Vector,
    chol: Cholesky<f64, Dyn>,
    alpha: f64,
    beta: f64,
}

impl QuadraticObjective {
    pub fn new(p: DMatrix<f64>, b: Vector) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::invalid("objective dimension must be positive"));
        }
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::invalid(format!(
                "P is {}x{} but b has length {n}",
                p.nrows(),
                p.ncols()
            )));
        }
        if p.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective data must be finite"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, c) = (p[(i, j)], p[(j, i)]);
                if (a - c).abs() > 1e-12 * (1.0 + a.abs().max(c.abs())) {
                    return Err(Error::invalid(format!(
                        "P is not symmetric at ({i}, {j}): {a} vs {c}"
                    )));
                }
            }
        }
        let p = (&p + p.transpose()) * 0.5;
        let eig = SymmetricEigen::new(p.clone());
        let alpha = eig.eigenvalues.min();
        let beta = eig.eigenvalues.max();
        if alpha <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: alpha,
            });
        }
        let chol = Cholesky::new(p.clone()).ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: alpha,
        })?;
        Ok(QuadraticObjective {
            p,
            b,
            chol,
            alpha,
            beta,
        })
    }

    /// Ingests `xᵀQx + bᵀx` for arbitrary square `Q` as `P = Q + Qᵀ`.
    pub fn from_quadratic_form(q: DMatrix<f64>, b: Vector) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::invalid("quadratic form must be square"));
        }
        let p = &q + q.transpose();
        Self::new(p, b)
    }

    /// `g(x) = ½‖x‖²`.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), Vector::zeros(n))
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn linear(&self) -> &Vector {
        &self.b
    }

    /// `P⁻¹v` through the cached Cholesky factor.
    pub fn solve(&self, v: &Vector) -> Vector {
        self.chol.solve(v)
    }
}

impl ConvexObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.b.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.p * x + &self.b
    }

    fn conjugate_value(&self, y: &Vector) -> f64 {
        let shifted = y - &self.b;
        0.5 * shifted.dot(&self.solve(&shifted))
    }

    fn conjugate_gradient(&self, y: &Vector) -> Vector {
        self.solve(&(y - &self.b))
    }

    fn moduli(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }
}
