//! Continuous problem data and the convection-eliminating transform.
//!
//! With `P(x) = exp(μ₁x/(2λ₁))` and `Q(y) = exp(μ₂y/(2λ₂))`, the substitution
//! `u = v / (P Q)` turns the convection-diffusion equation into
//!
//! ```text
//! ∂^α_t v = λ₁ v_xx + λ₂ v_yy - β v + F,   β = μ₁²/(4λ₁) + μ₂²/(4λ₂) - γ,
//! ```
//!
//! with `F = PQf` and the initial/boundary data multiplied by `PQ` as well.

use std::fmt;
use std::sync::Arc;

use crate::spatial::Field2D;
use crate::{Error, Result};

/// Function of `(x, y, t)`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// Function of `(x, y)`.
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ProblemSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Edge length of the square domain `(0, L)²`.
    pub length: f64,
    pub final_time: f64,
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
    pub boundary: SpaceTimeFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("lambda1", &self.lambda1)
            .field("lambda2", &self.lambda2)
            .field("mu1", &self.mu1)
            .field("mu2", &self.mu2)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .field("length", &self.length)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Homogeneous problem (`f = φ = ψ = 0`) with the given coefficients.
    #[allow(clippy::too_many_arguments)]
    pub fn homogeneous(
        lambda1: f64,
        lambda2: f64,
        mu1: f64,
        mu2: f64,
        gamma: f64,
        alpha: f64,
        length: f64,
        final_time: f64,
    ) -> Self {
        Self {
            lambda1,
            lambda2,
            mu1,
            mu2,
            gamma,
            alpha,
            length,
            final_time,
            source: Arc::new(|_, _, _| 0.0),
            initial: Arc::new(|_, _| 0.0),
            boundary: Arc::new(|_, _, _| 0.0),
        }
    }

    pub fn with_source(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_initial(mut self, phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(phi);
        self
    }

    pub fn with_boundary(
        mut self,
        psi: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.boundary = Arc::new(psi);
        self
    }

    /// `μ₁²/(4λ₁) + μ₂²/(4λ₂) - γ`.
    pub fn beta(&self) -> f64 {
        self.mu1 * self.mu1 / (4.0 * self.lambda1) + self.mu2 * self.mu2 / (4.0 * self.lambda2)
            - self.gamma
    }

    /// Checks the standing assumptions on the coefficients.
    pub fn validate(&self) -> Result<&Self> {
        for (name, value) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveDiffusion { name, value });
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        let beta = self.beta();
        if !(beta >= 0.0) {
            return Err(Error::NegativeBeta { beta });
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        Ok(self)
    }

    /// Validates and builds the convection-free problem.
    pub fn transform(&self) -> Result<TransformedProblem> {
        self.validate()?;
        Ok(TransformedProblem {
            spec: self.clone(),
            beta: self.beta(),
            px_rate: self.mu1 / (2.0 * self.lambda1),
            qy_rate: self.mu2 / (2.0 * self.lambda2),
        })
    }
}

/// Reaction-diffusion problem for `v = P(x) Q(y) u`.
///
/// `P`, `Q` and the wrapped data are evaluated on demand.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    spec: ProblemSpec,
    beta: f64,
    px_rate: f64,
    qy_rate: f64,
}

impl TransformedProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda1(&self) -> f64 {
        self.spec.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.spec.lambda2
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn p(&self, x: f64) -> f64 {
        (self.px_rate * x).exp()
    }

    pub fn q(&self, y: f64) -> f64 {
        (self.qy_rate * y).exp()
    }

    fn pq(&self, x: f64, y: f64) -> f64 {
        self.p(x) * self.q(y)
    }

    /// `F = P Q f`.
    pub fn source(&self, x: f64, y: f64, t: f64) -> f64 {
        self.pq(x, y) * (self.spec.source)(x, y, t)
    }

    /// `φ̃ = P Q φ`.
    pub fn initial(&self, x: f64, y: f64) -> f64 {
        self.pq(x, y) * (self.spec.initial)(x, y)
    }

    /// `ψ̃ = P Q ψ`.
    pub fn boundary(&self, x: f64, y: f64, t: f64) -> f64 {
        self.pq(x, y) * (self.spec.boundary)(x, y, t)
    }

    /// `u[m,n] = v[m,n] / (P(x_m) Q(y_n))`.
    pub fn inverse_transform(&self, v: &Field2D) -> Field2D {
        let mesh = *v.mesh();
        Field2D::from_fn(&mesh, |m, n| {
            v[(m, n)] / (self.p(mesh.x(m)) * self.q(mesh.y(n)))
        })
    }

    /// `v[m,n] = P(x_m) Q(y_n) u[m,n]`.
    pub fn forward_multiply(&self, u: &Field2D) -> Field2D {
        let mesh = *u.mesh();
        Field2D::from_fn(&mesh, |m, n| {
            u[(m, n)] * self.p(mesh.x(m)) * self.q(mesh.y(n))
        })
    }
}
