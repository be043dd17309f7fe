//! Manufactured solutions, discrete error norms and convergence studies.
//!
//! Every manufactured solution has the form `u = T(t) S(x, y)` with
//! `S = sin(πx/L) sin(πy/L)`, so `φ = T(0) S`, `ψ = 0` and the source follows
//! from the analytic Caputo derivative of `T`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::adi::{solve, LevelSelection};
use crate::caputo::gamma;
use crate::mesh::{FittedMeshParams, SpatialMesh, TemporalMesh};
use crate::problem::ProblemSpec;
use crate::quadrature::caputo_quadrature;
use crate::spatial::Field2D;
use crate::{Error, Result};

/// Time factor `T(t)` of a manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `1 + t^α`: `T'(t) ~ t^{α-1}` at the origin.
    Singular { alpha: f64 },
    /// `1 + t²`.
    Smooth,
    /// `T ≡ 1`: a steady solution, so the scheme's temporal error vanishes
    /// up to the spatial error it excites.
    Steady,
    /// `T ≡ 0`.
    Zero,
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Singular { alpha } => 1.0 + t.powf(alpha),
            Self::Smooth => 1.0 + t * t,
            Self::Steady => 1.0,
            Self::Zero => 0.0,
        }
    }

    /// `T'(t)` for `t > 0`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Singular { alpha } => alpha * t.powf(alpha - 1.0),
            Self::Smooth => 2.0 * t,
            Self::Steady | Self::Zero => 0.0,
        }
    }

    /// Exponent `β` with `T'(t) ~ t^{β-1}` near zero.
    pub fn derivative_exponent(&self) -> f64 {
        match *self {
            Self::Singular { alpha } => alpha,
            _ => 1.0,
        }
    }

    /// Caputo derivative of order `alpha` of `T`.
    pub fn caputo(&self, t: f64, alpha: f64) -> f64 {
        match *self {
            Self::Singular { alpha: a } if a == alpha => gamma(1.0 + alpha),
            Self::Singular { alpha: a } => gamma(1.0 + a) / gamma(1.0 + a - alpha) * t.powf(a - alpha),
            Self::Smooth => 2.0 * t.powf(2.0 - alpha) / gamma(3.0 - alpha),
            Self::Steady | Self::Zero => 0.0,
        }
    }
}

/// Coefficients `λ₁, λ₂, μ₁, μ₂, γ` of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            mu1: 0.0,
            mu2: 0.0,
            gamma: 0.0,
        }
    }
}

/// Problem with a known exact solution `u = T(t) sin(πx/L) sin(πy/L)`.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub profile: TimeProfile,
    pub coefficients: Coefficients,
    pub spec: ProblemSpec,
    /// Whether `u_t` blows up at `t = 0`.
    pub singular: bool,
}

impl ManufacturedProblem {
    /// `u = (1 + t^α) S`.
    pub fn singular(alpha: f64, length: f64, final_time: f64, coeffs: Coefficients) -> Result<Self> {
        Self::build("singular", TimeProfile::Singular { alpha }, alpha, length, final_time, coeffs)
    }

    /// `u = (1 + t²) S`.
    pub fn smooth(alpha: f64, length: f64, final_time: f64, coeffs: Coefficients) -> Result<Self> {
        Self::build("smooth", TimeProfile::Smooth, alpha, length, final_time, coeffs)
    }

    /// `u = S`.
    pub fn steady(alpha: f64, length: f64, final_time: f64, coeffs: Coefficients) -> Result<Self> {
        Self::build("steady", TimeProfile::Steady, alpha, length, final_time, coeffs)
    }

    /// `u ≡ 0`.
    pub fn zero(alpha: f64, length: f64, final_time: f64, coeffs: Coefficients) -> Result<Self> {
        Self::build("zero", TimeProfile::Zero, alpha, length, final_time, coeffs)
    }

    /// Looks up a built-in problem by name.
    pub fn by_name(
        name: &str,
        alpha: f64,
        length: f64,
        final_time: f64,
        coeffs: Coefficients,
    ) -> Result<Self> {
        match name {
            "singular" => Self::singular(alpha, length, final_time, coeffs),
            "smooth" => Self::smooth(alpha, length, final_time, coeffs),
            "steady" => Self::steady(alpha, length, final_time, coeffs),
            "zero" => Self::zero(alpha, length, final_time, coeffs),
            other => Err(Error::InvalidProblem(format!(
                "unknown problem '{other}' (expected singular, smooth, steady or zero)"
            ))),
        }
    }

    fn build(
        name: &str,
        profile: TimeProfile,
        alpha: f64,
        length: f64,
        final_time: f64,
        c: Coefficients,
    ) -> Result<Self> {
        let k = PI / length;
        let spatial = SpatialTerms { k, c };
        let spec = ProblemSpec::homogeneous(
            c.lambda1, c.lambda2, c.mu1, c.mu2, c.gamma, alpha, length, final_time,
        )
        .with_source(move |x, y, t| {
            profile.caputo(t, alpha) * spatial.s(x, y) - profile.value(t) * spatial.operator(x, y)
        })
        .with_initial(move |x, y| profile.value(0.0) * spatial.s(x, y))
        .with_boundary(|_, _, _| 0.0);
        spec.validate()?;
        Ok(Self {
            name: name.to_string(),
            profile,
            coefficients: c,
            spec,
            singular: matches!(profile, TimeProfile::Singular { .. }),
        })
    }

    fn spatial(&self) -> SpatialTerms {
        SpatialTerms {
            k: PI / self.spec.length,
            c: self.coefficients,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn exact(&self, x: f64, y: f64, t: f64) -> f64 {
        self.profile.value(t) * self.spatial().s(x, y)
    }

    /// Exact solution as a shareable closure.
    pub fn exact_fn(&self) -> Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync> {
        let (profile, spatial) = (self.profile, self.spatial());
        Arc::new(move |x, y, t| profile.value(t) * spatial.s(x, y))
    }

    /// `∂^α_t u - (λ₁u_xx + λ₂u_yy + μ₁u_x + μ₂u_y + γu + f)` at one point,
    /// with the Caputo term evaluated by quadrature of `T'`.
    pub fn pde_residual(&self, x: f64, y: f64, t: f64) -> f64 {
        let alpha = self.alpha();
        let profile = self.profile;
        let caputo_t = if matches!(profile, TimeProfile::Zero | TimeProfile::Steady) {
            0.0
        } else {
            caputo_quadrature(|s| profile.derivative(s), t, alpha, profile.derivative_exponent())
        };
        let spatial = self.spatial();
        let lhs = caputo_t * spatial.s(x, y);
        let rhs = profile.value(t) * spatial.operator(x, y) + (self.spec.source)(x, y, t);
        lhs - rhs
    }
}

#[derive(Debug, Clone, Copy)]
struct SpatialTerms {
    k: f64,
    c: Coefficients,
}

impl SpatialTerms {
    fn s(&self, x: f64, y: f64) -> f64 {
        (self.k * x).sin() * (self.k * y).sin()
    }

    /// `λ₁S_xx + λ₂S_yy + μ₁S_x + μ₂S_y + γS`.
    fn operator(&self, x: f64, y: f64) -> f64 {
        let (sx, cx) = (self.k * x).sin_cos();
        let (sy, cy) = (self.k * y).sin_cos();
        let c = &self.c;
        let k2 = self.k * self.k;
        -(c.lambda1 + c.lambda2) * k2 * sx * sy
            + c.mu1 * self.k * cx * sy
            + c.mu2 * self.k * sx * cy
            + c.gamma * sx * sy
    }
}

/// Discrete error norms at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `(Σ h_x h_y e²)^{1/2}` over interior nodes.
    pub l2: f64,
    /// Maximum over all nodes.
    pub max: f64,
}

/// Error of `numeric` against `exact(x, y, t)` sampled on its mesh.
pub fn error_norms(numeric: &Field2D, exact: impl Fn(f64, f64, f64) -> f64, t: f64) -> ErrorNorms {
    let mesh = *numeric.mesh();
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for m in 0..=mesh.mx() {
        for n in 0..=mesh.my() {
            let e = numeric[(m, n)] - exact(mesh.x(m), mesh.y(n), t);
            max = max.max(e.abs());
            if !mesh.is_boundary(m, n) {
                sum += e * e;
            }
        }
    }
    ErrorNorms {
        l2: (sum * mesh.hx() * mesh.hy()).sqrt(),
        max,
    }
}

/// `min{3-α, θα, 1+2α, 2+α}`.
pub fn predicted_temporal_order(alpha: f64, theta: f64) -> f64 {
    (3.0 - alpha)
        .min(theta * alpha)
        .min(1.0 + 2.0 * alpha)
        .min(2.0 + alpha)
}

/// Spatial order of the compact scheme.
pub const PREDICTED_SPATIAL_ORDER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Temporal,
    Spatial,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Temporal => "temporal",
            Self::Spatial => "spatial",
        }
    }
}

/// Refinement study configuration. `levels` lists `N_t` for a temporal study
/// and `M = M_x = M_y` for a spatial one; the other resolution is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyParams {
    pub axis: Axis,
    pub levels: Vec<usize>,
    pub theta: f64,
    /// `N_t` held fixed in a spatial study.
    pub nt: usize,
    /// `M` held fixed in a temporal study.
    pub m: usize,
    /// End `T` of the graded section; `None` grades the whole interval.
    pub split_time: Option<f64>,
    /// `N̂_t / N_t` when `split_time` is set.
    pub graded_fraction: f64,
    /// Re-run the finest level with the fixed resolution doubled.
    pub check_subdominance: bool,
}

impl StudyParams {
    pub fn temporal(levels: Vec<usize>, theta: f64, m: usize) -> Self {
        Self {
            axis: Axis::Temporal,
            levels,
            theta,
            nt: 0,
            m,
            split_time: None,
            graded_fraction: 0.5,
            check_subdominance: true,
        }
    }

    pub fn spatial(levels: Vec<usize>, theta: f64, nt: usize) -> Self {
        Self {
            axis: Axis::Spatial,
            levels,
            theta,
            nt,
            m: 0,
            split_time: None,
            graded_fraction: 0.5,
            check_subdominance: true,
        }
    }

    fn meshes(&self, level: usize, final_time: f64, alpha: f64) -> Result<(TemporalMesh, usize)> {
        let (nt, m) = match self.axis {
            Axis::Temporal => (level, self.m),
            Axis::Spatial => (self.nt, level),
        };
        Ok((self.temporal_mesh(nt, final_time, alpha)?, m))
    }

    fn temporal_mesh(&self, nt: usize, final_time: f64, alpha: f64) -> Result<TemporalMesh> {
        let params = match self.split_time {
            Some(split) if split < final_time => FittedMeshParams {
                nt,
                n_graded: ((self.graded_fraction * nt as f64).ceil() as usize).clamp(1, nt.saturating_sub(1).max(1)),
                theta: self.theta,
                split_time: split,
                final_time,
                alpha,
                min_graded_fraction: self.graded_fraction.min(0.99),
            },
            _ => FittedMeshParams::graded(nt, self.theta, final_time, alpha),
        };
        TemporalMesh::fitted(&params)
    }
}

/// One refinement level of a [`ConvergenceReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    /// `N_t` or `M`.
    pub param: usize,
    pub errors: ErrorNorms,
    /// `log2(e_{l-1}/e_l)` of the L2 error, absent on the first level.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub axis: Axis,
    pub rows: Vec<ConvergenceRow>,
    pub predicted: f64,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    /// Observed order of the finest level pair.
    pub fn finest_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.observed_order)
    }

    /// `level,param,l2_error,max_error,observed_order,predicted_order`, one
    /// row per level, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,param,l2_error,max_error,observed_order,predicted_order\n");
        for row in &self.rows {
            let observed = row
                .observed_order
                .map(|o| format!("{o:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{:.16e}",
                row.level, row.param, row.errors.l2, row.errors.max, observed, self.predicted
            );
        }
        out
    }
}

/// `log2(coarse/fine)` assuming a doubling between the two levels; for other
/// ratios the parameter ratio is used as the base.
fn observed_order(coarse: f64, fine: f64, p_coarse: usize, p_fine: usize) -> f64 {
    (coarse / fine).ln() / (p_fine as f64 / p_coarse as f64).ln()
}

/// Final-time error of one run.
pub fn run_error(problem: &ManufacturedProblem, tmesh: &TemporalMesh, m: usize) -> Result<ErrorNorms> {
    let smesh = SpatialMesh::new(m, m, problem.spec.length)?;
    let out = solve(&problem.spec, tmesh, &smesh, &LevelSelection::Final)?;
    let last = &out[0];
    Ok(error_norms(&last.u, |x, y, t| problem.exact(x, y, t), last.time))
}

/// Runs `solve` at every refinement level (levels run in parallel), records
/// final-time errors and observed orders between consecutive levels.
pub fn convergence_study(problem: &ManufacturedProblem, params: &StudyParams) -> Result<ConvergenceReport> {
    if params.levels.len() < 2 {
        return Err(Error::InvalidProblem("a convergence study needs at least two levels".into()));
    }
    if params.levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidProblem("refinement levels must be strictly increasing".into()));
    }
    let final_time = problem.spec.final_time;
    let alpha = problem.alpha();

    let errors: Vec<ErrorNorms> = params
        .levels
        .par_iter()
        .map(|&level| {
            let (tmesh, m) = params.meshes(level, final_time, alpha)?;
            run_error(problem, &tmesh, m)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(errors.len());
    for (idx, (&param, &e)) in params.levels.iter().zip(&errors).enumerate() {
        let observed_order = (idx > 0).then(|| {
            observed_order(errors[idx - 1].l2, e.l2, params.levels[idx - 1], param)
        });
        rows.push(ConvergenceRow {
            level: idx,
            param,
            errors: e,
            observed_order,
        });
    }

    let predicted = match params.axis {
        Axis::Temporal => predicted_temporal_order(alpha, params.theta),
        Axis::Spatial => PREDICTED_SPATIAL_ORDER,
    };

    let mut warnings = Vec::new();
    if params.check_subdominance {
        let finest = *params.levels.last().unwrap();
        let base = errors.last().unwrap().l2;
        let (tmesh, m) = match params.axis {
            Axis::Temporal => (params.temporal_mesh(finest, final_time, alpha)?, 2 * params.m),
            Axis::Spatial => (params.temporal_mesh(2 * params.nt, final_time, alpha)?, finest),
        };
        let doubled = run_error(problem, &tmesh, m)?.l2;
        let change = (doubled - base).abs() / base;
        if change >= 0.05 {
            let other = match params.axis {
                Axis::Temporal => "M",
                Axis::Spatial => "N_t",
            };
            warnings.push(format!(
                "{} error at the finest level changed by {:.1}% when {} was doubled; \
                 the fixed resolution may pollute the observed order",
                params.axis.name(),
                100.0 * change,
                other
            ));
        }
    }

    Ok(ConvergenceReport {
        problem: problem.name.clone(),
        axis: params.axis,
        rows,
        predicted,
        warnings,
    })
}
