//! Solver library for two-dimensional time-fractional convection-diffusion
//! problems
//!
//! ```text
//! ∂^α_t u = λ₁ u_xx + λ₂ u_yy + μ₁ u_x + μ₂ u_y + γ u + f   on (0,L)² × (0,T_f]
//! ```
//!
//! with a Caputo derivative of order `α ∈ (0,1)` and Dirichlet data. Solutions
//! typically carry a weak singularity at `t = 0` (`u_t ~ t^{α-1}`).
//!
//! The method has four layers:
//!
//! * [problem]: an exponential change of variables removes the convection
//!   terms, leaving a reaction-diffusion problem with coefficient `β ≥ 0`.
//! * [mesh]: a fitted time mesh (power-graded on `[0,T]`, uniform on
//!   `[T,T_f]`) and a uniform square space mesh.
//! * [caputo]: the L2-1σ weights on the nonuniform mesh, evaluated in closed
//!   form at the offset points `t_{i+σ}` with `σ = 1 - α/2`.
//! * [spatial] and [adi]: fourth-order compact operators and a two-step ADI
//!   factorisation solved by tridiagonal sweeps.
//!
//! [verification] and [properties] provide manufactured solutions,
//! convergence studies and numerical sweeps of the coefficient inequalities
//! and stability bound. [quadrature] holds the adaptive quadrature used only
//! as an independent oracle.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adi;
pub mod caputo;
pub mod mesh;
pub mod problem;
pub mod properties;
pub mod quadrature;
pub mod spatial;
pub mod verification;

mod error;

pub use adi::{solve, LevelSelection, LevelSolution, SolverState};
pub use caputo::{discrete_caputo, r_coeff, rho, s_coeff, weight_row, KernelPieces, WeightRow};
pub use error::{Error, Result};
pub use mesh::{FittedMeshParams, SpatialMesh, TemporalMesh};
pub use problem::{ProblemSpec, TransformedProblem};
pub use spatial::{Field2D, TridiagonalSystem};
pub use verification::{
    convergence_study, error_norms, predicted_temporal_order, Axis, ConvergenceReport,
    ErrorNorms, ManufacturedProblem, StudyParams, TimeProfile,
};
