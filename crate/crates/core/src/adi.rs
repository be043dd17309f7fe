//! Time marching of the compact ADI scheme.
//!
//! At level `i` with `μ = βσ + w_{i,i}` the scheme reads
//!
//! ```text
//! (H_x - σλ₁/μ δ_x²)(H_y - σλ₂/μ δ_y²) V^{i+1} = RHS^i
//! ```
//!
//! on interior nodes, where `RHS^i` collects the L2-1σ history, the
//! σ-weighted old level, the source at `t_{i+σ}` and the splitting term
//! `λ₁λ₂σ²/μ² δ_x²δ_y² V^i`. It is solved in two sweeps: one tridiagonal
//! solve along `x` per interior row for `V* = (H_y - σλ₂/μ δ_y²) V^{i+1}`,
//! then one along `y` per interior column.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::caputo::{weight_row, WeightRow};
use crate::mesh::{SpatialMesh, TemporalMesh};
use crate::problem::{ProblemSpec, TransformedProblem};
use crate::spatial::{Field2D, TridiagonalSystem};
use crate::{Error, Result};

/// Interior-unknown limit of [`SolverState::direct_solve_oracle`].
pub const ORACLE_MAX_UNKNOWNS: usize = 400;

#[derive(Debug, Clone)]
struct StepData {
    row: WeightRow,
    mu: f64,
}

/// Marching state: the transformed solution history `V^0, ..., V^i`.
#[derive(Debug, Clone)]
pub struct SolverState<'a> {
    problem: &'a TransformedProblem,
    tmesh: &'a TemporalMesh,
    smesh: SpatialMesh,
    history: Vec<Field2D>,
    step: Option<StepData>,
}

impl<'a> SolverState<'a> {
    /// Level 0: `V^0 = φ̃` at every node.
    pub fn initialize(
        problem: &'a TransformedProblem,
        tmesh: &'a TemporalMesh,
        smesh: &SpatialMesh,
    ) -> Result<Self> {
        let v0 = Field2D::sample(smesh, |x, y| problem.initial(x, y));
        Self::initialize_with(problem, tmesh, v0)
    }

    /// Level 0 from an explicit field `V^0` (used to perturb initial data).
    pub fn initialize_with(
        problem: &'a TransformedProblem,
        tmesh: &'a TemporalMesh,
        v0: Field2D,
    ) -> Result<Self> {
        let smesh = *v0.mesh();
        if tmesh.alpha() != problem.alpha() {
            return Err(Error::InvalidProblem(format!(
                "temporal mesh built for alpha = {} but problem has alpha = {}",
                tmesh.alpha(),
                problem.alpha()
            )));
        }
        if (smesh.length() - problem.spec().length).abs() > 1e-12 * problem.spec().length {
            return Err(Error::InvalidProblem(format!(
                "spatial mesh length {} differs from domain length {}",
                smesh.length(),
                problem.spec().length
            )));
        }
        let mut state = Self {
            problem,
            tmesh,
            smesh,
            history: vec![v0],
            step: None,
        };
        state.prepare_level()?;
        Ok(state)
    }

    fn prepare_level(&mut self) -> Result<()> {
        let i = self.level();
        self.step = if i < self.tmesh.nt() {
            let row = weight_row(self.tmesh, i)?;
            let mu = self.problem.beta() * self.tmesh.sigma() + row.last();
            debug_assert!(mu > 0.0);
            Some(StepData { row, mu })
        } else {
            None
        };
        Ok(())
    }

    fn step_data(&self) -> Result<&StepData> {
        self.step
            .as_ref()
            .ok_or(Error::FinalLevelReached(self.tmesh.nt()))
    }

    /// Current level `i`.
    pub fn level(&self) -> usize {
        self.history.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.tmesh.t(self.level())
    }

    pub fn history(&self) -> &[Field2D] {
        &self.history
    }

    pub fn current(&self) -> &Field2D {
        self.history.last().unwrap()
    }

    pub fn spatial_mesh(&self) -> &SpatialMesh {
        &self.smesh
    }

    pub fn temporal_mesh(&self) -> &TemporalMesh {
        self.tmesh
    }

    pub fn problem(&self) -> &TransformedProblem {
        self.problem
    }

    /// Weights of the current level, `None` once `i = N_t`.
    pub fn weights(&self) -> Option<&WeightRow> {
        self.step.as_ref().map(|s| &s.row)
    }

    /// `μ = βσ + w_{i,i}` of the current level.
    pub fn mu(&self) -> Option<f64> {
        self.step.as_ref().map(|s| s.mu)
    }

    pub fn is_finished(&self) -> bool {
        self.step.is_none()
    }

    /// `Σ_{k=1}^{i} (w_{i,k} - w_{i,k-1}) V^k + w_{i,0} V^0`, summed over `k`
    /// in ascending order with a compensated accumulator per node.
    fn history_sum(&self, row: &WeightRow) -> Field2D {
        let i = self.level();
        let coeffs: Vec<f64> = (0..=i)
            .map(|k| if k == 0 { row.w(0) } else { row.w(k) - row.w(k - 1) })
            .collect();
        let stride = self.smesh.my() + 1;
        let mut out = Field2D::zeros(&self.smesh);
        out.values_mut()
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(m, chunk)| {
                let base = m * stride;
                let mut comp = vec![0.0; stride];
                for (c, field) in coeffs.iter().zip(&self.history) {
                    let src = &field.values()[base..base + stride];
                    for ((sum, err), v) in chunk.iter_mut().zip(comp.iter_mut()).zip(src) {
                        let term = c * v;
                        let t = *sum + term;
                        *err += if sum.abs() >= term.abs() {
                            (*sum - t) + term
                        } else {
                            (term - t) + *sum
                        };
                        *sum = t;
                    }
                }
                for (sum, err) in chunk.iter_mut().zip(comp) {
                    *sum += err;
                }
            });
        out
    }

    /// Right-hand side of the `x` sweep at interior nodes (zero on the boundary).
    pub fn assemble_step_rhs(&self) -> Result<Field2D> {
        let StepData { row, mu } = self.step_data()?;
        let mu = *mu;
        let i = self.level();
        let sigma = self.tmesh.sigma();
        let beta = self.problem.beta();
        let (l1, l2) = (self.problem.lambda1(), self.problem.lambda2());
        let t_sigma = self.tmesh.t_sigma(i)?;
        let current = &self.history[i];

        let mut combined = self.history_sum(row);
        combined.add_scaled(-beta * (1.0 - sigma), current);
        let source = Field2D::sample(&self.smesh, |x, y| self.problem.source(x, y, t_sigma));
        combined.add_scaled(1.0, &source);
        let mut rhs = combined.apply_hx().apply_hy();
        rhs.scale(1.0 / mu);

        let dxx = current.apply_dxx();
        let dyy = current.apply_dyy();
        rhs.add_scaled((1.0 - sigma) * l1 / mu, &dxx.apply_hy());
        rhs.add_scaled((1.0 - sigma) * l2 / mu, &dyy.apply_hx());
        rhs.add_scaled(l1 * l2 * sigma * sigma / (mu * mu), &dxx.apply_dyy());
        rhs.clear_boundary();
        Ok(rhs)
    }

    /// `(A_y g)_n` with `A_y = H_y - σλ₂/μ δ_y²` applied to the trace `g`.
    fn apply_ay_trace(&self, g: [f64; 3], mu: f64) -> f64 {
        let hy = self.smesh.hy();
        let r = self.tmesh.sigma() * self.problem.lambda2() / (mu * hy * hy);
        (g[0] + 10.0 * g[1] + g[2]) / 12.0 - r * (g[0] - 2.0 * g[1] + g[2])
    }

    /// `(V*_{0,n}, V*_{M_x,n})`: the `y` operator applied to the known
    /// boundary traces at `t_{i+1}`. Corner values are the boundary data.
    pub fn vstar_boundary(&self, n: usize) -> Result<(f64, f64)> {
        let mu = self.step_data()?.mu;
        let my = self.smesh.my();
        if n == 0 || n >= my {
            return Err(Error::IndexOutOfRange {
                name: "n",
                value: n,
                min: 1,
                max: my - 1,
            });
        }
        let t1 = self.tmesh.t(self.level() + 1);
        let trace = |x: f64| {
            [n - 1, n, n + 1].map(|j| self.problem.boundary(x, self.smesh.y(j), t1))
        };
        let left = self.apply_ay_trace(trace(0.0), mu);
        let right = self.apply_ay_trace(trace(self.smesh.x(self.smesh.mx())), mu);
        Ok((left, right))
    }

    /// Field holding `ψ̃(·, ·, t)` on the boundary and zero inside.
    fn boundary_field(&self, t: f64) -> Field2D {
        let mesh = self.smesh;
        Field2D::from_fn(&mesh, |m, n| {
            if mesh.is_boundary(m, n) {
                self.problem.boundary(mesh.x(m), mesh.y(n), t)
            } else {
                0.0
            }
        })
    }

    /// Advances from level `i` to `i + 1` by the two ADI sweeps.
    pub fn advance(&mut self) -> Result<()> {
        let mu = self.step_data()?.mu;
        let rhs = self.assemble_step_rhs()?;
        let mesh = self.smesh;
        let (mx, my) = (mesh.mx(), mesh.my());
        let sigma = self.tmesh.sigma();
        let t1 = self.tmesh.t(self.level() + 1);

        let rx = sigma * self.problem.lambda1() / (mu * mesh.hx() * mesh.hx());
        let ry = sigma * self.problem.lambda2() / (mu * mesh.hy() * mesh.hy());
        let (off_x, diag_x) = (1.0 / 12.0 - rx, 10.0 / 12.0 + 2.0 * rx);
        let (off_y, diag_y) = (1.0 / 12.0 - ry, 10.0 / 12.0 + 2.0 * ry);
        assert!(diag_x.abs() > 2.0 * off_x.abs() && diag_y.abs() > 2.0 * off_y.abs());

        // Step (i): one x-line per interior n.
        let x_lines: Vec<Vec<f64>> = (1..my)
            .into_par_iter()
            .map(|n| {
                let (left, right) = self.vstar_boundary(n)?;
                let mut b: Vec<f64> = (1..mx).map(|m| rhs[(m, n)]).collect();
                b[0] -= off_x * left;
                b[mx - 2] -= off_x * right;
                TridiagonalSystem::constant(off_x, diag_x, off_x, b).solve()
            })
            .collect::<Result<_>>()?;

        let mut next = self.boundary_field(t1);

        // Step (ii): one y-line per interior m.
        let y_lines: Vec<Vec<f64>> = (1..mx)
            .into_par_iter()
            .map(|m| {
                let mut b: Vec<f64> = (1..my).map(|n| x_lines[n - 1][m - 1]).collect();
                b[0] -= off_y * next[(m, 0)];
                b[my - 2] -= off_y * next[(m, my)];
                TridiagonalSystem::constant(off_y, diag_y, off_y, b).solve()
            })
            .collect::<Result<_>>()?;

        for (m, line) in (1..mx).zip(&y_lines) {
            for (n, v) in (1..my).zip(line) {
                next[(m, n)] = *v;
            }
        }
        self.history.push(next);
        self.prepare_level()
    }

    /// Advances until `i = N_t`.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_finished() {
            self.advance()?;
        }
        Ok(())
    }

    /// Right-hand side rebuilt term by term with dense one-dimensional
    /// operator matrices. Verification only.
    pub fn dense_step_rhs(&self) -> Result<Field2D> {
        let StepData { row, mu } = self.step_data()?;
        let mu = *mu;
        let i = self.level();
        let sigma = self.tmesh.sigma();
        let beta = self.problem.beta();
        let (l1, l2) = (self.problem.lambda1(), self.problem.lambda2());
        let ops = DenseOps::new(&self.smesh);
        let hh = |v: &DMatrix<f64>| &ops.hx * v * ops.hy.transpose();

        let mut total = DMatrix::zeros(ops.hx.nrows(), ops.hy.nrows());
        for k in 1..=i {
            total += hh(&as_matrix(&self.history[k])) * ((row.w(k) - row.w(k - 1)) / mu);
        }
        total += hh(&as_matrix(&self.history[0])) * (row.w(0) / mu);
        let vi = as_matrix(&self.history[i]);
        total -= hh(&vi) * (beta * (1.0 - sigma) / mu);
        total += (&ops.dxx * &vi * ops.hy.transpose()) * ((1.0 - sigma) * l1 / mu);
        total += (&ops.hx * &vi * ops.dyy.transpose()) * ((1.0 - sigma) * l2 / mu);
        let t_sigma = self.tmesh.t_sigma(i)?;
        let source = Field2D::sample(&self.smesh, |x, y| self.problem.source(x, y, t_sigma));
        total += hh(&as_matrix(&source)) / mu;
        total += (&ops.dxx * &vi * ops.dyy.transpose()) * (l1 * l2 * sigma * sigma / (mu * mu));

        let mut out = from_matrix(&self.smesh, &total);
        out.clear_boundary();
        Ok(out)
    }

    /// `V^{i+1}` from a dense solve of the factored system over the interior
    /// unknowns, with the boundary data eliminated into the right-hand side.
    /// Verification only.
    pub fn direct_solve_oracle(&self) -> Result<Field2D> {
        let mu = self.step_data()?.mu;
        let sigma = self.tmesh.sigma();
        let ops = DenseOps::new(&self.smesh);
        let ax = &ops.hx - &ops.dxx * (sigma * self.problem.lambda1() / mu);
        let ay = &ops.hy - &ops.dyy * (sigma * self.problem.lambda2() / mu);
        let rhs = self.dense_step_rhs()?;
        self.dense_kron_solve(&[(1.0, &ax, &ay)], &rhs)
    }

    /// Dense solve with `A_x = H_x`, `A_y = H_y`, i.e. the factored operator
    /// with both diffusion ratios set to zero. Verification only.
    pub fn direct_solve_compact_only(&self) -> Result<Field2D> {
        let ops = DenseOps::new(&self.smesh);
        let rhs = self.dense_step_rhs()?;
        self.dense_kron_solve(&[(1.0, &ops.hx, &ops.hy)], &rhs)
    }

    /// `V^{i+1}` of the compact scheme without the splitting term
    /// `λ₁λ₂σ²/μ² δ_x²δ_y²(V^{i+1} - V^i)`, by a dense solve. Used to
    /// separate the splitting error from the rest of the temporal error.
    /// Verification only.
    pub fn direct_solve_unsplit(&self) -> Result<Field2D> {
        let mu = self.step_data()?.mu;
        let sigma = self.tmesh.sigma();
        let (l1, l2) = (self.problem.lambda1(), self.problem.lambda2());
        let ops = DenseOps::new(&self.smesh);
        let mut rhs = self.dense_step_rhs()?;
        let splitting = self.current().apply_dxx().apply_dyy();
        rhs.add_scaled(-l1 * l2 * sigma * sigma / (mu * mu), &splitting);
        rhs.clear_boundary();
        self.dense_kron_solve(
            &[
                (1.0, &ops.hx, &ops.hy),
                (-sigma * l1 / mu, &ops.dxx, &ops.hy),
                (-sigma * l2 / mu, &ops.hx, &ops.dyy),
            ],
            &rhs,
        )
    }

    /// Advances by [`Self::direct_solve_unsplit`] instead of the ADI sweeps.
    pub fn advance_unsplit(&mut self) -> Result<()> {
        let next = self.direct_solve_unsplit()?;
        self.history.push(next);
        self.prepare_level()
    }

    /// Dense solve of `Σ c (A ⊗ B) V = RHS` on interior nodes for full-grid
    /// one-dimensional operators, boundary values taken from `ψ̃(t_{i+1})`.
    fn dense_kron_solve(
        &self,
        terms: &[(f64, &DMatrix<f64>, &DMatrix<f64>)],
        rhs: &Field2D,
    ) -> Result<Field2D> {
        let unknowns = self.smesh.interior_count();
        if unknowns > ORACLE_MAX_UNKNOWNS {
            return Err(Error::OracleTooLarge {
                max: ORACLE_MAX_UNKNOWNS,
                got: unknowns,
            });
        }
        let (mx, my) = (self.smesh.mx(), self.smesh.my());
        let t1 = self.tmesh.t(self.level() + 1);
        let mut next = self.boundary_field(t1);
        let known = as_matrix(&next);
        let mut lifted = DMatrix::zeros(mx + 1, my + 1);
        for (c, a, b) in terms {
            lifted += (*a * &known * b.transpose()) * *c;
        }

        let ni = my - 1;
        let idx = |m: usize, n: usize| (m - 1) * ni + (n - 1);
        let mut k = DMatrix::zeros(unknowns, unknowns);
        let mut rhs_vec = DVector::zeros(unknowns);
        for m in 1..mx {
            for n in 1..my {
                let r = idx(m, n);
                rhs_vec[r] = rhs[(m, n)] - lifted[(m, n)];
                for mp in 1..mx {
                    for np in 1..my {
                        k[(r, idx(mp, np))] = terms
                            .iter()
                            .map(|(c, a, b)| c * a[(m, mp)] * b[(n, np)])
                            .sum::<f64>();
                    }
                }
            }
        }
        let x = k.lu().solve(&rhs_vec).ok_or(Error::SingularOracle)?;
        for m in 1..mx {
            for n in 1..my {
                next[(m, n)] = x[idx(m, n)];
            }
        }
        Ok(next)
    }
}

/// Full-grid matrices of `H` and `δ²` along each axis.
struct DenseOps {
    hx: DMatrix<f64>,
    hy: DMatrix<f64>,
    dxx: DMatrix<f64>,
    dyy: DMatrix<f64>,
}

impl DenseOps {
    fn new(mesh: &SpatialMesh) -> Self {
        let (hx, dxx) = Self::axis(mesh.mx(), mesh.hx());
        let (hy, dyy) = Self::axis(mesh.my(), mesh.hy());
        Self { hx, hy, dxx, dyy }
    }

    fn axis(m: usize, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut compact = DMatrix::zeros(m + 1, m + 1);
        let mut second = DMatrix::zeros(m + 1, m + 1);
        compact[(0, 0)] = 1.0;
        compact[(m, m)] = 1.0;
        for j in 1..m {
            compact[(j, j - 1)] = 1.0 / 12.0;
            compact[(j, j)] = 10.0 / 12.0;
            compact[(j, j + 1)] = 1.0 / 12.0;
            second[(j, j - 1)] = 1.0 / (h * h);
            second[(j, j)] = -2.0 / (h * h);
            second[(j, j + 1)] = 1.0 / (h * h);
        }
        (compact, second)
    }
}

fn as_matrix(f: &Field2D) -> DMatrix<f64> {
    let (nx, ny) = f.shape();
    DMatrix::from_row_slice(nx, ny, f.values())
}

fn from_matrix(mesh: &SpatialMesh, a: &DMatrix<f64>) -> Field2D {
    Field2D::from_fn(mesh, |m, n| a[(m, n)])
}

/// Which time levels [`solve`] returns.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LevelSelection {
    #[default]
    Final,
    All,
    Indices(Vec<usize>),
}

impl LevelSelection {
    fn contains(&self, level: usize, nt: usize) -> bool {
        match self {
            Self::Final => level == nt,
            Self::All => true,
            Self::Indices(levels) => levels.contains(&level),
        }
    }
}

/// Solution `u` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolution {
    pub level: usize,
    pub time: f64,
    pub u: Field2D,
}

/// Transforms, marches to `T_f` and maps the requested levels back to `u`.
/// Boundary nodes of each returned field carry the prescribed data exactly.
pub fn solve(
    spec: &ProblemSpec,
    tmesh: &TemporalMesh,
    smesh: &SpatialMesh,
    levels: &LevelSelection,
) -> Result<Vec<LevelSolution>> {
    if let LevelSelection::Indices(idx) = levels {
        if let Some(&bad) = idx.iter().find(|&&l| l > tmesh.nt()) {
            return Err(Error::IndexOutOfRange {
                name: "level",
                value: bad,
                min: 0,
                max: tmesh.nt(),
            });
        }
    }
    let problem = spec.transform()?;
    let mut state = SolverState::initialize(&problem, tmesh, smesh)?;
    let mut out = Vec::new();
    loop {
        let level = state.level();
        if levels.contains(level, tmesh.nt()) {
            out.push(to_physical(&problem, state.current(), level, tmesh.t(level)));
        }
        if state.is_finished() {
            break;
        }
        state.advance()?;
    }
    Ok(out)
}

fn to_physical(problem: &TransformedProblem, v: &Field2D, level: usize, time: f64) -> LevelSolution {
    let spec = problem.spec();
    let mut u = problem.inverse_transform(v);
    let mesh = *v.mesh();
    for m in 0..=mesh.mx() {
        for n in 0..=mesh.my() {
            if mesh.is_boundary(m, n) {
                let (x, y) = (mesh.x(m), mesh.y(n));
                u[(m, n)] = if level == 0 {
                    (spec.initial)(x, y)
                } else {
                    (spec.boundary)(x, y, time)
                };
            }
        }
    }
    LevelSolution { level, time, u }
}
