//! Numerical sweeps of the weight inequalities, the `ϱ` bounds, the
//! telescoping identity and the stability bound. Each sweep is seeded and
//! returns a [`PropertyReport`] instead of panicking, so callers decide what
//! a failure means.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adi::SolverState;
use crate::caputo::{discrete_caputo, gamma, rho, weight_row};
use crate::mesh::{FittedMeshParams, SpatialMesh, TemporalMesh, MAX_RATIO, MIN_RATIO};
use crate::problem::ProblemSpec;
use crate::spatial::Field2D;
use crate::Result;

/// Lower and upper `ϱ` bounds claimed for ratios in `[3/4, 62]`.
pub const RHO_CLAIMED_BOUNDS: (f64, f64) = (1.659_754_2, 13.215_168);

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    /// Number of inequalities (or comparisons) evaluated.
    pub checked: usize,
    pub failures: usize,
    /// Smallest margin seen; positive means every check held.
    pub worst_margin: f64,
    /// Free-form extra information (observed ranges and so on).
    pub detail: String,
}

impl PropertyReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            detail: String::new(),
        }
    }

    fn record(&mut self, margin: f64) {
        self.checked += 1;
        if !(margin > 0.0) {
            self.failures += 1;
        }
        self.worst_margin = self.worst_margin.min(margin);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: checked={} failures={} worst_margin={:.6e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.failures,
            self.worst_margin
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// `α ∈ {0.1, 0.2, ..., 0.9}`.
pub fn alpha_grid() -> impl Iterator<Item = f64> {
    (1..=9).map(|j| j as f64 / 10.0)
}

/// Random mesh whose local ratios all lie in `[3/4, 62]`. Alternates between
/// fitted graded meshes with random `θ` and meshes built from random ratios.
pub fn random_admissible_mesh(rng: &mut ChaCha8Rng, alpha: f64) -> TemporalMesh {
    loop {
        let nt = rng.random_range(2..=24);
        let mesh = if rng.random_bool(0.5) {
            let theta = rng.random_range(1.0..8.0);
            let tf = rng.random_range(0.2..5.0);
            TemporalMesh::fitted(&FittedMeshParams::graded(nt, theta, tf, alpha))
        } else {
            let (lo, hi) = (MIN_RATIO.ln(), MAX_RATIO.ln());
            let mut tau = 1.0;
            let mut points = vec![0.0, 1.0];
            for _ in 1..nt {
                // Mostly moderate ratios, occasionally extreme ones.
                let eta = if rng.random_bool(0.7) {
                    rng.random_range(MIN_RATIO..2.0)
                } else {
                    rng.random_range(lo..hi).exp().clamp(MIN_RATIO, MAX_RATIO)
                };
                tau *= eta;
                points.push(points.last().unwrap() + tau);
            }
            let last = *points.last().unwrap();
            let scaled: Vec<f64> = points.iter().map(|p| p / last).collect();
            TemporalMesh::from_points(scaled, alpha)
        };
        if let Ok(mesh) = mesh {
            return mesh;
        }
    }
}

/// Relative margin `(a - b) / max(|a|, |b|)` of `a > b`.
fn margin(a: f64, b: f64) -> f64 {
    (a - b) / a.abs().max(b.abs())
}

/// Reports for the five weight inequalities over `meshes` random admissible
/// meshes. Items (iv) and (v) are checked only where their ratio conditions
/// hold.
pub fn weight_inequality_sweep(meshes: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = [
        "weights (i): w_{i,0} > t_{i+sigma}^{-alpha}/Gamma(1-alpha)",
        "weights (ii): (2sigma-1)w_{1,1} > sigma w_{1,0}",
        "weights (iii): w_{i,1} > w_{i,0}",
        "weights (iv): w_{i,k-1} < w_{i,k} under ratio condition",
        "weights (v): (2sigma-1)w_{i,i} > sigma w_{i,i-1} under ratio condition",
    ]
    .map(PropertyReport::new);
    let alphas: Vec<f64> = alpha_grid().collect();

    for j in 0..meshes {
        let alpha = alphas[j % alphas.len()];
        let mesh = random_admissible_mesh(&mut rng, alpha);
        let sigma = mesh.sigma();
        let g1 = gamma(1.0 - alpha);
        // Condition of (iv) at k: η_{k-1}²(η_{k-1}+1) ≥ η_k/(η_k+1).
        let cond_iv = |k: usize| {
            let (a, b) = (mesh.ratio(k - 1), mesh.ratio(k));
            a * a * (a + 1.0) >= b / (b + 1.0)
        };
        for i in 0..mesh.nt() {
            let row = weight_row(&mesh, i)?;
            let bound = mesh.t_sigma(i)?.powf(-alpha) / g1;
            reports[0].record(margin(row.w(0), bound));
            if i == 0 {
                continue;
            }
            if i == 1 {
                reports[1].record(margin((2.0 * sigma - 1.0) * row.w(1), sigma * row.w(0)));
            }
            reports[2].record(margin(row.w(1), row.w(0)));
            if (2..=i).all(cond_iv) {
                for k in 2..=i {
                    reports[3].record(margin(row.w(k), row.w(k - 1)));
                }
            }
            if i >= 2 {
                let (a, b) = (mesh.ratio(i - 1), mesh.ratio(i));
                if a * a * (2.0 - 1.0 / sigma + b * (b + 2.0)) >= b * (b + 1.0) / (a + 1.0) {
                    reports[4].record(margin((2.0 * sigma - 1.0) * row.w(i), sigma * row.w(i - 1)));
                }
            }
        }
    }
    Ok(reports.into())
}

/// Samples `ϱ` on two-interval meshes `{0, 1, 1 + η}` for random `α ∈ (0,1)`
/// and `η ∈ [3/4, 62]` and checks `lower ≤ ϱ ≤ upper`.
pub fn rho_sweep(samples: usize, seed: u64, lower: f64, upper: f64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport::new(&format!("rho within [{lower}, {upper}]"));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..samples {
        let alpha = rng.random_range(0.01..0.99);
        // Include both ends of the ratio range.
        let eta = match j {
            0 => MIN_RATIO,
            1 => MAX_RATIO,
            _ => rng.random_range(MIN_RATIO..=MAX_RATIO),
        };
        let mesh = TemporalMesh::from_points(vec![0.0, 1.0, 1.0 + eta], alpha)?;
        let value = rho(&mesh, 1)?;
        lo = lo.min(value);
        hi = hi.max(value);
        report.record((value - lower).min(upper - value));
    }
    report.detail = format!("observed rho range [{lo:.7}, {hi:.7}]");
    Ok(report)
}

/// Checks that `ϱ` stays inside `[1/2, 2]`, i.e. that `w_{i,i} τ_{i+1}^α` is
/// bounded above and below by positive constants on admissible meshes.
pub fn rho_positive_bound_sweep(samples: usize, seed: u64) -> Result<PropertyReport> {
    let mut report = rho_sweep(samples, seed, 0.5, 2.0)?;
    report.name = "rho bounded by positive constants [0.5, 2]".into();
    Ok(report)
}

/// Telescoping on random admissible meshes: the discrete Caputo derivative of
/// a constant vanishes to `1e-13 w_{i,i} |c|` and that of `g(t) = t` equals
/// `t_{i+σ}^{1-α}/Γ(2-α)` to `1e-11` relative.
pub fn telescoping_sweep(meshes: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constant = PropertyReport::new("telescoping: constants have zero discrete derivative (1e-13)");
    let mut linear = PropertyReport::new("telescoping: g(t) = t is differentiated exactly (1e-11)");
    let alphas: Vec<f64> = alpha_grid().collect();
    for j in 0..meshes {
        let alpha = alphas[j % alphas.len()];
        let mesh = random_admissible_mesh(&mut rng, alpha);
        let c = rng.random_range(-10.0..10.0);
        let g2 = gamma(2.0 - alpha);
        for i in 0..mesh.nt() {
            let row = weight_row(&mesh, i)?;
            let flat = vec![c; i + 2];
            let value = discrete_caputo(&flat, &row)?;
            constant.record(1.0 - value.abs() / (1e-13 * row.last() * c.abs()));

            let ramp: Vec<f64> = mesh.points()[..i + 2].to_vec();
            let exact = mesh.t_sigma(i)?.powf(1.0 - alpha) / g2;
            let rel = (discrete_caputo(&ramp, &row)? - exact).abs() / exact;
            linear.record(1.0 - rel / 1e-11);
        }
    }
    Ok(vec![constant, linear])
}

/// Discrete L2 norm over interior nodes with `h_x h_y` weights.
pub fn discrete_l2(field: &Field2D) -> f64 {
    let mesh = field.mesh();
    let mut sum = 0.0;
    for m in 1..mesh.mx() {
        for n in 1..mesh.my() {
            sum += field[(m, n)] * field[(m, n)];
        }
    }
    (sum * mesh.hx() * mesh.hy()).sqrt()
}

/// Perturbs the initial data of a random problem by `perturbations` random
/// boundary-zero fields `ζ⁰` and checks
/// `‖V_perturbed^i - V^i‖₂ ≤ ‖ζ⁰‖₂ (1 + 1e-13)` at every level.
pub fn stability_sweep(perturbations: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport::new("stability: ||zeta^i|| <= ||zeta^0||");
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..perturbations {
        let alpha = rng.random_range(0.1..0.9);
        let l1 = rng.random_range(0.1..3.0);
        let l2 = rng.random_range(0.1..3.0);
        let mu1 = rng.random_range(-2.0..2.0);
        let mu2 = rng.random_range(-2.0..2.0);
        let beta = rng.random_range(0.0..3.0);
        let gamma_c = mu1 * mu1 / (4.0 * l1) + mu2 * mu2 / (4.0 * l2) - beta;
        let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..3.0));
        let spec = ProblemSpec::homogeneous(l1, l2, mu1, mu2, gamma_c, alpha, 1.0, 1.0)
            .with_source(move |x, y, t| a * (b * x * y).sin() + t)
            .with_initial(move |x, y| (b * x).cos() * y)
            .with_boundary(move |x, y, t| (b * x).cos() * y + a * t);
        let problem = spec.transform()?;
        let nt = rng.random_range(4..=16);
        let theta = rng.random_range(1.0..5.0);
        let tmesh = TemporalMesh::fitted(&FittedMeshParams::graded(nt, theta, 1.0, alpha))?;
        let smesh = SpatialMesh::new(rng.random_range(3..=12), rng.random_range(3..=12), 1.0)?;

        let mut base = SolverState::initialize(&problem, &tmesh, &smesh)?;
        let mut zeta = Field2D::from_fn(&smesh, |_, _| rng.random_range(-1.0..1.0));
        zeta.clear_boundary();
        let zeta_norm = discrete_l2(&zeta);
        let mut v0 = base.current().clone();
        v0.add_scaled(1.0, &zeta);
        let mut perturbed = SolverState::initialize_with(&problem, &tmesh, v0)?;
        while !base.is_finished() {
            base.advance()?;
            perturbed.advance()?;
            let mut diff = perturbed.current().clone();
            diff.add_scaled(-1.0, base.current());
            let ratio = discrete_l2(&diff) / zeta_norm;
            worst_ratio = worst_ratio.max(ratio);
            report.record(1.0 + 1e-13 - ratio);
        }
    }
    report.detail = format!("max ||zeta^i||/||zeta^0|| = {worst_ratio:.6}");
    Ok(report)
}
