//! Temporal and spatial meshes.
//!
//! The temporal mesh is power-graded on `[0, T]`, `t_i = T (i/N̂)^θ`, and
//! uniform on `[T, T_f]`. Every local ratio `η_i = τ_{i+1}/τ_i` must lie in
//! `[3/4, 62]`, which is the range on which the L2-1σ coefficient
//! inequalities hold.

use crate::{Error, Result};

/// Admissible range of the local ratio `τ_{i+1}/τ_i`.
pub const MIN_RATIO: f64 = 0.75;
pub const MAX_RATIO: f64 = 62.0;

/// Parameters of the fitted (graded + uniform) temporal mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedMeshParams {
    /// Total number of intervals `N_t`.
    pub nt: usize,
    /// Number of graded intervals `N̂_t`.
    pub n_graded: usize,
    /// Grading exponent `θ ≥ 1`.
    pub theta: f64,
    /// End `T` of the graded section.
    pub split_time: f64,
    pub final_time: f64,
    pub alpha: f64,
    /// Lower bound `c` in `N̂_t ≥ c N_t`.
    pub min_graded_fraction: f64,
}

impl FittedMeshParams {
    /// Pure graded mesh: `T = T_f`, `N̂_t = N_t`.
    pub fn graded(nt: usize, theta: f64, final_time: f64, alpha: f64) -> Self {
        Self {
            nt,
            n_graded: nt,
            theta,
            split_time: final_time,
            final_time,
            alpha,
            min_graded_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    points: Vec<f64>,
    n_graded: usize,
    theta: f64,
    split_time: f64,
    alpha: f64,
    sigma: f64,
}

impl TemporalMesh {
    /// Builds the fitted mesh and checks the ratio hypothesis.
    pub fn fitted(p: &FittedMeshParams) -> Result<Self> {
        check_alpha(p.alpha)?;
        if p.nt == 0 || p.n_graded == 0 {
            return Err(Error::MeshParameters("N_t and N̂_t must be at least 1".into()));
        }
        if p.n_graded > p.nt {
            return Err(Error::MeshParameters(format!(
                "N̂_t = {} exceeds N_t = {}",
                p.n_graded, p.nt
            )));
        }
        if !(p.theta >= 1.0) || !p.theta.is_finite() {
            return Err(Error::MeshParameters(format!(
                "grading exponent theta must be >= 1, got {}",
                p.theta
            )));
        }
        if !(p.final_time > 0.0) || !p.final_time.is_finite() {
            return Err(Error::MeshParameters(format!(
                "final time must be positive, got {}",
                p.final_time
            )));
        }
        if !(p.split_time > 0.0 && p.split_time <= p.final_time) {
            return Err(Error::MeshParameters(format!(
                "split time T = {} must lie in (0, T_f = {}]",
                p.split_time, p.final_time
            )));
        }
        if !(p.min_graded_fraction > 0.0 && p.min_graded_fraction < 1.0) {
            return Err(Error::MeshParameters(format!(
                "graded fraction c must lie in (0,1), got {}",
                p.min_graded_fraction
            )));
        }
        if (p.n_graded as f64) < p.min_graded_fraction * p.nt as f64 {
            return Err(Error::MeshParameters(format!(
                "N̂_t = {} is below c N_t = {} * {}",
                p.n_graded, p.min_graded_fraction, p.nt
            )));
        }
        let has_tail = p.split_time < p.final_time;
        if has_tail && p.n_graded == p.nt {
            return Err(Error::MeshParameters(
                "T < T_f requires N̂_t < N_t intervals".into(),
            ));
        }
        if !has_tail && p.n_graded < p.nt {
            return Err(Error::MeshParameters(
                "N̂_t < N_t requires a split time T < T_f".into(),
            ));
        }

        let nh = p.n_graded as f64;
        let mut points = Vec::with_capacity(p.nt + 1);
        points.extend((0..=p.n_graded).map(|i| p.split_time * (i as f64 / nh).powf(p.theta)));
        let tail = p.nt - p.n_graded;
        if tail > 0 {
            let width = (p.final_time - p.split_time) / tail as f64;
            points.extend((1..tail).map(|j| p.split_time + j as f64 * width));
            points.push(p.final_time);
        }

        let mesh = Self {
            points,
            n_graded: p.n_graded,
            theta: p.theta,
            split_time: p.split_time,
            alpha: p.alpha,
            sigma: 1.0 - p.alpha / 2.0,
        };
        mesh.check_ratios()?;
        Ok(mesh)
    }

    /// Mesh from explicit points (`t_0 = 0`, strictly increasing). The whole
    /// mesh counts as the graded section with `θ = 1`.
    pub fn from_points(points: Vec<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if points.len() < 2 {
            return Err(Error::MeshParameters("need at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::MeshParameters(format!("t_0 must be 0, got {}", points[0])));
        }
        if let Some(i) = points.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::MeshParameters(format!(
                "points must be strictly increasing and finite (index {})",
                i + 1
            )));
        }
        let last = *points.last().unwrap();
        let mesh = Self {
            n_graded: points.len() - 1,
            points,
            theta: 1.0,
            split_time: last,
            alpha,
            sigma: 1.0 - alpha / 2.0,
        };
        mesh.check_ratios()?;
        Ok(mesh)
    }

    fn check_ratios(&self) -> Result<()> {
        for i in 1..self.nt() {
            let ratio = self.ratio(i);
            if !(MIN_RATIO..=MAX_RATIO).contains(&ratio) {
                return Err(Error::MeshRatio { index: i, ratio });
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `t_i`.
    pub fn t(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// Number of intervals `N_t`.
    pub fn nt(&self) -> usize {
        self.points.len() - 1
    }

    pub fn n_graded(&self) -> usize {
        self.n_graded
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn split_time(&self) -> f64 {
        self.split_time
    }

    pub fn final_time(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `σ = 1 - α/2`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `τ_i = t_i - t_{i-1}` for `1 ≤ i ≤ N_t`.
    pub fn tau(&self, i: usize) -> f64 {
        self.points[i] - self.points[i - 1]
    }

    pub fn max_tau(&self) -> f64 {
        (1..=self.nt()).map(|i| self.tau(i)).fold(0.0, f64::max)
    }

    /// `η_i = τ_{i+1}/τ_i` for `1 ≤ i ≤ N_t - 1`.
    pub fn ratio(&self, i: usize) -> f64 {
        self.tau(i + 1) / self.tau(i)
    }

    /// All local ratios `η_1, ..., η_{N_t-1}`.
    pub fn local_ratios(&self) -> Vec<f64> {
        (1..self.nt()).map(|i| self.ratio(i)).collect()
    }

    /// `t_{i+σ} = t_i + σ τ_{i+1}` for `0 ≤ i ≤ N_t - 1`.
    pub fn t_sigma(&self, i: usize) -> Result<f64> {
        if i >= self.nt() {
            return Err(Error::IndexOutOfRange {
                name: "i",
                value: i,
                min: 0,
                max: self.nt() - 1,
            });
        }
        Ok(self.points[i] + self.sigma * self.tau(i + 1))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Uniform mesh of the square `[0, L]²` with `M_x × M_y` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMesh {
    mx: usize,
    my: usize,
    length: f64,
}

impl SpatialMesh {
    pub fn new(mx: usize, my: usize, length: f64) -> Result<Self> {
        if mx < 2 || my < 2 {
            return Err(Error::MeshParameters(format!(
                "M_x and M_y must be at least 2, got {mx} and {my}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::MeshParameters(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self { mx, my, length })
    }

    pub fn mx(&self) -> usize {
        self.mx
    }

    pub fn my(&self) -> usize {
        self.my
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hx(&self) -> f64 {
        self.length / self.mx as f64
    }

    pub fn hy(&self) -> f64 {
        self.length / self.my as f64
    }

    /// `x_m = m h_x`.
    pub fn x(&self, m: usize) -> f64 {
        m as f64 * self.hx()
    }

    /// `y_n = n h_y`.
    pub fn y(&self, n: usize) -> f64 {
        n as f64 * self.hy()
    }

    /// Node counts `(M_x + 1, M_y + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.mx + 1, self.my + 1)
    }

    pub fn is_boundary(&self, m: usize, n: usize) -> bool {
        m == 0 || n == 0 || m == self.mx || n == self.my
    }

    pub fn interior_count(&self) -> usize {
        (self.mx - 1) * (self.my - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn graded(nt: usize, theta: f64) -> TemporalMesh {
        TemporalMesh::fitted(&FittedMeshParams::graded(nt, theta, 1.0, 0.5)).unwrap()
    }

    #[test]
    fn uniform_degenerate_case() {
        assert_eq!(graded(4, 1.0).points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn quadratic_grading() {
        let mesh = graded(4, 2.0);
        assert_eq!(mesh.points(), &[0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
        assert_eq!(mesh.ratio(1), 3.0);
    }

    #[test]
    fn ratios_uniform_and_closed_forms() {
        assert!(graded(10, 1.0).local_ratios().iter().all(|&r| (r - 1.0).abs() < 1e-12));

        let mesh = graded(20, 2.0);
        for (idx, &eta) in mesh.local_ratios().iter().enumerate() {
            let i = (idx + 1) as f64;
            assert_relative_eq!(eta, (2.0 * i + 1.0) / (2.0 * i - 1.0), max_relative = 1e-12);
        }
        assert_relative_eq!(graded(8, 3.0).ratio(1), 7.0, max_relative = 1e-12);
    }

    #[test]
    fn t_sigma_values() {
        let mesh = graded(4, 1.0);
        assert_eq!(mesh.sigma(), 0.75);
        assert_relative_eq!(mesh.t_sigma(0).unwrap(), 0.1875);
        let mesh = graded(4, 2.0);
        assert_relative_eq!(mesh.t_sigma(1).unwrap(), 0.203125, max_relative = 1e-15);
        assert!(matches!(mesh.t_sigma(4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn sigma_one_limit_reaches_next_point() {
        // σ = 1 - α/2 tends to 1 as α → 0.
        let mesh =
            TemporalMesh::fitted(&FittedMeshParams::graded(4, 2.0, 1.0, 1e-12)).unwrap();
        for i in 0..4 {
            assert_relative_eq!(mesh.t_sigma(i).unwrap(), mesh.t(i + 1), max_relative = 1e-11);
        }
    }

    #[test]
    fn split_mesh_has_uniform_tail() {
        let p = FittedMeshParams {
            nt: 12,
            n_graded: 8,
            theta: 1.5,
            split_time: 0.5,
            final_time: 1.0,
            alpha: 0.4,
            min_graded_fraction: 0.5,
        };
        let mesh = TemporalMesh::fitted(&p).unwrap();
        assert_eq!(mesh.nt(), 12);
        assert_eq!(mesh.t(0), 0.0);
        assert_eq!(mesh.t(8), 0.5);
        assert_eq!(mesh.t(12), 1.0);
        for i in 9..=12 {
            assert_relative_eq!(mesh.tau(i), 0.125, max_relative = 1e-14);
        }
        for i in 0..=8 {
            assert_relative_eq!(mesh.t(i), 0.5 * (i as f64 / 8.0).powf(1.5), max_relative = 1e-15);
        }
    }

    #[test]
    fn inconsistent_parameters_are_rejected() {
        let base = FittedMeshParams::graded(16, 2.0, 1.0, 0.5);
        let bad = [
            FittedMeshParams { n_graded: 32, ..base },
            FittedMeshParams { theta: 0.5, ..base },
            FittedMeshParams { split_time: 1.5, ..base },
            FittedMeshParams { split_time: 0.5, ..base },
            FittedMeshParams { n_graded: 4, split_time: 0.5, ..base },
            FittedMeshParams { n_graded: 12, ..base },
            FittedMeshParams { nt: 0, n_graded: 0, ..base },
        ];
        for p in bad {
            assert!(
                matches!(TemporalMesh::fitted(&p), Err(Error::MeshParameters(_))),
                "{p:?}"
            );
        }
    }

    #[test]
    fn transition_ratio_violation_reports_index() {
        // Last graded step is tiny compared with the uniform tail.
        let p = FittedMeshParams {
            nt: 20,
            n_graded: 19,
            theta: 1.0,
            split_time: 0.01,
            final_time: 1.0,
            alpha: 0.5,
            min_graded_fraction: 0.5,
        };
        assert!(matches!(
            TemporalMesh::fitted(&p),
            Err(Error::MeshRatio { index: 19, .. })
        ));
        // θ = 7 makes η_1 = 2^7 - 1 = 127.
        let err = TemporalMesh::fitted(&FittedMeshParams::graded(8, 7.0, 1.0, 0.5)).unwrap_err();
        assert!(matches!(err, Error::MeshRatio { index: 1, .. }));
    }

    #[test]
    fn graded_step_bound_is_uniform_in_nt() {
        // τ_{i+1} ≤ C T_f N^{-θ} i^{θ-1} with C independent of N.
        for theta in [1.0, 2.0, 2.75, 4.0] {
            let worst: Vec<f64> = [16, 32, 64, 128, 256, 512]
                .iter()
                .map(|&nt| {
                    let mesh = graded(nt, theta);
                    let scale = (nt as f64).powf(-theta);
                    (1..nt)
                        .map(|i| mesh.tau(i + 1) / (scale * (i as f64).powf(theta - 1.0)))
                        .fold(0.0, f64::max)
                })
                .collect();
            let bound = theta * 2f64.powf(theta - 1.0);
            assert!(worst.iter().all(|&c| c <= bound * (1.0 + 1e-12)), "{theta}: {worst:?}");
        }
    }

    #[test]
    fn doubling_nt_at_most_halves_max_step() {
        for theta in [1.0, 2.0, 4.0] {
            for nt in [8, 16, 32, 64] {
                let coarse = graded(nt, theta).max_tau();
                let fine = graded(2 * nt, theta).max_tau();
                assert!(fine >= 0.5 * coarse * (1.0 - 1e-12) && fine < coarse);
            }
        }
    }

    #[test]
    fn spatial_mesh() {
        let mesh = SpatialMesh::new(8, 4, 2.0).unwrap();
        assert_eq!(mesh.hx(), 0.25);
        assert_eq!(mesh.hy(), 0.5);
        assert_eq!(mesh.x(8), 2.0);
        assert_eq!(mesh.y(4), 2.0);
        assert_eq!(mesh.interior_count(), 21);
        assert!(SpatialMesh::new(1, 4, 1.0).is_err());
        assert!(SpatialMesh::new(4, 4, 0.0).is_err());
    }
}
