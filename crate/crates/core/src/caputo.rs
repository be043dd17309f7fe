//! L2-1σ approximation of the Caputo derivative on a nonuniform mesh.
//!
//! At `t_{i+σ} = t_i + σ τ_{i+1}` the derivative of `g` is approximated by
//!
//! ```text
//! w_{i,i} g(t_{i+1}) - Σ_{k=1}^{i} (w_{i,k} - w_{i,k-1}) g(t_k) - w_{i,0} g(t_0)
//! ```
//!
//! where the weights come from piecewise-quadratic interpolation on the
//! history intervals and linear interpolation on `[t_i, t_{i+σ}]`:
//!
//! ```text
//! w_{i,0} = (r_{i,0} - s_{i,0}) / τ_1
//! w_{i,k} = (r_{i,k} + s_{i,k-1} - s_{i,k}) / τ_{k+1},   1 ≤ k ≤ i-1
//! w_{i,i} = (r_{i,i} + s_{i,i-1}) / τ_{i+1}
//! ```
//!
//! `r` and `s` are kernel integrals evaluated in closed form. Distant history
//! intervals are the delicate case: there `r` is a difference of nearly equal
//! powers and `s` is a second-order small quantity, so both get dedicated
//! evaluations that avoid cancellation.

use crate::mesh::TemporalMesh;
use crate::{Error, Result};

/// `Γ(x)` (Lanczos approximation).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Closed-form kernel integrals for one history interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPieces {
    pub r: f64,
    pub s: f64,
}

/// Weights `w_{i,0}, ..., w_{i,i}` of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    level: usize,
    weights: Vec<f64>,
    sigma: f64,
    alpha: f64,
}

impl WeightRow {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn w(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// `w_{i,i}`.
    pub fn last(&self) -> f64 {
        self.weights[self.level]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_level(mesh: &TemporalMesh, i: usize) -> Result<()> {
    if i >= mesh.nt() {
        return Err(Error::IndexOutOfRange {
            name: "i",
            value: i,
            min: 0,
            max: mesh.nt() - 1,
        });
    }
    Ok(())
}

/// `(b + d)^p - b^p` for `b ≥ 0`, `d > 0`, without cancellation when `d ≪ b`.
fn power_gap(b: f64, d: f64, p: f64) -> f64 {
    if b == 0.0 {
        return d.powf(p);
    }
    b.powf(p) * (p * (d / b).ln_1p()).exp_m1()
}

/// Shared per-level quantities.
struct Level {
    alpha: f64,
    a: f64,
    gamma_1ma: f64,
    gamma_2ma: f64,
}

impl Level {
    fn new(mesh: &TemporalMesh, i: usize) -> Self {
        let alpha = mesh.alpha();
        Self {
            alpha,
            a: mesh.points()[i] + mesh.sigma() * mesh.tau(i + 1),
            gamma_1ma: gamma(1.0 - alpha),
            gamma_2ma: gamma(2.0 - alpha),
        }
    }

    fn r_last(&self, mesh: &TemporalMesh, i: usize) -> f64 {
        let sigma = mesh.sigma();
        (sigma * mesh.tau(i + 1)).powf(1.0 - self.alpha) / self.gamma_2ma
    }

    fn r_hist(&self, mesh: &TemporalMesh, k: usize) -> f64 {
        let zb = self.a - mesh.t(k + 1);
        power_gap(zb, mesh.tau(k + 1), 1.0 - self.alpha) / self.gamma_2ma
    }

    fn s_hist(&self, mesh: &TemporalMesh, k: usize) -> f64 {
        let alpha = self.alpha;
        let tau = mesh.tau(k + 1);
        let half = 0.5 * tau;
        let mid = 0.5 * (mesh.t(k) + mesh.t(k + 1));
        let d = self.a - mid;
        let ratio = half / d;
        // J = ∫_{-h}^{h} (d - u)^{-α} u du
        let j = if ratio <= 0.5 {
            // (1 - x)^{-α} = Σ (α)_n/n! x^n; only odd n survive the symmetric integral.
            let rho2 = ratio * ratio;
            let mut coeff = alpha; // (α)_1 / 1!
            let mut power = ratio;
            let mut sum = 0.0;
            let mut n = 1usize;
            loop {
                let term = coeff * power / (n + 2) as f64;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() || n > 400 {
                    break;
                }
                // advance two orders: (α)_{n+2}/(n+2)! = (α)_n/n! (α+n)(α+n+1)/((n+1)(n+2))
                let nf = n as f64;
                coeff *= (alpha + nf) * (alpha + nf + 1.0) / ((nf + 1.0) * (nf + 2.0));
                power *= rho2;
                n += 2;
            }
            2.0 * d.powf(-alpha) * half * half * sum
        } else {
            let zb = self.a - mesh.t(k + 1);
            let za = zb + tau;
            d * power_gap(zb, tau, 1.0 - alpha) / (1.0 - alpha)
                - (za.powf(2.0 - alpha) - zb.powf(2.0 - alpha)) / (2.0 - alpha)
        };
        let span = mesh.t(k + 2) - mesh.t(k);
        2.0 / span * j / self.gamma_1ma
    }
}

/// `r_{i,k}` for `0 ≤ k ≤ i ≤ N_t - 1`.
pub fn r_coeff(mesh: &TemporalMesh, i: usize, k: usize) -> Result<f64> {
    check_level(mesh, i)?;
    if k > i {
        return Err(Error::IndexOutOfRange { name: "k", value: k, min: 0, max: i });
    }
    let level = Level::new(mesh, i);
    Ok(if k == i { level.r_last(mesh, i) } else { level.r_hist(mesh, k) })
}

/// `s_{i,k}` for `i ≥ 1`, `0 ≤ k ≤ i - 1`.
pub fn s_coeff(mesh: &TemporalMesh, i: usize, k: usize) -> Result<f64> {
    check_level(mesh, i)?;
    if i == 0 || k >= i {
        return Err(Error::IndexOutOfRange {
            name: "k",
            value: k,
            min: 0,
            max: i.saturating_sub(1),
        });
    }
    Ok(Level::new(mesh, i).s_hist(mesh, k))
}

/// `(r_{i,k}, s_{i,k})` for a history interval `k < i`.
pub fn kernel_pieces(mesh: &TemporalMesh, i: usize, k: usize) -> Result<KernelPieces> {
    Ok(KernelPieces {
        r: r_coeff(mesh, i, k)?,
        s: s_coeff(mesh, i, k)?,
    })
}

/// All weights of level `i`.
pub fn weight_row(mesh: &TemporalMesh, i: usize) -> Result<WeightRow> {
    check_level(mesh, i)?;
    let level = Level::new(mesh, i);
    let mut weights = Vec::with_capacity(i + 1);
    if i == 0 {
        weights.push(level.r_last(mesh, 0) / mesh.tau(1));
    } else {
        let s: Vec<f64> = (0..i).map(|k| level.s_hist(mesh, k)).collect();
        weights.push((level.r_hist(mesh, 0) - s[0]) / mesh.tau(1));
        for k in 1..i {
            weights.push((level.r_hist(mesh, k) + s[k - 1] - s[k]) / mesh.tau(k + 1));
        }
        weights.push((level.r_last(mesh, i) + s[i - 1]) / mesh.tau(i + 1));
    }
    Ok(WeightRow {
        level: i,
        weights,
        sigma: mesh.sigma(),
        alpha: mesh.alpha(),
    })
}

/// `w_{i,i}` alone, without building the row.
pub fn last_weight(mesh: &TemporalMesh, i: usize) -> Result<f64> {
    check_level(mesh, i)?;
    let level = Level::new(mesh, i);
    let r = level.r_last(mesh, i);
    let s = if i == 0 { 0.0 } else { level.s_hist(mesh, i - 1) };
    Ok((r + s) / mesh.tau(i + 1))
}

/// `ϱ = w_{i,i} Γ(2-α) τ_{i+1}^α / σ^{1-α}` for `1 ≤ i ≤ N_t - 1`.
pub fn rho(mesh: &TemporalMesh, i: usize) -> Result<f64> {
    if i == 0 {
        return Err(Error::IndexOutOfRange {
            name: "i",
            value: 0,
            min: 1,
            max: mesh.nt().saturating_sub(1),
        });
    }
    let alpha = mesh.alpha();
    let w = last_weight(mesh, i)?;
    Ok(w * gamma(2.0 - alpha) * mesh.tau(i + 1).powf(alpha) / mesh.sigma().powf(1.0 - alpha))
}

/// `ϱ` as a function of the local ratio `η = τ_{i+1}/τ_i` alone, with `σ = 1 - α/2`:
///
/// ```text
/// ϱ = 1 + (1 + 1/η)^{-1} [ ((1 + 1/(ση))^{2-α} - 1) - (1/η)((1 + 1/(ση))^{1-α} + 1) ]
/// ```
pub fn rho_closed_form(eta: f64, alpha: f64) -> f64 {
    let sigma = 1.0 - alpha / 2.0;
    let base = 1.0 + 1.0 / (sigma * eta);
    1.0 + ((base.powf(2.0 - alpha) - 1.0) - (base.powf(1.0 - alpha) + 1.0) / eta) / (1.0 + 1.0 / eta)
}

/// Applies the L2-1σ operator of `row` to the samples `g(t_0), ..., g(t_{i+1})`.
pub fn discrete_caputo(history: &[f64], row: &WeightRow) -> Result<f64> {
    let i = row.level();
    if history.len() != i + 2 {
        return Err(Error::LengthMismatch {
            expected: i + 2,
            got: history.len(),
        });
    }
    // Σ_k w_{i,k} (g_{k+1} - g_k), the same sum regrouped by increments.
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, w) in row.weights().iter().enumerate() {
        let term = w * (history[k + 1] - history[k]);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    Ok(sum + comp)
}
