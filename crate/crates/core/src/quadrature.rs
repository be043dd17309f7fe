//! Adaptive Gauss–Kronrod quadrature used as an independent oracle for the
//! closed-form kernel integrals and for Caputo derivatives of manufactured
//! solutions. Nothing in the solver path calls into this module.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::caputo::gamma;
use crate::mesh::TemporalMesh;

// 15-point Kronrod nodes on [0, 1); the 7-point Gauss rule uses the odd ones.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7K15 quadrature of `f` over `[a, b]`.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol |I|)`. Endpoints are never
/// evaluated.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quadrature {
    let first = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::from([first]);
    let mut value = first.value;
    let mut error = first.error;
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error_estimate = heap.iter().map(|s| s.error).sum();
    Quadrature {
        value,
        error_estimate,
        intervals: heap.len(),
    }
}

const ORACLE_REL_TOL: f64 = 1e-14;

/// `r_{i,k} = Γ(1-α)^{-1} ∫_{t_k}^{min(t_{k+1}, t_{i+σ})} (t_{i+σ} - ν)^{-α} dν` by quadrature.
pub fn r_coeff_quadrature(mesh: &TemporalMesh, i: usize, k: usize) -> f64 {
    let alpha = mesh.alpha();
    let a = mesh.t_sigma(i).expect("i in range");
    let g = gamma(1.0 - alpha);
    if k == i {
        // z = a - ν = L w^q with q = 2/(1-α) turns z^{-α} dz into L^{1-α} q w dw.
        let width = a - mesh.t(i);
        let q = 2.0 / (1.0 - alpha);
        let scale = width.powf(1.0 - alpha) * q;
        let integral = integrate(|w| scale * w.powf(q * (1.0 - alpha) - 1.0), 0.0, 1.0, ORACLE_REL_TOL, 0.0);
        return integral.value / g;
    }
    // ν = t_{k+1} - τ w so that a - ν = z_b + τ w stays accurate near the kernel peak.
    let tau = mesh.tau(k + 1);
    let zb = a - mesh.t(k + 1);
    let integral = integrate(|w| (zb + tau * w).powf(-alpha), 0.0, 1.0, ORACLE_REL_TOL, 0.0);
    tau * integral.value / g
}

/// `s_{i,k}` by quadrature of
/// `2/(t_{k+2}-t_k) Γ(1-α)^{-1} ∫_{t_k}^{t_{k+1}} (t_{i+σ}-ν)^{-α} (ν - t_{k+1/2}) dν`.
///
/// The constant `(t_{i+σ} - t_{k+1/2})^{-α}` is subtracted from the kernel
/// first (it integrates to zero against the odd weight), which removes the
/// cancellation that otherwise dominates for distant history intervals.
pub fn s_coeff_quadrature(mesh: &TemporalMesh, i: usize, k: usize) -> f64 {
    let alpha = mesh.alpha();
    let a = mesh.t_sigma(i).expect("i in range");
    let half = 0.5 * mesh.tau(k + 1);
    let mid = 0.5 * (mesh.t(k) + mesh.t(k + 1));
    let d = a - mid;
    let zb = a - mesh.t(k + 1);
    let d_pow = d.powf(-alpha);
    let far = half / d < 0.5;
    // u = ν - t_{k+1/2} = h (1 - 2w), so a - ν = z_b + 2 h w.
    let integrand = |w: f64| {
        let u = half * (1.0 - 2.0 * w);
        let kernel_gap = if far {
            d_pow * (-alpha * (-u / d).ln_1p()).exp_m1()
        } else {
            (zb + 2.0 * half * w).powf(-alpha) - d_pow
        };
        kernel_gap * u
    };
    let integral = integrate(integrand, 0.0, 1.0, ORACLE_REL_TOL, 0.0);
    let span = mesh.t(k + 2) - mesh.t(k);
    2.0 * half * integral.value * 2.0 / span / gamma(1.0 - alpha)
}

/// Caputo derivative `Γ(1-α)^{-1} ∫_0^t (t-s)^{-α} g'(s) ds` by quadrature.
///
/// `derivative` is `g'`. `lower_exponent = β` declares `g'(s) ~ s^{β-1}` near
/// zero; pass `1.0` for a bounded derivative. The interval is split at
/// `t/2` and both endpoint singularities are removed by power substitutions.
pub fn caputo_quadrature(derivative: impl Fn(f64) -> f64, t: f64, alpha: f64, lower_exponent: f64) -> f64 {
    let half = 0.5 * t;
    // Upper piece: t - s = (t/2) w^q, q = 1/(1-α).
    let q = 1.0 / (1.0 - alpha);
    let upper_scale = half.powf(1.0 - alpha) * q;
    let upper = integrate(
        |w| upper_scale * derivative(t - half * w.powf(q)),
        0.0,
        1.0,
        ORACLE_REL_TOL,
        0.0,
    );
    // Lower piece: s = (t/2) w^p, p = 1/β when g' is singular at 0.
    let p = if lower_exponent < 1.0 { 1.0 / lower_exponent } else { 1.0 };
    let lower = integrate(
        |w| {
            let s = half * w.powf(p);
            (t - s).powf(-alpha) * derivative(s) * half * p * w.powf(p - 1.0)
        },
        0.0,
        1.0,
        ORACLE_REL_TOL,
        0.0,
    );
    (upper.value + lower.value) / gamma(1.0 - alpha)
}
