//! Nodal fields, the compact operators `H_x = I + h_x²/12 δ_x²`, `H_y`, the
//! second differences `δ_x²`, `δ_y²`, and the tridiagonal solver behind the
//! ADI sweeps.
//!
//! Boundary convention: `H_x` is the identity on the columns `m ∈ {0, M_x}`
//! and `δ_x²` is zero there (likewise for `y`). Interior stencils read the
//! boundary values as ordinary neighbours.

use std::ops::{Index, IndexMut};

use crate::mesh::SpatialMesh;
use crate::{Error, Result};

/// `(M_x+1) × (M_y+1)` array of nodal values, stored with `n` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    mesh: SpatialMesh,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(mesh: &SpatialMesh) -> Self {
        let (nx, ny) = mesh.shape();
        Self {
            mesh: *mesh,
            values: vec![0.0; nx * ny],
        }
    }

    /// Field with `values[m,n] = f(m, n)`.
    pub fn from_fn(mesh: &SpatialMesh, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let (nx, ny) = mesh.shape();
        let mut values = Vec::with_capacity(nx * ny);
        for m in 0..nx {
            for n in 0..ny {
                values.push(f(m, n));
            }
        }
        Self {
            mesh: *mesh,
            values,
        }
    }

    /// Samples `f(x_m, y_n)` at every node.
    pub fn sample(mesh: &SpatialMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(mesh, |m, n| f(mesh.x(m), mesh.y(n)))
    }

    pub fn from_values(mesh: &SpatialMesh, values: Vec<f64>) -> Result<Self> {
        let (nx, ny) = mesh.shape();
        if values.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                got: values.len(),
            });
        }
        Ok(Self {
            mesh: *mesh,
            values,
        })
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mesh.shape()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn check_mesh(&self, mesh: &SpatialMesh) -> Result<()> {
        if self.mesh.shape() != mesh.shape() {
            return Err(Error::DimensionMismatch {
                expected: mesh.shape(),
                got: self.mesh.shape(),
            });
        }
        Ok(())
    }

    fn stride(&self) -> usize {
        self.mesh.my() + 1
    }

    fn map_interior_x(&self, stencil: impl Fn(f64, f64, f64) -> f64, edge: impl Fn(f64) -> f64) -> Self {
        let (nx, ny) = self.shape();
        let s = self.stride();
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        for n in 0..ny {
            out[n] = edge(v[n]);
            out[(nx - 1) * s + n] = edge(v[(nx - 1) * s + n]);
        }
        for m in 1..nx - 1 {
            for n in 0..ny {
                let c = m * s + n;
                out[c] = stencil(v[c - s], v[c], v[c + s]);
            }
        }
        Self {
            mesh: self.mesh,
            values: out,
        }
    }

    fn map_interior_y(&self, stencil: impl Fn(f64, f64, f64) -> f64, edge: impl Fn(f64) -> f64) -> Self {
        let (nx, ny) = self.shape();
        let s = self.stride();
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        for m in 0..nx {
            let row = m * s;
            out[row] = edge(v[row]);
            out[row + ny - 1] = edge(v[row + ny - 1]);
            for n in 1..ny - 1 {
                let c = row + n;
                out[c] = stencil(v[c - 1], v[c], v[c + 1]);
            }
        }
        Self {
            mesh: self.mesh,
            values: out,
        }
    }

    /// `H_x v`: `(v_{m-1} + 10 v_m + v_{m+1})/12` on interior columns.
    pub fn apply_hx(&self) -> Self {
        self.map_interior_x(|a, b, c| (a + 10.0 * b + c) / 12.0, |e| e)
    }

    /// `H_y v`.
    pub fn apply_hy(&self) -> Self {
        self.map_interior_y(|a, b, c| (a + 10.0 * b + c) / 12.0, |e| e)
    }

    /// `δ_x² v` on interior columns, zero on `m ∈ {0, M_x}`.
    pub fn apply_dxx(&self) -> Self {
        let inv = 1.0 / (self.mesh.hx() * self.mesh.hx());
        self.map_interior_x(move |a, b, c| (a - 2.0 * b + c) * inv, |_| 0.0)
    }

    /// `δ_y² v` on interior rows, zero on `n ∈ {0, M_y}`.
    pub fn apply_dyy(&self) -> Self {
        let inv = 1.0 / (self.mesh.hy() * self.mesh.hy());
        self.map_interior_y(move |a, b, c| (a - 2.0 * b + c) * inv, |_| 0.0)
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &Field2D) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.values {
            *a *= factor;
        }
    }

    /// Zeroes every boundary node.
    pub fn clear_boundary(&mut self) {
        let (nx, ny) = self.shape();
        let s = self.stride();
        for m in 0..nx {
            for n in 0..ny {
                if m == 0 || n == 0 || m == nx - 1 || n == ny - 1 {
                    self.values[m * s + n] = 0.0;
                }
            }
        }
    }
}

impl Index<(usize, usize)> for Field2D {
    type Output = f64;

    fn index(&self, (m, n): (usize, usize)) -> &f64 {
        let s = self.stride();
        &self.values[m * s + n]
    }
}

impl IndexMut<(usize, usize)> for Field2D {
    fn index_mut(&mut self, (m, n): (usize, usize)) -> &mut f64 {
        let s = self.stride();
        &mut self.values[m * s + n]
    }
}

/// `n × n` tridiagonal system; `sub[0]` and `sup[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    /// Constant-coefficient system with the given right-hand side.
    pub fn constant(lower: f64, diag: f64, upper: f64, rhs: Vec<f64>) -> Self {
        let n = rhs.len();
        Self {
            sub: vec![lower; n],
            diag: vec![diag; n],
            sup: vec![upper; n],
            rhs,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn lower(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.sub[j]
        }
    }

    fn upper(&self, j: usize) -> f64 {
        if j + 1 == self.len() {
            0.0
        } else {
            self.sup[j]
        }
    }

    /// Strict row diagonal dominance.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|j| self.diag[j].abs() > self.lower(j).abs() + self.upper(j).abs())
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut acc = self.diag[j] * x[j];
                if j > 0 {
                    acc += self.sub[j] * x[j - 1];
                }
                if j + 1 < n {
                    acc += self.sup[j] * x[j + 1];
                }
                acc
            })
            .collect()
    }

    /// Thomas elimination without pivoting.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if self.sub.len() != n || self.sup.len() != n || self.rhs.len() != n {
            let bad = [self.sub.len(), self.sup.len(), self.rhs.len()]
                .into_iter()
                .find(|&l| l != n)
                .unwrap();
            return Err(Error::LengthMismatch { expected: n, got: bad });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let scale = self.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let tiny = f64::EPSILON * scale;

        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if !(pivot.abs() > tiny) {
            return Err(Error::ZeroPivot { row: 0 });
        }
        c[0] = self.upper(0) / pivot;
        d[0] = self.rhs[0] / pivot;
        for j in 1..n {
            pivot = self.diag[j] - self.sub[j] * c[j - 1];
            if !(pivot.abs() > tiny) {
                return Err(Error::ZeroPivot { row: j });
            }
            c[j] = self.upper(j) / pivot;
            d[j] = (self.rhs[j] - self.sub[j] * d[j - 1]) / pivot;
        }
        for j in (0..n - 1).rev() {
            d[j] -= c[j] * d[j + 1];
        }
        Ok(d)
    }
}
