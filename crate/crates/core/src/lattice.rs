//! Potential flow and curvature diagnostics on a flat 4-torus lattice.
//!
//! The torus carries complex coordinates `z_1 = x_1 + i y_1`,
//! `z_2 = x_2 + i y_2`, discretized on an `N⁴` grid with spacing `h = 2π/N`
//! and periodic wraparound on every axis. A real potential `φ` induces
//!
//! ```text
//! G_k̄j   = δ_kj + ∂_{z_j} ∂_{z̄_k} φ
//! K_āb c̄d = -∂_{z_d} ∂_{z̄_c} G_āb
//!          + Σ_pq (G⁻¹)_pq (∂_{z_d} G_q̄b)(∂_{z̄_c} G_āp)
//! Ric_k̄j = Σ_pm (G⁻¹)_pm K_k̄j m̄p          (curvature route)
//! Ric_k̄j = -∂_{z_j} ∂_{z̄_k} log det G      (log-det route)
//! ```
//!
//! All spatial derivatives reduce to one canonical complex operator built
//! from fourth-order centered stencils with `∂_z = (∂_x - i ∂_y)/2`:
//! same-direction `∂_z ∂_z̄` uses the second-derivative stencil, mixed
//! directions compose first-derivative stencils. Because every operator is a
//! polynomial in commuting shift operators, the two Ricci routes agree
//! exactly at linear order in `φ`; their difference is pure `O(h⁴)` stencil
//! truncation of the nonlinear terms, which the refinement tests pin down.
//!
//! The potential flow is the explicit Euler update
//!
//! ```text
//! φ ← φ + dt (log det G - mean(log det G) + μ φ),    then re-center mean(φ)
//! ```
//!
//! with the step gated at `dt ≤ MAX_STEP_FRACTION · h²`; the linearized
//! update is a heat flow whose von Neumann bound is `0.375 h²`, and
//! monotone sup-norm decay needs half that, so the default configuration
//! uses `0.1 h²`.
//!
//! All reductions (means, minima, argmins) run in index order, so repeated
//! runs produce identical bytes.

use crate::cone::ConeReport;
use crate::decomp::decompose;
use crate::math;
use crate::tensors::{
    frame_from_metric, mat_inverse, HermitianForm2, KahlerCurvature, SymmetryViolation,
    METRIC_EIGENVALUE_FLOOR,
};
use crate::{C64, CTensor4};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

/// Hard ceiling on the Euler step as a fraction of `h²`.
pub const MAX_STEP_FRACTION: f64 = 0.25;

// ── errors ──

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridError {
    /// Fourth-order stencils need at least 8 points per axis.
    TooCoarse { n: usize },
    /// Odd sizes break the symmetric mode layout used by the tests.
    OddSize { n: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::TooCoarse { n } => write!(f, "grid size {n} is below the minimum of 8"),
            GridError::OddSize { n } => write!(f, "grid size {n} must be even"),
        }
    }
}

impl core::error::Error for GridError {}

/// Metric degeneracy at a specific lattice point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonPositiveMetricAt {
    pub point: [usize; 4],
    pub min_eigenvalue: f64,
}

impl fmt::Display for NonPositiveMetricAt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric lost positivity at point {:?}: min eigenvalue {:.3e}",
            self.point, self.min_eigenvalue
        )
    }
}

impl core::error::Error for NonPositiveMetricAt {}

/// Euler step exceeding the stability ceiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityViolation {
    pub dt: f64,
    pub max_dt: f64,
}

impl fmt::Display for StabilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {:.3e} outside the stable range (0, {:.3e}]",
            self.dt, self.max_dt
        )
    }
}

impl core::error::Error for StabilityViolation {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatticeError {
    Grid(GridError),
    NonPositiveMetric(NonPositiveMetricAt),
    Stability(StabilityViolation),
    Symmetry(SymmetryViolation),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::Grid(e) => e.fmt(f),
            LatticeError::NonPositiveMetric(e) => e.fmt(f),
            LatticeError::Stability(e) => e.fmt(f),
            LatticeError::Symmetry(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for LatticeError {}

impl From<GridError> for LatticeError {
    fn from(e: GridError) -> Self {
        LatticeError::Grid(e)
    }
}

impl From<NonPositiveMetricAt> for LatticeError {
    fn from(e: NonPositiveMetricAt) -> Self {
        LatticeError::NonPositiveMetric(e)
    }
}

impl From<StabilityViolation> for LatticeError {
    fn from(e: StabilityViolation) -> Self {
        LatticeError::Stability(e)
    }
}

impl From<SymmetryViolation> for LatticeError {
    fn from(e: SymmetryViolation) -> Self {
        LatticeError::Symmetry(e)
    }
}

// ── grid ──

/// `N⁴` periodic grid with spacing `h = 2π/N`. Axes are ordered
/// `(x1, y1, x2, y2)`; the flattened index is
/// `((ix1·N + iy1)·N + ix2)·N + iy2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    n: usize,
    h: f64,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 8 {
            return Err(GridError::TooCoarse { n });
        }
        if n % 2 != 0 {
            return Err(GridError::OddSize { n });
        }
        Ok(TorusGrid {
            n,
            h: 2.0 * core::f64::consts::PI / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n * self.n
    }

    pub fn index(&self, c: [usize; 4]) -> usize {
        ((c[0] * self.n + c[1]) * self.n + c[2]) * self.n + c[3]
    }

    pub fn coords(&self, idx: usize) -> [usize; 4] {
        let n = self.n;
        [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n]
    }

    /// Coordinate values `x_a = i_a · h` of a flattened index.
    pub fn position(&self, idx: usize) -> [f64; 4] {
        let c = self.coords(idx);
        [
            c[0] as f64 * self.h,
            c[1] as f64 * self.h,
            c[2] as f64 * self.h,
            c[3] as f64 * self.h,
        ]
    }

    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n * self.n * self.n,
            1 => self.n * self.n,
            2 => self.n,
            3 => 1,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    /// Largest Euler step the flow accepts.
    pub fn max_stable_step(&self) -> f64 {
        MAX_STEP_FRACTION * self.h * self.h
    }
}

// ── stencils ──

/// Fourth-order centered first derivative along one axis:
/// `(-f₂ + 8f₁ - 8f₋₁ + f₋₂) / (12h)`.
fn d1_gen<T>(data: &[T], grid: TorusGrid, axis: usize) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n;
    let st = grid.stride(axis);
    let inv = 1.0 / (12.0 * grid.h);
    (0..data.len())
        .map(|idx| {
            let c = (idx / st) % n;
            let base = idx - c * st;
            let at = |cc: usize| data[base + cc * st];
            let p1 = at((c + 1) % n);
            let p2 = at((c + 2) % n);
            let m1 = at((c + n - 1) % n);
            let m2 = at((c + n - 2) % n);
            ((p1 - m1) * 8.0 + (m2 - p2)) * inv
        })
        .collect()
}

/// Fourth-order centered second derivative along one axis:
/// `(-f₂ + 16f₁ - 30f₀ + 16f₋₁ - f₋₂) / (12h²)`.
fn d2_gen<T>(data: &[T], grid: TorusGrid, axis: usize) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n;
    let st = grid.stride(axis);
    let inv = 1.0 / (12.0 * grid.h * grid.h);
    (0..data.len())
        .map(|idx| {
            let c = (idx / st) % n;
            let base = idx - c * st;
            let at = |cc: usize| data[base + cc * st];
            let p1 = at((c + 1) % n);
            let p2 = at((c + 2) % n);
            let m1 = at((c + n - 1) % n);
            let m2 = at((c + n - 2) % n);
            ((p1 + m1) * 16.0 - data[idx] * 30.0 - (p2 + m2)) * inv
        })
        .collect()
}

// ── fields ──

#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: TorusGrid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.points()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 4]) -> f64) -> Self {
        ScalarField {
            grid,
            data: (0..grid.points()).map(|idx| f(grid.position(idx))).collect(),
        }
    }

    /// `amplitude · cos(k · x)` for integer wave numbers `k`.
    pub fn cosine_mode(grid: TorusGrid, amplitude: f64, wave: [i64; 4]) -> Self {
        ScalarField::from_fn(grid, |x| {
            let phase = wave[0] as f64 * x[0]
                + wave[1] as f64 * x[1]
                + wave[2] as f64 * x[2]
                + wave[3] as f64 * x[3];
            amplitude * math::cos(phase)
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sup_abs(&self) -> f64 {
        let mut sup = 0.0f64;
        for v in &self.data {
            sup = sup.max(v.abs());
        }
        sup
    }

    pub fn mean(&self) -> f64 {
        let mut sum = 0.0;
        for v in &self.data {
            sum += v;
        }
        sum / self.data.len() as f64
    }

    pub fn d1(&self, axis: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: d1_gen(&self.data, self.grid, axis),
        }
    }

    pub fn d2(&self, axis: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: d2_gen(&self.data, self.grid, axis),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: TorusGrid,
    data: Vec<C64>,
}

impl ComplexField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        let mut sup = 0.0f64;
        for v in &self.data {
            sup = sup.max(v.re.abs()).max(v.im.abs());
        }
        sup
    }
}

/// `∂_z` on a complex field, complex direction `j ∈ {0, 1}`
/// (axes `x = 2j`, `y = 2j + 1`).
pub fn dz(f: &ComplexField, j: usize) -> ComplexField {
    let dx = d1_gen(&f.data, f.grid, 2 * j);
    let dy = d1_gen(&f.data, f.grid, 2 * j + 1);
    ComplexField {
        grid: f.grid,
        data: (0..dx.len())
            .map(|i| (dx[i] - C64::new(0.0, 1.0) * dy[i]) * 0.5)
            .collect(),
    }
}

/// `∂_z̄` on a complex field.
pub fn dzbar(f: &ComplexField, k: usize) -> ComplexField {
    let dx = d1_gen(&f.data, f.grid, 2 * k);
    let dy = d1_gen(&f.data, f.grid, 2 * k + 1);
    ComplexField {
        grid: f.grid,
        data: (0..dx.len())
            .map(|i| (dx[i] + C64::new(0.0, 1.0) * dy[i]) * 0.5)
            .collect(),
    }
}

/// Canonical mixed second derivative `∂_{z_j} ∂_{z̄_k}` of a real field.
///
/// Same-direction pairs use the one-axis second-derivative stencil (their
/// imaginary part vanishes identically); mixed pairs compose first
/// derivatives. Every higher-level operator in this module is built from
/// this one rule, which is what makes the two Ricci routes consistent.
pub fn dz_dzbar(phi: &ScalarField, j: usize, k: usize) -> ComplexField {
    let grid = phi.grid;
    if j == k {
        let xx = d2_gen(&phi.data, grid, 2 * j);
        let yy = d2_gen(&phi.data, grid, 2 * j + 1);
        ComplexField {
            grid,
            data: (0..xx.len())
                .map(|i| C64::new(0.25 * (xx[i] + yy[i]), 0.0))
                .collect(),
        }
    } else {
        let dxj = d1_gen(&phi.data, grid, 2 * j);
        let dyj = d1_gen(&phi.data, grid, 2 * j + 1);
        let xjxk = d1_gen(&dxj, grid, 2 * k);
        let xjyk = d1_gen(&dxj, grid, 2 * k + 1);
        let yjxk = d1_gen(&dyj, grid, 2 * k);
        let yjyk = d1_gen(&dyj, grid, 2 * k + 1);
        ComplexField {
            grid,
            data: (0..xjxk.len())
                .map(|i| {
                    C64::new(
                        0.25 * (xjxk[i] + yjyk[i]),
                        0.25 * (xjyk[i] - yjxk[i]),
                    )
                })
                .collect(),
        }
    }
}

/// `∂_{z_j} ∂_{z̄_k}` of a complex field, same stencil rule as [`dz_dzbar`].
pub fn dz_dzbar_complex(f: &ComplexField, j: usize, k: usize) -> ComplexField {
    if j == k {
        let xx = d2_gen(&f.data, f.grid, 2 * j);
        let yy = d2_gen(&f.data, f.grid, 2 * j + 1);
        ComplexField {
            grid: f.grid,
            data: (0..xx.len()).map(|i| (xx[i] + yy[i]) * 0.25).collect(),
        }
    } else {
        dz(&dzbar(f, k), j)
    }
}

/// Hermitian `2×2` form per lattice point, `data[idx][a][b] = F_āb`. Used for
/// both the metric and the Ricci form.
#[derive(Clone, Debug)]
pub struct FormField {
    grid: TorusGrid,
    data: Vec<[[C64; 2]; 2]>,
}

impl FormField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn at(&self, idx: usize) -> &[[C64; 2]; 2] {
        &self.data[idx]
    }

    pub fn form_at(&self, idx: usize) -> HermitianForm2 {
        HermitianForm2(self.data[idx])
    }

    pub fn max_abs_diff(&self, other: &FormField) -> f64 {
        let mut worst = 0.0f64;
        for (x, y) in self.data.iter().zip(other.data.iter()) {
            for a in 0..2 {
                for b in 0..2 {
                    let d = x[a][b] - y[a][b];
                    worst = worst.max(d.re.abs()).max(d.im.abs());
                }
            }
        }
        worst
    }

    fn det_at(&self, idx: usize) -> f64 {
        let m = &self.data[idx];
        m[0][0].re * m[1][1].re - (m[0][1].re * m[0][1].re + m[0][1].im * m[0][1].im)
    }

    fn min_eigenvalue_at(&self, idx: usize) -> f64 {
        let m = &self.data[idx];
        let mid = 0.5 * (m[0][0].re + m[1][1].re);
        let det = self.det_at(idx);
        let disc = (mid * mid - det).max(0.0);
        mid - math::sqrt(disc)
    }

    /// Global minimum eigenvalue and its argmin index, scanned in index order.
    pub fn min_eigenvalue(&self) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for idx in 0..self.data.len() {
            let v = self.min_eigenvalue_at(idx);
            if v < best {
                best = v;
                arg = idx;
            }
        }
        (best, arg)
    }

    /// `ln det` per point; fails at the first point with `det` at or below
    /// the positivity floor.
    pub fn log_det(&self) -> Result<ScalarField, LatticeError> {
        let mut data = Vec::with_capacity(self.data.len());
        for idx in 0..self.data.len() {
            let det = self.det_at(idx);
            if det <= METRIC_EIGENVALUE_FLOOR {
                return Err(NonPositiveMetricAt {
                    point: self.grid.coords(idx),
                    min_eigenvalue: self.min_eigenvalue_at(idx),
                }
                .into());
            }
            data.push(math::ln(det));
        }
        Ok(ScalarField {
            grid: self.grid,
            data,
        })
    }

    fn entry_field(&self, a: usize, b: usize) -> ComplexField {
        ComplexField {
            grid: self.grid,
            data: self.data.iter().map(|m| m[a][b]).collect(),
        }
    }

    fn inverse_at(&self, idx: usize) -> Result<[[C64; 2]; 2], NonPositiveMetricAt> {
        mat_inverse(&self.data[idx]).ok_or(NonPositiveMetricAt {
            point: self.grid.coords(idx),
            min_eigenvalue: self.min_eigenvalue_at(idx),
        })
    }
}

/// `G_k̄j = δ_kj + ∂_{z_j} ∂_{z̄_k} φ`, gated on positivity at every point.
pub fn metric_from_potential(phi: &ScalarField) -> Result<FormField, LatticeError> {
    let grid = phi.grid;
    let m00 = dz_dzbar(phi, 0, 0);
    let m11 = dz_dzbar(phi, 1, 1);
    // Entry G[0][1] is ∂_{z_1}∂_{z̄_0}; the conjugate fills the mirror slot.
    let m10 = dz_dzbar(phi, 1, 0);
    let one = C64::new(1.0, 0.0);
    let data: Vec<[[C64; 2]; 2]> = (0..grid.points())
        .map(|i| {
            [
                [one + m00.data[i], m10.data[i]],
                [m10.data[i].conj(), one + m11.data[i]],
            ]
        })
        .collect();
    let field = FormField { grid, data };
    let (min_eig, arg) = field.min_eigenvalue();
    if min_eig <= METRIC_EIGENVALUE_FLOOR {
        return Err(NonPositiveMetricAt {
            point: grid.coords(arg),
            min_eigenvalue: min_eig,
        }
        .into());
    }
    Ok(field)
}

/// Curvature tensor per lattice point, barred-first storage per pair.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    grid: TorusGrid,
    data: Vec<CTensor4>,
}

impl CurvatureField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn at(&self, idx: usize) -> &CTensor4 {
        &self.data[idx]
    }

    pub fn tensor_at(&self, idx: usize) -> KahlerCurvature {
        KahlerCurvature(self.data[idx])
    }
}

/// Full curvature field from a metric field.
///
/// The discrete tensor satisfies the reality symmetry to rounding (the
/// stencil coefficients are real, so conjugation commutes with every
/// derivative exactly). Pair and Kähler exchange regroup a same-direction
/// second derivative (one five-point stencil) into a composition of two
/// first-derivative stencils; those agree only to O(h⁴), so the raw
/// exchange defects are truncation-sized. [`diagnostic_fields`] symmetrizes
/// before decomposing, which projects them away.
pub fn curvature_from_metric(g: &FormField) -> Result<CurvatureField, LatticeError> {
    let grid = g.grid;
    let points = grid.points();

    let entries = [
        [g.entry_field(0, 0), g.entry_field(0, 1)],
        [g.entry_field(1, 0), g.entry_field(1, 1)],
    ];
    // dzg[d][a][b] = ∂_{z_d} G_āb; the barred derivatives come for free from
    // hermiticity: ∂_{z̄_c} G_āp = conj(∂_{z_c} G_p̄a).
    let dzg = [
        [
            [dz(&entries[0][0], 0), dz(&entries[0][1], 0)],
            [dz(&entries[1][0], 0), dz(&entries[1][1], 0)],
        ],
        [
            [dz(&entries[0][0], 1), dz(&entries[0][1], 1)],
            [dz(&entries[1][0], 1), dz(&entries[1][1], 1)],
        ],
    ];

    let zero = C64::new(0.0, 0.0);
    let mut data = vec![[[[[zero; 2]; 2]; 2]; 2]; points];

    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let second = dz_dzbar_complex(&entries[a][b], d, cc);
                    for idx in 0..points {
                        data[idx][a][b][cc][d] = -second.data[idx];
                    }
                }
            }
        }
    }

    for idx in 0..points {
        let ginv = g.inverse_at(idx)?;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let mut quad = zero;
                        for p in 0..2 {
                            for q in 0..2 {
                                quad += ginv[p][q]
                                    * dzg[d][q][b].data[idx]
                                    * dzg[cc][p][a].data[idx].conj();
                            }
                        }
                        data[idx][a][b][cc][d] += quad;
                    }
                }
            }
        }
    }

    Ok(CurvatureField { grid, data })
}

pub fn curvature_from_potential(phi: &ScalarField) -> Result<CurvatureField, LatticeError> {
    curvature_from_metric(&metric_from_potential(phi)?)
}

/// Ricci form by tracing the curvature field:
/// `Ric_k̄j = Σ_pm (G⁻¹)_pm K_k̄j m̄p`.
pub fn ricci_from_curvature(k: &CurvatureField, g: &FormField) -> Result<FormField, LatticeError> {
    let grid = k.grid;
    let mut data = Vec::with_capacity(grid.points());
    for idx in 0..grid.points() {
        let ginv = g.inverse_at(idx)?;
        let t = &k.data[idx];
        let mut form = [[C64::new(0.0, 0.0); 2]; 2];
        for kk in 0..2 {
            for j in 0..2 {
                let mut sum = C64::new(0.0, 0.0);
                for p in 0..2 {
                    for m in 0..2 {
                        sum += ginv[p][m] * t[kk][j][m][p];
                    }
                }
                form[kk][j] = sum;
            }
        }
        data.push(form);
    }
    Ok(FormField { grid, data })
}

/// Ricci form from the potential of the volume form:
/// `Ric_k̄j = -∂_{z_j} ∂_{z̄_k} log det G`.
pub fn ricci_from_logdet(g: &FormField) -> Result<FormField, LatticeError> {
    let logdet = g.log_det()?;
    let grid = g.grid;
    let m00 = dz_dzbar(&logdet, 0, 0);
    let m11 = dz_dzbar(&logdet, 1, 1);
    let m10 = dz_dzbar(&logdet, 1, 0);
    let data: Vec<[[C64; 2]; 2]> = (0..grid.points())
        .map(|i| {
            [
                [-m00.data[i], -m10.data[i]],
                [-m10.data[i].conj(), -m11.data[i]],
            ]
        })
        .collect();
    Ok(FormField { grid, data })
}

/// Scalar curvature `Σ_jk (G⁻¹)_jk Ric_k̄j` per point.
pub fn scalar_from_ricci(ric: &FormField, g: &FormField) -> Result<ScalarField, LatticeError> {
    let grid = ric.grid;
    let mut data = Vec::with_capacity(grid.points());
    for idx in 0..grid.points() {
        let ginv = g.inverse_at(idx)?;
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..2 {
            for kk in 0..2 {
                sum += ginv[j][kk] * ric.data[idx][kk][j];
            }
        }
        data.push(sum.re);
    }
    Ok(ScalarField { grid, data })
}

/// One explicit Euler step of the potential flow; see the module docs for
/// the update and the stability gate.
pub fn potential_flow_step(phi: &mut ScalarField, dt: f64, mu: f64) -> Result<(), LatticeError> {
    let max_dt = phi.grid.max_stable_step();
    if !(dt > 0.0 && dt <= max_dt) {
        return Err(StabilityViolation { dt, max_dt }.into());
    }
    let g = metric_from_potential(phi)?;
    let logdet = g.log_det()?;
    let mean_logdet = logdet.mean();
    for i in 0..phi.data.len() {
        phi.data[i] += dt * (logdet.data[i] - mean_logdet + mu * phi.data[i]);
    }
    let mean_phi = phi.mean();
    for v in phi.data.iter_mut() {
        *v -= mean_phi;
    }
    Ok(())
}

/// Per-point cone diagnostics of the induced curvature.
#[derive(Clone, Debug)]
pub struct DiagnosticFields {
    pub r: ScalarField,
    pub s_norm: ScalarField,
    pub det_indicator: ScalarField,
    pub two_sum: ScalarField,
}

/// Scalar summary of one diagnostic sweep.
#[derive(Clone, Copy, Debug)]
pub struct LatticeDiagnostics {
    pub sup_phi: f64,
    pub sup_r: f64,
    pub min_det_indicator: f64,
    pub min_two_sum: f64,
    pub min_metric_eigenvalue: f64,
}

/// Compute per-point diagnostics: at every lattice point the curvature is
/// transported to a unitary frame by the metric square root, symmetrized,
/// and decomposed into `(R, s, M)` components for the cone monitors.
pub fn diagnostic_fields(phi: &ScalarField) -> Result<DiagnosticFields, LatticeError> {
    let grid = phi.grid;
    let g = metric_from_potential(phi)?;
    let k = curvature_from_metric(&g)?;

    let points = grid.points();
    let mut r = Vec::with_capacity(points);
    let mut s_norm = Vec::with_capacity(points);
    let mut det_indicator = Vec::with_capacity(points);
    let mut two_sum = Vec::with_capacity(points);

    for idx in 0..points {
        let form = g.form_at(idx);
        let frame = frame_from_metric(&form).map_err(|e| NonPositiveMetricAt {
            point: grid.coords(idx),
            min_eigenvalue: e.min_eigenvalue,
        })?;
        let tensor = KahlerCurvature::symmetrized(&k.tensor_at(idx).to_frame(&frame).0);
        let parts = decompose(&tensor).map_err(LatticeError::Symmetry)?;
        let report = ConeReport::from_parts(&parts);
        r.push(report.r);
        s_norm.push(report.s_norm);
        det_indicator.push(report.det_indicator);
        two_sum.push(report.two_sum);
    }

    Ok(DiagnosticFields {
        r: ScalarField { grid, data: r },
        s_norm: ScalarField { grid, data: s_norm },
        det_indicator: ScalarField {
            grid,
            data: det_indicator,
        },
        two_sum: ScalarField {
            grid,
            data: two_sum,
        },
    })
}

/// Diagnostic sweep reduced to scalar monitors, in index order.
pub fn diagnostics(phi: &ScalarField) -> Result<LatticeDiagnostics, LatticeError> {
    let fields = diagnostic_fields(phi)?;
    let g = metric_from_potential(phi)?;
    let mut min_det = f64::INFINITY;
    let mut min_two = f64::INFINITY;
    for idx in 0..phi.grid.points() {
        min_det = min_det.min(fields.det_indicator.data[idx]);
        min_two = min_two.min(fields.two_sum.data[idx]);
    }
    Ok(LatticeDiagnostics {
        sup_phi: phi.sup_abs(),
        sup_r: fields.r.sup_abs(),
        min_det_indicator: min_det,
        min_two_sum: min_two,
        min_metric_eigenvalue: g.min_eigenvalue().0,
    })
}
