//! Uniform periodic grids and the discrete Fourier pair.
//!
//! A [`Grid`] with `N` points per axis and half-width `L` samples space on
//! `x_i = (i - N/2) h`, `h = 2L/N`, and frequency on `ξ_k = (k - N/2) Δξ`,
//! `Δξ = π/L`, both in natural (monotone) order. The forward transform
//! approximates `∫ e^{-iξ·x} f(x) dx` by an `hⁿ`-weighted DFT; the inverse
//! carries the `(2π)^{-n}` factor. The two node sets are structurally
//! identical (`h·Δξ = 2π/N`), so a function sampled on either side can be
//! transformed to the other one; [`GridFunction::fourier`] does exactly that
//! and is what the norm algorithms use when a symbol piece `m_j`, itself a
//! function of `ξ`, needs its own Fourier transform.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::exponent::{weighted_power_sum, Exponent};
use crate::fft::{Direction, FftPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Space,
    Frequency,
}

impl Side {
    pub fn dual(self) -> Side {
        match self {
            Side::Space => Side::Frequency,
            Side::Frequency => Side::Space,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Space => "space",
            Side::Frequency => "frequency",
        })
    }
}

/// Uniform sampling of `[-L, L)ⁿ` and its frequency dual.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
    plan: Arc<FftPlan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.half_width == other.half_width
    }
}

/// Plain description of a grid, used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(
                "dim",
                alloc::format!("dimension {dim} is not 1 or 2"),
            ));
        }
        if !points.is_power_of_two() || points < 8 {
            return Err(Error::invalid(
                "points",
                alloc::format!("{points} points per axis is not a power of two >= 8"),
            ));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(
                "half_width",
                alloc::format!("half-width {half_width} is not positive"),
            ));
        }
        Ok(Grid {
            dim,
            points,
            half_width,
            plan: Arc::new(FftPlan::new(points)),
        })
    }

    /// 1D `N = 4096`, `L = 64π`: resolves `2^{-6} ≤ |ξ| ≤ 2^5` with 64 nodes per unit frequency.
    pub fn default_1d() -> Self {
        Grid::new(1, 4096, 64.0 * PI).expect("valid default grid")
    }

    /// 2D `N = 512` per axis, `L = 16π`.
    pub fn default_2d() -> Self {
        Grid::new(2, 512, 16.0 * PI).expect("valid default grid")
    }

    pub fn default_for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::default_1d()),
            2 => Ok(Self::default_2d()),
            _ => Err(Error::invalid(
                "dim",
                alloc::format!("dimension {dim} is not 1 or 2"),
            )),
        }
    }

    pub fn params(&self) -> GridParams {
        GridParams {
            dim: self.dim,
            points: self.points,
            half_width: self.half_width,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples `Nⁿ`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial spacing `h = 2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Frequency spacing `Δξ = π/L`.
    pub fn freq_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Frequency half-width `Ξ = πN/(2L)`.
    pub fn freq_half_width(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_width)
    }

    pub fn side_spacing(&self, side: Side) -> f64 {
        match side {
            Side::Space => self.spacing(),
            Side::Frequency => self.freq_spacing(),
        }
    }

    pub fn side_half_width(&self, side: Side) -> f64 {
        match side {
            Side::Space => self.half_width,
            Side::Frequency => self.freq_half_width(),
        }
    }

    /// Coordinate of node `index` along one axis.
    pub fn node(&self, side: Side, index: usize) -> f64 {
        (index as f64 - (self.points / 2) as f64) * self.side_spacing(side)
    }

    /// Coordinates of the node with row-major flat index `flat`; only the
    /// first `dim` entries are meaningful.
    pub fn coords(&self, side: Side, flat: usize) -> [f64; 2] {
        let n = self.points;
        match self.dim {
            1 => [self.node(side, flat), 0.0],
            _ => [self.node(side, flat / n), self.node(side, flat % n)],
        }
    }

    /// Per-axis node indices of a flat index.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }

    pub fn flatten(&self, index: [usize; 2]) -> usize {
        match self.dim {
            1 => index[0],
            _ => index[0] * self.points + index[1],
        }
    }

    /// Euclidean norm of every node on `side`, in storage order.
    pub fn radii(&self, side: Side) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let c = self.coords(side, i);
                (c[0] * c[0] + c[1] * c[1]).sqrt()
            })
            .collect()
    }

    pub(crate) fn plan(&self) -> &FftPlan {
        &self.plan
    }
}

/// Samples of a function on one side of a grid, row-major in natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    side: Side,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, side: Side, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::invalid(
                "samples",
                alloc::format!(
                    "{} samples for a grid of {} nodes",
                    samples.len(),
                    grid.len()
                ),
            ));
        }
        Ok(GridFunction {
            grid,
            side,
            samples,
        })
    }

    pub fn zeros(grid: &Grid, side: Side) -> Self {
        GridFunction {
            grid: grid.clone(),
            side,
            samples: alloc::vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f` at every node of `side`; `f` receives the first `dim` coordinates.
    pub fn from_fn(grid: &Grid, side: Side, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let samples = (0..grid.len())
            .map(|i| {
                let c = grid.coords(side, i);
                f(&c[..dim])
            })
            .collect();
        GridFunction {
            grid: grid.clone(),
            side,
            samples,
        }
    }

    pub fn from_real_fn(grid: &Grid, side: Side, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, side, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Node spacing on the side this function lives on.
    pub fn spacing(&self) -> f64 {
        self.grid.side_spacing(self.side)
    }

    /// `d^n`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.grid.dim() as i32)
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        GridFunction {
            grid: self.grid.clone(),
            side: self.side,
            samples,
        }
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise product with `g(coords)` evaluated on this function's side.
    pub fn multiply_by(&self, mut g: impl FnMut(&[f64]) -> Complex64) -> Self {
        let dim = self.grid.dim();
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = self.grid.coords(self.side, i);
                v * g(&c[..dim])
            })
            .collect();
        self.with_samples(samples)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Periodic shift: `result(x) = self(x - offset·d)` for an integer node offset.
    pub fn shifted(&self, offset: &[i64]) -> Self {
        let n = self.grid.points() as i64;
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.samples.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = self.grid.unflatten(flat);
            let mut src = [0usize; 2];
            for a in 0..self.grid.dim() {
                src[a] = (idx[a] as i64 - offset[a]).rem_euclid(n) as usize;
            }
            *slot = self.samples[self.grid.flatten(src)];
        }
        self.with_samples(out)
    }

    /// Largest modulus on the outermost ring of nodes, relative to the overall max.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_modulus();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.grid.points();
        let boundary = self
            .samples
            .iter()
            .enumerate()
            .filter(|(flat, _)| {
                let idx = self.grid.unflatten(*flat);
                (0..self.grid.dim()).any(|a| idx[a] == 0 || idx[a] == n - 1)
            })
            .fold(0.0_f64, |m, (_, v)| m.max(v.norm()));
        boundary / max
    }

    /// `∫ e^{-iy·t} u(t) dt` evaluated on the opposite side, for `u` on either side.
    pub fn fourier(&self) -> GridFunction {
        let weight = self.cell_volume();
        self.transform(Direction::Forward, weight)
    }

    /// `(2π)^{-n} ∫ e^{+it·y} U(y) dy` evaluated on the opposite side.
    pub fn fourier_inverse(&self) -> GridFunction {
        let weight = (self.spacing() / (2.0 * PI)).powi(self.grid.dim() as i32);
        self.transform(Direction::Inverse, weight)
    }

    fn transform(&self, direction: Direction, weight: f64) -> GridFunction {
        let grid = &self.grid;
        let n = grid.points();
        let dim = grid.dim();
        let mut buf = self.samples.clone();
        grid.plan().process_nd(&mut buf, dim, direction);
        // out[k] = w (-1)^k DFT[(k + N/2) mod N] per axis; N/2 is even so
        // (-1)^{k - N/2} = (-1)^k.
        let half = n / 2;
        let out = (0..buf.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                let mut src = [0usize; 2];
                let mut parity = 0usize;
                for a in 0..dim {
                    src[a] = (idx[a] + half) % n;
                    parity += idx[a];
                }
                let v = buf[grid.flatten(src)] * weight;
                if parity % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        GridFunction {
            grid: grid.clone(),
            side: self.side.dual(),
            samples: out,
        }
    }
}

/// Fourier transform of a space-side function.
pub fn forward_transform(f: &GridFunction) -> Result<GridFunction> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch {
            expected: Side::Space,
            found: f.side(),
        });
    }
    Ok(f.fourier())
}

/// Inverse Fourier transform of a frequency-side function.
pub fn inverse_transform(f: &GridFunction) -> Result<GridFunction> {
    if f.side() != Side::Frequency {
        return Err(Error::SideMismatch {
            expected: Side::Frequency,
            found: f.side(),
        });
    }
    Ok(f.fourier_inverse())
}

/// `(∫ |f|^p)^{1/p}` with node weight `hⁿ` (space) or `Δξⁿ` (frequency).
pub fn lp_norm(f: &GridFunction, p: Exponent) -> f64 {
    lp_norm_samples(f.samples(), f.cell_volume(), p)
}

pub(crate) fn lp_norm_samples(samples: &[Complex64], weight: f64, p: Exponent) -> f64 {
    if p.is_two() {
        // Fast path; rescaling by the max is only needed for extreme magnitudes.
        let sum: f64 = samples.iter().map(|v| v.norm_sqr()).sum();
        if sum.is_finite() && sum > 1e-280 {
            return (weight * sum).sqrt();
        }
    }
    weighted_power_sum(samples.iter().map(|v| v.norm()), weight, p)
}
