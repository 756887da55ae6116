//! Function-space norms of grid functions.
//!
//! Every norm is side-agnostic: a function `u` stored on either side of the
//! grid is analysed through `û = u.fourier()`, which lives on the opposite
//! side. For an ordinary signal `f` on the space side `û` is its spectrum;
//! for a symbol piece `m_j` on the frequency side `û` is `\widehat{m_j}`.
//!
//! Dyadic and lattice sums run over every piece that meets the sampled box,
//! so nothing is cut from the discrete sum itself. What can be lost is the
//! part of the true spectrum the grid never saw; [`NormValue::truncation_mass`]
//! reports the relative `L²` energy of `û` in the outer half of the box as
//! the proxy for it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::exponent::{weighted_power_sum, Exponent};
use crate::grid::{lp_norm_samples, Grid, GridFunction, Side};
use crate::partitions::{DyadicPartition, Partitions, UniformPartition};
use crate::{Error, Result};

/// Relative truncation mass above which a warning is attached.
pub const TRUNCATION_WARNING_LEVEL: f64 = 1e-8;

/// Lattice cells whose `L²` piece is below this fraction of the largest one
/// are skipped in the `p ≠ 2` paths (their contribution is below roundoff).
const NEGLIGIBLE_CELL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(alias = "lp", alias = "LP")]
    Lp,
    #[serde(alias = "sobolev")]
    Sobolev,
    #[serde(alias = "besov")]
    Besov,
    #[serde(alias = "modulation")]
    Modulation,
    #[serde(
        rename = "ModulationSTFT",
        alias = "ModulationStft",
        alias = "modulation_stft"
    )]
    ModulationStft,
    #[serde(alias = "herz")]
    Herz,
    #[serde(rename = "FLq", alias = "flq", alias = "FLQ")]
    Flq,
    #[serde(alias = "hardy1", alias = "Hardy")]
    Hardy1,
}

/// A norm descriptor: family plus `(p, q, s)`. Unused parameters are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub family: Family,
    #[serde(default = "two")]
    pub p: Exponent,
    #[serde(default = "two")]
    pub q: Exponent,
    #[serde(default)]
    pub s: f64,
}

fn two() -> Exponent {
    Exponent::TWO
}

impl NormSpec {
    pub fn new(family: Family, p: Exponent, q: Exponent, s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::invalid(
                "s",
                alloc::format!("smoothness {s} is not finite"),
            ));
        }
        Ok(NormSpec { family, p, q, s })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// `û` carries more than [`TRUNCATION_WARNING_LEVEL`] of its energy in
    /// the outer half of the box.
    TruncationMass { mass: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub warnings: Vec<Warning>,
    pub truncation_mass: f64,
}

impl NormValue {
    fn new(value: f64, truncation_mass: f64) -> Self {
        let mut warnings = Vec::new();
        if truncation_mass > TRUNCATION_WARNING_LEVEL {
            warnings.push(Warning::TruncationMass {
                mass: truncation_mass,
            });
        }
        NormValue {
            value,
            warnings,
            truncation_mass,
        }
    }

    fn exact(value: f64) -> Self {
        NormValue {
            value,
            warnings: Vec::new(),
            truncation_mass: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardyMethod {
    /// `∫ sup_t |η_t * f|` over dyadic `t`.
    Maximal,
    /// `‖f‖₁ + Σ_l ‖R_l f‖₁`.
    #[default]
    Riesz,
}

/// The STFT window `g`, stored on the side of the functions it analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub g: GridFunction,
    pub label: String,
}

impl Window {
    pub fn new(g: GridFunction, label: impl Into<String>) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::invalid("window", "window vanishes identically"));
        }
        if g.boundary_ratio() > 1e-12 {
            return Err(Error::invalid(
                "window",
                alloc::format!(
                    "window boundary ratio {:e} exceeds 1e-12",
                    g.boundary_ratio()
                ),
            ));
        }
        Ok(Window {
            g,
            label: label.into(),
        })
    }

    /// `π^{-n/4} e^{-|x|²/2}`, unit `L²` norm.
    pub fn gaussian(grid: &Grid, side: Side) -> Result<Self> {
        let n = grid.dim() as f64;
        let c = PI.powf(-n / 4.0);
        let g = GridFunction::from_real_fn(grid, side, |x| c * (-0.5 * sq_norm(x)).exp());
        Window::new(g, "gaussian")
    }
}

/// Default x-stride of the STFT norm: 1 in 1D, 4 per axis in 2D.
pub fn default_stft_stride(dim: usize) -> usize {
    if dim == 1 {
        1
    } else {
        4
    }
}

/// Everything a norm needs besides `(p, q, s)`.
#[derive(Debug, Clone)]
pub struct NormContext {
    pub partitions: Partitions,
    pub hardy_method: HardyMethod,
    /// Dyadic scales `t = 2^l`, `|l| ≤ hardy_levels`, of the maximal estimator.
    pub hardy_levels: u32,
    /// Defaults to [`default_stft_stride`].
    pub stft_stride: Option<usize>,
    /// Defaults to [`Window::gaussian`].
    pub window: Option<Window>,
}

impl NormContext {
    pub const DEFAULT_HARDY_LEVELS: u32 = 10;

    pub fn new(dim: usize) -> Result<Self> {
        Ok(NormContext {
            partitions: Partitions::new(dim)?,
            hardy_method: HardyMethod::default(),
            hardy_levels: Self::DEFAULT_HARDY_LEVELS,
            stft_stride: None,
            window: None,
        })
    }
}

/// Evaluates the norm selected by `spec`.
pub fn evaluate(u: &GridFunction, spec: &NormSpec, ctx: &NormContext) -> Result<NormValue> {
    let NormSpec { family, p, q, s } = *spec;
    Ok(match family {
        Family::Lp => NormValue::exact(lp_norm_samples(u.samples(), u.cell_volume(), p)),
        Family::Sobolev => NormValue::new(sobolev_norm(u, s), truncation_mass(u)),
        Family::Besov => besov_norm(u, p, q, s, &ctx.partitions.dyadic),
        Family::Modulation => modulation_norm(u, p, q, s, &ctx.partitions.uniform)?,
        Family::ModulationStft => {
            let window = match &ctx.window {
                Some(w) => w.clone(),
                None => Window::gaussian(u.grid(), u.side())?,
            };
            let stride = ctx
                .stft_stride
                .unwrap_or_else(|| default_stft_stride(u.grid().dim()));
            stft_modulation_norm(u, p, q, s, &window, stride)?
        }
        Family::Herz => herz_norm(u, p, q, s, &ctx.partitions.dyadic),
        Family::Flq => NormValue::new(flq_norm(u, q), truncation_mass(u)),
        Family::Hardy1 => NormValue::new(
            hardy_norm(u, ctx.hardy_method, ctx.hardy_levels),
            truncation_mass(u),
        ),
    })
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `(2π)^{-n/2}`: the Plancherel factor relating `‖u‖₂` and `‖û‖₂`.
fn plancherel(grid: &Grid) -> f64 {
    (2.0 * PI).powf(-(grid.dim() as f64) / 2.0)
}

/// Relative `L²` energy of `û` outside the central half `|y|_∞ ≤ Ξ'/2` of
/// the box it lives in.
pub fn truncation_mass(u: &GridFunction) -> f64 {
    spectral_truncation_mass(&u.fourier())
}

fn spectral_truncation_mass(spectrum: &GridFunction) -> f64 {
    let grid = spectrum.grid();
    let side = spectrum.side();
    let limit = grid.side_half_width(side) / 2.0;
    let dim = grid.dim();
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, v) in spectrum.samples().iter().enumerate() {
        let e = v.norm_sqr();
        total += e;
        let c = grid.coords(side, i);
        if c[..dim].iter().any(|x| x.abs() > limit) {
            outer += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

/// `‖(I - Δ)^{s/2} u‖₂ = (2π)^{-n/2} ‖(1 + |y|²)^{s/2} û‖₂`.
pub fn sobolev_norm(u: &GridFunction, s: f64) -> f64 {
    let spectrum = u.fourier();
    sobolev_from_spectrum(&spectrum, s)
}

fn sobolev_from_spectrum(spectrum: &GridFunction, s: f64) -> f64 {
    let weighted = spectrum.multiply_by(|y| Complex64::new((1.0 + sq_norm(y)).powf(s / 2.0), 0.0));
    plancherel(spectrum.grid())
        * lp_norm_samples(weighted.samples(), weighted.cell_volume(), Exponent::TWO)
}

/// `‖u‖_{FL^q} = ‖û‖_q`.
pub fn flq_norm(u: &GridFunction, q: Exponent) -> f64 {
    let spectrum = u.fourier();
    lp_norm_samples(spectrum.samples(), spectrum.cell_volume(), q)
}

/// `‖(1 + |y|²)^{s/2} û‖_q`, the right side of the band-limited equivalence.
pub fn weighted_flq_norm(u: &GridFunction, q: Exponent, s: f64) -> f64 {
    let spectrum = u.fourier();
    let weighted = spectrum.multiply_by(|y| Complex64::new((1.0 + sq_norm(y)).powf(s / 2.0), 0.0));
    lp_norm_samples(weighted.samples(), weighted.cell_volume(), q)
}

/// `(Σ_j (2^{js} ‖ψ_j(D) u‖_p)^q)^{1/q}` over the inhomogeneous family
/// `ψ_0 = ρ`, `ψ_j = ψ(2^{-j}·)`, for every `j` that meets the box.
pub fn besov_norm(
    u: &GridFunction,
    p: Exponent,
    q: Exponent,
    s: f64,
    partition: &DyadicPartition,
) -> NormValue {
    let spectrum = u.fourier();
    let terms = besov_terms(&spectrum, p, s, partition);
    let value = weighted_power_sum(terms.iter().copied(), 1.0, q);
    NormValue::new(value, spectral_truncation_mass(&spectrum))
}

/// Weighted dyadic pieces `2^{js} ‖ψ_j(D) u‖_p`, `j = 0, 1, …`.
pub fn besov_terms(
    spectrum: &GridFunction,
    p: Exponent,
    s: f64,
    partition: &DyadicPartition,
) -> Vec<f64> {
    let grid = spectrum.grid();
    let side = spectrum.side();
    let radii = grid.radii(side);
    let max_radius = radii.iter().fold(0.0_f64, |m, &r| m.max(r));
    let count = partition.pieces_to_cover(max_radius);
    (0..count)
        .map(|j| {
            let weight = 2.0_f64.powf(j as f64 * s);
            let piece: Vec<Complex64> = spectrum
                .samples()
                .iter()
                .zip(&radii)
                .map(|(&v, &r)| v * partition.inhomogeneous_radial(j, r))
                .collect();
            weight * piece_norm(spectrum, piece, p)
        })
        .collect()
}

/// `‖F^{-1}[piece]‖_p` for a spectral piece given on `spectrum`'s side.
fn piece_norm(spectrum: &GridFunction, piece: Vec<Complex64>, p: Exponent) -> f64 {
    if piece.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
        return 0.0;
    }
    if p.is_two() {
        return plancherel(spectrum.grid()) * lp_norm_samples(&piece, spectrum.cell_volume(), p);
    }
    let back = spectrum.with_samples(piece).fourier_inverse();
    lp_norm_samples(back.samples(), back.cell_volume(), p)
}

/// Node indices along one axis within `radius` of `center`.
fn axis_window(grid: &Grid, side: Side, center: f64, radius: f64) -> Range<usize> {
    let d = grid.side_spacing(side);
    let half = (grid.points() / 2) as f64;
    let lo = ((center - radius) / d + half).ceil().max(0.0) as usize;
    let hi = ((center + radius) / d + half)
        .floor()
        .min((grid.points() - 1) as f64);
    if hi < 0.0 || (lo as f64) > hi {
        return 0..0;
    }
    lo..hi as usize + 1
}

/// One lattice cell `k` with its pieces `φ(y - k) û(y)` in sparse form.
struct Cell {
    k: [i64; 2],
    nodes: Vec<(usize, Complex64)>,
}

fn lattice_cells(spectrum: &GridFunction, partition: &UniformPartition) -> Result<Vec<Cell>> {
    let grid = spectrum.grid();
    let dim = grid.dim();
    if partition.dim() != dim {
        return Err(Error::GridMismatch(alloc::format!(
            "uniform partition of dimension {} on a {dim}D grid",
            partition.dim()
        )));
    }
    let side = spectrum.side();
    let k_max = grid.side_half_width(side).ceil() as i64 + 1;
    let samples = spectrum.samples();
    let mut cells = Vec::new();
    let ks: Vec<i64> = (-k_max..=k_max).collect();
    let mut visit = |k: [i64; 2]| {
        let mut nodes = Vec::new();
        let r0 = axis_window(grid, side, k[0] as f64, 1.0);
        if dim == 1 {
            for i in r0 {
                let y = grid.node(side, i);
                let w = partition.phi(&[y - k[0] as f64]);
                if w != 0.0 {
                    nodes.push((i, samples[i] * w));
                }
            }
        } else {
            let r1 = axis_window(grid, side, k[1] as f64, 1.0);
            for a in r0 {
                let ya = UniformPartition::theta(grid.node(side, a) - k[0] as f64);
                if ya == 0.0 {
                    continue;
                }
                for b in r1.clone() {
                    let yb = UniformPartition::theta(grid.node(side, b) - k[1] as f64);
                    if yb != 0.0 {
                        let flat = grid.flatten([a, b]);
                        nodes.push((flat, samples[flat] * (ya * yb)));
                    }
                }
            }
        }
        if !nodes.is_empty() {
            cells.push(Cell { k, nodes });
        }
    };
    if dim == 1 {
        for &k in &ks {
            visit([k, 0]);
        }
    } else {
        for &k0 in &ks {
            for &k1 in &ks {
                visit([k0, k1]);
            }
        }
    }
    Ok(cells)
}

/// `(Σ_k ((1 + |k|)^s ‖φ(D - k) u‖_p)^q)^{1/q}` over every lattice cell that
/// meets the box (`|k|_∞ ≤ ceil(Ξ') + 1`).
pub fn modulation_norm(
    u: &GridFunction,
    p: Exponent,
    q: Exponent,
    s: f64,
    partition: &UniformPartition,
) -> Result<NormValue> {
    let spectrum = u.fourier();
    let terms = modulation_terms(&spectrum, p, s, partition)?;
    let value = weighted_power_sum(terms.iter().map(|t| t.1), 1.0, q);
    Ok(NormValue::new(value, spectral_truncation_mass(&spectrum)))
}

/// Weighted cell norms `(k, (1 + |k|)^s ‖φ(D - k) u‖_p)` for nonzero cells.
pub fn modulation_terms(
    spectrum: &GridFunction,
    p: Exponent,
    s: f64,
    partition: &UniformPartition,
) -> Result<Vec<([i64; 2], f64)>> {
    let grid = spectrum.grid();
    let dim = grid.dim();
    let cells = lattice_cells(spectrum, partition)?;
    let weight_of = |k: [i64; 2]| {
        let r = k[..dim].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        (1.0 + r).powf(s)
    };
    let volume = spectrum.cell_volume();
    let l2: Vec<f64> = cells
        .iter()
        .map(|c| {
            let sum: f64 = c.nodes.iter().map(|(_, v)| v.norm_sqr()).sum();
            plancherel(grid) * (volume * sum).sqrt()
        })
        .collect();
    if p.is_two() {
        return Ok(cells
            .iter()
            .zip(&l2)
            .map(|(c, &n)| (c.k, weight_of(c.k) * n))
            .collect());
    }
    let largest = l2.iter().fold(0.0_f64, |m, &v| m.max(v));
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut out = Vec::with_capacity(cells.len());
    for (cell, &n2) in cells.iter().zip(&l2) {
        if n2 <= NEGLIGIBLE_CELL * largest {
            continue;
        }
        for &(i, v) in &cell.nodes {
            buf[i] = v;
        }
        let back = spectrum.with_samples(buf.clone()).fourier_inverse();
        for &(i, _) in &cell.nodes {
            buf[i] = Complex64::new(0.0, 0.0);
        }
        let norm = lp_norm_samples(back.samples(), back.cell_volume(), p);
        out.push((cell.k, weight_of(cell.k) * norm));
    }
    Ok(out)
}

/// `(∫ (∫ |V_g u(x, y)|^p dx)^{q/p} (1 + |y|²)^{sq/2} dy)^{1/q}` with
/// `V_g u(x, y) = ∫ u(t) conj(g(t - x)) e^{-iy·t} dt`, `x` sampled every
/// `stride` nodes per axis.
///
/// The `x`-quadrature is checked by recomputing on every second sampled
/// node; a relative difference above 5% is an error.
pub fn stft_modulation_norm(
    u: &GridFunction,
    p: Exponent,
    q: Exponent,
    s: f64,
    window: &Window,
    stride: usize,
) -> Result<NormValue> {
    let grid = u.grid();
    if window.g.grid() != grid || window.g.side() != u.side() {
        return Err(Error::GridMismatch(
            "window and input live on different grids or sides".into(),
        ));
    }
    let n = grid.points();
    if stride == 0 || stride > n / 2 || n % stride != 0 {
        return Err(Error::invalid(
            "stft_stride",
            alloc::format!("stride {stride} must divide N = {n} and be at most N/2"),
        ));
    }
    let dim = grid.dim();
    let offsets: Vec<[usize; 2]> = match dim {
        1 => (0..n).step_by(stride).map(|i| [i, 0]).collect(),
        _ => {
            let axis: Vec<usize> = (0..n).step_by(stride).collect();
            axis.iter()
                .flat_map(|&a| axis.iter().map(move |&b| [a, b]))
                .collect()
        }
    };
    let half = (n / 2) as i64;
    // acc_fine over all sampled x, acc_coarse over x at every second sampled node.
    let mut acc_fine = vec![0.0_f64; grid.len()];
    let mut acc_coarse = vec![0.0_f64; grid.len()];
    let conj_g: Vec<Complex64> = window.g.samples().iter().map(|v| v.conj()).collect();
    let conj_g = window.g.with_samples(conj_g);
    for off in &offsets {
        let shift: Vec<i64> = (0..dim).map(|a| off[a] as i64 - half).collect();
        let moved = conj_g.shifted(&shift);
        let product: Vec<Complex64> = u
            .samples()
            .iter()
            .zip(moved.samples())
            .map(|(a, b)| a * b)
            .collect();
        let v = u.with_samples(product).fourier();
        let coarse = (0..dim).all(|a| (off[a] / stride) % 2 == 0);
        for (i, z) in v.samples().iter().enumerate() {
            let m = z.norm();
            let term = if p.is_infinite() {
                m
            } else {
                m.powf(p.value())
            };
            accumulate(&mut acc_fine[i], term, p);
            if coarse {
                accumulate(&mut acc_coarse[i], term, p);
            }
        }
    }
    let x_cell = (stride as f64 * grid.side_spacing(u.side())).powi(dim as i32);
    let spectral = u.fourier();
    let finish = |acc: &[f64], x_weight: f64| -> f64 {
        let terms = acc.iter().enumerate().map(|(i, &a)| {
            let inner = if p.is_infinite() {
                a
            } else {
                (x_weight * a).powf(1.0 / p.value())
            };
            let y = spectral.grid().coords(spectral.side(), i);
            inner * (1.0 + sq_norm(&y[..dim])).powf(s / 2.0)
        });
        let terms: Vec<f64> = terms.collect();
        weighted_power_sum(terms.iter().copied(), spectral.cell_volume(), q)
    };
    let fine = finish(&acc_fine, x_cell);
    let coarse = finish(&acc_coarse, x_cell * 2f64.powi(dim as i32));
    let estimate = if fine == 0.0 {
        0.0
    } else {
        (fine - coarse).abs() / fine
    };
    if estimate > 0.05 {
        return Err(Error::StrideTooCoarse { stride, estimate });
    }
    Ok(NormValue::new(fine, spectral_truncation_mass(&spectral)))
}

fn accumulate(acc: &mut f64, term: f64, p: Exponent) {
    if p.is_infinite() {
        *acc = acc.max(term);
    } else {
        *acc += term;
    }
}

/// `(Σ_j (2^{js} ‖ψ_j U‖_p)^q)^{1/q}` with `ψ_j` applied pointwise on the
/// side where `U` lives.
pub fn herz_norm(
    u: &GridFunction,
    p: Exponent,
    q: Exponent,
    s: f64,
    partition: &DyadicPartition,
) -> NormValue {
    let terms = herz_terms(u, p, s, partition);
    let value = weighted_power_sum(terms.iter().copied(), 1.0, q);
    // Own-side truncation: energy of U itself in the outer half of its box.
    NormValue::new(value, spectral_truncation_mass(u))
}

/// Weighted pieces `2^{js} ‖ψ_j U‖_p`, `j = 0, 1, …`.
pub fn herz_terms(u: &GridFunction, p: Exponent, s: f64, partition: &DyadicPartition) -> Vec<f64> {
    let grid = u.grid();
    let radii = grid.radii(u.side());
    let max_radius = radii.iter().fold(0.0_f64, |m, &r| m.max(r));
    let count = partition.pieces_to_cover(max_radius);
    (0..count)
        .map(|j| {
            let piece: Vec<Complex64> = u
                .samples()
                .iter()
                .zip(&radii)
                .map(|(&v, &r)| v * partition.inhomogeneous_radial(j, r))
                .collect();
            2.0_f64.powf(j as f64 * s) * lp_norm_samples(&piece, u.cell_volume(), p)
        })
        .collect()
}

/// Riesz transforms `R_l u = F^{-1}[-i y_l/|y| û]`, with the multiplier set
/// to 0 at `y = 0`.
pub fn riesz_transforms(u: &GridFunction) -> Vec<GridFunction> {
    let spectrum = u.fourier();
    (0..u.grid().dim())
        .map(|l| {
            spectrum
                .multiply_by(|y| {
                    let r = sq_norm(y).sqrt();
                    if r == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, -y[l] / r)
                    }
                })
                .fourier_inverse()
        })
        .collect()
}

/// `H¹` norm of `u` by the chosen estimator.
///
/// `Maximal` takes `sup_t |η_t * u|` over `t = 2^l`, `|l| ≤ levels`, with
/// `η` the unit-mass Gaussian, and is a lower bound that grows with `levels`.
pub fn hardy_norm(u: &GridFunction, method: HardyMethod, levels: u32) -> f64 {
    match method {
        HardyMethod::Riesz => {
            let l1 = lp_norm_samples(u.samples(), u.cell_volume(), Exponent::ONE);
            l1 + riesz_transforms(u)
                .iter()
                .map(|r| lp_norm_samples(r.samples(), r.cell_volume(), Exponent::ONE))
                .sum::<f64>()
        }
        HardyMethod::Maximal => {
            let spectrum = u.fourier();
            let mut sup = vec![0.0_f64; u.grid().len()];
            let levels = levels as i32;
            for l in -levels..=levels {
                let t2 = 4.0_f64.powi(l);
                let smoothed = spectrum
                    .multiply_by(|y| Complex64::new((-0.5 * t2 * sq_norm(y)).exp(), 0.0))
                    .fourier_inverse();
                for (m, v) in sup.iter_mut().zip(smoothed.samples()) {
                    *m = m.max(v.norm());
                }
            }
            u.cell_volume() * sup.iter().sum::<f64>()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_1d(n: usize, l: f64) -> GridFunction {
        let g = Grid::new(1, n, l).unwrap();
        GridFunction::from_real_fn(&g, Side::Space, |x| (-x[0] * x[0] / 2.0).exp())
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let f = gaussian_1d(512, 16.0);
        let l2 = lp_norm_samples(f.samples(), f.cell_volume(), Exponent::TWO);
        assert!((sobolev_norm(&f, 0.0) - l2).abs() < 1e-10 * l2);
    }

    #[test]
    fn flq_of_gaussian() {
        let f = gaussian_1d(1024, 32.0);
        assert!((flq_norm(&f, Exponent::ONE) - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn axis_window_bounds() {
        let g = Grid::new(1, 16, PI).unwrap();
        // Frequency nodes -8..7 with unit spacing.
        assert_eq!(axis_window(&g, Side::Frequency, 0.0, 1.0), 7..10);
        assert_eq!(axis_window(&g, Side::Frequency, 7.0, 1.0), 14..16);
        assert!(axis_window(&g, Side::Frequency, 20.0, 1.0).is_empty());
    }

    #[test]
    fn stft_of_window_matches_gaussian_integral() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let w = Window::gaussian(&g, Side::Space).unwrap();
        let v = stft_modulation_norm(&w.g, Exponent::TWO, Exponent::TWO, 0.0, &w, 1).unwrap();
        // |V_g g(x, ξ)| = e^{-(x² + ξ²)/4}; its L² norm over ℝ² is √(2π).
        assert!((v.value - (2.0 * PI).sqrt()).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn maximal_dominates_l1() {
        let f = gaussian_1d(512, 16.0);
        let l1 = lp_norm_samples(f.samples(), f.cell_volume(), Exponent::ONE);
        assert!(hardy_norm(&f, HardyMethod::Maximal, 10) >= l1 * (1.0 - 1e-12));
    }
}
