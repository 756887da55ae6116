//! Dyadic symbol pieces, boundedness conditions and kernel estimates.
//!
//! A piece is `m_j(ξ) = ψ(ξ) m(2^j ξ)`: the symbol on the annulus
//! `2^{j-1} ≤ |ξ| ≤ 2^{j+1}` pulled back to the unit annulus. The symbol is
//! evaluated exactly at the rescaled nodes, never interpolated. Its kernel is
//! `K_j = F^{-1} m_j`.
//!
//! Per-`j` work is exposed as standalone functions ([`condition_row`],
//! [`kernel_row`]) so callers can evaluate rows concurrently and assemble
//! them in `j` order with [`ConditionReport::from_rows`] and
//! [`KernelDiagnostics::from_rows`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::exponent::Exponent;
use crate::grid::{lp_norm_samples, Grid, GridFunction, GridParams, Side};
use crate::norms::{besov_norm, herz_norm, modulation_norm, sobolev_norm, NormValue, Warning};
use crate::partitions::{DyadicPartition, Partitions};
use crate::symbol::Symbol;
use crate::{Error, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_j_range(j_range: (i32, i32)) -> Result<()> {
    if j_range.0 > j_range.1 {
        return Err(Error::invalid(
            "j_range",
            format!("[{}, {}] is empty", j_range.0, j_range.1),
        ));
    }
    Ok(())
}

fn not_evaluable<S: Symbol + ?Sized>(m: &S, point: &[f64]) -> Error {
    Error::NotEvaluable {
        label: m.label(),
        point: point.to_vec(),
    }
}

/// `m_j` sampled on the frequency nodes of a reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPiece {
    pub j: i32,
    pub values: GridFunction,
    pub source: String,
}

/// `m_j(ξ) = ψ(ξ) m(2^j ξ)`; `m` is only evaluated where `ψ(ξ) ≠ 0`.
pub fn extract_piece<S: Symbol + ?Sized>(
    m: &S,
    j: i32,
    partition: &DyadicPartition,
    ref_grid: &Grid,
) -> Result<SymbolPiece> {
    let scale = 2.0_f64.powi(j);
    let dim = ref_grid.dim();
    let mut values = GridFunction::zeros(ref_grid, Side::Frequency);
    let samples = values.samples_mut();
    for (i, slot) in samples.iter_mut().enumerate() {
        let c = ref_grid.coords(Side::Frequency, i);
        let xi = &c[..dim];
        let w = partition.psi(xi);
        if w == 0.0 {
            continue;
        }
        let mut at = [0.0; 2];
        for a in 0..dim {
            at[a] = scale * xi[a];
        }
        let at = &at[..dim];
        if !m.is_evaluable(at) {
            return Err(not_evaluable(m, at));
        }
        *slot = m.eval(at) * w;
    }
    Ok(SymbolPiece {
        j,
        values,
        source: m.label(),
    })
}

/// The kernel `K_j = F^{-1} m_j` on the space side of the reference grid.
pub fn piece_kernel(piece: &SymbolPiece) -> GridFunction {
    piece.values.fourier_inverse()
}

/// Which norm of `m_j` a condition column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    /// `‖m_j‖_{L²_s}`
    SobolevS,
    /// `‖m_j‖_{B^{2,1}_{n/2}}`
    BesovN211,
    /// `‖m_j‖_{M^{2,1}_s}`
    ModulationS,
    /// `‖\widehat{m_j}‖_{K^{1,1}_s}`
    HerzS,
    /// `‖m_j‖_{M^{p,1}_s}`
    ModulationP1,
}

impl Column {
    pub const ALL: [Column; 5] = [
        Column::SobolevS,
        Column::BesovN211,
        Column::ModulationS,
        Column::HerzS,
        Column::ModulationP1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::SobolevS => "sobolev_s",
            Column::BesovN211 => "besov_n2_11",
            Column::ModulationS => "modulation_s",
            Column::HerzS => "herz_s",
            Column::ModulationP1 => "modulation_p1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellWarning {
    pub column: Column,
    pub warning: Warning,
}

/// One `j` of a [`ConditionReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub j: i32,
    pub sobolev_s: f64,
    pub besov_n2_11: f64,
    pub modulation_s: f64,
    pub herz_s: f64,
    pub modulation_p1: f64,
    /// Largest truncation mass over the five cells.
    pub truncation_mass: f64,
    pub warnings: Vec<CellWarning>,
}

impl ConditionRow {
    pub fn get(&self, column: Column) -> f64 {
        match column {
            Column::SobolevS => self.sobolev_s,
            Column::BesovN211 => self.besov_n2_11,
            Column::ModulationS => self.modulation_s,
            Column::HerzS => self.herz_s,
            Column::ModulationP1 => self.modulation_p1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEntry {
    pub value: f64,
    pub argmax_j: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSups {
    pub sobolev_s: SupEntry,
    pub besov_n2_11: SupEntry,
    pub modulation_s: SupEntry,
    pub herz_s: SupEntry,
    pub modulation_p1: SupEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub symbol: String,
    pub s: f64,
    pub p: Exponent,
    pub j_range: (i32, i32),
    pub grid: GridParams,
    pub per_j: Vec<ConditionRow>,
    pub sup_values: ConditionSups,
}

fn sup_of(rows: &[ConditionRow], column: Column) -> SupEntry {
    let mut best = SupEntry {
        value: f64::NEG_INFINITY,
        argmax_j: rows[0].j,
    };
    for r in rows {
        let v = r.get(column);
        // NaN propagates as the sup so a broken cell cannot hide.
        if v > best.value || v.is_nan() && !best.value.is_nan() {
            best = SupEntry {
                value: v,
                argmax_j: r.j,
            };
        }
    }
    best
}

impl ConditionReport {
    /// Assembles rows (any order) into a report sorted by `j`.
    pub fn from_rows<S: Symbol + ?Sized>(
        m: &S,
        s: f64,
        p: Exponent,
        j_range: (i32, i32),
        grid: &Grid,
        mut rows: Vec<ConditionRow>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("j_range", "no rows"));
        }
        rows.sort_by_key(|r| r.j);
        let sup_values = ConditionSups {
            sobolev_s: sup_of(&rows, Column::SobolevS),
            besov_n2_11: sup_of(&rows, Column::BesovN211),
            modulation_s: sup_of(&rows, Column::ModulationS),
            herz_s: sup_of(&rows, Column::HerzS),
            modulation_p1: sup_of(&rows, Column::ModulationP1),
        };
        Ok(ConditionReport {
            symbol: m.label(),
            s,
            p,
            j_range,
            grid: grid.params(),
            per_j: rows,
            sup_values,
        })
    }

    pub fn sup(&self, column: Column) -> SupEntry {
        match column {
            Column::SobolevS => self.sup_values.sobolev_s,
            Column::BesovN211 => self.sup_values.besov_n2_11,
            Column::ModulationS => self.sup_values.modulation_s,
            Column::HerzS => self.sup_values.herz_s,
            Column::ModulationP1 => self.sup_values.modulation_p1,
        }
    }
}

/// The five condition norms of one piece.
pub fn condition_row<S: Symbol + ?Sized>(
    m: &S,
    j: i32,
    s: f64,
    p: Exponent,
    partitions: &Partitions,
    ref_grid: &Grid,
) -> Result<ConditionRow> {
    let piece = extract_piece(m, j, &partitions.dyadic, ref_grid)?;
    piece_condition_row(&piece, s, p, partitions)
}

/// [`condition_row`] for an already extracted piece.
pub fn piece_condition_row(
    piece: &SymbolPiece,
    s: f64,
    p: Exponent,
    partitions: &Partitions,
) -> Result<ConditionRow> {
    let m_j = &piece.values;
    let n = m_j.grid().dim() as f64;
    let sobolev = NormValue {
        value: sobolev_norm(m_j, s),
        warnings: Vec::new(),
        truncation_mass: crate::norms::truncation_mass(m_j),
    };
    let besov = besov_norm(
        m_j,
        Exponent::TWO,
        Exponent::ONE,
        n / 2.0,
        &partitions.dyadic,
    );
    let modulation = modulation_norm(m_j, Exponent::TWO, Exponent::ONE, s, &partitions.uniform)?;
    let herz = herz_norm(
        &m_j.fourier(),
        Exponent::ONE,
        Exponent::ONE,
        s,
        &partitions.dyadic,
    );
    let modulation_p = if p.is_two() {
        modulation.clone()
    } else {
        modulation_norm(m_j, p, Exponent::ONE, s, &partitions.uniform)?
    };
    let cells = [
        (Column::SobolevS, &sobolev),
        (Column::BesovN211, &besov),
        (Column::ModulationS, &modulation),
        (Column::HerzS, &herz),
        (Column::ModulationP1, &modulation_p),
    ];
    let mut warnings = Vec::new();
    let mut truncation_mass = 0.0_f64;
    for (column, v) in cells {
        truncation_mass = truncation_mass.max(v.truncation_mass);
        warnings.extend(v.warnings.iter().map(|w| CellWarning {
            column,
            warning: w.clone(),
        }));
    }
    Ok(ConditionRow {
        j: piece.j,
        sobolev_s: sobolev.value,
        besov_n2_11: besov.value,
        modulation_s: modulation.value,
        herz_s: herz.value,
        modulation_p1: modulation_p.value,
        truncation_mass,
        warnings,
    })
}

/// All five conditions for `j` in `j_range`, evaluated in order.
pub fn condition_report<S: Symbol + ?Sized>(
    m: &S,
    s: f64,
    p: Exponent,
    j_range: (i32, i32),
    partitions: &Partitions,
    ref_grid: &Grid,
) -> Result<ConditionReport> {
    check_j_range(j_range)?;
    let rows = (j_range.0..=j_range.1)
        .map(|j| condition_row(m, j, s, p, partitions, ref_grid))
        .collect::<Result<Vec<_>>>()?;
    ConditionReport::from_rows(m, s, p, j_range, ref_grid, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MihlinReport {
    /// `max_{|α| ≤ order} sup_ξ |ξ|^{|α|} |∂^α m(ξ)|`, or `+∞` if differencing diverged.
    pub value: f64,
    pub order: usize,
    /// The sup for each derivative order `0..=order`.
    pub per_order: Vec<f64>,
    /// Node where the overall sup is attained.
    pub argmax: Vec<f64>,
    /// Some finite difference failed to settle under step halving.
    pub diverged: bool,
}

/// Relative finite-difference step.
const FD_STEP: f64 = 1e-4;

/// Multi-indices of order exactly `k` in `dim` variables.
fn multi_indices(dim: usize, k: usize) -> Vec<[u8; 2]> {
    let mut out = Vec::new();
    match dim {
        1 => out.push([k as u8, 0]),
        _ => {
            for a in 0..=k {
                out.push([a as u8, (k - a) as u8]);
            }
        }
    }
    out
}

/// Central difference of `∂^α m` at `xi` with step `h`.
fn central_difference<S: Symbol + ?Sized>(
    m: &S,
    xi: &[f64],
    alpha: &[u8],
    h: f64,
) -> Result<Complex64> {
    let dim = xi.len();
    let at = |offsets: &[(usize, f64)]| -> Result<Complex64> {
        let mut p = [0.0; 2];
        p[..dim].copy_from_slice(xi);
        for &(axis, d) in offsets {
            p[axis] += d;
        }
        if !m.is_evaluable(&p[..dim]) {
            return Err(not_evaluable(m, &p[..dim]));
        }
        Ok(m.eval(&p[..dim]))
    };
    let axes: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(axis, &k)| core::iter::repeat(axis).take(k as usize))
        .collect();
    Ok(match axes.as_slice() {
        [] => at(&[])?,
        &[i] => (at(&[(i, h)])? - at(&[(i, -h)])?) / (2.0 * h),
        &[i, j] if i == j => (at(&[(i, h)])? - at(&[])? * 2.0 + at(&[(i, -h)])?) / (h * h),
        &[i, j] => {
            (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h)
        }
        _ => {
            return Err(Error::invalid(
                "order",
                "derivatives above order 2 are not supported",
            ))
        }
    })
}

/// Mihlin supremum over the nonzero frequency nodes of `ref_grid`.
///
/// Closed-form partials are used when the symbol provides them; otherwise a
/// central difference with step `10⁻⁴|ξ|` is refined once by Richardson
/// extrapolation. If halving the step changes the scaled derivative by more
/// than a quarter of its size the result is `+∞`.
pub fn mihlin_sup<S: Symbol + ?Sized>(
    m: &S,
    ref_grid: &Grid,
    order: Option<usize>,
) -> Result<MihlinReport> {
    let dim = ref_grid.dim();
    let order = order.unwrap_or(dim / 2 + 1);
    if order > 2 {
        return Err(Error::invalid(
            "order",
            format!("order {order} > 2 is not supported"),
        ));
    }
    let mut per_order = vec![0.0_f64; order + 1];
    let mut best = (0.0_f64, Vec::new());
    let mut diverged = false;
    for i in 0..ref_grid.len() {
        let c = ref_grid.coords(Side::Frequency, i);
        let xi = &c[..dim];
        let r = norm(xi);
        if r == 0.0 {
            continue;
        }
        if !m.is_evaluable(xi) {
            return Err(not_evaluable(m, xi));
        }
        for (k, slot) in per_order.iter_mut().enumerate() {
            let scale = r.powi(k as i32);
            for alpha in multi_indices(dim, k) {
                let alpha = &alpha[..dim];
                let d = match m.partial(xi, alpha) {
                    Some(v) => v,
                    None if k == 0 => m.eval(xi),
                    None => {
                        let h = FD_STEP * r;
                        let coarse = central_difference(m, xi, alpha, h)?;
                        let fine = central_difference(m, xi, alpha, h / 2.0)?;
                        if scale * (fine - coarse).norm() > 0.25 * (scale * fine.norm()).max(1.0) {
                            diverged = true;
                        }
                        (fine * 4.0 - coarse) / 3.0
                    }
                };
                let v = scale * d.norm();
                if v > *slot {
                    *slot = v;
                }
                if v > best.0 {
                    best = (v, xi.to_vec());
                }
            }
        }
    }
    let value = if diverged {
        f64::INFINITY
    } else {
        per_order.iter().fold(0.0_f64, |a, &b| a.max(b))
    };
    Ok(MihlinReport {
        value,
        order,
        per_order,
        argmax: best.1,
        diverged,
    })
}

/// `m(D) f = F^{-1}[m f̂]` on the grid of `f`.
pub fn apply_multiplier<S: Symbol + ?Sized>(m: &S, f: &GridFunction) -> Result<GridFunction> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch {
            expected: Side::Space,
            found: f.side(),
        });
    }
    let spectrum = f.fourier();
    let mut out = spectrum.clone();
    let grid = f.grid();
    let dim = grid.dim();
    for (i, v) in out.samples_mut().iter_mut().enumerate() {
        let c = grid.coords(Side::Frequency, i);
        if !m.is_evaluable(&c[..dim]) {
            return Err(not_evaluable(m, &c[..dim]));
        }
        *v *= m.eval(&c[..dim]);
    }
    Ok(out.fourier_inverse())
}

/// `Σ_{|x| > R} |K(x)| hⁿ` for each `R` in `radii`.
fn tails(kernel: &GridFunction, radii: &[f64]) -> Vec<f64> {
    let grid = kernel.grid();
    let r = grid.radii(Side::Space);
    let w = kernel.cell_volume();
    radii
        .iter()
        .map(|&big_r| {
            kernel
                .samples()
                .iter()
                .zip(&r)
                .filter(|(_, &x)| x > big_r)
                .map(|(v, _)| v.norm())
                .sum::<f64>()
                * w
        })
        .collect()
}

/// `Σ_l ‖∂_l F^{-1}[values]‖₁`, computed spectrally.
fn gradient_l1(values: &GridFunction) -> f64 {
    let dim = values.grid().dim();
    (0..dim)
        .map(|l| {
            let d = values
                .multiply_by(|xi| Complex64::new(0.0, xi[l]))
                .fourier_inverse();
            lp_norm_samples(d.samples(), d.cell_volume(), Exponent::ONE)
        })
        .sum()
}

/// Relative floor below which a tail is treated as noise in the slope fit.
pub const TAIL_NOISE_FLOOR: f64 = 1e-14;

/// Least-squares slope of `log tail` against `log R`, over the tails above
/// the noise floor (relative to `‖K_j‖₁`). `None` with fewer than two points.
pub fn tail_slope(radii: &[f64], tails: &[f64], k_l1: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(tails)
        .filter(|(_, &t)| t > TAIL_NOISE_FLOOR * k_l1 && t > 0.0)
        .map(|(&r, &t)| (r.ln(), t.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// One `j` of [`KernelDiagnostics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub j: i32,
    /// `‖K_j‖₁`
    pub k_l1: f64,
    /// `Σ_l ‖∂_l K_j‖₁`
    pub grad_k_l1: f64,
    /// `grad_k_l1 / k_l1`
    pub bernstein_ratio: f64,
    /// `∫_{|x| > R} |K_j|` for each radius of the report.
    pub tails: Vec<f64>,
    pub tail_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub symbol: String,
    pub j_range: (i32, i32),
    pub grid: GridParams,
    pub radii: Vec<f64>,
    pub per_j: Vec<KernelRow>,
    /// `sup_j ‖K_j‖₁`
    pub hormander_sup: f64,
    /// Largest (least negative) per-`j` tail slope.
    pub tail_slope: Option<f64>,
}

/// Sorts, deduplicates and range-checks tail radii against `0 < R < L/2`.
pub fn validate_radii(radii: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let mut r = radii.to_vec();
    if r.is_empty() {
        return Err(Error::invalid("radii", "at least one radius is required"));
    }
    r.sort_by(|a, b| a.total_cmp(b));
    r.dedup();
    let limit = grid.half_width() / 2.0;
    if let Some(bad) = r.iter().find(|&&v| !(v > 0.0 && v < limit)) {
        return Err(Error::invalid(
            "radii",
            format!("radius {bad} is outside (0, {limit})"),
        ));
    }
    Ok(r)
}

/// Kernel row of one piece; `radii` must already be validated.
pub fn kernel_row<S: Symbol + ?Sized>(
    m: &S,
    j: i32,
    partition: &DyadicPartition,
    ref_grid: &Grid,
    radii: &[f64],
) -> Result<KernelRow> {
    let piece = extract_piece(m, j, partition, ref_grid)?;
    let kernel = piece_kernel(&piece);
    let k_l1 = lp_norm_samples(kernel.samples(), kernel.cell_volume(), Exponent::ONE);
    let grad_k_l1 = gradient_l1(&piece.values);
    let tails = tails(&kernel, radii);
    let tail_slope = tail_slope(radii, &tails, k_l1);
    Ok(KernelRow {
        j,
        k_l1,
        grad_k_l1,
        bernstein_ratio: if k_l1 > 0.0 { grad_k_l1 / k_l1 } else { 0.0 },
        tails,
        tail_slope,
    })
}

impl KernelDiagnostics {
    pub fn from_rows<S: Symbol + ?Sized>(
        m: &S,
        j_range: (i32, i32),
        grid: &Grid,
        radii: Vec<f64>,
        mut rows: Vec<KernelRow>,
    ) -> Self {
        rows.sort_by_key(|r| r.j);
        let hormander_sup = rows.iter().fold(0.0_f64, |a, r| a.max(r.k_l1));
        let tail_slope = rows
            .iter()
            .filter_map(|r| r.tail_slope)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            });
        KernelDiagnostics {
            symbol: m.label(),
            j_range,
            grid: grid.params(),
            radii,
            per_j: rows,
            hormander_sup,
            tail_slope,
        }
    }
}

pub fn kernel_diagnostics<S: Symbol + ?Sized>(
    m: &S,
    j_range: (i32, i32),
    partition: &DyadicPartition,
    ref_grid: &Grid,
    radii: &[f64],
) -> Result<KernelDiagnostics> {
    check_j_range(j_range)?;
    let radii = validate_radii(radii, ref_grid)?;
    let rows = (j_range.0..=j_range.1)
        .map(|j| kernel_row(m, j, partition, ref_grid, &radii))
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelDiagnostics::from_rows(
        m, j_range, ref_grid, radii, rows,
    ))
}

/// Dyadic scales `j` whose band `ψ(2^{-j}·)` meets a nonzero frequency node.
pub fn grid_scales(grid: &Grid) -> (i32, i32) {
    let lo = grid.freq_spacing().log2().floor() as i32 - 1;
    let corner = grid.freq_half_width() * (grid.dim() as f64).sqrt();
    let hi = corner.log2().ceil() as i32 + 1;
    (lo, hi)
}

/// Largest `j` whose band `{2^{j-1} ≤ |ξ| ≤ 2^{j+1}}` lies inside the box.
/// Higher bands are cut by the Nyquist edge, so on the periodic grid they are
/// not smooth and their kernels carry Nyquist-scale oscillation.
pub fn top_resolved_scale(grid: &Grid) -> i32 {
    grid.freq_half_width().log2().floor() as i32 - 1
}

/// `P_j = F^{-1}[ψ(2^{-j}·) m]` on `grid`; zero when the band misses the grid.
fn dilated_piece<S: Symbol + ?Sized>(
    m: &S,
    j: i32,
    partition: &DyadicPartition,
    grid: &Grid,
) -> Result<GridFunction> {
    let dim = grid.dim();
    let mut spectrum = GridFunction::zeros(grid, Side::Frequency);
    let mut any = false;
    for (i, slot) in spectrum.samples_mut().iter_mut().enumerate() {
        let c = grid.coords(Side::Frequency, i);
        let xi = &c[..dim];
        let w = partition.dilate_radial(j, norm(xi));
        if w == 0.0 {
            continue;
        }
        if !m.is_evaluable(xi) {
            return Err(not_evaluable(m, xi));
        }
        *slot = m.eval(xi) * w;
        any = true;
    }
    Ok(if any {
        spectrum.fourier_inverse()
    } else {
        GridFunction::zeros(grid, Side::Space)
    })
}

/// The truncated kernel `K = Σ P_j` over `j ∈ j_range` with `j` at most
/// [`top_resolved_scale`], its pieces, and the `L¹` norms of the grid pieces
/// left out of the sum.
pub struct AssembledKernel {
    pub kernel: GridFunction,
    pub pieces: Vec<(i32, GridFunction)>,
    /// `Σ ‖P_j‖₁` over excluded `j` that meet the grid.
    pub excluded_l1: f64,
}

pub fn assemble_kernel<S: Symbol + ?Sized>(
    m: &S,
    j_range: (i32, i32),
    partition: &DyadicPartition,
    grid: &Grid,
) -> Result<AssembledKernel> {
    check_j_range(j_range)?;
    let (lo, hi) = grid_scales(grid);
    let top = top_resolved_scale(grid);
    let mut kernel = GridFunction::zeros(grid, Side::Space);
    let mut pieces = Vec::new();
    let mut excluded_l1 = 0.0;
    for j in lo.min(j_range.0)..=hi.max(j_range.1) {
        let inside = j >= j_range.0 && j <= j_range.1 && j <= top;
        let on_grid = j >= lo && j <= hi;
        if !inside && !on_grid {
            continue;
        }
        let p = dilated_piece(m, j, partition, grid)?;
        if inside {
            for (k, v) in kernel.samples_mut().iter_mut().zip(p.samples()) {
                *k += v;
            }
            pieces.push((j, p));
        } else {
            excluded_l1 += lp_norm_samples(p.samples(), p.cell_volume(), Exponent::ONE);
        }
    }
    Ok(AssembledKernel {
        kernel,
        pieces,
        excluded_l1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderRow {
    /// Node offset of `y`.
    pub offset: Vec<i64>,
    pub y: Vec<f64>,
    /// `∫_{|x| > 2|y|} |K(x - y) - K(x)| dx`
    pub direct: f64,
    /// `Σ_j min(|y| ‖∇P_j‖₁, 2 ∫_{|x| > |y|} |P_j|)`
    pub proof_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub symbol: String,
    pub j_range: (i32, i32),
    pub grid: GridParams,
    pub per_y: Vec<HormanderRow>,
    /// Max of `direct` over the samples.
    pub sup: f64,
    /// Scales actually summed into `K`.
    pub j_used: Option<(i32, i32)>,
    /// Bound `2 Σ ‖P_j‖₁` on what the excluded grid pieces could add.
    pub truncation_bound: f64,
}

/// Direct Hörmander integral of the truncated kernel and the piecewise
/// bound from the mean-value and tail estimates, for each integer node
/// offset in `offsets`.
pub fn hormander_integral<S: Symbol + ?Sized>(
    m: &S,
    j_range: (i32, i32),
    partition: &DyadicPartition,
    grid: &Grid,
    offsets: &[Vec<i64>],
) -> Result<HormanderReport> {
    let dim = grid.dim();
    let h = grid.spacing();
    if offsets.is_empty() {
        return Err(Error::invalid("y", "at least one y sample is required"));
    }
    let radii = grid.radii(Side::Space);
    for off in offsets {
        if off.len() != dim {
            return Err(Error::invalid(
                "y",
                format!("offset {off:?} has the wrong dimension"),
            ));
        }
        let y = norm(&off.iter().map(|&v| v as f64 * h).collect::<Vec<_>>());
        if y == 0.0 {
            return Err(Error::invalid("y", "y = 0 is not allowed"));
        }
        if y >= grid.half_width() / 8.0 {
            return Err(Error::invalid("y", format!("|y| = {y} is not below L/8")));
        }
        let kept = radii.iter().filter(|&&r| r > 2.0 * y).count();
        if (kept as f64) < 0.1 * grid.len() as f64 {
            return Err(Error::invalid(
                "y",
                format!("mask for |y| = {y} keeps under 10% of the box"),
            ));
        }
    }
    let assembled = assemble_kernel(m, j_range, partition, grid)?;
    let weight = assembled.kernel.cell_volume();
    let grads: Vec<f64> = assembled
        .pieces
        .iter()
        .map(|(_, p)| gradient_l1(&p.fourier()))
        .collect();
    let per_y = offsets
        .iter()
        .map(|off| {
            let y: Vec<f64> = off.iter().map(|&v| v as f64 * h).collect();
            let ny = norm(&y);
            let shifted = assembled.kernel.shifted(off);
            let direct = assembled
                .kernel
                .samples()
                .iter()
                .zip(shifted.samples())
                .zip(&radii)
                .filter(|(_, &r)| r > 2.0 * ny)
                .map(|((a, b), _)| (b - a).norm())
                .sum::<f64>()
                * weight;
            let proof_bound = assembled
                .pieces
                .iter()
                .zip(&grads)
                .map(|((_, p), &g)| {
                    let tail = p
                        .samples()
                        .iter()
                        .zip(&radii)
                        .filter(|(_, &r)| r > ny)
                        .map(|(v, _)| v.norm())
                        .sum::<f64>()
                        * weight;
                    (ny * g).min(2.0 * tail)
                })
                .sum();
            HormanderRow {
                offset: off.clone(),
                y,
                direct,
                proof_bound,
            }
        })
        .collect::<Vec<_>>();
    let sup = per_y.iter().fold(0.0_f64, |a, r| a.max(r.direct));
    Ok(HormanderReport {
        symbol: m.label(),
        j_range,
        grid: grid.params(),
        per_y,
        sup,
        j_used: assembled
            .pieces
            .first()
            .zip(assembled.pieces.last())
            .map(|(a, b)| (a.0, b.0)),
        truncation_bound: 2.0 * assembled.excluded_l1,
    })
}

/// `∫_{R₁ ≤ |x| ≤ R₂} |K|` for the kernel truncated to `j_range`.
pub fn local_kernel_mass<S: Symbol + ?Sized>(
    m: &S,
    j_range: (i32, i32),
    partition: &DyadicPartition,
    grid: &Grid,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    if !(r1 > 0.0 && r2 > r1 && r2 < grid.half_width()) {
        return Err(Error::invalid(
            "radii",
            format!("need 0 < R1 < R2 < L, got {r1}, {r2}"),
        ));
    }
    let k = assemble_kernel(m, j_range, partition, grid)?.kernel;
    let radii = grid.radii(Side::Space);
    Ok(k.samples()
        .iter()
        .zip(&radii)
        .filter(|(_, &r)| r >= r1 && r <= r2)
        .map(|(v, _)| v.norm())
        .sum::<f64>()
        * k.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::symbol_catalog;
    use crate::symbol::FnSymbol;

    #[test]
    fn one_gives_psi() {
        let g = Grid::new(1, 512, 16.0).unwrap();
        let p = DyadicPartition::default();
        let one = symbol_catalog("one", &[], 1).unwrap();
        for j in [-5, 0, 7] {
            let piece = extract_piece(&one, j, &p, &g).unwrap();
            for (i, v) in piece.values.samples().iter().enumerate() {
                assert_eq!(v.re, p.psi(&[g.node(Side::Frequency, i)]));
                assert_eq!(v.im, 0.0);
            }
        }
    }

    #[test]
    fn fd_mihlin_matches_closed_form() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let closed = symbol_catalog("mihlin_poly", &[1.0], 1).unwrap();
        let fd = FnSymbol::new("poly", |x: &[f64]| {
            Complex64::new((1.0 + x[0] * x[0]).powf(-0.5), 0.0)
        });
        let a = mihlin_sup(&closed, &g, None).unwrap();
        let b = mihlin_sup(&fd, &g, None).unwrap();
        assert!(!b.diverged);
        assert!((a.value - b.value).abs() < 1e-4 * a.value);
    }

    #[test]
    fn slope_of_power_law() {
        let radii = [2.0, 4.0, 8.0, 16.0];
        let tails: Vec<f64> = radii.iter().map(|r: &f64| 3.0 * r.powf(-1.5)).collect();
        assert!((tail_slope(&radii, &tails, 1.0).unwrap() + 1.5).abs() < 1e-12);
        assert_eq!(tail_slope(&radii, &[1.0, 0.0, 0.0, 0.0], 1.0), None);
    }

    #[test]
    fn hormander_rejects_bad_offsets() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let p = DyadicPartition::default();
        let one = symbol_catalog("one", &[], 1).unwrap();
        assert!(hormander_integral(&one, (0, 0), &p, &g, &[vec![0]]).is_err());
        assert!(hormander_integral(&one, (0, 0), &p, &g, &[vec![40]]).is_err());
    }
}
