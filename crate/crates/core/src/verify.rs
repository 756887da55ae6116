//! Constant-tracking experiments for norm equivalences and embeddings.
//!
//! Every experiment evaluates a left and right norm on a list of inputs and
//! reports `ratio = lhs / rhs` with its range. Constants are measured, never
//! assumed; where a discrete constant is known a priori (the cell constant
//! of [`Mode::Embed110`]) it is reported as `bound` and checked.
//!
//! | mode         | inputs            | lhs                           | rhs                         |
//! |--------------|-------------------|-------------------------------|-----------------------------|
//! | `prop32`     | band-limited `f`  | `‖F‖_{M^{p,q}_s}`             | `‖(1+|x|²)^{s/2} F̂‖_q`      |
//! | `herz16`     | pieces `m_j`      | `‖\widehat{m_j}‖_{K^{1,1}_s}` | `‖m_j‖_{M^{2,1}_s}`         |
//! | `pnorm17`    | pieces `m_j`      | `‖m_j‖_{M^{p,1}_s}`           | `‖m_j‖_{M^{2,1}_s}`         |
//! | `embed110`   | any               | `‖û‖₁`                        | `‖u‖_{M^{2,1}_0}`           |
//! | `toft_chain` | any               | `‖u‖_{M^{2,1}_0}`             | `‖u‖_{B^{2,1}_{n/2}}`       |
//!
//! For `prop32` the compactly supported function is `F = f̂`, the spectrum of
//! a band-limited ensemble member, and `F̂` is its transform back on the space
//! side. `toft_chain` also reports the second link `‖u‖_{B^{2,1}_0} /
//! ‖u‖_{M^{2,1}_0}` as its `chain` table.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::exponent::Exponent;
use crate::fixtures::{ensemble_member, Band, EnsembleKind, EnsembleSpec};
use crate::grid::{lp_norm_samples, Grid, GridFunction, GridParams, Side};
use crate::multiplier::{apply_multiplier, extract_piece, SymbolPiece};
use crate::norms::{
    besov_norm, flq_norm, hardy_norm, herz_norm, modulation_norm, weighted_flq_norm, HardyMethod,
};
use crate::partitions::{Partitions, UniformPartition};
use crate::symbol::Symbol;
use crate::{Error, Result};

/// Slack, relative to the bound, before a ratio counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Prop32,
    Herz16,
    Pnorm17,
    Embed110,
    ToftChain,
}

impl Mode {
    pub fn parse(text: &str) -> Result<Mode> {
        Ok(match text.trim() {
            "prop32" => Mode::Prop32,
            "herz16" => Mode::Herz16,
            "pnorm17" => Mode::Pnorm17,
            "embed110" => Mode::Embed110,
            "toft_chain" => Mode::ToftChain,
            other => return Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Prop32 => "prop32",
            Mode::Herz16 => "herz16",
            Mode::Pnorm17 => "pnorm17",
            Mode::Embed110 => "embed110",
            Mode::ToftChain => "toft_chain",
        }
    }

    /// Whether the mode takes symbol pieces rather than an ensemble.
    pub fn takes_pieces(self) -> bool {
        matches!(self, Mode::Herz16 | Mode::Pnorm17)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioParams {
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
}

impl Default for RatioParams {
    fn default() -> Self {
        RatioParams {
            p: Exponent::TWO,
            q: Exponent::ONE,
            s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioEntry {
    pub fn new(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        RatioEntry {
            id: id.into(),
            lhs,
            rhs,
            ratio: lhs / rhs,
        }
    }
}

/// A list of ratios with its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub lhs: String,
    pub rhs: String,
    pub per_input: Vec<RatioEntry>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `ratio_max / ratio_min`
    pub ratio_spread: f64,
    /// A priori upper bound on every ratio, when one is known.
    pub bound: Option<f64>,
    /// Ratios above `bound` (or above the measured max when there is no
    /// bound) by more than [`VIOLATION_SLACK`].
    pub violations: usize,
}

impl RatioTable {
    pub fn new(
        lhs: impl Into<String>,
        rhs: impl Into<String>,
        per_input: Vec<RatioEntry>,
        bound: Option<f64>,
    ) -> Result<Self> {
        if per_input.is_empty() {
            return Err(Error::invalid("count", "no inputs"));
        }
        let ratio_min = per_input
            .iter()
            .map(|e| e.ratio)
            .fold(f64::INFINITY, f64::min);
        let ratio_max = per_input
            .iter()
            .map(|e| e.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let reference = bound.unwrap_or(ratio_max);
        let violations = per_input
            .iter()
            .filter(|e| !(e.ratio <= reference * (1.0 + VIOLATION_SLACK)))
            .count();
        Ok(RatioTable {
            lhs: lhs.into(),
            rhs: rhs.into(),
            per_input,
            ratio_min,
            ratio_max,
            ratio_spread: ratio_max / ratio_min,
            bound,
            violations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub mode: String,
    /// Ensemble or symbol the inputs came from.
    pub source: String,
    #[serde(flatten)]
    pub table: RatioTable,
    /// Second link of a chain of embeddings, if the mode has one.
    pub chain: Option<RatioTable>,
    pub grid: GridParams,
    pub seed: Option<u64>,
    pub params: RatioParams,
}

/// The primary entry and optional chain entry for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub primary: RatioEntry,
    pub chain: Option<RatioEntry>,
}

fn labels(mode: Mode, params: &RatioParams, dim: usize) -> (String, String) {
    let RatioParams { p, q, s } = *params;
    match mode {
        Mode::Prop32 => (
            format!("M^{{{p},{q}}}_{s}"),
            format!("FL^{q} weighted by (1+|x|^2)^({s}/2)"),
        ),
        Mode::Herz16 => (
            format!("K^{{1,1}}_{s} of the transform"),
            format!("M^{{2,1}}_{s}"),
        ),
        Mode::Pnorm17 => (format!("M^{{{p},1}}_{s}"), format!("M^{{2,1}}_{s}")),
        Mode::Embed110 => ("FL^1".into(), "M^{2,1}_0".into()),
        Mode::ToftChain => (
            "M^{2,1}_0".into(),
            format!("B^{{2,1}}_{}", dim as f64 / 2.0),
        ),
    }
}

/// `(2π)^{n/2} √(max_k #cell_k · Δⁿ)`: by Cauchy–Schwarz on each lattice
/// cell and discrete Plancherel, `‖û‖₁ ≤ C_cell ‖u‖_{M^{2,1}_0}` exactly.
pub fn cell_constant(grid: &Grid, side: Side) -> f64 {
    let spectral = side.dual();
    let d = grid.side_spacing(spectral);
    let dim = grid.dim();
    let per_axis = max_cell_nodes_1d(grid, spectral);
    let count = per_axis.pow(dim as u32) as f64;
    (2.0 * PI).powf(dim as f64 / 2.0) * (count * d.powi(dim as i32)).sqrt()
}

/// Most nodes any cell `|y - k| < 1` holds along one axis.
fn max_cell_nodes_1d(grid: &Grid, side: Side) -> usize {
    let k_max = grid.side_half_width(side).ceil() as i64 + 1;
    (-k_max..=k_max)
        .map(|k| {
            (0..grid.points())
                .filter(|&i| UniformPartition::theta(grid.node(side, i) - k as f64) != 0.0)
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Relative sup of `F` outside the band, for the band-limited modes.
fn band_leak(spectrum: &GridFunction, band: &Band) -> f64 {
    let max = spectrum.max_modulus();
    if max == 0.0 {
        return 0.0;
    }
    let grid = spectrum.grid();
    let dim = grid.dim();
    let outside = spectrum
        .samples()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let c = grid.coords(Side::Frequency, *i);
            !band.contains(&c[..dim])
        })
        .fold(0.0_f64, |m, (_, v)| m.max(v.norm()));
    outside / max
}

/// Band-limited inputs may leak at most this much (relative sup) outside the band.
pub const BAND_LEAK_TOLERANCE: f64 = 1e-13;

/// One ensemble input of an ensemble mode. `band` is required for `prop32`.
pub fn ensemble_entry(
    mode: Mode,
    id: &str,
    f: &GridFunction,
    band: Option<&Band>,
    params: &RatioParams,
    partitions: &Partitions,
) -> Result<ModeEntry> {
    let RatioParams { p, q, s } = *params;
    match mode {
        Mode::Prop32 => {
            let band = band.ok_or_else(|| Error::invalid("band", "prop32 needs a band"))?;
            if f.side() != Side::Space {
                return Err(Error::SideMismatch {
                    expected: Side::Space,
                    found: f.side(),
                });
            }
            let spectrum = f.fourier();
            let leak = band_leak(&spectrum, band);
            if leak > BAND_LEAK_TOLERANCE {
                return Err(Error::NotBandLimited {
                    id: id.into(),
                    leak,
                });
            }
            let lhs = modulation_norm(&spectrum, p, q, s, &partitions.uniform)?.value;
            let rhs = weighted_flq_norm(&spectrum, q, s);
            Ok(ModeEntry {
                primary: RatioEntry::new(id, lhs, rhs),
                chain: None,
            })
        }
        Mode::Embed110 => {
            let lhs = flq_norm(f, Exponent::ONE);
            let rhs =
                modulation_norm(f, Exponent::TWO, Exponent::ONE, 0.0, &partitions.uniform)?.value;
            Ok(ModeEntry {
                primary: RatioEntry::new(id, lhs, rhs),
                chain: None,
            })
        }
        Mode::ToftChain => {
            let n = f.grid().dim() as f64;
            let top =
                besov_norm(f, Exponent::TWO, Exponent::ONE, n / 2.0, &partitions.dyadic).value;
            let mid =
                modulation_norm(f, Exponent::TWO, Exponent::ONE, 0.0, &partitions.uniform)?.value;
            let bottom = besov_norm(f, Exponent::TWO, Exponent::ONE, 0.0, &partitions.dyadic).value;
            Ok(ModeEntry {
                primary: RatioEntry::new(id, mid, top),
                chain: Some(RatioEntry::new(id, bottom, mid)),
            })
        }
        Mode::Herz16 | Mode::Pnorm17 => Err(Error::invalid(
            "mode",
            format!(
                "{} compares symbol pieces, not ensemble members",
                mode.name()
            ),
        )),
    }
}

/// One symbol piece of a piece mode (`embed110` and `toft_chain` also accept pieces).
pub fn piece_entry(
    mode: Mode,
    piece: &SymbolPiece,
    params: &RatioParams,
    partitions: &Partitions,
) -> Result<ModeEntry> {
    let RatioParams { p, s, .. } = *params;
    let id = format!("j={}", piece.j);
    let m_j = &piece.values;
    match mode {
        Mode::Herz16 => {
            let lhs = herz_norm(
                &m_j.fourier(),
                Exponent::ONE,
                Exponent::ONE,
                s,
                &partitions.dyadic,
            )
            .value;
            let rhs =
                modulation_norm(m_j, Exponent::TWO, Exponent::ONE, s, &partitions.uniform)?.value;
            Ok(ModeEntry {
                primary: RatioEntry::new(id, lhs, rhs),
                chain: None,
            })
        }
        Mode::Pnorm17 => {
            let lhs = modulation_norm(m_j, p, Exponent::ONE, s, &partitions.uniform)?.value;
            let rhs =
                modulation_norm(m_j, Exponent::TWO, Exponent::ONE, s, &partitions.uniform)?.value;
            Ok(ModeEntry {
                primary: RatioEntry::new(id, lhs, rhs),
                chain: None,
            })
        }
        Mode::Embed110 | Mode::ToftChain => {
            ensemble_entry(mode, &id, m_j, None, params, partitions)
        }
        Mode::Prop32 => Err(Error::invalid(
            "mode",
            "prop32 needs a band-limited ensemble",
        )),
    }
}

/// What a ratio experiment runs over.
pub enum RatioInput<'a> {
    Ensemble(EnsembleSpec),
    Pieces {
        symbol: &'a dyn Symbol,
        j_range: (i32, i32),
    },
}

/// Assembles entries (in input order) into a report.
pub fn ratio_report(
    mode: Mode,
    source: String,
    entries: Vec<ModeEntry>,
    grid: &Grid,
    side: Side,
    seed: Option<u64>,
    params: RatioParams,
) -> Result<RatioReport> {
    let dim = grid.dim();
    let (lhs, rhs) = labels(mode, &params, dim);
    let bound = match mode {
        Mode::Embed110 => Some(cell_constant(grid, side)),
        _ => None,
    };
    let mut primary = Vec::with_capacity(entries.len());
    let mut chain = Vec::new();
    for e in entries {
        primary.push(e.primary);
        if let Some(c) = e.chain {
            chain.push(c);
        }
    }
    let chain = if chain.is_empty() {
        None
    } else {
        Some(RatioTable::new("B^{2,1}_0", "M^{2,1}_0", chain, None)?)
    };
    Ok(RatioReport {
        mode: mode.name().into(),
        source,
        table: RatioTable::new(lhs, rhs, primary, bound)?,
        chain,
        grid: grid.params(),
        seed,
        params,
    })
}

/// Runs a ratio experiment sequentially.
pub fn equivalence_ratio(
    mode: Mode,
    input: &RatioInput<'_>,
    params: &RatioParams,
    partitions: &Partitions,
    grid: &Grid,
) -> Result<RatioReport> {
    match input {
        RatioInput::Ensemble(spec) => {
            if mode.takes_pieces() {
                return Err(Error::invalid(
                    "mode",
                    format!("{} needs a symbol", mode.name()),
                ));
            }
            if mode == Mode::Prop32 && spec.kind != EnsembleKind::BandLimited {
                return Err(Error::invalid(
                    "kind",
                    "prop32 needs a band_limited ensemble",
                ));
            }
            spec.validate(grid)?;
            let band = (spec.kind == EnsembleKind::BandLimited).then_some(&spec.band);
            let entries = (0..spec.count)
                .map(|i| {
                    let f = ensemble_member(spec, grid, i)?;
                    ensemble_entry(mode, &spec.member_id(i), &f, band, params, partitions)
                })
                .collect::<Result<Vec<_>>>()?;
            ratio_report(
                mode,
                spec.kind.name().into(),
                entries,
                grid,
                Side::Space,
                Some(spec.seed),
                *params,
            )
        }
        RatioInput::Pieces { symbol, j_range } => {
            if mode == Mode::Prop32 {
                return Err(Error::invalid(
                    "mode",
                    "prop32 needs a band-limited ensemble",
                ));
            }
            if j_range.0 > j_range.1 {
                return Err(Error::invalid("j_range", "empty j range"));
            }
            let entries = (j_range.0..=j_range.1)
                .map(|j| {
                    let piece = extract_piece(*symbol, j, &partitions.dyadic, grid)?;
                    piece_entry(mode, &piece, params, partitions)
                })
                .collect::<Result<Vec<_>>>()?;
            ratio_report(
                mode,
                symbol.label(),
                entries,
                grid,
                Side::Frequency,
                None,
                *params,
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub symbol: String,
    pub estimate: f64,
    /// `max |m|` over the frequency nodes, the exact discrete answer.
    pub node_max: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Iteration cap of [`operator_norm_l2`].
pub const MAX_POWER_ITERATIONS: usize = 100_000;

/// `‖m(D)‖_{L² → L²}` by power iteration on `m(D)* m(D)`, started from a
/// seeded random vector.
///
/// Runs at least `iterations` steps, then continues until the Rayleigh
/// quotient changes by less than `10⁻¹³` relative between steps. Convergence
/// is slow when many nodes sit just below the max of `|m|` (fine grids near a
/// smooth maximum), so small `Δξ` grids may stop at the cap.
pub fn operator_norm_l2<S: Symbol + ?Sized>(
    m: &S,
    grid: &Grid,
    iterations: usize,
    seed: u64,
) -> Result<OperatorNorm> {
    if iterations < 16 {
        return Err(Error::invalid("iterations", format!("{iterations} < 16")));
    }
    let dim = grid.dim();
    let mut gain = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let c = grid.coords(Side::Frequency, i);
        if !m.is_evaluable(&c[..dim]) {
            return Err(Error::NotEvaluable {
                label: m.label(),
                point: c[..dim].to_vec(),
            });
        }
        gain.push(m.eval(&c[..dim]).norm_sqr());
    }
    let node_max = gain.iter().fold(0.0_f64, |a, &b| a.max(b)).sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let start: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut v = GridFunction::new(grid.clone(), Side::Space, start)?;
    let norm_of = |u: &GridFunction| lp_norm_samples(u.samples(), u.cell_volume(), Exponent::TWO);
    let n0 = norm_of(&v);
    v = v.scale(Complex64::new(1.0 / n0, 0.0));
    let mut lambda = 0.0_f64;
    let mut converged = false;
    let mut steps = 0;
    while steps < MAX_POWER_ITERATIONS {
        steps += 1;
        let mut spectrum = v.fourier();
        for (x, &g) in spectrum.samples_mut().iter_mut().zip(&gain) {
            *x *= g;
        }
        let w = spectrum.fourier_inverse();
        // ‖v‖ = 1, so ‖w‖ = ‖A v‖ approaches the top eigenvalue of A = m*m.
        let next = norm_of(&w);
        if next == 0.0 {
            lambda = 0.0;
            converged = true;
            break;
        }
        let change = (next - lambda).abs() / next;
        lambda = next;
        v = w.scale(Complex64::new(1.0 / next, 0.0));
        if steps >= iterations && change < 1e-13 {
            converged = true;
            break;
        }
    }
    Ok(OperatorNorm {
        symbol: m.label(),
        estimate: lambda.sqrt(),
        node_max,
        iterations: steps,
        converged,
    })
}

/// `H¹ → H¹` transfer of `m(D)` on an atom ensemble: `lhs = ‖m(D) a‖_{H¹}`,
/// `rhs = ‖a‖_{H¹}` by the Riesz characterization.
///
/// For the Riesz symbols themselves the Riesz-method norm of `m(D) a`
/// contains the same transforms as that of `a`, so the `chain` table repeats
/// the experiment with the maximal-function norm as an independent check.
pub fn atom_entry<S: Symbol + ?Sized>(
    m: &S,
    id: &str,
    atom: &GridFunction,
    hardy_levels: u32,
) -> Result<ModeEntry> {
    let image = apply_multiplier(m, atom)?;
    let riesz = RatioEntry::new(
        id,
        hardy_norm(&image, HardyMethod::Riesz, hardy_levels),
        hardy_norm(atom, HardyMethod::Riesz, hardy_levels),
    );
    let maximal = RatioEntry::new(
        id,
        hardy_norm(&image, HardyMethod::Maximal, hardy_levels),
        hardy_norm(atom, HardyMethod::Maximal, hardy_levels),
    );
    Ok(ModeEntry {
        primary: riesz,
        chain: Some(maximal),
    })
}

/// Assembles [`atom_entry`] results into a report.
pub fn atom_report(
    source: String,
    entries: Vec<ModeEntry>,
    grid: &Grid,
    seed: u64,
) -> Result<RatioReport> {
    let mut primary = Vec::with_capacity(entries.len());
    let mut chain = Vec::with_capacity(entries.len());
    for e in entries {
        primary.push(e.primary);
        chain.extend(e.chain);
    }
    Ok(RatioReport {
        mode: "atom_transfer".into(),
        source,
        table: RatioTable::new("H^1 of m(D)a (riesz)", "H^1 of a (riesz)", primary, None)?,
        chain: Some(RatioTable::new(
            "H^1 of m(D)a (maximal)",
            "H^1 of a (maximal)",
            chain,
            None,
        )?),
        grid: grid.params(),
        seed: Some(seed),
        params: RatioParams::default(),
    })
}

pub fn atom_transfer_ratio<S: Symbol + ?Sized>(
    m: &S,
    spec: &EnsembleSpec,
    grid: &Grid,
    hardy_levels: u32,
) -> Result<RatioReport> {
    if spec.kind != EnsembleKind::H1Atom {
        return Err(Error::invalid(
            "kind",
            "atom transfer needs an h1_atom ensemble",
        ));
    }
    spec.validate(grid)?;
    let entries = (0..spec.count)
        .map(|i| {
            let atom = ensemble_member(spec, grid, i)?;
            atom_entry(m, &spec.member_id(i), &atom, hardy_levels)
        })
        .collect::<Result<Vec<_>>>()?;
    atom_report(m.label(), entries, grid, spec.seed)
}
