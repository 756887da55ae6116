//! Symbol catalog and reproducible input ensembles.
//!
//! Catalog symbols carry closed-form derivatives up to order two:
//!
//! | name              | params | `m(ξ)`                                      |
//! |-------------------|--------|---------------------------------------------|
//! | `one`             | –      | `1`                                         |
//! | `riesz`           | `l`    | `-i ξ_l / |ξ|` (`l` 1-based; `0` means `1`) |
//! | `sign`            | –      | `ξ_1 / |ξ|`                                 |
//! | `oscillatory`     | `a`    | `χ(|ξ|) e^{i|ξ|} (1 + |ξ|²)^{-a/2}`         |
//! | `mihlin_poly`     | `b`    | `(1 + |ξ|²)^{-b/2}`                         |
//! | `imaginary_power` | `t`    | `|ξ|^{it}`                                  |
//!
//! `χ(r) = S(2r - 1)` with `S` the [`smooth_step`](crate::partitions::smooth_step),
//! so `χ = 0` for `r ≤ 1/2` and `χ = 1` for `r ≥ 1`. The oscillatory family
//! is the standard representative of multipliers that are bounded on `L²`
//! with a bounded `M^{2,1}_0` condition yet fail classical smoothness
//! conditions; it is not a transcription of any particular counterexample.
//!
//! Ensembles draw from ChaCha20 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)` and using the member index as the stream number,
//! so member `i` does not depend on `count` or on evaluation order.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::grid::{Grid, GridFunction, Side};
use crate::partitions::smooth_step_derivatives;
use crate::symbol::Symbol;
use crate::{Error, Result};

/// Identifier of the ensemble generator, recorded in every run configuration.
pub const RNG_ALGORITHM: &str = "chacha20:seed_from_u64:stream=member";

/// Catalog names with their parameter counts.
pub const CATALOG: &[(&str, usize)] = &[
    ("one", 0),
    ("riesz", 1),
    ("sign", 0),
    ("oscillatory", 1),
    ("mihlin_poly", 1),
    ("imaginary_power", 1),
];

/// A radial profile `F(r)` with `F'` and `F''`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Radial {
    One,
    Oscillatory { a: f64 },
    MihlinPoly { b: f64 },
    ImaginaryPower { t: f64 },
}

impl Radial {
    /// `(F, F', F'')` at `r > 0`.
    fn jet(self, r: f64) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Radial::One => [Complex64::new(1.0, 0.0), zero, zero],
            Radial::MihlinPoly { b } => {
                let w = 1.0 + r * r;
                let f = w.powf(-b / 2.0);
                let d1 = -b * r * w.powf(-b / 2.0 - 1.0);
                let d2 =
                    -b * w.powf(-b / 2.0 - 1.0) + b * (b + 2.0) * r * r * w.powf(-b / 2.0 - 2.0);
                [f.into(), d1.into(), d2.into()]
            }
            Radial::Oscillatory { a } => {
                let (c, dc, ddc) = smooth_step_derivatives(2.0 * r - 1.0);
                let (dc, ddc) = (2.0 * dc, 4.0 * ddc);
                if c == 0.0 && dc == 0.0 && ddc == 0.0 {
                    return [zero; 3];
                }
                let w = 1.0 + r * r;
                let p = w.powf(-a / 2.0);
                let dp = -a * r * w.powf(-a / 2.0 - 1.0);
                let ddp =
                    -a * w.powf(-a / 2.0 - 1.0) + a * (a + 2.0) * r * r * w.powf(-a / 2.0 - 2.0);
                let phase = Complex64::new(r.cos(), r.sin());
                let i = Complex64::new(0.0, 1.0);
                let f = phase * (c * p);
                let d1 = phase * (Complex64::from(dc * p + c * dp) + i * (c * p));
                let d2 = phase
                    * (Complex64::from(ddc * p + 2.0 * dc * dp + c * ddp - c * p)
                        + i * (2.0 * (dc * p + c * dp)));
                [f, d1, d2]
            }
            Radial::ImaginaryPower { t } => {
                let f = Complex64::new(0.0, t * r.ln()).exp();
                let it = Complex64::new(0.0, t);
                [f, f * it / r, f * it * (it - 1.0) / (r * r)]
            }
        }
    }

    /// `(F(0), F''(0))` for profiles smooth at the origin; `None` otherwise.
    fn at_origin(self) -> Option<(Complex64, Complex64)> {
        match self {
            Radial::One => Some((1.0.into(), 0.0.into())),
            Radial::MihlinPoly { b } => Some((1.0.into(), (-b).into())),
            Radial::Oscillatory { .. } => Some((0.0.into(), 0.0.into())),
            Radial::ImaginaryPower { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Radial(Radial),
    /// `c · ξ_l / |ξ|` with `l` 0-based.
    Ratio {
        l: usize,
        c: Complex64,
    },
}

/// A symbol from [`CATALOG`].
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSymbol {
    label: String,
    dim: usize,
    kind: Kind,
}

impl CatalogSymbol {
    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `∂^α (ξ_l / r)` for `|α| ≤ 2`, `r > 0`.
fn ratio_partial(xi: &[f64], l: usize, alpha: &[u8]) -> f64 {
    let r = norm(xi);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let idx: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(axis, &k)| core::iter::repeat(axis).take(k as usize))
        .collect();
    match idx.as_slice() {
        [] => xi[l] / r,
        &[i] => delta(i, l) / r - xi[l] * xi[i] / r.powi(3),
        &[i, j] => {
            -(delta(i, l) * xi[j] + delta(l, j) * xi[i] + delta(i, j) * xi[l]) / r.powi(3)
                + 3.0 * xi[l] * xi[i] * xi[j] / r.powi(5)
        }
        _ => f64::NAN,
    }
}

impl Symbol for CatalogSymbol {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let r = norm(xi);
        match self.kind {
            Kind::Radial(f) => {
                if r == 0.0 {
                    f.at_origin().map_or(Complex64::new(0.0, 0.0), |v| v.0)
                } else {
                    f.jet(r)[0]
                }
            }
            Kind::Ratio { l, c } => {
                if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * (xi[l] / r)
                }
            }
        }
    }

    /// Closed form for `|α| ≤ 2`. At the origin only symbols smooth there
    /// answer; the others report 0 by the same convention as `eval`.
    fn partial(&self, xi: &[f64], alpha: &[u8]) -> Option<Complex64> {
        let order: usize = alpha.iter().map(|&a| a as usize).sum();
        if order > 2 || alpha.len() != xi.len() {
            return None;
        }
        if order == 0 {
            return Some(self.eval(xi));
        }
        let r = norm(xi);
        let zero = Complex64::new(0.0, 0.0);
        match self.kind {
            Kind::Radial(f) => {
                if r == 0.0 {
                    return Some(match f.at_origin() {
                        Some((_, second)) if order == 2 && alpha.contains(&2) => second,
                        _ => zero,
                    });
                }
                let [_, d1, d2] = f.jet(r);
                let axes: Vec<usize> = alpha
                    .iter()
                    .enumerate()
                    .flat_map(|(axis, &k)| core::iter::repeat(axis).take(k as usize))
                    .collect();
                Some(match *axes.as_slice() {
                    [i] => d1 * (xi[i] / r),
                    [i, j] => {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        d2 * (xi[i] * xi[j] / (r * r))
                            + d1 * (delta / r - xi[i] * xi[j] / r.powi(3))
                    }
                    _ => return None,
                })
            }
            Kind::Ratio { l, c } => {
                if r == 0.0 {
                    Some(zero)
                } else {
                    Some(c * ratio_partial(xi, l, alpha))
                }
            }
        }
    }
}

fn format_label(name: &str, params: &[f64]) -> String {
    if params.is_empty() {
        return name.to_string();
    }
    let joined: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
    format!("{name}:{}", joined.join(","))
}

/// Looks up `name` in [`CATALOG`] for a `dim`-dimensional grid.
pub fn symbol_catalog(name: &str, params: &[f64], dim: usize) -> Result<CatalogSymbol> {
    if dim != 1 && dim != 2 {
        return Err(Error::invalid(
            "dim",
            format!("dimension {dim} is not 1 or 2"),
        ));
    }
    let arity = CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
    if params.len() != arity {
        return Err(Error::invalid(
            "symbol",
            format!("`{name}` takes {arity} parameter(s), got {}", params.len()),
        ));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid(
            "symbol",
            format!("non-finite parameter for `{name}`"),
        ));
    }
    let kind = match name {
        "one" => Kind::Radial(Radial::One),
        "riesz" => {
            let l = params[0];
            if l.fract() != 0.0 || l < 0.0 || l > dim as f64 {
                return Err(Error::invalid(
                    "symbol",
                    format!("riesz component {l} is not in 0..={dim}"),
                ));
            }
            let l = (l as usize).max(1) - 1;
            Kind::Ratio {
                l,
                c: Complex64::new(0.0, -1.0),
            }
        }
        "sign" => Kind::Ratio {
            l: 0,
            c: Complex64::new(1.0, 0.0),
        },
        "oscillatory" => Kind::Radial(Radial::Oscillatory { a: params[0] }),
        "mihlin_poly" => Kind::Radial(Radial::MihlinPoly { b: params[0] }),
        "imaginary_power" => Kind::Radial(Radial::ImaginaryPower { t: params[0] }),
        _ => return Err(Error::UnknownSymbol(name.to_string())),
    };
    Ok(CatalogSymbol {
        label: format_label(name, params),
        dim,
        kind,
    })
}

/// Parses `name` or `name:p1,p2` into a catalog symbol.
pub fn parse_symbol(text: &str, dim: usize) -> Result<CatalogSymbol> {
    let text = text.trim();
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (text, None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|p| {
                p.trim().parse::<f64>().map_err(|_| {
                    Error::invalid(
                        "symbol",
                        format!("cannot parse parameter `{p}` in `{text}`"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    symbol_catalog(name, &params, dim)
}

/// Boxed catalog symbol, for heterogeneous collections.
pub fn boxed_symbol(text: &str, dim: usize) -> Result<Box<dyn Symbol>> {
    Ok(Box::new(parse_symbol(text, dim)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    BandLimited,
    H1Atom,
    GaussianMix,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::BandLimited => "band_limited",
            EnsembleKind::H1Atom => "h1_atom",
            EnsembleKind::GaussianMix => "gaussian_mix",
        }
    }

    pub fn parse(text: &str) -> Result<EnsembleKind> {
        [
            EnsembleKind::BandLimited,
            EnsembleKind::H1Atom,
            EnsembleKind::GaussianMix,
        ]
        .into_iter()
        .find(|k| k.name() == text.trim())
        .ok_or_else(|| Error::invalid("kind", format!("unknown ensemble kind `{text}`")))
    }
}

/// A frequency region, in the natural `ξ` coordinates of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Band {
    /// `|ξ| ≤ radius`
    Ball { radius: f64 },
    /// `|ξ|_∞ ≤ half_width`
    Box { half_width: f64 },
    /// `inner ≤ |ξ| ≤ outer`
    Annulus { inner: f64, outer: f64 },
}

impl Default for Band {
    fn default() -> Self {
        Band::Ball { radius: 4.0 }
    }
}

impl Band {
    pub fn contains(&self, xi: &[f64]) -> bool {
        match *self {
            Band::Ball { radius } => norm(xi) <= radius,
            Band::Box { half_width } => xi.iter().all(|v| v.abs() <= half_width),
            Band::Annulus { inner, outer } => {
                let r = norm(xi);
                r >= inner && r <= outer
            }
        }
    }

    /// Largest `|ξ|_∞` the band reaches.
    pub fn reach(&self) -> f64 {
        match *self {
            Band::Ball { radius } => radius,
            Band::Box { half_width } => half_width,
            Band::Annulus { outer, .. } => outer,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let ok = match *self {
            Band::Ball { radius } => radius > 0.0,
            Band::Box { half_width } => half_width > 0.0,
            Band::Annulus { inner, outer } => inner >= 0.0 && outer > inner,
        };
        if !ok {
            return Err(Error::invalid("band", format!("degenerate band {self:?}")));
        }
        let nyquist = grid.freq_half_width();
        if !(self.reach() < nyquist) {
            return Err(Error::invalid(
                "band",
                format!(
                    "band reaches {} but the grid Nyquist frequency is {nyquist}",
                    self.reach()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub band: Band,
    /// Side length of atom cubes; width scale of Gaussian-mix components.
    #[serde(default = "unit")]
    pub atom_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            kind,
            count,
            seed,
            band: Band::default(),
            atom_scale: 1.0,
        }
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    pub fn with_atom_scale(mut self, scale: f64) -> Self {
        self.atom_scale = scale;
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count", "ensemble count must be at least 1"));
        }
        match self.kind {
            EnsembleKind::BandLimited => self.band.validate(grid),
            EnsembleKind::H1Atom => atom_side(grid, self.atom_scale).map(|_| ()),
            EnsembleKind::GaussianMix => {
                if !(self.atom_scale > 0.0 && 8.0 * self.atom_scale <= grid.half_width() / 2.0) {
                    return Err(Error::invalid(
                        "atom_scale",
                        format!(
                            "Gaussian width {} does not decay inside the box",
                            self.atom_scale
                        ),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn member_id(&self, index: usize) -> String {
        format!("{}-s{}-{index}", self.kind.name(), self.seed)
    }
}

/// Cube side in nodes for a requested atom scale.
fn atom_side(grid: &Grid, scale: f64) -> Result<usize> {
    let side = (scale / grid.spacing()).round();
    if !(side >= 2.0) || side > (grid.points() / 2) as f64 {
        return Err(Error::invalid(
            "atom_scale",
            format!(
                "atom scale {scale} gives a cube of {side} nodes; need 2..={} on this grid",
                grid.points() / 2
            ),
        ));
    }
    Ok(side as usize)
}

fn member_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// All members of an ensemble, in index order.
pub fn make_ensemble(spec: &EnsembleSpec, grid: &Grid) -> Result<Vec<GridFunction>> {
    spec.validate(grid)?;
    (0..spec.count)
        .map(|i| ensemble_member(spec, grid, i))
        .collect()
}

/// Member `index` of an ensemble, independent of the other members.
pub fn ensemble_member(spec: &EnsembleSpec, grid: &Grid, index: usize) -> Result<GridFunction> {
    spec.validate(grid)?;
    let mut rng = member_rng(spec.seed, index);
    Ok(match spec.kind {
        EnsembleKind::BandLimited => band_limited(grid, &spec.band, &mut rng),
        EnsembleKind::H1Atom => h1_atom(grid, atom_side(grid, spec.atom_scale)?, &mut rng),
        EnsembleKind::GaussianMix => gaussian_mix(grid, spec.atom_scale, &mut rng),
    })
}

fn gaussian_pair(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn band_limited(grid: &Grid, band: &Band, rng: &mut ChaCha20Rng) -> GridFunction {
    let spectrum = GridFunction::from_fn(grid, Side::Frequency, |xi| {
        if band.contains(xi) {
            gaussian_pair(rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    spectrum.fourier_inverse()
}

/// Mean-zero atom on a cube of `side` nodes inside the central half of the
/// box, with `sup |a| = 1/|Q|`.
fn h1_atom(grid: &Grid, side: usize, rng: &mut ChaCha20Rng) -> GridFunction {
    use core::f64::consts::PI;
    const MODES: usize = 4;
    let n = grid.points();
    let dim = grid.dim();
    let mut start = [0usize; 2];
    for s in start.iter_mut().take(dim) {
        *s = rng.random_range(n / 4..=3 * n / 4 - side);
    }
    let coeffs: Vec<f64> = (0..MODES.pow(dim as u32))
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    let profile = |t: [usize; 2]| -> f64 {
        let u: Vec<f64> = (0..dim)
            .map(|a| (t[a] as f64 + 0.5) / side as f64)
            .collect();
        match dim {
            1 => (0..MODES)
                .map(|c| coeffs[c] * ((c + 1) as f64 * PI * u[0]).sin())
                .sum(),
            _ => (0..MODES * MODES)
                .map(|c| {
                    let (c0, c1) = (c / MODES + 1, c % MODES + 1);
                    coeffs[c] * (c0 as f64 * PI * u[0]).sin() * (c1 as f64 * PI * u[1]).sin()
                })
                .sum(),
        }
    };
    let cube: Vec<[usize; 2]> = match dim {
        1 => (0..side).map(|i| [i, 0]).collect(),
        _ => (0..side)
            .flat_map(|a| (0..side).map(move |b| [a, b]))
            .collect(),
    };
    let mut values: Vec<f64> = cube.iter().map(|&t| profile(t)).collect();
    for _ in 0..2 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v -= mean);
    }
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        // Degenerate draw; fall back to a single full period.
        values = cube
            .iter()
            .map(|t| (2.0 * PI * (t[0] as f64 + 0.5) / side as f64).sin())
            .collect();
    }
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let volume = (side as f64 * grid.spacing()).powi(dim as i32);
    let scale = 1.0 / (volume * max);
    let mut out = GridFunction::zeros(grid, Side::Space);
    let samples = out.samples_mut();
    for (t, v) in cube.iter().zip(&values) {
        let mut idx = [0usize; 2];
        for a in 0..dim {
            idx[a] = start[a] + t[a];
        }
        samples[grid.flatten(idx)] = Complex64::new(v * scale, 0.0);
    }
    out
}

/// Three complex-weighted Gaussians with widths in `[scale/2, 2·scale]`,
/// centred in the central quarter of the box.
fn gaussian_mix(grid: &Grid, scale: f64, rng: &mut ChaCha20Rng) -> GridFunction {
    const COMPONENTS: usize = 3;
    let dim = grid.dim();
    let reach = grid.half_width() / 4.0;
    let comps: Vec<(Complex64, [f64; 2], f64)> = (0..COMPONENTS)
        .map(|_| {
            let a = gaussian_pair(rng);
            let mut c = [0.0; 2];
            for v in c.iter_mut().take(dim) {
                *v = rng.random_range(-reach..=reach);
            }
            let w = scale * 2.0_f64.powf(rng.random_range(-1.0..=1.0));
            (a, c, w)
        })
        .collect();
    GridFunction::from_fn(grid, Side::Space, |x| {
        comps
            .iter()
            .map(|(a, c, w)| {
                let d2: f64 = (0..dim).map(|k| (x[k] - c[k]) * (x[k] - c[k])).sum();
                a * (-d2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
}
