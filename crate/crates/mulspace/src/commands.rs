//! One function per subcommand. Each validates its inputs, computes, and
//! returns the JSON report plus its per-index table for CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use mulspace_core::exponent::parse_exponent;
use mulspace_core::fixtures::{ensemble_member, parse_symbol, Band, EnsembleKind, EnsembleSpec};
use mulspace_core::multiplier::{
    condition_row, extract_piece, hormander_integral, kernel_row, validate_radii, ConditionReport,
    KernelDiagnostics,
};
use mulspace_core::norms::{evaluate, HardyMethod, NormContext, NormSpec, Warning};
use mulspace_core::partitions::partition_defect;
use mulspace_core::verify::{
    atom_entry, atom_report, ensemble_entry, operator_norm_l2, piece_entry, ratio_report, Mode,
    RatioParams, RatioReport, RatioTable,
};
use mulspace_core::{Exponent, Grid, GridFunction, Side, Symbol, UniformPartition};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::msgf;

/// Sample magnitude at the box edge, relative to the max, above which an
/// input is flagged as not decayed.
pub const BOUNDARY_WARNING_LEVEL: f64 = 1e-8;

/// A per-index table, the CSV projection of a report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command produces.
#[derive(Debug, Clone)]
pub struct Output {
    pub command: &'static str,
    pub config: RunConfig,
    /// A JSON object; its fields follow `command` and `config` in the document.
    pub report: Value,
    pub table: Table,
    /// Human-readable warnings, also present in the report where relevant.
    pub warnings: Vec<String>,
}

impl Output {
    fn new(
        command: &'static str,
        config: &RunConfig,
        report: impl Serialize,
        table: Table,
    ) -> Result<Self, CliError> {
        let report = serde_json::to_value(report)
            .map_err(|e| CliError::validation("report", e.to_string()))?;
        Ok(Output {
            command,
            config: config.clone(),
            report,
            table,
            warnings: Vec::new(),
        })
    }

    /// The full JSON document: command, configuration, then the report fields.
    pub fn document(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::from(self.command));
        doc.insert(
            "config".into(),
            serde_json::to_value(&self.config).expect("config serializes"),
        );
        match &self.report {
            Value::Object(fields) => doc.extend(fields.clone()),
            other => {
                doc.insert("report".into(), other.clone());
            }
        }
        Value::Object(doc)
    }
}

/// Shortest round-trip text of a float, as in the JSON output.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        v.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Maps `f` over `items` on the current pool and returns results in input
/// order; the first failing item (by index) decides the error.
pub fn ordered_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>, CliError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, CliError> + Sync + Send,
{
    let results: Vec<Result<U, CliError>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}

pub fn parse_p(field: &str, text: &str) -> Result<Exponent, CliError> {
    parse_exponent(text).map_err(|e| CliError::validation(field, e.to_string()))
}

/// `ball:R`, `box:H` or `annulus:R1,R2`.
pub fn parse_band(text: &str) -> Result<Band, CliError> {
    let bad = || {
        CliError::validation(
            "band",
            format!("cannot parse band `{text}`; use ball:R, box:H or annulus:R1,R2"),
        )
    };
    let (shape, rest) = text.trim().split_once(':').ok_or_else(bad)?;
    let values: Vec<f64> = rest
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match (shape.trim(), values.as_slice()) {
        ("ball", [r]) => Ok(Band::Ball { radius: *r }),
        ("box", [h]) => Ok(Band::Box { half_width: *h }),
        ("annulus", [a, b]) => Ok(Band::Annulus {
            inner: *a,
            outer: *b,
        }),
        _ => Err(bad()),
    }
}

/// `k` (first axis) or `k0:k1` node offsets.
pub fn parse_offset(text: &str, dim: usize) -> Result<Vec<i64>, CliError> {
    let bad = || CliError::validation("y", format!("cannot parse node offset `{text}`"));
    let parts: Vec<i64> = text
        .split(':')
        .map(|v| v.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match (parts.len(), dim) {
        (1, _) => {
            let mut off = vec![0; dim];
            off[0] = parts[0];
            Ok(off)
        }
        (2, 2) => Ok(parts),
        _ => Err(bad()),
    }
}

fn symbol(
    text: &str,
    config: &RunConfig,
) -> Result<mulspace_core::fixtures::CatalogSymbol, CliError> {
    Ok(parse_symbol(text, config.grid.dim)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Dyadic,
    Uniform,
}

#[derive(Serialize)]
struct PartitionCheckReport {
    family: Family,
    samples: usize,
    seed: u64,
    defect: f64,
    lower_bound_c: f64,
    j_range: Option<(i32, i32)>,
    lattice_radius: Option<i64>,
}

pub fn partition_check(
    config: &RunConfig,
    family: Family,
    samples: usize,
    seed: u64,
) -> Result<Output, CliError> {
    if samples == 0 {
        return Err(CliError::validation(
            "samples",
            "at least one sample is required",
        ));
    }
    let parts = config.partitions()?;
    let report = match family {
        Family::Dyadic => PartitionCheckReport {
            family,
            samples,
            seed,
            defect: partition_defect(&parts.dyadic, samples, seed),
            lower_bound_c: parts.dyadic.lower_bound(),
            j_range: Some(parts.dyadic.j_range()),
            lattice_radius: None,
        },
        Family::Uniform => {
            // θ ≥ 1/2 on [-1/2, 1/2], attained at the ends, so φ ≥ 2^{-n} on the central cube.
            let theta_min = (0..=1000)
                .map(|i| UniformPartition::theta(-0.5 + i as f64 / 1000.0))
                .fold(f64::INFINITY, f64::min);
            PartitionCheckReport {
                family,
                samples,
                seed,
                defect: partition_defect(&parts.uniform, samples, seed),
                lower_bound_c: theta_min.powi(parts.uniform.dim() as i32),
                j_range: None,
                lattice_radius: Some(parts.uniform.lattice_radius()),
            }
        }
    };
    let mut table = Table::new(&["family", "defect", "lower_bound_c"]);
    table.push(vec![
        format!("{family:?}").to_lowercase(),
        num(report.defect),
        num(report.lower_bound_c),
    ]);
    Output::new("partition-check", config, report, table)
}

fn load_input(path: &Path) -> Result<GridFunction, CliError> {
    msgf::load(path).map_err(|e| CliError::msgf(path, "input", e))
}

fn boundary_warning(id: &str, f: &GridFunction) -> Option<(f64, String)> {
    let ratio = f.boundary_ratio();
    (ratio > BOUNDARY_WARNING_LEVEL).then(|| {
        (
            ratio,
            format!("{id}: boundary samples reach {ratio:e} of the max; the box may be too small"),
        )
    })
}

pub struct NormArgs<'a> {
    pub spec: &'a str,
    pub input: &'a Path,
    pub hardy_method: HardyMethod,
    pub hardy_levels: u32,
    pub stft_stride: Option<usize>,
}

pub fn norm(config: &RunConfig, args: &NormArgs<'_>) -> Result<Output, CliError> {
    let spec: NormSpec =
        serde_json::from_str(args.spec).map_err(|e| CliError::validation("spec", e.to_string()))?;
    let spec = NormSpec::new(spec.family, spec.p, spec.q, spec.s)?;
    let f = load_input(args.input)?;
    let config = config.clone().with_grid(f.grid());
    let mut ctx = NormContext::new(f.grid().dim())?;
    ctx.partitions = config.partitions()?;
    ctx.hardy_method = args.hardy_method;
    ctx.hardy_levels = args.hardy_levels;
    ctx.stft_stride = args.stft_stride;
    let value = evaluate(&f, &spec, &ctx)?;
    let mut warnings: Vec<Value> = value
        .warnings
        .iter()
        .map(|w| serde_json::to_value(w).expect("warning serializes"))
        .collect();
    let mut messages: Vec<String> = value
        .warnings
        .iter()
        .map(|w| match w {
            Warning::TruncationMass { mass } => format!(
                "{} of the spectral energy lies in the outer half of the box; the grid may under-resolve the input",
                num(*mass)
            ),
        })
        .collect();
    let boundary = f.boundary_ratio();
    if let Some((ratio, message)) = boundary_warning(&args.input.display().to_string(), &f) {
        warnings.push(json!({"kind": "boundary", "ratio": ratio}));
        messages.push(message);
    }
    let report = json!({
        "input": args.input.display().to_string(),
        "side": f.side(),
        "spec": spec,
        "value": value.value,
        "warnings": warnings,
        "truncation_mass": value.truncation_mass,
        "boundary_ratio": boundary,
    });
    let mut table = Table::new(&["value", "truncation_mass", "boundary_ratio", "warnings"]);
    table.push(vec![
        num(value.value),
        num(value.truncation_mass),
        num(boundary),
        warnings.len().to_string(),
    ]);
    let mut out = Output::new("norm", &config, report, table)?;
    out.warnings = messages;
    Ok(out)
}

pub fn check(
    config: &RunConfig,
    symbol_text: &str,
    s: f64,
    p: Exponent,
) -> Result<Output, CliError> {
    if !s.is_finite() {
        return Err(CliError::validation(
            "s",
            format!("smoothness {s} is not finite"),
        ));
    }
    let m = symbol(symbol_text, config)?;
    let grid = config.grid();
    let parts = config.partitions()?;
    let js: Vec<i32> = (config.j_range.0..=config.j_range.1).collect();
    let rows = ordered_map(&js, |&j| Ok(condition_row(&m, j, s, p, &parts, &grid)?))?;
    let report = ConditionReport::from_rows(&m, s, p, config.j_range, &grid, rows)?;
    let mut table = Table::new(&[
        "j",
        "sobolev_s",
        "besov_n2_11",
        "modulation_s",
        "herz_s",
        "modulation_p1",
        "truncation_mass",
    ]);
    for r in &report.per_j {
        table.push(vec![
            r.j.to_string(),
            num(r.sobolev_s),
            num(r.besov_n2_11),
            num(r.modulation_s),
            num(r.herz_s),
            num(r.modulation_p1),
            num(r.truncation_mass),
        ]);
    }
    let warned = report
        .per_j
        .iter()
        .filter(|r| !r.warnings.is_empty())
        .count();
    let mut out = Output::new("check", config, &report, table)?;
    if warned > 0 {
        out.warnings.push(format!(
            "{warned} scale(s) carry truncation warnings; see per_j[].warnings"
        ));
    }
    Ok(out)
}

/// Tail radii used when none are given; those reaching `L/2` are dropped.
pub const DEFAULT_RADII: [f64; 4] = [4.0, 8.0, 16.0, 32.0];

pub fn kernel(config: &RunConfig, symbol_text: &str, radii: &[f64]) -> Result<Output, CliError> {
    let m = symbol(symbol_text, config)?;
    let grid = config.grid();
    let parts = config.partitions()?;
    let radii = if radii.is_empty() {
        let fitting: Vec<f64> = DEFAULT_RADII
            .into_iter()
            .filter(|&r| r < grid.half_width() / 2.0)
            .collect();
        validate_radii(&fitting, &grid)?
    } else {
        validate_radii(radii, &grid)?
    };
    let js: Vec<i32> = (config.j_range.0..=config.j_range.1).collect();
    let rows = ordered_map(&js, |&j| {
        Ok(kernel_row(&m, j, &parts.dyadic, &grid, &radii)?)
    })?;
    let report = KernelDiagnostics::from_rows(&m, config.j_range, &grid, radii.clone(), rows);
    let mut header: Vec<String> = ["j", "k_l1", "grad_k_l1", "bernstein_ratio", "tail_slope"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(radii.iter().map(|r| format!("tail_{}", num(*r))));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for r in &report.per_j {
        let mut row = vec![
            r.j.to_string(),
            num(r.k_l1),
            num(r.grad_k_l1),
            num(r.bernstein_ratio),
            opt_num(r.tail_slope),
        ];
        row.extend(r.tails.iter().map(|t| num(*t)));
        table.push(row);
    }
    Output::new("kernel", config, &report, table)
}

/// Node offsets `2^l` along the first axis with `|y| < L/8`.
pub fn default_offsets(grid: &Grid) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = 1i64;
    while (k as f64) * grid.spacing() < grid.half_width() / 8.0 {
        let mut off = vec![0; grid.dim()];
        off[0] = k;
        out.push(off);
        k *= 2;
    }
    out
}

pub fn hormander(
    config: &RunConfig,
    symbol_text: &str,
    offsets: &[String],
) -> Result<Output, CliError> {
    let m = symbol(symbol_text, config)?;
    let grid = config.grid();
    let parts = config.partitions()?;
    let offsets = if offsets.is_empty() {
        default_offsets(&grid)
    } else {
        offsets
            .iter()
            .map(|o| parse_offset(o, grid.dim()))
            .collect::<Result<Vec<_>, _>>()?
    };
    let report = hormander_integral(&m, config.j_range, &parts.dyadic, &grid, &offsets)?;
    let mut table = Table::new(&["offset", "y_norm", "direct", "proof_bound"]);
    for r in &report.per_y {
        let offset: Vec<String> = r.offset.iter().map(|v| v.to_string()).collect();
        let y = r.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        table.push(vec![
            offset.join(":"),
            num(y),
            num(r.direct),
            num(r.proof_bound),
        ]);
    }
    Output::new("hormander", config, &report, table)
}

pub struct EnsembleArgs {
    pub kind: EnsembleKind,
    pub count: usize,
    pub seed: u64,
    pub band: Band,
    pub atom_scale: f64,
}

impl EnsembleArgs {
    fn spec(&self) -> EnsembleSpec {
        EnsembleSpec::new(self.kind, self.count, self.seed)
            .with_band(self.band)
            .with_atom_scale(self.atom_scale)
    }
}

#[derive(Serialize)]
struct ManifestMember {
    id: String,
    file: String,
    side: Side,
    boundary_ratio: f64,
}

pub fn gen(config: &RunConfig, args: &EnsembleArgs, out_dir: &Path) -> Result<Output, CliError> {
    let grid = config.grid();
    let spec = args.spec();
    spec.validate(&grid)?;
    let indices: Vec<usize> = (0..spec.count).collect();
    let members = ordered_map(&indices, |&i| Ok(ensemble_member(&spec, &grid, i)?))?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut listed = Vec::with_capacity(members.len());
    let mut warnings = Vec::new();
    let mut table = Table::new(&["id", "file", "boundary_ratio"]);
    for (i, f) in members.iter().enumerate() {
        let id = spec.member_id(i);
        let file = format!("{id}.msgf");
        let path: PathBuf = out_dir.join(&file);
        msgf::save(f, &path).map_err(|e| CliError::io(&path, e))?;
        // Band-limited members are periodic by construction, not decaying.
        if spec.kind != EnsembleKind::BandLimited {
            if let Some((_, message)) = boundary_warning(&id, f) {
                warnings.push(message);
            }
        }
        table.push(vec![id.clone(), file.clone(), num(f.boundary_ratio())]);
        listed.push(ManifestMember {
            id,
            file,
            side: f.side(),
            boundary_ratio: f.boundary_ratio(),
        });
    }
    let report = json!({
        "spec": spec,
        "format": "msgf",
        "members": listed,
    });
    let mut out = Output::new("gen", config, report, table)?;
    let manifest = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&out.document()).expect("manifest serializes");
    fs::write(&manifest, text + "\n").map_err(|e| CliError::io(&manifest, e))?;
    out.warnings = warnings;
    Ok(out)
}

fn ratio_rows(table: &mut Table, prefix: &[String], name: &str, t: &RatioTable) {
    for e in &t.per_input {
        let mut row = prefix.to_vec();
        row.extend([
            name.to_string(),
            e.id.clone(),
            num(e.lhs),
            num(e.rhs),
            num(e.ratio),
        ]);
        table.push(row);
    }
}

fn ratio_table(report: &RatioReport) -> Table {
    let mut table = Table::new(&["table", "id", "lhs", "rhs", "ratio"]);
    ratio_rows(&mut table, &[], "primary", &report.table);
    if let Some(chain) = &report.chain {
        ratio_rows(&mut table, &[], "chain", chain);
    }
    table
}

pub struct VerifyArgs<'a> {
    pub mode: Mode,
    pub params: RatioParams,
    pub ensemble: EnsembleArgs,
    pub symbol: Option<&'a str>,
}

pub fn verify(config: &RunConfig, args: &VerifyArgs<'_>) -> Result<Output, CliError> {
    let grid = config.grid();
    let parts = config.partitions()?;
    let mode = args.mode;
    if !args.params.s.is_finite() {
        return Err(CliError::validation("s", "smoothness must be finite"));
    }
    let report = if mode.takes_pieces() {
        let text = args.symbol.ok_or_else(|| {
            CliError::validation("symbol", format!("{} needs --symbol", mode.name()))
        })?;
        let m = symbol(text, config)?;
        let js: Vec<i32> = (config.j_range.0..=config.j_range.1).collect();
        let entries = ordered_map(&js, |&j| {
            let piece = extract_piece(&m, j, &parts.dyadic, &grid)?;
            Ok(piece_entry(mode, &piece, &args.params, &parts)?)
        })?;
        ratio_report(
            mode,
            m.label(),
            entries,
            &grid,
            Side::Frequency,
            None,
            args.params,
        )?
    } else {
        if args.symbol.is_some() {
            return Err(CliError::validation(
                "symbol",
                format!("{} takes an ensemble, not a symbol", mode.name()),
            ));
        }
        let spec = args.ensemble.spec();
        if mode == Mode::Prop32 && spec.kind != EnsembleKind::BandLimited {
            return Err(CliError::validation(
                "kind",
                "prop32 needs a band_limited ensemble",
            ));
        }
        spec.validate(&grid)?;
        let band = (spec.kind == EnsembleKind::BandLimited).then_some(&spec.band);
        let indices: Vec<usize> = (0..spec.count).collect();
        let entries = ordered_map(&indices, |&i| {
            let f = ensemble_member(&spec, &grid, i)?;
            Ok(ensemble_entry(
                mode,
                &spec.member_id(i),
                &f,
                band,
                &args.params,
                &parts,
            )?)
        })?;
        ratio_report(
            mode,
            spec.kind.name().into(),
            entries,
            &grid,
            Side::Space,
            Some(spec.seed),
            args.params,
        )?
    };
    let table = ratio_table(&report);
    let mut out = Output::new("verify", config, &report, table)?;
    for (name, t) in std::iter::once(("primary", &report.table))
        .chain(report.chain.as_ref().map(|c| ("chain", c)))
    {
        if t.violations > 0 {
            out.warnings
                .push(format!("{name} table: {} violation(s)", t.violations));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ScaleReport {
    atom_scale: f64,
    #[serde(flatten)]
    report: RatioReport,
}

pub struct AtomArgs<'a> {
    pub symbol: &'a str,
    pub count: usize,
    pub seed: u64,
    pub scales: &'a [f64],
    pub hardy_levels: u32,
}

/// `max ratio_max / min ratio_max` over scales.
fn stability(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn atom_transfer(config: &RunConfig, args: &AtomArgs<'_>) -> Result<Output, CliError> {
    let grid = config.grid();
    let m = symbol(args.symbol, config)?;
    if args.scales.is_empty() {
        return Err(CliError::validation(
            "atom_scales",
            "at least one atom scale is required",
        ));
    }
    let specs: Vec<EnsembleSpec> = args
        .scales
        .iter()
        .map(|&scale| {
            EnsembleSpec::new(EnsembleKind::H1Atom, args.count, args.seed).with_atom_scale(scale)
        })
        .collect();
    for spec in &specs {
        spec.validate(&grid)?;
    }
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..args.count).map(move |i| (s, i)))
        .collect();
    let mut entries = ordered_map(&jobs, |&(s, i)| {
        let spec = &specs[s];
        let atom = ensemble_member(spec, &grid, i)?;
        Ok(atom_entry(
            &m,
            &spec.member_id(i),
            &atom,
            args.hardy_levels,
        )?)
    })?
    .into_iter();
    let mut per_scale = Vec::with_capacity(specs.len());
    let mut table = Table::new(&["atom_scale", "table", "id", "lhs", "rhs", "ratio"]);
    for spec in &specs {
        let chunk: Vec<_> = entries.by_ref().take(args.count).collect();
        let report = atom_report(m.label(), chunk, &grid, args.seed)?;
        let prefix = vec![num(spec.atom_scale)];
        ratio_rows(&mut table, &prefix, "riesz", &report.table);
        if let Some(chain) = &report.chain {
            ratio_rows(&mut table, &prefix, "maximal", chain);
        }
        per_scale.push(ScaleReport {
            atom_scale: spec.atom_scale,
            report,
        });
    }
    let riesz = stability(per_scale.iter().map(|r| r.report.table.ratio_max));
    let maximal = stability(
        per_scale
            .iter()
            .filter_map(|r| r.report.chain.as_ref().map(|c| c.ratio_max)),
    );
    let report = json!({
        "symbol": m.label(),
        "count": args.count,
        "seed": args.seed,
        "hardy_levels": args.hardy_levels,
        "per_scale": per_scale,
        "ratio_max_stability": {"riesz": riesz, "maximal": maximal},
    });
    Output::new("atom-transfer", config, report, table)
}

pub fn opnorm(
    config: &RunConfig,
    symbol_text: &str,
    iterations: usize,
    seed: u64,
) -> Result<Output, CliError> {
    let m = symbol(symbol_text, config)?;
    let grid = config.grid();
    let r = operator_norm_l2(&m, &grid, iterations, seed)?;
    let mut table = Table::new(&["symbol", "estimate", "node_max", "iterations", "converged"]);
    table.push(vec![
        r.symbol.clone(),
        num(r.estimate),
        num(r.node_max),
        r.iterations.to_string(),
        r.converged.to_string(),
    ]);
    let relative_gap = (r.estimate - r.node_max).abs() / r.node_max.max(f64::MIN_POSITIVE);
    let report = json!({
        "symbol": r.symbol,
        "estimate": r.estimate,
        "node_max": r.node_max,
        "relative_gap": relative_gap,
        "iterations": r.iterations,
        "converged": r.converged,
        "seed": seed,
    });
    let mut out = Output::new("opnorm", config, report, table)?;
    if !r.converged {
        out.warnings.push(format!(
            "power iteration stopped at the cap of {} steps before converging",
            r.iterations
        ));
    }
    Ok(out)
}
