//! `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, lists are bracketed and
//! comma separated: `slits = [-0.01, 0.01, 39.99, 40.01]`. Every key is
//! known in advance; anything else is rejected with its line number.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use slitwave::export::format_number;
use slitwave::geometry::{Region, SlitArray, SourceConfig, ZSpacing};
use slitwave::kernels::{Evaluator, QuadratureSpec};
use slitwave::nullmap::{Normalization, RefineAxes, DEFAULT_THRESHOLD};
use slitwave::fields::SliceAxis;
use slitwave::export::PgmMapping;

/// Where a setting came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::Line(n) => write!(f, "line {n}: `{}`: {}", self.key, self.message),
            Origin::Flag => write!(f, "flag --{}: {}", self.key, self.message),
            Origin::Missing => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorKind {
    Quadrature,
    Fresnel,
    Hypergeometric,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Grid,
    MonteCarlo,
}

/// A fully validated run description; defaults fill anything unset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub slits: Option<SlitArray>,
    pub source: SourceConfig,
    pub evaluator: EvaluatorKind,
    pub quad_points: usize,
    pub quad_max_phase: f64,
    pub region: Region,
    pub nx: usize,
    pub nz: usize,
    pub z_spacing: ZSpacing,
    pub threshold: f64,
    pub normalization: Normalization,
    pub sampler: SamplerKind,
    pub samples: u64,
    pub seed: u64,
    pub output: Option<String>,
    pub pgm: Option<String>,
    pub pgm_mapping: PgmMapping,
    pub fd_step: Option<f64>,
    pub slice_axis: SliceAxisKind,
    pub slice_at: f64,
    pub range: Option<(f64, f64)>,
    pub n: usize,
    pub factor: Vec<f64>,
    pub stations: usize,
    pub samples_per_fringe: f64,
    pub rel_threshold: f64,
    pub agreement: f64,
    pub near_field_level: f64,
    pub start: Vec<(f64, f64)>,
    pub refine_axes: RefineAxes,
    pub initial_step: Option<f64>,
    pub max_iterations: usize,
    pub min_step: f64,
    pub gauss_newton: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxisKind {
    FixedZ,
    FixedX,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            slits: None,
            source: SourceConfig::FarField,
            evaluator: EvaluatorKind::Fresnel,
            quad_points: 16,
            quad_max_phase: FRAC_PI_2,
            region: Region {
                x2_min: -30.0,
                x2_max: 30.0,
                zpp_min: 0.1,
                zpp_max: 100.0,
            },
            nx: 200,
            nz: 200,
            z_spacing: ZSpacing::Uniform,
            threshold: DEFAULT_THRESHOLD,
            normalization: Normalization::SamplePeak,
            sampler: SamplerKind::Grid,
            samples: 100_000,
            seed: 0,
            output: None,
            pgm: None,
            pgm_mapping: PgmMapping::Affine,
            fd_step: None,
            slice_axis: SliceAxisKind::FixedZ,
            slice_at: 1.0,
            range: None,
            n: 801,
            factor: vec![10.0],
            stations: 400,
            samples_per_fringe: 8.0,
            rel_threshold: 1e-2,
            agreement: 0.1,
            near_field_level: 0.5,
            start: Vec::new(),
            refine_axes: RefineAxes::Both,
            initial_step: None,
            max_iterations: 200,
            min_step: 1e-12,
            gauss_newton: true,
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: &[&str] = &[
    "slits",
    "source",
    "source_x0",
    "source_zp",
    "evaluator",
    "quad_points",
    "quad_max_phase",
    "x2_min",
    "x2_max",
    "zpp_min",
    "zpp_max",
    "nx",
    "nz",
    "z_spacing",
    "threshold",
    "normalization",
    "sampler",
    "samples",
    "seed",
    "output",
    "pgm",
    "pgm_mapping",
    "fd_step",
    "slice_axis",
    "slice_at",
    "range",
    "n",
    "factor",
    "stations",
    "samples_per_fringe",
    "rel_threshold",
    "agreement",
    "near_field_level",
    "start",
    "refine_axes",
    "initial_step",
    "max_iterations",
    "min_step",
    "gauss_newton",
];

/// Keys whose value is a bracketed list.
pub fn is_list_key(key: &str) -> bool {
    matches!(key, "slits" | "range" | "factor" | "start")
}

/// Raw settings collected before validation, each with its origin.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: Vec<(String, String, Origin)>,
}

impl Settings {
    /// Adds or replaces a setting; later entries win.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError {
                key,
                origin,
                message: "unknown key".into(),
            });
        }
        self.entries.retain(|(k, _, _)| *k != key);
        self.entries.push((key, value.trim().to_string(), origin));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, o)| (v.as_str(), o))
    }
}

/// Splits config text into settings without interpreting values.
pub fn parse_settings(text: &str) -> Result<Settings, ConfigError> {
    let mut settings = Settings::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                key: line.to_string(),
                origin: Origin::Line(line_no),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(ConfigError {
                key: key.into(),
                origin: Origin::Line(line_no),
                message: "key given twice".into(),
            });
        }
        settings.set(key, value, Origin::Line(line_no))?;
    }
    Ok(settings)
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(&parse_settings(text)?)
}

struct Reader<'a> {
    settings: &'a Settings,
}

impl Reader<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let origin = self
            .settings
            .get(key)
            .map(|(_, o)| o.clone())
            .unwrap_or(Origin::Missing);
        ConfigError {
            key: key.into(),
            origin,
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(|(v, _)| v)
    }

    fn number(&self, key: &str, s: &str) -> Result<f64, ConfigError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| self.err(key, format!("malformed number `{}`", s.trim())))?;
        if !v.is_finite() {
            return Err(self.err(key, format!("value must be finite (got `{}`)", s.trim())));
        }
        Ok(v)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.raw(key).map_or(Ok(default), |s| self.number(key, s))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|s| self.number(key, s)).transpose()
    }

    fn count_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| self.err(key, format!("expected a non-negative integer (got `{s}`)"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(s) = self.raw(key) else { return Ok(None) };
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| self.err(key, "expected a bracketed list `[a, b, ...]`"))?;
        if inner.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        inner.split(',').map(|t| self.number(key, t)).collect::<Result<_, _>>().map(Some)
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)], default: T) -> Result<T, ConfigError> {
        let Some(s) = self.raw(key) else { return Ok(default) };
        options
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.err(key, format!("expected one of {} (got `{s}`)", names.join(", ")))
            })
    }
}

pub fn resolve(settings: &Settings) -> Result<RunConfig, ConfigError> {
    let r = Reader { settings };
    let d = RunConfig::default();

    let slits = match r.list("slits")? {
        None => None,
        Some(edges) => Some(SlitArray::new(edges).map_err(|e| r.err("slits", e.to_string()))?),
    };

    let source = match r.choice("source", &[("farfield", false), ("finite", true)], false)? {
        false => {
            for key in ["source_x0", "source_zp"] {
                if r.raw(key).is_some() {
                    return Err(r.err(key, "only valid with `source = finite`"));
                }
            }
            SourceConfig::FarField
        }
        true => {
            let x0 = r.f64_or("source_x0", 0.0)?;
            let zp = r
                .opt_f64("source_zp")?
                .ok_or_else(|| r.err("source_zp", "required when `source = finite`"))?;
            SourceConfig::finite(x0, zp).map_err(|e| r.err("source_zp", e.to_string()))?
        }
    };

    let evaluator = r.choice(
        "evaluator",
        &[
            ("quadrature", EvaluatorKind::Quadrature),
            ("fresnel", EvaluatorKind::Fresnel),
            ("hypergeometric", EvaluatorKind::Hypergeometric),
            ("auto", EvaluatorKind::Auto),
        ],
        d.evaluator,
    )?;
    if source != SourceConfig::FarField && evaluator != EvaluatorKind::Quadrature {
        return Err(r.err("source", "a finite source needs `evaluator = quadrature`"));
    }
    let quad_points = r.count_or("quad_points", d.quad_points as u64)? as usize;
    let quad_max_phase = r.f64_or("quad_max_phase", d.quad_max_phase)?;
    QuadratureSpec::new(quad_points, quad_max_phase).map_err(|e| {
        let key = if quad_points < 2 { "quad_points" } else { "quad_max_phase" };
        r.err(key, e.to_string())
    })?;

    let region = Region {
        x2_min: r.f64_or("x2_min", d.region.x2_min)?,
        x2_max: r.f64_or("x2_max", d.region.x2_max)?,
        zpp_min: r.f64_or("zpp_min", d.region.zpp_min)?,
        zpp_max: r.f64_or("zpp_max", d.region.zpp_max)?,
    };
    if region.x2_min >= region.x2_max {
        return Err(r.err("x2_max", "must exceed x2_min"));
    }
    if region.zpp_min <= 0.0 {
        return Err(r.err("zpp_min", "must be > 0"));
    }
    if region.zpp_min >= region.zpp_max {
        return Err(r.err("zpp_max", "must exceed zpp_min"));
    }

    let nx = r.count_or("nx", d.nx as u64)? as usize;
    let nz = r.count_or("nz", d.nz as u64)? as usize;
    for (key, v) in [("nx", nx), ("nz", nz)] {
        if v < 2 {
            return Err(r.err(key, "must be >= 2"));
        }
    }
    let z_spacing = r.choice("z_spacing", &[("uniform", ZSpacing::Uniform), ("log", ZSpacing::Log)], d.z_spacing)?;

    let threshold = r.f64_or("threshold", d.threshold)?;
    if threshold < 0.0 {
        return Err(r.err("threshold", "must be >= 0"));
    }
    let normalization = match r.raw("normalization") {
        None | Some("peak") => Normalization::SamplePeak,
        Some(s) => {
            let v = r.number("normalization", s)?;
            if v <= 0.0 {
                return Err(r.err("normalization", "must be `peak` or a positive number"));
            }
            Normalization::Fixed(v)
        }
    };
    let sampler = r.choice(
        "sampler",
        &[("grid", SamplerKind::Grid), ("montecarlo", SamplerKind::MonteCarlo)],
        d.sampler,
    )?;
    let samples = r.count_or("samples", d.samples)?;
    if samples == 0 {
        return Err(r.err("samples", "must be >= 1"));
    }
    let seed = r.count_or("seed", d.seed)?;

    let output = r.raw("output").map(str::to_string);
    let pgm = r.raw("pgm").map(str::to_string);
    let pgm_mapping = r.choice(
        "pgm_mapping",
        &[("affine", PgmMapping::Affine), ("log", PgmMapping::Log)],
        d.pgm_mapping,
    )?;
    let fd_step = r.opt_f64("fd_step")?;
    if let Some(h) = fd_step {
        if !(h > 0.0 && h < region.zpp_min / 2.0) {
            return Err(r.err("fd_step", format!("must satisfy 0 < h < zpp_min/2 = {}", region.zpp_min / 2.0)));
        }
    }

    let slice_axis = r.choice(
        "slice_axis",
        &[("fixed_z", SliceAxisKind::FixedZ), ("fixed_x", SliceAxisKind::FixedX)],
        d.slice_axis,
    )?;
    let slice_at = r.f64_or("slice_at", d.slice_at)?;
    if slice_axis == SliceAxisKind::FixedZ && slice_at <= 0.0 {
        return Err(r.err("slice_at", "a fixed z'' slice needs slice_at > 0"));
    }
    let range = match r.list("range")? {
        None => None,
        Some(v) if v.len() == 2 && v[0] < v[1] => Some((v[0], v[1])),
        Some(_) => return Err(r.err("range", "expected `[lo, hi]` with lo < hi")),
    };
    let n = r.count_or("n", d.n as u64)? as usize;
    if n < 2 {
        return Err(r.err("n", "must be >= 2"));
    }
    let factor = r.list("factor")?.unwrap_or(d.factor);
    if factor.is_empty() || factor.iter().any(|s| *s <= 0.0) {
        return Err(r.err("factor", "expected one or more positive scale factors"));
    }

    let stations = r.count_or("stations", d.stations as u64)? as usize;
    if stations < 2 {
        return Err(r.err("stations", "must be >= 2"));
    }
    let samples_per_fringe = r.f64_or("samples_per_fringe", d.samples_per_fringe)?;
    if samples_per_fringe < 2.0 {
        return Err(r.err("samples_per_fringe", "must be >= 2"));
    }
    let rel_threshold = r.f64_or("rel_threshold", d.rel_threshold)?;
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(r.err("rel_threshold", "must lie in (0, 1)"));
    }
    let agreement = r.f64_or("agreement", d.agreement)?;
    if !(agreement > 0.0 && agreement < 1.0) {
        return Err(r.err("agreement", "must lie in (0, 1)"));
    }
    let near_field_level = r.f64_or("near_field_level", d.near_field_level)?;
    if !(near_field_level > 0.0 && near_field_level <= 1.0 - agreement) {
        return Err(r.err("near_field_level", "must lie in (0, 1 - agreement]"));
    }

    let start = match r.list("start")? {
        None => Vec::new(),
        Some(v) if v.len() % 2 == 0 => {
            let pairs: Vec<(f64, f64)> = v.chunks(2).map(|c| (c[0], c[1])).collect();
            if pairs.iter().any(|p| p.1 <= 0.0) {
                return Err(r.err("start", "every z'' must be > 0"));
            }
            pairs
        }
        Some(_) => return Err(r.err("start", "expected `[x2, zpp, x2, zpp, ...]` pairs")),
    };
    let refine_axes = r.choice(
        "refine_axes",
        &[
            ("both", RefineAxes::Both),
            ("transverse", RefineAxes::TransverseOnly),
            ("along_z", RefineAxes::AlongZ),
        ],
        d.refine_axes,
    )?;
    let initial_step = r.opt_f64("initial_step")?;
    if initial_step.is_some_and(|h| h <= 0.0) {
        return Err(r.err("initial_step", "must be > 0"));
    }
    let max_iterations = r.count_or("max_iterations", d.max_iterations as u64)? as usize;
    let min_step = r.f64_or("min_step", d.min_step)?;
    if min_step <= 0.0 {
        return Err(r.err("min_step", "must be > 0"));
    }
    let gauss_newton = r.choice("gauss_newton", &[("true", true), ("false", false)], d.gauss_newton)?;

    Ok(RunConfig {
        slits,
        source,
        evaluator,
        quad_points,
        quad_max_phase,
        region,
        nx,
        nz,
        z_spacing,
        threshold,
        normalization,
        sampler,
        samples,
        seed,
        output,
        pgm,
        pgm_mapping,
        fd_step,
        slice_axis,
        slice_at,
        range,
        n,
        factor,
        stations,
        samples_per_fringe,
        rel_threshold,
        agreement,
        near_field_level,
        start,
        refine_axes,
        initial_step,
        max_iterations,
        min_step,
        gauss_newton,
    })
}

fn list_text(values: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = values.into_iter().map(format_number).collect();
    format!("[{}]", parts.join(", "))
}

/// Writes every setting as config text that [`parse_config`] reads back to
/// an equal value.
pub fn serialize(c: &RunConfig) -> String {
    let mut lines: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| lines.push((k.to_string(), v));
    if let Some(s) = &c.slits {
        put("slits", list_text(s.edges().iter().copied()));
    }
    match c.source {
        SourceConfig::FarField => put("source", "farfield".into()),
        SourceConfig::Finite { x0, zp } => {
            put("source", "finite".into());
            put("source_x0", format_number(x0));
            put("source_zp", format_number(zp));
        }
    }
    put(
        "evaluator",
        match c.evaluator {
            EvaluatorKind::Quadrature => "quadrature",
            EvaluatorKind::Fresnel => "fresnel",
            EvaluatorKind::Hypergeometric => "hypergeometric",
            EvaluatorKind::Auto => "auto",
        }
        .into(),
    );
    put("quad_points", c.quad_points.to_string());
    put("quad_max_phase", format_number(c.quad_max_phase));
    put("x2_min", format_number(c.region.x2_min));
    put("x2_max", format_number(c.region.x2_max));
    put("zpp_min", format_number(c.region.zpp_min));
    put("zpp_max", format_number(c.region.zpp_max));
    put("nx", c.nx.to_string());
    put("nz", c.nz.to_string());
    put(
        "z_spacing",
        match c.z_spacing {
            ZSpacing::Uniform => "uniform",
            ZSpacing::Log => "log",
        }
        .into(),
    );
    put("threshold", format_number(c.threshold));
    put(
        "normalization",
        match c.normalization {
            Normalization::SamplePeak => "peak".into(),
            Normalization::Fixed(v) => format_number(v),
        },
    );
    put(
        "sampler",
        match c.sampler {
            SamplerKind::Grid => "grid",
            SamplerKind::MonteCarlo => "montecarlo",
        }
        .into(),
    );
    put("samples", c.samples.to_string());
    put("seed", c.seed.to_string());
    if let Some(o) = &c.output {
        put("output", o.clone());
    }
    if let Some(p) = &c.pgm {
        put("pgm", p.clone());
    }
    put(
        "pgm_mapping",
        match c.pgm_mapping {
            PgmMapping::Affine => "affine",
            PgmMapping::Log => "log",
        }
        .into(),
    );
    if let Some(h) = c.fd_step {
        put("fd_step", format_number(h));
    }
    put(
        "slice_axis",
        match c.slice_axis {
            SliceAxisKind::FixedZ => "fixed_z",
            SliceAxisKind::FixedX => "fixed_x",
        }
        .into(),
    );
    put("slice_at", format_number(c.slice_at));
    if let Some((a, b)) = c.range {
        put("range", list_text([a, b]));
    }
    put("n", c.n.to_string());
    put("factor", list_text(c.factor.iter().copied()));
    put("stations", c.stations.to_string());
    put("samples_per_fringe", format_number(c.samples_per_fringe));
    put("rel_threshold", format_number(c.rel_threshold));
    put("agreement", format_number(c.agreement));
    put("near_field_level", format_number(c.near_field_level));
    if !c.start.is_empty() {
        put("start", list_text(c.start.iter().flat_map(|&(x, z)| [x, z])));
    }
    put(
        "refine_axes",
        match c.refine_axes {
            RefineAxes::Both => "both",
            RefineAxes::TransverseOnly => "transverse",
            RefineAxes::AlongZ => "along_z",
        }
        .into(),
    );
    if let Some(h) = c.initial_step {
        put("initial_step", format_number(h));
    }
    put("max_iterations", c.max_iterations.to_string());
    put("min_step", format_number(c.min_step));
    put("gauss_newton", c.gauss_newton.to_string());
    let mut out = String::new();
    for (k, v) in lines {
        out.push_str(&k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    }
    out
}

impl RunConfig {
    /// The configured slits, or a config error naming the missing key.
    pub fn require_slits(&self) -> Result<&SlitArray, ConfigError> {
        self.slits.as_ref().ok_or_else(|| ConfigError {
            key: "slits".into(),
            origin: Origin::Missing,
            message: "required by this subcommand".into(),
        })
    }

    pub fn build_evaluator(&self) -> Evaluator {
        match self.evaluator {
            EvaluatorKind::Quadrature => Evaluator::Quadrature {
                spec: QuadratureSpec::new(self.quad_points, self.quad_max_phase)
                    .expect("validated at parse time"),
                source: self.source,
            },
            EvaluatorKind::Fresnel => Evaluator::Fresnel,
            EvaluatorKind::Hypergeometric => Evaluator::Hypergeometric,
            EvaluatorKind::Auto => Evaluator::Auto,
        }
    }

    pub fn slice(&self) -> SliceAxis {
        match self.slice_axis {
            SliceAxisKind::FixedZ => SliceAxis::FixedZ(self.slice_at),
            SliceAxisKind::FixedX => SliceAxis::FixedX(self.slice_at),
        }
    }
}
