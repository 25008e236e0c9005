//! Subcommand bodies. Each writes its table to the configured output (or
//! stdout) and a short summary to stderr.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use slitwave::export::{
    format_number, write_cornu_csv, write_csv, write_grid_csv, write_nullmap_csv, write_pgm,
    write_profile_csv,
};
use slitwave::fields::{density_grid, drho_dz_grid, slice_density, ScalarFieldGrid, SliceAxis};
use slitwave::geometry::Lattice;
use slitwave::nullmap::{
    detect_transition, refine_minimum, sample_monte_carlo, scan_grid, RefineOptions,
    TransitionConfig,
};
use slitwave::specfun::cornu_curve;

use crate::config::{ConfigError, RunConfig, SamplerKind};

/// Largest peak-normalized difference `scalecheck` accepts.
pub const SCALECHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(String),
    Io { path: String, source: io::Error },
    /// `scalecheck` ran but a factor exceeded the tolerance.
    CheckFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Io { path, source } => write!(f, "I/O error on {path}: {source}"),
            CliError::CheckFailed => write!(f, "scale check failed"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn numeric(e: impl fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn io_err(path: &str) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

/// Opens the data sink named by `output`, or stdout.
fn open_output(cfg: &RunConfig) -> Result<(Box<dyn Write>, String), CliError> {
    match &cfg.output {
        Some(path) => {
            let f = File::create(path).map_err(io_err(path))?;
            Ok((Box::new(BufWriter::new(f)), path.clone()))
        }
        None => Ok((Box::new(BufWriter::new(io::stdout().lock())), "<stdout>".into())),
    }
}

fn emit(cfg: &RunConfig, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let (mut w, name) = open_output(cfg)?;
    body(&mut w).map_err(io_err(&name))?;
    w.flush().map_err(io_err(&name))
}

fn lattice(cfg: &RunConfig) -> Result<Lattice, CliError> {
    Lattice::new(cfg.region, cfg.nx, cfg.nz, cfg.z_spacing).map_err(numeric)
}

fn write_grid_outputs(cfg: &RunConfig, grid: &ScalarFieldGrid) -> Result<(), CliError> {
    emit(cfg, |w| write_grid_csv(w, grid))?;
    if let Some(path) = &cfg.pgm {
        let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
        let side = write_pgm(&mut w, grid, cfg.pgm_mapping).map_err(|e| {
            if e.kind() == io::ErrorKind::InvalidInput {
                numeric(e)
            } else {
                io_err(path)(e)
            }
        })?;
        w.flush().map_err(io_err(path))?;
        let side_path = format!("{path}.txt");
        let mut s = BufWriter::new(File::create(&side_path).map_err(io_err(&side_path))?);
        side.write(&mut s).map_err(io_err(&side_path))?;
    }
    eprintln!(
        "{}: {} x {} samples, min {}, max {}",
        grid.kind.name(),
        grid.nx(),
        grid.nz(),
        format_number(grid.min()),
        format_number(grid.max())
    );
    Ok(())
}

pub fn density(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    let grid = density_grid(slits, &lattice(cfg)?, &cfg.build_evaluator()).map_err(numeric)?;
    write_grid_outputs(cfg, &grid)
}

pub fn drho(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    let grid = drho_dz_grid(slits, &lattice(cfg)?, cfg.fd_step, &cfg.build_evaluator()).map_err(numeric)?;
    write_grid_outputs(cfg, &grid)
}

pub fn nullmap(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    let ev = cfg.build_evaluator();
    let map = match cfg.sampler {
        SamplerKind::Grid => scan_grid(slits, &lattice(cfg)?, cfg.threshold, cfg.normalization, &ev),
        SamplerKind::MonteCarlo => sample_monte_carlo(
            slits,
            &cfg.region,
            cfg.z_spacing,
            cfg.samples,
            cfg.threshold,
            cfg.seed,
            cfg.normalization,
            &ev,
        ),
    }
    .map_err(numeric)?;
    emit(cfg, |w| write_nullmap_csv(w, &map))?;
    eprintln!(
        "nullmap ({}): {} of {} samples below {} (divisor {})",
        map.sampler.name(),
        map.points.len(),
        map.samples_taken,
        format_number(map.threshold),
        format_number(map.normalization)
    );
    Ok(())
}

pub fn slice(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    let axis = cfg.slice();
    let (coord, default_range) = match axis {
        SliceAxis::FixedZ(_) => ("x2", (cfg.region.x2_min, cfg.region.x2_max)),
        SliceAxis::FixedX(_) => ("zpp", (cfg.region.zpp_min, cfg.region.zpp_max)),
    };
    let (lo, hi) = cfg.range.unwrap_or(default_range);
    let rows = slice_density(slits, axis, lo, hi, cfg.n, &cfg.build_evaluator()).map_err(numeric)?;
    emit(cfg, |w| write_profile_csv(w, coord, "rho", &rows))
}

/// Cornu spiral range when none is configured.
pub const DEFAULT_CORNU_RANGE: (f64, f64) = (-5.0, 5.0);

pub fn cornu(cfg: &RunConfig) -> Result<(), CliError> {
    let (lo, hi) = cfg.range.unwrap_or(DEFAULT_CORNU_RANGE);
    let points = cornu_curve(lo, hi, cfg.n).map_err(numeric)?;
    emit(cfg, |w| write_cornu_csv(w, &points))
}

pub fn transition(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    let tc = TransitionConfig {
        stations: cfg.stations,
        samples_per_fringe: cfg.samples_per_fringe,
        rel_threshold: cfg.rel_threshold,
        agreement: cfg.agreement,
        near_field_level: cfg.near_field_level,
    };
    let band = detect_transition(slits, cfg.region.zpp_min, cfg.region.zpp_max, &tc, &cfg.build_evaluator())
        .map_err(numeric)?;
    emit(cfg, |w| {
        write_csv(
            w,
            ["zpp", "near_nulls", "predicted", "ratio"],
            band.stations.iter().map(|s| [s.zpp, s.near_nulls as f64, s.predicted, s.ratio]),
        )
    })?;
    let isd = slits.inter_slit_distance().unwrap_or(f64::NAN);
    eprintln!(
        "transition band: z_lo = {}, z_hi = {} ({} to {} in units of zpp/ISD^2 with ISD = {})",
        format_number(band.z_lo),
        format_number(band.z_hi),
        format_number(band.z_lo / (isd * isd)),
        format_number(band.z_hi / (isd * isd)),
        format_number(isd)
    );
    Ok(())
}

/// Largest peak-normalized difference between the lattice density and the
/// density of the scaled configuration at the mapped points.
pub fn scale_deviation(cfg: &RunConfig, s: f64) -> Result<f64, CliError> {
    let slits = cfg.require_slits()?;
    let ev = cfg.build_evaluator();
    let base = lattice(cfg)?;
    let scaled = Lattice::new(cfg.region.scaled(s), cfg.nx, cfg.nz, cfg.z_spacing).map_err(numeric)?;
    let a = density_grid(slits, &base, &ev).map_err(numeric)?;
    let b = density_grid(&slits.scaled(s), &scaled, &ev).map_err(numeric)?;
    let (pa, pb) = (a.max(), b.max());
    if !(pa > 0.0 && pb > 0.0) {
        return Err(CliError::Numeric("density vanishes on the whole lattice".into()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u / pa - v / pb).abs())
        .fold(0.0, f64::max))
}

pub fn scalecheck(cfg: &RunConfig) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(cfg.factor.len());
    for &s in &cfg.factor {
        rows.push((s, scale_deviation(cfg, s)?));
    }
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = worst <= SCALECHECK_TOLERANCE;
    emit(cfg, |w| {
        writeln!(
            w,
            "scale check: {} x {} lattice, evaluator {}",
            cfg.nx,
            cfg.nz,
            cfg.build_evaluator().name()
        )?;
        for (s, d) in &rows {
            writeln!(w, "factor {}: max deviation {}", format_number(*s), format_number(*d))?;
        }
        writeln!(
            w,
            "max ratio deviation ≤ {}: {}",
            format_number(SCALECHECK_TOLERANCE),
            if pass { "PASS" } else { "FAIL" }
        )
    })?;
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

pub fn refine(cfg: &RunConfig) -> Result<(), CliError> {
    let slits = cfg.require_slits()?;
    if cfg.start.is_empty() {
        return Err(ConfigError {
            key: "start".into(),
            origin: crate::config::Origin::Missing,
            message: "refine needs at least one `[x2, zpp]` start pair".into(),
        }
        .into());
    }
    let options = RefineOptions {
        axes: cfg.refine_axes,
        initial_step: cfg.initial_step,
        min_step: cfg.min_step,
        max_iterations: cfg.max_iterations,
        bounds: None,
        gauss_newton: cfg.gauss_newton,
    };
    let ev = cfg.build_evaluator();
    let found = cfg
        .start
        .iter()
        .map(|&(x, z)| refine_minimum(slits, x, z, &options, &ev))
        .collect::<Result<Vec<_>, _>>()
        .map_err(numeric)?;
    emit(cfg, |w| {
        write_csv(
            w,
            ["x2", "zpp", "rho_min", "converged", "iterations"],
            found
                .iter()
                .map(|m| [m.x2, m.zpp, m.rho_min, f64::from(u8::from(m.converged)), m.iterations as f64]),
        )
    })?;
    let converged = found.iter().filter(|m| m.converged).count();
    eprintln!("refine: {converged} of {} starts converged", found.len());
    Ok(())
}
