//! Text serializations: CSV tables and 16-bit PGM heatmaps.
//!
//! Numbers are written as the shortest decimal that parses back to the same
//! `f64` (never more than 17 significant digits), so identical inputs give
//! identical bytes.

use std::io::{self, Write};

use crate::fields::ScalarFieldGrid;
use crate::nullmap::NullMap;
use crate::specfun::CornuPoint;

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Header line plus one comma-separated row per item.
pub fn write_csv<W, I, const N: usize>(mut w: W, header: [&str; N], rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = [f64; N]>,
{
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format_number(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn write_cornu_csv<W: Write>(w: W, points: &[CornuPoint]) -> io::Result<()> {
    write_csv(w, ["u", "S", "C"], points.iter().map(|p| [p.u, p.s, p.c]))
}

/// Retained points in map order; `rho` is the normalized density.
pub fn write_nullmap_csv<W: Write>(w: W, map: &NullMap) -> io::Result<()> {
    write_csv(w, ["x2", "zpp", "rho"], map.points.iter().map(|p| [p.x2, p.zpp, p.rho]))
}

/// Row-major with `x₂` fastest.
pub fn write_grid_csv<W: Write>(w: W, grid: &ScalarFieldGrid) -> io::Result<()> {
    write_csv(w, ["x2", "zpp", "value"], grid.samples().map(|(x, z, v)| [x, z, v]))
}

/// Two-column profile, e.g. a density slice.
pub fn write_profile_csv<W: Write>(w: W, coord: &str, value: &str, rows: &[(f64, f64)]) -> io::Result<()> {
    write_csv(w, [coord, value], rows.iter().map(|&(a, b)| [a, b]))
}

/// Value-to-gray mapping used by [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmMapping {
    #[default]
    Affine,
    /// `log10` of the value; non-positive values clamp to the smallest
    /// positive value in the grid.
    Log,
}

impl PgmMapping {
    pub fn name(&self) -> &'static str {
        match self {
            PgmMapping::Affine => "affine",
            PgmMapping::Log => "log10",
        }
    }
}

/// What a gray level means; written next to the image as `key = value` text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmSidecar {
    /// Field value mapped to gray 0 (before the log, for `Log`).
    pub min: f64,
    /// Field value mapped to gray 65535.
    pub max: f64,
    pub mapping: PgmMapping,
    pub width: usize,
    pub height: usize,
}

impl PgmSidecar {
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "min = {}", format_number(self.min))?;
        writeln!(w, "max = {}", format_number(self.max))?;
        writeln!(w, "mapping = {}", self.mapping.name())?;
        writeln!(w, "width = {}", self.width)?;
        writeln!(w, "height = {}", self.height)?;
        writeln!(w, "row0 = zpp_min")?;
        w.flush()
    }
}

const PGM_MAXVAL: f64 = 65535.0;

/// Plain (P2) 16-bit PGM, one image row per `z″` row starting at `zpp_min`.
pub fn write_pgm<W: Write>(mut w: W, grid: &ScalarFieldGrid, mapping: PgmMapping) -> io::Result<PgmSidecar> {
    let transform = |v: f64, floor: f64| match mapping {
        PgmMapping::Affine => v,
        PgmMapping::Log => v.max(floor).log10(),
    };
    let floor = grid
        .values
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if mapping == PgmMapping::Log && !floor.is_finite() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "log mapping needs at least one positive value",
        ));
    }
    let (min, max) = (grid.min(), grid.max());
    let (lo, hi) = (transform(min, floor), transform(max, floor));
    let span = hi - lo;
    let (nx, nz) = (grid.nx(), grid.nz());
    writeln!(w, "P2")?;
    writeln!(w, "{nx} {nz}")?;
    writeln!(w, "{}", PGM_MAXVAL as u32)?;
    let mut line = String::new();
    for j in 0..nz {
        line.clear();
        for (i, &v) in grid.row(j).iter().enumerate() {
            let level = if span > 0.0 {
                ((transform(v, floor) - lo) / span * PGM_MAXVAL).round().clamp(0.0, PGM_MAXVAL)
            } else {
                0.0
            };
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&(level as u32).to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(PgmSidecar {
        min: if mapping == PgmMapping::Log { min.max(floor) } else { min },
        max,
        mapping,
        width: nx,
        height: nz,
    })
}
