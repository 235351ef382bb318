//! CSV serialization of densities, sweeps, transport plans, and potentials.
//!
//! All floating-point fields are written in scientific notation with 17
//! significant digits, so repeated runs produce byte-identical files.

use crate::density::{GridDensity1D, MaskedGrid2D};
use crate::ot::TransportPlan;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// Format a float with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// 1D density as `x,value` rows at cell centers.
pub fn density_1d_csv(u: &GridDensity1D) -> String {
    let mut out = String::from("x,value\n");
    for (i, &v) in u.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_float(u.cell_center(i)), fmt_float(v));
    }
    out
}

/// 2D masked density as `x,y,mask,value` rows (mask as 0/1).
pub fn masked_grid_csv(g: &MaskedGrid2D) -> String {
    let mut out = String::from("x,y,mask,value\n");
    for iy in 0..g.ny() {
        for ix in 0..g.nx() {
            let (x, y) = g.cell_center(ix, iy);
            let i = g.idx(ix, iy);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_float(x),
                fmt_float(y),
                u8::from(g.mask()[i]),
                fmt_float(g.values()[i])
            );
        }
    }
    out
}

/// Transport plan as `i,j,mass` rows.
pub fn plan_csv(plan: &TransportPlan) -> String {
    let mut out = String::from("i,j,mass\n");
    for &(i, j, mass) in &plan.couplings {
        let _ = writeln!(out, "{i},{j},{}", fmt_float(mass));
    }
    out
}

/// Potential dump `x,y,w` for inspecting a 2D Neumann-Poisson solution; `w`
/// must be in the grid's full row-major layout.
pub fn potential_2d_csv(g: &MaskedGrid2D, w: &[f64]) -> String {
    let mut out = String::from("x,y,w\n");
    for iy in 0..g.ny() {
        for ix in 0..g.nx() {
            let i = g.idx(ix, iy);
            if !g.mask()[i] {
                continue;
            }
            let (x, y) = g.cell_center(ix, iy);
            let _ = writeln!(out, "{},{},{}", fmt_float(x), fmt_float(y), fmt_float(w[i]));
        }
    }
    out
}

/// Generic sweep table: one labelled column per series.
pub fn sweep_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Record of files written by an experiment, with row counts (excluding the
/// header line).
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, usize)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Write `contents` to `dir/name` and record it.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
        let rows = contents.lines().count().saturating_sub(1);
        self.entries.push((name.to_string(), rows));
        Ok(())
    }

    /// Write the manifest itself as `file,rows`.
    pub fn finish(&self, dir: &Path) -> io::Result<()> {
        let mut out = String::from("file,rows\n");
        for (name, rows) in &self.entries {
            let _ = writeln!(out, "{name},{rows}");
        }
        fs::write(dir.join("manifest.csv"), out)
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }
}
