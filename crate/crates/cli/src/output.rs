//! Snapshot files and the run summary.
//!
//! A snapshot is a text header terminated by a line `end_header`, followed by
//! `nx * ny * nz * 5` little-endian f64 values. Element order: variable
//! fastest (rho, rhou, rhov, rhow, rhoE), then x, then y, then z.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mprk_core::domain::{ConservedField, StructuredGrid};

pub const VARIABLES: [&str; 5] = ["rho", "rhou", "rhov", "rhow", "rhoE"];

pub fn snapshot_name(domain: u8, step: usize) -> String {
    format!("snapshot_d{domain}_{step:07}.bin")
}

pub fn write_snapshot(
    dir: &Path,
    domain: u8,
    step: usize,
    t: f64,
    grid: &StructuredGrid,
    field: &ConservedField,
) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(domain, step));
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let [dx, dy, dz] = grid.spacing();
    writeln!(w, "mprk-snapshot 1")?;
    writeln!(w, "domain {domain}")?;
    writeln!(w, "dims {} {} {}", grid.nx, grid.ny, grid.nz)?;
    writeln!(w, "origin {:.17e} {:.17e} {:.17e}", grid.lower[0], grid.lower[1], grid.lower[2])?;
    writeln!(w, "spacing {dx:.17e} {dy:.17e} {dz:.17e}")?;
    writeln!(w, "time {t:.17e}")?;
    writeln!(w, "step {step}")?;
    writeln!(w, "variables {}", VARIABLES.join(" "))?;
    writeln!(w, "order variable,x,y,z")?;
    writeln!(w, "format f64le")?;
    writeln!(w, "end_header")?;
    for q in field.as_slice() {
        for v in q {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Parses a snapshot back into its header lines and values.
#[cfg(test)]
pub fn read_snapshot(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let bytes = std::fs::read(path)?;
    let marker = b"end_header\n";
    let pos = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .context("snapshot has no end_header line")?;
    let header = String::from_utf8(bytes[..pos].to_vec())?.lines().map(str::to_string).collect();
    let data = bytes[pos + marker.len()..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = StructuredGrid::new([0.0; 3], [1.0, 1.0, 2.0], [3, 1, 2]).unwrap();
        let field = ConservedField::from_fn(&grid, |i, _, k| [i as f64, k as f64, 0.5, -1.0, 1e-300]);
        let path = write_snapshot(dir.path(), 1, 3, 0.25, &grid, &field).unwrap();
        let (header, data) = read_snapshot(&path).unwrap();
        assert!(header.contains(&"dims 3 1 2".to_string()));
        assert_eq!(data.len(), 30);
        let flat: Vec<f64> = field.as_slice().iter().flatten().copied().collect();
        assert_eq!(data, flat);
    }
}
