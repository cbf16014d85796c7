//! Flat binary and CSV serialisation of field snapshots.
//!
//! Binary layout: a 12-byte header of three little-endian `u32` words
//! `(d, M, field count)`, followed by `field count` blocks of `M^d`
//! little-endian `f64` values in row-major order. A pair snapshot stores
//! `rho` first, then the momentum components in axis order.

use super::grid::TorusGrid;
use super::pair::PairState;
use super::scalar::ScalarField;
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

pub fn write_fields(path: &Path, grid: TorusGrid, fields: &[&ScalarField]) -> Result<()> {
    for f in fields {
        if f.grid() != grid {
            return Err(Error::SizeMismatch(
                "snapshot fields on different grids".into(),
            ));
        }
    }
    let mut buf = Vec::with_capacity(12 + fields.len() * grid.len() * 8);
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    for f in fields {
        for v in f.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    atomic_write(path, &buf)
}

pub fn read_fields(path: &Path) -> Result<(TorusGrid, Vec<ScalarField>)> {
    let mut file = std::fs::File::open(path)?;
    let mut header = [0u8; 12];
    file.read_exact(&mut header)?;
    let d = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let grid = TorusGrid::new(d, m)?;
    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    if payload.len() != count * grid.len() * 8 {
        return Err(Error::SizeMismatch(format!(
            "snapshot payload has {} bytes, expected {}",
            payload.len(),
            count * grid.len() * 8
        )));
    }
    let mut fields = Vec::with_capacity(count);
    for c in 0..count {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let off = (c * grid.len() + i) * 8;
            values.push(f64::from_le_bytes(
                payload[off..off + 8].try_into().unwrap(),
            ));
        }
        fields.push(ScalarField::from_values(grid, values)?);
    }
    Ok((grid, fields))
}

pub fn write_pair_snapshot(path: &Path, state: &PairState) -> Result<()> {
    let mut fields: Vec<&ScalarField> = vec![&state.rho];
    fields.extend(state.momentum.iter());
    write_fields(path, state.rho.grid(), &fields)
}

pub fn read_pair_snapshot(path: &Path, time: f64) -> Result<PairState> {
    let (grid, mut fields) = read_fields(path)?;
    if fields.len() != grid.dim() + 1 {
        return Err(Error::SizeMismatch(format!(
            "pair snapshot needs {} fields, found {}",
            grid.dim() + 1,
            fields.len()
        )));
    }
    let rho = fields.remove(0);
    PairState::new(rho, fields, time)
}

/// CSV dump of a small grid: one row per node, coordinates then values.
pub fn write_fields_csv(
    path: &Path,
    grid: TorusGrid,
    fields: &[(&str, &ScalarField)],
) -> Result<()> {
    for (_, f) in fields {
        if f.grid() != grid {
            return Err(Error::SizeMismatch(
                "snapshot fields on different grids".into(),
            ));
        }
    }
    let mut out = String::new();
    for a in 0..grid.dim() {
        out.push_str(&format!("x{a},"));
    }
    let names: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for flat in 0..grid.len() {
        let node = grid.node(flat);
        for c in &node {
            out.push_str(&format!("{c},"));
        }
        let row: Vec<String> = fields
            .iter()
            .map(|(_, f)| format!("{}", f.values()[flat]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Write to a sibling temporary file, then rename into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
