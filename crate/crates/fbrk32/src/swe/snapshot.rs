//! State snapshots in two interchangeable formats:
//!
//! * CSV with header `field,i,j,value`, one row per grid point per field
//!   (`h`, `u`, `v`), floats printed in shortest round-trip form;
//! * binary: magic `SWEP`, little-endian u32 nx, ny, and field count, then
//!   each field as row-major (i-major) little-endian f64.

use super::{Grid, SWEState, SweError};
use std::io::{self, BufRead, Read, Write};

pub const BINARY_MAGIC: &[u8; 4] = b"SWEP";
const FIELD_NAMES: [&str; 3] = ["h", "u", "v"];

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Swe(#[from] SweError),
}

fn fields_of(state: &SWEState) -> [&Vec<f64>; 3] {
    [&state.h, &state.u, &state.v]
}

pub fn write_csv(w: &mut dyn Write, state: &SWEState, grid: &Grid) -> Result<(), SnapshotError> {
    writeln!(w, "field,i,j,value")?;
    for (name, data) in FIELD_NAMES.iter().zip(fields_of(state)) {
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                writeln!(w, "{name},{i},{j},{}", data[grid.idx(i, j)])?;
            }
        }
    }
    Ok(())
}

pub fn read_csv(r: impl BufRead) -> Result<(SWEState, Grid), SnapshotError> {
    let mut rows: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut nx = 0usize;
    let mut ny = 0usize;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if lineno == 0 {
            if line != "field,i,j,value" {
                return Err(SnapshotError::Format(format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(field), Some(i), Some(j), Some(value), None) = (
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
        ) else {
            return Err(SnapshotError::Format(format!(
                "line {} does not have 4 columns",
                lineno + 1
            )));
        };
        let fidx = FIELD_NAMES
            .iter()
            .position(|n| *n == field)
            .ok_or_else(|| SnapshotError::Format(format!("unknown field '{field}'")))?;
        let parse_err =
            |what: &str| SnapshotError::Format(format!("bad {what} on line {}", lineno + 1));
        let i: usize = i.parse().map_err(|_| parse_err("i index"))?;
        let j: usize = j.parse().map_err(|_| parse_err("j index"))?;
        let value: f64 = value.parse().map_err(|_| parse_err("value"))?;
        nx = nx.max(i + 1);
        ny = ny.max(j + 1);
        rows.push((fidx, i, j, value));
    }
    let grid = Grid::new(nx, ny, 1.0, 1.0)?;
    let n = grid.n();
    if rows.len() != 3 * n {
        return Err(SnapshotError::Format(format!(
            "expected {} data rows for a {}x{} grid, found {}",
            3 * n,
            nx,
            ny,
            rows.len()
        )));
    }
    let mut state = SWEState {
        h: vec![f64::NAN; n],
        u: vec![f64::NAN; n],
        v: vec![f64::NAN; n],
    };
    for (fidx, i, j, value) in rows {
        let dest = match fidx {
            0 => &mut state.h,
            1 => &mut state.u,
            _ => &mut state.v,
        };
        dest[grid.idx(i, j)] = value;
    }
    if !state.all_finite() {
        return Err(SnapshotError::Format(
            "snapshot has missing or non-finite entries".into(),
        ));
    }
    Ok((state, grid))
}

pub fn write_binary(w: &mut dyn Write, state: &SWEState, grid: &Grid) -> Result<(), SnapshotError> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(grid.nx as u32).to_le_bytes())?;
    w.write_all(&(grid.ny as u32).to_le_bytes())?;
    w.write_all(&3u32.to_le_bytes())?;
    for data in fields_of(state) {
        for x in data {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<(SWEState, Grid), SnapshotError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != BINARY_MAGIC {
        return Err(SnapshotError::Format("bad magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().unwrap()) as usize;
    let (nx, ny, nfields) = (word(4), word(8), word(12));
    if nfields != 3 {
        return Err(SnapshotError::Format(format!(
            "expected 3 fields, header says {nfields}"
        )));
    }
    let grid = Grid::new(nx, ny, 1.0, 1.0)?;
    let n = grid.n();
    let mut read_field = || -> Result<Vec<f64>, SnapshotError> {
        let mut buf = vec![0u8; 8 * n];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let h = read_field()?;
    let u = read_field()?;
    let v = read_field()?;
    Ok((SWEState { h, u, v }, grid))
}
