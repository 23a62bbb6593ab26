//! Binary and CSV exports.
//!
//! MAGW layout (little-endian): `b"MAGW"`, `u32` version, `u64` rows,
//! `u64` cols, `f64` hbar, then `rows * cols` complex entries in row-major
//! order, each as `f64` real part followed by `f64` imaginary part.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::phasespace::PhaseGrid;
use crate::C64;

pub const MAGW_MAGIC: &[u8; 4] = b"MAGW";
pub const MAGW_VERSION: u32 = 1;
pub const MAGW_HEADER_LEN: usize = 32;

/// Matrices at most this many entries per side are also written as CSV.
pub const CSV_MATRIX_LIMIT: usize = 256;

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_magw<W: Write>(mut w: W, m: &Array2<C64>, hbar: f64) -> Result<()> {
    let mut head = Vec::with_capacity(MAGW_HEADER_LEN);
    head.extend_from_slice(MAGW_MAGIC);
    head.extend_from_slice(&MAGW_VERSION.to_le_bytes());
    head.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    head.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    head.extend_from_slice(&hbar.to_le_bytes());
    w.write_all(&head)?;
    let mut body = Vec::with_capacity(16 * m.len());
    for z in m.iter() {
        body.extend_from_slice(&z.re.to_le_bytes());
        body.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_magw<R: Read>(mut r: R) -> Result<(Array2<C64>, f64)> {
    let mut head = [0u8; MAGW_HEADER_LEN];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGW_MAGIC {
        return Err(Error::Parse {
            what: "MAGW",
            detail: "bad magic".into(),
        });
    }
    let word = |a: usize| u64::from_le_bytes(head[a..a + 8].try_into().unwrap());
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != MAGW_VERSION {
        return Err(Error::Parse {
            what: "MAGW",
            detail: format!("unsupported version {version}"),
        });
    }
    let (rows, cols) = (word(8) as usize, word(16) as usize);
    let hbar = f64::from_le_bytes(head[24..32].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 16 * rows * cols {
        return Err(Error::Parse {
            what: "MAGW",
            detail: format!("body has {} bytes, expected {}", body.len(), 16 * rows * cols),
        });
    }
    let f = |a: usize| f64::from_le_bytes(body[a..a + 8].try_into().unwrap());
    let data = (0..rows * cols).map(|i| C64::new(f(16 * i), f(16 * i + 8))).collect();
    let m = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Parse {
        what: "MAGW",
        detail: e.to_string(),
    })?;
    Ok((m, hbar))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Long-format matrix CSV: `row,col,re,im`.
pub fn write_matrix_csv<W: Write>(w: W, m: &Array2<C64>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["row", "col", "re", "im"]).map_err(csv_err)?;
    for ((i, j), z) in m.indexed_iter() {
        wr.write_record([i.to_string(), j.to_string(), sci(z.re), sci(z.im)])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn phase_header(prefix: [&str; 2], dim: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=dim).map(|j| format!("{}_{j}", prefix[0])).collect();
    h.extend((1..=dim).map(|j| format!("{}_{j}", prefix[1])));
    h
}

fn phase_coords(grid: &PhaseGrid, idx: usize) -> Vec<String> {
    let n = grid.dim();
    let mut x = vec![0.0; n];
    let mut xi = vec![0.0; n];
    grid.point(idx, &mut x, &mut xi);
    x.iter().chain(&xi).map(|v| sci(*v)).collect()
}

/// Husimi CSV with columns `y_1..y_N, eta_1..eta_N, H`.
pub fn write_husimi_csv<W: Write>(w: W, grid: &PhaseGrid, h: &[f64]) -> Result<()> {
    crate::error::check_dim(grid.len(), h.len())?;
    let mut wr = csv::Writer::from_writer(w);
    let mut head = phase_header(["y", "eta"], grid.dim());
    head.push("H".into());
    wr.write_record(&head).map_err(csv_err)?;
    for (i, v) in h.iter().enumerate() {
        let mut rec = phase_coords(grid, i);
        rec.push(sci(*v));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reproducing kernel CSV: `y_*, eta_*, z_*, zeta_*, re, im`.
pub fn write_kernel_csv<W: Write>(w: W, grid: &PhaseGrid, k: &Array2<C64>) -> Result<()> {
    if k.dim() != (grid.len(), grid.len()) {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: k.nrows(),
        });
    }
    let mut wr = csv::Writer::from_writer(w);
    let mut head = phase_header(["y", "eta"], grid.dim());
    head.extend(phase_header(["z", "zeta"], grid.dim()));
    head.extend(["re".to_string(), "im".to_string()]);
    wr.write_record(&head).map_err(csv_err)?;
    let coords: Vec<Vec<String>> = (0..grid.len()).map(|i| phase_coords(grid, i)).collect();
    for ((i, j), z) in k.indexed_iter() {
        let mut rec = coords[i].clone();
        rec.extend(coords[j].iter().cloned());
        rec.push(sci(z.re));
        rec.push(sci(z.im));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}
