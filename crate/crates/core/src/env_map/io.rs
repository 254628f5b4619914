//! PGM and CSV raster input; run-length JSON and PGM output for occupancy grids.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, GridMap, RasterMap};
use crate::error::{Error, Result};
use crate::Point2;

fn map_err(path: &Path, reason: impl ToString) -> Error {
    Error::MapRead { path: path.to_path_buf(), reason: reason.to_string() }
}

/// Parses a P2 (ASCII) or P5 (binary, 8 or 16 bit) graymap into intensities in `[0, 1]`.
pub fn parse_pgm(bytes: &[u8], cell_size: f64) -> Result<RasterMap> {
    let mut pos = 0;
    let mut next_token = |bytes: &[u8]| -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (start < pos).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let bad = |m: &str| Error::InvalidInput(format!("malformed PGM: {m}"));

    let magic = next_token(bytes).ok_or_else(|| bad("missing magic"))?;
    let mut header = [0usize; 3];
    for h in header.iter_mut() {
        *h = next_token(bytes)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad header field"))?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let n = width * height;
    let scale = maxval as f64;
    let data: Vec<f64> = match magic.as_str() {
        "P2" => {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let v: usize = next_token(bytes)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| bad("truncated pixel data"))?;
                out.push((v.min(maxval)) as f64 / scale);
            }
            out
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            let raw = bytes.get(start..start + need).ok_or_else(|| bad("truncated pixel data"))?;
            if wide {
                raw.chunks_exact(2)
                    .map(|c| (u16::from_be_bytes([c[0], c[1]]) as usize).min(maxval) as f64 / scale)
                    .collect()
            } else {
                raw.iter().map(|&b| (b as usize).min(maxval) as f64 / scale).collect()
            }
        }
        other => return Err(bad(&format!("unsupported magic {other}"))),
    };
    RasterMap::grayscale(width, height, cell_size, data)
}

pub fn read_pgm(path: &Path, cell_size: f64) -> Result<RasterMap> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| map_err(path, e))?;
    parse_pgm(&bytes, cell_size).map_err(|e| map_err(path, e))
}

/// Flat CSV of intensities, one grid row (constant y) per line, no header.
pub fn parse_csv_grid(text: &str, cell_size: f64) -> Result<RasterMap> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(Error::InvalidInput(format!("ragged CSV grid at row {height}")));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad intensity `{field}` at row {height}")))?;
            data.push(v);
        }
        height += 1;
    }
    RasterMap::grayscale(width.unwrap_or(0), height, cell_size, data)
}

pub fn read_csv_grid(path: &Path, cell_size: f64) -> Result<RasterMap> {
    let text = std::fs::read_to_string(path).map_err(|e| map_err(path, e))?;
    parse_csv_grid(&text, cell_size).map_err(|e| map_err(path, e))
}

/// Binary P5 rendering: feasible white, forbidden black.
pub fn write_pgm<W: Write>(map: &GridMap, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", map.width(), map.height())?;
    let bytes: Vec<u8> = map
        .occupancy()
        .iter()
        .map(|c| if *c == Cell::Feasible { 255 } else { 0 })
        .collect();
    out.write_all(&bytes)?;
    Ok(())
}

/// Serialized form of a [`GridMap`]: occupancy as `[cell, run_length]` pairs in storage order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMapRecord {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub origin: Point2,
    pub depth_limit: f64,
    pub runs: Vec<(Cell, usize)>,
}

impl From<&GridMap> for GridMapRecord {
    fn from(map: &GridMap) -> Self {
        let mut runs: Vec<(Cell, usize)> = Vec::new();
        for &c in map.occupancy() {
            match runs.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => runs.push((c, 1)),
            }
        }
        Self {
            width: map.width(),
            height: map.height(),
            cell_size: map.cell_size(),
            origin: map.origin(),
            depth_limit: map.depth_limit(),
            runs,
        }
    }
}

impl TryFrom<GridMapRecord> for GridMap {
    type Error = Error;

    fn try_from(r: GridMapRecord) -> Result<Self> {
        let mut occ = Vec::with_capacity(r.width * r.height);
        for (c, n) in r.runs {
            occ.extend(std::iter::repeat_n(c, n));
        }
        GridMap::new(r.width, r.height, r.cell_size, r.origin, r.depth_limit, occ)
    }
}

impl Serialize for GridMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridMapRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = GridMapRecord::deserialize(d)?;
        GridMap::try_from(rec).map_err(serde::de::Error::custom)
    }
}
