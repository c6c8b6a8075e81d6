//! Dataset files.
//!
//! Binary layout (all little-endian):
//!
//! | bytes      | field                                   |
//! |------------|-----------------------------------------|
//! | 4          | magic `DLSH`                            |
//! | 4          | format version, `u32` (= 1)             |
//! | 8          | `n`, `u64`                              |
//! | 4          | `d`, `u32`                              |
//! | 8          | metric `p` as `f64` (1.0 or 2.0)        |
//! | 8·n·d      | coordinates, `f64`, row-major           |
//!
//! CSV: one point per line, comma-separated decimals, with an optional first line `# n=<n> d=<d>`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dataset, Metric};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"DLSH";
const VERSION: u32 = 1;

pub fn write_binary<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(ds.len() as u64).to_le_bytes())?;
    w.write_all(&(ds.dim() as u32).to_le_bytes())?;
    w.write_all(&ds.metric().p().to_le_bytes())?;
    for c in ds.coords() {
        w.write_all(&c.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::format(format!("truncated file while reading {what}")),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Dataset> {
    let magic: [u8; 4] = read_exact(&mut r, "magic")?;
    if &magic != MAGIC {
        return Err(Error::format(format!("bad magic bytes {magic:?}, expected \"DLSH\"")));
    }
    let version = u32::from_le_bytes(read_exact(&mut r, "version")?);
    if version != VERSION {
        return Err(Error::format(format!("unsupported dataset format version {version}")));
    }
    let n = u64::from_le_bytes(read_exact(&mut r, "n")?) as usize;
    let d = u32::from_le_bytes(read_exact(&mut r, "d")?) as usize;
    let metric = Metric::from_p(f64::from_le_bytes(read_exact(&mut r, "metric")?))
        .map_err(|e| Error::format(e.to_string()))?;
    if n == 0 || d == 0 {
        return Err(Error::format(format!("empty dataset header (n = {n}, d = {d})")));
    }
    let total = n
        .checked_mul(d)
        .ok_or_else(|| Error::format("header size overflows"))?;
    let mut coords = Vec::with_capacity(total.min(1 << 24));
    for _ in 0..total {
        coords.push(f64::from_le_bytes(read_exact(&mut r, "coordinates")?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::format("trailing bytes after coordinate payload"));
    }
    Dataset::from_flat(d, coords, metric)
}

pub fn save_binary(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_binary(ds, BufWriter::new(File::create(path)?))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<Dataset> {
    read_binary(BufReader::new(File::open(path)?))
}

pub fn write_csv<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    writeln!(w, "# n={} d={}", ds.len(), ds.dim())?;
    for p in ds.points() {
        let mut first = true;
        for c in p {
            if !first {
                w.write_all(b",")?;
            }
            // `Display` for f64 prints the shortest string that parses back to the same bits.
            write!(w, "{c}")?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(ds, BufWriter::new(File::create(path)?))
}

fn parse_header(line: &str) -> Result<(Option<usize>, Option<usize>)> {
    let mut n = None;
    let mut d = None;
    for tok in line.trim_start_matches('#').split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::format(format!("malformed header token {tok:?}")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::format(format!("malformed header value {tok:?}")))?;
        match key {
            "n" => n = Some(value),
            "d" => d = Some(value),
            _ => return Err(Error::format(format!("unknown header key {key:?}"))),
        }
    }
    Ok((n, d))
}

/// Reads CSV rows. Blank lines are skipped.
pub fn read_csv<R: BufRead>(r: R, metric: Metric) -> Result<Dataset> {
    let mut expected = (None, None);
    let mut dim = None;
    let mut coords = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if lineno == 0 {
                expected = parse_header(line)?;
                continue;
            }
            return Err(Error::format(format!("line {}: header allowed only on the first line", lineno + 1)));
        }
        let before = coords.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(format!("line {}: cannot parse {field:?} as a number", lineno + 1))
            })?;
            coords.push(v);
        }
        let width = coords.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::format(format!(
                    "line {}: expected {d} columns, found {width}",
                    lineno + 1
                )))
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| Error::format("CSV contains no points"))?;
    let n = coords.len() / dim;
    if let Some(en) = expected.0 {
        if en != n {
            return Err(Error::format(format!("header declares n={en}, file has {n} rows")));
        }
    }
    if let Some(ed) = expected.1 {
        if ed != dim {
            return Err(Error::format(format!("header declares d={ed}, file has {dim} columns")));
        }
    }
    Dataset::from_flat(dim, coords, metric)
}

pub fn load_csv(path: impl AsRef<Path>, metric: Metric) -> Result<Dataset> {
    read_csv(BufReader::new(File::open(path)?), metric)
}

/// Loads by extension: `.csv` as CSV (with `csv_metric`), anything else as binary.
pub fn load(path: impl AsRef<Path>, csv_metric: Metric) -> Result<Dataset> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        load_csv(path, csv_metric)
    } else {
        load_binary(path)
    }
}
