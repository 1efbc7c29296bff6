//! Matrix files.
//!
//! Binary layout: `b"CDM1"`, `u32` rows, `u32` cols, `u8` element tag
//! (`0` = `i64`), then `rows * cols` little-endian `i64` entries in row-major
//! order. A whitespace-separated text form (`rows cols` followed by the
//! entries) is accepted on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"CDM1";
pub const TAG_I64: u8 = 0;

pub fn write_binary<W: Write>(m: &Matrix<i64>, mut w: W) -> Result<()> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format("rows exceed u32".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Format("cols exceed u32".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    w.write_all(&[TAG_I64])?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_binary_body<R: Read>(mut r: R) -> Result<Matrix<i64>> {
    let mut header = [0u8; 9];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let rows = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    if header[8] != TAG_I64 {
        return Err(Error::Format(format!("unsupported element tag {}", header[8])));
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut buf = [0u8; 8];
    for _ in 0..rows * cols {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Format(format!("expected {} entries", rows * cols)))?;
        data.push(i64::from_le_bytes(buf));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after entries".into()));
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn parse_text(text: &str) -> Result<Matrix<i64>> {
    let mut tokens = text.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what}")))?
            .parse()
            .map_err(|e| Error::Format(format!("bad {what}: {e}")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let data = tokens
        .map(|t| {
            t.parse::<i64>()
                .map_err(|e| Error::Format(format!("bad entry {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Format(format!(
            "expected {} entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn to_text(m: &Matrix<i64>) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let line: Vec<String> = (0..m.cols()).map(|c| m.get(r, c).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads either format, detected by the magic prefix.
pub fn read_matrix<R: Read>(r: R) -> Result<Matrix<i64>> {
    let mut r = BufReader::new(r);
    let mut magic = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        let n = r.read(&mut magic[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    if filled == 4 && &magic == MAGIC {
        return read_binary_body(r);
    }
    let mut rest = String::new();
    r.read_to_string(&mut rest)?;
    let head =
        std::str::from_utf8(&magic[..filled]).map_err(|_| Error::Format("neither CDM1 binary nor text".into()))?;
    parse_text(&format!("{head}{rest}"))
}

pub fn load(path: &Path) -> Result<Matrix<i64>> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix(file)
}

pub fn save(m: &Matrix<i64>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_binary(m, BufWriter::new(file))
}

/// Uniform integer entries in `[0, bound]`, or `[-bound, bound]` when `signed`.
pub fn random_matrix(rows: usize, cols: usize, bound: u32, signed: bool, seed: u64) -> Matrix<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = bound as i64;
    let lo = if signed { -hi } else { 0 };
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..=hi))
}
