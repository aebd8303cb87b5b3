//! On-disk storage for `spt2` tables.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "SPT2"
//! version  u32      generating-function code version
//! N        u64      largest index
//! values   N + 1 variable-length signed integers
//! ```
//!
//! Each value is zigzag-mapped (`v >= 0 -> 2v`, `v < 0 -> -2v - 1`) and the
//! resulting natural number is written as unsigned LEB128: 7 bits per byte,
//! least significant group first, high bit set on every byte but the last.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::spt::{Oracle, Spt2Table, SptError, GENFUNC_VERSION};

pub const MAGIC: &[u8; 4] = b"SPT2";

/// Environment variable that overrides the default cache directory.
pub const CACHE_DIR_ENV: &str = "SPT2_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}: not an spt2 table")]
    BadMagic([u8; 4]),
    #[error("table version {found} does not match code version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("table ends early: expected {expected} values, got {got}")]
    Truncated { expected: u64, got: u64 },
    #[error("varint overflows the remaining input")]
    BadVarint,
    #[error(transparent)]
    Table(#[from] SptError),
}

impl CacheError {
    /// Corruption, as opposed to an I/O failure.
    pub fn is_corruption(&self) -> bool {
        !matches!(self, CacheError::Io(_))
    }
}

fn write_varint(w: &mut impl Write, v: &BigInt) -> io::Result<()> {
    let two = BigInt::from(2);
    let zz: BigInt = if v.is_negative() {
        -(v * &two) - 1
    } else {
        v * &two
    };
    let (_, mut mag): (Sign, BigUint) = zz.into_parts();
    loop {
        let low = (mag.iter_u32_digits().next().unwrap_or(0) & 0x7f) as u8;
        mag >>= 7;
        if mag.is_zero() {
            return w.write_all(&[low]);
        }
        w.write_all(&[low | 0x80])?;
    }
}

fn read_varint(r: &mut impl Read) -> Result<Option<BigInt>, CacheError> {
    let mut groups: Vec<u8> = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte)? {
            0 if groups.is_empty() => return Ok(None),
            0 => return Err(CacheError::BadVarint),
            _ => {}
        }
        groups.push(byte[0] & 0x7f);
        if byte[0] & 0x80 == 0 {
            break;
        }
    }
    let mut mag = BigUint::zero();
    for &g in groups.iter().rev() {
        mag <<= 7;
        mag += g as u32;
    }
    let zz = BigInt::from(mag);
    let one = BigInt::from(1);
    Ok(Some(if (&zz & &one).is_zero() {
        zz >> 1
    } else {
        let half: BigInt = (zz + one) >> 1;
        -half
    }))
}

pub fn write_table(w: &mut impl Write, table: &Spt2Table) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&GENFUNC_VERSION.to_le_bytes())?;
    w.write_all(&(table.n_max() as u64).to_le_bytes())?;
    for v in table.values() {
        write_varint(w, v)?;
    }
    Ok(())
}

pub fn read_table(r: &mut impl Read) -> Result<Spt2Table, CacheError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CacheError::BadMagic(magic));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != GENFUNC_VERSION {
        return Err(CacheError::VersionMismatch {
            found: version,
            expected: GENFUNC_VERSION,
        });
    }
    let mut dword = [0u8; 8];
    r.read_exact(&mut dword)?;
    let n_max = u64::from_le_bytes(dword);
    let expected = n_max + 1;
    let mut values = Vec::with_capacity(expected.min(1 << 20) as usize);
    while (values.len() as u64) < expected {
        match read_varint(r)? {
            Some(v) => values.push(v),
            None => {
                return Err(CacheError::Truncated {
                    expected,
                    got: values.len() as u64,
                })
            }
        }
    }
    Ok(Spt2Table::from_values(values, Oracle::Genfunc)?)
}

/// `n,spt2(n)` rows, no header.
pub fn write_csv(w: &mut impl Write, table: &Spt2Table) -> io::Result<()> {
    for (n, v) in table.values().iter().enumerate() {
        writeln!(w, "{n},{v}")?;
    }
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<Vec<(usize, BigInt)>, CacheError> {
    let bad = |line: &str| {
        CacheError::Io(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("malformed csv row {line:?}"),
        ))
    };
    let mut rows = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (n, v) = line.split_once(',').ok_or_else(|| bad(&line))?;
        let n = n.trim().parse().map_err(|_| bad(&line))?;
        let v = v.trim().parse().map_err(|_| bad(&line))?;
        rows.push((n, v));
    }
    Ok(rows)
}

/// Directory of cached tables, keyed by `(N, GENFUNC_VERSION)`.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    /// `$SPT2_CACHE_DIR`, else `.spt2-cache` in the working directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".spt2-cache"));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n_max: usize) -> PathBuf {
        self.dir
            .join(format!("spt2-v{GENFUNC_VERSION}-n{n_max}.bin"))
    }

    /// Cached bounds for the current version, ascending.
    fn cached_bounds(&self) -> Vec<usize> {
        let prefix = format!("spt2-v{GENFUNC_VERSION}-n");
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return Vec::new();
        };
        let mut bounds: Vec<usize> = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix(&prefix)?
                    .strip_suffix(".bin")?
                    .parse()
                    .ok()
            })
            .collect();
        bounds.sort_unstable();
        bounds
    }

    pub fn load(&self, path: &Path) -> Result<Spt2Table, CacheError> {
        let mut r = BufReader::new(fs::File::open(path)?);
        read_table(&mut r)
    }

    pub fn store(&self, table: &Spt2Table) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(table.n_max());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            write_table(&mut w, table)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads the smallest cached table covering `n_max`, or builds one from
    /// the generating function and stores it. Corrupt files are reported,
    /// not silently rebuilt.
    pub fn load_or_build(&self, n_max: usize) -> Result<Spt2Table, CacheError> {
        if let Some(&bound) = self.cached_bounds().iter().find(|&&b| b >= n_max) {
            let table = self.load(&self.path_for(bound))?;
            return Ok(table.truncated(n_max)?);
        }
        let table = Spt2Table::by_genfunc(n_max);
        self.store(&table)?;
        Ok(table)
    }
}
