//! Field snapshot files: a `key: value` text header closed by a line
//! `end`, then little-endian `f64` values in row-major order (component
//! after component for vector fields).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{CmmError, Result};

pub const SNAPSHOT_MAGIC: &str = "cmm-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSnapshot {
    pub problem: String,
    pub field: String,
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Lower-left corner of the sampled window.
    pub x0: f64,
    pub y0: f64,
    /// 1 for scalars, 2 for vectors.
    pub components: usize,
    pub data: Vec<f64>,
}

impl FieldSnapshot {
    pub fn scalar(problem: &str, field: &str, t: f64, n: usize, data: Vec<f64>) -> Result<Self> {
        let s = Self {
            problem: problem.into(),
            field: field.into(),
            t,
            nx: n,
            ny: n,
            lx: std::f64::consts::TAU,
            ly: std::f64::consts::TAU,
            x0: 0.0,
            y0: 0.0,
            components: 1,
            data,
        };
        s.check()?;
        Ok(s)
    }

    pub fn vector(problem: &str, field: &str, t: f64, n: usize, x: &[f64], y: &[f64]) -> Result<Self> {
        let mut data = x.to_vec();
        data.extend_from_slice(y);
        let s = Self {
            components: 2,
            data,
            ..Self::scalar(problem, field, t, n, vec![0.0; n * n])?
        };
        s.check()?;
        Ok(s)
    }

    /// Places the samples on the window `[x0, x0 + w) × [y0, y0 + w)`.
    pub fn on_window(mut self, x0: f64, y0: f64, w: f64) -> Self {
        (self.x0, self.y0, self.lx, self.ly) = (x0, y0, w, w);
        self
    }

    /// Values of component `c`.
    pub fn component(&self, c: usize) -> &[f64] {
        let m = self.nx * self.ny;
        &self.data[c * m..(c + 1) * m]
    }

    fn check(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(CmmError::Format(format!("empty grid {}x{}", self.nx, self.ny)));
        }
        if !(1..=2).contains(&self.components) {
            return Err(CmmError::Format(format!("{} components", self.components)));
        }
        let want = self.components * self.nx * self.ny;
        if self.data.len() != want {
            return Err(CmmError::Format(format!(
                "payload holds {} values, expected {want}",
                self.data.len()
            )));
        }
        for s in [&self.problem, &self.field] {
            if s.is_empty() || s.contains(['\n', '\r']) {
                return Err(CmmError::Format(format!("bad header text {s:?}")));
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.check()?;
        write!(
            w,
            "{SNAPSHOT_MAGIC}\nversion: {SNAPSHOT_VERSION}\nproblem: {}\nfield: {}\nt: {}\nnx: {}\nny: {}\nlx: {}\nly: {}\nx0: {}\ny0: {}\ncomponents: {}\nend\n",
            self.problem, self.field, self.t, self.nx, self.ny, self.lx, self.ly, self.x0, self.y0, self.components
        )?;
        write_f64s(&mut w, &self.data)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let header = read_header(&mut r, SNAPSHOT_MAGIC)?;
        let get = |k: &str| header.get(k);
        let mut s = Self {
            problem: get("problem")?.to_string(),
            field: get("field")?.to_string(),
            t: header.parse("t")?,
            nx: header.parse("nx")?,
            ny: header.parse("ny")?,
            lx: header.parse("lx")?,
            ly: header.parse("ly")?,
            x0: header.parse("x0")?,
            y0: header.parse("y0")?,
            components: header.parse("components")?,
            data: Vec::new(),
        };
        if s.nx == 0 || s.ny == 0 {
            return Err(CmmError::Format(format!("empty grid {}x{}", s.nx, s.ny)));
        }
        s.data = read_f64s(&mut r, s.components * s.nx * s.ny)?;
        expect_eof(&mut r)?;
        s.check()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

/// Parsed `key: value` header lines.
#[derive(Clone, Debug, Default)]
pub(crate) struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn get(&self, k: &str) -> Result<&str> {
        self.entries
            .iter()
            .find(|e| e.0 == k)
            .map(|e| e.1.as_str())
            .ok_or_else(|| CmmError::Format(format!("header lacks {k:?}")))
    }

    pub fn parse<N: std::str::FromStr>(&self, k: &str) -> Result<N> {
        let v = self.get(k)?;
        v.parse()
            .map_err(|_| CmmError::Format(format!("header {k}: cannot parse {v:?}")))
    }
}

/// Reads the magic line, the version and the header up to `end`.
pub(crate) fn read_header<R: BufRead>(r: &mut R, magic: &str) -> Result<Header> {
    let mut line = String::new();
    let next = |r: &mut R, line: &mut String| -> Result<bool> {
        line.clear();
        let n = r.read_line(line)?;
        if n == 0 {
            return Ok(false);
        }
        if line.ends_with('\n') {
            line.pop();
        }
        Ok(true)
    };
    if !next(r, &mut line)? || line != magic {
        return Err(CmmError::Format(format!("not a {magic} file")));
    }
    let mut h = Header::default();
    loop {
        if !next(r, &mut line)? {
            return Err(CmmError::Format("truncated header".into()));
        }
        if line == "end" {
            break;
        }
        let (k, v) = line
            .split_once(": ")
            .ok_or_else(|| CmmError::Format(format!("bad header line {line:?}")))?;
        h.entries.push((k.to_string(), v.to_string()));
    }
    let version: u32 = h.parse("version")?;
    if version != SNAPSHOT_VERSION {
        return Err(CmmError::Format(format!(
            "format version {version} unsupported (expected {SNAPSHOT_VERSION})"
        )));
    }
    Ok(h)
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * v.len());
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => CmmError::Format(format!("truncated payload, expected {n} values")),
        _ => CmmError::Io(e),
    })?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub(crate) fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut b = [0u8; 1];
    if r.read(&mut b)? != 0 {
        return Err(CmmError::Format("trailing bytes after payload".into()));
    }
    Ok(())
}
