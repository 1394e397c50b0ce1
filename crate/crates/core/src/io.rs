//! Field and report serialization.
//!
//! Three formats, all stable and documented here:
//!
//! **BFLD** — binary complex field dump, little-endian throughout:
//!
//! ```text
//!   bytes 0..4    magic "BFLD"
//!   bytes 4..8    format version, u32 (currently 1)
//!   bytes 8..12   n_side, u32 (power of two)
//!   bytes 12..20  half_width, f64
//!   then          n_side^2 samples, row-major, each (re: f64, im: f64)
//! ```
//!
//! **CSV** — `x,y,re,im` per node, row-major, with a header line. Export
//! only; the binary format is the interchange format.
//!
//! **Manifest** — plain-text `key=value` run summary. One pair per line,
//! `#` starts a comment, blank lines ignored, keys are dotted lowercase
//! identifiers, values are rendered with Rust's shortest-roundtrip float
//! formatting, and lists are comma-separated. Writing preserves insertion
//! order so identical runs produce byte-identical manifests.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec};

const MAGIC: &[u8; 4] = b"BFLD";
const VERSION: u32 = 1;

/// Write a field in the BFLD binary format.
pub fn write_bfld(field: &ComplexField, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(20 + 16 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.n_side() as u32).to_le_bytes());
    buf.extend_from_slice(&g.half_width().to_le_bytes());
    for s in field.samples() {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Read a BFLD file back into a field.
pub fn read_bfld(path: &Path) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 20 {
        return Err(Error::Format("file shorter than the 20-byte header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_side = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let half_width = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let grid = GridSpec::new(n_side, half_width)?;
    let expected = 20 + 16 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload size {} does not match header ({} expected)",
            bytes.len(),
            expected
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let off = 20 + 16 * k;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        samples.push(Complex64::new(re, im));
    }
    ComplexField::from_samples(grid, samples)
}

/// Write a field as `x,y,re,im` CSV (row-major, header included).
pub fn write_csv(field: &ComplexField, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut out = String::with_capacity(32 * g.len());
    out.push_str("x,y,re,im\n");
    for (row, col, z) in g.iter() {
        let s = field.samples()[g.index(row, col)];
        writeln!(out, "{},{},{},{}", z.re, z.im, s.re, s.im).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Ordered `key=value` run manifest. See the module docs for the grammar.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_list<T: std::fmt::Display>(&mut self, key: &str, values: &[T]) {
        let joined =
            values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        self.entries.push((key.to_string(), joined));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Render in insertion order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}").expect("string write");
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }

    /// Parse manifest text. Malformed lines (no `=`, empty key) are errors;
    /// duplicate keys keep the last value for lookup but are preserved in
    /// order for rendering.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::Manifest {
                    line: idx + 1,
                    message: format!("expected key=value, got `{line}`"),
                });
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() {
                return Err(Error::Manifest { line: idx + 1, message: "empty key".into() });
            }
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(Manifest { entries })
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }
}
