//! Output files: CSV with an embedded config line, JSON documents, raw f64
//! matrices with a JSON sidecar.

use serde_json::Value;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Self {
        match path {
            Some(p) => Sink::File(p.to_path_buf()),
            None => Sink::Stdout,
        }
    }

    fn open(&self) -> io::Result<Box<dyn Write>> {
        Ok(match self {
            Sink::Stdout => Box::new(io::stdout().lock()),
            Sink::File(p) => Box::new(BufWriter::new(File::create(p)?)),
        })
    }
}

/// Table whose first line is `# config: {...}`; readers that skip `#`
/// comments see plain CSV.
pub fn write_csv(sink: &Sink, config: &Value, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = sink.open()?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(sink: &Sink, doc: &Value) -> io::Result<()> {
    let mut out = sink.open()?;
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    out.flush()
}

/// Little-endian f64 matrix at `path` and its metadata at `path.json`.
pub fn write_binary(path: &Path, values: &[f64], meta: &Value) -> io::Result<PathBuf> {
    let mut f = BufWriter::new(File::create(path)?);
    for v in values {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    let side = PathBuf::from(side);
    let mut s = BufWriter::new(File::create(&side)?);
    serde_json::to_writer_pretty(&mut s, meta)?;
    writeln!(s)?;
    Ok(side)
}
