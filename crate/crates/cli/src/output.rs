use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Version of every JSON document the tool writes.
pub const SCHEMA: u32 = 1;

/// Wraps a document with the schema version.
#[derive(Serialize)]
pub struct Versioned<'a, T> {
    pub schema: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

pub fn versioned<T>(command: &str, body: T) -> Versioned<'_, T> {
    Versioned { schema: SCHEMA, command, body }
}

pub fn print_json<T: Serialize>(doc: &T) -> Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Rows of numbers under a header, to a file or standard output.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    Ok(dir.as_deref())
}

/// Vectors one after another as little-endian f64.
pub fn write_vectors(path: &Path, vectors: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in vectors {
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}
