use std::fmt::Display;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// CSV output to a file or stdout.
pub struct Report {
    w: csv::Writer<Box<dyn Write>>,
}

impl Report {
    pub fn new(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).with_context(|| format!("creating report {}", p.display()))?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        Ok(Report { w })
    }

    pub fn row(&mut self, fields: &[&dyn Display]) -> Result<()> {
        self.w.write_record(fields.iter().map(|f| f.to_string()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}
