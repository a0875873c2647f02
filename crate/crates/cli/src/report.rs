//! Line-oriented run reports: `key=value` lines, then `[metrics]` and
//! `[timings]` sections. Everything outside `[timings]` is deterministic
//! for a fixed seed.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::Path;
use std::time::Duration;

use mwem_mpc::{Error, Result};

#[derive(Debug, Default)]
pub struct Report {
    header: Vec<(String, String)>,
    metrics: Vec<(String, String)>,
    timings: Vec<(String, String)>,
}

impl Report {
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.push((key.into(), format!("{value:.9}")));
    }

    pub fn timing(&mut self, key: impl Into<String>, d: Duration) {
        self.timings.push((key.into(), format!("{:.3}", d.as_secs_f64() * 1e3)));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = |name: Option<&str>, rows: &[(String, String)]| {
            if let Some(n) = name {
                let _ = writeln!(out, "[{n}]");
            }
            for (k, v) in rows {
                let _ = writeln!(out, "{k}={v}");
            }
        };
        section(None, &self.header);
        section(Some("metrics"), &self.metrics);
        section(Some("timings"), &self.timings);
        out
    }

    /// Writes to `path`, or stdout when absent.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => fs::write(p, self.render()).map_err(|e| Error::Data(format!("cannot write report {}: {e}", p.display()))),
            None => {
                print!("{}", self.render());
                Ok(())
            }
        }
    }
}
