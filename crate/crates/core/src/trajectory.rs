//! Recorded input/output trajectories and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// An input/output record sampled at a fixed period. The output may run
/// exactly L samples longer than the input when the record is meant for
/// inverse prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub ts: f64,
}

impl Trajectory {
    pub fn new(u: Vec<f64>, y: Vec<f64>, ts: f64) -> Result<Self> {
        if u.is_empty() || y.is_empty() {
            return Err(Error::TrajectoryLength(
                "input and output must each hold at least one sample".into(),
            ));
        }
        if y.len() < u.len() {
            return Err(Error::TrajectoryLength(format!(
                "output record ({}) shorter than input record ({})",
                y.len(),
                u.len()
            )));
        }
        Ok(Self { u, y, ts })
    }

    /// Number of input samples (the data length T_d).
    pub fn input_len(&self) -> usize {
        self.u.len()
    }

    /// How many samples the output record runs past the input record.
    pub fn output_surplus(&self) -> usize {
        self.y.len() - self.u.len()
    }

    /// Equal-length view (u, y) for forward-prediction use.
    pub fn forward_slices(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.y[..self.u.len()])
    }

    /// Equal-length prefix of the first `len` samples of both channels.
    pub fn prefix(&self, len: usize) -> Result<Trajectory> {
        if len > self.u.len() || len > self.y.len() {
            return Err(Error::TrajectoryLength(format!(
                "prefix of {len} samples requested from a record of {} inputs",
                self.u.len()
            )));
        }
        Trajectory::new(self.u[..len].to_vec(), self.y[..len].to_vec(), self.ts)
    }

    /// CSV text with header `t,u,y`; the u field is left empty on rows past
    /// the end of the input record. Floats are written in shortest
    /// round-trip form, so read_csv recovers them bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u,y\n");
        for (k, &yk) in self.y.iter().enumerate() {
            let t = k as f64 * self.ts;
            if k < self.u.len() {
                let _ = writeln!(out, "{},{},{}", t, self.u[k], yk);
            } else {
                let _ = writeln!(out, "{},,{}", t, yk);
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::TrajectoryLength("empty trajectory file".into()))?;
        if header.trim() != "t,u,y" {
            return Err(Error::Config(format!(
                "unexpected trajectory header {header:?}, want \"t,u,y\""
            )));
        }
        let mut t = Vec::new();
        let mut u = Vec::new();
        let mut y = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!(
                    "trajectory line {}: expected 3 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("trajectory line {}: {e}", lineno + 2)))
            };
            t.push(parse(fields[0])?);
            if !fields[1].trim().is_empty() {
                if u.len() != y.len() {
                    return Err(Error::Config(format!(
                        "trajectory line {}: input sample after a gap",
                        lineno + 2
                    )));
                }
                u.push(parse(fields[1])?);
            }
            y.push(parse(fields[2])?);
        }
        let ts = if t.len() >= 2 { t[1] - t[0] } else { 1.0 };
        Trajectory::new(u, y, ts)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}
