//! Piecewise-constant control fields and their on-disk formats.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar control field, constant on each interval [m·dt, (m+1)·dt).
/// The L1 norm dt·Σ|u_m| is exact for this representation, which is what
/// every truncation bound is driven by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    dt: f64,
    samples: Vec<f64>,
}

impl ControlField {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::FieldFile(format!("dt must be positive and finite, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::FieldFile("field needs at least one sample".into()));
        }
        if samples.iter().any(|u| !u.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { dt, samples })
    }

    pub fn constant(value: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt, vec![value; steps])
    }

    /// Sample a function at interval midpoints.
    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..steps).map(|m| f((m as f64 + 0.5) * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Exact L1 norm dt·Σ|u_m|.
    pub fn l1_norm(&self) -> f64 {
        self.dt * self.samples.iter().map(|u| u.abs()).sum::<f64>()
    }

    /// dt·Σ u_m², the field energy entering the optimizer penalty.
    pub fn energy(&self) -> f64 {
        self.dt * self.samples.iter().map(|u| u * u).sum::<f64>()
    }

    /// Running L1 norm at every step boundary: entry m is ∫₀^{m·dt}|u|.
    pub fn running_l1(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.samples.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for u in &self.samples {
            acc += self.dt * u.abs();
            out.push(acc);
        }
        out
    }

    /// Rescale so that the L1 norm hits `k_target` exactly.
    pub fn scaled_to_l1(mut self, k_target: f64) -> Result<Self> {
        let current = self.l1_norm();
        if current == 0.0 {
            return Err(Error::FieldFile("cannot rescale an identically zero field".into()));
        }
        let s = k_target / current;
        self.samples.iter_mut().for_each(|u| *u *= s);
        Ok(self)
    }

    /// Reverse the sample order (the field driving the time-reversed pass).
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self { dt: self.dt, samples }
    }

    // -- file formats -------------------------------------------------------

    /// JSON form `{"dt": .., "samples": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ControlField =
            serde_json::from_str(text).map_err(|e| Error::FieldFile(e.to_string()))?;
        Self::new(raw.dt, raw.samples)
    }

    /// CSV with header `t,u`, `t` being the left endpoint of each interval.
    /// Non-uniform grids are accepted when every spacing is an integer
    /// multiple of the smallest one; samples are then split into subintervals
    /// of that base step, which preserves the piecewise-constant waveform and
    /// its L1 norm. The final sample lasts one base step.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.eq_ignore_ascii_case("t,u") {
                continue;
            }
            let mut parts = trimmed.split(',');
            let (t, u) = match (parts.next(), parts.next()) {
                (Some(t), Some(u)) => (t.trim(), u.trim()),
                _ => {
                    return Err(Error::FieldFile(format!(
                        "line {}: expected `t,u`, got {trimmed:?}",
                        lineno + 1
                    )))
                }
            };
            let t: f64 = t
                .parse()
                .map_err(|_| Error::FieldFile(format!("line {}: bad time {t:?}", lineno + 1)))?;
            let u: f64 = u
                .parse()
                .map_err(|_| Error::FieldFile(format!("line {}: bad value {u:?}", lineno + 1)))?;
            times.push(t);
            values.push(u);
        }
        if times.is_empty() {
            return Err(Error::FieldFile("field file holds no samples".into()));
        }
        if times.len() == 1 {
            return Err(Error::FieldFile("need at least two rows to infer dt".into()));
        }
        let spacings: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        if spacings.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::FieldFile("times must be strictly increasing".into()));
        }
        let base = spacings.iter().copied().fold(f64::INFINITY, f64::min);
        let mut samples = Vec::new();
        for (i, &s) in spacings.iter().enumerate() {
            let ratio = s / base;
            let reps = ratio.round();
            if (ratio - reps).abs() > 1e-9 * reps.max(1.0) {
                return Err(Error::FieldFile(format!(
                    "spacing {s} at row {} is not a multiple of the base step {base}",
                    i + 1
                )));
            }
            samples.extend(std::iter::repeat(values[i]).take(reps as usize));
        }
        samples.push(*values.last().unwrap());
        Self::new(base, samples)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::FieldFile(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_csv(std::io::BufReader::new(text.as_bytes()))
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# piecewise-constant control field; t is the left endpoint, atomic units")?;
        writeln!(w, "t,u")?;
        for (m, u) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", m as f64 * self.dt, u)?;
        }
        Ok(())
    }
}
