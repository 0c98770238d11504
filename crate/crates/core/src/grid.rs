//! Inclusive linear grids written `start:stop:steps`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `steps` points from `start` to `stop`, both included. A single point sits at `start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("grid needs at least one step".into()));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn point(value: f64) -> Result<Self> {
        Self::new(value, value, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.stop } else { self.start + (self.stop - self.start) * k as f64 / last })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected a number or start:stop:steps, got {s:?}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Self::point(num(v)?),
            [a, b, n] => Self::new(num(a)?, num(b)?, n.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps == 1 && self.start == self.stop {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
        }
    }
}
