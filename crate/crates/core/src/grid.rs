use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Linear,
    Geometric,
}

/// Strictly increasing, nonnegative dimensionless times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("time grid is empty".to_string()));
        }
        if points.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidInput("time grid values must be finite and >= 0".to_string()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("time grid must be strictly increasing".to_string()));
        }
        Ok(TimeGrid { points })
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::from_points(vec![tau])
    }

    pub fn linear(start: f64, stop: f64, count: usize) -> Result<Self> {
        Self::build(GridKind::Linear, start, stop, count)
    }

    pub fn geometric(start: f64, stop: f64, count: usize) -> Result<Self> {
        Self::build(GridKind::Geometric, start, stop, count)
    }

    pub fn build(kind: GridKind, start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("grid count must be >= 1".to_string()));
        }
        if !(start >= 0.0) {
            return Err(Error::InvalidInput(format!("grid start must be >= 0 (got {start})")));
        }
        if count == 1 {
            return Self::single(start);
        }
        if !(stop > start) {
            return Err(Error::InvalidInput(format!(
                "grid stop must exceed start (got {start}..{stop})"
            )));
        }
        let last = (count - 1) as f64;
        let points: Vec<f64> = match kind {
            GridKind::Linear => (0..count)
                .map(|k| {
                    if k + 1 == count {
                        stop
                    } else {
                        start + (stop - start) * (k as f64 / last)
                    }
                })
                .collect(),
            GridKind::Geometric => {
                if !(start > 0.0) {
                    return Err(Error::InvalidInput(
                        "geometric grid needs start > 0".to_string(),
                    ));
                }
                let ratio = (stop / start).ln();
                (0..count)
                    .map(|k| match k {
                        0 => start,
                        k if k + 1 == count => stop,
                        k => start * (ratio * k as f64 / last).exp(),
                    })
                    .collect()
            }
        };
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
