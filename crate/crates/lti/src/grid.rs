use std::f64::consts::PI;

use crate::LtiError;

/// Strictly increasing, positive angular frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, LtiError> {
        if points.is_empty() {
            return Err(LtiError::InvalidGrid("empty".into()));
        }
        if points.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(LtiError::InvalidGrid("points must be finite and > 0".into()));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(LtiError::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n` log-spaced points between `f_min` and `f_max` given in Hz.
    pub fn log_hz(f_min: f64, f_max: f64, n: usize) -> Result<Self, LtiError> {
        if !(f_min > 0.0 && f_max > f_min) || n < 2 {
            return Err(LtiError::InvalidGrid(format!(
                "need 0 < f_min < f_max and n >= 2, got {f_min}, {f_max}, {n}"
            )));
        }
        let (l0, l1) = (f_min.ln(), f_max.ln());
        let mut pts: Vec<f64> = (0..n)
            .map(|k| 2.0 * PI * (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
            .collect();
        // pin the ends so band checks against the nominal limits are exact
        pts[0] = 2.0 * PI * f_min;
        pts[n - 1] = 2.0 * PI * f_max;
        Self::new(pts)
    }

    /// The default sweep: 500 points from 0.05 Hz to 2 kHz.
    pub fn default_sweep() -> Self {
        Self::log_hz(0.05, 2000.0, 500).expect("static grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn hz(&self) -> Vec<f64> {
        self.points.iter().map(|w| w / (2.0 * PI)).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Grid with `factor` times as many log-spaced points over the same span.
    pub fn refined(&self, factor: usize) -> Self {
        if self.len() < 2 {
            return self.clone();
        }
        let n = (self.len() - 1) * factor.max(1) + 1;
        let two_pi = 2.0 * PI;
        Self::log_hz(self.first() / two_pi, self.last() / two_pi, n).expect("refined grid is valid")
    }

    /// Points falling inside `[lo, hi]` rad/s.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<Self> {
        let pts: Vec<f64> = self.points.iter().copied().filter(|w| *w >= lo && *w <= hi).collect();
        Self::new(pts).ok()
    }
}
