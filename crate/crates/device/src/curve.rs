use std::fmt::Write as _;

use gridformer_lti::FrequencyGrid;
use serde::{Serialize, Serializer};

/// What a [`StrengthCurve`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    /// Forming Index σ̄[S_v].
    Fi,
    /// Impedance norm σ̄[Y_de⁻¹].
    In,
    /// Frequency smoothing.
    Fs,
    /// System strength.
    Kappa,
    /// Grid strength.
    Alpha,
    /// Strength of one bus.
    Bus,
    /// Passivity margin; the only kind that may go negative.
    Passivity,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Fi => "fi",
            CurveKind::In => "in",
            CurveKind::Fs => "fs",
            CurveKind::Kappa => "kappa",
            CurveKind::Alpha => "alpha",
            CurveKind::Bus => "bus",
            CurveKind::Passivity => "passivity",
        }
    }
}

/// Real metric sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthCurve {
    pub kind: CurveKind,
    grid: FrequencyGrid,
    values: Vec<f64>,
    peak: (f64, f64),
}

impl StrengthCurve {
    /// Curve with its peak taken from the samples.
    ///
    /// Panics if lengths differ or a value is not finite; both are
    /// programming errors in the producers.
    pub fn new(kind: CurveKind, grid: FrequencyGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "curve length must match its grid");
        assert!(values.iter().all(|v| v.is_finite()), "curve values must be finite");
        let k = argmax(&values);
        let peak = (grid.points()[k], values[k]);
        Self { kind, grid, values, peak }
    }

    /// Replace the sampled peak by a refined one when it is larger.
    pub fn with_refined_peak(mut self, omega: f64, value: f64) -> Self {
        if value.is_finite() && value > self.peak.1 {
            self.peak = (omega, value);
        }
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn omegas(&self) -> &[f64] {
        self.grid.points()
    }

    /// `(omega, value)` of the largest value, refined between samples when
    /// the producer could do so.
    pub fn peak(&self) -> (f64, f64) {
        self.peak
    }

    /// `(omega, value)` of the smallest sample.
    pub fn min(&self) -> (f64, f64) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v < self.values[best] { i } else { best });
        (self.grid.points()[k], self.values[k])
    }

    /// Value at the lowest grid frequency.
    pub fn dc(&self) -> f64 {
        self.values[0]
    }

    /// Linear interpolation in log ω, clamped at the ends.
    pub fn value_at(&self, omega: f64) -> f64 {
        let w = self.grid.points();
        if omega <= w[0] {
            return self.values[0];
        }
        let n = w.len();
        if omega >= w[n - 1] {
            return self.values[n - 1];
        }
        let k = w.partition_point(|x| *x <= omega);
        let t = (omega.ln() - w[k - 1].ln()) / (w[k].ln() - w[k - 1].ln());
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }

    /// CSV text with header `omega_rad_s,f_hz,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_rad_s,f_hz,value\n");
        for (w, v) in self.grid.points().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", w, w / (2.0 * std::f64::consts::PI), v);
        }
        out
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best })
}

#[derive(Serialize)]
struct CurveDoc<'a> {
    kind: CurveKind,
    omega_rad_s: &'a [f64],
    values: &'a [f64],
    peak_omega: f64,
    peak_value: f64,
    min_omega: f64,
    min_value: f64,
    dc: f64,
}

impl Serialize for StrengthCurve {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (min_omega, min_value) = self.min();
        CurveDoc {
            kind: self.kind,
            omega_rad_s: self.grid.points(),
            values: &self.values,
            peak_omega: self.peak.0,
            peak_value: self.peak.1,
            min_omega,
            min_value,
            dc: self.dc(),
        }
        .serialize(s)
    }
}
