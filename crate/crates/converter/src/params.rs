use serde::{Deserialize, Serialize};

use crate::{ConverterError, Setpoint, OMEGA0};

/// Grid-following PLL-PQ / PLL-PV parameters.
///
/// The `*_q` gains act on reactive power for PLL-PQ and on terminal voltage
/// magnitude for PLL-PV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GflParams {
    /// PLL loop bandwidth (open-loop crossover), Hz.
    pub f_pll: f64,
    pub zeta: f64,
    pub kp_p: f64,
    pub ki_p: f64,
    pub kp_q: f64,
    pub ki_q: f64,
    /// Current-loop time constant, s.
    pub tau_i: f64,
}

impl Default for GflParams {
    fn default() -> Self {
        Self { f_pll: 30.0, zeta: 0.707, kp_p: 0.0, ki_p: 2.0, kp_q: 0.0, ki_q: 2.0, tau_i: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VsgParams {
    /// Inertia constant (pu); zero gives droop behaviour.
    pub j: f64,
    /// Damping (pu power per pu frequency).
    pub d: f64,
    pub l_v: f64,
    pub tau_v: f64,
}

impl Default for VsgParams {
    fn default() -> Self {
        Self { j: 2.0, d: 50.0, l_v: 0.15, tau_v: 0.1 }
    }
}

/// Frequency droop `Δω = −K_P·ΔP` behind a virtual impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DroopParams {
    pub k_p: f64,
    pub l_v: f64,
    pub tau_v: f64,
}

impl Default for DroopParams {
    fn default() -> Self {
        Self { k_p: 0.02, l_v: 0.15, tau_v: 0.1 }
    }
}

/// Virtual oscillator control, averaged phase/amplitude model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocParams {
    pub eta: f64,
    /// Amplitude loop rate, rad/s.
    pub lambda_a: f64,
    pub k_q: f64,
    pub l_v: f64,
    pub tau_v: f64,
}

impl Default for VocParams {
    fn default() -> Self {
        Self { eta: 0.02, lambda_a: 10.0, k_q: 0.2, l_v: 0.15, tau_v: 0.1 }
    }
}

/// PLL-synchronised grid-forming control with a virtual admittance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PllGfmParams {
    pub y_v: f64,
    pub tau_v: f64,
    pub f_pll: f64,
    pub zeta: f64,
    pub kp_phi: f64,
    pub ki_phi: f64,
    pub tau_i: f64,
}

impl Default for PllGfmParams {
    fn default() -> Self {
        Self {
            y_v: 6.0,
            tau_v: 0.1,
            f_pll: 1.0,
            zeta: 0.707,
            kp_phi: 0.0,
            ki_phi: OMEGA0 / 50.0,
            tau_i: 1e-3,
        }
    }
}

/// Control architecture with its parameter record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arch", content = "params", rename_all = "kebab-case")]
pub enum Architecture {
    PllPq(GflParams),
    PllPv(GflParams),
    Vsg(VsgParams),
    Droop(DroopParams),
    Voc(VocParams),
    PllGfm(PllGfmParams),
    /// Static admittance `g·I₂`; large `g` models a stiff source.
    Ideal { g: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchKind {
    PllPq,
    PllPv,
    Vsg,
    Droop,
    Voc,
    PllGfm,
    Ideal,
    None,
}

impl ArchKind {
    pub const ALL: [ArchKind; 8] = [
        ArchKind::PllPq,
        ArchKind::PllPv,
        ArchKind::Vsg,
        ArchKind::Droop,
        ArchKind::Voc,
        ArchKind::PllGfm,
        ArchKind::Ideal,
        ArchKind::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchKind::PllPq => "pll-pq",
            ArchKind::PllPv => "pll-pv",
            ArchKind::Vsg => "vsg",
            ArchKind::Droop => "droop",
            ArchKind::Voc => "voc",
            ArchKind::PllGfm => "pll-gfm",
            ArchKind::Ideal => "ideal",
            ArchKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl Architecture {
    pub fn kind(&self) -> ArchKind {
        match self {
            Architecture::PllPq(_) => ArchKind::PllPq,
            Architecture::PllPv(_) => ArchKind::PllPv,
            Architecture::Vsg(_) => ArchKind::Vsg,
            Architecture::Droop(_) => ArchKind::Droop,
            Architecture::Voc(_) => ArchKind::Voc,
            Architecture::PllGfm(_) => ArchKind::PllGfm,
            Architecture::Ideal { .. } => ArchKind::Ideal,
            Architecture::None => ArchKind::None,
        }
    }

    /// Caption-default parameters for an architecture.
    pub fn default_for(kind: ArchKind) -> Self {
        match kind {
            ArchKind::PllPq => Architecture::PllPq(GflParams::default()),
            ArchKind::PllPv => Architecture::PllPv(GflParams::default()),
            ArchKind::Vsg => Architecture::Vsg(VsgParams::default()),
            ArchKind::Droop => Architecture::Droop(DroopParams::default()),
            ArchKind::Voc => Architecture::Voc(VocParams::default()),
            ArchKind::PllGfm => Architecture::PllGfm(PllGfmParams::default()),
            ArchKind::Ideal => Architecture::Ideal { g: 1e6 },
            ArchKind::None => Architecture::None,
        }
    }

    /// Voltage-controlled devices regulate |U|; the rest regulate Q.
    pub fn setpoint(&self, q_or_v: f64) -> Setpoint {
        match self {
            Architecture::PllPv(_) => Setpoint::V(q_or_v),
            _ => Setpoint::Q(q_or_v),
        }
    }

    pub fn validate(&self) -> Result<(), ConverterError> {
        let bad = |what: &str, v: f64| {
            Err(ConverterError::InvalidParameter(format!("{}: {what} = {v}", self.kind().name())))
        };
        let pos = |what: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { bad(what, v) };
        let nonneg = |what: &str, v: f64| if v >= 0.0 && v.is_finite() { Ok(()) } else { bad(what, v) };
        match *self {
            Architecture::PllPq(p) | Architecture::PllPv(p) => {
                pos("f_pll", p.f_pll)?;
                pos("zeta", p.zeta)?;
                pos("tau_i", p.tau_i)?;
                nonneg("kp_p", p.kp_p)?;
                nonneg("ki_p", p.ki_p)?;
                nonneg("kp_q", p.kp_q)?;
                nonneg("ki_q", p.ki_q)
            }
            Architecture::Vsg(p) => {
                nonneg("J", p.j)?;
                pos("D", p.d)?;
                pos("L_v", p.l_v)?;
                pos("tau_v", p.tau_v)
            }
            Architecture::Droop(p) => {
                pos("K_P", p.k_p)?;
                pos("L_v", p.l_v)?;
                pos("tau_v", p.tau_v)
            }
            Architecture::Voc(p) => {
                pos("eta", p.eta)?;
                pos("lambda_a", p.lambda_a)?;
                nonneg("K_Q", p.k_q)?;
                pos("L_v", p.l_v)?;
                pos("tau_v", p.tau_v)
            }
            Architecture::PllGfm(p) => {
                pos("Y_v", p.y_v)?;
                pos("tau_v", p.tau_v)?;
                pos("f_pll", p.f_pll)?;
                pos("zeta", p.zeta)?;
                pos("tau_i", p.tau_i)?;
                nonneg("kp_phi", p.kp_phi)?;
                nonneg("ki_phi", p.ki_phi)
            }
            Architecture::Ideal { g } => pos("g", g),
            Architecture::None => Ok(()),
        }
    }
}

/// A converter: architecture plus capacity on the system base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    #[serde(flatten)]
    pub arch: Architecture,
    pub capacity: f64,
}

impl DeviceSpec {
    pub fn new(arch: Architecture, capacity: f64) -> Result<Self, ConverterError> {
        let s = Self { arch, capacity };
        s.validate()?;
        Ok(s)
    }

    pub fn unit(arch: Architecture) -> Self {
        Self { arch, capacity: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ConverterError> {
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return Err(ConverterError::InvalidParameter(format!(
                "capacity must be > 0, got {}",
                self.capacity
            )));
        }
        self.arch.validate()
    }
}
