use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;
use gridformer_converter::{ArchKind, Architecture};
use gridformer_lti::FrequencyGrid;
use gridformer_network::{Branch, BusSetpoint, NetworkModel};
use gridformer_strength::PowerSystem;

pub const CASE_VERSION: u32 = 1;
pub const MIN_SWEEP_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub version: u32,
    pub system: SystemSection,
    pub buses: Vec<BusEntry>,
    pub branches: Vec<BranchEntry>,
    pub devices: Vec<DeviceEntry>,
    pub sweep: SweepSection,
    pub band: BandSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub omega0_hz: f64,
    pub tau_default: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Device,
    Interior,
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusEntry {
    pub id: u32,
    pub kind: BusKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub from: u32,
    pub to: u32,
    pub b_pu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub bus: u32,
    pub arch: ArchKind,
    /// Overrides of the architecture defaults; omitted fields keep them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    pub capacity_pu: f64,
    pub p0_pu: f64,
    /// Reactive power, or terminal voltage for PLL-PV.
    pub q0_or_v0_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
}

/// Architecture from a kind and optional parameter overrides.
pub fn resolve_arch(kind: ArchKind, params: Option<&serde_json::Value>) -> Result<Architecture, CliError> {
    let arch = match params {
        None => Architecture::default_for(kind),
        Some(p) => {
            let mut doc = serde_json::to_value(Architecture::default_for(kind)).expect("architecture serialises");
            if let (Some(base), Some(over)) = (doc.get_mut("params").and_then(|v| v.as_object_mut()), p.as_object()) {
                for (k, v) in over {
                    base.insert(k.clone(), v.clone());
                }
            } else {
                return Err(CliError::Parse(format!("{} takes no parameter object", kind.name())));
            }
            let merged = doc.clone();
            let arch: Architecture = serde_json::from_value(doc).map_err(|e| CliError::Parse(format!("{} params: {e}", kind.name())))?;
            // reject keys the architecture does not know
            let known = serde_json::to_value(arch).expect("architecture serialises");
            if let (Some(s), Some(k)) = (merged.get("params").and_then(|v| v.as_object()), known.get("params").and_then(|v| v.as_object())) {
                if let Some(bad) = s.keys().find(|key| !k.contains_key(*key)) {
                    return Err(CliError::Parse(format!("unknown {} parameter '{bad}'", kind.name())));
                }
            }
            arch
        }
    };
    arch.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(arch)
}

/// A validated case with the network in solver order: device buses first,
/// then interior buses, ground last.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub file: CaseFile,
    pub net: NetworkModel,
    /// Case bus id of every network bus except ground.
    pub bus_ids: Vec<u32>,
    pub archs: Vec<Architecture>,
    pub setpoints: Vec<BusSetpoint>,
    pub grid: FrequencyGrid,
    pub band_hz: (f64, f64),
}

impl CaseFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: CaseFile = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("case file: {e}")))?;
        if file.version != CASE_VERSION {
            return Err(CliError::Parse(format!("unsupported case version {} (expected {CASE_VERSION})", file.version)));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case file serialises")
    }
}

impl Case {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_file(CaseFile::from_json(&text)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Self::from_file(CaseFile::from_json(text)?)
    }

    pub fn from_file(file: CaseFile) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Parse(m));
        let ids_of = |k: BusKind| file.buses.iter().filter(|b| b.kind == k).map(|b| b.id).collect::<Vec<_>>();
        let (dev_ids, int_ids, ground) = (ids_of(BusKind::Device), ids_of(BusKind::Interior), ids_of(BusKind::Ground));
        if ground.len() != 1 {
            return bad(format!("exactly one ground bus required, found {}", ground.len()));
        }
        let mut index = HashMap::new();
        for (k, id) in dev_ids.iter().chain(&int_ids).chain(&ground).enumerate() {
            if index.insert(*id, k).is_some() {
                return bad(format!("duplicate bus id {id}"));
            }
        }
        let sys = &file.system;
        if !(sys.omega0_hz > 0.0 && sys.tau_default > 0.0) {
            return bad("system.omega0_hz and system.tau_default must be > 0".into());
        }
        let mut branches = Vec::with_capacity(file.branches.len());
        for b in &file.branches {
            let (Some(&from), Some(&to)) = (index.get(&b.from), index.get(&b.to)) else {
                return bad(format!("branch {}-{} references an unknown bus", b.from, b.to));
            };
            branches.push(Branch { from, to, b: b.b_pu, tau: b.tau.unwrap_or(sys.tau_default) });
        }

        let n = dev_ids.len();
        let mut archs = vec![None; n];
        let mut setpoints = vec![None; n];
        let mut caps = vec![0.0; n];
        for d in &file.devices {
            let Some(&k) = index.get(&d.bus).filter(|&&k| k < n) else {
                return bad(format!("device references bus {} which is not a device bus", d.bus));
            };
            if archs[k].is_some() {
                return bad(format!("bus {} has more than one device", d.bus));
            }
            let arch = resolve_arch(d.arch, d.params.as_ref())?;
            setpoints[k] = Some(BusSetpoint { p: d.p0_pu, second: arch.setpoint(d.q0_or_v0_pu) });
            archs[k] = Some(arch);
            caps[k] = d.capacity_pu;
        }
        if let Some(k) = archs.iter().position(Option::is_none) {
            return bad(format!("device bus {} has no device entry", dev_ids[k]));
        }
        let net = NetworkModel::new(n, int_ids.len(), branches, caps, 2.0 * std::f64::consts::PI * sys.omega0_hz)
            .map_err(|e| CliError::Parse(e.to_string()))?;

        let sw = &file.sweep;
        if sw.points < MIN_SWEEP_POINTS {
            return bad(format!("sweep.points must be >= {MIN_SWEEP_POINTS}"));
        }
        if !(sw.f_min_hz > 0.0) {
            return bad("sweep.f_min_hz must be > 0".into());
        }
        let grid = FrequencyGrid::log_hz(sw.f_min_hz, sw.f_max_hz, sw.points).map_err(|e| CliError::Parse(e.to_string()))?;
        let band_hz = (file.band.f_lo_hz, file.band.f_hi_hz);
        if !(band_hz.0 > 0.0 && band_hz.1 > band_hz.0) {
            return bad("band must satisfy 0 < f_lo_hz < f_hi_hz".into());
        }
        Ok(Self {
            bus_ids: dev_ids.into_iter().chain(int_ids).collect(),
            archs: archs.into_iter().map(Option::unwrap).collect(),
            setpoints: setpoints.into_iter().map(Option::unwrap).collect(),
            file,
            net,
            grid,
            band_hz,
        })
    }

    /// Solver index of a case bus id.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.bus_ids.iter().position(|&b| b == id)
    }

    pub fn device_index(&self, id: u32) -> Result<usize, CliError> {
        self.index_of(id)
            .filter(|&k| k < self.net.n())
            .ok_or_else(|| CliError::Parse(format!("bus {id} is not a device bus")))
    }

    /// Sweep points inside the band, the grid that placement optimises on.
    pub fn band_grid(&self) -> Result<FrequencyGrid, CliError> {
        let (lo, hi) = (2.0 * std::f64::consts::PI * self.band_hz.0, 2.0 * std::f64::consts::PI * self.band_hz.1);
        let pts: Vec<f64> = self.grid.points().iter().copied().filter(|w| (lo..=hi).contains(w)).collect();
        FrequencyGrid::new(pts).map_err(|_| CliError::Parse("no sweep point inside the band".into()))
    }

    pub fn system(&self) -> Result<PowerSystem, CliError> {
        Ok(PowerSystem::linearize(self.net.clone(), &self.archs, &self.setpoints, 1.0)?)
    }
}

/// Cases shipped with the tool, by name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("three_bus", include_str!("../cases/three_bus.json")),
    ("three_bus_gfm", include_str!("../cases/three_bus_gfm.json")),
    ("homogeneous_vsg", include_str!("../cases/homogeneous_vsg.json")),
    ("five_bus", include_str!("../cases/five_bus.json")),
    ("four_bus_place", include_str!("../cases/four_bus_place.json")),
];

/// `--case` accepts a path or `builtin:<name>`.
pub fn load_case(spec: &str) -> Result<Case, CliError> {
    match spec.strip_prefix("builtin:") {
        Some(name) => {
            let (_, text) = BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| CliError::Parse(format!("no bundled case '{name}'")))?;
            Case::from_json(text)
        }
        None => Case::load(Path::new(spec)),
    }
}
