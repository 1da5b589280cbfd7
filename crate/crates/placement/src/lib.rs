//! Where to put grid-forming capacity.
//!
//! A placement assigns a capacity level to some of the interior buses of a
//! network. Each placed unit is a copy of one device template dispatched at
//! zero power, so the load flow of the existing devices is unchanged and the
//! only effect is the extra admittance. The objective is the worst-case
//! system strength `min_ω κ(ω)` over a frequency grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use gridformer_converter::{Architecture, ArchKind, Setpoint};
use gridformer_lti::FrequencyGrid;
use gridformer_network::{BusSetpoint, NetworkModel};
use gridformer_strength::{bus_strength, system_strength, PowerSystem, StrengthError};

/// Upper limit on the number of assignments `place_exhaustive` enumerates.
pub const MAX_LATTICE: usize = 100_000;
/// Greedy stops once the best step improves κ by no more than this.
pub const MIN_IMPROVEMENT: f64 = 1e-6;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlacementError {
    #[error("invalid placement problem: {0}")]
    Invalid(String),
    #[error("search space has more than {limit} assignments")]
    SearchSpaceTooLarge { limit: usize },
    #[error(transparent)]
    Strength(#[from] StrengthError),
}

impl From<gridformer_network::NetworkError> for PlacementError {
    fn from(e: gridformer_network::NetworkError) -> Self {
        Self::Strength(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementProblem {
    pub net: NetworkModel,
    /// Architectures and setpoints of the existing device buses.
    pub archs: Vec<Architecture>,
    pub setpoints: Vec<BusSetpoint>,
    /// Interior buses that may receive capacity.
    pub candidates: Vec<usize>,
    pub device: Architecture,
    /// Allowed capacity levels per bus (pu), ascending.
    pub sizes: Vec<f64>,
    pub budget: f64,
    pub u_grid: f64,
}

/// Bus → placed capacity; absent buses get nothing.
pub type Assignment = BTreeMap<usize, f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    pub assignment: Assignment,
    /// `min_ω κ` with the assignment in place.
    pub achieved: f64,
    /// `min_ω κ` of the unmodified system.
    pub baseline: f64,
    pub evaluations: usize,
}

impl PlacementResult {
    pub fn total_capacity(&self) -> f64 {
        self.assignment.values().sum()
    }

    /// Bus holding the largest share of the placed capacity (lowest index on ties).
    pub fn main_bus(&self) -> Option<usize> {
        self.assignment
            .iter()
            .fold(None, |best: Option<(usize, f64)>, (&b, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((b, c)),
            })
            .map(|(b, _)| b)
    }
}

impl PlacementProblem {
    pub fn validate(&self) -> Result<(), PlacementError> {
        let (n, nb) = (self.net.n(), self.net.n_buses());
        let bad = |msg: String| Err(PlacementError::Invalid(msg));
        if self.archs.len() != n || self.setpoints.len() != n {
            return bad(format!("{} architectures and {} setpoints for {n} device buses", self.archs.len(), self.setpoints.len()));
        }
        if let Some(c) = self.candidates.iter().find(|&&c| c < n || c >= nb) {
            return bad(format!("candidate {c} is not an interior bus"));
        }
        let mut seen = self.candidates.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.candidates.len() {
            return bad("duplicate candidate bus".into());
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("sizes must be positive".into());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be strictly ascending".into());
        }
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return bad(format!("budget {} must be nonnegative", self.budget));
        }
        Ok(())
    }

    fn template_setpoint(&self) -> BusSetpoint {
        let second = match self.device.kind() {
            ArchKind::PllPv => Setpoint::V(self.u_grid),
            _ => Setpoint::Q(0.0),
        };
        BusSetpoint { p: 0.0, second }
    }

    /// Linearised system with `assignment` in place. Placed units follow
    /// the existing devices in ascending bus order.
    pub fn system(&self, assignment: &Assignment) -> Result<PowerSystem, PlacementError> {
        self.system_with(assignment, &self.device)
    }

    fn system_with(&self, assignment: &Assignment, device: &Architecture) -> Result<PowerSystem, PlacementError> {
        let mut net = self.net.clone();
        let mut archs = self.archs.clone();
        let mut setpoints = self.setpoints.clone();
        let mut pending: Vec<(usize, f64)> = assignment.iter().map(|(&b, &c)| (b, c)).collect();
        for k in 0..pending.len() {
            let (bus, cap) = pending[k];
            let next = net.promote_interior(bus, cap)?;
            for p in pending.iter_mut().skip(k + 1) {
                p.0 = net.promoted_index(bus, p.0);
            }
            net = next;
            archs.push(device.clone());
            setpoints.push(self.template_setpoint());
        }
        Ok(PowerSystem::linearize(net, &archs, &setpoints, self.u_grid)?)
    }

    /// `min_ω κ(ω)` with `assignment` in place.
    pub fn objective(&self, assignment: &Assignment, grid: &FrequencyGrid) -> Result<f64, PlacementError> {
        let sys = self.system(assignment)?;
        Ok(system_strength(|w| sys.y_cl(w), grid)?.min().1)
    }

    /// `min_ω κ_i` of each candidate bus when it carries an empty (zero
    /// admittance) device of unit capacity.
    pub fn candidate_bus_strength(&self, grid: &FrequencyGrid) -> Result<Vec<(usize, f64)>, PlacementError> {
        self.candidates
            .par_iter()
            .map(|&c| {
                let sys = self.system_with(&Assignment::from([(c, 1.0)]), &Architecture::default_for(ArchKind::None))?;
                let z = grid.points().iter().map(|&w| sys.z_cl(w)).collect::<Result<Vec<_>, _>>()?;
                let curves = bus_strength(&z, grid)?;
                Ok((c, curves[sys.net().n() - 1].min().1))
            })
            .collect()
    }

    /// Candidate with the smallest bus strength (lowest index on ties).
    pub fn weakest_candidate(&self, grid: &FrequencyGrid) -> Result<Option<usize>, PlacementError> {
        let s = self.candidate_bus_strength(grid)?;
        Ok(s.iter().fold(None, |best: Option<(usize, f64)>, &(b, k)| match best {
            Some((_, bk)) if bk <= k => best,
            _ => Some((b, k)),
        }).map(|(b, _)| b))
    }
}

fn fits(total: f64, budget: f64) -> bool {
    total <= budget * (1.0 + 1e-12) + 1e-12
}

/// Every assignment within budget, or `None` once more than `limit` exist.
fn feasible_lattice(candidates: &[usize], sizes: &[f64], budget: f64, limit: usize) -> Option<Vec<Assignment>> {
    fn walk(k: usize, cands: &[usize], sizes: &[f64], budget: f64, used: f64, cur: &mut Vec<(usize, f64)>, out: &mut Vec<Assignment>, limit: usize) -> bool {
        if k == cands.len() {
            out.push(cur.iter().copied().collect());
            return out.len() <= limit;
        }
        if !walk(k + 1, cands, sizes, budget, used, cur, out, limit) {
            return false;
        }
        for &s in sizes {
            if !fits(used + s, budget) {
                break;
            }
            cur.push((cands[k], s));
            let ok = walk(k + 1, cands, sizes, budget, used + s, cur, out, limit);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    let mut out = Vec::new();
    walk(0, &cands, sizes, budget, 0.0, &mut Vec::new(), &mut out, limit).then_some(out)
}

/// Strict preference order: higher κ, then less capacity, then the
/// lexicographically smaller list of buses.
fn better(a: (&Assignment, f64), b: (&Assignment, f64)) -> bool {
    let scale = a.1.abs().max(b.1.abs()).max(1.0);
    if (a.1 - b.1).abs() > TIE_TOL * scale {
        return a.1 > b.1;
    }
    let (ta, tb): (f64, f64) = (a.0.values().sum(), b.0.values().sum());
    if (ta - tb).abs() > 1e-12 {
        return ta < tb;
    }
    a.0.keys().lt(b.0.keys())
}

/// Enumerate every feasible assignment and keep the best.
pub fn place_exhaustive(problem: &PlacementProblem, grid: &FrequencyGrid) -> Result<PlacementResult, PlacementError> {
    problem.validate()?;
    let lattice = feasible_lattice(&problem.candidates, &problem.sizes, problem.budget, MAX_LATTICE)
        .ok_or(PlacementError::SearchSpaceTooLarge { limit: MAX_LATTICE })?;
    let values = lattice
        .par_iter()
        .map(|a| problem.objective(a, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for k in 1..lattice.len() {
        if better((&lattice[k], values[k]), (&lattice[best], values[best])) {
            best = k;
        }
    }
    Ok(PlacementResult {
        assignment: lattice[best].clone(),
        achieved: values[best],
        baseline: values[0],
        evaluations: lattice.len(),
    })
}

/// Raise one bus at a time to its next capacity level, always taking the
/// step with the largest gain in κ.
pub fn place_greedy(problem: &PlacementProblem, grid: &FrequencyGrid) -> Result<PlacementResult, PlacementError> {
    problem.validate()?;
    let mut assignment = Assignment::new();
    let baseline = problem.objective(&assignment, grid)?;
    let mut achieved = baseline;
    let mut evaluations = 1;
    loop {
        let used: f64 = assignment.values().sum();
        let mut steps: Vec<Assignment> = problem
            .candidates
            .iter()
            .filter_map(|&c| {
                let current = assignment.get(&c).copied();
                let next = match current {
                    None => problem.sizes.first().copied(),
                    Some(s) => problem.sizes.iter().copied().find(|&x| x > s),
                }?;
                fits(used - current.unwrap_or(0.0) + next, problem.budget).then(|| {
                    let mut a = assignment.clone();
                    a.insert(c, next);
                    a
                })
            })
            .collect();
        if steps.is_empty() {
            break;
        }
        let values = steps.par_iter().map(|a| problem.objective(a, grid)).collect::<Result<Vec<_>, _>>()?;
        evaluations += steps.len();
        let mut best = 0;
        for k in 1..steps.len() {
            if better((&steps[k], values[k]), (&steps[best], values[best])) {
                best = k;
            }
        }
        if values[best] - achieved <= MIN_IMPROVEMENT {
            break;
        }
        achieved = values[best];
        assignment = steps.swap_remove(best);
    }
    Ok(PlacementResult { assignment, achieved, baseline, evaluations })
}
