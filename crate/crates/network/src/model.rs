use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::NetworkError;
use gridformer_lti::CMatrix;

/// RL line between two buses; `to` may be the grounded bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// Susceptance 1/X in system per unit.
    pub b: f64,
    /// Resistance-to-reactance ratio.
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    n: usize,
    m: usize,
    branches: Vec<Branch>,
    capacities: Vec<f64>,
    omega0: f64,
}

impl NetworkModel {
    pub fn new(
        n: usize,
        m: usize,
        branches: Vec<Branch>,
        capacities: Vec<f64>,
        omega0: f64,
    ) -> Result<Self, NetworkError> {
        let net = Self { n, m, branches, capacities, omega0 };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: String| Err(NetworkError::Invalid(msg));
        if self.n == 0 {
            return bad("at least one device bus is required".into());
        }
        if self.capacities.len() != self.n {
            return bad(format!("{} capacities for {} device buses", self.capacities.len(), self.n));
        }
        if let Some(s) = self.capacities.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return bad(format!("capacity must be > 0, got {s}"));
        }
        if !(self.omega0 > 0.0) {
            return bad(format!("omega0 must be > 0, got {}", self.omega0));
        }
        let g = self.ground();
        for br in &self.branches {
            if br.from > g || br.to > g || br.from == br.to {
                return bad(format!("branch {}-{} has invalid endpoints", br.from, br.to));
            }
            if !(br.b > 0.0 && br.b.is_finite()) {
                return bad(format!("branch {}-{}: B must be > 0", br.from, br.to));
            }
            if !(br.tau > 0.0 && br.tau.is_finite()) {
                return bad(format!("branch {}-{}: tau must be > 0", br.from, br.to));
            }
        }
        // connectivity over the non-ground buses
        let nb = self.n_buses();
        let mut parent: Vec<usize> = (0..nb).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for br in self.branches.iter().filter(|b| b.from != g && b.to != g) {
            let (a, b) = (find(&mut parent, br.from), find(&mut parent, br.to));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..nb).any(|i| find(&mut parent, i) != root) {
            return bad("network is not connected".into());
        }
        Ok(())
    }

    /// Device-bus count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Interior-bus count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Buses other than ground.
    pub fn n_buses(&self) -> usize {
        self.n + self.m
    }

    /// Index of the grounded bus.
    pub fn ground(&self) -> usize {
        self.n + self.m
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn interior(&self) -> Vec<usize> {
        (self.n..self.n + self.m).collect()
    }

    /// Common τ when every branch shares it (relative spread ≤ 1e-12).
    pub fn uniform_tau(&self) -> Option<f64> {
        let (lo, hi) = self.tau_range();
        if self.branches.is_empty() || hi - lo <= 1e-12 * hi {
            Some(self.mean_tau())
        } else {
            None
        }
    }

    pub fn tau_range(&self) -> (f64, f64) {
        self.branches
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b.tau), hi.max(b.tau)))
    }

    /// Arithmetic mean of branch ratios, the τ of γ₀.
    pub fn mean_tau(&self) -> f64 {
        if self.branches.is_empty() {
            return 0.1;
        }
        self.branches.iter().map(|b| b.tau).sum::<f64>() / self.branches.len() as f64
    }

    pub fn with_capacities(&self, capacities: Vec<f64>) -> Result<Self, NetworkError> {
        Self::new(self.n, self.m, self.branches.clone(), capacities, self.omega0)
    }

    /// Same network with bus `k` (an interior bus) promoted to the last
    /// device bus, carrying `capacity`. Interior buses keep their order.
    pub fn promote_interior(&self, k: usize, capacity: f64) -> Result<Self, NetworkError> {
        if k < self.n || k >= self.n_buses() {
            return Err(NetworkError::Invalid(format!("bus {k} is not an interior bus")));
        }
        let map = |i: usize| -> usize {
            if i < self.n {
                i
            } else if i == k {
                self.n
            } else if i < k {
                i + 1
            } else {
                i
            }
        };
        let branches = self.branches.iter().map(|b| Branch { from: map(b.from), to: map(b.to), ..*b }).collect();
        let mut caps = self.capacities.clone();
        caps.push(capacity);
        Self::new(self.n + 1, self.m - 1, branches, caps, self.omega0)
    }

    /// Position of bus `k` after [`NetworkModel::promote_interior`].
    pub fn promoted_index(&self, k: usize, bus: usize) -> usize {
        if bus < self.n || bus > k {
            bus
        } else if bus == k {
            self.n
        } else {
            bus + 1
        }
    }
}

/// `B_{N+M}`: Laplacian of branch susceptances plus ground shunts.
pub fn static_b_matrix(net: &NetworkModel) -> DMatrix<f64> {
    let nb = net.n_buses();
    let g = net.ground();
    let mut b = DMatrix::zeros(nb, nb);
    for br in net.branches() {
        for (i, j) in [(br.from, br.to), (br.to, br.from)] {
            if i == g {
                continue;
            }
            b[(i, i)] += br.b;
            if j != g {
                b[(i, j)] -= br.b;
            }
        }
    }
    b
}

/// γ(jω) = [(jω/ω₀ + τ)I + J]⁻¹ in closed form.
pub fn gamma_at(tau: f64, omega: f64, omega0: f64) -> [[Complex64; 2]; 2] {
    let a = Complex64::new(tau, omega / omega0);
    let k = 1.0 / (a * a + 1.0);
    [[a * k, k], [-k, a * k]]
}

/// `Y(jω)` of the whole network, `2(n+m)` square, 2×2 blocks per bus pair.
pub fn assemble_dynamic_y(net: &NetworkModel, omega: f64) -> CMatrix {
    let nb = net.n_buses();
    let g = net.ground();
    let mut y = CMatrix::zeros(2 * nb, 2 * nb);
    for br in net.branches() {
        let gm = gamma_at(br.tau, omega, net.omega0());
        for (i, j) in [(br.from, br.to), (br.to, br.from)] {
            if i == g {
                continue;
            }
            for r in 0..2 {
                for c in 0..2 {
                    let v = gm[r][c] * br.b;
                    y[(2 * i + r, 2 * i + c)] += v;
                    if j != g {
                        y[(2 * i + r, 2 * j + c)] -= v;
                    }
                }
            }
        }
    }
    y
}
