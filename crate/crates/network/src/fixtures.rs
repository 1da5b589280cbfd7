//! Small reference networks shared by tests, examples and bundled cases.

use crate::{Branch, NetworkModel};
use gridformer_converter::OMEGA0;

fn br(from: usize, to: usize, b: f64, tau: f64) -> Branch {
    Branch { from, to, b, tau }
}

/// Three device buses (0, 1, 2) around a hub interior bus 3, uniform τ.
///
/// Bus 2 hangs off the hub through the weakest line. The hub is where an
/// extra device is attached in the added-device studies.
pub fn three_bus(tau: f64) -> NetworkModel {
    let g = 4;
    NetworkModel::new(
        3,
        1,
        vec![
            br(0, 3, 6.0, tau),
            br(1, 3, 5.0, tau),
            br(2, 3, 3.0, tau),
            br(0, 1, 2.0, tau),
            br(3, g, 6.0, tau),
            br(0, g, 2.0, tau),
        ],
        vec![1.0, 1.0, 1.0],
        OMEGA0,
    )
    .expect("fixture is valid")
}

/// Three device buses, no interior bus, uniform τ (for homogeneous checks).
pub fn triangle(tau: f64) -> NetworkModel {
    let g = 3;
    NetworkModel::new(
        3,
        0,
        vec![
            br(0, 1, 4.0, tau),
            br(1, 2, 3.0, tau),
            br(0, 2, 2.0, tau),
            br(0, g, 5.0, tau),
            br(2, g, 3.0, tau),
        ],
        vec![1.0, 1.0, 1.0],
        OMEGA0,
    )
    .expect("fixture is valid")
}

/// Three device buses and two interior buses with mixed τ.
pub fn five_bus() -> NetworkModel {
    let g = 5;
    NetworkModel::new(
        3,
        2,
        vec![
            br(0, 3, 5.0, 0.08),
            br(1, 3, 4.0, 0.12),
            br(1, 4, 3.0, 0.10),
            br(2, 4, 6.0, 0.05),
            br(3, 4, 2.5, 0.15),
            br(3, g, 4.0, 0.10),
            br(4, g, 3.0, 0.09),
        ],
        vec![1.0, 1.5, 0.8],
        OMEGA0,
    )
    .expect("fixture is valid")
}
