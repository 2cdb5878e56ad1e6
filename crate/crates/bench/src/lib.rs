//! Benchmark fixtures shared by the criterion targets.

use nsp_core::{Grid, NspState, Recipe};

/// Box of edge `n * pi / 2`, matching the small-data runs.
pub fn box_grid(n: usize) -> Grid {
    Grid::new(n, n as f64 * std::f64::consts::FRAC_PI_2).expect("power of two")
}

pub fn box_state(n: usize) -> NspState {
    Recipe::GaussianGrad { s: Some(0.5) }
        .box_state(box_grid(n), 1e-2)
        .expect("valid recipe")
}
