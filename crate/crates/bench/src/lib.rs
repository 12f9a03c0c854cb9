//! Shared fixtures for the benchmark targets.

use mengerflow_core::geometry::generate_torus_knot;
use mengerflow_core::{EnergyParams, Polyline};

pub fn trefoil(n: usize) -> Polyline {
    generate_torus_knot(2, 3, n, 2.0, 1.0).expect("valid torus knot")
}

pub fn default_params() -> EnergyParams {
    EnergyParams::new(2.5).expect("p in range")
}
