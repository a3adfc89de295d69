//! Shared fixtures for the criterion benchmarks.

use mpa_core::{BioParams, DiffusionSpec, EconParams, Scenario};

/// The built-in comparison scenario.
pub fn paper() -> Scenario {
    Scenario::paper()
}

/// Same biology with `pq/c = 20`, where the patches equilibrium is normal.
pub fn profitable() -> (BioParams, EconParams, DiffusionSpec) {
    let s = Scenario::paper();
    let econ = EconParams { p: 1.5, ..s.econ };
    (s.bio, econ, s.diffusion)
}
