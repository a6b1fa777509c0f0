//! Shared fixtures for the benchmarks in `benches/`.

use std::sync::Arc;

use pdmsusy::{auto_widened_grid, Grid, LadderConfig, LadderSystem, MassProfile};

/// Cosine profile with `m0 = 1.15` on an auto-widened grid covering five
/// ladder levels.
pub fn cosine_grid(n_points: usize) -> (MassProfile, LadderConfig, Arc<Grid>) {
    let profile = MassProfile::cosine(1.15).expect("valid mass");
    let config = LadderConfig::new(1.0);
    let grid = auto_widened_grid(&profile, &config, n_points, 5, 1e-3).expect("grid");
    (profile, config, grid)
}

pub fn cosine_system(n_points: usize) -> LadderSystem {
    let (profile, config, grid) = cosine_grid(n_points);
    LadderSystem::build(&profile, &config, &grid).expect("ladder system")
}
