//! Position-dependent-mass quantum systems with first-order ladder operators,
//! an independent Sturm–Liouville eigensolver, and SUSY partner construction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hamiltonian;
pub mod ladder;
pub mod numerics;
pub mod profile;
pub mod solver;
pub mod susy;
pub mod verify;

pub use error::{Error, Result};
pub use hamiltonian::{interior_mask, Hamiltonian};
pub use ladder::{auto_widened_grid, build_ladder_system, FormalState, LadderConfig, LadderSystem};
pub use numerics::{build_grid, Grid, SampledFunction};
pub use profile::{Domain, MassProfile, OrderingParameters};
pub use solver::{
    check_boundary_condition, discretize, overlap_matrix, solve_spectrum, BoundaryCondition,
    DiscretizedOperator, SpectrumReport,
};
pub use susy::{
    confluent_transform, critical_d, first_order_transform, map_state_first, missing_state_first,
    missing_state_second, second_order_nonconfluent, superpotential_from_seed, FirstOrderTransform,
    SecondOrderTransform, Seed, SingularityReport, SusyOptions,
};
pub use verify::{run_verify, Check, Tolerances, VerifyReport, VerifySetup};
