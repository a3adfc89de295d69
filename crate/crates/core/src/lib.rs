//! Two bioeconomic models of a fishery with a no-take marine reserve.
//!
//! * The *patches* model: reserve and fished zone are independent logistic
//!   stocks coupled only by diffusion.
//! * The *global* (split) model: one logistic stock is split into two zones
//!   whose dynamics add up exactly to the aggregate law.
//!
//! The crate computes optimal stationary equilibria of both reserve models
//! and their normality and profitability diagnostics, solves the open-access
//! stationary conditions used to calibrate the aggregate growth rate, and
//! integrates every variant forward in time.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod audit;
pub mod control;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod growth;
pub mod roots;
pub mod scenario;
pub mod simulation;

pub use audit::{reproduce_paper, DeviationKind, DeviationRow, PaperAudit};
pub use control::{
    calibrate_r, clark_golden_rule, hamiltonian_open, patches_open_stationary, CalibrationResult,
    ClarkSolution, StationaryFoc,
};
pub use dynamics::{BioParams, DiffusionSpec, EconParams, ModelVariant, State};
pub use equilibrium::{
    global_equilibrium, normality_diagnosis, patches_equilibrium, EquilibriumReport, Finding,
    Normality, NormalityDiagnosis, ReserveModel,
};
pub use error::{Error, Result};
pub use growth::{ConcaveLaw, GrowthLaw, Logistic};
pub use scenario::{parse_scenario, RunRecord, Scenario, SimulationSetup, TrajectorySummary};
pub use simulation::{
    discounted_revenue, integrate, ControlSchedule, DiscountedRevenue, Trajectory,
};
