//! Vector fields of the four two-zone variants, with the diffusion term,
//! harvest, rent, density view and effort reconstruction.
//!
//! Zone 1 is the reserve (capacity `alpha`), zone 2 the fished area
//! (capacity `1 - alpha`). The reserve variants harvest zone 2 at the
//! density rate `q E x2 / (1 - alpha)`; the open-access variants harvest
//! both zones at the stock rate `q E x_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{aggregate_growth, patch_growth, shared_field_growth};
use crate::simulation::Trajectory;

/// Total carrying capacity of the undivided zone.
pub const TOTAL_CAPACITY: f64 = 1.0;

/// Market and regulator constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    /// Price per unit catch.
    pub p: f64,
    /// Catchability at unit density.
    pub q: f64,
    /// Cost per unit effort.
    pub c: f64,
    /// Discount rate.
    pub delta: f64,
    /// Upper bound on fishing effort.
    pub e_max: f64,
}

impl EconParams {
    pub const DEFAULT_E_MAX: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(Error::Invariant("p > 0".into()));
        }
        if !(self.q > 0.0) {
            return Err(Error::Invariant("q > 0".into()));
        }
        if !(self.c >= 0.0) {
            return Err(Error::Invariant("c >= 0".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Invariant("delta > 0".into()));
        }
        if !(self.e_max > 0.0) {
            return Err(Error::Invariant("e_max > 0".into()));
        }
        Ok(())
    }

    /// Profitability ratio `pq / c`, undefined for a cost-free fishery.
    pub fn theta(&self) -> Option<f64> {
        (self.c > 0.0).then(|| self.p * self.q / self.c)
    }

    pub(crate) fn theta_checked(&self) -> Result<f64> {
        self.theta()
            .ok_or_else(|| Error::Invariant("c > 0 (theta = pq/c undefined)".into()))
    }

    pub fn check_effort(&self, effort: f64) -> Result<()> {
        if !(0.0..=self.e_max).contains(&effort) {
            return Err(Error::EffortOutOfBounds {
                effort,
                e_max: self.e_max,
            });
        }
        Ok(())
    }
}

/// Biological constants. The total capacity is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BioParams {
    /// Growth rate of the reserve patch.
    pub r1: f64,
    /// Growth rate of the fished patch.
    pub r2: f64,
    /// Growth rate of the undivided stock; only the global variants use it.
    pub r: Option<f64>,
    /// Reserve share of the capacity.
    pub alpha: f64,
}

impl BioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invariant("alpha in (0,1)".into()));
        }
        if !(self.r1 > 0.0) {
            return Err(Error::Invariant("r1 > 0".into()));
        }
        if !(self.r2 > 0.0) {
            return Err(Error::Invariant("r2 > 0".into()));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return Err(Error::Invariant("r > 0".into()));
            }
        }
        Ok(())
    }

    pub fn aggregate_rate(&self) -> Result<f64> {
        self.r
            .ok_or_else(|| Error::Invariant("bio.r is required by the global variants".into()))
    }

    pub fn reserve_capacity(&self) -> f64 {
        self.alpha * TOTAL_CAPACITY
    }

    pub fn fished_capacity(&self) -> f64 {
        (1.0 - self.alpha) * TOTAL_CAPACITY
    }
}

/// How strongly biomass flows between the zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DiffusionSpec {
    Constant {
        lambda: f64,
    },
    /// `lambda0 * alpha * (1 - alpha)`, vanishing when either zone is empty.
    SizeDependent {
        lambda0: f64,
    },
}

impl DiffusionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DiffusionSpec::Constant { lambda } if !(lambda >= 0.0) => {
                Err(Error::Invariant("lambda >= 0".into()))
            }
            DiffusionSpec::SizeDependent { lambda0 } if !(lambda0 >= 0.0) => {
                Err(Error::Invariant("lambda0 >= 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// Effective coefficient at reserve share `alpha`.
    pub fn effective(&self, alpha: f64) -> f64 {
        match *self {
            DiffusionSpec::Constant { lambda } => lambda,
            DiffusionSpec::SizeDependent { lambda0 } => lambda0 * alpha * (1.0 - alpha),
        }
    }
}

/// Stocks in the reserve (`x1`) and in the fished zone (`x2`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
}

impl State {
    pub fn new(x1: f64, x2: f64) -> Self {
        State { x1, x2 }
    }

    pub fn total(&self) -> f64 {
        self.x1 + self.x2
    }

    fn check(&self) -> Result<()> {
        if !(self.x1 >= 0.0 && self.x2 >= 0.0) {
            return Err(Error::Domain(format!(
                "stocks must be non-negative, got ({}, {})",
                self.x1, self.x2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Independent logistic patches, fishing only outside the reserve.
    PatchesReserve,
    /// Split single stock, fishing only outside the reserve.
    GlobalReserve,
    /// Independent logistic patches, fishing in both zones.
    PatchesOpen,
    /// Split single stock, fishing in both zones.
    GlobalOpen,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::PatchesReserve,
        ModelVariant::GlobalReserve,
        ModelVariant::PatchesOpen,
        ModelVariant::GlobalOpen,
    ];

    pub fn is_global(self) -> bool {
        matches!(self, ModelVariant::GlobalReserve | ModelVariant::GlobalOpen)
    }

    pub fn is_reserve(self) -> bool {
        matches!(
            self,
            ModelVariant::PatchesReserve | ModelVariant::GlobalReserve
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::PatchesReserve => "patches_reserve",
            ModelVariant::GlobalReserve => "global_reserve",
            ModelVariant::PatchesOpen => "patches_open",
            ModelVariant::GlobalOpen => "global_open",
        }
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patches_reserve" | "patches" => Ok(ModelVariant::PatchesReserve),
            "global_reserve" | "global" => Ok(ModelVariant::GlobalReserve),
            "patches_open" | "patches-open" => Ok(ModelVariant::PatchesOpen),
            "global_open" | "global-open" => Ok(ModelVariant::GlobalOpen),
            other => Err(Error::Scenario(format!("unknown model variant `{other}`"))),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha in (0,1), got {alpha}")));
    }
    Ok(())
}

/// Density gap `x2/(1-alpha) - x1/alpha`; positive when the fished zone is
/// denser.
pub fn density_gap(state: State, alpha: f64) -> f64 {
    state.x2 / (1.0 - alpha) - state.x1 / alpha
}

/// Net diffusive flow into the reserve, `lambda_eff * (x2/(1-alpha) - x1/alpha)`.
///
/// At `alpha` in {0, 1} the size-dependent coefficient vanishes and the flow is
/// taken as 0; the constant mode rejects those shares.
pub fn diffusion_flux(state: State, alpha: f64, spec: DiffusionSpec) -> Result<f64> {
    if let DiffusionSpec::SizeDependent { .. } = spec {
        if alpha == 0.0 || alpha == 1.0 {
            return Ok(0.0);
        }
    }
    check_alpha(alpha)?;
    Ok(spec.effective(alpha) * density_gap(state, alpha))
}

/// Natural growth of both sub-stocks (no diffusion, no harvest).
fn natural_growth(variant: ModelVariant, state: State, bio: &BioParams) -> Result<(f64, f64)> {
    if variant.is_global() {
        let r = bio.aggregate_rate()?;
        let z = state.total();
        Ok((
            shared_field_growth(state.x1, z, r)?,
            shared_field_growth(state.x2, z, r)?,
        ))
    } else {
        Ok((
            patch_growth(state.x1, bio.r1, bio.reserve_capacity())?,
            patch_growth(state.x2, bio.r2, bio.fished_capacity())?,
        ))
    }
}

/// Total natural growth: `G = F1(x1) + F2(x2)` for patches, `phi(z)` for the
/// split stock.
pub fn total_growth(variant: ModelVariant, state: State, bio: &BioParams) -> Result<f64> {
    if variant.is_global() {
        aggregate_growth(state.total(), bio.aggregate_rate()?)
    } else {
        let (g1, g2) = natural_growth(variant, state, bio)?;
        Ok(g1 + g2)
    }
}

/// Harvest from each zone per unit time.
pub fn harvest(variant: ModelVariant, state: State, effort: f64, alpha: f64, q: f64) -> (f64, f64) {
    if variant.is_reserve() {
        (0.0, q * effort * state.x2 / (1.0 - alpha))
    } else {
        (q * effort * state.x1, q * effort * state.x2)
    }
}

/// Vector field with an already-resolved diffusion coefficient and no bound
/// check on the effort.
pub(crate) fn field(
    variant: ModelVariant,
    state: State,
    effort: f64,
    lambda_eff: f64,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    state.check()?;
    check_alpha(bio.alpha)?;
    let (g1, g2) = natural_growth(variant, state, bio)?;
    let flux = lambda_eff * density_gap(state, bio.alpha);
    let (h1, h2) = harvest(variant, state, effort, bio.alpha, econ.q);
    Ok((g1 + flux - h1, g2 - flux - h2))
}

/// Right-hand side of any variant.
pub fn rhs(
    variant: ModelVariant,
    state: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    econ.check_effort(effort)?;
    field(variant, state, effort, spec.effective(bio.alpha), bio, econ)
}

pub fn patches_reserve_rhs(
    state: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    rhs(ModelVariant::PatchesReserve, state, effort, spec, bio, econ)
}

pub fn global_reserve_rhs(
    state: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    rhs(ModelVariant::GlobalReserve, state, effort, spec, bio, econ)
}

pub fn patches_open_rhs(
    state: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    rhs(ModelVariant::PatchesOpen, state, effort, spec, bio, econ)
}

pub fn global_open_rhs(
    state: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<(f64, f64)> {
    rhs(ModelVariant::GlobalOpen, state, effort, spec, bio, econ)
}

/// Stocks expressed as densities, with the catchability rescaled to match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityView {
    pub reserve_density: f64,
    pub fished_density: f64,
    pub rescaled_q: f64,
}

pub fn density_view(state: State, alpha: f64, q: f64) -> Result<DensityView> {
    check_alpha(alpha)?;
    Ok(DensityView {
        reserve_density: state.x1 / alpha,
        fished_density: state.x2 / (1.0 - alpha),
        rescaled_q: q / (1.0 - alpha),
    })
}

/// Rent of the reserve variants, `(pq x2/(1-alpha) - c) E`. May be negative.
pub fn instantaneous_rent(state: State, effort: f64, alpha: f64, econ: &EconParams) -> f64 {
    (econ.p * econ.q * state.x2 / (1.0 - alpha) - econ.c) * effort
}

/// Rent of the open-access variants, `(pq (x1 + x2) - c) E`.
pub fn open_access_rent(state: State, effort: f64, econ: &EconParams) -> f64 {
    (econ.p * econ.q * state.total() - econ.c) * effort
}

pub fn rent(
    variant: ModelVariant,
    state: State,
    effort: f64,
    alpha: f64,
    econ: &EconParams,
) -> f64 {
    if variant.is_reserve() {
        instantaneous_rent(state, effort, alpha, econ)
    } else {
        open_access_rent(state, effort, econ)
    }
}

/// Recovers the effort from the total rate of change `x1' + x2'`.
///
/// The diffusion term cancels in the sum, so only the growth and the harvest
/// remain; this inverts the harvest term of [`rhs`].
pub fn effort_from_rates(
    state: State,
    xdot_sum: f64,
    bio: &BioParams,
    q: f64,
    variant: ModelVariant,
) -> Result<f64> {
    check_alpha(bio.alpha)?;
    let g = total_growth(variant, state, bio)?;
    let exposed = if variant.is_reserve() {
        state.x2 / (1.0 - bio.alpha)
    } else {
        state.total()
    };
    if state.x2 == 0.0 || exposed == 0.0 {
        return Err(Error::EffortUndefined);
    }
    Ok((g - xdot_sum) / (q * exposed))
}

/// Result of checking a trajectory against the admissible-curve bounds
/// `G - q E_max * exposed <= x1' + x2' <= G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: Vec<bool>,
    /// Amount by which each sample leaves the band (0 when inside).
    pub violation: Vec<f64>,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl AdmissibilityReport {
    pub fn all_admissible(&self) -> bool {
        self.admissible.iter().all(|&a| a)
    }
}

/// Rate estimates on the trajectory's own grid: central differences inside,
/// second-order one-sided differences at the ends.
fn estimate_rates(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 2 {
        let d = (values[1] - values[0]) / (times[1] - times[0]);
        return vec![d, d];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                let (h0, h1) = (times[1] - times[0], times[2] - times[1]);
                let (a, b, c) = (values[0], values[1], values[2]);
                // quadratic through the first three nodes, differentiated at t0
                -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * a + (h0 + h1) / (h0 * h1) * b
                    - h0 / (h1 * (h0 + h1)) * c
            } else if i == n - 1 {
                let (h0, h1) = (times[n - 2] - times[n - 3], times[n - 1] - times[n - 2]);
                let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
                h1 / (h0 * (h0 + h1)) * a - (h0 + h1) / (h0 * h1) * b
                    + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * c
            } else {
                (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1])
            }
        })
        .collect()
}

/// Checks every sample of `traj` against the admissible band of its variant.
///
/// The tolerance is the truncation bound of the difference formulas,
/// `h^2 / 3 * max |z'''|` with `z'''` itself estimated from third differences
/// of the trajectory, doubled, plus a rounding floor.
pub fn admissible_curve_check(
    traj: &Trajectory,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<AdmissibilityReport> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::Domain(
            "admissibility check needs at least 2 samples".into(),
        ));
    }
    let sums: Vec<f64> = traj.states.iter().map(State::total).collect();
    let rates = estimate_rates(&traj.times, &sums);
    let h_max = traj
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let third = if n >= 4 {
        (0..n - 3)
            .map(|i| {
                let h = (traj.times[i + 3] - traj.times[i]) / 3.0;
                (sums[i + 3] - 3.0 * sums[i + 2] + 3.0 * sums[i + 1] - sums[i]).abs() / h.powi(3)
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let tolerance = 2.0 * h_max * h_max / 3.0 * third + 1e-12;

    let mut admissible = Vec::with_capacity(n);
    let mut violation = Vec::with_capacity(n);
    for (state, rate) in traj.states.iter().zip(&rates) {
        let g = total_growth(traj.variant, *state, bio)?;
        let (h1, h2) = harvest(traj.variant, *state, econ.e_max, bio.alpha, econ.q);
        let lower = g - (h1 + h2);
        let v = (rate - g).max(lower - rate).max(0.0);
        violation.push(v);
        admissible.push(v <= tolerance);
    }
    let max_violation = violation.iter().copied().fold(0.0, f64::max);
    Ok(AdmissibilityReport {
        admissible,
        violation,
        max_violation,
        tolerance,
    })
}
