//! Optimal stationary solutions of the two reserve models and the
//! diagnostics around them: the profitability threshold `theta0`, the bound
//! on the reserve share that guarantees normality, profitability, and
//! Euler–Lagrange residuals.
//!
//! The patches model has the stationary reserve stock `alpha (r1 - delta) / (2 r1)`
//! and a fished stock given by the positive root of a cubic. The split model
//! has a closed-form stationary state with zero effort, zero diffusion and
//! zero rent.

use serde::Serialize;

use crate::dynamics::{BioParams, EconParams, State};
use crate::error::{Error, Result};
use crate::growth::{aggregate_growth_derivative, ConcaveLaw, Logistic};
use crate::roots::{bisect_then_polish, expand_upper, Root};

/// Final bracket width of the cubic solve.
pub const CUBIC_BRACKET_WIDTH: f64 = 1e-13;
/// Newton steps applied after bisection.
pub const CUBIC_POLISH_STEPS: usize = 3;
/// Maximum number of doublings of the cubic's upper bracket.
pub const CUBIC_MAX_DOUBLINGS: usize = 60;

/// Which reserve model an equilibrium belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReserveModel {
    Patches,
    Global,
}

impl std::str::FromStr for ReserveModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patches" | "patches_reserve" => Ok(ReserveModel::Patches),
            "global" | "global_reserve" => Ok(ReserveModel::Global),
            other => Err(Error::Scenario(format!(
                "unknown model `{other}` (expected patches or global)"
            ))),
        }
    }
}

/// One structured diagnostic attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub key: &'static str,
    pub value: Option<f64>,
    pub note: String,
}

impl Finding {
    fn value(key: &'static str, value: f64, note: impl Into<String>) -> Self {
        Finding {
            key,
            value: Some(value),
            note: note.into(),
        }
    }

    fn flag(key: &'static str, note: impl Into<String>) -> Self {
        Finding {
            key,
            value: None,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub model: ReserveModel,
    pub x1_star: f64,
    pub x2_star: f64,
    pub e_star: f64,
    /// Absent when no non-negative diffusion coefficient supports the state.
    pub lambda_star: Option<f64>,
    /// Discounted total revenue of staying at the equilibrium.
    pub j_star: f64,
    pub normal: bool,
    pub profitable: bool,
    pub feasible: bool,
    pub diagnostics: Vec<Finding>,
}

impl EquilibriumReport {
    pub fn state(&self) -> State {
        State::new(self.x1_star, self.x2_star)
    }

    pub fn finding(&self, key: &str) -> Option<&Finding> {
        self.diagnostics.iter().find(|f| f.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normality {
    Normal,
    NotNormal,
    NeverNormal,
}

impl std::fmt::Display for Normality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normality::Normal => "normal",
            Normality::NotNormal => "not_normal",
            Normality::NeverNormal => "never_normal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityDiagnosis {
    pub theta: f64,
    /// Absent when `r1 == r2`.
    pub theta0: Option<f64>,
    /// Largest reserve share for which the equilibrium is normal; absent
    /// unless `r1 > r2` and `theta > theta0`.
    pub alpha_bound: Option<f64>,
    /// Classification by the threshold and share-bound criterion.
    pub criterion: Normality,
    /// Classification by comparing densities on the solved equilibrium.
    pub decision: Normality,
    pub reserve_density: f64,
    pub fished_density: f64,
}

impl NormalityDiagnosis {
    pub fn agrees(&self) -> bool {
        self.criterion == self.decision
    }
}

fn require_nontrivial(bio: &BioParams, econ: &EconParams) -> Result<()> {
    if !(bio.r1 > econ.delta) {
        return Err(Error::NoNontrivialEquilibrium(format!(
            "requires r1 > delta (r1 = {}, delta = {})",
            bio.r1, econ.delta
        )));
    }
    Ok(())
}

fn validate(bio: &BioParams, econ: &EconParams) -> Result<()> {
    bio.validate()?;
    econ.validate()
}

/// Stationary reserve stock `alpha (r1 - delta) / (2 r1)`.
pub fn patches_x1_star(bio: &BioParams, econ: &EconParams) -> Result<f64> {
    validate(bio, econ)?;
    require_nontrivial(bio, econ)?;
    Ok(bio.alpha * (bio.r1 - econ.delta) / (2.0 * bio.r1))
}

/// Right-hand side of the fished-stock cubic, `F1(x1*)` in the logistic case.
pub fn cubic_rhs(bio: &BioParams, econ: &EconParams) -> f64 {
    let (r1, d) = (bio.r1, econ.delta);
    bio.alpha * (r1 - d) * (r1 + d) / (4.0 * r1)
}

/// Left-hand side of the fished-stock cubic,
/// `x2 [2 r2 theta x2^2/(1-a)^2 - (theta (r2-delta)/(1-a) + r2/(1-a)) x2 - delta]`.
pub fn cubic_lhs(x2: f64, bio: &BioParams, econ: &EconParams, theta: f64) -> f64 {
    let (r2, d) = (bio.r2, econ.delta);
    let m = 1.0 - bio.alpha;
    x2 * (2.0 * r2 * theta / (m * m) * x2 * x2 - (theta * (r2 - d) / m + r2 / m) * x2 - d)
}

fn cubic_lhs_derivative(x2: f64, bio: &BioParams, econ: &EconParams, theta: f64) -> f64 {
    let (r2, d) = (bio.r2, econ.delta);
    let m = 1.0 - bio.alpha;
    6.0 * r2 * theta / (m * m) * x2 * x2 - 2.0 * (theta * (r2 - d) / m + r2 / m) * x2 - d
}

/// Certified root of the fished-stock cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicSolution {
    pub x2: f64,
    /// `LHS(x2) - RHS`.
    pub residual: f64,
    pub bracket_upper: f64,
}

/// Solves the fished-stock cubic on `[0, hi]`, `hi` starting at
/// `max(1 - alpha, 1)` and doubling until the sign changes.
pub fn solve_fished_cubic(bio: &BioParams, econ: &EconParams) -> Result<CubicSolution> {
    validate(bio, econ)?;
    require_nontrivial(bio, econ)?;
    let theta = econ.theta_checked()?;
    let rhs = cubic_rhs(bio, econ);
    let f = |x: f64| cubic_lhs(x, bio, econ, theta) - rhs;
    let df = |x: f64| cubic_lhs_derivative(x, bio, econ, theta);
    if !(f(0.0) < 0.0) {
        return Err(Error::solver("fished cubic", "bracket not negative at 0"));
    }
    let hi = expand_upper(f, 0.0, (1.0 - bio.alpha).max(1.0), CUBIC_MAX_DOUBLINGS)?;
    if !(f(hi) > 0.0) {
        return Err(Error::solver(
            "fished cubic",
            "bracket not positive at upper end",
        ));
    }
    let Root { x, residual, .. } =
        bisect_then_polish(f, df, 0.0, hi, CUBIC_BRACKET_WIDTH, CUBIC_POLISH_STEPS)?;
    Ok(CubicSolution {
        x2: x,
        residual,
        bracket_upper: hi,
    })
}

/// Stationary fished stock: the unique positive root of the cubic.
pub fn patches_x2_star(bio: &BioParams, econ: &EconParams) -> Result<f64> {
    solve_fished_cubic(bio, econ).map(|s| s.x2)
}

/// `T(z) = z [2 r2 theta z^2 - (theta (r2 - delta) + r2) z - delta]`, the cubic
/// written in fished-zone density.
pub fn t_function(z: f64, bio: &BioParams, econ: &EconParams) -> Result<f64> {
    let theta = econ.theta_checked()?;
    let (r2, d) = (bio.r2, econ.delta);
    Ok(z * (2.0 * r2 * theta * z * z - (theta * (r2 - d) + r2) * z - d))
}

/// Normality threshold `(2 r1/(r1 - delta) + r2/delta) r1/(r1 - r2)`.
pub fn theta0(bio: &BioParams, econ: &EconParams) -> Result<f64> {
    require_nontrivial(bio, econ)?;
    if bio.r1 == bio.r2 {
        return Err(Error::ThresholdUndefined("theta0 requires r1 != r2".into()));
    }
    let (r1, r2, d) = (bio.r1, bio.r2, econ.delta);
    Ok((2.0 * r1 / (r1 - d) + r2 / d) * r1 / (r1 - r2))
}

/// Upper bound on `r2` for a given `theta`:
/// `r1 (theta - 2 r1/(r1 - delta)) / (theta + r1/delta)`.
pub fn r2_upper_bound(bio: &BioParams, econ: &EconParams) -> Result<f64> {
    require_nontrivial(bio, econ)?;
    let theta = econ.theta_checked()?;
    let (r1, d) = (bio.r1, econ.delta);
    Ok(r1 * (theta - 2.0 * r1 / (r1 - d)) / (theta + r1 / d))
}

/// The quantity `((r1-delta)/r1)(theta delta (r1-r2)/r1 - r2) - 2 delta`; the
/// normality criterion reads `alpha (r1 + delta) <= (1 - alpha) * margin`.
fn normality_margin(bio: &BioParams, econ: &EconParams, theta: f64) -> f64 {
    let (r1, r2, d) = (bio.r1, bio.r2, econ.delta);
    (r1 - d) / r1 * (theta * d * (r1 - r2) / r1 - r2) - 2.0 * d
}

/// Share bound `margin / (r1 + delta + margin)`, meaningful when the margin
/// is positive.
pub fn alpha_bound(bio: &BioParams, econ: &EconParams) -> Result<Option<f64>> {
    let theta = econ.theta_checked()?;
    let margin = normality_margin(bio, econ, theta);
    Ok((bio.r1 > bio.r2 && margin > 0.0).then(|| margin / (bio.r1 + econ.delta + margin)))
}

pub fn normality_diagnosis(bio: &BioParams, econ: &EconParams) -> Result<NormalityDiagnosis> {
    let x1 = patches_x1_star(bio, econ)?;
    let x2 = patches_x2_star(bio, econ)?;
    let theta = econ.theta_checked()?;
    let theta0 = theta0(bio, econ).ok();
    let alpha_bound = alpha_bound(bio, econ)?;

    let reserve_density = x1 / bio.alpha;
    let fished_density = x2 / (1.0 - bio.alpha);
    let never = bio.r1 <= bio.r2;

    let criterion = if never {
        Normality::NeverNormal
    } else {
        match (theta0, alpha_bound) {
            (Some(t0), Some(bound)) if theta > t0 && bio.alpha <= bound => Normality::Normal,
            _ => Normality::NotNormal,
        }
    };
    let decision = if fished_density <= reserve_density {
        Normality::Normal
    } else if never {
        Normality::NeverNormal
    } else {
        Normality::NotNormal
    };
    Ok(NormalityDiagnosis {
        theta,
        theta0,
        alpha_bound,
        criterion,
        decision,
        reserve_density,
        fished_density,
    })
}

/// Right-hand sides of the Euler–Lagrange system of the patches model for
/// arbitrary concave patch laws.
pub fn patches_el_system<L1: ConcaveLaw, L2: ConcaveLaw>(
    state: State,
    reserve_law: &L1,
    fished_law: &L2,
    alpha: f64,
    delta: f64,
    theta: f64,
) -> (f64, f64) {
    let x2 = state.x2;
    let w = x2 * (theta * x2 / (1.0 - alpha) - 1.0);
    (
        w * (fished_law.slope(x2) - delta) + reserve_law.value(state.x1) + fished_law.value(x2),
        w * (delta - reserve_law.slope(state.x1)),
    )
}

/// Right-hand sides of the logistic Euler–Lagrange systems; both vanish at
/// the equilibria returned by this module.
pub fn el_residual(
    state: State,
    bio: &BioParams,
    econ: &EconParams,
    model: ReserveModel,
) -> Result<(f64, f64)> {
    let theta = econ.theta_checked()?;
    let (alpha, d) = (bio.alpha, econ.delta);
    match model {
        ReserveModel::Patches => {
            let f1 = Logistic::new(bio.r1, bio.reserve_capacity())?;
            let f2 = Logistic::new(bio.r2, bio.fished_capacity())?;
            Ok(patches_el_system(state, &f1, &f2, alpha, d, theta))
        }
        ReserveModel::Global => {
            let r = bio.aggregate_rate()?;
            let z = state.total();
            let x2 = state.x2;
            let w = x2 * (theta * x2 / (1.0 - alpha) - 1.0);
            let slope = aggregate_growth_derivative(z, r);
            Ok((w * (slope - d) + r * z * (1.0 - z), w * (d - slope)))
        }
    }
}

/// Stationary solution of the patches reserve model with every diagnostic.
pub fn patches_equilibrium(bio: &BioParams, econ: &EconParams) -> Result<EquilibriumReport> {
    let x1 = patches_x1_star(bio, econ)?;
    let cubic = solve_fished_cubic(bio, econ)?;
    let x2 = cubic.x2;
    let theta = econ.theta_checked()?;
    let alpha = bio.alpha;

    let f1 = Logistic::new(bio.r1, bio.reserve_capacity())?;
    let f2 = Logistic::new(bio.r2, bio.fished_capacity())?;
    let growth1 = f1.value(x1);
    let growth2 = f2.value(x2);
    let e_star = (1.0 - alpha) / (econ.q * x2) * (growth1 + growth2);
    let j_star = (econ.p * econ.q * x2 / (1.0 - alpha) - econ.c) * e_star / econ.delta;

    let gap = x1 / alpha - x2 / (1.0 - alpha);
    let normal = gap >= 0.0;
    let lambda_star = (gap > 0.0).then(|| growth1 / gap);
    let profitable = x2 / (1.0 - alpha) > 1.0 / theta;
    let effort_ok = (0.0..=econ.e_max).contains(&e_star);
    let feasible = lambda_star.is_some() && effort_ok;

    let mut diagnostics = vec![
        Finding::value("theta", theta, "pq/c"),
        Finding::value(
            "cubic_residual",
            cubic.residual,
            "fished-stock cubic LHS - RHS",
        ),
        Finding::value(
            "density_gap",
            gap,
            "x1/alpha - x2/(1-alpha); >= 0 means normal",
        ),
    ];
    match theta0(bio, econ) {
        Ok(t0) => diagnostics.push(Finding::value("theta0", t0, "normality threshold")),
        Err(e) => diagnostics.push(Finding::flag("theta0", e.to_string())),
    }
    if let Some(bound) = alpha_bound(bio, econ)? {
        diagnostics.push(Finding::value(
            "alpha_bound",
            bound,
            format!(
                "alpha = {alpha} {} bound",
                if alpha <= bound { "<=" } else { ">" }
            ),
        ));
    }
    if let Ok(b) = r2_upper_bound(bio, econ) {
        diagnostics.push(Finding::value("r2_bound", b, format!("r2 = {}", bio.r2)));
    }
    let (el1, el2) = el_residual(State::new(x1, x2), bio, econ, ReserveModel::Patches)?;
    diagnostics.push(Finding::value(
        "el_residual",
        el1.abs().max(el2.abs()),
        "max |EL rhs|",
    ));
    if lambda_star.is_none() {
        diagnostics.push(Finding::flag(
            "lambda_absent",
            "equilibrium not strictly normal; no non-negative diffusion supports it",
        ));
    }
    if !effort_ok {
        diagnostics.push(Finding::value(
            "effort_out_of_bounds",
            e_star,
            format!("E* outside [0, {}]", econ.e_max),
        ));
    }

    Ok(EquilibriumReport {
        model: ReserveModel::Patches,
        x1_star: x1,
        x2_star: x2,
        e_star,
        lambda_star,
        j_star,
        normal,
        profitable,
        feasible,
        diagnostics,
    })
}

/// Tolerance on `|theta - 1|` below which the split model's diffusion
/// coefficient is reported as indeterminate.
pub const THETA_ONE_TOLERANCE: f64 = 1e-12;

/// Closed-form stationary solution of the split (global) reserve model:
/// `(1 - c(1-alpha)/pq, c(1-alpha)/pq)` with zero effort, diffusion and rent.
pub fn global_equilibrium(bio: &BioParams, econ: &EconParams) -> Result<EquilibriumReport> {
    validate(bio, econ)?;
    let theta = econ.theta_checked()?;
    let alpha = bio.alpha;
    let pq = econ.p * econ.q;
    if !(pq > econ.c * (1.0 - alpha)) {
        return Err(Error::NonpositiveEquilibrium(format!(
            "requires pq > c (1 - alpha) (pq = {pq}, c (1 - alpha) = {})",
            econ.c * (1.0 - alpha)
        )));
    }
    let x2 = econ.c * (1.0 - alpha) / pq;
    let x1 = 1.0 - x2;
    let indeterminate = (theta - 1.0).abs() <= THETA_ONE_TOLERANCE;

    let mut diagnostics = vec![Finding::value("theta", theta, "pq/c")];
    if indeterminate {
        diagnostics.push(Finding::flag(
            "lambda_indeterminate",
            "theta = 1: densities are equal and any diffusion coefficient is stationary",
        ));
    }
    if bio.r.is_some() {
        let (el1, el2) = el_residual(State::new(x1, x2), bio, econ, ReserveModel::Global)?;
        diagnostics.push(Finding::value(
            "el_residual",
            el1.abs().max(el2.abs()),
            "max |EL rhs|",
        ));
    }

    Ok(EquilibriumReport {
        model: ReserveModel::Global,
        x1_star: x1,
        x2_star: x2,
        e_star: 0.0,
        lambda_star: (!indeterminate).then_some(0.0),
        j_star: 0.0,
        normal: pq - econ.c > 0.0,
        profitable: x2 / (1.0 - alpha) > 1.0 / theta,
        feasible: true,
        diagnostics,
    })
}

pub fn equilibrium(
    model: ReserveModel,
    bio: &BioParams,
    econ: &EconParams,
) -> Result<EquilibriumReport> {
    match model {
        ReserveModel::Patches => patches_equilibrium(bio, econ),
        ReserveModel::Global => global_equilibrium(bio, econ),
    }
}
