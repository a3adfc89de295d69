//! Stationary first-order conditions of the open-access problems and the
//! calibration of the aggregate growth rate.
//!
//! For the open-access patches model the current-value Hamiltonian is
//!
//! ```text
//! H = (pq (x1 + x2) - c) E + p1 * x1' + p2 * x2'
//! ```
//!
//! with `x1'`, `x2'` the open-access patch dynamics. A stationary singular
//! solution satisfies `x1' = x2' = 0`, `delta p_i = dH/dx_i` and `dH/dE = 0`:
//! five equations in `(x1, x2, p1, p2, E)`. The undivided open-access model
//! is the Clark model, whose stationary stock solves the modified golden rule
//! with unit harvest cost `c / (q z)`.

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::dynamics::{field, BioParams, DiffusionSpec, EconParams, ModelVariant, State};
use crate::error::{Error, Result};
use crate::growth::{ConcaveLaw, Logistic};
use crate::roots::bisect_then_polish;

type Vec5 = SVector<f64, 5>;
type Mat5 = SMatrix<f64, 5, 5>;

/// Convergence threshold on the max-norm of the five residuals.
pub const FOC_TOLERANCE: f64 = 1e-10;
pub const NEWTON_MAX_ITERATIONS: usize = 100;
pub const NEWTON_MAX_HALVINGS: usize = 30;
/// Multi-start grid size per stock axis.
pub const START_GRID: usize = 9;
/// Upper end of the growth-rate search in the calibration.
pub const CALIBRATION_R_MAX: f64 = 4.0;
/// Grid used to verify monotonicity of the Clark effort in `r`.
pub const CALIBRATION_GRID: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryFoc {
    pub x1: f64,
    pub x2: f64,
    /// Shadow value of the reserve-zone stock.
    pub p1: f64,
    /// Shadow value of the fished-zone stock.
    pub p2: f64,
    pub effort: f64,
    /// Max-norm of the five stationarity residuals.
    pub residual_norm: f64,
    /// Discounted rent of staying at the point, `(pq z - c) E / delta`.
    pub j: f64,
    /// The converged effort lies outside `[0, e_max]`.
    pub on_boundary: bool,
    pub converged_starts: usize,
}

impl StationaryFoc {
    pub fn state(&self) -> State {
        State::new(self.x1, self.x2)
    }

    fn unknowns(&self) -> Vec5 {
        Vec5::new(self.x1, self.x2, self.p1, self.p2, self.effort)
    }
}

/// Everything the open-access patch problem needs, resolved once.
struct OpenPatches {
    f1: Logistic,
    f2: Logistic,
    alpha: f64,
    lambda: f64,
    econ: EconParams,
}

impl OpenPatches {
    fn new(bio: &BioParams, econ: &EconParams, spec: DiffusionSpec) -> Result<Self> {
        bio.validate()?;
        econ.validate()?;
        spec.validate()?;
        Ok(OpenPatches {
            f1: Logistic::new(bio.r1, bio.reserve_capacity())?,
            f2: Logistic::new(bio.r2, bio.fished_capacity())?,
            alpha: bio.alpha,
            lambda: spec.effective(bio.alpha),
            econ: *econ,
        })
    }

    fn residuals(&self, v: &Vec5) -> Vec5 {
        let (x1, x2, p1, p2, e) = (v[0], v[1], v[2], v[3], v[4]);
        let EconParams { q, delta, .. } = self.econ;
        let (a, l) = (self.alpha, self.lambda);
        let flux = l * (x2 / (1.0 - a) - x1 / a);
        let [h1, h2, he] = gradient_terms(self, x1, x2, p1, p2, e);
        Vec5::new(
            self.f1.value(x1) + flux - q * e * x1,
            self.f2.value(x2) - flux - q * e * x2,
            delta * p1 - h1,
            delta * p2 - h2,
            he,
        )
    }

    fn jacobian(&self, v: &Vec5) -> Mat5 {
        let mut jac = Mat5::zeros();
        for j in 0..5 {
            let h = 1e-6 * v[j].abs().max(1.0);
            let mut hi = *v;
            let mut lo = *v;
            hi[j] += h;
            lo[j] -= h;
            let col = (self.residuals(&hi) - self.residuals(&lo)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        jac
    }

    /// Damped Newton from `start`; `None` if it fails to reach the tolerance.
    fn newton(&self, start: Vec5) -> Option<(Vec5, f64)> {
        let mut v = start;
        let mut norm = self.residuals(&v).amax();
        for _ in 0..NEWTON_MAX_ITERATIONS {
            if norm <= 1e-14 {
                break;
            }
            let step = self.jacobian(&v).lu().solve(&(-self.residuals(&v)))?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..=NEWTON_MAX_HALVINGS {
                let trial = v + step * scale;
                let n = self.residuals(&trial).amax();
                if n.is_finite() && n < norm {
                    v = trial;
                    norm = n;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (norm <= FOC_TOLERANCE).then_some((v, norm))
    }
}

/// `[dH/dx1, dH/dx2, dH/dE]` in closed form.
fn gradient_terms(m: &OpenPatches, x1: f64, x2: f64, p1: f64, p2: f64, e: f64) -> [f64; 3] {
    let EconParams { p, q, c, .. } = m.econ;
    let (a, l) = (m.alpha, m.lambda);
    [
        p * q * e + p1 * (m.f1.slope(x1) - l / a - q * e) + p2 * l / a,
        p * q * e + p1 * l / (1.0 - a) + p2 * (m.f2.slope(x2) - l / (1.0 - a) - q * e),
        p * q * (x1 + x2) - c - q * (p1 * x1 + p2 * x2),
    ]
}

/// Current-value Hamiltonian of the open-access patches problem.
pub fn hamiltonian_open(
    state: State,
    costate: (f64, f64),
    effort: f64,
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
) -> Result<f64> {
    let (dx1, dx2) = field(
        ModelVariant::PatchesOpen,
        state,
        effort,
        spec.effective(bio.alpha),
        bio,
        econ,
    )?;
    Ok((econ.p * econ.q * state.total() - econ.c) * effort + costate.0 * dx1 + costate.1 * dx2)
}

/// Closed-form `[dH/dx1, dH/dx2, dH/dE]` of [`hamiltonian_open`].
pub fn hamiltonian_gradient(
    state: State,
    costate: (f64, f64),
    effort: f64,
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
) -> Result<[f64; 3]> {
    let m = OpenPatches::new(bio, econ, spec)?;
    Ok(gradient_terms(
        &m, state.x1, state.x2, costate.0, costate.1, effort,
    ))
}

/// The five stationarity residuals at a candidate point.
pub fn foc_residuals(
    state: State,
    costate: (f64, f64),
    effort: f64,
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
) -> Result<[f64; 5]> {
    let m = OpenPatches::new(bio, econ, spec)?;
    let r = m.residuals(&Vec5::new(state.x1, state.x2, costate.0, costate.1, effort));
    Ok([r[0], r[1], r[2], r[3], r[4]])
}

/// Interior singular stationary point of the open-access patches problem.
///
/// Damped Newton is started from a 9x9 grid of interior stocks. Costates start
/// equal at the value that zeroes the switching function, and the effort at
/// the value that balances total growth. Among converged starts with positive
/// stocks, those with effort in `[0, e_max]` are preferred; within that set
/// the larger discounted rent wins.
pub fn patches_open_stationary(
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
) -> Result<StationaryFoc> {
    let m = OpenPatches::new(bio, econ, spec)?;
    let EconParams {
        p,
        q,
        c,
        delta,
        e_max,
    } = *econ;
    let mut best: Option<StationaryFoc> = None;
    let mut converged_starts = 0;
    let n = START_GRID as f64 + 1.0;

    for i in 1..=START_GRID {
        for j in 1..=START_GRID {
            let x1 = bio.reserve_capacity() * i as f64 / n;
            let x2 = bio.fished_capacity() * j as f64 / n;
            let z = x1 + x2;
            let shadow = p - c / (q * z);
            let e0 = ((m.f1.value(x1) + m.f2.value(x2)) / (q * z)).clamp(0.0, e_max);
            let Some((v, norm)) = m.newton(Vec5::new(x1, x2, shadow, shadow, e0)) else {
                continue;
            };
            if !(v[0] > 0.0 && v[1] > 0.0) {
                continue;
            }
            converged_starts += 1;
            let candidate = StationaryFoc {
                x1: v[0],
                x2: v[1],
                p1: v[2],
                p2: v[3],
                effort: v[4],
                residual_norm: norm,
                j: (p * q * (v[0] + v[1]) - c) * v[4] / delta,
                on_boundary: !(0.0..=e_max).contains(&v[4]),
                converged_starts: 0,
            };
            let better = match &best {
                None => true,
                Some(b) => match (b.on_boundary, candidate.on_boundary) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => candidate.j > b.j,
                },
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.map(|b| StationaryFoc {
        converged_starts,
        ..b
    })
    .ok_or_else(|| {
        Error::solver(
            "open-access stationary point",
            "no interior singular stationary point",
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClarkSolution {
    pub z_star: f64,
    pub e_star: f64,
    /// Golden-rule residual at `z_star`.
    pub residual: f64,
}

/// Modified golden rule of the Clark model,
/// `r (1 - 2z) + c r (1 - z) / (pq z - c) - delta`.
pub fn golden_rule_residual(z: f64, r: f64, econ: &EconParams) -> f64 {
    let EconParams { p, q, c, delta, .. } = *econ;
    let cost_term = if c == 0.0 {
        0.0
    } else {
        c * r * (1.0 - z) / (p * q * z - c)
    };
    r * (1.0 - 2.0 * z) + cost_term - delta
}

/// Stationary stock and effort of the Clark model `z' = r z (1 - z) - q E z`
/// with rent `(pq z - c) E`.
pub fn clark_golden_rule(r: f64, econ: &EconParams) -> Result<ClarkSolution> {
    let EconParams { p, q, c, .. } = *econ;
    if !(r > 0.0) {
        return Err(Error::Invariant("r > 0".into()));
    }
    if !(p * q > c) {
        return Err(Error::Invariant("pq > c (profitable fishery)".into()));
    }
    let f = |z: f64| golden_rule_residual(z, r, econ);
    let df = |z: f64| {
        let h = 1e-7 * z.max(1e-3);
        (f(z + h) - f(z - h)) / (2.0 * h)
    };
    let break_even = c / (p * q);
    let lo = if break_even > 0.0 {
        break_even * (1.0 + 1e-12)
    } else {
        0.0
    };
    if !(f(lo) > 0.0) || !(f(1.0) < 0.0) {
        return Err(Error::solver(
            "golden rule",
            "no interior golden-rule stock",
        ));
    }
    let root = bisect_then_polish(f, df, lo, 1.0, 1e-15, 3)?;
    Ok(ClarkSolution {
        z_star: root.x,
        e_star: r * (1.0 - root.x) / q,
        residual: root.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    /// Optimal stationary effort of the open-access patches problem.
    pub e_bar: f64,
    /// Aggregate growth rate giving the Clark model the same effort.
    pub r: f64,
    pub z_star: f64,
    pub clark_effort: f64,
    pub golden_rule_residual: f64,
    pub iterations: usize,
    pub foc: StationaryFoc,
}

/// Finds the aggregate rate `r` in `(delta, 4]` whose Clark optimal effort
/// equals the open-access patches optimum.
pub fn calibrate_r(
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
) -> Result<CalibrationResult> {
    let foc = patches_open_stationary(bio, econ, spec)?;
    calibrate_to_effort(foc, econ)
}

fn calibrate_to_effort(foc: StationaryFoc, econ: &EconParams) -> Result<CalibrationResult> {
    let e_bar = foc.effort;
    let lo = econ.delta * (1.0 + 1e-9);
    let hi = CALIBRATION_R_MAX;
    let effort = |r: f64| clark_golden_rule(r, econ).map(|s| s.e_star);

    let mut prev = effort(lo)?;
    for k in 1..=CALIBRATION_GRID {
        let r = lo + (hi - lo) * k as f64 / CALIBRATION_GRID as f64;
        let e = effort(r)?;
        if !(e > prev) {
            return Err(Error::solver(
                "calibration",
                format!("Clark effort not increasing in r near r = {r}"),
            ));
        }
        prev = e;
    }
    let (e_lo, e_hi) = (effort(lo)?, effort(hi)?);
    if !(e_lo <= e_bar && e_bar <= e_hi) {
        return Err(Error::solver(
            "calibration",
            format!("calibration infeasible in range: target {e_bar} outside [{e_lo}, {e_hi}]"),
        ));
    }
    let g = |r: f64| effort(r).map(|e| e - e_bar).unwrap_or(f64::NAN);
    let root = bisect_then_polish(g, |_| f64::NAN, lo, hi, 1e-15, 0)?;
    let clark = clark_golden_rule(root.x, econ)?;
    Ok(CalibrationResult {
        e_bar,
        r: root.x,
        z_star: clark.z_star,
        clark_effort: clark.e_star,
        golden_rule_residual: clark.residual,
        iterations: root.iterations,
        foc,
    })
}

/// Recomputes the calibrated rate for a given target effort; used when the
/// open-access effort comes from elsewhere.
pub fn calibrate_r_for_effort(e_bar: f64, econ: &EconParams) -> Result<CalibrationResult> {
    let foc = StationaryFoc {
        x1: f64::NAN,
        x2: f64::NAN,
        p1: f64::NAN,
        p2: f64::NAN,
        effort: e_bar,
        residual_norm: f64::NAN,
        j: f64::NAN,
        on_boundary: false,
        converged_starts: 0,
    };
    calibrate_to_effort(foc, econ)
}

impl StationaryFoc {
    /// Residual max-norm recomputed from scratch at this point.
    pub fn recheck(&self, bio: &BioParams, econ: &EconParams, spec: DiffusionSpec) -> Result<f64> {
        let m = OpenPatches::new(bio, econ, spec)?;
        Ok(m.residuals(&self.unknowns()).amax())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bio() -> BioParams {
        BioParams {
            r1: 0.4,
            r2: 0.05,
            r: Some(0.28739),
            alpha: 0.5,
        }
    }

    fn econ(p: f64) -> EconParams {
        EconParams {
            p,
            q: 2.0,
            c: 0.15,
            delta: 0.05,
            e_max: 1.0,
        }
    }

    const LAMBDA20: DiffusionSpec = DiffusionSpec::Constant { lambda: 20.0 };

    #[test]
    fn reference_open_access_point() {
        let s = patches_open_stationary(&bio(), &econ(0.3), LAMBDA20).unwrap();
        assert!(s.residual_norm <= 1e-8);
        assert!(!s.on_boundary);
        assert!(s.x1 > 0.0 && s.x2 > 0.0);
        // independent Newton solve (scipy fsolve) gave E = 0.0491537714848906
        assert_abs_diff_eq!(s.effort, 0.049_153_771_484_890_6, epsilon = 1e-9);
        assert!(s.recheck(&bio(), &econ(0.3), LAMBDA20).unwrap() <= 1e-8);
    }

    #[test]
    fn symmetric_patches_mix_evenly() {
        let b = BioParams {
            r1: 0.3,
            r2: 0.3,
            r: None,
            alpha: 0.5,
        };
        let s = patches_open_stationary(&b, &econ(0.3), DiffusionSpec::Constant { lambda: 1e3 })
            .unwrap();
        assert_abs_diff_eq!(s.x1, s.x2, epsilon = 1e-6);
        assert_abs_diff_eq!(s.p1, s.p2, epsilon = 1e-6);
    }

    #[test]
    fn hamiltonian_is_affine_in_effort() {
        let st = State::new(0.2, 0.3);
        let h = |e: f64| hamiltonian_open(st, (0.1, 0.2), e, &bio(), &econ(0.3), LAMBDA20).unwrap();
        let second = h(0.2) - 2.0 * h(0.3) + h(0.4);
        assert!(second.abs() <= 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let st = State::new(0.2, 0.3);
        let cs = (0.1, 0.2);
        let e = 0.3;
        let grad = hamiltonian_gradient(st, cs, e, &bio(), &econ(0.3), LAMBDA20).unwrap();
        let h = 1e-6;
        let hx =
            |s: State, e: f64| hamiltonian_open(s, cs, e, &bio(), &econ(0.3), LAMBDA20).unwrap();
        let d1 = (hx(State::new(0.2 + h, 0.3), e) - hx(State::new(0.2 - h, 0.3), e)) / (2.0 * h);
        let d2 = (hx(State::new(0.2, 0.3 + h), e) - hx(State::new(0.2, 0.3 - h), e)) / (2.0 * h);
        let de = (hx(st, e + h) - hx(st, e - h)) / (2.0 * h);
        assert_abs_diff_eq!(d1, grad[0], epsilon = 1e-7 * grad[0].abs().max(1.0));
        assert_abs_diff_eq!(d2, grad[1], epsilon = 1e-7 * grad[1].abs().max(1.0));
        assert_abs_diff_eq!(de, grad[2], epsilon = 1e-8);
    }

    #[test]
    fn clark_msy_limit() {
        let e = EconParams {
            p: 1.0,
            q: 2.0,
            c: 0.0,
            delta: 0.0,
            e_max: 1.0,
        };
        let s = clark_golden_rule(0.3, &e).unwrap();
        assert_abs_diff_eq!(s.z_star, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.e_star, 0.3 / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn clark_errors() {
        assert!(clark_golden_rule(0.3, &econ(0.05)).is_err());
        assert!(clark_golden_rule(0.0, &econ(0.3)).is_err());
        let e = EconParams {
            c: 0.0,
            ..econ(0.3)
        };
        // r <= delta with no cost: golden-rule stock would be non-positive
        assert!(clark_golden_rule(0.04, &e).is_err());
    }

    #[test]
    fn clark_reference_parameters() {
        let s = clark_golden_rule(0.28739, &econ(0.3)).unwrap();
        assert!(s.residual.abs() <= 1e-10);
        assert!(s.z_star > 0.25 && s.z_star < 1.0);
        assert_abs_diff_eq!(s.e_star, 0.28739 * (1.0 - s.z_star) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn calibration_round_trip() {
        let cal = calibrate_r(&bio(), &econ(0.3), LAMBDA20).unwrap();
        let again = clark_golden_rule(cal.r, &econ(0.3)).unwrap();
        assert!((again.e_star - cal.e_bar).abs() <= 1e-8);
        assert!(cal.golden_rule_residual.abs() <= 1e-10);
    }

    #[test]
    fn calibration_out_of_range() {
        assert!(calibrate_r_for_effort(10.0, &econ(0.3)).is_err());
    }
}
