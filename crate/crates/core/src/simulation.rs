//! Fixed-step RK4 integration of the model variants under piecewise-constant
//! effort, and discounted-revenue quadrature along the result.

use serde::Serialize;

use crate::dynamics::{field, rent, BioParams, DiffusionSpec, EconParams, ModelVariant, State};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 400.0;
/// Undershoot below zero that is silently clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-9;
/// Any stock above this is treated as a blow-up.
pub const DIVERGENCE_BOUND: f64 = 10.0;

/// Piecewise-constant effort: `(t_start, effort)` pairs sorted by time, the
/// first starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSchedule {
    segments: Vec<(f64, f64)>,
}

impl ControlSchedule {
    pub fn constant(effort: f64) -> Self {
        ControlSchedule {
            segments: vec![(0.0, effort)],
        }
    }

    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        match segments.first() {
            None => {
                return Err(Error::Invariant(
                    "schedule needs at least one segment".into(),
                ))
            }
            Some(&(t0, _)) if t0 != 0.0 => {
                return Err(Error::Invariant(
                    "first schedule segment starts at t = 0".into(),
                ))
            }
            _ => {}
        }
        if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Invariant("schedule segments time-sorted".into()));
        }
        Ok(ControlSchedule { segments })
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    fn validate(&self, econ: &EconParams) -> Result<()> {
        self.segments
            .iter()
            .try_for_each(|&(_, e)| econ.check_effort(e))
    }

    /// Effort on each of `steps + 1` grid points, segment starts snapped to
    /// the nearest grid point.
    fn on_grid(&self, steps: usize, step: f64) -> Vec<f64> {
        let starts: Vec<(usize, f64)> = self
            .segments
            .iter()
            .map(|&(t, e)| ((t / step).round() as usize, e))
            .collect();
        let mut out = Vec::with_capacity(steps + 1);
        let mut seg = 0;
        for k in 0..=steps {
            while seg + 1 < starts.len() && starts[seg + 1].0 <= k {
                seg += 1;
            }
            out.push(starts[seg].1);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub variant: ModelVariant,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Effort applied from each sample to the next.
    pub efforts: Vec<f64>,
    /// Undiscounted rent at each sample.
    pub rents: Vec<f64>,
    pub clamped: Vec<bool>,
}

impl Trajectory {
    /// Builds a trajectory from raw samples, computing the rent of `variant`.
    pub fn from_samples(
        variant: ModelVariant,
        times: Vec<f64>,
        states: Vec<State>,
        efforts: Vec<f64>,
        alpha: f64,
        econ: &EconParams,
    ) -> Result<Self> {
        let n = times.len();
        if states.len() != n || efforts.len() != n {
            return Err(Error::Invariant(
                "trajectory columns have equal lengths".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invariant(
                "trajectory times strictly increasing".into(),
            ));
        }
        let rents = states
            .iter()
            .zip(&efforts)
            .map(|(s, &e)| rent(variant, *s, e, alpha, econ))
            .collect();
        Ok(Trajectory {
            variant,
            times,
            states,
            efforts,
            rents,
            clamped: vec![false; n],
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> State {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Largest sup-norm distance of any sample from `point`.
    pub fn max_deviation_from(&self, point: State) -> f64 {
        self.states
            .iter()
            .map(|s| (s.x1 - point.x1).abs().max((s.x2 - point.x2).abs()))
            .fold(0.0, f64::max)
    }
}

fn clamp_stage(s: State) -> State {
    let fix = |v: f64| {
        if (-CLAMP_TOLERANCE..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    };
    State::new(fix(s.x1), fix(s.x2))
}

struct Stepper<'a> {
    variant: ModelVariant,
    lambda_eff: f64,
    bio: &'a BioParams,
    econ: &'a EconParams,
}

impl Stepper<'_> {
    fn eval(&self, s: State, effort: f64, t: f64) -> Result<(f64, f64)> {
        field(
            self.variant,
            clamp_stage(s),
            effort,
            self.lambda_eff,
            self.bio,
            self.econ,
        )
        .map_err(|e| Error::Divergence {
            time: t,
            message: format!("stage evaluation failed ({e}); step too large?"),
        })
    }

    fn rk4(&self, s: State, effort: f64, t: f64, h: f64) -> Result<State> {
        let at = |s: State, k: (f64, f64), c: f64| State::new(s.x1 + c * k.0, s.x2 + c * k.1);
        let k1 = self.eval(s, effort, t)?;
        let k2 = self.eval(at(s, k1, 0.5 * h), effort, t)?;
        let k3 = self.eval(at(s, k2, 0.5 * h), effort, t)?;
        let k4 = self.eval(at(s, k3, h), effort, t)?;
        Ok(State::new(
            s.x1 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            s.x2 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        ))
    }
}

/// Integrates `variant` from `initial` over `[0, horizon]` with classical
/// fixed-step RK4. The grid has `round(horizon / step)` steps.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    variant: ModelVariant,
    initial: State,
    schedule: &ControlSchedule,
    bio: &BioParams,
    econ: &EconParams,
    spec: DiffusionSpec,
    horizon: f64,
    step: f64,
) -> Result<Trajectory> {
    if !(step > 0.0) {
        return Err(Error::Invariant("step > 0".into()));
    }
    if !(horizon >= step) {
        return Err(Error::Invariant("horizon >= step".into()));
    }
    if !(initial.x1 >= 0.0 && initial.x2 >= 0.0) {
        return Err(Error::Invariant("initial stocks non-negative".into()));
    }
    bio.validate()?;
    econ.validate()?;
    spec.validate()?;
    schedule.validate(econ)?;

    let steps = (horizon / step).round() as usize;
    let efforts = schedule.on_grid(steps, step);
    let stepper = Stepper {
        variant,
        lambda_eff: spec.effective(bio.alpha),
        bio,
        econ,
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut clamped = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(initial);
    clamped.push(false);

    let mut s = initial;
    for (k, &effort) in efforts.iter().enumerate().take(steps) {
        let t = k as f64 * step;
        let mut next = stepper.rk4(s, effort, t, step)?;
        let t_next = (k + 1) as f64 * step;
        let mut was_clamped = false;
        for v in [&mut next.x1, &mut next.x2] {
            if !v.is_finite() || v.abs() > DIVERGENCE_BOUND {
                return Err(Error::Divergence {
                    time: t_next,
                    message: format!("stock {v} beyond {DIVERGENCE_BOUND}"),
                });
            }
            if *v < 0.0 {
                if *v < -CLAMP_TOLERANCE {
                    return Err(Error::Divergence {
                        time: t_next,
                        message: format!("stock undershoot {v} (stiff step)"),
                    });
                }
                *v = 0.0;
                was_clamped = true;
            }
        }
        times.push(t_next);
        states.push(next);
        clamped.push(was_clamped);
        s = next;
    }

    let rents = states
        .iter()
        .zip(&efforts)
        .map(|(s, &e)| rent(variant, *s, e, bio.alpha, econ))
        .collect();
    Ok(Trajectory {
        variant,
        times,
        states,
        efforts,
        rents,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscountedRevenue {
    pub value: f64,
    /// `|rent(T)| e^{-delta T} / delta`, the rent's contribution beyond `T` if
    /// it stayed at its final level.
    pub tail_bound: f64,
}

/// Finite-horizon discounted revenue `int_0^T e^{-delta t} rent(t) dt`.
///
/// Rent is interpolated linearly between samples (trapezoid rule) and the
/// discount factor is integrated exactly on each interval, so a constant
/// rent is integrated without discretization error.
pub fn discounted_revenue(
    traj: &Trajectory,
    econ: &EconParams,
    alpha: f64,
) -> Result<DiscountedRevenue> {
    if traj.is_empty() {
        return Err(Error::Invariant("trajectory nonempty".into()));
    }
    let d = econ.delta;
    let rents: Vec<f64> = traj
        .states
        .iter()
        .zip(&traj.efforts)
        .map(|(s, &e)| rent(traj.variant, *s, e, alpha, econ))
        .collect();
    let mut value = 0.0;
    for i in 0..traj.len() - 1 {
        let (a, h) = (traj.times[i], traj.times[i + 1] - traj.times[i]);
        let x = d * h;
        let i0 = -(-x).exp_m1() / d;
        let i1 = (-(-x).exp_m1() - x * (-x).exp()) / (d * d);
        let slope = (rents[i + 1] - rents[i]) / h;
        value += (-d * a).exp() * (rents[i] * i0 + slope * i1);
    }
    let t_end = *traj.times.last().unwrap();
    let tail_bound = rents.last().unwrap().abs() * (-d * t_end).exp() / d;
    Ok(DiscountedRevenue { value, tail_bound })
}

/// Maximum deviation from `point` when integrating from it with constant
/// effort over `horizon` at the default step.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_drift(
    variant: ModelVariant,
    point: State,
    effort: f64,
    spec: DiffusionSpec,
    bio: &BioParams,
    econ: &EconParams,
    horizon: f64,
) -> Result<f64> {
    let traj = integrate(
        variant,
        point,
        &ControlSchedule::constant(effort),
        bio,
        econ,
        spec,
        horizon,
        DEFAULT_STEP,
    )?;
    Ok(traj.max_deviation_from(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::global_reserve_rhs;
    use crate::equilibrium::{global_equilibrium, patches_equilibrium};
    use crate::growth::aggregate_growth;
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

    const NO_DIFFUSION: DiffusionSpec = DiffusionSpec::Constant { lambda: 0.0 };

    #[test]
    fn schedule_validation_and_snapping() {
        assert!(ControlSchedule::new(vec![]).is_err());
        assert!(ControlSchedule::new(vec![(1.0, 0.1)]).is_err());
        assert!(ControlSchedule::new(vec![(0.0, 0.1), (0.0, 0.2)]).is_err());
        let s = ControlSchedule::new(vec![(0.0, 0.1), (0.026, 0.2)]).unwrap();
        assert_eq!(s.on_grid(5, 0.01), vec![0.1, 0.1, 0.1, 0.2, 0.2, 0.2]);
    }

    #[test]
    fn integrate_rejects_bad_inputs() {
        let s = ControlSchedule::constant(0.0);
        let i = State::new(0.1, 0.1);
        let run = |h: f64, t: f64, e: &ControlSchedule| {
            integrate(
                ModelVariant::PatchesReserve,
                i,
                e,
                &bio(),
                &econ(0.3),
                NO_DIFFUSION,
                t,
                h,
            )
        };
        assert!(run(0.0, 1.0, &s).is_err());
        assert!(run(0.1, 0.05, &s).is_err());
        assert!(matches!(
            run(0.01, 1.0, &ControlSchedule::constant(2.0)),
            Err(Error::EffortOutOfBounds { .. })
        ));
    }

    #[test]
    fn global_equilibrium_does_not_drift() {
        let r = global_equilibrium(&bio(), &econ(0.3)).unwrap();
        let drift = stationarity_drift(
            ModelVariant::GlobalReserve,
            r.state(),
            0.0,
            NO_DIFFUSION,
            &bio(),
            &econ(0.3),
            100.0,
        )
        .unwrap();
        assert!(drift <= 1e-6, "{drift}");
    }

    #[test]
    fn perturbed_point_drifts() {
        let e = econ(1.5);
        let r = patches_equilibrium(&bio(), &e).unwrap();
        let spec = DiffusionSpec::Constant {
            lambda: r.lambda_star.unwrap(),
        };
        let start = State::new(r.x1_star, r.x2_star + 1e-3);
        let drift = stationarity_drift(
            ModelVariant::PatchesReserve,
            start,
            r.e_star,
            spec,
            &bio(),
            &e,
            100.0,
        )
        .unwrap();
        assert!(drift > 1e-4);

        // the split model rejects total stock above capacity, so perturb downwards
        let drift = stationarity_drift(
            ModelVariant::GlobalReserve,
            State::new(0.875, 0.124),
            0.0,
            NO_DIFFUSION,
            &bio(),
            &econ(0.3),
            100.0,
        )
        .unwrap();
        assert!(drift > 1e-4);
    }

    #[test]
    fn patches_equilibrium_does_not_drift() {
        let e = econ(1.5);
        let r = patches_equilibrium(&bio(), &e).unwrap();
        let spec = DiffusionSpec::Constant {
            lambda: r.lambda_star.unwrap(),
        };
        let drift = stationarity_drift(
            ModelVariant::PatchesReserve,
            r.state(),
            r.e_star,
            spec,
            &bio(),
            &e,
            100.0,
        )
        .unwrap();
        assert!(drift <= 1e-6, "{drift}");
    }

    #[test]
    fn unfished_patches_saturate() {
        // r2 = 0.05 would still be 1e-3 short of capacity at t = 200
        let b = BioParams { r2: 0.1, ..bio() };
        let t = integrate(
            ModelVariant::PatchesReserve,
            State::new(0.01, 0.01),
            &ControlSchedule::constant(0.0),
            &b,
            &econ(0.3),
            NO_DIFFUSION,
            200.0,
            0.01,
        )
        .unwrap();
        // closed-form logistic x(t) = K / (1 + (K/x0 - 1) e^{-rt}) per patch
        let logistic =
            |k: f64, r: f64, x0: f64, t: f64| k / (1.0 + (k / x0 - 1.0) * (-r * t).exp());
        let end = t.last_state();
        assert_abs_diff_eq!(end.x1, logistic(0.5, 0.4, 0.01, 200.0), epsilon = 1e-9);
        assert_abs_diff_eq!(end.x2, logistic(0.5, 0.1, 0.01, 200.0), epsilon = 1e-9);
        assert_abs_diff_eq!(end.x1, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(end.x2, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn rk4_order() {
        let run = |h: f64| {
            integrate(
                ModelVariant::PatchesOpen,
                State::new(0.05, 0.3),
                &ControlSchedule::constant(0.1),
                &bio(),
                &econ(0.3),
                DiffusionSpec::Constant { lambda: 1.0 },
                10.0,
                h,
            )
            .unwrap()
            .last_state()
        };
        let reference = run(0.025);
        let err = |s: State| (s.x1 - reference.x1).abs().max((s.x2 - reference.x2).abs());
        let coarse = err(run(0.2));
        let fine = err(run(0.1));
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn global_trajectory_aggregates() {
        let t = integrate(
            ModelVariant::GlobalReserve,
            State::new(0.1, 0.05),
            &ControlSchedule::constant(0.0),
            &bio(),
            &econ(0.3),
            DiffusionSpec::Constant { lambda: 5.0 },
            30.0,
            0.01,
        )
        .unwrap();
        for s in &t.states {
            assert!(s.x1 >= -1e-9 && s.x2 >= -1e-9);
            let (a, b) = global_reserve_rhs(
                *s,
                0.0,
                DiffusionSpec::Constant { lambda: 5.0 },
                &bio(),
                &econ(0.3),
            )
            .unwrap();
            let phi = aggregate_growth(s.total(), 0.28739).unwrap();
            assert!((a + b - phi).abs() <= 1e-12);
        }
    }

    #[test]
    fn heavy_fishing_goes_extinct_without_negative_stocks() {
        let mut e = econ(0.3);
        e.e_max = 5.0;
        let t = integrate(
            ModelVariant::PatchesOpen,
            State::new(0.01, 0.01),
            &ControlSchedule::constant(5.0),
            &bio(),
            &e,
            NO_DIFFUSION,
            50.0,
            0.01,
        )
        .unwrap();
        assert!(t.states.iter().all(|s| s.x1 >= 0.0 && s.x2 >= 0.0));
        assert!(t.last_state().total() < 1e-6);
    }

    #[test]
    fn diverging_run_is_an_error() {
        let mut e = econ(0.3);
        e.e_max = 1.0;
        let r = integrate(
            ModelVariant::PatchesReserve,
            State::new(0.1, 0.2),
            &ControlSchedule::constant(0.0),
            &bio(),
            &e,
            DiffusionSpec::Constant { lambda: 1e6 },
            1.0,
            0.1,
        );
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    #[test]
    fn revenue_zero_without_effort() {
        let t = integrate(
            ModelVariant::PatchesReserve,
            State::new(0.1, 0.1),
            &ControlSchedule::constant(0.0),
            &bio(),
            &econ(0.3),
            NO_DIFFUSION,
            10.0,
            0.01,
        )
        .unwrap();
        assert_eq!(discounted_revenue(&t, &econ(0.3), 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn revenue_of_constant_state() {
        let e = econ(0.3);
        let (x2, effort, horizon) = (0.3, 0.4, 50.0);
        let n = 5001;
        let times: Vec<f64> = (0..n)
            .map(|i| i as f64 * horizon / (n - 1) as f64)
            .collect();
        let states = vec![State::new(0.2, x2); n];
        let t = Trajectory::from_samples(
            ModelVariant::PatchesReserve,
            times,
            states,
            vec![effort; n],
            0.5,
            &e,
        )
        .unwrap();
        let got = discounted_revenue(&t, &e, 0.5).unwrap();
        let closed = (0.6 * x2 / 0.5 - 0.15) * effort * (1.0 - (-0.05 * horizon).exp()) / 0.05;
        assert!(((got.value - closed) / closed).abs() <= 1e-8);
        let rent = (0.6 * x2 / 0.5 - 0.15) * effort;
        assert_abs_diff_eq!(
            got.tail_bound,
            rent * (-2.5f64).exp() / 0.05,
            epsilon = 1e-14
        );
    }

    #[test]
    fn revenue_of_stationary_patches_run() {
        let e = econ(1.5);
        let r = patches_equilibrium(&bio(), &e).unwrap();
        let t = integrate(
            ModelVariant::PatchesReserve,
            r.state(),
            &ControlSchedule::constant(r.e_star),
            &bio(),
            &e,
            DiffusionSpec::Constant {
                lambda: r.lambda_star.unwrap(),
            },
            400.0,
            0.01,
        )
        .unwrap();
        let got = discounted_revenue(&t, &e, 0.5).unwrap();
        assert!(((got.value - r.j_star) / r.j_star).abs() < 5e-3);
        // tail relative to J* is e^{-delta T} = e^{-20}
        assert!(got.tail_bound < 2.1e-9 * r.j_star);
    }
}
