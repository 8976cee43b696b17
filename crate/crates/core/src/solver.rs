//! Explicit classical RK4 on conservative variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::governing::{ConservedFields, Model, StateDerivative};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub fixed_dt: Option<f64>,
    /// Store a snapshot every this many steps; 0 keeps only the first and last.
    pub snapshot_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            cfl_advective: 0.5,
            cfl_diffusive: 0.25,
            t_end: 1.0,
            max_steps: 1_000_000,
            fixed_dt: None,
            snapshot_every: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let safety = |name, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie in (0, 1], got {v}"),
                })
            }
        };
        safety("cfl_advective", self.cfl_advective)?;
        safety("cfl_diffusive", self.cfl_diffusive)?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be positive, got {}", self.t_end),
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "fixed_dt",
                    reason: format!("must be positive, got {dt}"),
                });
            }
        }
        Ok(())
    }
}

/// Largest diffusivity entering the explicit limit, per cell maximum.
pub fn max_diffusivity(state: &FlowState, coeffs: &TransportCoefficients, gas: &GasModel) -> Result<f64> {
    let d = state.derived_quantities(gas)?;
    let mut nu = coeffs.kappa_m.max(coeffs.kappa_klim);
    for i in 0..state.len() {
        let rho = d.rho_bar[i];
        let t = d.temperature[i];
        nu = nu
            .max(4.0 / 3.0 * coeffs.viscosity(t) / rho)
            .max(coeffs.kappa_h / (rho * gas.cv));
    }
    Ok(nu)
}

/// Advective and diffusive step limits; the smaller one (and `fixed_dt`) wins.
pub fn stable_dt(
    state: &FlowState,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
    config: &IntegratorConfig,
) -> Result<f64> {
    let d = state.derived_quantities(gas)?;
    let speed = (0..state.len())
        .map(|i| state.u_m[i].abs() + gas.sound_speed(d.temperature[i]))
        .fold(0.0, f64::max);
    let dx = grid.dx;
    let advective = config.cfl_advective * dx / speed;
    let nu = max_diffusivity(state, coeffs, gas)?;
    let diffusive = if nu > 0.0 {
        config.cfl_diffusive * dx * dx / (2.0 * nu)
    } else {
        f64::INFINITY
    };
    let mut dt = advective.min(diffusive);
    if let Some(fixed) = config.fixed_dt {
        dt = dt.min(fixed);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok(dt)
}

/// One classical four-stage update of `q' = f(t, q)`.
pub fn rk4_update<F>(q: &ConservedFields, t: f64, dt: f64, f: F) -> Result<ConservedFields>
where
    F: Fn(f64, &ConservedFields) -> Result<StateDerivative>,
{
    let k1 = f(t, q)?;
    let k2 = f(t + 0.5 * dt, &q.add_scaled(0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &q.add_scaled(0.5 * dt, &k2))?;
    let k4 = f(t + dt, &q.add_scaled(dt, &k3))?;
    let mut out = q.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Time-dependent forcing added to the model right-hand side.
pub type Source<'a> = &'a (dyn Fn(f64) -> StateDerivative + Sync);

fn forced_rhs(model: &Model, source: Option<Source>, t: f64, q: &ConservedFields) -> Result<StateDerivative> {
    let state = model.to_state(q)?;
    let mut d = model.rhs(&state)?;
    if let Some(s) = source {
        d.axpy(1.0, &s(t));
    }
    Ok(d)
}

/// Advances `state` by `dt`; the result is validated.
pub fn step_rk4(model: &Model, state: &FlowState, t: f64, dt: f64, source: Option<Source>) -> Result<FlowState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let q = model.to_conserved(state)?;
    let next = rk4_update(&q, t, dt, |t, q| forced_rhs(model, source, t, q))?;
    if !next.is_finite() {
        return Err(Error::InvalidState {
            cell: first_non_finite(&next),
            field: crate::state::Field::EIn,
            value: f64::NAN,
        });
    }
    model.to_state(&next)
}

fn first_non_finite(q: &ConservedFields) -> usize {
    (0..q.len())
        .find(|&i| q.components().any(|c| !c[i].is_finite()))
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub state: FlowState,
}

/// Domain integrals of the conservative variables after a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: Model,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub final_state: FlowState,
    pub final_time: f64,
    pub steps: usize,
}

impl Trajectory {
    /// Largest relative change of each conserved integral over the run.
    ///
    /// Momentum is normalized by `sum rho (|U| + c_s) dx` so that a state at
    /// rest still has a meaningful scale.
    pub fn conservation_drift(&self) -> Result<[f64; 3]> {
        let first = self.snapshots.first().ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
        let gas = &self.model.gas;
        let grid = &self.model.grid;
        let q0 = self.model.to_conserved(&first.state)?;
        let t0 = q0.totals(grid);
        let d = first.state.derived_quantities(gas)?;
        let momentum_scale = grid.integrate(
            &(0..first.state.len())
                .map(|i| q0.mass[i] * (first.state.u_m[i].abs() + gas.sound_speed(d.temperature[i])))
                .collect::<Vec<_>>(),
        );
        let scales = [t0[0].abs(), momentum_scale, t0[2].abs()];
        let mut drift = [0.0f64; 3];
        for diag in &self.diagnostics {
            let now = [diag.mass, diag.momentum, diag.energy];
            for k in 0..3 {
                drift[k] = drift[k].max((now[k] - t0[k]).abs() / scales[k]);
            }
        }
        Ok(drift)
    }
}

pub fn run(model: &Model, initial: &FlowState, config: &IntegratorConfig) -> Result<Trajectory> {
    run_forced(model, initial, config, None)
}

/// Integrates to `config.t_end` (the last step is shortened to land on it
/// exactly) or until `max_steps`.
pub fn run_forced(
    model: &Model,
    initial: &FlowState,
    config: &IntegratorConfig,
    source: Option<Source>,
) -> Result<Trajectory> {
    config.validate()?;
    initial.validate().into_result()?;
    let grid = &model.grid;
    let coeffs = model.variant.effective_coefficients(&model.coeffs);

    let mut state = initial.clone();
    let mut t = 0.0;
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        state: state.clone(),
    }];
    let mut diagnostics = Vec::new();
    let mut step = 0;
    let remaining_tol = 1e-12 * config.t_end;

    while step < config.max_steps && config.t_end - t > remaining_tol {
        let dt_stable = stable_dt(&state, &coeffs, &model.gas, grid, config)
            .map_err(|e| diverged(step, t, e))?;
        let dt = dt_stable.min(config.t_end - t);
        state = step_rk4(model, &state, t, dt, source).map_err(|e| diverged(step + 1, t + dt, e))?;
        step += 1;
        t = if config.t_end - (t + dt) <= remaining_tol { config.t_end } else { t + dt };

        let totals = model.to_conserved(&state)?.totals(grid);
        diagnostics.push(StepDiagnostics {
            step,
            time: t,
            dt,
            mass: totals[0],
            momentum: totals[1],
            energy: totals[2],
        });
        if config.snapshot_every > 0 && step % config.snapshot_every == 0 {
            snapshots.push(Snapshot {
                step,
                time: t,
                state: state.clone(),
            });
        }
    }
    if snapshots.last().map(|s| s.step) != Some(step) {
        snapshots.push(Snapshot {
            step,
            time: t,
            state: state.clone(),
        });
    }
    Ok(Trajectory {
        model: *model,
        snapshots,
        diagnostics,
        final_state: state,
        final_time: t,
        steps: step,
    })
}

fn diverged(step: usize, time: f64, source: Error) -> Error {
    match source {
        e @ Error::Diverged { .. } => e,
        e => Error::Diverged {
            step,
            time,
            source: Box::new(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::governing::ModelVariant;
    use crate::state::Boundary;

    fn gas() -> GasModel {
        GasModel::monatomic(1.0, 1.0).unwrap()
    }

    #[test]
    fn acoustic_limit() {
        let g = gas();
        let grid = Grid1D::periodic(32, 1.0).unwrap();
        let s = FlowState::uniform(32, &g, 1.0, 0.0, 1.0);
        let cfg = IntegratorConfig::default();
        let dt = stable_dt(&s, &TransportCoefficients::zero(), &g, &grid, &cfg).unwrap();
        let cs = (5.0f64 / 3.0).sqrt();
        assert!((dt - 0.5 * grid.dx / cs).abs() < 1e-15);
    }

    #[test]
    fn diffusive_branch_switches_at_crossover() {
        let g = gas();
        let cfg = IntegratorConfig::default();
        let kappa_m = 2.0;
        let c = TransportCoefficients::zero().with_kappa_m(kappa_m);
        let cs = (5.0f64 / 3.0).sqrt();
        // cfl_a dx / cs = cfl_d dx^2 / (2 kappa_m)
        let crossover = cfg.cfl_advective / cs * 2.0 * kappa_m / cfg.cfl_diffusive;
        for (factor, diffusive) in [(0.5, true), (2.0, false)] {
            let len = crossover * factor * 16.0;
            let grid = Grid1D::periodic(16, len).unwrap();
            let s = FlowState::uniform(16, &g, 1.0, 0.0, 1.0);
            let dt = stable_dt(&s, &c, &g, &grid, &cfg).unwrap();
            let diff_dt = cfg.cfl_diffusive * grid.dx * grid.dx / (2.0 * kappa_m);
            assert_eq!((dt - diff_dt).abs() < 1e-15, diffusive);
        }
        let s = FlowState::uniform(16, &g, 1.0, 0.0, 1.0);
        let a = stable_dt(&s, &c, &g, &Grid1D::periodic(16, 1e-3).unwrap(), &cfg).unwrap();
        let b = stable_dt(&s, &c, &g, &Grid1D::periodic(16, 0.5e-3).unwrap(), &cfg).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        let lambda = -1.3;
        let err = |dt: f64| {
            let q = ConservedFields {
                mass: vec![1.0],
                momentum: vec![0.0],
                energy: vec![0.0],
                volume: None,
            };
            let out = rk4_update(&q, 0.0, dt, |_, q| {
                let mut d = q.clone();
                d.mass[0] *= lambda;
                Ok(d)
            })
            .unwrap();
            (out.mass[0] - (lambda * dt).exp()).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!((order - 5.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn uniform_state_is_steady() {
        let g = gas();
        let grid = Grid1D::periodic(32, 1.0).unwrap();
        let s = FlowState::uniform(32, &g, 1.2, 0.3, 1.1);
        let c = TransportCoefficients::new(0.01, 0.02, 0.01, 0.01).unwrap();
        for v in ModelVariant::ALL {
            let model = Model::new(v, g, c, grid);
            let cfg = IntegratorConfig {
                t_end: 1e9,
                max_steps: 100,
                ..Default::default()
            };
            let tr = run(&model, &s, &cfg).unwrap();
            assert_eq!(tr.steps, 100);
            for i in 0..32 {
                assert!((tr.final_state.u_m[i] - 0.3).abs() < 1e-13);
                assert!((tr.final_state.a_n[i] - 1.2).abs() < 1e-13);
                assert!((tr.final_state.e_in[i] - 1.5 * 1.1).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn lands_on_t_end_exactly() {
        let g = gas();
        let grid = Grid1D::new(16, 1.0, Boundary::Reflective).unwrap();
        let s = FlowState::uniform(16, &g, 1.0, 0.0, 1.0);
        let model = Model::new(ModelVariant::NsfBaseline, g, TransportCoefficients::zero(), grid);
        let cfg = IntegratorConfig {
            t_end: 0.123,
            snapshot_every: 2,
            ..Default::default()
        };
        let tr = run(&model, &s, &cfg).unwrap();
        assert_eq!(tr.final_time, 0.123);
        assert_eq!(tr.snapshots.last().unwrap().step, tr.steps);
        assert_eq!(tr.diagnostics.len(), tr.steps);
    }

    #[test]
    fn blow_up_is_a_typed_error() {
        let g = gas();
        let grid = Grid1D::periodic(16, 1.0).unwrap();
        let s = FlowState::uniform(16, &g, 1.0, 0.0, 1.0);
        let model = Model::new(ModelVariant::NsfBaseline, g, TransportCoefficients::zero(), grid);
        // an energy sink that drains the internal energy within a few steps
        let sink = |_t: f64| {
            let mut d = ConservedFields::zeros(16, false);
            d.energy.iter_mut().for_each(|e| *e = -100.0);
            d
        };
        let cfg = IntegratorConfig {
            t_end: 10.0,
            ..Default::default()
        };
        match run_forced(&model, &s, &cfg, Some(&sink)) {
            Err(Error::Diverged { step, source, .. }) => {
                assert!(step >= 1);
                assert!(matches!(*source, Error::InvalidState { .. }));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        let bad = IntegratorConfig {
            cfl_advective: 1.5,
            ..Default::default()
        };
        assert!(run(&model, &s, &bad).is_err());
    }
}
