//! Mechanical consistency checks: Galilean invariance, conservative form of
//! momentum, the angular-momentum tensor identity and the center-of-mass
//! balance.

use nalgebra::Matrix2;

use super::ConvergenceReport;
use crate::constitutive::compute_fluxes;
use crate::error::{Error, Result};
use crate::governing::{Model, ModelVariant};
use crate::solver::{run, IntegratorConfig};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};
use crate::stencil::{grad, Parity};

/// Builds an initial state on a grid.
pub type InitialCondition<'a> = &'a (dyn Fn(&Grid1D) -> Result<FlowState> + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct GalileanReport {
    pub shift: f64,
    pub t_end: f64,
    pub convergence: ConvergenceReport,
    /// Final `(rest frame, shifted frame)` states per resolution.
    pub final_states: Vec<(FlowState, FlowState)>,
}

/// Runs `initial` and `initial + shift` to `t = L / |shift|`, where the
/// periodic frame shift is exactly one domain length, and compares the
/// frame-mapped fields.
#[allow(clippy::too_many_arguments)]
pub fn galilean_check(
    variant: ModelVariant,
    gas: &GasModel,
    coeffs: &TransportCoefficients,
    length: f64,
    initial: InitialCondition,
    shift: f64,
    resolutions: &[usize],
    config: &IntegratorConfig,
) -> Result<GalileanReport> {
    if shift == 0.0 || !shift.is_finite() {
        return Err(Error::InvalidParameter {
            name: "shift",
            reason: format!("must be finite and non-zero, got {shift}"),
        });
    }
    let t_end = length / shift.abs();
    let cfg = IntegratorConfig { t_end, ..*config };
    let mut spacing = Vec::new();
    let mut error = Vec::new();
    let mut finals = Vec::new();
    for &n in resolutions {
        let grid = Grid1D::periodic(n, length)?;
        let model = Model::new(variant, *gas, *coeffs, grid);
        let rest = initial(&grid)?;
        let mut moving = rest.clone();
        moving.u_m.iter_mut().for_each(|u| *u += shift);
        let a = run(&model, &rest, &cfg)?.final_state;
        let b = run(&model, &moving, &cfg)?.final_state;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst
                .max((a.a_n[i] - b.a_n[i]).abs())
                .max((a.v_bar[i] - b.v_bar[i]).abs())
                .max((a.u_m[i] - (b.u_m[i] - shift)).abs())
                .max((a.e_in[i] - b.e_in[i]).abs());
        }
        spacing.push(grid.dx);
        error.push(worst);
        finals.push((a, b));
    }
    Ok(GalileanReport {
        shift,
        t_end,
        convergence: ConvergenceReport::new(resolutions.to_vec(), spacing, error),
        final_states: finals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrabilityReport {
    /// `max |q_momentum - rho U_m|`; zero when the advanced variable is `rho U_m`.
    pub momentum_variable_deviation: f64,
    /// `|sum d(rho U)/dt dx|` relative to `sum |d(rho U)/dt| dx`.
    pub momentum_rhs_sum: f64,
}

pub fn integrability_check(model: &Model, state: &FlowState) -> Result<IntegrabilityReport> {
    let q = model.to_conserved(state)?;
    let m = model.gas.molecular_mass;
    let deviation = (0..state.len())
        .map(|i| (q.momentum[i] - m * state.a_n[i] * state.u_m[i]).abs())
        .fold(0.0, f64::max);
    let d = model.rhs(state)?;
    let sum: f64 = d.momentum.iter().sum();
    let scale: f64 = d.momentum.iter().map(|v| v.abs()).sum();
    Ok(IntegrabilityReport {
        momentum_variable_deviation: deviation,
        momentum_rhs_sum: if scale > 0.0 { sum.abs() / scale } else { 0.0 },
    })
}

/// Viscous stress of the smooth planar velocity field
/// `U = (sin x cos 2y + 0.3 cos y, cos(x + y) + 0.2 sin 2x)`; symmetric.
pub fn viscous_stress_field(mu: f64) -> impl Fn(f64, f64) -> Matrix2<f64> {
    move |x: f64, y: f64| {
        let g = Matrix2::new(
            x.cos() * (2.0 * y).cos(),
            -2.0 * x.sin() * (2.0 * y).sin() - 0.3 * y.sin(),
            -(x + y).sin() + 0.4 * (2.0 * x).cos(),
            -(x + y).sin(),
        );
        let eta = 2.0 / 3.0 * mu;
        -mu * (g + g.transpose()) + Matrix2::identity() * (eta * g.trace())
    }
}

/// Antisymmetric control tensor `[[0, w], [-w, 0]]`, `w = 1 + 0.5 sin x cos y`.
pub fn antisymmetric_field() -> impl Fn(f64, f64) -> Matrix2<f64> {
    |x: f64, y: f64| {
        let w = 1.0 + 0.5 * x.sin() * y.cos();
        Matrix2::new(0.0, w, -w, 0.0)
    }
}

/// Largest value of `X ^ (div T) - div(X ^ T)` over an `n x n` sample of
/// `[-a, a]^2`, with central differences of the sampled tensor.
pub fn angular_momentum_residual(tensor: &dyn Fn(f64, f64) -> Matrix2<f64>, n: usize, half_width: f64) -> f64 {
    let h = 2.0 * half_width / n as f64;
    let c = |i: isize| -half_width + (i as f64 + 0.5) * h;
    let cross = |x: f64, y: f64| {
        // (X ^ T)_j = x T_yj - y T_xj
        let t = tensor(x, y);
        (x * t[(1, 0)] - y * t[(0, 0)], x * t[(1, 1)] - y * t[(0, 1)])
    };
    let mut worst: f64 = 0.0;
    for jy in 0..n as isize {
        for ix in 0..n as isize {
            let (x, y) = (c(ix), c(jy));
            let (xp, xm, yp, ym) = (c(ix + 1), c(ix - 1), c(jy + 1), c(jy - 1));
            let dx = |f: &dyn Fn(f64, f64) -> f64| (f(xp, y) - f(xm, y)) / (2.0 * h);
            let dy = |f: &dyn Fn(f64, f64) -> f64| (f(x, yp) - f(x, ym)) / (2.0 * h);
            let div_x = dx(&|x, y| tensor(x, y)[(0, 0)]) + dy(&|x, y| tensor(x, y)[(0, 1)]);
            let div_y = dx(&|x, y| tensor(x, y)[(1, 0)]) + dy(&|x, y| tensor(x, y)[(1, 1)]);
            let lhs = x * div_y - y * div_x;
            let rhs = dx(&|x, y| cross(x, y).0) + dy(&|x, y| cross(x, y).1);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

pub fn angular_momentum_check(
    tensor: &dyn Fn(f64, f64) -> Matrix2<f64>,
    resolutions: &[usize],
    half_width: f64,
) -> ConvergenceReport {
    let spacing = resolutions.iter().map(|&n| 2.0 * half_width / n as f64).collect();
    let error = resolutions
        .iter()
        .map(|&n| angular_momentum_residual(tensor, n, half_width))
        .collect();
    ConvergenceReport::new(resolutions.to_vec(), spacing, error)
}

/// Pointwise residual of `dB/dt + div[B U - t (p + Pi_v)]` with
/// `B = rho x - rho U t`, using the solver's semi-discrete time derivatives.
/// The first and last cells are excluded (the coordinate is not periodic).
pub fn center_of_mass_residual(model: &Model, state: &FlowState, t: f64) -> Result<Vec<f64>> {
    let grid = &model.grid;
    let gas = &model.gas;
    let coeffs = model.variant.effective_coefficients(&model.coeffs);
    let n = state.len();
    let x = grid.centers();
    let d = model.rhs(state)?;
    let derived = state.derived_quantities(gas)?;
    let fx = compute_fluxes(state, &coeffs, gas, grid)?;
    let m = gas.molecular_mass;
    let rho: Vec<f64> = state.a_n.iter().map(|a| m * a).collect();
    let mom: Vec<f64> = (0..n).map(|i| rho[i] * state.u_m[i]).collect();
    let full = model.variant.advances_volume();
    let drho = grad(grid, &rho, Parity::Even);
    let dmom = grad(grid, &mom, Parity::Odd);
    let k = coeffs.kappa_klim;

    let b_flux: Vec<f64> = (0..n)
        .map(|i| {
            let phi = if full { state.a_n[i] * state.v_bar[i] } else { 1.0 };
            let j = fx.j_v_over_vbar[i];
            let dyadic = if full { rho[i] * j * j } else { 0.0 };
            let stress = mom[i] * state.u_m[i] + phi * (derived.pressure[i] + fx.pi_v[i]) - dyadic - k * dmom[i];
            x[i] * (mom[i] - k * drho[i]) - t * stress
        })
        .collect();
    let h = grid.dx;
    Ok((1..n - 1)
        .map(|i| {
            let div = (b_flux[i + 1] - b_flux[i - 1]) / (2.0 * h);
            x[i] * d.mass[i] - t * d.momentum[i] - mom[i] + div
        })
        .collect())
}

/// Runs `initial` to `t_end` at each resolution and reports the largest
/// center-of-mass residual of the final state.
#[allow(clippy::too_many_arguments)]
pub fn center_of_mass_check(
    variant: ModelVariant,
    gas: &GasModel,
    coeffs: &TransportCoefficients,
    length: f64,
    initial: InitialCondition,
    t_end: f64,
    resolutions: &[usize],
    config: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    let cfg = IntegratorConfig { t_end, ..*config };
    let mut spacing = Vec::new();
    let mut error = Vec::new();
    for &n in resolutions {
        let grid = Grid1D::periodic(n, length)?;
        let model = Model::new(variant, *gas, *coeffs, grid);
        let tr = run(&model, &initial(&grid)?, &cfg)?;
        let r = center_of_mass_residual(&model, &tr.final_state, tr.final_time)?;
        spacing.push(grid.dx);
        error.push(r.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    Ok(ConvergenceReport::new(resolutions.to_vec(), spacing, error))
}
