//! Entropy budgets of the three model families.
//!
//! Volume model terms are rates of `A_n T' Ds/Dt` (the `A_n / rho_bar`
//! prefactor is evaluated as `a_n / rho_bar`). Klimontovich and reduced
//! terms are rates of `rho Ds/Dt` with the classical Gibbs entropy.

use std::f64::consts::PI;

use super::mechanics::InitialCondition;
use super::ConvergenceReport;
use crate::constitutive::{compute_fluxes, diffusive_velocity, FluxSet};
use crate::error::{Error, Result};
use crate::governing::{Model, ModelVariant};
use crate::solver::{step_rk4, Snapshot};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};
use crate::stencil::{face_divergence, grad, Padded, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    Volume,
    Klimontovich,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermRole {
    /// Divergence of an entropic flux.
    Flux,
    /// Non-negative by construction.
    Production,
    /// No definite sign.
    Indefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetTerm {
    pub name: &'static str,
    pub role: TermRole,
    /// Power of the Knudsen number in front of the dimensionless term.
    pub knudsen_order: Option<u32>,
    pub values: Vec<f64>,
    /// `sum values * dx`.
    pub integral: f64,
    /// `sum |values| * dx`.
    pub magnitude: f64,
}

impl BudgetTerm {
    fn new(name: &'static str, role: TermRole, knudsen_order: Option<u32>, values: Vec<f64>, grid: &Grid1D) -> Self {
        let integral = grid.integrate(&values);
        let magnitude = values.iter().map(|v| v.abs()).sum::<f64>() * grid.dx;
        Self {
            name,
            role,
            knudsen_order,
            values,
            integral,
            magnitude,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Left side of the modified Gibbs relation against the summed right side.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsClosure {
    /// Midpoint time of the snapshot pair.
    pub time: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `-a_n D(j^2/2)/Dt`, included in `lhs`.
    pub kinetic_contribution: Vec<f64>,
    /// `sum |lhs - rhs| * dx`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBudget {
    pub kind: BudgetKind,
    /// Terms whose sum is the entropy rate.
    pub terms: Vec<BudgetTerm>,
    /// Sign-definite productions of `Ds/Dt` (after dividing by temperature);
    /// not part of `terms`.
    pub productions: Vec<BudgetTerm>,
    pub closure: Option<GibbsClosure>,
}

impl EntropyBudget {
    pub fn term(&self, name: &str) -> Option<&BudgetTerm> {
        self.terms.iter().chain(&self.productions).find(|t| t.name == name)
    }

    /// Per-cell sum of `terms`.
    pub fn rate(&self) -> Vec<f64> {
        let n = self.terms.first().map_or(0, |t| t.values.len());
        (0..n).map(|i| self.terms.iter().map(|t| t.values[i]).sum()).collect()
    }

    pub fn total_integral(&self) -> f64 {
        self.terms.iter().map(|t| t.integral).sum()
    }
}

pub const HEAT: &str = "heat_conduction";
pub const NSF_SHEAR: &str = "nsf_shear";
pub const CROSS_UM_JV: &str = "cross_um_jv";
pub const CROSS_JV_UM: &str = "cross_jv_um";
pub const JV_JV: &str = "jv_jv";

/// Volume-model budget: `div[(A_n/rho) kappa_h grad T] - (A_n/rho) Pi_v : grad U_v`,
/// with the stress work split into its four `U_m` / `J_v` pieces.
pub fn entropy_budget_volume(
    state: &FlowState,
    fluxes: &FluxSet,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<EntropyBudget> {
    let d = state.derived_quantities(gas)?;
    let n = state.len();
    let w: Vec<f64> = (0..n).map(|i| state.a_n[i] / d.rho_bar[i]).collect();
    let t = &d.temperature;

    let t_pad = Padded::on(grid, t, Parity::Even);
    let w_face = Padded::on(grid, &w, Parity::Even).face_avg();
    let heat_face: Vec<f64> = t_pad
        .face_grad(grid.dx)
        .iter()
        .zip(&w_face)
        .map(|(g, wf)| wf * coeffs.kappa_h * g)
        .collect();
    let heat = face_divergence(&heat_face, grid.dx);

    let du = grad(grid, &state.u_m, Parity::Odd);
    let dj = grad(grid, &fluxes.j_v_over_vbar, Parity::Odd);
    let pair = |pi: &[f64], g: &[f64]| -> Vec<f64> { (0..n).map(|i| -w[i] * pi[i] * g[i]).collect() };

    let dt = grad(grid, t, Parity::Even);
    let viscous: Vec<f64> = (0..n)
        .map(|i| -w[i] * fluxes.pi_v[i] * (du[i] + dj[i]) / t[i])
        .collect();
    let thermal: Vec<f64> = (0..n)
        .map(|i| w[i] * coeffs.kappa_h * dt[i] * dt[i] / (t[i] * t[i]))
        .collect();

    Ok(EntropyBudget {
        kind: BudgetKind::Volume,
        terms: vec![
            BudgetTerm::new(HEAT, TermRole::Flux, Some(1), heat, grid),
            BudgetTerm::new(NSF_SHEAR, TermRole::Production, Some(1), pair(&fluxes.pi_um, &du), grid),
            BudgetTerm::new(CROSS_UM_JV, TermRole::Indefinite, Some(2), pair(&fluxes.pi_um, &dj), grid),
            BudgetTerm::new(CROSS_JV_UM, TermRole::Indefinite, Some(2), pair(&fluxes.pi_jv, &du), grid),
            BudgetTerm::new(JV_JV, TermRole::Production, Some(3), pair(&fluxes.pi_jv, &dj), grid),
        ],
        productions: vec![
            BudgetTerm::new("viscous_production", TermRole::Production, None, viscous, grid),
            BudgetTerm::new("thermal_production", TermRole::Production, None, thermal, grid),
        ],
        closure: None,
    })
}

/// Volume budget at the midpoint of the last two snapshots, with the
/// Gibbs-path left side from their difference.
pub fn entropy_budget_volume_from_snapshots(
    snapshots: &[Snapshot],
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<EntropyBudget> {
    let [.., before, after] = snapshots else {
        return Err(Error::InsufficientData(format!(
            "material derivatives need two snapshots, got {}",
            snapshots.len()
        )));
    };
    let span = after.time - before.time;
    if !(span > 0.0) {
        return Err(Error::InsufficientData("snapshots must be strictly ordered in time".into()));
    }
    let mid = midpoint(&before.state, &after.state)?;
    let fluxes = compute_fluxes(&mid, coeffs, gas, grid)?;
    let mut budget = entropy_budget_volume(&mid, &fluxes, coeffs, gas, grid)?;

    let n = mid.len();
    let m = gas.molecular_mass;
    let specific = |s: &FlowState| -> (Vec<f64>, Vec<f64>) {
        let j = diffusive_velocity(&s.rho_bar(gas), coeffs.kappa_m, grid);
        let half_j2 = j.iter().map(|v| 0.5 * v * v).collect();
        let phi = (0..s.len()).map(|i| s.a_n[i] * s.v_bar[i]).collect();
        (half_j2, phi)
    };
    let (k0, phi0) = specific(&before.state);
    let (k1, phi1) = specific(&after.state);
    let (km, phim) = specific(&mid);
    let material = |f0: &[f64], f1: &[f64], fm: &[f64]| -> Vec<f64> {
        let g = grad(grid, fm, Parity::Even);
        (0..n).map(|i| (f1[i] - f0[i]) / span + mid.u_m[i] * g[i]).collect()
    };
    let de = material(&before.state.e_in, &after.state.e_in, &mid.e_in);
    let dk = material(&k0, &k1, &km);
    let dphi = material(&phi0, &phi1, &phim);
    let p = mid.derived_quantities(gas)?.pressure;

    let kinetic: Vec<f64> = (0..n).map(|i| -mid.a_n[i] * dk[i]).collect();
    let lhs: Vec<f64> = (0..n)
        .map(|i| mid.a_n[i] * de[i] + kinetic[i] - p[i] / m * dphi[i])
        .collect();
    let rhs = budget.rate();
    let residual = (0..n).map(|i| (lhs[i] - rhs[i]).abs()).sum::<f64>() * grid.dx;
    budget.closure = Some(GibbsClosure {
        time: 0.5 * (before.time + after.time),
        lhs,
        rhs,
        kinetic_contribution: kinetic,
        residual,
    });
    Ok(budget)
}

/// Closure residual of the volume budget on the last step of an unforced
/// full-model run from `initial`. The step is `coarse_dt` on the coarsest
/// grid and shrinks with `dx^2`, which keeps every run diffusively stable;
/// all runs reach the same time before the snapshot pair is taken.
#[allow(clippy::too_many_arguments)]
pub fn closure_convergence(
    initial: InitialCondition,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    length: f64,
    resolutions: &[usize],
    steps_at_coarsest: usize,
    coarse_dt: f64,
) -> Result<ConvergenceReport> {
    let coarse = *resolutions
        .first()
        .ok_or_else(|| Error::InsufficientData("no resolutions".into()))?;
    let mut spacing = Vec::new();
    let mut error = Vec::new();
    for &n in resolutions {
        let grid = Grid1D::periodic(n, length)?;
        let model = Model::new(ModelVariant::VolumeFull, *gas, *coeffs, grid);
        let refine = n / coarse;
        let dt = coarse_dt / (refine * refine) as f64;
        let steps = steps_at_coarsest * refine * refine;
        let mut state = initial(&grid)?;
        let mut t = 0.0;
        for _ in 0..steps {
            state = step_rk4(&model, &state, t, dt, None)?;
            t += dt;
        }
        let next = step_rk4(&model, &state, t, dt, None)?;
        let pair = [
            Snapshot { step: steps, time: t, state },
            Snapshot { step: steps + 1, time: t + dt, state: next },
        ];
        let budget = entropy_budget_volume_from_snapshots(&pair, coeffs, gas, &grid)?;
        spacing.push(grid.dx);
        error.push(budget.closure.expect("set by the snapshot budget").residual);
    }
    Ok(ConvergenceReport::new(resolutions.to_vec(), spacing, error))
}

fn midpoint(a: &FlowState, b: &FlowState) -> Result<FlowState> {
    let avg = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
    FlowState::new(avg(&a.a_n, &b.a_n), avg(&a.v_bar, &b.v_bar), avg(&a.u_m, &b.u_m), avg(&a.e_in, &b.e_in))
}

pub const CURLY: &str = "curly_bracket";

/// Klimontovich budget of `rho Ds/Dt`.
pub fn entropy_budget_klimontovich(
    state: &FlowState,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<EntropyBudget> {
    let d = state.derived_quantities(gas)?;
    let n = state.len();
    let rho = &d.rho_bar;
    let t = &d.temperature;
    let k = coeffs.kappa_klim;
    let (r, cv) = (gas.gas_constant, gas.cv);

    let g = |f: &[f64]| grad(grid, f, Parity::Even);
    let drho = g(rho);
    let dt = g(t);
    let du = grad(grid, &state.u_m, Parity::Odd);
    let rho_t: Vec<f64> = (0..n).map(|i| rho[i] * t[i]).collect();
    let drho_t = g(&rho_t);

    let log_grad_rt: Vec<f64> = (0..n).map(|i| drho_t[i] / rho_t[i]).collect();
    let log_grad_rho: Vec<f64> = (0..n).map(|i| drho[i] / rho[i]).collect();
    let log_grad_t: Vec<f64> = (0..n).map(|i| dt[i] / t[i]).collect();
    let div_rt = g(&log_grad_rt);
    let div_rho = g(&log_grad_rho);
    let div_t = g(&log_grad_t);

    let col = |f: &dyn Fn(usize) -> f64| (0..n).map(f).collect::<Vec<f64>>();
    let terms = vec![
        BudgetTerm::new("entropic_flux_density_temperature", TermRole::Flux, None, col(&|i| rho[i] * k * cv * div_rt[i]), grid),
        BudgetTerm::new("entropic_flux_density", TermRole::Flux, None, col(&|i| -rho[i] * k * (r + cv) * div_rho[i]), grid),
        BudgetTerm::new("entropic_flux_heat", TermRole::Flux, None, col(&|i| coeffs.kappa_h * div_t[i]), grid),
        BudgetTerm::new("velocity_diffusion_production", TermRole::Production, None, col(&|i| k * rho[i] * du[i] * du[i] / t[i]), grid),
        BudgetTerm::new(
            "viscous_production",
            TermRole::Production,
            None,
            col(&|i| coeffs.normal_stress_factor(t[i]) * du[i] * du[i] / t[i]),
            grid,
        ),
        BudgetTerm::new(
            "thermal_production",
            TermRole::Production,
            None,
            col(&|i| (coeffs.kappa_h + rho[i] * k * cv) * dt[i] * dt[i] / (t[i] * t[i])),
            grid,
        ),
        BudgetTerm::new(
            CURLY,
            TermRole::Indefinite,
            None,
            col(&|i| 2.0 * k * cv * drho[i] * dt[i] / t[i] - k * r * drho[i] * drho[i] / rho[i]),
            grid,
        ),
    ];
    Ok(EntropyBudget {
        kind: BudgetKind::Klimontovich,
        terms,
        productions: Vec::new(),
        closure: None,
    })
}

pub const REDUCED_RESIDUAL: &str = "stress_divergence_residual";

/// Reduced-model budget of `rho Ds/Dt`: flux divergence, the sign-definite
/// `-(1/T) Pi_v dU_v/dx`, and the indefinite `-(1/T) j dPi_v/dx`.
pub fn entropy_budget_reduced(
    state: &FlowState,
    fluxes: &FluxSet,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<EntropyBudget> {
    let d = state.derived_quantities(gas)?;
    let n = state.len();
    let t = &d.temperature;
    let j = &fluxes.j_v_over_vbar;
    let dt = grad(grid, t, Parity::Even);
    let flux: Vec<f64> = (0..n).map(|i| -coeffs.kappa_h * dt[i] + d.pressure[i] * j[i]).collect();
    let dflux = grad(grid, &flux, Parity::Odd);
    let duv = grad(grid, &fluxes.u_v, Parity::Odd);
    let dpi = grad(grid, &fluxes.pi_v, Parity::Even);
    Ok(EntropyBudget {
        kind: BudgetKind::Reduced,
        terms: vec![
            BudgetTerm::new("entropy_flux", TermRole::Flux, None, (0..n).map(|i| -dflux[i] / t[i]).collect(), grid),
            BudgetTerm::new(
                "stress_production",
                TermRole::Production,
                None,
                (0..n).map(|i| -fluxes.pi_v[i] * duv[i] / t[i]).collect(),
                grid,
            ),
            BudgetTerm::new(
                REDUCED_RESIDUAL,
                TermRole::Indefinite,
                None,
                (0..n).map(|i| -j[i] * dpi[i] / t[i]).collect(),
                grid,
            ),
        ],
        productions: Vec::new(),
        closure: None,
    })
}

/// Outcome of the phase/amplitude scan for the Klimontovich curly group.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSearch {
    pub curly_min: f64,
    pub curly_max: f64,
    /// `(phase, temperature amplitude, pointwise minimum)` of the first state
    /// whose total production goes negative somewhere.
    pub negative_total_production: Option<(f64, f64, f64)>,
    pub states_scanned: usize,
}

impl SignSearch {
    pub fn both_signs(&self) -> bool {
        self.curly_min < 0.0 && self.curly_max > 0.0
    }
}

/// Scans `rho = 1 + a sin(kx)`, `T = 1 + b sin(kx + theta)`, `U = 0` over
/// phases and temperature amplitudes.
pub fn klimontovich_sign_search(
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
    density_amplitude: f64,
    temperature_amplitudes: &[f64],
    phases: usize,
) -> Result<SignSearch> {
    let k = 2.0 * PI / grid.length;
    let x = grid.centers();
    let mut out = SignSearch {
        curly_min: f64::INFINITY,
        curly_max: f64::NEG_INFINITY,
        negative_total_production: None,
        states_scanned: 0,
    };
    for &b in temperature_amplitudes {
        for p in 0..phases {
            let theta = 2.0 * PI * p as f64 / phases as f64;
            let rho: Vec<f64> = x.iter().map(|x| 1.0 + density_amplitude * (k * x).sin()).collect();
            let e: Vec<f64> = x.iter().map(|x| gas.cv * (1.0 + b * (k * x + theta).sin())).collect();
            let s = FlowState::compatible(gas, &rho, &vec![0.0; x.len()], &e)?;
            let budget = entropy_budget_klimontovich(&s, coeffs, gas, grid)?;
            let curly = budget.term(CURLY).expect("curly term present");
            out.curly_min = out.curly_min.min(curly.min());
            out.curly_max = out.curly_max.max(curly.max());
            if out.negative_total_production.is_none() {
                let total: Vec<f64> = (0..x.len())
                    .map(|i| {
                        budget
                            .terms
                            .iter()
                            .filter(|t| t.role != TermRole::Flux)
                            .map(|t| t.values[i])
                            .sum()
                    })
                    .collect();
                let min = total.iter().copied().fold(f64::INFINITY, f64::min);
                if min < 0.0 {
                    out.negative_total_production = Some((theta, b, min));
                }
            }
            out.states_scanned += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gibbs_closure_converges_on_solver_steps() {
        use crate::manufactured::ManufacturedProfile;
        let gas = GasModel::default();
        let coeffs = TransportCoefficients::new(0.02, 0.03, 0.015, 0.0).unwrap();
        let profile = ManufacturedProfile::default();
        let init = |g: &Grid1D| profile.state(ModelVariant::VolumeFull, &gas, g, 0.0);
        let r = closure_convergence(&init, &coeffs, &gas, 1.0, &[64, 128, 256], 4, 0.002).unwrap();
        assert!((r.order.unwrap() - 2.0).abs() < 0.2, "{r:?}");
        // error ratio per halving tends to 4
        assert!(r.error[1] / r.error[2] > 3.9, "{r:?}");
    }
    use crate::governing::{rhs, ModelVariant};

    fn gas() -> GasModel {
        GasModel::monatomic(1.0, 1.0).unwrap()
    }

    fn wavy(n: usize) -> (Grid1D, FlowState) {
        let grid = Grid1D::periodic(n, 1.0).unwrap();
        let x = grid.centers();
        let k = 2.0 * PI;
        let rho: Vec<f64> = x.iter().map(|x| 1.0 + 0.2 * (k * x).sin()).collect();
        let u: Vec<f64> = x.iter().map(|x| 0.2 * (k * x + 0.4).cos()).collect();
        let e: Vec<f64> = x.iter().map(|x| 1.5 * (1.0 + 0.1 * (k * x + 1.1).sin())).collect();
        (grid, FlowState::compatible(&gas(), &rho, &u, &e).unwrap())
    }

    fn coeffs() -> TransportCoefficients {
        TransportCoefficients::new(0.02, 0.03, 0.02, 0.015).unwrap()
    }

    #[test]
    fn uniform_state_has_zero_terms() {
        let g = gas();
        let grid = Grid1D::periodic(16, 1.0).unwrap();
        let s = FlowState::uniform(16, &g, 1.1, 0.3, 1.2);
        let f = compute_fluxes(&s, &coeffs(), &g, &grid).unwrap();
        for b in [
            entropy_budget_volume(&s, &f, &coeffs(), &g, &grid).unwrap(),
            entropy_budget_klimontovich(&s, &coeffs(), &g, &grid).unwrap(),
            entropy_budget_reduced(&s, &f, &coeffs(), &g, &grid).unwrap(),
        ] {
            for t in b.terms.iter().chain(&b.productions) {
                assert!(t.values.iter().all(|v| v.abs() < 1e-14), "{}", t.name);
            }
        }
    }

    #[test]
    fn volume_budget_at_zero_kappa_m_is_nsf_shear_only() {
        let (grid, s) = wavy(64);
        let c = coeffs().with_kappa_m(0.0);
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        let b = entropy_budget_volume(&s, &f, &c, &gas(), &grid).unwrap();
        for name in [CROSS_UM_JV, CROSS_JV_UM, JV_JV] {
            assert!(b.term(name).unwrap().values.iter().all(|v| *v == 0.0));
        }
        assert!(b.term(NSF_SHEAR).unwrap().min() >= 0.0);
    }

    /// Rate of `rho Ds/Dt` from the classical Gibbs relation and a solver RHS.
    fn gibbs_rate(variant: ModelVariant, s: &FlowState, c: &TransportCoefficients, grid: &Grid1D) -> Vec<f64> {
        let g = gas();
        let d = rhs(variant, s, c, &g, grid).unwrap();
        let dd = s.derived_quantities(&g).unwrap();
        let rho = &dd.rho_bar;
        let de_dx = grad(grid, &s.e_in, Parity::Even);
        let drho_dx = grad(grid, rho, Parity::Even);
        (0..s.len())
            .map(|i| {
                let u = s.u_m[i];
                let e = s.e_in[i];
                let rho_de_dt = d.energy[i] - u * d.momentum[i] + (0.5 * u * u - e) * d.mass[i];
                let de = rho_de_dt + rho[i] * u * de_dx[i];
                let drho = d.mass[i] + u * drho_dx[i];
                (de - dd.pressure[i] / rho[i] * drho) / dd.temperature[i]
            })
            .collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Independent assembly of the entropy equation before the production
    /// closure is substituted, with `W` taken from the constitutive module.
    fn unclosed_rate(s: &FlowState, c: &TransportCoefficients, grid: &Grid1D) -> Vec<f64> {
        let g = gas();
        let m = g.molecular_mass;
        let n = s.len();
        let f = compute_fluxes(s, c, &g, grid).unwrap();
        let w = crate::constitutive::volume_production(s, &f, &g, grid).unwrap();
        let d = s.derived_quantities(&g).unwrap();
        let (a, rb, p, j) = (&s.a_n, &d.rho_bar, &d.pressure, &f.j_v_over_vbar);
        let dx = |v: Vec<f64>, parity| grad(grid, &v, parity);
        let du = grad(grid, &s.u_m, Parity::Odd);
        let stress_flux = dx((0..n).map(|i| a[i] / rb[i] * f.pi_v[i] * j[i]).collect(), Parity::Odd);
        let number = dx((0..n).map(|i| a[i] * s.v_bar[i] * j[i]).collect(), Parity::Odd);
        let enthalpy = dx(
            (0..n).map(|i| (-a[i] * p[i] / rb[i] + a[i] * j[i] * j[i]) * j[i]).collect(),
            Parity::Odd,
        );
        let heat = dx(
            (0..n).map(|i| a[i] * f.q_prime[i] + 1.5 * a[i] * p[i] / rb[i] * j[i]).collect(),
            Parity::Odd,
        );
        (0..n)
            .map(|i| {
                -p[i] * a[i] / m * w[i] - stress_flux[i]
                    + (a[i] * j[i] * j[i] - a[i] / rb[i] * f.pi_jv[i]) * du[i]
                    + p[i] / m * number[i]
                    + enthalpy[i]
                    - heat[i]
                    - a[i] / rb[i] * f.pi_um[i] * du[i]
            })
            .collect()
    }

    #[test]
    fn volume_budget_matches_unclosed_assembly() {
        let c = coeffs().with_kappa_m(0.05);
        let err = |n: usize| {
            let (grid, mut s) = wavy(n);
            let x = grid.centers();
            s.v_bar = (0..n).map(|i| s.v_bar[i] * (1.0 + 0.1 * (2.0 * PI * x[i] + 2.0).cos())).collect();
            let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
            let b = entropy_budget_volume(&s, &f, &c, &gas(), &grid).unwrap();
            max_diff(&b.rate(), &unclosed_rate(&s, &c, &grid))
        };
        let order = (err(64) / err(128)).log2();
        assert!((order - 2.0).abs() < 0.25, "order {order}");
    }

    #[test]
    fn klimontovich_budget_matches_gibbs_rate() {
        let err = |n: usize| {
            let (grid, s) = wavy(n);
            let b = entropy_budget_klimontovich(&s, &coeffs(), &gas(), &grid).unwrap();
            max_diff(&b.rate(), &gibbs_rate(ModelVariant::Klimontovich, &s, &coeffs(), &grid))
        };
        let order = (err(64) / err(128)).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn reduced_budget_matches_gibbs_rate() {
        let err = |n: usize| {
            let (grid, s) = wavy(n);
            let f = compute_fluxes(&s, &coeffs(), &gas(), &grid).unwrap();
            let b = entropy_budget_reduced(&s, &f, &coeffs(), &gas(), &grid).unwrap();
            max_diff(&b.rate(), &gibbs_rate(ModelVariant::BivelocityReduced, &s, &coeffs(), &grid))
        };
        let order = (err(64) / err(128)).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn klimontovich_with_zero_kappa_is_classical() {
        let (grid, s) = wavy(64);
        let c = coeffs().with_kappa_klim(0.0);
        let b = entropy_budget_klimontovich(&s, &c, &gas(), &grid).unwrap();
        assert!(b.term(CURLY).unwrap().values.iter().all(|v| *v == 0.0));
        let err = max_diff(&b.rate(), &gibbs_rate(ModelVariant::NsfBaseline, &s, &c, &grid));
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn sign_search_finds_both_signs() {
        let grid = Grid1D::periodic(64, 1.0).unwrap();
        let r = klimontovich_sign_search(&coeffs(), &gas(), &grid, 0.3, &[0.0, 0.1, 0.3], 8).unwrap();
        assert!(r.both_signs());
        assert!(r.negative_total_production.is_some());
        assert_eq!(r.states_scanned, 24);
    }

    #[test]
    fn snapshot_path_needs_two_snapshots() {
        let (grid, s) = wavy(16);
        let one = [Snapshot {
            step: 0,
            time: 0.0,
            state: s,
        }];
        assert!(matches!(
            entropy_budget_volume_from_snapshots(&one, &coeffs(), &gas(), &grid),
            Err(Error::InsufficientData(_))
        ));
    }
}
