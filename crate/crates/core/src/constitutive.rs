//! Closure fluxes of the volume-diffusion model.
//!
//! All 1D quantities are cell-centered and use central differences. The
//! diffusive velocity `j = J_v / v_bar = kappa_m grad(rho_bar) / rho_bar`
//! is the only volume-flux quantity stored; `J_v` itself is `v_bar * j`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};
use crate::stencil::{grad, Padded, Parity};

/// Every closure flux evaluated on one state.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    /// `(1 / v_bar) J_v`, m/s.
    pub j_v_over_vbar: Vec<f64>,
    /// Volume velocity `U_v = U_m + (1/v_bar) J_v`.
    pub u_v: Vec<f64>,
    /// Normal stress `Pi_v,xx`.
    pub pi_v: Vec<f64>,
    /// Part of `pi_v` generated by `U_m`.
    pub pi_um: Vec<f64>,
    /// Part of `pi_v` generated by `(1/v_bar) J_v`.
    pub pi_jv: Vec<f64>,
    /// Heat flux `q'` (per unit mass scaling, so `rho_bar q'` is W/m^2).
    pub q_prime: Vec<f64>,
    /// Entropic heat flux `q' + (3/2)(p'/rho_bar)(1/v_bar) J_v`.
    pub q_s: Vec<f64>,
}

/// `(1/v_bar) J_v = kappa_m grad(rho_bar) / rho_bar` per cell.
pub fn volume_flux(state: &FlowState, coeffs: &TransportCoefficients, gas: &GasModel, grid: &Grid1D) -> Vec<f64> {
    let rho = state.rho_bar(gas);
    diffusive_velocity(&rho, coeffs.kappa_m, grid)
}

/// The same flux through the equivalent form `-kappa_m grad(v_bar) / v_bar`.
pub fn volume_flux_from_vbar(state: &FlowState, coeffs: &TransportCoefficients, grid: &Grid1D) -> Vec<f64> {
    let g = grad(grid, &state.v_bar, Parity::Even);
    g.iter()
        .zip(&state.v_bar)
        .map(|(gv, v)| -coeffs.kappa_m * gv / v)
        .collect()
}

/// `kappa grad(rho) / rho` for an arbitrary density field.
pub fn diffusive_velocity(rho: &[f64], kappa_m: f64, grid: &Grid1D) -> Vec<f64> {
    let g = grad(grid, rho, Parity::Even);
    g.iter().zip(rho).map(|(gr, r)| kappa_m * gr / r).collect()
}

pub fn volume_velocity(u_m: &[f64], j_v_over_vbar: &[f64]) -> Vec<f64> {
    u_m.iter().zip(j_v_over_vbar).map(|(u, j)| u + j).collect()
}

/// Normal stress of a 1D velocity field: `-(2 mu - eta) du/dx = -(4/3) mu du/dx`.
pub fn shear_stress(velocity: &[f64], temperature: &[f64], coeffs: &TransportCoefficients, grid: &Grid1D) -> Vec<f64> {
    let g = grad(grid, velocity, Parity::Odd);
    g.iter()
        .zip(temperature)
        .map(|(du, t)| -coeffs.normal_stress_factor(*t) * du)
        .collect()
}

/// Full stress tensor `-mu (G + G^T) + eta tr(G) I` for a velocity gradient `G`.
pub fn stress_tensor(velocity_gradient: &Matrix3<f64>, mu: f64, eta: f64) -> Matrix3<f64> {
    -mu * (velocity_gradient + velocity_gradient.transpose())
        + Matrix3::identity() * (eta * velocity_gradient.trace())
}

/// Entropic heat flux `-(kappa_h / rho) grad T` for a 3-vector gradient.
pub fn entropic_heat_flux_vector(kappa_h: f64, rho: f64, grad_t: &Vector3<f64>) -> Vector3<f64> {
    -(kappa_h / rho) * grad_t
}

/// `(q', q_s)` per cell. `q_s` is evaluated directly as `-(kappa_h/rho_bar) dT/dx`,
/// and `q'` subtracts the `(3/2)(p'/rho_bar) j` contribution from it.
pub fn heat_flux(
    state: &FlowState,
    j_v_over_vbar: &[f64],
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = state.derived_quantities(gas)?;
    let dt = grad(grid, &d.temperature, Parity::Even);
    let q_s: Vec<f64> = dt
        .iter()
        .zip(&d.rho_bar)
        .map(|(g, r)| -(coeffs.kappa_h / r) * g)
        .collect();
    let q_prime = q_s
        .iter()
        .zip(d.pressure.iter().zip(&d.rho_bar))
        .zip(j_v_over_vbar)
        .map(|((qs, (p, r)), j)| qs - 1.5 * p / r * j)
        .collect();
    Ok((q_prime, q_s))
}

pub fn compute_fluxes(
    state: &FlowState,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<FluxSet> {
    let d = state.derived_quantities(gas)?;
    let j = volume_flux(state, coeffs, gas, grid);
    let u_v = volume_velocity(&state.u_m, &j);
    let pi_um = shear_stress(&state.u_m, &d.temperature, coeffs, grid);
    let pi_jv = shear_stress(&j, &d.temperature, coeffs, grid);
    let pi_v = pi_um.iter().zip(&pi_jv).map(|(a, b)| a + b).collect();
    let (q_prime, q_s) = heat_flux(state, &j, coeffs, gas, grid)?;
    Ok(FluxSet {
        j_v_over_vbar: j,
        u_v,
        pi_v,
        pi_um,
        pi_jv,
        q_prime,
        q_s,
    })
}

/// The six contributions to `p' (A_n / M) W`, each per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeProductionTerms {
    /// `-div[(A_n/(rho v)) Pi_v . J_v]`
    pub stress_flux_divergence: Vec<f64>,
    /// `(A_n/v^2) J_v J_v : grad U_m`
    pub dyadic_strain: Vec<f64>,
    /// `(A_n/rho) Pi_Jv : grad(J_v/v)`
    pub jv_stress_power: Vec<f64>,
    /// `(A_n/rho) Pi_Um : grad(J_v/v)`
    pub um_stress_power: Vec<f64>,
    /// `(p'/M) div[A_n J_v]`
    pub pressure_dilatation: Vec<f64>,
    /// `div[(-A_n p'/rho + (A_n/v^2) J_v^2) J_v / v]`
    pub enthalpy_flux_divergence: Vec<f64>,
}

impl VolumeProductionTerms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.stress_flux_divergence.len())
            .map(|i| {
                self.stress_flux_divergence[i]
                    + self.dyadic_strain[i]
                    + self.jv_stress_power[i]
                    + self.um_stress_power[i]
                    + self.pressure_dilatation[i]
                    + self.enthalpy_flux_divergence[i]
            })
            .collect()
    }
}

pub fn volume_production_terms(
    state: &FlowState,
    fluxes: &FluxSet,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<VolumeProductionTerms> {
    let d = state.derived_quantities(gas)?;
    let n = state.len();
    let dx = grid.dx;
    let j = &fluxes.j_v_over_vbar;
    let dj = grad(grid, j, Parity::Odd);
    let du = grad(grid, &state.u_m, Parity::Odd);

    // A_n / rho_bar = A_n v_bar / M
    let an_over_rho: Vec<f64> = (0..n).map(|i| state.a_n[i] / d.rho_bar[i]).collect();

    let stress_flux: Vec<f64> = (0..n).map(|i| an_over_rho[i] * fluxes.pi_v[i] * j[i]).collect();
    let number_flux: Vec<f64> = (0..n).map(|i| state.a_n[i] * state.v_bar[i] * j[i]).collect();
    let enthalpy_flux: Vec<f64> = (0..n)
        .map(|i| (-state.a_n[i] * d.pressure[i] / d.rho_bar[i] + state.a_n[i] * j[i] * j[i]) * j[i])
        .collect();

    let stress_div = Padded::on(grid, &stress_flux, Parity::Odd).grad(dx);
    let number_div = Padded::on(grid, &number_flux, Parity::Odd).grad(dx);
    let enthalpy_div = Padded::on(grid, &enthalpy_flux, Parity::Odd).grad(dx);

    Ok(VolumeProductionTerms {
        stress_flux_divergence: stress_div.iter().map(|v| -v).collect(),
        dyadic_strain: (0..n).map(|i| state.a_n[i] * j[i] * j[i] * du[i]).collect(),
        jv_stress_power: (0..n).map(|i| an_over_rho[i] * fluxes.pi_jv[i] * dj[i]).collect(),
        um_stress_power: (0..n).map(|i| an_over_rho[i] * fluxes.pi_um[i] * dj[i]).collect(),
        pressure_dilatation: (0..n)
            .map(|i| d.pressure[i] / gas.molecular_mass * number_div[i])
            .collect(),
        enthalpy_flux_divergence: enthalpy_div,
    })
}

/// Volume production rate `W` per cell.
///
/// Fails with [`Error::SingularClosure`] where the kinetic pressure is not
/// positive.
pub fn volume_production(
    state: &FlowState,
    fluxes: &FluxSet,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<Vec<f64>> {
    let d = state.derived_quantities(gas)?;
    if let Some((cell, p)) = d
        .pressure
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p > 0.0))
        .map(|(i, p)| (i, *p))
    {
        return Err(Error::SingularClosure { cell, value: p });
    }
    let terms = volume_production_terms(state, fluxes, gas, grid)?;
    Ok(terms
        .total()
        .iter()
        .enumerate()
        .map(|(i, t)| t * gas.molecular_mass / (d.pressure[i] * state.a_n[i]))
        .collect())
}

/// Right side of the specific-volume equation written with the combined
/// stress `Pi_v : grad(J_v / v)`, i.e. `A_n (p'/M) Dv/Dt`.
pub fn specific_volume_rate_combined(
    state: &FlowState,
    fluxes: &FluxSet,
    gas: &GasModel,
    grid: &Grid1D,
) -> Result<Vec<f64>> {
    let t = volume_production_terms(state, fluxes, gas, grid)?;
    let d = state.derived_quantities(gas)?;
    let dj = grad(grid, &fluxes.j_v_over_vbar, Parity::Odd);
    Ok((0..state.len())
        .map(|i| {
            t.stress_flux_divergence[i]
                + t.dyadic_strain[i]
                + state.a_n[i] / d.rho_bar[i] * fluxes.pi_v[i] * dj[i]
                + t.enthalpy_flux_divergence[i]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Boundary;
    use std::f64::consts::PI;

    fn gas() -> GasModel {
        GasModel::monatomic(1.0, 1.0).unwrap()
    }

    fn sinusoidal(n: usize, eps: f64) -> (Grid1D, FlowState) {
        let grid = Grid1D::periodic(n, 2.0 * PI).unwrap();
        let x = grid.centers();
        let rho: Vec<f64> = x.iter().map(|x| 1.0 + eps * x.sin()).collect();
        let u = vec![0.0; n];
        let e = vec![1.5; n];
        (grid, FlowState::compatible(&gas(), &rho, &u, &e).unwrap())
    }

    #[test]
    fn uniform_density_gives_zero_flux() {
        let g = gas();
        let grid = Grid1D::periodic(16, 1.0).unwrap();
        let s = FlowState::uniform(16, &g, 2.0, 0.3, 1.0);
        let c = TransportCoefficients::new(0.1, 0.1, 0.5, 0.0).unwrap();
        assert!(volume_flux(&s, &c, &g, &grid).iter().all(|j| *j == 0.0));
    }

    #[test]
    fn zero_kappa_m_gives_u_v_equal_u_m() {
        let (grid, mut s) = sinusoidal(32, 0.1);
        s.u_m = grid.centers().iter().map(|x| x.cos()).collect();
        let c = TransportCoefficients::new(0.1, 0.1, 0.0, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        assert!(f.j_v_over_vbar.iter().all(|j| *j == 0.0));
        assert_eq!(f.u_v, s.u_m);
    }

    #[test]
    fn volume_velocity_is_sum() {
        assert_eq!(volume_velocity(&[3.0], &[0.0]), vec![3.0]);
        assert_eq!(volume_velocity(&[0.0], &[0.1]), vec![0.1]);
    }

    #[test]
    fn sinusoidal_flux_converges_second_order() {
        let kappa = 0.3;
        let eps = 0.2;
        let c = TransportCoefficients::new(0.0, 0.0, kappa, 0.0).unwrap();
        let err = |n: usize| {
            let (grid, s) = sinusoidal(n, eps);
            let j = volume_flux(&s, &c, &gas(), &grid);
            let jv = volume_flux_from_vbar(&s, &c, &grid);
            let x = grid.centers();
            let e1 = (0..n)
                .map(|i| (j[i] - kappa * eps * x[i].cos() / (1.0 + eps * x[i].sin())).abs())
                .fold(0.0, f64::max);
            let e2 = (0..n).map(|i| (j[i] - jv[i]).abs()).fold(0.0, f64::max);
            (e1, e2)
        };
        let (a1, b1) = err(64);
        let (a2, b2) = err(128);
        assert!(((a1 / a2).log2() - 2.0).abs() < 0.1);
        assert!(((b1 / b2).log2() - 2.0).abs() < 0.2);
    }

    #[test]
    fn galilean_shift_moves_u_v_only() {
        let (grid, mut s) = sinusoidal(32, 0.1);
        let c = TransportCoefficients::new(0.1, 0.2, 0.3, 0.0).unwrap();
        let f0 = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        s.u_m.iter_mut().for_each(|u| *u += 2.5);
        let f1 = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        assert_eq!(f0.j_v_over_vbar, f1.j_v_over_vbar);
        for i in 0..32 {
            assert!((f1.u_v[i] - f0.u_v[i] - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_velocity_normal_stress() {
        let grid = Grid1D::new(16, 1.0, Boundary::Periodic).unwrap();
        let c = TransportCoefficients::new(0.7, 0.0, 0.0, 0.0).unwrap();
        let a = 1.3;
        // interior cells only: a linear field is not periodic
        let u: Vec<f64> = grid.centers().iter().map(|x| a * x).collect();
        let t = vec![1.0; 16];
        let pi = shear_stress(&u, &t, &c, &grid);
        for p in &pi[1..15] {
            assert!((p + 4.0 / 3.0 * 0.7 * a).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_rotation_tensor_has_no_stress() {
        let omega = 2.0;
        let g = Matrix3::new(0.0, omega, 0.0, -omega, 0.0, 0.0, 0.0, 0.0, 0.0);
        let pi = stress_tensor(&g, 1.0, 2.0 / 3.0);
        assert_eq!(pi, Matrix3::zeros());
    }

    #[test]
    fn uniform_temperature_entropic_flux_vanishes() {
        let (grid, s) = sinusoidal(32, 0.1);
        let c = TransportCoefficients::new(0.1, 0.4, 0.3, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        assert!(f.q_s.iter().all(|q| *q == 0.0));
        let d = s.derived_quantities(&gas()).unwrap();
        for i in 0..32 {
            let expect = -1.5 * d.pressure[i] / d.rho_bar[i] * f.j_v_over_vbar[i];
            assert!((f.q_prime[i] - expect).abs() < 1e-15);
            assert!(f.q_prime[i] != 0.0 || f.j_v_over_vbar[i] == 0.0);
        }
    }

    #[test]
    fn no_conduction_no_diffusion_no_heat_flux() {
        let (grid, mut s) = sinusoidal(32, 0.1);
        s.e_in = grid.centers().iter().map(|x| 1.5 + 0.1 * x.cos()).collect();
        let c = TransportCoefficients::new(0.1, 0.0, 0.0, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        assert!(f.q_prime.iter().all(|q| *q == 0.0));
    }

    #[test]
    fn cosine_temperature_entropic_flux() {
        let kh = 0.25;
        let eps = 0.1;
        let c = TransportCoefficients::new(0.0, kh, 0.0, 0.0).unwrap();
        let err = |n: usize| {
            let (grid, mut s) = sinusoidal(n, 0.0);
            let x = grid.centers();
            // T = T0 (1 + eps cos x) with T0 = 1, c_v = 1.5
            s.e_in = x.iter().map(|x| 1.5 * (1.0 + eps * x.cos())).collect();
            let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
            (0..n)
                .map(|i| (f.q_s[i] - kh * eps * x[i].sin()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(64) / err(128)).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn zero_volume_flux_gives_zero_production() {
        let (grid, mut s) = sinusoidal(32, 0.1);
        s.u_m = grid.centers().iter().map(|x| 0.1 * x.cos()).collect();
        let c = TransportCoefficients::new(0.1, 0.1, 0.0, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        let w = volume_production(&s, &f, &gas(), &grid).unwrap();
        assert!(w.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn vacuum_is_singular() {
        let (grid, s) = sinusoidal(16, 0.1);
        let c = TransportCoefficients::new(0.1, 0.1, 0.1, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        let mut bad = s.clone();
        bad.e_in[4] = 0.0;
        assert!(matches!(
            volume_production(&bad, &f, &gas(), &grid),
            Err(Error::InvalidState { cell: 4, .. })
        ));
    }

    #[test]
    fn combined_and_split_forms_agree() {
        let (grid, mut s) = sinusoidal(64, 0.2);
        s.u_m = grid.centers().iter().map(|x| 0.1 * x.cos()).collect();
        let c = TransportCoefficients::new(0.1, 0.1, 0.2, 0.0).unwrap();
        let f = compute_fluxes(&s, &c, &gas(), &grid).unwrap();
        let t = volume_production_terms(&s, &f, &gas(), &grid).unwrap();
        let comb = specific_volume_rate_combined(&s, &f, &gas(), &grid).unwrap();
        for i in 0..64 {
            let split = t.total()[i] - t.pressure_dilatation[i];
            assert!((split - comb[i]).abs() < 1e-14 * (1.0 + comb[i].abs()));
        }
    }
}
