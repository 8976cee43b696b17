//! Manufactured traveling-wave solutions and the forcing that makes them exact.
//!
//! Every field is a function of `xi = x - c t`, so `d/dt = -c d/dx`. The
//! forcing is `dQ*/dt - R(Q*)`, where `R` is the continuous right-hand side
//! evaluated pointwise with Taylor jets. Nothing here touches the stencils.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::ConvergenceReport;
use crate::error::{Error, Result};
use crate::governing::{ConservedFields, Model, ModelVariant, StateDerivative};
use crate::jet::Jet;
use crate::solver::{run_forced, IntegratorConfig};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};

/// Order of the Taylor jets; the deepest chain of derivatives is four.
pub const JET_ORDER: usize = 7;
type J = Jet<JET_ORDER>;

/// Fields of the form `base (1 + amp sin(k xi + phase))`, except velocity,
/// which is `base + amp cos(k xi + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedProfile {
    pub length: f64,
    pub wave_speed: f64,
    pub rho0: f64,
    pub rho_amp: f64,
    pub u0: f64,
    pub u_amp: f64,
    pub t0: f64,
    pub t_amp: f64,
    /// Relative amplitude of the volume fraction `a_n v_bar` (full model only).
    pub phi_amp: f64,
}

impl Default for ManufacturedProfile {
    fn default() -> Self {
        Self {
            length: 1.0,
            wave_speed: 0.3,
            rho0: 1.0,
            rho_amp: 0.1,
            u0: 0.2,
            u_amp: 0.1,
            t0: 1.0,
            t_amp: 0.08,
            phi_amp: 0.05,
        }
    }
}

/// Pointwise primitive fields as jets in `x`.
#[derive(Debug, Clone, Copy)]
pub struct JetFields<const N: usize> {
    /// Number-mass density `M a_n`.
    pub rho: Jet<N>,
    pub u: Jet<N>,
    pub temperature: Jet<N>,
    /// `a_n v_bar`; identically one outside the full model.
    pub phi: Jet<N>,
}

impl ManufacturedProfile {
    pub fn validate(&self) -> Result<()> {
        let positive = [("length", self.length), ("rho0", self.rho0), ("t0", self.t0)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        for (name, v) in [("rho_amp", self.rho_amp), ("t_amp", self.t_amp), ("phi_amp", self.phi_amp)] {
            if !(v.abs() < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("relative amplitude must be below 1, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn jets<const N: usize>(&self, x: f64, t: f64, variant: ModelVariant) -> JetFields<N> {
        let k = 2.0 * PI / self.length;
        let xi = Jet::<N>::variable(x) - self.wave_speed * t;
        let wave = |phase: f64| (xi * k + phase).sin_cos();
        let (s_rho, _) = wave(0.0);
        let (_, c_u) = wave(0.7);
        let (s_t, _) = wave(1.9);
        let (_, c_phi) = wave(2.6);
        let phi = if variant.advances_volume() {
            c_phi * self.phi_amp + 1.0
        } else {
            Jet::constant(1.0)
        };
        JetFields {
            rho: (s_rho * self.rho_amp + 1.0) * self.rho0,
            u: c_u * self.u_amp + self.u0,
            temperature: (s_t * self.t_amp + 1.0) * self.t0,
            phi,
        }
    }

    /// Exact primitive state at time `t` on the cell centers of `grid`.
    pub fn state(&self, variant: ModelVariant, gas: &GasModel, grid: &Grid1D, t: f64) -> Result<FlowState> {
        let m = gas.molecular_mass;
        let mut a_n = Vec::with_capacity(grid.n_cells);
        let mut v_bar = Vec::with_capacity(grid.n_cells);
        let mut u_m = Vec::with_capacity(grid.n_cells);
        let mut e_in = Vec::with_capacity(grid.n_cells);
        for x in grid.centers() {
            let f = self.jets::<1>(x, t, variant);
            let a = f.rho.value() / m;
            a_n.push(a);
            v_bar.push(f.phi.value() / a);
            u_m.push(f.u.value());
            e_in.push(gas.cv * f.temperature.value());
        }
        let s = FlowState::new(a_n, v_bar, u_m, e_in)?;
        s.validate().into_result()?;
        Ok(s)
    }

    /// Forcing that turns the profile into an exact solution of `variant`.
    pub fn source(
        &self,
        variant: ModelVariant,
        coeffs: &TransportCoefficients,
        gas: &GasModel,
        grid: &Grid1D,
        t: f64,
    ) -> StateDerivative {
        let n = grid.n_cells;
        let mut out = ConservedFields::zeros(n, variant.advances_volume());
        for (i, x) in grid.centers().into_iter().enumerate() {
            let f = self.jets::<JET_ORDER>(x, t, variant);
            let q = conserved_jets(variant, &f, coeffs, gas);
            let r = continuous_rhs(variant, &f, coeffs, gas);
            let dt = |q: &J| -self.wave_speed * q.derivative(1);
            out.mass[i] = dt(&q[0]) - r[0];
            out.momentum[i] = dt(&q[1]) - r[1];
            out.energy[i] = dt(&q[2]) - r[2];
            if let Some(v) = out.volume.as_mut() {
                v[i] = dt(&q[3]) - r[3];
            }
        }
        out
    }
}

struct Closure<const N: usize> {
    p: Jet<N>,
    j: Jet<N>,
    u_v: Jet<N>,
    pi: Jet<N>,
    dyadic: Jet<N>,
    energy: Jet<N>,
}

fn closure<const N: usize>(
    variant: ModelVariant,
    f: &JetFields<N>,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
) -> Closure<N> {
    let full = variant.advances_volume();
    let kappa_m = match variant {
        ModelVariant::BivelocityReduced | ModelVariant::VolumeFull => coeffs.kappa_m,
        _ => 0.0,
    };
    let rho_bar = f.rho / f.phi;
    let e = f.temperature * gas.cv;
    let p = rho_bar * e * (2.0 / 3.0);
    let j = rho_bar.deriv() / rho_bar * kappa_m;
    let u_v = f.u + j;
    let mu = if coeffs.viscosity_exponent == 0.0 {
        Jet::constant(coeffs.mu)
    } else {
        (f.temperature / coeffs.reference_temperature).powf(coeffs.viscosity_exponent) * coeffs.mu
    };
    let pi = -(mu * (4.0 / 3.0)) * u_v.deriv();
    let dyadic = if full { f.rho * j * j } else { Jet::constant(0.0) };
    let energy = f.rho * (f.u * f.u * 0.5 + e) - dyadic * 0.5;
    Closure {
        p,
        j,
        u_v,
        pi,
        dyadic,
        energy,
    }
}

/// Conservative variables `[rho, rho U, E, phi]` as jets.
pub fn conserved_jets<const N: usize>(
    variant: ModelVariant,
    f: &JetFields<N>,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
) -> [Jet<N>; 4] {
    let c = closure(variant, f, coeffs, gas);
    [f.rho, f.rho * f.u, c.energy, f.phi]
}

/// Continuous conservative right-hand side `[mass, momentum, energy, phi]`
/// at the jet's expansion point.
pub fn continuous_rhs<const N: usize>(
    variant: ModelVariant,
    f: &JetFields<N>,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
) -> [f64; 4] {
    let c = closure(variant, f, coeffs, gas);
    let klim = match variant {
        ModelVariant::Klimontovich => coeffs.kappa_klim,
        _ => 0.0,
    };
    let rho = f.rho;
    let u = f.u;
    let mom = rho * u;
    let stress = f.phi * (c.p + c.pi) - c.dyadic;

    let mass_flux = mom - rho.deriv() * klim;
    let mom_flux = mom * u + stress - mom.deriv() * klim;
    let en_flux = c.energy * u + stress * c.u_v
        - f.phi * f.temperature.deriv() * coeffs.kappa_h
        - c.energy.deriv() * klim;

    let mut out = [
        -mass_flux.derivative(1),
        -mom_flux.derivative(1),
        -en_flux.derivative(1),
        0.0,
    ];
    if variant.advances_volume() {
        let phi_j = f.phi * c.j;
        // p a_n W = rho j^2 U_x + phi Pi j_x + p (phi j)_x - (S j)_x
        let production = rho * c.j * c.j * u.deriv() + f.phi * c.pi * c.j.deriv() + c.p * phi_j.deriv()
            - (stress * c.j).deriv();
        out[3] = -(f.phi * c.u_v).derivative(1) + production.value() / c.p.value();
    }
    out
}

/// Max-norm error of the forced solver against the exact profile at
/// `config.t_end`, per resolution, with the fitted order.
pub fn solver_convergence(
    variant: ModelVariant,
    profile: &ManufacturedProfile,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    resolutions: &[usize],
    config: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    profile.validate()?;
    let mut spacing = Vec::new();
    let mut error = Vec::new();
    for &n in resolutions {
        let grid = Grid1D::periodic(n, profile.length)?;
        let model = Model::new(variant, *gas, *coeffs, grid);
        let init = profile.state(variant, gas, &grid, 0.0)?;
        let source = |t: f64| profile.source(variant, coeffs, gas, &grid, t);
        let tr = run_forced(&model, &init, config, Some(&source))?;
        let exact = profile.state(variant, gas, &grid, tr.final_time)?;
        let s = &tr.final_state;
        let worst = (0..n)
            .flat_map(|i| {
                [
                    s.a_n[i] - exact.a_n[i],
                    s.v_bar[i] - exact.v_bar[i],
                    s.u_m[i] - exact.u_m[i],
                    s.e_in[i] - exact.e_in[i],
                ]
            })
            .fold(0.0f64, |w, d| w.max(d.abs()));
        spacing.push(grid.dx);
        error.push(worst);
    }
    Ok(ConvergenceReport::new(resolutions.to_vec(), spacing, error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::governing::rhs;

    fn setup() -> (GasModel, TransportCoefficients, ManufacturedProfile) {
        (
            GasModel::monatomic(1.0, 1.0).unwrap(),
            TransportCoefficients::new(0.02, 0.03, 0.015, 0.01).unwrap(),
            ManufacturedProfile::default(),
        )
    }

    #[test]
    fn discrete_rhs_converges_to_continuous_rhs() {
        let (gas, coeffs, prof) = setup();
        for v in ModelVariant::ALL {
            let err = |n: usize| {
                let grid = Grid1D::periodic(n, prof.length).unwrap();
                let s = prof.state(v, &gas, &grid, 0.0).unwrap();
                let d = rhs(v, &s, &coeffs, &gas, &grid).unwrap();
                let mut worst: f64 = 0.0;
                for (i, x) in grid.centers().into_iter().enumerate() {
                    let f = prof.jets::<JET_ORDER>(x, 0.0, v);
                    let r = continuous_rhs(v, &f, &coeffs, &gas);
                    worst = worst.max((d.mass[i] - r[0]).abs());
                    worst = worst.max((d.momentum[i] - r[1]).abs());
                    worst = worst.max((d.energy[i] - r[2]).abs());
                    if let Some(vol) = &d.volume {
                        worst = worst.max((vol[i] - r[3]).abs());
                    }
                }
                worst
            };
            let order = (err(64) / err(128)).log2();
            assert!((order - 2.0).abs() < 0.2, "{v}: order {order}");
        }
    }

    #[test]
    fn uniform_profile_has_zero_source() {
        let (gas, coeffs, _) = setup();
        let prof = ManufacturedProfile {
            rho_amp: 0.0,
            u_amp: 0.0,
            t_amp: 0.0,
            phi_amp: 0.0,
            ..Default::default()
        };
        let grid = Grid1D::periodic(16, 1.0).unwrap();
        for v in ModelVariant::ALL {
            let s = prof.source(v, &coeffs, &gas, &grid, 0.4);
            assert!(s.components().all(|c| c.iter().all(|x| x.abs() < 1e-13)), "{v}");
        }
    }

    #[test]
    fn inviscid_mass_source_matches_closed_form() {
        // rho_t + (rho U)_x with rho = rho0 (1 + a sin k xi), U = u0 + b cos(k xi + 0.7)
        let gas = GasModel::default();
        let prof = ManufacturedProfile::default();
        let grid = Grid1D::periodic(8, prof.length).unwrap();
        let s = prof.source(ModelVariant::NsfBaseline, &TransportCoefficients::zero(), &gas, &grid, 0.0);
        let k = 2.0 * PI / prof.length;
        for (i, x) in grid.centers().into_iter().enumerate() {
            let rho = prof.rho0 * (1.0 + prof.rho_amp * (k * x).sin());
            let drho = prof.rho0 * prof.rho_amp * k * (k * x).cos();
            let u = prof.u0 + prof.u_amp * (k * x + 0.7).cos();
            let du = -prof.u_amp * k * (k * x + 0.7).sin();
            let expected = -prof.wave_speed * drho + drho * u + rho * du;
            assert!((s.mass[i] - expected).abs() < 1e-13);
        }
    }
}
