//! Reference scales and the Knudsen-number ordering of entropy terms.
//!
//! Dimensional budget terms are divided by `(rho0 / M) C0^3 / L` and
//! integrated over `x* = x / L`. With the dimensionless fields and
//! coefficients held fixed, the result scales as `Kn^order` exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::entropy::EntropyBudget;
use super::loglog_slope;
use crate::constitutive::compute_fluxes;
use crate::error::{Error, Result};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScales {
    /// Mean free path `lambda`, m.
    pub mean_free_path: f64,
    /// Macroscopic length `L`, m.
    pub length: f64,
    /// Characteristic molecular speed `C0`, m/s.
    pub molecular_speed: f64,
    /// Reference density `rho0 = M a_n0`.
    pub density: f64,
    pub temperature: f64,
}

impl ReferenceScales {
    pub fn new(mean_free_path: f64, length: f64, molecular_speed: f64, density: f64, temperature: f64) -> Result<Self> {
        let s = Self {
            mean_free_path,
            length,
            molecular_speed,
            density,
            temperature,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mean_free_path", self.mean_free_path),
            ("length", self.length),
            ("molecular_speed", self.molecular_speed),
            ("density", self.density),
            ("temperature", self.temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn knudsen(&self) -> f64 {
        self.mean_free_path / self.length
    }

    /// Same scales with `lambda = kn L`.
    pub fn with_knudsen(mut self, kn: f64) -> Self {
        self.mean_free_path = kn * self.length;
        self
    }

    pub fn viscosity(&self) -> f64 {
        self.density * self.molecular_speed * self.mean_free_path
    }

    pub fn mass_diffusivity(&self) -> f64 {
        self.viscosity() / self.density
    }

    pub fn time(&self) -> f64 {
        self.mean_free_path / self.molecular_speed
    }

    pub fn conductivity(&self) -> f64 {
        self.viscosity() * self.molecular_speed.powi(2) / self.temperature
    }

    /// Reference entropy per unit mass, `lambda^3 / (L T0 t0^2)`.
    pub fn entropy(&self) -> f64 {
        self.mean_free_path.powi(3) / (self.length * self.temperature * self.time().powi(2))
    }

    /// Scale of the dimensional rate `A_n T Ds/Dt`: `(rho0 / M) C0^3 / L`.
    pub fn entropy_rate(&self, gas: &GasModel) -> f64 {
        self.density / gas.molecular_mass * self.molecular_speed.powi(3) / self.length
    }

    /// Dimensional coefficients from dimensionless ones.
    pub fn coefficients(&self, mu: f64, kappa_h: f64, kappa_m: f64) -> Result<TransportCoefficients> {
        TransportCoefficients::new(
            mu * self.viscosity(),
            kappa_h * self.conductivity(),
            kappa_m * self.mass_diffusivity(),
            0.0,
        )
    }
}

/// Fixed dimensionless 1D fields on `x* in [0, 1)`:
/// `rho* = 1 + a sin(2 pi x*)`, `U* = b cos(2 pi x* + 0.6)`,
/// `T* = 1 + c sin(2 pi x* + 1.7)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessProfile {
    pub density_amplitude: f64,
    pub velocity_amplitude: f64,
    pub temperature_amplitude: f64,
}

impl Default for DimensionlessProfile {
    fn default() -> Self {
        Self {
            density_amplitude: 0.2,
            velocity_amplitude: 0.3,
            temperature_amplitude: 0.1,
        }
    }
}

impl DimensionlessProfile {
    pub fn state(&self, scales: &ReferenceScales, gas: &GasModel, grid: &Grid1D) -> Result<FlowState> {
        let mut rho = Vec::with_capacity(grid.n_cells);
        let mut u = Vec::with_capacity(grid.n_cells);
        let mut e = Vec::with_capacity(grid.n_cells);
        for x in grid.centers() {
            let xs = 2.0 * PI * x / grid.length;
            rho.push(scales.density * (1.0 + self.density_amplitude * xs.sin()));
            u.push(scales.molecular_speed * self.velocity_amplitude * (xs + 0.6).cos());
            e.push(gas.cv * scales.temperature * (1.0 + self.temperature_amplitude * (xs + 1.7).sin()));
        }
        FlowState::compatible(gas, &rho, &u, &e)
    }
}

/// Dimensionless coefficients `mu*, kappa_h*, kappa_m*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarredCoefficients {
    pub mu: f64,
    pub kappa_h: f64,
    pub kappa_m: f64,
}

impl Default for StarredCoefficients {
    fn default() -> Self {
        Self {
            mu: 1.0,
            kappa_h: 1.0,
            kappa_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnudsenPoint {
    pub scales: ReferenceScales,
    pub budget: EntropyBudget,
}

/// Volume budget of the fixed profile at the Knudsen number of `scales`.
pub fn kn_sweep_point(
    profile: &DimensionlessProfile,
    scales: &ReferenceScales,
    starred: &StarredCoefficients,
    gas: &GasModel,
    n_cells: usize,
) -> Result<KnudsenPoint> {
    let grid = Grid1D::periodic(n_cells, scales.length)?;
    let coeffs = scales.coefficients(starred.mu, starred.kappa_h, starred.kappa_m)?;
    let state = profile.state(scales, gas, &grid)?;
    let fluxes = compute_fluxes(&state, &coeffs, gas, &grid)?;
    let budget = super::entropy::entropy_budget_volume(&state, &fluxes, &coeffs, gas, &grid)?;
    Ok(KnudsenPoint {
        scales: *scales,
        budget,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermScaling {
    pub name: &'static str,
    pub expected_order: u32,
    /// Dimensionless integrated magnitudes, in the order of `kn`.
    pub magnitudes: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnudsenDecomposition {
    /// Ascending.
    pub kn: Vec<f64>,
    pub terms: Vec<TermScaling>,
}

impl KnudsenDecomposition {
    pub fn term(&self, name: &str) -> Option<&TermScaling> {
        self.terms.iter().find(|t| t.name == name)
    }
}

pub const MIN_SWEEP_POINTS: usize = 4;

/// Nondimensionalizes every Kn-tagged term and fits its log-log slope.
pub fn knudsen_decomposition(points: &[KnudsenPoint], gas: &GasModel) -> Result<KnudsenDecomposition> {
    if points.len() < MIN_SWEEP_POINTS {
        return Err(Error::InsufficientData(format!(
            "Knudsen fit needs at least {MIN_SWEEP_POINTS} sweep points, got {}",
            points.len()
        )));
    }
    let mut sorted: Vec<&KnudsenPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.scales.knudsen().total_cmp(&b.scales.knudsen()));
    let kn: Vec<f64> = sorted.iter().map(|p| p.scales.knudsen()).collect();

    let mut terms = Vec::new();
    for (k, term) in sorted[0].budget.terms.iter().enumerate() {
        let Some(order) = term.knudsen_order else { continue };
        let magnitudes: Vec<f64> = sorted
            .iter()
            .map(|p| {
                let t = &p.budget.terms[k];
                t.magnitude / p.scales.length / p.scales.entropy_rate(gas)
            })
            .collect();
        let slope = loglog_slope(&kn, &magnitudes)?;
        terms.push(TermScaling {
            name: term.name,
            expected_order: order,
            magnitudes,
            slope,
        });
    }
    Ok(KnudsenDecomposition { kn, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::entropy::{HEAT, JV_JV, NSF_SHEAR};

    fn base() -> ReferenceScales {
        ReferenceScales::new(1e-3, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn derived_scales() {
        let s = ReferenceScales::new(2e-3, 0.5, 3.0, 1.5, 2.0).unwrap();
        assert_eq!(s.knudsen(), 2e-3 / 0.5);
        assert!((s.viscosity() - 1.5 * 3.0 * 2e-3).abs() < 1e-15);
        assert!((s.mass_diffusivity() - 3.0 * 2e-3).abs() < 1e-15);
        assert!((s.conductivity() - s.viscosity() * 9.0 / 2.0).abs() < 1e-15);
        // s0 / lambda^3 = 1 / (L T0 t0^2)
        let lhs = s.entropy() / 2e-3f64.powi(3);
        assert!((lhs - 1.0 / (0.5 * 2.0 * s.time().powi(2))).abs() < 1e-9 * lhs);
        assert!(ReferenceScales::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn slopes_are_integer_orders() {
        let gas = GasModel::default();
        let points: Vec<KnudsenPoint> = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
            .iter()
            .map(|&kn| {
                kn_sweep_point(
                    &DimensionlessProfile::default(),
                    &base().with_knudsen(kn),
                    &StarredCoefficients::default(),
                    &gas,
                    64,
                )
                .unwrap()
            })
            .collect();
        let d = knudsen_decomposition(&points, &gas).unwrap();
        assert_eq!(d.terms.len(), 5);
        for t in &d.terms {
            assert!((t.slope - t.expected_order as f64).abs() < 1e-8, "{} {}", t.name, t.slope);
        }
        // the nondimensional heat and shear magnitudes equal Kn times an O(1) number
        for name in [HEAT, NSF_SHEAR] {
            let t = d.term(name).unwrap();
            let c = t.magnitudes[0] / d.kn[0];
            assert!(c > 1e-3 && c < 1e3, "{name}: {c}");
        }
        assert!(d.term(JV_JV).unwrap().magnitudes[4] < d.term(NSF_SHEAR).unwrap().magnitudes[4]);
        assert!(matches!(
            knudsen_decomposition(&points[..3], &gas),
            Err(Error::InsufficientData(_))
        ));
    }
}
