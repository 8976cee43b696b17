//! Gas model, transport coefficients, grid and flow state.
//!
//! The state is stored as one array per field. `a_n` is the reduced
//! probability (number) density, `v_bar` the mean empty volume per molecule,
//! `u_m` the mass velocity and `e_in` the specific internal energy. The
//! physical mass density is `M / v_bar`; pressure and temperature follow
//! the monatomic kinetic closures `3p = 2 rho e_in` and `e_in = c_v T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monatomic ideal gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    /// Molecular mass `M`. Only ratios involving `M` matter.
    pub molecular_mass: f64,
    /// Specific gas constant `R` in J/(kg K).
    pub gas_constant: f64,
    /// Specific heat at constant volume, `(3/2) R`.
    pub cv: f64,
}

impl GasModel {
    pub fn monatomic(molecular_mass: f64, gas_constant: f64) -> Result<Self> {
        if !(molecular_mass > 0.0 && molecular_mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "molecular_mass",
                reason: format!("must be positive and finite, got {molecular_mass}"),
            });
        }
        if !(gas_constant > 0.0 && gas_constant.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gas_constant",
                reason: format!("must be positive and finite, got {gas_constant}"),
            });
        }
        Ok(Self {
            molecular_mass,
            gas_constant,
            cv: 1.5 * gas_constant,
        })
    }

    /// Ratio of specific heats, 5/3 for the monatomic closure.
    pub fn gamma(&self) -> f64 {
        1.0 + self.gas_constant / self.cv
    }

    pub fn temperature(&self, e_in: f64) -> f64 {
        e_in / self.cv
    }

    /// Kinetic pressure `p = (2/3) rho e_in`.
    pub fn pressure(&self, rho: f64, e_in: f64) -> f64 {
        2.0 / 3.0 * rho * e_in
    }

    pub fn sound_speed(&self, temperature: f64) -> f64 {
        (self.gamma() * self.gas_constant * temperature).sqrt()
    }
}

impl Default for GasModel {
    fn default() -> Self {
        Self::monatomic(1.0, 1.0).expect("unit gas is valid")
    }
}

/// Transport coefficients of all model variants.
///
/// The bulk-like coefficient `eta` is not an input: it is pinned to
/// `(2/3) mu` so the stress tensor stays trace-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportCoefficients {
    /// Dynamic viscosity at the reference temperature.
    pub mu: f64,
    /// `(2/3) mu`.
    pub eta: f64,
    /// Heat conductivity (absolute, W/(m K)).
    pub kappa_h: f64,
    /// Mass-density (volume) diffusion coefficient, m^2/s.
    pub kappa_m: f64,
    /// Spatial diffusivity of the Klimontovich model, m^2/s.
    pub kappa_klim: f64,
    /// Power-law exponent `s` in `mu(T) = mu (T / T_ref)^s`. Zero means constant.
    pub viscosity_exponent: f64,
    pub reference_temperature: f64,
}

impl TransportCoefficients {
    pub fn new(mu: f64, kappa_h: f64, kappa_m: f64, kappa_klim: f64) -> Result<Self> {
        for (name, value) in [
            ("mu", mu),
            ("kappa_h", kappa_h),
            ("kappa_m", kappa_m),
            ("kappa_klim", kappa_klim),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative and finite, got {value}"),
                });
            }
        }
        Ok(Self {
            mu,
            eta: 2.0 / 3.0 * mu,
            kappa_h,
            kappa_m,
            kappa_klim,
            viscosity_exponent: 0.0,
            reference_temperature: 1.0,
        })
    }

    /// Inviscid, non-conducting coefficients.
    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0).expect("zero coefficients are valid")
    }

    pub fn with_power_law(mut self, exponent: f64, reference_temperature: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "viscosity_exponent",
                reason: format!("must be finite, got {exponent}"),
            });
        }
        if !(reference_temperature > 0.0 && reference_temperature.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "reference_temperature",
                reason: format!("must be positive, got {reference_temperature}"),
            });
        }
        self.viscosity_exponent = exponent;
        self.reference_temperature = reference_temperature;
        Ok(self)
    }

    pub fn with_kappa_m(mut self, kappa_m: f64) -> Self {
        self.kappa_m = kappa_m;
        self
    }

    pub fn with_kappa_klim(mut self, kappa_klim: f64) -> Self {
        self.kappa_klim = kappa_klim;
        self
    }

    /// Viscosity at temperature `t`.
    pub fn viscosity(&self, t: f64) -> f64 {
        if self.viscosity_exponent == 0.0 {
            self.mu
        } else {
            self.mu * (t / self.reference_temperature).powf(self.viscosity_exponent)
        }
    }

    /// Coefficient of the normal stress in 1D: `2 mu - eta = (4/3) mu`.
    pub fn normal_stress_factor(&self, t: f64) -> f64 {
        let mu = self.viscosity(t);
        2.0 * mu - 2.0 / 3.0 * mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// Zero normal mass velocity, zero normal gradient of scalars.
    Reflective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_cells: usize,
    pub dx: f64,
    pub length: f64,
    pub bc: Boundary,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 8;

    pub fn new(n_cells: usize, length: f64, bc: Boundary) -> Result<Self> {
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidParameter {
                name: "n_cells",
                reason: format!("need at least {} cells, got {n_cells}", Self::MIN_CELLS),
            });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("must be positive, got {length}"),
            });
        }
        Ok(Self {
            n_cells,
            dx: length / n_cells as f64,
            length,
            bc,
        })
    }

    pub fn periodic(n_cells: usize, length: f64) -> Result<Self> {
        Self::new(n_cells, length, Boundary::Periodic)
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.cell_center(i)).collect()
    }

    /// Trapezoid-free cell sum `sum_i f_i dx`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx
    }
}

/// A field that failed the positivity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    ANumber,
    VBar,
    UM,
    EIn,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::ANumber => "a_n",
            Field::VBar => "v_bar",
            Field::UM => "u_m",
            Field::EIn => "e_in",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub cell: usize,
    pub field: Field,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidState {
                cell: v.cell,
                field: v.field,
                value: v.value,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub a_n: Vec<f64>,
    pub v_bar: Vec<f64>,
    pub u_m: Vec<f64>,
    pub e_in: Vec<f64>,
}

/// Per-cell thermodynamic fields derived from a [`FlowState`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub rho_bar: Vec<f64>,
    pub pressure: Vec<f64>,
    pub temperature: Vec<f64>,
}

impl FlowState {
    pub fn new(a_n: Vec<f64>, v_bar: Vec<f64>, u_m: Vec<f64>, e_in: Vec<f64>) -> Result<Self> {
        let n = a_n.len();
        if v_bar.len() != n || u_m.len() != n || e_in.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: [v_bar.len(), u_m.len(), e_in.len()]
                    .into_iter()
                    .find(|&l| l != n)
                    .unwrap_or(n),
            });
        }
        Ok(Self { a_n, v_bar, u_m, e_in })
    }

    /// State with `M a_n = rho_bar = M / v_bar`, built from mass density,
    /// velocity and internal energy.
    pub fn compatible(gas: &GasModel, rho: &[f64], u_m: &[f64], e_in: &[f64]) -> Result<Self> {
        let a_n: Vec<f64> = rho.iter().map(|r| r / gas.molecular_mass).collect();
        let v_bar = a_n.iter().map(|a| 1.0 / a).collect();
        Self::new(a_n, v_bar, u_m.to_vec(), e_in.to_vec())
    }

    pub fn uniform(n: usize, gas: &GasModel, rho: f64, u: f64, temperature: f64) -> Self {
        let e = gas.cv * temperature;
        Self::compatible(gas, &vec![rho; n], &vec![u; n], &vec![e; n])
            .expect("uniform fields have matching lengths")
    }

    pub fn len(&self) -> usize {
        self.a_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_n.is_empty()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for i in 0..self.len() {
            for (field, value, positive) in [
                (Field::ANumber, self.a_n[i], true),
                (Field::VBar, self.v_bar[i], true),
                (Field::UM, self.u_m[i], false),
                (Field::EIn, self.e_in[i], true),
            ] {
                let bad = if positive {
                    !(value > 0.0 && value.is_finite())
                } else {
                    !value.is_finite()
                };
                if bad {
                    violations.push(Violation { cell: i, field, value });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn rho_bar(&self, gas: &GasModel) -> Vec<f64> {
        self.v_bar.iter().map(|v| gas.molecular_mass / v).collect()
    }

    /// `M a_n`, the mass density carried by the number density.
    pub fn number_mass_density(&self, gas: &GasModel) -> Vec<f64> {
        self.a_n.iter().map(|a| gas.molecular_mass * a).collect()
    }

    pub fn derived_quantities(&self, gas: &GasModel) -> Result<DerivedFields> {
        self.validate().into_result()?;
        let rho_bar = self.rho_bar(gas);
        let pressure = rho_bar
            .iter()
            .zip(&self.e_in)
            .map(|(r, e)| gas.pressure(*r, *e))
            .collect();
        let temperature = self.e_in.iter().map(|e| gas.temperature(*e)).collect();
        Ok(DerivedFields {
            rho_bar,
            pressure,
            temperature,
        })
    }

    /// Largest `|M a_n v_bar / M - 1|` over the grid: drift from the
    /// compatible initialization of the full volume model.
    pub fn compatibility_drift(&self) -> f64 {
        self.a_n
            .iter()
            .zip(&self.v_bar)
            .map(|(a, v)| (a * v - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
