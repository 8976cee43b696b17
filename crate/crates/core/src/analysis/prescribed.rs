//! Pointwise evaluation of the volume-model entropy terms on closed-form
//! 2D fields (no time stepping).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::knudsen::{ReferenceScales, StarredCoefficients};
use crate::constitutive::{entropic_heat_flux_vector, stress_tensor};
use crate::error::{Error, Result};
use crate::state::{GasModel, TransportCoefficients};

/// Closed-form planar fields with the derivatives the closures need.
/// Velocity gradients are `G[(i, j)] = dU_i / dx_j`.
pub trait AnalyticField2D {
    fn density(&self, x: f64, y: f64) -> f64;
    fn density_gradient(&self, x: f64, y: f64) -> Vector2<f64>;
    /// Needed for `grad(J_v / v)`; `None` if the field cannot supply it.
    fn density_hessian(&self, _x: f64, _y: f64) -> Option<Matrix2<f64>> {
        None
    }
    fn velocity(&self, x: f64, y: f64) -> Vector2<f64>;
    fn velocity_gradient(&self, x: f64, y: f64) -> Matrix2<f64>;
    fn temperature(&self, x: f64, y: f64) -> f64;
    fn temperature_gradient(&self, x: f64, y: f64) -> Vector2<f64>;
}

/// Isothermal rigid rotation `U = Omega (-y, x)` in centrifugal balance,
/// `rho = rho0 exp(Omega^2 r^2 / (2 R T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation {
    pub omega: f64,
    pub central_density: f64,
    pub temperature: f64,
    pub gas_constant: f64,
}

impl RigidRotation {
    fn a(&self) -> f64 {
        self.omega * self.omega / (self.gas_constant * self.temperature)
    }
}

impl AnalyticField2D for RigidRotation {
    fn density(&self, x: f64, y: f64) -> f64 {
        self.central_density * (0.5 * self.a() * (x * x + y * y)).exp()
    }

    fn density_gradient(&self, x: f64, y: f64) -> Vector2<f64> {
        self.density(x, y) * self.a() * Vector2::new(x, y)
    }

    fn density_hessian(&self, x: f64, y: f64) -> Option<Matrix2<f64>> {
        let a = self.a();
        let r = Vector2::new(x, y);
        Some(self.density(x, y) * (a * Matrix2::identity() + a * a * r * r.transpose()))
    }

    fn velocity(&self, x: f64, y: f64) -> Vector2<f64> {
        self.omega * Vector2::new(-y, x)
    }

    fn velocity_gradient(&self, _x: f64, _y: f64) -> Matrix2<f64> {
        Matrix2::new(0.0, -self.omega, self.omega, 0.0)
    }

    fn temperature(&self, _x: f64, _y: f64) -> f64 {
        self.temperature
    }

    fn temperature_gradient(&self, _x: f64, _y: f64) -> Vector2<f64> {
        Vector2::zeros()
    }
}

/// Uniform `n x n` sample of `[-half_width, half_width]^2` (cell centers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid2D {
    pub n: usize,
    pub half_width: f64,
}

impl SampleGrid2D {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| -self.half_width + (i as f64 + 0.5) * h).collect()
    }
}

/// Term values on the sample grid, row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PrescribedEvaluation {
    pub sample: SampleGrid2D,
    /// Largest entry of `Pi_Um` over the sample.
    pub pi_um_max: f64,
    pub pi_jv_max: f64,
    /// Largest component of the entropic heat flux.
    pub q_s_max: f64,
    /// `-(A_n/rho) Pi_Um : grad U_m`
    pub nsf_shear: Vec<f64>,
    /// `-(A_n/rho) Pi_Um : grad(J_v / v)`
    pub cross_um_jv: Vec<f64>,
    /// `-(A_n/rho) Pi_Jv : grad U_m`
    pub cross_jv_um: Vec<f64>,
    /// `-(A_n/rho) Pi_Jv : grad(J_v / v)`
    pub jv_jv: Vec<f64>,
}

impl PrescribedEvaluation {
    /// `sum values * h^2`.
    pub fn integral(&self, values: &[f64]) -> f64 {
        let h = self.sample.spacing();
        values.iter().sum::<f64>() * h * h
    }
}

fn embed(m: &Matrix2<f64>) -> Matrix3<f64> {
    Matrix3::new(m[(0, 0)], m[(0, 1)], 0.0, m[(1, 0)], m[(1, 1)], 0.0, 0.0, 0.0, 0.0)
}

/// Evaluates the closures and the four stress-work terms of the volume
/// budget at every sample point. Density and mean-empty-volume fields are
/// taken compatible, so `A_n / rho_bar = 1 / M`.
pub fn prescribed_field_evaluator(
    field: &dyn AnalyticField2D,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    sample: SampleGrid2D,
) -> Result<PrescribedEvaluation> {
    let xs = sample.coordinates();
    let cap = sample.n * sample.n;
    let mut out = PrescribedEvaluation {
        sample,
        pi_um_max: 0.0,
        pi_jv_max: 0.0,
        q_s_max: 0.0,
        nsf_shear: Vec::with_capacity(cap),
        cross_um_jv: Vec::with_capacity(cap),
        cross_jv_um: Vec::with_capacity(cap),
        jv_jv: Vec::with_capacity(cap),
    };
    let weight = 1.0 / gas.molecular_mass;
    for &y in &xs {
        for &x in &xs {
            let rho = field.density(x, y);
            let g = field.density_gradient(x, y);
            let h = field.density_hessian(x, y).ok_or_else(|| {
                Error::Unsupported("field does not supply the density Hessian needed for grad(J_v/v)".into())
            })?;
            let t = field.temperature(x, y);
            let mu = coeffs.viscosity(t);
            let eta = 2.0 / 3.0 * mu;
            // j = kappa_m grad(rho)/rho, grad j = kappa_m (H/rho - g g^T / rho^2)
            let grad_j = coeffs.kappa_m * (h / rho - g * g.transpose() / (rho * rho));
            let grad_u = embed(&field.velocity_gradient(x, y));
            let grad_j = embed(&grad_j);
            let pi_um = stress_tensor(&grad_u, mu, eta);
            let pi_jv = stress_tensor(&grad_j, mu, eta);
            let gt = field.temperature_gradient(x, y);
            let q_s = entropic_heat_flux_vector(coeffs.kappa_h, rho, &Vector3::new(gt.x, gt.y, 0.0));

            out.pi_um_max = out.pi_um_max.max(pi_um.amax());
            out.pi_jv_max = out.pi_jv_max.max(pi_jv.amax());
            out.q_s_max = out.q_s_max.max(q_s.amax());
            out.nsf_shear.push(-weight * pi_um.dot(&grad_u));
            out.cross_um_jv.push(-weight * pi_um.dot(&grad_j));
            out.cross_jv_um.push(-weight * pi_jv.dot(&grad_u));
            out.jv_jv.push(-weight * pi_jv.dot(&grad_j));
        }
    }
    Ok(out)
}

/// Rigid rotation at fixed dimensionless angular speed `omega* = Omega L / C0`,
/// evaluated on `[-L/2, L/2]^2` with coefficients scaled by `scales`.
pub fn rigid_rotation_point(
    scales: &ReferenceScales,
    omega_star: f64,
    starred: &StarredCoefficients,
    gas: &GasModel,
    n: usize,
) -> Result<PrescribedEvaluation> {
    let field = RigidRotation {
        omega: omega_star * scales.molecular_speed / scales.length,
        central_density: scales.density,
        temperature: scales.temperature,
        gas_constant: gas.gas_constant,
    };
    let coeffs = scales.coefficients(starred.mu, starred.kappa_h, starred.kappa_m)?;
    prescribed_field_evaluator(
        &field,
        &coeffs,
        gas,
        SampleGrid2D {
            n,
            half_width: 0.5 * scales.length,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(omega: f64) -> RigidRotation {
        RigidRotation {
            omega,
            central_density: 1.2,
            temperature: 1.5,
            gas_constant: 1.0,
        }
    }

    #[test]
    fn centrifugal_balance() {
        // isothermal: R T grad(rho) = rho Omega^2 r
        let f = rotation(0.7);
        let (x, y) = (0.3, -0.4);
        let lhs = 1.5 * f.density_gradient(x, y);
        let rhs = f.density(x, y) * 0.49 * Vector2::new(x, y);
        assert!((lhs - rhs).norm() < 1e-14);
        // Hessian against central differences of the gradient
        let eps = 1e-6;
        let h = f.density_hessian(x, y).unwrap();
        let dx = (f.density_gradient(x + eps, y) - f.density_gradient(x - eps, y)) / (2.0 * eps);
        assert!((h.column(0) - dx).norm() < 1e-8);
    }

    #[test]
    fn rotation_produces_entropy_only_through_jv() {
        let gas = GasModel::default();
        let coeffs = TransportCoefficients::new(0.01, 0.02, 0.03, 0.0).unwrap();
        let omega = 0.8;
        let e = prescribed_field_evaluator(&rotation(omega), &coeffs, &gas, SampleGrid2D { n: 9, half_width: 1.0 }).unwrap();
        assert_eq!(e.pi_um_max, 0.0);
        assert_eq!(e.q_s_max, 0.0);
        assert!(e.nsf_shear.iter().all(|v| *v == 0.0));
        // (4/3) mu c^2 / M with c = kappa_m Omega^2 / (R T)
        let c = 0.03 * omega * omega / 1.5;
        for v in &e.jv_jv {
            assert!((v - 4.0 / 3.0 * 0.01 * c * c).abs() < 1e-15);
        }
        assert!(e.cross_jv_um.iter().all(|v| v.abs() < 1e-18));
    }

    #[test]
    fn zero_rotation_is_silent() {
        let gas = GasModel::default();
        let coeffs = TransportCoefficients::new(0.01, 0.02, 0.03, 0.0).unwrap();
        let e = prescribed_field_evaluator(&rotation(0.0), &coeffs, &gas, SampleGrid2D { n: 5, half_width: 1.0 }).unwrap();
        for v in e.nsf_shear.iter().chain(&e.jv_jv).chain(&e.cross_um_jv).chain(&e.cross_jv_um) {
            assert_eq!(*v, 0.0);
        }
    }

    struct NoHessian;
    impl AnalyticField2D for NoHessian {
        fn density(&self, _: f64, _: f64) -> f64 {
            1.0
        }
        fn density_gradient(&self, _: f64, _: f64) -> Vector2<f64> {
            Vector2::zeros()
        }
        fn velocity(&self, _: f64, _: f64) -> Vector2<f64> {
            Vector2::zeros()
        }
        fn velocity_gradient(&self, _: f64, _: f64) -> Matrix2<f64> {
            Matrix2::zeros()
        }
        fn temperature(&self, _: f64, _: f64) -> f64 {
            1.0
        }
        fn temperature_gradient(&self, _: f64, _: f64) -> Vector2<f64> {
            Vector2::zeros()
        }
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let r = prescribed_field_evaluator(
            &NoHessian,
            &TransportCoefficients::zero(),
            &GasModel::default(),
            SampleGrid2D { n: 3, half_width: 1.0 },
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
