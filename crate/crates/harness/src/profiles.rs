//! Builds initial states from the configured profile.

use std::f64::consts::PI;

use bivelocity::analysis::dispersion::{acoustic_mode, acoustic_wave_state, Background};
use bivelocity::analysis::knudsen::DimensionlessProfile;
use bivelocity::{Error, FlowState, GasModel, Grid1D, Result};
use rand::Rng;

use crate::config::{AcousticShape, InitialProfile, ScenarioConfig};

/// Velocity unit of the profile parameters: `C0` in dimensionless mode,
/// otherwise the adiabatic sound speed at temperature `t0`.
fn speed_unit(cfg: &ScenarioConfig, t0: f64) -> f64 {
    match cfg.reference() {
        Some(r) => r.scales.molecular_speed,
        None => cfg.gas.sound_speed(t0),
    }
}

/// Uniform background of a `uniform` or `sinusoidal-acoustic` profile.
pub fn background(cfg: &ScenarioConfig) -> Option<Background> {
    let (rs, ts) = cfg.unit_scales();
    match cfg.initial {
        InitialProfile::Uniform {
            density, temperature, ..
        }
        | InitialProfile::SinusoidalAcoustic {
            density, temperature, ..
        } => Some(Background {
            density: density * rs,
            temperature: temperature * ts,
        }),
        _ => None,
    }
}

pub fn dimensionless_profile(cfg: &ScenarioConfig) -> Option<DimensionlessProfile> {
    match cfg.initial {
        InitialProfile::SinusoidalAcoustic {
            shape:
                AcousticShape::Prescribed {
                    density_amplitude,
                    velocity_amplitude,
                    temperature_amplitude,
                },
            ..
        } => Some(DimensionlessProfile {
            density_amplitude,
            velocity_amplitude,
            temperature_amplitude,
        }),
        _ => None,
    }
}

/// Initial state of `cfg` on `grid` (which may differ from the configured
/// resolution in convergence studies).
pub fn initial_state(cfg: &ScenarioConfig, grid: &Grid1D) -> Result<FlowState> {
    let gas = &cfg.gas;
    let (rs, ts) = cfg.unit_scales();
    let x = grid.centers();
    let n = grid.n_cells;
    match cfg.initial {
        InitialProfile::Uniform {
            density,
            velocity,
            temperature,
        } => {
            let t0 = temperature * ts;
            Ok(FlowState::uniform(n, gas, density * rs, velocity * speed_unit(cfg, t0), t0))
        }
        InitialProfile::SinusoidalAcoustic {
            density,
            temperature,
            mode,
            shape,
        } => {
            let (rho0, t0) = (density * rs, temperature * ts);
            let k = 2.0 * PI * mode as f64 / grid.length;
            match shape {
                AcousticShape::Eigenmode { amplitude } => {
                    let bg = Background {
                        density: rho0,
                        temperature: t0,
                    };
                    let m = acoustic_mode(cfg.variant, &bg, &cfg.transport()?, gas, k)?;
                    acoustic_wave_state(&m, &bg, gas, grid, amplitude * rho0)
                }
                AcousticShape::Prescribed {
                    density_amplitude,
                    velocity_amplitude,
                    temperature_amplitude,
                } => {
                    let c = speed_unit(cfg, t0);
                    let rho: Vec<f64> = x.iter().map(|x| rho0 * (1.0 + density_amplitude * (k * x).sin())).collect();
                    let u: Vec<f64> = x.iter().map(|x| c * velocity_amplitude * (k * x + 0.6).cos()).collect();
                    let e: Vec<f64> = x
                        .iter()
                        .map(|x| gas.cv * t0 * (1.0 + temperature_amplitude * (k * x + 1.7).sin()))
                        .collect();
                    FlowState::compatible(gas, &rho, &u, &e)
                }
            }
        }
        InitialProfile::GaussianPulse {
            density,
            velocity,
            temperature,
            amplitude,
            temperature_amplitude,
            width,
            center,
        } => {
            let (rho0, t0) = (density * rs, temperature * ts);
            let u0 = velocity * speed_unit(cfg, t0);
            let (c, w) = (center * grid.length, width * grid.length);
            let g: Vec<f64> = x.iter().map(|x| (-((x - c) / w).powi(2)).exp()).collect();
            let rho: Vec<f64> = g.iter().map(|g| rho0 * (1.0 + amplitude * g)).collect();
            let e: Vec<f64> = g.iter().map(|g| gas.cv * t0 * (1.0 + temperature_amplitude * g)).collect();
            FlowState::compatible(gas, &rho, &vec![u0; n], &e)
        }
        InitialProfile::Manufactured(p) => {
            let p = bivelocity::manufactured::ManufacturedProfile {
                length: grid.length,
                ..p
            };
            p.state(cfg.variant, gas, grid, 0.0)
        }
        InitialProfile::RigidRotationField { .. } => Err(Error::Unsupported(
            "the rigid-rotation field is a 2D evaluation profile, not a 1D initial state".into(),
        )),
    }
}

/// Smooth random periodic state: `rho`, `U`, `T` and `phi = a_n v_bar` are
/// three-mode Fourier series about `(1, 0.3, 1, 1)`. `phi` stays 1 unless
/// `perturb_phi`.
pub fn random_smooth_state<R: Rng>(rng: &mut R, gas: &GasModel, grid: &Grid1D, perturb_phi: bool) -> Result<FlowState> {
    let x = grid.centers();
    let k = 2.0 * PI / grid.length;
    let mut series = |base: f64, amp: f64| -> Vec<f64> {
        let modes: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-amp..amp), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        x.iter()
            .map(|x| {
                let s: f64 = modes
                    .iter()
                    .enumerate()
                    .map(|(m, (a, p))| a * (k * (m + 1) as f64 * x + p).sin())
                    .sum();
                base * (1.0 + s)
            })
            .collect()
    };
    let rho = series(1.0, 0.1);
    let u = series(0.3, 0.5);
    let e = series(gas.cv, 0.1);
    let phi = series(1.0, 0.05);
    let mut s = FlowState::compatible(gas, &rho, &u, &e)?;
    if perturb_phi {
        s.v_bar.iter_mut().zip(phi).for_each(|(v, f)| *v *= f);
    }
    Ok(s)
}

