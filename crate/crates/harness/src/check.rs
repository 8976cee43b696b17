//! Property suite behind `bivel check`: mechanical identities and
//! entropy-budget structure, each reduced to one pass/fail line.

use std::time::Instant;

use bivelocity::analysis::entropy::{
    closure_convergence, entropy_budget_reduced, entropy_budget_volume, klimontovich_sign_search, NSF_SHEAR,
    REDUCED_RESIDUAL,
};
use bivelocity::analysis::mechanics::{
    angular_momentum_check, antisymmetric_field, center_of_mass_check, galilean_check, viscous_stress_field,
};
use bivelocity::analysis::ConvergenceReport;
use bivelocity::constitutive::compute_fluxes;
use bivelocity::governing::rhs;
use bivelocity::manufactured::ManufacturedProfile;
use bivelocity::solver::run;
use bivelocity::{GasModel, Grid1D, Model, ModelVariant, TransportCoefficients};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::config::{InitialProfile, ScenarioConfig};
use crate::profiles::{initial_state, random_smooth_state};
use crate::runner::relative_difference;
use crate::scenarios;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = Result<(bool, String), Box<dyn std::error::Error + Send + Sync>>;

pub struct Check {
    pub name: &'static str,
    run: fn() -> Outcome,
}

impl Check {
    pub fn run(&self) -> CheckResult {
        let t = Instant::now();
        let (passed, detail) = match (self.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CheckResult {
            name: self.name,
            passed,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        }
    }
}

pub const ORDER_TOLERANCE: f64 = 0.2;

fn order_ok(r: &ConvergenceReport, target: f64) -> (bool, String) {
    let errs: Vec<String> = r.error.iter().map(|e| format!("{e:.3e}")).collect();
    match r.order {
        Some(o) => (
            (o - target).abs() <= ORDER_TOLERANCE,
            format!("order {o:.3} (errors {})", errs.join(", ")),
        ),
        None => (false, format!("no order fit (errors {})", errs.join(", "))),
    }
}

fn builtin(name: &str) -> Result<ScenarioConfig, Box<dyn std::error::Error + Send + Sync>> {
    Ok(scenarios::load(name)?)
}

/// Largest relative RHS gap between the baseline and every variant with
/// its extra coefficient zeroed, over `samples` random states.
pub fn degeneracy_gap(samples: usize, n: usize, seed: u64) -> bivelocity::Result<f64> {
    let gas = GasModel::default();
    let grid = Grid1D::periodic(n, 1.0)?;
    let coeffs = TransportCoefficients::new(0.02, 0.03, 0.015, 0.01)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = random_smooth_state(&mut rng, &gas, &grid, false)?;
        let base = rhs(ModelVariant::NsfBaseline, &s, &coeffs, &gas, &grid)?;
        for (v, c) in [
            (ModelVariant::BivelocityReduced, coeffs.with_kappa_m(0.0)),
            (ModelVariant::VolumeFull, coeffs.with_kappa_m(0.0)),
            (ModelVariant::Klimontovich, coeffs.with_kappa_klim(0.0)),
        ] {
            worst = worst.max(relative_difference(&rhs(v, &s, &c, &gas, &grid)?, &base));
        }
    }
    Ok(worst)
}

fn degeneracy() -> Outcome {
    let g = degeneracy_gap(10, 128, 7)?;
    Ok((g <= 1e-12, format!("max relative RHS gap {g:.2e} over 10 states")))
}

/// Worst conserved-total drift of the `gaussian-pulse` scenario per variant.
pub fn pulse_drift() -> Result<Vec<(ModelVariant, [f64; 3], usize)>, Box<dyn std::error::Error + Send + Sync>> {
    let cfg = builtin("gaussian-pulse")?;
    let grid = cfg.grid()?;
    let init = initial_state(&cfg, &grid)?;
    let mut out = Vec::new();
    for v in ModelVariant::ALL {
        let model = Model::new(v, cfg.gas, cfg.transport()?, grid);
        let tr = run(&model, &init, &cfg.integrator)?;
        out.push((v, tr.conservation_drift()?, tr.steps));
    }
    Ok(out)
}

fn conservation() -> Outcome {
    let d = pulse_drift()?;
    let worst = d.iter().flat_map(|(_, x, _)| *x).fold(0.0, f64::max);
    let steps = d.iter().map(|x| x.2).min().unwrap_or(0);
    Ok((
        worst < 1e-10 && steps == 1000,
        format!("max relative drift {worst:.2e} after {steps} steps, all variants"),
    ))
}

fn galilean() -> Outcome {
    let cfg = builtin("galilean-pair")?;
    let init = |g: &Grid1D| initial_state(&cfg, g);
    let r = galilean_check(
        cfg.variant,
        &cfg.gas,
        &cfg.transport()?,
        cfg.length,
        &init,
        cfg.params.shift,
        &cfg.params.resolutions,
        &cfg.integrator,
    )?;
    Ok(order_ok(&r.convergence, 2.0))
}

fn angular_momentum() -> Outcome {
    let half = std::f64::consts::PI / 2.0;
    let res = [16, 32, 64];
    let sym = angular_momentum_check(&viscous_stress_field(0.1), &res, half);
    let anti = angular_momentum_check(&antisymmetric_field(), &res, half);
    let (ok, detail) = order_ok(&sym, 2.0);
    // the control must stay O(1) under refinement
    let stuck = anti.error.last().unwrap() > &(0.5 * anti.error[0]);
    Ok((
        ok && stuck,
        format!(
            "symmetric {detail}; antisymmetric residual {:.3e} -> {:.3e}",
            anti.error[0],
            anti.error.last().unwrap()
        ),
    ))
}

fn center_of_mass() -> Outcome {
    let cfg = builtin("center-of-mass")?;
    let init = |g: &Grid1D| initial_state(&cfg, g);
    let r = center_of_mass_check(
        cfg.variant,
        &cfg.gas,
        &cfg.transport()?,
        cfg.length,
        &init,
        cfg.integrator.t_end,
        &cfg.params.resolutions,
        &cfg.integrator,
    )?;
    Ok(order_ok(&r, 2.0))
}

/// Pointwise minimum of `-Pi_Um : grad U_m` over `samples` random fields.
pub fn shear_production_minimum(samples: usize, seed: u64) -> bivelocity::Result<f64> {
    let gas = GasModel::default();
    let grid = Grid1D::periodic(64, 1.0)?;
    let coeffs = TransportCoefficients::new(0.02, 0.03, 0.015, 0.01)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let s = random_smooth_state(&mut rng, &gas, &grid, true)?;
        let f = compute_fluxes(&s, &coeffs, &gas, &grid)?;
        let b = entropy_budget_volume(&s, &f, &coeffs, &gas, &grid)?;
        min = min.min(b.term(NSF_SHEAR).expect("volume budget term").min());
    }
    Ok(min)
}

fn positivity() -> Outcome {
    let m = shear_production_minimum(1000, 11)?;
    Ok((m >= -1e-14, format!("minimum {m:.3e} over 1000 random fields")))
}

fn sign_indefinite() -> Outcome {
    let cfg = builtin("klimontovich-entropy-search")?;
    let p = &cfg.params;
    let s = klimontovich_sign_search(
        &cfg.transport()?,
        &cfg.gas,
        &cfg.grid()?,
        p.density_amplitude,
        &p.temperature_amplitudes,
        p.phases,
    )?;
    Ok((
        s.both_signs(),
        format!(
            "curly group range [{:.3e}, {:.3e}] over {} states",
            s.curly_min, s.curly_max, s.states_scanned
        ),
    ))
}

/// Integrated magnitude of the reduced-model residual on one random state,
/// at `kappa_m` and at zero.
pub fn reduced_residuals(kappa_m: f64) -> bivelocity::Result<(f64, f64)> {
    let gas = GasModel::default();
    let grid = Grid1D::periodic(128, 1.0)?;
    let coeffs = TransportCoefficients::new(0.02, 0.03, kappa_m, 0.0)?;
    let s = random_smooth_state(&mut StdRng::seed_from_u64(3), &gas, &grid, false)?;
    let mag = |c: &TransportCoefficients| -> bivelocity::Result<f64> {
        let f = compute_fluxes(&s, c, &gas, &grid)?;
        let b = entropy_budget_reduced(&s, &f, c, &gas, &grid)?;
        Ok(b.term(REDUCED_RESIDUAL).expect("reduced budget term").magnitude)
    };
    Ok((mag(&coeffs)?, mag(&coeffs.with_kappa_m(0.0))?))
}

fn reduced_residual() -> Outcome {
    let (on, off) = reduced_residuals(0.015)?;
    Ok((
        on > 0.0 && off == 0.0,
        format!("integrated |residual| {on:.3e} at kappa_m = 0.015, {off:.1e} at 0"),
    ))
}

/// Gibbs-path closure convergence on the `manufactured-convergence` profile.
pub fn closure_report() -> Result<ConvergenceReport, Box<dyn std::error::Error + Send + Sync>> {
    let cfg = builtin("manufactured-convergence")?;
    let InitialProfile::Manufactured(p) = cfg.initial else {
        unreachable!("built-in profile")
    };
    let p = ManufacturedProfile { length: cfg.length, ..p };
    let coeffs = ModelVariant::VolumeFull.effective_coefficients(&cfg.transport()?);
    let init = |g: &Grid1D| p.state(ModelVariant::VolumeFull, &cfg.gas, g, 0.0);
    Ok(closure_convergence(
        &init,
        &coeffs,
        &cfg.gas,
        cfg.length,
        &cfg.params.closure_resolutions,
        cfg.params.closure_steps,
        cfg.params.closure_dt,
    )?)
}

fn closure() -> Outcome {
    Ok(order_ok(&closure_report()?, 2.0))
}

pub static SUITE: [Check; 9] = [
    Check {
        name: "model degeneracy",
        run: degeneracy,
    },
    Check {
        name: "periodic conservation",
        run: conservation,
    },
    Check {
        name: "galilean invariance",
        run: galilean,
    },
    Check {
        name: "angular-momentum identity",
        run: angular_momentum,
    },
    Check {
        name: "center-of-mass balance",
        run: center_of_mass,
    },
    Check {
        name: "shear production >= 0",
        run: positivity,
    },
    Check {
        name: "klimontovich sign indefinite",
        run: sign_indefinite,
    },
    Check {
        name: "reduced residual present",
        run: reduced_residual,
    },
    Check {
        name: "entropy budget closure",
        run: closure,
    },
];

pub fn run_all() -> Vec<CheckResult> {
    SUITE.iter().map(Check::run).collect()
}

pub fn table(results: &[CheckResult]) -> String {
    let w = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    results
        .iter()
        .map(|r| {
            format!(
                "{}  {:w$}  {:>7.2}s  {}\n",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.seconds,
                r.detail
            )
        })
        .collect()
}
