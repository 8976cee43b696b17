//! Executes a validated scenario and writes its output bundle.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bivelocity::analysis::dispersion::{acoustic_decay, dispersion_relation};
use bivelocity::analysis::entropy::{
    closure_convergence, entropy_budget_klimontovich, entropy_budget_reduced, entropy_budget_volume,
    entropy_budget_volume_from_snapshots, klimontovich_sign_search, EntropyBudget, TermRole, REDUCED_RESIDUAL,
};
use bivelocity::analysis::knudsen::{kn_sweep_point, MIN_SWEEP_POINTS};
use bivelocity::analysis::mechanics::{center_of_mass_check, galilean_check};
use bivelocity::analysis::prescribed::{prescribed_field_evaluator, RigidRotation, SampleGrid2D};
use bivelocity::analysis::{loglog_slope, ConvergenceReport};
use bivelocity::constitutive::compute_fluxes;
use bivelocity::governing::rhs;
use bivelocity::manufactured::{solver_convergence, ManufacturedProfile};
use bivelocity::solver::run;
use bivelocity::{FlowState, Grid1D, Model, ModelVariant, StateDerivative, TransportCoefficients};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::{expand_sweep, AcousticShape, AnalysisKind, ConfigErrors, InitialProfile, ScenarioConfig};
use crate::output::{
    create_dir, manifest, num, plot_script, write_csv, write_fields, write_metrics, write_text, Plot,
};
use crate::profiles::{background, dimensionless_profile, initial_state, random_smooth_state};

/// Environment variable overriding the sweep worker count.
pub const WORKERS_ENV: &str = "BIVEL_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Model(#[from] bivelocity::Error),
    #[error("I/O error at {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error at {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{failed} of {total} sweep runs failed; first `{label}`: {source}")]
    Sweep {
        failed: usize,
        total: usize,
        label: String,
        source: Box<RunError>,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn is_divergence(&self) -> bool {
        match self {
            RunError::Model(bivelocity::Error::Diverged { .. }) => true,
            RunError::Sweep { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}

/// Nondimensional magnitude of one Kn-tagged term at one Knudsen number.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSample {
    pub kn: f64,
    pub term: String,
    pub expected_order: u32,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub analysis: AnalysisKind,
    /// Also written to `metrics.csv`.
    pub metrics: Vec<(String, f64)>,
    pub scaling: Vec<ScalingSample>,
}

impl RunOutcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Default)]
struct Collected {
    metrics: Vec<(String, f64)>,
    scaling: Vec<ScalingSample>,
    plots: Vec<Plot>,
}

impl Collected {
    fn metric(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.push((name.into(), v));
    }

    fn convergence(&mut self, prefix: &str, r: &ConvergenceReport) {
        if let Some(o) = r.order {
            self.metric(format!("{prefix}order"), o);
        }
        if let Some(e) = r.error.last() {
            self.metric(format!("{prefix}finest_error"), *e);
        }
    }
}

/// Runs a config without sweep axes into `dir`.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    if !cfg.sweep.is_empty() {
        return Err(RunError::Model(bivelocity::Error::Unsupported(
            "config has sweep axes; run it as a sweep".into(),
        )));
    }
    create_dir(dir)?;
    write_text(&dir.join("manifest.toml"), &manifest(cfg))?;
    let mut c = Collected::default();
    let result = match cfg.analysis {
        AnalysisKind::Trajectory => trajectory(cfg, dir, &mut c),
        AnalysisKind::AcousticDecay => acoustic(cfg, dir, &mut c),
        AnalysisKind::KnOrdering => kn_point(cfg, dir, &mut c),
        AnalysisKind::RigidRotation => rotation(cfg, dir, &mut c),
        AnalysisKind::Dispersion => dispersion(cfg, dir, &mut c),
        AnalysisKind::GalileanPair => galilean(cfg, dir, &mut c),
        AnalysisKind::CenterOfMass => center_of_mass(cfg, dir, &mut c),
        AnalysisKind::KlimontovichSearch => sign_search(cfg, &mut c),
        AnalysisKind::ModelReduction => reduction(cfg, dir, &mut c),
        AnalysisKind::ManufacturedConvergence => manufactured(cfg, dir, &mut c),
    };
    if let Err(e) = result {
        write_text(&dir.join("failure.txt"), &format!("{e}\n"))?;
        return Err(e);
    }
    write_metrics(&dir.join("metrics.csv"), &c.metrics)?;
    if cfg.output.plot_script && !c.plots.is_empty() {
        write_text(&dir.join("plot.gp"), &plot_script(&c.plots))?;
    }
    Ok(RunOutcome {
        directory: dir.to_path_buf(),
        analysis: cfg.analysis,
        metrics: c.metrics,
        scaling: c.scaling,
    })
}

fn budget(variant: ModelVariant, s: &FlowState, coeffs: &TransportCoefficients, cfg: &ScenarioConfig, grid: &Grid1D) -> bivelocity::Result<EntropyBudget> {
    let gas = &cfg.gas;
    match variant {
        ModelVariant::VolumeFull => {
            let f = compute_fluxes(s, coeffs, gas, grid)?;
            entropy_budget_volume(s, &f, coeffs, gas, grid)
        }
        ModelVariant::Klimontovich => entropy_budget_klimontovich(s, coeffs, gas, grid),
        ModelVariant::NsfBaseline | ModelVariant::BivelocityReduced => {
            let f = compute_fluxes(s, coeffs, gas, grid)?;
            entropy_budget_reduced(s, &f, coeffs, gas, grid)
        }
    }
}

fn role(r: TermRole) -> &'static str {
    match r {
        TermRole::Flux => "flux",
        TermRole::Production => "production",
        TermRole::Indefinite => "indefinite",
    }
}

fn trajectory(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let grid = cfg.grid()?;
    let coeffs = cfg.transport()?;
    let model = Model::new(cfg.variant, cfg.gas, coeffs, grid);
    let init = initial_state(cfg, &grid)?;
    let tr = run(&model, &init, &cfg.integrator)?;
    let eff = cfg.variant.effective_coefficients(&coeffs);

    if cfg.diagnostics.conserved {
        let t0 = model.to_conserved(&init)?.totals(&grid);
        let first = [0.0, 0.0, 0.0, t0[0], t0[1], t0[2]];
        let rows = std::iter::once(first).chain(
            tr.diagnostics
                .iter()
                .map(|d| [d.step as f64, d.time, d.dt, d.mass, d.momentum, d.energy]),
        );
        write_csv(
            &dir.join("conserved.csv"),
            &["step", "time", "dt", "mass", "momentum", "energy"],
            rows.map(|r| {
                let mut v = vec![format!("{}", r[0] as usize)];
                v.extend(r[1..].iter().map(|x| num(*x)));
                v
            }),
        )?;
        c.plots.push(
            Plot::new("conserved", "Conserved integrals", "time", "integral")
                .series("conserved.csv", "2:4")
                .series("conserved.csv", "2:5")
                .series("conserved.csv", "2:6"),
        );
    }
    if cfg.diagnostics.entropy {
        let mut rows = Vec::new();
        for snap in &tr.snapshots {
            let b = budget(cfg.variant, &snap.state, &eff, cfg, &grid)?;
            for t in b.terms.iter().chain(&b.productions) {
                rows.push(vec![
                    snap.step.to_string(),
                    num(snap.time),
                    t.name.to_string(),
                    role(t.role).to_string(),
                    num(t.integral),
                    num(t.magnitude),
                ]);
            }
        }
        write_csv(&dir.join("budget.csv"), &["step", "time", "term", "role", "integral", "magnitude"], rows)?;
        if cfg.variant == ModelVariant::VolumeFull && tr.snapshots.len() >= 2 {
            let mut rows = Vec::new();
            for pair in tr.snapshots.windows(2) {
                let b = entropy_budget_volume_from_snapshots(pair, &eff, &cfg.gas, &grid)?;
                let cl = b.closure.expect("snapshot budgets carry a closure");
                rows.push([num(cl.time), num(cl.residual)]);
            }
            write_csv(&dir.join("closure.csv"), &["time", "residual"], rows)?;
        }
    }
    if cfg.diagnostics.fields {
        let fdir = dir.join("fields");
        create_dir(&fdir)?;
        for snap in &tr.snapshots {
            write_fields(&fdir.join(format!("step_{:07}.csv", snap.step)), &snap.state, &cfg.gas, &grid)?;
        }
        let last = tr.snapshots.last().expect("trajectory has a final snapshot");
        c.plots.push(
            Plot::new("density", "Density", "x", "rho")
                .series("fields/step_0000000.csv", "1:6")
                .series(format!("fields/step_{:07}.csv", last.step), "1:6"),
        );
    }
    let drift = tr.conservation_drift()?;
    c.metric("final_time", tr.final_time);
    c.metric("steps", tr.steps as f64);
    c.metric("drift_mass", drift[0]);
    c.metric("drift_momentum", drift[1]);
    c.metric("drift_energy", drift[2]);
    Ok(())
}

fn acoustic(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let bg = background(cfg).expect("validated profile");
    let InitialProfile::SinusoidalAcoustic {
        shape: AcousticShape::Eigenmode { amplitude },
        ..
    } = cfg.initial
    else {
        unreachable!("validated profile")
    };
    let coeffs = cfg.transport()?;
    let r = acoustic_decay(
        cfg.variant,
        &bg,
        &coeffs,
        &cfg.gas,
        cfg.length,
        cfg.cells,
        amplitude * bg.density,
        cfg.integrator.t_end,
    )?;
    let a0 = r.amplitudes[0];
    write_csv(
        &dir.join("decay.csv"),
        &["time", "amplitude", "predicted"],
        r.times
            .iter()
            .zip(&r.amplitudes)
            .map(|(t, a)| [num(*t), num(*a), num(a0 * (-r.predicted * t).exp())]),
    )?;
    c.plots.push(
        Plot::new("decay", "Acoustic amplitude", "time", "|rho_k|")
            .logy()
            .series("decay.csv", "1:2")
            .series("decay.csv", "1:3"),
    );
    c.metric("predicted_decay_rate", r.predicted);
    c.metric("measured_decay_rate", r.measured);
    c.metric("relative_error", r.relative_error);
    Ok(())
}

fn kn_point(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let r = cfg.reference().expect("validated mode");
    let profile = dimensionless_profile(cfg).expect("validated profile");
    let p = kn_sweep_point(&profile, &r.scales, &r.starred, &cfg.gas, cfg.cells)?;
    let kn = r.scales.knudsen();
    let norm = r.scales.length * r.scales.entropy_rate(&cfg.gas);
    let mut rows = Vec::new();
    for t in p.budget.terms.iter().chain(&p.budget.productions) {
        let order = t.knudsen_order.map(|o| o.to_string()).unwrap_or_default();
        rows.push(vec![
            t.name.to_string(),
            role(t.role).to_string(),
            order,
            num(t.integral),
            num(t.magnitude),
            num(t.magnitude / norm),
        ]);
        if let Some(o) = t.knudsen_order {
            c.scaling.push(ScalingSample {
                kn,
                term: t.name.to_string(),
                expected_order: o,
                magnitude: t.magnitude / norm,
            });
            c.metric(format!("{}_dimensionless", t.name), t.magnitude / norm);
        }
    }
    write_csv(
        &dir.join("budget.csv"),
        &["term", "role", "knudsen_order", "integral", "magnitude", "dimensionless_magnitude"],
        rows,
    )?;
    c.metrics.insert(0, ("kn".into(), kn));
    Ok(())
}

fn rotation(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let InitialProfile::RigidRotationField {
        omega,
        density,
        temperature,
        samples,
    } = cfg.initial
    else {
        unreachable!("validated profile")
    };
    let (rs, ts) = cfg.unit_scales();
    let rate_unit = cfg.reference().map_or(1.0, |r| r.scales.molecular_speed / r.scales.length);
    let field = RigidRotation {
        omega: omega * rate_unit,
        central_density: density * rs,
        temperature: temperature * ts,
        gas_constant: cfg.gas.gas_constant,
    };
    let coeffs = cfg.transport()?;
    let e = prescribed_field_evaluator(
        &field,
        &coeffs,
        &cfg.gas,
        SampleGrid2D {
            n: samples,
            half_width: 0.5 * cfg.length,
        },
    )?;
    let xs = e.sample.coordinates();
    let n = e.sample.n;
    write_csv(
        &dir.join("rotation.csv"),
        &["x", "y", "nsf_shear", "cross_um_jv", "cross_jv_um", "jv_jv"],
        (0..n * n).map(|k| {
            [
                xs[k % n],
                xs[k / n],
                e.nsf_shear[k],
                e.cross_um_jv[k],
                e.cross_jv_um[k],
                e.jv_jv[k],
            ]
            .map(num)
        }),
    )?;
    let mu = coeffs.viscosity(field.temperature);
    // stress scale mu Omega; heat-flux scale kappa_h T / L
    let stress_scale = mu * field.omega.abs();
    let heat_scale = match cfg.reference() {
        Some(r) => r.scales.conductivity() * r.scales.temperature / r.scales.length,
        None => coeffs.kappa_h * field.temperature / cfg.length,
    };
    c.metric("pi_um_max", e.pi_um_max);
    if stress_scale > 0.0 {
        c.metric("pi_um_relative", e.pi_um_max / stress_scale);
    }
    c.metric("q_s_max", e.q_s_max);
    if heat_scale > 0.0 {
        c.metric("q_s_relative", e.q_s_max / heat_scale);
    }
    c.metric("pi_jv_max", e.pi_jv_max);
    for (name, v) in [
        ("nsf_shear", &e.nsf_shear),
        ("cross_um_jv", &e.cross_um_jv),
        ("cross_jv_um", &e.cross_jv_um),
        ("jv_jv", &e.jv_jv),
    ] {
        c.metric(format!("{name}_integral"), e.integral(v));
    }
    if let Some(r) = cfg.reference() {
        let kn = r.scales.knudsen();
        let jv = e.integral(&e.jv_jv).abs() / (r.scales.length.powi(2) * r.scales.entropy_rate(&cfg.gas));
        c.metric("kn", kn);
        c.metric("jv_jv_dimensionless", jv);
        c.scaling.push(ScalingSample {
            kn,
            term: "jv_jv".into(),
            expected_order: 3,
            magnitude: jv,
        });
    }
    Ok(())
}

fn dispersion(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let bg = background(cfg).expect("validated profile");
    let coeffs = cfg.transport()?;
    let w = &cfg.params.omegas;
    let d = dispersion_relation(cfg.variant, &bg, &coeffs, &cfg.gas, w)?;
    let nsf = dispersion_relation(ModelVariant::NsfBaseline, &bg, &coeffs, &cfg.gas, w)?;
    write_csv(
        &dir.join("dispersion.csv"),
        &[
            "omega",
            "k_re",
            "k_im",
            "phase_speed",
            "attenuation",
            "nsf_phase_speed",
            "nsf_attenuation",
            "attenuation_difference",
        ],
        d.points.iter().zip(&nsf.points).map(|(p, q)| {
            [
                p.omega,
                p.physical.re,
                p.physical.im,
                p.phase_speed,
                p.attenuation,
                q.phase_speed,
                q.attenuation,
                p.attenuation - q.attenuation,
            ]
            .map(num)
        }),
    )?;
    write_csv(
        &dir.join("roots.csv"),
        &["omega", "index", "k_re", "k_im"],
        d.points.iter().flat_map(|p| {
            p.roots
                .iter()
                .enumerate()
                .map(move |(i, k)| [num(p.omega), i.to_string(), num(k.re), num(k.im)])
        }),
    )?;
    c.plots.push(
        Plot::new("phase_speed", "Phase speed", "omega", "omega / Re k")
            .loglog()
            .series("dispersion.csv", "1:4")
            .series("dispersion.csv", "1:6"),
    );
    c.plots.push(
        Plot::new("attenuation", "Attenuation", "omega", "Im k")
            .loglog()
            .series("dispersion.csv", "1:5")
            .series("dispersion.csv", "1:7"),
    );
    let cs = cfg.gas.sound_speed(bg.temperature);
    c.metric("sound_speed", cs);
    c.metric("low_frequency_phase_speed_ratio", d.points[0].phase_speed / cs);
    let max_root_gap = d
        .points
        .iter()
        .zip(&nsf.points)
        .map(|(p, q)| (p.physical - q.physical).norm() / q.physical.norm())
        .fold(0.0, f64::max);
    c.metric("max_relative_root_difference_from_nsf", max_root_gap);
    Ok(())
}

fn write_convergence(path: &Path, studies: &[(&str, &ConvergenceReport)]) -> Result<(), RunError> {
    write_csv(
        path,
        &["study", "cells", "dx", "error"],
        studies.iter().flat_map(|(name, r)| {
            r.resolutions
                .iter()
                .zip(&r.spacing)
                .zip(&r.error)
                .map(move |((n, h), e)| vec![name.to_string(), n.to_string(), num(*h), num(*e)])
        }),
    )
}

fn convergence_plot(c: &mut Collected, title: &str) {
    c.plots.push(
        Plot::new("convergence", title, "dx", "error")
            .loglog()
            .series("convergence.csv", "3:4"),
    );
}

fn galilean(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let init = |g: &Grid1D| initial_state(cfg, g);
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
    write_convergence(&dir.join("convergence.csv"), &[("galilean", &r.convergence)])?;
    let fdir = dir.join("fields");
    create_dir(&fdir)?;
    for (n, (rest, moving)) in cfg.params.resolutions.iter().zip(&r.final_states) {
        let grid = Grid1D::new(*n, cfg.length, cfg.boundary)?;
        write_fields(&fdir.join(format!("rest_n{n}.csv")), rest, &cfg.gas, &grid)?;
        write_fields(&fdir.join(format!("shifted_n{n}.csv")), moving, &cfg.gas, &grid)?;
    }
    convergence_plot(c, "Galilean mismatch");
    c.metric("t_end", r.t_end);
    c.convergence("", &r.convergence);
    Ok(())
}

fn center_of_mass(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let init = |g: &Grid1D| initial_state(cfg, g);
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
    write_convergence(&dir.join("convergence.csv"), &[("center_of_mass", &r)])?;
    convergence_plot(c, "Center-of-mass residual");
    c.convergence("", &r);
    Ok(())
}

fn sign_search(cfg: &ScenarioConfig, c: &mut Collected) -> Result<(), RunError> {
    let p = &cfg.params;
    let s = klimontovich_sign_search(
        &cfg.transport()?,
        &cfg.gas,
        &cfg.grid()?,
        p.density_amplitude,
        &p.temperature_amplitudes,
        p.phases,
    )?;
    c.metric("curly_min", s.curly_min);
    c.metric("curly_max", s.curly_max);
    c.metric("both_signs", if s.both_signs() { 1.0 } else { 0.0 });
    c.metric("states_scanned", s.states_scanned as f64);
    c.metric(
        "negative_total_production_found",
        if s.negative_total_production.is_some() { 1.0 } else { 0.0 },
    );
    if let Some((phase, amp, min)) = s.negative_total_production {
        c.metric("negative_phase", phase);
        c.metric("negative_temperature_amplitude", amp);
        c.metric("negative_minimum", min);
    }
    Ok(())
}

/// Largest elementwise difference relative to the largest entry of `base`,
/// per conserved component.
pub fn relative_difference(a: &StateDerivative, base: &StateDerivative) -> f64 {
    [(&a.mass, &base.mass), (&a.momentum, &base.momentum), (&a.energy, &base.energy)]
        .iter()
        .map(|(x, y)| {
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            x.iter().zip(y.iter()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())) / scale
        })
        .fold(0.0, f64::max)
}

fn reduction(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let grid = cfg.grid()?;
    let gas = &cfg.gas;
    let coeffs = cfg.transport()?;
    let mut rng = StdRng::seed_from_u64(cfg.params.seed);
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 3];
    let mut residual_min = f64::INFINITY;
    for k in 0..cfg.params.samples {
        let s = random_smooth_state(&mut rng, gas, &grid, false)?;
        let base = rhs(ModelVariant::NsfBaseline, &s, &coeffs, gas, &grid)?;
        let diffs = [
            (ModelVariant::BivelocityReduced, coeffs.with_kappa_m(0.0)),
            (ModelVariant::VolumeFull, coeffs.with_kappa_m(0.0)),
            (ModelVariant::Klimontovich, coeffs.with_kappa_klim(0.0)),
        ]
        .map(|(v, cf)| rhs(v, &s, &cf, gas, &grid).map(|d| relative_difference(&d, &base)));
        let mut row = vec![k.to_string()];
        for (w, d) in worst.iter_mut().zip(diffs) {
            let d = d?;
            *w = w.max(d);
            row.push(num(d));
        }
        // the reduced model's indefinite residual at the configured kappa_m
        let f = compute_fluxes(&s, &coeffs, gas, &grid)?;
        let b = entropy_budget_reduced(&s, &f, &coeffs, gas, &grid)?;
        let res = b.term(REDUCED_RESIDUAL).expect("reduced budget has a residual").magnitude;
        residual_min = residual_min.min(res);
        row.push(num(res));
        rows.push(row);
    }
    write_csv(
        &dir.join("reduction.csv"),
        &[
            "sample",
            "reduced_difference",
            "volume_full_difference",
            "klimontovich_difference",
            "reduced_residual_magnitude",
        ],
        rows,
    )?;
    c.metric("max_reduced_difference", worst[0]);
    c.metric("max_volume_full_difference", worst[1]);
    c.metric("max_klimontovich_difference", worst[2]);
    c.metric("min_reduced_residual_magnitude", residual_min);
    Ok(())
}

fn manufactured(cfg: &ScenarioConfig, dir: &Path, c: &mut Collected) -> Result<(), RunError> {
    let InitialProfile::Manufactured(p) = cfg.initial else {
        unreachable!("validated profile")
    };
    let p = ManufacturedProfile { length: cfg.length, ..p };
    let coeffs = cfg.transport()?;
    let gas = &cfg.gas;
    let solver = solver_convergence(cfg.variant, &p, &coeffs, gas, &cfg.params.resolutions, &cfg.integrator)?;
    let full = ModelVariant::VolumeFull.effective_coefficients(&coeffs);
    let init = |g: &Grid1D| p.state(ModelVariant::VolumeFull, gas, g, 0.0);
    let closure = closure_convergence(
        &init,
        &full,
        gas,
        cfg.length,
        &cfg.params.closure_resolutions,
        cfg.params.closure_steps,
        cfg.params.closure_dt,
    )?;
    write_convergence(&dir.join("convergence.csv"), &[("solver", &solver), ("closure", &closure)])?;
    convergence_plot(c, "Manufactured-solution error and budget closure");
    c.convergence("", &solver);
    c.convergence("closure_", &closure);
    Ok(())
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, PartialEq)]
pub struct TermSlope {
    pub term: String,
    pub expected_order: u32,
    /// Ascending.
    pub kn: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// `None` with fewer than the minimum number of sweep points.
    pub slope: Option<f64>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub directory: PathBuf,
    pub runs: Vec<(String, RunOutcome)>,
    pub slopes: Vec<TermSlope>,
}

impl SweepReport {
    pub fn slope(&self, term: &str) -> Option<&TermSlope> {
        self.slopes.iter().find(|s| s.term == term)
    }
}

/// `BIVEL_WORKERS`, then `[execution] workers`, then the available cores.
pub fn worker_count(cfg: &ScenarioConfig) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Expands the sweep, runs every point in its own directory under `dir`,
/// then writes the summary once all runs have finished.
pub fn run_sweep(cfg: &ScenarioConfig, dir: &Path) -> Result<SweepReport, RunError> {
    let points = expand_sweep(cfg)?;
    create_dir(dir)?;
    write_text(&dir.join("manifest.toml"), &manifest(cfg))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<(String, Result<RunOutcome, RunError>)> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let label = p.label();
                let r = run_scenario(&p.config, &dir.join(&label));
                (label, r)
            })
            .collect()
    });
    let total = results.len();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (label, r) in results {
        match r {
            Ok(o) => runs.push((label, o)),
            Err(e) => failures.push((label, e)),
        }
    }
    let slopes = scaling_fits(&runs)?;
    write_summary(dir, &runs, &slopes)?;
    if let Some((label, source)) = failures.into_iter().next() {
        return Err(RunError::Sweep {
            failed: total - runs.len(),
            total,
            label,
            source: Box::new(source),
        });
    }
    Ok(SweepReport {
        directory: dir.to_path_buf(),
        runs,
        slopes,
    })
}

fn scaling_fits(runs: &[(String, RunOutcome)]) -> Result<Vec<TermSlope>, RunError> {
    let mut by_term: BTreeMap<(u32, String), Vec<(f64, f64)>> = BTreeMap::new();
    for (_, o) in runs {
        for s in &o.scaling {
            by_term
                .entry((s.expected_order, s.term.clone()))
                .or_default()
                .push((s.kn, s.magnitude));
        }
    }
    let mut out = Vec::new();
    for ((order, term), mut pts) in by_term {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let kn: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let magnitudes: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let slope = if pts.len() >= MIN_SWEEP_POINTS {
            Some(loglog_slope(&kn, &magnitudes)?)
        } else {
            None
        };
        out.push(TermSlope {
            term,
            expected_order: order,
            kn,
            magnitudes,
            slope,
        });
    }
    Ok(out)
}

fn write_summary(dir: &Path, runs: &[(String, RunOutcome)], slopes: &[TermSlope]) -> Result<(), RunError> {
    let mut sorted: Vec<&(String, RunOutcome)> = runs.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    write_csv(
        &dir.join("summary.csv"),
        &["run", "metric", "value"],
        sorted
            .iter()
            .flat_map(|(label, o)| o.metrics.iter().map(move |(k, v)| [label.clone(), k.clone(), num(*v)])),
    )?;
    if slopes.is_empty() {
        return Ok(());
    }
    let mut rows = Vec::new();
    for s in slopes {
        for (k, m) in s.kn.iter().zip(&s.magnitudes) {
            rows.push(vec![
                "magnitude".into(),
                s.term.clone(),
                s.expected_order.to_string(),
                num(*k),
                num(*m),
            ]);
        }
        if let Some(v) = s.slope {
            rows.push(vec![
                "slope".into(),
                s.term.clone(),
                s.expected_order.to_string(),
                String::new(),
                num(v),
            ]);
        }
    }
    write_csv(&dir.join("knudsen.csv"), &["kind", "term", "expected_order", "kn", "value"], rows)?;
    let plot = slopes.iter().fold(
        Plot::new("knudsen", "Integrated term magnitudes", "Kn", "magnitude").loglog(),
        |p, s| {
            p.series(
                "knudsen.csv",
                format!("(stringcolumn(1) eq 'magnitude' && stringcolumn(2) eq '{}' ? $4 : NaN):5 title '{}'", s.term, s.term),
            )
        },
    );
    write_text(&dir.join("plot.gp"), &plot_script(&[plot]))
}
