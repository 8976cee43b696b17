//! Scenario files: a TOML tree read section by section so that every
//! problem in a file is reported at once.
//!
//! ```toml
//! [scenario]
//! name = "pulse"
//! variant = "bivelocity-reduced"   # nsf | bivelocity-reduced | volume-full | klimontovich
//! analysis = "trajectory"          # see AnalysisKind
//! mode = "dimensional"             # or "dimensionless" (needs [reference])
//!
//! [gas]
//! molecular_mass = 1.0
//! gas_constant = 1.0
//!
//! [transport]                      # dimensional mode only
//! mu = 0.01
//! kappa_h = 0.015
//! kappa_m = 0.0
//! kappa_klim = 0.0
//!
//! [grid]
//! cells = 128
//! length = 1.0
//! boundary = "periodic"
//!
//! [initial.gaussian-pulse]         # exactly one profile table
//! amplitude = 0.2
//!
//! [integrator]
//! t_end = 0.5
//!
//! [sweep]
//! "transport.kappa_m" = [0.0, 0.01, 0.02]
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use bivelocity::analysis::knudsen::{ReferenceScales, StarredCoefficients};
use bivelocity::manufactured::ManufacturedProfile;
use bivelocity::solver::IntegratorConfig;
use bivelocity::{Boundary, GasModel, Grid1D, ModelVariant, TransportCoefficients};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// Dotted key path, e.g. `transport.kappa_m`.
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s):", self.0.len())?;
        for i in &self.0 {
            write!(f, "\n  {}: {}", i.path, i.message)?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|i| i.path == path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnalysisKind {
    Trajectory,
    AcousticDecay,
    KnOrdering,
    RigidRotation,
    Dispersion,
    GalileanPair,
    CenterOfMass,
    KlimontovichSearch,
    ModelReduction,
    ManufacturedConvergence,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 10] = [
        AnalysisKind::Trajectory,
        AnalysisKind::AcousticDecay,
        AnalysisKind::KnOrdering,
        AnalysisKind::RigidRotation,
        AnalysisKind::Dispersion,
        AnalysisKind::GalileanPair,
        AnalysisKind::CenterOfMass,
        AnalysisKind::KlimontovichSearch,
        AnalysisKind::ModelReduction,
        AnalysisKind::ManufacturedConvergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnalysisKind::Trajectory => "trajectory",
            AnalysisKind::AcousticDecay => "acoustic-decay",
            AnalysisKind::KnOrdering => "kn-ordering",
            AnalysisKind::RigidRotation => "rigid-rotation",
            AnalysisKind::Dispersion => "dispersion",
            AnalysisKind::GalileanPair => "galilean-pair",
            AnalysisKind::CenterOfMass => "center-of-mass",
            AnalysisKind::KlimontovichSearch => "klimontovich-search",
            AnalysisKind::ModelReduction => "model-reduction",
            AnalysisKind::ManufacturedConvergence => "manufactured-convergence",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Keys of the `[analysis]` table this kind reads.
    fn keys(&self) -> &'static [&'static str] {
        match self {
            AnalysisKind::GalileanPair => &["resolutions", "shift"],
            AnalysisKind::CenterOfMass => &["resolutions"],
            AnalysisKind::Dispersion => &["omegas"],
            AnalysisKind::ModelReduction => &["samples", "seed"],
            AnalysisKind::KlimontovichSearch => &["density_amplitude", "temperature_amplitudes", "phases"],
            AnalysisKind::ManufacturedConvergence => {
                &["resolutions", "closure_resolutions", "closure_dt", "closure_steps"]
            }
            _ => &[],
        }
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportConfig {
    pub mu: f64,
    pub kappa_h: f64,
    pub kappa_m: f64,
    pub kappa_klim: f64,
    /// `mu ~ T^exponent`; 0 keeps `mu` constant.
    pub viscosity_exponent: f64,
    pub reference_temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConfig {
    pub scales: ReferenceScales,
    pub starred: StarredCoefficients,
    /// Klimontovich coefficient in units of `C0 lambda`.
    pub kappa_klim_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficients {
    Dimensional(TransportConfig),
    Dimensionless(ReferenceConfig),
}

/// Sinusoidal initial data: either the linear acoustic eigenmode of the
/// configured model, or fixed sinusoids in `rho`, `U` and `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcousticShape {
    Eigenmode {
        amplitude: f64,
    },
    Prescribed {
        density_amplitude: f64,
        /// In units of the reference speed (`C0`, or `c_s(T0)` in dimensional mode).
        velocity_amplitude: f64,
        temperature_amplitude: f64,
    },
}

/// Initial-condition profiles. In dimensionless mode densities,
/// temperatures, velocities and `omega` are in reference units; pulse
/// widths and centers are always fractions of the domain length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    Uniform {
        density: f64,
        velocity: f64,
        temperature: f64,
    },
    SinusoidalAcoustic {
        density: f64,
        temperature: f64,
        /// Wavelengths per domain.
        mode: usize,
        shape: AcousticShape,
    },
    GaussianPulse {
        density: f64,
        velocity: f64,
        temperature: f64,
        amplitude: f64,
        temperature_amplitude: f64,
        width: f64,
        center: f64,
    },
    RigidRotationField {
        omega: f64,
        density: f64,
        temperature: f64,
        samples: usize,
    },
    Manufactured(ManufacturedProfile),
}

impl InitialProfile {
    pub const NAMES: [&'static str; 5] = [
        "uniform",
        "sinusoidal-acoustic",
        "gaussian-pulse",
        "rigid-rotation-field",
        "manufactured",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InitialProfile::Uniform { .. } => "uniform",
            InitialProfile::SinusoidalAcoustic { .. } => "sinusoidal-acoustic",
            InitialProfile::GaussianPulse { .. } => "gaussian-pulse",
            InitialProfile::RigidRotationField { .. } => "rigid-rotation-field",
            InitialProfile::Manufactured(_) => "manufactured",
        }
    }

    /// Numeric parameters as `(key, value)`, in the order they are written.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            InitialProfile::Uniform {
                density,
                velocity,
                temperature,
            } => vec![("density", density), ("velocity", velocity), ("temperature", temperature)],
            InitialProfile::SinusoidalAcoustic {
                density,
                temperature,
                mode,
                shape,
            } => {
                let mut v = vec![("density", density), ("temperature", temperature), ("mode", mode as f64)];
                match shape {
                    AcousticShape::Eigenmode { amplitude } => v.push(("amplitude", amplitude)),
                    AcousticShape::Prescribed {
                        density_amplitude,
                        velocity_amplitude,
                        temperature_amplitude,
                    } => v.extend([
                        ("density_amplitude", density_amplitude),
                        ("velocity_amplitude", velocity_amplitude),
                        ("temperature_amplitude", temperature_amplitude),
                    ]),
                }
                v
            }
            InitialProfile::GaussianPulse {
                density,
                velocity,
                temperature,
                amplitude,
                temperature_amplitude,
                width,
                center,
            } => vec![
                ("density", density),
                ("velocity", velocity),
                ("temperature", temperature),
                ("amplitude", amplitude),
                ("temperature_amplitude", temperature_amplitude),
                ("width", width),
                ("center", center),
            ],
            InitialProfile::RigidRotationField {
                omega,
                density,
                temperature,
                samples,
            } => vec![
                ("omega", omega),
                ("density", density),
                ("temperature", temperature),
                ("samples", samples as f64),
            ],
            InitialProfile::Manufactured(p) => vec![
                ("wave_speed", p.wave_speed),
                ("rho0", p.rho0),
                ("rho_amp", p.rho_amp),
                ("u0", p.u0),
                ("u_amp", p.u_amp),
                ("t0", p.t0),
                ("t_amp", p.t_amp),
                ("phi_amp", p.phi_amp),
            ],
        }
    }

    fn is_one_dimensional(&self) -> bool {
        !matches!(self, InitialProfile::RigidRotationField { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams {
    pub resolutions: Vec<usize>,
    /// Frame velocity of the Galilean pair.
    pub shift: f64,
    pub omegas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub density_amplitude: f64,
    pub temperature_amplitudes: Vec<f64>,
    pub phases: usize,
    pub closure_resolutions: Vec<usize>,
    pub closure_dt: f64,
    pub closure_steps: usize,
}

impl AnalysisParams {
    fn defaults(kind: AnalysisKind) -> Self {
        let resolutions = match kind {
            AnalysisKind::ManufacturedConvergence => vec![32, 64, 128],
            _ => vec![64, 128, 256],
        };
        Self {
            resolutions,
            shift: 1.0,
            omegas: (0..13).map(|i| 10f64.powf(-2.0 + 0.25 * i as f64)).collect(),
            samples: 10,
            seed: 1,
            density_amplitude: 0.2,
            temperature_amplitudes: vec![0.0, 0.05, 0.1, 0.2],
            phases: 8,
            closure_resolutions: vec![64, 128, 256],
            closure_dt: 0.002,
            closure_steps: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    /// Per-step conserved integrals.
    pub conserved: bool,
    /// Entropy-budget integrals between stored snapshots.
    pub entropy: bool,
    /// Field snapshot CSVs.
    pub fields: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub plot_script: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v:e}"),
            SweepValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub variant: ModelVariant,
    pub analysis: AnalysisKind,
    pub gas: GasModel,
    pub coefficients: Coefficients,
    pub cells: usize,
    pub length: f64,
    pub boundary: Boundary,
    pub initial: InitialProfile,
    pub integrator: IntegratorConfig,
    pub params: AnalysisParams,
    pub diagnostics: Diagnostics,
    pub output: OutputConfig,
    pub workers: Option<usize>,
    pub sweep: Vec<SweepAxis>,
}

impl ScenarioConfig {
    pub fn grid(&self) -> bivelocity::Result<Grid1D> {
        Grid1D::new(self.cells, self.length, self.boundary)
    }

    /// Dimensional transport coefficients for the configured mode.
    pub fn transport(&self) -> bivelocity::Result<TransportCoefficients> {
        match self.coefficients {
            Coefficients::Dimensional(t) => {
                let c = TransportCoefficients::new(t.mu, t.kappa_h, t.kappa_m, t.kappa_klim)?;
                if t.viscosity_exponent != 0.0 {
                    c.with_power_law(t.viscosity_exponent, t.reference_temperature)
                } else {
                    Ok(c)
                }
            }
            Coefficients::Dimensionless(r) => {
                let c = r.scales.coefficients(r.starred.mu, r.starred.kappa_h, r.starred.kappa_m)?;
                Ok(c.with_kappa_klim(r.kappa_klim_star * r.scales.mass_diffusivity()))
            }
        }
    }

    pub fn reference(&self) -> Option<&ReferenceConfig> {
        match &self.coefficients {
            Coefficients::Dimensionless(r) => Some(r),
            Coefficients::Dimensional(_) => None,
        }
    }

    /// Density and temperature scales that multiply profile parameters.
    pub fn unit_scales(&self) -> (f64, f64) {
        match self.reference() {
            Some(r) => (r.scales.density, r.scales.temperature),
            None => (1.0, 1.0),
        }
    }
}

// ---------------------------------------------------------------------------
// reading

struct Reader<'a> {
    path: String,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
}

fn issue(errs: &mut Vec<ConfigIssue>, path: impl Into<String>, message: impl Into<String>) {
    errs.push(ConfigIssue {
        path: path.into(),
        message: message.into(),
    });
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_usize(v: &Value) -> Option<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        _ => None,
    }
}

impl<'a> Reader<'a> {
    fn new(path: &str, table: Option<&'a Table>) -> Self {
        Self {
            path: path.to_string(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn raw(&mut self, k: &str) -> Option<&'a Value> {
        self.used.insert(k.to_string());
        self.table.and_then(|t| t.get(k))
    }

    fn typed<T>(
        &mut self,
        k: &str,
        default: Option<T>,
        what: &str,
        conv: impl Fn(&Value) -> Option<T>,
        errs: &mut Vec<ConfigIssue>,
    ) -> Option<T> {
        match self.raw(k) {
            None => {
                if default.is_none() {
                    issue(errs, self.key(k), "missing required key");
                }
                default
            }
            Some(v) => match conv(v) {
                Some(x) => Some(x),
                None => {
                    issue(errs, self.key(k), format!("expected {what}, found {}", v.type_str()));
                    default
                }
            },
        }
    }

    fn f64(&mut self, k: &str, default: f64, errs: &mut Vec<ConfigIssue>) -> f64 {
        self.typed(k, Some(default), "a number", as_f64, errs).unwrap_or(default)
    }

    fn f64_req(&mut self, k: &str, errs: &mut Vec<ConfigIssue>) -> f64 {
        self.typed(k, None, "a number", as_f64, errs).unwrap_or(f64::NAN)
    }

    fn opt_f64(&mut self, k: &str, errs: &mut Vec<ConfigIssue>) -> Option<f64> {
        self.raw(k)?;
        self.typed(k, None, "a number", as_f64, errs)
    }

    fn usize(&mut self, k: &str, default: usize, errs: &mut Vec<ConfigIssue>) -> usize {
        self.typed(k, Some(default), "a non-negative integer", as_usize, errs)
            .unwrap_or(default)
    }

    fn usize_req(&mut self, k: &str, errs: &mut Vec<ConfigIssue>) -> usize {
        self.typed(k, None, "a non-negative integer", as_usize, errs).unwrap_or(0)
    }

    fn bool(&mut self, k: &str, default: bool, errs: &mut Vec<ConfigIssue>) -> bool {
        self.typed(k, Some(default), "a boolean", |v| v.as_bool(), errs)
            .unwrap_or(default)
    }

    fn string(&mut self, k: &str, default: Option<&str>, errs: &mut Vec<ConfigIssue>) -> Option<String> {
        self.typed(
            k,
            default.map(str::to_string),
            "a string",
            |v| v.as_str().map(str::to_string),
            errs,
        )
    }

    fn list<T>(
        &mut self,
        k: &str,
        default: Vec<T>,
        what: &str,
        conv: impl Fn(&Value) -> Option<T>,
        errs: &mut Vec<ConfigIssue>,
    ) -> Vec<T> {
        let path = self.key(k);
        match self.raw(k) {
            None => default,
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    match conv(v) {
                        Some(x) => out.push(x),
                        None => issue(errs, format!("{path}[{i}]"), format!("expected {what}")),
                    }
                }
                out
            }
            Some(v) => {
                issue(errs, path, format!("expected an array, found {}", v.type_str()));
                default
            }
        }
    }

    fn finish(self, errs: &mut Vec<ConfigIssue>) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.used.contains(k) {
                    issue(errs, self.key(k), "unknown key");
                }
            }
        }
    }
}

fn section<'a>(root: &'a Table, name: &str, errs: &mut Vec<ConfigIssue>) -> Option<&'a Table> {
    match root.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(v) => {
            issue(errs, name, format!("expected a table, found {}", v.type_str()));
            None
        }
    }
}

const SECTIONS: [&str; 13] = [
    "scenario",
    "gas",
    "transport",
    "reference",
    "grid",
    "initial",
    "integrator",
    "analysis",
    "diagnostics",
    "output",
    "execution",
    "sweep",
    "version",
];

fn positive(errs: &mut Vec<ConfigIssue>, path: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        issue(errs, path, format!("must be positive and finite, got {v}"));
    }
}

fn non_negative(errs: &mut Vec<ConfigIssue>, path: &str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        issue(errs, path, format!("must be non-negative and finite, got {v}"));
    }
}

/// Parses and validates a scenario file, returning every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            message: format!("not valid TOML: {}", e.message()),
        }])
    })?;
    let mut errs = Vec::new();
    for (k, v) in &root {
        if !SECTIONS.contains(&k.as_str()) {
            issue(&mut errs, k, "unknown section");
        } else if !v.is_table() {
            issue(&mut errs, k, format!("expected a table, found {}", v.type_str()));
        }
    }

    // [scenario]
    let mut r = Reader::new("scenario", section(&root, "scenario", &mut errs));
    if r.table.is_none() {
        issue(&mut errs, "scenario", "missing required section");
    }
    let name = r.string("name", Some("scenario"), &mut errs).unwrap_or_default();
    let variant = r.string("variant", None, &mut errs).and_then(|s| {
        let v = ModelVariant::from_name(&s);
        if v.is_none() {
            issue(&mut errs, "scenario.variant", format!("unknown model variant `{s}`"));
        }
        v
    });
    let analysis = r
        .string("analysis", Some("trajectory"), &mut errs)
        .and_then(|s| {
            let k = AnalysisKind::from_name(&s);
            if k.is_none() {
                issue(&mut errs, "scenario.analysis", format!("unknown analysis `{s}`"));
            }
            k
        })
        .unwrap_or(AnalysisKind::Trajectory);
    let mode = r.string("mode", Some("dimensional"), &mut errs).unwrap_or_default();
    let dimensionless = match mode.as_str() {
        "dimensional" => false,
        "dimensionless" => true,
        other => {
            issue(&mut errs, "scenario.mode", format!("expected `dimensional` or `dimensionless`, got `{other}`"));
            false
        }
    };
    r.finish(&mut errs);

    // [gas]
    let mut r = Reader::new("gas", section(&root, "gas", &mut errs));
    let m = r.f64("molecular_mass", 1.0, &mut errs);
    let rg = r.f64("gas_constant", 1.0, &mut errs);
    r.finish(&mut errs);
    let gas = match GasModel::monatomic(m, rg) {
        Ok(g) => g,
        Err(e) => {
            issue(&mut errs, "gas", e.to_string());
            GasModel::default()
        }
    };

    // [transport] / [reference]
    let transport_t = section(&root, "transport", &mut errs);
    let reference_t = section(&root, "reference", &mut errs);
    let coefficients = if dimensionless {
        if transport_t.is_some() {
            issue(&mut errs, "transport", "not used in dimensionless mode; set the starred coefficients in [reference]");
        }
        if reference_t.is_none() {
            issue(&mut errs, "reference", "dimensionless mode requires reference scales");
        }
        let mut r = Reader::new("reference", reference_t);
        let scales = ReferenceScales {
            mean_free_path: r.f64_req("mean_free_path", &mut errs),
            length: r.f64("length", 1.0, &mut errs),
            molecular_speed: r.f64("molecular_speed", 1.0, &mut errs),
            density: r.f64("density", 1.0, &mut errs),
            temperature: r.f64("temperature", 1.0, &mut errs),
        };
        let starred = StarredCoefficients {
            mu: r.f64("mu_star", 1.0, &mut errs),
            kappa_h: r.f64("kappa_h_star", 1.0, &mut errs),
            kappa_m: r.f64("kappa_m_star", 1.0, &mut errs),
        };
        let kappa_klim_star = r.f64("kappa_klim_star", 0.0, &mut errs);
        r.finish(&mut errs);
        if reference_t.is_some() {
            for (k, v) in [
                ("mean_free_path", scales.mean_free_path),
                ("length", scales.length),
                ("molecular_speed", scales.molecular_speed),
                ("density", scales.density),
                ("temperature", scales.temperature),
            ] {
                if !v.is_nan() {
                    positive(&mut errs, &format!("reference.{k}"), v);
                }
            }
            for (k, v) in [
                ("mu_star", starred.mu),
                ("kappa_h_star", starred.kappa_h),
                ("kappa_m_star", starred.kappa_m),
                ("kappa_klim_star", kappa_klim_star),
            ] {
                non_negative(&mut errs, &format!("reference.{k}"), v);
            }
        }
        Coefficients::Dimensionless(ReferenceConfig {
            scales,
            starred,
            kappa_klim_star,
        })
    } else {
        if reference_t.is_some() {
            issue(&mut errs, "reference", "only used in dimensionless mode");
        }
        if transport_t.is_none() {
            issue(&mut errs, "transport", "missing required section");
        }
        let mut r = Reader::new("transport", transport_t);
        let t = TransportConfig {
            mu: r.f64_req("mu", &mut errs),
            kappa_h: r.f64_req("kappa_h", &mut errs),
            kappa_m: r.f64("kappa_m", 0.0, &mut errs),
            kappa_klim: r.f64("kappa_klim", 0.0, &mut errs),
            viscosity_exponent: r.f64("viscosity_exponent", 0.0, &mut errs),
            reference_temperature: r.f64("reference_temperature", 1.0, &mut errs),
        };
        r.finish(&mut errs);
        if transport_t.is_some() {
            for (k, v) in [("mu", t.mu), ("kappa_h", t.kappa_h), ("kappa_m", t.kappa_m), ("kappa_klim", t.kappa_klim)] {
                if !v.is_nan() {
                    non_negative(&mut errs, &format!("transport.{k}"), v);
                }
            }
            if !t.viscosity_exponent.is_finite() {
                issue(&mut errs, "transport.viscosity_exponent", "must be finite");
            }
            positive(&mut errs, "transport.reference_temperature", t.reference_temperature);
        }
        Coefficients::Dimensional(t)
    };

    // [grid]
    let mut r = Reader::new("grid", section(&root, "grid", &mut errs));
    if r.table.is_none() {
        issue(&mut errs, "grid", "missing required section");
    }
    let cells = r.usize_req("cells", &mut errs);
    let ref_length = match &coefficients {
        Coefficients::Dimensionless(c) => Some(c.scales.length),
        Coefficients::Dimensional(_) => None,
    };
    let length = match (r.opt_f64("length", &mut errs), ref_length) {
        (Some(l), Some(rl)) if (l - rl).abs() > 1e-12 * rl => {
            issue(&mut errs, "grid.length", format!("must equal reference.length ({rl}) in dimensionless mode"));
            l
        }
        (Some(l), _) => l,
        (None, Some(rl)) => rl,
        (None, None) => 1.0,
    };
    let boundary = match r.string("boundary", Some("periodic"), &mut errs).as_deref() {
        Some("periodic") => Boundary::Periodic,
        Some("reflective") => Boundary::Reflective,
        Some(other) => {
            issue(&mut errs, "grid.boundary", format!("expected `periodic` or `reflective`, got `{other}`"));
            Boundary::Periodic
        }
        None => Boundary::Periodic,
    };
    r.finish(&mut errs);
    if r_table_present(&root, "grid") {
        if let Err(e) = Grid1D::new(cells, length, boundary) {
            issue(&mut errs, "grid", e.to_string());
        }
    }

    // [initial.<profile>]
    let initial = read_initial(&root, length, &mut errs);

    // [integrator]
    let mut r = Reader::new("integrator", section(&root, "integrator", &mut errs));
    let d = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        cfl_advective: r.f64("cfl_advective", d.cfl_advective, &mut errs),
        cfl_diffusive: r.f64("cfl_diffusive", d.cfl_diffusive, &mut errs),
        t_end: r.f64("t_end", d.t_end, &mut errs),
        max_steps: r.usize("max_steps", d.max_steps, &mut errs),
        fixed_dt: r.opt_f64("fixed_dt", &mut errs),
        snapshot_every: r.usize("snapshot_every", d.snapshot_every, &mut errs),
    };
    r.finish(&mut errs);
    if let Err(e) = integrator.validate() {
        issue(&mut errs, "integrator", e.to_string());
    }

    // [analysis]
    let params = read_analysis(&root, analysis, &mut errs);

    // [diagnostics], [output], [execution], [version]
    let mut r = Reader::new("diagnostics", section(&root, "diagnostics", &mut errs));
    let diagnostics = Diagnostics {
        conserved: r.bool("conserved", true, &mut errs),
        entropy: r.bool("entropy", true, &mut errs),
        fields: r.bool("fields", true, &mut errs),
    };
    r.finish(&mut errs);
    let mut r = Reader::new("output", section(&root, "output", &mut errs));
    let output = OutputConfig {
        directory: PathBuf::from(r.string("directory", Some("output"), &mut errs).unwrap_or_default()),
        plot_script: r.bool("plot_script", true, &mut errs),
    };
    r.finish(&mut errs);
    let mut r = Reader::new("execution", section(&root, "execution", &mut errs));
    let workers = if r.table.map_or(false, |t| t.contains_key("workers")) {
        let w = r.usize("workers", 1, &mut errs);
        if w == 0 {
            issue(&mut errs, "execution.workers", "must be at least 1");
        }
        Some(w.max(1))
    } else {
        None
    };
    r.finish(&mut errs);
    let mut r = Reader::new("version", section(&root, "version", &mut errs));
    r.string("crate", Some(""), &mut errs);
    r.string("version", Some(""), &mut errs);
    r.finish(&mut errs);

    let sweep = read_sweep(&root, &mut errs);

    let Some(variant) = variant else {
        return Err(ConfigErrors(errs));
    };
    let cfg = ScenarioConfig {
        name,
        variant,
        analysis,
        gas,
        coefficients,
        cells,
        length,
        boundary,
        initial: initial.unwrap_or(InitialProfile::Uniform {
            density: 1.0,
            velocity: 0.0,
            temperature: 1.0,
        }),
        integrator,
        params,
        diagnostics,
        output,
        workers,
        sweep,
    };
    if initial.is_some() {
        cross_checks(&cfg, &mut errs);
    }
    for axis in &cfg.sweep {
        for (i, v) in axis.values.iter().enumerate() {
            let mut probe = cfg.clone();
            if let Err(msg) = apply_axis(&mut probe, &axis.parameter, v) {
                issue(&mut errs, format!("sweep.{}[{i}]", axis.parameter), msg);
            }
        }
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errs))
    }
}

fn r_table_present(root: &Table, name: &str) -> bool {
    matches!(root.get(name), Some(Value::Table(_)))
}

fn read_initial(root: &Table, length: f64, errs: &mut Vec<ConfigIssue>) -> Option<InitialProfile> {
    let Some(t) = section(root, "initial", errs) else {
        issue(errs, "initial", "missing required section; give exactly one profile table");
        return None;
    };
    let mut profiles = Vec::new();
    for (k, v) in t {
        if !InitialProfile::NAMES.contains(&k.as_str()) {
            issue(errs, format!("initial.{k}"), format!("unknown profile; expected one of {}", InitialProfile::NAMES.join(", ")));
        } else if let Value::Table(p) = v {
            profiles.push((k.as_str(), p));
        } else {
            issue(errs, format!("initial.{k}"), "expected a table");
        }
    }
    if profiles.len() != 1 {
        if profiles.len() > 1 {
            issue(errs, "initial", format!("exactly one profile allowed, found {}", profiles.len()));
        } else if t.is_empty() {
            issue(errs, "initial", "exactly one profile table is required");
        }
        return None;
    }
    let (name, table) = profiles[0];
    let path = format!("initial.{name}");
    let mut r = Reader::new(&path, Some(table));
    let p = match name {
        "uniform" => InitialProfile::Uniform {
            density: r.f64("density", 1.0, errs),
            velocity: r.f64("velocity", 0.0, errs),
            temperature: r.f64("temperature", 1.0, errs),
        },
        "sinusoidal-acoustic" => {
            let density = r.f64("density", 1.0, errs);
            let temperature = r.f64("temperature", 1.0, errs);
            let mode = r.usize("mode", 1, errs);
            let eig = r.opt_f64("amplitude", errs);
            let da = r.opt_f64("density_amplitude", errs);
            let va = r.opt_f64("velocity_amplitude", errs);
            let ta = r.opt_f64("temperature_amplitude", errs);
            let prescribed = da.is_some() || va.is_some() || ta.is_some();
            let shape = match (eig, prescribed) {
                (Some(_), true) => {
                    issue(errs, &path, "give either `amplitude` (eigenmode) or the per-field amplitudes, not both");
                    AcousticShape::Eigenmode { amplitude: 0.0 }
                }
                (Some(amplitude), false) => AcousticShape::Eigenmode { amplitude },
                (None, true) => AcousticShape::Prescribed {
                    density_amplitude: da.unwrap_or(0.0),
                    velocity_amplitude: va.unwrap_or(0.0),
                    temperature_amplitude: ta.unwrap_or(0.0),
                },
                (None, false) => AcousticShape::Eigenmode { amplitude: 1e-5 },
            };
            if mode == 0 {
                issue(errs, format!("{path}.mode"), "must be at least 1");
            }
            InitialProfile::SinusoidalAcoustic {
                density,
                temperature,
                mode,
                shape,
            }
        }
        "gaussian-pulse" => InitialProfile::GaussianPulse {
            density: r.f64("density", 1.0, errs),
            velocity: r.f64("velocity", 0.0, errs),
            temperature: r.f64("temperature", 1.0, errs),
            amplitude: r.f64("amplitude", 0.2, errs),
            temperature_amplitude: r.f64("temperature_amplitude", 0.1, errs),
            width: r.f64("width", 0.08, errs),
            center: r.f64("center", 0.5, errs),
        },
        "rigid-rotation-field" => {
            let p = InitialProfile::RigidRotationField {
                omega: r.f64("omega", 0.5, errs),
                density: r.f64("density", 1.0, errs),
                temperature: r.f64("temperature", 1.0, errs),
                samples: r.usize("samples", 33, errs),
            };
            if let InitialProfile::RigidRotationField { samples, .. } = p {
                if samples < 2 {
                    issue(errs, format!("{path}.samples"), "need at least 2 samples per side");
                }
            }
            p
        }
        _ => {
            let d = ManufacturedProfile::default();
            let p = ManufacturedProfile {
                length,
                wave_speed: r.f64("wave_speed", d.wave_speed, errs),
                rho0: r.f64("rho0", d.rho0, errs),
                rho_amp: r.f64("rho_amp", d.rho_amp, errs),
                u0: r.f64("u0", d.u0, errs),
                u_amp: r.f64("u_amp", d.u_amp, errs),
                t0: r.f64("t0", d.t0, errs),
                t_amp: r.f64("t_amp", d.t_amp, errs),
                phi_amp: r.f64("phi_amp", d.phi_amp, errs),
            };
            if let Err(e) = p.validate() {
                issue(errs, &path, e.to_string());
            }
            InitialProfile::Manufactured(p)
        }
    };
    r.finish(errs);
    validate_profile(&p, &path, errs);
    Some(p)
}

fn validate_profile(p: &InitialProfile, path: &str, errs: &mut Vec<ConfigIssue>) {
    let params = p.parameters();
    let get = |k: &str| params.iter().find(|(n, _)| *n == k).map(|(_, v)| *v);
    for k in ["density", "temperature"] {
        if let Some(v) = get(k) {
            positive(errs, &format!("{path}.{k}"), v);
        }
    }
    match *p {
        InitialProfile::GaussianPulse {
            amplitude,
            temperature_amplitude,
            width,
            ..
        } => {
            positive(errs, &format!("{path}.width"), width);
            if amplitude <= -1.0 || temperature_amplitude <= -1.0 {
                issue(errs, path, "pulse amplitudes must keep density and temperature positive");
            }
        }
        InitialProfile::SinusoidalAcoustic {
            shape:
                AcousticShape::Prescribed {
                    density_amplitude,
                    temperature_amplitude,
                    ..
                },
            ..
        } if density_amplitude.abs() >= 1.0 || temperature_amplitude.abs() >= 1.0 => {
            issue(errs, path, "relative amplitudes must be below 1");
        }
        _ => {}
    }
}

fn read_analysis(root: &Table, kind: AnalysisKind, errs: &mut Vec<ConfigIssue>) -> AnalysisParams {
    let t = section(root, "analysis", errs);
    let d = AnalysisParams::defaults(kind);
    let mut r = Reader::new("analysis", t);
    let allowed = kind.keys();
    if let Some(t) = t {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                issue(errs, format!("analysis.{k}"), format!("unknown key for analysis `{kind}`"));
                r.used.insert(k.clone());
            }
        }
    }
    let mut p = d.clone();
    if allowed.contains(&"resolutions") {
        p.resolutions = r.list("resolutions", d.resolutions.clone(), "a cell count", as_usize, errs);
        check_resolutions(&p.resolutions, "analysis.resolutions", errs);
    }
    if allowed.contains(&"shift") {
        p.shift = r.f64("shift", d.shift, errs);
        if p.shift == 0.0 || !p.shift.is_finite() {
            issue(errs, "analysis.shift", "must be finite and non-zero");
        }
    }
    if allowed.contains(&"omegas") {
        p.omegas = r.list("omegas", d.omegas.clone(), "a number", as_f64, errs);
        if p.omegas.is_empty() || p.omegas.iter().any(|w| !(*w > 0.0)) || p.omegas.windows(2).any(|w| w[1] <= w[0]) {
            issue(errs, "analysis.omegas", "must be positive and strictly increasing");
        }
    }
    if allowed.contains(&"samples") {
        p.samples = r.usize("samples", d.samples, errs);
        p.seed = r.usize("seed", d.seed as usize, errs) as u64;
        if p.samples == 0 {
            issue(errs, "analysis.samples", "must be at least 1");
        }
    }
    if allowed.contains(&"density_amplitude") {
        p.density_amplitude = r.f64("density_amplitude", d.density_amplitude, errs);
        p.temperature_amplitudes = r.list("temperature_amplitudes", d.temperature_amplitudes.clone(), "a number", as_f64, errs);
        p.phases = r.usize("phases", d.phases, errs);
        if p.density_amplitude.abs() >= 1.0 || p.temperature_amplitudes.iter().any(|a| a.abs() >= 1.0) {
            issue(errs, "analysis", "relative amplitudes must be below 1");
        }
        if p.phases == 0 {
            issue(errs, "analysis.phases", "must be at least 1");
        }
    }
    if allowed.contains(&"closure_resolutions") {
        p.closure_resolutions = r.list("closure_resolutions", d.closure_resolutions.clone(), "a cell count", as_usize, errs);
        check_resolutions(&p.closure_resolutions, "analysis.closure_resolutions", errs);
        p.closure_dt = r.f64("closure_dt", d.closure_dt, errs);
        positive(errs, "analysis.closure_dt", p.closure_dt);
        p.closure_steps = r.usize("closure_steps", d.closure_steps, errs);
        if let Some(&c) = p.closure_resolutions.first() {
            if p.closure_resolutions.iter().any(|n| c == 0 || n % c != 0) {
                issue(errs, "analysis.closure_resolutions", "each resolution must be a multiple of the first");
            }
        }
    }
    r.finish(errs);
    p
}

fn check_resolutions(v: &[usize], path: &str, errs: &mut Vec<ConfigIssue>) {
    if v.len() < 2 {
        issue(errs, path, "need at least two resolutions for an order fit");
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        issue(errs, path, "must be strictly increasing");
    }
    if v.iter().any(|n| *n < Grid1D::MIN_CELLS) {
        issue(errs, path, format!("every resolution needs at least {} cells", Grid1D::MIN_CELLS));
    }
}

fn read_sweep(root: &Table, errs: &mut Vec<ConfigIssue>) -> Vec<SweepAxis> {
    let Some(t) = section(root, "sweep", errs) else {
        return Vec::new();
    };
    let mut axes = Vec::new();
    for (k, v) in t {
        let path = format!("sweep.{k}");
        let Value::Array(a) = v else {
            issue(errs, &path, "expected an array of values");
            continue;
        };
        if a.is_empty() {
            issue(errs, &path, "needs at least one value");
        }
        let mut values = Vec::new();
        for (i, x) in a.iter().enumerate() {
            match x {
                Value::String(s) => values.push(SweepValue::Text(s.clone())),
                other => match as_f64(other) {
                    Some(f) => values.push(SweepValue::Number(f)),
                    None => issue(errs, format!("{path}[{i}]"), "expected a number or string"),
                },
            }
        }
        axes.push(SweepAxis {
            parameter: k.clone(),
            values,
        });
    }
    axes
}

fn cross_checks(c: &ScenarioConfig, errs: &mut Vec<ConfigIssue>) {
    let profile = c.initial.name();
    let need = |errs: &mut Vec<ConfigIssue>, ok: bool, msg: &str| {
        if !ok {
            issue(errs, "scenario.analysis", format!("analysis `{}` {msg}", c.analysis));
        }
    };
    let periodic = c.boundary == Boundary::Periodic;
    match c.analysis {
        AnalysisKind::Trajectory | AnalysisKind::GalileanPair | AnalysisKind::CenterOfMass => {
            need(errs, c.initial.is_one_dimensional(), "needs a one-dimensional initial profile");
            if c.analysis != AnalysisKind::Trajectory {
                need(errs, periodic, "needs a periodic grid");
            }
        }
        AnalysisKind::AcousticDecay => {
            need(
                errs,
                matches!(
                    c.initial,
                    InitialProfile::SinusoidalAcoustic {
                        shape: AcousticShape::Eigenmode { .. },
                        mode: 1,
                        ..
                    }
                ),
                "needs a `sinusoidal-acoustic` eigenmode profile with mode = 1",
            );
            need(errs, periodic, "needs a periodic grid");
        }
        AnalysisKind::KnOrdering => {
            need(errs, c.reference().is_some(), "needs dimensionless mode");
            need(
                errs,
                matches!(
                    c.initial,
                    InitialProfile::SinusoidalAcoustic {
                        shape: AcousticShape::Prescribed { .. },
                        mode: 1,
                        density,
                        temperature,
                    } if density == 1.0 && temperature == 1.0
                ),
                "needs a prescribed `sinusoidal-acoustic` profile (mode 1, unit density and temperature)",
            );
            need(errs, periodic, "needs a periodic grid");
        }
        AnalysisKind::RigidRotation => {
            need(errs, profile == "rigid-rotation-field", "needs the `rigid-rotation-field` profile");
        }
        AnalysisKind::Dispersion => {
            need(
                errs,
                matches!(c.initial, InitialProfile::Uniform { velocity, .. } if velocity == 0.0),
                "needs a `uniform` background at rest",
            );
        }
        AnalysisKind::ManufacturedConvergence => {
            need(errs, profile == "manufactured", "needs the `manufactured` profile");
            need(errs, periodic, "needs a periodic grid");
        }
        AnalysisKind::KlimontovichSearch | AnalysisKind::ModelReduction => {
            need(errs, periodic, "needs a periodic grid");
        }
    }
    if c.analysis != AnalysisKind::RigidRotation && !c.initial.is_one_dimensional() {
        issue(errs, "initial.rigid-rotation-field", "only the rigid-rotation analysis evaluates this 2D field");
    }
}

// ---------------------------------------------------------------------------
// sweeps

/// Parameters that a sweep axis may name. `initial.<profile>.<key>` is also
/// accepted for numeric keys of the active profile.
pub const SWEEP_PARAMETERS: [&str; 13] = [
    "kn",
    "scenario.variant",
    "grid.cells",
    "integrator.t_end",
    "transport.mu",
    "transport.kappa_h",
    "transport.kappa_m",
    "transport.kappa_klim",
    "reference.mean_free_path",
    "reference.mu_star",
    "reference.kappa_h_star",
    "reference.kappa_m_star",
    "reference.kappa_klim_star",
];

fn number(v: &SweepValue) -> Result<f64, String> {
    match v {
        SweepValue::Number(x) => Ok(*x),
        SweepValue::Text(s) => Err(format!("expected a number, got `{s}`")),
    }
}

fn dimensional(cfg: &mut ScenarioConfig) -> Result<&mut TransportConfig, String> {
    match &mut cfg.coefficients {
        Coefficients::Dimensional(t) => Ok(t),
        Coefficients::Dimensionless(_) => Err("transport parameters need dimensional mode".into()),
    }
}

fn reference(cfg: &mut ScenarioConfig) -> Result<&mut ReferenceConfig, String> {
    match &mut cfg.coefficients {
        Coefficients::Dimensionless(r) => Ok(r),
        Coefficients::Dimensional(_) => Err("reference parameters need dimensionless mode".into()),
    }
}

/// Sets one swept parameter on `cfg`.
pub fn apply_axis(cfg: &mut ScenarioConfig, parameter: &str, value: &SweepValue) -> Result<(), String> {
    let non_negative = |x: f64| {
        if x >= 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(format!("must be non-negative, got {x}"))
        }
    };
    let positive = |x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(format!("must be positive, got {x}"))
        }
    };
    match parameter {
        "scenario.variant" => {
            let SweepValue::Text(s) = value else {
                return Err("expected a variant name".into());
            };
            cfg.variant = ModelVariant::from_name(s).ok_or_else(|| format!("unknown model variant `{s}`"))?;
        }
        "kn" => {
            let kn = positive(number(value)?)?;
            let r = reference(cfg)?;
            r.scales = r.scales.with_knudsen(kn);
        }
        "reference.mean_free_path" => reference(cfg)?.scales.mean_free_path = positive(number(value)?)?,
        "reference.mu_star" => reference(cfg)?.starred.mu = non_negative(number(value)?)?,
        "reference.kappa_h_star" => reference(cfg)?.starred.kappa_h = non_negative(number(value)?)?,
        "reference.kappa_m_star" => reference(cfg)?.starred.kappa_m = non_negative(number(value)?)?,
        "reference.kappa_klim_star" => reference(cfg)?.kappa_klim_star = non_negative(number(value)?)?,
        "transport.mu" => dimensional(cfg)?.mu = non_negative(number(value)?)?,
        "transport.kappa_h" => dimensional(cfg)?.kappa_h = non_negative(number(value)?)?,
        "transport.kappa_m" => dimensional(cfg)?.kappa_m = non_negative(number(value)?)?,
        "transport.kappa_klim" => dimensional(cfg)?.kappa_klim = non_negative(number(value)?)?,
        "grid.cells" => {
            let n = number(value)?;
            if n.fract() != 0.0 || n < Grid1D::MIN_CELLS as f64 {
                return Err(format!("expected an integer of at least {}, got {n}", Grid1D::MIN_CELLS));
            }
            cfg.cells = n as usize;
        }
        "integrator.t_end" => cfg.integrator.t_end = positive(number(value)?)?,
        other => {
            let prefix = format!("initial.{}.", cfg.initial.name());
            let Some(key) = other.strip_prefix(&prefix) else {
                return Err(format!(
                    "unknown sweep parameter; expected one of {} or `{prefix}<key>`",
                    SWEEP_PARAMETERS.join(", ")
                ));
            };
            set_profile_parameter(&mut cfg.initial, key, number(value)?)?;
        }
    }
    Ok(())
}

fn set_profile_parameter(p: &mut InitialProfile, key: &str, v: f64) -> Result<(), String> {
    let count = |v: f64| {
        if v.fract() == 0.0 && v >= 1.0 {
            Ok(v as usize)
        } else {
            Err(format!("expected a positive integer, got {v}"))
        }
    };
    let slot: &mut f64 = match (p, key) {
        (InitialProfile::Uniform { density, .. }, "density") => density,
        (InitialProfile::Uniform { velocity, .. }, "velocity") => velocity,
        (InitialProfile::Uniform { temperature, .. }, "temperature") => temperature,
        (InitialProfile::SinusoidalAcoustic { density, .. }, "density") => density,
        (InitialProfile::SinusoidalAcoustic { temperature, .. }, "temperature") => temperature,
        (InitialProfile::SinusoidalAcoustic { mode, .. }, "mode") => {
            *mode = count(v)?;
            return Ok(());
        }
        (InitialProfile::SinusoidalAcoustic { shape: AcousticShape::Eigenmode { amplitude }, .. }, "amplitude") => amplitude,
        (
            InitialProfile::SinusoidalAcoustic {
                shape: AcousticShape::Prescribed { density_amplitude, .. },
                ..
            },
            "density_amplitude",
        ) => density_amplitude,
        (
            InitialProfile::SinusoidalAcoustic {
                shape: AcousticShape::Prescribed { velocity_amplitude, .. },
                ..
            },
            "velocity_amplitude",
        ) => velocity_amplitude,
        (
            InitialProfile::SinusoidalAcoustic {
                shape: AcousticShape::Prescribed {
                    temperature_amplitude, ..
                },
                ..
            },
            "temperature_amplitude",
        ) => temperature_amplitude,
        (InitialProfile::GaussianPulse { density, .. }, "density") => density,
        (InitialProfile::GaussianPulse { velocity, .. }, "velocity") => velocity,
        (InitialProfile::GaussianPulse { temperature, .. }, "temperature") => temperature,
        (InitialProfile::GaussianPulse { amplitude, .. }, "amplitude") => amplitude,
        (
            InitialProfile::GaussianPulse {
                temperature_amplitude, ..
            },
            "temperature_amplitude",
        ) => temperature_amplitude,
        (InitialProfile::GaussianPulse { width, .. }, "width") => width,
        (InitialProfile::GaussianPulse { center, .. }, "center") => center,
        (InitialProfile::RigidRotationField { omega, .. }, "omega") => omega,
        (InitialProfile::RigidRotationField { density, .. }, "density") => density,
        (InitialProfile::RigidRotationField { temperature, .. }, "temperature") => temperature,
        (InitialProfile::RigidRotationField { samples, .. }, "samples") => {
            *samples = count(v)?;
            return Ok(());
        }
        (InitialProfile::Manufactured(m), k) => match k {
            "wave_speed" => &mut m.wave_speed,
            "rho0" => &mut m.rho0,
            "rho_amp" => &mut m.rho_amp,
            "u0" => &mut m.u0,
            "u_amp" => &mut m.u_amp,
            "t0" => &mut m.t0,
            "t_amp" => &mut m.t_amp,
            "phi_amp" => &mut m.phi_amp,
            _ => return Err(format!("profile has no numeric parameter `{key}`")),
        },
        _ => return Err(format!("profile has no numeric parameter `{key}`")),
    };
    if !v.is_finite() {
        return Err(format!("must be finite, got {v}"));
    }
    *slot = v;
    Ok(())
}

/// One point of an expanded sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// `(parameter, value)` for every axis, in axis order.
    pub assignment: Vec<(String, SweepValue)>,
    pub config: ScenarioConfig,
}

impl SweepPoint {
    /// Directory name built from the axis values, e.g. `kn=1e-3`.
    pub fn label(&self) -> String {
        if self.assignment.is_empty() {
            return "base".into();
        }
        self.assignment
            .iter()
            .map(|(k, v)| format!("{}={}", k.replace('/', "_"), v.to_string().replace('/', "_")))
            .collect::<Vec<_>>()
            .join("__")
    }
}

/// Cross product of every sweep axis; the expanded configs carry no sweep.
pub fn expand_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepPoint>, ConfigErrors> {
    let mut points = vec![SweepPoint {
        assignment: Vec::new(),
        config: ScenarioConfig {
            sweep: Vec::new(),
            ..cfg.clone()
        },
    }];
    let mut errs = Vec::new();
    for axis in &cfg.sweep {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for v in &axis.values {
                let mut q = p.clone();
                if let Err(msg) = apply_axis(&mut q.config, &axis.parameter, v) {
                    issue(&mut errs, format!("sweep.{}", axis.parameter), msg);
                    continue;
                }
                q.assignment.push((axis.parameter.clone(), v.clone()));
                next.push(q);
            }
        }
        points = next;
    }
    if errs.is_empty() {
        Ok(points)
    } else {
        Err(ConfigErrors(errs))
    }
}

// ---------------------------------------------------------------------------
// writing

fn num(v: f64) -> Value {
    Value::Float(v)
}

fn int(v: usize) -> Value {
    Value::Integer(v as i64)
}

fn table(pairs: Vec<(&str, Value)>) -> Value {
    Value::Table(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

/// Serializes `cfg` in the grammar accepted by [`parse_config`], with every
/// default written out.
pub fn to_toml(cfg: &ScenarioConfig) -> String {
    let mut root = Table::new();
    root.insert(
        "scenario".into(),
        table(vec![
            ("name", Value::String(cfg.name.clone())),
            ("variant", Value::String(cfg.variant.name().into())),
            ("analysis", Value::String(cfg.analysis.name().into())),
            (
                "mode",
                Value::String(
                    match cfg.coefficients {
                        Coefficients::Dimensional(_) => "dimensional",
                        Coefficients::Dimensionless(_) => "dimensionless",
                    }
                    .into(),
                ),
            ),
        ]),
    );
    root.insert(
        "gas".into(),
        table(vec![
            ("molecular_mass", num(cfg.gas.molecular_mass)),
            ("gas_constant", num(cfg.gas.gas_constant)),
        ]),
    );
    match cfg.coefficients {
        Coefficients::Dimensional(t) => {
            root.insert(
                "transport".into(),
                table(vec![
                    ("mu", num(t.mu)),
                    ("kappa_h", num(t.kappa_h)),
                    ("kappa_m", num(t.kappa_m)),
                    ("kappa_klim", num(t.kappa_klim)),
                    ("viscosity_exponent", num(t.viscosity_exponent)),
                    ("reference_temperature", num(t.reference_temperature)),
                ]),
            );
        }
        Coefficients::Dimensionless(r) => {
            root.insert(
                "reference".into(),
                table(vec![
                    ("mean_free_path", num(r.scales.mean_free_path)),
                    ("length", num(r.scales.length)),
                    ("molecular_speed", num(r.scales.molecular_speed)),
                    ("density", num(r.scales.density)),
                    ("temperature", num(r.scales.temperature)),
                    ("mu_star", num(r.starred.mu)),
                    ("kappa_h_star", num(r.starred.kappa_h)),
                    ("kappa_m_star", num(r.starred.kappa_m)),
                    ("kappa_klim_star", num(r.kappa_klim_star)),
                ]),
            );
        }
    }
    root.insert(
        "grid".into(),
        table(vec![
            ("cells", int(cfg.cells)),
            ("length", num(cfg.length)),
            (
                "boundary",
                Value::String(
                    match cfg.boundary {
                        Boundary::Periodic => "periodic",
                        Boundary::Reflective => "reflective",
                    }
                    .into(),
                ),
            ),
        ]),
    );
    let counts = ["mode", "samples"];
    let profile: Vec<(&str, Value)> = cfg
        .initial
        .parameters()
        .into_iter()
        .map(|(k, v)| (k, if counts.contains(&k) { int(v as usize) } else { num(v) }))
        .collect();
    root.insert("initial".into(), table(vec![(cfg.initial.name(), table(profile))]));
    let i = &cfg.integrator;
    let mut integ = vec![
        ("cfl_advective", num(i.cfl_advective)),
        ("cfl_diffusive", num(i.cfl_diffusive)),
        ("t_end", num(i.t_end)),
        ("max_steps", int(i.max_steps)),
        ("snapshot_every", int(i.snapshot_every)),
    ];
    if let Some(dt) = i.fixed_dt {
        integ.push(("fixed_dt", num(dt)));
    }
    root.insert("integrator".into(), table(integ));

    let p = &cfg.params;
    let ints = |v: &[usize]| Value::Array(v.iter().map(|n| int(*n)).collect());
    let floats = |v: &[f64]| Value::Array(v.iter().map(|x| num(*x)).collect());
    let analysis: Vec<(&str, Value)> = cfg
        .analysis
        .keys()
        .iter()
        .map(|k| {
            let v = match *k {
                "resolutions" => ints(&p.resolutions),
                "shift" => num(p.shift),
                "omegas" => floats(&p.omegas),
                "samples" => int(p.samples),
                "seed" => int(p.seed as usize),
                "density_amplitude" => num(p.density_amplitude),
                "temperature_amplitudes" => floats(&p.temperature_amplitudes),
                "phases" => int(p.phases),
                "closure_resolutions" => ints(&p.closure_resolutions),
                "closure_dt" => num(p.closure_dt),
                _ => int(p.closure_steps),
            };
            (*k, v)
        })
        .collect();
    if !analysis.is_empty() {
        root.insert("analysis".into(), table(analysis));
    }
    root.insert(
        "diagnostics".into(),
        table(vec![
            ("conserved", Value::Boolean(cfg.diagnostics.conserved)),
            ("entropy", Value::Boolean(cfg.diagnostics.entropy)),
            ("fields", Value::Boolean(cfg.diagnostics.fields)),
        ]),
    );
    root.insert(
        "output".into(),
        table(vec![
            ("directory", Value::String(cfg.output.directory.to_string_lossy().into_owned())),
            ("plot_script", Value::Boolean(cfg.output.plot_script)),
        ]),
    );
    if let Some(w) = cfg.workers {
        root.insert("execution".into(), table(vec![("workers", int(w))]));
    }
    if !cfg.sweep.is_empty() {
        let mut s = Table::new();
        for a in &cfg.sweep {
            s.insert(
                a.parameter.clone(),
                Value::Array(
                    a.values
                        .iter()
                        .map(|v| match v {
                            SweepValue::Number(x) => num(*x),
                            SweepValue::Text(t) => Value::String(t.clone()),
                        })
                        .collect(),
                ),
            );
        }
        root.insert("sweep".into(), Value::Table(s));
    }
    toml::to_string(&root).expect("a TOML table always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
variant = "nsf"

[transport]
mu = 0.01
kappa_h = 0.015

[grid]
cells = 32

[initial.uniform]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.variant, ModelVariant::NsfBaseline);
        assert_eq!(c.analysis, AnalysisKind::Trajectory);
        assert_eq!(c.length, 1.0);
        assert_eq!(c.boundary, Boundary::Periodic);
        assert_eq!(c.integrator, IntegratorConfig::default());
        assert_eq!(
            c.initial,
            InitialProfile::Uniform {
                density: 1.0,
                velocity: 0.0,
                temperature: 1.0
            }
        );
        assert!(c.sweep.is_empty());
        assert_eq!(c.output.directory, PathBuf::from("output"));
    }

    #[test]
    fn negative_coefficient_names_the_field() {
        let text = MINIMAL.replace("kappa_h = 0.015", "kappa_h = 0.015\nkappa_m = -0.1");
        let e = parse_config(&text).unwrap_err();
        assert!(e.mentions("transport.kappa_m"), "{e}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = r#"
[scenario]
variant = "nsf"
colour = "red"

[transport]
mu = "thick"

[grid]
cells = 32

[initial.uniform]
[initial.gaussian-pulse]

[integrator]
cfl_advective = 2.0
"#;
        let e = parse_config(text).unwrap_err();
        for p in ["scenario.colour", "transport.mu", "transport.kappa_h", "initial", "integrator"] {
            assert!(e.mentions(p), "missing {p} in {e}");
        }
    }

    #[test]
    fn dimensionless_mode_requires_reference() {
        let text = r#"
[scenario]
variant = "volume-full"
mode = "dimensionless"

[grid]
cells = 32

[initial.uniform]
"#;
        assert!(parse_config(text).unwrap_err().mentions("reference"));
    }

    #[test]
    fn sweep_axes_must_exist() {
        let text = format!("{MINIMAL}\n[sweep]\n\"transport.viscosity\" = [1.0]\n");
        let e = parse_config(&text).unwrap_err();
        assert!(e.0.iter().any(|i| i.path.starts_with("sweep.transport.viscosity")), "{e}");
        // kn needs dimensionless mode
        let text = format!("{MINIMAL}\n[sweep]\nkn = [1e-3]\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn sweep_expands_to_cross_product() {
        let text = format!("{MINIMAL}\n[sweep]\n\"transport.kappa_m\" = [0.0, 0.01, 0.02]\n\"scenario.variant\" = [\"nsf\", \"bivelocity-reduced\"]\n");
        let c = parse_config(&text).unwrap();
        let pts = expand_sweep(&c).unwrap();
        assert_eq!(pts.len(), 6);
        let labels: BTreeSet<String> = pts.iter().map(|p| p.label()).collect();
        assert_eq!(labels.len(), 6);
        assert!(pts.iter().all(|p| p.config.sweep.is_empty()));
    }

    #[test]
    fn round_trip() {
        let text = format!("{MINIMAL}\n[sweep]\n\"transport.kappa_m\" = [0.0, 0.01]\n");
        let a = parse_config(&text).unwrap();
        let b = parse_config(&to_toml(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn analysis_keys_are_checked_per_kind() {
        let text = format!("{MINIMAL}\n[analysis]\nshift = 2.0\n");
        assert!(parse_config(&text).unwrap_err().mentions("analysis.shift"));
    }
}
