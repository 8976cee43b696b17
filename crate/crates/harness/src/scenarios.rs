//! Built-in scenario library. Each entry is an ordinary scenario file, so
//! `describe` output can be saved, edited and run with `bivel run`.

use crate::config::{parse_config, ConfigErrors, ScenarioConfig};

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`; `bivel list` shows the library")]
    Unknown(String),
    #[error("built-in scenario `{name}` is invalid: {source}")]
    Invalid { name: String, source: ConfigErrors },
}

const KN_VALUES: &str = "[1e-3, 3e-3, 1e-2, 3e-2, 1e-1]";

pub static LIBRARY: [Scenario; 10] = [
    Scenario {
        name: "acoustic-decay",
        summary: "small-amplitude acoustic eigenmode; solver decay rate against the dispersion root",
        description: "Seeds one wavelength of the linear right-running acoustic eigenmode \
(amplitude 1e-5 of the background density) on 64 periodic cells and integrates to t = 2. \
The decay rate of the density Fourier amplitude is fitted and compared with -Re(sigma) of \
the temporal dispersion root at the same wavenumber. Expect agreement within 2%.",
        toml: r#"[scenario]
name = "acoustic-decay"
variant = "nsf"
analysis = "acoustic-decay"

[transport]
mu = 0.01
kappa_h = 0.015

[grid]
cells = 64
length = 1.0

[initial.sinusoidal-acoustic]
amplitude = 1e-5

[integrator]
t_end = 2.0
"#,
    },
    Scenario {
        name: "gaussian-pulse",
        summary: "density/temperature pulse on a periodic grid; conservation and entropy budgets",
        description: "A Gaussian density and temperature bump at rest on 256 periodic cells, \
advanced 1000 RK4 steps. Writes conserved integrals per step, entropy-budget integrals and \
field snapshots every 100 steps. Mass, momentum and energy totals should drift by round-off \
only (below 1e-10 relative) for every variant; sweep `scenario.variant` to compare them.",
        toml: r#"[scenario]
name = "gaussian-pulse"
variant = "bivelocity-reduced"
analysis = "trajectory"

[transport]
mu = 0.01
kappa_h = 0.015
kappa_m = 0.01
kappa_klim = 0.01

[grid]
cells = 256
length = 1.0

[initial.gaussian-pulse]
amplitude = 0.2
temperature_amplitude = 0.1
width = 0.08

[integrator]
t_end = 100.0
max_steps = 1000
snapshot_every = 100
"#,
    },
    Scenario {
        name: "klimontovich-entropy-search",
        summary: "phase/amplitude scan for the sign of the Klimontovich curly-bracket group",
        description: "Scans rho = 1 + a sin(kx), T = 1 + b sin(kx + theta) at rest over 8 phases \
and several temperature amplitudes, evaluating the Klimontovich entropy budget. Reports the \
extreme values of the sign-indefinite group 2 kappa T cv grad(rho).grad(T)/T^2 - rho kappa R \
|grad rho|^2/rho^2, and the first state whose total production goes negative, if any. \
The group should take both signs.",
        toml: r#"[scenario]
name = "klimontovich-entropy-search"
variant = "klimontovich"
analysis = "klimontovich-search"

[transport]
mu = 0.02
kappa_h = 0.03
kappa_klim = 0.015

[grid]
cells = 64
length = 1.0

[initial.uniform]

[analysis]
density_amplitude = 0.3
temperature_amplitudes = [0.0, 0.1, 0.3]
phases = 8
"#,
    },
    Scenario {
        name: "kn-ordering-sweep",
        summary: "Knudsen-number ordering of the volume-model entropy terms",
        description: "Holds the dimensionless fields rho* = 1 + 0.2 sin(2 pi x*), \
U* = 0.3 cos(2 pi x* + 0.6), T* = 1 + 0.1 sin(2 pi x* + 1.7) fixed and varies the mean free \
path, so that mu0 = rho0 C0 lambda, kappa_m0 = C0 lambda and kappa_h0 = mu0 C0^2 / T0 change \
with Kn = lambda / L only. Each entropy term is divided by the rate scale (rho0/M) C0^3 / L and \
integrated. In the dimensionless budget the heat-conduction and NSF shear groups carry Kn, \
the two cross groups Pi_Um:grad(J_v/v) and Pi_Jv:grad(U_m) carry Kn^2, and \
Pi_Jv:grad(J_v/v) carries Kn^3. The sweep summary (knudsen.csv) fits log-log slopes, which \
should come out as 1, 1, 2, 2 and 3.",
        toml: r#"[scenario]
name = "kn-ordering-sweep"
variant = "volume-full"
analysis = "kn-ordering"
mode = "dimensionless"

[reference]
mean_free_path = 1e-3
length = 1.0
molecular_speed = 1.0
density = 1.0
temperature = 1.0
mu_star = 1.0
kappa_h_star = 1.0
kappa_m_star = 1.0

[grid]
cells = 64

[initial.sinusoidal-acoustic]
density_amplitude = 0.2
velocity_amplitude = 0.3
temperature_amplitude = 0.1

[sweep]
kn = KN_VALUES
"#,
    },
    Scenario {
        name: "rigid-rotation-eval",
        summary: "entropy production of an isothermal rigidly rotating gas",
        description: "Evaluates the volume-model closures on U = Omega(-y, x), uniform T and the \
centrifugally balanced density rho0 exp(Omega^2 r^2 / (2 R T)) on a 33x33 sample of \
[-L/2, L/2]^2, with Omega L / C0 = 0.5. The mass-velocity stress and the entropic heat flux \
vanish identically; the Pi_Jv:grad(J_v/v) production does not. The sweep over Kn fits its \
nondimensional integral against Kn, expecting slope 3.",
        toml: r#"[scenario]
name = "rigid-rotation-eval"
variant = "volume-full"
analysis = "rigid-rotation"
mode = "dimensionless"

[reference]
mean_free_path = 1e-3
length = 1.0
molecular_speed = 1.0
density = 1.0
temperature = 1.0
mu_star = 1.0
kappa_h_star = 1.0
kappa_m_star = 1.0

[grid]
cells = 33

[initial.rigid-rotation-field]
omega = 0.5
samples = 33

[sweep]
kn = KN_VALUES
"#,
    },
    Scenario {
        name: "galilean-pair",
        summary: "same pulse in a rest frame and a moving frame, mismatch against resolution",
        description: "Runs a Gaussian pulse and the same pulse with uniform velocity 1 added, \
both to t = L / 1 so that the moving frame has crossed the periodic domain exactly once, \
at 64, 128 and 256 cells. The frame-mapped max-norm mismatch of a_n, v_bar, U and e_in \
is written per resolution with the fitted order (about 2).",
        toml: r#"[scenario]
name = "galilean-pair"
variant = "bivelocity-reduced"
analysis = "galilean-pair"

[transport]
mu = 0.005
kappa_h = 0.005
kappa_m = 0.005

[grid]
cells = 64
length = 1.0

[initial.gaussian-pulse]
amplitude = 0.2
temperature_amplitude = 0.1
width = 0.08

[analysis]
resolutions = [64, 128, 256]
shift = 1.0
"#,
    },
    Scenario {
        name: "center-of-mass",
        summary: "center-of-mass balance residual on solver output",
        description: "Integrates a Gaussian pulse to t = 0.05 at 64, 128 and 256 cells and \
evaluates the pointwise residual of dB/dt + div[B U - t(p I + Pi_v)], B = rho x - rho U t, \
from the solver's own time derivatives. The largest residual should fall at second order.",
        toml: r#"[scenario]
name = "center-of-mass"
variant = "bivelocity-reduced"
analysis = "center-of-mass"

[transport]
mu = 0.005
kappa_h = 0.005
kappa_m = 0.005

[grid]
cells = 64
length = 1.0

[initial.gaussian-pulse]
amplitude = 0.2
temperature_amplitude = 0.1
width = 0.08

[integrator]
t_end = 0.05

[analysis]
resolutions = [64, 128, 256]
"#,
    },
    Scenario {
        name: "model-reduction",
        summary: "variant RHS agreement when the extra diffusion coefficient is zero",
        description: "Draws 10 smooth random periodic states on 128 cells and compares the \
right-hand sides of the reduced bivelocity model (kappa_m = 0), the full volume model \
(kappa_m = 0, compatible v_bar) and the Klimontovich model (kappa = 0) with the NSF \
baseline, elementwise relative to the largest baseline entry. Also reports the reduced \
model's indefinite entropy residual -(1/T) J_v d(Pi_v)/dx at the configured kappa_m.",
        toml: r#"[scenario]
name = "model-reduction"
variant = "nsf"
analysis = "model-reduction"

[transport]
mu = 0.02
kappa_h = 0.03
kappa_m = 0.015
kappa_klim = 0.01

[grid]
cells = 128
length = 1.0

[initial.uniform]

[analysis]
samples = 10
seed = 1
"#,
    },
    Scenario {
        name: "manufactured-convergence",
        summary: "forced manufactured solution; solver order and entropy-budget closure order",
        description: "Forces each variant with the source that makes a traveling sinusoidal \
profile exact, runs to t = 0.25 at 32, 64 and 128 cells and fits the max-norm error order \
(about 2). Also evaluates the volume-model entropy balance along the Gibbs path from two \
consecutive solver states and fits the closure-residual order over 64, 128 and 256 cells \
with dt shrinking as dx^2.",
        toml: r#"[scenario]
name = "manufactured-convergence"
variant = "volume-full"
analysis = "manufactured-convergence"

[transport]
mu = 0.02
kappa_h = 0.03
kappa_m = 0.015
kappa_klim = 0.01

[grid]
cells = 32
length = 1.0

[initial.manufactured]

[integrator]
t_end = 0.25

[analysis]
resolutions = [32, 64, 128]
closure_resolutions = [64, 128, 256]
closure_dt = 0.002
closure_steps = 4

[sweep]
"scenario.variant" = ["nsf", "bivelocity-reduced", "volume-full", "klimontovich"]
"#,
    },
    Scenario {
        name: "dispersion-scan",
        summary: "linear acoustic dispersion and attenuation against frequency",
        description: "Linearizes the selected variant about a uniform gas at rest, solves the \
dispersion polynomial for k at 13 frequencies between 1e-2 and 1e1, and writes the \
physical branch next to the NSF one. At low frequency the phase speed approaches \
sqrt(gamma R T0); with kappa_m > 0 the attenuation departs from NSF by an amount that \
grows with frequency. Sweep `transport.kappa_m` to compare diffusion strengths.",
        toml: r#"[scenario]
name = "dispersion-scan"
variant = "bivelocity-reduced"
analysis = "dispersion"

[transport]
mu = 0.01
kappa_h = 0.015
kappa_m = 0.015

[grid]
cells = 64
length = 1.0

[initial.uniform]
"#,
    },
];

pub fn names() -> Vec<&'static str> {
    LIBRARY.iter().map(|s| s.name).collect()
}

pub fn find(name: &str) -> Result<&'static Scenario, ScenarioError> {
    LIBRARY
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::Unknown(name.to_string()))
}

impl Scenario {
    /// Scenario file text with shared placeholders filled in.
    pub fn text(&self) -> String {
        self.toml.replace("KN_VALUES", KN_VALUES)
    }

    pub fn config(&self) -> Result<ScenarioConfig, ScenarioError> {
        parse_config(&self.text()).map_err(|source| ScenarioError::Invalid {
            name: self.name.to_string(),
            source,
        })
    }
}

pub fn list() -> String {
    let w = LIBRARY.iter().map(|s| s.name.len()).max().unwrap_or(0);
    LIBRARY
        .iter()
        .map(|s| format!("{:w$}  {}\n", s.name, s.summary))
        .collect()
}

pub fn describe(name: &str) -> Result<String, ScenarioError> {
    let s = find(name)?;
    Ok(format!("{}\n\n{}\n\nScenario file:\n\n{}", s.name, s.description, s.text()))
}

pub fn load(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    find(name)?.config()
}
