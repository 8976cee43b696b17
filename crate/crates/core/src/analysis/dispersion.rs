//! Linear plane waves `exp(i k x - i omega t)` about a uniform gas at rest.
//!
//! Each variant's 1D equations are linearized in `(d rho, d U, d T)`, plus
//! `d phi` for the full volume model, with `sigma = -i omega` and `s = i k`.
//! The determinant of the resulting polynomial matrix is expanded exactly
//! and its roots are the eigenvalues of the companion matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use super::least_squares;
use crate::error::{Error, Result};
use crate::governing::{Model, ModelVariant};
use crate::solver::{run, IntegratorConfig};
use crate::state::{FlowState, GasModel, Grid1D, TransportCoefficients};

/// Dense polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    pub fn real(c: f64) -> Self {
        Poly(vec![Complex64::new(c, 0.0)])
    }

    /// The monomial `z`.
    pub fn var() -> Self {
        Poly(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly(
            (0..n)
                .map(|i| self.0.get(i).copied().unwrap_or_default() + o.0.get(i).copied().unwrap_or_default())
                .collect(),
        )
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![Complex64::default(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly(self.0.iter().map(|v| v * c).collect())
    }

    /// Drops exactly-zero leading coefficients.
    pub fn trimmed(mut self) -> Poly {
        while self.0.len() > 1 && *self.0.last().unwrap() == Complex64::default() {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.clone().trimmed().0.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c)
    }

    fn derivative(&self) -> Poly {
        if self.0.len() < 2 {
            return Poly::real(0.0);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    /// All roots, from the companion matrix of the polynomial in `z / z_scale`,
    /// then Newton-polished in `z`.
    pub fn roots(&self, z_scale: f64) -> Result<Vec<Complex64>> {
        let p = self.clone().trimmed();
        let n = p.0.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        // q(w) = p(z_scale w) / lead
        let lead = p.0[n] * z_scale.powi(n as i32);
        let q: Vec<Complex64> = (0..n).map(|i| p.0[i] * z_scale.powi(i as i32) / lead).collect();
        if q.iter().any(|c| !c.is_finite()) {
            return Err(Error::RootFinding("polynomial coefficients overflow after scaling".into()));
        }
        let mut c = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            c[(i, n - 1)] = -q[i];
        }
        let eig = c
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::RootFinding("companion matrix Schur form did not converge".into()))?;
        let dp = p.derivative();
        let mut roots = Vec::with_capacity(n);
        for w in eig.iter() {
            let mut z = w * z_scale;
            for _ in 0..3 {
                let f = p.eval(z);
                let d = dp.eval(z);
                if d == Complex64::default() {
                    break;
                }
                let next = z - f / d;
                if next.is_finite() && p.eval(next).norm() < f.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            if !z.is_finite() {
                return Err(Error::RootFinding(format!("non-finite root {z}")));
            }
            roots.push(z);
        }
        Ok(roots)
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly::real(0.0);
    for col in 0..n {
        if m[0][col].0.iter().all(|c| *c == Complex64::default()) {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = m[0][col].mul(&determinant(&minor));
        det = det.add(&if col % 2 == 0 { term } else { term.scale(-1.0) });
    }
    det
}

/// Uniform background at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub density: f64,
    pub temperature: f64,
}

impl Background {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("density", self.density), ("temperature", self.temperature)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("background must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Linearized operator `L(sigma, s)` acting on `(d rho, d U, d T[, d phi])`.
fn linear_system(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    sigma: &Poly,
    s: &Poly,
) -> Vec<Vec<Poly>> {
    let c = variant.effective_coefficients(coeffs);
    let full = variant.advances_volume();
    let (rho0, t0) = (bg.density, bg.temperature);
    let r = gas.gas_constant;
    let e0 = gas.cv * t0;
    let p0 = rho0 * r * t0;
    let nu = c.normal_stress_factor(t0);
    let k = c.kappa_klim;
    let s2 = s.mul(s);
    let zero = Poly::real(0.0);

    // d j = kappa_m s (d rho / rho0 - d phi)
    let j_rho = s.scale(c.kappa_m / rho0);
    let j_phi = s.scale(-c.kappa_m);

    let mass = vec![sigma.add(&s2.scale(-k)), s.scale(rho0), zero.clone(), zero.clone()];
    let momentum = vec![
        s.scale(r * t0).add(&s2.mul(&j_rho).scale(-nu)),
        sigma.scale(rho0).add(&s2.scale(-nu - k * rho0)),
        s.scale(r * rho0),
        s2.mul(&j_phi).scale(-nu),
    ];
    let energy = vec![
        sigma.scale(e0).add(&s.mul(&j_rho).scale(p0)).add(&s2.scale(-k * e0)),
        s.scale(rho0 * e0 + p0),
        sigma.scale(rho0 * gas.cv).add(&s2.scale(-c.kappa_h - k * rho0 * gas.cv)),
        s.mul(&j_phi).scale(p0),
    ];
    let volume = vec![s.mul(&j_rho), s.clone(), zero.clone(), sigma.add(&s.mul(&j_phi))];

    let mut rows = vec![mass, momentum, energy];
    if full {
        rows.push(volume);
    } else {
        rows.iter_mut().for_each(|r| {
            r.pop();
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionPoint {
    pub omega: f64,
    /// Every root `k` of the dispersion polynomial.
    pub roots: Vec<Complex64>,
    /// Forward-propagating, decaying acoustic branch.
    pub physical: Complex64,
    /// `omega / Re k`, m/s.
    pub phase_speed: f64,
    /// `Im k`, 1/m.
    pub attenuation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionResult {
    pub variant: ModelVariant,
    pub points: Vec<DispersionPoint>,
}

impl DispersionResult {
    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn phase_speeds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.phase_speed).collect()
    }

    pub fn attenuations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.attenuation).collect()
    }
}

/// Dispersion polynomial in `k` at angular frequency `omega`.
pub fn spatial_polynomial(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    omega: f64,
) -> Poly {
    let i = Complex64::new(0.0, 1.0);
    let sigma = Poly::constant(-i * omega);
    let s = Poly(vec![Complex64::default(), i]);
    determinant(&linear_system(variant, bg, coeffs, gas, &sigma, &s)).trimmed()
}

/// Spatial roots `k(omega)` for each real `omega` (strictly increasing, positive).
///
/// The physical branch has `Im k >= 0` and `Re k > 0`; at the lowest
/// frequency it is the root nearest `omega / c_s`, afterwards the root
/// nearest the previous one.
pub fn dispersion_relation(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    omegas: &[f64],
) -> Result<DispersionResult> {
    bg.validate()?;
    if omegas.is_empty() {
        return Err(Error::InsufficientData("no frequencies given".into()));
    }
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "omegas",
            reason: "frequencies must be positive and strictly increasing".into(),
        });
    }
    let c_s = gas.sound_speed(bg.temperature);
    let mut points = Vec::with_capacity(omegas.len());
    let mut previous: Option<Complex64> = None;
    for &omega in omegas {
        let poly = spatial_polynomial(variant, bg, coeffs, gas, omega);
        let roots = poly.roots(omega / c_s)?;
        let target = previous.unwrap_or(Complex64::new(omega / c_s, 0.0));
        let physical = roots
            .iter()
            .copied()
            .filter(|k| k.im >= -1e-12 * k.norm() && k.re > 0.0)
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
            .ok_or_else(|| Error::RootFinding(format!("no forward decaying root at omega = {omega}")))?;
        previous = Some(physical);
        points.push(DispersionPoint {
            omega,
            roots,
            physical,
            phase_speed: omega / physical.re,
            attenuation: physical.im,
        });
    }
    Ok(DispersionResult { variant, points })
}

/// Temporal roots `sigma(k)` for a real wavenumber; a mode grows as `exp(sigma t)`.
pub fn temporal_roots(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    k: f64,
) -> Result<Vec<Complex64>> {
    bg.validate()?;
    let i = Complex64::new(0.0, 1.0);
    let s = Poly::constant(i * k);
    let poly = determinant(&linear_system(variant, bg, coeffs, gas, &Poly::var(), &s)).trimmed();
    poly.roots(gas.sound_speed(bg.temperature) * k.abs().max(f64::MIN_POSITIVE))
}

/// Right-running acoustic eigenmode at real wavenumber `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticMode {
    pub k: f64,
    pub sigma: Complex64,
    /// `(d rho, d U, d T[, d phi])`, scaled so `d rho = 1`.
    pub eigenvector: Vec<Complex64>,
}

impl AcousticMode {
    /// Amplitude decay rate `-Re sigma`.
    pub fn decay_rate(&self) -> f64 {
        -self.sigma.re
    }
}

pub fn acoustic_mode(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    k: f64,
) -> Result<AcousticMode> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("must be positive, got {k}"),
        });
    }
    let roots = temporal_roots(variant, bg, coeffs, gas, k)?;
    // right-running: oscillates as exp(-i c k t), i.e. Im sigma < 0
    let sigma = roots
        .iter()
        .copied()
        .filter(|s| s.im < 0.0)
        .min_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or_else(|| Error::RootFinding(format!("no propagating mode at k = {k}")))?;
    let i = Complex64::new(0.0, 1.0);
    let rows = linear_system(variant, bg, coeffs, gas, &Poly::constant(sigma), &Poly::constant(i * k));
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |r, c| rows[r][c].0[0]);
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::RootFinding("null vector unavailable".into()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let v: DVector<Complex64> = v_t.row(idx).transpose().map(|c| c.conj());
    if v[0].norm() == 0.0 {
        return Err(Error::RootFinding("acoustic mode carries no density perturbation".into()));
    }
    let v0 = v[0];
    Ok(AcousticMode {
        k,
        sigma,
        eigenvector: v.iter().map(|c| c / v0).collect(),
    })
}

/// Traveling acoustic wave `rho0 + amplitude Re(v exp(i k x))` on one
/// periodic wavelength.
pub fn acoustic_wave_state(
    mode: &AcousticMode,
    bg: &Background,
    gas: &GasModel,
    grid: &Grid1D,
    amplitude: f64,
) -> Result<FlowState> {
    let i = Complex64::new(0.0, 1.0);
    let n = grid.n_cells;
    let (mut a_n, mut v_bar, mut u, mut e) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let v = &mode.eigenvector;
    for x in grid.centers() {
        let ph = (i * mode.k * x).exp();
        let d = |c: usize| amplitude * (v[c] * ph).re;
        let rho = bg.density + d(0);
        let phi = if v.len() > 3 { 1.0 + d(3) } else { 1.0 };
        a_n.push(rho / gas.molecular_mass);
        v_bar.push(phi * gas.molecular_mass / rho);
        u.push(d(1));
        e.push(gas.cv * (bg.temperature + d(2)));
    }
    FlowState::new(a_n, v_bar, u, e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticDecayReport {
    pub predicted: f64,
    pub measured: f64,
    /// `|measured / predicted - 1|`.
    pub relative_error: f64,
    pub times: Vec<f64>,
    /// Modulus of the density Fourier coefficient at the wave's wavenumber.
    pub amplitudes: Vec<f64>,
}

/// Runs a small-amplitude acoustic eigenmode through the solver and fits the
/// exponential decay of its density Fourier amplitude.
#[allow(clippy::too_many_arguments)]
pub fn acoustic_decay(
    variant: ModelVariant,
    bg: &Background,
    coeffs: &TransportCoefficients,
    gas: &GasModel,
    wavelength: f64,
    cells_per_wavelength: usize,
    amplitude: f64,
    t_end: f64,
) -> Result<AcousticDecayReport> {
    let k = 2.0 * PI / wavelength;
    let mode = acoustic_mode(variant, bg, coeffs, gas, k)?;
    let grid = Grid1D::periodic(cells_per_wavelength, wavelength)?;
    let state = acoustic_wave_state(&mode, bg, gas, &grid, amplitude)?;
    let model = Model::new(variant, *gas, *coeffs, grid);
    let config = IntegratorConfig {
        t_end,
        snapshot_every: 4,
        ..Default::default()
    };
    let tr = run(&model, &state, &config)?;
    let x = grid.centers();
    let mut times = vec![0.0];
    let mut amplitudes = Vec::new();
    let coefficient = |s: &FlowState| {
        let c: Complex64 = s
            .a_n
            .iter()
            .zip(&x)
            .map(|(a, x)| gas.molecular_mass * a * Complex64::new(0.0, -k * x).exp())
            .sum();
        2.0 * c.norm() / x.len() as f64
    };
    amplitudes.push(coefficient(&state));
    for snap in tr.snapshots.iter().filter(|s| s.time > 0.0) {
        times.push(snap.time);
        amplitudes.push(coefficient(&snap.state));
    }
    let logs: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let measured = -least_squares(&times, &logs)?.slope;
    let predicted = mode.decay_rate();
    Ok(AcousticDecayReport {
        predicted,
        measured,
        relative_error: (measured / predicted - 1.0).abs(),
        times,
        amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg() -> Background {
        Background {
            density: 1.0,
            temperature: 1.0,
        }
    }

    #[test]
    fn determinant_of_constant_matrix() {
        let m: Vec<Vec<Poly>> = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]
            .iter()
            .map(|r| r.iter().map(|v| Poly::real(*v)).collect())
            .collect();
        assert!((determinant(&m).0[0].re - 18.0).abs() < 1e-14);
    }

    #[test]
    fn companion_roots() {
        // (z - 1)(z + 2i)(z - 3) expanded
        let f = Poly::var()
            .add(&Poly::real(-1.0))
            .mul(&Poly::var().add(&Poly::constant(Complex64::new(0.0, 2.0))))
            .mul(&Poly::var().add(&Poly::real(-3.0)));
        let mut r = f.roots(1.0).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        let want = [Complex64::new(0.0, -2.0), Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn inviscid_gas_is_nondispersive() {
        let gas = GasModel::default();
        let d = dispersion_relation(ModelVariant::NsfBaseline, &bg(), &TransportCoefficients::zero(), &gas, &[0.5, 1.0, 5.0])
            .unwrap();
        let c = gas.sound_speed(1.0);
        for p in &d.points {
            assert!((p.phase_speed - c).abs() < 1e-12 * c);
            assert!(p.attenuation.abs() < 1e-12);
        }
    }

    #[test]
    fn classical_attenuation_at_low_frequency() {
        // alpha = omega^2 / (2 rho c^3) [(4/3) mu + kappa_h (1/cv - 1/cp)]
        let gas = GasModel::default();
        let c = TransportCoefficients::new(0.01, 0.02, 0.0, 0.0).unwrap();
        let omega = 0.01;
        let d = dispersion_relation(ModelVariant::NsfBaseline, &bg(), &c, &gas, &[omega]).unwrap();
        let cs = gas.sound_speed(1.0);
        let cp = gas.cv + gas.gas_constant;
        let alpha = omega * omega / (2.0 * cs.powi(3)) * (4.0 / 3.0 * 0.01 + 0.02 * (1.0 / gas.cv - 1.0 / cp));
        assert!((d.points[0].attenuation - alpha).abs() < 1e-3 * alpha, "{} {alpha}", d.points[0].attenuation);
    }

    #[test]
    fn degenerate_variants_share_roots() {
        let gas = GasModel::default();
        let c = TransportCoefficients::new(0.01, 0.02, 0.0, 0.0).unwrap();
        let omegas = [0.1, 1.0, 10.0];
        let nsf = dispersion_relation(ModelVariant::NsfBaseline, &bg(), &c, &gas, &omegas).unwrap();
        for v in [ModelVariant::BivelocityReduced, ModelVariant::VolumeFull, ModelVariant::Klimontovich] {
            let d = dispersion_relation(v, &bg(), &c, &gas, &omegas).unwrap();
            for (a, b) in d.points.iter().zip(&nsf.points) {
                assert!((a.physical - b.physical).norm() < 1e-10 * b.physical.norm(), "{v}");
            }
        }
    }

    #[test]
    fn mode_satisfies_the_linear_system() {
        let gas = GasModel::default();
        let c = TransportCoefficients::new(0.01, 0.02, 0.03, 0.0).unwrap();
        for v in ModelVariant::ALL {
            let m = acoustic_mode(v, &bg(), &c, &gas, 3.0).unwrap();
            assert!(m.decay_rate() > 0.0);
            let rows = linear_system(v, &bg(), &c, &gas, &Poly::constant(m.sigma), &Poly::constant(Complex64::new(0.0, 3.0)));
            for row in rows {
                let r: Complex64 = row.iter().zip(&m.eigenvector).map(|(p, x)| p.0[0] * x).sum();
                assert!(r.norm() < 1e-10, "{v}: {r}");
            }
        }
    }

    #[test]
    fn volume_diffusion_shifts_attenuation() {
        let gas = GasModel::default();
        let omegas = [0.5, 1.0, 2.0, 4.0, 8.0];
        let att = |km: f64| {
            let c = TransportCoefficients::new(0.01, 0.02, km, 0.0).unwrap();
            dispersion_relation(ModelVariant::BivelocityReduced, &bg(), &c, &gas, &omegas)
                .unwrap()
                .attenuations()
        };
        let (a0, a1, a2) = (att(0.0), att(0.015), att(0.03));
        let d1: Vec<f64> = a1.iter().zip(&a0).map(|(a, b)| (a - b).abs()).collect();
        let d2: Vec<f64> = a2.iter().zip(&a0).map(|(a, b)| (a - b).abs()).collect();
        assert!(d1.iter().all(|d| *d > 0.0));
        assert!(d1.windows(2).all(|w| w[1] > w[0]), "{d1:?}");
        assert!(d2.iter().zip(&d1).all(|(a, b)| a > b));
    }

    #[test]
    fn rejects_bad_frequencies() {
        let gas = GasModel::default();
        let c = TransportCoefficients::zero();
        assert!(dispersion_relation(ModelVariant::NsfBaseline, &bg(), &c, &gas, &[1.0, 0.5]).is_err());
        assert!(dispersion_relation(ModelVariant::NsfBaseline, &bg(), &c, &gas, &[]).is_err());
    }
}
