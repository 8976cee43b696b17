use std::f64::consts::PI;

use bivelocity::analysis::dispersion::{dispersion_relation, Background};
use bivelocity::analysis::entropy::{entropy_budget_volume, NSF_SHEAR};
use bivelocity::constitutive::compute_fluxes;
use bivelocity::governing::rhs;
use bivelocity::{FlowState, GasModel, Grid1D, ModelVariant, TransportCoefficients};
use proptest::prelude::*;

/// Three-mode Fourier field `base * (1 + sum a_m sin(2 pi m x + p_m))`.
fn field(x: &[f64], base: f64, amps: &[f64; 3], phases: &[f64; 3]) -> Vec<f64> {
    x.iter()
        .map(|x| {
            let s: f64 = (0..3).map(|m| amps[m] * (2.0 * PI * (m + 1) as f64 * x + phases[m]).sin()).sum();
            base * (1.0 + s)
        })
        .collect()
}

fn amps(max: f64) -> impl Strategy<Value = [f64; 3]> {
    [-max..max, -max..max, -max..max]
}

fn phases() -> impl Strategy<Value = [f64; 3]> {
    [0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI]
}

prop_compose! {
    fn smooth_state(n: usize)(ra in amps(0.1), ua in amps(0.5), ta in amps(0.1), va in amps(0.05),
                              rp in phases(), up in phases(), tp in phases(), vp in phases())
                             -> FlowState {
        let gas = GasModel::default();
        let grid = Grid1D::periodic(n, 1.0).unwrap();
        let x = grid.centers();
        let rho = field(&x, 1.0, &ra, &rp);
        let u = field(&x, 0.3, &ua, &up);
        let e = field(&x, gas.cv, &ta, &tp);
        let mut s = FlowState::compatible(&gas, &rho, &u, &e).unwrap();
        // phi = a_n v_bar away from one exercises the full model
        let phi = field(&x, 1.0, &va, &vp);
        for (v, f) in s.v_bar.iter_mut().zip(phi) {
            *v *= f;
        }
        s
    }
}

fn coeffs() -> TransportCoefficients {
    TransportCoefficients::new(0.02, 0.03, 0.015, 0.01).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_totals_are_conserved(state in smooth_state(64)) {
        let gas = GasModel::default();
        let grid = Grid1D::periodic(64, 1.0).unwrap();
        for v in ModelVariant::ALL {
            let d = rhs(v, &state, &coeffs(), &gas, &grid).unwrap();
            // the volume equation carries a production term, so only the first three telescope
            for c in [&d.mass, &d.momentum, &d.energy] {
                let scale: f64 = c.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
                prop_assert!(c.iter().sum::<f64>().abs() < 1e-12 * scale, "{v}");
            }
        }
    }

    #[test]
    fn shear_and_thermal_productions_are_nonnegative(state in smooth_state(64)) {
        let gas = GasModel::default();
        let grid = Grid1D::periodic(64, 1.0).unwrap();
        let fx = compute_fluxes(&state, &coeffs(), &gas, &grid).unwrap();
        let b = entropy_budget_volume(&state, &fx, &coeffs(), &gas, &grid).unwrap();
        for name in [NSF_SHEAR, "thermal_production"] {
            prop_assert!(b.term(name).unwrap().values.iter().all(|v| *v >= -1e-14), "{name}");
        }
    }

    #[test]
    fn zeroed_coefficients_reduce_to_baseline(state in smooth_state(32)) {
        let gas = GasModel::default();
        let grid = Grid1D::periodic(32, 1.0).unwrap();
        let base = rhs(ModelVariant::NsfBaseline, &state, &coeffs(), &gas, &grid).unwrap();
        let reduced = rhs(ModelVariant::BivelocityReduced, &state, &coeffs().with_kappa_m(0.0), &gas, &grid).unwrap();
        let klim = rhs(ModelVariant::Klimontovich, &state, &coeffs().with_kappa_klim(0.0), &gas, &grid).unwrap();
        prop_assert_eq!(&base, &reduced);
        prop_assert!(base.max_abs_difference(&klim) <= 1e-12 * base.momentum.iter().fold(1.0f64, |a, b| a.max(b.abs())));
    }

    #[test]
    fn dispersion_roots_degenerate(mu in 1e-4..0.1f64, kh in 1e-4..0.1f64, w in 0.05..20.0f64) {
        let gas = GasModel::default();
        let bg = Background { density: 1.0, temperature: 1.0 };
        let c = TransportCoefficients::new(mu, kh, 0.0, 0.0).unwrap();
        let nsf = dispersion_relation(ModelVariant::NsfBaseline, &bg, &c, &gas, &[w]).unwrap();
        for v in [ModelVariant::BivelocityReduced, ModelVariant::VolumeFull, ModelVariant::Klimontovich] {
            let d = dispersion_relation(v, &bg, &c, &gas, &[w]).unwrap();
            let (a, b) = (d.points[0].physical, nsf.points[0].physical);
            prop_assert!((a - b).norm() <= 1e-10 * b.norm(), "{v}: {a} vs {b}");
        }
    }
}
