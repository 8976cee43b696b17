use bivelocity::governing::{Model, ModelVariant};
use bivelocity::manufactured::ManufacturedProfile;
use bivelocity::solver::{run_forced, IntegratorConfig};
use bivelocity::{GasModel, Grid1D, TransportCoefficients};

fn max_error(variant: ModelVariant, n: usize) -> f64 {
    let gas = GasModel::monatomic(1.0, 1.0).unwrap();
    let coeffs = TransportCoefficients::new(0.02, 0.03, 0.015, 0.01).unwrap();
    let prof = ManufacturedProfile::default();
    let grid = Grid1D::periodic(n, prof.length).unwrap();
    let model = Model::new(variant, gas, coeffs, grid);
    let init = prof.state(variant, &gas, &grid, 0.0).unwrap();
    let source = |t: f64| prof.source(variant, &coeffs, &gas, &grid, t);
    let cfg = IntegratorConfig {
        t_end: 0.25,
        ..Default::default()
    };
    let tr = run_forced(&model, &init, &cfg, Some(&source)).unwrap();
    let exact = prof.state(variant, &gas, &grid, tr.final_time).unwrap();
    let s = &tr.final_state;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst
            .max((s.a_n[i] - exact.a_n[i]).abs())
            .max((s.u_m[i] - exact.u_m[i]).abs())
            .max((s.e_in[i] - exact.e_in[i]).abs())
            .max((s.v_bar[i] - exact.v_bar[i]).abs());
    }
    worst
}

#[test]
fn every_variant_converges_at_second_order() {
    for v in ModelVariant::ALL {
        let e: Vec<f64> = [32, 64, 128].iter().map(|&n| max_error(v, n)).collect();
        let order = (e[1] / e[2]).log2();
        println!("{v}: errors {e:?} order {order}");
        assert!((order - 2.0).abs() < 0.2, "{v}: order {order}");
    }
}
