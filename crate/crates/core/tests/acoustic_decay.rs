use bivelocity::analysis::dispersion::{acoustic_decay, Background};
use bivelocity::{GasModel, ModelVariant, TransportCoefficients};

#[test]
fn solver_decay_matches_temporal_root() {
    let gas = GasModel::default();
    let bg = Background {
        density: 1.0,
        temperature: 1.0,
    };
    let coeffs = TransportCoefficients::new(0.01, 0.015, 0.0, 0.0).unwrap();
    let r = acoustic_decay(ModelVariant::NsfBaseline, &bg, &coeffs, &gas, 1.0, 64, 1e-5, 2.0).unwrap();
    println!("predicted {} measured {}", r.predicted, r.measured);
    assert!(r.relative_error < 0.02, "{r:?}");
}

#[test]
fn bivelocity_variants_track_their_own_roots() {
    let gas = GasModel::default();
    let bg = Background {
        density: 1.0,
        temperature: 1.0,
    };
    let coeffs = TransportCoefficients::new(0.01, 0.015, 0.02, 0.005).unwrap();
    for v in [ModelVariant::BivelocityReduced, ModelVariant::VolumeFull, ModelVariant::Klimontovich] {
        let r = acoustic_decay(v, &bg, &coeffs, &gas, 1.0, 64, 1e-5, 2.0).unwrap();
        println!("{v}: predicted {} measured {}", r.predicted, r.measured);
        assert!(r.relative_error < 0.02, "{v}: {} vs {}", r.measured, r.predicted);
    }
}
