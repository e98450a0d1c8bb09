use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fqc_core::{run_construction, ConstructionConfig, ConstructionState, StateData, TimeFunction};

fn state() -> &'static ConstructionState {
    static S: OnceLock<ConstructionState> = OnceLock::new();
    S.get_or_init(|| run_construction(&ConstructionConfig::default(), 2).unwrap())
}

#[test]
fn telescoping_sum() {
    let s = state();
    let base = s.phi.truncated(0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = rng.gen_range(-60.0..60.0);
        let direct = base.value(x) - s.phi.terms().iter().map(|f| f.value(x)).sum::<f64>();
        assert!((s.phi.value(x) - direct).abs() <= 1e-10, "x = {x}");
        for n in 1..=s.stage() {
            let step = s.phi.truncated(n - 1).value(x) - s.phi.terms()[n - 1].value(x);
            assert!((s.phi.truncated(n).value(x) - step).abs() <= 1e-10);
        }
    }
}

#[test]
fn phi_is_even_and_real() {
    let s = state();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let x = rng.gen_range(0.0..80.0);
        assert!((s.phi.value(x) - s.phi.value(-x)).abs() <= 1e-10);
        let t = rng.gen_range(0.0..1.3);
        assert!((s.phi.fourier(t).unwrap() - s.phi.fourier(-t).unwrap()).abs() <= 1e-10);
        for f in s.phi.terms() {
            assert!(f.fourier(t).unwrap().im.abs() <= 1e-10);
        }
    }
}

#[test]
fn spectrum_stays_in_omega() {
    let s = state();
    let omega = s.omega();
    for spec in s.phi.term_spectra() {
        assert!(omega.contains_union(&spec));
    }
    for t in [1.16, 1.3, 2.0, 5.0] {
        assert!(!omega.contains(t));
        assert_eq!(s.phi.fourier(t).unwrap(), 0.0);
    }
}

#[test]
fn state_json_round_trip() {
    let s = state();
    let json = serde_json::to_string(&s.to_data()).unwrap();
    let data: StateData = serde_json::from_str(&json).unwrap();
    assert_eq!(data, s.to_data());
    let back = ConstructionState::from_data(data).unwrap();
    assert_eq!(back.stage(), s.stage());
    for x in [0.0, 0.37, 3.9, 17.25, 101.0] {
        assert_eq!(back.phi.value(x), s.phi.value(x));
    }
    for t in [0.0, 0.2, 0.77, 1.1] {
        assert_eq!(back.phi.fourier(t).unwrap(), s.phi.fourier(t).unwrap());
    }

    let mut bad = s.to_data();
    bad.hstar.pop();
    assert!(ConstructionState::from_data(bad).is_err());
}

#[test]
fn one_more_stage_from_saved_state() {
    let s = state();
    let resumed = ConstructionState::from_data(s.to_data()).unwrap();
    let next = fqc_core::construction::construction_step(&resumed).unwrap();
    assert_eq!(next.stage(), 3);
    assert!(next.hstar[2] > next.hstar[1]);
    assert!(next.reports[2].checks.all());
}
