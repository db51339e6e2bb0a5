use std::f64::consts::PI;

use debranges_core::{
    bessel_uniqueness_experiment, detect_shift, uniqueness_experiment, EntireSolution,
    ExperimentOptions, Potential, PotentialFn, Verdict, I,
};

fn bessel(l: f64) -> Potential {
    Potential::bessel(l, PI, PotentialFn::Zero).unwrap()
}

#[test]
fn bessel_self_pair_is_equal() {
    let r = bessel_uniqueness_experiment(bessel(1.0), bessel(1.0), 30.0).unwrap();
    assert!(r.measures_equal);
    assert_eq!(r.verdict, Verdict::EqualUpToShift, "{r:?}");
    let (c1, c2) = r.centrifugal.unwrap();
    assert!((c1 - 2.0).abs() < 1e-3 && (c2 - 2.0).abs() < 1e-3);
    assert!(r.growth_note.contains("consistent"));
}

#[test]
fn bessel_indices_are_distinguished() {
    let r = bessel_uniqueness_experiment(bessel(0.0), bessel(1.0), 30.0).unwrap();
    assert_eq!(r.verdict, Verdict::Distinct);
    assert!(r.comparison.first_atom_difference >= 1.04575 - 1e-4);
}

#[test]
fn disguised_index_is_rejected() {
    let q = PotentialFn::custom(|x| 2.0 / (x * x));
    assert!(Potential::bessel(0.0, PI, q).is_err());
}

#[test]
fn shifted_regular_pair_is_equal_up_to_shift() {
    let s = 0.25;
    let q = PotentialFn::custom(|x| (2.0 * x).sin());
    let s1 = EntireSolution::regular(Potential::regular(-s, PI - s, q.clone()).unwrap(), 0.0).unwrap();
    let s2 = EntireSolution::regular(Potential::regular(0.0, PI, q.shifted(s)).unwrap(), 0.0).unwrap();
    let r = uniqueness_experiment(&s1, &s2, &ExperimentOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::EqualUpToShift, "{r:?}");
    assert!((r.eta.unwrap().intercept - s).abs() < 1e-5);
}

#[test]
fn free_and_bessel_are_distinct() {
    let free = EntireSolution::regular(Potential::regular(0.0, PI, PotentialFn::Zero).unwrap(), 0.0).unwrap();
    let b = EntireSolution::bessel(bessel(1.0)).unwrap();
    let r = uniqueness_experiment(&free, &b, &ExperimentOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Distinct);
    let eta = detect_shift(&free, &b, &[0.5, 1.0, 1.5, 2.0], I);
    if let Ok(eta) = eta {
        assert!((eta.slope - 1.0).abs() > 1e-3 || eta.fit_residual > 1e-3);
    }
}

#[test]
fn eta_tends_to_left_endpoint() {
    let sol = EntireSolution::regular(Potential::regular(0.0, PI, PotentialFn::Constant(0.5)).unwrap(), 0.0).unwrap();
    let ladder: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let eta = detect_shift(&sol, &sol, &ladder, I).unwrap();
    let first = eta.samples[0];
    assert!(first.1 < 0.02 && (first.1 - first.0).abs() < 1e-9);
}
