use super::*;
use crate::pulseprog::{parse, serialize};

#[test]
fn diagonal_free_tables() {
    let l = build_diagonal_free_cosy(tau_for(160.0));
    assert_eq!(l.gradient_ratio(), DIAGONAL_FREE_GRADIENTS.to_vec());
    assert_eq!(l.phase_table("phr").unwrap().entries, DIAGONAL_FREE_RECEIVER.to_vec());
    assert_eq!(l.phase_table("ph4").unwrap().entries, vec![1, 1, 1, 1, 3, 3, 3, 3]);
    assert_eq!(l.full_cycle(), 8);
    let two_tau = 2.0 * l.symbol("tau").unwrap();
    assert!((two_tau - 3.125e-3).abs() < 1e-15);
    assert!((3e-3..=4e-3).contains(&two_tau));
    let marks: Vec<&str> = l.marks().collect();
    assert_eq!(&marks[..10], &DIAGONAL_FREE_MARKS);
}

#[test]
fn builders_round_trip() {
    for l in [build_diagonal_free_cosy(0.0015625), build_conventional_cosy(), build_inept(0.0015625)] {
        assert_eq!(parse(&serialize(&l)).unwrap(), l);
    }
}

#[test]
fn plan_sizes() {
    let p = ExperimentPlan::new(build_conventional_cosy(), None, &AcquisitionParams::default()).unwrap();
    assert_eq!((p.n_t1, p.n_t2), (63, 175));
    assert!((p.t1(2) - 2.0 / 700.0).abs() < 1e-15);
}

#[test]
fn tau_override_sets_filter_too() {
    let p = ExperimentPlan::new(build_diagonal_free_cosy(1e-3), Some(2e-3), &AcquisitionParams::default()).unwrap();
    assert_eq!(p.program.symbol("tau"), Some(2e-3));
    assert_eq!(p.program.symbol("tauf"), Some(2e-3));
    assert_eq!(p.tau_s, 2e-3);
}

#[test]
fn bundled_programs_match_builders() {
    let tau = tau_for(160.0);
    for (text, built) in [
        (include_str!("../../programs/diagfree_cosy.pp"), build_diagonal_free_cosy(tau)),
        (include_str!("../../programs/cosy.pp"), build_conventional_cosy()),
        (include_str!("../../programs/inept.pp"), build_inept(tau)),
    ] {
        assert_eq!(parse(text).unwrap(), built);
        assert_eq!(serialize(&built), text);
    }
}
