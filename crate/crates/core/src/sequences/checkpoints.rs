// Engine checkpoints of the built-in diagonal-free sequence against the
// closed-form oracle.

use std::f64::consts::PI;

use super::{build_diagonal_free_cosy, run_transient, tau_for, TransientSpec};
use crate::engine::{Engine, EngineConfig};
use crate::oracle::{engine_label, OperatorTerm, Stage};
use crate::spinsys::{enumerate_isotopomers, parse_spin_system, Isotopomer};
use proptest::prelude::*;

fn labeled(text: &str) -> Isotopomer {
    let spec = parse_spin_system(text).unwrap();
    enumerate_isotopomers(&spec).into_iter().find(|i| i.labeled_site == Some(1)).unwrap()
}

fn three_spin(nu1: f64, j_h: f64) -> Isotopomer {
    labeled(&format!(
        "[proton 1]\nshift_hz = {nu1}\n[proton 2]\nshift_hz = -80\n[carbon 1]\nattached = 1\nj1ch_hz = 160\n[jhh]\n1 2 {j_h}\n"
    ))
}

fn geminal(nu1: f64, j_h: f64) -> Isotopomer {
    labeled(&format!(
        "[proton 1]\nshift_hz = {nu1}\n[proton 2]\nshift_hz = -60\n[carbon 1]\nattached = 1 2\nj1ch_hz = 160\n[jhh]\n1 2 {j_h}\n"
    ))
}

/// Largest deviation between engine projections and signed oracle terms.
fn deviation(iso: &Isotopomer, nu1: f64, t1: f64, stages: &[(Stage, Vec<OperatorTerm>)]) -> f64 {
    let engine = Engine::new(iso, EngineConfig::algebraic());
    let program = build_diagonal_free_cosy(tau_for(160.0));
    let spec = TransientSpec { t1_s: t1, states_shift: true, ..Default::default() };
    let tr = run_transient(&engine, &program, &spec, true).unwrap();
    let basis = engine.basis();
    let _ = nu1;
    let mut worst: f64 = 0.0;
    for (stage, terms) in stages {
        let rho = tr.checkpoint(stage.checkpoint()).unwrap();
        for (term, sign) in terms.iter().zip(stage.engine_signs()) {
            let op = basis.parse_op(&engine_label(&term.label, ["H1", "H2", "C1"]).unwrap()).unwrap();
            let got = basis.project(rho, &op);
            worst = worst.max((got - sign * term.coefficient).abs());
        }
    }
    worst
}

fn vicinal_stages(nu1: f64, j_h: f64, t1: f64) -> Vec<(Stage, Vec<OperatorTerm>)> {
    let w = 2.0 * PI * nu1;
    [Stage::BeforeMixing, Stage::AfterMixing, Stage::BeforeFilterPulse]
        .into_iter()
        .map(|s| (s, s.state(w, j_h, t1)))
        .collect()
}

#[test]
fn fixed_points() {
    for (nu1, j, t1) in [(120.0, 7.0, 0.0), (120.0, 7.0, 0.013), (-250.0, 12.0, 0.071)] {
        let d = deviation(&three_spin(nu1, j), nu1, t1, &vicinal_stages(nu1, j, t1));
        assert!(d < 1e-9, "({nu1}, {j}, {t1}): {d}");
    }
}

#[test]
fn geminal_matches_closed_form() {
    for (nu1, j, t1) in [(150.0, 14.0, 0.0), (150.0, 14.0, 0.017), (-40.0, 11.0, 0.063)] {
        let stage = Stage::GeminalBeforeFilterPulse;
        let d = deviation(&geminal(nu1, j), nu1, t1, &[(stage, stage.state(2.0 * PI * nu1, j, t1))]);
        assert!(d < 1e-9, "({nu1}, {j}, {t1}): {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_triples(nu1 in -300.0f64..300.0, j in 2.0f64..15.0, t1 in 0.0f64..0.09) {
        let d = deviation(&three_spin(nu1, j), nu1, t1, &vicinal_stages(nu1, j, t1));
        prop_assert!(d < 1e-9, "{}", d);
    }
}
