//! Every example runs to completion.

#[allow(dead_code)]
#[path = "../examples/nonlinear_pairs.rs"]
mod nonlinear_pairs;
#[allow(dead_code)]
#[path = "../examples/leray_lions.rs"]
mod leray_lions;
#[allow(dead_code)]
#[path = "../examples/discretisation.rs"]
mod discretisation;
#[allow(dead_code)]
#[path = "../examples/heat_one_dof.rs"]
mod heat_one_dof;
#[allow(dead_code)]
#[path = "../examples/stefan_solve.rs"]
mod stefan_solve;
#[allow(dead_code)]
#[path = "../examples/step_sums.rs"]
mod step_sums;
#[allow(dead_code)]
#[path = "../examples/weak_compactness.rs"]
mod weak_compactness;
#[allow(dead_code)]
#[path = "../examples/minty.rs"]
mod minty;
#[allow(dead_code)]
#[path = "../examples/refinement_study.rs"]
mod refinement_study;
#[allow(dead_code)]
#[path = "../examples/indicators.rs"]
mod indicators;

#[test]
fn examples_run() {
    nonlinear_pairs::main().unwrap();
    leray_lions::main().unwrap();
    discretisation::main().unwrap();
    heat_one_dof::main().unwrap();
    stefan_solve::main().unwrap();
    step_sums::main().unwrap();
    weak_compactness::main().unwrap();
    minty::main().unwrap();
    refinement_study::study("stefan", 2).unwrap();
    let mut cfg = gdm::harness::IndicatorConfig::new(1);
    cfg.levels = 2;
    indicators::table(cfg).unwrap();
}
