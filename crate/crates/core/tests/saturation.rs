use filippov_core::flow::FlowOptions;
use filippov_core::nonuniqueness::{estimate_saturation, replay_witness, CellFlag};
use filippov_core::scenarios::get;

#[test]
fn ex43_band_between_the_cycles() {
    let s = get("ex43").unwrap();
    let opts = FlowOptions::default();
    let g = estimate_saturation(&s, 96, 96, 20.0, 64, &opts).unwrap();
    println!("fraction {}", g.fraction);
    assert!((g.fraction - 0.4444).abs() <= 0.03, "fraction {}", g.fraction);
    let pitch = s.domain.q / 96.0;
    for j in 0..96 {
        for i in 0..96 {
            let c = g.center(&s, i, j);
            if g.in_sat(i, j) {
                assert!(c.y.abs() < 1.0 + 2.0 * pitch, "cell at {c:?}");
            }
        }
    }
    for j in (0..96).step_by(5) {
        for i in (0..96).step_by(11) {
            if let CellFlag::InSat { witness } = g.flag(i, j) {
                assert!(replay_witness(&s, g.center(&s, i, j), witness, &opts).unwrap());
            }
        }
    }
}

#[test]
fn fold_fold_saturation_is_empty() {
    let s = get("foldfold_center").unwrap();
    let g = estimate_saturation(&s, 24, 24, 5.0, 64, &FlowOptions::default()).unwrap();
    assert_eq!(g.fraction, 0.0);
}

#[test]
fn saturation_grows_with_the_horizon() {
    let s = get("ex43").unwrap();
    let opts = FlowOptions::default();
    let short = estimate_saturation(&s, 24, 24, 2.0, 64, &opts).unwrap();
    let long = estimate_saturation(&s, 24, 24, 8.0, 64, &opts).unwrap();
    for k in 0..short.cells.len() {
        if matches!(short.cells[k], CellFlag::InSat { .. }) {
            assert!(matches!(long.cells[k], CellFlag::InSat { .. }), "cell {k}");
        }
    }
    assert!(long.count_in_sat() >= short.count_in_sat());
}
