use pairtomo::network::{calibrate_filter, FilterCalibration, Layer};
use pairtomo::sampler::CountsRecord;
use pairtomo::states::w_state;
use pairtomo::{generate_plan, sample};

#[test]
fn w5_histograms_are_stable() {
    let plan = generate_plan(5).unwrap();
    let counts = sample(&w_state(5).unwrap(), &plan, 8192, 42).unwrap();
    let frozen = include_str!("fixtures/w5_8192_seed42_counts.json");
    assert_eq!(counts.to_json().unwrap(), frozen);
    assert_eq!(CountsRecord::from_json(frozen).unwrap(), counts);
}

#[test]
fn n5_calibration_is_stable() {
    let plan = generate_plan(5).unwrap();
    let cal = calibrate_filter(5, &plan, Some(8192), 42).unwrap();
    let frozen = FilterCalibration::from_json(include_str!("fixtures/calibration_n5_8192_seed42.json")).unwrap();
    assert_eq!(cal, frozen);
    let t = cal.threshold(Layer::Concurrence).unwrap();
    assert!(t > 0.0 && t < 0.1, "{t}");
}
