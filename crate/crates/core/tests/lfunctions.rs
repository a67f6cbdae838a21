use lfmodel::ellcurve::{root_number, Curve, FamilyKind, FamilySpec, GammaFactor, LData};
use lfmodel::leval::{argument_count, central_derivative, central_order, find_zeros, numeric_sign, prepare, EvalParams};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn ready(curve: Curve, height: f64) -> LData {
    let mut l = LData::new(curve, 1);
    prepare(&mut l, height, &EvalParams::default());
    l
}

#[test]
fn curve_11a_central_value() {
    // short model of y² + y = x³ - x² - 10x - 20
    let l = ready(Curve::new(-13392, -1_080_432).unwrap(), 1.0);
    assert_eq!(l.conductor, 11);
    assert_eq!(l.sign().unwrap(), 1);
    let params = EvalParams::default();
    assert_eq!(central_order(&l, &params).unwrap(), 0);
    let value = central_derivative(&l, 0, &params).unwrap();
    assert!((value - 0.253_841_860_8).abs() < 1e-7, "{value}");
}

#[test]
fn zero_count_matches_argument_principle() {
    let params = EvalParams::default();
    for curve in [Curve::new(-13392, -1_080_432).unwrap(), Curve::new(-16, 16).unwrap()] {
        let l = ready(curve, 12.0);
        let zeros = find_zeros(&l, 12.0, &params).unwrap();
        let arg = argument_count(&l, 12.0, &params).unwrap();
        assert!((arg - zeros.ordinates.len() as f64).abs() < 0.25, "{curve}: {arg} vs {:?}", zeros.ordinates);
        assert!(zeros.ordinates.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn numeric_sign_agrees_with_closed_form() {
    let curves = FamilySpec::new(FamilyKind::F1, 1e6).unwrap().semistable().sample(25, 8).unwrap();
    let params = EvalParams::default();
    for c in curves {
        let l = ready(c, 2.0);
        assert_eq!(numeric_sign(&l, &params).unwrap(), root_number(&c).unwrap(), "{c}");
    }
}

#[test]
fn numeric_sign_covers_additive_curves() {
    // y² = x³ + 1 has additive reduction at 2 and 3, conductor 36, sign +1
    let c = Curve::new(0, 1).unwrap();
    assert!(root_number(&c).is_err());
    let l = ready(c, 2.0);
    assert_eq!(l.conductor, 36);
    assert_eq!(numeric_sign(&l, &EvalParams::default()).unwrap(), 1);
}

#[test]
fn refined_conductor_closed_form() {
    let offset = 2.0 * std::f64::consts::PI.ln() + 2.0 * EULER_GAMMA + 2.0 * 2f64.ln();
    let mut last_ratio = 0.0;
    for n in [11u64, 37, 5077, 1_000_003, 1 << 40, u64::MAX / 3] {
        let c = GammaFactor::for_conductor(n).refined_conductor();
        let log_n = (n as f64).ln();
        assert!((c - (log_n - offset).abs()).abs() < 1e-7 * log_n, "N = {n}: {c}");
        if n > 1000 {
            let ratio = c / log_n;
            assert!(ratio > last_ratio && ratio < 1.0);
            last_ratio = ratio;
        }
    }
}
