use emphi::example::reid_intervals;
use emphi::inference::{ci_closed_form_z, default_tolerance, invert_ci};
use emphi::samples::{reid_vapor_pressure, TwoSampleData};
use emphi::statistics::Statistic;

/// Reference 0.95 intervals for the Reid data, three decimals.
const REFERENCE: [(f64, f64); 7] = [
    (0.122, 0.703),
    (0.121, 0.712),
    (0.121, 0.718),
    (0.123, 0.724),
    (0.124, 0.726),
    (0.133, 0.725),
    (0.101, 0.712),
];

#[test]
fn reid_intervals_match_reference_values() {
    let rows = reid_intervals(0.95).unwrap();
    for (ci, (lo, hi)) in rows.iter().zip(REFERENCE) {
        assert!((ci.lower - lo).abs() <= 5e-3, "{}: lower {} vs {lo}", ci.kind, ci.lower);
        assert!((ci.upper - hi).abs() <= 5e-3, "{}: upper {} vs {hi}", ci.kind, ci.upper);
        assert!(!ci.interior_crossing, "{}", ci.kind);
    }
    // narrowest is gamma = -1
    let narrowest = rows
        .iter()
        .min_by(|a, b| a.width().total_cmp(&b.width()))
        .unwrap();
    assert_eq!(narrowest.kind, Statistic::PowerGamma(-1.0));
    assert!(rows.iter().all(|ci| !ci.contains(0.0)));
}

#[test]
fn z_interval_by_hand() {
    let data = reid_vapor_pressure();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let (x, y) = (data.x.values(), data.y.values());
    let se = (var(x) / x.len() as f64 + var(y) / y.len() as f64).sqrt();
    let center = mean(y) - mean(x);
    let z = 1.959_963_984_540_054;
    let ci = ci_closed_form_z(&data, 0.95).unwrap();
    assert!((ci.lower - (center - z * se)).abs() < 1e-12);
    assert!((ci.upper - (center + z * se)).abs() < 1e-12);
    let inverted = invert_ci(&data, &Statistic::ZTest, 0.95).unwrap();
    let tol = default_tolerance(&data);
    assert!((inverted.lower - ci.lower).abs() < tol && (inverted.upper - ci.upper).abs() < tol);
}

#[test]
fn swapping_the_samples_reflects_the_interval() {
    let data = reid_vapor_pressure();
    let swapped = TwoSampleData::new(data.y.clone(), data.x.clone()).unwrap();
    let tol = default_tolerance(&data);
    for s in [Statistic::PowerGamma(-1.0), Statistic::PowerGamma(0.0), Statistic::PowerGamma(2.0)] {
        let a = invert_ci(&data, &s, 0.95).unwrap();
        let b = invert_ci(&swapped, &s, 0.95).unwrap();
        assert!((a.lower + b.upper).abs() < tol && (a.upper + b.lower).abs() < tol, "{s}");
    }
}

#[test]
fn shifting_one_sample_shifts_the_interval() {
    let data = reid_vapor_pressure();
    let moved = TwoSampleData::new(data.x.clone(), data.y.shifted(&[1.25])).unwrap();
    let tol = default_tolerance(&data);
    for s in Statistic::study_set() {
        let a = invert_ci(&data, &s, 0.95).unwrap();
        let b = invert_ci(&moved, &s, 0.95).unwrap();
        assert!((b.lower - a.lower - 1.25).abs() < 2.0 * tol, "{s}");
        assert!((b.upper - a.upper - 1.25).abs() < 2.0 * tol, "{s}");
    }
}

#[test]
fn intervals_for_other_kinds() {
    let data = reid_vapor_pressure();
    for s in [
        Statistic::LogLik,
        Statistic::Weighted(emphi::divergence::PhiSpec::KullbackLeibler),
        Statistic::renyi(0.5).unwrap(),
    ] {
        let ci = invert_ci(&data, &s, 0.95).unwrap();
        assert!(ci.contains(data.delta_hat()[0]), "{s}");
        assert!(ci.width() > 0.0, "{s}");
    }
}
