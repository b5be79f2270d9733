mod common;

use common::TestRng;
use emphi::montecarlo::{
    power_curve_with, replication_rng, sample_population, simulate_coverage_with, simulate_width_with, Execution,
    Marginal, Population, Scenario,
};
use emphi::statistics::Statistic;

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn normal_draws_have_the_requested_moments() {
    let n = 1_000_000;
    let s = sample_population(&Marginal::Normal { mean: 1.0, variance: 1.5 }, n, &mut replication_rng(3, 0)).unwrap();
    let (mean, var) = moments(s.values());
    assert!((mean - 1.0).abs() < 4.0 * (1.5 / n as f64).sqrt(), "mean {mean}");
    // var of S^2 for normal data is 2 sigma^4 / (n - 1)
    assert!((var - 1.5).abs() < 4.0 * (2.0 * 1.5 * 1.5 / n as f64).sqrt(), "variance {var}");
}

#[test]
fn lognormal_draws_have_the_moment_formula_mean() {
    let n = 200_000;
    let dist = Marginal::LogNormal { vartheta: 1.1, theta: 0.4 };
    let s = sample_population(&dist, n, &mut replication_rng(5, 0)).unwrap();
    let (mean, _) = moments(s.values());
    let expected = 1.3f64.exp();
    let sd = ((0.4f64.exp() - 1.0) * (2.0 * 1.1 + 0.4f64).exp()).sqrt();
    assert!((mean - expected).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn identical_seeds_give_identical_draws() {
    let sc = Scenario::lognormal_case(15, 30, 99);
    assert_eq!(sc.draw(17).unwrap(), sc.draw(17).unwrap());
    assert_ne!(sc.draw(17).unwrap(), sc.draw(18).unwrap());
    let other = Scenario { seed: 100, ..sc };
    assert_ne!(sc.draw(17).unwrap(), other.draw(17).unwrap());
}

#[test]
fn estimates_are_pure_functions_of_the_inputs() {
    let sc = Scenario::normal_case(15, 30, 4);
    let stats = Statistic::study_set();
    let a = simulate_width_with(&sc, &stats, 150, Execution::Sequential).unwrap();
    let b = simulate_width_with(&sc, &stats, 150, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let grid = [-0.5, 0.0, 0.5];
    let p = power_curve_with(&sc, &stats, &grid, 150, Execution::Sequential).unwrap();
    let q = power_curve_with(&sc, &stats, &grid, 150, Execution::Parallel).unwrap();
    assert_eq!(p, q);
}

#[test]
fn doubling_the_scale_doubles_the_z_width() {
    let base = Scenario::normal_case(30, 30, 8);
    let wide = Scenario {
        population: Population::Normal { mu: 1.0, var1: 6.0, var2: 6.0, delta: 0.0 },
        ..base
    };
    let stats = [Statistic::ZTest];
    let a = simulate_width_with(&base, &stats, 400, Execution::Parallel).unwrap();
    let b = simulate_width_with(&wide, &stats, 400, Execution::Parallel).unwrap();
    let ratio = b.rows[0].estimate / a.rows[0].estimate;
    // same draws, so only the bisection tolerance separates the two
    assert!((ratio - 2.0).abs() < 1e-3, "ratio {ratio}");
}

#[test]
fn z_width_agrees_with_direct_simulation_of_the_variances() {
    let (m, n, r) = (60, 60, 400);
    let sc = Scenario::normal_case(m, n, 12);
    let sim = simulate_width_with(&sc, &[Statistic::ZTest], r, Execution::Parallel).unwrap();
    let mut rng = TestRng::new(77);
    let z = 1.959_963_984_540_054;
    let reps = 20_000;
    let widths: Vec<f64> = (0..reps)
        .map(|_| {
            let (_, v1) = moments(&rng.normals(m, 1.0, 1.5f64.sqrt()));
            let (_, v2) = moments(&rng.normals(n, 1.0, 1.5f64.sqrt()));
            2.0 * z * (v1 / m as f64 + v2 / n as f64).sqrt()
        })
        .collect();
    let (oracle, var) = moments(&widths);
    let se = (sim.rows[0].stderr.powi(2) + var / reps as f64).sqrt();
    assert!((sim.rows[0].estimate - oracle).abs() < 4.0 * se, "{} vs {oracle}", sim.rows[0].estimate);
}

#[test]
fn power_at_the_null_is_the_complement_of_coverage() {
    let stats = Statistic::study_set();
    let sc = Scenario::normal_case(30, 30, 21);
    let cov = simulate_coverage_with(&sc, &stats, 500, Execution::Parallel).unwrap();
    let pow = power_curve_with(&sc, &stats, &[0.0], 500, Execution::Parallel).unwrap();
    for (c, p) in cov.rows.iter().zip(&pow) {
        assert_eq!(c.kind, p.kind);
        assert!((p.rejection_rate - (1.0 - c.estimate / 100.0)).abs() < 1e-12, "{}", c.kind);
    }

    let sc = Scenario::lognormal_case(15, 30, 21);
    let cov = simulate_coverage_with(&sc, &stats, 500, Execution::Parallel).unwrap();
    let pow = power_curve_with(&sc, &stats, &[0.0], 500, Execution::Parallel).unwrap();
    for (c, p) in cov.rows.iter().zip(&pow) {
        let se = c.stderr / 100.0;
        assert!((p.rejection_rate - (1.0 - c.estimate / 100.0)).abs() <= 4.0 * se + 1e-12, "{}", c.kind);
    }
}

#[test]
fn lognormal_displacement_reaches_each_grid_point() {
    let sc = Scenario::lognormal_case(15, 30, 0);
    for delta in [-2.0, -0.5, 0.0, 0.7, 3.0] {
        let p = sc.population.displaced(delta).unwrap();
        assert!((p.true_delta() - delta).abs() < 1e-12, "{delta}");
    }
    assert!(sc.population.displaced(-(1.3f64.exp())).is_err());
}
