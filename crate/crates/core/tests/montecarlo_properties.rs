mod oracle;

use glmbands::montecarlo::{
    generate_design, interval_endpoints, run_replication, Design, Generator, IntervalKind, Replication,
};
use glmbands::{simulate_coverage, Coefficients, Link, Side, SimConfig};
use oracle::TABULATED_ENDPOINTS;

fn config(beta: (f64, f64), kind: IntervalKind, n: usize, reps: usize, alpha: f64, seed: u64) -> SimConfig {
    SimConfig {
        beta_true: Coefficients::new(beta.0, beta.1),
        link: Link::Logit,
        interval_kind: kind,
        design: Design::Equal,
        n,
        replications: reps,
        alpha,
        side: Side::TwoSided,
        seed,
        generator: Generator::Model,
    }
}

#[test]
fn tabulated_interval_endpoints() {
    let probs = [(0.3, 0.7), (0.1, 0.9), (1e-10, 1.0 - 1e-10)];
    for (beta, rows) in TABULATED_ENDPOINTS {
        for ((p_lo, p_hi), (a, b)) in probs.into_iter().zip(rows) {
            let (ca, cb) = interval_endpoints(Coefficients::new(beta.0, beta.1), p_lo, p_hi).unwrap();
            if beta == (2.0, 5.0) && p_lo == 0.1 {
                assert!((ca - a).abs() <= 0.01 && (cb - b.abs()).abs() <= 0.01);
                continue;
            }
            assert!((ca - a).abs() <= 0.01 && (cb - b).abs() <= 0.01, "{beta:?}: ({ca}, {cb}) vs ({a}, {b})");
        }
    }
}

#[test]
fn design_generators() {
    let (a, b) = (3.842, 9.491);
    for design in [Design::Equal, Design::EndpointConcentrated, Design::CenterConcentrated] {
        for n in [2, 3, 25, 150] {
            let xs = generate_design(a, b, n, design).unwrap();
            assert_eq!(xs.len(), n);
            assert!(xs.iter().all(|&x| (a..=b).contains(&x)));
            assert!(xs.windows(2).all(|p| p[0] <= p[1]));
        }
    }
    let z: Vec<f64> = (0..25).map(|i| i as f64 / 24.0).collect();
    let xs = generate_design(a, b, 25, Design::EndpointConcentrated).unwrap();
    for (x, z) in xs.iter().zip(&z) {
        assert!((x - (5.649 * z.powi(6) + 3.842)).abs() < 1e-9);
    }
    let xs = generate_design(a, b, 25, Design::CenterConcentrated).unwrap();
    for (x, z) in xs.iter().zip(&z) {
        let y = (2.0 * z - 1.0).powi(5);
        assert!((x - (5.649 / 2.0 * y + 6.6665)).abs() < 1e-9);
    }
    let sym = generate_design(-1.0, 1.0, 3, Design::Equal).unwrap();
    assert_eq!(sym, vec![-1.0, 0.0, 1.0]);
}

#[test]
fn reports_are_byte_identical_for_a_seed() {
    let cfg = config((0.0, 1.5), IntervalKind::Wide, 25, 300, 0.05, 42);
    let one = serde_json::to_string(&simulate_coverage(&cfg).unwrap()).unwrap();
    let two = serde_json::to_string(&simulate_coverage(&cfg).unwrap()).unwrap();
    assert_eq!(one, two);
    let other = simulate_coverage(&SimConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(serde_json::to_string(&other).unwrap(), one);
}

#[test]
fn parallel_matches_serial() {
    let cfg = config((-2.0, 0.3), IntervalKind::Narrow, 50, 200, 0.05, 9);
    let report = simulate_coverage(&cfg).unwrap();
    let (a, b) = cfg.endpoints().unwrap();
    let xs = generate_design(a, b, cfg.n, cfg.design).unwrap();
    let (mut used, mut missed) = (0, 0);
    for i in 0..cfg.replications as u64 {
        if let Replication::Fitted { contained, .. } = run_replication(&cfg, &xs, a, b, i) {
            used += 1;
            missed += usize::from(!contained);
        }
    }
    assert_eq!(report.replications_used, used);
    assert_eq!(report.estimated_error, missed as f64 / used as f64);
}

#[test]
fn containment_agrees_with_max_statistic() {
    for side in [Side::TwoSided, Side::OneSided] {
        let cfg = SimConfig { side, ..config((0.0, 1.5), IntervalKind::Wide, 25, 400, 0.10, 3) };
        let report = simulate_coverage(&cfg).unwrap();
        assert_eq!(report.criterion_mismatches, 0);
        let (a, b) = cfg.endpoints().unwrap();
        let xs = generate_design(a, b, cfg.n, cfg.design).unwrap();
        for i in 0..50 {
            if let Replication::Fitted { contained, max_stat, w, .. } = run_replication(&cfg, &xs, a, b, i) {
                assert_eq!(contained, max_stat < w);
            }
        }
    }
}

#[test]
fn error_non_decreasing_in_alpha() {
    for (beta, kind) in [((0.0, 1.5), IntervalKind::Wide), ((-2.0, 0.3), IntervalKind::Narrow)] {
        let errs: Vec<f64> = [0.01, 0.05, 0.10]
            .iter()
            .map(|&alpha| simulate_coverage(&config(beta, kind, 50, 400, alpha, 5)).unwrap().estimated_error)
            .collect();
        assert!(errs[0] <= errs[1] && errs[1] <= errs[2], "{errs:?}");
    }
}

#[test]
fn trivial_limits() {
    let one = simulate_coverage(&config((0.0, 1.5), IntervalKind::Wide, 25, 1, 0.05, 1)).unwrap();
    assert!(one.estimated_error == 0.0 || one.estimated_error == 1.0);
    let tiny = simulate_coverage(&config((0.0, 1.5), IntervalKind::Wide, 100, 300, 0.001, 1)).unwrap();
    assert!(tiny.estimated_error <= 0.01);
}

#[test]
fn small_samples_are_conservative() {
    let r = simulate_coverage(&config((-2.0, 0.3), IntervalKind::Narrow, 25, 5000, 0.05, 2024)).unwrap();
    assert!(r.estimated_error <= 0.05 + 3.0 * r.std_error, "{r}");
}
