use tempfile::TempDir;

use wdlearn::erm::{erm_fit, FitConfig, LossKind, LossSpec};
use wdlearn::experiments::*;
use wdlearn::parallel::Workers;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        burn_in: 200,
        reference_size: 2000,
        n_grid: vec![50, 200],
        replications: 10,
        base_seed: 4,
        ..Default::default()
    }
}

#[test]
fn target_tracks_population_least_squares() {
    let cfg = ExperimentConfig::default();
    let p = cfg.predictor.predictor(1);
    let big = cfg.sample(1_000_000, 0xfeed).unwrap();
    let pop = erm_fit(&p, &cfg.predictor.param_box(1), &big, &LossSpec::new(LossKind::Squared), &FitConfig::default())
        .unwrap()
        .theta;
    // Monte Carlo spread of θ̃ at m = 10⁴ from independent reference samples
    let draws: Vec<Vec<f64>> = (0..30)
        .map(|s| estimate_target(&ExperimentConfig { base_seed: 1000 + s, ..cfg.clone() }, LossKind::Squared).unwrap().theta)
        .collect();
    let theta = estimate_target(&cfg, LossKind::Squared).unwrap().theta;
    for k in 0..theta.len() {
        let m = draws.iter().map(|d| d[k]).sum::<f64>() / 30.0;
        let sd = (draws.iter().map(|d| (d[k] - m).powi(2)).sum::<f64>() / 29.0).sqrt();
        assert!((theta[k] - pop[k]).abs() < 3.0 * sd, "coordinate {k}: {} vs {} (sd {sd})", theta[k], pop[k]);
    }
}

#[test]
fn curve_is_recomputable_from_records() {
    let r = run_excess_risk_curve(&small(), Workers::Fixed(2)).unwrap();
    assert_eq!(r.failures, 0);
    assert_eq!(r.replications.len(), 2 * 2 * 10);
    assert_eq!(aggregate(&r.replications, &r.targets), r.rows);
    for row in &r.rows {
        assert!(row.mean_excess >= 0.0 && row.reps == 10);
    }
    let dir = TempDir::new().unwrap();
    let reps = dir.path().join("r.csv");
    emit_replications_csv(&r.replications, &reps).unwrap();
    let back = read_replications_csv(&reps).unwrap();
    assert_eq!(back, r.replications);
    assert_eq!(aggregate(&back, &r.targets), r.rows);

    let curve = dir.path().join("c.csv");
    emit_csv(&r.rows, &curve).unwrap();
    assert_eq!(read_curve_csv(&curve).unwrap(), r.rows);
}

#[test]
fn empty_table_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("empty.csv");
    emit_csv(&[], &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "loss,n,mean_excess,sd,reps\n");
    assert!(read_curve_csv(&p).unwrap().is_empty());
}

#[test]
fn seed_streams_do_not_collide() {
    let mut seen = std::collections::HashSet::new();
    for loss in 0..2 {
        for n in [100, 400, 1600] {
            for rep in 0..500 {
                assert!(seen.insert(train_seed(1, loss, n, rep)));
                assert!(seen.insert(eval_seed(1, loss, n, rep)));
            }
        }
    }
}

#[test]
fn overlay_copies_the_empirical_column() {
    let r = run_excess_risk_curve(&small(), Workers::All).unwrap();
    let o = overlay_bounds(&r, &OverlayInputs::default(), 2).unwrap();
    assert_eq!(o.rows.len(), r.rows.len());
    for (row, c) in o.rows.iter().zip(&r.rows) {
        assert_eq!(row.empirical_excess, c.mean_excess);
        assert!(row.slow_bound > 0.0 && row.fast_bound > 0.0);
    }
    for loss in [LossKind::Absolute, LossKind::Squared] {
        let col: Vec<f64> = o.rows.iter().filter(|x| x.loss == loss).map(|x| x.slow_bound).collect();
        assert!(col.windows(2).all(|w| w[1] <= w[0]), "{col:?}");
    }
}
