use wdlearn::acx::*;

fn trajectory(model: AcxModelSpec, n: usize, seed: u64) -> Trajectory {
    simulate(&model, &CovariateSpec::default(), &InnovationSpec::default(), n, 1000, seed).unwrap()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[test]
fn arx_mean_matches_fixed_point() {
    // E[Y] = b·m / (1 - a1 - a2)
    let want = 0.8 / (1.0 - 0.25 + 0.4);
    let traj = trajectory(AcxModelSpec::reference_arx(), 200_000, 11);
    let got = mean(&traj.y);
    let se = batch_means_se(&traj.y);
    assert!((got - want).abs() < 4.0 * se, "mean {got} vs {want} (se {se})");
    assert!((mean(&traj.chi) - 1.0).abs() < 0.02);
}

#[test]
fn trajectories_respect_the_closed_form_bound() {
    for model in [AcxModelSpec::reference_arx(), AcxModelSpec::reference_tarx()] {
        let bound = stationary_bound(&model, &CovariateSpec::default(), &InnovationSpec::default()).unwrap();
        let traj = trajectory(model.clone(), 1_000_000, 5);
        let sup = traj.y.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        assert!(traj.y.iter().all(|y| y.is_finite()));
        assert!(sup <= bound, "{}: sup {sup} > {bound}", model.label());
    }
}

#[test]
fn halves_look_stationary() {
    for model in [AcxModelSpec::reference_arx(), AcxModelSpec::reference_tarx()] {
        let traj = trajectory(model.clone(), 200_000, 21);
        let (a, b) = traj.y.split_at(100_000);
        let se = (batch_means_se(a).powi(2) + batch_means_se(b).powi(2)).sqrt();
        assert!((mean(a) - mean(b)).abs() < 4.0 * se, "{}: means", model.label());
        let sq = |x: &[f64]| x.iter().map(|v| v * v).collect::<Vec<_>>();
        let (qa, qb) = (sq(a), sq(b));
        let se = (batch_means_se(&qa).powi(2) + batch_means_se(&qb).powi(2)).sqrt();
        assert!((mean(&qa) - mean(&qb)).abs() < 4.0 * se, "{}: second moments", model.label());
    }
}

#[test]
fn reference_models_contract() {
    let xi = InnovationSpec::default().lr_norm(2.0);
    assert!((xi - 1.0).abs() < 1e-12);
    for model in [AcxModelSpec::reference_arx(), AcxModelSpec::reference_tarx()] {
        let r = contraction_report(&model, &CovariateSpec::default(), xi);
        assert!(r.satisfied, "{}: {}", model.label(), r.total);
    }
    let explosive = AcxModelSpec::Arx {
        lags: vec![1.2],
        covariate_coef: vec![0.0],
        timing: CovariateTiming::Contemporaneous,
    };
    let r = contraction_report(&explosive, &CovariateSpec::default(), xi);
    assert!(!r.satisfied);
    let err = simulate(&explosive, &CovariateSpec::default(), &InnovationSpec::default(), 10, 100_000, 1)
        .unwrap_err();
    assert!(matches!(err, wdlearn::Error::Explosion { .. }), "{err}");
}

#[test]
fn far_lag_covariance_vanishes() {
    let traj = trajectory(AcxModelSpec::reference_arx(), 1_000_000, 8);
    let id = |z: &[f64]| z[0];
    let est = empirical_cov_decay(&traj, id, id, &[0, 1, 20]).unwrap();
    assert!(est[0].cov > 0.5);
    assert!(est[1].abs_cov > 0.05);
    let far = &est[2];
    assert!(far.abs_cov < 4.0 * far.std_err + 1e-3, "{far:?}");
    assert!(empirical_cov_decay(&traj, id, id, &[600_000]).is_err());
}

#[test]
fn geometric_tau_decays_like_exp_sqrt() {
    let d = DecaySpec::Geometric { rate: 0.5, scale: 0.5 };
    let slope = |j: usize| tau_upper_bound(&d, j, 64).unwrap().ln() / (j as f64).sqrt();
    let (s1, s2) = (slope(100), slope(400));
    assert!(s1 < 0.0 && s2 < 0.0);
    assert!((s1 / s2 - 1.0).abs() < 0.03, "{s1} vs {s2}");
}

#[test]
fn riemann_tau_is_polylog() {
    let d = DecaySpec::Riemann { gamma: 4.0, scale: 0.5 };
    let ratio = |j: usize| {
        let j = j as f64;
        tau_upper_bound(&d, j as usize, 64).unwrap() / (j.ln() / j).powi(3)
    };
    let r = ratio(1000);
    assert!((5.0..=12.0).contains(&r), "{r}");
    assert!(ratio(100) < ratio(10_000) && ratio(10_000) < 2.0 * ratio(100));
}

#[test]
fn pairs_round_trip_through_csv() {
    let cov = CovariateSpec { dim: 2, ..Default::default() };
    let model = AcxModelSpec::Arx {
        lags: vec![0.3, 0.1],
        covariate_coef: vec![0.5, -0.2],
        timing: CovariateTiming::Lagged,
    };
    let traj = simulate(&model, &cov, &InnovationSpec::StandardNormal, 50, 10, 2).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let back = Trajectory::read_csv(buf.as_slice(), std::path::Path::new("mem.csv")).unwrap();
    assert_eq!(back.y, traj.y);
    assert_eq!(back.chi, traj.chi);
    assert_eq!(back.dx, 2);

    let ds = supervised_pairs(&back, 2).unwrap();
    assert_eq!(ds.len(), 48);
    assert_eq!(ds.width(), 6);
    for i in 0..ds.len() {
        let t = i + 2;
        assert_eq!(ds.target(i), traj.y[t]);
        for k in 1..=2 {
            let (y, chi) = ds.lag(i, k);
            assert_eq!(y, traj.y[t - k]);
            assert_eq!(chi, traj.chi_at(t - k));
        }
    }
}
