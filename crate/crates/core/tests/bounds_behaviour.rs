use wdlearn::acx::DecaySpec;
use wdlearn::bounds::*;
use wdlearn::erm::LossKind;
use wdlearn::experiments::{estimate_target, loss_series, ExperimentConfig};
use wdlearn::parallel::Workers;
use wdlearn::rng::rng_from_seed;

use rand::Rng;

fn constants(m: f64) -> BoundConstants {
    BoundConstants {
        m,
        l: 1.0,
        c0: 1.0,
        d: 2.0,
        s: 2.0,
    }
}

#[test]
fn min_n_slow_falls_with_m_at_loose_confidence() {
    let dp = DependenceParams::default();
    let grid = [1.0, 2.0, 4.0, 8.0, 16.0, 64.0];
    let covering: Vec<f64> = grid.iter().map(|&m| min_n_slow_terms(0.99, &constants(m), &dp).unwrap().1).collect();
    assert!(covering.windows(2).all(|w| w[1] <= w[0]), "{covering:?}");
    let v: Vec<f64> = grid[..3].iter().map(|&m| min_n_slow(0.99, &constants(m), &dp).unwrap()).collect();
    assert_eq!(v, vec![108475288.0, 423732.0, 1656.0]);
    // the confidence term grows like M^{3(μ+2)/2} and eventually takes over
    assert!(min_n_slow(0.99, &constants(8.0), &dp).unwrap() > v[2]);
    let tight: Vec<f64> = [1.0, 4.0].iter().map(|&m| min_n_slow(0.05, &constants(m), &dp).unwrap()).collect();
    assert!(tight[1] > tight[0], "{tight:?}");
}

fn eulerian(k: usize) -> Vec<f64> {
    // A(k, i) = (i+1) A(k-1, i) + (k-i) A(k-1, i-1)
    let mut row = vec![1.0];
    for n in 1..=k {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let keep = if i < row.len() { (i + 1) as f64 * row[i] } else { 0.0 };
            let shift = if i > 0 { (n - i) as f64 * row[i - 1] } else { 0.0 };
            next[i] = keep + shift;
        }
        row = next;
    }
    row
}

#[test]
fn geometric_moments_match_eulerian_closed_form() {
    let (a, c) = (0.4, 0.3);
    // Σ_{j ≥ 0} (j+1)^k c a^j = c A_k(a) / (1-a)^{k+1}, A_0 = 1
    let l1 = c / (1.0 - a);
    let l2 = 1.0 / (1.0 - a);
    let rep = moment_condition_check(&DecaySpec::Geometric { rate: a, scale: c }, 1.0, l1, l2, 10, 64).unwrap();
    for row in &rep.rows {
        let k = row.k as usize;
        let poly: f64 = eulerian(k).iter().enumerate().map(|(i, e)| e * a.powi(i as i32)).sum();
        let want = c * poly / (1.0 - a).powi(k as i32 + 1);
        assert!(((row.lhs - want) / want).abs() < 1e-10, "k={k}: {} vs {want}", row.lhs);
    }
    assert!((rep.rows[0].lhs - l1).abs() < 1e-12);
    assert!(rep.rows[0].satisfied && rep.rows[1].satisfied);
}

#[test]
fn riemann_moments_diverge_past_the_exponent() {
    let d = DecaySpec::Riemann { gamma: 3.5, scale: 0.2 };
    let rep = moment_condition_check(&d, 2.0, 3.0, 2.0, 4, 64).unwrap();
    assert!(rep.rows[0].satisfied && rep.rows[1].satisfied);
    for row in &rep.rows[3..] {
        assert!(!row.satisfied && row.reason.is_some(), "{row:?}");
    }
    assert!(!rep.satisfied);
}

#[test]
fn variance_estimate_recovers_iid_variance() {
    let est = variance_constant_estimate(
        |seed, n| {
            let mut rng = rng_from_seed(seed);
            Ok((0..n).map(|_| rng.random::<f64>()).collect())
        },
        &[200, 2000],
        600,
        5,
        Workers::All,
    )
    .unwrap();
    for (n, v) in &est.per_n {
        assert!((v * 12.0 - 1.0).abs() < 0.2, "n={n}: {v}");
    }
    let max = est.per_n.iter().map(|p| p.1).fold(0.0, f64::max);
    assert_eq!(est.c_hat, 1.2 * max);
    assert!(variance_constant_estimate(|_, n| Ok(vec![0.0; n]), &[10], 1, 0, Workers::All).is_err());
}

#[test]
fn variance_estimate_is_stable_for_arx_losses() {
    let cfg = ExperimentConfig { reference_size: 5000, burn_in: 500, ..Default::default() };
    let target = estimate_target(&cfg, LossKind::Squared).unwrap();
    let est = variance_constant_estimate(
        |seed, n| loss_series(&cfg, &target.theta, LossKind::Squared, seed, n),
        &[1000, 10_000],
        800,
        9,
        Workers::All,
    )
    .unwrap();
    let (a, b) = (est.per_n[0].1, est.per_n[1].1);
    assert!(a > 0.0 && b > 0.0);
    assert!((a / b - 1.0).abs() < 0.15, "{a} vs {b}");
}
