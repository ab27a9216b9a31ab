//! Law of large numbers and CLT behaviour of the simulated hitting times.

use mdp_core::{clt_check, lln_check, DistributionSpec, Execution};

#[test]
fn medians_shrink_with_n() {
    let d = DistributionSpec::exponential(1.0).unwrap();
    let rows = lln_check(&d, 0.25, &[100, 1000, 10_000], 1000, 17, Execution::default()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].median_abs_dev < w[0].median_abs_dev), "{rows:?}");
    assert!(rows.iter().all(|r| r.censored == 0));
}

#[test]
fn medians_stable_in_replications() {
    let d = DistributionSpec::exponential(1.0).unwrap();
    let n_list = [100, 1000];
    let small = lln_check(&d, 0.25, &n_list, 1000, 5, Execution::default()).unwrap();
    let large = lln_check(&d, 0.25, &n_list, 2000, 5, Execution::default()).unwrap();
    for (a, b) in small.iter().zip(&large) {
        // median of |N(0, s²)| has sd ≈ 1.17·s/√M relative to its size s·0.674
        let s = (0.25 / a.n as f64).sqrt();
        let noise = 1.17 * s / (1000f64).sqrt();
        assert!((a.median_abs_dev - b.median_abs_dev).abs() <= 2.0 * 2.0 * noise, "{a:?} {b:?}");
    }
}

#[test]
fn poisson_clt() {
    let d = DistributionSpec::poisson(1.0).unwrap();
    let rep = clt_check(&d, 10_000, 0.25, 5000, 1, Execution::default()).unwrap();
    assert_eq!(rep.target_var, 0.25);
    assert!(rep.ks_distance < 0.05, "{rep:?}");
    assert!((rep.sample_var / rep.target_var - 1.0).abs() < 0.15, "{rep:?}");
}
