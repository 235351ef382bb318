//! Localization scoring of the reference Sturm-Liouville problem across
//! resolutions.

use locz_core::sturm::{
    discretize_sl, eigensolve, reference_metric, score_localization, ScoreMode, SlProblem,
};

fn scores_at(n: usize, count: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let problem = SlProblem::new(reference_metric, n, count).unwrap();
    let pairs = eigensolve(&discretize_sl(&problem), count).unwrap();
    let standard = score_localization(&pairs, ScoreMode::Standard).unwrap();
    let extended = score_localization(&pairs, ScoreMode::Extended { margin: 1.0 }).unwrap();
    (
        standard.iter().map(|s| s.alpha24_inv).collect(),
        standard.iter().map(|s| s.beta).collect(),
        extended.iter().map(|s| s.beta).collect(),
    )
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut out = vec![0.0; v.len()];
        for (r, &i) in order.iter().enumerate() {
            out[i] = r as f64;
        }
        out
    };
    let (ra, rb) = (rank(a), rank(b));
    let mean = (a.len() as f64 - 1.0) / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        let (x, y) = (ra[i] - mean, rb[i] - mean);
        num += x * y;
        da += x * x;
        db += y * y;
    }
    num / (da * db).sqrt()
}

#[test]
fn scores_self_converge_under_refinement() {
    let count = 40;
    let (a_coarse, b_coarse, e_coarse) = scores_at(2048, count);
    let (a_fine, b_fine, e_fine) = scores_at(4096, count);
    for i in 0..count {
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
        assert!(
            rel(a_coarse[i], a_fine[i]) <= 5e-3,
            "alpha^-1 moved too much at index {}: {} vs {}",
            i + 1,
            a_coarse[i],
            a_fine[i]
        );
        assert!(
            rel(b_coarse[i], b_fine[i]) <= 5e-3,
            "beta moved too much at index {}: {} vs {}",
            i + 1,
            b_coarse[i],
            b_fine[i]
        );
        assert!(
            rel(e_coarse[i], e_fine[i]) <= 5e-3,
            "extended beta moved too much at index {}: {} vs {}",
            i + 1,
            e_coarse[i],
            e_fine[i]
        );
    }
}

#[test]
fn both_measures_rank_eigenfunctions_consistently() {
    let (alpha_inv, beta, _) = scores_at(2048, 40);
    let rho = spearman(&alpha_inv, &beta);
    assert!(rho > 0.0, "rank correlation between alpha^-1 and beta is {rho}");
}

#[test]
fn extended_domain_scores_decay_with_the_index() {
    let (_, _, extended) = scores_at(2048, 40);
    // least-squares slope against the index must be negative
    let n = extended.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    let ybar: f64 = extended.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &y) in extended.iter().enumerate() {
        num += (i as f64 - xbar) * (y - ybar);
        den += (i as f64 - xbar) * (i as f64 - xbar);
    }
    let slope = num / den;
    assert!(slope < 0.0, "extended-domain scores should decay, slope = {slope}");
}
