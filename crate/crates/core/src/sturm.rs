//! Dirichlet Sturm-Liouville eigenproblems on `(0, 1)` and localization
//! scores of their eigenfunctions.
//!
//! The operator `-(p(x) phi')' = lambda phi` with `phi(0) = phi(1) = 0` is
//! discretized by the conservative three-point stencil with the metric
//! sampled at cell midpoints, which keeps the matrix symmetric positive
//! definite and O(h^2) accurate. Eigenpairs come from Sturm-sequence
//! bisection plus inverse iteration; nothing is randomized, so outputs are
//! reproducible bit for bit.

use crate::density::{Density, GridDensity1D, Interval};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::transport1d;

/// Metric used by the reference experiment: `tanh(40x - 10) + 1.1`.
pub fn reference_metric(x: f64) -> f64 {
    (40.0 * x - 10.0).tanh() + 1.1
}

/// A Dirichlet Sturm-Liouville problem sampled on `n` cells.
#[derive(Debug, Clone)]
pub struct SlProblem {
    n: usize,
    count: usize,
    /// Metric at the cell midpoints `(i + 1/2) h`.
    p_mid: Vec<f64>,
}

impl SlProblem {
    pub fn new(metric: impl Fn(f64) -> f64, n: usize, count: usize) -> Result<Self> {
        if count == 0 || n < 8 * count {
            return Err(Error::InvalidParameter(format!(
                "problem needs n >= 8 * count, got n = {n}, count = {count}"
            )));
        }
        let h = 1.0 / n as f64;
        let mut p_mid = Vec::with_capacity(n);
        for i in 0..n {
            let p = metric((i as f64 + 0.5) * h);
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "metric must be positive and finite, got p = {p} at x = {}",
                    (i as f64 + 0.5) * h
                )));
            }
            p_mid.push(p);
        }
        Ok(Self { n, count, p_mid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Symmetric tridiagonal operator on the interior nodes.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    /// Subdiagonal/superdiagonal (the matrix is symmetric).
    pub off: Vec<f64>,
    pub h: f64,
}

impl TridiagonalOperator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    fn norm_estimate(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let o = self.off.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        d + 2.0 * o
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let m = self.size();
        for i in 0..m {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                acc += self.off[i] * v[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm sequence count).
    fn count_below(&self, sigma: f64, pivmin: f64) -> usize {
        let mut count = 0usize;
        let mut prev = 1.0f64;
        for i in 0..self.size() {
            let sub = if i > 0 { self.off[i - 1] * self.off[i - 1] / prev } else { 0.0 };
            let mut d = self.diag[i] - sigma - sub;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
            prev = d;
        }
        count
    }
}

/// Conservative finite-difference discretization of the Sturm-Liouville
/// operator on the interior nodes `x_k = k/n`, `k = 1..n-1`.
pub fn discretize_sl(problem: &SlProblem) -> TridiagonalOperator {
    let n = problem.n;
    let h = 1.0 / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let m = n - 1;
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m - 1);
    for k in 0..m {
        diag.push((problem.p_mid[k] + problem.p_mid[k + 1]) * inv_h2);
        if k + 1 < m {
            off.push(-problem.p_mid[k + 1] * inv_h2);
        }
    }
    TridiagonalOperator { diag, off, h }
}

/// Eigenvalue and L2-normalized eigenfunction samples on the interior nodes.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// 1-based index in ascending eigenvalue order.
    pub index: usize,
    pub eigenvalue: f64,
    /// Values at the interior nodes `x_k = k/n`, normalized to
    /// `h * sum(phi^2) = 1`, first nonzero component positive.
    pub eigenfunction: Vec<f64>,
}

/// Tridiagonal solve of `(T - shift I) x = b` by LU with partial pivoting.
fn solve_shifted(op: &TridiagonalOperator, shift: f64, b: &[f64], pivmin: f64) -> Vec<f64> {
    let n = op.size();
    let mut d: Vec<f64> = op.diag.iter().map(|&a| a - shift).collect();
    let dl = op.off.clone();
    let mut du = op.off.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut rhs = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < pivmin {
                d[i] = if d[i] < 0.0 { -pivmin } else { pivmin };
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            du[i] = temp;
            let tb = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = tb - fact * rhs[i];
        }
    }
    if d[n - 1].abs() < pivmin {
        d[n - 1] = if d[n - 1] < 0.0 { -pivmin } else { pivmin };
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (rhs[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (rhs[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

/// Lowest `count` eigenpairs by bisection and inverse iteration, ascending.
pub fn eigensolve(op: &TridiagonalOperator, count: usize) -> Result<Vec<EigenPair>> {
    let m = op.size();
    if count == 0 || count > (m + 1) / 8 {
        return Err(Error::InvalidParameter(format!(
            "eigensolve supports 1 <= count <= (n)/8, got count = {count} at size {m}"
        )));
    }
    let scale = op.norm_estimate();
    let pivmin = f64::EPSILON * scale.max(1.0);
    // Gershgorin bracket
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let mut radius = 0.0;
        if i > 0 {
            radius += op.off[i - 1].abs();
        }
        if i + 1 < m {
            radius += op.off[i].abs();
        }
        lo = lo.min(op.diag[i] - radius);
        hi = hi.max(op.diag[i] + radius);
    }

    let mut pairs = Vec::with_capacity(count);
    let mut prev_vectors: Vec<(f64, Vec<f64>)> = Vec::new();
    for k in 0..count {
        // isolate the k-th smallest eigenvalue
        let (mut a, mut b) = (lo, hi);
        for _ in 0..160 {
            let mid = 0.5 * (a + b);
            if op.count_below(mid, pivmin) > k {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
        }
        let lambda = 0.5 * (a + b);

        let vector = inverse_iteration(op, lambda, k, &prev_vectors, scale, pivmin)
            .ok_or_else(|| {
                Error::Numerical(format!(
                    "inverse iteration failed to converge for eigenvalue index {}",
                    k + 1
                ))
            })?;
        prev_vectors.push((lambda, vector.clone()));
        pairs.push(EigenPair { index: k + 1, eigenvalue: lambda, eigenfunction: vector });
    }

    // enforce the deterministic sign convention and the L2 normalization
    let h = op.h;
    for pair in &mut pairs {
        let norm = (h * pair.eigenfunction.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let peak = pair.eigenfunction.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let flip = pair
            .eigenfunction
            .iter()
            .find(|v| v.abs() > 1e-12 * peak)
            .is_some_and(|&v| v < 0.0);
        let s = if flip { -1.0 / norm } else { 1.0 / norm };
        for v in &mut pair.eigenfunction {
            *v *= s;
        }
    }
    Ok(pairs)
}

fn inverse_iteration(
    op: &TridiagonalOperator,
    lambda: f64,
    k: usize,
    prev: &[(f64, Vec<f64>)],
    scale: f64,
    pivmin: f64,
) -> Option<Vec<f64>> {
    let m = op.size();
    let gap_tol = 1e-6 * scale;
    let close: Vec<&Vec<f64>> = prev
        .iter()
        .filter(|(l, _)| (l - lambda).abs() < gap_tol)
        .map(|(_, v)| v)
        .collect();
    let mut shift = lambda;
    for restart in 0..3 {
        let mut rng = SplitMix64::new(0x5EED_0000 + k as u64 + 101 * restart as u64);
        let mut v: Vec<f64> = (0..m).map(|_| rng.next_f64() - 0.5).collect();
        normalize(&mut v);
        for _ in 0..8 {
            let mut w = solve_shifted(op, shift, &v, pivmin);
            for other in &close {
                let dot: f64 = w.iter().zip(other.iter()).map(|(a, b)| a * b).sum();
                for (wi, oi) in w.iter_mut().zip(other.iter()) {
                    *wi -= dot * oi;
                }
            }
            normalize(&mut w);
            v = w;
            let mut tv = vec![0.0; m];
            op.apply(&v, &mut tv);
            let res: f64 = tv
                .iter()
                .zip(&v)
                .map(|(t, x)| (t - lambda * x) * (t - lambda * x))
                .sum::<f64>()
                .sqrt();
            if res <= 1e-12 * scale {
                return Some(v);
            }
        }
        shift = lambda * (1.0 + 1e-11) + pivmin;
    }
    None
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// How to evaluate the transport score of an eigenfunction density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreMode {
    /// Transport to the uniform density on `(0, 1)`.
    Standard,
    /// Transport to the uniform density on `(-margin, 1 + margin)`.
    Extended { margin: f64 },
}

/// Localization report for one eigenpair.
#[derive(Debug, Clone, Copy)]
pub struct SlScore {
    pub index: usize,
    pub eigenvalue: f64,
    pub alpha24_inv: f64,
    pub beta: f64,
}

/// Convert `|phi|` to a unit-mass density on `(0, 1)` (boundary cells are
/// zero by the Dirichlet condition) and score it.
pub fn score_localization(pairs: &[EigenPair], mode: ScoreMode) -> Result<Vec<SlScore>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no eigenpairs to score".into()));
    }
    pairs
        .iter()
        .map(|pair| {
            let u = eigenfunction_density(pair)?;
            let alpha = u.participation_ratio(2.0, 4.0)?;
            let beta = match mode {
                ScoreMode::Standard => transport1d::w2_quantile(&u)?,
                ScoreMode::Extended { margin } => transport1d::extended_domain_beta(&u, margin)?,
            };
            Ok(SlScore {
                index: pair.index,
                eigenvalue: pair.eigenvalue,
                alpha24_inv: 1.0 / alpha,
                beta,
            })
        })
        .collect()
}

/// The L1-normalized modulus of an eigenfunction as a grid density with the
/// Dirichlet zeros appended.
pub fn eigenfunction_density(pair: &EigenPair) -> Result<GridDensity1D> {
    let mut values = Vec::with_capacity(pair.eigenfunction.len() + 2);
    values.push(0.0);
    values.extend(pair.eigenfunction.iter().map(|v| v.abs()));
    values.push(0.0);
    GridDensity1D::new(Interval::unit(), values)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_metric_reduces_to_laplacian_stencil() {
        let problem = SlProblem { n: 5, count: 1, p_mid: vec![1.0; 5] }; // 4 interior nodes
        let op = discretize_sl(&problem);
        let h2 = 25.0;
        assert_eq!(op.size(), 4);
        for &d in &op.diag {
            assert!((d - 2.0 * h2).abs() < 1e-12);
        }
        for &o in &op.off {
            assert!((o + h2).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_shifted_matches_dense_lu() {
        let mut rng = SplitMix64::new(55);
        for trial in 0..20 {
            let m = 5 + (trial % 7);
            let diag: Vec<f64> = (0..m).map(|_| rng.range(-2.0, 4.0)).collect();
            let off: Vec<f64> = (0..m - 1).map(|_| rng.range(-2.0, 2.0)).collect();
            let op = TridiagonalOperator { diag: diag.clone(), off: off.clone(), h: 1.0 };
            let b: Vec<f64> = (0..m).map(|_| rng.range(-1.0, 1.0)).collect();
            let shift = rng.range(-0.5, 0.5);
            let x = solve_shifted(&op, shift, &b, 1e-13);
            let mut dense = nalgebra::DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                dense[(i, i)] = diag[i] - shift;
                if i + 1 < m {
                    dense[(i, i + 1)] = off[i];
                    dense[(i + 1, i)] = off[i];
                }
            }
            let expect = dense
                .lu()
                .solve(&nalgebra::DVector::from_vec(b.clone()))
                .expect("dense solve");
            for i in 0..m {
                assert!(
                    (x[i] - expect[i]).abs() < 1e-9 * (1.0 + expect[i].abs()),
                    "trial {trial}: component {i}: {} vs {}",
                    x[i],
                    expect[i]
                );
            }
        }
    }

    #[test]
    fn laplacian_eigenvalues_follow_the_discrete_dispersion() {
        let n = 256;
        let problem = SlProblem::new(|_| 1.0, n, 10).unwrap();
        let op = discretize_sl(&problem);
        let pairs = eigensolve(&op, 10).unwrap();
        let h = 1.0 / n as f64;
        for (k, pair) in pairs.iter().enumerate() {
            let kk = (k + 1) as f64;
            let discrete = 2.0 / (h * h) * (1.0 - (kk * std::f64::consts::PI * h).cos());
            assert!(
                (pair.eigenvalue - discrete).abs() < 1e-9 * discrete,
                "k = {kk}: {} vs discrete {discrete}",
                pair.eigenvalue
            );
            assert!(pair.eigenvalue > 0.0);
        }
        // strictly increasing simple spectrum
        for w in pairs.windows(2) {
            assert!(w[1].eigenvalue > w[0].eigenvalue);
        }
    }

    #[test]
    fn laplacian_eigenvalues_converge_to_continuum_at_second_order() {
        let n = 2048;
        let problem = SlProblem::new(|_| 1.0, n, 10).unwrap();
        let pairs = eigensolve(&discretize_sl(&problem), 10).unwrap();
        let h = 1.0 / n as f64;
        for (k, pair) in pairs.iter().enumerate() {
            let kk = (k + 1) as f64;
            let exact = (kk * std::f64::consts::PI).powi(2);
            let rel = (pair.eigenvalue - exact).abs() / exact;
            // the dispersion error of the three-point stencil is (k pi h)^2 / 12
            let bound = (kk * std::f64::consts::PI * h).powi(2) / 12.0;
            assert!(rel <= 1.05 * bound, "k = {kk}: rel error {rel} vs bound {bound}");
        }
    }

    #[test]
    fn laplacian_eigenfunctions_are_sines() {
        let n = 2048;
        let problem = SlProblem::new(|_| 1.0, n, 5).unwrap();
        let pairs = eigensolve(&discretize_sl(&problem), 5).unwrap();
        let h = 1.0 / n as f64;
        for (k, pair) in pairs.iter().enumerate() {
            let kk = (k + 1) as f64;
            let mut worst = 0.0f64;
            for (i, &v) in pair.eigenfunction.iter().enumerate() {
                let x = (i + 1) as f64 * h;
                let expect = (2.0f64).sqrt() * (kk * std::f64::consts::PI * x).sin();
                worst = worst.max((v - expect).abs());
            }
            assert!(worst < 1e-4, "k = {kk}: max node error {worst}");
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let n = 512;
        let problem = SlProblem::new(reference_metric, n, 12).unwrap();
        let pairs = eigensolve(&discretize_sl(&problem), 12).unwrap();
        let h = 1.0 / n as f64;
        for a in &pairs {
            for b in &pairs {
                let dot: f64 = h * a
                    .eigenfunction
                    .iter()
                    .zip(&b.eigenfunction)
                    .map(|(x, y)| x * y)
                    .sum::<f64>();
                let expect = if a.index == b.index { 1.0 } else { 0.0 };
                assert!(
                    (dot - expect).abs() < 1e-8,
                    "({}, {}): inner product {dot}",
                    a.index,
                    b.index
                );
            }
        }
    }

    #[test]
    fn first_sine_mode_scores_match_the_analytic_cdf() {
        let n = 4096;
        let problem = SlProblem::new(|_| 1.0, n, 1).unwrap();
        let pairs = eigensolve(&discretize_sl(&problem), 1).unwrap();
        let scores = score_localization(&pairs, ScoreMode::Standard).unwrap();
        // U(x) = (1 - cos(pi x))/2 gives beta^2 = 5/24 - 2/pi^2
        let expect = (5.0 / 24.0 - 2.0 / std::f64::consts::PI.powi(2)).sqrt();
        assert!(
            (scores[0].beta - expect).abs() < 5e-4,
            "beta = {} vs analytic {expect}",
            scores[0].beta
        );
    }

    #[test]
    fn constant_density_has_unit_alpha_inverse() {
        let pair = EigenPair { index: 1, eigenvalue: 1.0, eigenfunction: vec![1.0; 64] };
        let scores = score_localization(&[pair], ScoreMode::Standard).unwrap();
        // not exactly constant (two boundary zeros), but almost
        assert!(scores[0].alpha24_inv < 1.03);
        assert!(scores[0].alpha24_inv >= 1.0);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(SlProblem::new(|_| 1.0, 64, 20).is_err());
        assert!(SlProblem::new(|x| x - 0.5, 64, 2).is_err()); // metric changes sign
        let problem = SlProblem::new(|_| 1.0, 64, 2).unwrap();
        let op = discretize_sl(&problem);
        assert!(eigensolve(&op, 63).is_err());
    }
}
