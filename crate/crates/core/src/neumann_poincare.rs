//! Neumann-Poincare operator on smooth closed curves.
//!
//! Curves come from the superformula in polar form. Geometry (tangents,
//! speeds, curvature) is obtained by trigonometric differentiation of the
//! periodic coordinate functions, the boundary-integral operator
//!
//! ```text
//! (N phi)(x) = -(1/pi) p.v. int ((x - y) . nu_x / |x - y|^2) phi(y) dl(y)
//! ```
//!
//! is discretized by trapezoidal Nystrom collocation (spectrally accurate on
//! smooth curves, with the diagonal set to the smooth kernel limit
//! `kappa(x)/2`), and eigenfunctions are pulled back to `(0, 1)` as
//! speed-weighted unit-mass densities whose localization is then scored.

use crate::density::{Density, GridDensity1D, Interval};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::transport1d;
use nalgebra::{DMatrix, DVector};

/// Parameters of the superformula radius
/// `r(t) = (|a|^{-n2} |cos(pi m t / 2)|^{n2} + |b|^{-n3} |sin(pi m t / 2)|^{n3})^{-1/n1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperformulaParams {
    pub m: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub a: f64,
    pub b: f64,
}

impl SuperformulaParams {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0.0 || self.a == 0.0 || self.b == 0.0 {
            return Err(Error::InvalidParameter(
                "superformula needs n1 != 0 and nonzero a, b".into(),
            ));
        }
        Ok(())
    }
}

/// The three boundary curves used by the experiments.
pub fn reference_curves() -> [SuperformulaParams; 3] {
    [
        SuperformulaParams { m: 4.0, n1: 1.4, n2: 8.0, n3: 2.0, a: 1.44, b: 1.0 },
        SuperformulaParams { m: 4.0, n1: 4.0, n2: 20.0, n3: 20.0, a: 0.67, b: 1.0 },
        SuperformulaParams { m: 5.0, n1: 3.0, n2: 6.0, n3: 6.0, a: 1.0, b: 1.0 },
    ]
}

/// Evaluate the superformula radius at parameter `theta` in `[0, 1)`.
pub fn superformula(p: &SuperformulaParams, theta: f64) -> Result<f64> {
    p.validate()?;
    let arg = std::f64::consts::PI * p.m * theta / 2.0;
    let base = p.a.abs().powf(-p.n2) * arg.cos().abs().powf(p.n2)
        + p.b.abs().powf(-p.n3) * arg.sin().abs().powf(p.n3);
    let r = base.powf(-1.0 / p.n1);
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "superformula radius is not positive and finite at theta = {theta}: {r}"
        )));
    }
    Ok(r)
}

/// Geometry of a closed curve sampled at `n` equispaced parameter nodes.
#[derive(Debug, Clone)]
pub struct CurveSample {
    pub thetas: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    pub speeds: Vec<f64>,
    /// Unit outward normals.
    pub normals: Vec<[f64; 2]>,
    pub curvatures: Vec<f64>,
}

impl CurveSample {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Trapezoidal arc length (exact to spectral accuracy).
    pub fn total_length(&self) -> f64 {
        self.speeds.iter().sum::<f64>() / self.len() as f64
    }

    /// `(1/2pi) closed-int kappa ds`; equals 1 for a simple closed curve.
    pub fn turning_number(&self) -> f64 {
        let n = self.len() as f64;
        self.curvatures
            .iter()
            .zip(&self.speeds)
            .map(|(k, s)| k * s)
            .sum::<f64>()
            / n
            / (2.0 * std::f64::consts::PI)
    }
}

/// First and second derivatives of a periodic sample set by trigonometric
/// differentiation (direct O(n^2) transform; n stays modest here).
fn spectral_derivatives(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    assert!(n.is_multiple_of(2), "spectral differentiation expects an even sample count");
    let half = n / 2;
    let tau = std::f64::consts::TAU;
    let mut coef_a = vec![0.0; half + 1];
    let mut coef_b = vec![0.0; half + 1];
    for m in 0..=half {
        let (mut ca, mut cb) = (0.0, 0.0);
        for (k, &fk) in f.iter().enumerate() {
            let ang = tau * ((m * k) % n) as f64 / n as f64;
            ca += fk * ang.cos();
            cb += fk * ang.sin();
        }
        let scale = if m == 0 || m == half { 1.0 / n as f64 } else { 2.0 / n as f64 };
        coef_a[m] = ca * scale;
        coef_b[m] = cb * scale;
    }
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for k in 0..n {
        let (mut s1, mut s2) = (0.0, 0.0);
        for m in 1..half {
            let ang = tau * ((m * k) % n) as f64 / n as f64;
            let (sin, cos) = ang.sin_cos();
            let w = tau * m as f64;
            s1 += w * (coef_b[m] * cos - coef_a[m] * sin);
            s2 -= w * w * (coef_a[m] * cos + coef_b[m] * sin);
        }
        // the Nyquist mode cos(pi n theta) has zero slope at the nodes
        let w = std::f64::consts::PI * n as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s2 -= w * w * coef_a[half] * sign;
        d1[k] = s1;
        d2[k] = s2;
    }
    (d1, d2)
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Sample the superformula curve and its differential geometry at `n` even
/// equispaced nodes.
///
/// Derivatives are formed on an oversampled grid (at least 4096 nodes) and
/// restricted to the collocation nodes, so geometry accuracy does not degrade
/// when the collocation count is moderate.
pub fn sample_curve(p: &SuperformulaParams, n: usize) -> Result<CurveSample> {
    if n < 64 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "curve sampling needs an even node count n >= 64, got {n}"
        )));
    }
    let stride = (4096 / n).max(1);
    let fine = stride * n;
    let fine_thetas: Vec<f64> = (0..fine).map(|k| k as f64 / fine as f64).collect();
    let mut fxs = Vec::with_capacity(fine);
    let mut fys = Vec::with_capacity(fine);
    for &t in &fine_thetas {
        let r = superformula(p, t)?;
        let ang = std::f64::consts::TAU * t;
        fxs.push(r * ang.cos());
        fys.push(r * ang.sin());
    }
    let (fdx, fddx) = spectral_derivatives(&fxs);
    let (fdy, fddy) = spectral_derivatives(&fys);
    let pick = |v: &[f64]| -> Vec<f64> { (0..n).map(|k| v[k * stride]).collect() };
    let thetas: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    let xs = pick(&fxs);
    let ys = pick(&fys);
    let dx = pick(&fdx);
    let dy = pick(&fdy);
    let ddx = pick(&fddx);
    let ddy = pick(&fddy);

    let mut speeds = Vec::with_capacity(n);
    let mut tangents = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut curvatures = Vec::with_capacity(n);
    for k in 0..n {
        let speed = dx[k].hypot(dy[k]);
        if !(speed > 0.0) {
            return Err(Error::Numerical(format!(
                "vanishing parametrization speed at theta = {}",
                thetas[k]
            )));
        }
        speeds.push(speed);
        tangents.push([dx[k] / speed, dy[k] / speed]);
        // counterclockwise curve: outward normal is the tangent rotated by -90 degrees
        normals.push([dy[k] / speed, -dx[k] / speed]);
        curvatures.push((dx[k] * ddy[k] - dy[k] * ddx[k]) / (speed * speed * speed));
    }

    // orientation check: theta increasing must run counterclockwise
    let mut area = 0.0;
    for k in 0..n {
        area += xs[k] * dy[k] - ys[k] * dx[k];
    }
    area /= 2.0 * n as f64;
    if area <= 0.0 {
        return Err(Error::InvalidParameter(
            "curve parametrization is not counterclockwise".into(),
        ));
    }

    // reject self-intersecting polygons
    let positions: Vec<[f64; 2]> = xs.iter().zip(&ys).map(|(&x, &y)| [x, y]).collect();
    for i in 0..n {
        let a = positions[i];
        let b = positions[(i + 1) % n];
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue; // shares the seam vertex
            }
            let c = positions[j];
            let d = positions[(j + 1) % n];
            if segments_cross(a, b, c, d) {
                return Err(Error::InvalidParameter(format!(
                    "curve self-intersects between segments {i} and {j}"
                )));
            }
        }
    }

    Ok(CurveSample { thetas, positions, tangents, speeds, normals, curvatures })
}

/// Nystrom discretization of the Neumann-Poincare operator with the
/// trapezoidal rule; the diagonal carries the smooth kernel limit
/// `kappa(x)/2` (on the unit circle the kernel is identically `1/2`).
pub fn np_matrix(c: &CurveSample) -> DMatrix<f64> {
    let n = c.len();
    let weight = -1.0 / (std::f64::consts::PI * n as f64);
    DMatrix::from_fn(n, n, |j, k| {
        let kernel = if j == k {
            c.curvatures[j] / 2.0
        } else {
            let dx = c.positions[j][0] - c.positions[k][0];
            let dy = c.positions[j][1] - c.positions[k][1];
            (dx * c.normals[j][0] + dy * c.normals[j][1]) / (dx * dx + dy * dy)
        };
        weight * kernel * c.speeds[k]
    })
}

/// Eigenvalues sorted by descending modulus (ties by descending real part),
/// as `(re, im)` pairs.
pub fn np_eigenvalues(matrix: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let eig = matrix.clone().complex_eigenvalues();
    let mut vals: Vec<(f64, f64)> = eig.iter().map(|c| (c.re, c.im)).collect();
    vals.sort_by(|a, b| {
        let ma = (a.0 * a.0 + a.1 * a.1).sqrt();
        let mb = (b.0 * b.0 + b.1 * b.1).sqrt();
        mb.total_cmp(&ma).then(b.0.total_cmp(&a.0))
    });
    vals
}

/// One retained eigenpair of the discretized operator.
#[derive(Debug, Clone)]
pub struct NpEigenPair {
    pub eigenvalue: f64,
    /// Collocation values of the eigenfunction, sup-normalized, first
    /// significant component positive.
    pub boundary_values: Vec<f64>,
    /// Speed-weighted pullback `|w'| |phi| / || |w'| phi ||_{L^1}` on `(0, 1)`.
    pub pullback: GridDensity1D,
}

/// Extract the `count` largest-modulus real eigenpairs.
///
/// The true operator has real spectrum, so eigenvalues whose imaginary part
/// exceeds `1e-6` times the spectral radius are discretization noise; more
/// than 5% of them among the requested ones means the resolution is too low.
pub fn np_eigensolve(
    matrix: &DMatrix<f64>,
    curve: &CurveSample,
    count: usize,
) -> Result<Vec<NpEigenPair>> {
    let n = matrix.nrows();
    if count == 0 || count > n / 4 {
        return Err(Error::InvalidParameter(format!(
            "eigenpair count must lie in 1..=n/4 = {}, got {count}",
            n / 4
        )));
    }
    let sorted = np_eigenvalues(matrix);
    let radius = sorted
        .first()
        .map(|&(re, im)| (re * re + im * im).sqrt())
        .unwrap_or(0.0);
    let im_tol = 1e-6 * radius;
    let mut lambdas = Vec::with_capacity(count);
    let mut rejected = 0usize;
    for &(re, im) in &sorted {
        if lambdas.len() == count {
            break;
        }
        if im.abs() <= im_tol {
            lambdas.push(re);
        } else {
            rejected += 1;
        }
    }
    if lambdas.len() < count || rejected as f64 > 0.05 * count as f64 {
        return Err(Error::Numerical(format!(
            "{rejected} of the leading eigenvalues have spurious imaginary parts; increase \
             the quadrature resolution (currently n = {n})"
        )));
    }

    let mut pairs = Vec::with_capacity(count);
    for (k, &lambda) in lambdas.iter().enumerate() {
        let phi = dense_inverse_iteration(matrix, lambda, k, radius).ok_or_else(|| {
            Error::Numerical(format!(
                "inverse iteration failed for eigenvalue {lambda:.6e} (index {k})"
            ))
        })?;
        pairs.push(make_pair(lambda, phi, curve)?);
    }
    Ok(pairs)
}

fn make_pair(lambda: f64, phi: DVector<f64>, curve: &CurveSample) -> Result<NpEigenPair> {
    let sup = phi.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let flip = phi.iter().find(|v| v.abs() > 1e-12 * sup).is_some_and(|&v| v < 0.0);
    let scale = if flip { -1.0 / sup } else { 1.0 / sup };
    let boundary_values: Vec<f64> = phi.iter().map(|&v| v * scale).collect();
    let weighted: Vec<f64> = boundary_values
        .iter()
        .zip(&curve.speeds)
        .map(|(&v, &s)| v.abs() * s)
        .collect();
    let pullback = GridDensity1D::new(Interval::unit(), weighted)?.normalized()?;
    Ok(NpEigenPair { eigenvalue: lambda, boundary_values, pullback })
}

fn dense_inverse_iteration(
    matrix: &DMatrix<f64>,
    lambda: f64,
    k: usize,
    radius: f64,
) -> Option<DVector<f64>> {
    let n = matrix.nrows();
    for restart in 0..3u32 {
        let delta = radius * 1e-11 * 10f64.powi(restart as i32);
        let mut shifted = matrix.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda + delta;
        }
        let lu = shifted.lu();
        let mut rng = SplitMix64::new(0xC0FFEE ^ (k as u64) ^ ((restart as u64) << 32));
        let mut v = DVector::from_fn(n, |_, _| rng.next_f64() - 0.5);
        v /= v.norm();
        for _ in 0..8 {
            let Some(mut w) = lu.solve(&v) else { break };
            let norm = w.norm();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            w /= norm;
            v = w;
            let residual = (matrix * &v - lambda * &v).norm();
            if residual <= 1e-8 * radius {
                return Some(v);
            }
        }
    }
    None
}

/// Localization scores of pulled-back eigenfunctions.
#[derive(Debug, Clone, Copy)]
pub struct NpScore {
    pub eigenvalue: f64,
    pub alpha24_inv: f64,
    pub beta: f64,
}

pub fn score_np_localization(pairs: &[NpEigenPair]) -> Result<Vec<NpScore>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no eigenpairs to score".into()));
    }
    pairs
        .iter()
        .map(|pair| {
            let alpha = pair.pullback.participation_ratio(2.0, 4.0)?;
            let beta = transport1d::w2_quantile(&pair.pullback)?;
            Ok(NpScore { eigenvalue: pair.eigenvalue, alpha24_inv: 1.0 / alpha, beta })
        })
        .collect()
}

/// Circle parameters (radius 1) expressed through the superformula.
pub fn unit_circle() -> SuperformulaParams {
    SuperformulaParams { m: 4.0, n1: 2.0, n2: 2.0, n3: 2.0, a: 1.0, b: 1.0 }
}
