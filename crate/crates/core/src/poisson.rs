//! Neumann-Poisson solves and the weighted homogeneous Sobolev norm.
//!
//! For a unit-mass density `u` on `Omega`, the distance of `u dx` to the
//! uniform measure in the `H^-1(|Omega|^-1 dx)` norm equals
//! `|Omega|^{-1/2} ||grad w||_{L^2}`, where `w` solves
//!
//! ```text
//! -laplace w = |Omega| (u - 1/|Omega|)   in Omega,
//!   d_n w = 0                            on the boundary,
//! ```
//!
//! In 1D the solve is an exact double integration of the piecewise-constant
//! source; in 2D a five-point finite-volume operator on the masked grid is
//! inverted by Jacobi-preconditioned conjugate gradients with mean projection.

use crate::density::{Density, GridDensity1D, Interval, MaskedGrid2D};
use crate::error::{Error, Result};

const MEAN_TOL: f64 = 1e-10;

/// Source term for the 1D problem; must integrate to zero.
#[derive(Debug, Clone)]
pub struct ZeroMeanSource1D {
    interval: Interval,
    values: Vec<f64>,
}

impl ZeroMeanSource1D {
    pub fn new(interval: Interval, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("source needs at least one cell".into()));
        }
        let h = interval.length() / values.len() as f64;
        let mean: f64 = values.iter().sum::<f64>() * h;
        if mean.abs() > MEAN_TOL {
            return Err(Error::InvalidParameter(format!(
                "source violates the compatibility condition: integral = {mean:.3e}"
            )));
        }
        Ok(Self { interval, values })
    }

    /// `t = u - 1/|Omega|` for a unit-mass density `u`.
    pub fn from_density(u: &GridDensity1D) -> Result<Self> {
        u.check_unit_mass(1e-10)?;
        let inv = 1.0 / u.interval().length();
        let values = u.values().iter().map(|&v| v - inv).collect();
        Self::new(u.interval(), values)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Closed-form 1D solution: `w` is piecewise-quadratic with zero mean, `w'`
/// piecewise-linear with exact zero flux at both endpoints.
#[derive(Debug, Clone)]
pub struct NeumannSolution1D {
    pub nodes: Vec<f64>,
    /// Potential values at the nodes.
    pub w: Vec<f64>,
    /// Gradient values at the nodes.
    pub w_prime: Vec<f64>,
    /// `||grad w||_{L^2(Omega)}`, integrated exactly.
    pub grad_l2: f64,
}

/// Exact double integration of the piecewise-constant source.
pub fn solve_neumann_poisson_1d(t: &ZeroMeanSource1D) -> Result<NeumannSolution1D> {
    let n = t.values.len();
    let len = t.interval.length();
    let h = len / n as f64;
    let scale = len; // right-hand side is |Omega| * t

    // -w'' = scale * t  =>  w'(x) = -scale * int_{x0}^x t
    let mut w_prime = Vec::with_capacity(n + 1);
    w_prime.push(0.0);
    let mut acc = 0.0;
    for &tv in &t.values {
        acc += tv * h;
        w_prime.push(-scale * acc);
    }
    // compatibility makes the far-end flux vanish up to rounding
    let drift = w_prime[n];
    debug_assert!(drift.abs() <= scale * MEAN_TOL * 1.01 + 1e-12);
    w_prime[n] = 0.0;
    let _ = drift;

    // w' is linear per cell, so the trapezoid rule integrates it exactly
    let mut nodes = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    nodes.push(t.interval.x0());
    w.push(0.0);
    for i in 0..n {
        nodes.push(t.interval.x0() + (i + 1) as f64 * h);
        let next = w[i] + 0.5 * h * (w_prime[i] + w_prime[i + 1]);
        w.push(next);
    }
    // subtract the exact mean of the piecewise-quadratic potential
    let mut integral = 0.0;
    for i in 0..n {
        integral += h * (w[i] + h * (2.0 * w_prime[i] + w_prime[i + 1]) / 6.0);
    }
    let mean = integral / len;
    for v in &mut w {
        *v -= mean;
    }

    let mut grad_sq = 0.0;
    for i in 0..n {
        let (a, b) = (w_prime[i], w_prime[i + 1]);
        grad_sq += h * (a * a + a * b + b * b) / 3.0;
    }
    Ok(NeumannSolution1D { nodes, w, w_prime, grad_l2: grad_sq.max(0.0).sqrt() })
}

/// Source term for the 2D problem on a masked grid.
#[derive(Debug, Clone)]
pub struct ZeroMeanSource2D {
    template: MaskedGrid2D,
    values: Vec<f64>,
}

impl ZeroMeanSource2D {
    /// `values` uses the full row-major layout and must vanish outside the
    /// mask and integrate to zero over the mask.
    pub fn new(template: &MaskedGrid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != template.nx() * template.ny() {
            return Err(Error::InvalidParameter("source layout must match the grid".into()));
        }
        let mut mean = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if template.mask()[i] {
                mean += v;
            } else if v != 0.0 {
                return Err(Error::InvalidParameter(
                    "source must vanish outside the mask".into(),
                ));
            }
        }
        mean *= template.cell_area();
        if mean.abs() > MEAN_TOL {
            return Err(Error::InvalidParameter(format!(
                "source violates the compatibility condition: integral = {mean:.3e}"
            )));
        }
        let template = template.with_values(vec![0.0; values.len()])?;
        Ok(Self { template, values })
    }

    pub fn from_density(u: &MaskedGrid2D) -> Result<Self> {
        u.check_unit_mass(1e-10)?;
        let inv = 1.0 / u.domain_measure();
        let values = u
            .mask()
            .iter()
            .zip(u.values())
            .map(|(&m, &v)| if m { v - inv } else { 0.0 })
            .collect();
        Self::new(u, values)
    }

    pub fn grid(&self) -> &MaskedGrid2D {
        &self.template
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct NeumannSolution2D {
    /// Zero-mean potential in the full row-major layout (zero off-mask).
    pub w: Vec<f64>,
    /// `||grad w||_{L^2}` from face-midpoint differences.
    pub grad_l2: f64,
    /// Final relative residual of the CG solve.
    pub residual: f64,
    pub iterations: usize,
}

/// Five-point finite-volume discretization with zero-flux closure, solved by
/// Jacobi-preconditioned CG projected onto zero-mean functions.
pub fn solve_neumann_poisson_2d(t: &ZeroMeanSource2D) -> Result<NeumannSolution2D> {
    let grid = &t.template;
    if !grid.is_connected() {
        return Err(Error::InvalidParameter(
            "Neumann-Poisson solve needs a connected mask".into(),
        ));
    }
    if grid.has_holes() {
        return Err(Error::InvalidParameter(
            "Neumann-Poisson solve rejects masks with enclosed holes".into(),
        ));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let cells: Vec<usize> = (0..nx * ny).filter(|&i| grid.mask()[i]).collect();
    let mut pos = vec![usize::MAX; nx * ny];
    for (k, &i) in cells.iter().enumerate() {
        pos[i] = k;
    }
    let m = cells.len();
    let inv_hx2 = 1.0 / (grid.hx() * grid.hx());
    let inv_hy2 = 1.0 / (grid.hy() * grid.hy());

    // neighbor table and Jacobi diagonal
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(4); m];
    let mut diag = vec![0.0; m];
    for (k, &i) in cells.iter().enumerate() {
        let (ix, iy) = (i % nx, i / nx);
        let mut couple = |jx: i64, jy: i64, coef: f64| {
            if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                return;
            }
            let j = jy as usize * nx + jx as usize;
            if grid.mask()[j] {
                neighbors[k].push((pos[j], coef));
                diag[k] += coef;
            }
        };
        couple(ix as i64 - 1, iy as i64, inv_hx2);
        couple(ix as i64 + 1, iy as i64, inv_hx2);
        couple(ix as i64, iy as i64 - 1, inv_hy2);
        couple(ix as i64, iy as i64 + 1, inv_hy2);
    }

    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..m {
            let mut acc = diag[k] * x[k];
            for &(j, coef) in &neighbors[k] {
                acc -= coef * x[j];
            }
            out[k] = acc;
        }
    };
    let project = |x: &mut [f64]| {
        let mean: f64 = x.iter().sum::<f64>() / m as f64;
        for v in x.iter_mut() {
            *v -= mean;
        }
    };

    let measure = grid.domain_measure();
    let mut b: Vec<f64> = cells.iter().map(|&i| measure * t.values[i]).collect();
    project(&mut b);
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(NeumannSolution2D {
            w: vec![0.0; nx * ny],
            grad_l2: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }

    let mut x = vec![0.0; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(&rv, &d)| rv / d).collect();
    project(&mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut q = vec![0.0; m];
    let max_iter = 40 * m + 200;
    let mut iterations = 0;
    let mut rel = 1.0;
    for it in 0..max_iter {
        apply(&p, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if pq <= 0.0 {
            return Err(Error::Numerical(format!(
                "CG broke down at iteration {it}: p^T A p = {pq:.3e}"
            )));
        }
        let alpha = rz / pq;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        project(&mut r);
        rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        iterations = it + 1;
        if rel <= 1e-10 {
            break;
        }
        for k in 0..m {
            z[k] = r[k] / diag[k];
        }
        project(&mut z);
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    if rel > 1e-10 {
        return Err(Error::Numerical(format!(
            "CG failed to converge in {max_iter} iterations; residual {rel:.3e}"
        )));
    }
    project(&mut x);

    // energy from face-midpoint differences
    let mut grad_sq = 0.0;
    for (k, &i) in cells.iter().enumerate() {
        let (ix, iy) = (i % nx, i / nx);
        if ix + 1 < nx && grid.mask()[i + 1] {
            let d = x[pos[i + 1]] - x[k];
            grad_sq += d * d * grid.hy() / grid.hx();
        }
        if iy + 1 < ny && grid.mask()[i + nx] {
            let d = x[pos[i + nx]] - x[k];
            grad_sq += d * d * grid.hx() / grid.hy();
        }
    }

    let mut w = vec![0.0; nx * ny];
    for (k, &i) in cells.iter().enumerate() {
        w[i] = x[k];
    }
    Ok(NeumannSolution2D { w, grad_l2: grad_sq.sqrt(), residual: rel, iterations })
}

/// The Sobolev distance of a unit-mass density to the uniform one, in both
/// normalizations of the reference measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hm1Norm {
    /// `||u dx - uniform||` against the normalized reference `|Omega|^-1 dx`.
    pub weighted: f64,
    /// Same distance against the plain Lebesgue reference.
    pub unweighted: f64,
}

fn hm1_from_grad(grad_l2: f64, measure: f64) -> Hm1Norm {
    let weighted = grad_l2 / measure.sqrt();
    Hm1Norm { weighted, unweighted: weighted / measure.sqrt() }
}

pub fn h_minus1_norm_1d(u: &GridDensity1D) -> Result<Hm1Norm> {
    let t = ZeroMeanSource1D::from_density(u)?;
    let sol = solve_neumann_poisson_1d(&t)?;
    Ok(hm1_from_grad(sol.grad_l2, u.interval().length()))
}

pub fn h_minus1_norm_2d(u: &MaskedGrid2D) -> Result<Hm1Norm> {
    let t = ZeroMeanSource2D::from_density(u)?;
    let sol = solve_neumann_poisson_2d(&t)?;
    Ok(hm1_from_grad(sol.grad_l2, u.domain_measure()))
}

/// Two-sided bounds sandwiching the Wasserstein-2 distance to uniform by the
/// weighted Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeyreBounds {
    pub lower: f64,
    pub upper: f64,
    /// Multiplier `ln(z) / (2 (sqrt(z) - 1))` with `z = ||u||_inf |Omega|`.
    pub coefficient: f64,
    /// The weighted Sobolev norm entering both bounds.
    pub sobolev_weighted: f64,
    /// Transport distance checked against the bounds, when supplied.
    pub w2: Option<f64>,
}

fn peyre_from_parts(sup: f64, measure: f64, s_w: f64, w2: Option<f64>) -> Result<PeyreBounds> {
    let z = sup * measure;
    if z < 1.0 - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "||u||_inf |Omega| = {z} < 1 is impossible for a unit-mass density"
        )));
    }
    // z -> 1 is the constant density; the coefficient tends to 1 and both
    // bounds collapse to the (then zero) Sobolev norm
    let coefficient = if z <= 1.0 + 1e-12 {
        1.0
    } else {
        z.ln() / (2.0 * (z.sqrt() - 1.0))
    };
    let lower = coefficient * s_w;
    let upper = 2.0 * s_w;
    if let Some(dist) = w2 {
        if dist < lower - 1e-12 || dist > upper + 1e-12 {
            return Err(Error::Inconsistency(format!(
                "W2 = {dist:.12e} escapes the sandwich [{lower:.12e}, {upper:.12e}]"
            )));
        }
    }
    Ok(PeyreBounds { lower, upper, coefficient, sobolev_weighted: s_w, w2 })
}

pub fn peyre_bounds_1d(u: &GridDensity1D, w2: Option<f64>) -> Result<PeyreBounds> {
    let s = h_minus1_norm_1d(u)?;
    peyre_from_parts(u.lp_norm(f64::INFINITY)?, u.interval().length(), s.weighted, w2)
}

pub fn peyre_bounds_2d(u: &MaskedGrid2D, w2: Option<f64>) -> Result<PeyreBounds> {
    let s = h_minus1_norm_2d(u)?;
    peyre_from_parts(u.lp_norm(f64::INFINITY)?, u.domain_measure(), s.weighted, w2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_step_family, StepFamilyParams};
    use crate::rng::SplitMix64;

    #[test]
    fn zero_source_gives_zero_potential() {
        let t = ZeroMeanSource1D::new(Interval::unit(), vec![0.0; 32]).unwrap();
        let sol = solve_neumann_poisson_1d(&t).unwrap();
        assert_eq!(sol.grad_l2, 0.0);
        assert!(sol.w.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn nonzero_mean_source_is_rejected() {
        assert!(ZeroMeanSource1D::new(Interval::unit(), vec![1.0; 8]).is_err());
    }

    #[test]
    fn half_indicator_energy_is_one_twelfth() {
        let n = 2048;
        let values: Vec<f64> = (0..n).map(|i| if i < n / 2 { 2.0 } else { 0.0 }).collect();
        let u = GridDensity1D::new(Interval::unit(), values).unwrap();
        let t = ZeroMeanSource1D::from_density(&u).unwrap();
        let sol = solve_neumann_poisson_1d(&t).unwrap();
        assert!((sol.grad_l2.powi(2) - 1.0 / 12.0).abs() < 1e-13);
        // Neumann fluxes vanish identically
        assert_eq!(sol.w_prime[0], 0.0);
        assert_eq!(sol.w_prime[n], 0.0);
        // zero mean of the potential
        let mean: f64 = sol.w.iter().sum::<f64>() / sol.w.len() as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn matches_transport_backend_on_mixtures() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..10 {
            let u = crate::density::random_mixture(&mut rng, 1024).unwrap();
            let via_poisson = h_minus1_norm_1d(&u).unwrap();
            let via_cdf = crate::transport1d::h_minus1_1d(&u).unwrap();
            assert!(
                (via_poisson.weighted - via_cdf).abs() <= 1e-10,
                "{} vs {}",
                via_poisson.weighted,
                via_cdf
            );
            // on (0,1) both normalizations coincide
            assert!((via_poisson.weighted - via_poisson.unweighted).abs() < 1e-15);
        }
    }

    fn full_square(n: usize) -> MaskedGrid2D {
        MaskedGrid2D::disc((Interval::unit(), Interval::unit()), n, n, (0.5, 0.5), 10.0).unwrap()
    }

    fn cos_mode_energy_error(n: usize) -> f64 {
        let grid = full_square(n);
        let values: Vec<f64> = (0..n * n)
            .map(|i| {
                let (x, _) = grid.cell_center(i % n, i / n);
                (std::f64::consts::PI * x).cos()
            })
            .collect();
        let t = ZeroMeanSource2D::new(&grid, values).unwrap();
        let sol = solve_neumann_poisson_2d(&t).unwrap();
        let exact = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
        (sol.grad_l2.powi(2) - exact).abs()
    }

    #[test]
    fn manufactured_cosine_converges_at_second_order() {
        let e16 = cos_mode_energy_error(16);
        let e32 = cos_mode_energy_error(32);
        let e64 = cos_mode_energy_error(64);
        assert!(e32 < e16 / 3.0, "expected ~4x drop, got {e16} -> {e32}");
        assert!(e64 < e32 / 3.0, "expected ~4x drop, got {e32} -> {e64}");
    }

    #[test]
    fn uniform_density_has_zero_norm() {
        let g = full_square(12);
        let c = 1.0 / g.domain_measure();
        let vals: Vec<f64> = g.mask().iter().map(|&m| if m { c } else { 0.0 }).collect();
        let u = g.with_values(vals).unwrap();
        let s = h_minus1_norm_2d(&u).unwrap();
        assert!(s.weighted < 1e-14);
    }

    #[test]
    fn disconnected_and_holey_masks_are_rejected() {
        // two separated cells
        let mut mask = vec![false; 25];
        mask[0] = true;
        mask[24] = true;
        let g = MaskedGrid2D::new((Interval::unit(), Interval::unit()), 5, 5, mask, vec![0.0; 25])
            .unwrap();
        assert!(!g.is_connected());
        let t = ZeroMeanSource2D::new(&g, vec![0.0; 25]).unwrap();
        assert!(solve_neumann_poisson_2d(&t).is_err());

        // ring with a hole in the middle
        let mut mask = vec![true; 25];
        mask[12] = false;
        let mut vals = vec![0.0; 25];
        vals[12] = 0.0;
        let g =
            MaskedGrid2D::new((Interval::unit(), Interval::unit()), 5, 5, mask, vals).unwrap();
        assert!(g.is_connected());
        assert!(g.has_holes());
        let t = ZeroMeanSource2D::new(&g, vec![0.0; 25]).unwrap();
        assert!(solve_neumann_poisson_2d(&t).is_err());
    }

    #[test]
    fn two_bump_norm_is_stable_under_refinement() {
        let coarse = {
            let g = full_square(32);
            let g = MaskedGrid2D::disc(g.bbox(), 32, 32, (0.5, 0.5), 0.45).unwrap();
            let u = crate::ot::two_bump_2d(&g, 0.3, 0.1).unwrap();
            h_minus1_norm_2d(&u).unwrap().weighted
        };
        let fine = {
            let g = MaskedGrid2D::disc(
                (Interval::unit(), Interval::unit()),
                64,
                64,
                (0.5, 0.5),
                0.45,
            )
            .unwrap();
            let u = crate::ot::two_bump_2d(&g, 0.3, 0.1).unwrap();
            h_minus1_norm_2d(&u).unwrap().weighted
        };
        assert!(coarse > 0.0 && fine > 0.0);
        assert!(
            (coarse - fine).abs() <= 0.02 * fine,
            "norm moved by more than 2%: {coarse} vs {fine}"
        );
    }

    #[test]
    fn peyre_bounds_examples() {
        // near-constant density: coefficient tends to 1
        let mut vals = vec![1.0; 256];
        vals[0] = 1.0 + 1e-9;
        let u = GridDensity1D::new(Interval::unit(), vals).unwrap().normalized().unwrap();
        let b = peyre_bounds_1d(&u, None).unwrap();
        assert!((b.coefficient - 1.0).abs() < 1e-4);
        assert!(b.lower <= b.upper);

        // step family: z = 5
        let u = make_step_family(&StepFamilyParams { a: 0.1, d: 0.3, b: 0.05 }, 1000, false)
            .unwrap();
        let b = peyre_bounds_1d(&u, None).unwrap();
        let z: f64 = 5.0;
        let expect = z.ln() / (2.0 * (z.sqrt() - 1.0));
        assert!((b.coefficient - expect).abs() < 1e-12);
        assert!((b.coefficient - 0.65103).abs() < 1e-4);
        // in 1D the Wasserstein distance equals the Sobolev norm: inside
        let w2 = crate::transport1d::w2_quantile(&u).unwrap();
        let checked = peyre_bounds_1d(&u, Some(w2)).unwrap();
        assert!(checked.lower <= w2 && w2 <= checked.upper);
        // a wrong distance violates the sandwich
        assert!(peyre_bounds_1d(&u, Some(10.0)).is_err());
    }

    #[test]
    fn peyre_coefficient_stays_below_two() {
        for z in [1.0 + 1e-9, 1.5, 2.0, 5.0, 50.0, 5e3] {
            let coeff = if z <= 1.0 + 1e-12 {
                1.0
            } else {
                f64::ln(z) / (2.0 * (f64::sqrt(z) - 1.0))
            };
            assert!(coeff > 0.0 && coeff <= 2.0, "coefficient {coeff} out of range at z={z}");
        }
    }
}
