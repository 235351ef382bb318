//! Test families of probability densities on `(0, 1)`.

use crate::density::{GridDensity1D, Interval};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Two-bump step family: indicator bumps of half-width `b` centered at `a`
/// and `a + d`, normalized to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFamilyParams {
    /// Center of the first bump.
    pub a: f64,
    /// Separation between the bump centers.
    pub d: f64,
    /// Half-width of each bump.
    pub b: f64,
}

impl StepFamilyParams {
    pub fn validate(&self, allow_overlap: bool) -> Result<()> {
        let Self { a, d, b } = *self;
        if !(b > 0.0) || !a.is_finite() || !d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step family needs finite a, d and b > 0, got a={a}, d={d}, b={b}"
            )));
        }
        if d < 0.0 {
            return Err(Error::InvalidParameter(format!("bump separation d={d} is negative")));
        }
        // boundary-touching supports are allowed up to parameter rounding
        if a - b < -1e-12 || a + d + b > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "bump supports [{}, {}] and [{}, {}] must lie inside (0, 1)",
                a - b,
                a + b,
                a + d - b,
                a + d + b
            )));
        }
        if d < 2.0 * b && !allow_overlap {
            return Err(Error::InvalidParameter(format!(
                "bumps overlap (d = {d} < 2b = {}); pass allow_overlap to accept",
                2.0 * b
            )));
        }
        Ok(())
    }
}

/// Centered Gaussian-minus-offset family
/// `u_sigma(x) = exp(-(x - 1/2)^2 / sigma^2) - exp(-1/(4 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussFamilyParams {
    pub sigma: f64,
}

impl GaussFamilyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gauss family needs finite sigma > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

fn overlap(lo: f64, hi: f64, s_lo: f64, s_hi: f64) -> f64 {
    (hi.min(s_hi) - lo.max(s_lo)).max(0.0)
}

/// Jump positions are snapped onto cell edges they sit within 1e-9 cells of,
/// so parameter arithmetic noise cannot create spurious sliver cells.
fn snap_to_cell_edge(e: f64) -> f64 {
    let r = e.round();
    if (e - r).abs() < 1e-9 {
        r
    } else {
        e
    }
}

/// Sample the step family on `n` cells of `(0, 1)`.
///
/// Cells straddling a jump store the exact cell average, so the discrete mass
/// is exactly the continuous one and the distribution function is invariant
/// in `d` for non-overlapping bumps. Overlap fractions are computed in cell
/// units, which keeps the plateau value exactly `1/(4b)` on interior cells.
pub fn make_step_family(
    p: &StepFamilyParams,
    n: usize,
    allow_overlap: bool,
) -> Result<GridDensity1D> {
    p.validate(allow_overlap)?;
    if n < 16 {
        return Err(Error::InvalidParameter(format!("step family needs n >= 16, got {n}")));
    }
    let cells = n as f64;
    let s1_lo = snap_to_cell_edge((p.a - p.b) * cells);
    let s1_hi = snap_to_cell_edge((p.a + p.b) * cells);
    let s2_lo = snap_to_cell_edge((p.a + p.d - p.b) * cells);
    let s2_hi = snap_to_cell_edge((p.a + p.d + p.b) * cells);
    // mass of the unnormalized sum of indicators is 4b regardless of overlap
    let norm = 4.0 * p.b;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i as f64;
            let hi = lo + 1.0;
            (overlap(lo, hi, s1_lo, s1_hi) + overlap(lo, hi, s2_lo, s2_hi)) / norm
        })
        .collect();
    let u = GridDensity1D::new(Interval::unit(), values)?;
    if u.mass() == 1.0 {
        Ok(u)
    } else {
        u.normalized()
    }
}

/// Sample the Gaussian family on `n` cells of `(0, 1)` and normalize to unit
/// mass.
pub fn make_gauss_family(p: &GaussFamilyParams, n: usize) -> Result<GridDensity1D> {
    p.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("gauss family needs n >= 1".into()));
    }
    let offset = (-0.25 / (p.sigma * p.sigma)).exp();
    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            let t = (x - 0.5) / p.sigma;
            ((-t * t).exp() - offset).max(0.0)
        })
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma = {} is too small: all samples underflow to zero on an n = {n} grid",
            p.sigma
        )));
    }
    GridDensity1D::new(Interval::unit(), values)?.normalized()
}

/// One bump of a random mixture density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixtureComponent {
    /// Indicator bump of half-width `halfwidth` at `center`, weighted by `weight`.
    Step { center: f64, halfwidth: f64, weight: f64 },
    /// Gaussian bump `exp(-(x-center)^2/sigma^2)`, weighted by `weight`.
    Gauss { center: f64, sigma: f64, weight: f64 },
}

/// A mixture of bumps that can be rendered at any grid resolution, so the
/// same underlying density can be compared across refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    /// Draw a mixture of 2-4 clearly non-uniform bumps. The widths are kept
    /// small enough that the sup norm stays well above 1.
    pub fn sample(rng: &mut SplitMix64) -> Self {
        let count = 2 + rng.below(3);
        let components = (0..count)
            .map(|_| {
                let center = rng.range(0.12, 0.88);
                let weight = rng.range(0.3, 1.0);
                if rng.next_u64().is_multiple_of(2) {
                    MixtureComponent::Step { center, halfwidth: rng.range(0.01, 0.04), weight }
                } else {
                    MixtureComponent::Gauss { center, sigma: rng.range(0.015, 0.05), weight }
                }
            })
            .collect();
        Self { components }
    }

    /// Render on `n` cells of `(0, 1)` as a unit-mass density. Step bumps use
    /// exact cell averages; Gaussian bumps are sampled at cell centers.
    pub fn render(&self, n: usize) -> Result<GridDensity1D> {
        let h = 1.0 / n as f64;
        let mut values = vec![0.0; n];
        for comp in &self.components {
            match *comp {
                MixtureComponent::Step { center, halfwidth, weight } => {
                    let scale = weight / (2.0 * halfwidth);
                    for (i, v) in values.iter_mut().enumerate() {
                        let lo = i as f64 * h;
                        *v += scale * overlap(lo, lo + h, center - halfwidth, center + halfwidth)
                            / h;
                    }
                }
                MixtureComponent::Gauss { center, sigma, weight } => {
                    let samples: Vec<f64> = (0..n)
                        .map(|i| {
                            let t = ((i as f64 + 0.5) * h - center) / sigma;
                            (-t * t).exp()
                        })
                        .collect();
                    let mass: f64 = samples.iter().sum::<f64>() * h;
                    for (v, s) in values.iter_mut().zip(samples) {
                        *v += weight * s / mass;
                    }
                }
            }
        }
        GridDensity1D::new(Interval::unit(), values)?.normalized()
    }
}

/// Convenience: draw a mixture and render it at resolution `n`.
pub fn random_mixture(rng: &mut SplitMix64, n: usize) -> Result<GridDensity1D> {
    MixtureSpec::sample(rng).render(n)
}
