//! Densities on 1D and 2D grids and the classical localization measures
//! derived from their distribution functions.

mod families;
mod rearrange;

pub use families::{
    make_gauss_family, make_step_family, random_mixture, GaussFamilyParams, MixtureComponent,
    MixtureSpec, StepFamilyParams,
};
pub use rearrange::{
    less_concentrated, mass_concentration_compare_vv, spherical_rearrangement, RadialProfile,
};

use crate::error::{Error, Result};

/// Open interval `(x0, x1)` with positive length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    x0: f64,
    x1: f64,
}

impl Interval {
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        if !x0.is_finite() || !x1.is_finite() || x1 <= x0 {
            return Err(Error::InvalidParameter(format!(
                "interval must satisfy x1 > x0 with finite endpoints, got ({x0}, {x1})"
            )));
        }
        Ok(Self { x0, x1 })
    }

    /// The reference interval `(0, 1)`.
    pub fn unit() -> Self {
        Self { x0: 0.0, x1: 1.0 }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }
}

/// Piecewise-constant nonnegative density on a uniform 1D grid.
///
/// Cell `i` covers `[x0 + i*h, x0 + (i+1)*h)` with `h = length / n`; `values[i]`
/// is the constant density on that cell. Integrals over cells are therefore
/// exact sums weighted by `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity1D {
    interval: Interval,
    values: Vec<f64>,
}

impl GridDensity1D {
    pub fn new(interval: Interval, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("density needs at least one cell".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "cell value must be finite and nonnegative, got {v} at cell {i}"
                )));
            }
        }
        Ok(Self { interval, values })
    }

    /// Constant density `c` on `interval`, sampled on `n` cells.
    pub fn constant(interval: Interval, n: usize, c: f64) -> Result<Self> {
        Self::new(interval, vec![c; n])
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_width(&self) -> f64 {
        self.interval.length() / self.values.len() as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.interval.x0 + (i as f64 + 0.5) * self.cell_width()
    }

    /// Total mass `h * sum(values)`.
    pub fn mass(&self) -> f64 {
        self.cell_width() * self.values.iter().sum::<f64>()
    }

    /// Rescale values so the mass is exactly 1.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize density of mass {m}"
            )));
        }
        for v in &mut self.values {
            *v /= m;
        }
        Ok(self)
    }

    pub fn check_unit_mass(&self, tol: f64) -> Result<()> {
        let m = self.mass();
        if (m - 1.0).abs() > tol {
            return Err(Error::MassMismatch { expected: 1.0, actual: m });
        }
        Ok(())
    }
}

/// Uniform 2D grid with a boolean domain mask; the density lives on the
/// masked cells and is zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGrid2D {
    bbox: (Interval, Interval),
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
    values: Vec<f64>,
}

impl MaskedGrid2D {
    /// Row-major layout: index `iy * nx + ix`.
    pub fn new(
        bbox: (Interval, Interval),
        nx: usize,
        ny: usize,
        mask: Vec<bool>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("grid must have nx, ny >= 1".into()));
        }
        if mask.len() != nx * ny || values.len() != nx * ny {
            return Err(Error::InvalidParameter(format!(
                "mask/values length must be nx*ny = {}, got {} and {}",
                nx * ny,
                mask.len(),
                values.len()
            )));
        }
        let mut masked = 0usize;
        for i in 0..nx * ny {
            if mask[i] {
                masked += 1;
                if !values[i].is_finite() || values[i] < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "masked cell value must be finite and nonnegative, got {}",
                        values[i]
                    )));
                }
            } else if values[i] != 0.0 {
                return Err(Error::InvalidParameter(
                    "values must be zero outside the mask".into(),
                ));
            }
        }
        if masked == 0 {
            return Err(Error::InvalidParameter("mask selects no cells".into()));
        }
        Ok(Self { bbox, nx, ny, mask, values })
    }

    /// Disc-shaped domain: masks the cells whose centers lie within `radius`
    /// of `center`. Values start at zero.
    pub fn disc(
        bbox: (Interval, Interval),
        nx: usize,
        ny: usize,
        center: (f64, f64),
        radius: f64,
    ) -> Result<Self> {
        let mut mask = vec![false; nx * ny];
        let hx = bbox.0.length() / nx as f64;
        let hy = bbox.1.length() / ny as f64;
        for iy in 0..ny {
            for ix in 0..nx {
                let x = bbox.0.x0() + (ix as f64 + 0.5) * hx;
                let y = bbox.1.x0() + (iy as f64 + 0.5) * hy;
                let dx = x - center.0;
                let dy = y - center.1;
                mask[iy * nx + ix] = dx * dx + dy * dy <= radius * radius;
            }
        }
        let values = vec![0.0; nx * ny];
        Self::new(bbox, nx, ny, mask, values)
    }

    pub fn bbox(&self) -> (Interval, Interval) {
        self.bbox
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn hx(&self) -> f64 {
        self.bbox.0.length() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.bbox.1.length() / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.bbox.0.x0() + (ix as f64 + 0.5) * self.hx(),
            self.bbox.1.x0() + (iy as f64 + 0.5) * self.hy(),
        )
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn mass(&self) -> f64 {
        self.cell_area() * self.values.iter().sum::<f64>()
    }

    /// Replace the values, keeping bbox and mask.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.bbox, self.nx, self.ny, self.mask.clone(), values)
    }

    pub fn normalized(self) -> Result<Self> {
        let m = self.mass();
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize density of mass {m}"
            )));
        }
        let values = self.values.iter().map(|v| v / m).collect();
        Self::new(self.bbox, self.nx, self.ny, self.mask, values)
    }

    pub fn check_unit_mass(&self, tol: f64) -> Result<()> {
        let m = self.mass();
        if (m - 1.0).abs() > tol {
            return Err(Error::MassMismatch { expected: 1.0, actual: m });
        }
        Ok(())
    }

    /// Whether the masked cells form a single 4-connected component.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.mask.iter().position(|&m| m) else {
            return false;
        };
        let reached = self.flood(&[start], |i| self.mask[i]);
        self.mask.iter().enumerate().all(|(i, &m)| !m || reached[i])
    }

    /// Whether the unmasked region contains pockets enclosed by the mask
    /// (i.e. unmasked cells unreachable from the bounding-box frame).
    pub fn has_holes(&self) -> bool {
        let mut seeds = Vec::new();
        for ix in 0..self.nx {
            for iy in [0, self.ny - 1] {
                let i = self.idx(ix, iy);
                if !self.mask[i] {
                    seeds.push(i);
                }
            }
        }
        for iy in 0..self.ny {
            for ix in [0, self.nx - 1] {
                let i = self.idx(ix, iy);
                if !self.mask[i] {
                    seeds.push(i);
                }
            }
        }
        let reached = self.flood(&seeds, |i| !self.mask[i]);
        self.mask.iter().enumerate().any(|(i, &m)| !m && !reached[i])
    }

    fn flood(&self, seeds: &[usize], keep: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut reached = vec![false; self.nx * self.ny];
        let mut stack: Vec<usize> = seeds.iter().copied().filter(|&i| keep(i)).collect();
        for &s in &stack {
            reached[s] = true;
        }
        while let Some(i) = stack.pop() {
            let (ix, iy) = (i % self.nx, i / self.nx);
            let mut push = |jx: usize, jy: usize| {
                let j = jy * self.nx + jx;
                if keep(j) && !reached[j] {
                    reached[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy);
            }
            if ix + 1 < self.nx {
                push(ix + 1, iy);
            }
            if iy > 0 {
                push(ix, iy - 1);
            }
            if iy + 1 < self.ny {
                push(ix, iy + 1);
            }
        }
        reached
    }
}

/// Distribution function `mu_u(k) = |{ |u| > k }|` sampled on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    pub thresholds: Vec<f64>,
    pub measures: Vec<f64>,
}

/// Anything that looks like a piecewise-constant density over cells of equal
/// measure. Provides the Lebesgue-norm-based localization measures.
pub trait Density {
    /// Spatial dimension (1 or 2).
    fn dim(&self) -> usize;
    /// Measure of a single cell.
    fn cell_measure(&self) -> f64;
    /// Measure of the domain.
    fn domain_measure(&self) -> f64;
    /// Density values on the cells that belong to the domain.
    fn domain_values(&self) -> impl Iterator<Item = f64> + '_;

    fn mass(&self) -> f64 {
        self.cell_measure() * self.domain_values().sum::<f64>()
    }

    /// Cell-measure-weighted `L^p` norm; `p = f64::INFINITY` returns the
    /// essential sup of the piecewise-constant representative.
    fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self
                .domain_values()
                .map(f64::abs)
                .fold(0.0, f64::max));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
        }
        let cm = self.cell_measure();
        let sum: f64 = self.domain_values().map(|v| v.abs().powf(p) * cm).sum();
        Ok(sum.powf(1.0 / p))
    }

    /// Participation ratio `alpha_{p,q} = |Omega|^{1/q - 1/p} ||u||_p / ||u||_q`
    /// for `1 <= p < q <= inf`. Lies in `(0, 1]`, with 1 exactly for
    /// a.e.-constant densities.
    fn participation_ratio(&self, p: f64, q: f64) -> Result<f64> {
        if !(p >= 1.0) || !(q > p) {
            return Err(Error::InvalidParameter(format!(
                "participation ratio needs 1 <= p < q, got p={p}, q={q}"
            )));
        }
        let np = self.lp_norm(p)?;
        let nq = self.lp_norm(q)?;
        if nq <= 0.0 {
            return Err(Error::InvalidParameter(
                "participation ratio of the zero density is undefined".into(),
            ));
        }
        let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
        Ok(self.domain_measure().powf(inv_q - 1.0 / p) * np / nq)
    }

    /// Evaluate the distribution function on a strictly increasing grid of
    /// nonnegative thresholds.
    fn distribution_function(&self, thresholds: &[f64]) -> Result<DistributionFunction> {
        if thresholds.is_empty() {
            return Err(Error::InvalidParameter("threshold grid is empty".into()));
        }
        for w in thresholds.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(
                    "thresholds must be strictly increasing".into(),
                ));
            }
        }
        if thresholds[0] < 0.0 {
            return Err(Error::InvalidParameter("thresholds must be nonnegative".into()));
        }
        let mut sorted: Vec<f64> = self.domain_values().map(f64::abs).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cm = self.cell_measure();
        let measures = thresholds
            .iter()
            .map(|&k| {
                // count of |values| > k
                let below = sorted.partition_point(|&v| v <= k);
                cm * (sorted.len() - below) as f64
            })
            .collect();
        Ok(DistributionFunction { thresholds: thresholds.to_vec(), measures })
    }

    /// Decreasing rearrangement `u*` on `(0, |Omega|)`. Exact for
    /// piecewise-constant data: sorts the cell values in descending order.
    fn decreasing_rearrangement(&self) -> Result<GridDensity1D> {
        if self.mass() <= 0.0 {
            return Err(Error::InvalidParameter(
                "decreasing rearrangement needs positive mass".into(),
            ));
        }
        let mut sorted: Vec<f64> = self.domain_values().map(f64::abs).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        GridDensity1D::new(Interval::new(0.0, self.domain_measure())?, sorted)
    }
}

impl Density for GridDensity1D {
    fn dim(&self) -> usize {
        1
    }

    fn cell_measure(&self) -> f64 {
        self.cell_width()
    }

    fn domain_measure(&self) -> f64 {
        self.interval.length()
    }

    fn domain_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

impl Density for MaskedGrid2D {
    fn dim(&self) -> usize {
        2
    }

    fn cell_measure(&self) -> f64 {
        self.cell_area()
    }

    fn domain_measure(&self) -> f64 {
        self.cell_area() * self.masked_count() as f64
    }

    fn domain_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.mask
            .iter()
            .zip(self.values.iter())
            .filter(|(m, _)| **m)
            .map(|(_, v)| *v)
    }
}
