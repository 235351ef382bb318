//! Wasserstein-2 localization on the unit interval.
//!
//! For a probability density `u` on `(0, 1)` the localization coefficient is
//! the Wasserstein-2 distance between `u dx` and the uniform measure. Two
//! backends compute it:
//!
//! - the quantile closed form `W2^2 = int_0^1 (U^{-1}(y) - y)^2 dy`, and
//! - the Sobolev route `W2^2 = int_0^1 (U(x) - x)^2 dx`, which is the squared
//!   `H^-1` distance to uniform obtained from the Neumann-Poisson problem.
//!
//! Both integrals are evaluated exactly on the piecewise-linear CDF of a
//! piecewise-constant density, so the two backends agree to rounding and
//! cross-validate each other.

use crate::density::GridDensity1D;
use crate::error::{Error, Result};
use crate::ot::{atomize_1d, solve_exact, CostKernel};

/// Piecewise-linear CDF on `(0, 1)`: `values[i]` is the exact integral of the
/// density up to `nodes[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdf1D {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl Cdf1D {
    pub fn from_parts(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidParameter(
                "CDF needs matching node and value arrays of length >= 2".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("CDF nodes must be strictly increasing".into()));
            }
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidParameter("CDF values must be nondecreasing".into()));
            }
        }
        if values[0] != 0.0 || (values[values.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "CDF must run from 0 to 1, got [{}, {}]",
                values[0],
                values[values.len() - 1]
            )));
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation of `U` at `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= self.nodes[0] {
            return self.values[0];
        }
        let last = self.nodes.len() - 1;
        if x >= self.nodes[last] {
            return self.values[last];
        }
        let j = self.nodes.partition_point(|&t| t <= x);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Pseudo-inverse `U^{-1}(r) = inf { t : U(t) > r }`, resolved exactly on
    /// the piecewise-linear representation. Where `U` is flat at level `r`
    /// the infimum sits at the downstream end of the flat run.
    pub fn quantile(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "quantile needs r in [0, 1), got {r} (the pseudo-inverse is unbounded at 1)"
            )));
        }
        let j = self.values.partition_point(|&v| v <= r);
        if j >= self.values.len() {
            // r above the final value only by rounding slack
            return Ok(self.nodes[self.nodes.len() - 1]);
        }
        debug_assert!(j >= 1, "values[0] = 0 <= r");
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        Ok(x0 + (x1 - x0) * (r - v0) / (v1 - v0))
    }

    /// Exact `int (U(x) - x)^2 dx` over the node range: the squared Sobolev
    /// `H^-1` distance to the uniform density.
    pub fn cdf_deviation_sq(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let seg = self.nodes[i + 1] - self.nodes[i];
            let g0 = self.values[i] - self.nodes[i];
            let g1 = self.values[i + 1] - self.nodes[i + 1];
            total += seg * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
        }
        total
    }

    /// Exact `int_0^1 (U^{-1}(y) - y)^2 dy`: the squared quantile-form
    /// Wasserstein-2 distance to the uniform density. Flat runs of `U` carry
    /// no `y`-measure and drop out.
    pub fn quantile_deviation_sq(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let m = self.values[i + 1] - self.values[i];
            if m <= 0.0 {
                continue;
            }
            let seg = self.nodes[i + 1] - self.nodes[i];
            // U^{-1}(y) = x_i + (y - v_i) seg / m; substituting t = y - v_i the
            // integrand is (a + (e/m) t)^2 with e = seg - m, kept in this form
            // so near-empty cells cannot overflow
            let a = self.nodes[i] - self.values[i];
            let e = seg - m;
            total += m * (a * a + a * e + e * e / 3.0);
        }
        total
    }
}

/// Map a unit-mass density on `(x0, x1)` to the unit-mass density
/// `u(x) = |Omega| v(|Omega| x + x0)` on `(0, 1)`.
pub fn rescale_to_unit(v: &GridDensity1D) -> Result<GridDensity1D> {
    v.check_unit_mass(1e-10)?;
    let scale = v.interval().length();
    let values = v.values().iter().map(|&w| w * scale).collect();
    GridDensity1D::new(crate::density::Interval::unit(), values)
}

/// Exact running integral of a unit-mass density on `(0, 1)`, with nodes at
/// the cell edges. The accumulated rounding drift is removed by scaling the
/// final node to exactly 1.
pub fn cdf(u: &GridDensity1D) -> Result<Cdf1D> {
    let iv = u.interval();
    if iv.x0() != 0.0 || iv.x1() != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "cdf expects a density on (0, 1); rescale_to_unit a density on ({}, {}) first",
            iv.x0(),
            iv.x1()
        )));
    }
    u.check_unit_mass(1e-10)?;
    let n = u.n();
    let h = u.cell_width();
    let mut nodes = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    values.push(0.0);
    let mut running = 0.0;
    for (i, &v) in u.values().iter().enumerate() {
        running += v * h;
        nodes.push((i + 1) as f64 / n as f64);
        values.push(running);
    }
    let total = *values.last().unwrap();
    for v in &mut values[1..] {
        *v /= total;
    }
    Cdf1D::from_parts(nodes, values)
}

/// Localization coefficient of `u` on `(0, 1)` computed by both backends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationScore {
    /// Quantile-form Wasserstein-2 distance to uniform.
    pub w2: f64,
    /// Sobolev-form distance (`H^-1` to uniform).
    pub sobolev: f64,
}

/// Wasserstein-2 distance from `u` to the uniform density on `(0, 1)` via
/// the quantile closed form.
pub fn w2_quantile(u: &GridDensity1D) -> Result<f64> {
    Ok(cdf(u)?.quantile_deviation_sq().max(0.0).sqrt())
}

/// The same distance via the Sobolev route `sqrt(int (U(x) - x)^2 dx)`.
pub fn h_minus1_1d(u: &GridDensity1D) -> Result<f64> {
    Ok(cdf(u)?.cdf_deviation_sq().max(0.0).sqrt())
}

/// Both backends from a single CDF pass.
pub fn localization_score(u: &GridDensity1D) -> Result<LocalizationScore> {
    let c = cdf(u)?;
    Ok(LocalizationScore {
        w2: c.quantile_deviation_sq().max(0.0).sqrt(),
        sobolev: c.cdf_deviation_sq().max(0.0).sqrt(),
    })
}

/// Optimal transport cost between two unit-mass densities on `(0, 1)` under
/// the periodized cost `min{(x-y)^2, (1-|x-y|)^2}`, solved by the exact LP on
/// the atomized measures. Returns the square root of the cost.
pub fn periodized_w2_1d(u: &GridDensity1D, v: &GridDensity1D) -> Result<f64> {
    let mu = atomize_1d(u)?;
    let nu = atomize_1d(v)?;
    let plan = solve_exact(&mu, &nu, &CostKernel::Periodized1d { period: 1.0 })?;
    Ok(plan.cost.max(0.0).sqrt())
}

/// Wasserstein-2 distance from `u` (zero-extended) to the uniform density on
/// the enlarged interval `(-margin, 1 + margin)`.
///
/// The enlarged problem is pulled back to `(0, 1)` by the affine map, solved
/// by the quantile formula there, and scaled back by `|Omega'|`, under which
/// the Wasserstein-2 distance is homogeneous.
pub fn extended_domain_beta(u: &GridDensity1D, margin: f64) -> Result<f64> {
    Ok(extended_domain_score(u, margin)?.w2)
}

/// Both backends of the extended-domain coefficient; the Sobolev route stays
/// valid because the enlarged problem is solved on `(0, 1)` after rescaling.
pub fn extended_domain_score(u: &GridDensity1D, margin: f64) -> Result<LocalizationScore> {
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "extension margin must be finite and nonnegative, got {margin}"
        )));
    }
    if margin == 0.0 {
        return localization_score(u);
    }
    let base = cdf(u)?;
    let scale = 1.0 + 2.0 * margin;
    let mut nodes = Vec::with_capacity(base.nodes().len() + 2);
    let mut values = Vec::with_capacity(base.values().len() + 2);
    nodes.push(0.0);
    values.push(0.0);
    for (&x, &v) in base.nodes().iter().zip(base.values()) {
        nodes.push((x + margin) / scale);
        values.push(v);
    }
    nodes.push(1.0);
    values.push(1.0);
    let extended = Cdf1D::from_parts(nodes, values)?;
    Ok(LocalizationScore {
        w2: scale * extended.quantile_deviation_sq().max(0.0).sqrt(),
        sobolev: scale * extended.cdf_deviation_sq().max(0.0).sqrt(),
    })
}
