//! Exact discrete optimal transport between atomized measures.
//!
//! Measures are lists of weighted atoms; the solver is an exact
//! transportation simplex, so costs are free of regularization bias. Cost
//! kernels cover the squared Euclidean ground cost, its 1D periodization, and
//! additively separable costs such as the distance-to-boundary cost, whose
//! optimal value does not depend on the coupling at all.

mod simplex;

use crate::density::{GridDensity1D, MaskedGrid2D};
use crate::error::{Error, Result};

/// Default cap on the number of arcs (`m * n`) in one LP instance.
pub const DEFAULT_ARC_BUDGET: usize = 4096 * 4096;

/// Weights below this are dropped before solving.
const PRUNE_TOL: f64 = 1e-15;

/// A weighted atom; 1D measures put the coordinate in `position[0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: [f64; 2],
    pub weight: f64,
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let m = Self { atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidParameter("measure needs at least one atom".into()));
        }
        let mut total = 0.0;
        for a in &self.atoms {
            if !a.position[0].is_finite() || !a.position[1].is_finite() {
                return Err(Error::InvalidParameter("atom positions must be finite".into()));
            }
            if !(a.weight >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom weights must be nonnegative, got {}",
                    a.weight
                )));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::MassMismatch { expected: 1.0, actual: total });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Ground cost between atoms, addressed by atom index and position.
#[derive(Debug, Clone)]
pub enum CostKernel {
    /// `|x - y|^2`.
    SquaredEuclidean,
    /// 1D cost `min{(x-y)^2, (period - |x-y|)^2}` identifying the interval
    /// endpoints.
    Periodized1d { period: f64 },
    /// `c(i, j) = source_cost[i] + target_cost[j]`, indexed by atom.
    Separable { source_cost: Vec<f64>, target_cost: Vec<f64> },
}

impl CostKernel {
    fn validate(&self, m: usize, n: usize) -> Result<()> {
        match self {
            CostKernel::SquaredEuclidean => Ok(()),
            CostKernel::Periodized1d { period } => {
                if !(period > &0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "periodized cost needs period > 0, got {period}"
                    )));
                }
                Ok(())
            }
            CostKernel::Separable { source_cost, target_cost } => {
                if source_cost.len() != m || target_cost.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "separable cost tables must match atom counts ({m}, {n}), got ({}, {})",
                        source_cost.len(),
                        target_cost.len()
                    )));
                }
                if source_cost.iter().chain(target_cost).any(|c| !(c >= &0.0)) {
                    return Err(Error::InvalidParameter(
                        "separable cost tables must be nonnegative".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Cost between source atom `i` at `x` and target atom `j` at `y`.
    /// Indices refer to the original (unpruned) measures.
    pub fn eval(&self, i: usize, j: usize, x: [f64; 2], y: [f64; 2]) -> f64 {
        match self {
            CostKernel::SquaredEuclidean => {
                let dx = x[0] - y[0];
                let dy = x[1] - y[1];
                dx * dx + dy * dy
            }
            CostKernel::Periodized1d { period } => {
                let d = (x[0] - y[0]).abs();
                let direct = d * d;
                let wrapped = (period - d) * (period - d);
                direct.min(wrapped)
            }
            CostKernel::Separable { source_cost, target_cost } => {
                source_cost[i] + target_cost[j]
            }
        }
    }
}

/// Exact optimal coupling between two discrete measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// `(source index, target index, mass)` triples in the original atom
    /// indexing, positive masses only.
    pub couplings: Vec<(usize, usize, f64)>,
    /// Objective value in the kernel's units (squared distances for the
    /// quadratic kernels; take the square root for a Wasserstein distance).
    pub cost: f64,
    pub iterations: usize,
    pub basis_size: usize,
    /// Dual potentials of the pruned problem, reported per original atom
    /// (zero for pruned-out atoms).
    pub source_potentials: Vec<f64>,
    pub target_potentials: Vec<f64>,
}

impl TransportPlan {
    /// Largest violation of the two marginal constraints.
    pub fn marginal_violation(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut row = vec![0.0; mu.len()];
        let mut col = vec![0.0; nu.len()];
        for &(i, j, f) in &self.couplings {
            row[i] += f;
            col[j] += f;
        }
        let mut worst: f64 = 0.0;
        for (i, a) in mu.atoms.iter().enumerate() {
            let w = if a.weight > PRUNE_TOL { a.weight } else { 0.0 };
            worst = worst.max((row[i] - w).abs());
        }
        for (j, a) in nu.atoms.iter().enumerate() {
            let w = if a.weight > PRUNE_TOL { a.weight } else { 0.0 };
            worst = worst.max((col[j] - w).abs());
        }
        worst
    }
}

/// One atom per cell at the cell center, weight = cell mass; zero-weight
/// atoms are dropped and the rest renormalized to exactly 1.
pub fn atomize_1d(u: &GridDensity1D) -> Result<DiscreteMeasure> {
    u.check_unit_mass(1e-10)?;
    let h = u.cell_width();
    let mut atoms: Vec<Atom> = u
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| Atom { position: [u.cell_center(i), 0.0], weight: v * h })
        .collect();
    renormalize(&mut atoms)?;
    DiscreteMeasure::new(atoms)
}

/// 2D atomization restricted to the masked cells; also returns the full-grid
/// cell index of each atom, for cost tables indexed by cell.
pub fn atomize_2d_indexed(u: &MaskedGrid2D) -> Result<(DiscreteMeasure, Vec<usize>)> {
    u.check_unit_mass(1e-10)?;
    let ca = u.cell_area();
    let mut atoms = Vec::new();
    let mut cells = Vec::new();
    for iy in 0..u.ny() {
        for ix in 0..u.nx() {
            let i = u.idx(ix, iy);
            if u.mask()[i] && u.values()[i] > 0.0 {
                let (x, y) = u.cell_center(ix, iy);
                atoms.push(Atom { position: [x, y], weight: u.values()[i] * ca });
                cells.push(i);
            }
        }
    }
    renormalize(&mut atoms)?;
    Ok((DiscreteMeasure::new(atoms)?, cells))
}

pub fn atomize_2d(u: &MaskedGrid2D) -> Result<DiscreteMeasure> {
    Ok(atomize_2d_indexed(u)?.0)
}

fn renormalize(atoms: &mut [Atom]) -> Result<()> {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("measure has no positive-weight atoms".into()));
    }
    for a in atoms.iter_mut() {
        a.weight /= total;
    }
    Ok(())
}

/// Exact optimal transport with the default arc budget.
pub fn solve_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kernel: &CostKernel,
) -> Result<TransportPlan> {
    solve_exact_with_budget(mu, nu, kernel, DEFAULT_ARC_BUDGET)
}

/// Exact optimal transport between `mu` and `nu` by the transportation
/// simplex, capped at `max_arcs` cost-matrix entries.
pub fn solve_exact_with_budget(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kernel: &CostKernel,
    max_arcs: usize,
) -> Result<TransportPlan> {
    mu.validate()?;
    nu.validate()?;
    kernel.validate(mu.len(), nu.len())?;

    // prune degenerate atoms, keeping the original indices
    let kept_a: Vec<usize> =
        (0..mu.len()).filter(|&i| mu.atoms[i].weight > PRUNE_TOL).collect();
    let kept_b: Vec<usize> =
        (0..nu.len()).filter(|&j| nu.atoms[j].weight > PRUNE_TOL).collect();
    if kept_a.is_empty() || kept_b.is_empty() {
        return Err(Error::InvalidParameter("measure has no positive-weight atoms".into()));
    }
    let m = kept_a.len();
    let n = kept_b.len();
    if m.saturating_mul(n) > max_arcs {
        return Err(Error::BudgetExceeded(format!(
            "{m} x {n} = {} arcs exceed the budget of {max_arcs}; coarsen the grids or use \
             the separable shortcut",
            m * n
        )));
    }
    let sum_a: f64 = kept_a.iter().map(|&i| mu.atoms[i].weight).sum();
    let sum_b: f64 = kept_b.iter().map(|&j| nu.atoms[j].weight).sum();
    let supplies: Vec<f64> = kept_a.iter().map(|&i| mu.atoms[i].weight / sum_a).collect();
    let demands: Vec<f64> = kept_b.iter().map(|&j| nu.atoms[j].weight / sum_b).collect();

    let cost = |i: usize, j: usize| {
        let (oi, oj) = (kept_a[i], kept_b[j]);
        kernel.eval(oi, oj, mu.atoms[oi].position, nu.atoms[oj].position)
    };
    let max_pivots = 1000 + 50 * (m + n);
    let out = simplex::solve(&supplies, &demands, cost, max_pivots)?;

    let couplings = out
        .flows
        .iter()
        .map(|&(i, j, f)| (kept_a[i], kept_b[j], f))
        .collect();
    let mut source_potentials = vec![0.0; mu.len()];
    let mut target_potentials = vec![0.0; nu.len()];
    for (k, &i) in kept_a.iter().enumerate() {
        source_potentials[i] = out.source_potentials[k];
    }
    for (k, &j) in kept_b.iter().enumerate() {
        target_potentials[j] = out.sink_potentials[k];
    }
    Ok(TransportPlan {
        couplings,
        cost: out.cost,
        iterations: out.iterations,
        basis_size: out.basis_size,
        source_potentials,
        target_potentials,
    })
}

/// Value of an additively separable transport cost `c(x, y) = f(x) + g(y)`:
/// every feasible coupling attains `sum f_i mu_i + sum g_j nu_j`, so no LP is
/// solved.
pub fn separable_cost_value(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    f: &[f64],
    g: &[f64],
) -> Result<f64> {
    if f.len() != mu.len() || g.len() != nu.len() {
        return Err(Error::InvalidParameter(format!(
            "cost tables must match atom counts ({}, {}), got ({}, {})",
            mu.len(),
            nu.len(),
            f.len(),
            g.len()
        )));
    }
    let a: f64 = mu.atoms.iter().zip(f).map(|(at, c)| at.weight * c).sum();
    let b: f64 = nu.atoms.iter().zip(g).map(|(at, c)| at.weight * c).sum();
    Ok(a + b)
}

/// Euclidean distance from each masked cell center to the boundary of the
/// masked region (the polygon separating masked cells from the rest),
/// computed from exact point-to-segment distances. Unmasked cells get 0.
pub fn distance_to_boundary_field(grid: &MaskedGrid2D) -> Result<Vec<f64>> {
    if !grid.is_connected() {
        return Err(Error::InvalidParameter(
            "distance-to-boundary field needs a connected mask".into(),
        ));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let (bx, by) = grid.bbox();
    // boundary edges of the mask polygon
    let mut edges: Vec<([f64; 2], [f64; 2])> = Vec::new();
    let masked = |ix: i64, iy: i64| -> bool {
        ix >= 0
            && iy >= 0
            && (ix as usize) < nx
            && (iy as usize) < ny
            && grid.mask()[iy as usize * nx + ix as usize]
    };
    for iy in 0..ny as i64 {
        for ix in 0..nx as i64 {
            if !masked(ix, iy) {
                continue;
            }
            let x0 = bx.x0() + ix as f64 * hx;
            let y0 = by.x0() + iy as f64 * hy;
            let (x1, y1) = (x0 + hx, y0 + hy);
            if !masked(ix - 1, iy) {
                edges.push(([x0, y0], [x0, y1]));
            }
            if !masked(ix + 1, iy) {
                edges.push(([x1, y0], [x1, y1]));
            }
            if !masked(ix, iy - 1) {
                edges.push(([x0, y0], [x1, y0]));
            }
            if !masked(ix, iy + 1) {
                edges.push(([x0, y1], [x1, y1]));
            }
        }
    }
    let mut field = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            if !grid.mask()[i] {
                continue;
            }
            let (px, py) = grid.cell_center(ix, iy);
            let mut best = f64::INFINITY;
            for &(a, b) in &edges {
                best = best.min(point_segment_distance([px, py], a, b));
            }
            field[i] = best;
        }
    }
    Ok(field)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = p[0] - (a[0] + t * ab[0]);
    let dy = p[1] - (a[1] + t * ab[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Unit-mass sum of two isotropic Gaussian bumps `exp(-r^2 / width^2)` with
/// peak separation `d` along the x axis, centered on the mask centroid.
pub fn two_bump_2d(template: &MaskedGrid2D, d: f64, width: f64) -> Result<MaskedGrid2D> {
    if !(width > 0.0) || !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "two-bump family needs width > 0 and d >= 0, got width={width}, d={d}"
        )));
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    let mut count = 0usize;
    for iy in 0..template.ny() {
        for ix in 0..template.nx() {
            if template.mask()[template.idx(ix, iy)] {
                let (x, y) = template.cell_center(ix, iy);
                cx += x;
                cy += y;
                count += 1;
            }
        }
    }
    let (cx, cy) = (cx / count as f64, cy / count as f64);
    let centers = [[cx - d / 2.0, cy], [cx + d / 2.0, cy]];
    for c in centers {
        if !cell_is_masked_at(template, c) {
            return Err(Error::InvalidParameter(format!(
                "bump center ({}, {}) falls outside the masked domain",
                c[0], c[1]
            )));
        }
    }
    let mut values = vec![0.0; template.nx() * template.ny()];
    for iy in 0..template.ny() {
        for ix in 0..template.nx() {
            let i = template.idx(ix, iy);
            if !template.mask()[i] {
                continue;
            }
            let (x, y) = template.cell_center(ix, iy);
            let mut v = 0.0;
            for c in centers {
                let r2 = (x - c[0]).powi(2) + (y - c[1]).powi(2);
                v += (-r2 / (width * width)).exp();
            }
            values[i] = v;
        }
    }
    template.with_values(values)?.normalized()
}

fn cell_is_masked_at(grid: &MaskedGrid2D, p: [f64; 2]) -> bool {
    let (bx, by) = grid.bbox();
    let ix = ((p[0] - bx.x0()) / grid.hx()).floor();
    let iy = ((p[1] - by.x0()) / grid.hy()).floor();
    if ix < 0.0 || iy < 0.0 || ix >= grid.nx() as f64 || iy >= grid.ny() as f64 {
        return false;
    }
    grid.mask()[grid.idx(ix as usize, iy as usize)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_step_family, GridDensity1D, Interval, StepFamilyParams};
    use crate::rng::SplitMix64;

    #[test]
    fn atomize_constant_density() {
        let u = GridDensity1D::constant(Interval::unit(), 4, 1.0).unwrap();
        let m = atomize_1d(&u).unwrap();
        assert_eq!(m.len(), 4);
        let expect = [0.125, 0.375, 0.625, 0.875];
        for (a, &x) in m.atoms.iter().zip(expect.iter()) {
            assert!((a.position[0] - x).abs() < 1e-15);
            assert!((a.weight - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn atomize_drops_zero_weight_cells() {
        let u = make_step_family(&StepFamilyParams { a: 0.1, d: 0.3, b: 0.05 }, 1000, false)
            .unwrap();
        let m = atomize_1d(&u).unwrap();
        let positive = u.values().iter().filter(|&&v| v > 0.0).count();
        assert_eq!(m.len(), positive);
        assert_eq!(m.len(), 200);
        let total: f64 = m.atoms.iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn atomize_masked_grid_keeps_only_mask() {
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), 12, 12, (0.5, 0.5), 0.4)
            .unwrap();
        let u = two_bump_2d(&g, 0.2, 0.15).unwrap();
        let (m, cells) = atomize_2d_indexed(&u).unwrap();
        assert_eq!(m.len(), cells.len());
        for &c in &cells {
            assert!(u.mask()[c]);
        }
    }

    #[test]
    fn identical_measures_transport_for_free() {
        let u = GridDensity1D::constant(Interval::unit(), 32, 1.0).unwrap();
        let m = atomize_1d(&u).unwrap();
        for kernel in [CostKernel::SquaredEuclidean, CostKernel::Periodized1d { period: 1.0 }] {
            let plan = solve_exact(&m, &m, &kernel).unwrap();
            assert!(plan.cost.abs() < 1e-15);
            assert!(plan.marginal_violation(&m, &m) < 1e-12);
        }
    }

    #[test]
    fn two_atom_pairing_is_optimal() {
        let mu = DiscreteMeasure::new(vec![
            Atom { position: [0.0, 0.0], weight: 0.5 },
            Atom { position: [1.0, 0.0], weight: 0.5 },
        ])
        .unwrap();
        let nu = DiscreteMeasure::new(vec![
            Atom { position: [0.25, 0.0], weight: 0.5 },
            Atom { position: [0.75, 0.0], weight: 0.5 },
        ])
        .unwrap();
        let plan = solve_exact(&mu, &nu, &CostKernel::SquaredEuclidean).unwrap();
        assert!((plan.cost - 0.0625).abs() < 1e-14);
        let mut pairs: Vec<(usize, usize)> =
            plan.couplings.iter().map(|&(i, j, _)| (i, j)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    /// Northwest-corner coupling of sorted 1D atoms, optimal for convex costs.
    fn monotone_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut cost = 0.0;
        let (mut i, mut j) = (0, 0);
        let mut rem_a = mu.atoms[0].weight;
        let mut rem_b = nu.atoms[0].weight;
        loop {
            let f = rem_a.min(rem_b);
            let d = mu.atoms[i].position[0] - nu.atoms[j].position[0];
            cost += f * d * d;
            rem_a -= f;
            rem_b -= f;
            if rem_a <= 1e-17 {
                i += 1;
                if i == mu.len() {
                    break;
                }
                rem_a = mu.atoms[i].weight;
            }
            if rem_b <= 1e-17 {
                j += 1;
                if j == nu.len() {
                    break;
                }
                rem_b = nu.atoms[j].weight;
            }
        }
        cost
    }

    #[test]
    fn simplex_matches_monotone_oracle_on_the_line() {
        let mut rng = SplitMix64::new(4242);
        for _ in 0..20 {
            let u = crate::density::random_mixture(&mut rng, 48).unwrap();
            let v = crate::density::random_mixture(&mut rng, 64).unwrap();
            let mu = atomize_1d(&u).unwrap();
            let nu = atomize_1d(&v).unwrap();
            let plan = solve_exact(&mu, &nu, &CostKernel::SquaredEuclidean).unwrap();
            let oracle = monotone_cost(&mu, &nu);
            assert!(
                (plan.cost - oracle).abs() <= 1e-12 * oracle.max(1e-6),
                "simplex {} vs monotone {}",
                plan.cost,
                oracle
            );
            assert!(plan.marginal_violation(&mu, &nu) < 1e-9);
        }
    }

    #[test]
    fn duality_certificate_holds() {
        let mut rng = SplitMix64::new(7);
        let u = crate::density::random_mixture(&mut rng, 40).unwrap();
        let v = crate::density::random_mixture(&mut rng, 56).unwrap();
        let mu = atomize_1d(&u).unwrap();
        let nu = atomize_1d(&v).unwrap();
        let plan = solve_exact(&mu, &nu, &CostKernel::SquaredEuclidean).unwrap();
        let mut on_support = vec![false; mu.len() * nu.len()];
        for &(i, j, _) in &plan.couplings {
            on_support[i * nu.len() + j] = true;
        }
        for (i, a) in mu.atoms.iter().enumerate() {
            for (j, b) in nu.atoms.iter().enumerate() {
                if a.weight <= PRUNE_TOL || b.weight <= PRUNE_TOL {
                    continue; // pruned atoms carry no dual constraint
                }
                let reduced = CostKernel::SquaredEuclidean.eval(i, j, a.position, b.position)
                    - plan.source_potentials[i]
                    - plan.target_potentials[j];
                if on_support[i * nu.len() + j] {
                    assert!(reduced.abs() <= 1e-9, "basic arc reduced cost {reduced}");
                } else {
                    assert!(reduced >= -1e-9, "off-support reduced cost {reduced}");
                }
            }
        }
        let kept_m = mu.atoms.iter().filter(|a| a.weight > PRUNE_TOL).count();
        let kept_n = nu.atoms.iter().filter(|a| a.weight > PRUNE_TOL).count();
        assert!(plan.couplings.len() < kept_m + kept_n);
        assert_eq!(plan.basis_size, kept_m + kept_n - 1);
    }

    #[test]
    fn periodized_cost_never_exceeds_squared() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..10 {
            let u = crate::density::random_mixture(&mut rng, 64).unwrap();
            let mu = atomize_1d(&u).unwrap();
            let flat = atomize_1d(
                &GridDensity1D::constant(Interval::unit(), 64, 1.0).unwrap(),
            )
            .unwrap();
            let sq = solve_exact(&mu, &flat, &CostKernel::SquaredEuclidean).unwrap();
            let per =
                solve_exact(&mu, &flat, &CostKernel::Periodized1d { period: 1.0 }).unwrap();
            assert!(per.cost <= sq.cost + 1e-12);
        }
    }

    #[test]
    fn antipodal_atoms_and_wraparound() {
        let one = |x: f64| {
            DiscreteMeasure::new(vec![Atom { position: [x, 0.0], weight: 1.0 }]).unwrap()
        };
        let kernel = CostKernel::Periodized1d { period: 1.0 };
        let plan = solve_exact(&one(0.0), &one(0.5), &kernel).unwrap();
        assert!((plan.cost - 0.25).abs() < 1e-12);
        // wraparound shortcut: 0.05 to 0.95 is 0.1 around the circle
        let plan = solve_exact(&one(0.05), &one(0.95), &kernel).unwrap();
        assert!((plan.cost - 0.01).abs() < 1e-12);
    }

    #[test]
    fn separable_cost_matches_lp_and_shortcut() {
        let mut rng = SplitMix64::new(1234);
        let u = crate::density::random_mixture(&mut rng, 32).unwrap();
        let v = crate::density::random_mixture(&mut rng, 24).unwrap();
        let mu = atomize_1d(&u).unwrap();
        let nu = atomize_1d(&v).unwrap();
        let f: Vec<f64> = (0..mu.len()).map(|i| 0.1 + 0.01 * i as f64).collect();
        let g: Vec<f64> = (0..nu.len()).map(|j| 0.3 + 0.02 * j as f64).collect();
        let direct = separable_cost_value(&mu, &nu, &f, &g).unwrap();
        let plan = solve_exact(
            &mu,
            &nu,
            &CostKernel::Separable { source_cost: f.clone(), target_cost: g.clone() },
        )
        .unwrap();
        assert!((plan.cost - direct).abs() <= 1e-10);
        // zero cost parts give zero
        let zero = separable_cost_value(&mu, &nu, &vec![0.0; mu.len()], &vec![0.0; nu.len()])
            .unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let u = GridDensity1D::constant(Interval::unit(), 64, 1.0).unwrap();
        let m = atomize_1d(&u).unwrap();
        let err = solve_exact_with_budget(&m, &m, &CostKernel::SquaredEuclidean, 100);
        assert!(matches!(err, Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn distance_field_on_unit_square() {
        let n = 16;
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), n, n, (0.5, 0.5), 10.0)
            .unwrap();
        let field = distance_to_boundary_field(&g).unwrap();
        let h = 1.0 / n as f64;
        // boundary-adjacent cell sits half a cell from the edge
        assert!((field[0] - h / 2.0).abs() < 1e-12);
        // the cells nearest the center sit at 0.5 - h/2 for even n
        let c = g.idx(n / 2, n / 2);
        assert!((field[c] - (0.5 - h / 2.0)).abs() < 1e-12);
        for (i, &d) in field.iter().enumerate() {
            if g.mask()[i] {
                assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn two_bump_family_basics() {
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), 24, 24, (0.5, 0.5), 0.45)
            .unwrap();
        for d in [0.0, 0.2, 0.5] {
            let u = two_bump_2d(&g, d, 0.08).unwrap();
            assert!((u.mass() - 1.0).abs() < 1e-12);
        }
        // symmetric placement: reflection across the bump axis
        let u = two_bump_2d(&g, 0.4, 0.08).unwrap();
        for iy in 0..24 {
            for ix in 0..24 {
                let i = u.idx(ix, iy);
                let j = u.idx(23 - ix, iy);
                if u.mask()[i] && u.mask()[j] {
                    assert!((u.values()[i] - u.values()[j]).abs() < 1e-12);
                }
            }
        }
        // bump centers must stay inside the mask
        assert!(two_bump_2d(&g, 1.5, 0.08).is_err());
    }
}
