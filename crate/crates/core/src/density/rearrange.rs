//! Spherical rearrangement and mass-concentration comparisons.

use crate::density::{Density, GridDensity1D, MaskedGrid2D};
use crate::error::{Error, Result};

/// Tolerance for tie detection in the concentration preorder.
const ORDER_TOL: f64 = 1e-10;

/// Radially symmetric profile on the disc of measure `|Omega|`: ring `j`
/// spans radii `(outer_radii[j-1], outer_radii[j]]` (with inner radius 0 for
/// the first ring) and carries the constant value `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    outer_radii: Vec<f64>,
    values: Vec<f64>,
    ring_area: f64,
}

impl RadialProfile {
    /// Radius of the equal-measure disc.
    pub fn total_radius(&self) -> f64 {
        *self.outer_radii.last().unwrap()
    }

    /// Profile value at radius `r` (zero outside the disc).
    pub fn value_at(&self, r: f64) -> f64 {
        if r < 0.0 || r > self.total_radius() {
            return 0.0;
        }
        let j = self.outer_radii.partition_point(|&out| out < r);
        self.values[j.min(self.values.len() - 1)]
    }

    /// Exact integral of the profile over the centered ball of radius `r`.
    pub fn mass_within(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.total_radius());
        let target = std::f64::consts::PI * r * r;
        let mut mass = 0.0;
        let mut area = 0.0;
        for (j, &v) in self.values.iter().enumerate() {
            let next = (j + 1) as f64 * self.ring_area;
            if next <= target {
                mass += v * self.ring_area;
                area = next;
            } else {
                mass += v * (target - area);
                return mass;
            }
        }
        mass
    }

    /// The `(radius, value)` view: one pair per ring, radius being the outer
    /// ring radius.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.outer_radii.iter().copied().zip(self.values.iter().copied()).collect()
    }
}

/// Spherical decreasing rearrangement `u#(x) = u*(pi |x|^2)` of a masked 2D
/// density, returned as a piecewise-constant radial profile on the disc of
/// equal measure.
pub fn spherical_rearrangement(u: &MaskedGrid2D) -> Result<RadialProfile> {
    let star = u.decreasing_rearrangement()?;
    let ring_area = u.cell_area();
    let outer_radii = (0..star.n())
        .map(|j| ((j + 1) as f64 * ring_area / std::f64::consts::PI).sqrt())
        .collect();
    Ok(RadialProfile { outer_radii, values: star.values().to_vec(), ring_area })
}

/// Integral of the decreasing rearrangement from 0 to `s` (exact on the
/// piecewise-constant representation).
fn partial_mass(star: &GridDensity1D, s: f64) -> f64 {
    let h = star.cell_width();
    let s = s.clamp(0.0, star.interval().length());
    let full = (s / h).floor() as usize;
    let full = full.min(star.n());
    let mut mass: f64 = star.values()[..full].iter().sum::<f64>() * h;
    if full < star.n() {
        mass += star.values()[full] * (s - full as f64 * h);
    }
    mass
}

fn require_same_domain<A: Density, B: Density>(u: &A, v: &B) -> Result<f64> {
    let mu = u.domain_measure();
    let mv = v.domain_measure();
    if (mu - mv).abs() > 1e-9 * mu.max(mv).max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "concentration comparisons need equal domain measures, got {mu} and {mv}"
        )));
    }
    Ok(mu)
}

/// The concentration preorder: `u` is less concentrated than `v`.
///
/// Evaluates both the defining inequality on sup-normalized rearrangements
/// and its equivalent reformulation `alpha_{1,inf}(v) <= alpha_{1,inf}(u)`,
/// checks that the two verdicts agree, and returns the shared verdict. Ties
/// hold in both directions.
pub fn less_concentrated<A: Density, B: Density>(u: &A, v: &B) -> Result<bool> {
    let measure = require_same_domain(u, v)?;

    // Route 1: integrals of positive parts of the normalized rearrangements,
    // evaluated exactly on the merged cell breakpoints.
    let u_star = u.decreasing_rearrangement()?;
    let v_star = v.decreasing_rearrangement()?;
    let sup_u = u_star.values()[0];
    let sup_v = v_star.values()[0];
    if sup_u <= 0.0 || sup_v <= 0.0 {
        return Err(Error::InvalidParameter(
            "concentration comparison needs nonzero densities".into(),
        ));
    }
    let hu = u_star.cell_width();
    let hv = v_star.cell_width();
    let (mut lhs, mut rhs) = (0.0, 0.0); // lhs = int (v - u)_+, rhs = int (u - v)_+
    let (mut iu, mut iv) = (0usize, 0usize);
    let mut pos = 0.0;
    while iu < u_star.n() && iv < v_star.n() {
        let next_u = (iu + 1) as f64 * hu;
        let next_v = (iv + 1) as f64 * hv;
        let next = next_u.min(next_v).min(measure);
        let seg = next - pos;
        if seg > 0.0 {
            let du = u_star.values()[iu] / sup_u;
            let dv = v_star.values()[iv] / sup_v;
            if dv > du {
                lhs += (dv - du) * seg;
            } else {
                rhs += (du - dv) * seg;
            }
        }
        if next_u <= next {
            iu += 1;
        }
        if next_v <= next {
            iv += 1;
        }
        pos = next;
    }
    let margin_mass = rhs - lhs; // >= 0 means u is less concentrated

    // Route 2: participation ratios computed directly from the norms.
    let alpha_u = u.participation_ratio(1.0, f64::INFINITY)?;
    let alpha_v = v.participation_ratio(1.0, f64::INFINITY)?;
    let margin_alpha = measure * (alpha_u - alpha_v);

    let verdict_mass = margin_mass >= -ORDER_TOL;
    let verdict_alpha = margin_alpha >= -ORDER_TOL;
    if verdict_mass == verdict_alpha {
        return Ok(verdict_mass);
    }
    // verdicts may only differ inside the tie zone
    if margin_mass.abs() <= ORDER_TOL || margin_alpha.abs() <= ORDER_TOL {
        return Ok(true);
    }
    Err(Error::Inconsistency(format!(
        "rearrangement test (margin {margin_mass:.3e}) and alpha test (margin \
         {margin_alpha:.3e}) disagree on the concentration order"
    )))
}

/// Pointwise mass-concentration comparison: for each radius `R`, whether the
/// mass of `u#` inside the centered ball of radius `R` stays below that of
/// `v#`. The conjunction over all radii is the full ordering.
pub fn mass_concentration_compare_vv<A: Density, B: Density>(
    u: &A,
    v: &B,
    radii: &[f64],
) -> Result<Vec<bool>> {
    let measure = require_same_domain(u, v)?;
    if u.dim() != v.dim() {
        return Err(Error::InvalidParameter(
            "mass-concentration comparison needs densities of equal dimension".into(),
        ));
    }
    let dim = u.dim();
    let max_radius = match dim {
        1 => measure / 2.0,
        2 => (measure / std::f64::consts::PI).sqrt(),
        d => {
            return Err(Error::InvalidParameter(format!(
                "mass-concentration comparison supports d in {{1, 2}}, got {d}"
            )))
        }
    };
    for &r in radii {
        if !(r > 0.0 && r < max_radius) {
            return Err(Error::InvalidParameter(format!(
                "radius {r} outside (0, {max_radius})"
            )));
        }
    }
    let u_star = u.decreasing_rearrangement()?;
    let v_star = v.decreasing_rearrangement()?;
    let ball = |r: f64| match dim {
        1 => 2.0 * r,
        _ => std::f64::consts::PI * r * r,
    };
    Ok(radii
        .iter()
        .map(|&r| {
            let s = ball(r);
            partial_mass(&u_star, s) <= partial_mass(&v_star, s) + 1e-12
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_step_family, Interval, StepFamilyParams};

    fn step(d: f64) -> GridDensity1D {
        make_step_family(&StepFamilyParams { a: 0.1, d, b: 0.05 }, 1000, false).unwrap()
    }

    #[test]
    fn constant_is_less_concentrated_than_step() {
        let c = GridDensity1D::constant(Interval::unit(), 200, 1.0).unwrap();
        let u = step(0.3);
        assert!(less_concentrated(&c, &u).unwrap());
        assert!(!less_concentrated(&u, &c).unwrap());
    }

    #[test]
    fn preorder_is_reflexive_and_tie_tolerant() {
        let u = step(0.3);
        assert!(less_concentrated(&u, &u).unwrap());
        // same rearrangement, different separation: ties hold both ways
        let v = step(0.6);
        assert!(less_concentrated(&u, &v).unwrap());
        assert!(less_concentrated(&v, &u).unwrap());
    }

    #[test]
    fn preorder_is_total_and_transitive_on_families() {
        let mut set = vec![GridDensity1D::constant(Interval::unit(), 128, 1.0).unwrap()];
        for d in [0.15, 0.4, 0.7] {
            set.push(step(d));
        }
        for b in [0.02, 0.1] {
            set.push(
                make_step_family(&StepFamilyParams { a: 0.2, d: 0.4, b }, 1000, false).unwrap(),
            );
        }
        for u in &set {
            for v in &set {
                let uv = less_concentrated(u, v).unwrap();
                let vu = less_concentrated(v, u).unwrap();
                assert!(uv || vu, "preorder must be total");
                for w in &set {
                    if uv && less_concentrated(v, w).unwrap() {
                        assert!(less_concentrated(u, w).unwrap(), "transitivity violated");
                    }
                }
            }
        }
    }

    #[test]
    fn vv_comparison_examples() {
        let c = GridDensity1D::constant(Interval::unit(), 500, 1.0).unwrap();
        let u = step(0.3);
        let radii = [0.05, 0.1, 0.2, 0.35, 0.49];
        // u = v: all true
        assert!(mass_concentration_compare_vv(&u, &u, &radii).unwrap().iter().all(|&t| t));
        // constant less concentrated: all true
        assert!(mass_concentration_compare_vv(&c, &u, &radii).unwrap().iter().all(|&t| t));
        // reversed at small R: step mass near the origin exceeds
        let rev = mass_concentration_compare_vv(&u, &c, &[0.05]).unwrap();
        assert!(!rev[0]);
        // out-of-range radius is rejected
        assert!(mass_concentration_compare_vv(&u, &c, &[0.6]).is_err());
    }

    #[test]
    fn spherical_rearrangement_of_constant_density() {
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), 24, 24, (0.5, 0.5), 0.4)
            .unwrap();
        let c = 1.0 / g.domain_measure();
        let vals: Vec<f64> = g.mask().iter().map(|&m| if m { c } else { 0.0 }).collect();
        let u = g.with_values(vals).unwrap();
        let profile = spherical_rearrangement(&u).unwrap();
        for (_, v) in profile.pairs() {
            assert!((v - c).abs() < 1e-12);
        }
        let expect_radius = (u.domain_measure() / std::f64::consts::PI).sqrt();
        assert!((profile.total_radius() - expect_radius).abs() < 1e-12);
        // exact ring integration preserves mass
        assert!((profile.mass_within(profile.total_radius()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_rearrangement_of_radial_indicator() {
        // full square domain, indicator of a centered disc
        let n = 64;
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), n, n, (0.5, 0.5), 10.0)
            .unwrap();
        let r0 = 0.3;
        let vals: Vec<f64> = (0..n * n)
            .map(|i| {
                let (x, y) = g.cell_center(i % n, i / n);
                let d2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
                if d2 <= r0 * r0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let u = g.with_values(vals).unwrap();
        let profile = spherical_rearrangement(&u).unwrap();
        // the rearranged profile is the indicator of a disc of the same area
        let inside_area = u.mass();
        let r_star = (inside_area / std::f64::consts::PI).sqrt();
        assert!((r_star - r0).abs() < 0.01);
        assert_eq!(profile.value_at(0.5 * r_star), 1.0);
        assert_eq!(profile.value_at(1.5 * r_star), 0.0);
    }

    #[test]
    fn spherical_rearrangement_preserves_l1_under_quadrature() {
        let g = MaskedGrid2D::disc((Interval::unit(), Interval::unit()), 32, 32, (0.5, 0.5), 0.45)
            .unwrap();
        let vals: Vec<f64> = (0..32 * 32)
            .map(|i| {
                if !g.mask()[i] {
                    return 0.0;
                }
                let (x, y) = g.cell_center(i % 32, i / 32);
                (-((x - 0.4).powi(2) + (y - 0.6).powi(2)) / 0.02).exp()
            })
            .collect();
        let u = g.with_values(vals).unwrap().normalized().unwrap();
        let profile = spherical_rearrangement(&u).unwrap();
        // midpoint quadrature of int u#(r) 2 pi r dr over a fine radial grid
        let m = 200_000;
        let rmax = profile.total_radius();
        let dr = rmax / m as f64;
        let quad: f64 = (0..m)
            .map(|j| {
                let r = (j as f64 + 0.5) * dr;
                profile.value_at(r) * 2.0 * std::f64::consts::PI * r * dr
            })
            .sum();
        assert!((quad - 1.0).abs() < 1e-6, "quadrature mass {quad}");
    }
}
