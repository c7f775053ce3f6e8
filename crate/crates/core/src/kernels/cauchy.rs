//! Cauchy transforms `C[μ](z) = −(1/π)∫ dμ(ζ)/(ζ − z)` of point masses, area
//! densities and boundary densities.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_area, integrate_boundary_adaptive, nodes_for_distance, AreaQuadrature};

/// A complex function shared across threads.
pub type Density = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Distance below which boundary Cauchy integrals are flagged as degraded.
pub const NEAR_BOUNDARY: f64 = 1e-6;

#[derive(Clone)]
pub enum CauchyDensity {
    /// `Σ c_j δ_{a_j}` as `(a_j, c_j)`.
    PointMasses(Vec<(Complex64, Complex64)>),
    /// `g dA` on the domain.
    Area(Density),
    /// `(1/2i) f dζ` on the boundary.
    Boundary(Density),
}

impl fmt::Debug for CauchyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CauchyDensity::PointMasses(m) => f.debug_tuple("PointMasses").field(m).finish(),
            CauchyDensity::Area(_) => f.write_str("Area(..)"),
            CauchyDensity::Boundary(_) => f.write_str("Boundary(..)"),
        }
    }
}

impl CauchyDensity {
    pub fn area<F>(g: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        CauchyDensity::Area(Arc::new(g))
    }

    pub fn boundary<F>(f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        CauchyDensity::Boundary(Arc::new(f))
    }

    /// Checks that point masses lie in the closed domain.
    pub fn validate(&self, d: &DomainSpec) -> Result<()> {
        if let CauchyDensity::PointMasses(m) = self {
            if let Some(&(a, _)) = m.iter().find(|(a, _)| !d.contains_closed(*a)) {
                return Err(Error::OutsideDomain(a));
            }
        }
        Ok(())
    }
}

/// `C[μ](z)`; area densities are integrated with the rule `q`, refined at `z`
/// when `z` lies in the closed domain.
pub fn cauchy_area(mu: &CauchyDensity, q: &AreaQuadrature, z: Complex64, tol: f64) -> Result<Complex64> {
    match mu {
        CauchyDensity::PointMasses(masses) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(a, c) in masses {
                if (a - z).norm() == 0.0 {
                    return Err(Error::Singular(format!("Cauchy transform evaluated at the point mass {a}")));
                }
                acc += c / (a - z);
            }
            Ok(-acc / PI)
        }
        CauchyDensity::Area(g) => {
            let singular: Vec<Complex64> = if q.domain().contains_closed(z) { vec![z] } else { vec![] };
            let est = integrate_area(|zeta| g(zeta) / (zeta - z), q, &singular, tol)?;
            Ok(-est.value / PI)
        }
        CauchyDensity::Boundary(f) => Ok(cauchy_boundary(f.as_ref(), q.domain(), z, tol)?.value),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

/// Value of a boundary Cauchy integral and how much to trust it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCauchy {
    pub side: Side,
    pub value: Complex64,
    pub error: f64,
    /// Set when the point lies within [`NEAR_BOUNDARY`] of the curve.
    pub near_boundary: bool,
}

/// `−(1/2πi)∮ f(ζ)dζ/(ζ − z)`, which is `−f_+(z)` inside and `f_−(z)` outside
/// for the splitting `f = f_+ + f_−` on the curve.
pub fn cauchy_boundary<F>(f: F, d: &DomainSpec, z: Complex64, tol: f64) -> Result<BoundaryCauchy>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    let side = if d.contains(z) {
        Side::Interior
    } else if !d.contains_closed(z) {
        Side::Exterior
    } else {
        return Err(Error::Region(format!("{z} lies on the boundary curve")));
    };
    let foot = d.nearest_boundary_point(z);
    let dist = (foot - z).norm();
    let near_boundary = dist < NEAR_BOUNDARY;
    let start = nodes_for_distance(d, dist);
    // subtracting f at the foot point leaves a bounded integrand
    let f_foot = f(foot);
    let subtracted = |zeta: Complex64| (f(zeta) - f_foot) / (zeta - z);
    let (v, err) = match integrate_boundary_adaptive(subtracted, d, start, tol) {
        Ok(r) => r,
        Err(Error::Accuracy { estimate, bound, .. }) if near_boundary => (estimate, bound),
        Err(e) => return Err(e),
    };
    let scale = Complex64::new(0.0, 2.0 * PI);
    let v = if side == Side::Interior { v + f_foot * scale } else { v };
    Ok(BoundaryCauchy {
        side,
        value: -v / scale,
        error: err / (2.0 * PI),
        near_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn area_examples() {
        let d = DomainSpec::unit_disk();
        let q = AreaQuadrature::default_for(&d);
        let one = CauchyDensity::area(|_| c(1.0, 0.0));
        assert!((cauchy_area(&one, &q, c(2.0, 0.0), 1e-12).unwrap() - 0.5).norm() < 1e-12);
        let mass = CauchyDensity::PointMasses(vec![(c(0.0, 0.0), c(PI, 0.0))]);
        assert!((cauchy_area(&mass, &q, c(3.0, 0.0), 1e-12).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        let zeta = CauchyDensity::area(|z| z);
        for z in [c(1.5, 0.0), c(0.0, -3.0), c(-1.2, 1.1)] {
            assert!(cauchy_area(&zeta, &q, z, 1e-12).unwrap().norm() < 1e-12);
        }
        assert!(matches!(cauchy_area(&mass, &q, c(0.0, 0.0), 1e-12), Err(Error::Singular(_))));
    }

    #[test]
    fn interior_transform_of_indicator_is_conjugate_on_disk() {
        // C[χ_D](z) = z̄ inside, so S_+ = 0
        let q = AreaQuadrature::default_for(&DomainSpec::unit_disk());
        let one = CauchyDensity::area(|_| c(1.0, 0.0));
        for z in [c(0.3, 0.1), c(-0.5, -0.6), c(0.0, 0.95)] {
            let v = cauchy_area(&one, &q, z, 1e-11).unwrap();
            assert!((v - z.conj()).norm() < 1e-10, "{z}: {v}");
        }
    }

    #[test]
    fn boundary_examples() {
        let d = DomainSpec::unit_disk();
        let r = cauchy_boundary(|z| z.conj(), &d, c(2.0, 0.0), 1e-13).unwrap();
        assert_eq!(r.side, Side::Exterior);
        assert!((r.value - 0.5).norm() < 1e-13);
        let r = cauchy_boundary(|_| c(1.0, 0.0), &d, c(0.2, 0.3), 1e-13).unwrap();
        assert_eq!(r.side, Side::Interior);
        assert!((r.value + 1.0).norm() < 1e-13);
        let r = cauchy_boundary(|_| c(1.0, 0.0), &d, c(0.0, 5.0), 1e-13).unwrap();
        assert!(r.value.norm() < 1e-13);
        assert!(cauchy_boundary(|_| c(1.0, 0.0), &d, c(1.0, 0.0), 1e-13).is_err());
    }

    #[test]
    fn jump_relation() {
        // f = f_+ + f_− across the curve, recovered from both sides
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let f = |z: Complex64| z.conj() * z + 1.0 / (z - c(3.0, 0.0));
        let t: f64 = 0.7;
        let p = c(2.0 * t.cos(), t.sin());
        let normal = c(t.cos(), 2.0 * t.sin()) / c(t.cos(), 2.0 * t.sin()).norm();
        let h = 1e-4;
        let inside = cauchy_boundary(f, &e, p - normal * h, 1e-7).unwrap().value;
        let outside = cauchy_boundary(f, &e, p + normal * h, 1e-7).unwrap().value;
        // −f_+ inside, f_− outside
        assert!(((-inside + outside) - f(p)).norm() < 1e-3);
    }

    #[test]
    fn boundary_and_area_routes_agree() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let q = AreaQuadrature::default_for(&e);
        let one = CauchyDensity::area(|_| c(1.0, 0.0));
        for z in [c(3.0, 0.5), c(0.5, -0.4)] {
            let area = cauchy_area(&one, &q, z, 1e-10).unwrap();
            // −(1/2πi)∮ ζ̄ dζ/(ζ − z) is S_− outside and −S_+ inside
            let b = cauchy_boundary(|w| w.conj(), &e, z, 1e-13).unwrap().value;
            let expect = if e.contains(z) { b + z.conj() } else { b };
            assert!((area - expect).norm() < 1e-10, "{z}: {area} vs {expect}");
        }
    }
}
