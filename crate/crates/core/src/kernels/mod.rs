//! The exponential transform `E` and its region-wise relatives.
//!
//! | kernel | `z`      | `w`      | definition              |
//! |--------|----------|----------|-------------------------|
//! | `F`    | exterior | exterior | `E`                     |
//! | `G`    | interior | exterior | `E/(z̄ − w̄)`             |
//! | `G*`   | exterior | interior | `−E/(z − w)`            |
//! | `H`    | interior | interior | `E/((z − w)(z̄ − w̄))`    |

mod cauchy;
mod closed;
mod quad;

pub use cauchy::{cauchy_area, cauchy_boundary, BoundaryCauchy, CauchyDensity, Density, Side, NEAR_BOUNDARY};
pub use closed::ClosedShape;

use dashmap::DashMap;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_area, AreaQuadrature};

/// Default accuracy target of the quadrature backend.
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

/// Relative width of the interior diagonal band where weighted transforms
/// are not evaluated.
pub const DIAGONAL_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Exterior,
}

/// Evaluates `E, F, G, G*, H`, the Schwarz parts `S_±` and `L = 1/E − 1`.
///
/// Disks and ellipses default to closed forms; any domain can use the
/// quadrature backend, which memoizes `E` values.
#[derive(Debug)]
pub struct KernelEvaluator {
    domain: DomainSpec,
    backend: Backend,
    shape: Option<ClosedShape>,
    area: AreaQuadrature,
    tol: f64,
    delta: f64,
    cache: DashMap<[u64; 4], Complex64>,
    h_cache: DashMap<[u64; 4], Complex64>,
}

impl KernelEvaluator {
    /// Closed forms where available, quadrature otherwise.
    pub fn new(domain: &DomainSpec) -> Result<Self> {
        let backend = if domain.has_closed_form() {
            Backend::ClosedForm
        } else {
            Backend::Quadrature
        };
        Self::with_backend(domain, backend)
    }

    pub fn with_backend(domain: &DomainSpec, backend: Backend) -> Result<Self> {
        let area = AreaQuadrature::default_for(domain);
        let shape = match (domain.kind(), backend) {
            (_, Backend::Quadrature) => None,
            (DomainKind::Disk { center, radius }, _) => Some(ClosedShape::Disk {
                center: *center,
                radius: *radius,
            }),
            (DomainKind::Ellipse { a, b }, _) => Some(ClosedShape::Ellipse {
                a: *a,
                b: *b,
                constant: ellipse_constant(&area, *a, *b)?,
            }),
            (DomainKind::Smooth { .. }, Backend::ClosedForm) => {
                return Err(Error::InvalidArgument(
                    "closed-form kernels exist only for disks and ellipses".into(),
                ))
            }
        };
        Ok(Self {
            domain: domain.clone(),
            backend,
            shape,
            area,
            tol: DEFAULT_TOLERANCE,
            delta: DIAGONAL_BAND * domain.diameter(),
            cache: DashMap::new(),
            h_cache: DashMap::new(),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn closed_shape(&self) -> Option<ClosedShape> {
        self.shape
    }

    pub fn area_rule(&self) -> &AreaQuadrature {
        &self.area
    }

    /// Numerator `C` of the ellipse kernel `H = C/Q`, if applicable.
    pub fn ellipse_constant(&self) -> Option<f64> {
        match self.shape {
            Some(ClosedShape::Ellipse { constant, .. }) => Some(constant),
            _ => None,
        }
    }

    /// Interior or exterior; points on the boundary are rejected.
    pub fn region(&self, z: Complex64) -> Result<Region> {
        if self.domain.contains(z) {
            Ok(Region::Interior)
        } else if !self.domain.contains_closed(z) {
            Ok(Region::Exterior)
        } else {
            Err(Error::Region(format!("{z} lies on the boundary, where the kernels are not defined")))
        }
    }

    fn expect(&self, z: Complex64, want: Region, kernel: &str, arg: &str) -> Result<()> {
        let got = self.region(z)?;
        if got == want {
            return Ok(());
        }
        let place = match want {
            Region::Interior => "inside the domain",
            Region::Exterior => "outside the closed domain",
        };
        Err(Error::Region(format!("{kernel} requires {arg} {place}, got {z}")))
    }

    /// `E(z, w)` in any combination of regions.
    pub fn e(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let regions = (
            self.region(z)? == Region::Interior,
            self.region(w)? == Region::Interior,
        );
        if let Some(shape) = self.shape {
            return Ok(shape.e(z, w, regions.0, regions.1));
        }
        let key = [z.re.to_bits(), z.im.to_bits(), w.re.to_bits(), w.im.to_bits()];
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = quad::exp_transform(&self.domain, z, w, regions, self.tol)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Number of memoized `E` values.
    pub fn cached_values(&self) -> usize {
        self.cache.len()
    }

    /// `H(z, w)` for `z, w ∈ Ω`, including the diagonal.
    pub fn h(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Interior, "H", "z")?;
        self.expect(w, Region::Interior, "H", "w")?;
        if let Some(shape) = self.shape {
            return Ok(shape.h(z, w));
        }
        let key = [z.re.to_bits(), z.im.to_bits(), w.re.to_bits(), w.im.to_bits()];
        if let Some(v) = self.h_cache.get(&key) {
            return Ok(*v);
        }
        let v = (-quad::log_h_interior(&self.domain, z, w, self.tol)?).exp();
        self.h_cache.insert(key, v);
        Ok(v)
    }

    /// `G(z, w)`, `z ∈ Ω`, `w ∉ Ω̄`.
    pub fn g(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Interior, "G", "z")?;
        self.expect(w, Region::Exterior, "G", "w")?;
        match self.shape {
            Some(shape) => Ok(shape.g(z, w)),
            None => Ok(self.e(z, w)? / (z - w).conj()),
        }
    }

    /// `G*(z, w)`, `z ∉ Ω̄`, `w ∈ Ω`.
    pub fn g_star(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Exterior, "G*", "z")?;
        self.expect(w, Region::Interior, "G*", "w")?;
        match self.shape {
            Some(shape) => Ok(shape.g_star(z, w)),
            None => Ok(-self.e(z, w)? / (z - w)),
        }
    }

    /// `F(z, w)`, both points outside the closed domain.
    pub fn f(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Exterior, "F", "z")?;
        self.expect(w, Region::Exterior, "F", "w")?;
        self.e(z, w)
    }

    /// `L(z, w) = 1/E(z, w) − 1` for exterior `z, w`.
    pub fn l(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let e = self.f(z, w)?;
        if e.norm() == 0.0 {
            return Err(Error::Singular(format!("E({z}, {w}) vanishes")));
        }
        Ok(1.0 / e - 1.0)
    }

    /// `E` with a weight `0 ≤ ρ ≤ 1` in place of the indicator of the domain,
    /// always by quadrature over the domain.
    pub fn e_weighted<R>(&self, rho: R, z: Complex64, w: Complex64) -> Result<Complex64>
    where
        R: Fn(Complex64) -> f64 + Sync + Send,
    {
        self.region(z)?;
        self.region(w)?;
        if self.domain.contains(z) && self.domain.contains(w) && (z - w).norm() < self.delta {
            return Err(Error::Diagonal(z));
        }
        let i = quad::log_e_area(&self.area, z, w, rho, self.tol)?;
        Ok((-i).exp())
    }

    /// `S_−(z) = C[χ_Ω](z)` outside the closed domain.
    pub fn s_minus(&self, z: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Exterior, "S_-", "z")?;
        match self.shape {
            Some(shape) => Ok(shape.s_minus(z)),
            None => Ok(self.schwarz_cauchy(z)?),
        }
    }

    /// `S_+(z) = z̄ − C[χ_Ω](z)` inside.
    pub fn s_plus(&self, z: Complex64) -> Result<Complex64> {
        self.expect(z, Region::Interior, "S_+", "z")?;
        match self.shape {
            Some(shape) => Ok(shape.s_plus(z)),
            None => Ok(-self.schwarz_cauchy(z)?),
        }
    }

    /// `−(1/2πi)∮ ζ̄ dζ/(ζ − z)`.
    fn schwarz_cauchy(&self, z: Complex64) -> Result<Complex64> {
        Ok(cauchy_boundary(|zeta| zeta.conj(), &self.domain, z, self.tol)?.value)
    }
}

/// `C` fixed by `(1/π)∫_Ω H(z, 0) dA = 1` with `H = C/Q`.
fn ellipse_constant(q: &AreaQuadrature, a: f64, b: f64) -> Result<f64> {
    let zero = Complex64::new(0.0, 0.0);
    let est = integrate_area(
        |z| 1.0 / ClosedShape::ellipse_quadratic(a, b, z, zero),
        q,
        &[],
        1e-13,
    )?;
    Ok(PI / est.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ellipse_constant_is_square_of_axis_sum() {
        for (a, b) in [(2.0, 1.0), (1.5, 1.2), (3.0, 0.5)] {
            let k = KernelEvaluator::new(&DomainSpec::ellipse(a, b).unwrap()).unwrap();
            let cst = k.ellipse_constant().unwrap();
            assert!((cst - (a + b) * (a + b)).abs() < 1e-10 * cst, "{a},{b}: {cst}");
        }
    }

    #[test]
    fn region_errors_name_the_requirement() {
        let k = KernelEvaluator::new(&DomainSpec::unit_disk()).unwrap();
        let err = k.h(c(2.0, 0.0), c(3.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("inside"), "{err}");
        assert!(k.g(c(2.0, 0.0), c(3.0, 0.0)).is_err());
        assert!(k.e(c(1.0, 0.0), c(3.0, 0.0)).is_err());
    }

    #[test]
    fn smooth_domains_reject_closed_forms() {
        let d = DomainSpec::smooth(vec![(1, c(1.0, 0.0)), (-1, c(0.2, 0.0))], c(0.0, 0.0)).unwrap();
        assert!(KernelEvaluator::with_backend(&d, Backend::ClosedForm).is_err());
        assert_eq!(KernelEvaluator::new(&d).unwrap().backend(), Backend::Quadrature);
    }

    #[test]
    fn far_field_e_tends_to_one() {
        for backend in [Backend::ClosedForm, Backend::Quadrature] {
            let k = KernelEvaluator::with_backend(&DomainSpec::unit_disk(), backend).unwrap();
            let v = k.e(c(1e6, 0.0), c(0.0, 1e6)).unwrap();
            assert!((v - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn quadrature_e_is_memoized() {
        let k = KernelEvaluator::with_backend(&DomainSpec::unit_disk(), Backend::Quadrature).unwrap();
        let a = k.e(c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let b = k.e(c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(k.cached_values(), 1);
    }

    #[test]
    fn quadrature_handles_the_interior_diagonal() {
        let k = KernelEvaluator::with_backend(&DomainSpec::unit_disk(), Backend::Quadrature).unwrap();
        let (z, w) = (c(0.1, 0.0), c(0.1, 1e-5));
        let exact = 1.0 / (1.0 - z * w.conj());
        assert!((k.h(z, w).unwrap() - exact).norm() < 1e-10);
        assert!((k.h(z, z).unwrap() - 1.0 / (1.0 - 0.01)).norm() < 1e-10);
        assert!((k.e(z, w).unwrap() - exact * 1e-10).norm() < 1e-20);
        assert!(k.e(z, z).unwrap().norm() == 0.0);
    }

    #[test]
    fn zero_weight_gives_unit_transform() {
        let k = KernelEvaluator::new(&DomainSpec::unit_disk()).unwrap();
        assert_eq!(k.e_weighted(|_| 0.0, c(0.2, 0.1), c(-0.5, 0.3)).unwrap(), c(1.0, 0.0));
    }
}
