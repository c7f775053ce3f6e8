//! Bounded simply connected planar domains, their boundary parametrization,
//! membership, exhaustion by scaling, and harmonic-moment data.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laurent::{LaurentTail, Truncation};
use crate::quadrature::{integrate_area, AreaQuadrature, BoundaryQuadrature};

/// Geometric tolerance for boundary membership.
pub const GEOM_TOL: f64 = 1e-12;

const STAR_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Disk { center: Complex64, radius: f64 },
    /// Axis-aligned ellipse centered at the origin with `a > b > 0`.
    Ellipse { a: f64, b: f64 },
    /// `ζ(t) = Σ c_k e^{ikt}`, counterclockwise.
    Smooth { coefficients: Vec<(i32, Complex64)> },
}

/// A bounded simply connected domain together with a point known to lie inside.
///
/// Generic smooth domains must be star-shaped with respect to the anchor; area
/// rules are radial grids fanned out from it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    kind: DomainKind,
    anchor: Complex64,
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Self {
            kind: DomainKind::Disk {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
            },
            anchor: Complex64::new(0.0, 0.0),
        }
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self {
            kind: DomainKind::Disk { center, radius },
            anchor: center,
        })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > b && b > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ellipse semi-axes need a > b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            kind: DomainKind::Ellipse { a, b },
            anchor: Complex64::new(0.0, 0.0),
        })
    }

    /// A domain bounded by the trigonometric polynomial `ζ(t) = Σ c_k e^{ikt}`.
    ///
    /// The curve must wind counterclockwise and be star-shaped about `anchor`,
    /// which also rules out self-intersections.
    pub fn smooth(coefficients: Vec<(i32, Complex64)>, anchor: Complex64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("empty boundary parametrization".into()));
        }
        let d = Self {
            kind: DomainKind::Smooth { coefficients },
            anchor,
        };
        d.check_star_shaped()?;
        Ok(d)
    }

    /// Same domain with a different anchor; the anchor must be interior and, for
    /// generic domains, a star center.
    pub fn with_anchor(&self, anchor: Complex64) -> Result<Self> {
        let d = Self {
            kind: self.kind.clone(),
            anchor,
        };
        if !d.contains(anchor) {
            return Err(Error::Geometry(format!("anchor {anchor} is not interior")));
        }
        d.check_star_shaped()?;
        Ok(d)
    }

    fn check_star_shaped(&self) -> Result<()> {
        let h = 2.0 * PI / STAR_SAMPLES as f64;
        for j in 0..STAR_SAMPLES {
            let t = j as f64 * h;
            let r = self.boundary_point(t) - self.anchor;
            let cross = (r.conj() * self.boundary_tangent(t)).im;
            if !(cross > 0.0) {
                return Err(Error::Geometry(format!(
                    "boundary is not a counterclockwise curve star-shaped about {} (t = {t:.4})",
                    self.anchor
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DomainKind::Disk { .. } => "disk",
            DomainKind::Ellipse { .. } => "ellipse",
            DomainKind::Smooth { .. } => "smooth",
        }
    }

    /// `ζ(t)`, `t ∈ [0, 2π)`.
    pub fn boundary_point(&self, t: f64) -> Complex64 {
        match &self.kind {
            DomainKind::Disk { center, radius } => center + Complex64::from_polar(*radius, t),
            DomainKind::Ellipse { a, b } => Complex64::new(a * t.cos(), b * t.sin()),
            DomainKind::Smooth { coefficients } => coefficients
                .iter()
                .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * t))
                .sum(),
        }
    }

    /// `ζ'(t)`.
    pub fn boundary_tangent(&self, t: f64) -> Complex64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => Complex64::new(0.0, *radius) * Complex64::from_polar(1.0, t),
            DomainKind::Ellipse { a, b } => Complex64::new(-a * t.sin(), b * t.cos()),
            DomainKind::Smooth { coefficients } => coefficients
                .iter()
                .map(|&(k, c)| c * Complex64::new(0.0, k as f64) * Complex64::from_polar(1.0, k as f64 * t))
                .sum(),
        }
    }

    /// Radial coordinates `(s, t)` with `z = anchor + s·(ζ(t) − anchor)`.
    pub fn radial_coordinates(&self, z: Complex64) -> (f64, f64) {
        let rel = z - self.anchor;
        if rel.norm() == 0.0 {
            return (0.0, 0.0);
        }
        let t = match &self.kind {
            DomainKind::Disk { center, .. } if *center == self.anchor => rel.arg().rem_euclid(2.0 * PI),
            DomainKind::Ellipse { a, b } if self.anchor.norm() == 0.0 => {
                (a * z.im).atan2(b * z.re).rem_euclid(2.0 * PI)
            }
            _ => self.angle_to_parameter(rel.arg()),
        };
        let s = rel.norm() / (self.boundary_point(t) - self.anchor).norm();
        (s, t)
    }

    /// Inverts the (monotone) polar angle of `ζ(t) − anchor`.
    fn angle_to_parameter(&self, phi: f64) -> f64 {
        const M: usize = 512;
        let h = 2.0 * PI / M as f64;
        let g = |t: f64| wrap_pi((self.boundary_point(t) - self.anchor).arg() - phi);
        let mut lo = 0.0;
        let mut glo = g(0.0);
        let mut bracket = None;
        for j in 1..=M {
            let t = j as f64 * h;
            let gt = g(t);
            if glo <= 0.0 && gt >= 0.0 && (gt - glo).abs() < PI {
                bracket = Some((lo, t));
                break;
            }
            lo = t;
            glo = gt;
        }
        let (mut a, mut b) = bracket.unwrap_or((0.0, h));
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if g(m) <= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        (0.5 * (a + b)).rem_euclid(2.0 * PI)
    }

    /// `true` iff `z` lies in the open domain, boundary points (within
    /// [`GEOM_TOL`]) excluded.
    pub fn contains(&self, z: Complex64) -> bool {
        self.signed_gap(z) > GEOM_TOL
    }

    /// `true` iff `z` lies in the closure (within [`GEOM_TOL`]).
    pub fn contains_closed(&self, z: Complex64) -> bool {
        self.signed_gap(z) >= -GEOM_TOL
    }

    /// Positive inside, negative outside; the radial gap to the boundary.
    fn signed_gap(&self, z: Complex64) -> f64 {
        match &self.kind {
            DomainKind::Disk { center, radius } => radius - (z - center).norm(),
            _ => {
                let (s, t) = self.radial_coordinates(z);
                (1.0 - s) * (self.boundary_point(t) - self.anchor).norm()
            }
        }
    }

    /// Approximate Euclidean distance from `z` to `∂Ω`.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (self.nearest_boundary_point(z) - z).norm()
    }

    /// The point of `∂Ω` closest to `z` (coarse sampling, then golden-section
    /// polish in the parameter).
    pub fn nearest_boundary_point(&self, z: Complex64) -> Complex64 {
        if let DomainKind::Disk { center, radius } = self.kind {
            let d = z - center;
            return if d.norm() == 0.0 {
                center + radius
            } else {
                center + d * (radius / d.norm())
            };
        }
        const M: usize = 1024;
        let h = 2.0 * PI / M as f64;
        let (mut best_t, mut best) = (0.0, f64::INFINITY);
        for j in 0..M {
            let t = j as f64 * h;
            let d = (self.boundary_point(t) - z).norm();
            if d < best {
                best = d;
                best_t = t;
            }
        }
        let (mut a, mut b) = (best_t - h, best_t + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if (self.boundary_point(c) - z).norm() < (self.boundary_point(d) - z).norm() {
                b = d;
            } else {
                a = c;
            }
        }
        let polished = self.boundary_point(0.5 * (a + b));
        if (polished - z).norm() <= best {
            polished
        } else {
            self.boundary_point(best_t)
        }
    }

    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => PI * radius * radius,
            DomainKind::Ellipse { a, b } => PI * a * b,
            DomainKind::Smooth { coefficients } => {
                PI * coefficients.iter().map(|&(k, c)| k as f64 * c.norm_sqr()).sum::<f64>()
            }
        }
    }

    /// `R_Ω ≥ max |ζ|` over the closure.
    pub fn radius_bound(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { center, radius } => center.norm() + radius,
            DomainKind::Ellipse { a, .. } => *a,
            DomainKind::Smooth { .. } => {
                let m = (0..STAR_SAMPLES)
                    .map(|j| self.boundary_point(2.0 * PI * j as f64 / STAR_SAMPLES as f64).norm())
                    .fold(0.0, f64::max);
                m * (1.0 + 1e-6)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            DomainKind::Ellipse { a, .. } => 2.0 * a,
            DomainKind::Smooth { .. } => {
                let pts: Vec<Complex64> = (0..256)
                    .map(|j| self.boundary_point(2.0 * PI * j as f64 / 256.0))
                    .collect();
                let mut d: f64 = 0.0;
                for p in &pts {
                    for q in &pts {
                        d = d.max((p - q).norm());
                    }
                }
                d
            }
        }
    }

    /// Length of `∂Ω`.
    pub fn perimeter(&self) -> f64 {
        const M: usize = 1024;
        (0..M)
            .map(|j| self.boundary_tangent(2.0 * PI * j as f64 / M as f64).norm())
            .sum::<f64>()
            * 2.0
            * PI
            / M as f64
    }

    /// Largest |k| in the boundary parametrization (1 for disk and ellipse).
    pub fn parametrization_degree(&self) -> usize {
        match &self.kind {
            DomainKind::Smooth { coefficients } => {
                coefficients.iter().map(|&(k, _)| k.unsigned_abs() as usize).max().unwrap_or(1)
            }
            _ => 1,
        }
    }

    /// `true` for the shapes whose kernels have closed forms.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.kind, DomainKind::Smooth { .. })
    }

    /// The domain scaled by `1 − ε` about the anchor.
    pub fn shrink(&self, eps: f64) -> Result<DomainSpec> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("shrink factor must lie in (0, 1), got {eps}")));
        }
        let s = 1.0 - eps;
        let p = self.anchor;
        let kind = match &self.kind {
            DomainKind::Disk { center, radius } => DomainKind::Disk {
                center: p + (center - p) * s,
                radius: radius * s,
            },
            DomainKind::Ellipse { a, b } => DomainKind::Ellipse { a: a * s, b: b * s },
            DomainKind::Smooth { coefficients } => DomainKind::Smooth {
                coefficients: coefficients
                    .iter()
                    .map(|&(k, c)| if k == 0 { (0, p + (c - p) * s) } else { (k, c * s) })
                    .chain(std::iter::once((0, p * eps)).filter(|_| {
                        !coefficients.iter().any(|&(k, _)| k == 0)
                    }))
                    .collect(),
            },
        };
        let out = DomainSpec { kind, anchor: p };
        for j in 0..256 {
            let z = out.boundary_point(2.0 * PI * j as f64 / 256.0);
            if !self.contains(z) {
                return Err(Error::Geometry(format!("scaled boundary point {z} leaves the domain")));
            }
        }
        Ok(out)
    }

    /// Exterior harmonic moments `M_k = (1/π)∫_Ω ζ^k dA`, `k = 0..=K`.
    pub fn exterior_moments(&self, k_max: usize) -> Result<Vec<Complex64>> {
        match &self.kind {
            DomainKind::Disk { center, radius } => Ok((0..=k_max)
                .map(|k| radius * radius * center.powu(k as u32))
                .collect()),
            DomainKind::Ellipse { a, b } => Ok(ellipse_exterior_moments(*a, *b, k_max)),
            DomainKind::Smooth { .. } => {
                let deg = self.parametrization_degree();
                let q = AreaQuadrature::new(self, 4, 8 * deg.max(2), 12 + k_max / 2)?;
                (0..=k_max)
                    .map(|k| {
                        let v = integrate_area(|z| z.powu(k as u32), &q, &[], 1e-12)?;
                        Ok(v.value / PI)
                    })
                    .collect()
            }
        }
    }

    /// Interior and exterior moments of the Schwarz function,
    /// `S(z) = Σ_k M_k z^{−(k+1)}`.
    pub fn schwarz_series(&self, k_int: usize, k_ext: usize) -> Result<TwoSidedSeries> {
        if !self.contains(Complex64::new(0.0, 0.0)) {
            return Err(Error::Region(
                "the Schwarz series is expanded at 0, which must lie in the domain".into(),
            ));
        }
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let mut interior = vec![Complex64::new(0.0, 0.0); k_int];
                if k_int > 0 {
                    interior[0] = center.conj();
                }
                Ok(TwoSidedSeries {
                    interior,
                    exterior: self.exterior_moments(k_ext)?,
                    interior_complete: k_int >= 1 || center.norm() == 0.0,
                    exterior_complete: center.norm() == 0.0,
                    radius: *radius,
                })
            }
            DomainKind::Ellipse { a, b } => {
                let mut interior = vec![Complex64::new(0.0, 0.0); k_int];
                if k_int >= 2 {
                    interior[1] = Complex64::new((a - b) / (a + b), 0.0);
                }
                Ok(TwoSidedSeries {
                    interior,
                    exterior: self.exterior_moments(k_ext)?,
                    interior_complete: k_int >= 2,
                    exterior_complete: false,
                    radius: (a * a - b * b).sqrt(),
                })
            }
            DomainKind::Smooth { .. } => {
                let deg = self.parametrization_degree();
                let n = (4 * deg * (k_ext + k_int + 2)).max(1024);
                let n = n + n % 2;
                let q = BoundaryQuadrature::new(self, n)?;
                let two_pi_i = Complex64::new(0.0, 2.0 * PI);
                let moment = |k: i32| -> Complex64 {
                    crate::quadrature::integrate_boundary_unchecked(|z| z.conj() * z.powi(k), &q) / two_pi_i
                };
                let interior = (1..=k_int as i32).map(|m| moment(-m)).collect();
                let exterior = (0..=k_ext as i32).map(moment).collect();
                Ok(TwoSidedSeries {
                    interior,
                    exterior,
                    interior_complete: false,
                    exterior_complete: false,
                    radius: self.radius_bound(),
                })
            }
        }
    }
}

fn wrap_pi(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// `M_{2n} = ab · Catalan(n) · (c²/4)^n`, odd moments vanish.
fn ellipse_exterior_moments(a: f64, b: f64, k_max: usize) -> Vec<Complex64> {
    let q = (a * a - b * b) / 4.0;
    let mut out = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let mut term = a * b; // ab · Cat(n) · q^n
    for n in 0..=(k_max / 2) {
        out[2 * n] = Complex64::new(term, 0.0);
        // Cat(n+1) = Cat(n) · 2(2n+1)/(n+2)
        term *= q * 2.0 * (2 * n + 1) as f64 / (n + 2) as f64;
    }
    out
}

/// Truncated two-sided moment series `Σ_{k=−K_int}^{K_ext} M_k z^{−(k+1)}`.
///
/// `interior[j]` holds `M_{−(j+1)}`, `exterior[k]` holds `M_k`. A `complete`
/// side means every moment beyond the stored range is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedSeries {
    pub interior: Vec<Complex64>,
    pub exterior: Vec<Complex64>,
    pub interior_complete: bool,
    pub exterior_complete: bool,
    /// Radius beyond which the exterior series converges.
    pub radius: f64,
}

impl TwoSidedSeries {
    pub fn k_int(&self) -> usize {
        self.interior.len()
    }

    pub fn k_ext(&self) -> usize {
        self.exterior.len().saturating_sub(1)
    }

    /// `M_k`, or `None` when it lies outside the stored range of an
    /// incomplete side.
    pub fn moment(&self, k: isize) -> Option<Complex64> {
        if k >= 0 {
            match self.exterior.get(k as usize) {
                Some(&m) => Some(m),
                None if self.exterior_complete => Some(Complex64::new(0.0, 0.0)),
                None => None,
            }
        } else {
            match self.interior.get((-k - 1) as usize) {
                Some(&m) => Some(m),
                None if self.interior_complete => Some(Complex64::new(0.0, 0.0)),
                None => None,
            }
        }
    }

    /// The exterior part `S_−` as a tail.
    pub fn s_minus_tail(&self) -> LaurentTail {
        let trunc = if self.exterior_complete {
            Truncation::Exact
        } else {
            Truncation::After(self.exterior.len())
        };
        LaurentTail::with_truncation(self.exterior.clone(), trunc)
    }

    /// Coefficient of `z^m` in `S_+` (that is `M_{−m−1}`).
    pub fn interior_taylor(&self, m: usize) -> Option<Complex64> {
        self.moment(-(m as isize) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wobbly() -> DomainSpec {
        DomainSpec::smooth(vec![(1, c(1.0, 0.0)), (-2, c(0.1, 0.0))], c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn membership_examples() {
        let d = DomainSpec::unit_disk();
        assert!(d.contains(c(0.5, 0.0)));
        assert!(!d.contains(c(2.0, 0.0)));
        assert!(!d.contains(c(1.0, 0.0)));
        assert!(d.contains_closed(c(1.0, 0.0)));
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        assert!(e.contains(c(1.9, 0.0)));
        assert!(!e.contains(c(0.0, 1.01)));
        assert!(!e.contains(c(2.0, 0.0)));
    }

    #[test]
    fn ellipse_rejects_bad_axes() {
        assert!(DomainSpec::ellipse(1.0, 1.0).is_err());
        assert!(DomainSpec::ellipse(1.0, 2.0).is_err());
        assert!(DomainSpec::ellipse(1.0, 0.0).is_err());
    }

    #[test]
    fn smooth_domain_must_be_star_shaped() {
        // clockwise circle
        assert!(DomainSpec::smooth(vec![(-1, c(1.0, 0.0))], c(0.0, 0.0)).is_err());
        // strongly non-convex flower seen from an off-center point
        let petals = vec![(1, c(1.0, 0.0)), (5, c(0.3, 0.0))];
        assert!(DomainSpec::smooth(petals, c(0.0, 0.0)).is_err());
        assert!(wobbly().contains(c(0.3, 0.2)));
    }

    #[test]
    fn radial_coordinates_round_trip() {
        let d = wobbly();
        for &z in &[c(0.3, 0.2), c(-0.5, 0.4), c(0.0, -0.8), c(0.7, 0.0)] {
            let (s, t) = d.radial_coordinates(z);
            let back = d.anchor() + (d.boundary_point(t) - d.anchor()) * s;
            assert!((back - z).norm() < 1e-12, "{z} -> {back}");
        }
        let off = DomainSpec::disk(c(0.0, 0.0), 1.0).unwrap().with_anchor(c(0.3, 0.1)).unwrap();
        let z = c(-0.4, 0.5);
        let (s, t) = off.radial_coordinates(z);
        assert!((off.anchor() + (off.boundary_point(t) - off.anchor()) * s - z).norm() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        let d = DomainSpec::unit_disk();
        let m = d.exterior_moments(4).unwrap();
        assert!((m[0] - 1.0).norm() < 1e-14);
        assert!(m[1..].iter().all(|v| v.norm() < 1e-14));
        let m = DomainSpec::disk(c(0.0, 0.0), 2.0).unwrap().exterior_moments(0).unwrap();
        assert!((m[0] - 4.0).norm() < 1e-14);
        let m = DomainSpec::ellipse(2.0, 1.0).unwrap().exterior_moments(4).unwrap();
        assert!((m[0] - 2.0).norm() < 1e-14);
        assert!(m[1].norm() < 1e-14);
        assert!((m[2] - 1.5).norm() < 1e-14);
    }

    #[test]
    fn smooth_moments_match_trig_polynomial_area() {
        let d = wobbly();
        let m = d.exterior_moments(3).unwrap();
        assert!((m[0].re - d.area() / PI).abs() < 1e-10, "{:?}", m[0]);
        // via the boundary route as an independent computation
        let s = d.schwarz_series(0, 3).unwrap();
        for k in 0..=3 {
            assert!((m[k] - s.exterior[k]).norm() < 1e-10, "k={k}: {} vs {}", m[k], s.exterior[k]);
        }
    }

    #[test]
    fn schwarz_series_examples() {
        let s = DomainSpec::unit_disk().schwarz_series(3, 3).unwrap();
        assert_eq!(s.moment(0), Some(c(1.0, 0.0)));
        assert!((-3..=3).filter(|&k| k != 0).all(|k| s.moment(k).unwrap().norm() == 0.0));
        let s = DomainSpec::ellipse(2.0, 1.0).unwrap().schwarz_series(4, 6).unwrap();
        assert!((s.interior_taylor(1).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        let s = DomainSpec::disk(c(0.0, 0.0), 3.0).unwrap().schwarz_series(2, 2).unwrap();
        assert!((s.moment(0).unwrap() - 9.0).norm() < 1e-14);
        assert!(DomainSpec::disk(c(2.0, 0.0), 1.0).unwrap().schwarz_series(2, 2).is_err());
    }

    #[test]
    fn ellipse_interior_coefficient_matches_boundary_quadrature() {
        // Independent boundary route M_{−2} = (1/2πi)∮ ζ̄ ζ^{−2} dζ.
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let q = BoundaryQuadrature::new(&e, 512).unwrap();
        let v = crate::quadrature::integrate_boundary_unchecked(|z| z.conj() / (z * z), &q)
            / Complex64::new(0.0, 2.0 * PI);
        assert!((v - 1.0 / 3.0).norm() < 1e-12, "{v}");
        let ext = crate::quadrature::integrate_boundary_unchecked(|z| z.conj() * z * z, &q)
            / Complex64::new(0.0, 2.0 * PI);
        assert!((ext - 1.5).norm() < 1e-12);
    }

    #[test]
    fn shrink_examples() {
        let d = DomainSpec::unit_disk().shrink(0.1).unwrap();
        assert_eq!(d.kind(), &DomainKind::Disk { center: c(0.0, 0.0), radius: 0.9 });
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap().shrink(0.05).unwrap();
        match e.kind() {
            DomainKind::Ellipse { a, b } => {
                assert!((a - 1.9).abs() < 1e-15 && (b - 0.95).abs() < 1e-15);
            }
            _ => panic!(),
        }
        assert!(DomainSpec::unit_disk().shrink(1.0).is_err());
        assert!(DomainSpec::unit_disk().shrink(0.0).is_err());
    }

    #[test]
    fn shrink_scales_area_quadratically() {
        for d in [DomainSpec::unit_disk(), DomainSpec::ellipse(2.0, 1.0).unwrap(), wobbly()] {
            for eps in [0.3, 0.01] {
                let s = d.shrink(eps).unwrap();
                let ratio = s.area() / d.area();
                assert!((ratio - (1.0 - eps) * (1.0 - eps)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shrunken_boundary_converges_pointwise() {
        let d = wobbly();
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let s = d.shrink(eps).unwrap();
            let gap = (0..64)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 64.0;
                    (s.boundary_point(t) - d.boundary_point(t)).norm()
                })
                .fold(0.0, f64::max);
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 2e-3);
    }

    #[test]
    fn boundary_distance_on_ellipse() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        assert!((e.boundary_distance(c(0.0, 3.0)) - 2.0).abs() < 1e-9);
        assert!((e.boundary_distance(c(2.5, 0.0)) - 0.5).abs() < 1e-9);
    }
}
