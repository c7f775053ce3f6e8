//! Closed forms of the kernel family on disks and ellipses.
//!
//! Disks reduce to the unit disk: the defining double integral is invariant
//! under `ζ ↦ c + rζ`, so `E` is unchanged while `H`, `G`, `G*` pick up powers
//! of `r`. For the ellipse `x²/a² + y²/b² < 1` with `c² = a² − b²` the Schwarz
//! function is `S(z) = ((a²+b²)z − 2ab·√(z²−c²))/c²`, the branch behaving like
//! `(a−b)/(a+b)·z` at infinity, and `S̃` is the other branch.

use num_complex::Complex64;

/// Shapes with a closed-form kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedShape {
    Disk { center: Complex64, radius: f64 },
    /// `constant` is the numerator of `H = C/Q`.
    Ellipse { a: f64, b: f64, constant: f64 },
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `√(z − c)·√(z + c)`: cut on `[−c, c]`, `~ z` at infinity.
fn sqrt_pair(z: Complex64, c: f64) -> Complex64 {
    (z - c).sqrt() * (z + c).sqrt()
}

impl ClosedShape {
    fn unit(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { center, radius } => (z - center) / radius,
            ClosedShape::Ellipse { .. } => z,
        }
    }

    fn ellipse_parts(a: f64, b: f64) -> (f64, f64, f64) {
        let c2 = a * a - b * b;
        (c2, a * a + b * b, 2.0 * a * b)
    }

    /// Schwarz function on the exterior branch.
    fn schwarz(a: f64, b: f64, z: Complex64) -> Complex64 {
        let (c2, s2, ab2) = Self::ellipse_parts(a, b);
        (z * s2 - sqrt_pair(z, c2.sqrt()) * ab2) / c2
    }

    fn schwarz_other(a: f64, b: f64, z: Complex64) -> Complex64 {
        let (c2, s2, ab2) = Self::ellipse_parts(a, b);
        (z * s2 + sqrt_pair(z, c2.sqrt()) * ab2) / c2
    }

    /// `Q(z, u)` with `H(z, w) = C/Q(z, w̄)`.
    pub fn ellipse_quadratic(a: f64, b: f64, z: Complex64, u: Complex64) -> Complex64 {
        let (c2, s2, _) = Self::ellipse_parts(a, b);
        (z * z + u * u) * c2 - z * u * (2.0 * s2) + 4.0 * a * a * b * b
    }

    /// `H(z, w)` for `z, w ∈ Ω`; the formula is the anti-holomorphic extension
    /// wherever its denominator does not vanish.
    pub fn h(&self, z: Complex64, w: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { radius, .. } => {
                let (u, v) = (self.unit(z), self.unit(w));
                1.0 / ((one() - u * v.conj()) * radius * radius)
            }
            ClosedShape::Ellipse { a, b, constant } => constant / Self::ellipse_quadratic(a, b, z, w.conj()),
        }
    }

    /// `G(z, w) = E(z, w)/(z̄ − w̄)` for `z ∈ Ω`, `w ∉ Ω̄`.
    pub fn g(&self, z: Complex64, w: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { radius, .. } => -1.0 / (self.unit(w).conj() * radius),
            ClosedShape::Ellipse { a, b, constant } => {
                let (c2, _, _) = Self::ellipse_parts(a, b);
                constant / (c2 * (z - Self::schwarz_other(a, b, w).conj()))
            }
        }
    }

    /// `G*(z, w) = −E(z, w)/(z − w)` for `z ∉ Ω̄`, `w ∈ Ω`; equals `conj G(w, z)`.
    pub fn g_star(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.g(w, z).conj()
    }

    /// `F(z, w) = E(z, w)` for `z, w ∉ Ω̄`, holomorphic in `z` off the
    /// interior singular set (the centre for disks, the focal segment for
    /// ellipses).
    pub fn f(&self, z: Complex64, w: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { .. } => one() - 1.0 / (self.unit(z) * self.unit(w).conj()),
            ClosedShape::Ellipse { a, b, constant } => {
                let (c2, _, _) = Self::ellipse_parts(a, b);
                let num = Self::schwarz(a, b, z) - w.conj();
                let den = z - Self::schwarz_other(a, b, w).conj();
                num * constant / (den * c2)
            }
        }
    }

    /// `E(z, w)` given the regions of both points (`true` = interior).
    pub fn e(&self, z: Complex64, w: Complex64, z_in: bool, w_in: bool) -> Complex64 {
        match (z_in, w_in) {
            (false, false) => self.f(z, w),
            (true, false) => self.g(z, w) * (z.conj() - w.conj()),
            (false, true) => self.e(w, z, true, false).conj(),
            (true, true) => self.h(z, w) * (z - w).norm_sqr(),
        }
    }

    /// `S_−`, holomorphic off the interior singular set.
    pub fn s_minus(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { center, radius } => radius * radius / (z - center),
            ClosedShape::Ellipse { a, b, .. } => {
                let c = (a * a - b * b).sqrt();
                2.0 * a * b / (z + sqrt_pair(z, c))
            }
        }
    }

    /// `S_+`, entire for these shapes.
    pub fn s_plus(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { center, .. } => center.conj(),
            ClosedShape::Ellipse { a, b, .. } => z * ((a - b) / (a + b)),
        }
    }

    /// `∂/∂z̄ [1/H(z, z)]`.
    pub fn inverse_diagonal_dbar(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedShape::Disk { center, radius } => -(z - center) / (radius * radius),
            ClosedShape::Ellipse { a, b, constant } => {
                let (c2, s2, _) = Self::ellipse_parts(a, b);
                (z.conj() * (2.0 * c2) - z * (2.0 * s2)) / constant
            }
        }
    }
}
