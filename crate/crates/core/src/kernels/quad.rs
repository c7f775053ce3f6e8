//! The exponential transform by direct quadrature, for any admissible domain.
//!
//! With `w ∉ Ω̄`, `1/(ζ̄ − w̄) = ∂_ζ̄ Λ(ζ)` for `Λ(ζ) = conj Log((ζ − w)/(p − w))`,
//! `p` the anchor. The principal logarithm is single valued on `Ω̄` because
//! the cut ray from `w` points away from the star centre `p`. Green's formula
//! then turns the double integral into
//!
//! `I(z, w) = (1/π)[(1/2i)∮ Λ(ζ) dζ/(ζ − z) − π Λ(z)·[z ∈ Ω]]`,
//!
//! and `E = exp(−I)`. For two interior points `log|ζ − w|²` plays the role of
//! `Λ`; it is single valued, and the point term at `w` cancels against the
//! factor `|z − w|²`, so `H = exp(−(1/2πi)∮ log|ζ − w|² dζ/(ζ − z))` with no
//! diagonal singularity.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::domain::DomainSpec;
use crate::error::Result;
use crate::quadrature::{integrate_area, integrate_boundary_adaptive, nodes_for_distance, AreaQuadrature};

/// `I(z, w)` for `w` outside the closed domain.
pub(crate) fn log_e_exterior_w(d: &DomainSpec, z: Complex64, z_in: bool, w: Complex64, tol: f64) -> Result<Complex64> {
    let p = d.anchor();
    let lambda = |zeta: Complex64| ((zeta - w) / (p - w)).ln().conj();
    let foot = d.nearest_boundary_point(z);
    let dist = (foot - z).norm().min(d.boundary_distance(w));
    let start = nodes_for_distance(d, dist);
    let l_foot = lambda(foot);
    let (contour, _) = integrate_boundary_adaptive(|zeta| (lambda(zeta) - l_foot) / (zeta - z), d, start, tol)?;
    // ∮ dζ/(ζ − z) = 2πi inside, 0 outside
    let mut v = contour / Complex64::new(0.0, 2.0);
    if z_in {
        v += (l_foot - lambda(z)) * PI;
    }
    Ok(v / PI)
}

/// `(1/2πi)∮ log|ζ − w|² dζ/(ζ − z)` for `z, w ∈ Ω`, so that `H = exp(−J)`.
pub(crate) fn log_h_interior(d: &DomainSpec, z: Complex64, w: Complex64, tol: f64) -> Result<Complex64> {
    let phi = |zeta: Complex64| Complex64::new((zeta - w).norm_sqr().ln(), 0.0);
    let foot = d.nearest_boundary_point(z);
    let dist = (foot - z).norm().min(d.boundary_distance(w));
    let start = nodes_for_distance(d, dist);
    let p_foot = phi(foot);
    let (contour, _) = integrate_boundary_adaptive(|zeta| (phi(zeta) - p_foot) / (zeta - z), d, start, tol)?;
    Ok(contour / Complex64::new(0.0, 2.0 * PI) + p_foot)
}

/// `(1/π)∫_Ω ρ dA/((ζ − z)(ζ̄ − w̄))` by area quadrature.
pub(crate) fn log_e_area<R>(q: &AreaQuadrature, z: Complex64, w: Complex64, rho: R, tol: f64) -> Result<Complex64>
where
    R: Fn(Complex64) -> f64 + Sync + Send,
{
    let d = q.domain();
    let singular: Vec<Complex64> = [z, w].into_iter().filter(|&p| d.contains_closed(p)).collect();
    let est = integrate_area(
        |zeta| rho(zeta) / ((zeta - z) * (zeta - w).conj()),
        q,
        &singular,
        tol,
    )?;
    Ok(est.value / PI)
}

/// `E(z, w)` by quadrature.
pub(crate) fn exp_transform(d: &DomainSpec, z: Complex64, w: Complex64, regions: (bool, bool), tol: f64) -> Result<Complex64> {
    let i = match regions {
        (z_in, false) => log_e_exterior_w(d, z, z_in, w, tol)?,
        (false, true) => log_e_exterior_w(d, w, true, z, tol)?.conj(),
        (true, true) => return Ok((-log_h_interior(d, z, w, tol)?).exp() * (z - w).norm_sqr()),
    };
    Ok((-i).exp())
}
