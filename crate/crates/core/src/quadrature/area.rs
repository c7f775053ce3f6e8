//! Area quadrature on radial grids fanned out from the domain anchor.
//!
//! A cell `[s0, s1] × [t0, t1]` in radial coordinates maps to the physical
//! region `anchor + s·(ζ(t) − anchor)`. Disks and ellipses get polar and
//! elliptic grids this way. Cells near declared singular points are split
//! geometrically, and the cells that contain a singular point are cut into
//! four collapsed (Duffy) triangles with apex at the point, which cancels
//! integrable `|ζ − z|^{-1}` singularities.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gauss::gauss_legendre_unit;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::par;

/// Finest refinement level: cells holding a singular point shrink to
/// `diam·2^{−level}`.
pub const MAX_REFINE_DEPTH: usize = 12;

/// Hard cap on splits used to separate singular points from each other.
const MAX_SPLITS: usize = 30;

const GRADE: f64 = 2.0;
const FIRST_ADAPTIVE_DEPTH: usize = 4;
/// Cells closer than this many cell sizes to a singular point get collapsed triangles.
const NEAR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    s0: f64,
    s1: f64,
    t0: f64,
    t1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Rect(Rect),
    /// Triangle with apex `p` and base `a–b`, all in `(s, t)`.
    Duffy { p: (f64, f64), a: (f64, f64), b: (f64, f64) },
}

/// Tensor Gauss–Legendre rule on a set of cells of the radial grid.
///
/// `nodes` lie in the domain and `weights` are positive area weights whose sum
/// is the area of the domain up to rounding.
#[derive(Debug, Clone)]
pub struct AreaQuadrature {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    domain: DomainSpec,
    order: usize,
    pieces: Vec<Piece>,
}

/// Value of an area integral with the difference between two refinement levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub value: Complex64,
    pub error: f64,
}

impl AreaQuadrature {
    /// `ns × nt` cells, each carrying an `order × order` Gauss–Legendre rule.
    pub fn new(d: &DomainSpec, ns: usize, nt: usize, order: usize) -> Result<Self> {
        if ns == 0 || nt == 0 || order == 0 {
            return Err(Error::InvalidArgument(format!(
                "area rule needs positive panel counts and order, got {ns}×{nt}, order {order}"
            )));
        }
        let mut pieces = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            for j in 0..nt {
                pieces.push(Piece::Rect(Rect {
                    s0: i as f64 / ns as f64,
                    s1: (i + 1) as f64 / ns as f64,
                    t0: 2.0 * PI * j as f64 / nt as f64,
                    t1: 2.0 * PI * (j + 1) as f64 / nt as f64,
                }));
            }
        }
        Ok(Self::assemble(d.clone(), order, pieces))
    }

    /// Default rule: 4 radial by `16·deg` angular panels of order 12.
    pub fn default_for(d: &DomainSpec) -> Self {
        let nt = 16 * d.parametrization_degree().max(1);
        Self::new(d, 4, nt, 12).expect("positive sizes")
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn assemble(domain: DomainSpec, order: usize, pieces: Vec<Piece>) -> Self {
        let (x, w) = gauss_legendre_unit(order);
        let mut nodes = Vec::with_capacity(pieces.len() * order * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let anchor = domain.anchor();
        let mut push = |s: f64, t: f64, w_param: f64| {
            let r = domain.boundary_point(t) - anchor;
            let jac = s * (r.conj() * domain.boundary_tangent(t)).im;
            nodes.push(anchor + r * s);
            weights.push(w_param * jac);
        };
        for piece in &pieces {
            match *piece {
                Piece::Rect(c) => {
                    let (ds, dt) = (c.s1 - c.s0, c.t1 - c.t0);
                    for (xi, wi) in x.iter().zip(&w) {
                        for (yj, wj) in x.iter().zip(&w) {
                            push(c.s0 + ds * xi, c.t0 + dt * yj, wi * wj * ds * dt);
                        }
                    }
                }
                Piece::Duffy { p, a, b } => {
                    let det = ((a.0 - p.0) * (b.1 - p.1) - (a.1 - p.1) * (b.0 - p.0)).abs();
                    for (u, wu) in x.iter().zip(&w) {
                        for (v, wv) in x.iter().zip(&w) {
                            let s = p.0 + u * ((a.0 - p.0) + v * (b.0 - a.0));
                            let t = p.1 + u * ((a.1 - p.1) + v * (b.1 - a.1));
                            push(s, t, wu * wv * u * det);
                        }
                    }
                }
            }
        }
        Self {
            nodes,
            weights,
            domain,
            order,
            pieces,
        }
    }

    /// Every rectangular cell split into four.
    pub fn subdivided(&self) -> Self {
        let mut out = Vec::with_capacity(self.pieces.len() * 4);
        for piece in &self.pieces {
            match piece {
                Piece::Rect(c) => out.extend(split(c)),
                Piece::Duffy { .. } => out.push(*piece),
            }
        }
        Self::assemble(self.domain.clone(), self.order, out)
    }

    /// Grades the cells within `radius` of each point towards it and puts
    /// collapsed triangles at the points themselves.
    pub fn refine_near(&self, points: &[Complex64], radius: f64) -> Self {
        self.refine_to_depth(points, radius, MAX_REFINE_DEPTH)
    }

    fn refine_to_depth(&self, points: &[Complex64], radius: f64, level: usize) -> Self {
        let anchor = self.domain.anchor();
        // the polar Jacobian already absorbs singularities at the anchor
        let points: Vec<Complex64> = points
            .iter()
            .copied()
            .filter(|&z| (z - anchor).norm() > 1e-12)
            .collect();
        if points.is_empty() {
            return self.clone();
        }
        let radial: Vec<Option<(f64, f64)>> = points
            .iter()
            .map(|&z| self.domain.contains_closed(z).then(|| self.domain.radial_coordinates(z)))
            .collect();
        let floor = self.domain.diameter() * 0.5f64.powi(level as i32);
        let map = |(s, t): (f64, f64)| anchor + (self.domain.boundary_point(t) - anchor) * s;
        let mut stack: Vec<(Piece, usize)> = self.pieces.iter().rev().map(|&p| (p, 0)).collect();
        let mut out = Vec::new();
        while let Some((piece, depth)) = stack.pop() {
            let Piece::Rect(c) = piece else {
                out.push(piece);
                continue;
            };
            let ext = self.physical_extent(&c);
            let (tol_s, tol_t) = (1e-12 * (c.s1 - c.s0), 1e-12 * (c.t1 - c.t0));
            let mut inside = None;
            let mut corners = Vec::new();
            let mut others = Vec::new();
            for (z, rc) in points.iter().zip(&radial) {
                let held = rc.and_then(|(s, t)| {
                    let t = nearest_branch(t, c.t0, c.t1);
                    let fits = s >= c.s0 - tol_s && s <= c.s1 + tol_s && t >= c.t0 - tol_t && t <= c.t1 + tol_t;
                    fits.then_some((s, t))
                });
                match held {
                    Some((s, t)) => {
                        let on_s = (s - c.s0).abs() <= tol_s || (s - c.s1).abs() <= tol_s;
                        let on_t = (t - c.t0).abs() <= tol_t || (t - c.t1).abs() <= tol_t;
                        if on_s && on_t {
                            corners.push((snap(s, c.s0, c.s1, tol_s), snap(t, c.t0, c.t1, tol_t)));
                        } else if inside.is_none() {
                            inside = Some((s.clamp(c.s0, c.s1), t.clamp(c.t0, c.t1)));
                        }
                    }
                    None => others.push(((z - ext.center).norm() - ext.size).max(0.0)),
                }
            }
            if let Some((s, t)) = inside {
                // make the point a corner of every cell around it
                for child in split_at(&c, s, t).into_iter().rev() {
                    stack.push((child, depth));
                }
                continue;
            }
            let can_split = depth < MAX_SPLITS;
            if let Some(&p) = corners.first() {
                let isolated = corners.len() == 1 && others.iter().all(|&d| d >= GRADE * ext.size);
                let shapely = ext.radial_len <= 2.0 * ext.angular_len && ext.angular_len <= 2.0 * ext.radial_len;
                if (isolated && shapely && ext.size <= floor) || !can_split {
                    push_duffy(&mut out, &c, p);
                } else {
                    for child in split_mid(&c, &ext).into_iter().rev() {
                        stack.push((child, depth + 1));
                    }
                }
                continue;
            }
            let near = others.iter().any(|&d| d < radius && d < GRADE * ext.size);
            if near && can_split {
                for child in split_mid(&c, &ext).into_iter().rev() {
                    stack.push((child, depth + 1));
                }
                continue;
            }
            // at the depth cap: collapse towards a singular point next to the cell
            let apex = points
                .iter()
                .zip(&radial)
                .filter_map(|(&z, rc)| {
                    let (s, t) = rc.unwrap_or_else(|| self.domain.radial_coordinates(z));
                    let t = nearest_branch(t, c.t0, c.t1);
                    let p = (s.clamp(c.s0, c.s1), t.clamp(c.t0, c.t1));
                    let d = (map(p) - z).norm();
                    (d < NEAR * ext.size).then_some((d, p))
                })
                .min_by(|x, y| x.0.total_cmp(&y.0));
            match apex {
                Some((_, p)) => push_duffy(&mut out, &c, p),
                None => out.push(piece),
            }
        }
        Self::assemble(self.domain.clone(), self.order, out)
    }

    fn physical_extent(&self, c: &Rect) -> Extent {
        let anchor = self.domain.anchor();
        let map = |s: f64, t: f64| anchor + (self.domain.boundary_point(t) - anchor) * s;
        let tm = 0.5 * (c.t0 + c.t1);
        let sm = 0.5 * (c.s0 + c.s1);
        let center = map(sm, tm);
        let size = [
            (c.s0, c.t0),
            (c.s1, c.t0),
            (c.s0, c.t1),
            (c.s1, c.t1),
            (c.s0, tm),
            (c.s1, tm),
            (sm, c.t0),
            (sm, c.t1),
        ]
        .iter()
        .map(|&(s, t)| (map(s, t) - center).norm())
        .fold(0.0, f64::max);
        let radial_len = (map(c.s1, tm) - map(c.s0, tm)).norm();
        let angular_len = (map(sm, c.t1) - map(sm, tm)).norm() + (map(sm, tm) - map(sm, c.t0)).norm();
        Extent {
            center,
            size,
            radial_len,
            angular_len,
        }
    }
}

struct Extent {
    center: Complex64,
    size: f64,
    radial_len: f64,
    angular_len: f64,
}

fn nearest_branch(t: f64, t0: f64, t1: f64) -> f64 {
    [t - 2.0 * PI, t, t + 2.0 * PI]
        .into_iter()
        .min_by(|x, y| gap(*x, t0, t1).total_cmp(&gap(*y, t0, t1)))
        .unwrap_or(t)
}

fn snap(x: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if (x - lo).abs() <= tol {
        lo
    } else if (x - hi).abs() <= tol {
        hi
    } else {
        x
    }
}

fn push_duffy(out: &mut Vec<Piece>, c: &Rect, p: (f64, f64)) {
    let corners = [(c.s0, c.t0), (c.s1, c.t0), (c.s1, c.t1), (c.s0, c.t1)];
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let det = ((a.0 - p.0) * (b.1 - p.1) - (a.1 - p.1) * (b.0 - p.0)).abs();
        if det > 1e-14 * (c.s1 - c.s0) * (c.t1 - c.t0) {
            out.push(Piece::Duffy { p, a, b });
        }
    }
}

/// Splits through `(s, t)`, dropping children of zero width.
fn split_at(c: &Rect, s: f64, t: f64) -> Vec<Piece> {
    let mut out = Vec::with_capacity(4);
    for (s0, s1) in [(c.s0, s), (s, c.s1)] {
        for (t0, t1) in [(c.t0, t), (t, c.t1)] {
            if s1 - s0 > 1e-13 * (c.s1 - c.s0) && t1 - t0 > 1e-13 * (c.t1 - c.t0) {
                out.push(Piece::Rect(Rect { s0, s1, t0, t1 }));
            }
        }
    }
    out
}

/// Midpoint split along the physically longer direction, or both when the
/// cell is roughly square.
fn split_mid(c: &Rect, ext: &Extent) -> Vec<Piece> {
    let sm = 0.5 * (c.s0 + c.s1);
    let tm = 0.5 * (c.t0 + c.t1);
    if ext.radial_len > 2.0 * ext.angular_len {
        vec![
            Piece::Rect(Rect { s1: sm, ..*c }),
            Piece::Rect(Rect { s0: sm, ..*c }),
        ]
    } else if ext.angular_len > 2.0 * ext.radial_len {
        vec![
            Piece::Rect(Rect { t1: tm, ..*c }),
            Piece::Rect(Rect { t0: tm, ..*c }),
        ]
    } else {
        split(c).to_vec()
    }
}

fn split(c: &Rect) -> [Piece; 4] {
    let sm = 0.5 * (c.s0 + c.s1);
    let tm = 0.5 * (c.t0 + c.t1);
    [
        Piece::Rect(Rect { s0: c.s0, s1: sm, t0: c.t0, t1: tm }),
        Piece::Rect(Rect { s0: sm, s1: c.s1, t0: c.t0, t1: tm }),
        Piece::Rect(Rect { s0: c.s0, s1: sm, t0: tm, t1: c.t1 }),
        Piece::Rect(Rect { s0: sm, s1: c.s1, t0: tm, t1: c.t1 }),
    ]
}

fn gap(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

/// `Σ_j f(node_j)·w_j` without refinement.
pub fn apply_area<F>(f: F, q: &AreaQuadrature) -> Complex64
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    par::sum_range(q.len(), |j| f(q.nodes[j]) * q.weights[j])
}

/// Integrates `f` over the domain of `q`, refining around the declared
/// singular points until two successive levels agree to
/// `tol · max(1, |value|)`.
pub fn integrate_area<F>(f: F, q: &AreaQuadrature, singular: &[Complex64], tol: f64) -> Result<AreaEstimate>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    let check = |q: &AreaQuadrature| -> Result<Complex64> {
        par::try_sum_range(q.len(), |j| {
            let v = f(q.nodes[j]);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v * q.weights[j])
            } else {
                Err(Error::NonFinite {
                    index: j,
                    node: q.nodes[j],
                })
            }
        })
    };
    if singular.is_empty() {
        let coarse = check(q)?;
        let fine = check(&q.subdivided())?;
        let error = (fine - coarse).norm();
        return if error <= tol * fine.norm().max(1.0) {
            Ok(AreaEstimate { value: fine, error })
        } else {
            Err(Error::Accuracy {
                estimate: fine,
                bound: error,
                tol,
            })
        };
    }
    let radius = q.domain().diameter();
    let mut depth = FIRST_ADAPTIVE_DEPTH;
    let mut prev = check(&q.refine_to_depth(singular, radius, depth))?;
    let mut error = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    while depth < MAX_REFINE_DEPTH {
        depth = (depth + 2).min(MAX_REFINE_DEPTH);
        let cur = check(&q.refine_to_depth(singular, radius, depth))?;
        let step = (cur - prev).norm();
        // geometric convergence: the remaining error is about step·(step/last_step)
        error = if step < last_step { step * (step / last_step).max(0.1) } else { step };
        last_step = step;
        prev = cur;
        if error <= tol * cur.norm().max(1.0) {
            return Ok(AreaEstimate { value: cur, error });
        }
    }
    Err(Error::Accuracy {
        estimate: prev,
        bound: error,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `∫_D |ζ − a|^{-1} dA = ∫_0^{2π} √(1 − a² sin²θ) dθ` for `0 ≤ a < 1`, by
    /// integrating in polar coordinates centred at `a`.
    fn inverse_distance_reference(a: f64) -> f64 {
        let n = 4096;
        (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                (1.0 - a * a * th.sin().powi(2)).sqrt()
            })
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    #[test]
    fn unit_disk_area() {
        let q = AreaQuadrature::default_for(&DomainSpec::unit_disk());
        let v = integrate_area(|_| c(1.0, 0.0), &q, &[], 1e-10).unwrap();
        assert!((v.value.re - PI).abs() < 1e-10 && v.error < 1e-10);
    }

    #[test]
    fn ellipse_second_moment() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let q = AreaQuadrature::default_for(&e);
        let v = integrate_area(|z| z * z, &q, &[], 1e-12).unwrap();
        assert!((v.value - 1.5 * PI).norm() < 1e-10, "{}", v.value);
    }

    #[test]
    fn weights_positive_and_conserved() {
        let d = DomainSpec::unit_disk();
        let q = AreaQuadrature::default_for(&d);
        for r in [q.refine_near(&[c(0.0, 0.0)], 1.0), q.refine_near(&[c(0.9, 0.0), c(-0.3, 0.4)], 0.5)] {
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.total_weight() - PI).abs() < 1e-12);
            assert!(r.len() > q.len() || r.len() == q.len());
        }
    }

    #[test]
    fn empty_point_list_is_identity() {
        let q = AreaQuadrature::default_for(&DomainSpec::unit_disk());
        let r = q.refine_near(&[], 1.0);
        assert_eq!(q.nodes, r.nodes);
        assert_eq!(q.weights, r.weights);
    }

    #[test]
    fn inverse_distance_singularity() {
        let q = AreaQuadrature::default_for(&DomainSpec::unit_disk());
        let z0 = c(0.9, 0.0);
        let v = integrate_area(|z| c(1.0 / (z - z0).norm(), 0.0), &q, &[z0], 1e-9).unwrap();
        let reference = inverse_distance_reference(0.9);
        assert!((v.value.re - reference).abs() < 1e-6, "{} vs {reference}", v.value.re);
    }

    #[test]
    fn cauchy_kernel_on_ellipse_interior() {
        // (1/π)∫ dA/(z − ζ) = z̄ − S_+(z) inside; for the 2×1 ellipse S_+(z) = z/3.
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let q = AreaQuadrature::default_for(&e);
        let z = c(0.7, -0.3);
        let v = integrate_area(|w| 1.0 / (z - w), &q, &[z], 1e-10).unwrap().value / PI;
        assert!((v - (z.conj() - z / 3.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn smooth_domain_area_matches_coefficients() {
        let d = DomainSpec::smooth(vec![(1, c(1.0, 0.0)), (-2, c(0.1, 0.05))], c(0.0, 0.0)).unwrap();
        let q = AreaQuadrature::default_for(&d);
        assert!((q.total_weight() - d.area()).abs() < 1e-12);
    }

    #[test]
    fn unreachable_tolerance_reports_best_estimate() {
        let q = AreaQuadrature::new(&DomainSpec::unit_disk(), 1, 2, 2).unwrap();
        let err = integrate_area(|z| (z * 7.0).exp(), &q, &[], 1e-14).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }
}
