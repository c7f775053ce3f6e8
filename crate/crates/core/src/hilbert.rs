//! The model space: inner products, norms, Gram matrices and null elements.
//!
//! Every element `μ` is paired through its exterior Cauchy transform. With
//! `Φ_μ(w) = (1/π)∫ H(z, w) dμ(z)`, which is anti-holomorphic in `w ∈ Ω`,
//!
//! ```text
//! ⟨μ, ν⟩ = (1/π)∫ Φ_μ dν̄ = (1/4π²)∮∮ H(z, w) f(z) conj(g(w)) dz dw̄,
//! ```
//!
//! where `f`, `g` are boundary representatives. Point masses pair through
//! kernel values, polynomial densities through Green's formula on `∂Ω`
//! (`g = ∂_z̄ G` gives `∫ H g dA = (1/2i)∮ H G dz`), and germs holomorphic
//! outside a compact subset of `Ω` through contours on the shrunken domains
//! `Ω_ε`, extrapolated to `ε = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::domain::{DomainSpec, TwoSidedSeries};
use crate::error::{Error, Result};
use crate::kernels::{cauchy_boundary, KernelEvaluator};
use crate::laurent::{circle_samples, tail_from_samples, LaurentTail};
use crate::par;
use crate::quadrature::{
    integrate_area, integrate_boundary_spectral, nodes_for_distance, AreaQuadrature, BoundaryQuadrature,
};

/// A function sampled on contours.
pub type BoundaryFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Relative agreement demanded between two contour resolutions.
const CONTOUR_TOL: f64 = 1e-12;

/// Upper bound on contour nodes per variable.
const MAX_CONTOUR_NODES: usize = 1 << 13;

/// Agreement demanded of the outer area rule and its subdivision.
const DENSITY_TOL: f64 = 1e-10;

/// Accuracy target of nested boundary integrals.
const GREEN_TOL: f64 = 1e-13;

/// Shrink factors `ε_1 > … > ε_m` and the degree of the extrapolating
/// polynomial.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
    order: usize,
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>, order: usize) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
            return Err(Error::InvalidArgument(format!(
                "shrink factors must lie in (0, 1/2), got {eps:?}"
            )));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "shrink factors must be strictly decreasing, got {eps:?}"
            )));
        }
        if order >= eps.len() {
            return Err(Error::InvalidArgument(format!(
                "extrapolation order {order} needs more than {} shrink factors",
                eps.len()
            )));
        }
        Ok(Self { eps, order })
    }

    /// Four factors down to `0.005`, cubic extrapolation.
    pub fn fine() -> Self {
        Self {
            eps: vec![0.04, 0.02, 0.01, 0.005],
            order: 3,
        }
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            eps: vec![0.04, 0.02, 0.01],
            order: 2,
        }
    }
}

/// A value extrapolated to `ε = 0` with the samples it came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Extrapolated {
    pub value: Complex64,
    /// Change of the extrapolant when its degree is lowered by one.
    pub residual: f64,
    pub samples: Vec<(f64, Complex64)>,
}

impl Extrapolated {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            residual: 0.0,
            samples: Vec::new(),
        }
    }

    /// `|v_m − v_{m−1}|` over the last two shrink factors.
    pub fn final_difference(&self) -> f64 {
        match self.samples.len() {
            0 | 1 => 0.0,
            m => (self.samples[m - 1].1 - self.samples[m - 2].1).norm(),
        }
    }
}

/// Value at `0` of the polynomial through `points`.
fn neville(points: &[(f64, Complex64)]) -> Complex64 {
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut p: Vec<Complex64> = points.iter().map(|p| p.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * x[i] - p[i] * x[i + m]) / (x[i] - x[i + m]);
        }
    }
    p[0]
}

/// Samples `f(ε)` over the schedule and extrapolates to `ε = 0`.
///
/// Fails when the differences between consecutive samples grow.
pub fn extrapolate<F>(sched: &EpsilonSchedule, f: F) -> Result<Extrapolated>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let samples = sched
        .eps
        .iter()
        .map(|&e| f(e).map(|v| (e, v)))
        .collect::<Result<Vec<_>>>()?;
    let scale = samples.iter().map(|s| s.1.norm()).fold(1.0, f64::max);
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    for (j, w) in diffs.windows(2).enumerate() {
        if w[1] > 2.0 * w[0] && w[1] > 1e-10 * scale {
            return Err(Error::Convergence(format!(
                "difference grows from {:e} to {:e} between ε = {} and ε = {}",
                w[0],
                w[1],
                samples[j + 1].0,
                samples[j + 2].0
            )));
        }
    }
    let m = samples.len();
    let k = sched.order;
    let value = neville(&samples[m - k - 1..]);
    let residual = if k == 0 {
        diffs.last().copied().unwrap_or(0.0)
    } else {
        (value - neville(&samples[m - k..])).norm()
    };
    Ok(Extrapolated {
        value,
        residual,
        samples,
    })
}

/// Distance below which a scaled boundary point's neighbourhood is resolved:
/// the shortest way from the anchor to `∂Ω` times `ε`.
fn contour_gap(d: &DomainSpec, eps: f64) -> f64 {
    eps * d.boundary_distance(d.anchor())
}

fn contour_rule(d: &DomainSpec, eps: f64, n: usize) -> Result<BoundaryQuadrature> {
    BoundaryQuadrature::new(&d.shrink(eps)?, n)
}

/// `(1/2πi)∮_{∂Ω_ε} f dz` extrapolated to `ε = 0`, for integrands
/// holomorphic between the contours and `∂Ω`.
pub fn contour_integral<F>(d: &DomainSpec, sched: &EpsilonSchedule, f: F) -> Result<Extrapolated>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    extrapolate(sched, |eps| {
        let shrunk = d.shrink(eps)?;
        let start = nodes_for_distance(&shrunk, contour_gap(d, eps));
        let ok = |z| match f(z) {
            Ok(v) => v,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        };
        let (v, _) = integrate_boundary_spectral(ok, &shrunk, start, CONTOUR_TOL)?;
        Ok(v / two_pi_i)
    })
}

/// `H(z, w)` for points already known to lie in `Ω`.
fn interior_h(kernel: &KernelEvaluator, z: Complex64, w: Complex64) -> Result<Complex64> {
    match kernel.closed_shape() {
        Some(shape) => Ok(shape.h(z, w)),
        None => kernel.h(z, w),
    }
}

/// Accepts the finer of two contour resolutions when their difference `δ`
/// satisfies `δ² ≤ tol·scale²` (geometric convergence squares the error).
fn resolved(full: Complex64, half: Complex64) -> bool {
    let scale = full.norm().max(1.0);
    (full - half).norm().powi(2) <= CONTOUR_TOL * scale * scale
}

/// Starting node count on `∂Ω_ε`: `H` on the contour is singular at
/// reflections about `2ε·dist(anchor, ∂Ω)` away.
fn contour_nodes(d: &DomainSpec, eps: f64) -> Result<usize> {
    Ok(nodes_for_distance(&d.shrink(eps)?, 2.0 * contour_gap(d, eps)).max(64))
}

/// `(1/4π²)∮∮_{∂Ω_ε} H(z, w) f(z) conj(g(w)) dz dw̄`, doubling the nodes
/// until the rule and its every-other-node subrule agree.
fn double_contour(kernel: &KernelEvaluator, f: &BoundaryFn, g: &BoundaryFn, eps: f64) -> Result<Complex64> {
    let d = kernel.domain();
    let mut n = contour_nodes(d, eps)?;
    loop {
        let q = contour_rule(d, eps, n)?;
        let fz: Vec<Complex64> = q.nodes.iter().zip(&q.d_elements).map(|(z, dz)| f(*z) * dz).collect();
        let rows = par::map_range(n, |j| {
            let w = q.nodes[j];
            let gw = (g(w) * q.d_elements[j]).conj();
            let (mut full, mut half) = (zero(), zero());
            for (i, (z, fv)) in q.nodes.iter().zip(&fz).enumerate() {
                let t = interior_h(kernel, *z, w)? * fv;
                full += t;
                if i % 2 == 0 {
                    half += t;
                }
            }
            Ok::<_, Error>((full * gw, half * gw))
        });
        let (mut full, mut half) = (zero(), zero());
        for (j, r) in rows.into_iter().enumerate() {
            let (a, b) = r?;
            full += a;
            if j % 2 == 0 {
                half += b;
            }
        }
        let (full, half) = (full / (4.0 * PI * PI), half * 4.0 / (4.0 * PI * PI));
        if !(full.re.is_finite() && full.im.is_finite()) {
            return Err(Error::Singular(format!("contour pairing is not finite at ε = {eps}")));
        }
        if resolved(full, half) {
            return Ok(full);
        }
        if n >= MAX_CONTOUR_NODES {
            return Err(Error::Accuracy {
                estimate: full,
                bound: (full - half).norm(),
                tol: CONTOUR_TOL,
            });
        }
        n *= 2;
    }
}

/// `⟨f, g⟩` for germs holomorphic outside a compact subset of every
/// `Ω_ε` in the schedule, sampled on the shrunken boundaries.
pub fn inner_product_o(
    kernel: &KernelEvaluator,
    f: &BoundaryFn,
    g: &BoundaryFn,
    sched: &EpsilonSchedule,
) -> Result<Extrapolated> {
    extrapolate(sched, |eps| double_contour(kernel, f, g, eps))
}

/// `⟨k_a, k_b⟩ = H(a, b)` for `k_a = 1/(z − a)`, `a, b ∈ Ω`.
pub fn inner_product_point_masses(kernel: &KernelEvaluator, a: Complex64, b: Complex64) -> Result<Complex64> {
    kernel.h(a, b)
}

/// `c z^n z̄^k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Monomial {
    pub n: u32,
    pub k: u32,
    pub c: Complex64,
}

impl Monomial {
    pub fn new(n: u32, k: u32, c: Complex64) -> Self {
        Self { n, k, c }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.c * z.powu(self.n) * z.conj().powu(self.k)
    }

    /// `c z^n z̄^{k+1}/(k+1)`, a `∂_z̄`-primitive.
    fn primitive(&self, z: Complex64) -> Complex64 {
        self.c * z.powu(self.n) * z.conj().powu(self.k + 1) / (self.k + 1) as f64
    }
}

/// A representative of an element of the model space: point masses in `Ω`,
/// a polynomial density `g dA`, and a germ at infinity given by its values
/// on and inside `∂Ω` (a tail, or a closed form continued inwards).
#[derive(Clone, Default)]
pub struct HElement {
    masses: Vec<(Complex64, Complex64)>,
    density: Vec<Monomial>,
    germ: Option<BoundaryFn>,
}

impl std::fmt::Debug for HElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HElement")
            .field("masses", &self.masses)
            .field("density", &self.density)
            .field("germ", &self.germ.is_some())
            .finish()
    }
}

impl HElement {
    /// `Σ c_j δ_{a_j}`.
    pub fn point_masses(masses: Vec<(Complex64, Complex64)>) -> Self {
        Self {
            masses,
            ..Self::default()
        }
    }

    /// `k_a = 1/(z − a) = π·C[δ_a]`.
    pub fn kernel_at(a: Complex64) -> Self {
        Self::point_masses(vec![(a, Complex64::new(PI, 0.0))])
    }

    /// `Σ c z^n z̄^k dA`.
    pub fn density(terms: Vec<Monomial>) -> Self {
        Self {
            density: terms,
            ..Self::default()
        }
    }

    /// A germ `f` holomorphic outside a compact subset of `Ω`, evaluated on
    /// contours inside `Ω` by continuation.
    pub fn germ(f: BoundaryFn) -> Self {
        Self {
            germ: Some(f),
            ..Self::default()
        }
    }

    pub fn tail(t: LaurentTail) -> Self {
        Self::germ(Arc::new(move |z| t.eval(z)))
    }

    pub fn plus(mut self, other: HElement) -> Result<Self> {
        self.masses.extend(other.masses);
        self.density.extend(other.density);
        self.germ = match (self.germ, other.germ) {
            (None, g) | (g, None) => g,
            (Some(a), Some(b)) => Some(Arc::new(move |z| a(z) + b(z))),
        };
        Ok(self)
    }

    pub fn masses(&self) -> &[(Complex64, Complex64)] {
        &self.masses
    }

    pub fn density_terms(&self) -> &[Monomial] {
        &self.density
    }

    pub fn has_germ(&self) -> bool {
        self.germ.is_some()
    }

    /// `g(z)` of the density part.
    pub fn density_at(&self, z: Complex64) -> Complex64 {
        self.density.iter().map(|m| m.eval(z)).sum()
    }

    fn primitive_at(&self, z: Complex64) -> Complex64 {
        self.density.iter().map(|m| m.primitive(z)).sum()
    }

    fn validate(&self, d: &DomainSpec) -> Result<()> {
        match self.masses.iter().find(|(a, _)| !d.contains(*a)) {
            Some((a, _)) => Err(Error::Region(format!("point mass at {a} must lie inside the domain"))),
            None => Ok(()),
        }
    }

    /// `C[μ](z) = −(1/π)∫ dμ(ζ)/(ζ − z)` for `z` outside the closed domain.
    pub fn exterior_transform(&self, d: &DomainSpec, z: Complex64) -> Result<Complex64> {
        if d.contains_closed(z) {
            return Err(Error::Region(format!("exterior transform requires {z} outside the closed domain")));
        }
        let mut v: Complex64 = self.masses.iter().map(|(a, c)| c / (PI * (z - a))).sum();
        if !self.density.is_empty() {
            // −(1/π)∫ g/(ζ − z) dA = −(1/2πi)∮ G/(ζ − z) dζ
            let me = self.clone();
            v += cauchy_boundary(move |u| me.primitive_at(u), d, z, GREEN_TOL)?.value;
        }
        if let Some(f) = &self.germ {
            v += f(z);
        }
        Ok(v)
    }

    /// `sqrt((1/π)∫|g|² dA + Σ|c_j|²/π²)`, the scale of the raw data.
    pub fn raw_size(&self, q: &AreaQuadrature) -> f64 {
        let dens = if self.density.is_empty() {
            0.0
        } else {
            q.nodes
                .iter()
                .zip(&q.weights)
                .map(|(z, w)| self.density_at(*z).norm_sqr() * w)
                .sum::<f64>()
                / PI
        };
        let masses: f64 = self.masses.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() / (PI * PI);
        (dens + masses).sqrt()
    }
}

/// Levels `16·2^l` of boundary nodes available to Green integrals.
const GREEN_LEVELS: usize = 15;

/// Boundary nodes and `G dζ` of one density, filled lazily per level.
struct GreenTable {
    levels: Vec<OnceLock<(Vec<Complex64>, Vec<Complex64>)>>,
}

impl GreenTable {
    fn new() -> Self {
        Self {
            levels: (0..GREEN_LEVELS).map(|_| OnceLock::new()).collect(),
        }
    }

    fn level_for(&self, n: usize) -> usize {
        let mut l = 0;
        while l + 1 < GREEN_LEVELS && (16usize << l) < n {
            l += 1;
        }
        l
    }

    fn level(&self, d: &DomainSpec, mu: &HElement, l: usize) -> Result<&(Vec<Complex64>, Vec<Complex64>)> {
        if let Some(v) = self.levels[l].get() {
            return Ok(v);
        }
        let q = BoundaryQuadrature::new(d, 16 << l)?;
        let gdz = q.nodes.iter().zip(&q.d_elements).map(|(z, dz)| mu.primitive_at(*z) * dz).collect();
        Ok(self.levels[l].get_or_init(|| (q.nodes, gdz)))
    }
}

/// Pairings of [`HElement`]s for one kernel and schedule.
pub struct ModelSpace<'a> {
    kernel: &'a KernelEvaluator,
    sched: EpsilonSchedule,
    /// Outer area rule for density pairings and its subdivision.
    outer: [AreaQuadrature; 2],
}

impl<'a> ModelSpace<'a> {
    pub fn new(kernel: &'a KernelEvaluator, sched: EpsilonSchedule) -> Result<Self> {
        let d = kernel.domain();
        let coarse = AreaQuadrature::new(d, 2, 8 * d.parametrization_degree(), 8)?;
        let fine = coarse.subdivided();
        Ok(Self {
            kernel,
            sched,
            outer: [coarse, fine],
        })
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        self.kernel
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.sched
    }

    fn domain(&self) -> &DomainSpec {
        self.kernel.domain()
    }

    /// `(1/π)∫ H(z, w) g(z) dA(z)` for the density part: `(1/2πi)∮_{∂Ω} H G dz`
    /// when `H(·, w)` has a closed form continuing across `∂Ω`, an area
    /// integral otherwise.
    fn phi_density(&self, mu: &HElement, w: Complex64, table: &GreenTable) -> Result<Complex64> {
        let d = self.domain();
        let Some(shape) = self.kernel.closed_shape() else {
            let k = self.kernel;
            let est = integrate_area(
                |z| match k.h(z, w) {
                    Ok(h) => h * mu.density_at(z),
                    Err(_) => Complex64::new(f64::NAN, f64::NAN),
                },
                k.area_rule(),
                &[],
                DENSITY_TOL,
            )?;
            return Ok(est.value / PI);
        };
        let dist = d.boundary_distance(w);
        let mut level = table.level_for(nodes_for_distance(d, 2.0 * dist) / 4);
        loop {
            let (nodes, gdz) = table.level(d, mu, level)?;
            let (mut full, mut half) = (zero(), zero());
            for (j, (z, g)) in nodes.iter().zip(gdz).enumerate() {
                let t = shape.h(*z, w) * g;
                full += t;
                if j % 2 == 0 {
                    half += t;
                }
            }
            half *= 2.0;
            let scale = full.norm().max(1.0);
            let diff = (full - half).norm();
            if diff * diff <= GREEN_TOL * scale * scale {
                return Ok(full / Complex64::new(0.0, 2.0 * PI));
            }
            if level + 1 >= GREEN_LEVELS {
                return Err(Error::Accuracy {
                    estimate: full,
                    bound: diff,
                    tol: GREEN_TOL,
                });
            }
            level += 1;
        }
    }

    /// `Φ_μ(w)` with the germ part integrated over the contour `q`.
    fn phi(
        &self,
        mu: &HElement,
        w: Complex64,
        table: &GreenTable,
        germ_rule: Option<&(BoundaryQuadrature, Vec<Complex64>)>,
    ) -> Result<Complex64> {
        let mut v = zero();
        for (a, c) in &mu.masses {
            v += c * self.kernel.h(*a, w)? / PI;
        }
        if !mu.density.is_empty() {
            v += self.phi_density(mu, w, table)?;
        }
        if let Some((q, fdz)) = germ_rule {
            let mut s = zero();
            for (z, fv) in q.nodes.iter().zip(fdz) {
                s += interior_h(self.kernel, *z, w)? * fv;
            }
            v += s / Complex64::new(0.0, 2.0 * PI);
        }
        Ok(v)
    }

    /// `⟨μ, ν⟩` with germs on `∂Ω_ε` sampled by `n` nodes.
    fn pairing_at(&self, mu: &HElement, nu: &HElement, eps: f64, n: usize) -> Result<Complex64> {
        let d = self.domain();
        let rule = match (&mu.germ, &nu.germ) {
            (None, None) => None,
            _ => Some(contour_rule(d, eps, n)?),
        };
        let mu_rule = match (&mu.germ, &rule) {
            (Some(f), Some(q)) => {
                let fdz: Vec<Complex64> = q.nodes.iter().zip(&q.d_elements).map(|(z, dz)| f(*z) * dz).collect();
                Some((q.clone(), fdz))
            }
            _ => None,
        };
        let table = GreenTable::new();
        let phi = |w: Complex64| self.phi(mu, w, &table, mu_rule.as_ref());
        let mut total = zero();
        for (b, c) in &nu.masses {
            total += c.conj() * phi(*b)? / PI;
        }
        if !nu.density.is_empty() {
            let est = integrate_area(
                |w| match phi(w) {
                    Ok(p) => p * nu.density_at(w).conj(),
                    Err(_) => Complex64::new(f64::NAN, f64::NAN),
                },
                &self.outer[0],
                &[],
                DENSITY_TOL,
            )?;
            total += est.value / PI;
        }
        if let (Some(g), Some(q)) = (&nu.germ, &rule) {
            let s = par::try_sum_range(q.len(), |j| {
                let w = q.nodes[j];
                Ok::<_, Error>(phi(w)?.conj() * g(w) * q.d_elements[j])
            })?;
            total += (s / Complex64::new(0.0, 2.0 * PI)).conj();
        }
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::Singular("pairing is not finite".into()));
        }
        Ok(total)
    }

    fn pairing_eps(&self, mu: &HElement, nu: &HElement, eps: f64) -> Result<Complex64> {
        if mu.germ.is_none() && nu.germ.is_none() {
            return self.pairing_at(mu, nu, eps, 0);
        }
        let mut n = contour_nodes(self.domain(), eps)?;
        let mut half = self.pairing_at(mu, nu, eps, n / 2)?;
        loop {
            let full = self.pairing_at(mu, nu, eps, n)?;
            if resolved(full, half) {
                return Ok(full);
            }
            if n >= MAX_CONTOUR_NODES {
                return Err(Error::Accuracy {
                    estimate: full,
                    bound: (full - half).norm(),
                    tol: CONTOUR_TOL,
                });
            }
            half = full;
            n *= 2;
        }
    }

    /// `Φ_μ` at the nodes of both outer rules.
    fn phi_fields(&self, mu: &HElement) -> Result<[Vec<Complex64>; 2]> {
        let table = GreenTable::new();
        let field = |q: &AreaQuadrature| -> Result<Vec<Complex64>> {
            par::map_slice(&q.nodes, |w| self.phi(mu, *w, &table, None)).into_iter().collect()
        };
        Ok([field(&self.outer[0])?, field(&self.outer[1])?])
    }

    /// `⟨μ, ν⟩` for germ-free elements, `Φ_μ` given on the outer rules.
    fn pair_with_fields(&self, mu: &HElement, fields: Option<&[Vec<Complex64>; 2]>, nu: &HElement) -> Result<Complex64> {
        let mut total = zero();
        let table = GreenTable::new();
        for (b, c) in &nu.masses {
            total += c.conj() * self.phi(mu, *b, &table, None)? / PI;
        }
        if let (false, Some(fields)) = (nu.density.is_empty(), fields) {
            let sum = |q: &AreaQuadrature, phi: &[Complex64]| -> Complex64 {
                q.nodes
                    .iter()
                    .zip(&q.weights)
                    .zip(phi)
                    .map(|((w, wt), p)| p * nu.density_at(*w).conj() * *wt)
                    .sum()
            };
            let coarse = sum(&self.outer[0], &fields[0]);
            let fine = sum(&self.outer[1], &fields[1]);
            let error = (fine - coarse).norm();
            if error > DENSITY_TOL * fine.norm().max(1.0) {
                return Err(Error::Accuracy {
                    estimate: fine / PI,
                    bound: error / PI,
                    tol: DENSITY_TOL,
                });
            }
            total += fine / PI;
        }
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::Singular("pairing is not finite".into()));
        }
        Ok(total)
    }

    /// `⟨μ, ν⟩ = (1/π²)(μ ⊗ ν̄)H`; extrapolated over the schedule when a germ
    /// is involved.
    ///
    /// Densities always act as the source of `Φ`: with `μ = μ_d + μ_r` split
    /// into density and the rest, `⟨μ, ν⟩ = ⟨μ_d, ν⟩ + ⟨μ_r, ν_r⟩ + conj⟨ν_d, μ_r⟩`.
    pub fn inner(&self, mu: &HElement, nu: &HElement) -> Result<Extrapolated> {
        let d = self.domain();
        mu.validate(d)?;
        nu.validate(d)?;
        if mu.germ.is_none() && nu.germ.is_none() {
            let v = combine(mu, nu, |src, dst| {
                let fields = if dst.density.is_empty() { None } else { Some(self.phi_fields(src)?) };
                self.pair_with_fields(src, fields.as_ref(), dst)
            })?;
            return Ok(Extrapolated::exact(v));
        }
        extrapolate(&self.sched, |eps| combine(mu, nu, |src, dst| self.pairing_eps(src, dst, eps)))
    }

    /// `‖μ‖`, with small negative squares clamped to zero.
    pub fn norm(&self, mu: &HElement) -> Result<NormEstimate> {
        let sq = self.inner(mu, mu)?.value;
        Ok(NormEstimate {
            norm: sq.re.max(0.0).sqrt(),
            squared: sq,
            clamped: sq.re < 0.0,
        })
    }

    /// Hermitian matrix `G[i][j] = ⟨μ_j, μ_i⟩`.
    pub fn gram(&self, elements: &[HElement]) -> Result<DMatrix<Complex64>> {
        let n = elements.len();
        let mut g = DMatrix::from_element(n, n, zero());
        let plain = elements.iter().all(|e| e.germ.is_none());
        // Φ of each density part, shared by every entry it enters
        let fields = if plain && elements.iter().any(|e| !e.density.is_empty()) {
            let mut out = Vec::with_capacity(n);
            for e in elements {
                e.validate(self.domain())?;
                let (dens, _) = split(e);
                out.push(dens.map(|m| self.phi_fields(&m)).transpose()?);
            }
            Some(out)
        } else {
            None
        };
        for i in 0..n {
            for j in 0..=i {
                let v = match &fields {
                    Some(fields) => {
                        let field_of = |src: &HElement, idx: usize| if src.density.is_empty() { None } else { fields[idx].as_ref() };
                        let (mu, nu) = (&elements[j], &elements[i]);
                        let (md, mr) = split(mu);
                        let (nd, nr) = split(nu);
                        let mut v = zero();
                        if let Some(md) = &md {
                            v += self.pair_with_fields(md, field_of(md, j), nu)?;
                        }
                        if let (Some(mr), Some(nr)) = (&mr, &nr) {
                            v += self.pair_with_fields(mr, None, nr)?;
                        }
                        if let (Some(nd), Some(mr)) = (&nd, &mr) {
                            v += self.pair_with_fields(nd, field_of(nd, i), mr)?.conj();
                        }
                        v
                    }
                    None => self.inner(&elements[j], &elements[i])?.value,
                };
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
            g[(i, i)].im = 0.0;
        }
        Ok(g)
    }

    /// Both indicators of a null element: the norm, and the largest exterior
    /// transform on `|z| = 2R`.
    pub fn null_test(&self, mu: &HElement, tol: f64) -> Result<NullReport> {
        let d = self.domain();
        let norm = self.norm(mu)?;
        let pts = circle_samples(2.0 * d.radius_bound(), 64);
        let mut sup: f64 = 0.0;
        for z in pts {
            sup = sup.max(mu.exterior_transform(d, z)?.norm());
        }
        let raw = mu.raw_size(self.kernel.area_rule()).max(f64::MIN_POSITIVE);
        let (a, b) = (norm.norm / raw, sup / raw);
        let null = a < tol && b < tol;
        let consistent = !((a < tol && b > 100.0 * tol) || (b < tol && a > 100.0 * tol));
        Ok(NullReport {
            norm: norm.norm,
            exterior_sup: sup,
            raw_size: raw,
            null,
            consistent,
        })
    }
}

/// `(density part, masses and germ)`, each `None` when empty.
fn split(mu: &HElement) -> (Option<HElement>, Option<HElement>) {
    let dens = (!mu.density.is_empty()).then(|| HElement::density(mu.density.clone()));
    let rest = (!mu.masses.is_empty() || mu.germ.is_some()).then(|| HElement {
        masses: mu.masses.clone(),
        density: Vec::new(),
        germ: mu.germ.clone(),
    });
    (dens, rest)
}

/// `⟨μ_d, ν⟩ + ⟨μ_r, ν_r⟩ + conj⟨ν_d, μ_r⟩` from a pairing whose first
/// argument is the source of `Φ`.
fn combine<F>(mu: &HElement, nu: &HElement, pair: F) -> Result<Complex64>
where
    F: Fn(&HElement, &HElement) -> Result<Complex64>,
{
    let (md, mr) = split(mu);
    let (nd, nr) = split(nu);
    let mut v = zero();
    if let Some(md) = &md {
        v += pair(md, nu)?;
    }
    if let (Some(mr), Some(nr)) = (&mr, &nr) {
        v += pair(mr, nr)?;
    }
    if let (Some(nd), Some(mr)) = (&nd, &mr) {
        v += pair(nd, mr)?.conj();
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub squared: Complex64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NullReport {
    pub norm: f64,
    pub exterior_sup: f64,
    pub raw_size: f64,
    pub null: bool,
    /// False when one indicator is small and the other is not.
    pub consistent: bool,
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `S_−` as an element: closed-form continuation inside when available,
/// else the moment tail.
pub fn s_minus_element(kernel: &KernelEvaluator, s: &TwoSidedSeries) -> HElement {
    match kernel.closed_shape() {
        Some(shape) => HElement::germ(Arc::new(move |z| shape.s_minus(z))),
        None => HElement::tail(s.s_minus_tail()),
    }
}

/// `L(·, w) = 1/E(·, w) − 1` for `w` outside the closed domain.
///
/// Closed forms continue `L` inside `Ω`; otherwise the germ is a tail
/// recovered from samples on `|z| = 2R`.
pub fn reproducing_kernel_l(kernel: &KernelEvaluator, w: Complex64, order: usize) -> Result<HElement> {
    let d = kernel.domain();
    if d.contains_closed(w) {
        return Err(Error::Region(format!("L requires w = {w} outside the closed domain")));
    }
    if let Some(shape) = kernel.closed_shape() {
        return Ok(HElement::germ(Arc::new(move |z| 1.0 / shape.f(z, w) - 1.0)));
    }
    let r = 2.0 * d.radius_bound();
    let pts = circle_samples(r, 4 * order);
    let vals = pts
        .iter()
        .map(|z| {
            let e = kernel.e(*z, w)?;
            if e.norm() == 0.0 {
                return Err(Error::Singular(format!("E({z}, {w}) vanishes")));
            }
            Ok(1.0 / e - 1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let (tail, _) = tail_from_samples(&vals, r, order, 1e-8)?;
    Ok(HElement::tail(tail))
}

/// Outcome of measuring `ς` in `⟨f, S_−⟩ = ς·res_∞ f` with `f = S_−`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SignCalibration {
    pub sign: f64,
    pub ratio: Complex64,
    pub norm_squared: Complex64,
}

/// Measures `ς = ⟨S_−, S_−⟩/res_∞ S_−` (with `res_∞ S_− = −M_0`).
pub fn calibrate_sign(space: &ModelSpace<'_>) -> Result<SignCalibration> {
    let d = space.domain();
    let s = d.schwarz_series(2, 2)?;
    let el = s_minus_element(space.kernel(), &s);
    let ip = space.inner(&el, &el)?.value;
    let res = -s.exterior[0];
    let ratio = ip / res;
    let sign = ratio.re.signum();
    if (ratio - sign).norm() > 1e-6 {
        return Err(Error::Convergence(format!(
            "⟨S_-, S_-⟩/res S_- = {ratio} is not a sign"
        )));
    }
    Ok(SignCalibration {
        sign,
        ratio,
        norm_squared: ip,
    })
}

/// `(‖ζ dA‖, ‖ζ̄ζ dA‖)` on the unit disk: multiplication by `z̄` maps a null
/// representative to one of norm `1/2`.
pub fn decomposition_instability_demo(space: &ModelSpace<'_>) -> Result<(f64, f64)> {
    if space.domain() != &DomainSpec::unit_disk() {
        return Err(Error::InvalidArgument("the demonstration runs on the unit disk".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let z = HElement::density(vec![Monomial::new(1, 0, one)]);
    let zz = HElement::density(vec![Monomial::new(1, 1, one)]);
    Ok((space.norm(&z)?.norm, space.norm(&zz)?.norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::new(vec![0.04, 0.02], 1).is_ok());
        assert!(EpsilonSchedule::new(vec![0.02, 0.04], 1).is_err());
        assert!(EpsilonSchedule::new(vec![0.6, 0.02], 1).is_err());
        assert!(EpsilonSchedule::new(vec![0.04], 1).is_err());
    }

    #[test]
    fn neville_recovers_polynomials() {
        let f = |e: f64| c(1.0 + 2.0 * e - 3.0 * e * e, e);
        let pts: Vec<_> = [0.04, 0.02, 0.01].iter().map(|&e| (e, f(e))).collect();
        assert!((neville(&pts) - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn growing_differences_are_rejected() {
        let sched = EpsilonSchedule::default();
        let r = extrapolate(&sched, |e| Ok(c(1.0 / (e * e * e), 0.0)));
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn disk_kernel_pairs() {
        let d = DomainSpec::unit_disk();
        let k = KernelEvaluator::new(&d).unwrap();
        let a = c(0.3, 0.0);
        let f: BoundaryFn = Arc::new(move |z| 1.0 / (z - a));
        let ip = inner_product_o(&k, &f, &f, &EpsilonSchedule::default()).unwrap();
        assert!((ip.value - 1.0 / 0.91).norm() < 1e-10, "{}", ip.value);
        assert!((inner_product_point_masses(&k, c(0.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn disk_modes_are_orthonormal() {
        let d = DomainSpec::unit_disk();
        let k = KernelEvaluator::new(&d).unwrap();
        let s: BoundaryFn = Arc::new(|z| 1.0 / z);
        let s2: BoundaryFn = Arc::new(|z| 1.0 / (z * z));
        let sched = EpsilonSchedule::default();
        assert!((inner_product_o(&k, &s, &s, &sched).unwrap().value - 1.0).norm() < 1e-10);
        assert!(inner_product_o(&k, &s2, &s, &sched).unwrap().value.norm() < 1e-10);
    }

    #[test]
    fn density_norms_on_the_disk() {
        let d = DomainSpec::unit_disk();
        let k = KernelEvaluator::new(&d).unwrap();
        let sp = ModelSpace::new(&k, EpsilonSchedule::default()).unwrap();
        let one = c(1.0, 0.0);
        let (z, zz) = decomposition_instability_demo(&sp).unwrap();
        assert!(z < 1e-7, "{z}");
        assert!((zz - 0.5).abs() < 1e-8, "{zz}");
        let mass = HElement::point_masses(vec![(c(0.2, 0.1), one)]);
        let n = sp.norm(&mass).unwrap().norm;
        assert!((n - k.h(c(0.2, 0.1), c(0.2, 0.1)).unwrap().re.sqrt() / PI).abs() < 1e-14);
    }

    #[test]
    fn point_mass_matches_its_kernel_germ() {
        let d = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let k = KernelEvaluator::new(&d).unwrap();
        let sp = ModelSpace::new(&k, EpsilonSchedule::default()).unwrap();
        let a = c(0.4, -0.2);
        let b = c(-0.7, 0.3);
        let germ = HElement::germ(Arc::new(move |z| 1.0 / (z - a)));
        let direct = sp.inner(&HElement::kernel_at(a), &HElement::kernel_at(b)).unwrap().value;
        let mixed = sp.inner(&germ, &HElement::kernel_at(b)).unwrap().value;
        assert!((direct - k.h(a, b).unwrap()).norm() < 1e-13);
        assert!((mixed - direct).norm() < 1e-10, "{mixed} vs {direct}");
    }

    #[test]
    fn exterior_transform_of_a_null_density() {
        let d = DomainSpec::unit_disk();
        let mu = HElement::density(vec![Monomial::new(1, 0, c(1.0, 0.0))]);
        assert!(mu.exterior_transform(&d, c(2.0, 1.0)).unwrap().norm() < 1e-13);
        let one = HElement::density(vec![Monomial::new(0, 0, c(1.0, 0.0))]);
        let z = c(2.0, 1.0);
        assert!((one.exterior_transform(&d, z).unwrap() - 1.0 / z).norm() < 1e-13);
    }

    #[test]
    fn density_pairings_are_hermitian_in_either_order() {
        let d = DomainSpec::unit_disk();
        let k = KernelEvaluator::new(&d).unwrap();
        let sp = ModelSpace::new(&k, EpsilonSchedule::default()).unwrap();
        let zbar = HElement::density(vec![Monomial::new(0, 1, c(1.0, 0.0))]);
        let near = HElement::kernel_at(c(0.5, 0.6));
        let tail = HElement::tail(LaurentTail::new(vec![c(1.0, 0.0), c(0.3, 0.2)]));
        for other in [near, tail] {
            let a = sp.inner(&other, &zbar).unwrap().value;
            let b = sp.inner(&zbar, &other).unwrap().value;
            assert!((a - b.conj()).norm() < 1e-12, "{a} vs {b}");
        }
        // (1/π)∫ H(a, w) w dA(w) = a/2 on the disk
        let a = sp.inner(&HElement::kernel_at(c(0.5, 0.6)), &zbar).unwrap().value;
        assert!((a - c(0.5, 0.6) * 0.5).norm() < 1e-12, "{a}");
    }
}
