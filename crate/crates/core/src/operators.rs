//! The model operators `Z`, `Z*`, their resolvents and commutator.
//!
//! On tails `f = Σ a_k z^{−(k+1)}`, `Z f = (z f)_−` is the shift
//! `b_k = a_{k+1}` and `Z* f = (S f)_−` convolves with the moments. On
//! functions given on `∂Ω` both are Cauchy integrals:
//! `Z f(z) = −(1/2πi)∮ ζ f(ζ) dζ/(ζ − z)` and the same with `ζ̄` for `Z*`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::domain::{DomainSpec, TwoSidedSeries};
use crate::error::{Error, Result};
use crate::hilbert::{s_minus_element, HElement, ModelSpace};
use crate::kernels::{cauchy_boundary, BoundaryCauchy, KernelEvaluator, Side};
use crate::laurent::{convolve_schwarz_minus, LaurentTail, Truncation};
use crate::par;

/// `Z f = (z f)_−`.
pub fn op_z(f: &LaurentTail) -> LaurentTail {
    f.multiply_by_z_minus().0
}

/// Longest output of [`op_z_star`] whose coefficients are all available.
pub fn natural_order(f: &LaurentTail, s: &TwoSidedSeries) -> usize {
    if s.exterior_complete {
        f.len() + s.k_ext() + 1
    } else {
        s.k_ext() + 1
    }
}

/// `Z* f = (S f)_−` to `n_out` coefficients.
pub fn op_z_star(f: &LaurentTail, s: &TwoSidedSeries, n_out: usize) -> Result<LaurentTail> {
    convolve_schwarz_minus(s, f, n_out)
}

fn expect_exterior(d: &DomainSpec, z: Complex64, what: &str) -> Result<()> {
    if d.contains_closed(z) {
        Err(Error::Region(format!("{what} requires {z} outside the closed domain")))
    } else {
        Ok(())
    }
}

/// `Z f(z)` for `f` given on `∂Ω` (extended by zero inside).
pub fn op_z_boundary<F>(f: F, d: &DomainSpec, z: Complex64, tol: f64) -> Result<BoundaryCauchy>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    expect_exterior(d, z, "Z")?;
    cauchy_boundary(|u| u * f(u), d, z, tol)
}

/// `Z* f(z)` for `f` given on `∂Ω`.
pub fn op_z_star_boundary<F>(f: F, d: &DomainSpec, z: Complex64, tol: f64) -> Result<BoundaryCauchy>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    expect_exterior(d, z, "Z*")?;
    cauchy_boundary(|u| u.conj() * f(u), d, z, tol)
}

/// `(Z − a)^{−1} f = (f(z) − f(a))/(z − a)` as a tail: `b_k = −Σ_{j≥k} a_j a^{k−j−1}`,
/// no longer than `f`.
pub fn resolvent_z_tail(f: &LaurentTail, a: Complex64) -> LaurentTail {
    let n = f.len();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        acc = (acc - f.coefficient(k)) / a;
        b[k] = acc;
    }
    LaurentTail::with_truncation(b, f.truncation())
}

/// `(Z − a)^{−1} f` at `z`, both outside the closed domain; at `z = a`
/// the confluent value `f′(a)`.
pub fn resolvent_z(f: &LaurentTail, d: &DomainSpec, a: Complex64, z: Complex64) -> Result<Complex64> {
    if d.contains_closed(a) {
        return Err(Error::Region(format!(
            "the difference quotient needs a = {a} outside the closed domain; use the boundary form"
        )));
    }
    expect_exterior(d, z, "the resolvent of Z")?;
    if z == a {
        return Ok(f.derivative().eval(a));
    }
    Ok((f.eval(z) - f.eval(a)) / (z - a))
}

/// `−(1/2πi)∮ f(ζ) dζ/((ζ − z)(ζ − a))` for `z` outside and any `a` off `∂Ω`.
pub fn resolvent_z_boundary<F>(f: F, d: &DomainSpec, a: Complex64, z: Complex64, tol: f64) -> Result<BoundaryCauchy>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    expect_exterior(d, z, "the resolvent of Z")?;
    if d.contains_closed(a) && !d.contains(a) {
        return Err(Error::Region(format!("a = {a} lies on the boundary")));
    }
    cauchy_boundary(|u| f(u) / (u - a), d, z, tol)
}

/// `(Z* − ā)^{−1} f` at `z`, both `z` and `a` outside the closed domain.
///
/// `(Z* − ā) g = (ζ̄ g)_− − ā g` is a Toeplitz equation with symbol `ζ̄ − ā`,
/// which has winding number zero on `∂Ω`. Splitting `L = log(ζ̄ − ā) = L_+ + L_−`
/// into interior and exterior parts gives `g = e^{−L_−} (e^{−L_+} f)_−`.
/// The plain Cauchy integral of `f/(ζ̄ − ā)` agrees with this only when
/// `ζ̄ − ā` continued outward has no exterior zero, as on a disk.
pub fn resolvent_z_star<F>(f: F, d: &DomainSpec, a: Complex64, z: Complex64, tol: f64) -> Result<BoundaryCauchy>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    Ok(resolvent_z_star_many(f, d, a, &[z], tol)?.remove(0))
}

/// [`resolvent_z_star`] at several points, sharing the factorization.
pub fn resolvent_z_star_many<F>(f: F, d: &DomainSpec, a: Complex64, zs: &[Complex64], tol: f64) -> Result<Vec<BoundaryCauchy>>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    for &z in zs {
        expect_exterior(d, z, "the resolvent of Z*")?;
    }
    expect_exterior(d, a, "the resolvent of Z*")?;
    let mut n = 128;
    let mut prev = SymbolFactor::new(d, a, n)?.apply(&f, zs);
    loop {
        n *= 2;
        let next = SymbolFactor::new(d, a, n)?.apply(&f, zs);
        let errs: Vec<f64> = next.iter().zip(&prev).map(|(x, y)| (x - y).norm()).collect();
        let worst = next.iter().zip(&errs).position(|(v, e)| *e > tol * v.norm().max(1.0));
        match worst {
            None => {
                return Ok(next
                    .into_iter()
                    .zip(errs)
                    .map(|(value, error)| BoundaryCauchy {
                        side: Side::Exterior,
                        value,
                        error,
                        near_boundary: false,
                    })
                    .collect())
            }
            Some(i) if n >= 8192 => {
                return Err(Error::Accuracy {
                    estimate: next[i],
                    bound: errs[i],
                    tol,
                })
            }
            Some(_) => prev = next,
        }
    }
}

/// Trapezoid data for the factorization of `ζ̄ − ā` on `n` nodes.
struct SymbolFactor {
    zeta: Vec<Complex64>,
    dzeta: Vec<Complex64>,
    w: Vec<Complex64>,
    log_w: Vec<Complex64>,
    /// Boundary values of `L_−`.
    l_minus: Vec<Complex64>,
    scale: Complex64,
}

impl SymbolFactor {
    fn new(d: &DomainSpec, a: Complex64, n: usize) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        let h = two_pi / n as f64;
        let zeta: Vec<Complex64> = (0..n).map(|j| d.boundary_point(j as f64 * h)).collect();
        let dzeta: Vec<Complex64> = (0..n).map(|j| d.boundary_tangent(j as f64 * h)).collect();
        let w: Vec<Complex64> = zeta.iter().map(|u| u.conj() - a.conj()).collect();
        // continuous branch of log(ζ̄ − ā) along the curve
        let mut log_w = Vec::with_capacity(n);
        let mut arg = w[0].arg();
        for (j, wj) in w.iter().enumerate() {
            if j > 0 {
                arg += (wj / w[j - 1]).arg();
            }
            log_w.push(Complex64::new(wj.norm().ln(), arg));
        }
        let winding = (arg + (w[0] / w[n - 1]).arg() - w[0].arg()) / two_pi;
        if winding.abs() > 0.5 {
            return Err(Error::Region(format!("ζ̄ − ā winds {winding:.0} times; a = {a} is not exterior")));
        }
        let scale = Complex64::new(0.0, h / two_pi);
        // −(1/2πi)∮ (L(ζ) − L(ζ_j)) dζ/(ζ − ζ_j), diagonal term L′(t_j)
        let l_minus = par::map_range(n, |j| {
            let mut acc = dzeta[j].conj() / w[j];
            for k in (0..n).filter(|&k| k != j) {
                acc += (log_w[k] - log_w[j]) * dzeta[k] / (zeta[k] - zeta[j]);
            }
            acc * scale
        });
        Ok(SymbolFactor {
            zeta,
            dzeta,
            w,
            log_w,
            l_minus,
            scale,
        })
    }

    fn apply<F>(&self, f: &F, zs: &[Complex64]) -> Vec<Complex64>
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let weighted: Vec<Complex64> = (0..self.zeta.len())
            .map(|k| f(self.zeta[k]) * self.l_minus[k].exp() / self.w[k] * self.dzeta[k])
            .collect();
        par::map_slice(zs, |&z| {
            let mut l_minus_z = Complex64::new(0.0, 0.0);
            let mut inner = Complex64::new(0.0, 0.0);
            for k in 0..self.zeta.len() {
                let r = 1.0 / (self.zeta[k] - z);
                l_minus_z += self.log_w[k] * self.dzeta[k] * r;
                inner += weighted[k] * r;
            }
            (-l_minus_z * self.scale).exp() * inner * self.scale
        })
    }
}

/// `Z*Z f − Z Z* f`, on the coefficients both compositions determine.
pub fn commutator_apply(f: &LaurentTail, s: &TwoSidedSeries) -> Result<LaurentTail> {
    let zf = op_z(f);
    let a = op_z_star(&zf, s, natural_order(&zf, s))?;
    let b = op_z(&op_z_star(f, s, natural_order(f, s))?);
    let n = a.len().min(b.len());
    let exact = a.is_exact() && b.is_exact();
    let diff = a.truncate(n).sub(&b.truncate(n));
    let truncation = if exact { Truncation::Exact } else { Truncation::After(n) };
    Ok(LaurentTail::with_truncation(diff.coefficients().to_vec(), truncation))
}

/// `⟨f, S_−⟩ · S_−`, with the inner product computed in the model space;
/// returns the image and the inner product.
pub fn rank_one_projection(f: &LaurentTail, space: &ModelSpace<'_>, s: &TwoSidedSeries) -> Result<(LaurentTail, Complex64)> {
    let ip = space.inner(&HElement::tail(f.clone()), &s_minus_element(space.kernel(), s))?.value;
    Ok((s.s_minus_tail().scale(ip), ip))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Z,
    ZStar,
    Commutator,
}

/// An `N × N` section in the basis `z^{−(k+1)}`: column `j` holds the image
/// of `z^{−(j+1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, f: &LaurentTail) -> LaurentTail {
        let n = self.size();
        let x = nalgebra::DVector::from_iterator(n, (0..n).map(|k| f.coefficient(k)));
        LaurentTail::with_truncation((&self.entries * x).iter().copied().collect(), Truncation::After(n))
    }

    /// Euclidean singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        descending(self.entries.clone().singular_values().iter().copied().collect())
    }

    /// Singular values with the coefficient space carrying the Gram matrix
    /// `gram[(k, j)] = ⟨z^{−(j+1)}, z^{−(k+1)}⟩`: with `gram = L L*` these are
    /// the singular values of `L* A L^{−*}`.
    pub fn singular_values_in(&self, gram: &DMatrix<Complex64>) -> Result<Vec<f64>> {
        let n = self.size();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "Gram matrix of size {} for a section of size {n}",
                gram.nrows()
            )));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("Gram matrix is not positive definite".into()))?;
        let l = chol.l();
        let lh = l.adjoint();
        let lh_inv = lh
            .clone()
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::Singular("Gram factor is singular".into()))?;
        let b = &lh * &self.entries * lh_inv;
        Ok(descending(b.singular_values().iter().copied().collect()))
    }
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn column(t: &LaurentTail, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| t.coefficient(k)).collect()
}

/// The `N × N` section of `Z`, `Z*` or the commutator.
pub fn matrix_truncation(kind: OperatorKind, s: &TwoSidedSeries, n: usize) -> Result<OperatorMatrix> {
    let one = Complex64::new(1.0, 0.0);
    let cols = par::map_range(n, |j| {
        let e = LaurentTail::monomial(j, one);
        let image = match kind {
            OperatorKind::Z => Ok(op_z(&e)),
            OperatorKind::ZStar => op_z_star(&e, s, n),
            OperatorKind::Commutator => commutator_apply(&e, s),
        }?;
        if image.len() < n && !image.is_exact() {
            return Err(Error::Truncation(format!(
                "column {j} has only {} reliable coefficients; {n} requested",
                image.len()
            )));
        }
        Ok(column(&image, n))
    });
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (j, col) in cols.into_iter().enumerate() {
        for (k, v) in col?.into_iter().enumerate() {
            entries[(k, j)] = v;
        }
    }
    Ok(OperatorMatrix { kind, entries })
}

/// `⟨z^{−(j+1)}, z^{−(k+1)}⟩ = h_{jk}` where `H(z, w) = Σ h_{jk} z^j w̄^k`
/// near the origin, read off samples on `|z| = |w| = ρ` by discrete Fourier
/// analysis. Requires the closed polydisk of radius `ρ` inside `Ω × Ω`.
pub fn taylor_gram(kernel: &KernelEvaluator, n: usize, rho: f64) -> Result<DMatrix<Complex64>> {
    let d = kernel.domain();
    let origin = Complex64::new(0.0, 0.0);
    if !d.contains(origin) || rho <= 0.0 || rho >= d.boundary_distance(origin) {
        return Err(Error::InvalidArgument(format!(
            "sampling radius {rho} must lie inside the largest disk about 0 in the domain"
        )));
    }
    // aliasing from index j + m is damped by rho^m; push it below rounding
    let m = ((37.0 / -rho.ln()).ceil() as usize + 2 * n + 8).max(64);
    let theta = 2.0 * std::f64::consts::PI / m as f64;
    let pts: Vec<Complex64> = (0..m).map(|p| Complex64::from_polar(rho, theta * p as f64)).collect();
    let h = par::map_range(m * m, |idx| kernel.h(pts[idx / m], pts[idx % m]));
    let h = h.into_iter().collect::<Result<Vec<_>>>()?;
    let twiddle = |t: usize| Complex64::from_polar(1.0, theta * (t % m) as f64);
    // separable DFT: first over w, then over z
    let partial: Vec<Complex64> = (0..m * n)
        .map(|idx| {
            let (p, k) = (idx / n, idx % n);
            (0..m).map(|q| h[p * m + q] * twiddle(k * q)).sum()
        })
        .collect();
    let mut gram = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        for k in 0..n {
            let acc: Complex64 = (0..m).map(|p| partial[p * n + k] * twiddle(j * p).conj()).sum();
            gram[(k, j)] = acc / (m * m) as f64 / rho.powi((j + k) as i32);
        }
    }
    // symmetrize away rounding
    let sym = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(sym)
}

/// `‖P_V v‖² = q* G^{−1} q` for the orthogonal projection onto the span `V` of
/// a basis with Gram matrix `G`, where `q_k = ⟨v, e_k⟩`. For a rank-one
/// operator `⟨·, v⟩ v` this is the norm of its compression to `V`.
pub fn projected_norm_squared(q: &[Complex64], gram: &DMatrix<Complex64>) -> Result<f64> {
    let n = q.len();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "Gram matrix of size {} for {n} inner products",
            gram.nrows()
        )));
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Gram matrix is not positive definite".into()))?;
    let q = nalgebra::DVector::from_column_slice(q);
    let c = chol.solve(&q);
    Ok(q.dotc(&c).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tail(v: &[f64]) -> LaurentTail {
        LaurentTail::new(v.iter().map(|&x| c(x, 0.0)).collect())
    }

    #[test]
    fn z_examples() {
        let disk = DomainSpec::unit_disk().schwarz_series(1, 4).unwrap();
        assert!(op_z(&disk.s_minus_tail()).max_abs() == 0.0);
        let ell = DomainSpec::ellipse(2.0, 1.0).unwrap().schwarz_series(2, 8).unwrap();
        let shifted = op_z(&ell.s_minus_tail());
        assert!(shifted.coefficient(0).norm() < 1e-14);
        assert!((shifted.coefficient(1) - 1.5).norm() < 1e-12);
        assert!(op_z(&LaurentTail::zero()).is_empty());
    }

    #[test]
    fn z_star_examples() {
        let s = DomainSpec::unit_disk().schwarz_series(1, 4).unwrap();
        let out = op_z_star(&tail(&[1.0]), &s, 3).unwrap();
        assert_eq!(out.coefficients(), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let s = DomainSpec::disk(c(0.0, 0.0), 2.0).unwrap().schwarz_series(1, 4).unwrap();
        let out = op_z_star(&tail(&[1.0]), &s, 3).unwrap();
        assert!((out.coefficient(1) - 4.0).norm() < 1e-14);
        assert!(op_z_star(&LaurentTail::zero(), &s, 3).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn boundary_realizations_on_the_disk() {
        let d = DomainSpec::unit_disk();
        let z = c(1.7, -0.4);
        let v = op_z_boundary(|u| 1.0 / u, &d, z, 1e-13).unwrap().value;
        assert!(v.norm() < 1e-13);
        let v = op_z_star_boundary(|u| 1.0 / u, &d, z, 1e-13).unwrap().value;
        assert!((v - 1.0 / (z * z)).norm() < 1e-13);
        let v = op_z_star_boundary(|_| c(0.0, 0.0), &d, z, 1e-13).unwrap().value;
        assert_eq!(v, c(0.0, 0.0));
        assert!(op_z_boundary(|u| u, &d, c(0.5, 0.0), 1e-13).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let d = DomainSpec::unit_disk();
        let f = tail(&[1.0]);
        let v = resolvent_z(&f, &d, c(3.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((v + 1.0 / 6.0).norm() < 1e-15);
        let v = resolvent_z(&f, &d, c(4.0, 0.0), c(4.0, 0.0)).unwrap();
        assert!((v + 1.0 / 16.0).norm() < 1e-15);
        assert!(matches!(resolvent_z(&f, &d, c(0.5, 0.0), c(2.0, 0.0)), Err(Error::Region(_))));
        let g = resolvent_z_tail(&f, c(3.0, 0.0));
        assert!((g.eval(c(2.0, 0.0)) + 1.0 / 6.0).norm() < 1e-15);
        let b = resolvent_z_boundary(|u| 1.0 / u, &d, c(3.0, 0.0), c(2.0, 0.0), 1e-13).unwrap();
        assert!((b.value + 1.0 / 6.0).norm() < 1e-13);
        let v = resolvent_z_star(|_| c(0.0, 0.0), &d, c(2.0, 0.0), c(3.0, 0.0), 1e-13).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
    }

    #[test]
    fn resolvent_inverts_the_shifted_operator() {
        let f = LaurentTail::new((0..8).map(|k| c(k as f64 - 3.5, 0.25 * k as f64)).collect());
        let a = c(5.0, 0.0);
        let g = resolvent_z_tail(&f, a);
        let back = op_z(&g).axpy(-a, &g);
        assert!(back.approx_eq(&f, 1e-12));
    }

    #[test]
    fn commutator_examples() {
        let s = DomainSpec::unit_disk().schwarz_series(1, 8).unwrap();
        let out = commutator_apply(&tail(&[1.0]), &s).unwrap();
        assert!(out.approx_eq(&tail(&[-1.0]), 1e-15));
        let out = commutator_apply(&tail(&[0.0, 1.0]), &s).unwrap();
        assert!(out.max_abs() == 0.0);
        let out = commutator_apply(&tail(&[2.5]), &s).unwrap();
        assert!(out.approx_eq(&tail(&[-2.5]), 1e-15));
    }

    #[test]
    fn z_matrix_is_a_shift() {
        let s = DomainSpec::unit_disk().schwarz_series(1, 8).unwrap();
        let m = matrix_truncation(OperatorKind::Z, &s, 5).unwrap();
        for k in 0..5 {
            for j in 0..5 {
                let want = if j == k + 1 { 1.0 } else { 0.0 };
                assert_eq!(m.entries[(k, j)], c(want, 0.0));
            }
        }
        let f = tail(&[1.0, 2.0, 3.0]);
        assert!(m.apply(&f).approx_eq(&op_z(&f), 0.0));
    }

    #[test]
    fn disk_commutator_matrix_is_rank_one() {
        let s = DomainSpec::unit_disk().schwarz_series(1, 20).unwrap();
        let m = matrix_truncation(OperatorKind::Commutator, &s, 16).unwrap();
        let sv = m.singular_values();
        assert!((sv[0] - 1.0).abs() < 1e-14 && sv[1] < 1e-8);
        assert_eq!(m.entries[(0, 0)], c(-1.0, 0.0));
    }

    #[test]
    fn disk_taylor_gram_is_the_identity() {
        let k = KernelEvaluator::new(&DomainSpec::unit_disk()).unwrap();
        let g = taylor_gram(&k, 6, 0.9).unwrap();
        let err = (g - DMatrix::identity(6, 6)).norm();
        assert!(err < 1e-12, "{err}");
    }
}
