//! Germs at infinity `f(z) = Σ_{k≥0} a_k z^{−(k+1)}` and their arithmetic.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::domain::TwoSidedSeries;
use crate::error::{Error, Result};

/// Default number of retained coefficients.
pub const DEFAULT_ORDER: usize = 64;

/// How far the stored coefficients can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// The function is exactly the finite sum of the stored terms.
    Exact,
    /// Coefficients `0..n` are exact, everything from `n` on is unknown.
    After(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentTail {
    coefficients: Vec<Complex64>,
    truncation: Truncation,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl LaurentTail {
    /// The finite sum `Σ a_k z^{−(k+1)}`, exact.
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        Self {
            coefficients,
            truncation: Truncation::Exact,
        }
    }

    pub fn with_truncation(coefficients: Vec<Complex64>, truncation: Truncation) -> Self {
        let truncation = match truncation {
            Truncation::After(n) if n > coefficients.len() => Truncation::After(coefficients.len()),
            t => t,
        };
        Self {
            coefficients,
            truncation,
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    /// `c · z^{−(k+1)}`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut a = vec![zero(); k + 1];
        a[k] = c;
        Self::new(a)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.coefficients.get(k).copied().unwrap_or_else(zero)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Number of leading coefficients known exactly (`usize::MAX` when exact).
    pub fn reliable_order(&self) -> usize {
        match self.truncation {
            Truncation::Exact => usize::MAX,
            Truncation::After(n) => n,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.truncation == Truncation::Exact
    }

    /// Keeps the first `n` coefficients.
    pub fn truncate(&self, n: usize) -> Self {
        if n >= self.len() {
            return self.clone();
        }
        let nonzero_dropped = self.coefficients[n..].iter().any(|c| c.norm() != 0.0);
        let truncation = match self.truncation {
            Truncation::Exact if !nonzero_dropped => Truncation::Exact,
            Truncation::Exact => Truncation::After(n),
            Truncation::After(m) => Truncation::After(m.min(n)),
        };
        Self::with_truncation(self.coefficients[..n].to_vec(), truncation)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|a| a * c).collect(),
            truncation: self.truncation,
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &LaurentTail) -> Self {
        let n = self.len().max(other.len());
        let coefficients = (0..n).map(|k| self.coefficient(k) + c * other.coefficient(k)).collect();
        Self::with_truncation(coefficients, combine(self.truncation, other.truncation))
    }

    pub fn sub(&self, other: &LaurentTail) -> Self {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficientwise comparison with tolerance relative to the larger of
    /// the two maximal coefficients (absolute below magnitude 1).
    pub fn approx_eq(&self, other: &LaurentTail, tol: f64) -> bool {
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        self.sub(other).max_abs() <= tol * scale
    }

    /// `(z f(z))_−`, with the dropped constant `a_0` returned alongside.
    pub fn multiply_by_z_minus(&self) -> (LaurentTail, Complex64) {
        let a0 = self.coefficient(0);
        let coefficients = self.coefficients.iter().skip(1).copied().collect();
        let truncation = match self.truncation {
            Truncation::Exact => Truncation::Exact,
            Truncation::After(n) => Truncation::After(n.saturating_sub(1)),
        };
        (Self::with_truncation(coefficients, truncation), a0)
    }

    /// `res_∞ f = −(1/2πi)∮_{|ζ|=R} f dζ = −a_0`.
    pub fn residue_at_infinity(&self) -> Complex64 {
        -self.coefficient(0)
    }

    /// `f′` as a tail: the coefficient of `z^{−(k+2)}` is `−(k+1)a_k`.
    pub fn derivative(&self) -> Self {
        let mut coefficients = vec![zero()];
        coefficients.extend(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a * -((k + 1) as f64)),
        );
        let truncation = match self.truncation {
            Truncation::Exact => Truncation::Exact,
            Truncation::After(n) => Truncation::After(n + 1),
        };
        Self::with_truncation(coefficients, truncation)
    }

    /// Horner evaluation in `1/z` with the geometric tail bound
    /// `max|a_k|·(R/|z|)^N/(|z| − R)` (zero for exact tails).
    pub fn evaluate(&self, z: Complex64, radius: f64) -> Result<(Complex64, f64)> {
        if !(z.norm() > radius) {
            return Err(Error::Region(format!(
                "germ at infinity evaluated at {z}, inside the disk of radius {radius}"
            )));
        }
        let u = 1.0 / z;
        let mut acc = zero();
        for a in self.coefficients.iter().rev() {
            acc = acc * u + a;
        }
        let bound = match self.truncation {
            Truncation::Exact => 0.0,
            Truncation::After(_) => {
                let n = self.len() as i32;
                self.max_abs() * (radius / z.norm()).powi(n) / (z.norm() - radius)
            }
        };
        Ok((acc * u, bound))
    }

    /// Evaluation without region check, for points known to lie outside.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let u = 1.0 / z;
        self.coefficients.iter().rev().fold(zero(), |acc, a| acc * u + a) * u
    }
}

fn combine(a: Truncation, b: Truncation) -> Truncation {
    match (a, b) {
        (Truncation::Exact, t) | (t, Truncation::Exact) => t,
        (Truncation::After(m), Truncation::After(n)) => Truncation::After(m.min(n)),
    }
}

/// `(S(z) f(z))_−` with `b_k = Σ_l M_{k−l−1} a_l` for `k < n_out`.
///
/// Fails when some requested coefficient needs a moment that is not stored,
/// or a coefficient of `f` beyond its exact range that could meet a nonzero
/// interior moment.
pub fn convolve_schwarz_minus(s: &TwoSidedSeries, f: &LaurentTail, n_out: usize) -> Result<LaurentTail> {
    let reliable_f = f.reliable_order();
    let mut b = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let mut acc = zero();
        for (l, a) in f.coefficients().iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let idx = k as isize - l as isize - 1;
            let m = s.moment(idx).ok_or_else(|| {
                Error::Truncation(format!(
                    "coefficient {k} needs the moment of index {idx}, which is not stored"
                ))
            })?;
            acc += m * a;
        }
        if reliable_f != usize::MAX {
            // unknown a_l for l ≥ N meet M_{k−l−1}, which must vanish
            let first_unknown = k as isize - reliable_f as isize - 1;
            let vanishes = s.interior_complete && -first_unknown > s.k_int() as isize;
            if !vanishes {
                return Err(Error::Truncation(format!(
                    "coefficient {k} depends on terms of f beyond its exact order {reliable_f}"
                )));
            }
        }
        b.push(acc);
    }
    let natural = s.k_ext() + f.len() + 1;
    let exact = f.is_exact() && s.interior_complete && s.exterior_complete && n_out >= natural;
    let truncation = if exact {
        Truncation::Exact
    } else {
        Truncation::After(n_out)
    };
    Ok(LaurentTail::with_truncation(b, truncation))
}

/// Points `R e^{2πij/m}`, `j = 0..m`.
pub fn circle_samples(radius: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

/// Recovers `a_0..a_{n−1}` from values at [`circle_samples`]`(radius, m)` by
/// discrete Fourier analysis, returning the tail and the relative residual
/// of the reconstruction at the samples.
pub fn tail_from_samples(values: &[Complex64], radius: f64, n: usize, tol: f64) -> Result<(LaurentTail, f64)> {
    let m = values.len();
    if m < 2 * n || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "{m} samples cannot resolve {n} coefficients; need at least {}",
            2 * n
        )));
    }
    let a: Vec<Complex64> = (0..n)
        .map(|k| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, 2.0 * PI * ((k + 1) * j) as f64 / m as f64))
                .sum();
            s / m as f64 * radius.powi(k as i32 + 1)
        })
        .collect();
    let tail = LaurentTail::with_truncation(a, Truncation::After(n));
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let residual = if scale == 0.0 {
        0.0
    } else {
        circle_samples(radius, m)
            .iter()
            .zip(values)
            .map(|(z, v)| (tail.eval(*z) - v).norm())
            .fold(0.0, f64::max)
            / scale
    };
    if residual > tol {
        return Err(Error::Conditioning { residual, tol });
    }
    Ok((tail, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tail(v: &[f64]) -> LaurentTail {
        LaurentTail::new(v.iter().map(|&x| c(x)).collect())
    }

    #[test]
    fn shift_examples() {
        let (b, a0) = tail(&[1.0, 2.0, 3.0]).multiply_by_z_minus();
        assert_eq!(b, tail(&[2.0, 3.0]));
        assert_eq!(a0, c(1.0));
        assert!(tail(&[4.0]).multiply_by_z_minus().0.is_empty());
        assert!(LaurentTail::zero().multiply_by_z_minus().0.is_empty());
    }

    #[test]
    fn residue_examples() {
        assert_eq!(tail(&[1.0]).residue_at_infinity(), c(-1.0));
        assert_eq!(tail(&[0.0, 1.0]).residue_at_infinity(), c(0.0));
        assert_eq!(tail(&[3.0, 5.0]).residue_at_infinity(), c(-3.0));
    }

    #[test]
    fn residue_matches_contour_integral() {
        let f = tail(&[3.0, 5.0, -1.0]);
        let pts = circle_samples(2.0, 64);
        let h = 2.0 * PI / 64.0;
        let integral: Complex64 = pts.iter().map(|z| f.eval(*z) * z * Complex64::new(0.0, h)).sum();
        let res = -integral / Complex64::new(0.0, 2.0 * PI);
        assert!((res - f.residue_at_infinity()).norm() < 1e-13);
    }

    #[test]
    fn evaluate_examples() {
        let (v, bound) = tail(&[1.0]).evaluate(c(2.0), 1.0).unwrap();
        assert!((v - 0.5).norm() < 1e-15 && bound == 0.0);
        let (v, _) = tail(&[1.0, 1.0]).evaluate(c(10.0), 1.0).unwrap();
        assert!((v - 0.11).norm() < 1e-15);
        assert!(tail(&[1.0]).evaluate(c(0.5), 1.0).is_err());
    }

    #[test]
    fn disk_convolution_examples() {
        let s = DomainSpec::unit_disk().schwarz_series(4, 4).unwrap();
        let b = convolve_schwarz_minus(&s, &tail(&[1.0]), 3).unwrap();
        assert_eq!(b.coefficients(), &[c(0.0), c(1.0), c(0.0)]);
        let f = tail(&[1.0, -2.0, 0.5]);
        let b = convolve_schwarz_minus(&s, &f, 5).unwrap();
        for k in 0..5 {
            let expect = if k == 0 { c(0.0) } else { f.coefficient(k - 1) };
            assert_eq!(b.coefficient(k), expect);
        }
        assert!(b.is_exact() || b.reliable_order() >= 5);
        let s = DomainSpec::disk(c(0.0), 3.0).unwrap().schwarz_series(2, 2).unwrap();
        let b = convolve_schwarz_minus(&s, &tail(&[1.0, 0.0]), 3).unwrap();
        assert_eq!(b.coefficients(), &[c(0.0), c(9.0), c(0.0)]);
    }

    #[test]
    fn convolution_reports_missing_moments() {
        let s = DomainSpec::ellipse(2.0, 1.0).unwrap().schwarz_series(4, 3).unwrap();
        // b_5 needs M_4, beyond K_ext = 3
        assert!(matches!(
            convolve_schwarz_minus(&s, &tail(&[1.0]), 6),
            Err(Error::Truncation(_))
        ));
        assert!(convolve_schwarz_minus(&s, &tail(&[1.0]), 4).is_ok());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = tail(&[1.0, -0.5, 0.25]);
        let z = Complex64::new(2.0, 1.0);
        let h = 1e-5;
        let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        assert!((f.derivative().eval(z) - fd).norm() < 1e-9);
    }

    #[test]
    fn sample_round_trip_examples() {
        let pts = circle_samples(2.0, 32);
        let vals: Vec<_> = pts.iter().map(|z| 1.0 / z).collect();
        let (t, res) = tail_from_samples(&vals, 2.0, 8, 1e-12).unwrap();
        assert!((t.coefficient(0) - 1.0).norm() < 1e-13 && res < 1e-12);
        assert!(t.coefficients()[1..].iter().all(|a| a.norm() < 1e-13));
        let zeros = vec![c(0.0); 16];
        let (t, _) = tail_from_samples(&zeros, 2.0, 8, 1e-12).unwrap();
        assert!(t.max_abs() == 0.0);
        assert!(tail_from_samples(&zeros, 2.0, 9, 1e-12).is_err());
    }

    #[test]
    fn aliased_samples_are_rejected() {
        // a positive power cannot be represented by a germ vanishing at infinity
        let pts = circle_samples(2.0, 32);
        let vals: Vec<_> = pts.iter().map(|z| *z).collect();
        assert!(matches!(
            tail_from_samples(&vals, 2.0, 8, 1e-8),
            Err(Error::Conditioning { .. })
        ));
    }
}
