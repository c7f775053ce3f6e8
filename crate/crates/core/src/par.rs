//! Data-parallel primitives.
//!
//! With the `parallel` feature the work is spread over the rayon pool; without it
//! the same chunking runs sequentially. Sums are reduced chunk by chunk in index
//! order, so both paths return bit-identical results.

use num_complex::Complex64;

/// Fixed reduction granularity. Changing it changes rounding, not results.
pub const CHUNK: usize = 256;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(i)` for `i in 0..n`, collected in order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps a slice, preserving order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Deterministic `Σ_{i<n} f(i)`.
pub fn sum_range<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    });
    partial
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
}

/// Deterministic sum of `f(i)` that stops at the first error.
pub fn try_sum_range<F, E>(n: usize, f: F) -> Result<Complex64, E>
where
    E: Send,
    F: Fn(usize) -> Result<Complex64, E> + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            acc += f(i)?;
        }
        Ok(acc)
    });
    let mut total = Complex64::new(0.0, 0.0);
    for p in partial {
        total += p?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_plain_sum_for_integers() {
        let s = sum_range(1000, |i| Complex64::new(i as f64, 1.0));
        assert_eq!(s, Complex64::new(499_500.0, 1000.0));
    }

    #[test]
    fn try_sum_propagates_first_error() {
        let r: Result<Complex64, usize> =
            try_sum_range(600, |i| if i == 300 { Err(i) } else { Ok(Complex64::new(1.0, 0.0)) });
        assert_eq!(r, Err(300));
    }

    #[test]
    fn map_range_keeps_order() {
        assert_eq!(map_range(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
