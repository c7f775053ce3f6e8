//! Exterior velocity fields.
//!
//! A sample `f = u + iv` stands for the vector field `u ∂_x − v ∂_y`; then
//! `2∂f/∂z̄ = div v − i curl v`, so analytic fields are incompressible and
//! irrotational.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::hilbert::HElement;
use crate::par;

/// Orientation convention, as recorded in reports.
pub const ORIENTATION: &str = "f = u + iv is the vector field u d/dx - v d/dy; 2 df/dzbar = div - i curl";

/// Rectangle `[x0, x1] × [y0, y1]` sampled with spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub h: f64,
}

impl GridSpec {
    /// Parses `x0,x1,y0,y1,h`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("grid '{s}': {e}")))?;
        match v[..] {
            [x0, x1, y0, y1, h] => Ok(GridSpec { x0, x1, y0, y1, h }),
            _ => Err(Error::InvalidArgument(format!("grid '{s}' needs x0,x1,y0,y1,h"))),
        }
    }
}

/// Sample points with a mask of points too close to the closed domain.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    spec: GridSpec,
    nx: usize,
    ny: usize,
    masked: Vec<bool>,
}

impl FieldGrid {
    /// Points within `h` of the closed domain are masked.
    pub fn new(d: &DomainSpec, spec: GridSpec) -> Result<Self> {
        let GridSpec { x0, x1, y0, y1, h } = spec;
        if !(h > 0.0 && h.is_finite()) || !(x1 >= x0) || !(y1 >= y0) {
            return Err(Error::InvalidArgument(format!("grid needs h > 0 and ordered bounds, got {spec:?}")));
        }
        let nx = ((x1 - x0) / h + 1e-9).floor() as usize + 1;
        let ny = ((y1 - y0) / h + 1e-9).floor() as usize + 1;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(Error::InvalidArgument(format!("grid of {nx} x {ny} points is too large")));
        }
        let mut grid = FieldGrid {
            spec,
            nx,
            ny,
            masked: Vec::new(),
        };
        grid.masked = par::map_range(nx * ny, |i| {
            let z = grid.point(i);
            d.contains_closed(z) || d.boundary_distance(z) < h
        });
        Ok(grid)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index `i = iy·nx + ix`.
    pub fn point(&self, i: usize) -> Complex64 {
        let (ix, iy) = (i % self.nx, i / self.nx);
        Complex64::new(self.spec.x0 + ix as f64 * self.spec.h, self.spec.y0 + iy as f64 * self.spec.h)
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.masked[i]
    }

    pub fn unmasked(&self) -> usize {
        self.masked.iter().filter(|m| !**m).count()
    }
}

/// Field values on a grid, `None` where masked.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    pub grid: FieldGrid,
    pub values: Vec<Option<Complex64>>,
}

impl FieldSamples {
    /// Samples of a given function; useful for closed-form fields.
    pub fn from_fn<F>(grid: &FieldGrid, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |i| (!grid.is_masked(i)).then(|| f(grid.point(i))));
        FieldSamples {
            grid: grid.clone(),
            values,
        }
    }

    /// Largest `|f − g|` over points unmasked in both.
    pub fn max_difference(&self, other: &FieldSamples) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `x,y,u,v,speed`, one row per unmasked point, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,u,v,speed\n");
        for (i, v) in self.values.iter().enumerate() {
            if let Some(f) = v {
                let z = self.grid.point(i);
                let _ = writeln!(out, "{:?},{:?},{:?},{:?},{:?}", z.re, z.im, f.re, f.im, f.norm());
            }
        }
        out
    }
}

/// `f = C[μ]` at every unmasked grid point.
pub fn velocity_field(mu: &HElement, d: &DomainSpec, grid: &FieldGrid) -> Result<FieldSamples> {
    let values = par::map_range(grid.len(), |i| {
        if grid.is_masked(i) {
            Ok(None)
        } else {
            mu.exterior_transform(d, grid.point(i)).map(Some)
        }
    });
    Ok(FieldSamples {
        grid: grid.clone(),
        values: values.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivCurl {
    /// `max |2∂f/∂z̄|` over full stencils.
    pub max_residual: f64,
    pub max_divergence: f64,
    pub max_curl: f64,
    pub stencils: usize,
    /// Interior grid points whose stencil touched the mask.
    pub skipped: usize,
}

/// `2∂f/∂z̄ ≈ (f(z+h) − f(z−h))/2h + i (f(z+ih) − f(z−ih))/2h`.
pub fn div_curl_check(samples: &FieldSamples) -> DivCurl {
    let g = &samples.grid;
    let (nx, ny) = g.shape();
    let h = g.h();
    let mut out = DivCurl {
        max_residual: 0.0,
        max_divergence: 0.0,
        max_curl: 0.0,
        stencils: 0,
        skipped: 0,
    };
    for iy in 1..ny.saturating_sub(1) {
        for ix in 1..nx.saturating_sub(1) {
            let i = iy * nx + ix;
            let at = |j: usize| samples.values[j];
            if at(i).is_none() {
                continue;
            }
            let (Some(e), Some(w), Some(n), Some(s)) = (at(i + 1), at(i - 1), at(i + nx), at(i - nx)) else {
                out.skipped += 1;
                continue;
            };
            let dbar = (e - w) / (2.0 * h) + Complex64::i() * (n - s) / (2.0 * h);
            out.stencils += 1;
            out.max_residual = out.max_residual.max(dbar.norm());
            out.max_divergence = out.max_divergence.max(dbar.re.abs());
            out.max_curl = out.max_curl.max(dbar.im.abs());
        }
    }
    out
}
