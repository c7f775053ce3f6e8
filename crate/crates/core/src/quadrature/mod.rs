//! Boundary and area quadrature.

mod area;
mod boundary;
mod gauss;

pub use area::{apply_area, integrate_area, AreaEstimate, AreaQuadrature, MAX_REFINE_DEPTH};
pub use boundary::{
    integrate_boundary, integrate_boundary_adaptive, integrate_boundary_spectral, integrate_boundary_unchecked, nodes_for_distance,
    BoundaryQuadrature, DEFAULT_BOUNDARY_NODES, MAX_BOUNDARY_NODES,
};
pub use gauss::gauss_legendre_unit;
