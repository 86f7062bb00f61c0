//! Special functions and quadrature primitives.

pub mod quadrature;
pub mod special;

pub use quadrature::{
    gauss_hermite, integrate, quad_plane, quad_radial, quad_rect, Integral, QuadratureSpec,
};
pub use special::{
    assoc_laguerre, hermite, hermite_function, ln_factorial, one_minus_sinc, sinc,
};
