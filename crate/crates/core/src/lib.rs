//! Gradient discretisation of degenerate nonlinear parabolic equations
//!
//! `∂t β(u) − div a(x, ν(u), ∇ζ(u)) = f` on a bounded domain with homogeneous
//! Dirichlet conditions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod checks;
pub mod cli;
pub mod flux;
pub mod gd;
pub mod geometry;
pub mod harness;
pub mod instances;
pub mod nonlinearity;
pub mod quadrature;
pub mod scheme;

/// Points and vectors in the plane; one-dimensional objects use the first entry.
pub type Vec2 = [f64; 2];
