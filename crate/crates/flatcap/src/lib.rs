//! Delayed onset of Turing patterns for a Brusselator on a spherical cap that
//! slowly flattens: Laplace–Beltrami spectra on caps, the drifting
//! axisymmetric state, the nonautonomous centre-manifold normal form, and a
//! direct PDE solver to check the reduction against.

pub mod error;
pub mod geometry;
pub mod kinetics;
pub mod nf;
pub mod ode;
pub mod quasipattern;
pub mod reduction;
pub mod simulator;
pub mod specfun;
pub mod spline;

pub use error::{Error, Result};
