//! Photon-counting statistics in the dark output port of an interferometer
//! driven by a coherent laser and a squeezed vacuum.
//!
//! Three independent routes to the same observables:
//!
//! * [`darkport`]: closed-form strong-field results (squeezed coherent state
//!   in the dark port, Hermite-polynomial amplitudes, analytic moments).
//! * [`gaussian`]: exact first and second moments at any splitter angle by
//!   propagating quadrature means and covariances.
//! * [`fockoracle`]: brute-force truncated two-mode Fock simulation, the
//!   reference for everything else at small photon numbers.
//!
//! [`disentangle`] recovers the ordered-product coefficients of the
//! beam-splitter output operator from a 4x4 adjoint representation.

pub mod error;
pub mod numkit;
pub mod states;
pub mod darkport;
pub mod disentangle;
pub mod fockoracle;
pub mod gaussian;

pub use error::{Error, Result};
pub use states::{CoherentParams, Moments, PhotonDistribution, Port, PortGeometry, SqueezeParams};
