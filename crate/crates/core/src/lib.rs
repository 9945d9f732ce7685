//! Numerical engine for Gaussian-modulated coherent-state CV-QKD with a
//! trusted heterodyne receiver, and for matching the link SNR to a fixed-rate
//! reconciliation code by injecting trusted artificial noise at the receiver.
//!
//! * [`gaussian`]: covariance-matrix toolkit (symplectic spectra, entropies,
//!   beamsplitters, heterodyne conditioning).
//! * [`model`]: SNR, mutual information, Holevo bound and secret fraction.
//! * [`rate_match`]: codes, rate-matching strategies, operating points and
//!   transmittance sweeps.
//! * [`sim`]: quadrature-level Monte Carlo of the prepare-and-measure link.

pub mod gaussian;
pub mod model;
pub mod rate_match;
pub mod sim;

pub use gaussian::{CovMatrix, GaussianError, SymplecticSpectrum};
pub use model::{InfoBudget, LinkParams, ModelError};
pub use rate_match::{
    BaselinePoint, CodeSpec, OperatingPoint, RateMatchError, RowStatus, Strategy, StrategyResult,
    SweepRow, SweepTable,
};
pub use sim::{SimConfig, SimError, SimStats};
